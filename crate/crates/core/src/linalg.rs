//! Dense matrices over the rationals and the SL₂ element type.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{parse_rational, rat, rational_to_string, Rational};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged matrix".into()));
        }
        Ok(Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Mat { rows: r, cols: c, data: rows.iter().flat_map(|row| row.iter().map(|&x| rat(x))).collect() }
    }

    pub fn diag(entries: &[Rational]) -> Self {
        let n = entries.len();
        let mut m = Mat::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn scale(&self, s: &Rational) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> Mat {
        self.scale(&rat(-1))
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Row echelon form by Gaussian elimination; returns the reduced form and its rank.
    pub fn rref(&self) -> (Mat, usize) {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            let Some(piv) = (rank..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(rank, piv);
            let inv = m[(rank, col)].recip();
            for j in 0..m.cols {
                let x = &m[(rank, j)] * &inv;
                m[(rank, j)] = x;
            }
            for r in 0..m.rows {
                if r != rank && !m[(r, col)].is_zero() {
                    let f = m[(r, col)].clone();
                    for j in 0..m.cols {
                        let x = &m[(rank, j)] * &f;
                        m[(r, j)] -= x;
                    }
                }
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        (m, rank)
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn det(&self) -> Rational {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !m[(r, col)].is_zero()) else {
                return Rational::zero();
            };
            if piv != col {
                m.swap_rows(piv, col);
                det = -det;
            }
            let p = m[(col, col)].clone();
            det *= &p;
            for r in col + 1..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let f = &m[(r, col)] / &p;
                for j in col..n {
                    let x = &m[(col, j)] * &f;
                    m[(r, j)] -= x;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<Mat> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let aug = Mat::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                Rational::one()
            } else {
                Rational::zero()
            }
        });
        let (r, _) = aug.rref();
        if (0..n).any(|i| r[(i, i)] != Rational::one()) {
            return Err(Error::SingularMatrix);
        }
        Ok(Mat::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
    }

    /// Whether the row spaces of two matrices coincide.
    pub fn same_row_space(&self, other: &Mat) -> bool {
        let (a, ra) = self.rref();
        let (b, rb) = other.rref();
        ra == rb && (0..ra).all(|i| a.row(i) == b.row(i))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    pub fn block_diag(blocks: &[&Mat]) -> Mat {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Mat::zeros(n, m);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| self.row(i).iter().map(rational_to_string).collect()).collect()
    }

    pub fn from_strings(rows: &[Vec<String>]) -> Result<Mat> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Mat::from_rows(parsed)
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_strings())
    }
}

impl Serialize for Mat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        Mat::from_strings(&rows).map_err(serde::de::Error::custom)
    }
}

/// A 2×2 matrix `[[a, b], [c, d]]` of determinant one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sl2 {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl Sl2 {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Result<Self> {
        if &a * &d - &b * &c != Rational::one() {
            return Err(Error::NotSpecialLinear);
        }
        Ok(Sl2 { a, b, c, d })
    }

    pub fn from_mat(m: &Mat) -> Result<Self> {
        if m.rows() != 2 || m.cols() != 2 {
            return Err(Error::InvalidInput("expected a 2x2 matrix".into()));
        }
        Sl2::new(m[(0, 0)].clone(), m[(0, 1)].clone(), m[(1, 0)].clone(), m[(1, 1)].clone())
    }

    pub fn identity() -> Self {
        Sl2 { a: rat(1), b: rat(0), c: rat(0), d: rat(1) }
    }

    /// `[[1, t], [0, 1]]`.
    pub fn n(t: Rational) -> Self {
        Sl2 { a: rat(1), b: t, c: rat(0), d: rat(1) }
    }

    /// `[[1, 0], [t, 1]]`.
    pub fn lower(t: Rational) -> Self {
        Sl2 { a: rat(1), b: rat(0), c: t, d: rat(1) }
    }

    /// `[[0, 1], [-1, 0]]`.
    pub fn w() -> Self {
        Sl2 { a: rat(0), b: rat(1), c: rat(-1), d: rat(0) }
    }

    /// `diag(a, 1/a)`.
    pub fn m(a: Rational) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::ZeroInput);
        }
        let inv = a.recip();
        Ok(Sl2 { a, b: rat(0), c: rat(0), d: inv })
    }

    pub fn mul(&self, o: &Sl2) -> Sl2 {
        Sl2 {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    pub fn inverse(&self) -> Sl2 {
        Sl2 { a: self.d.clone(), b: -self.b.clone(), c: -self.c.clone(), d: self.a.clone() }
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_rows(vec![vec![self.a.clone(), self.b.clone()], vec![self.c.clone(), self.d.clone()]])
            .expect("2x2")
    }
}

impl fmt::Debug for Sl2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            rational_to_string(&self.a),
            rational_to_string(&self.b),
            rational_to_string(&self.c),
            rational_to_string(&self.d)
        )
    }
}

impl Serialize for Sl2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_mat().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sl2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = Mat::deserialize(d)?;
        Sl2::from_mat(&m).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;

    #[test]
    fn det_and_inverse() {
        let m = Mat::from_i64(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(m.det(), rat(18));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(3));
        assert_eq!(Mat::from_i64(&[&[1, 2], &[2, 4]]).inverse(), Err(Error::SingularMatrix));
    }

    #[test]
    fn row_spaces() {
        let a = Mat::from_i64(&[&[1, 0, 1], &[0, 1, 1]]);
        let b = Mat::from_i64(&[&[1, 1, 2], &[1, -1, 0]]);
        assert!(a.same_row_space(&b));
        assert!(!a.same_row_space(&Mat::from_i64(&[&[1, 0, 0], &[0, 1, 0]])));
    }

    #[test]
    fn sl2_basics() {
        assert!(Sl2::new(rat(1), rat(1), rat(1), rat(1)).is_err());
        let g = Sl2::new(rat(2), ratio(1, 3), rat(3), rat(1)).unwrap();
        assert_eq!(g.mul(&g.inverse()), Sl2::identity());
        let w = Sl2::w();
        assert_eq!(w.mul(&w), Sl2::m(rat(-1)).unwrap());
    }
}
