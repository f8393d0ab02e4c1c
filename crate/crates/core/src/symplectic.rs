//! Sp₆ for the form Σ (x_i y_{i+3} − y_i x_{i+3}), the SL₂³ embedding,
//! Plücker coordinates of the bottom Lagrangian, p-adic norms and cells.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{min_valuation, p_pow, rat, rational_to_string, Rational, Valuation};
use crate::error::{Error, Result};
use crate::linalg::{Mat, Sl2};

/// Ω = [[0, I₃], [−I₃, 0]], so ω(x, y) = x Ω ᵗy.
pub fn omega() -> Mat {
    Mat::from_fn(6, 6, |i, j| {
        if j == i + 3 {
            rat(1)
        } else if i == j + 3 {
            rat(-1)
        } else {
            rat(0)
        }
    })
}

pub fn is_symplectic(g: &Mat) -> bool {
    if g.rows() != 6 || g.cols() != 6 {
        return false;
    }
    let om = omega();
    g.mul(&om).mul(&g.transpose()) == om
}

/// ω(x, y) for row vectors of length six.
pub fn symplectic_pairing(x: &[Rational], y: &[Rational]) -> Rational {
    (0..3).fold(Rational::zero(), |acc, i| acc + &x[i] * &y[i + 3] - &y[i] * &x[i + 3])
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Sp6(Mat);

impl Sp6 {
    pub fn new(m: Mat) -> Result<Self> {
        if !is_symplectic(&m) {
            return Err(Error::NotSymplectic);
        }
        Ok(Sp6(m))
    }

    pub fn identity() -> Self {
        Sp6(Mat::identity(6))
    }

    pub fn mat(&self) -> &Mat {
        &self.0
    }

    pub fn mul(&self, other: &Sp6) -> Sp6 {
        Sp6(self.0.mul(&other.0))
    }

    /// g⁻¹ = −Ω ᵗg Ω.
    pub fn inverse(&self) -> Sp6 {
        let om = omega();
        Sp6(om.mul(&self.0.transpose()).mul(&om).neg())
    }

    /// The bottom 3×6 block, whose row span is the Lagrangian W·g.
    pub fn bottom(&self) -> Mat {
        self.0.submatrix(&[3, 4, 5], &[0, 1, 2, 3, 4, 5])
    }
}

impl fmt::Debug for Sp6 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl<'de> Deserialize<'de> for Sp6 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = Mat::deserialize(d)?;
        Sp6::new(m).map_err(serde::de::Error::custom)
    }
}

/// (g₁, g₂, g₃) ↦ the matrix with g_i acting on coordinates i and i + 3.
pub fn embed_sl2_triple(gs: &[Sl2; 3]) -> Result<Sp6> {
    let mut m = Mat::zeros(6, 6);
    for (i, g) in gs.iter().enumerate() {
        if &g.a * &g.d - &g.b * &g.c != Rational::one() {
            return Err(Error::NotSpecialLinear);
        }
        m[(i, i)] = g.a.clone();
        m[(i, i + 3)] = g.b.clone();
        m[(i + 3, i)] = g.c.clone();
        m[(i + 3, i + 3)] = g.d.clone();
    }
    Ok(Sp6(m))
}

/// Block diagonal diag(A, ᵗA⁻¹).
pub fn levi(a: &Mat) -> Result<Sp6> {
    let inv_t = a.inverse()?.transpose();
    Ok(Sp6(Mat::block_diag(&[a, &inv_t])))
}

/// [[I, Z], [0, I]] for symmetric Z.
pub fn unipotent(z: &Mat) -> Result<Sp6> {
    if !z.is_symmetric() || z.rows() != 3 {
        return Err(Error::InvalidInput("Z must be a symmetric 3x3 matrix".into()));
    }
    let mut m = Mat::identity(6);
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j + 3)] = z[(i, j)].clone();
        }
    }
    Ok(Sp6(m))
}

/// diag(x^{−c}, 1, 1, x^c, 1, 1).
pub fn cocharacter(x: &Rational, c: i64) -> Result<Sp6> {
    if x.is_zero() {
        return Err(Error::ZeroInput);
    }
    let xc = if c >= 0 { num_traits::pow(x.clone(), c as usize) } else { num_traits::pow(x.recip(), (-c) as usize) };
    let one = rat(1);
    Ok(Sp6(Mat::diag(&[xc.recip(), one.clone(), one.clone(), xc, one.clone(), one])))
}

/// diag(x I₃, x⁻¹ I₃).
pub fn scalar_levi(x: &Rational) -> Result<Sp6> {
    if x.is_zero() {
        return Err(Error::ZeroInput);
    }
    let xi = x.recip();
    Ok(Sp6(Mat::diag(&[x.clone(), x.clone(), x.clone(), xi.clone(), xi.clone(), xi])))
}

/// Index triples α₁ < α₂ < α₃ (0-based) in lexicographic order.
pub fn plucker_indices() -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(20);
    for a in 0..6 {
        for b in a + 1..6 {
            for c in b + 1..6 {
                out.push([a, b, c]);
            }
        }
    }
    out
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PluckerVector {
    coords: Vec<Rational>,
}

impl PluckerVector {
    /// Wedge of the three rows of a 3×6 matrix.
    pub fn of_rows(b: &Mat) -> Result<Self> {
        if b.rows() != 3 || b.cols() != 6 {
            return Err(Error::InvalidInput("expected a 3x6 matrix".into()));
        }
        let coords = plucker_indices().iter().map(|cols| b.submatrix(&[0, 1, 2], cols).det()).collect();
        Ok(PluckerVector { coords })
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    /// Coordinate on e_{α₁α₂α₃}, 1-based indices.
    pub fn get(&self, idx: [usize; 3]) -> Option<&Rational> {
        let key = [idx[0].checked_sub(1)?, idx[1].checked_sub(1)?, idx[2].checked_sub(1)?];
        plucker_indices().iter().position(|t| *t == key).map(|i| &self.coords[i])
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Coordinates keyed by 1-based labels such as "456".
    pub fn labelled(&self) -> Vec<(String, Rational)> {
        plucker_indices()
            .iter()
            .zip(&self.coords)
            .map(|(t, x)| (t.iter().map(|i| (i + 1).to_string()).collect(), x.clone()))
            .collect()
    }

    pub fn min_valuation(&self, p: u64) -> Valuation {
        min_valuation(&self.coords, p)
    }
}

impl fmt::Debug for PluckerVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .labelled()
            .into_iter()
            .filter(|(_, x)| !x.is_zero())
            .map(|(l, x)| format!("{}·e{l}", rational_to_string(&x)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for PluckerVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(20))?;
        for (l, x) in self.labelled() {
            m.serialize_entry(&l, &rational_to_string(&x))?;
        }
        m.end()
    }
}

pub fn plucker(g: &Sp6) -> PluckerVector {
    PluckerVector::of_rows(&g.bottom()).expect("bottom block is 3x6")
}

/// Cell c with |g| = p^{−c}.  The Plücker vector of a symplectic matrix is never zero.
pub fn iwasawa_cell(g: &Sp6, p: u64) -> i64 {
    plucker(g).min_valuation(p).finite().expect("Plücker vector of an invertible matrix is nonzero")
}

pub fn plucker_norm(g: &Sp6, p: u64) -> Rational {
    p_pow(p, -iwasawa_cell(g, p))
}

/// Σ_{j ≤ c/2} p^{2j} for c ≥ 0, else 0.
pub fn basic_b_cell(c: i64, p: u64) -> Rational {
    if c < 0 {
        return Rational::zero();
    }
    let p2 = BigInt::from(p) * BigInt::from(p);
    let mut term = BigInt::one();
    let mut sum = BigInt::zero();
    for _ in 0..=c / 2 {
        sum += &term;
        term *= &p2;
    }
    Rational::from_integer(sum)
}

pub fn basic_b(g: &Sp6, p: u64) -> Rational {
    basic_b_cell(iwasawa_cell(g, p), p)
}

/// The five standard Lagrangians W_a, a ∈ {000, 100, 010, 001, 111}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrbitLabel {
    #[serde(rename = "000")]
    L000,
    #[serde(rename = "100")]
    L100,
    #[serde(rename = "010")]
    L010,
    #[serde(rename = "001")]
    L001,
    #[serde(rename = "111")]
    L111,
}

impl OrbitLabel {
    pub const ALL: [OrbitLabel; 5] = [OrbitLabel::L000, OrbitLabel::L100, OrbitLabel::L010, OrbitLabel::L001, OrbitLabel::L111];

    pub fn as_str(&self) -> &'static str {
        match self {
            OrbitLabel::L000 => "000",
            OrbitLabel::L100 => "100",
            OrbitLabel::L010 => "010",
            OrbitLabel::L001 => "001",
            OrbitLabel::L111 => "111",
        }
    }

    /// 0 for 000, i for the label with a 1 in slot i, None for 111.
    pub fn gamma_index(&self) -> Option<u8> {
        match self {
            OrbitLabel::L000 => Some(0),
            OrbitLabel::L100 => Some(1),
            OrbitLabel::L010 => Some(2),
            OrbitLabel::L001 => Some(3),
            OrbitLabel::L111 => None,
        }
    }
}

impl fmt::Display for OrbitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OrbitLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| c.is_ascii_digit()).collect();
        OrbitLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == t)
            .ok_or_else(|| Error::InvalidInput(format!("unknown orbit label {s:?}")))
    }
}

/// The integral representative γ_a (γ_0 for 000, γ_i for the others); 111 gives I₆.
pub fn gamma_rep(label: OrbitLabel) -> Sp6 {
    let rows: [[i64; 6]; 6] = match label {
        OrbitLabel::L000 => [
            [0, 0, 0, -1, 0, 0],
            [0, 1, 0, 0, 0, 0],
            [0, 0, 1, 0, 0, 0],
            [1, 1, 1, 0, 0, 0],
            [0, 0, 0, -1, 1, 0],
            [0, 0, 0, -1, 0, 1],
        ],
        OrbitLabel::L100 => [
            [1, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 1],
            [0, 0, 0, 1, 0, 0],
            [0, 0, 0, 0, 1, 1],
            [0, 1, -1, 0, 0, 0],
        ],
        OrbitLabel::L010 => [
            [0, 1, 0, 0, 0, 0],
            [1, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 1],
            [0, 0, 0, 0, 1, 0],
            [0, 0, 0, 1, 0, 1],
            [1, 0, -1, 0, 0, 0],
        ],
        OrbitLabel::L001 => [
            [0, 0, 1, 0, 0, 0],
            [1, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 1, 0],
            [0, 0, 0, 0, 0, 1],
            [0, 0, 0, 1, 1, 0],
            [1, -1, 0, 0, 0, 0],
        ],
        OrbitLabel::L111 => return Sp6::identity(),
    };
    let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
    Sp6::new(Mat::from_i64(&refs)).expect("standard representatives are symplectic")
}

/// A basis of W_a as a 3×6 matrix.
pub fn isotropic_rep(label: OrbitLabel) -> Mat {
    let rows: [[i64; 6]; 3] = match label {
        OrbitLabel::L000 => [[1, 1, 1, 0, 0, 0], [0, 0, 0, -1, 1, 0], [0, 0, 0, -1, 0, 1]],
        OrbitLabel::L100 => [[0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 1, 1], [0, 1, -1, 0, 0, 0]],
        OrbitLabel::L010 => [[0, 0, 0, 0, 1, 0], [0, 0, 0, 1, 0, 1], [1, 0, -1, 0, 0, 0]],
        OrbitLabel::L001 => [[0, 0, 0, 0, 0, 1], [0, 0, 0, 1, 1, 0], [1, -1, 0, 0, 0, 0]],
        OrbitLabel::L111 => [[0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 1, 0], [0, 0, 0, 0, 0, 1]],
    };
    let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
    Mat::from_i64(&refs)
}

fn is_n(g: &Sl2) -> bool {
    g.a.is_one() && g.c.is_zero() && g.d.is_one()
}

fn is_upper(g: &Sl2) -> bool {
    g.c.is_zero()
}

/// diag(1, −1)·g·diag(1, −1).
pub fn sign_conjugate(g: &Sl2) -> Sl2 {
    Sl2 { a: g.a.clone(), b: -g.b.clone(), c: -g.c.clone(), d: g.d.clone() }
}

fn check_det(gs: &[Sl2; 3]) -> Result<()> {
    if gs.iter().any(|g| &g.a * &g.d - &g.b * &g.c != Rational::one()) {
        return Err(Error::NotSpecialLinear);
    }
    Ok(())
}

/// Membership in the stabiliser of W_a in SL₂³, by its parametric shape.
pub fn in_isotropy_group(label: OrbitLabel, gs: &[Sl2; 3]) -> Result<bool> {
    check_det(gs)?;
    let [g1, g2, g3] = gs;
    Ok(match label {
        OrbitLabel::L000 => {
            // diag(a, a⁻¹)·n(t_i) with Σ t_i = 0
            gs.iter().all(is_upper) && g1.a == g2.a && g2.a == g3.a && (&g1.b + &g2.b + &g3.b).is_zero()
        }
        OrbitLabel::L100 => is_upper(g1) && *g3 == sign_conjugate(g2),
        OrbitLabel::L010 => is_upper(g2) && *g3 == sign_conjugate(g1),
        OrbitLabel::L001 => is_upper(g3) && *g2 == sign_conjugate(g1),
        OrbitLabel::L111 => gs.iter().all(is_upper),
    })
}

/// Membership in the stabiliser of [P,P]γ_a in SL₂³, by its parametric shape.
pub fn stabilizer_member(label: OrbitLabel, gs: &[Sl2; 3]) -> Result<bool> {
    check_det(gs)?;
    let [g1, g2, g3] = gs;
    Ok(match label {
        OrbitLabel::L000 => gs.iter().all(is_n) && (&g1.b + &g2.b + &g3.b).is_zero(),
        OrbitLabel::L100 => is_n(g1) && *g3 == sign_conjugate(g2),
        OrbitLabel::L010 => is_n(g2) && *g3 == sign_conjugate(g1),
        OrbitLabel::L001 => is_n(g3) && *g2 == sign_conjugate(g1),
        OrbitLabel::L111 => gs.iter().all(is_upper) && (&g1.d * &g2.d * &g3.d).is_one(),
    })
}

/// Whether the row span of W_a is preserved by the embedded triple.
pub fn fixes_lagrangian(label: OrbitLabel, gs: &[Sl2; 3]) -> Result<bool> {
    let w = isotropic_rep(label);
    let g = embed_sl2_triple(gs)?;
    Ok(w.mul(g.mat()).same_row_space(&w))
}

/// Whether h lies in [P,P]: lower-left block zero and upper-left determinant one.
pub fn in_commutator_parabolic(h: &Sp6) -> bool {
    let m = h.mat();
    let lower = m.submatrix(&[3, 4, 5], &[0, 1, 2]);
    lower.entries().iter().all(Zero::is_zero) && m.submatrix(&[0, 1, 2], &[0, 1, 2]).det().is_one()
}

/// Whether [P,P]γ_a·g = [P,P]γ_a, i.e. γ_a g γ_a⁻¹ ∈ [P,P].
pub fn fixes_coset(label: OrbitLabel, gs: &[Sl2; 3]) -> Result<bool> {
    let gamma = gamma_rep(label);
    let g = embed_sl2_triple(gs)?;
    Ok(in_commutator_parabolic(&gamma.mul(&g).mul(&gamma.inverse())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;

    #[test]
    fn identity_plucker() {
        let v = plucker(&Sp6::identity());
        assert_eq!(v.get([4, 5, 6]), Some(&rat(1)));
        assert_eq!(v.coords().iter().filter(|x| !x.is_zero()).count(), 1);
        assert_eq!(iwasawa_cell(&Sp6::identity(), 3), 0);
    }

    #[test]
    fn cocharacter_plucker() {
        let g = cocharacter(&rat(3), 1).unwrap();
        let v = plucker(&g);
        assert_eq!(v.get([4, 5, 6]), Some(&rat(3)));
        assert_eq!(iwasawa_cell(&g, 3), 1);
        assert_eq!(plucker_norm(&g, 3), ratio(1, 3));
    }

    #[test]
    fn gammas_are_symplectic_and_move_w() {
        let w = isotropic_rep(OrbitLabel::L111);
        for l in OrbitLabel::ALL {
            let g = gamma_rep(l);
            assert!(is_symplectic(g.mat()));
            assert!(w.mul(g.mat()).same_row_space(&isotropic_rep(l)), "{l}");
        }
        assert_eq!(plucker(&gamma_rep(OrbitLabel::L000)).get([1, 4, 5]), Some(&rat(1)));
    }

    #[test]
    fn basic_b_values() {
        assert_eq!(basic_b_cell(0, 3), rat(1));
        assert_eq!(basic_b_cell(1, 3), rat(1));
        assert_eq!(basic_b_cell(2, 3), rat(10));
        assert_eq!(basic_b_cell(3, 5), rat(26));
        assert_eq!(basic_b_cell(-1, 5), rat(0));
    }

    #[test]
    fn embedding_torus() {
        let a = [rat(2), ratio(1, 3), rat(5)];
        let gs = [
            Sl2::m(a[0].recip()).unwrap(),
            Sl2::m(a[1].recip()).unwrap(),
            Sl2::m(a[2].recip()).unwrap(),
        ];
        let g = embed_sl2_triple(&gs).unwrap();
        let inv: Vec<Rational> = a.iter().map(|x| x.recip()).collect();
        let expected = Mat::diag(&[inv[0].clone(), inv[1].clone(), inv[2].clone(), a[0].clone(), a[1].clone(), a[2].clone()]);
        assert_eq!(g.mat(), &expected);
        let bad = [Sl2 { a: rat(2), b: rat(0), c: rat(0), d: rat(1) }, Sl2::identity(), Sl2::identity()];
        assert_eq!(embed_sl2_triple(&bad), Err(Error::NotSpecialLinear));
    }

    #[test]
    fn inverse_is_inverse() {
        let g = gamma_rep(OrbitLabel::L010);
        assert_eq!(g.mul(&g.inverse()), Sp6::identity());
    }
}
