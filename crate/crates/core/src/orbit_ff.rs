//! Lagrangian subspaces of F_q⁶ for the standard alternating form and their
//! orbits under SL₂(F_q)³, for small primes q.
//!
//! Subspaces are stored in reduced row echelon form and keyed by a base-q
//! integer; orbits are closed under the generators n(1) and w of each factor.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::error::{Error, Result};
use crate::symplectic::{isotropic_rep, OrbitLabel};

/// Environment variable naming a directory for cached enumerations.
pub const CACHE_ENV: &str = "WEILTRIPLE_CACHE_DIR";

const MAX_Q: u8 = 5;

type Rows = [[u8; 6]; 3];

/// An element (a, b, c, d) of SL₂(F_q).
pub type Sl2q = [u8; 4];

fn inv(x: u8, q: u8) -> u8 {
    (1..q).find(|&y| (x as u32 * y as u32) % q as u32 == 1).expect("nonzero residue mod a prime")
}

fn neg(x: u8, q: u8) -> u8 {
    (q - x % q) % q
}

fn mul(x: u8, y: u8, q: u8) -> u8 {
    ((x as u32 * y as u32) % q as u32) as u8
}

fn add(x: u8, y: u8, q: u8) -> u8 {
    ((x as u32 + y as u32) % q as u32) as u8
}

fn check_q(q: u8) -> Result<()> {
    if !is_prime(q as u64) {
        return Err(Error::InvalidInput(format!("q = {q} must be prime")));
    }
    if q > MAX_Q {
        return Err(Error::ResourceBound(format!("q = {q} exceeds the supported bound {MAX_Q}")));
    }
    Ok(())
}

/// Row reduce in place; returns the pivot columns.
fn rref(rows: &mut Rows, q: u8) -> Vec<usize> {
    let mut pivots = Vec::with_capacity(3);
    let mut r = 0;
    for c in 0..6 {
        if r == 3 {
            break;
        }
        let Some(k) = (r..3).find(|&k| rows[k][c] != 0) else { continue };
        rows.swap(r, k);
        let s = inv(rows[r][c], q);
        for x in rows[r].iter_mut() {
            *x = mul(*x, s, q);
        }
        for k in 0..3 {
            if k != r && rows[k][c] != 0 {
                let f = rows[k][c];
                for j in 0..6 {
                    rows[k][j] = add(rows[k][j], neg(mul(f, rows[r][j], q), q), q);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn det3(m: [[u8; 3]; 3], q: u8) -> u8 {
    let t = |a: u8, b: u8, c: u8| mul(mul(a, b, q), c, q);
    let pos = add(add(t(m[0][0], m[1][1], m[2][2]), t(m[0][1], m[1][2], m[2][0]), q), t(m[0][2], m[1][0], m[2][1]), q);
    let negs = add(add(t(m[0][2], m[1][1], m[2][0]), t(m[0][0], m[1][2], m[2][1]), q), t(m[0][1], m[1][0], m[2][2]), q);
    add(pos, neg(negs, q), q)
}

fn omega(x: &[u8; 6], y: &[u8; 6], q: u8) -> u8 {
    let mut s = 0;
    for i in 0..3 {
        s = add(s, mul(x[i], y[i + 3], q), q);
        s = add(s, neg(mul(y[i], x[i + 3], q), q), q);
    }
    s
}

/// x·embed(g₁, g₂, g₃) for a row vector x.
fn act_row(x: &[u8; 6], gs: &[Sl2q; 3], q: u8) -> [u8; 6] {
    let mut out = [0u8; 6];
    for i in 0..3 {
        let [a, b, c, d] = gs[i];
        out[i] = add(mul(x[i], a, q), mul(x[i + 3], c, q), q);
        out[i + 3] = add(mul(x[i], b, q), mul(x[i + 3], d, q), q);
    }
    out
}

fn act_rows(rows: &Rows, gs: &[Sl2q; 3], q: u8) -> Rows {
    [act_row(&rows[0], gs, q), act_row(&rows[1], gs, q), act_row(&rows[2], gs, q)]
}

/// A Lagrangian subspace of F_q⁶ in canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FqLagrangian {
    pub q: u8,
    pub basis: Rows,
}

impl FqLagrangian {
    /// Canonical form of the row span of a 3×6 matrix; fails unless it is a Lagrangian.
    pub fn from_rows(q: u8, rows: Rows) -> Result<Self> {
        check_q(q)?;
        let mut r = rows.map(|row| row.map(|x| x % q));
        let piv = rref(&mut r, q);
        if piv.len() != 3 {
            return Err(Error::InvalidInput("rows do not span a 3-dimensional subspace".into()));
        }
        for i in 0..3 {
            for j in i + 1..3 {
                if omega(&r[i], &r[j], q) != 0 {
                    return Err(Error::InvalidInput("subspace is not isotropic".into()));
                }
            }
        }
        Ok(FqLagrangian { q, basis: r })
    }

    /// Reduction of an integral 3×6 matrix.
    pub fn from_i64(q: u8, rows: [[i64; 6]; 3]) -> Result<Self> {
        FqLagrangian::from_rows(q, rows.map(|r| r.map(|x| x.rem_euclid(q as i64) as u8)))
    }

    pub fn key(&self) -> u64 {
        self.basis.iter().flatten().fold(0u64, |acc, &x| acc * self.q as u64 + x as u64)
    }

    pub fn from_key(q: u8, mut key: u64) -> Self {
        let mut flat = [0u8; 18];
        for x in flat.iter_mut().rev() {
            *x = (key % q as u64) as u8;
            key /= q as u64;
        }
        let mut basis = [[0u8; 6]; 3];
        for (i, x) in flat.iter().enumerate() {
            basis[i / 6][i % 6] = *x;
        }
        FqLagrangian { q, basis }
    }

    pub fn act(&self, gs: &[Sl2q; 3]) -> FqLagrangian {
        let mut r = act_rows(&self.basis, gs, self.q);
        rref(&mut r, self.q);
        FqLagrangian { q: self.q, basis: r }
    }
}

/// (q + 1)(q² + 1)(q³ + 1).
pub fn lagrangian_count(q: u64) -> u64 {
    (q + 1) * (q * q + 1) * (q * q * q + 1)
}

/// |SL₂(F_q)|³.
pub fn group_order(q: u64) -> u64 {
    (q * (q * q - 1)).pow(3)
}

fn enumerate_uncached(q: u8) -> Vec<FqLagrangian> {
    let mut out = Vec::new();
    for a in 0..6 {
        for b in a + 1..6 {
            for c in b + 1..6 {
                let piv = [a, b, c];
                // free slots: row i, column j > piv[i], j not a pivot
                let free: Vec<(usize, usize)> = (0..3)
                    .flat_map(|i| (piv[i] + 1..6).filter(move |j| !piv.contains(j)).map(move |j| (i, j)))
                    .collect();
                let total = (q as u64).pow(free.len() as u32);
                for idx in 0..total {
                    let mut rows = [[0u8; 6]; 3];
                    for i in 0..3 {
                        rows[i][piv[i]] = 1;
                    }
                    let mut k = idx;
                    for &(i, j) in &free {
                        rows[i][j] = (k % q as u64) as u8;
                        k /= q as u64;
                    }
                    if omega(&rows[0], &rows[1], q) == 0
                        && omega(&rows[0], &rows[2], q) == 0
                        && omega(&rows[1], &rows[2], q) == 0
                    {
                        out.push(FqLagrangian { q, basis: rows });
                    }
                }
            }
        }
    }
    out.sort();
    out
}

fn cache_path(q: u8) -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(|d| PathBuf::from(d).join(format!("lagrangians-q{q}.json")))
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    q: u8,
    keys: Vec<u64>,
}

/// All Lagrangians of F_q⁶, sorted.  When `WEILTRIPLE_CACHE_DIR` is set the
/// list is read from, or written to, that directory.
pub fn enumerate_lagrangians(q: u8) -> Result<Vec<FqLagrangian>> {
    check_q(q)?;
    let path = cache_path(q);
    if let Some(path) = &path {
        if let Ok(text) = fs::read_to_string(path) {
            if let Ok(c) = serde_json::from_str::<CacheFile>(&text) {
                if c.q == q && c.keys.len() as u64 == lagrangian_count(q as u64) {
                    return Ok(c.keys.into_iter().map(|k| FqLagrangian::from_key(q, k)).collect());
                }
            }
        }
    }
    let out = enumerate_uncached(q);
    if let Some(path) = &path {
        let c = CacheFile { q, keys: out.iter().map(FqLagrangian::key).collect() };
        if let Some(dir) = path.parent() {
            let _ = fs::create_dir_all(dir);
        }
        // a failed cache write only costs a recomputation next time
        let _ = fs::write(path, serde_json::to_string(&c).expect("plain data serializes"));
    }
    Ok(out)
}

/// Generators n(1) and w in each factor.
fn generators(q: u8) -> Vec<[Sl2q; 3]> {
    let id: Sl2q = [1, 0, 0, 1];
    let n1: Sl2q = [1, 1, 0, 1];
    let w: Sl2q = [0, 1, q - 1, 0];
    let mut out = Vec::new();
    for slot in 0..3 {
        for g in [n1, w] {
            let mut t = [id; 3];
            t[slot] = g;
            out.push(t);
        }
    }
    out
}

pub fn sl2_elements(q: u8) -> Vec<Sl2q> {
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    if add(mul(a, d, q), neg(mul(b, c, q), q), q) == 1 {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

fn borel_elements(q: u8) -> Vec<Sl2q> {
    sl2_elements(q).into_iter().filter(|g| g[2] == 0).collect()
}

/// diag(1, −1)·g·diag(1, −1).
fn sign_conjugate(g: Sl2q, q: u8) -> Sl2q {
    [g[0], neg(g[1], q), neg(g[2], q), g[3]]
}

fn label_slot(label: OrbitLabel) -> Option<usize> {
    label.gamma_index().filter(|&i| i > 0).map(|i| i as usize - 1)
}

/// (u, g, σ(g)) placed so that u sits in `slot`.
fn with_slot(slot: usize, u: Sl2q, g: Sl2q, q: u8) -> [Sl2q; 3] {
    let mut t = [u; 3];
    let rest: Vec<usize> = (0..3).filter(|&i| i != slot).collect();
    t[rest[0]] = g;
    t[rest[1]] = sign_conjugate(g, q);
    t
}

fn n(t: u8) -> Sl2q {
    [1, t, 0, 1]
}

/// The stabiliser of W_a in SL₂(F_q)³ written out from its parametric shape.
pub fn parametric_isotropy(label: OrbitLabel, q: u8) -> Vec<[Sl2q; 3]> {
    let mut out = HashSet::new();
    match label_slot(label) {
        Some(slot) => {
            for u in borel_elements(q) {
                for g in sl2_elements(q) {
                    out.insert(with_slot(slot, u, g, q));
                }
            }
        }
        None if label == OrbitLabel::L111 => {
            let b = borel_elements(q);
            for x in &b {
                for y in &b {
                    for z in &b {
                        out.insert([*x, *y, *z]);
                    }
                }
            }
        }
        None => {
            // diag(a, a⁻¹)·n(t_i), Σ t_i = 0
            for a in 1..q {
                let ai = inv(a, q);
                for t1 in 0..q {
                    for t2 in 0..q {
                        let t3 = neg(add(t1, t2, q), q);
                        out.insert([t1, t2, t3].map(|t| [a, mul(a, t, q), 0, ai]));
                    }
                }
            }
        }
    }
    let mut v: Vec<_> = out.into_iter().collect();
    v.sort();
    v
}

/// The stabiliser of the point of X above W_a, from its parametric shape.
pub fn parametric_stabilizer(label: OrbitLabel, q: u8) -> Vec<[Sl2q; 3]> {
    let mut out = HashSet::new();
    match label_slot(label) {
        Some(slot) => {
            for t in 0..q {
                for g in sl2_elements(q) {
                    out.insert(with_slot(slot, n(t), g, q));
                }
            }
        }
        None if label == OrbitLabel::L111 => {
            let b = borel_elements(q);
            for x in &b {
                for y in &b {
                    for z in &b {
                        if mul(mul(x[3], y[3], q), z[3], q) == 1 {
                            out.insert([*x, *y, *z]);
                        }
                    }
                }
            }
        }
        None => {
            for t1 in 0..q {
                for t2 in 0..q {
                    out.insert([n(t1), n(t2), n(neg(add(t1, t2, q), q))]);
                }
            }
        }
    }
    let mut v: Vec<_> = out.into_iter().collect();
    v.sort();
    v
}

fn standard_rows(label: OrbitLabel) -> [[i64; 6]; 3] {
    let m = isotropic_rep(label);
    let mut out = [[0i64; 6]; 3];
    for i in 0..3 {
        for j in 0..6 {
            out[i][j] = m[(i, j)].to_integer().try_into().expect("small integer entries");
        }
    }
    out
}

/// W_a reduced mod q.
pub fn standard_lagrangian(label: OrbitLabel, q: u8) -> Result<FqLagrangian> {
    FqLagrangian::from_i64(q, standard_rows(label))
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitInfo {
    pub label: OrbitLabel,
    pub size: u64,
    /// |G(F_q)| / size.
    pub stabilizer_order: u64,
    /// Size of the parametric stabiliser; every member is checked to fix the representative.
    pub parametric_order: u64,
    /// Stabiliser counted over all of G(F_q), when that group is small enough.
    pub direct_stabilizer_order: Option<u64>,
    pub representative: FqLagrangian,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    pub q: u8,
    pub group_order: u64,
    pub lagrangian_count: u64,
    pub orbits: Vec<OrbitInfo>,
}

impl OrbitReport {
    /// |orbit|·|stabiliser| = |G| for every orbit, parametric stabilisers agree,
    /// and the orbits partition the Lagrangians.
    pub fn consistent(&self) -> bool {
        let total: u64 = self.orbits.iter().map(|o| o.size).sum();
        total == self.lagrangian_count
            && self.lagrangian_count == lagrangian_count(self.q as u64)
            && self.orbits.iter().all(|o| {
                o.size * o.stabilizer_order == self.group_order
                    && o.parametric_order == o.stabilizer_order
                    && o.direct_stabilizer_order.is_none_or(|d| d == o.stabilizer_order)
            })
    }
}

/// Orbit of each subspace, as indices into the returned list of orbits.
fn closure(points: &[FqLagrangian], q: u8) -> (HashMap<u64, usize>, Vec<Vec<u64>>) {
    let gens = generators(q);
    let mut owner: HashMap<u64, usize> = HashMap::with_capacity(points.len());
    let mut orbits = Vec::new();
    for start in points {
        if owner.contains_key(&start.key()) {
            continue;
        }
        let id = orbits.len();
        let mut members = vec![start.key()];
        owner.insert(start.key(), id);
        let mut queue = VecDeque::from([*start]);
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y = x.act(g);
                let k = y.key();
                if let std::collections::hash_map::Entry::Vacant(e) = owner.entry(k) {
                    e.insert(id);
                    members.push(k);
                    queue.push_back(y);
                }
            }
        }
        orbits.push(members);
    }
    (owner, orbits)
}

fn full_group(q: u8) -> Option<Vec<[Sl2q; 3]>> {
    if q > 3 {
        return None;
    }
    let s = sl2_elements(q);
    let mut out = Vec::with_capacity(s.len().pow(3));
    for a in &s {
        for b in &s {
            for c in &s {
                out.push([*a, *b, *c]);
            }
        }
    }
    Some(out)
}

/// Decompose the Lagrangians of F_q⁶ into SL₂(F_q)³-orbits in the given order.
pub fn orbit_decompose_from(points: &[FqLagrangian], q: u8) -> Result<OrbitReport> {
    check_q(q)?;
    let (owner, orbits) = closure(points, q);
    let g_order = group_order(q as u64);
    let group = full_group(q);
    let mut infos = Vec::new();
    let mut seen = HashSet::new();
    for (id, members) in orbits.iter().enumerate() {
        let label = OrbitLabel::ALL
            .into_iter()
            .find(|l| standard_lagrangian(*l, q).map(|w| owner.get(&w.key()) == Some(&id)).unwrap_or(false));
        let Some(label) = label else {
            let rep = FqLagrangian::from_key(q, members[0]);
            return Err(Error::UnmatchedOrbit(format!("{:?}", rep.basis)));
        };
        if !seen.insert(label) {
            return Err(Error::UnmatchedOrbit(format!("{label} labels two orbits")));
        }
        let rep = standard_lagrangian(label, q)?;
        let size = members.len() as u64;
        let param = parametric_isotropy(label, q);
        let param_ok = param.iter().all(|g| rep.act(g) == rep);
        let direct = group.as_ref().map(|gr| gr.iter().filter(|g| rep.act(g) == rep).count() as u64);
        infos.push(OrbitInfo {
            label,
            size,
            stabilizer_order: g_order / size,
            parametric_order: if param_ok { param.len() as u64 } else { 0 },
            direct_stabilizer_order: direct,
            representative: rep,
        });
    }
    infos.sort_by_key(|o| o.label);
    Ok(OrbitReport { q, group_order: g_order, lagrangian_count: points.len() as u64, orbits: infos })
}

pub fn orbit_decompose(q: u8) -> Result<OrbitReport> {
    let pts = enumerate_lagrangians(q)?;
    orbit_decompose_from(&pts, q)
}

/// A point of X(F_q): a Lagrangian together with a nonzero multiple s of
/// the Plücker vector of its canonical basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct XPoint {
    pub lagrangian: FqLagrangian,
    pub scale: u8,
}

impl XPoint {
    /// The point represented by the wedge of the rows of a basis.
    pub fn from_basis(q: u8, rows: Rows) -> Result<Self> {
        let rows = rows.map(|r| r.map(|x| x % q));
        let mut r = rows;
        let piv = rref(&mut r, q);
        let lagrangian = FqLagrangian::from_rows(q, r)?;
        // rows = A·R with A the pivot columns of rows
        let a = [0, 1, 2].map(|i| [rows[i][piv[0]], rows[i][piv[1]], rows[i][piv[2]]]);
        Ok(XPoint { lagrangian, scale: det3(a, q) })
    }

    fn basis(&self) -> Rows {
        let mut b = self.lagrangian.basis;
        for x in b[0].iter_mut() {
            *x = mul(*x, self.scale, self.lagrangian.q);
        }
        b
    }

    pub fn act(&self, gs: &[Sl2q; 3]) -> XPoint {
        let q = self.lagrangian.q;
        XPoint::from_basis(q, act_rows(&self.basis(), gs, q)).expect("the action preserves Lagrangians")
    }

    fn key(&self) -> (u64, u8) {
        (self.lagrangian.key(), self.scale)
    }
}

pub fn standard_xpoint(label: OrbitLabel, q: u8) -> Result<XPoint> {
    let rows = standard_rows(label).map(|r| r.map(|x| x.rem_euclid(q as i64) as u8));
    XPoint::from_basis(q, rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct XOrbitInfo {
    pub label: OrbitLabel,
    pub size: u64,
    pub stabilizer_order: u64,
    pub parametric_order: u64,
    /// Number of Lagrangians under this orbit; equals the Lagrangian orbit size when the map is injective on orbits.
    pub lagrangians_covered: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct XReport {
    pub q: u8,
    pub x_count: u64,
    pub x_orbits: Vec<XOrbitInfo>,
    pub lagrangian_orbits: usize,
    /// X(F_q)/G(F_q) → P\Sp₆(F_q)/G(F_q) is a bijection.
    pub bijective: bool,
}

/// Orbits of SL₂(F_q)³ on X(F_q), compared with the Lagrangian orbits.
pub fn xpoints_decompose(q: u8) -> Result<XReport> {
    check_q(q)?;
    if q > 3 {
        return Err(Error::ResourceBound(format!("X(F_q) comparison is limited to q ≤ 3, got {q}")));
    }
    let lag = orbit_decompose(q)?;
    let pts = enumerate_lagrangians(q)?;
    let gens = generators(q);
    let mut owner: HashMap<(u64, u8), usize> = HashMap::new();
    let mut members: Vec<Vec<XPoint>> = Vec::new();
    for l in &pts {
        for s in 1..q {
            let x = XPoint { lagrangian: *l, scale: s };
            if owner.contains_key(&x.key()) {
                continue;
            }
            let id = members.len();
            owner.insert(x.key(), id);
            let mut orbit = vec![x];
            let mut queue = VecDeque::from([x]);
            while let Some(y) = queue.pop_front() {
                for g in &gens {
                    let z = y.act(g);
                    if let std::collections::hash_map::Entry::Vacant(e) = owner.entry(z.key()) {
                        e.insert(id);
                        orbit.push(z);
                        queue.push_back(z);
                    }
                }
            }
            members.push(orbit);
        }
    }
    let g_order = group_order(q as u64);
    let lag_of: HashMap<u64, OrbitLabel> = {
        let (owner_l, orbits_l) = closure(&pts, q);
        let mut m = HashMap::new();
        for o in &lag.orbits {
            let id = owner_l[&o.representative.key()];
            for k in &orbits_l[id] {
                m.insert(*k, o.label);
            }
        }
        m
    };
    let mut infos = Vec::new();
    let mut images = BTreeMap::new();
    let mut bijective = true;
    for (id, orbit) in members.iter().enumerate() {
        let label = OrbitLabel::ALL
            .into_iter()
            .find(|l| standard_xpoint(*l, q).map(|x| owner.get(&x.key()) == Some(&id)).unwrap_or(false));
        let Some(label) = label else {
            return Err(Error::UnmatchedOrbit(format!("X-orbit of {:?}", orbit[0])));
        };
        let covered: HashSet<u64> = orbit.iter().map(|x| x.lagrangian.key()).collect();
        let lag_labels: HashSet<OrbitLabel> = covered.iter().map(|k| lag_of[k]).collect();
        if lag_labels.len() != 1 || !lag_labels.contains(&label) {
            bijective = false;
        }
        *images.entry(label).or_insert(0usize) += 1;
        let rep = standard_xpoint(label, q)?;
        let param = parametric_stabilizer(label, q);
        let param_ok = param.iter().all(|g| rep.act(g) == rep);
        infos.push(XOrbitInfo {
            label,
            size: orbit.len() as u64,
            stabilizer_order: g_order / orbit.len() as u64,
            parametric_order: if param_ok { param.len() as u64 } else { 0 },
            lagrangians_covered: covered.len() as u64,
        });
    }
    // injective on orbits and onto the Lagrangian orbits
    bijective = bijective && images.len() == lag.orbits.len() && images.values().all(|&c| c == 1);
    for info in &infos {
        let l = lag.orbits.iter().find(|o| o.label == info.label);
        if l.map(|o| o.size) != Some(info.lagrangians_covered) {
            bijective = false;
        }
    }
    infos.sort_by_key(|o| o.label);
    Ok(XReport {
        q,
        x_count: owner.len() as u64,
        x_orbits: infos,
        lagrangian_orbits: lag.orbits.len(),
        bijective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_round_trip() {
        let w = standard_lagrangian(OrbitLabel::L000, 3).unwrap();
        assert_eq!(FqLagrangian::from_key(3, w.key()), w);
    }

    #[test]
    fn counts() {
        assert_eq!(enumerate_uncached(2).len() as u64, lagrangian_count(2));
        assert_eq!(group_order(2), 216);
    }

    #[test]
    fn bad_q() {
        assert!(matches!(enumerate_lagrangians(7), Err(Error::ResourceBound(_))));
        assert!(matches!(enumerate_lagrangians(4), Err(Error::InvalidInput(_))));
    }
}
