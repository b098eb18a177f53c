//! Moy-Prasad filtration lattices of `sl_n`, membership of Lie algebra and
//! group elements, and the depth of a Lie algebra element.

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::localfield::{FieldSpec, TruncatedElement};
use crate::rootdata::{cartan, Alcove, RootSystem};
use crate::scalar::rational_serde;
use crate::{Error, Rational, Result};

/// Square matrix over a local field, row-major.
pub type Matrix = Vec<Vec<TruncatedElement>>;

/// Depth reported for elements whose characteristic polynomial of `ad`
/// vanishes identically (nilpotent elements lie in every `𝔤_r`).
pub const DEPTH_CAP: i64 = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisVector {
    /// `E_{ii} - E_{i+1,i+1}`.
    Torus(usize),
    /// `E_{ij}`, spanning the root space of `e_i - e_j` (simple-root coordinates).
    Root { i: usize, j: usize, root: Vec<i64> },
}

/// `sl_n` with its Chevalley basis: torus elements first, then root vectors.
#[derive(Clone, Debug)]
pub struct ChevalleyModel {
    n: usize,
    basis: Vec<BasisVector>,
    roots: RootSystem,
}

impl ChevalleyModel {
    pub fn sl(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("sl_n needs n ≥ 2".into()));
        }
        let mut c = vec![vec![0i64; n - 1]; n - 1];
        for i in 0..n - 1 {
            c[i][i] = 2;
            if i + 1 < n - 1 {
                c[i][i + 1] = -1;
                c[i + 1][i] = -1;
            }
        }
        let roots = RootSystem::from_cartan(if n == 2 { cartan::a1() } else { c })?;
        let mut basis: Vec<BasisVector> = (0..n - 1).map(BasisVector::Torus).collect();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let mut root = vec![0i64; n - 1];
                    let (lo, hi, sign) = if i < j { (i, j, 1) } else { (j, i, -1) };
                    for r in root.iter_mut().take(hi).skip(lo) {
                        *r = sign;
                    }
                    basis.push(BasisVector::Root { i, j, root });
                }
            }
        }
        Ok(Self { n, basis, roots })
    }

    pub fn sl2() -> Self {
        Self::sl(2).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisVector] {
        &self.basis
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.roots
    }

    pub fn label(&self, k: usize) -> String {
        match &self.basis[k] {
            BasisVector::Torus(i) if self.n == 2 => {
                let _ = i;
                "H".into()
            }
            BasisVector::Torus(i) => format!("H{}", i + 1),
            BasisVector::Root { i: 0, j: 1, .. } if self.n == 2 => "E".into(),
            BasisVector::Root { i: 1, j: 0, .. } if self.n == 2 => "F".into(),
            BasisVector::Root { i, j, .. } => format!("E{}{}", i + 1, j + 1),
        }
    }

    /// The integer matrix of a basis vector.
    pub fn basis_matrix(&self, k: usize) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0; self.n]; self.n];
        match &self.basis[k] {
            BasisVector::Torus(i) => {
                m[*i][*i] = 1;
                m[i + 1][i + 1] = -1;
            }
            BasisVector::Root { i, j, .. } => m[*i][*j] = 1,
        }
        m
    }

    /// Structure constants: `[v_a, v_b] = Σ_c table[a][b][c] v_c`.
    pub fn bracket_table(&self) -> Vec<Vec<Vec<i64>>> {
        let d = self.dim();
        let mats: Vec<_> = (0..d).map(|k| self.basis_matrix(k)).collect();
        let mut t = vec![vec![vec![0; d]; d]; d];
        for a in 0..d {
            for b in 0..d {
                let c = int_commutator(&mats[a], &mats[b]);
                t[a][b] = self.int_coordinates(&c);
            }
        }
        t
    }

    fn int_coordinates(&self, m: &[Vec<i64>]) -> Vec<i64> {
        self.basis
            .iter()
            .map(|b| match b {
                BasisVector::Torus(i) => (0..=*i).map(|k| m[k][k]).sum(),
                BasisVector::Root { i, j, .. } => m[*i][*j],
            })
            .collect()
    }

    /// Coordinates of a trace-zero matrix in the basis.
    pub fn coordinates(&self, y: &Matrix) -> Result<Vec<TruncatedElement>> {
        self.check_shape(y)?;
        let field = y[0][0].field();
        let mut trace = TruncatedElement::zero(field);
        for k in 0..self.n {
            trace = trace.add(&y[k][k])?;
        }
        if !trace.is_zero() && trace.absolute_precision().is_none() {
            return Err(Error::InvalidInput("matrix is not trace-free".into()));
        }
        let mut out = Vec::with_capacity(self.dim());
        for b in &self.basis {
            out.push(match b {
                BasisVector::Torus(i) => {
                    let mut s = TruncatedElement::zero(field);
                    for k in 0..=*i {
                        s = s.add(&y[k][k])?;
                    }
                    s
                }
                BasisVector::Root { i, j, .. } => y[*i][*j].clone(),
            });
        }
        Ok(out)
    }

    pub fn from_coordinates(&self, field: FieldSpec, c: &[TruncatedElement]) -> Result<Matrix> {
        let mut m = vec![vec![TruncatedElement::zero(field); self.n]; self.n];
        for (k, b) in self.basis.iter().enumerate() {
            match b {
                BasisVector::Torus(i) => {
                    m[*i][*i] = m[*i][*i].add(&c[k])?;
                    m[i + 1][i + 1] = m[i + 1][i + 1].sub(&c[k])?;
                }
                BasisVector::Root { i, j, .. } => m[*i][*j] = c[k].clone(),
            }
        }
        Ok(m)
    }

    fn check_shape(&self, y: &Matrix) -> Result<()> {
        if y.len() != self.n || y.iter().any(|r| r.len() != self.n) {
            return Err(Error::InvalidInput(format!("expected a {0}x{0} matrix", self.n)));
        }
        let f = y[0][0].field();
        for r in y {
            for e in r {
                f.check_same(&e.field())?;
            }
        }
        Ok(())
    }

    /// Matrix of `ad(Y)` in the Chevalley basis, `Y` given by coordinates.
    pub fn ad_matrix(&self, coords: &[TruncatedElement], field: FieldSpec) -> Result<Matrix> {
        let t = self.bracket_table();
        let d = self.dim();
        let mut m = vec![vec![TruncatedElement::zero(field); d]; d];
        // ad(Y) v_b = Σ_a y_a [v_a, v_b]; column b holds its coordinates
        for (a, ya) in coords.iter().enumerate() {
            if ya.is_zero() {
                continue;
            }
            for b in 0..d {
                for c in 0..d {
                    let k = t[a][b][c];
                    if k != 0 {
                        let term = ya.mul(&TruncatedElement::from_int(field, k))?;
                        m[c][b] = m[c][b].add(&term)?;
                    }
                }
            }
        }
        Ok(m)
    }

    fn ad_matrix_balls(&self, coords: &[Ball], field: FieldSpec) -> Result<Vec<Vec<Ball>>> {
        let t = self.bracket_table();
        let d = self.dim();
        let mut m = vec![vec![Ball { v: TruncatedElement::zero(field), err: None }; d]; d];
        for (a, ya) in coords.iter().enumerate() {
            for b in 0..d {
                for c in 0..d {
                    let k = t[a][b][c];
                    if k != 0 {
                        let kb = Ball { v: TruncatedElement::from_int(field, k), err: None };
                        m[c][b] = m[c][b].add(&ya.mul(&kb)?)?;
                    }
                }
            }
        }
        Ok(m)
    }
}

fn int_commutator(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let mut c = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c[i][j] += a[i][k] * b[k][j] - b[i][k] * a[k][j];
            }
        }
    }
    c
}

fn ceil(r: &Rational) -> i64 {
    r.ceil().to_integer().to_i64().unwrap()
}

fn floor(r: &Rational) -> i64 {
    r.floor().to_integer().to_i64().unwrap()
}

/// Shift table of `𝔤_{x,r}` (or `𝔤_{x,r+}` when strict): the element
/// `Σ c_k v_k` belongs iff `ord(c_k) ≥ shifts[k]` for every `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeDescription {
    #[serde(with = "rational_serde::vec")]
    pub point: Vec<Rational>,
    #[serde(with = "rational_serde")]
    pub level: Rational,
    pub strict: bool,
    pub labels: Vec<String>,
    pub shifts: Vec<i64>,
}

pub fn mp_lattice(model: &ChevalleyModel, x: &[Rational], r: &Rational, strict: bool) -> Result<LatticeDescription> {
    let alcove = Alcove::fundamental(model.root_system());
    if !alcove.contains(x) {
        return Err(Error::PointOutsideAlcove);
    }
    let shift = |t: &Rational| if strict { floor(t) + 1 } else { ceil(t) };
    let shifts = model
        .basis()
        .iter()
        .map(|b| match b {
            BasisVector::Torus(_) => shift(r),
            BasisVector::Root { root, .. } => {
                let ax = root
                    .iter()
                    .zip(x)
                    .fold(Rational::zero(), |s, (g, xi)| s + Rational::from_integer((*g).into()) * xi);
                shift(&(r - ax))
            }
        })
        .collect();
    Ok(LatticeDescription {
        point: x.to_vec(),
        level: r.clone(),
        strict,
        labels: (0..model.dim()).map(|k| model.label(k)).collect(),
        shifts,
    })
}

/// `ord(c) ≥ s`, or an error when the digits cannot tell.
fn meets(c: &Result<TruncatedElement>, s: i64) -> Result<bool> {
    match c {
        Ok(c) => Ok(c.valuation().is_none_or(|v| v >= s)),
        Err(Error::InsufficientPrecision { known_to }) if *known_to >= s => Ok(true),
        Err(e) => Err(e.clone()),
    }
}

pub fn lattice_member(model: &ChevalleyModel, y: &Matrix, l: &LatticeDescription) -> Result<bool> {
    model.check_shape(y)?;
    let field = y[0][0].field();
    for (k, b) in model.basis().iter().enumerate() {
        let c = match b {
            BasisVector::Torus(i) => {
                let mut s = Ok(TruncatedElement::zero(field));
                for j in 0..=*i {
                    s = s.and_then(|s| s.add(&y[j][j]));
                }
                s
            }
            BasisVector::Root { i, j, .. } => Ok(y[*i][*j].clone()),
        };
        if !meets(&c, l.shifts[k])? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Determinant by cofactor expansion along the first row.
pub fn det(m: &Matrix) -> Result<TruncatedElement> {
    let n = m.len();
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let field = m[0][0].field();
    let mut acc = TruncatedElement::zero(field);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Matrix =
            m[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, e)| e.clone()).collect()).collect();
        let term = m[0][j].mul(&det(&minor)?)?;
        acc = if j % 2 == 0 { acc.add(&term)? } else { acc.sub(&term)? };
    }
    Ok(acc)
}

/// `g ∈ G_{x,r}` for `r > 0`, tested as `g - 1 ∈ gl_n` lattice at `(x, r)`:
/// diagonal entries against the torus shift, off-diagonal entries against
/// their root shifts.
pub fn group_member(model: &ChevalleyModel, g: &Matrix, x: &[Rational], r: &Rational) -> Result<bool> {
    if !r.is_positive() {
        return Err(Error::InvalidInput("group filtration needs r > 0".into()));
    }
    model.check_shape(g)?;
    let field = g[0][0].field();
    let one = TruncatedElement::one(field);
    match det(g)?.sub(&one) {
        Ok(d) if !d.is_zero() => return Err(Error::InvalidInput("det(g) != 1".into())),
        Ok(_) | Err(Error::InsufficientPrecision { .. }) => {}
        Err(e) => return Err(e),
    }
    let l = mp_lattice(model, x, r, false)?;
    let torus_shift = l.shifts[0];
    for i in 0..model.n() {
        if !meets(&g[i][i].sub(&one), torus_shift)? {
            return Ok(false);
        }
    }
    for (k, b) in model.basis().iter().enumerate() {
        if let BasisVector::Root { i, j, .. } = b {
            if !meets(&Ok(g[*i][*j].clone()), l.shifts[k])? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

trait BerkowitzRing: Clone {
    fn add(&self, o: &Self) -> Result<Self>;
    fn mul(&self, o: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
}

impl BerkowitzRing for TruncatedElement {
    fn add(&self, o: &Self) -> Result<Self> {
        TruncatedElement::add(self, o)
    }
    fn mul(&self, o: &Self) -> Result<Self> {
        TruncatedElement::mul(self, o)
    }
    fn neg(&self) -> Self {
        TruncatedElement::neg(self)
    }
}

/// `v + 𝔭^err` with `v` exact; `err = None` means no error.
#[derive(Clone, Debug)]
struct Ball {
    v: TruncatedElement,
    err: Option<i64>,
}

impl Ball {
    fn lower(&self) -> Option<i64> {
        match (self.v.valuation(), self.err) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

fn add_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    Some(a? + b?)
}

impl BerkowitzRing for Ball {
    fn add(&self, o: &Self) -> Result<Self> {
        Ok(Ball { v: self.v.add(&o.v)?, err: min_opt(self.err, o.err) })
    }
    fn mul(&self, o: &Self) -> Result<Self> {
        let err = min_opt(add_opt(self.err, o.lower()), add_opt(o.err, self.lower()));
        Ok(Ball { v: self.v.mul(&o.v)?, err })
    }
    fn neg(&self) -> Self {
        Ball { v: self.v.neg(), err: self.err }
    }
}

fn berkowitz<R: BerkowitzRing>(a: &[Vec<R>], zero: R, one: R) -> Result<Vec<R>> {
    let n = a.len();
    let mut v = vec![one.clone()];
    for k in 0..n {
        // leading block A_k = a[..k][..k], row R = a[k][..k], column C = a[..k][k]
        let mut q = vec![one.clone(), a[k][k].neg()];
        let mut w: Vec<R> = (0..k).map(|i| a[i][k].clone()).collect();
        for _ in 0..k {
            let mut rc = zero.clone();
            for i in 0..k {
                rc = rc.add(&a[k][i].mul(&w[i])?)?;
            }
            q.push(rc.neg());
            let mut nw = vec![zero.clone(); k];
            for (i, nwi) in nw.iter_mut().enumerate() {
                for (j, wj) in w.iter().enumerate() {
                    *nwi = nwi.add(&a[i][j].mul(wj)?)?;
                }
            }
            w = nw;
        }
        let mut nv = vec![zero.clone(); k + 2];
        for (i, nvi) in nv.iter_mut().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                if j <= i {
                    *nvi = nvi.add(&q[i - j].mul(vj)?)?;
                }
            }
        }
        v = nv;
    }
    Ok(v)
}

/// Characteristic polynomial `det(t - A) = t^N + c_1 t^{N-1} + ... + c_N`,
/// returned as `[1, c_1, ..., c_N]`, by Berkowitz's division-free algorithm.
pub fn char_poly(a: &Matrix) -> Result<Vec<TruncatedElement>> {
    let field = a[0][0].field();
    berkowitz(a, TruncatedElement::zero(field), TruncatedElement::one(field))
}

/// Depth of a Lie algebra element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Depth {
    #[serde(with = "rational_serde")]
    Exact(Rational),
    /// Every coefficient of the characteristic polynomial of `ad(Y)`
    /// vanishes to the known precision: the depth is at least this value.
    #[serde(with = "rational_serde")]
    AtLeast(Rational),
}

impl Depth {
    /// `𝟙_{𝔤_r}`: decided when the depth is exact or its lower bound reaches `r`.
    pub fn at_least(&self, r: &Rational) -> Option<bool> {
        match self {
            Depth::Exact(d) => Some(d >= r),
            Depth::AtLeast(d) if d >= r => Some(true),
            Depth::AtLeast(_) => None,
        }
    }
}

/// `min_i ord(c_i)/i` over the nonzero coefficients of the characteristic
/// polynomial of `ad(Y)`.
///
/// Truncated entries are lifted to exact ones; a coefficient of degree `i` is
/// then known modulo `ϖ^{a + (i-1)v}` with `a` the least absolute precision
/// and `v` the least valuation among the entries of `Y`.
pub fn depth(y: &Matrix, model: &ChevalleyModel) -> Result<Depth> {
    model.check_shape(y)?;
    let field = y[0][0].field();
    let coords = model.coordinates(y)?;
    if coords.iter().all(|c| c.is_zero()) {
        return Ok(Depth::AtLeast(Rational::from_integer(DEPTH_CAP.into())));
    }
    let amin = coords.iter().filter_map(|c| c.absolute_precision()).min();
    let balls: Vec<Ball> =
        coords.iter().map(|c| Ball { v: c.exact_lift(), err: c.absolute_precision() }).collect();
    let ad = model.ad_matrix_balls(&balls, field)?;
    let zero = Ball { v: TruncatedElement::zero(field), err: None };
    let one = Ball { v: TruncatedElement::one(field), err: None };
    let cp = berkowitz(&ad, zero, one)?;
    // ad(Y) is skew for the trace form, so odd coefficients vanish, and its
    // rank is at most dim - rank(g)
    let top = model.dim() - model.root_system().rank();
    let mut best: Option<Rational> = None;
    let mut bound: Option<Rational> = None;
    for (i, c) in cp.iter().enumerate().skip(2).step_by(2).filter(|(i, _)| *i <= top) {
        let ord = c.v.valuation();
        let certified = match (ord, c.err) {
            (Some(o), Some(k)) => o < k,
            (Some(_), None) => true,
            (None, _) => false,
        };
        let ii = Rational::from_integer((i as i64).into());
        if certified {
            let d = Rational::from_integer(ord.unwrap().into()) / ii;
            best = Some(best.map_or(d.clone(), |b: Rational| b.min(d)));
        } else if let Some(k) = c.err {
            let d = Rational::from_integer(k.into()) / ii;
            bound = Some(bound.map_or(d.clone(), |b: Rational| b.min(d)));
        }
    }
    match (best, bound) {
        (Some(b), None) => Ok(Depth::Exact(b)),
        (Some(b), Some(lb)) if lb >= b => Ok(Depth::Exact(b)),
        (Some(_), Some(_)) => Err(Error::InsufficientPrecision { known_to: amin.unwrap() }),
        (None, Some(lb)) => Ok(Depth::AtLeast(lb.min(Rational::from_integer(DEPTH_CAP.into())))),
        (None, None) => Ok(Depth::AtLeast(Rational::from_integer(DEPTH_CAP.into()))),
    }
}

/// `𝟙_{𝔤_r}(Y)`.
pub fn in_depth_domain(y: &Matrix, model: &ChevalleyModel, r: &Rational) -> Result<bool> {
    let d = depth(y, model)?;
    d.at_least(r).ok_or_else(|| {
        let known = y.iter().flatten().filter_map(|e| e.absolute_precision()).min().unwrap_or(0);
        Error::InsufficientPrecision { known_to: known }
    })
}

/// Integer part helper used by formula builders: `lcm` of the denominators.
pub fn common_denominator(values: &[Rational]) -> i64 {
    values.iter().fold(1i64, |acc, v| acc.lcm(&v.denom().to_i64().unwrap()))
}

/// Convenience constructor for `sl_2` elements `aH + bE + cF`.
pub fn sl2_matrix(a: &TruncatedElement, b: &TruncatedElement, c: &TruncatedElement) -> Matrix {
    vec![vec![a.clone(), b.clone()], vec![c.clone(), a.neg()]]
}

impl LatticeDescription {
    /// `self ⊆ other`, comparing shifts coordinate-wise.
    pub fn contained_in(&self, other: &Self) -> bool {
        self.shifts.iter().zip(&other.shifts).all(|(a, b)| a >= b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::localfield::TruncRing;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn q5() -> FieldSpec {
        FieldSpec::qp(5).unwrap()
    }

    fn int(f: FieldSpec, n: i64) -> TruncatedElement {
        TruncatedElement::from_int(f, n)
    }

    fn mat(f: FieldSpec, a: i64, b: i64, c: i64) -> Matrix {
        sl2_matrix(&int(f, a), &int(f, b), &int(f, c))
    }

    #[test]
    fn bracket_table_is_sl2() {
        let m = ChevalleyModel::sl2();
        let t = m.bracket_table();
        // [H, E] = 2E, [H, F] = -2F, [E, F] = H
        assert_eq!(t[0][1], vec![0, 2, 0]);
        assert_eq!(t[0][2], vec![0, 0, -2]);
        assert_eq!(t[1][2], vec![1, 0, 0]);
        let m3 = ChevalleyModel::sl(3).unwrap();
        assert_eq!(m3.dim(), 8);
        // [E_α, E_-α] lies in the torus
        let t3 = m3.bracket_table();
        for (a, ba) in m3.basis().iter().enumerate() {
            if let BasisVector::Root { i, j, .. } = ba {
                let b = m3
                    .basis()
                    .iter()
                    .position(|x| matches!(x, BasisVector::Root { i: i2, j: j2, .. } if i2 == j && j2 == i))
                    .unwrap();
                assert!(t3[a][b][2..].iter().all(|&x| x == 0));
            }
        }
    }

    #[test]
    fn lattice_examples() {
        let m = ChevalleyModel::sl2();
        let half = [r(1, 2)];
        assert_eq!(mp_lattice(&m, &half, &r(0, 1), false).unwrap().shifts, vec![0, 0, 1]);
        assert_eq!(mp_lattice(&m, &half, &r(1, 2), false).unwrap().shifts, vec![1, 0, 1]);
        assert_eq!(mp_lattice(&m, &[r(0, 1)], &r(0, 1), false).unwrap().shifts, vec![0, 0, 0]);
        assert_eq!(mp_lattice(&m, &[r(0, 1)], &r(0, 1), true).unwrap().shifts, vec![1, 1, 1]);
        assert_eq!(mp_lattice(&m, &[r(3, 2)], &r(0, 1), false).unwrap_err(), Error::PointOutsideAlcove);
    }

    #[test]
    fn membership_examples() {
        let f = q5();
        let m = ChevalleyModel::sl2();
        let l = mp_lattice(&m, &[r(1, 2)], &r(0, 1), false).unwrap();
        assert!(lattice_member(&m, &mat(f, 0, 1, 0), &l).unwrap());
        assert!(!lattice_member(&m, &mat(f, 0, 0, 1), &l).unwrap());
        assert!(lattice_member(&m, &mat(f, 0, 0, 5), &l).unwrap());
        assert!(lattice_member(&m, &mat(f, 0, 0, 0), &l).unwrap());
    }

    fn brute_force(field: FieldSpec, k: u32, levels: &[Rational], stricts: &[bool]) {
        let m = ChevalleyModel::sl2();
        let ring = TruncRing::new(field, k).unwrap();
        let n = ring.size();
        let elems: Vec<TruncatedElement> = (0..n).map(|u| TruncatedElement::from_scaled(field, u, 0)).collect();
        // ord capped at k: zero mod 𝔭^k counts as +∞ since all shifts are < k
        let o = |v: u64| Rational::from_integer((ring.ord(v) as i64 + if v == 0 { 100 } else { 0 }).into());
        for x in [r(0, 1), r(1, 2), r(1, 1)] {
            for lvl in levels {
                for &strict in stricts {
                    let l = mp_lattice(&m, std::slice::from_ref(&x), lvl, strict).unwrap();
                    assert!(l.shifts.iter().all(|&s| s < k as i64));
                    let ok = |lhs: Rational| if strict { lhs > *lvl } else { lhs >= *lvl };
                    for a in 0..n {
                        for b in 0..n {
                            for c in 0..n {
                                let y = sl2_matrix(&elems[a as usize], &elems[b as usize], &elems[c as usize]);
                                let direct = ok(o(a)) && ok(x.clone() + o(b)) && ok(o(c) - x.clone());
                                assert_eq!(lattice_member(&m, &y, &l).unwrap(), direct);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Exhaustive comparison with the defining inequalities on `𝔤(Ω/𝔭^3)`.
    #[test]
    fn brute_force_lattice_q5() {
        brute_force(q5(), 3, &[r(0, 1), r(1, 2), r(1, 1)], &[false]);
    }

    #[test]
    fn brute_force_lattice_strict_and_positive_characteristic() {
        let lv = [r(0, 1), r(1, 2), r(1, 1)];
        brute_force(FieldSpec::qp(3).unwrap(), 3, &[r(0, 1), r(1, 2)], &[true]);
        brute_force(FieldSpec::fpt(5).unwrap(), 3, &lv, &[false]);
        brute_force(FieldSpec::fpt(3).unwrap(), 3, &[r(0, 1), r(1, 2)], &[true]);
    }

    #[test]
    fn nesting() {
        let m = ChevalleyModel::sl(3).unwrap();
        let x = [r(1, 3), r(1, 3)];
        let levels = [r(0, 1), r(1, 3), r(1, 2), r(2, 3), r(1, 1), r(5, 2)];
        for a in &levels {
            for b in &levels {
                if a <= b {
                    let la = mp_lattice(&m, &x, a, false).unwrap();
                    let lb = mp_lattice(&m, &x, b, false).unwrap();
                    assert!(lb.contained_in(&la));
                    let sa = mp_lattice(&m, &x, a, true).unwrap();
                    assert!(sa.contained_in(&la));
                }
            }
        }
    }

    #[test]
    fn group_examples() {
        let f = q5();
        let m = ChevalleyModel::sl2();
        let id = mat(f, 1, 0, 0);
        let id = vec![vec![id[0][0].clone(), id[0][1].clone()], vec![id[1][0].clone(), int(f, 1)]];
        for lvl in [r(1, 2), r(1, 1), r(3, 1)] {
            assert!(group_member(&m, &id, &[r(1, 2)], &lvl).unwrap());
        }
        let g = vec![vec![int(f, 1), int(f, 5)], vec![int(f, 0), int(f, 1)]];
        assert!(group_member(&m, &g, &[r(1, 2)], &r(1, 1)).unwrap());
        let g = vec![vec![int(f, 1), int(f, 1)], vec![int(f, 0), int(f, 1)]];
        assert!(!group_member(&m, &g, &[r(1, 2)], &r(1, 1)).unwrap());
        let bad = vec![vec![int(f, 2), int(f, 0)], vec![int(f, 0), int(f, 1)]];
        assert!(group_member(&m, &bad, &[r(1, 2)], &r(1, 1)).is_err());
    }

    /// The subgroup generated by torus and root subgroup elements, computed
    /// by closure in `SL_2(Ω/𝔭^2)`, equals the set cut out by `group_member`.
    #[test]
    fn group_membership_matches_generated_subgroup() {
        use std::collections::{BTreeSet, VecDeque};
        let field = FieldSpec::qp(3).unwrap();
        let ring = TruncRing::new(field, 2).unwrap();
        let m = ChevalleyModel::sl2();
        type G = [u64; 4];
        let mul = |a: &G, b: &G| -> G {
            [
                ring.add(ring.mul(a[0], b[0]), ring.mul(a[1], b[2])),
                ring.add(ring.mul(a[0], b[1]), ring.mul(a[1], b[3])),
                ring.add(ring.mul(a[2], b[0]), ring.mul(a[3], b[2])),
                ring.add(ring.mul(a[2], b[1]), ring.mul(a[3], b[3])),
            ]
        };
        for x in [r(0, 1), r(1, 2), r(1, 1)] {
            for lvl in [r(1, 2), r(1, 1)] {
                let l = mp_lattice(&m, std::slice::from_ref(&x), &lvl, false).unwrap();
                let (ts, es, fs) = (l.shifts[0] as u32, l.shifts[1] as u32, l.shifts[2] as u32);
                let mut gens: Vec<G> = Vec::new();
                for t in 0..ring.size() {
                    if ring.ord(t) >= es {
                        gens.push([1, t, 0, 1]);
                    }
                    if ring.ord(t) >= fs {
                        gens.push([1, 0, t, 1]);
                    }
                    let u = ring.add(1, t);
                    if ring.ord(t) >= ts {
                        gens.push([u, 0, 0, ring.inv_unit(u).unwrap()]);
                    }
                }
                let mut seen: BTreeSet<G> = BTreeSet::new();
                let mut queue = VecDeque::from([[1, 0, 0, 1]]);
                seen.insert([1, 0, 0, 1]);
                while let Some(g) = queue.pop_front() {
                    for h in &gens {
                        let k = mul(&g, h);
                        if seen.insert(k) {
                            queue.push_back(k);
                        }
                    }
                }
                let mut direct = BTreeSet::new();
                for u in 0..ring.size().pow(4) {
                    let g = [u % 9, u / 9 % 9, u / 81 % 9, u / 729];
                    if ring.sub(ring.mul(g[0], g[3]), ring.mul(g[1], g[2])) != 1 {
                        continue;
                    }
                    let e = |v: u64| TruncatedElement::from_scaled(field, v, 0);
                    let gm = vec![vec![e(g[0]), e(g[1])], vec![e(g[2]), e(g[3])]];
                    // entries known mod 𝔭^2: truncate so shifts ≥ 2 read as "zero to precision"
                    let gm: Matrix = gm
                        .into_iter()
                        .map(|row| row.into_iter().map(|x| x.truncate(2).unwrap_or(x)).collect())
                        .collect();
                    if group_member(&m, &gm, std::slice::from_ref(&x), &lvl).unwrap() {
                        direct.insert(g);
                    }
                }
                assert_eq!(seen, direct, "x = {x}, r = {lvl}");
            }
        }
    }

    #[test]
    fn char_poly_of_ad_h() {
        let f = q5();
        let m = ChevalleyModel::sl2();
        let c = m.coordinates(&mat(f, 1, 0, 0)).unwrap();
        let cp = char_poly(&m.ad_matrix(&c, f).unwrap()).unwrap();
        assert_eq!(cp, vec![int(f, 1), int(f, 0), int(f, -4), int(f, 0)]);
    }

    /// Berkowitz against Faddeev-LeVerrier over the rationals.
    #[test]
    fn char_poly_matches_leverrier() {
        let f = q5();
        let vals = [[3, -1, 4, 1], [5, 9, -2, 6], [5, 3, 5, -8], [9, 7, 9, 3]];
        let a: Matrix = vals.iter().map(|r| r.iter().map(|&v| int(f, v)).collect()).collect();
        let cp = char_poly(&a).unwrap();
        let n = 4;
        let q: Vec<Vec<Rational>> = vals.iter().map(|r| r.iter().map(|&v| Rational::from_integer(v.into())).collect()).collect();
        let mut mk = vec![vec![Rational::zero(); n]; n];
        let mut c = vec![Rational::one()];
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{k-1} I ; c_k = -tr(A M_k)/k
            let mut next = vec![vec![Rational::zero(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        next[i][j] += q[i][l].clone() * mk[l][j].clone();
                    }
                }
                next[i][i] += c[k - 1].clone();
            }
            mk = next;
            let mut tr = Rational::zero();
            for i in 0..n {
                for l in 0..n {
                    tr += q[i][l].clone() * mk[l][i].clone();
                }
            }
            c.push(-tr / Rational::from_integer((k as i64).into()));
        }
        let got: Vec<Rational> = cp.iter().map(|e| e.as_rational().unwrap()).collect();
        assert_eq!(got, c);
    }

    #[test]
    fn depth_examples() {
        let f = q5();
        let m = ChevalleyModel::sl2();
        assert_eq!(depth(&mat(f, 1, 0, 0), &m).unwrap(), Depth::Exact(r(0, 1)));
        assert_eq!(depth(&mat(f, 5, 0, 0), &m).unwrap(), Depth::Exact(r(1, 1)));
        assert_eq!(depth(&mat(f, 0, 1, 5), &m).unwrap(), Depth::Exact(r(1, 2)));
        assert_eq!(depth(&mat(f, 0, 1, 0), &m).unwrap(), Depth::AtLeast(r(DEPTH_CAP, 1)));
        // truncated nilpotent-looking element: bounded by its precision
        let e = TruncatedElement::from_digits(f, 0, &[1, 0]).unwrap();
        let z = TruncatedElement::from_digits(f, 3, &[1]).unwrap();
        let y = sl2_matrix(&TruncatedElement::zero(f), &e, &z);
        // c_2 = -4bc has ord 3 with known precision 4 + 0: certified
        assert_eq!(depth(&y, &m).unwrap(), Depth::Exact(r(3, 2)));
    }

    #[test]
    fn depth_scales() {
        let m = ChevalleyModel::sl2();
        for field in [q5(), FieldSpec::fpt(5).unwrap()] {
            let pi = TruncatedElement::uniformizer(field);
            let zero = TruncatedElement::zero(field);
            let one = TruncatedElement::one(field);
            let mut samples: Vec<Matrix> =
                [(1, 0, 0), (2, 3, 1), (0, 1, 2), (1, 1, 1)].iter().map(|&(a, b, c)| mat(field, a, b, c)).collect();
            samples.push(sl2_matrix(&zero, &one, &pi));
            for y in samples {
                let py: Matrix = y.iter().map(|row| row.iter().map(|e| e.shift(1)).collect()).collect();
                let (Depth::Exact(d0), Depth::Exact(d1)) = (depth(&y, &m).unwrap(), depth(&py, &m).unwrap()) else {
                    panic!()
                };
                assert_eq!(d1, d0 + r(1, 1));
            }
        }
    }

    /// Depth against the union of `K`-conjugates of `𝔤_{x,r}` over the
    /// optimal points `x ∈ {0, 1/2, 1}`, with `K` enumerated mod `𝔭^2`.
    #[test]
    fn depth_matches_optimal_point_union() {
        let field = FieldSpec::qp(3).unwrap();
        let m = ChevalleyModel::sl2();
        let ring = TruncRing::new(field, 2).unwrap();
        let mut ks = Vec::new();
        for u in 0..ring.size().pow(3) {
            let (x, y, z) = (u % 9, u / 9 % 9, u / 81);
            if let Some(xi) = ring.inv_unit(x) {
                let w = ring.mul(xi, ring.add(1, ring.mul(y, z)));
                ks.push([x, y, z, w]);
            }
        }
        ks.push([0, 1, ring.from_i64(-1), 0]);
        let pts = [r(0, 1), r(1, 2), r(1, 1)];
        for (a, b, c) in [(1, 0, 0), (3, 0, 0), (0, 1, 3), (0, 3, 1), (1, 1, 0), (0, 1, 1), (3, 1, 3)] {
            let e = |v: i64| TruncatedElement::from_int(field, v);
            let y = sl2_matrix(&e(a), &e(b), &e(c));
            let Depth::Exact(d) = depth(&y, &m).unwrap() else { panic!() };
            let union_member = |lvl: &Rational| {
                ks.iter().any(|k| {
                    // Ad(k)(a,b,c) on exact lifts; the lattices have shifts ≤ 2
                    let s = |v: u64| v as i64;
                    let (x, yy, z, w) = (s(k[0]), s(k[1]), s(k[2]), s(k[3]));
                    let a2 = a * (x * w + yy * z) - x * z * b + yy * w * c;
                    let b2 = x * x * b - 2 * x * yy * a - yy * yy * c;
                    let c2 = 2 * z * w * a - z * z * b + w * w * c;
                    let ad = sl2_matrix(&e(a2), &e(b2), &e(c2))
                        .into_iter()
                        .map(|row| row.into_iter().map(|v| v.truncate(2).unwrap_or(v)).collect())
                        .collect();
                    pts.iter().any(|x| {
                        let l = mp_lattice(&m, std::slice::from_ref(x), lvl, false).unwrap();
                        lattice_member(&m, &ad, &l).unwrap()
                    })
                })
            };
            assert!(union_member(&d), "({a},{b},{c}) depth {d}");
            assert!(!union_member(&(d.clone() + r(1, 2))), "({a},{b},{c}) above depth {d}");
        }
    }
}
