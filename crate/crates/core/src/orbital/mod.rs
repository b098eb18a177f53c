//! `sl_2`: the trace form, discriminants, the `η` kernel, orbital integrals
//! of regular semisimple orbits, Fourier transforms of test functions, and
//! the two computations of `μ̂_X`.
//!
//! Elements are written `Y = aH + bE + cF`. The trace form is
//! `⟨X, Y⟩ = Tr(XY) = 2aa' + bc' + cb'`, non-degenerate for `p > 2`.

mod cells;
mod fourier;
mod muhat;

pub use cells::{orbital_integral, LerayCells, OrbitalValue};
pub use fourier::{fourier_test, BasicFunction, TestFunction, Transform};
pub use muhat::{
    local_constancy, mu_hat, mu_hat_zero, niceness_scan, ConstancySpec, HuntsingerCertificate, LocalConstancy,
    MuHatParams, MuHatReport, NicenessReport, NicenessRow, NicenessSpec, Perturbation, Route,
};

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::RootAccumulator;
use crate::localfield::lambda_scaled;
use crate::localfield::{FieldSpec, TruncRing, TruncatedElement};
use crate::moyprasad::{char_poly, depth, sl2_matrix, ChevalleyModel, Depth};
use crate::{Cyc, Error, Rational, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LieElement {
    pub a: TruncatedElement,
    pub b: TruncatedElement,
    pub c: TruncatedElement,
}

impl LieElement {
    pub fn new(a: TruncatedElement, b: TruncatedElement, c: TruncatedElement) -> Result<Self> {
        a.field().check_same(&b.field())?;
        a.field().check_same(&c.field())?;
        Ok(Self { a, b, c })
    }

    pub fn from_ints(field: FieldSpec, a: i64, b: i64, c: i64) -> Self {
        let e = |n| TruncatedElement::from_int(field, n);
        Self { a: e(a), b: e(b), c: e(c) }
    }

    pub fn zero(field: FieldSpec) -> Self {
        Self::from_ints(field, 0, 0, 0)
    }

    pub fn h(field: FieldSpec) -> Self {
        Self::from_ints(field, 1, 0, 0)
    }

    pub fn e(field: FieldSpec) -> Self {
        Self::from_ints(field, 0, 1, 0)
    }

    pub fn f(field: FieldSpec) -> Self {
        Self::from_ints(field, 0, 0, 1)
    }

    pub fn field(&self) -> FieldSpec {
        self.a.field()
    }

    pub fn coords(&self) -> [&TruncatedElement; 3] {
        [&self.a, &self.b, &self.c]
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|x| x.is_zero())
    }

    /// Least valuation of a coordinate, `None` for zero.
    pub fn min_ord(&self) -> Option<i64> {
        self.coords().iter().filter_map(|x| x.valuation()).min()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        Ok(Self { a: self.a.add(&o.a)?, b: self.b.add(&o.b)?, c: self.c.add(&o.c)? })
    }

    pub fn neg(&self) -> Self {
        Self { a: self.a.neg(), b: self.b.neg(), c: self.c.neg() }
    }

    pub fn scale(&self, t: &TruncatedElement) -> Result<Self> {
        Ok(Self { a: self.a.mul(t)?, b: self.b.mul(t)?, c: self.c.mul(t)? })
    }

    /// Multiplication by `ϖ^e`.
    pub fn shift(&self, e: i64) -> Self {
        Self { a: self.a.shift(e), b: self.b.shift(e), c: self.c.shift(e) }
    }

    pub fn transfer(&self, target: FieldSpec) -> Result<Self> {
        Ok(Self { a: self.a.transfer(target)?, b: self.b.transfer(target)?, c: self.c.transfer(target)? })
    }

    pub fn exact_lift(&self) -> Self {
        Self { a: self.a.exact_lift(), b: self.b.exact_lift(), c: self.c.exact_lift() }
    }

    /// `a² + bc = -det`, constant on adjoint orbits.
    pub fn q(&self) -> Result<TruncatedElement> {
        self.a.mul(&self.a)?.add(&self.b.mul(&self.c)?)
    }

    /// Coordinates `u` with `Y ≡ ϖ^s u (mod 𝔭^{s+k})`, packed as ring elements.
    pub fn scaled(&self, s: i64, k: u32) -> Result<[u64; 3]> {
        let f = |x: &TruncatedElement| if x.is_zero() { Ok(0) } else { x.to_scaled(s, k) };
        Ok([f(&self.a)?, f(&self.b)?, f(&self.c)?])
    }

    pub fn from_scaled(field: FieldSpec, u: [u64; 3], s: i64) -> Self {
        let f = |x| TruncatedElement::from_scaled(field, x, s);
        Self { a: f(u[0]), b: f(u[1]), c: f(u[2]) }
    }

    /// `Ad(k) Y = k Y k⁻¹`.
    pub fn ad(&self, k: &Sl2) -> Result<Self> {
        let (a, b, c) = (&self.a, &self.b, &self.c);
        let (x, y, z, w) = (&k.x, &k.y, &k.z, &k.w);
        let two = TruncatedElement::from_int(self.field(), 2);
        let xw_yz = x.mul(w)?.add(&y.mul(z)?)?;
        let a2 = a.mul(&xw_yz)?.add(&y.mul(w)?.mul(c)?)?.sub(&x.mul(z)?.mul(b)?)?;
        let b2 = x.mul(x)?.mul(b)?.sub(&y.mul(y)?.mul(c)?)?.sub(&two.mul(x)?.mul(y)?.mul(a)?)?;
        let c2 = w.mul(w)?.mul(c)?.sub(&z.mul(z)?.mul(b)?)?.add(&two.mul(z)?.mul(w)?.mul(a)?)?;
        Ok(Self { a: a2, b: b2, c: c2 })
    }
}

/// `[[x, y], [z, w]]` with `xw - yz = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sl2 {
    pub x: TruncatedElement,
    pub y: TruncatedElement,
    pub z: TruncatedElement,
    pub w: TruncatedElement,
}

impl Sl2 {
    pub fn identity(field: FieldSpec) -> Self {
        let (o, z) = (TruncatedElement::one(field), TruncatedElement::zero(field));
        Self { x: o.clone(), y: z.clone(), z, w: o }
    }

    /// `[[1, t], [0, 1]]`.
    pub fn upper(t: TruncatedElement) -> Self {
        let f = t.field();
        Self { x: TruncatedElement::one(f), y: t, z: TruncatedElement::zero(f), w: TruncatedElement::one(f) }
    }

    /// `[[1, 0], [t, 1]]`.
    pub fn lower(t: TruncatedElement) -> Self {
        let f = t.field();
        Self { x: TruncatedElement::one(f), y: TruncatedElement::zero(f), z: t, w: TruncatedElement::one(f) }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        Ok(Self {
            x: self.x.mul(&o.x)?.add(&self.y.mul(&o.z)?)?,
            y: self.x.mul(&o.y)?.add(&self.y.mul(&o.w)?)?,
            z: self.z.mul(&o.x)?.add(&self.w.mul(&o.z)?)?,
            w: self.z.mul(&o.y)?.add(&self.w.mul(&o.w)?)?,
        })
    }
}

pub fn trace_form(x: &LieElement, y: &LieElement) -> Result<TruncatedElement> {
    x.field().check_same(&y.field())?;
    let two = TruncatedElement::from_int(x.field(), 2);
    two.mul(&x.a)?.mul(&y.a)?.add(&x.b.mul(&y.c)?)?.add(&x.c.mul(&y.b)?)
}

/// `[X, Y]`, from `[H, E] = 2E`, `[H, F] = -2F`, `[E, F] = H`.
pub fn bracket(x: &LieElement, y: &LieElement) -> Result<LieElement> {
    let two = TruncatedElement::from_int(x.field(), 2);
    Ok(LieElement {
        a: x.b.mul(&y.c)?.sub(&x.c.mul(&y.b)?)?,
        b: two.mul(&x.a.mul(&y.b)?.sub(&x.b.mul(&y.a)?)?)?,
        c: two.mul(&x.c.mul(&y.a)?.sub(&x.a.mul(&y.c)?)?)?,
    })
}

/// Coefficient of `t` in `det(t - ad Y)`; equals `-4(a² + bc)`.
pub fn discriminant(y: &LieElement) -> Result<TruncatedElement> {
    let model = ChevalleyModel::sl2();
    let ad = model.ad_matrix(&[y.a.clone(), y.b.clone(), y.c.clone()], y.field())?;
    Ok(char_poly(&ad)?.swap_remove(2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Class {
    RegularSemisimple,
    NilpotentNonzero,
    Zero,
    Undecided,
}

pub fn classify(y: &LieElement) -> Class {
    if y.is_zero() {
        return Class::Zero;
    }
    match discriminant(y) {
        Ok(d) if d.is_zero() => Class::NilpotentNonzero,
        Ok(_) => Class::RegularSemisimple,
        Err(_) => Class::Undecided,
    }
}

pub(crate) fn require_regular(x: &LieElement) -> Result<()> {
    match classify(x) {
        Class::RegularSemisimple => Ok(()),
        Class::Undecided => Err(Error::InsufficientPrecision {
            known_to: x.coords().iter().filter_map(|c| c.absolute_precision()).min().unwrap_or(0),
        }),
        _ => Err(Error::NotRegular),
    }
}

/// Depth of `Y` through the adjoint characteristic polynomial.
pub fn lie_depth(y: &LieElement) -> Result<Depth> {
    depth(&sl2_matrix(&y.a, &y.b, &y.c), &ChevalleyModel::sl2())
}

/// `m* = max(1, 1 - ord X - ord Y)`; `None` when `Λ(⟨Ad(k)X, Y⟩)` is
/// identically `1`.
pub fn sufficiency_depth(x: &LieElement, y: &LieElement) -> Option<u32> {
    let s = x.min_ord()? + y.min_ord()?;
    (s < 1).then(|| (1 - s).max(1) as u32)
}

/// `|SL₂(Ω/𝔭^m)| = q^{3m}(1 - q^{-2})`.
pub fn sl2_order(q: u64, m: u32) -> u64 {
    q.pow(3 * m) - q.pow(3 * m - 2)
}

/// The normalized `SL₂(Ω)`-average of `Λ(⟨Ad(k)X, Y⟩)`, by enumeration of
/// `SL₂(Ω/𝔭^m)`.
pub fn eta(x: &LieElement, y: &LieElement, m: u32) -> Result<Cyc> {
    x.field().check_same(&y.field())?;
    let field = x.field();
    let Some(need) = sufficiency_depth(x, y) else {
        return Ok(Cyc::one(field.p()));
    };
    if m < need {
        return Err(Error::DepthTooSmall { depth: m, required: need });
    }
    let (sx, sy) = (x.min_ord().unwrap(), y.min_ord().unwrap());
    // the character only sees ⟨Ad(k)x, y⟩ modulo 𝔭^{m*}
    let ring = TruncRing::new(field, need)?;
    let xs = x.scaled(sx, need)?;
    let ys = y.scaled(sy, need)?;
    let group = TruncRing::new(field, m)?;
    let n = group.size();
    let s = sx + sy;
    let acc = (0..n)
        .into_par_iter()
        .fold(
            || RootAccumulator::new(field.p(), need),
            |mut acc, gx| {
                for gz in 0..n {
                    for_each_completion(&group, gx, gz, |gy, gw| {
                        let k = [gx, gy, gz, gw].map(|e| ring.reduce(e, need));
                        let v = ad_scaled(&ring, k, xs);
                        let ip = pairing(&ring, v, ys);
                        acc.push(lambda_scaled(&ring, field, ip, s), 1);
                    });
                }
                acc
            },
        )
        .reduce(
            || RootAccumulator::new(field.p(), need),
            |mut a, b| {
                a.merge(&b);
                a
            },
        );
    let order = sl2_order(field.q(), m);
    Ok(acc.finish(&(Rational::one() / Rational::from_integer(order.into()))))
}

/// `η_X(Y) 𝟙_{𝔤_r}(Y)`.
pub fn eta_r(x: &LieElement, y: &LieElement, r: &Rational, m: u32) -> Result<Cyc> {
    let inside = lie_depth(y)?.at_least(r).ok_or(Error::InsufficientPrecision {
        known_to: y.coords().iter().filter_map(|c| c.absolute_precision()).min().unwrap_or(0),
    })?;
    if inside {
        eta(x, y, m)
    } else {
        Ok(Cyc::zero(x.field().p()))
    }
}

/// Calls `f(y, w)` for every completion of the column `(x, z)` to an
/// element of `SL₂(Ω/𝔭^k)`.
#[inline]
fn for_each_completion(ring: &TruncRing, x: u64, z: u64, mut f: impl FnMut(u64, u64)) {
    let n = ring.size();
    let one = ring.from_i64(1);
    if let Some(xi) = ring.inv_unit(x) {
        for y in 0..n {
            f(y, ring.mul(ring.add(one, ring.mul(y, z)), xi));
        }
    } else if let Some(zi) = ring.inv_unit(z) {
        for w in 0..n {
            f(ring.mul(ring.sub(ring.mul(x, w), one), zi), w);
        }
    }
}

/// `Ad(k) u` on packed coordinates, `k = [x, y, z, w]`.
#[inline]
pub(crate) fn ad_scaled(r: &TruncRing, k: [u64; 4], u: [u64; 3]) -> [u64; 3] {
    let [x, y, z, w] = k;
    let [a, b, c] = u;
    let two = r.from_i64(2);
    let a2 = r.sub(r.add(r.mul(a, r.add(r.mul(x, w), r.mul(y, z))), r.mul(r.mul(y, w), c)), r.mul(r.mul(x, z), b));
    let b2 = r.sub(r.sub(r.mul(r.mul(x, x), b), r.mul(r.mul(y, y), c)), r.mul(two, r.mul(r.mul(x, y), a)));
    let c2 = r.add(r.sub(r.mul(r.mul(w, w), c), r.mul(r.mul(z, z), b)), r.mul(two, r.mul(r.mul(z, w), a)));
    [a2, b2, c2]
}

/// `⟨u, v⟩` on packed coordinates.
#[inline]
pub(crate) fn pairing(r: &TruncRing, u: [u64; 3], v: [u64; 3]) -> u64 {
    let two = r.from_i64(2);
    r.add(r.add(r.mul(two, r.mul(u[0], v[0])), r.mul(u[1], v[2])), r.mul(u[2], v[1]))
}

/// Generators of `SL₂(Ω/𝔭^k)` as `[x, y, z, w]`: the elementary matrices
/// with off-diagonal entry `ϖ^i`. Over `Q_p` the entry `1` suffices.
pub(crate) fn generators(r: &TruncRing, field: FieldSpec) -> Vec<[u64; 4]> {
    let one = r.from_i64(1);
    let tops = if field.is_positive() { r.k() } else { 1 };
    let mut out = Vec::new();
    for i in 0..tops {
        let t = r.shift_up(one, i);
        out.push([one, t, 0, one]);
        out.push([one, 0, t, one]);
    }
    out
}

/// The `SL₂(Ω)`-orbit of `u` in `(Ω/𝔭^k)³`, by breadth-first search.
pub(crate) fn orbit_scaled(r: &TruncRing, field: FieldSpec, u: [u64; 3]) -> Vec<[u64; 3]> {
    let gens = generators(r, field);
    let mut seen = std::collections::HashSet::from([u]);
    let mut out = vec![u];
    let mut i = 0;
    while i < out.len() {
        let v = out[i];
        i += 1;
        for g in &gens {
            let w = ad_scaled(r, *g, v);
            if seen.insert(w) {
                out.push(w);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localfield::RootOfUnity;

    fn q5() -> FieldSpec {
        FieldSpec::qp(5).unwrap()
    }

    #[test]
    fn trace_form_basis_values() {
        let f = q5();
        let (h, e, fv) = (LieElement::h(f), LieElement::e(f), LieElement::f(f));
        assert_eq!(trace_form(&h, &h).unwrap(), TruncatedElement::from_int(f, 2));
        assert_eq!(trace_form(&e, &fv).unwrap(), TruncatedElement::one(f));
        assert!(trace_form(&e, &e).unwrap().is_zero());
    }

    #[test]
    fn discriminant_matches_closed_form() {
        let f = q5();
        let h = LieElement::h(f);
        assert_eq!(discriminant(&h).unwrap(), TruncatedElement::from_int(f, -4));
        assert!(discriminant(&LieElement::e(f)).unwrap().is_zero());
        let ph = h.shift(1);
        assert_eq!(discriminant(&ph).unwrap(), TruncatedElement::from_int(f, -100));
        let y = LieElement::from_ints(f, 3, 7, -2);
        let closed = y.q().unwrap().mul(&TruncatedElement::from_int(f, -4)).unwrap();
        assert_eq!(discriminant(&y).unwrap(), closed);
    }

    #[test]
    fn classification() {
        let f = q5();
        assert_eq!(classify(&LieElement::h(f)), Class::RegularSemisimple);
        assert_eq!(classify(&LieElement::e(f)), Class::NilpotentNonzero);
        assert_eq!(classify(&LieElement::zero(f)), Class::Zero);
        // a² + bc cancels to the known precision
        let t = |d: &[u32]| TruncatedElement::from_digits(f, 0, d).unwrap();
        let y = LieElement::new(t(&[1, 0]), t(&[1, 0]), t(&[4, 4])).unwrap();
        assert_eq!(classify(&y), Class::Undecided);
    }

    #[test]
    fn ad_matches_matrix_conjugation() {
        let f = q5();
        let k = Sl2::upper(TruncatedElement::from_int(f, 3))
            .mul(&Sl2::lower(TruncatedElement::from_int(f, -2)))
            .unwrap();
        let y = LieElement::from_ints(f, 2, -1, 4);
        let z = y.ad(&k).unwrap();
        // k Y = Z k
        let m = |e: &LieElement| sl2_matrix(&e.a, &e.b, &e.c);
        let (ym, zm) = (m(&y), m(&z));
        let km = [[k.x.clone(), k.y.clone()], [k.z.clone(), k.w.clone()]];
        for i in 0..2 {
            for j in 0..2 {
                let mut l = TruncatedElement::zero(f);
                let mut r = TruncatedElement::zero(f);
                for t in 0..2 {
                    l = l.add(&km[i][t].mul(&ym[t][j]).unwrap()).unwrap();
                    r = r.add(&zm[i][t].mul(&km[t][j]).unwrap()).unwrap();
                }
                assert_eq!(l, r);
            }
        }
        assert_eq!(z.q().unwrap(), y.q().unwrap());
    }

    #[test]
    fn eta_trivial_cases() {
        let f = q5();
        let x = LieElement::from_ints(f, 1, 2, 3);
        assert_eq!(eta(&x, &LieElement::zero(f), 1).unwrap(), Cyc::one(5));
        assert_eq!(eta(&LieElement::zero(f), &x, 1).unwrap(), Cyc::one(5));
    }

    #[test]
    fn eta_e_h_over_f5() {
        let f = q5();
        let got = eta(&LieElement::e(f), &LieElement::h(f), 1).unwrap();
        // the 120 elements of SL₂(F₅) directly
        let mut acc = RootAccumulator::new(5, 1);
        for x in 0..5i64 {
            for y in 0..5 {
                for z in 0..5 {
                    for w in 0..5 {
                        if (x * w - y * z).rem_euclid(5) == 1 {
                            let e = (-2 * x * z).rem_euclid(5) as u64;
                            acc.push(RootOfUnity { level: 1, exp: e }, 1);
                        }
                    }
                }
            }
        }
        assert_eq!(got, acc.finish(&Rational::new(1.into(), 120.into())));
    }

    #[test]
    fn eta_requires_sufficiency_depth() {
        let f = q5();
        let x = LieElement::h(f).shift(-1);
        let err = eta(&x, &LieElement::h(f), 1).unwrap_err();
        assert_eq!(err, Error::DepthTooSmall { depth: 1, required: 2 });
    }

    #[test]
    fn eta_r_indicator() {
        let f = q5();
        let x = LieElement::from_ints(f, 1, 1, 2);
        let one = Rational::one();
        assert!(eta_r(&x, &LieElement::h(f), &one, 1).unwrap().is_zero());
        let ph = LieElement::h(f).shift(1);
        assert_eq!(eta_r(&x, &ph, &one, 1).unwrap(), eta(&x, &ph, 1).unwrap());
        assert_eq!(eta_r(&x, &LieElement::zero(f), &one, 1).unwrap(), Cyc::one(5));
    }

    #[test]
    fn orbit_of_h_mod_25() {
        let f = q5();
        let r = TruncRing::new(f, 2).unwrap();
        assert_eq!(orbit_scaled(&r, f, [1, 0, 0]).len(), 750);
        let f5 = FieldSpec::fpt(5).unwrap();
        let r = TruncRing::new(f5, 2).unwrap();
        assert_eq!(orbit_scaled(&r, f5, [1, 0, 0]).len(), 750);
    }
}
