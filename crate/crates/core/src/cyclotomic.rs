//! Exact values in `Q(ζ_{p^∞})`.
//!
//! A [`CycValue`] at level `m` is `Σ_k c_k ζ^k` with `ζ = ζ_{p^m}`. It is kept
//! in canonical form: exponents below `φ(p^m)` only, at the smallest level
//! that holds it. Canonical forms are unique, so equality is structural.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::localfield::RootOfUnity;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycValue<T> {
    p: u32,
    level: u32,
    coeffs: Vec<T>,
}

impl<T: Scalar> CycValue<T> {
    pub fn zero(p: u32) -> Self {
        Self { p, level: 0, coeffs: vec![T::zero()] }
    }

    pub fn one(p: u32) -> Self {
        Self::from_scalar(p, T::one())
    }

    pub fn from_scalar(p: u32, c: T) -> Self {
        Self { p, level: 0, coeffs: vec![c] }
    }

    pub fn root(p: u32, r: RootOfUnity) -> Self {
        Self::from_coeffs(p, r.level, [(r.exp, T::one())])
    }

    /// `Σ c ζ_{p^level}^k` from `(k, c)` pairs; exponents are reduced.
    pub fn from_coeffs(p: u32, level: u32, terms: impl IntoIterator<Item = (u64, T)>) -> Self {
        let n = (p as u64).pow(level);
        let mut coeffs = vec![T::zero(); n as usize];
        for (k, c) in terms {
            let i = (k % n) as usize;
            coeffs[i] = coeffs[i].clone() + c;
        }
        Self::canonical(p, level, coeffs)
    }

    fn canonical(p: u32, level: u32, mut coeffs: Vec<T>) -> Self {
        if level > 0 {
            let n = coeffs.len();
            let h = n / p as usize;
            let phi = n - h;
            // ζ^k = -Σ_{i=1}^{p-1} ζ^{k - i h} for k ≥ φ(p^m)
            for k in (phi..n).rev() {
                if coeffs[k].is_zero() {
                    continue;
                }
                let c = std::mem::replace(&mut coeffs[k], T::zero());
                for i in 1..p as usize {
                    let j = k - i * h;
                    coeffs[j] = coeffs[j].clone() - c.clone();
                }
            }
        }
        let mut level = level;
        while level > 0 {
            let pu = p as usize;
            let lowerable = coeffs.iter().enumerate().all(|(k, c)| k % pu == 0 || c.is_zero());
            if !lowerable {
                break;
            }
            coeffs = coeffs.into_iter().step_by(pu).collect();
            level -= 1;
        }
        Self { p, level, coeffs }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Canonical coefficients, indexed by exponent of `ζ_{p^level}`.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The value, when it is rational.
    pub fn to_scalar(&self) -> Option<T> {
        (self.level == 0).then(|| self.coeffs[0].clone())
    }

    fn lift(&self, level: u32) -> Vec<T> {
        let n = (self.p as usize).pow(level);
        let step = n / self.coeffs.len();
        let mut out = vec![T::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k * step] = c.clone();
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let level = self.level.max(other.level);
        let mut a = self.lift(level);
        for (x, y) in a.iter_mut().zip(other.lift(level)) {
            *x = x.clone() + y;
        }
        Self::canonical(self.p, level, a)
    }

    pub fn neg(&self) -> Self {
        Self {
            p: self.p,
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &T) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x.clone() * c.clone()).collect();
        Self::canonical(self.p, self.level, coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let level = self.level.max(other.level);
        let a = self.lift(level);
        let b = other.lift(level);
        let n = a.len();
        let mut out = vec![T::zero(); n];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    out[(i + j) % n] = out[(i + j) % n].clone() + x.clone() * y.clone();
                }
            }
        }
        Self::canonical(self.p, level, out)
    }

    /// Complex conjugation `ζ ↦ ζ^{-1}`.
    pub fn conj(&self) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![T::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[(n - k) % n] = c.clone();
        }
        Self::canonical(self.p, self.level, out)
    }

    /// `|v|^2 = v v̄`, an element of the maximal real subfield.
    pub fn abs_sq(&self) -> Self {
        self.mul(&self.conj())
    }
}

impl<T: Scalar + ToPrimitive> CycValue<T> {
    /// Floating-point approximation, for reporting and trend inspection only.
    pub fn to_complex(&self) -> (f64, f64) {
        let n = self.coeffs.len() as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let c = c.to_f64().unwrap_or(f64::NAN);
            let t = 2.0 * std::f64::consts::PI * k as f64 / n;
            re += c * t.cos();
            im += c * t.sin();
        }
        (re, im)
    }
}

/// Integer accumulator of weighted roots of unity at a fixed level, for hot
/// loops. Converted to a [`CycValue`] once at the end.
#[derive(Clone, Debug)]
pub struct RootAccumulator {
    p: u32,
    level: u32,
    counts: Vec<i128>,
}

impl RootAccumulator {
    pub fn new(p: u32, level: u32) -> Self {
        Self { p, level, counts: vec![0; (p as usize).pow(level)] }
    }

    #[inline]
    pub fn push(&mut self, r: RootOfUnity, weight: i128) {
        debug_assert!(r.level <= self.level);
        let step = (self.p as u64).pow(self.level - r.level);
        let n = self.counts.len() as u64;
        self.counts[((r.exp * step) % n) as usize] += weight;
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.level, other.level);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// The accumulated sum times `scale`.
    pub fn finish(&self, scale: &BigRational) -> CycValue<BigRational> {
        CycValue::from_coeffs(
            self.p,
            self.level,
            self.counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(k, &c)| (k as u64, BigRational::from_integer(BigInt::from(c)) * scale)),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct CycRepr {
    p: u32,
    level: u32,
    coeffs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<String>,
}

impl Serialize for CycValue<BigRational> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k.to_string(), crate::scalar::rational_string(c)))
            .collect();
        CycRepr { p: self.p, level: self.level, coeffs, scale: None }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycValue<BigRational> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = CycRepr::deserialize(d)?;
        let parse = |s: &str| {
            crate::scalar::parse_rational(s).ok_or_else(|| D::Error::custom(format!("bad rational `{s}`")))
        };
        let n = (r.p as u64).checked_pow(r.level).filter(|&n| n <= 1 << 20);
        let n = n.ok_or_else(|| D::Error::custom("level too large"))?;
        let mut terms = Vec::new();
        for (k, c) in &r.coeffs {
            let k: u64 = k.parse().map_err(|_| D::Error::custom(format!("bad exponent `{k}`")))?;
            if k >= n {
                return Err(D::Error::custom(format!("exponent {k} out of range")));
            }
            terms.push((k, parse(c)?));
        }
        let v = CycValue::from_coeffs(r.p, r.level, terms);
        Ok(match r.scale {
            Some(s) => v.scale(&parse(&s)?),
            None => v,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type C = CycValue<BigRational>;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn sum_of_all_roots_vanishes() {
        let v = C::from_coeffs(5, 1, (0..5).map(|k| (k, r(1, 1))));
        assert!(v.is_zero());
        // level 2: the primitive 25th roots sum to zero as well
        let v = C::from_coeffs(5, 2, (0..25).filter(|k| k % 5 != 0).map(|k| (k, r(1, 1))));
        assert!(v.is_zero());
    }

    #[test]
    fn level_lowers() {
        let v = C::root(5, RootOfUnity { level: 2, exp: 10 });
        assert_eq!(v.level(), 1);
        assert_eq!(v, C::root(5, RootOfUnity { level: 1, exp: 2 }));
    }

    #[test]
    fn golden_ratio_norm() {
        // ζ + ζ^{-1} = (√5 - 1)/2 for ζ = ζ_5; (ζ+ζ^4)^2 + (ζ+ζ^4) - 1 = 0
        let w = C::from_coeffs(5, 1, [(1, r(1, 1)), (4, r(1, 1))]);
        let z = w.mul(&w).add(&w).sub(&C::one(5));
        assert!(z.is_zero());
        assert!(w.to_scalar().is_none());
        let (re, im) = w.to_complex();
        assert!((re - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-12 && im.abs() < 1e-12);
    }

    #[test]
    fn json_with_scale() {
        let v: C = serde_json::from_str(r#"{"p":5,"level":1,"coeffs":{"0":"1","3":"-1"},"scale":"1/2"}"#).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"p":5,"level":1,"coeffs":{"0":"1/2","3":"-1/2"}}"#);
        let back: C = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn accumulator_matches() {
        let mut acc = RootAccumulator::new(7, 2);
        acc.push(RootOfUnity { level: 1, exp: 3 }, 2);
        acc.push(RootOfUnity { level: 2, exp: 5 }, -1);
        let v = acc.finish(&r(1, 3));
        let w = C::root(7, RootOfUnity { level: 1, exp: 3 })
            .scale(&r(2, 3))
            .sub(&C::root(7, RootOfUnity { level: 2, exp: 5 }).scale(&r(1, 3)));
        assert_eq!(v, w);
    }

    fn arb() -> impl Strategy<Value = C> {
        (0u32..3, prop::collection::vec((0u64..25, -3i64..4), 0..6))
            .prop_map(|(lvl, t)| C::from_coeffs(5, lvl, t.into_iter().map(|(k, c)| (k, r(c, 1)))))
    }

    proptest! {
        #[test]
        fn field_laws(a in arb(), b in arb(), c in arb()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.add(&b).sub(&b), a.clone());
            prop_assert_eq!(a.conj().conj(), a.clone());
            prop_assert_eq!(a.abs_sq().conj(), a.abs_sq());
        }
    }
}
