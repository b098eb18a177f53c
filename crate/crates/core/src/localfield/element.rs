use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::digits;
use super::{Characteristic, FieldSpec};
use crate::error::{Error, Result};

/// Relative precision used when inverting an exact Laurent polynomial that
/// is not a monomial (its inverse has an infinite expansion).
pub const EXACT_INVERSE_DIGITS: usize = 32;

/// An element of `Q_p` or `F_p((t))`.
///
/// Elements are exact (zero, a rational number in `Q_p`, a Laurent
/// polynomial in `F_p((t))`) or truncated: `ϖ^val (d_0 + d_1 ϖ + ...)` with
/// `d_0 != 0` and the first `digits.len()` digits known. Arithmetic tracks
/// precision and fails with [`Error::InsufficientPrecision`] rather than
/// guessing a valuation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncatedElement {
    field: FieldSpec,
    repr: Repr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Zero,
    Approx { val: i64, digits: Vec<u32> },
    Rational(BigRational),
    Laurent { val: i64, digits: Vec<u32> },
}

fn p_valuation(n: &BigInt, p: u32) -> (i64, BigInt) {
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return (v, n);
        }
        n = q;
        v += 1;
    }
}

fn normalize_laurent(field: FieldSpec, mut val: i64, mut d: Vec<u32>) -> TruncatedElement {
    while d.last() == Some(&0) {
        d.pop();
    }
    let lead = d.iter().position(|&x| x != 0);
    match lead {
        None => TruncatedElement::zero(field),
        Some(i) => {
            val += i as i64;
            d.drain(..i);
            TruncatedElement { field, repr: Repr::Laurent { val, digits: d } }
        }
    }
}

impl TruncatedElement {
    pub fn zero(field: FieldSpec) -> Self {
        Self { field, repr: Repr::Zero }
    }

    pub fn one(field: FieldSpec) -> Self {
        Self::from_int(field, 1)
    }

    /// The image of an integer. In `F_p((t))` this is its residue mod `p`.
    pub fn from_int(field: FieldSpec, n: i64) -> Self {
        match field.characteristic() {
            Characteristic::Zero => Self::from_rational_qp(field, BigRational::from_integer(n.into())),
            Characteristic::Positive => {
                let d = n.rem_euclid(field.p() as i64) as u32;
                normalize_laurent(field, 0, vec![d])
            }
        }
    }

    fn from_rational_qp(field: FieldSpec, r: BigRational) -> Self {
        if r.is_zero() {
            Self::zero(field)
        } else {
            Self { field, repr: Repr::Rational(r) }
        }
    }

    /// An exact rational. In `F_p((t))` the denominator must be prime to `p`.
    pub fn from_rational(field: FieldSpec, r: &BigRational) -> Result<Self> {
        match field.characteristic() {
            Characteristic::Zero => Ok(Self::from_rational_qp(field, r.clone())),
            Characteristic::Positive => {
                let pb = BigInt::from(field.p());
                let den = r.denom().mod_floor(&pb);
                if den.is_zero() {
                    return Err(Error::InvalidInput(format!("{r} has no image in {field}")));
                }
                let inv = digits::mod_inverse(&den, &pb).unwrap();
                let d = (r.numer().mod_floor(&pb) * inv).mod_floor(&pb);
                Ok(normalize_laurent(field, 0, vec![d.to_u32().unwrap()]))
            }
        }
    }

    /// Exact element `d_0 ϖ^val + d_1 ϖ^{val+1} + ...` with finitely many digits.
    pub fn exact_from_digits(field: FieldSpec, val: i64, ds: &[u32]) -> Result<Self> {
        check_digits(field, ds)?;
        Ok(match field.characteristic() {
            Characteristic::Positive => normalize_laurent(field, val, ds.to_vec()),
            Characteristic::Zero => {
                let n = BigInt::from(digits::to_big(field.p(), ds));
                let pv = BigInt::from(field.p()).pow(val.unsigned_abs() as u32);
                let r = if val >= 0 {
                    BigRational::from_integer(n * pv)
                } else {
                    BigRational::new(n, pv)
                };
                Self::from_rational_qp(field, r)
            }
        })
    }

    /// Truncated element `ϖ^val (d_0 + d_1 ϖ + ...) + O(ϖ^{val+len})`.
    ///
    /// Leading zero digits are absorbed into the valuation. If every digit is
    /// zero the element cannot be represented and the call fails.
    pub fn from_digits(field: FieldSpec, val: i64, ds: &[u32]) -> Result<Self> {
        check_digits(field, ds)?;
        let known_to = val + ds.len() as i64;
        match ds.iter().position(|&x| x != 0) {
            None => Err(Error::InsufficientPrecision { known_to }),
            Some(i) => Ok(Self {
                field,
                repr: Repr::Approx { val: val + i as i64, digits: ds[i..].to_vec() },
            }),
        }
    }

    /// The exact element `d ϖ^e`.
    pub fn monomial(field: FieldSpec, d: u32, e: i64) -> Result<Self> {
        Self::exact_from_digits(field, e, &[d])
    }

    pub fn uniformizer(field: FieldSpec) -> Self {
        Self::monomial(field, 1, 1).unwrap()
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Exact zero.
    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.repr, Repr::Approx { .. })
    }

    /// `None` for zero (valuation `+∞`).
    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Approx { val, .. } | Repr::Laurent { val, .. } => Some(*val),
            Repr::Rational(r) => {
                let (a, _) = p_valuation(r.numer(), self.field.p());
                let (b, _) = p_valuation(r.denom(), self.field.p());
                Some(a - b)
            }
        }
    }

    /// Number of known digits from the leading one; `None` when exact.
    pub fn relative_precision(&self) -> Option<usize> {
        match &self.repr {
            Repr::Approx { digits, .. } => Some(digits.len()),
            _ => None,
        }
    }

    /// The element is known modulo `ϖ^k` for this `k`; `None` when exact.
    pub fn absolute_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Approx { val, digits } => Some(val + digits.len() as i64),
            _ => None,
        }
    }

    /// Angular component: the leading digit, `0` for zero.
    pub fn ac(&self) -> u32 {
        match &self.repr {
            Repr::Zero => 0,
            Repr::Approx { digits, .. } | Repr::Laurent { digits, .. } => digits[0],
            Repr::Rational(_) => {
                let v = self.valuation().unwrap();
                self.window(v, v + 1).unwrap()[0]
            }
        }
    }

    /// `(ord, ac)` with `ord = None` meaning `+∞`.
    pub fn ord_ac(&self) -> (Option<i64>, u32) {
        (self.valuation(), self.ac())
    }

    /// Coefficients of `ϖ^lo .. ϖ^{hi-1}`.
    ///
    /// Fails if the element is not known modulo `ϖ^hi`, or if it has nonzero
    /// digits below `ϖ^lo`.
    pub fn window(&self, lo: i64, hi: i64) -> Result<Vec<u32>> {
        let len = (hi - lo).max(0) as usize;
        if let Some(k) = self.absolute_precision() {
            if k < hi {
                return Err(Error::InsufficientPrecision { known_to: k });
            }
        }
        let v = match self.valuation() {
            None => return Ok(vec![0; len]),
            Some(v) => v,
        };
        if v < lo {
            return Err(Error::InvalidInput(format!(
                "element of valuation {v} does not lie in ϖ^{lo}Ω"
            )));
        }
        let pad = ((v - lo) as usize).min(len);
        let mut out = vec![0u32; pad];
        let need = len - pad;
        match &self.repr {
            Repr::Zero => unreachable!(),
            Repr::Approx { digits, .. } | Repr::Laurent { digits, .. } => {
                out.extend((0..need).map(|i| digits.get(i).copied().unwrap_or(0)));
            }
            Repr::Rational(r) => {
                let p = self.field.p();
                let (a, n) = p_valuation(r.numer(), p);
                let (b, d) = p_valuation(r.denom(), p);
                debug_assert_eq!(a - b, v);
                let m = BigInt::from(p).pow(need as u32);
                if need > 0 {
                    let inv = digits::mod_inverse(&d, &m).unwrap();
                    let u = (n * inv).mod_floor(&m);
                    out.extend(digits::from_big(p, u.to_biguint().unwrap(), need));
                }
            }
        }
        Ok(out)
    }

    /// Coefficient of `ϖ^i`.
    pub fn digit(&self, i: i64) -> Result<u32> {
        match self.valuation() {
            Some(v) if v > i => Ok(0),
            None => Ok(0),
            Some(v) => Ok(self.window(v, i + 1)?[(i - v) as usize]),
        }
    }

    /// Forgets all digits from `ϖ^k` on.
    pub fn truncate(&self, k: i64) -> Result<Self> {
        if let Some(a) = self.absolute_precision() {
            if a <= k {
                return Ok(self.clone());
            }
        }
        match self.valuation() {
            Some(v) if v < k => Self::from_digits(self.field, v, &self.window(v, k)?),
            _ => Err(Error::InsufficientPrecision { known_to: k }),
        }
    }

    pub fn neg(&self) -> Self {
        let field = self.field;
        let repr = match &self.repr {
            Repr::Zero => Repr::Zero,
            Repr::Rational(r) => Repr::Rational(-r),
            Repr::Laurent { val, digits: d } => Repr::Laurent {
                val: *val,
                digits: digits::neg(field.p(), field.characteristic(), d, d.len()),
            },
            Repr::Approx { val, digits: d } => Repr::Approx {
                val: *val,
                digits: digits::neg(field.p(), field.characteristic(), d, d.len()),
            },
        };
        Self { field, repr }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.field.check_same(&other.field)?;
        let field = self.field;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        match (&self.repr, &other.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => Ok(Self::from_rational_qp(field, a + b)),
            (Repr::Laurent { val: va, digits: da }, Repr::Laurent { val: vb, digits: db }) => {
                let lo = (*va).min(*vb);
                let hi = (va + da.len() as i64).max(vb + db.len() as i64);
                let len = (hi - lo) as usize;
                let a = self.window(lo, hi)?;
                let b = other.window(lo, hi)?;
                Ok(normalize_laurent(field, lo, digits::add(field.p(), field.characteristic(), &a, &b, len)))
            }
            _ => {
                let k = match (self.absolute_precision(), other.absolute_precision()) {
                    (Some(a), Some(b)) => a.min(b),
                    (Some(a), None) | (None, Some(a)) => a,
                    (None, None) => unreachable!(),
                };
                let lo = self.valuation().unwrap().min(other.valuation().unwrap());
                let len = (k - lo) as usize;
                let a = self.window(lo, k)?;
                let b = other.window(lo, k)?;
                let s = digits::add(field.p(), field.characteristic(), &a, &b, len);
                Self::from_digits(field, lo, &s)
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.field.check_same(&other.field)?;
        let field = self.field;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(field));
        }
        match (&self.repr, &other.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => Ok(Self::from_rational_qp(field, a * b)),
            (Repr::Laurent { val: va, digits: da }, Repr::Laurent { val: vb, digits: db }) => {
                let len = da.len() + db.len() - 1;
                let prod = digits::mul(field.p(), field.characteristic(), da, db, len);
                Ok(normalize_laurent(field, va + vb, prod))
            }
            _ => {
                let m = match (self.relative_precision(), other.relative_precision()) {
                    (Some(a), Some(b)) => a.min(b),
                    (Some(a), None) | (None, Some(a)) => a,
                    (None, None) => unreachable!(),
                };
                let va = self.valuation().unwrap();
                let vb = other.valuation().unwrap();
                let a = self.window(va, va + m as i64)?;
                let b = other.window(vb, vb + m as i64)?;
                let prod = digits::mul(field.p(), field.characteristic(), &a, &b, m);
                Self::from_digits(field, va + vb, &prod)
            }
        }
    }

    /// Multiplicative inverse to the same relative precision.
    pub fn inv(&self) -> Result<Self> {
        let field = self.field;
        match &self.repr {
            Repr::Zero => Err(Error::DivisionByZero),
            Repr::Rational(r) => Ok(Self::from_rational_qp(field, r.recip())),
            Repr::Laurent { val, digits: d } if d.len() == 1 => {
                let inv = digits::inv_mod_u32(d[0], field.p());
                Ok(Self { field, repr: Repr::Laurent { val: -val, digits: vec![inv] } })
            }
            Repr::Laurent { val, digits: d } => {
                let inv = digits::inv_unit(field.p(), field.characteristic(), d, EXACT_INVERSE_DIGITS);
                Self::from_digits(field, -val, &inv)
            }
            Repr::Approx { val, digits: d } => {
                let inv = digits::inv_unit(field.p(), field.characteristic(), d, d.len());
                Self::from_digits(field, -val, &inv)
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(self.field);
        let mut sq = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq)?;
            }
            n >>= 1;
            if n > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(acc)
    }

    /// Multiplication by `ϖ^e` (exact shift).
    pub fn shift(&self, e: i64) -> Self {
        let field = self.field;
        let repr = match &self.repr {
            Repr::Zero => Repr::Zero,
            Repr::Approx { val, digits } => Repr::Approx { val: val + e, digits: digits.clone() },
            Repr::Laurent { val, digits } => Repr::Laurent { val: val + e, digits: digits.clone() },
            Repr::Rational(r) => {
                let pe = BigRational::from_integer(BigInt::from(field.p()).pow(e.unsigned_abs() as u32));
                Repr::Rational(if e >= 0 { r * pe } else { r / pe })
            }
        };
        Self { field, repr }
    }

    /// Decides `self == other`, failing when the known digits cannot tell.
    pub fn certified_eq(&self, other: &Self) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }

    /// Digit-matched transfer to the field with the same `p` and the other
    /// characteristic: `Σ c_i t^i ↔ Σ c_i p^i`.
    ///
    /// Exact rationals of `Q_p` transfer only when their expansion is finite.
    pub fn transfer(&self, target: FieldSpec) -> Result<Self> {
        if target.p() != self.field.p() {
            return Err(Error::FieldMismatch(self.field.to_string(), target.to_string()));
        }
        match &self.repr {
            Repr::Zero => Ok(Self::zero(target)),
            Repr::Approx { val, digits } => Self::from_digits(target, *val, digits),
            Repr::Laurent { val, digits } => Self::exact_from_digits(target, *val, digits),
            Repr::Rational(r) => {
                let v = self.valuation().unwrap();
                let (_, d) = p_valuation(r.denom(), self.field.p());
                if r.is_negative() || !d.is_one() {
                    return Err(Error::InvalidInput(format!(
                        "{r} has an infinite digit expansion"
                    )));
                }
                let scaled = self.shift(-v);
                let Repr::Rational(n) = &scaled.repr else { unreachable!() };
                let n = n.to_integer().to_biguint().unwrap();
                let len = n.to_radix_le(self.field.p()).len();
                let ds = digits::from_big(self.field.p(), n, len);
                Self::exact_from_digits(target, v, &ds)
            }
        }
    }

    /// `u` with `self ≡ ϖ^s u (mod 𝔭^{s+k})`, packed base `p`.
    pub fn to_scaled(&self, s: i64, k: u32) -> Result<u64> {
        let w = self.window(s, s + k as i64)?;
        let n = digits::to_big(self.field.p(), &w);
        n.to_u64().ok_or(Error::PrecisionOverflow(k))
    }

    /// The exact element `ϖ^s u` for `u` packed base `p`.
    pub fn from_scaled(field: FieldSpec, u: u64, s: i64) -> Self {
        let ds = digits::from_big(field.p(), BigUint::from(u), 64)
            .into_iter()
            .collect::<Vec<_>>();
        Self::exact_from_digits(field, s, &ds).unwrap()
    }

    /// The exact element whose digits are the known digits of `self`.
    pub fn exact_lift(&self) -> Self {
        match &self.repr {
            Repr::Approx { val, digits } => Self::exact_from_digits(self.field, *val, digits).unwrap(),
            _ => self.clone(),
        }
    }

    /// The exact rational value, for exact elements of `Q_p`.
    pub fn as_rational(&self) -> Option<BigRational> {
        match &self.repr {
            Repr::Zero => Some(BigRational::zero()),
            Repr::Rational(r) => Some(r.clone()),
            _ => None,
        }
    }
}

fn check_digits(field: FieldSpec, ds: &[u32]) -> Result<()> {
    if let Some(&d) = ds.iter().find(|&&d| d >= field.p()) {
        return Err(Error::InvalidInput(format!("digit {d} out of range for p = {}", field.p())));
    }
    Ok(())
}

impl fmt::Display for TruncatedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = if self.field.is_positive() { "t".to_string() } else { self.field.p().to_string() };
        let v = match self.valuation() {
            None => return write!(f, "0"),
            Some(v) => v,
        };
        if let Repr::Rational(r) = &self.repr {
            return write!(f, "{r}");
        }
        let ds = match &self.repr {
            Repr::Approx { digits, .. } | Repr::Laurent { digits, .. } => digits,
            _ => unreachable!(),
        };
        let mut terms = Vec::new();
        for (i, &d) in ds.iter().enumerate() {
            if d != 0 {
                terms.push(format!("{d}*{var}^{}", v + i as i64));
            }
        }
        if let Some(k) = self.absolute_precision() {
            terms.push(format!("O({var}^{k})"));
        }
        write!(f, "{}", terms.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    p: u32,
    char: Characteristic,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    val: Option<i64>,
    #[serde(default)]
    digits: Vec<u32>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rational: Option<String>,
}

impl Serialize for TruncatedElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut r = ElementRepr {
            p: self.field.p(),
            char: self.field.characteristic(),
            val: self.valuation(),
            digits: vec![],
            exact: self.is_exact(),
            rational: None,
        };
        match &self.repr {
            Repr::Zero => {}
            Repr::Approx { digits, .. } | Repr::Laurent { digits, .. } => r.digits = digits.clone(),
            Repr::Rational(q) => {
                // finite expansions are written as digits, others as a fraction
                match self.transfer(self.field.partner()) {
                    Ok(t) => r.digits = t.window(r.val.unwrap(), r.val.unwrap() + 64)
                        .map(|mut w| {
                            while w.last() == Some(&0) {
                                w.pop();
                            }
                            w
                        })
                        .unwrap_or_default(),
                    Err(_) => {
                        r.val = None;
                        r.rational = Some(crate::scalar::rational_string(q));
                    }
                }
            }
        }
        r.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TruncatedElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = ElementRepr::deserialize(d)?;
        let field = FieldSpec::new(r.p, r.char).map_err(D::Error::custom)?;
        if let Some(q) = r.rational {
            let q = crate::scalar::parse_rational(&q)
                .ok_or_else(|| D::Error::custom(format!("bad rational `{q}`")))?;
            return TruncatedElement::from_rational(field, &q).map_err(D::Error::custom);
        }
        match r.val {
            None => {
                if r.digits.iter().any(|&x| x != 0) {
                    return Err(D::Error::custom("digits given without a valuation"));
                }
                Ok(TruncatedElement::zero(field))
            }
            Some(v) if r.exact => {
                TruncatedElement::exact_from_digits(field, v, &r.digits).map_err(D::Error::custom)
            }
            Some(v) => {
                if r.digits.first() == Some(&0) {
                    return Err(D::Error::custom("leading digit must be nonzero"));
                }
                TruncatedElement::from_digits(field, v, &r.digits).map_err(D::Error::custom)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q5() -> FieldSpec {
        FieldSpec::qp(5).unwrap()
    }
    fn f5() -> FieldSpec {
        FieldSpec::fpt(5).unwrap()
    }

    #[test]
    fn cancellation_reports_lower_bound() {
        // 1 + O(5^2) minus 1 + O(5^2): valuation at least 2, not zero
        let a = TruncatedElement::from_digits(q5(), 0, &[1, 0]).unwrap();
        let e = a.sub(&a).unwrap_err();
        assert_eq!(e, Error::InsufficientPrecision { known_to: 2 });
    }

    #[test]
    fn inverse_to_full_precision() {
        // x = 3 + 5t in F_5((t)), i.e. 3 + 0 t
        let x = TruncatedElement::from_digits(f5(), 0, &[3, 0]).unwrap();
        let y = x.mul(&x.inv().unwrap()).unwrap();
        assert_eq!(y.window(0, 2).unwrap(), vec![1, 0]);
        assert_eq!(y.relative_precision(), Some(2));
        // and a genuine Q_5 unit
        let x = TruncatedElement::from_digits(q5(), 0, &[3, 1, 4]).unwrap();
        let y = x.mul(&x.inv().unwrap()).unwrap();
        assert_eq!(y.window(0, 3).unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn ord_ac_examples() {
        let z = TruncatedElement::zero(q5());
        assert_eq!(z.ord_ac(), (None, 0));
        let x = TruncatedElement::from_int(q5(), 50); // 2 * 5^2
        assert_eq!(x.ord_ac(), (Some(2), 2));
        let x = TruncatedElement::from_int(q5(), -1);
        assert_eq!(x.ord_ac(), (Some(0), 4));
        let x = TruncatedElement::from_rational(q5(), &BigRational::new(1.into(), 10.into())).unwrap();
        // 1/10 = 5^-1 * (1/2), 1/2 = 3 mod 5
        assert_eq!(x.ord_ac(), (Some(-1), 3));
    }

    #[test]
    fn exact_rationals_expand() {
        let x = TruncatedElement::from_int(q5(), -1);
        assert_eq!(x.window(0, 3).unwrap(), vec![4, 4, 4]);
        let half = TruncatedElement::from_rational(q5(), &BigRational::new(1.into(), 2.into())).unwrap();
        assert_eq!(half.window(0, 3).unwrap(), vec![3, 2, 2]);
    }

    #[test]
    fn characteristic_p_integers() {
        let five = TruncatedElement::from_int(f5(), 5);
        assert!(five.is_zero());
        let x = TruncatedElement::from_int(f5(), 7);
        assert_eq!(x.ord_ac(), (Some(0), 2));
    }

    #[test]
    fn mixed_exact_and_truncated() {
        let x = TruncatedElement::from_digits(q5(), 0, &[1, 2]).unwrap();
        let y = TruncatedElement::from_int(q5(), 4);
        // 1 + 2*5 + 4 = 0 + 3*5
        let s = x.add(&y).unwrap();
        assert_eq!(s.valuation(), Some(1));
        assert_eq!(s.relative_precision(), Some(1));
        let t = TruncatedElement::uniformizer(q5()).mul(&x).unwrap();
        assert_eq!(t.absolute_precision(), Some(3));
    }

    #[test]
    fn transfer_matches_digits() {
        let x = TruncatedElement::exact_from_digits(q5(), -1, &[3, 0, 1]).unwrap();
        let y = x.transfer(f5()).unwrap();
        assert_eq!(y.window(-1, 2).unwrap(), vec![3, 0, 1]);
        assert!(TruncatedElement::from_int(q5(), -1).transfer(f5()).is_err());
    }

    #[test]
    fn json_forms() {
        let x: TruncatedElement =
            serde_json::from_str(r#"{"p":5,"char":"pos","val":-1,"digits":[3,0,1]}"#).unwrap();
        assert_eq!(x.valuation(), Some(-1));
        assert_eq!(x.absolute_precision(), Some(2));
        let back: TruncatedElement = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        assert_eq!(back, x);
        let z: TruncatedElement = serde_json::from_str(r#"{"p":7,"char":"zero","digits":[]}"#).unwrap();
        assert!(z.is_zero());
        let m: TruncatedElement =
            serde_json::from_str(r#"{"p":5,"char":"zero","rational":"-1/3"}"#).unwrap();
        let back: TruncatedElement = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let e = TruncatedElement::from_int(q5(), 30);
        let back: TruncatedElement = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<TruncatedElement>(r#"{"p":5,"char":"pos","val":0,"digits":[0,1]}"#).is_err());
    }

    #[test]
    fn scaled_roundtrip() {
        let x = TruncatedElement::exact_from_digits(f5(), -2, &[1, 4, 0, 2]).unwrap();
        let u = x.to_scaled(-2, 4).unwrap();
        assert_eq!(u, 1 + 4 * 5 + 2 * 125);
        assert_eq!(TruncatedElement::from_scaled(f5(), u, -2), x);
    }
}
