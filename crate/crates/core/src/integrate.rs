//! Integration over boxes and definable subsets of `K^n` by summing over
//! the cosets of `𝔭^m Ω^n`, with Haar measure normalized by `vol(Ω) = 1`.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::denefpas::{parse, DefinableSet, Truth, Value, VfBox};
use crate::localfield::{conductor_character, standard_character, FieldSpec, TruncatedElement};
use crate::{Cyc, Error, Rational, Result};

/// Root-of-unity level allowed for character values of integrands.
pub const LEVEL_CAP: u32 = 32;

/// Largest number of cosets a single sum may enumerate.
pub const MAX_COSETS: u64 = 1 << 26;

/// Coordinates with `lo ≤ ord(x) ≤ hi` (`hi = None`: the ball `𝔭^lo`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub lo: i64,
    #[serde(default)]
    pub hi: Option<i64>,
}

impl Window {
    pub fn ball(lo: i64) -> Self {
        Window { lo, hi: None }
    }

    pub fn shell(v: i64) -> Self {
        Window { lo: v, hi: Some(v) }
    }
}

#[derive(Clone, Debug)]
pub enum Domain {
    Box(Vec<Window>),
    /// Points of the box on which the formula holds; its variables are the coordinates.
    Definable { windows: Vec<Window>, set: DefinableSet },
}

impl Domain {
    pub fn windows(&self) -> &[Window] {
        match self {
            Domain::Box(w) | Domain::Definable { windows: w, .. } => w,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    OneShot,
    Refine,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub depth: u32,
    pub cosets: u64,
    pub mode: Mode,
    /// In refine mode: the sums at depths `m` and `m + 1` agree.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilized: Option<bool>,
}

/// One coset `c + 𝔭^m Ω^n`: an exact representative and the coset itself
/// as elements known to `𝔭^m` (`None` for coordinates in `𝔭^m`).
pub struct Coset {
    pub rep: Vec<TruncatedElement>,
    pub approx: Vec<Option<TruncatedElement>>,
}

struct Cosets {
    field: FieldSpec,
    windows: Vec<Window>,
    m: i64,
    count: u64,
}

impl Cosets {
    fn new(field: FieldSpec, windows: &[Window], m: u32) -> Result<Self> {
        let m = m as i64;
        let q = field.q();
        let mut count: u64 = 1;
        for w in windows {
            if m < w.lo {
                return Err(Error::InvalidInput(format!("depth {m} is below the window bottom {}", w.lo)));
            }
            if let Some(hi) = w.hi {
                if hi < w.lo {
                    return Err(Error::InvalidInput(format!("empty window [{}, {hi}]", w.lo)));
                }
                if m <= hi {
                    return Err(Error::InvalidInput(format!("depth {m} does not exceed the window top {hi}")));
                }
            }
            count = (0..m - w.lo)
                .try_fold(count, |c, _| c.checked_mul(q))
                .filter(|&c| c <= MAX_COSETS)
                .ok_or_else(|| Error::InvalidInput("too many cosets".into()))?;
        }
        Ok(Cosets { field, windows: windows.to_vec(), m, count })
    }

    /// The `u`-th coset, or `None` when it leaves a window.
    fn get(&self, mut u: u64) -> Result<Option<Coset>> {
        let q = self.field.q();
        let mut rep = Vec::with_capacity(self.windows.len());
        let mut approx = Vec::with_capacity(self.windows.len());
        for w in &self.windows {
            let len = (self.m - w.lo) as usize;
            let mut ds = Vec::with_capacity(len);
            for _ in 0..len {
                ds.push((u % q) as u32);
                u /= q;
            }
            let lead = ds.iter().position(|&d| d != 0);
            if let Some(hi) = w.hi {
                match lead {
                    Some(i) if w.lo + i as i64 <= hi => {}
                    _ => return Ok(None),
                }
            }
            rep.push(TruncatedElement::exact_from_digits(self.field, w.lo, &ds)?);
            approx.push(match lead {
                Some(_) => Some(TruncatedElement::from_digits(self.field, w.lo, &ds)?),
                None => None,
            });
        }
        Ok(Some(Coset { rep, approx }))
    }

    fn weight(&self) -> Rational {
        let q = Rational::from_integer(self.field.q().into());
        let e = self.m * self.windows.len() as i64;
        if e >= 0 {
            Rational::one() / num_traits::pow(q, e as usize)
        } else {
            num_traits::pow(q, (-e) as usize)
        }
    }
}

fn in_domain(domain: &Domain, c: &Coset, m: i64) -> Result<bool> {
    match domain {
        Domain::Box(_) => Ok(true),
        Domain::Definable { set, .. } => {
            let vals: Vec<Value> =
                c.approx.iter().map(|a| a.clone().map_or(Value::VFBall(m), Value::VF)).collect();
            match set.contains(&vals)? {
                Truth::True => Ok(true),
                Truth::False => Ok(false),
                Truth::Unknown => Err(Error::DomainUndecided),
            }
        }
    }
}

pub type Integrand<'a> = dyn Fn(&[TruncatedElement]) -> Result<Cyc> + Sync + 'a;

fn coset_sum(field: FieldSpec, domain: &Domain, f: &Integrand, m: u32) -> Result<(Cyc, u64)> {
    let cs = Cosets::new(field, domain.windows(), m)?;
    let p = field.p();
    let (sum, n) = (0..cs.count)
        .into_par_iter()
        .try_fold(
            || (Cyc::zero(p), 0u64),
            |(acc, n), u| -> Result<(Cyc, u64)> {
                match cs.get(u)? {
                    Some(c) if in_domain(domain, &c, cs.m)? => Ok((acc.add(&f(&c.rep)?), n + 1)),
                    _ => Ok((acc, n)),
                }
            },
        )
        .try_reduce(|| (Cyc::zero(p), 0), |a, b| Ok((a.0.add(&b.0), a.1 + b.1)))?;
    Ok((sum.scale(&cs.weight()), n))
}

/// `Σ_c f(c) q^{-mn}` over the depth-`m` cosets `c` in the domain.
pub fn integrate(field: FieldSpec, domain: &Domain, f: &Integrand, m: u32, mode: Mode) -> Result<(Cyc, Certificate)> {
    if m == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    let (value, cosets) = coset_sum(field, domain, f, m)?;
    let stabilized = match mode {
        Mode::OneShot => None,
        Mode::Refine => Some(coset_sum(field, domain, f, m + 1)?.0 == value),
    };
    Ok((value, Certificate { depth: m, cosets, mode, stabilized }))
}

/// Least `m ≤ max_m` such that `f` is constant on `point + 𝔭^m Ω^n`.
///
/// Each candidate coset is enumerated down to `𝔭^{max_m+1}`: a single digit
/// below `ϖ^m` is not enough in `F_p((t))`, where `Λ(t^{-1} d) = 1` for
/// every constant `d`.
pub fn local_constancy_depth(f: &Integrand, point: &[TruncatedElement], max_m: u32) -> Result<u32> {
    let field = point.first().map(|x| x.field()).ok_or_else(|| Error::InvalidInput("empty point".into()))?;
    let centre = f(point)?;
    let q = field.q();
    let constant_at = |m: u32| -> Result<bool> {
        let digits = (max_m + 1 - m) as usize;
        let total = q
            .checked_pow((digits * point.len()) as u32)
            .filter(|&t| t <= MAX_COSETS)
            .ok_or_else(|| Error::InvalidInput("too many cosets".into()))?;
        for mut u in 0..total {
            let mut y = Vec::with_capacity(point.len());
            for x in point {
                let ds: Vec<u32> = (0..digits)
                    .map(|_| {
                        let d = (u % q) as u32;
                        u /= q;
                        d
                    })
                    .collect();
                y.push(x.add(&TruncatedElement::exact_from_digits(field, m as i64, &ds)?)?);
            }
            if f(&y)? != centre {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut best = None;
    for m in (1..=max_m).rev() {
        if !constant_at(m)? {
            break;
        }
        best = Some(m);
    }
    best.ok_or(Error::NotFound(max_m))
}

/// A density evaluated on whole cosets: each coordinate is known modulo
/// `𝔭^m`, or `None` when the coset is `𝔭^m` itself.
pub type Density<'a> = dyn Fn(&[Option<TruncatedElement>]) -> Result<TruncatedElement> + Sync + 'a;

/// The coordinate of a coset, failing on the coset `𝔭^m`.
pub fn known(x: &Option<TruncatedElement>) -> Result<TruncatedElement> {
    x.clone().ok_or(Error::InsufficientPrecision { known_to: 0 })
}

/// `Σ_c q^{-ord ρ(c)} q^{-mn}` for a density `ρ` evaluated on whole cosets.
pub fn form_measure(field: FieldSpec, domain: &Domain, density: &Density, m: u32) -> Result<Rational> {
    let cs = Cosets::new(field, domain.windows(), m)?;
    let q = Rational::from_integer(field.q().into());
    let sum = (0..cs.count)
        .into_par_iter()
        .try_fold(Rational::zero, |acc, u| -> Result<Rational> {
            let Some(c) = cs.get(u)? else { return Ok(acc) };
            if !in_domain(domain, &c, cs.m)? {
                return Ok(acc);
            }
            let v = density(&c.approx)
                .map_err(|e| match e {
                    Error::InsufficientPrecision { .. } => Error::InsufficientPrecision { known_to: cs.m },
                    e => e,
                })?.valuation().ok_or(Error::InsufficientPrecision { known_to: cs.m })?;
            Ok(acc + if v >= 0 { Rational::one() / num_traits::pow(q.clone(), v as usize) } else { num_traits::pow(q.clone(), (-v) as usize) })
        })
        .try_reduce(Rational::zero, |a, b| Ok(a + b))?;
    Ok(sum * cs.weight())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharacterKind {
    /// Conductor `𝔭`.
    #[default]
    Lambda,
    /// Conductor `Ω`.
    Psi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: TruncatedElement,
    pub exps: Vec<u32>,
}

/// Integrands expressible in job files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntegrandSpec {
    One,
    /// The character applied to a polynomial in the coordinates.
    Character {
        terms: Vec<Monomial>,
        #[serde(default)]
        character: CharacterKind,
    },
}

impl IntegrandSpec {
    pub fn build(&self, field: FieldSpec, dim: usize) -> Result<Box<Integrand<'static>>> {
        let p = field.p();
        match self {
            IntegrandSpec::One => Ok(Box::new(move |_| Ok(Cyc::one(p)))),
            IntegrandSpec::Character { terms, character } => {
                for t in terms {
                    t.coeff.field().check_same(&field)?;
                    if t.exps.len() != dim {
                        return Err(Error::InvalidInput(format!("monomial has {} exponents, expected {dim}", t.exps.len())));
                    }
                }
                let terms = terms.clone();
                let kind = *character;
                Ok(Box::new(move |x: &[TruncatedElement]| {
                    let mut s = TruncatedElement::zero(field);
                    for t in &terms {
                        let mut v = t.coeff.clone();
                        for (xi, e) in x.iter().zip(&t.exps) {
                            v = v.mul(&xi.pow(*e as i64)?)?;
                        }
                        s = s.add(&v)?;
                    }
                    let r = match kind {
                        CharacterKind::Lambda => conductor_character(&s, LEVEL_CAP)?,
                        CharacterKind::Psi => standard_character(&s, LEVEL_CAP)?,
                    };
                    Ok(Cyc::root(p, r))
                }))
            }
        }
    }
}

/// Definable domain as written in job files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaDomain {
    pub formula: String,
    pub vars: Vec<String>,
    #[serde(default = "default_box")]
    pub vf_box: VfBox,
    #[serde(default = "default_window")]
    pub z_window: (i64, i64),
}

fn default_box() -> VfBox {
    VfBox { v_lo: -2, v_hi: 4, depth: 2 }
}

fn default_window() -> (i64, i64) {
    (-4, 8)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationJob {
    #[serde(flatten)]
    pub field: FieldSpec,
    pub windows: Vec<Window>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub definable: Option<FormulaDomain>,
    pub integrand: IntegrandSpec,
    pub depth: u32,
    #[serde(default = "default_mode")]
    pub mode: Mode,
}

fn default_mode() -> Mode {
    Mode::OneShot
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationResult {
    pub value: Cyc,
    pub certificate: Certificate,
}

impl IntegrationJob {
    pub fn domain(&self) -> Result<Domain> {
        let Some(d) = &self.definable else { return Ok(Domain::Box(self.windows.clone())) };
        if d.vars.len() != self.windows.len() {
            return Err(Error::InvalidInput(format!("{} variables for {} coordinates", d.vars.len(), self.windows.len())));
        }
        let phi = parse(&d.formula)?;
        let vars: Vec<&str> = d.vars.iter().map(String::as_str).collect();
        let set = DefinableSet::new(phi, &vars, self.field, d.vf_box, d.z_window)?;
        if set.sorts().iter().any(|&s| s != crate::denefpas::Sort::VF) {
            return Err(Error::Sort("integration variables must be of sort VF".into()));
        }
        Ok(Domain::Definable { windows: self.windows.clone(), set })
    }

    pub fn run(&self) -> Result<IntegrationResult> {
        let domain = self.domain()?;
        let f = self.integrand.build(self.field, self.windows.len())?;
        let (value, certificate) = integrate(self.field, &domain, &*f, self.depth, self.mode)?;
        Ok(IntegrationResult { value, certificate })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q5() -> FieldSpec {
        FieldSpec::qp(5).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn one(p: u32) -> impl Fn(&[TruncatedElement]) -> Result<Cyc> + Sync {
        move |_| Ok(Cyc::one(p))
    }

    #[test]
    fn haar_normalization() {
        for f in [q5(), FieldSpec::fpt(3).unwrap()] {
            let (v, c) = integrate(f, &Domain::Box(vec![Window::ball(0)]), &one(f.p()), 1, Mode::Refine).unwrap();
            assert_eq!(v, Cyc::one(f.p()));
            assert_eq!(c.stabilized, Some(true));
            let (v, _) = integrate(f, &Domain::Box(vec![Window::ball(1)]), &one(f.p()), 2, Mode::OneShot).unwrap();
            assert_eq!(v.to_scalar(), Some(r(1, f.q() as i64)));
        }
    }

    #[test]
    fn character_integrals() {
        let f = q5();
        let pi_inv = TruncatedElement::uniformizer(f).inv().unwrap();
        let lam = |x: &[TruncatedElement]| Ok(Cyc::root(5, conductor_character(&x[0].mul(&pi_inv)?, LEVEL_CAP)?));
        let psi = |x: &[TruncatedElement]| Ok(Cyc::root(5, standard_character(&x[0].mul(&pi_inv)?, LEVEL_CAP)?));
        let omega = Domain::Box(vec![Window::ball(0)]);
        // ψ(x/ϖ) = Λ(x) has conductor 𝔭 as a function of x: five fifth roots of unity
        let (v, c) = integrate(f, &omega, &psi, 1, Mode::Refine).unwrap();
        assert!(v.is_zero());
        assert_eq!(c.stabilized, Some(true));
        // Λ(x/ϖ) only becomes constant on cosets of 𝔭^2
        let (_, c1) = integrate(f, &omega, &lam, 1, Mode::Refine).unwrap();
        assert_eq!(c1.stabilized, Some(false));
        let (v2, c2) = integrate(f, &omega, &lam, 2, Mode::Refine).unwrap();
        assert!(v2.is_zero());
        assert_eq!(c2.stabilized, Some(true));
    }

    #[test]
    fn constancy_depths() {
        let f = q5();
        let x = [TruncatedElement::from_int(f, 7)];
        assert_eq!(local_constancy_depth(&one(5), &x, 3).unwrap(), 1);
        let ind = |x: &[TruncatedElement]| Ok(if x[0].valuation().is_none_or(|v| v >= 0) { Cyc::one(5) } else { Cyc::zero(5) });
        assert_eq!(local_constancy_depth(&ind, &x, 3).unwrap(), 1);
        let lam2 = |x: &[TruncatedElement]| Ok(Cyc::root(5, conductor_character(&x[0].shift(-2), LEVEL_CAP)?));
        assert_eq!(local_constancy_depth(&lam2, &x, 4).unwrap(), 3);
        assert_eq!(local_constancy_depth(&lam2, &x, 2).unwrap_err(), Error::NotFound(2));
    }

    #[test]
    fn form_measures() {
        let f = q5();
        let x0 = |x: &[Option<TruncatedElement>]| known(&x[0]);
        let unit = |_: &[Option<TruncatedElement>]| Ok(TruncatedElement::one(f));
        assert_eq!(form_measure(f, &Domain::Box(vec![Window::ball(0)]), &unit, 1).unwrap(), r(1, 1));
        assert_eq!(form_measure(f, &Domain::Box(vec![Window::shell(0)]), &x0, 1).unwrap(), r(4, 5));
        assert_eq!(form_measure(f, &Domain::Box(vec![Window::shell(1)]), &x0, 2).unwrap(), r(4, 125));
        // the zero coset has no decided order
        assert!(matches!(
            form_measure(f, &Domain::Box(vec![Window::ball(0)]), &x0, 2),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn definable_domain() {
        let f = q5();
        let job: IntegrationJob = serde_json::from_value(serde_json::json!({
            "p": 5, "char": "zero",
            "windows": [{"lo": 0}],
            "definable": {"formula": "ord(x) >= 1", "vars": ["x"]},
            "integrand": {"kind": "one"},
            "depth": 2,
            "mode": "refine"
        }))
        .unwrap();
        let res = job.run().unwrap();
        assert_eq!(res.value.to_scalar(), Some(r(1, 5)));
        assert_eq!(res.certificate.stabilized, Some(true));
        // at depth 0 relative to the formula the zero coset is undecided
        let bad = Domain::Definable {
            windows: vec![Window::ball(0)],
            set: DefinableSet::new(parse("ord(x) = 3").unwrap(), &["x"], f, default_box(), default_window()).unwrap(),
        };
        assert_eq!(integrate(f, &bad, &one(5), 2, Mode::OneShot).unwrap_err(), Error::DomainUndecided);
    }
}
