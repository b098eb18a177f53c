//! Test functions on `sl_2(K) ≅ K³` and their Fourier transforms
//! `f̂(Y) = ∫ f(X) Λ(⟨X, Y⟩) dX`, with `vol(Ω³) = 1`.

use serde::{Deserialize, Serialize};

use super::{trace_form, LieElement};
use crate::integrate::{integrate, Domain, Mode, Window, LEVEL_CAP};
use crate::localfield::{conductor_character, FieldSpec, TruncatedElement};
use crate::scalar::rational_serde;
use crate::{Cyc, Rational, Result};

/// A locally constant, compactly supported function on `sl_2(K)`.
pub trait TestFunction: Sync {
    fn field(&self) -> FieldSpec;
    /// `s` with the support inside `𝔭^s Ω³`.
    fn support(&self) -> i64;
    /// `t` with the function constant on cosets of `𝔭^t Ω³`.
    fn resolution(&self) -> i64;
    fn eval(&self, z: &LieElement) -> Result<Cyc>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BasicFunction {
    /// `𝟙_{c + 𝔭^m Ω³}`.
    Coset { center: LieElement, m: i64 },
    /// `Λ(⟨w, ·⟩) 𝟙_{𝔭^m Ω³}`.
    Twisted { w: LieElement, m: i64 },
    /// `𝟙` of `{Z ∈ 𝔭^s Ω³ : a² + bc ∈ q + 𝔭^m}`.
    LevelShell { q: TruncatedElement, m: i64, s: i64 },
    Combination { terms: Vec<Term> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "rational_serde")]
    pub coeff: Rational,
    pub f: BasicFunction,
}

impl BasicFunction {
    /// `𝟙_{𝔭^m Ω³}`.
    pub fn lattice(field: FieldSpec, m: i64) -> Self {
        BasicFunction::Coset { center: LieElement::zero(field), m }
    }

    pub fn combination(terms: Vec<(Rational, BasicFunction)>) -> Self {
        BasicFunction::Combination { terms: terms.into_iter().map(|(coeff, f)| Term { coeff, f }).collect() }
    }
}

fn in_lattice(z: &LieElement, m: i64) -> bool {
    z.coords().iter().all(|x| x.valuation().is_none_or(|v| v >= m))
}

impl TestFunction for BasicFunction {
    fn field(&self) -> FieldSpec {
        match self {
            BasicFunction::Coset { center, .. } => center.field(),
            BasicFunction::Twisted { w, .. } => w.field(),
            BasicFunction::LevelShell { q, .. } => q.field(),
            BasicFunction::Combination { terms } => terms[0].f.field(),
        }
    }

    fn support(&self) -> i64 {
        match self {
            BasicFunction::Coset { center, m } => center.min_ord().map_or(*m, |v| v.min(*m)),
            BasicFunction::Twisted { m, .. } => *m,
            BasicFunction::LevelShell { s, .. } => *s,
            BasicFunction::Combination { terms } => terms.iter().map(|t| t.f.support()).min().unwrap_or(0),
        }
    }

    fn resolution(&self) -> i64 {
        match self {
            BasicFunction::Coset { m, .. } => *m,
            BasicFunction::Twisted { w, m } => w.min_ord().map_or(*m, |v| (*m).max(1 - v)),
            // δ moves a² + bc by 2aδ + δ² and friends
            BasicFunction::LevelShell { m, s, .. } => (*m - *s).max((*m + 1).div_euclid(2)).max(*s),
            BasicFunction::Combination { terms } => terms.iter().map(|t| t.f.resolution()).max().unwrap_or(0),
        }
    }

    fn eval(&self, z: &LieElement) -> Result<Cyc> {
        let p = z.field().p();
        let ind = |b: bool| if b { Cyc::one(p) } else { Cyc::zero(p) };
        match self {
            BasicFunction::Coset { center, m } => Ok(ind(in_lattice(&z.add(&center.neg())?, *m))),
            BasicFunction::Twisted { w, m } => {
                if !in_lattice(z, *m) {
                    return Ok(Cyc::zero(p));
                }
                Ok(Cyc::root(p, conductor_character(&trace_form(w, z)?, LEVEL_CAP)?))
            }
            BasicFunction::LevelShell { q, m, s } => {
                if !in_lattice(z, *s) {
                    return Ok(Cyc::zero(p));
                }
                let d = z.q()?.sub(q)?;
                Ok(ind(d.valuation().is_none_or(|v| v >= *m)))
            }
            BasicFunction::Combination { terms } => {
                let mut acc = Cyc::zero(p);
                for t in terms {
                    acc = acc.add(&t.f.eval(z)?.scale(&t.coeff));
                }
                Ok(acc)
            }
        }
    }
}

/// `f̂`, evaluated pointwise by [`fourier_test`].
pub struct Transform<'a> {
    pub f: &'a dyn TestFunction,
}

impl TestFunction for Transform<'_> {
    fn field(&self) -> FieldSpec {
        self.f.field()
    }

    fn support(&self) -> i64 {
        1 - self.f.resolution()
    }

    fn resolution(&self) -> i64 {
        1 - self.f.support()
    }

    fn eval(&self, y: &LieElement) -> Result<Cyc> {
        fourier_test(self.f, y)
    }
}

/// `f̂(Y)` as an exact sum over the cosets of the support box on which both
/// `f` and `Λ(⟨·, Y⟩)` are constant.
pub fn fourier_test(f: &dyn TestFunction, y: &LieElement) -> Result<Cyc> {
    let field = f.field();
    field.check_same(&y.field())?;
    let s = f.support();
    let mut m = f.resolution().max(s).max(1);
    if let Some(v) = y.min_ord() {
        m = m.max(1 - v);
    }
    let domain = Domain::Box(vec![Window::ball(s); 3]);
    let g = |c: &[TruncatedElement]| -> Result<Cyc> {
        let z = LieElement { a: c[0].clone(), b: c[1].clone(), c: c[2].clone() };
        let fz = f.eval(&z)?;
        if fz.is_zero() {
            return Ok(fz);
        }
        Ok(fz.mul(&Cyc::root(field.p(), conductor_character(&trace_form(&z, y)?, LEVEL_CAP)?)))
    };
    Ok(integrate(field, &domain, &g, m as u32, Mode::OneShot)?.0)
}
