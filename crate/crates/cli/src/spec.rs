//! Job files and the field-free input descriptions they contain.

use std::collections::BTreeMap;

use padic_harmonic::denefpas::{Value, ZVal};
use padic_harmonic::integrate::{CharacterKind, FormulaDomain, IntegrandSpec, Monomial, Mode, Window};
use padic_harmonic::localfield::{FieldSpec, TruncatedElement};
use padic_harmonic::moyprasad::ChevalleyModel;
use padic_harmonic::orbital::{BasicFunction, LieElement};
use padic_harmonic::scalar::rational_serde;
use padic_harmonic::Rational;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    Roots,
    OptimalPoints,
    MpLattice,
    EvalFormula,
    Integrate,
    Eta,
    Orbital,
    MuHat,
    NicenessScan,
    TransferCheck,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Roots => "roots",
            Verb::OptimalPoints => "optimal-points",
            Verb::MpLattice => "mp-lattice",
            Verb::EvalFormula => "eval-formula",
            Verb::Integrate => "integrate",
            Verb::Eta => "eta",
            Verb::Orbital => "orbital",
            Verb::MuHat => "mu-hat",
            Verb::NicenessScan => "niceness-scan",
            Verb::TransferCheck => "transfer-check",
        }
    }

    /// Verbs whose output does not depend on a local field.
    pub fn field_free(self) -> bool {
        matches!(self, Verb::Roots | Verb::OptimalPoints)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub computation: Verb,
    #[serde(default)]
    pub fields: Vec<FieldSpec>,
    #[serde(default)]
    pub inputs: serde_json::Value,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default)]
    pub output: Option<String>,
}

/// An element given by digits: `ϖ^val (d_0 + d_1 ϖ + ...)`. A bare
/// nonnegative integer stands for its base-`p` digits, so the same
/// description names digit-matched elements of `Q_p` and `F_p((t))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementDesc {
    Int(u64),
    Digits(DigitsDesc),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DigitsDesc {
    pub val: i64,
    pub digits: Vec<u32>,
    /// `false`: only the listed digits are known.
    #[serde(default = "yes")]
    pub exact: bool,
}

fn yes() -> bool {
    true
}

impl ElementDesc {
    pub fn build(&self, field: FieldSpec) -> padic_harmonic::Result<TruncatedElement> {
        match self {
            ElementDesc::Int(n) => {
                let p = field.p() as u64;
                let (mut n, mut ds) = (*n, Vec::new());
                while n > 0 {
                    ds.push((n % p) as u32);
                    n /= p;
                }
                TruncatedElement::exact_from_digits(field, 0, &ds)
            }
            ElementDesc::Digits(d) if d.exact => TruncatedElement::exact_from_digits(field, d.val, &d.digits),
            ElementDesc::Digits(d) => TruncatedElement::from_digits(field, d.val, &d.digits),
        }
    }
}

/// `a H + b E + c F`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieDesc {
    pub a: ElementDesc,
    pub b: ElementDesc,
    pub c: ElementDesc,
}

impl LieDesc {
    pub fn build(&self, field: FieldSpec) -> padic_harmonic::Result<LieElement> {
        LieElement::new(self.a.build(field)?, self.b.build(field)?, self.c.build(field)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionDesc {
    Coset { center: LieDesc, m: i64 },
    Twisted { w: LieDesc, m: i64 },
    LevelShell { q: ElementDesc, m: i64, s: i64 },
    Combination { terms: Vec<TermDesc> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDesc {
    #[serde(with = "rational_serde")]
    pub coeff: Rational,
    pub f: FunctionDesc,
}

impl FunctionDesc {
    pub fn build(&self, field: FieldSpec) -> padic_harmonic::Result<BasicFunction> {
        Ok(match self {
            FunctionDesc::Coset { center, m } => BasicFunction::Coset { center: center.build(field)?, m: *m },
            FunctionDesc::Twisted { w, m } => BasicFunction::Twisted { w: w.build(field)?, m: *m },
            FunctionDesc::LevelShell { q, m, s } => BasicFunction::LevelShell { q: q.build(field)?, m: *m, s: *s },
            FunctionDesc::Combination { terms } => {
                if terms.is_empty() {
                    return Err(padic_harmonic::Error::InvalidInput("empty combination".into()));
                }
                let mut out = Vec::new();
                for t in terms {
                    out.push((t.coeff.clone(), t.f.build(field)?));
                }
                BasicFunction::combination(out)
            }
        })
    }
}

/// `"sl2"`, `"sl3"`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModelName(pub usize);

impl TryFrom<String> for ModelName {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.strip_prefix("sl")
            .and_then(|n| n.parse().ok())
            .filter(|&n| n >= 2)
            .map(ModelName)
            .ok_or_else(|| format!("unknown model `{s}`, expected sl<n> with n ≥ 2"))
    }
}

impl From<ModelName> for String {
    fn from(m: ModelName) -> String {
        format!("sl{}", m.0)
    }
}

impl Default for ModelName {
    fn default() -> Self {
        ModelName(2)
    }
}

impl ModelName {
    pub fn model(self) -> padic_harmonic::Result<ChevalleyModel> {
        if self.0 == 2 {
            Ok(ChevalleyModel::sl2())
        } else {
            ChevalleyModel::sl(self.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ValueDesc {
    Vf(ElementDesc),
    /// An unspecified element of `𝔭^k`.
    VfBall(i64),
    Rf(u32),
    Z(i64),
    ZInf,
}

impl ValueDesc {
    pub fn build(&self, field: FieldSpec) -> padic_harmonic::Result<Value> {
        Ok(match self {
            ValueDesc::Vf(e) => Value::VF(e.build(field)?),
            ValueDesc::VfBall(k) => Value::VFBall(*k),
            ValueDesc::Rf(r) => Value::RF(*r % field.p()),
            ValueDesc::Z(n) => Value::Z(ZVal::Fin(*n)),
            ValueDesc::ZInf => Value::Z(ZVal::Inf),
        })
    }
}

pub fn build_assignment(a: &BTreeMap<String, ValueDesc>, field: FieldSpec) -> padic_harmonic::Result<BTreeMap<String, Value>> {
    a.iter().map(|(k, v)| Ok((k.clone(), v.build(field)?))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegrandDesc {
    One,
    Character {
        terms: Vec<MonomialDesc>,
        #[serde(default)]
        character: CharacterKind,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialDesc {
    pub coeff: ElementDesc,
    pub exps: Vec<u32>,
}

impl IntegrandDesc {
    pub fn build(&self, field: FieldSpec) -> padic_harmonic::Result<IntegrandSpec> {
        Ok(match self {
            IntegrandDesc::One => IntegrandSpec::One,
            IntegrandDesc::Character { terms, character } => IntegrandSpec::Character {
                terms: terms
                    .iter()
                    .map(|t| Ok(Monomial { coeff: t.coeff.build(field)?, exps: t.exps.clone() }))
                    .collect::<padic_harmonic::Result<_>>()?,
                character: *character,
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateInputs {
    pub windows: Vec<Window>,
    #[serde(default)]
    pub definable: Option<FormulaDomain>,
    pub integrand: IntegrandDesc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateParams {
    pub depth: u32,
    #[serde(default = "one_shot")]
    pub mode: Mode,
}

fn one_shot() -> Mode {
    Mode::OneShot
}
