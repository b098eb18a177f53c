//! Typed jobs: parsing of `inputs`/`params` per verb and the per-field runs.

use std::collections::BTreeMap;

use padic_harmonic::denefpas::{evaluate, parse, EvalContext, VfBox};
use padic_harmonic::integrate::IntegrationJob;
use padic_harmonic::localfield::FieldSpec;
use padic_harmonic::moyprasad::{lattice_member, mp_lattice};
use padic_harmonic::optimal::optimal_points_all;
use padic_harmonic::orbital::{
    classify, eta, eta_r, mu_hat, niceness_scan, orbital_integral, sufficiency_depth, MuHatParams, MuHatReport,
    NicenessSpec, Route,
};
use padic_harmonic::rootdata::{Alcove, RootSystem};
use padic_harmonic::scalar::{rational_serde, rational_string};
use padic_harmonic::{Cyc, Error, Rational, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use crate::error::CliError;
use crate::spec::*;

/// Deserializes `v`, reporting failures at their JSON pointer below `base`.
pub fn typed<T: DeserializeOwned>(v: &Json, base: &str) -> Result<T, CliError> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    serde_path_to_error::deserialize(v).map_err(|e| {
        let mut path = base.to_string();
        for seg in e.path().iter() {
            use serde_path_to_error::Segment;
            match seg {
                Segment::Seq { index } => path.push_str(&format!("/{index}")),
                Segment::Map { key } | Segment::Enum { variant: key } => {
                    path.push('/');
                    path.push_str(&key.replace('~', "~0").replace('/', "~1"));
                }
                Segment::Unknown => {}
            }
        }
        CliError::Schema { pointer: path, message: e.into_inner().to_string() }
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootsInputs {
    pub cartan: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootsParams {
    #[serde(default = "one")]
    pub level_bound: i64,
}

fn one() -> i64 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimalInputs {
    pub cartan: Vec<Vec<i64>>,
    #[serde(default)]
    pub tau: Option<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeInputs {
    #[serde(default)]
    pub model: ModelName,
    #[serde(with = "rational_serde::vec")]
    pub point: Vec<Rational>,
    #[serde(with = "rational_serde")]
    pub level: Rational,
    #[serde(default)]
    pub strict: bool,
    /// Matrices tested for membership.
    #[serde(default)]
    pub elements: Vec<Vec<Vec<ElementDesc>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaInputs {
    pub formula: String,
    #[serde(default)]
    pub assignment: BTreeMap<String, ValueDesc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaParams {
    #[serde(default = "default_box")]
    pub vf_box: VfBox,
    #[serde(default = "default_z_window")]
    pub z_window: (i64, i64),
}

fn default_box() -> VfBox {
    VfBox { v_lo: -2, v_hi: 4, depth: 2 }
}

fn default_z_window() -> (i64, i64) {
    (-4, 8)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairInputs {
    pub x: LieDesc,
    pub y: LieDesc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaParams {
    /// Enumeration depth; defaults to the sufficiency depth.
    #[serde(default)]
    pub m: Option<u32>,
    /// Cut off by `𝟙_{𝔤_r}`.
    #[serde(default, deserialize_with = "opt_rational")]
    pub r: Option<Rational>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitalInputs {
    pub x: LieDesc,
    pub f: FunctionDesc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitalParams {
    #[serde(default)]
    pub window: i64,
    #[serde(default)]
    pub depth: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteChoice {
    Direct,
    Huntsinger,
    Both,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuHatJobParams {
    #[serde(default = "both")]
    pub route: RouteChoice,
    #[serde(default)]
    pub start: i64,
    #[serde(default = "three")]
    pub window: i64,
    #[serde(default)]
    pub depth: Option<u32>,
}

fn three() -> i64 {
    3
}

fn both() -> RouteChoice {
    RouteChoice::Both
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleInput {
    pub x: LieDesc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferInputs {
    pub computation: Verb,
    #[serde(default)]
    pub inputs: Json,
    #[serde(default)]
    pub params: Json,
}

pub enum Job {
    Roots(RootsInputs, RootsParams),
    OptimalPoints(OptimalInputs),
    MpLattice(LatticeInputs),
    EvalFormula(FormulaInputs, FormulaParams),
    Integrate(IntegrateInputs, IntegrateParams),
    Eta(PairInputs, EtaParams),
    Orbital(OrbitalInputs, OrbitalParams),
    MuHat(PairInputs, MuHatJobParams),
    NicenessScan(SingleInput, NicenessSpec),
}

impl Job {
    /// Parses `inputs` and `params`; `base` is the JSON pointer of their parent.
    pub fn parse(verb: Verb, inputs: &Json, params: &Json, base: &str) -> Result<Self, CliError> {
        let i = format!("{base}/inputs");
        let p = format!("{base}/params");
        let none = |v: &Json, at: &str| -> Result<(), CliError> {
            match v {
                Json::Null => Ok(()),
                Json::Object(m) if m.is_empty() => Ok(()),
                _ => Err(CliError::Schema { pointer: at.to_string(), message: "this computation takes no parameters".into() }),
            }
        };
        Ok(match verb {
            Verb::Roots => Job::Roots(typed(inputs, &i)?, typed(params, &p)?),
            Verb::OptimalPoints => {
                none(params, &p)?;
                Job::OptimalPoints(typed(inputs, &i)?)
            }
            Verb::MpLattice => {
                none(params, &p)?;
                Job::MpLattice(typed(inputs, &i)?)
            }
            Verb::EvalFormula => Job::EvalFormula(typed(inputs, &i)?, typed(params, &p)?),
            Verb::Integrate => Job::Integrate(typed(inputs, &i)?, typed(params, &p)?),
            Verb::Eta => Job::Eta(typed(inputs, &i)?, typed(params, &p)?),
            Verb::Orbital => Job::Orbital(typed(inputs, &i)?, typed(params, &p)?),
            Verb::MuHat => Job::MuHat(typed(inputs, &i)?, typed(params, &p)?),
            Verb::NicenessScan => Job::NicenessScan(typed(inputs, &i)?, typed(params, &p)?),
            Verb::TransferCheck => {
                return Err(CliError::Schema {
                    pointer: format!("{base}/computation"),
                    message: "transfer-check cannot be nested".into(),
                })
            }
        })
    }

    /// Runs the job over one field (`None` for field-free verbs). The flag is
    /// false when an internal cross-check of the run failed.
    pub fn run(&self, field: Option<FieldSpec>) -> Result<(Json, bool)> {
        let need = || field.ok_or_else(|| Error::InvalidInput("no field given".into()));
        let out = match self {
            Job::Roots(i, p) => roots(i, p)?,
            Job::OptimalPoints(i) => {
                let rs = RootSystem::from_cartan(i.cartan.clone())?;
                to_json(&optimal_points_all(&rs, i.tau.as_deref())?)
            }
            Job::MpLattice(i) => lattice(i, need()?)?,
            Job::EvalFormula(i, p) => {
                let field = need()?;
                let phi = parse(&i.formula)?;
                let mut ctx = EvalContext::new(field, p.vf_box, p.z_window);
                ctx.assignment = build_assignment(&i.assignment, field)?;
                let ev = evaluate(&phi, &ctx)?;
                json!({ "formula": phi.to_string(), "value": ev.value, "box_too_small": ev.box_too_small })
            }
            Job::Integrate(i, p) => {
                let field = need()?;
                let job = IntegrationJob {
                    field,
                    windows: i.windows.clone(),
                    definable: i.definable.clone(),
                    integrand: i.integrand.build(field)?,
                    depth: p.depth,
                    mode: p.mode,
                };
                to_json(&job.run()?)
            }
            Job::Eta(i, p) => eta_job(i, p, need()?)?,
            Job::Orbital(i, p) => {
                let field = need()?;
                let x = i.x.build(field)?;
                let f = i.f.build(field)?;
                to_json(&orbital_integral(&x, &f, p.window, p.depth)?)
            }
            Job::MuHat(i, p) => return mu_hat_job(i, p, need()?),
            Job::NicenessScan(i, spec) => to_json(&niceness_scan(&i.x.build(need()?)?, spec)?),
        };
        Ok((out, true))
    }
}

fn to_json<T: Serialize>(t: &T) -> Json {
    serde_json::to_value(t).expect("reports serialize")
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(rational_string).collect()
}

fn roots(i: &RootsInputs, p: &RootsParams) -> Result<Json> {
    let rs = RootSystem::from_cartan(i.cartan.clone())?;
    let al = Alcove::fundamental(&rs);
    let affine = rs.affine_roots(p.level_bound);
    Ok(json!({
        "rank": rs.rank(),
        "cartan": rs.cartan(),
        "roots": rs.roots(),
        "positive_roots": rs.positive_roots(),
        "highest_roots": rs.highest_roots(),
        "affine_roots": affine,
        "alcove": {
            "walls": al.walls(),
            "vertices": al.vertices().iter().map(|v| rationals(v)).collect::<Vec<_>>(),
            "faces": al.faces(),
        },
    }))
}

fn lattice(i: &LatticeInputs, field: FieldSpec) -> Result<Json> {
    let model = i.model.model()?;
    let l = mp_lattice(&model, &i.point, &i.level, i.strict)?;
    // volume relative to 𝔤(Ω)
    let q = Rational::from_integer(field.q().into());
    let total: i64 = l.shifts.iter().sum();
    let unit = Rational::from_integer(1.into());
    let volume = (0..total.abs()).fold(unit, |v, _| if total > 0 { v / &q } else { v * &q });
    let mut members = Vec::new();
    for m in &i.elements {
        let y = m.iter().map(|row| row.iter().map(|e| e.build(field)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
        members.push(lattice_member(&model, &y, &l)?);
    }
    Ok(json!({ "lattice": l, "volume": rational_string(&volume), "members": members }))
}

fn eta_job(i: &PairInputs, p: &EtaParams, field: FieldSpec) -> Result<Json> {
    let (x, y) = (i.x.build(field)?, i.y.build(field)?);
    let m = p.m.unwrap_or_else(|| sufficiency_depth(&x, &y).unwrap_or(1));
    let value = match &p.r {
        Some(r) => eta_r(&x, &y, r, m)?,
        None => eta(&x, &y, m)?,
    };
    // the next depth, as the refinement certificate
    let refined = match &p.r {
        Some(r) => eta_r(&x, &y, r, m + 1)?,
        None => eta(&x, &y, m + 1)?,
    };
    Ok(json!({
        "x": x,
        "y": y,
        "m": m,
        "r": p.r.as_ref().map(rational_string),
        "value": value,
        "refined": refined == value,
    }))
}

fn mu_hat_job(i: &PairInputs, p: &MuHatJobParams, field: FieldSpec) -> Result<(Json, bool)> {
    let (x, y) = (i.x.build(field)?, i.y.build(field)?);
    if x.is_zero() {
        let value = padic_harmonic::orbital::mu_hat_zero(&y);
        return Ok((json!({ "x": x, "y": y, "value": value, "agree": true, "routes": [] }), true));
    }
    let routes: &[Route] = match p.route {
        RouteChoice::Direct => &[Route::Direct],
        RouteChoice::Huntsinger => &[Route::Huntsinger],
        RouteChoice::Both => &[Route::Direct, Route::Huntsinger],
    };
    let params = MuHatParams { start: p.start, window: p.window, depth: p.depth };
    let reports = routes.iter().map(|r| mu_hat(&x, &y, *r, &params)).collect::<Result<Vec<MuHatReport>>>()?;
    let agree = reports.windows(2).all(|w| w[0].value == w[1].value);
    let value: Cyc = reports[0].value.clone();
    let (re, im) = value.to_complex();
    let out = json!({
        "x": x,
        "y": y,
        "class_x": classify(&x),
        "class_y": classify(&y),
        "value": value,
        "abs_sq": value.abs_sq(),
        "approx": [re, im],
        "agree": agree,
        "routes": reports,
    });
    Ok((out, agree))
}

/// Field-list checks: at least one field, two sharing `p` for transfer checks.
pub fn check_fields(verb: Verb, fields: &[FieldSpec]) -> Result<(), CliError> {
    if !verb.field_free() && fields.is_empty() {
        return Err(CliError::Schema { pointer: "/fields".into(), message: "at least one field is required".into() });
    }
    if verb == Verb::TransferCheck {
        if fields.len() < 2 {
            return Err(CliError::Schema { pointer: "/fields".into(), message: "transfer-check needs at least two fields".into() });
        }
        if let Some(i) = fields.iter().position(|f| f.p() != fields[0].p()) {
            return Err(CliError::Schema { pointer: format!("/fields/{i}"), message: "fields must share the residue characteristic".into() });
        }
    }
    Ok(())
}

fn opt_rational<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
    rational_serde::deserialize(d).map(Some)
}
