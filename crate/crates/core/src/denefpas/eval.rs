use std::collections::BTreeMap;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Formula, Sort, Term};
use crate::localfield::{FieldSpec, TruncatedElement};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ZVal {
    Fin(i64),
    Inf,
}

/// An assignment value in one of the three sorts.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    VF(TruncatedElement),
    /// An unspecified element of `𝔭^k`, e.g. the coset `0 + 𝔭^k`.
    VFBall(i64),
    RF(u32),
    Z(ZVal),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::VF(_) | Value::VFBall(_) => Sort::VF,
            Value::RF(_) => Sort::RF,
            Value::Z(_) => Sort::Z,
        }
    }
}

/// VF quantifiers range over `ϖ^v (d_0 + ... + d_{m-1} ϖ^{m-1})`, `d_0 ≠ 0`,
/// `v_lo ≤ v ≤ v_hi`, together with `0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VfBox {
    pub v_lo: i64,
    pub v_hi: i64,
    pub depth: u32,
}

impl VfBox {
    pub fn widened(&self) -> Self {
        VfBox { v_lo: self.v_lo - 1, v_hi: self.v_hi + 1, depth: self.depth + 1 }
    }

    fn members(&self, field: FieldSpec) -> Result<Vec<TruncatedElement>> {
        let p = field.p();
        let m = self.depth.max(1);
        let tails = (p as u64).pow(m - 1);
        let mut out = vec![TruncatedElement::zero(field)];
        for v in self.v_lo..=self.v_hi {
            for d0 in 1..p {
                for t in 0..tails {
                    let mut ds = vec![d0];
                    let mut u = t;
                    for _ in 1..m {
                        ds.push((u % p as u64) as u32);
                        u /= p as u64;
                    }
                    out.push(TruncatedElement::exact_from_digits(field, v, &ds)?);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct EvalContext {
    pub field: FieldSpec,
    pub assignment: BTreeMap<String, Value>,
    pub vf_box: VfBox,
    pub z_window: (i64, i64),
}

impl EvalContext {
    pub fn new(field: FieldSpec, vf_box: VfBox, z_window: (i64, i64)) -> Self {
        EvalContext { field, assignment: BTreeMap::new(), vf_box, z_window }
    }

    pub fn with(mut self, var: &str, v: Value) -> Self {
        self.assignment.insert(var.to_string(), v);
        self
    }

    /// One step wider, and wide enough to reach every literal of `f`.
    fn widened_for(&self, f: &Formula) -> Self {
        let reach = max_literal(f) + 1;
        let b = self.vf_box.widened();
        EvalContext {
            field: self.field,
            assignment: self.assignment.clone(),
            vf_box: VfBox { v_lo: b.v_lo.min(-reach), v_hi: b.v_hi.max(reach), depth: b.depth },
            z_window: ((self.z_window.0 - 1).min(-reach), (self.z_window.1 + 1).max(reach)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    fn of(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn known(self) -> Option<bool> {
        match self {
            Truth::True => Some(true),
            Truth::False => Some(false),
            Truth::Unknown => None,
        }
    }

    fn not(self) -> Self {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    fn and(self, o: Self) -> Self {
        match (self, o) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }

    fn or(self, o: Self) -> Self {
        self.not().and(o.not()).not()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: bool,
    /// Widening the quantifier boxes (one step, and out to the formula's
    /// literals) changes the answer.
    pub box_too_small: bool,
}

/// A valued-field term whose digits may be exhausted: `Small(k)` is only
/// known to lie in `𝔭^k`.
#[derive(Clone, Debug)]
enum Vf {
    Known(TruncatedElement),
    Small(i64),
}

#[derive(Clone, Copy, Debug)]
enum Zv {
    Known(ZVal),
    AtLeast(i64),
}

fn lift(r: Result<TruncatedElement>) -> Result<Vf> {
    match r {
        Ok(x) => Ok(Vf::Known(x)),
        Err(Error::InsufficientPrecision { known_to }) => Ok(Vf::Small(known_to)),
        Err(e) => Err(e),
    }
}

impl Vf {
    fn lower(&self) -> ZVal {
        match self {
            Vf::Known(x) => x.valuation().map_or(ZVal::Inf, ZVal::Fin),
            Vf::Small(k) => ZVal::Fin(*k),
        }
    }

    fn add(&self, o: &Vf) -> Result<Vf> {
        match (self, o) {
            (Vf::Known(a), Vf::Known(b)) => lift(a.add(b)),
            (Vf::Small(k), Vf::Known(x)) | (Vf::Known(x), Vf::Small(k)) => match x.valuation() {
                Some(v) if v < *k => lift(x.truncate(*k)),
                _ => Ok(Vf::Small(*k)),
            },
            (Vf::Small(a), Vf::Small(b)) => Ok(Vf::Small(*a.min(b))),
        }
    }

    fn mul(&self, o: &Vf) -> Result<Vf> {
        match (self, o) {
            (Vf::Known(a), Vf::Known(b)) => lift(a.mul(b)),
            (Vf::Small(k), other) | (other, Vf::Small(k)) => match other.lower() {
                ZVal::Inf => Ok(Vf::Known(TruncatedElement::zero(match other {
                    Vf::Known(x) => x.field(),
                    Vf::Small(_) => unreachable!(),
                }))),
                ZVal::Fin(v) => Ok(Vf::Small(k + v)),
            },
        }
    }
}

fn zadd(a: ZVal, b: ZVal) -> ZVal {
    match (a, b) {
        (ZVal::Fin(x), ZVal::Fin(y)) => ZVal::Fin(x + y),
        _ => ZVal::Inf,
    }
}

impl Zv {
    fn lower(self) -> ZVal {
        match self {
            Zv::Known(z) => z,
            Zv::AtLeast(k) => ZVal::Fin(k),
        }
    }
}

struct Evaluator<'a> {
    field: FieldSpec,
    vf_range: &'a [TruncatedElement],
    z_window: (i64, i64),
}

type Env = BTreeMap<String, Value>;

impl Evaluator<'_> {
    fn var<'e>(&self, env: &'e Env, v: &str) -> Result<&'e Value> {
        env.get(v).ok_or_else(|| Error::Unassigned(v.to_string()))
    }

    fn vf(&self, t: &Term, env: &Env) -> Result<Vf> {
        match t {
            Term::Var(v) => match self.var(env, v)? {
                Value::VF(x) => {
                    x.field().check_same(&self.field)?;
                    Ok(Vf::Known(x.clone()))
                }
                Value::VFBall(k) => Ok(Vf::Small(*k)),
                other => Err(Error::Sort(format!("`{v}` is assigned a {} value, expected VF", other.sort()))),
            },
            Term::Int(n) => Ok(Vf::Known(TruncatedElement::from_int(self.field, *n))),
            Term::Add(a, b) => self.vf(a, env)?.add(&self.vf(b, env)?),
            Term::Mul(a, b) => self.vf(a, env)?.mul(&self.vf(b, env)?),
            _ => Err(Error::Sort(format!("`{t}` is not a VF term"))),
        }
    }

    fn rf(&self, t: &Term, env: &Env) -> Result<Option<u32>> {
        let p = self.field.p() as u64;
        match t {
            Term::Var(v) => match self.var(env, v)? {
                Value::RF(x) => Ok(Some(*x % p as u32)),
                other => Err(Error::Sort(format!("`{v}` is assigned a {} value, expected RF", other.sort()))),
            },
            Term::Int(n) => Ok(Some(n.rem_euclid(p as i64) as u32)),
            Term::Add(a, b) => Ok(self.rf(a, env)?.zip(self.rf(b, env)?).map(|(x, y)| ((x as u64 + y as u64) % p) as u32)),
            Term::Mul(a, b) => Ok(self.rf(a, env)?.zip(self.rf(b, env)?).map(|(x, y)| ((x as u64 * y as u64) % p) as u32)),
            Term::Ac(a) => Ok(match self.vf(a, env)? {
                Vf::Known(x) => Some(x.ac()),
                Vf::Small(_) => None,
            }),
            _ => Err(Error::Sort(format!("`{t}` is not an RF term"))),
        }
    }

    fn z(&self, t: &Term, env: &Env) -> Result<Zv> {
        match t {
            Term::Var(v) => match self.var(env, v)? {
                Value::Z(z) => Ok(Zv::Known(*z)),
                other => Err(Error::Sort(format!("`{v}` is assigned a {} value, expected Z", other.sort()))),
            },
            Term::Int(n) => Ok(Zv::Known(ZVal::Fin(*n))),
            Term::Inf => Ok(Zv::Known(ZVal::Inf)),
            Term::Add(a, b) => {
                let (x, y) = (self.z(a, env)?, self.z(b, env)?);
                Ok(match (x, y) {
                    (Zv::Known(x), Zv::Known(y)) => Zv::Known(zadd(x, y)),
                    (Zv::Known(ZVal::Inf), _) | (_, Zv::Known(ZVal::Inf)) => Zv::Known(ZVal::Inf),
                    _ => match zadd(x.lower(), y.lower()) {
                        ZVal::Fin(k) => Zv::AtLeast(k),
                        ZVal::Inf => Zv::Known(ZVal::Inf),
                    },
                })
            }
            Term::Ord(a) => Ok(match self.vf(a, env)? {
                Vf::Known(x) => Zv::Known(x.valuation().map_or(ZVal::Inf, ZVal::Fin)),
                Vf::Small(k) => Zv::AtLeast(k),
            }),
            _ => Err(Error::Sort(format!("`{t}` is not a Z term"))),
        }
    }

    fn ge(&self, a: Zv, b: Zv) -> Truth {
        match (a, b) {
            (Zv::Known(x), Zv::Known(y)) => Truth::of(x >= y),
            (_, Zv::Known(y)) if a.lower() >= y => Truth::True,
            (Zv::Known(ZVal::Inf), _) => Truth::True,
            (Zv::Known(x), Zv::AtLeast(k)) if x < ZVal::Fin(k) => Truth::False,
            _ => Truth::Unknown,
        }
    }

    fn formula(&self, f: &Formula, env: &mut Env) -> Result<Truth> {
        Ok(match f {
            Formula::Bool(b) => Truth::of(*b),
            Formula::Eq(Sort::VF, a, b) => match self.vf(a, env)?.add(&self.vf(b, env)?.mul(&Vf::Known(TruncatedElement::from_int(self.field, -1)))?)? {
                Vf::Known(d) => Truth::of(d.is_zero()),
                Vf::Small(_) => Truth::Unknown,
            },
            Formula::Eq(Sort::RF, a, b) => match (self.rf(a, env)?, self.rf(b, env)?) {
                (Some(x), Some(y)) => Truth::of(x == y),
                _ => Truth::Unknown,
            },
            Formula::Eq(Sort::Z, a, b) => {
                let (x, y) = (self.z(a, env)?, self.z(b, env)?);
                self.ge(x, y).and(self.ge(y, x))
            }
            Formula::Ge(a, b) => self.ge(self.z(a, env)?, self.z(b, env)?),
            Formula::Cong(n, a, b) => match (self.z(a, env)?, self.z(b, env)?) {
                (Zv::Known(ZVal::Fin(x)), Zv::Known(ZVal::Fin(y))) => Truth::of((x - y).is_multiple_of(&(*n as i64))),
                // ∞ is congruent only to itself
                (Zv::Known(x), Zv::Known(y)) => Truth::of(x == y),
                _ => Truth::Unknown,
            },
            Formula::Not(a) => self.formula(a, env)?.not(),
            Formula::And(a, b) => {
                let x = self.formula(a, env)?;
                if x == Truth::False {
                    return Ok(x);
                }
                x.and(self.formula(b, env)?)
            }
            Formula::Or(a, b) => {
                let x = self.formula(a, env)?;
                if x == Truth::True {
                    return Ok(x);
                }
                x.or(self.formula(b, env)?)
            }
            Formula::Exists(v, s, body) => self.quantify(v, *s, body, env, true)?,
            Formula::Forall(v, s, body) => self.quantify(v, *s, body, env, false)?,
        })
    }

    fn range(&self, s: Sort) -> Vec<Value> {
        match s {
            Sort::VF => self.vf_range.iter().cloned().map(Value::VF).collect(),
            Sort::RF => (0..self.field.p()).map(Value::RF).collect(),
            Sort::Z => (self.z_window.0..=self.z_window.1).map(|z| Value::Z(ZVal::Fin(z))).chain([Value::Z(ZVal::Inf)]).collect(),
        }
    }

    fn quantify(&self, v: &str, s: Sort, body: &Formula, env: &Env, exists: bool) -> Result<Truth> {
        let results: Result<Vec<Truth>> = self
            .range(s)
            .into_par_iter()
            .map(|val| {
                let mut e = env.clone();
                e.insert(v.to_string(), val);
                let t = self.formula(body, &mut e)?;
                Ok(if exists { t } else { t.not() })
            })
            .collect();
        let any = results?.into_iter().fold(Truth::False, Truth::or);
        Ok(if exists { any } else { any.not() })
    }
}

fn max_literal_term(t: &Term) -> i64 {
    match t {
        Term::Int(n) => n.abs(),
        Term::Add(a, b) | Term::Mul(a, b) => max_literal_term(a).max(max_literal_term(b)),
        Term::Ord(a) | Term::Ac(a) => max_literal_term(a),
        Term::Var(_) | Term::Inf => 0,
    }
}

fn max_literal(f: &Formula) -> i64 {
    match f {
        Formula::Bool(_) => 0,
        Formula::Eq(_, a, b) | Formula::Ge(a, b) | Formula::Cong(_, a, b) => max_literal_term(a).max(max_literal_term(b)),
        Formula::Not(a) | Formula::Exists(_, _, a) | Formula::Forall(_, _, a) => max_literal(a),
        Formula::And(a, b) | Formula::Or(a, b) => max_literal(a).max(max_literal(b)),
    }
}

/// Three-valued evaluation over the boxed model.
pub fn evaluate3(f: &Formula, ctx: &EvalContext) -> Result<Truth> {
    if ctx.z_window.0 > ctx.z_window.1 || ctx.vf_box.v_lo > ctx.vf_box.v_hi {
        return Err(Error::InvalidInput("empty quantifier window".into()));
    }
    for (v, s) in f.free_variables() {
        match ctx.assignment.get(&v) {
            None => return Err(Error::Unassigned(v)),
            Some(val) if val.sort() != s => {
                return Err(Error::Sort(format!("`{v}` has sort {s} but is assigned a {} value", val.sort())))
            }
            Some(_) => {}
        }
    }
    let range = if f.has_quantifiers() { ctx.vf_box.members(ctx.field)? } else { Vec::new() };
    let ev = Evaluator { field: ctx.field, vf_range: &range, z_window: ctx.z_window };
    ev.formula(f, &mut ctx.assignment.clone())
}

/// Evaluates `f`; an undecided answer is reported as `InsufficientPrecision`.
pub fn evaluate(f: &Formula, ctx: &EvalContext) -> Result<Evaluation> {
    let value = evaluate3(f, ctx)?.known().ok_or_else(|| {
        let known_to = ctx
            .assignment
            .values()
            .filter_map(|v| match v {
                Value::VF(x) => x.absolute_precision(),
                _ => None,
            })
            .min()
            .unwrap_or(0);
        Error::InsufficientPrecision { known_to }
    })?;
    let box_too_small = f.has_quantifiers() && evaluate3(f, &ctx.widened_for(f))?.known().is_some_and(|w| w != value);
    Ok(Evaluation { value, box_too_small })
}

/// The set cut out by a formula in the listed free variables.
#[derive(Clone, Debug)]
pub struct DefinableSet {
    pub formula: Formula,
    pub vars: Vec<String>,
    pub field: FieldSpec,
    pub vf_box: VfBox,
    pub z_window: (i64, i64),
}

impl DefinableSet {
    /// Every free variable of `formula` must be listed in `vars`.
    pub fn new(formula: Formula, vars: &[&str], field: FieldSpec, vf_box: VfBox, z_window: (i64, i64)) -> Result<Self> {
        let free = formula.free_variables();
        if let Some(v) = free.keys().find(|v| !vars.contains(&v.as_str())) {
            return Err(Error::Unassigned(v.clone()));
        }
        Ok(DefinableSet { formula, vars: vars.iter().map(|s| s.to_string()).collect(), field, vf_box, z_window })
    }

    pub fn sorts(&self) -> Vec<Sort> {
        let free = self.formula.free_variables();
        self.vars.iter().map(|v| free.get(v).copied().unwrap_or(Sort::VF)).collect()
    }

    pub fn contains(&self, point: &[Value]) -> Result<Truth> {
        if point.len() != self.vars.len() {
            return Err(Error::InvalidInput(format!("expected {} values, got {}", self.vars.len(), point.len())));
        }
        let mut ctx = EvalContext::new(self.field, self.vf_box, self.z_window);
        for (v, x) in self.vars.iter().zip(point) {
            ctx.assignment.insert(v.clone(), x.clone());
        }
        evaluate3(&self.formula, &ctx)
    }

    /// Membership of a point of `VF^n`.
    pub fn contains_vf(&self, point: &[TruncatedElement]) -> Result<Truth> {
        let vals: Vec<Value> = point.iter().cloned().map(Value::VF).collect();
        self.contains(&vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denefpas::parse;

    fn q5() -> FieldSpec {
        FieldSpec::qp(5).unwrap()
    }

    fn ctx(field: FieldSpec) -> EvalContext {
        EvalContext::new(field, VfBox { v_lo: -2, v_hi: 4, depth: 3 }, (-3, 3))
    }

    #[test]
    fn witness_25() {
        let f = parse("EX x:VF. ord(x) >= 2 /\\ ac(x) = 1").unwrap();
        let e = evaluate(&f, &ctx(q5())).unwrap();
        assert_eq!(e, Evaluation { value: true, box_too_small: false });
        let g = parse("ord(x) >= 2 /\\ ac(x) = 1").unwrap();
        let c = ctx(q5()).with("x", Value::VF(TruncatedElement::from_int(q5(), 25)));
        assert!(evaluate(&g, &c).unwrap().value);
    }

    #[test]
    fn residue_enumeration() {
        let f = parse("ALL y:RF. y*0 = 0").unwrap();
        assert!(evaluate(&f, &ctx(q5())).unwrap().value);
        let g = parse("EX y:RF. y*y = 2").unwrap();
        assert!(!evaluate(&g, &ctx(q5())).unwrap().value);
        let h = parse("EX y:RF. y*y = 4 /\\ ~(y = 2)").unwrap();
        assert!(evaluate(&h, &ctx(q5())).unwrap().value);
    }

    #[test]
    fn box_sensitivity_is_reported() {
        // the only witnesses have valuation 5, outside the box
        let f = parse("EX x:VF. ord(x) = 5").unwrap();
        let e = evaluate(&f, &ctx(q5())).unwrap();
        assert_eq!(e, Evaluation { value: false, box_too_small: true });
        let g = parse("ALL n:Z. n >= -3").unwrap();
        assert!(evaluate(&g, &ctx(q5())).unwrap().box_too_small);
    }

    #[test]
    fn unknown_propagates() {
        let x = TruncatedElement::from_digits(q5(), 0, &[1]).unwrap();
        let c = ctx(q5()).with("x", Value::VF(x));
        let f = parse("ord(x + 4) >= 1").unwrap();
        assert_eq!(evaluate3(&f, &c).unwrap(), Truth::True);
        let g = parse("ord(x + 4) >= 3").unwrap();
        assert_eq!(evaluate3(&g, &c).unwrap(), Truth::Unknown);
        assert_eq!(evaluate(&g, &c).unwrap_err(), Error::InsufficientPrecision { known_to: 1 });
        let h = parse("ord(x + 4) >= 3 \\/ ac(x) = 1").unwrap();
        assert_eq!(evaluate3(&h, &c).unwrap(), Truth::True);
        let k = parse("x + 4 = 0").unwrap();
        assert_eq!(evaluate3(&k, &c).unwrap(), Truth::Unknown);
    }

    #[test]
    fn ac_of_zero_is_zero() {
        let f = parse("ac(x) = 0 /\\ ord(x) = INF").unwrap();
        let c = ctx(q5()).with("x", Value::VF(TruncatedElement::zero(q5())));
        assert!(evaluate(&f, &c).unwrap().value);
    }

    #[test]
    fn definable_sets() {
        let f = parse("ord(x) >= 0").unwrap();
        let s = DefinableSet::new(f, &["x"], q5(), VfBox { v_lo: -1, v_hi: 1, depth: 1 }, (0, 0)).unwrap();
        assert_eq!(s.contains_vf(&[TruncatedElement::from_int(q5(), 7)]).unwrap(), Truth::True);
        let inv = TruncatedElement::from_int(q5(), 5).inv().unwrap();
        assert_eq!(s.contains_vf(&[inv]).unwrap(), Truth::False);
        let all = parse("x = x").unwrap();
        let s = DefinableSet::new(all, &["x"], q5(), VfBox { v_lo: -1, v_hi: 1, depth: 1 }, (0, 0)).unwrap();
        assert_eq!(s.contains_vf(&[TruncatedElement::zero(q5())]).unwrap(), Truth::True);
        assert!(DefinableSet::new(parse("ord(y) = 0").unwrap(), &["x"], q5(), VfBox { v_lo: 0, v_hi: 0, depth: 1 }, (0, 0)).is_err());
    }

    #[test]
    fn unassigned_and_missorted() {
        let f = parse("ord(x) >= 0").unwrap();
        assert_eq!(evaluate(&f, &ctx(q5())).unwrap_err(), Error::Unassigned("x".into()));
        let c = ctx(q5()).with("x", Value::RF(1));
        assert!(matches!(evaluate(&f, &c), Err(Error::Sort(_))));
    }
}
