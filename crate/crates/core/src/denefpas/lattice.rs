use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};

use super::{Formula, Term, Value};
use crate::moyprasad::{common_denominator, BasisVector, ChevalleyModel, Matrix};
use crate::rootdata::Alcove;
use crate::{Error, Rational, Result};

/// Name of the VF variable for the matrix entry `(i, j)` (0-based).
pub fn entry_var(i: usize, j: usize) -> String {
    format!("y{}_{}", i + 1, j + 1)
}

/// Assignment of a matrix to the variables of [`lattice_formula`].
pub fn matrix_assignment(y: &Matrix) -> BTreeMap<String, Value> {
    let mut out = BTreeMap::new();
    for (i, row) in y.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            out.insert(entry_var(i, j), Value::VF(e.clone()));
        }
    }
    out
}

fn times(n: i64, t: Term) -> Term {
    (1..n).fold(t.clone(), |acc, _| Term::Add(Box::new(acc), Box::new(t.clone())))
}

/// Formula in the matrix entries defining `𝔤_{x,r}` (or `𝔤_{x,r+}` when
/// `strict`): each coordinate `c` of weight `α` must satisfy
/// `ord(c) + α(x) ≥ r`, cleared of denominators.
pub fn lattice_formula(model: &ChevalleyModel, x: &[Rational], r: &Rational, strict: bool) -> Result<Formula> {
    if !Alcove::fundamental(model.root_system()).contains(x) {
        return Err(Error::PointOutsideAlcove);
    }
    let weights: Vec<Rational> = model
        .basis()
        .iter()
        .map(|b| match b {
            BasisVector::Torus(_) => Rational::zero(),
            BasisVector::Root { root, .. } => {
                root.iter().zip(x).map(|(g, xi)| Rational::from_integer((*g).into()) * xi).sum()
            }
        })
        .collect();
    let mut all = weights.clone();
    all.push(r.clone());
    let d = common_denominator(&all);
    let dq = Rational::from_integer(d.into());
    let mut f: Option<Formula> = None;
    for (b, w) in model.basis().iter().zip(&weights) {
        let coord = match b {
            BasisVector::Torus(i) => (1..=*i).fold(Term::Var(entry_var(0, 0)), |acc, j| {
                Term::Add(Box::new(acc), Box::new(Term::Var(entry_var(j, j))))
            }),
            BasisVector::Root { i, j, .. } => Term::Var(entry_var(*i, *j)),
        };
        let bound = ((r - w) * &dq).to_integer().to_i64().ok_or_else(|| Error::InvalidInput("level too large".into()))?;
        let bound = if strict { bound + 1 } else { bound };
        let atom = Formula::Ge(times(d, Term::Ord(Box::new(coord))), Term::Int(bound));
        f = Some(match f {
            None => atom,
            Some(g) => Formula::And(Box::new(g), Box::new(atom)),
        });
    }
    Ok(f.unwrap_or(Formula::Bool(true)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denefpas::{evaluate, EvalContext, VfBox};
    use crate::localfield::{FieldSpec, TruncatedElement};
    use crate::moyprasad::{lattice_member, mp_lattice, sl2_matrix};

    #[test]
    fn half_point_level_zero() {
        let f = FieldSpec::qp(5).unwrap();
        let m = ChevalleyModel::sl2();
        let x = [Rational::new(1.into(), 2.into())];
        let phi = lattice_formula(&m, &x, &Rational::zero(), false).unwrap();
        let l = mp_lattice(&m, &x, &Rational::zero(), false).unwrap();
        let z = TruncatedElement::zero(f);
        let one = TruncatedElement::one(f);
        for (c, expected) in [(one.clone(), false), (TruncatedElement::uniformizer(f), true)] {
            let y = sl2_matrix(&z, &z, &c);
            let mut ctx = EvalContext::new(f, VfBox { v_lo: 0, v_hi: 0, depth: 1 }, (0, 0));
            ctx.assignment = matrix_assignment(&y);
            assert_eq!(evaluate(&phi, &ctx).unwrap().value, expected);
            assert_eq!(lattice_member(&m, &y, &l).unwrap(), expected);
        }
    }
}
