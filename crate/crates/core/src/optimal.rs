//! Optimal points of the alcove closure.
//!
//! For a subset `𝔖` of the affine roots taking values in `(0, 1)` on the
//! alcove, the optimal point maximizes `min_{ψ ∈ 𝔖} ψ` over `C̄`. The optimum
//! is found by the simplex method; the reported point is the
//! lexicographically least vertex of the optimal face, found by vertex
//! enumeration, which also re-derives the optimum independently.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lp::{self, Lp, LpOutcome};
use crate::rootdata::{AffineRoot, Alcove, RootSystem};
use crate::scalar::rational_serde;
use crate::{Error, Rational, Result};

/// Affine roots `ψ` with `0 < ψ < 1` on the open alcove.
///
/// Decided by two LPs per candidate: `min_{C̄} ψ ≥ 0` and `max_{C̄} ψ ≤ 1`.
/// A nonconstant affine function meeting both bounds on the closure is
/// strictly inside them on the interior.
pub fn sigma_set(alcove: &Alcove, affine: &[AffineRoot]) -> Vec<AffineRoot> {
    let extremum = |psi: &AffineRoot, sign: i64| -> Rational {
        let mut lp = Lp::new(psi.gradient_row().into_iter().map(|g| g * Rational::from_integer(sign.into())).collect());
        let (a, b) = alcove.inequalities();
        for (row, rhs) in a.into_iter().zip(b) {
            lp = lp.le(row, rhs);
        }
        match lp.maximize() {
            LpOutcome::Optimal { value, .. } => {
                value * Rational::from_integer(sign.into()) + Rational::from_integer(psi.constant.into())
            }
            other => unreachable!("alcove LP is bounded and feasible: {other:?}"),
        }
    };
    let mut out: Vec<AffineRoot> = affine
        .iter()
        .filter(|psi| psi.gradient.iter().any(|&g| g != 0))
        .filter(|psi| !extremum(psi, -1).is_negative() && extremum(psi, 1) <= Rational::one())
        .cloned()
        .collect();
    out.sort();
    out.dedup();
    out
}

/// `Σ` for a root system, from affine roots of level at most 2.
pub fn sigma(rs: &RootSystem) -> Vec<AffineRoot> {
    sigma_set(&Alcove::fundamental(rs), &rs.affine_roots(2))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimalPointReport {
    pub subset: Vec<AffineRoot>,
    #[serde(with = "rational_serde::vec")]
    pub point: Vec<Rational>,
    #[serde(with = "rational_serde")]
    pub optimum: Rational,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    /// Optimum found by the simplex method.
    #[serde(with = "rational_serde")]
    pub simplex_value: Rational,
    /// Optimum found by enumerating vertices of the `(x, s)` polytope.
    #[serde(with = "rational_serde")]
    pub vertex_value: Rational,
    /// Vertices of the optimal face; `point` is the first.
    #[serde(skip)]
    pub optimal_face: Vec<Vec<Rational>>,
}

/// The constraints `x ∈ C̄`, `τ x = x` as `A x ≤ b`.
fn feasible_region(alcove: &Alcove, tau: &[usize]) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let (mut a, mut b) = alcove.inequalities();
    let l = alcove.rank();
    for (i, &t) in tau.iter().enumerate() {
        if t != i {
            let mut row = vec![Rational::zero(); l];
            row[i] = Rational::one();
            row[t] = -Rational::one();
            a.push(row.clone());
            b.push(Rational::zero());
            a.push(row.into_iter().map(|x| -x).collect());
            b.push(Rational::zero());
        }
    }
    (a, b)
}

/// Optimal point for `𝔖`, restricted to `τ`-fixed points of `C̄`.
pub fn optimal_point_tau(subset: &[AffineRoot], alcove: &Alcove, tau: &[usize]) -> Result<OptimalPointReport> {
    if subset.is_empty() {
        return Err(Error::InvalidInput("empty subset".into()));
    }
    let l = alcove.rank();
    let (a, b) = feasible_region(alcove, tau);
    // variables (x, s + 1) ≥ 0, maximize s
    let mut obj = vec![Rational::zero(); l + 1];
    obj[l] = Rational::one();
    let mut problem = Lp::new(obj);
    for (row, rhs) in a.iter().zip(&b) {
        let mut r = row.clone();
        r.push(Rational::zero());
        problem = problem.le(r, rhs.clone());
    }
    for psi in subset {
        // s ≤ ψ(x)  ⇔  -g·x + (s+1) ≤ n + 1
        let mut r: Vec<Rational> = psi.gradient_row().into_iter().map(|g| -g).collect();
        r.push(Rational::one());
        problem = problem.le(r, Rational::from_integer((psi.constant + 1).into()));
    }
    let simplex_value = match problem.maximize() {
        LpOutcome::Optimal { value, .. } => value - Rational::one(),
        other => unreachable!("optimal point LP is feasible and bounded: {other:?}"),
    };

    // independent route: vertices of {(x, s)} with s ≥ -1
    let mut a2: Vec<Vec<Rational>> = a
        .iter()
        .map(|r| r.iter().cloned().chain(std::iter::once(Rational::zero())).collect())
        .collect();
    let mut b2 = b.clone();
    for psi in subset {
        let mut r: Vec<Rational> = psi.gradient_row().into_iter().map(|g| -g).collect();
        r.push(Rational::one());
        a2.push(r);
        b2.push(Rational::from_integer(psi.constant.into()));
    }
    let mut lower = vec![Rational::zero(); l + 1];
    lower[l] = -Rational::one();
    a2.push(lower);
    b2.push(Rational::one());
    let vertex_value = lp::vertices(&a2, &b2, l + 1)
        .into_iter()
        .map(|v| v[l].clone())
        .max()
        .expect("bounded nonempty polytope has a vertex");

    // optimal face: x ∈ C̄, τx = x, ψ(x) ≥ optimum
    let (mut a3, mut b3) = (a, b);
    for psi in subset {
        a3.push(psi.gradient_row().into_iter().map(|g| -g).collect());
        b3.push(Rational::from_integer(psi.constant.into()) - simplex_value.clone());
    }
    let face = lp::vertices(&a3, &b3, l);
    let point = face.first().cloned().expect("optimal face is nonempty");
    let optimum = subset.iter().map(|psi| psi.eval(&point)).min().unwrap();
    Ok(OptimalPointReport {
        subset: subset.to_vec(),
        point,
        optimum,
        certificate: Certificate { simplex_value, vertex_value, optimal_face: face },
    })
}

pub fn optimal_point(subset: &[AffineRoot], alcove: &Alcove) -> Result<OptimalPointReport> {
    let id: Vec<usize> = (0..alcove.rank()).collect();
    optimal_point_tau(subset, alcove, &id)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimalPoints {
    pub sigma: Vec<AffineRoot>,
    /// Distinct optimal points, sorted.
    pub points: Vec<Vec<String>>,
    pub reports: Vec<OptimalPointReport>,
}

/// One optimal point per nonempty `τ`-invariant subset of `Σ`.
pub fn optimal_points_all(rs: &RootSystem, tau: Option<&[usize]>) -> Result<OptimalPoints> {
    let id: Vec<usize> = (0..rs.rank()).collect();
    let tau = tau.unwrap_or(&id);
    rs.check_automorphism(tau)?;
    let alcove = Alcove::fundamental(rs);
    let sigma = sigma_set(&alcove, &rs.affine_roots(2));
    if sigma.len() > 20 {
        return Err(Error::InvalidInput(format!("|Σ| = {} is too large to enumerate subsets", sigma.len())));
    }
    let image: Vec<usize> = sigma
        .iter()
        .map(|psi| sigma.iter().position(|x| *x == psi.permuted(tau)).expect("τ preserves Σ"))
        .collect();
    let masks: Vec<u32> = (1u32..(1 << sigma.len()))
        .filter(|&m| (0..sigma.len()).all(|i| m >> i & 1 == 0 || m >> image[i] & 1 == 1))
        .collect();
    let reports: Vec<OptimalPointReport> = masks
        .par_iter()
        .map(|&m| {
            let subset: Vec<AffineRoot> =
                (0..sigma.len()).filter(|i| m >> i & 1 == 1).map(|i| sigma[i].clone()).collect();
            optimal_point_tau(&subset, &alcove, tau)
        })
        .collect::<Result<_>>()?;
    let mut seen = BTreeSet::new();
    let mut pts: Vec<Vec<Rational>> = Vec::new();
    for r in &reports {
        if seen.insert(r.point.clone()) {
            pts.push(r.point.clone());
        }
    }
    pts.sort_by(|a, b| lp::lex_cmp(a, b));
    let points = pts.iter().map(|p| p.iter().map(crate::scalar::rational_string).collect()).collect();
    Ok(OptimalPoints { sigma, points, reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootdata::cartan;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn sigma_sizes() {
        let a1 = RootSystem::from_cartan(cartan::a1()).unwrap();
        let s = sigma(&a1);
        assert_eq!(s.len(), 2);
        assert!(s.contains(&AffineRoot { gradient: vec![1], constant: 0 }));
        assert!(s.contains(&AffineRoot { gradient: vec![-1], constant: 1 }));
        let a2 = RootSystem::from_cartan(cartan::a2()).unwrap();
        assert_eq!(sigma(&a2).len(), 6);
        let al = Alcove::fundamental(&a2);
        assert_eq!(sigma_set(&al, &a2.affine_roots(2)), sigma_set(&al, &a2.affine_roots(3)));
    }

    #[test]
    fn a1_points() {
        let a1 = RootSystem::from_cartan(cartan::a1()).unwrap();
        let al = Alcove::fundamental(&a1);
        let alpha = AffineRoot { gradient: vec![1], constant: 0 };
        let rep = optimal_point(std::slice::from_ref(&alpha), &al).unwrap();
        assert_eq!((rep.point.clone(), rep.optimum.clone()), (vec![r(1, 1)], r(1, 1)));
        let both = optimal_point(&sigma(&a1), &al).unwrap();
        assert_eq!((both.point, both.optimum), (vec![r(1, 2)], r(1, 2)));
        let all = optimal_points_all(&a1, None).unwrap();
        assert_eq!(all.points, vec![vec!["0"], vec!["1/2"], vec!["1"]]);
    }

    #[test]
    fn a2_against_grid() {
        let a2 = RootSystem::from_cartan(cartan::a2()).unwrap();
        let al = Alcove::fundamental(&a2);
        let all = optimal_points_all(&a2, None).unwrap();
        assert_eq!(all.reports.len(), 63);
        for rep in &all.reports {
            assert_eq!(rep.certificate.simplex_value, rep.certificate.vertex_value);
            assert_eq!(rep.optimum, rep.certificate.simplex_value);
            assert!(al.contains(&rep.point));
            for i in 0..=12 {
                for j in 0..=12 - i {
                    let y = vec![r(i, 12), r(j, 12)];
                    let m = rep.subset.iter().map(|psi| psi.eval(&y)).min().unwrap();
                    assert!(m <= rep.optimum);
                }
            }
        }
    }

    #[test]
    fn swap_symmetric_points() {
        let rs = RootSystem::from_cartan(cartan::a1xa1()).unwrap();
        let all = optimal_points_all(&rs, Some(&[1, 0])).unwrap();
        for rep in &all.reports {
            assert_eq!(rep.point[0], rep.point[1]);
        }
        assert!(optimal_points_all(&RootSystem::from_cartan(cartan::b2()).unwrap(), Some(&[1, 0])).is_err());
    }

    #[test]
    fn optimum_dominates_barycenter() {
        let rs = RootSystem::from_cartan(cartan::b2()).unwrap();
        let al = Alcove::fundamental(&rs);
        let bc = al.barycenter();
        for rep in optimal_points_all(&rs, None).unwrap().reports {
            let m = rep.subset.iter().map(|psi| psi.eval(&bc)).min().unwrap();
            assert!(rep.optimum >= m);
        }
    }
}
