//! Finite root systems from Cartan matrices, affine roots, and the
//! fundamental alcove with its face lattice.
//!
//! Points of the apartment are written in alcove coordinates: the values
//! `x_i = α_i(x)` of the simple roots. A root `β = Σ b_i α_i` then takes the
//! value `Σ b_i x_i`.

use std::collections::{BTreeSet, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, Lp, LpOutcome};
use crate::scalar::rational_serde;
use crate::Rational;

/// Upper bound on the number of roots produced by reflection closure.
pub const MAX_ROOTS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSystem {
    cartan: Vec<Vec<i64>>,
    /// All roots, in simple-root coordinates.
    roots: Vec<Vec<i64>>,
    /// One highest root per irreducible component.
    highest: Vec<Vec<i64>>,
}

fn det(m: &[Vec<Rational>]) -> Rational {
    let d = m.len();
    let mut a = m.to_vec();
    let mut acc = Rational::one();
    for c in 0..d {
        let Some(p) = (c..d).find(|&r| !a[r][c].is_zero()) else { return Rational::zero() };
        if p != c {
            a.swap(p, c);
            acc = -acc;
        }
        acc *= a[c][c].clone();
        let prow = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            if !row[c].is_zero() {
                let f = row[c].clone() / prow[c].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= f.clone() * y.clone();
                }
            }
        }
    }
    acc
}

impl RootSystem {
    pub fn from_cartan(cartan: Vec<Vec<i64>>) -> Result<Self> {
        let l = cartan.len();
        if l == 0 || cartan.iter().any(|r| r.len() != l) {
            return Err(Error::InvalidInput("cartan matrix must be square and nonempty".into()));
        }
        for i in 0..l {
            if cartan[i][i] != 2 {
                return Err(Error::InvalidInput("cartan diagonal must be 2".into()));
            }
            for j in 0..l {
                if i != j && (cartan[i][j] > 0 || (cartan[i][j] == 0) != (cartan[j][i] == 0)) {
                    return Err(Error::InvalidInput(format!("bad off-diagonal entry ({i},{j})")));
                }
            }
        }
        // finite type iff every principal minor is positive
        for mask in 1u32..(1 << l) {
            let idx: Vec<usize> = (0..l).filter(|i| mask >> i & 1 == 1).collect();
            let sub: Vec<Vec<Rational>> = idx
                .iter()
                .map(|&i| idx.iter().map(|&j| Rational::from_integer(cartan[i][j].into())).collect())
                .collect();
            if !det(&sub).is_positive() {
                return Err(Error::NotFiniteType(format!("principal minor on {idx:?} is not positive")));
            }
        }
        let roots = reflection_closure(&cartan)?;
        let highest = roots
            .iter()
            .filter(|b| b.iter().all(|&c| c >= 0))
            .filter(|b| {
                (0..l).all(|i| {
                    let mut c = (*b).clone();
                    c[i] += 1;
                    !roots.contains(&c)
                })
            })
            .cloned()
            .collect();
        Ok(Self { cartan, roots, highest })
    }

    pub fn rank(&self) -> usize {
        self.cartan.len()
    }

    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    pub fn roots(&self) -> &[Vec<i64>] {
        &self.roots
    }

    pub fn positive_roots(&self) -> Vec<Vec<i64>> {
        self.roots.iter().filter(|b| b.iter().all(|&c| c >= 0)).cloned().collect()
    }

    pub fn highest_roots(&self) -> &[Vec<i64>] {
        &self.highest
    }

    pub fn is_root(&self, b: &[i64]) -> bool {
        self.roots.iter().any(|r| r == b)
    }

    /// Checks that `tau` permutes the simple roots preserving the Cartan matrix.
    pub fn check_automorphism(&self, tau: &[usize]) -> Result<()> {
        let l = self.rank();
        let mut seen = vec![false; l];
        if tau.len() != l || tau.iter().any(|&t| t >= l || std::mem::replace(&mut seen[t], true)) {
            return Err(Error::InvalidInput(format!("{tau:?} is not a permutation of 0..{l}")));
        }
        for i in 0..l {
            for j in 0..l {
                if self.cartan[tau[i]][tau[j]] != self.cartan[i][j] {
                    return Err(Error::InvalidInput(format!("{tau:?} does not preserve the cartan matrix")));
                }
            }
        }
        Ok(())
    }

    /// All `β + n` with `β ∈ Φ` and `|n| ≤ level_bound`.
    pub fn affine_roots(&self, level_bound: i64) -> Vec<AffineRoot> {
        let mut out = Vec::new();
        for n in -level_bound..=level_bound {
            for b in &self.roots {
                out.push(AffineRoot { gradient: b.clone(), constant: n });
            }
        }
        out
    }
}

fn reflection_closure(cartan: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let l = cartan.len();
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut queue = VecDeque::new();
    for i in 0..l {
        let mut e = vec![0; l];
        e[i] = 1;
        seen.insert(e.clone());
        queue.push_back(e);
    }
    while let Some(b) = queue.pop_front() {
        for i in 0..l {
            // s_i(β) = β - <α_i^∨, β> α_i with <α_i^∨, α_j> = a_ij
            let pairing: i64 = (0..l).map(|j| cartan[i][j] * b[j]).sum();
            let mut c = b.clone();
            c[i] -= pairing;
            if seen.insert(c.clone()) {
                if seen.len() > MAX_ROOTS {
                    return Err(Error::NotFiniteType("reflection closure exceeded the root bound".into()));
                }
                queue.push_back(c);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// The affine function `x ↦ Σ g_i x_i + n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineRoot {
    pub gradient: Vec<i64>,
    pub constant: i64,
}

impl AffineRoot {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.gradient
            .iter()
            .zip(x)
            .fold(Rational::from_integer(self.constant.into()), |s, (g, xi)| {
                s + Rational::from_integer((*g).into()) * xi
            })
    }

    pub fn gradient_row(&self) -> Vec<Rational> {
        self.gradient.iter().map(|&g| Rational::from_integer(g.into())).collect()
    }

    /// Image under a permutation of the simple roots.
    pub fn permuted(&self, tau: &[usize]) -> Self {
        let mut g = vec![0; self.gradient.len()];
        for (i, &t) in tau.iter().enumerate() {
            g[t] = self.gradient[i];
        }
        Self { gradient: g, constant: self.constant }
    }
}

impl std::fmt::Display for AffineRoot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut terms = Vec::new();
        for (i, &g) in self.gradient.iter().enumerate() {
            match g {
                0 => {}
                1 => terms.push(format!("a{}", i + 1)),
                -1 => terms.push(format!("-a{}", i + 1)),
                g => terms.push(format!("{g}a{}", i + 1)),
            }
        }
        if self.constant != 0 || terms.is_empty() {
            terms.insert(0, self.constant.to_string());
        }
        write!(f, "{}", terms.join(" + ").replace("+ -", "- "))
    }
}

/// A face of the alcove closure: the points where exactly the walls in
/// `walls` vanish.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub walls: Vec<usize>,
    pub dim: usize,
    #[serde(with = "rational_serde::vec")]
    pub point: Vec<Rational>,
    #[serde(skip)]
    pub vertices: Vec<Vec<Rational>>,
}

/// The fundamental alcove `{α_i > 0, θ_c < 1}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Alcove {
    rank: usize,
    /// Affine roots `w` with `C̄ = {w ≥ 0 for all walls}`.
    walls: Vec<AffineRoot>,
    faces: Vec<Face>,
}

impl Alcove {
    pub fn fundamental(rs: &RootSystem) -> Self {
        let l = rs.rank();
        let mut walls = Vec::new();
        for i in 0..l {
            let mut g = vec![0; l];
            g[i] = 1;
            walls.push(AffineRoot { gradient: g, constant: 0 });
        }
        for h in rs.highest_roots() {
            walls.push(AffineRoot { gradient: h.iter().map(|c| -c).collect(), constant: 1 });
        }
        let mut alcove = Self { rank: l, walls, faces: vec![] };
        alcove.faces = alcove.compute_faces();
        alcove
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn walls(&self) -> &[AffineRoot] {
        &self.walls
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// `C̄` as `A x ≤ b`.
    pub fn inequalities(&self) -> (Vec<Vec<Rational>>, Vec<Rational>) {
        let a = self.walls.iter().map(|w| w.gradient_row().into_iter().map(|g| -g).collect()).collect();
        let b = self.walls.iter().map(|w| Rational::from_integer(w.constant.into())).collect();
        (a, b)
    }

    pub fn vertices(&self) -> Vec<Vec<Rational>> {
        let (a, b) = self.inequalities();
        lp::vertices(&a, &b, self.rank)
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.rank && self.walls.iter().all(|w| !w.eval(x).is_negative())
    }

    pub fn barycenter(&self) -> Vec<Rational> {
        barycenter(&self.vertices(), self.rank)
    }

    fn face_nonempty(&self, s: &[usize]) -> bool {
        // maximize t: w = 0 on S, w ≥ t off S, t ≤ 1; variables (x, t) ≥ 0
        let l = self.rank;
        let mut obj = vec![Rational::zero(); l + 1];
        obj[l] = Rational::one();
        let mut lp = Lp::new(obj);
        let mut tcap = vec![Rational::zero(); l + 1];
        tcap[l] = Rational::one();
        lp = lp.le(tcap, Rational::one());
        for (k, w) in self.walls.iter().enumerate() {
            let mut row = w.gradient_row();
            let c = Rational::from_integer(w.constant.into());
            if s.contains(&k) {
                row.push(Rational::zero());
                lp = lp.eq(row, -c);
            } else {
                row.push(-Rational::one());
                lp = lp.ge(row, -c);
            }
        }
        matches!(lp.maximize(), LpOutcome::Optimal { value, .. } if value.is_positive())
    }

    fn compute_faces(&self) -> Vec<Face> {
        let n = self.walls.len();
        let verts = self.vertices();
        let mut faces = Vec::new();
        for mask in 0u64..(1 << n) {
            let s: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
            if !self.face_nonempty(&s) {
                continue;
            }
            let rows: Vec<Vec<Rational>> = s.iter().map(|&k| self.walls[k].gradient_row()).collect();
            let dim = self.rank - lp::rank(&rows);
            let fv: Vec<Vec<Rational>> = verts
                .iter()
                .filter(|v| s.iter().all(|&k| self.walls[k].eval(v).is_zero()))
                .cloned()
                .collect();
            let point = barycenter(&fv, self.rank);
            faces.push(Face { walls: s, dim, point, vertices: fv });
        }
        faces.sort_by(|a, b| a.dim.cmp(&b.dim).then(a.walls.cmp(&b.walls)));
        faces
    }

    /// The face containing `x ∈ C̄`.
    pub fn face_of(&self, x: &[Rational]) -> Result<&Face> {
        if !self.contains(x) {
            return Err(Error::PointOutsideAlcove);
        }
        let s: Vec<usize> = (0..self.walls.len()).filter(|&k| self.walls[k].eval(x).is_zero()).collect();
        Ok(self.faces.iter().find(|f| f.walls == s).expect("faces partition the closure"))
    }

    /// `F ⊂ closure(G)`.
    pub fn incident(f: &Face, g: &Face) -> bool {
        g.walls.iter().all(|w| f.walls.contains(w))
    }

    /// Wall permutation induced by `tau`.
    pub fn wall_permutation(&self, tau: &[usize]) -> Vec<usize> {
        self.walls
            .iter()
            .map(|w| {
                let img = w.permuted(tau);
                self.walls.iter().position(|v| *v == img).expect("walls are permuted")
            })
            .collect()
    }

    pub fn permute_point(tau: &[usize], x: &[Rational]) -> Vec<Rational> {
        let mut y = x.to_vec();
        for (i, &t) in tau.iter().enumerate() {
            y[t] = x[i].clone();
        }
        y
    }

    /// Faces mapped to themselves by `tau`, and those fixed pointwise.
    pub fn fixed_faces(&self, tau: &[usize]) -> (Vec<&Face>, Vec<&Face>) {
        let perm = self.wall_permutation(tau);
        let setwise: Vec<&Face> = self
            .faces
            .iter()
            .filter(|f| {
                let img: BTreeSet<usize> = f.walls.iter().map(|&k| perm[k]).collect();
                img == f.walls.iter().copied().collect()
            })
            .collect();
        let pointwise =
            setwise.iter().copied().filter(|f| f.vertices.iter().all(|v| Self::permute_point(tau, v) == *v)).collect();
        (setwise, pointwise)
    }
}

fn barycenter(vs: &[Vec<Rational>], l: usize) -> Vec<Rational> {
    let mut p = vec![Rational::zero(); l];
    for v in vs {
        for (a, b) in p.iter_mut().zip(v) {
            *a += b.clone();
        }
    }
    let n = Rational::from_integer((vs.len().max(1) as i64).into());
    p.into_iter().map(|a| a / n.clone()).collect()
}

/// Cartan matrices of the types used in examples.
pub mod cartan {
    pub fn a1() -> Vec<Vec<i64>> {
        vec![vec![2]]
    }
    pub fn a2() -> Vec<Vec<i64>> {
        vec![vec![2, -1], vec![-1, 2]]
    }
    pub fn b2() -> Vec<Vec<i64>> {
        vec![vec![2, -2], vec![-1, 2]]
    }
    pub fn a1xa1() -> Vec<Vec<i64>> {
        vec![vec![2, 0], vec![0, 2]]
    }
    pub fn a3() -> Vec<Vec<i64>> {
        vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]
    }
    pub fn g2() -> Vec<Vec<i64>> {
        vec![vec![2, -1], vec![-3, 2]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn root_counts() {
        for (c, n) in [
            (cartan::a1(), 2),
            (cartan::a2(), 6),
            (cartan::b2(), 8),
            (cartan::a1xa1(), 4),
            (cartan::a3(), 12),
            (cartan::g2(), 12),
        ] {
            let rs = RootSystem::from_cartan(c).unwrap();
            assert_eq!(rs.roots().len(), n);
            for b in rs.roots() {
                assert!(rs.is_root(&b.iter().map(|x| -x).collect::<Vec<_>>()));
            }
        }
    }

    #[test]
    fn highest_roots() {
        let rs = RootSystem::from_cartan(cartan::a2()).unwrap();
        assert_eq!(rs.highest_roots(), &[vec![1, 1]]);
        let rs = RootSystem::from_cartan(cartan::b2()).unwrap();
        assert_eq!(rs.highest_roots().len(), 1);
        let rs = RootSystem::from_cartan(cartan::a1xa1()).unwrap();
        assert_eq!(rs.highest_roots().len(), 2);
    }

    #[test]
    fn rejects_affine_type() {
        let e = RootSystem::from_cartan(vec![vec![2, -2], vec![-2, 2]]).unwrap_err();
        assert!(matches!(e, Error::NotFiniteType(_)));
        assert!(RootSystem::from_cartan(vec![vec![2, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn affine_root_counts() {
        let a1 = RootSystem::from_cartan(cartan::a1()).unwrap();
        assert_eq!(a1.affine_roots(1).len(), 6);
        assert_eq!(a1.affine_roots(2).len(), 10);
        let a2 = RootSystem::from_cartan(cartan::a2()).unwrap();
        assert_eq!(a2.affine_roots(0).len(), 6);
    }

    #[test]
    fn alcove_faces() {
        let a1 = Alcove::fundamental(&RootSystem::from_cartan(cartan::a1()).unwrap());
        let dims: Vec<usize> = a1.faces().iter().map(|f| f.dim).collect();
        assert_eq!(dims, vec![0, 0, 1]);
        assert_eq!(a1.vertices(), vec![vec![r(0, 1)], vec![r(1, 1)]]);
        let a2 = Alcove::fundamental(&RootSystem::from_cartan(cartan::a2()).unwrap());
        let count = |d| a2.faces().iter().filter(|f| f.dim == d).count();
        assert_eq!((count(0), count(1), count(2)), (3, 3, 1));
        let b2 = Alcove::fundamental(&RootSystem::from_cartan(cartan::b2()).unwrap());
        assert_eq!(b2.faces().len(), 7);
        let aa = Alcove::fundamental(&RootSystem::from_cartan(cartan::a1xa1()).unwrap());
        // a square: 4 vertices, 4 edges, 1 interior
        assert_eq!(aa.faces().len(), 9);
    }

    #[test]
    fn faces_partition_grid() {
        for c in [cartan::a2(), cartan::b2(), cartan::a1xa1()] {
            let al = Alcove::fundamental(&RootSystem::from_cartan(c).unwrap());
            for d in [1, 2, 3, 4, 6, 12, 24] {
                for i in 0..=d {
                    for j in 0..=d {
                        let x = vec![r(i, d), r(j, d)];
                        let hits = al.faces().iter().filter(|f| {
                            al.walls().iter().enumerate().all(|(k, w)| {
                                let v = w.eval(&x);
                                if f.walls.contains(&k) {
                                    v.is_zero()
                                } else {
                                    v.is_positive()
                                }
                            })
                        });
                        let n = hits.count();
                        assert_eq!(n, al.contains(&x) as usize);
                    }
                }
            }
            for f in al.faces() {
                assert_eq!(al.face_of(&f.point).unwrap(), f);
            }
        }
    }

    #[test]
    fn incidence_of_a2() {
        let a2 = Alcove::fundamental(&RootSystem::from_cartan(cartan::a2()).unwrap());
        let interior = a2.faces().iter().find(|f| f.dim == 2).unwrap();
        for f in a2.faces() {
            assert!(Alcove::incident(f, interior));
        }
        let v = a2.faces().iter().filter(|f| f.dim == 0).count();
        let edges: Vec<&Face> = a2.faces().iter().filter(|f| f.dim == 1).collect();
        for e in edges {
            let ends = a2.faces().iter().filter(|f| f.dim == 0 && Alcove::incident(f, e)).count();
            assert_eq!(ends, 2);
        }
        assert_eq!(v, 3);
    }

    #[test]
    fn tau_fixed_faces() {
        let a2 = Alcove::fundamental(&RootSystem::from_cartan(cartan::a2()).unwrap());
        let (set, point) = a2.fixed_faces(&[1, 0]);
        // the vertex 0, the edge θ = 1, the interior are setwise fixed
        assert_eq!(set.len(), 3);
        assert_eq!(point.len(), 1);
        let a1 = Alcove::fundamental(&RootSystem::from_cartan(cartan::a1()).unwrap());
        let (set, point) = a1.fixed_faces(&[0]);
        assert_eq!((set.len(), point.len()), (3, 3));
    }

    #[test]
    fn outside_point() {
        let a1 = Alcove::fundamental(&RootSystem::from_cartan(cartan::a1()).unwrap());
        assert_eq!(a1.face_of(&[r(3, 2)]).unwrap_err(), Error::PointOutsideAlcove);
    }
}
