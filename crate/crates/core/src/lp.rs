//! Exact linear programming: a two-phase tableau simplex with Bland's rule,
//! and brute-force vertex enumeration of small polytopes. Both work over any
//! [`Scalar`]; with exact rationals the results are exact.

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

/// `maximize c·x  subject to  A x ≤ b,  A' x = b',  x ≥ 0`.
#[derive(Clone, Debug)]
pub struct Lp<T> {
    n: usize,
    objective: Vec<T>,
    le: Vec<(Vec<T>, T)>,
    eq: Vec<(Vec<T>, T)>,
}

impl<T: Scalar> Lp<T> {
    pub fn new(objective: Vec<T>) -> Self {
        Self { n: objective.len(), objective, le: vec![], eq: vec![] }
    }

    pub fn le(mut self, row: Vec<T>, rhs: T) -> Self {
        assert_eq!(row.len(), self.n);
        self.le.push((row, rhs));
        self
    }

    pub fn ge(self, row: Vec<T>, rhs: T) -> Self {
        self.le(row.into_iter().map(|x| -x).collect(), -rhs)
    }

    pub fn eq(mut self, row: Vec<T>, rhs: T) -> Self {
        assert_eq!(row.len(), self.n);
        self.eq.push((row, rhs));
        self
    }

    pub fn maximize(&self) -> LpOutcome<T> {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau<T> {
    rows: Vec<Vec<T>>, // last entry is the right-hand side
    basis: Vec<usize>,
    n: usize,
    n_total: usize,
    artificial_from: usize,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &Lp<T>) -> Self {
        let n = lp.n;
        let n_slack = lp.le.len();
        let m = lp.le.len() + lp.eq.len();
        let artificial_from = n + n_slack;
        let n_total = artificial_from + m;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let all = lp.le.iter().map(|r| (r, true)).chain(lp.eq.iter().map(|r| (r, false)));
        for (i, ((a, b), is_le)) in all.enumerate() {
            let mut row = vec![T::zero(); n_total + 1];
            let flip = b.is_negative();
            for (j, v) in a.iter().enumerate() {
                row[j] = if flip { -v.clone() } else { v.clone() };
            }
            if is_le {
                row[n + i] = if flip { -T::one() } else { T::one() };
            }
            row[n_total] = if flip { -b.clone() } else { b.clone() };
            if is_le && !flip {
                basis.push(n + i);
            } else {
                row[artificial_from + i] = T::one();
                basis.push(artificial_from + i);
            }
            rows.push(row);
        }
        Self { rows, basis, n, n_total, artificial_from }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let pv = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / pv.clone();
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pvv) in row.iter_mut().zip(&prow) {
                if !pvv.is_zero() {
                    *v = v.clone() - f.clone() * pvv.clone();
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex on the cost vector `cost` (length `n_total`), columns
    /// `>= allowed` never entering. Returns false if unbounded.
    fn run(&mut self, cost: &[T], allowed: usize) -> bool {
        loop {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut z = -cost[j].clone();
                for (i, row) in self.rows.iter().enumerate() {
                    if !row[j].is_zero() {
                        z = z + cost[self.basis[i]].clone() * row[j].clone();
                    }
                }
                if z.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = row[self.n_total].clone() / row[c].clone();
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn solve(mut self, objective: &[T]) -> LpOutcome<T> {
        let mut phase1 = vec![T::zero(); self.n_total];
        for c in phase1.iter_mut().skip(self.artificial_from) {
            *c = -T::one();
        }
        self.run(&phase1, self.n_total);
        let infeasible = self
            .rows
            .iter()
            .zip(&self.basis)
            .any(|(row, &b)| b >= self.artificial_from && !row[self.n_total].is_zero());
        if infeasible {
            return LpOutcome::Infeasible;
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.artificial_from {
                match (0..self.artificial_from).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        let mut cost = vec![T::zero(); self.n_total];
        cost[..self.n].clone_from_slice(objective);
        if !self.run(&cost, self.artificial_from) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![T::zero(); self.n];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n {
                x[b] = row[self.n_total].clone();
            }
        }
        let value = x.iter().zip(objective).fold(T::zero(), |acc, (a, c)| acc + a.clone() * c.clone());
        LpOutcome::Optimal { x, value }
    }
}

/// Solves the square system `M y = v`; `None` if singular.
pub fn solve_square<T: Scalar>(m: &[Vec<T>], v: &[T]) -> Option<Vec<T>> {
    let d = v.len();
    let mut a: Vec<Vec<T>> = m
        .iter()
        .zip(v)
        .map(|(r, x)| r.iter().cloned().chain(std::iter::once(x.clone())).collect())
        .collect();
    for col in 0..d {
        let piv = (col..d).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let pv = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x = x.clone() / pv.clone();
        }
        let prow = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x = x.clone() - f.clone() * p.clone();
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[d].clone()).collect())
}

/// Rank of a matrix by exact elimination.
pub fn rank<T: Scalar>(m: &[Vec<T>]) -> usize {
    let mut a = m.to_vec();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(rank, piv);
        let prow = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            if !row[col].is_zero() {
                let f = row[col].clone() / prow[col].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x = x.clone() - f.clone() * p.clone();
                }
            }
        }
        rank += 1;
    }
    rank
}

fn combinations(m: usize, d: usize, f: &mut impl FnMut(&[usize])) {
    fn go(start: usize, m: usize, d: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == d {
            f(cur);
            return;
        }
        for i in start..m {
            if m - i < d - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, m, d, cur, f);
            cur.pop();
        }
    }
    go(0, m, d, &mut Vec::with_capacity(d), f);
}

/// All vertices of `{x ∈ R^d : A x ≤ b}`, sorted lexicographically and
/// de-duplicated. Exponential in the number of rows; meant for small
/// polytopes only.
pub fn vertices<T: Scalar>(a: &[Vec<T>], b: &[T], d: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::new();
    combinations(a.len(), d, &mut |idx| {
        let m: Vec<Vec<T>> = idx.iter().map(|&i| a[i].clone()).collect();
        let v: Vec<T> = idx.iter().map(|&i| b[i].clone()).collect();
        if let Some(x) = solve_square(&m, &v) {
            let feasible = a.iter().zip(b).all(|(row, bi)| {
                row.iter().zip(&x).fold(T::zero(), |s, (r, xi)| s + r.clone() * xi.clone()) <= *bi
            });
            if feasible && !out.contains(&x) {
                out.push(x);
            }
        }
    });
    out.sort_by(|x, y| lex_cmp(x, y));
    out
}

pub fn lex_cmp<T: Scalar>(x: &[T], y: &[T]) -> std::cmp::Ordering {
    for (a, b) in x.iter().zip(y) {
        match a.partial_cmp(b) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let lp = Lp::new(vec![r(3), r(5)])
            .le(vec![r(1), r(0)], r(4))
            .le(vec![r(0), r(2)], r(12))
            .le(vec![r(3), r(2)], r(18));
        assert_eq!(lp.maximize(), LpOutcome::Optimal { x: vec![r(2), r(6)], value: r(36) });
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = Lp::new(vec![r(1)]).le(vec![r(1)], r(1)).ge(vec![r(1)], r(2));
        assert_eq!(lp.maximize(), LpOutcome::Infeasible);
        let lp = Lp::new(vec![r(1), r(0)]).le(vec![r(0), r(1)], r(1));
        assert_eq!(lp.maximize(), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_and_negative_rhs() {
        // max -x - y, x + y = 3, x - y ≤ -1 → value -3
        let lp = Lp::new(vec![r(-1), r(-1)]).eq(vec![r(1), r(1)], r(3)).le(vec![r(1), r(-1)], r(-1));
        match lp.maximize() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, r(-3));
                assert!(x[0].clone() - x[1].clone() <= r(-1));
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn simplex_matches_vertex_enumeration() {
        // random small polytopes inside the unit box
        let rows = vec![
            (vec![r(1), r(2)], r(3)),
            (vec![r(3), r(-1)], r(2)),
            (vec![r(-1), r(1)], r(1)),
            (vec![r(1), r(0)], r(1)),
            (vec![r(0), r(1)], r(1)),
            (vec![r(-1), r(0)], r(0)),
            (vec![r(0), r(-1)], r(0)),
        ];
        for c in [[1, 1], [2, -1], [-1, 3], [0, 1]] {
            let mut lp = Lp::new(vec![r(c[0]), r(c[1])]);
            for (a, b) in &rows {
                lp = lp.le(a.clone(), b.clone());
            }
            let LpOutcome::Optimal { value, .. } = lp.maximize() else { panic!() };
            let a: Vec<_> = rows.iter().map(|x| x.0.clone()).collect();
            let b: Vec<_> = rows.iter().map(|x| x.1.clone()).collect();
            let best = vertices(&a, &b, 2)
                .iter()
                .map(|v| r(c[0]) * v[0].clone() + r(c[1]) * v[1].clone())
                .max()
                .unwrap();
            assert_eq!(value, best);
        }
    }
}
