//! Orbital integrals of regular semisimple orbits by Leray cells.
//!
//! The orbit of `X` is the level set `Q = q₀` of `Q(Z) = a² + bc`. A cell
//! `z + 𝔭^M Ω³` whose coordinates have least valuation `g < M` is mapped by
//! `Q` onto `Q(z) + 𝔭^{M+g}` with uniform fibres, so the level set carries
//! `vol(cell) / vol(Q(cell)) = q^{g-2M}` of the measure `|dZ / dQ|` there.
//! On the chart `b ≠ 0` this is `|db da| / |b|`, while the symplectic form
//! has density `4q₀/b`; the orbital measure is therefore `|4q₀|` times the
//! Leray measure.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{require_regular, LieElement, TestFunction};
use crate::localfield::{FieldSpec, TruncRing, TruncatedElement};
use crate::{Cyc, Error, Rational, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    /// `z = ϖ^{-N} u`.
    pub u: [u64; 3],
    /// Least valuation of the coordinates of `z`.
    pub g: i64,
}

/// The cells of `𝔭^{-N} Ω³ / 𝔭^M Ω³` meeting the level set `Q = q₀`.
pub struct LerayCells {
    field: FieldSpec,
    q0_ord: i64,
    window: i64,
    depth: u32,
    ring: TruncRing,
    ring2: TruncRing,
    /// `ϖ^{2N} q₀` modulo `𝔭^{2(N+M)}`, or `None` when the window misses the orbit.
    q0s: Option<u64>,
    /// Inverse modulo `𝔭^{2(N+M)}` of the unit part of each residue.
    inv: Vec<u64>,
}

impl LerayCells {
    /// Least depth at which every point of the level set lies in a cell
    /// with `g < M`.
    pub fn min_depth(q0: &TruncatedElement) -> Result<u32> {
        let v = q0.valuation().ok_or(Error::NotRegular)?;
        Ok((v.div_euclid(2) + 1).max(1) as u32)
    }

    pub fn new(q0: &TruncatedElement, window: i64, depth: u32) -> Result<Self> {
        let field = q0.field();
        let need = Self::min_depth(q0)?;
        if depth < need {
            return Err(Error::DepthTooSmall { depth, required: need });
        }
        let k = window + depth as i64;
        if k < 1 {
            return Err(Error::InvalidInput(format!("window {window} is empty at depth {depth}")));
        }
        let k = k as u32;
        let ring = TruncRing::new(field, k)?;
        let ring2 = TruncRing::new(field, 2 * k)?;
        let q0_ord = q0.valuation().unwrap();
        let q0s = if q0_ord + 2 * window >= 0 { Some(q0.to_scaled(-2 * window, 2 * k)?) } else { None };
        let inv = (0..ring.size())
            .map(|u| {
                if u == 0 {
                    return 0;
                }
                let e = ring.ord(u);
                ring2.inv_unit(u / ring.pow_p(e)).unwrap()
            })
            .collect();
        Ok(Self { field, q0_ord, window, depth, ring, ring2, q0s, inv })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// `Ω / 𝔭^{N+M}`, in which the scaled coordinates `u` live.
    pub fn ring(&self) -> &TruncRing {
        &self.ring
    }

    /// Orbital measure of the part of the orbit in a cell of shell `g`:
    /// `|4q₀| q^{g-2M}`.
    pub fn weight(&self, g: i64) -> Rational {
        let e = g - 2 * self.depth as i64 - self.q0_ord;
        let q = Rational::from_integer(self.field.q().into());
        if e >= 0 {
            num_traits::pow(q, e as usize)
        } else {
            num_traits::pow(q.recip(), (-e) as usize)
        }
    }

    /// The exact representative `ϖ^{-N} u` of a cell.
    pub fn point(&self, c: &Cell) -> LieElement {
        LieElement::from_scaled(self.field, c.u, -self.window)
    }

    /// Cells with first scaled coordinate `ua`.
    pub fn cells_with_a(&self, ua: u64) -> Vec<Cell> {
        let mut out = Vec::new();
        let Some(q0s) = self.q0s else { return out };
        let (ring, ring2) = (&self.ring, &self.ring2);
        let k = ring.k();
        let ea = ring.ord(ua);
        let r = ring2.sub(q0s, ring2.mul(ua, ua));
        for ub in 0..ring.size() {
            let eb = ring.ord(ub);
            let mab = ea.min(eb);
            for ge in 0..=mab.min(k - 1) {
                // Q(z) ≡ q₀ (mod 𝔭^{M+g}) reads ub·uc ≡ r (mod 𝔭^{k+ge})
                let kk = k + ge;
                let rk = ring2.reduce(r, kk);
                let (y0, step) = if ub == 0 {
                    if rk != 0 {
                        continue;
                    }
                    (0, 0)
                } else {
                    if rk % ring2.pow_p(eb) != 0 {
                        continue;
                    }
                    let y = ring2.mul(ring2.shift_down(rk, eb), self.inv[ub as usize]);
                    (ring2.reduce(y, kk - eb), kk - eb)
                };
                for j in 0..ring.pow_p(k - step) {
                    let uc = y0 + j * ring.pow_p(step);
                    let ec = ring.ord(uc);
                    let ok = if ge < mab { ec == ge } else { ec >= mab };
                    if ok {
                        out.push(Cell { u: [ua, ub, uc], g: ge as i64 - self.window });
                    }
                }
            }
        }
        out
    }

    pub fn par_cells(&self) -> impl ParallelIterator<Item = Cell> + '_ {
        (0..self.ring.size()).into_par_iter().flat_map_iter(move |ua| self.cells_with_a(ua))
    }

    pub fn collect(&self) -> Vec<Cell> {
        let mut v: Vec<Cell> = self.par_cells().collect();
        v.sort_unstable_by_key(|c| c.u);
        v
    }

    /// Shells `g` that can occur, outermost first.
    pub fn shells(&self) -> std::ops::Range<i64> {
        -self.window..self.depth as i64
    }

    /// `Σ_cells f(z) · weight`, evaluating `f` at cell representatives.
    pub fn integrate(&self, f: &dyn TestFunction) -> Result<Cyc> {
        let p = self.field.p();
        let shells = self.shells();
        let len = (shells.end - shells.start) as usize;
        let sums = self
            .par_cells()
            .try_fold(
                || vec![Cyc::zero(p); len],
                |mut acc, c| -> Result<Vec<Cyc>> {
                    let v = f.eval(&self.point(&c))?;
                    let i = (c.g - shells.start) as usize;
                    acc[i] = acc[i].add(&v);
                    Ok(acc)
                },
            )
            .try_reduce(
                || vec![Cyc::zero(p); len],
                |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x.add(y)).collect()),
            )?;
        Ok(shells.zip(&sums).fold(Cyc::zero(p), |acc, (g, s)| acc.add(&s.scale(&self.weight(g)))))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitalValue {
    pub value: Cyc,
    pub window: i64,
    pub depth: u32,
    /// Windows `N` and `N + 1` give the same value.
    pub stabilized: bool,
}

/// `Φ_X(f)` over the part of the orbit with coordinates in `𝔭^{-N}`.
///
/// The depth defaults to the least one at which `f` is constant on cells
/// and every orbit point is resolved.
pub fn orbital_integral(x: &LieElement, f: &dyn TestFunction, window: i64, depth: Option<u32>) -> Result<OrbitalValue> {
    require_regular(x)?;
    x.field().check_same(&f.field())?;
    let q0 = x.q()?;
    let need = LerayCells::min_depth(&q0)?.max(f.resolution().max(1) as u32);
    let depth = depth.unwrap_or(need);
    if depth < need {
        return Err(Error::DepthTooSmall { depth, required: need });
    }
    let value = LerayCells::new(&q0, window, depth)?.integrate(f)?;
    let next = LerayCells::new(&q0, window + 1, depth)?.integrate(f)?;
    Ok(OrbitalValue { stabilized: next == value, value, window, depth })
}
