//! `μ̂_X(Y)` by two independent routes, and the niceness scan.
//!
//! Direct: `Φ_X(Λ(⟨·, Y⟩))` summed over the Leray cells of a window.
//! Huntsinger: `Φ_X(η̃_{Y,l})`, where `η̃_Y(Z)` averages `Λ(⟨Y', Z⟩)` over the
//! `SL₂(Ω)`-orbit of `Y` and is evaluated once per `SL₂(Ω)`-orbit of cells.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cells::{Cell, LerayCells};
use super::{ad_scaled, generators, lie_depth, orbit_scaled, pairing, require_regular, LieElement};
use crate::cyclotomic::RootAccumulator;
use crate::localfield::{lambda_scaled, TruncRing, TruncatedElement};
use crate::moyprasad::Depth;
use crate::scalar::rational_serde;
use crate::{Cyc, Error, Rational, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Direct,
    Huntsinger,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuHatParams {
    /// First window tried.
    #[serde(default)]
    pub start: i64,
    /// Largest window tried; the value at `window + 1` is computed too.
    #[serde(default = "default_window")]
    pub window: i64,
    /// Cell depth `M`; defaults to the least admissible one.
    #[serde(default)]
    pub depth: Option<u32>,
}

fn default_window() -> i64 {
    3
}

impl Default for MuHatParams {
    fn default() -> Self {
        Self { start: 0, window: default_window(), depth: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HuntsingerCertificate {
    /// The integer `l ≤ depth(X)`.
    pub l: i64,
    /// Size of the orbit of `Y` modulo `𝔭^{N+1}` (scaled).
    pub kernel_orbit: u64,
    /// Number of `SL₂(Ω)`-orbits of cells.
    pub cell_orbits: u64,
    /// Shells on which `η̃_{Y,l}` was checked to vanish at every cell.
    pub vanishing_shells: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuHatReport {
    pub x: LieElement,
    pub y: LieElement,
    pub value: Cyc,
    pub route: Route,
    pub window: i64,
    pub depth: u32,
    /// Windows `N` and `N + 1` give the same value.
    pub stabilized: bool,
    pub cells: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub huntsinger: Option<HuntsingerCertificate>,
}

/// `μ̂_0 ≡ 1`: the orbit of `0` is a point.
pub fn mu_hat_zero(y: &LieElement) -> Cyc {
    Cyc::one(y.field().p())
}

fn direct_sum(cells: &LerayCells, y: &LieElement) -> Result<(Cyc, u64)> {
    let field = cells.field();
    let ring = cells.ring();
    let sy = y.min_ord().ok_or(Error::NotRegular)?;
    let ys = y.scaled(sy, ring.k())?;
    let s = sy - cells.window();
    let level = if field.is_positive() { 1 } else { (1 - s).max(0) as u32 };
    let shells = cells.shells();
    let len = (shells.end - shells.start) as usize;
    let new = || (vec![RootAccumulator::new(field.p(), level); len], 0u64);
    let (accs, n) = (0..ring.size())
        .into_par_iter()
        .fold(new, |(mut accs, mut n), ua| {
            for c in cells.cells_with_a(ua) {
                let ip = pairing(ring, c.u, ys);
                accs[(c.g - shells.start) as usize].push(lambda_scaled(ring, field, ip, s), 1);
                n += 1;
            }
            (accs, n)
        })
        .reduce(new, |(mut a, n), (b, m)| {
            for (x, y) in a.iter_mut().zip(&b) {
                x.merge(y);
            }
            (a, n + m)
        });
    let value = shells.zip(&accs).fold(Cyc::zero(field.p()), |v, (g, acc)| v.add(&acc.finish(&cells.weight(g))));
    Ok((value, n))
}

struct Kernel {
    value: Cyc,
    cells: u64,
    cert: HuntsingerCertificate,
    /// Shells among the outer two on which the kernel failed to vanish.
    support_failed: bool,
}

fn huntsinger_sum(cells: &LerayCells, y: &LieElement, l: i64) -> Result<Kernel> {
    let field = cells.field();
    let ring = cells.ring();
    let n = cells.window();
    let sy = y.min_ord().ok_or(Error::NotRegular)?;

    // SL₂(Ω)-orbits of cells; the cell set is stable since Q and g are invariant
    let all = cells.collect();
    let index: HashMap<[u64; 3], usize> = all.iter().enumerate().map(|(i, c)| (c.u, i)).collect();
    let gens = generators(ring, field);
    let mut orbit_of = vec![usize::MAX; all.len()];
    let mut reps: Vec<(Cell, u64)> = Vec::new();
    for i in 0..all.len() {
        if orbit_of[i] != usize::MAX {
            continue;
        }
        let id = reps.len();
        orbit_of[i] = id;
        let mut stack = vec![i];
        let mut size = 0u64;
        while let Some(j) = stack.pop() {
            size += 1;
            for g in &gens {
                let v = ad_scaled(ring, *g, all[j].u);
                let t = *index.get(&v).expect("cell set is invariant");
                if orbit_of[t] == usize::MAX {
                    orbit_of[t] = id;
                    stack.push(t);
                }
            }
        }
        reps.push((all[i], size));
    }

    // η̃_Y on ϖ^{-N}u only sees u modulo 𝔭^L
    let l_prec = n + 1 - sy;
    let s = sy - n;
    let (kernel, kernel_orbit): (Vec<Cyc>, u64) = if l_prec <= 0 {
        (vec![Cyc::one(field.p()); reps.len()], 1)
    } else {
        let lring = TruncRing::new(field, l_prec as u32)?;
        let yorb = orbit_scaled(&lring, field, y.scaled(sy, l_prec as u32)?);
        let level = if field.is_positive() { 1 } else { l_prec as u32 };
        let scale = Rational::new(1.into(), (yorb.len() as u64).into());
        let k = reps
            .par_iter()
            .map(|(c, _)| {
                let u = c.u.map(|x| lring.reduce(x, l_prec as u32));
                let mut acc = RootAccumulator::new(field.p(), level);
                for yv in &yorb {
                    acc.push(lambda_scaled(&lring, field, pairing(&lring, *yv, u), s), 1);
                }
                acc.finish(&scale)
            })
            .collect();
        (k, yorb.len() as u64)
    };

    // 𝟙_{𝔤_l} is 1 on the whole level set: depth is read off the
    // characteristic polynomial of ad, which is constant there
    let outer = [-n, -n + 1];
    let mut support_failed = false;
    let mut value = Cyc::zero(field.p());
    for ((c, size), k) in reps.iter().zip(&kernel) {
        if outer.contains(&c.g) && !k.is_zero() {
            support_failed = true;
        }
        let w = cells.weight(c.g) * Rational::from_integer((*size).into());
        value = value.add(&k.scale(&w));
    }
    Ok(Kernel {
        value,
        cells: all.len() as u64,
        cert: HuntsingerCertificate {
            l,
            kernel_orbit,
            cell_orbits: reps.len() as u64,
            vanishing_shells: if support_failed { vec![] } else { outer.to_vec() },
        },
        support_failed,
    })
}

/// `μ̂_X(Y)` by the requested route. Windows `start ..= window` are tried
/// in turn; the first `N` whose value agrees with `N + 1` (and, for the
/// Huntsinger route, whose kernel vanishes on the two outer shells) is
/// reported.
pub fn mu_hat(x: &LieElement, y: &LieElement, route: Route, params: &MuHatParams) -> Result<MuHatReport> {
    x.field().check_same(&y.field())?;
    require_regular(x)?;
    require_regular(y)?;
    let q0 = x.q()?;
    let sy = y.min_ord().unwrap();
    let need = LerayCells::min_depth(&q0)?.max((1 - sy).max(1) as u32);
    let depth = params.depth.unwrap_or(need);
    if depth < need {
        return Err(Error::DepthTooSmall { depth, required: need });
    }
    let l = match lie_depth(x)? {
        Depth::Exact(d) => d.floor().to_integer().to_i64().unwrap(),
        Depth::AtLeast(_) => return Err(Error::NotRegular),
    };
    let start = params.start.max(1 - depth as i64);
    let eval = |n: i64| -> Result<Kernel> {
        let cells = LerayCells::new(&q0, n, depth)?;
        match route {
            Route::Direct => {
                let (value, count) = direct_sum(&cells, y)?;
                Ok(Kernel {
                    value,
                    cells: count,
                    cert: HuntsingerCertificate { l, kernel_orbit: 0, cell_orbits: 0, vanishing_shells: vec![] },
                    support_failed: false,
                })
            }
            Route::Huntsinger => huntsinger_sum(&cells, y, l),
        }
    };
    let mut support_failure = false;
    let mut cur = eval(start)?;
    for n in start..=params.window {
        let next = eval(n + 1)?;
        if cur.support_failed {
            support_failure = true;
        } else if cur.value == next.value {
            return Ok(MuHatReport {
                x: x.clone(),
                y: y.clone(),
                value: cur.value,
                route,
                window: n,
                depth,
                stabilized: true,
                cells: cur.cells,
                huntsinger: (route == Route::Huntsinger).then_some(cur.cert),
            });
        }
        cur = next;
    }
    if support_failure && route == Route::Huntsinger {
        Err(Error::SupportNotCertified(params.window))
    } else {
        Err(Error::NotStabilized(params.window))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NicenessSpec {
    /// Valuation shells `v`: samples are `ϖ^v Y₀` with `Y₀` primitive.
    pub shells: Vec<i64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: MuHatParams,
}

fn default_samples() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NicenessRow {
    pub shell: i64,
    pub y: LieElement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Cyc>,
    /// `|μ̂|² = μ̂ · conj(μ̂)`, exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_sq: Option<Cyc>,
    /// `|D(Y)|`.
    #[serde(with = "rational_serde")]
    pub disc_abs: Rational,
    /// `|D(Y)|^{1/2} |μ̂|`, rounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nice: Option<f64>,
    /// `|D(Y)|^{1/2} |μ̂|²`, rounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nice_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NicenessReport {
    pub x: LieElement,
    pub rows: Vec<NicenessRow>,
    /// Per shell, in the order given: `q^{-3v} · mean |μ̂|` over the samples.
    pub l1_increments: Vec<f64>,
    pub l1_partial_sums: Vec<f64>,
}

/// Random primitive integral `Y₀` with `a² + bc ≠ 0`, two digits per coordinate.
fn sample_primitive(rng: &mut ChaCha8Rng, x: &LieElement) -> LieElement {
    let field = x.field();
    let p = field.p();
    loop {
        let mut coords = Vec::new();
        for _ in 0..3 {
            let ds = [rng.gen_range(0..p), rng.gen_range(0..p)];
            coords.push(TruncatedElement::exact_from_digits(field, 0, &ds).unwrap());
        }
        let y = LieElement { a: coords[0].clone(), b: coords[1].clone(), c: coords[2].clone() };
        if y.min_ord() == Some(0) && y.q().is_ok_and(|q| !q.is_zero()) {
            return y;
        }
    }
}

/// Scan of `|D(Y)|^{1/2} |μ̂_X(Y)|` over valuation shells of `Y`, by the
/// direct route. Failing cells are recorded and the scan continues.
pub fn niceness_scan(x: &LieElement, spec: &NicenessSpec) -> Result<NicenessReport> {
    require_regular(x)?;
    let field = x.field();
    let q = field.q() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut jobs = Vec::new();
    for &v in &spec.shells {
        for _ in 0..spec.samples {
            jobs.push((v, sample_primitive(&mut rng, x).shift(v)));
        }
    }
    let rows: Vec<NicenessRow> = jobs
        .par_iter()
        .map(|(v, y)| {
            let d = y.q().unwrap().valuation().unwrap();
            let disc_abs = pow_q(field.q(), -d);
            let mut row = NicenessRow {
                shell: *v,
                y: y.clone(),
                value: None,
                abs_sq: None,
                disc_abs: disc_abs.clone(),
                nice: None,
                nice_sq: None,
                error: None,
            };
            match mu_hat(x, y, Route::Direct, &spec.params) {
                Ok(r) => {
                    let sq = r.value.abs_sq();
                    let m2 = sq.to_complex().0;
                    let dh = q.powf(-d as f64 / 2.0);
                    row.nice = Some(dh * m2.max(0.0).sqrt());
                    row.nice_sq = Some(dh * m2);
                    row.value = Some(r.value);
                    row.abs_sq = Some(sq);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();
    let mut l1_increments = Vec::new();
    let mut l1_partial_sums = Vec::new();
    let mut total = 0.0;
    for &v in &spec.shells {
        let mods: Vec<f64> = rows
            .iter()
            .filter(|r| r.shell == v)
            .filter_map(|r| r.abs_sq.as_ref().map(|s| s.to_complex().0.max(0.0).sqrt()))
            .collect();
        let mean = if mods.is_empty() { f64::NAN } else { mods.iter().sum::<f64>() / mods.len() as f64 };
        let inc = q.powf(-3.0 * v as f64) * mean;
        total += inc;
        l1_increments.push(inc);
        l1_partial_sums.push(total);
    }
    Ok(NicenessReport { x: x.clone(), rows, l1_increments, l1_partial_sums })
}

fn pow_q(q: u64, e: i64) -> Rational {
    let q = Rational::from_integer(q.into());
    if e >= 0 {
        num_traits::pow(q, e as usize)
    } else {
        num_traits::pow(q.recip(), (-e) as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstancySpec {
    /// Largest `m` tried.
    #[serde(default = "default_max_m")]
    pub max_m: i64,
    #[serde(default = "default_perturbations")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: MuHatParams,
}

fn default_max_m() -> i64 {
    4
}

fn default_perturbations() -> usize {
    20
}

impl Default for ConstancySpec {
    fn default() -> Self {
        Self { max_m: default_max_m(), samples: default_perturbations(), seed: 0, params: MuHatParams::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbation {
    pub y: LieElement,
    pub value: Cyc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalConstancy {
    pub x: LieElement,
    pub y: LieElement,
    pub value: Cyc,
    /// `μ̂_X` agreed with `value` at every sample of `Y + 𝔭^m Ω³`.
    pub m: i64,
    pub samples: Vec<Perturbation>,
    /// A point of `Y + 𝔭^{m-1} Ω³` with a different value, when `m` is not the first level tried.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Perturbation>,
}

/// `Y` with its digits from `ϖ^m` on replaced by two random ones, coordinatewise.
/// Only digits are consulted, so equal seeds give digit-matched points over
/// fields with the same residue field.
fn perturb(rng: &mut ChaCha8Rng, y: &LieElement, m: i64) -> Result<LieElement> {
    let field = y.field();
    let p = field.p();
    let mut coords = Vec::new();
    for c in y.coords() {
        let lo = c.valuation().map_or(m, |v| v.min(m));
        let mut ds = Vec::new();
        for i in lo..m {
            ds.push(c.digit(i)?);
        }
        ds.push(rng.gen_range(0..p));
        ds.push(rng.gen_range(0..p));
        coords.push(TruncatedElement::exact_from_digits(field, lo, &ds)?);
    }
    let [a, b, c]: [TruncatedElement; 3] = coords.try_into().unwrap();
    Ok(LieElement { a, b, c })
}

/// Least `m ≥ 1` such that `μ̂_X` takes its value at `Y` on sampled points of
/// `Y + 𝔭^m Ω³`, by the direct route. Levels are tried upward, so a failed
/// level supplies the witness for the next one.
pub fn local_constancy(x: &LieElement, y: &LieElement, spec: &ConstancySpec) -> Result<LocalConstancy> {
    require_regular(y)?;
    let value = mu_hat(x, y, Route::Direct, &spec.params)?.value;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut witness = None;
    for m in 1..=spec.max_m {
        let mut pts = Vec::new();
        while pts.len() < spec.samples {
            let z = perturb(&mut rng, y, m)?;
            if z.q()?.is_zero() {
                continue;
            }
            pts.push(z);
        }
        let samples = pts
            .into_par_iter()
            .map(|z| Ok(Perturbation { value: mu_hat(x, &z, Route::Direct, &spec.params)?.value, y: z }))
            .collect::<Result<Vec<_>>>()?;
        match samples.iter().find(|s| s.value != value) {
            Some(s) => witness = Some(s.clone()),
            None => return Ok(LocalConstancy { x: x.clone(), y: y.clone(), value, m, samples, witness }),
        }
    }
    Err(Error::NotFound(spec.max_m.max(0) as u32))
}
