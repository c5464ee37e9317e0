//! Two-sided bounds on the stability modulus
//! `C_p(eps, R) = sup { max_{|z|<=R} |f(z)| : ||f||_p <= 1, |f| <= eps on E }`.
//!
//! Lower bounds come from explicit functions `B_q(Z_n, .)^s` that are small
//! on `E` (every witness certifies); upper bounds from the recovery error
//! estimate maximized over `|z| <= R`.

use log::debug;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

use crate::disc::{blaschke_at, circle_sup, max_modulus_on_disc, Configuration, QWeight};
use crate::error::{Error, Result};
use crate::extremal::{
    binomial, greedy_order, m_value, mu_value, phi, Envelope, PointSet, RateFit,
};
use crate::recovery::{PIndex, RecoveryOperator};

/// Grid margins below this signal a numerics bug in the exponent inequality.
pub const ALPHA_MARGIN_TOL: f64 = -1e-12;

/// Points of `r` in the exponent verification grid `0, 1e-3, ..., 1`.
pub const ALPHA_GRID: usize = 1001;

/// Admissible radii for reports.
pub const RADIUS_RANGE: (f64, f64) = (1e-3, 1.0 - 1e-3);

/// Compactness stand-in: all of `E` within this radius.
pub const DEFAULT_R_MAX: f64 = 0.999;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlphaCertificate {
    pub radius: f64,
    pub alpha: f64,
    /// `min_r max{R^a, r^a} - (R + r) / (1 + R r)` over the grid.
    pub grid_margin: f64,
}

/// The exponent `a = ln(2R / (1 + R^2)) / ln R` with
/// `max{R^a, r^a} >= (R + r) / (1 + R r)` for every `r` in `[0, 1]`.
pub fn alpha_for_radius(radius: f64) -> Result<AlphaCertificate> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::OutOfRange {
            name: "R",
            value: radius,
            range: "(0, 1)".to_string(),
        });
    }
    let alpha = (2.0 * radius / (1.0 + radius * radius)).ln() / radius.ln();
    let grid_margin = (0..ALPHA_GRID)
        .map(|i| {
            let r = i as f64 / (ALPHA_GRID - 1) as f64;
            radius.powf(alpha).max(r.powf(alpha)) - (radius + r) / (1.0 + radius * r)
        })
        .fold(f64::INFINITY, f64::min);
    if grid_margin < ALPHA_MARGIN_TOL {
        return Err(Error::Internal(format!(
            "exponent inequality fails at R = {radius}: margin {grid_margin}"
        )));
    }
    Ok(AlphaCertificate {
        radius,
        alpha,
        grid_margin,
    })
}

/// Polar sampling of `|z| <= R`: `radii x angles` interior points (radii
/// `R i / radii`, `i = 0..=radii`) plus `rim` refined angles on `|z| = R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PolarGrid {
    pub radii: usize,
    pub angles: usize,
    pub rim: usize,
}

impl Default for PolarGrid {
    fn default() -> Self {
        PolarGrid {
            radii: 256,
            angles: 512,
            rim: 4096,
        }
    }
}

impl PolarGrid {
    pub fn square(n: usize) -> Self {
        PolarGrid {
            radii: n,
            angles: n,
            rim: 8 * n,
        }
    }

    pub fn halved(self) -> Self {
        PolarGrid {
            radii: (self.radii / 2).max(1),
            angles: (self.angles / 2).max(1),
            rim: (self.rim / 2).max(3),
        }
    }
}

/// Search limits shared by the lower and upper bound searches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Budgets {
    pub n_max: usize,
    pub s_max: u32,
    /// Per-`n` cap on the number of subsets enumerated exhaustively.
    pub exhaustive: u128,
    pub grid: PolarGrid,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            n_max: 24,
            s_max: 64,
            exhaustive: 100_000,
            grid: PolarGrid::default(),
        }
    }
}

impl Budgets {
    pub fn doubled(self) -> Self {
        Budgets {
            n_max: self.n_max * 2,
            s_max: self.s_max * 2,
            exhaustive: self.exhaustive.saturating_mul(2),
            grid: self.grid,
        }
    }
}

/// A function `B_q(Z_n, .)^s / ||q||^s` that is at most `eps` on `E`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerWitness {
    pub config: Configuration,
    pub s: u32,
    pub q: QWeight,
    /// `M(config)` with the weight.
    pub m: f64,
    /// `prod_j max{R, |z_j|}`.
    pub product: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    pub value: f64,
    pub witness: Option<LowerWitness>,
}

fn min_feasible_power(ratio: f64, eps: f64, s_max: u32) -> Option<u32> {
    if ratio == 0.0 {
        return Some(1);
    }
    if ratio >= 1.0 {
        return (ratio <= eps).then_some(1);
    }
    let guess = (eps.ln() / ratio.ln()).ceil();
    let mut s = if guess.is_finite() && guess > 1.0 {
        guess.min(s_max as f64 + 1.0) as u32
    } else {
        1
    };
    while s > 1 && ratio.powi(s as i32 - 1) <= eps {
        s -= 1;
    }
    while ratio.powi(s as i32) > eps {
        s += 1;
        if s > s_max {
            return None;
        }
    }
    (s <= s_max).then_some(s)
}

/// Value certified by `(M, product, s)`: `(|q(0)| product / ||q||)^s`.
fn certified_value(q: &QWeight, product: f64, s: u32) -> f64 {
    (q.modulus(Complex64::new(0.0, 0.0)) * product / q.sup_norm()).powi(s as i32)
}

struct Candidate {
    value: f64,
    indices: Vec<usize>,
    s: u32,
    m: f64,
    product: f64,
}

fn assess(
    set: &PointSet,
    q: &QWeight,
    indices: &[usize],
    eps: f64,
    radius: f64,
    s_max: u32,
) -> Option<Candidate> {
    let cfg = set.configuration(indices).ok()?;
    let m = m_value(&cfg, set, q);
    let s = min_feasible_power(m / q.sup_norm(), eps, s_max)?;
    let product: f64 = cfg.nodes().iter().map(|z| z.norm().max(radius)).product();
    Some(Candidate {
        value: certified_value(q, product, s),
        indices: indices.to_vec(),
        s,
        m,
        product,
    })
}

fn better(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.value > a.value { b } else { a }),
        (x, None) | (None, x) => x,
    }
}

/// Certified lower bound on `C_p(eps, R)` for the point set.
///
/// Searches all `n`-subsets while their count fits `budgets.exhaustive`,
/// greedy prefixes (weighted and unweighted) beyond, with
/// `s = 1..=budgets.s_max`. For each configuration the smallest feasible
/// `s` is optimal since every factor is at most one.
pub fn g_lower(
    set: &PointSet,
    q: &QWeight,
    eps: f64,
    radius: f64,
    budgets: &Budgets,
) -> Result<LowerBound> {
    if !(eps > 0.0) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            range: "(0, ∞)".to_string(),
        });
    }
    let size = set.len();
    let n_max = budgets.n_max.min(size);
    let s_max = budgets.s_max;
    let weighted = greedy_order(set, q, n_max)?.0;
    let unweighted = greedy_order(set, &QWeight::Unit, n_max)?.0;

    let mut best: Option<Candidate> = None;
    for n in 1..=n_max {
        if binomial(size, n) <= budgets.exhaustive {
            let found = (0..=size - n)
                .into_par_iter()
                .map(|first| {
                    let mut local = None;
                    let mut idx: Vec<usize> = (first..first + n).collect();
                    loop {
                        local = better(local, assess(set, q, &idx, eps, radius, s_max));
                        if n == 1 || !advance(&mut idx[1..], size) {
                            break;
                        }
                    }
                    local
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(None, better);
            best = better(best, found);
        } else {
            for order in [&weighted, &unweighted] {
                let mut idx = order[..n].to_vec();
                idx.sort_unstable();
                best = better(best, assess(set, q, &idx, eps, radius, s_max));
            }
        }
    }

    Ok(match best {
        None => LowerBound {
            value: 0.0,
            witness: None,
        },
        Some(c) => LowerBound {
            value: c.value,
            witness: Some(LowerWitness {
                config: set.configuration(&c.indices)?,
                s: c.s,
                q: q.clone(),
                m: c.m,
                product: c.product,
            }),
        },
    })
}

fn advance(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - (k - i) {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// [`g_lower`] together with whether doubling every budget changes the
/// value by more than `1e-12`.
pub fn g_lower_saturated(
    set: &PointSet,
    q: &QWeight,
    eps: f64,
    radius: f64,
    budgets: &Budgets,
) -> Result<(LowerBound, bool)> {
    let base = g_lower(set, q, eps, radius, budgets)?;
    let wide = g_lower(set, q, eps, radius, &budgets.doubled())?;
    let saturated = (wide.value - base.value).abs() <= 1e-12;
    Ok((base, saturated))
}

/// Recomputes a witness from scratch; returns its certified value.
pub fn verify_lower_witness(
    witness: &LowerWitness,
    set: &PointSet,
    eps: f64,
    radius: f64,
) -> Result<f64> {
    let q = &witness.q;
    let m = set
        .points()
        .iter()
        .map(|&z| {
            let b: f64 = witness
                .config
                .nodes()
                .iter()
                .map(|&w| ((z - w) / (Complex64::new(1.0, 0.0) - w.conj() * z)).norm())
                .product();
            b * q.modulus(z)
        })
        .fold(0.0, f64::max);
    if (m / q.sup_norm()).powi(witness.s as i32) > eps {
        return Err(Error::Internal(format!(
            "witness infeasible: (M/||q||)^s = {} > {eps}",
            (m / q.sup_norm()).powi(witness.s as i32)
        )));
    }
    let mut product = 1.0;
    for z in witness.config.nodes() {
        product *= radius.max(z.norm());
    }
    Ok(certified_value(q, product, witness.s))
}

/// Upper estimate `max_{|z| <= R} eps sum_k |c_{p,k}(z)| + |B(z)| / (1 - |z|^2)^{1/p}`
/// on a grid, with the change from a half-resolution grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UpperEstimate {
    pub value: f64,
    pub argmax: [f64; 2],
    /// `|value - value on the halved grid|`.
    pub refinement_delta: f64,
}

fn d_integrand(op: &RecoveryOperator, eps: f64, p: PIndex, z: Complex64) -> f64 {
    let b = blaschke_at(op.configuration().nodes(), z).norm();
    let mass = if eps > 0.0 { op.coefficient_mass(z) } else { 0.0 };
    eps * mass + b / p.weight(z)
}

fn d_on_grid(op: &RecoveryOperator, eps: f64, radius: f64, p: PIndex, grid: PolarGrid) -> (f64, Complex64) {
    let interior = (0..grid.radii)
        .into_par_iter()
        .map(|i| {
            let r = radius * i as f64 / grid.radii as f64;
            let count = if i == 0 { 1 } else { grid.angles };
            (0..count)
                .map(|j| {
                    let z = Complex64::from_polar(r, TAU * j as f64 / grid.angles as f64);
                    (d_integrand(op, eps, p, z), z)
                })
                .fold((f64::NEG_INFINITY, Complex64::new(0.0, 0.0)), max_by_value)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::NEG_INFINITY, Complex64::new(0.0, 0.0)), max_by_value);
    let (t, v) = circle_sup(
        |t| d_integrand(op, eps, p, Complex64::from_polar(radius, t)),
        grid.rim,
    );
    max_by_value(interior, (v, Complex64::from_polar(radius, t)))
}

fn max_by_value(a: (f64, Complex64), b: (f64, Complex64)) -> (f64, Complex64) {
    if b.0 > a.0 {
        b
    } else {
        a
    }
}

/// Grid maximum of the recovery error estimate over `|z| <= R`.
pub fn d_upper(
    cfg: &Configuration,
    eps: f64,
    radius: f64,
    p: PIndex,
    grid: PolarGrid,
) -> Result<UpperEstimate> {
    let op = RecoveryOperator::new(cfg, p)?;
    let (value, z) = d_on_grid(&op, eps, radius, p, grid);
    let (coarse, _) = d_on_grid(&op, eps, radius, p, grid.halved());
    Ok(UpperEstimate {
        value,
        argmax: [z.re, z.im],
        refinement_delta: (value - coarse).abs(),
    })
}

/// One greedy configuration in the upper bound search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UpperRow {
    pub n: usize,
    pub d: f64,
    pub refinement_delta: f64,
    /// `prod_k (R + |z_k|) / (1 + |z_k| R)`.
    pub contraction: f64,
    pub mu: f64,
    /// `d / (contraction (eps mu + 1))`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperBound {
    /// `min(raw, cap)`.
    pub value: f64,
    pub raw: f64,
    /// The raw estimate reached the trivial cap `(1 - R^2)^{-1/p}`.
    pub clamped: bool,
    pub config: Configuration,
    pub refinement_delta: f64,
    pub rows: Vec<UpperRow>,
}

/// `(1 - R^2)^{-1/p}`, the bound from the point evaluation norm alone.
pub fn trivial_cap(radius: f64, p: PIndex) -> f64 {
    (1.0 - radius * radius).powf(-p.reciprocal())
}

/// Minimum of [`d_upper`] over the greedy configurations `n = 1..=n_max`.
pub fn d_upper_best(
    set: &PointSet,
    eps: f64,
    radius: f64,
    p: PIndex,
    budgets: &Budgets,
) -> Result<UpperBound> {
    let n_max = budgets.n_max.min(set.len()).max(1);
    let (order, _) = greedy_order(set, &QWeight::Unit, n_max)?;
    let full = set.configuration(&order)?;
    let mut rows = Vec::with_capacity(n_max);
    let mut best: Option<(f64, usize, f64)> = None;
    for n in 1..=n_max {
        let cfg = full.prefix(n);
        let est = match d_upper(&cfg, eps, radius, p, budgets.grid) {
            Ok(e) => e,
            Err(e) => {
                debug!("skipping n = {n} in upper search: {e}");
                continue;
            }
        };
        let contraction: f64 = cfg
            .nodes()
            .iter()
            .map(|z| (radius + z.norm()) / (1.0 + z.norm() * radius))
            .product();
        let mu = mu_value(&cfg)?;
        rows.push(UpperRow {
            n,
            d: est.value,
            refinement_delta: est.refinement_delta,
            contraction,
            mu,
            ratio: est.value / (contraction * (eps * mu + 1.0)),
        });
        if best.is_none_or(|b| est.value < b.0) {
            best = Some((est.value, n, est.refinement_delta));
        }
    }
    let (raw, n, refinement_delta) =
        best.ok_or_else(|| Error::Degenerate("no usable configuration for the upper bound".into()))?;
    let cap = trivial_cap(radius, p);
    Ok(UpperBound {
        value: raw.min(cap),
        raw,
        clamped: raw >= cap,
        config: full.prefix(n),
        refinement_delta,
        rows,
    })
}

/// Shortest greedy configuration with `max_E |B| <= eps`.
pub fn finite_blaschke_for_eps(set: &PointSet, eps: f64, r_max: f64) -> Result<Configuration> {
    if set.max_modulus() > r_max {
        return Err(Error::Domain(format!(
            "point set reaches |z| = {} > {r_max}",
            set.max_modulus()
        )));
    }
    let (order, log_m) = greedy_order(set, &QWeight::Unit, set.len())?;
    let full = set.configuration(&order)?;
    let start = log_m
        .iter()
        .position(|&lm| lm.exp() <= eps)
        .unwrap_or(set.len() - 1);
    for n in start + 1..=set.len() {
        let cfg = full.prefix(n);
        if m_value(&cfg, set, &QWeight::Unit) <= eps {
            return Ok(cfg);
        }
    }
    Ok(full)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlaschkeWitness {
    pub n: usize,
    /// `max_{|z| <= R} |B_eps(z)|`.
    pub max_on_disc: f64,
    pub sqrt: f64,
}

/// Exponents of the sharpened upper bound under `M_n <= C n^{-sigma}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentBundle {
    pub alpha: f64,
    pub sigma: f64,
    /// `sigma / (1 + sigma)`.
    pub kappa0: f64,
    /// `alpha / ([1/kappa0] + 1)`.
    pub exponent: f64,
}

impl ExponentBundle {
    pub fn new(alpha: f64, sigma: f64) -> Self {
        let kappa0 = sigma / (1.0 + sigma);
        ExponentBundle {
            alpha,
            sigma,
            kappa0,
            exponent: alpha / ((1.0 / kappa0).floor() + 1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ReportExtras<'a> {
    pub envelope: Option<&'a Envelope>,
    pub fit: Option<&'a RateFit>,
    pub r_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub eps: f64,
    pub radius: f64,
    pub p: PIndex,
    pub lower: f64,
    pub lower_witness: Option<LowerWitness>,
    pub blaschke: Option<BlaschkeWitness>,
    pub upper: f64,
    pub upper_raw: f64,
    pub upper_clamped: bool,
    pub upper_config: Configuration,
    pub refinement_delta: f64,
    pub upper_rows: Vec<UpperRow>,
    pub cap: f64,
    pub phi_eps: Option<f64>,
    /// Lower bound search evaluated at `phi(eps)`.
    pub g_at_phi: Option<f64>,
    /// `ln eps / ln phi(eps)`.
    pub log_ratio: Option<f64>,
    pub envelope_surrogate: Option<bool>,
    pub exponents: Option<ExponentBundle>,
    /// `eps >= 1`: the constraint on `E` carries no information.
    pub uninformative: bool,
}

/// Assembles lower and upper bounds on `C_p(eps, R)` for one `(eps, R, p)`.
pub fn stability_report(
    set: &PointSet,
    q: &QWeight,
    eps: f64,
    radius: f64,
    p: PIndex,
    budgets: &Budgets,
    extras: ReportExtras<'_>,
) -> Result<StabilityReport> {
    if !(radius >= RADIUS_RANGE.0 && radius <= RADIUS_RANGE.1) {
        return Err(Error::OutOfRange {
            name: "R",
            value: radius,
            range: format!("[{}, {}]", RADIUS_RANGE.0, RADIUS_RANGE.1),
        });
    }
    let g = g_lower(set, q, eps, radius, budgets)?;
    let r_max = extras.r_max.unwrap_or(DEFAULT_R_MAX);
    let blaschke = if set.max_modulus() <= r_max {
        let cfg = finite_blaschke_for_eps(set, eps, r_max)?;
        let max_on_disc = max_modulus_on_disc(&cfg, radius, budgets.grid.rim);
        Some(BlaschkeWitness {
            n: cfg.len(),
            max_on_disc,
            sqrt: max_on_disc.sqrt(),
        })
    } else {
        None
    };
    let lower = blaschke.map_or(g.value, |b| g.value.max(b.max_on_disc));
    let upper = d_upper_best(set, eps, radius, p, budgets)?;

    let (phi_eps, g_at_phi, log_ratio, surrogate) = match extras.envelope {
        Some(env) => {
            let sol = phi(eps, env)?;
            let g_phi = if sol.phi > 0.0 && sol.phi <= 1.0 {
                Some(g_lower(set, q, sol.phi, radius, budgets)?.value)
            } else {
                None
            };
            (
                Some(sol.phi),
                g_phi,
                Some(eps.ln() / sol.phi.ln()),
                Some(env.surrogate),
            )
        }
        None => (None, None, None, None),
    };
    let exponents = match extras.fit {
        Some(fit) => Some(ExponentBundle::new(alpha_for_radius(radius)?.alpha, fit.sigma)),
        None => None,
    };

    Ok(StabilityReport {
        eps,
        radius,
        p,
        lower,
        lower_witness: g.witness,
        blaschke,
        upper: upper.value,
        upper_raw: upper.raw,
        upper_clamped: upper.clamped,
        upper_config: upper.config,
        refinement_delta: upper.refinement_delta,
        upper_rows: upper.rows,
        cap: trivial_cap(radius, p),
        phi_eps,
        g_at_phi,
        log_ratio,
        envelope_surrogate: surrogate,
        exponents,
        uninformative: eps >= 1.0,
    })
}
