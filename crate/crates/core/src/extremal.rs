//! Extremal set functions on a finite candidate set `E`.
//!
//! For a configuration `Z_n` drawn from `E`:
//!
//! * `V(Z_n) = prod_j |B_q(Z_{j-1}, z_j)|`, equivalently
//!   `prod_{j<l} d(z_j, z_l) * prod_j |q(z_j)|`;
//! * `mu(Z_n) = sum_j 1 / |B_j(Z_n, z_j)|`;
//! * `M(Z_n) = max_{z in E} |B_q(Z_n, z)|`.
//!
//! `V_n(E)` is the maximum of `V` over `E^n`; `mu_n` and `M_n` are minima over
//! the maximizers. All values are exact for the finite set and one-sided
//! bounds for any superset it was sampled from.

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disc::{
    excluding_at, gleason, log_modulus_at, Configuration, DiscPoint, QWeight,
    DEFAULT_MIN_SEPARATION,
};
use crate::error::{Error, Result};

/// Maximizers of `V` within this relative distance of `V_n` form the tie set.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Default cap on the number of `n`-subsets visited by exhaustive search.
pub const DEFAULT_EXHAUSTIVE_BUDGET: u128 = 10_000_000;

/// Above this many candidates greedy scans run in parallel.
const PARALLEL_SCAN_MIN: usize = 2048;

/// Finite stand-in for the set `E`, without duplicates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSet {
    points: Vec<Complex64>,
    label: String,
}

impl PointSet {
    /// Interior points only; near-duplicates (Gleason distance below
    /// [`DEFAULT_MIN_SEPARATION`]) are dropped, keeping the first.
    pub fn new(points: Vec<DiscPoint>, label: impl Into<String>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.is_interior()) {
            return Err(Error::Domain(format!("{} is not interior", p.value())));
        }
        Self::with_closure(points, label)
    }

    /// Admits points of the unit circle (for boundary diagnostics).
    pub fn with_closure(points: Vec<DiscPoint>, label: impl Into<String>) -> Result<Self> {
        Ok(Self::with_closure_counted(points, label)?.0)
    }

    /// Like [`PointSet::with_closure`], also returning how many duplicates were removed.
    pub fn with_closure_counted(
        points: Vec<DiscPoint>,
        label: impl Into<String>,
    ) -> Result<(Self, usize)> {
        if points.is_empty() {
            return Err(Error::Empty("point set"));
        }
        let raw: Vec<Complex64> = points.into_iter().map(DiscPoint::value).collect();
        let (points, removed) = dedup(raw);
        Ok((
            PointSet {
                points,
                label: label.into(),
            },
            removed,
        ))
    }

    #[inline]
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn disc_points(&self) -> Vec<DiscPoint> {
        self.points
            .iter()
            .map(|&z| DiscPoint::new(z).expect("stored points lie in the closed disc"))
            .collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_interior(&self) -> bool {
        self.points.iter().all(|z| z.norm() < 1.0)
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `||q||_{inf, E}`.
    pub fn q_sup(&self, q: &QWeight) -> f64 {
        self.points.iter().map(|&z| q.modulus(z)).fold(0.0, f64::max)
    }

    /// Configuration on the points with the given indices.
    pub fn configuration(&self, indices: &[usize]) -> Result<Configuration> {
        let nodes = indices
            .iter()
            .map(|&i| DiscPoint::interior(self.points[i]))
            .collect::<Result<Vec<_>>>()?;
        Configuration::new(nodes)
    }

    fn require_interior(&self) -> Result<()> {
        if !self.is_interior() {
            return Err(Error::Domain(format!(
                "point set '{}' contains boundary points",
                self.label
            )));
        }
        Ok(())
    }
}

fn too_close(a: Complex64, b: Complex64) -> bool {
    if a == b {
        return true;
    }
    if a.norm() < 1.0 && b.norm() < 1.0 {
        gleason(a, b) < DEFAULT_MIN_SEPARATION
    } else {
        (a - b).norm() < DEFAULT_MIN_SEPARATION
    }
}

fn dedup(points: Vec<Complex64>) -> (Vec<Complex64>, usize) {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a].re.total_cmp(&points[b].re).then(a.cmp(&b)));
    let mut removed = vec![false; n];
    let window = 2.0 * DEFAULT_MIN_SEPARATION;
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if points[j].re - points[i].re > window {
                break;
            }
            if !removed[i] && !removed[j] && too_close(points[i], points[j]) {
                removed[i.max(j)] = true;
            }
        }
    }
    let count = removed.iter().filter(|&&r| r).count();
    let kept = points
        .into_iter()
        .zip(removed)
        .filter(|(_, r)| !r)
        .map(|(z, _)| z)
        .collect();
    (kept, count)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    Greedy,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::Greedy => "greedy",
        }
    }
}

/// A configuration with its extremal statistics for one `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremalRecord {
    pub n: usize,
    pub config: Configuration,
    pub v: f64,
    pub m: f64,
    /// `mu` of `config`.
    pub mu: f64,
    /// Minimum of `mu` over the tie set of maximizers (`mu_n`).
    pub mu_min: f64,
    pub method: Method,
    /// Size of the tie set (1 for greedy).
    pub ties: usize,
}

impl ExtremalRecord {
    /// `V^{1/n}`.
    pub fn v_root(&self) -> f64 {
        self.v.powf(1.0 / self.n as f64)
    }
}

/// `log V(Z_n)`, via the successive-product definition.
pub fn log_v_value(cfg: &Configuration, q: &QWeight) -> f64 {
    let nodes = cfg.nodes();
    (0..nodes.len())
        .map(|j| log_modulus_at(&nodes[..j], nodes[j]) + q.modulus(nodes[j]).ln())
        .sum()
}

/// `V(Z_n) = prod_j |B_q(Z_{j-1}, z_j)|`; 1 for the empty configuration.
pub fn v_value(cfg: &Configuration, q: &QWeight) -> f64 {
    log_v_value(cfg, q).exp()
}

/// `mu(Z_n) = sum_k 1 / |B_k(Z_n, z_k)|`.
pub fn mu_value(cfg: &Configuration) -> Result<f64> {
    if cfg.is_empty() {
        return Err(Error::Empty("mu needs at least one node"));
    }
    let nodes = cfg.nodes();
    Ok((0..nodes.len())
        .map(|k| excluding_at(nodes, k, nodes[k]).norm().recip())
        .sum())
}

/// `M(Z_n) = max_{z in E} |B_q(Z_n, z)|`.
pub fn m_value(cfg: &Configuration, set: &PointSet, q: &QWeight) -> f64 {
    set.points()
        .iter()
        .map(|&z| (log_modulus_at(cfg.nodes(), z).exp()) * q.modulus(z))
        .fold(0.0, f64::max)
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

struct Best {
    log_v: f64,
    ties: Vec<(f64, Vec<usize>)>,
}

impl Best {
    fn new() -> Self {
        Best {
            log_v: f64::NEG_INFINITY,
            ties: Vec::new(),
        }
    }

    fn threshold(log_v: f64) -> f64 {
        log_v + (1.0 - TIE_TOLERANCE).ln()
    }

    fn offer(&mut self, log_v: f64, subset: &[usize]) {
        if log_v > self.log_v {
            self.log_v = log_v;
            let t = Self::threshold(log_v);
            self.ties.retain(|(lv, _)| *lv >= t);
        }
        if log_v >= Self::threshold(self.log_v) {
            self.ties.push((log_v, subset.to_vec()));
        }
    }
}

/// Advances `idx` to the next strictly increasing tuple drawn from
/// `..n`; returns `false` when exhausted.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
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

/// Exact `V_n`, `mu_n`, `M_n` over all `n`-subsets of the candidate set.
///
/// The returned configuration is the maximizer with the smallest `M`
/// (then smallest `mu`, then first in lexicographic index order).
pub fn extremal_exhaustive(
    set: &PointSet,
    q: &QWeight,
    n: usize,
    budget: u128,
) -> Result<ExtremalRecord> {
    set.require_interior()?;
    let size = set.len();
    if n == 0 || n > size {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            range: format!("[1, {size}]"),
        });
    }
    let count = binomial(size, n);
    if count > budget {
        return Err(Error::BudgetExceeded { count, budget });
    }

    let pts = set.points();
    let log_q: Vec<f64> = pts.iter().map(|&z| q.modulus(z).ln()).collect();
    let log_d: Vec<Vec<f64>> = pts
        .iter()
        .map(|&a| pts.iter().map(|&b| gleason(a, b).ln()).collect())
        .collect();
    let subset_log_v = |s: &[usize]| -> f64 {
        let mut acc = 0.0;
        for (a, &i) in s.iter().enumerate() {
            acc += log_q[i];
            for &j in &s[..a] {
                acc += log_d[i][j];
            }
        }
        acc
    };

    let partials: Vec<Best> = (0..=size - n)
        .into_par_iter()
        .map(|first| {
            let mut best = Best::new();
            let mut subset: Vec<usize> = (first..first + n).collect();
            loop {
                best.offer(subset_log_v(&subset), &subset);
                if n == 1 || !next_combination(&mut subset[1..], size) {
                    break;
                }
            }
            best
        })
        .collect();

    let log_vmax = partials.iter().map(|b| b.log_v).fold(f64::NEG_INFINITY, f64::max);
    let threshold = Best::threshold(log_vmax);
    let ties: Vec<Vec<usize>> = partials
        .into_iter()
        .flat_map(|b| b.ties)
        .filter(|(lv, _)| *lv >= threshold)
        .map(|(_, s)| s)
        .collect();

    let scored: Vec<(f64, f64, &Vec<usize>)> = ties
        .par_iter()
        .map(|s| {
            let cfg = set.configuration(s).expect("point set nodes are distinct and interior");
            let m = m_value(&cfg, set, q);
            let mu = mu_value(&cfg).expect("n >= 1");
            (m, mu, s)
        })
        .collect();
    let mu_min = scored.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let mut chosen = &scored[0];
    for cand in &scored[1..] {
        if cand.0 < chosen.0 || (cand.0 == chosen.0 && cand.1 < chosen.1) {
            chosen = cand;
        }
    }
    let config = set.configuration(chosen.2)?;
    Ok(ExtremalRecord {
        n,
        v: v_value(&config, q),
        m: chosen.0,
        mu: chosen.1,
        mu_min,
        config,
        method: Method::Exhaustive,
        ties: scored.len(),
    })
}

/// Leja-type greedy ordering of candidate indices: the first node maximizes
/// `|q|`, each next node maximizes `|B_q(Z_j, .)|` over the unchosen points.
/// Ties go to the lowest index. Returns the indices and, after each step,
/// `log M` of the prefix.
pub fn greedy_order(set: &PointSet, q: &QWeight, n: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    set.require_interior()?;
    let size = set.len();
    if n > size {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            range: format!("[0, {size}]"),
        });
    }
    let pts = set.points();
    let mut log_val: Vec<f64> = pts.iter().map(|&z| q.modulus(z).ln()).collect();
    let mut chosen = vec![false; size];
    let mut order = Vec::with_capacity(n);
    let mut log_m = Vec::with_capacity(n);
    for _ in 0..n {
        let pick = argmax_unchosen(&log_val, &chosen);
        chosen[pick] = true;
        order.push(pick);
        let node = pts[pick];
        let update = |(lv, &z): (&mut f64, &Complex64)| *lv += gleason(z, node).ln();
        if size >= PARALLEL_SCAN_MIN {
            log_val.par_iter_mut().zip(pts.par_iter()).for_each(update);
        } else {
            log_val.iter_mut().zip(pts.iter()).for_each(update);
        }
        log_val[pick] = f64::NEG_INFINITY;
        log_m.push(max_log(&log_val));
    }
    Ok((order, log_m))
}

fn argmax_unchosen(log_val: &[f64], chosen: &[bool]) -> usize {
    let pick = |acc: Option<(usize, f64)>, (i, &v): (usize, &f64)| -> Option<(usize, f64)> {
        if chosen[i] {
            return acc;
        }
        match acc {
            Some((_, best)) if v <= best => acc,
            _ => Some((i, v)),
        }
    };
    if log_val.len() >= PARALLEL_SCAN_MIN {
        log_val
            .par_iter()
            .enumerate()
            .fold(|| None, pick)
            .reduce(
                || None,
                |a, b| match (a, b) {
                    (Some((ia, va)), Some((ib, vb))) => {
                        if vb > va || (vb == va && ib < ia) {
                            Some((ib, vb))
                        } else {
                            Some((ia, va))
                        }
                    }
                    (x, None) | (None, x) => x,
                },
            )
    } else {
        log_val.iter().enumerate().fold(None, pick)
    }
    .map(|(i, _)| i)
    .expect("at least one unchosen candidate")
}

fn max_log(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Greedy record for a single `n`; `v` is a certified lower bound on `V_n`.
pub fn extremal_greedy(set: &PointSet, q: &QWeight, n: usize) -> Result<ExtremalRecord> {
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "n",
            value: 0.0,
            range: format!("[1, {}]", set.len()),
        });
    }
    Ok(greedy_records(set, q, n)?.pop().expect("n >= 1"))
}

/// Greedy records for every prefix length `1..=n_max`.
pub fn greedy_records(set: &PointSet, q: &QWeight, n_max: usize) -> Result<Vec<ExtremalRecord>> {
    let (order, log_m) = greedy_order(set, q, n_max)?;
    let full = set.configuration(&order)?;
    (1..=n_max)
        .map(|n| {
            let config = full.prefix(n);
            let mu = mu_value(&config)?;
            Ok(ExtremalRecord {
                n,
                v: v_value(&config, q),
                m: log_m[n - 1].exp(),
                mu,
                mu_min: mu,
                config,
                method: Method::Greedy,
                ties: 1,
            })
        })
        .collect()
}

/// Exhaustive records while the subset count fits `budget`, greedy beyond.
pub fn extremal_records(
    set: &PointSet,
    q: &QWeight,
    n_max: usize,
    budget: u128,
) -> Result<Vec<ExtremalRecord>> {
    let n_max = n_max.min(set.len());
    let greedy = greedy_records(set, q, n_max)?;
    greedy
        .into_iter()
        .map(|g| {
            if binomial(set.len(), g.n) <= budget {
                extremal_exhaustive(set, q, g.n, budget)
            } else {
                Ok(g)
            }
        })
        .collect()
}

/// Largest gap `sup_E |B_{q,j}(Z_n, .)| - |B_{q,j}(Z_n, z_j)|` over the
/// nodes of a record. Zero (up to ties) for exact maximizers.
pub fn maximizer_sup_gap(record: &ExtremalRecord, set: &PointSet, q: &QWeight) -> f64 {
    let nodes = record.config.nodes();
    (0..nodes.len())
        .map(|j| {
            let at_node = excluding_at(nodes, j, nodes[j]).norm() * q.modulus(nodes[j]);
            let sup = set
                .points()
                .iter()
                .map(|&z| excluding_at(nodes, j, z).norm() * q.modulus(z))
                .fold(0.0, f64::max);
            sup - at_node
        })
        .fold(0.0, f64::max)
}

/// How the envelope continues past the last computed `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Extension {
    Constant,
    /// `h(x) = h(N) (x / N)^{-sigma}` for `x > N`.
    PowerLaw { sigma: f64 },
}

/// Non-increasing majorant `h` of the recorded `M_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Envelope {
    /// `h(1), ..., h(N)`.
    values: Vec<f64>,
    /// Some inputs were greedy surrogates rather than exact `M_n`.
    pub surrogate: bool,
    pub extension: Extension,
}

impl Envelope {
    /// Builds directly from `M_1..M_N`.
    pub fn from_values(m: &[f64], surrogate: bool) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::Empty("envelope needs at least one record"));
        }
        let mut values = m.to_vec();
        for i in (0..values.len().saturating_sub(1)).rev() {
            values[i] = values[i].max(values[i + 1]);
        }
        Ok(Envelope {
            values,
            surrogate,
            extension: Extension::Constant,
        })
    }

    pub fn with_power_law(mut self, sigma: f64) -> Self {
        self.extension = Extension::PowerLaw { sigma };
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    /// `h(x)` for `x >= 1`.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len() as f64;
        if x <= 1.0 {
            return self.values[0];
        }
        if x >= n {
            let last = self.values[self.values.len() - 1];
            return match self.extension {
                Extension::Constant => last,
                Extension::PowerLaw { sigma } => last * (x / n).powf(-sigma),
            };
        }
        let i = x.floor() as usize;
        let frac = x - i as f64;
        let lo = self.values[i - 1];
        let hi = self.values[i];
        lo + frac * (hi - lo)
    }

    /// `eps_0 = h(1) / 2`.
    pub fn eps0(&self) -> f64 {
        self.values[0] / 2.0
    }
}

/// `h(n) = max_{k >= n} M_k` over records covering `n = 1..N`.
pub fn envelope_build(records: &[ExtremalRecord]) -> Result<Envelope> {
    if records.is_empty() {
        return Err(Error::Empty("envelope needs at least one record"));
    }
    let mut sorted: Vec<&ExtremalRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.n);
    for (i, r) in sorted.iter().enumerate() {
        if r.n != i + 1 {
            return Err(Error::Domain(format!(
                "envelope records must cover n = 1..N contiguously; found n = {} at position {}",
                r.n,
                i + 1
            )));
        }
    }
    let m: Vec<f64> = sorted.iter().map(|r| r.m).collect();
    let surrogate = sorted.iter().any(|r| r.method == Method::Greedy);
    Envelope::from_values(&m, surrogate)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiSolution {
    /// The `x >= 1` with `eps = h(x) / (x + 1)`.
    pub x: f64,
    /// `phi(eps) = h(x)`.
    pub phi: f64,
}

/// `phi(eps) = h(x)` where `eps = h(x) / (x + 1)`, for a non-increasing `h`
/// on `[1, ∞)` and `0 < eps < h(1) / 2`.
pub fn phi_with<H: Fn(f64) -> f64>(eps: f64, h: H) -> Result<PhiSolution> {
    let eps0 = h(1.0) / 2.0;
    if !(eps > 0.0 && eps < eps0) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            range: format!("(0, {eps0})"),
        });
    }
    let quotient = |x: f64| h(x) / (x + 1.0);
    let mut lo = 1.0;
    let mut hi = 2.0;
    while quotient(hi) > eps {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Internal("phi bracket did not close".to_string()));
        }
    }
    debug_assert!(quotient(lo) >= quotient(hi));
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let qm = quotient(mid);
        if (qm - eps).abs() <= 1e-12 * eps {
            lo = mid;
            hi = mid;
            break;
        }
        if qm > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok(PhiSolution { x, phi: h(x) })
}

pub fn phi(eps: f64, envelope: &Envelope) -> Result<PhiSolution> {
    phi_with(eps, |x| envelope.eval(x))
}

/// Diagnostic power-law majorant `M_n <= C n^{-sigma}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub c: f64,
    pub sigma: f64,
    /// Number of `(n, M_n)` samples that entered the fit.
    pub used: usize,
}

/// Least-squares fit of `log M_n` against `log n` for `n >= n_min`; `C` is
/// then raised until `C n^{-sigma}` majorizes every sample used.
pub fn rate_fit_samples(samples: &[(usize, f64)], n_min: usize) -> Result<RateFit> {
    let mut pts = Vec::new();
    for &(n, m) in samples.iter().filter(|s| s.0 >= n_min.max(1)) {
        if m > 0.0 {
            pts.push(((n as f64).ln(), m.ln()));
        } else {
            warn!("rate fit: dropping n = {n} with M_n = {m}");
        }
    }
    if pts.len() < 4 {
        return Err(Error::Domain(format!(
            "rate fit needs at least 4 positive samples, got {}",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sigma = -sxy / sxx;
    if !(sigma > 0.0) {
        return Err(Error::NoDecay(sigma));
    }
    let log_c = pts
        .iter()
        .map(|p| p.1 + sigma * p.0)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RateFit {
        c: log_c.exp(),
        sigma,
        used: pts.len(),
    })
}

pub fn rate_fit(records: &[ExtremalRecord], n_min: usize) -> Result<RateFit> {
    let samples: Vec<(usize, f64)> = records.iter().map(|r| (r.n, r.m)).collect();
    rate_fit_samples(&samples, n_min)
}
