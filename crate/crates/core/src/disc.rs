//! Geometry of the unit disc: points, node configurations, the Gleason
//! (pseudo-hyperbolic) distance, finite Blaschke products and the
//! normalizing boundary weight `q`.
//!
//! Products with more than [`DIRECT_PRODUCT_MAX`] factors are accumulated
//! as a sum of log-moduli plus a sum of arguments, so that very long
//! configurations do not underflow before the caller sees them.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest factor count evaluated as a plain complex product.
pub const DIRECT_PRODUCT_MAX: usize = 64;

/// Default pairwise Gleason separation demanded of configuration nodes.
pub const DEFAULT_MIN_SEPARATION: f64 = 1e-9;

/// Anchors of a boundary weight must satisfy `||a| - 1| <= ANCHOR_TOL`.
pub const ANCHOR_TOL: f64 = 1e-12;

/// Boundary grid used to locate the maximum of `|q|` before refinement.
pub const Q_GRID: usize = 4096;

/// Rounding slack admitted for points meant to lie on the unit circle.
pub const BOUNDARY_TOL: f64 = 1e-14;

/// A point of the closed unit disc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct DiscPoint(Complex64);

impl DiscPoint {
    pub const ORIGIN: DiscPoint = DiscPoint(Complex64 { re: 0.0, im: 0.0 });

    /// Accepts any finite `z` with `|z| <= 1` (up to [`BOUNDARY_TOL`]).
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {z}")));
        }
        if z.norm() > 1.0 + BOUNDARY_TOL {
            return Err(Error::Domain(format!("{z} lies outside the closed unit disc")));
        }
        Ok(DiscPoint(z))
    }

    /// Accepts only `|z| < 1`.
    pub fn interior(z: Complex64) -> Result<Self> {
        let p = Self::new(z)?;
        if !p.is_interior() {
            return Err(Error::Domain(format!("{z} is not an interior point")));
        }
        Ok(p)
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(r, theta))
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }

    #[inline]
    pub fn modulus(self) -> f64 {
        self.0.norm()
    }

    #[inline]
    pub fn is_interior(self) -> bool {
        self.0.norm() < 1.0
    }

    pub fn conj(self) -> Self {
        DiscPoint(self.0.conj())
    }
}

impl TryFrom<[f64; 2]> for DiscPoint {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        DiscPoint::new(Complex64::new(v[0], v[1]))
    }
}

impl From<DiscPoint> for [f64; 2] {
    fn from(p: DiscPoint) -> Self {
        [p.0.re, p.0.im]
    }
}

impl From<DiscPoint> for Complex64 {
    fn from(p: DiscPoint) -> Self {
        p.0
    }
}

/// `|(z - w) / (1 - conj(w) z)|` without domain checks.
#[inline]
pub(crate) fn gleason(z: Complex64, w: Complex64) -> f64 {
    blaschke_factor(w, z).norm()
}

/// Gleason distance between two interior points.
pub fn gleason_distance(z: DiscPoint, w: DiscPoint) -> Result<f64> {
    if !z.is_interior() || !w.is_interior() {
        return Err(Error::Domain(
            "Gleason distance needs interior points".to_string(),
        ));
    }
    Ok(gleason(z.0, w.0))
}

/// The disc automorphism `(z - a) / (1 - conj(a) z)`.
#[inline]
pub fn mobius(a: Complex64, z: Complex64) -> Complex64 {
    (z - a) / (1.0 - a.conj() * z)
}

/// One Blaschke factor with zero at `node`, evaluated at `z`.
#[inline]
pub(crate) fn blaschke_factor(node: Complex64, z: Complex64) -> Complex64 {
    mobius(node, z)
}

/// Ordered tuple of pairwise distinct interior nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DiscPoint>", into = "Vec<DiscPoint>")]
pub struct Configuration {
    nodes: Vec<Complex64>,
}

impl Configuration {
    pub fn empty() -> Self {
        Configuration { nodes: Vec::new() }
    }

    pub fn new(nodes: Vec<DiscPoint>) -> Result<Self> {
        Self::with_min_separation(nodes, DEFAULT_MIN_SEPARATION)
    }

    pub fn from_complex(nodes: &[Complex64]) -> Result<Self> {
        let pts = nodes
            .iter()
            .map(|&z| DiscPoint::new(z))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pts)
    }

    /// Builds a configuration whose nodes are pairwise at least `min_sep`
    /// apart in the Gleason distance.
    pub fn with_min_separation(nodes: Vec<DiscPoint>, min_sep: f64) -> Result<Self> {
        if let Some(p) = nodes.iter().find(|p| !p.is_interior()) {
            return Err(Error::Domain(format!(
                "configuration node {} is not interior",
                p.value()
            )));
        }
        let nodes: Vec<Complex64> = nodes.into_iter().map(DiscPoint::value).collect();
        if let Some((i, j)) = find_close_pair(&nodes, min_sep) {
            return Err(Error::Degenerate(format!(
                "nodes {i} and {j} ({} and {}) are closer than {min_sep:e}",
                nodes[i], nodes[j]
            )));
        }
        Ok(Configuration { nodes })
    }

    /// Skips validation; callers guarantee distinct interior nodes.
    pub(crate) fn from_trusted(nodes: Vec<Complex64>) -> Self {
        Configuration { nodes }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn points(&self) -> impl Iterator<Item = DiscPoint> + '_ {
        self.nodes.iter().map(|&z| DiscPoint(z))
    }

    /// The first `len` nodes.
    pub fn prefix(&self, len: usize) -> Configuration {
        Configuration::from_trusted(self.nodes[..len].to_vec())
    }

    /// The configuration with node `k` (0-based) removed.
    pub fn without(&self, k: usize) -> Result<Configuration> {
        self.check_index(k)?;
        let mut nodes = self.nodes.clone();
        nodes.remove(k);
        Ok(Configuration::from_trusted(nodes))
    }

    pub fn conj(&self) -> Configuration {
        Configuration::from_trusted(self.nodes.iter().map(|z| z.conj()).collect())
    }

    pub(crate) fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.nodes.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.nodes.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<DiscPoint>> for Configuration {
    type Error = Error;
    fn try_from(nodes: Vec<DiscPoint>) -> Result<Self> {
        Configuration::new(nodes)
    }
}

impl From<Configuration> for Vec<DiscPoint> {
    fn from(cfg: Configuration) -> Self {
        cfg.nodes.into_iter().map(DiscPoint).collect()
    }
}

/// Any two points closer than `delta` in the Gleason distance are within
/// `2 * delta` in the Euclidean one, so a sweep over real parts suffices.
fn find_close_pair(nodes: &[Complex64], delta: f64) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| nodes[a].re.total_cmp(&nodes[b].re).then(a.cmp(&b)));
    let window = 2.0 * delta;
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if nodes[j].re - nodes[i].re > window {
                break;
            }
            if gleason(nodes[i], nodes[j]) < delta {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

/// Product of factors in log-modulus + phase form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct LogProduct {
    pub log_modulus: f64,
    pub phase: f64,
}

impl LogProduct {
    pub const ONE: LogProduct = LogProduct {
        log_modulus: 0.0,
        phase: 0.0,
    };

    #[inline]
    pub fn of(factor: Complex64) -> Self {
        LogProduct {
            log_modulus: factor.norm().ln(),
            phase: factor.arg(),
        }
    }

    #[inline]
    pub fn mul(self, other: LogProduct) -> Self {
        LogProduct {
            log_modulus: self.log_modulus + other.log_modulus,
            phase: self.phase + other.phase,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        if self.log_modulus == f64::NEG_INFINITY {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_modulus.exp(), self.phase.rem_euclid(TAU))
    }
}

fn product_of<I>(factors: I, count: usize) -> Complex64
where
    I: Iterator<Item = Complex64>,
{
    if count <= DIRECT_PRODUCT_MAX {
        factors.fold(Complex64::new(1.0, 0.0), |acc, f| acc * f)
    } else {
        factors
            .fold(LogProduct::ONE, |acc, f| acc.mul(LogProduct::of(f)))
            .to_complex()
    }
}

/// `B(Z_n, z) = prod (z - z_j) / (1 - conj(z_j) z)`; the empty product is 1.
pub fn blaschke_eval(cfg: &Configuration, z: DiscPoint) -> Complex64 {
    blaschke_at(cfg.nodes(), z.0)
}

pub(crate) fn blaschke_at(nodes: &[Complex64], z: Complex64) -> Complex64 {
    product_of(
        nodes.iter().map(|&w| blaschke_factor(w, z)),
        nodes.len(),
    )
}

/// `sum_j log |(z - z_j)/(1 - conj(z_j) z)|`; `-inf` at a node.
pub fn blaschke_log_modulus(cfg: &Configuration, z: DiscPoint) -> f64 {
    log_modulus_at(cfg.nodes(), z.0)
}

pub(crate) fn log_modulus_at(nodes: &[Complex64], z: Complex64) -> f64 {
    nodes.iter().map(|&w| gleason(z, w).ln()).sum()
}

/// `B_k(Z_n, z)`: the product with factor `k` (0-based) left out.
pub fn blaschke_eval_excluding(cfg: &Configuration, k: usize, z: DiscPoint) -> Result<Complex64> {
    cfg.check_index(k)?;
    Ok(excluding_at(cfg.nodes(), k, z.0))
}

pub(crate) fn excluding_at(nodes: &[Complex64], k: usize, z: Complex64) -> Complex64 {
    product_of(
        nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &w)| blaschke_factor(w, z)),
        nodes.len().saturating_sub(1),
    )
}

/// `B_k(Z_n, z)` for every `k` at once via prefix and suffix products.
pub(crate) fn all_excluding_at(nodes: &[Complex64], z: Complex64) -> Vec<Complex64> {
    let n = nodes.len();
    if n <= DIRECT_PRODUCT_MAX {
        let factors: Vec<Complex64> = nodes.iter().map(|&w| blaschke_factor(w, z)).collect();
        let mut out = vec![Complex64::new(1.0, 0.0); n];
        let mut acc = Complex64::new(1.0, 0.0);
        for k in 0..n {
            out[k] = acc;
            acc *= factors[k];
        }
        acc = Complex64::new(1.0, 0.0);
        for k in (0..n).rev() {
            out[k] *= acc;
            acc *= factors[k];
        }
        out
    } else {
        let factors: Vec<LogProduct> = nodes
            .iter()
            .map(|&w| LogProduct::of(blaschke_factor(w, z)))
            .collect();
        let mut partial = vec![LogProduct::ONE; n];
        let mut acc = LogProduct::ONE;
        for k in 0..n {
            partial[k] = acc;
            acc = acc.mul(factors[k]);
        }
        acc = LogProduct::ONE;
        for k in (0..n).rev() {
            partial[k] = partial[k].mul(acc);
            acc = acc.mul(factors[k]);
        }
        partial.into_iter().map(LogProduct::to_complex).collect()
    }
}

/// Upper bound `exp(-(1-|z|^2)/4 * sum_j (1-|z_j|))` on `|B(Z_n, z)|`,
/// doubled when one factor is excluded. The sum always runs over all nodes.
pub fn blaschke_upper_bound(cfg: &Configuration, z: DiscPoint, excluded: Option<usize>) -> f64 {
    let mass: f64 = cfg.nodes().iter().map(|w| 1.0 - w.norm()).sum();
    let bound = (-(1.0 - z.0.norm_sqr()) / 4.0 * mass).exp();
    match excluded {
        Some(_) => 2.0 * bound,
        None => bound,
    }
}

/// The normalizing weight `q`.
///
/// `BoundaryPolynomial` evaluates `prod (z - a_i) / normalizer` where the
/// normalizer is the maximum of the unnormalized product over the unit
/// circle, so that `sup |q| = 1` on the closed disc.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QWeight {
    #[default]
    Unit,
    BoundaryPolynomial {
        anchors: Vec<Complex64>,
        normalizer: f64,
    },
}

impl QWeight {
    pub fn unit() -> Self {
        QWeight::Unit
    }

    /// Builds `q(z) = prod (z - a_i) / normalizer`; an empty anchor list
    /// yields the unit weight.
    pub fn boundary_polynomial(anchors: Vec<Complex64>) -> Result<Self> {
        if anchors.is_empty() {
            return Ok(QWeight::Unit);
        }
        if let Some(a) = anchors.iter().find(|a| (a.norm() - 1.0).abs() > ANCHOR_TOL) {
            return Err(Error::Domain(format!("anchor {a} is not unimodular")));
        }
        let raw = |theta: f64| raw_poly(&anchors, Complex64::from_polar(1.0, theta)).norm();
        let (_, normalizer) = circle_sup(raw, Q_GRID);
        Ok(QWeight::BoundaryPolynomial {
            anchors,
            normalizer,
        })
    }

    /// Anchors given as angles (radians) on the unit circle.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        Self::boundary_polynomial(
            angles
                .iter()
                .map(|&t| Complex64::from_polar(1.0, t))
                .collect(),
        )
    }

    pub fn anchors(&self) -> &[Complex64] {
        match self {
            QWeight::Unit => &[],
            QWeight::BoundaryPolynomial { anchors, .. } => anchors,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            QWeight::Unit => Complex64::new(1.0, 0.0),
            QWeight::BoundaryPolynomial {
                anchors,
                normalizer,
            } => raw_poly(anchors, z) / *normalizer,
        }
    }

    #[inline]
    pub fn modulus(&self, z: Complex64) -> f64 {
        match self {
            QWeight::Unit => 1.0,
            _ => self.eval(z).norm(),
        }
    }

    /// `||q||_{inf, U}`, the boundary maximum recomputed on the refined grid.
    pub fn sup_norm(&self) -> f64 {
        match self {
            QWeight::Unit => 1.0,
            _ => circle_sup(|t| self.modulus(Complex64::from_polar(1.0, t)), Q_GRID).1,
        }
    }
}

fn raw_poly(anchors: &[Complex64], z: Complex64) -> Complex64 {
    anchors
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, &a| acc * (z - a))
}

/// `B_q(Z_n, z) = B(Z_n, z) q(z)`, or `B_{q,k}` when `excluded = Some(k)`.
pub fn bq_eval(
    cfg: &Configuration,
    q: &QWeight,
    z: DiscPoint,
    excluded: Option<usize>,
) -> Result<Complex64> {
    let b = match excluded {
        Some(k) => blaschke_eval_excluding(cfg, k, z)?,
        None => blaschke_eval(cfg, z),
    };
    Ok(b * q.eval(z.0))
}

/// Number of top grid maxima refined by golden-section search.
const REFINED_PEAKS: usize = 8;

/// Maximum of a continuous `2π`-periodic function.
///
/// Samples a uniform grid of `grid` points, then refines the best few grid
/// local maxima by golden-section search on the two adjacent cells. Returns
/// `(argmax, max)`.
pub fn circle_sup<F: Fn(f64) -> f64>(f: F, grid: usize) -> (f64, f64) {
    let grid = grid.max(3);
    let step = TAU / grid as f64;
    let values: Vec<f64> = (0..grid).map(|i| f(i as f64 * step)).collect();
    let mut peaks: Vec<usize> = (0..grid)
        .filter(|&i| {
            let prev = values[(i + grid - 1) % grid];
            let next = values[(i + 1) % grid];
            values[i] >= prev && values[i] >= next
        })
        .collect();
    if peaks.is_empty() {
        peaks.push(0);
    }
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    peaks.truncate(REFINED_PEAKS);

    let mut best = (0.0, f64::NEG_INFINITY);
    for &i in &peaks {
        if values[i] > best.1 {
            best = (i as f64 * step, values[i]);
        }
        let lo = (i as f64 - 1.0) * step;
        let hi = (i as f64 + 1.0) * step;
        let (t, v) = golden_max(&f, lo, hi, 1e-13);
        if v > best.1 {
            best = (t.rem_euclid(TAU), v);
        }
    }
    best
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximum of `|B(Z_n, z)|` over the disc `|z| <= radius`, attained on the
/// rim by the maximum modulus principle.
pub fn max_modulus_on_disc(cfg: &Configuration, radius: f64, grid: usize) -> f64 {
    if cfg.is_empty() {
        return 1.0;
    }
    circle_sup(
        |t| blaschke_at(cfg.nodes(), Complex64::from_polar(radius, t)).norm(),
        grid,
    )
    .1
}

/// Angle normalized to `[0, 2π)`.
#[inline]
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Distance between two angles measured along the circle, in `[0, π]`.
#[inline]
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d).min(PI)
}
