//! Interpolating recovery of an `H^p` function from its values on a finite
//! node configuration, with the matching a-priori error bound
//!
//! ```text
//! |f(z) - sum_k c_{p,k}(Z_n, z) f(z_k)| <= ||f||_p |B(Z_n, z)| / (1 - |z|^2)^{1/p}.
//! ```
//!
//! The coefficient formula contains `B(Z_n, z) / (z - z_k)`, a removable
//! singularity at the nodes. It is always evaluated as the equivalent
//! `B_k(Z_n, z) / (1 - conj(z_k) z)`, which is finite everywhere.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::disc::{
    all_excluding_at, blaschke_at, excluding_at, log_modulus_at, Configuration, DiscPoint,
    DIRECT_PRODUCT_MAX,
};
use crate::error::{Error, Result};

/// `|B_k(Z_n, z_k)|` below this marks coalescent nodes.
pub const DEGENERATE_THRESHOLD: f64 = 1e-300;

/// Hardy exponent `p` in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct PIndex(f64);

impl PIndex {
    pub const ONE: PIndex = PIndex(1.0);
    pub const TWO: PIndex = PIndex(2.0);
    pub const INFINITY: PIndex = PIndex(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::OutOfRange {
                name: "p",
                value: p,
                range: "[1, inf]".to_string(),
            });
        }
        Ok(PIndex(p))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `1/p`, zero at `p = ∞`.
    #[inline]
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    /// `(1 - |z|^2)^{1/p}`, identically 1 at `p = ∞`.
    #[inline]
    pub fn weight(self, z: Complex64) -> f64 {
        if self.is_infinite() {
            1.0
        } else {
            (1.0 - z.norm_sqr()).powf(self.reciprocal())
        }
    }

    pub(crate) fn power(self) -> Power {
        if self.is_infinite() {
            Power::MinusOne
        } else if self.0 == 2.0 {
            Power::Zero
        } else {
            Power::Real((2.0 - self.0) / self.0)
        }
    }
}

impl fmt::Display for PIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for PIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for PIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(p) => p,
            Raw::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity") => f64::INFINITY,
            Raw::Text(t) => return Err(serde::de::Error::custom(format!("invalid p: {t}"))),
        };
        PIndex::new(p).map_err(serde::de::Error::custom)
    }
}

/// Exponent `(2 - p)/p` of the middle coefficient factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Power {
    /// `p = 2`: the factor is identically 1.
    Zero,
    /// `p = ∞`: the exact limit `-1`.
    MinusOne,
    Real(f64),
}

impl Power {
    #[inline]
    fn apply(self, base: Complex64) -> Complex64 {
        match self {
            Power::Zero => Complex64::new(1.0, 0.0),
            Power::MinusOne => base.inv(),
            // principal branch; Re(base) > 0 for interior points
            Power::Real(e) => base.powf(e),
        }
    }
}

/// Reconstruction at a single point together with its error bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryResult {
    pub value: Complex64,
    pub error_bound: f64,
    pub coefficients: Vec<Complex64>,
}

/// The recovery operator for a fixed configuration and exponent, with the
/// node-only factors `(1 - |z_k|^2) / B_k(Z_n, z_k)` precomputed.
#[derive(Clone, Debug)]
pub struct RecoveryOperator<'a> {
    cfg: &'a Configuration,
    p: PIndex,
    node_scale: Vec<Complex64>,
}

impl<'a> RecoveryOperator<'a> {
    pub fn new(cfg: &'a Configuration, p: PIndex) -> Result<Self> {
        if cfg.is_empty() {
            return Err(Error::Empty("recovery needs at least one node"));
        }
        let nodes = cfg.nodes();
        let mut node_scale = Vec::with_capacity(nodes.len());
        for (k, &zk) in nodes.iter().enumerate() {
            let denom = excluding_at(nodes, k, zk);
            let small = if nodes.len() <= DIRECT_PRODUCT_MAX {
                denom.norm() < DEGENERATE_THRESHOLD
            } else {
                let others: Vec<Complex64> = nodes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &w)| w)
                    .collect();
                log_modulus_at(&others, zk) < DEGENERATE_THRESHOLD.ln()
            };
            if small {
                return Err(Error::Degenerate(format!(
                    "|B_k(Z_n, z_k)| underflows at node {k} ({zk})"
                )));
            }
            node_scale.push((1.0 - zk.norm_sqr()) / denom);
        }
        Ok(RecoveryOperator { cfg, p, node_scale })
    }

    pub fn configuration(&self) -> &Configuration {
        self.cfg
    }

    pub fn p(&self) -> PIndex {
        self.p
    }

    /// `c_{p,k}(Z_n, z)` for every node.
    pub fn coefficients(&self, z: DiscPoint) -> Result<Vec<Complex64>> {
        require_interior(z)?;
        Ok(self.coefficients_with(z.value(), self.p.power()))
    }

    pub(crate) fn coefficients_with(&self, z: Complex64, power: Power) -> Vec<Complex64> {
        let nodes = self.cfg.nodes();
        let excluded = all_excluding_at(nodes, z);
        let one_minus_z2 = 1.0 - z.norm_sqr();
        nodes
            .iter()
            .zip(&self.node_scale)
            .zip(excluded)
            .map(|((&zk, &scale), bk)| {
                let middle = power.apply((1.0 - z.conj() * zk) / one_minus_z2);
                scale * middle * bk / (1.0 - zk.conj() * z)
            })
            .collect()
    }

    /// `sum_k |c_{p,k}(Z_n, z)|`.
    pub fn coefficient_mass(&self, z: Complex64) -> f64 {
        self.coefficients_with(z, self.p.power())
            .iter()
            .map(|c| c.norm())
            .sum()
    }

    pub fn recover(&self, samples: &[Complex64], z: DiscPoint) -> Result<Complex64> {
        check_samples(self.cfg, samples)?;
        let coeffs = self.coefficients(z)?;
        Ok(dot(&coeffs, samples))
    }

    pub fn recover_with_bound(
        &self,
        samples: &[Complex64],
        z: DiscPoint,
        norm_p: f64,
    ) -> Result<RecoveryResult> {
        check_samples(self.cfg, samples)?;
        let coefficients = self.coefficients(z)?;
        Ok(RecoveryResult {
            value: dot(&coefficients, samples),
            error_bound: recovery_error_bound(self.cfg, z, self.p, norm_p),
            coefficients,
        })
    }
}

fn require_interior(z: DiscPoint) -> Result<()> {
    if !z.is_interior() {
        return Err(Error::Domain(format!(
            "recovery point {} is not interior",
            z.value()
        )));
    }
    Ok(())
}

fn check_samples(cfg: &Configuration, samples: &[Complex64]) -> Result<()> {
    if samples.len() != cfg.len() {
        return Err(Error::LengthMismatch {
            expected: cfg.len(),
            got: samples.len(),
        });
    }
    Ok(())
}

fn dot(coeffs: &[Complex64], samples: &[Complex64]) -> Complex64 {
    coeffs
        .iter()
        .zip(samples)
        .fold(Complex64::new(0.0, 0.0), |acc, (c, s)| acc + c * s)
}

pub fn recovery_coefficients(
    cfg: &Configuration,
    z: DiscPoint,
    p: PIndex,
) -> Result<Vec<Complex64>> {
    RecoveryOperator::new(cfg, p)?.coefficients(z)
}

pub fn recover(
    cfg: &Configuration,
    samples: &[Complex64],
    z: DiscPoint,
    p: PIndex,
) -> Result<Complex64> {
    check_samples(cfg, samples)?;
    RecoveryOperator::new(cfg, p)?.recover(samples, z)
}

/// `norm_p |B(Z_n, z)| / (1 - |z|^2)^{1/p}`.
pub fn recovery_error_bound(cfg: &Configuration, z: DiscPoint, p: PIndex, norm_p: f64) -> f64 {
    let b = blaschke_at(cfg.nodes(), z.value()).norm();
    if b == 0.0 {
        return 0.0;
    }
    norm_p * b / p.weight(z.value())
}
