//! Finite-horizon geometry of a candidate set: mass sums, Stolz cones, the
//! angular reach `rho(theta)` and the arcs `E_r = {theta : rho(theta) > r}`.

use serde::Serialize;
use std::f64::consts::TAU;

use crate::disc::{circular_distance, normalize_angle, DiscPoint};
use crate::error::{Error, Result};
use crate::extremal::PointSet;

/// `sum_{j < upto} (1 - |z_j|)`.
pub fn non_blaschke_sum(points: &[DiscPoint], upto: usize) -> Result<f64> {
    if upto > points.len() {
        return Err(Error::IndexOutOfRange {
            index: upto,
            len: points.len(),
        });
    }
    Ok(points[..upto].iter().fold(0.0, |acc, p| acc + (1.0 - p.modulus())))
}

/// All partial sums `S_1, ..., S_n` of `1 - |z_j|`.
pub fn non_blaschke_curve(points: &[DiscPoint]) -> Vec<f64> {
    points
        .iter()
        .scan(0.0, |acc, p| {
            *acc += 1.0 - p.modulus();
            Some(*acc)
        })
        .collect()
}

/// Whether `|z - vertex| <= K (1 - |z|)`.
pub fn stolz_membership(z: DiscPoint, vertex: DiscPoint, aperture: f64) -> Result<bool> {
    if !(aperture >= 1.0) {
        return Err(Error::OutOfRange {
            name: "K",
            value: aperture,
            range: "[1, ∞)".to_string(),
        });
    }
    if (vertex.modulus() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "Stolz vertex {} is not on the unit circle",
            vertex.value()
        )));
    }
    Ok((z.value() - vertex.value()).norm() <= aperture * (1.0 - z.modulus()))
}

/// `max { r_j : |theta - phi_j| < 1 - r_j }` over `r_j e^{i phi_j}` in the set, or 0.
pub fn rho_of_theta(set: &PointSet, theta: f64) -> f64 {
    set.points()
        .iter()
        .filter(|z| circular_distance(theta, z.arg()) < 1.0 - z.norm())
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Disjoint open arcs of the circle, as sorted intervals of `[0, 2π)`.
/// An arc through angle 0 is split there; `contains_zero` remembers that
/// 0 itself belongs to the set.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ArcSet {
    intervals: Vec<(f64, f64)>,
    contains_zero: bool,
}

impl ArcSet {
    /// Union of open arcs `(center - half, center + half)` with `half < π`.
    pub fn from_arcs(arcs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut pieces = Vec::new();
        let mut contains_zero = false;
        for (center, half) in arcs {
            if !(half > 0.0) {
                continue;
            }
            let c = normalize_angle(center);
            let lo = c - half;
            let hi = c + half;
            if lo < 0.0 {
                contains_zero = true;
                pieces.push((lo + TAU, TAU));
                pieces.push((0.0, hi));
            } else if hi > TAU {
                contains_zero = true;
                pieces.push((lo, TAU));
                pieces.push((0.0, hi - TAU));
            } else {
                pieces.push((lo, hi));
            }
        }
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for (lo, hi) in pieces {
            match intervals.last_mut() {
                Some(last) if lo < last.1 => last.1 = last.1.max(hi),
                _ => intervals.push((lo, hi)),
            }
        }
        ArcSet {
            intervals,
            contains_zero,
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains_zero(&self) -> bool {
        self.contains_zero
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().fold(0.0, |acc, (lo, hi)| acc + (hi - lo))
    }

    pub fn contains(&self, theta: f64) -> bool {
        let t = normalize_angle(theta);
        if t == 0.0 {
            return self.contains_zero;
        }
        let idx = self.intervals.partition_point(|iv| iv.0 < t);
        idx > 0 && t < self.intervals[idx - 1].1
    }

    /// Every interval of `self` lies inside an interval of `other`.
    pub fn is_subset_of(&self, other: &ArcSet) -> bool {
        (!self.contains_zero || other.contains_zero)
            && self.intervals.iter().all(|&(lo, hi)| {
                other
                    .intervals
                    .iter()
                    .any(|&(olo, ohi)| olo <= lo && hi <= ohi)
            })
    }

    /// Rows `theta_lo,theta_hi`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_lo,theta_hi\n");
        for (lo, hi) in &self.intervals {
            out.push_str(&format!("{lo:.16e},{hi:.16e}\n"));
        }
        out
    }
}

/// `E_r` and its arc-length measure.
pub fn e_r_measure(set: &PointSet, r: f64) -> (ArcSet, f64) {
    let arcs = ArcSet::from_arcs(
        set.points()
            .iter()
            .filter(|z| z.norm() > r)
            .map(|z| (z.arg(), 1.0 - z.norm())),
    );
    let m = arcs.measure();
    (arcs, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn polar_set(pts: &[(f64, f64)]) -> PointSet {
        PointSet::with_closure(
            pts.iter().map(|&(r, t)| DiscPoint::from_polar(r, t).unwrap()).collect(),
            "t",
        )
        .unwrap()
    }

    #[test]
    fn mass_sums() {
        let geo: Vec<DiscPoint> = (1..=10)
            .map(|j| DiscPoint::real(1.0 - 2f64.powi(-j)).unwrap())
            .collect();
        assert!((non_blaschke_sum(&geo, 10).unwrap() - (1.0 - 2f64.powi(-10))).abs() < 1e-15);
        let half = vec![DiscPoint::real(0.5).unwrap(); 10];
        assert_eq!(non_blaschke_sum(&half, 10).unwrap(), 5.0);
        assert_eq!(non_blaschke_sum(&half, 0).unwrap(), 0.0);
        assert!(non_blaschke_sum(&half, 11).is_err());
        let curve = non_blaschke_curve(&geo);
        assert!(curve.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn stolz_examples() {
        let one = DiscPoint::real(1.0).unwrap();
        let z = DiscPoint::real(0.9).unwrap();
        assert!(stolz_membership(z, one, 1.0).unwrap());
        let z = DiscPoint::from_polar(0.9, 0.3).unwrap();
        assert!(!stolz_membership(z, one, 1.0).unwrap());
        let i = DiscPoint::from_polar(1.0, PI / 2.0).unwrap();
        assert!(stolz_membership(DiscPoint::ORIGIN, i, 1.0).unwrap());
        assert!(stolz_membership(DiscPoint::ORIGIN, one, 0.5).is_err());
        assert!(stolz_membership(DiscPoint::ORIGIN, z, 2.0).is_err());
    }

    #[test]
    fn rho_examples() {
        let e = polar_set(&[(0.5, 0.0)]);
        assert_eq!(rho_of_theta(&e, 0.0), 0.5);
        assert_eq!(rho_of_theta(&e, 0.6), 0.0);
        let e = polar_set(&[(0.5, 0.0), (0.9, 0.0)]);
        assert_eq!(rho_of_theta(&e, 0.05), 0.9);
        assert_eq!(rho_of_theta(&e, TAU - 0.05), 0.9);
    }

    #[test]
    fn e_r_examples() {
        let ray: Vec<(f64, f64)> = (1..=10).map(|j| (1.0 - 1.0 / j as f64, 0.0)).collect();
        let (arcs, m) = e_r_measure(&polar_set(&ray), 0.8);
        assert!((m - 1.0 / 3.0).abs() <= 1e-15, "{m}");
        assert!(arcs.contains_zero() && arcs.contains(0.0));
        assert_eq!(arcs.intervals().len(), 2);

        let (arcs, m) = e_r_measure(&polar_set(&ray), 0.95);
        assert!(arcs.is_empty() && m == 0.0);

        let (arcs, m) = e_r_measure(&polar_set(&[(0.9, 0.0), (0.9, PI)]), 0.5);
        assert!((m - 0.4).abs() < 1e-14);
        assert_eq!(arcs.intervals().len(), 3);
        assert!(arcs.contains(PI) && !arcs.contains(PI / 2.0));
    }

    #[test]
    fn merge_overlapping_and_touching() {
        let a = ArcSet::from_arcs([(1.0, 0.2), (1.3, 0.2), (2.0, 0.1)]);
        assert_eq!(a.intervals().len(), 2);
        assert!((a.measure() - 0.9).abs() < 1e-15);
        let t = ArcSet::from_arcs([(1.0, 0.5), (2.0, 0.5)]);
        assert_eq!(t.intervals().len(), 2);
        assert!(!t.contains(1.5));
    }

    #[test]
    fn membership_matches_rho() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..20 {
            let pts: Vec<(f64, f64)> = (0..12)
                .map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..TAU)))
                .collect();
            let e = polar_set(&pts);
            let r = rng.gen_range(0.0..0.9);
            let (arcs, _) = e_r_measure(&e, r);
            for _ in 0..500 {
                let t = rng.gen_range(0.0..TAU);
                assert_eq!(arcs.contains(t), rho_of_theta(&e, t) > r);
            }
        }
    }

    #[test]
    fn contraction_in_r() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..50 {
            let pts: Vec<(f64, f64)> = (0..15)
                .map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..TAU)))
                .collect();
            let e = polar_set(&pts);
            let r1 = rng.gen_range(0.0..0.9);
            let r2 = rng.gen_range(r1..1.0);
            let (a1, m1) = e_r_measure(&e, r1);
            let (a2, m2) = e_r_measure(&e, r2);
            assert!(a2.is_subset_of(&a1));
            assert!(m2 <= m1 + 1e-15);
        }
    }
}
