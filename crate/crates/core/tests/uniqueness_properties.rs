mod common;

use common::{dp, point};
use hardy_core::uniqueness::{block_partition, eta_weights, uniqueness_audit};
use hardy_core::Complex64;
use proptest::prelude::*;

proptest! {
    #[test]
    fn blocks_are_minimal_and_long_enough(moduli in prop::collection::vec(0.0f64..0.99, 1..=400)) {
        let Ok(part) = block_partition(&moduli) else {
            let total: f64 = moduli.iter().map(|r| 1.0 - r).sum();
            prop_assert!(total < 1.0);
            return Ok(());
        };
        for (i, range) in part.blocks().enumerate() {
            let k = (i + 1) as f64;
            let mass: f64 = moduli[range.clone()].iter().map(|r| 1.0 - r).sum();
            prop_assert!(mass >= k);
            let short: f64 = moduli[range.start..range.end - 1].iter().map(|r| 1.0 - r).sum();
            prop_assert!(short < k);
            prop_assert!(range.len() > i);
        }
    }

    #[test]
    fn audit_bound_matches_recomputation(
        zs in prop::collection::vec(point(0.9), 4..=60),
        vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 60),
        probe in point(0.5),
    ) {
        let points: Vec<_> = zs.iter().map(|&z| dp(z)).collect();
        let Ok(weights) = eta_weights(&points) else { return Ok(()); };
        let samples: Vec<Complex64> = vals[..points.len()].iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let audit = uniqueness_audit(&points, &samples, &weights, dp(probe)).unwrap();
        for (b, range) in audit.blocks.iter().zip(weights.partition.blocks()) {
            let m = range.len() as f64;
            let mass: f64 = range.clone().map(|j| 1.0 - zs[j].norm()).sum();
            let weighted: f64 = range.clone().map(|j| samples[j].norm() / (m * weights.eta[j])).sum();
            let expected = (1.0 + weighted) * 2.0 * (-(1.0 - probe.norm_sqr()) / 4.0 * mass).exp();
            prop_assert!((b.bound - expected).abs() <= 1e-12 * expected.max(1.0));
        }
    }
}
