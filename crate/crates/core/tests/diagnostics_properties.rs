mod common;

use std::f64::consts::TAU;

use common::point_set;
use hardy_core::diagnostics::{e_r_measure, rho_of_theta};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn arc_membership_matches_rho(set in point_set(0.99, 1..=15), r in 0.0f64..0.99, thetas in prop::collection::vec(0.0..TAU, 100)) {
        let (arcs, _) = e_r_measure(&set, r);
        for t in thetas {
            prop_assert_eq!(arcs.contains(t), rho_of_theta(&set, t) > r, "theta {}", t);
        }
    }

    #[test]
    fn arcs_contract_as_r_grows(set in point_set(0.99, 1..=15), a in 0.0f64..0.99, b in 0.0f64..0.99) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (outer, m_lo) = e_r_measure(&set, lo);
        let (inner, m_hi) = e_r_measure(&set, hi);
        prop_assert!(inner.is_subset_of(&outer));
        prop_assert!(m_hi <= m_lo + 1e-15);
    }
}
