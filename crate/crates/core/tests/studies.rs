// SPDX-License-Identifier: MIT OR Apache-2.0

use ebs_core::bench::{hit_ratio, run_nonstationary_study, run_stationary_study, StudyConfig};
use ebs_core::{Method, SimSeed};
use proptest::prelude::*;

#[test]
fn eq10_ebs_beats_bs_and_b1_is_unbiased() {
    let cfg = StudyConfig::new();
    let r = run_nonstationary_study(&["EQ10", "B1"], &[Method::Bs, Method::Ebs], 40, SimSeed::new(8), &cfg).unwrap();
    let hr = |m: &str, k: Method| r.row(m, k).unwrap().hit_ratio.unwrap();
    assert!(hr("EQ10", Method::Ebs) > hr("EQ10", Method::Bs));
    for k in [Method::Bs, Method::Ebs] {
        let row = r.row("B1", k).unwrap();
        assert!(row.bias.unwrap().abs() <= 0.2, "{row:?}");
        assert!(row.mae.unwrap() >= row.bias.unwrap().abs());
        assert!(row.mse.unwrap() >= 0.0);
    }
}

#[test]
fn runtime_ordering_on_eq10() {
    let cfg = StudyConfig::new();
    let r = run_nonstationary_study(&["EQ10"], &Method::ALL, 15, SimSeed::new(9), &cfg).unwrap();
    let t = |k: Method| r.row("EQ10", k).unwrap().median_runtime_secs;
    assert!(t(Method::Bs) < t(Method::Ebs), "{:?}", r.rows);
    assert!(t(Method::Ebs) < t(Method::Wbs), "{:?}", r.rows);
}

#[test]
fn reports_are_deterministic() {
    let cfg = StudyConfig::new();
    let run = || {
        let mut r = run_stationary_study(&["S2", "S5"], &Method::ALL, 5, SimSeed::new(10), &cfg).unwrap();
        for row in &mut r.rows {
            row.mean_runtime_secs = 0.0;
            row.median_runtime_secs = 0.0;
        }
        r
    };
    assert_eq!(run(), run());
}

fn sorted_unique(max: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::btree_set(1..max, 0..12).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #[test]
    fn hit_ratio_bounds(truth in sorted_unique(2000), est in sorted_unique(2000)) {
        let hr = hit_ratio(&truth, &est, 2000, 0.01);
        prop_assert!((0.0..=1.0).contains(&hr));
        let d_max = 20;
        let perfect = truth.len() == est.len()
            && truth.iter().zip(&est).all(|(a, b)| a.abs_diff(*b) <= d_max)
            && truth.windows(2).all(|w| w[1] - w[0] > 2 * d_max);
        if perfect {
            prop_assert_eq!(hr, 1.0);
        }
        if truth.len() != est.len() {
            prop_assert!(hr < 1.0);
        }
    }

    #[test]
    fn identical_sets_score_one(truth in sorted_unique(5000)) {
        prop_assert_eq!(hit_ratio(&truth, &truth, 5000, 0.01), 1.0);
    }
}
