// SPDX-License-Identifier: MIT OR Apache-2.0

use ebs_core::calibrate::{calibrate_c1, grid_search_operating_point, NullModel};
use ebs_core::segment::{detect, DetectorConfig, EbsConfig};
use ebs_core::{par, CalibrationResult, Method, PiecewiseSpec, SimSeed};
use ebs_core::{simulate_tvacd, AcdParams, TransformConfig};

#[test]
fn shipped_file_regenerates_exactly() {
    let shipped = CalibrationResult::shipped();
    let grid: Vec<usize> = shipped.grid.iter().map(|g| g.0 as usize).collect();
    let again = calibrate_c1(&grid, shipped.reps, shipped.alpha, SimSeed::new(shipped.seed)).unwrap();
    assert_eq!(again, shipped);
    assert_eq!(again.to_text(), include_str!("../data/c1_default.txt"));
}

#[test]
fn calibration_is_deterministic() {
    let g = [500, 1000, 2000, 4000];
    let a = calibrate_c1(&g, 30, 0.05, SimSeed::new(4)).unwrap();
    let b = calibrate_c1(&g, 30, 0.05, SimSeed::new(4)).unwrap();
    assert_eq!(a, b);
    let c = calibrate_c1(&g, 30, 0.05, SimSeed::new(5)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn stricter_level_raises_the_curve() {
    let g = [500, 1000, 2000, 4000, 8000];
    let seed = SimSeed::new(20_240_601);
    let a05 = calibrate_c1(&g, 100, 0.05, seed).unwrap();
    let a01 = calibrate_c1(&g, 100, 0.01, seed).unwrap();
    for &t in &g {
        assert!(a01.c1(t as f64) >= a05.c1(t as f64), "T = {t}");
    }
}

#[test]
fn shipped_curve_is_non_increasing_and_clamped() {
    let cal = CalibrationResult::shipped();
    let ts: Vec<f64> = cal.grid.iter().map(|g| g.0).collect();
    for w in ts.windows(2) {
        assert!(cal.c1(w[1]) <= cal.c1(w[0]));
    }
    let top = *ts.last().unwrap();
    assert_eq!(cal.c1(100_000.0), cal.c1(top));
}

#[test]
fn shipped_threshold_keeps_bs_size() {
    // fresh seeds, distinct from those used to build the calibration
    let reps = 200;
    let params = AcdParams::new(1.0, vec![0.1], vec![0.7]).unwrap();
    for &n in &[1000usize, 3000] {
        let spec = PiecewiseSpec::stationary(params.clone(), n).unwrap();
        let hits: Vec<bool> = par::map_indexed(reps, |r| {
            let d = simulate_tvacd(&spec, SimSeed::new(0xF00D).derive(n as u64).derive(r as u64));
            let p = ebs_core::fit_and_transform(&d, &TransformConfig::default()).unwrap();
            !detect(&p.series, &DetectorConfig::with_method(Method::Bs)).unwrap().is_empty()
        });
        let rate = hits.iter().filter(|&&h| h).count() as f64 / reps as f64;
        assert!(rate <= 0.10, "T = {n}: BS false-positive rate {rate}");
    }
}

#[test]
fn operating_point_grid() {
    let base = EbsConfig::default();
    let rows = grid_search_operating_point(
        &[1000],
        &[100, 500, 5000],
        &[0.0, 0.01, 0.05, 1.0],
        60,
        SimSeed::new(31),
        &base,
        &NullModel::default(),
    )
    .unwrap();
    assert_eq!(rows.len(), 12);
    let rate = |m: usize, p: f64| rows.iter().find(|r| r.draws == m && r.pi_thr == p).unwrap().false_positive_rate;
    for m in [100, 500, 5000] {
        assert_eq!(rate(m, 1.0), 0.0);
        assert!(rate(m, 0.05) < rate(m, 0.01));
        assert!(rate(m, 0.01) <= rate(m, 0.0));
    }
    let at05: Vec<f64> = [100, 500, 5000].iter().map(|&m| rate(m, 0.05)).collect();
    let spread = at05.iter().cloned().fold(f64::MIN, f64::max) - at05.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread <= 0.1, "{at05:?}");
}
