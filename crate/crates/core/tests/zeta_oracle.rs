//! Z(t), ϑ(t) and Gram points against frozen 40-digit mpmath values
//! (see tools/oracle_values.py).

use std::path::PathBuf;

use zl_core::roots::{brent, Tolerance};
use zl_core::zeta::{gram_point, hardy_z, theta, EvalConfig, HardyZ, Method};

fn data(name: &str) -> Vec<Vec<f64>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name);
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records()
        .map(|r| {
            r.unwrap()
                .iter()
                .map(|x| x.parse::<f64>().unwrap())
                .collect()
        })
        .collect()
}

#[test]
fn random_points_match_oracle() {
    let cfg = EvalConfig::default();
    let mut worst = 0.0f64;
    for row in data("z_random.csv") {
        let (t, want) = (row[0], row[1]);
        let got = hardy_z(t, &cfg).unwrap();
        let err = (got.z - want).abs();
        worst = worst.max(err);
        assert!(err <= 1e-6, "t = {t}: {} vs {want}", got.z);
        assert!(err <= cfg.target_abs_error.max(got.est_error), "t = {t}");
    }
    assert!(worst < 1e-6);
}

#[test]
fn spot_values_match_oracle() {
    let cfg = EvalConfig::default();
    for row in data("z_spot.csv") {
        let (t, want_z, want_theta) = (row[0], row[1], row[2]);
        let got = hardy_z(t, &cfg).unwrap();
        assert!(
            (got.z - want_z).abs() <= cfg.target_abs_error,
            "Z({t}) = {} vs {want_z}",
            got.z
        );
        let th = theta(t, &cfg).unwrap();
        assert!(
            (th - want_theta).abs() <= 1e-9 * want_theta.abs().max(1.0),
            "theta({t})"
        );
    }
}

#[test]
fn zeta_one_half() {
    let z = hardy_z(0.0, &EvalConfig::default()).unwrap();
    assert_eq!(z.method, Method::EulerMaclaurin);
    assert!((z.z + 1.460_354_508_809_586_8).abs() < 1e-12);
}

#[test]
fn first_zero() {
    let cfg = EvalConfig::default();
    let z = HardyZ::new(cfg).unwrap();
    assert!(hardy_z(14.134725, &cfg).unwrap().z.abs() < 1e-5);
    let root = brent(|t| z.value(t), 14.0, 14.3, Tolerance::absolute(1e-12)).unwrap();
    assert!((root - 14.134_725_141_734_693).abs() < 1e-9, "{root}");
}

#[test]
fn every_rs_order_is_within_its_bound() {
    // Forcing RS from t = 200 on: each order must respect its own error model.
    for order in 0..=4 {
        let cfg = EvalConfig {
            rs_correction_order: order,
            target_abs_error: 1.0,
            ..Default::default()
        };
        for row in data("z_random.csv").iter().chain(data("z_spot.csv").iter()) {
            let t = row[0];
            if t < 200.0 {
                continue;
            }
            let got = hardy_z(t, &cfg).unwrap();
            assert_eq!(got.method, Method::RiemannSiegel);
            assert!(
                (got.z - row[1]).abs() <= got.est_error,
                "order {order}, t = {t}: err {:e} bound {:e}",
                (got.z - row[1]).abs(),
                got.est_error
            );
        }
    }
}

#[test]
fn method_seam_is_continuous() {
    // Force RS right above the threshold so both routes meet at the seam.
    for order in [2usize, 4] {
        let cfg = EvalConfig {
            rs_correction_order: order,
            target_abs_error: 1e-3,
            ..Default::default()
        };
        let eps = 1e-3;
        let below = hardy_z(cfg.em_threshold - eps, &cfg).unwrap();
        let above = hardy_z(cfg.em_threshold + eps, &cfg).unwrap();
        assert_eq!(below.method, Method::EulerMaclaurin);
        assert_eq!(above.method, Method::RiemannSiegel);
        // the true Z moves by |Z'|·2ε ≈ 3e-3 across the seam
        let slope = (above.z - below.z) / (2.0 * eps);
        let predicted = below.z + slope * 2.0 * eps;
        assert!((above.z - predicted).abs() <= 10.0 * cfg.target_abs_error);
        assert!((above.z - below.z).abs() <= 10.0 * cfg.target_abs_error + 2.0 * eps * 1.5);
    }
    // Default config: the seam is EM on both sides, so it is exact to target.
    let cfg = EvalConfig::default();
    let a = hardy_z(29.999, &cfg).unwrap();
    let b = hardy_z(30.001, &cfg).unwrap();
    let want = data("z_spot.csv");
    let oracle = |t: f64| want.iter().find(|r| r[0] == t).unwrap()[1];
    assert!((a.z - oracle(29.999)).abs() <= cfg.target_abs_error);
    assert!((b.z - oracle(30.001)).abs() <= cfg.target_abs_error);
}

#[test]
fn gram_points_match_oracle() {
    let cfg = EvalConfig::default();
    for row in data("gram.csv") {
        let n = row[0] as i64;
        let g = gram_point(n, &cfg).unwrap();
        assert!(
            (g - row[1]).abs() <= 1e-9 * row[1],
            "g_{n} = {g} vs {}",
            row[1]
        );
    }
    assert!((gram_point(0, &cfg).unwrap() - 17.845_599_5).abs() < 1e-7);
    assert!((gram_point(-1, &cfg).unwrap() - 9.666_908_0).abs() < 1e-7);
}

#[test]
fn theta_zero_at_gram_zero_matches_oracle_root() {
    // ϑ(t) = 0 root by the crate's own ϑ, against the mpmath log-Gamma root
    let cfg = EvalConfig::default();
    let root = brent(
        |t| theta(t, &cfg).unwrap(),
        15.0,
        20.0,
        Tolerance::relative(1e-14),
    )
    .unwrap();
    assert!((root - 17.845_599_540_410_86).abs() < 1e-8);
}
