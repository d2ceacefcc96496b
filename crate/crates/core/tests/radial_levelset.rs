use conic_sigma2::conformal::{
    finite_difference_factor, sigma_k_curvature, ConformalFactor, FiniteDifferenceConfig,
    RoundSphereFactor, Scheme,
};
use conic_sigma2::divisor::{football_invariant, gbc_total, ConicDivisor};
use conic_sigma2::levelset::{
    d_plus_infinity, gbc_from_profile, interior_90, level_grid, relation_report_on, summary_at,
    DEFAULT_LEVELS,
};
use conic_sigma2::radial::{
    cylinder_rhs, football_profile, reconstruct_factor, sphere_profile, RadialProfile,
};
use proptest::prelude::*;

/// σ₂ at a point of the unit sphere from finite differences of `u` values
/// alone, without the profile's derivative columns.
fn sigma2_from_values(p: &RadialProfile, x: [f64; 4]) -> f64 {
    assert!((x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
    let u = reconstruct_factor(p);
    let fd = finite_difference_factor(
        move |y: &[f64; 4]| u.value_at(y).unwrap(),
        FiniteDifferenceConfig::new(1e-3, Scheme::Richardson).unwrap(),
    );
    sigma_k_curvature(&fd, &x, 2).unwrap()
}

#[test]
fn cylinder_equation_against_finite_differences() {
    // The ODE h'' (h'² − 1) = e^{4h} must reproduce σ₂ = 3/2 through the
    // flat Schouten formula, with derivatives taken numerically from u.
    let p = football_profile(-0.4, 15.0, 1e-10).unwrap();
    let s = sigma2_from_values(&p, [0.5, 0.5, -0.5, 0.5]);
    assert!((s - 1.5).abs() < 1e-6, "{s}");
    let sphere = sphere_profile(15.0, 0.01).unwrap();
    let s = sigma2_from_values(&sphere, [0.0, 0.6, 0.0, 0.8]);
    assert!((s - 1.5).abs() < 1e-6, "{s}");
}

#[test]
fn wrong_sign_ode_is_detected() {
    // Negating h'' flips σ₂ = (3/2)(1 − h'²)(−h'')e^{−4h}.
    let h = -0.3;
    let dh = 0.4;
    let d2 = cylinder_rhs(h, dh).unwrap();
    let sigma2 = 1.5 * (1.0 - dh * dh) * (-d2) * (-4.0 * h).exp();
    let flipped = 1.5 * (1.0 - dh * dh) * d2 * (-4.0 * h).exp();
    assert!((sigma2 - 1.5).abs() < 1e-14);
    assert!((flipped + 1.5).abs() < 1e-14);
}

#[test]
fn reconstructed_sphere_matches_analytic_factor() {
    let p = sphere_profile(15.0, 0.01).unwrap();
    let u = reconstruct_factor(&p);
    for x in [
        [0.3, 0.1, -0.2, 0.5],
        [2.0, -1.0, 0.5, 0.0],
        [0.01, 0.0, 0.0, 0.02],
    ] {
        let a = u.gradient_at(&x).unwrap();
        let b = RoundSphereFactor.gradient_at(&x).unwrap();
        for i in 0..4 {
            assert!((a[i] - b[i]).abs() < 1e-8);
        }
        let ha = u.hessian_at(&x).unwrap();
        let hb = RoundSphereFactor.hessian_at(&x).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (ha.get(i, j) - hb.get(i, j)).abs() < 1e-7,
                    "{x:?} ({i},{j})"
                );
            }
        }
    }
}

#[test]
fn gbc_matches_divisor_totals() {
    for b in [-0.1, -0.35, -0.6] {
        let p = football_profile(b, 15.0, 1e-10).unwrap();
        let d = ConicDivisor::new(vec![b, b], true).unwrap();
        assert!(
            (gbc_from_profile(&p) - gbc_total(&d, 4).unwrap()).abs() < 1e-6,
            "β = {b}"
        );
    }
    // β → 0⁻ approaches the smooth value.
    let p = football_profile(-0.01, 15.0, 1e-10).unwrap();
    assert!((gbc_from_profile(&p) - 2.0).abs() < 2e-3);
}

#[test]
fn csv_round_trip_preserves_levelset() {
    let p = football_profile(-0.5, 15.0, 1e-10).unwrap();
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    let q = RadialProfile::read_csv(&buf[..]).unwrap();
    let level = p.u_at(1.0).unwrap();
    assert_eq!(
        summary_at(&p, level).unwrap().m,
        summary_at(&q, level).unwrap().m
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn m_is_the_football_invariant(b in -0.9f64..-0.05) {
        let p = football_profile(b, 15.0, 1e-10).unwrap();
        let levels = level_grid(&p, 60).unwrap();
        let r = relation_report_on(&p, &levels, interior_90(levels.len())).unwrap();
        let target = football_invariant(b).unwrap();
        prop_assert!(r.m_spread < 1e-6);
        prop_assert!((r.m_mean - target).abs() < 1e-6);
        prop_assert!(r.max_abs_ca < 1e-6 && r.max_abs_ad < 1e-6 && r.max_abs_da_dd < 1e-6);
        prop_assert!(r.min_m_slope > -1e-8);
    }

    #[test]
    fn end_values_approach_limits(b in -0.6f64..-0.1) {
        let p = football_profile(b, 15.0, 1e-10).unwrap();
        let levels = level_grid(&p, DEFAULT_LEVELS).unwrap();
        let last = summary_at(&p, levels[levels.len() - 1]).unwrap();
        prop_assert!((last.d - d_plus_infinity(b)).abs() < 1e-5);
        prop_assert!((last.z - b).abs() < 1e-5);
    }
}
