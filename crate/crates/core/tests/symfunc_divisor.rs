use conic_sigma2::divisor::{
    classify, defect, football_invariant, gbc_total, reflection_identity_gap, ConicDivisor, Kind,
    DEFAULT_CRITICAL_EPS,
};
use conic_sigma2::symfunc::{
    binomial, newton_tensor, sigma_k, sigma_k_matrix, sphere_volume, Spectrum, SymmetricMatrix,
};
use num_rational::Ratio;
use proptest::prelude::*;

/// Sign of `perm` as a permutation of its own sorted entries; 0 when an
/// entry repeats.
fn perm_sign(perm: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] == perm[j] {
                return 0;
            }
            if perm[i] > perm[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Generalized Kronecker delta `δ^{i_1…i_k}_{j_1…j_k}`.
fn delta(upper: &[usize], lower: &[usize]) -> i32 {
    let su = perm_sign(upper);
    if su == 0 {
        return 0;
    }
    let mut a = upper.to_vec();
    let mut b = lower.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return 0;
    }
    su * perm_sign(lower)
}

fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `σ_k(A) = (1/k!) δ^{i…}_{j…} A_{i_1 j_1} ⋯ A_{i_k j_k}`.
fn sigma_delta(a: &SymmetricMatrix, k: usize) -> f64 {
    let n = a.dim();
    let idx = tuples(n, k);
    let mut total = 0.0;
    for i in &idx {
        for j in &idx {
            let d = delta(i, j);
            if d != 0 {
                total += d as f64 * (0..k).map(|m| a.get(i[m], j[m])).product::<f64>();
            }
        }
    }
    total / factorial(k)
}

/// `(T_l)_{ij} = (1/l!) δ^{i i_1…i_l}_{j j_1…j_l} A_{i_1 j_1} ⋯ A_{i_l j_l}`.
fn newton_delta(a: &SymmetricMatrix, l: usize) -> Vec<Vec<f64>> {
    let n = a.dim();
    let idx = tuples(n, l);
    let mut t = vec![vec![0.0; n]; n];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            for is in &idx {
                for js in &idx {
                    let mut up = vec![i];
                    up.extend(is);
                    let mut lo = vec![j];
                    lo.extend(js);
                    let d = delta(&up, &lo);
                    if d != 0 {
                        *entry += d as f64 * (0..l).map(|m| a.get(is[m], js[m])).product::<f64>();
                    }
                }
            }
            *entry /= factorial(l);
        }
    }
    t
}

fn matrix(n: usize) -> impl Strategy<Value = SymmetricMatrix> {
    prop::collection::vec(-2.0f64..2.0, n * n)
        .prop_map(move |v| SymmetricMatrix::from_upper(n, |i, j| v[i * n + j]))
}

#[test]
fn delta_oracle_fixed_matrix() {
    let a = SymmetricMatrix::from_upper(3, |i, j| {
        [[2.0, 1.0, 0.0], [0.0, 3.0, -1.0], [0.0, 0.0, 1.0]][i][j]
    });
    // σ₁ = 6, σ₂ = (6 − 1) + 2 + (3 − 1) = 9, σ₃ = det = 2(3 − 1) − 1(1 − 0) = 3
    assert_eq!(sigma_delta(&a, 1), 6.0);
    assert_eq!(sigma_delta(&a, 2), 9.0);
    assert_eq!(sigma_delta(&a, 3), 3.0);
    assert_eq!(sigma_k_matrix(&a, 2).unwrap(), 9.0);
    assert!((sigma_k_matrix(&a, 3).unwrap() - 3.0).abs() < 1e-14);
}

#[test]
fn sphere_volumes() {
    assert!((sphere_volume(3) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-14);
    assert!((sphere_volume(4) - 8.0 * std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-13);
    // (3/2)|S⁴|/|S³| = 2, the smooth total.
    assert!((1.5 * sphere_volume(4) / sphere_volume(3) - 2.0).abs() < 1e-15);
    assert_eq!(binomial(3, 1), 3.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_k_matches_delta_oracle(a in matrix(4), k in 1usize..=4) {
        let fast = sigma_k_matrix(&a, k).unwrap();
        let slow = sigma_delta(&a, k);
        prop_assert!((fast - slow).abs() <= 1e-10 * (1.0 + slow.abs()));
        let spectral = sigma_k(&a.eigenvalues(), k).unwrap();
        prop_assert!((fast - spectral).abs() <= 1e-9 * (1.0 + slow.abs()));
    }

    #[test]
    fn newton_tensor_matches_delta_oracle(a in matrix(3), l in 0usize..3) {
        let t = newton_tensor(&a, l).unwrap();
        let oracle = newton_delta(&a, l);
        for (i, row) in oracle.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                prop_assert!((t.get(i, j) - v).abs() <= 1e-10 * (1.0 + v.abs()));
            }
        }
    }

    #[test]
    fn maclaurin(a in matrix(3)) {
        let s1 = sigma_k_matrix(&a, 1).unwrap();
        let s2 = sigma_k_matrix(&a, 2).unwrap();
        prop_assert!(s1 * s1 - 3.0 * s2 >= -1e-12 * (1.0 + s1 * s1));
    }

    #[test]
    fn newton_trace(a in matrix(5), l in 0usize..5) {
        let tr = newton_tensor(&a, l).unwrap().trace();
        let expected = (5 - l) as f64 * sigma_k_matrix(&a, l).unwrap();
        let scale = expected.abs().max(a.as_matrix().norm().powi(l as i32)).max(1.0);
        prop_assert!((tr - expected).abs() / scale < 1e-10);
    }

    #[test]
    fn sigma_k_permutation_invariant(mut v in prop::collection::vec(-3.0f64..3.0, 1..7), k in 0usize..7, seed in any::<u64>()) {
        prop_assume!(k <= v.len());
        let a = sigma_k(&Spectrum::new(v.clone()).unwrap(), k).unwrap();
        let n = v.len();
        v.rotate_left((seed as usize) % n);
        v.swap(0, (seed as usize / 7) % n);
        let b = sigma_k(&Spectrum::new(v).unwrap(), k).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn reflection_identity(b in -1.0f64..=0.0) {
        prop_assert!(reflection_identity_gap(b, 4).unwrap() < 1e-12);
    }

    #[test]
    fn equal_pairs_are_critical(b in -0.999f64..-0.001) {
        let d = ConicDivisor::new(vec![b, b], false).unwrap();
        prop_assert_eq!(classify(&d, 0.0).unwrap().kind, Kind::Critical);
        prop_assert_eq!(classify(&d, DEFAULT_CRITICAL_EPS).unwrap().kind, Kind::Critical);
    }

    #[test]
    fn unequal_pairs_are_supercritical(a in -0.99f64..-0.01, gap in 0.01f64..0.5) {
        let b = a + gap;
        prop_assume!(b < 0.0);
        let d = ConicDivisor::new(vec![a, b], false).unwrap();
        let c = classify(&d, DEFAULT_CRITICAL_EPS).unwrap();
        prop_assert_eq!(c.kind, Kind::Supercritical);
        // The threshold decreases on (−1, 0): the order closer to −1 is the witness.
        prop_assert_eq!(c.witness_index, Some(0));
    }

    #[test]
    fn classification_ignores_order(v in prop::collection::vec(-0.99f64..-0.01, 1..6)) {
        let mut r = v.clone();
        r.reverse();
        let a = classify(&ConicDivisor::new(v, false).unwrap(), DEFAULT_CRITICAL_EPS).unwrap();
        let b = classify(&ConicDivisor::new(r, false).unwrap(), DEFAULT_CRITICAL_EPS).unwrap();
        prop_assert_eq!(a.kind, b.kind);
        prop_assert!((a.lhs - b.lhs).abs() < 1e-12 && (a.rhs - b.rhs).abs() < 1e-12);
    }

    #[test]
    fn defect_matches_rational_sum(num in -1000i64..=0) {
        let beta = Ratio::new(num, 1000);
        // (β³ + 3β²)/2 evaluated exactly
        let exact = (beta * beta * beta + Ratio::from_integer(3) * beta * beta) / Ratio::from_integer(2);
        let reflected = {
            let b = Ratio::from_integer(-2) - beta;
            // |b| = 2 + β for the reflected order
            let a = Ratio::from_integer(2) + b;
            let m = -b;
            (m * m * m + Ratio::from_integer(3) * a * m * m) / Ratio::from_integer(4)
        };
        prop_assert_eq!(exact + reflected, Ratio::from_integer(2));
        let approx = *exact.numer() as f64 / *exact.denom() as f64;
        prop_assert!((defect(num as f64 / 1000.0, 4).unwrap() - approx).abs() < 1e-15);
    }

    #[test]
    fn football_invariant_is_limit_of_m(b in -1.0f64..=0.0) {
        let d = 1.5 * b * b - 0.5 * b.abs().powi(3);
        let m = 2.0 / 3.0 * d + 4.0 / 9.0 * d * b + b.powi(4) / 36.0;
        prop_assert!((m - football_invariant(b).unwrap()).abs() < 1e-14);
    }
}

#[test]
fn divisor_examples() {
    let c = classify(
        &ConicDivisor::new(vec![-0.3, -0.6], false).unwrap(),
        DEFAULT_CRITICAL_EPS,
    )
    .unwrap();
    assert_eq!(c.kind, Kind::Supercritical);
    assert_eq!(c.witness_index, Some(1));
    assert!((c.lhs - 0.2646).abs() < 1e-12);
    assert!((c.rhs - 0.0975375).abs() < 1e-12);
    let single = classify(
        &ConicDivisor::new(vec![-0.5], false).unwrap(),
        DEFAULT_CRITICAL_EPS,
    )
    .unwrap();
    assert_eq!(single.kind, Kind::Supercritical);
    let d = ConicDivisor::new(vec![-0.5, -0.5], false).unwrap();
    assert!((gbc_total(&d, 4).unwrap() - 1.375).abs() < 1e-15);
    assert!(ConicDivisor::new(vec![0.0], false).is_err());
    assert!(classify(&ConicDivisor::empty(), DEFAULT_CRITICAL_EPS).is_err());
}
