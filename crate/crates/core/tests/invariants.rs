use gausscard::analysis::mp_norm_bounds;
use gausscard::cutoff::build_cutoff;
use gausscard::lagrange::{chi_table, coefficients_dense, GridSpec};
use gausscard::norms::PNorm;
use gausscard::oracles::{oracle_lagrange_coeffs, OracleConfig};
use gausscard::MultiplierContext;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplier_is_even_positive_and_at_most_one(h in 0.05f64..2.0, xi in -200.0f64..200.0) {
        let ctx = MultiplierContext::new(h, 1).unwrap();
        let (a, b) = (ctx.m(xi).unwrap(), ctx.m(-xi).unwrap());
        prop_assert_eq!(a.to_bits(), b.to_bits());
        prop_assert!(a >= 0.0 && a <= 1.0 + 1e-15);
        prop_assert!(ctx.log_m(xi).unwrap() <= 1e-15);
        prop_assert_eq!(ctx.m_prime(xi).unwrap(), -ctx.m_prime(-xi).unwrap());
    }

    #[test]
    fn multiplier_decreases_away_from_zero(h in 0.1f64..2.0, a in 0.0f64..30.0, gap in 1e-3f64..5.0) {
        let ctx = MultiplierContext::new(h, 1).unwrap();
        let (lo, hi) = (ctx.log_m(a).unwrap(), ctx.log_m(a + gap).unwrap());
        prop_assert!(hi <= lo, "log m({}) = {} > log m({}) = {}", a + gap, hi, a, lo);
    }

    #[test]
    fn aliased_shifts_partition_unity(h in 0.1f64..2.0, xi in -100.0f64..100.0) {
        let ctx = MultiplierContext::new(h, 1).unwrap();
        let s = ctx.alias_sum(xi, ctx.series_radius() + 2).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-10, "sum = {}", s);
    }

    #[test]
    fn tensor_multiplier_factorises(h in 0.2f64..1.5, x in -20.0f64..20.0, y in -20.0f64..20.0) {
        let one = MultiplierContext::new(h, 1).unwrap();
        let two = MultiplierContext::new(h, 2).unwrap();
        let joint = two.log_m_tensor(&[x, y]).unwrap();
        let split = one.log_m(x).unwrap() + one.log_m(y).unwrap();
        prop_assert!((joint - split).abs() <= 1e-12 * split.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lagrange_function_is_cardinal(h in 0.25f64..1.5) {
        let table = chi_table(&GridSpec::new(h, 1, 32, 20.0 * h).unwrap(), 8).unwrap();
        for j in -16i64..=16 {
            let v = table.chi_eval(&[h * j as f64]).unwrap();
            prop_assert!((v - if j == 0 { 1.0 } else { 0.0 }).abs() < 1e-8, "χ({}h) = {}", j, v);
        }
    }

    #[test]
    fn dense_solver_matches_refined_oracle(h in 0.8f64..1.5) {
        let grid = GridSpec::new(h, 1, 12, 6.0).unwrap();
        let dense = coefficients_dense(&grid).unwrap();
        let oracle = oracle_lagrange_coeffs(&grid, &OracleConfig::default()).unwrap();
        let scale = dense.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (j, v) in dense.iter() {
            prop_assert!((v - oracle.coeffs.get(&j).unwrap()).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn norm_bounds_are_ordered(h in 0.2f64..1.0, which in 0usize..4, seed in 0u64..1000) {
        let p = [PNorm::Finite(1.0), PNorm::Finite(2.0), PNorm::Finite(4.0), PNorm::Inf][which];
        let est = mp_norm_bounds(&MultiplierContext::new(h, 1).unwrap(), p, 24, seed).unwrap();
        prop_assert!(est.lower_bound > 0.0);
        prop_assert!(est.lower_bound <= est.upper_bound * (1.0 + 1e-9), "{:?}", est);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn cutoff_kernel_is_cardinal(eps in 0.6f64..1.5) {
        let spec = build_cutoff(eps).unwrap();
        prop_assert!(spec.partition_defect() < 1e-12);
        prop_assert!(spec.support < spec.declared_band);
        for j in -12i64..=12 {
            let v = spec.phi_eval(j as f64);
            prop_assert!((v - if j == 0 { 1.0 } else { 0.0 }).abs() < 1e-8, "φ({}) = {}", j, v);
        }
    }
}

#[test]
fn derivatives_stay_finite_where_m_underflows() {
    let ctx = MultiplierContext::new(0.05, 1).unwrap();
    for xi in [-133.94166007458384, 61.0, 500.0, 4000.0] {
        let (d1, d2) = (ctx.m_prime(xi).unwrap(), ctx.m_second(xi).unwrap());
        assert!(d1.is_finite() && d2.is_finite(), "ξ = {xi}: {d1}, {d2}");
    }
}
