mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use welch_core::asf::Field;
use welch_core::bounds::{
    classical_bounds, discrete_welch_max_check, discrete_welch_sum_check, full_report, gerzon, gram_rank_check,
    hadamard_rank_check, p_sum_check, trace_power_check, welch_rhs, BoundConfig, ReportRequest,
};
use welch_core::fixtures;

fn cfg() -> BoundConfig {
    BoundConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn welch_rhs_matches_binomial_formula(n in 2usize..200, d in 1usize..9, m in 1usize..5) {
        prop_assert!(rel_close(welch_rhs(n, d, m).unwrap(), welch_floor(n, d, m), 1e-14));
    }

    #[test]
    fn welch_never_violated_for_unit_hilbert_pairs(
        seed in any::<u64>(), n in 2usize..14, d in 1usize..5, m in 1usize..4, complex in any::<bool>()
    ) {
        let pair = unit_pair(seed, n, d, complex);
        let sum = discrete_welch_sum_check(&pair, m, &cfg()).unwrap();
        let [prod, single] = discrete_welch_max_check(&pair, m, &cfg()).unwrap();
        for r in [&sum, &prod, &single] {
            prop_assert!(r.hypothesis_ok, "{}: {}", r.name, r.notes);
            prop_assert!(r.holds, "{} lhs {} rhs {}", r.name, r.lhs, r.rhs);
        }
        // independent evaluation of the sum form and the correlation floor
        let g = naive_gram(&pair);
        let lhs: f64 = g.iter().flatten().map(|z| z.norm_sqr().powi(m as i32)).sum();
        let dm = binom((d + m - 1) as u64, m as u64);
        prop_assert!(rel_close(sum.lhs, lhs, 1e-10));
        prop_assert!(rel_close(sum.rhs, (n * n) as f64 / dm, 1e-10));
        let mut corr: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    corr = corr.max(g[j][k].norm());
                }
            }
        }
        prop_assert!(rel_close(single.lhs, corr.powi(2 * m as i32), 1e-10));
        prop_assert!(rel_close(single.rhs, welch_floor(n, d, m), 1e-9));
        prop_assert!(corr.powi(2 * m as i32) >= welch_floor(n, d, m) - 1e-9);
    }

    #[test]
    fn single_max_dominates_product_max(
        seed in any::<u64>(), n in 2usize..12, d in 1usize..5, m in 1usize..4, p in any::<u8>(), complex in any::<bool>()
    ) {
        let pair = random_pair(seed, n, d, exponent(p), complex);
        let [prod, single] = discrete_welch_max_check(&pair, m, &cfg()).unwrap();
        prop_assert!(single.lhs >= prod.lhs * (1.0 - 1e-12));
        prop_assert_eq!(single.rhs, prod.rhs);
    }

    #[test]
    fn gram_rank_dominates_dimension_form(
        seed in any::<u64>(), n in 2usize..12, d in 1usize..6, complex in any::<bool>()
    ) {
        let pair = unit_pair(seed, n, d, complex);
        let plain = discrete_welch_sum_check(&pair, 1, &cfg()).unwrap();
        let ranked = gram_rank_check(&pair, &cfg()).unwrap();
        prop_assert!(ranked[0].rhs >= plain.rhs * (1.0 - 1e-12));
        prop_assert!(ranked.iter().all(|r| r.holds && r.hypothesis_ok));
        let h = hadamard_rank_check(&pair, 2, &cfg()).unwrap();
        prop_assert!(h.holds && h.hypothesis_ok, "{:?}", h);
    }

    #[test]
    fn trace_power_jensen(seed in any::<u64>(), n in 1usize..12, d in 1usize..6, complex in any::<bool>()) {
        let pair = fixtures::random_hilbert_pair(&mut rng(seed), n, d, field(complex));
        for r in [0.5, 1.0, 2.0, 3.7] {
            let rec = trace_power_check(&pair, r, &cfg()).unwrap();
            prop_assert!(rec.holds && rec.hypothesis_ok, "{:?}", rec);
            if r == 1.0 {
                prop_assert!((rec.lhs - rec.rhs).abs() <= 1e-12 * rec.rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn p_sum_bound_holds(seed in any::<u64>(), extra in 1usize..8, d in 1usize..5, complex in any::<bool>()) {
        let n = d + extra;
        let pair = unit_pair(seed, n, d, complex);
        for p in [2.5, 4.0, 8.0] {
            let rec = p_sum_check(&pair, p, &cfg()).unwrap();
            prop_assert!(rec.holds && rec.hypothesis_ok, "{:?}", rec);
        }
    }

    #[test]
    fn records_are_invariant_under_pair_rescaling(
        seed in any::<u64>(), n in 2usize..10, d in 1usize..5, re in 0.2f64..5.0, im in -3.0f64..3.0
    ) {
        let pair = random_pair(seed, n, d, exponent(2), true);
        let scaled = pair.rescaled(Complex64::new(re, im)).unwrap();
        for m in 1..=2 {
            let a = discrete_welch_sum_check(&pair, m, &cfg()).unwrap();
            let b = discrete_welch_sum_check(&scaled, m, &cfg()).unwrap();
            prop_assert!(rel_close(a.lhs, b.lhs, 1e-9) && rel_close(a.rhs, b.rhs, 1e-9));
            prop_assert_eq!(a.hypothesis_ok, b.hypothesis_ok);
        }
    }
}

#[test]
fn full_report_on_tight_fixtures_has_no_alarms() {
    let req = ReportRequest::new(vec![1, 2, 3], vec![3.0, 4.0]);
    for name in fixtures::FIXTURE_NAMES {
        let pair = fixtures::by_name(name).unwrap();
        let report = full_report(&pair, &req, &cfg()).unwrap();
        assert_eq!(report.alarms().count(), 0, "{name}");
    }
}

#[test]
fn classical_reference_values() {
    assert_eq!(gerzon(3, Field::Complex), 9);
    assert_eq!(gerzon(3, Field::Real), 6);
    let all = classical_bounds(9, 3, Field::Complex).unwrap();
    assert!(all.iter().any(|b| b.name == "bukh_cox" && b.applicable));
    for b in all.iter().filter(|b| b.applicable) {
        let v = b.rhs.unwrap();
        assert!(v.is_finite() && v >= 0.0 && v <= 1.0, "{b:?}");
    }
}
