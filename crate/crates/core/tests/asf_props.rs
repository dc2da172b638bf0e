mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use welch_core::asf::{DualPair, Exponent, LpSpace};
use welch_core::fixtures::gaussian_matrix;
use welch_core::numkernel::{eigen, spectral_verdict, ToleranceConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn gram_and_frame_operator_match_definitions(
        seed in any::<u64>(), n in 1usize..12, d in 1usize..6, p in any::<u8>(), complex in any::<bool>()
    ) {
        let pair = random_pair(seed, n, d, exponent(p), complex);
        let g = pair.gram();
        let want = naive_gram(&pair);
        for j in 0..n {
            for k in 0..n {
                prop_assert!(crel_close(g.get(j, k), want[j][k], 1e-12));
                prop_assert!(crel_close(pair.pairing(j, k).unwrap(), want[j][k], 1e-12));
            }
        }
        let s = pair.frame_operator();
        let want = naive_frame_operator(&pair);
        for a in 0..d {
            for b in 0..d {
                prop_assert!(crel_close(s.get(a, b), want[a][b], 1e-12));
            }
        }
    }

    #[test]
    fn factorization_through_coefficient_space(
        seed in any::<u64>(), n in 1usize..10, d in 1usize..6, complex in any::<bool>()
    ) {
        let pair = random_pair(seed, n, d, Exponent::Finite(2.0), complex);
        let theta_f = pair.analysis_matrix();
        let theta_t = pair.synthesis_matrix();
        let g = theta_f.matmul(&theta_t).unwrap();
        let s = theta_t.matmul(&theta_f).unwrap();
        prop_assert!(g.sub(&pair.gram()).unwrap().max_abs() <= 1e-12 * g.max_abs().max(1.0));
        prop_assert!(s.sub(&pair.frame_operator()).unwrap().max_abs() <= 1e-12 * s.max_abs().max(1.0));
        let x = gaussian_matrix(&mut rng(seed ^ 1), 1, d, field(complex));
        let sx = pair.synthesis(&pair.analysis(x.row(0)).unwrap()).unwrap();
        let direct = pair.frame_operator().matvec(x.row(0)).unwrap();
        for (a, b) in sx.iter().zip(&direct) {
            prop_assert!(crel_close(*a, *b, 1e-11));
        }
    }

    #[test]
    fn trace_identities(seed in any::<u64>(), n in 1usize..16, d in 1usize..7, p in any::<u8>(), complex in any::<bool>()) {
        let pair = random_pair(seed, n, d, exponent(p), complex);
        let g = naive_gram(&pair);
        let diag: Complex64 = (0..n).map(|j| g[j][j]).sum();
        let cross: Complex64 = (0..n).flat_map(|j| (0..n).map(move |k| (j, k))).map(|(j, k)| g[j][k] * g[k][j]).sum();
        let s = pair.frame_operator();
        prop_assert!(crel_close(pair.trace_s(), diag, 1e-11));
        prop_assert!(crel_close(pair.trace_s(), mat_trace(&s), 1e-11));
        prop_assert!(crel_close(pair.trace_s2(), cross, 1e-10));
        prop_assert!(crel_close(pair.trace_s2(), mat_trace(&mat_power(&s, 2)), 1e-10));
    }

    #[test]
    fn gram_and_frame_operator_share_power_sums(
        seed in any::<u64>(), n in 1usize..10, d in 1usize..6, complex in any::<bool>()
    ) {
        let pair = random_pair(seed, n, d, Exponent::Finite(3.0), complex);
        let (g, s) = (pair.gram(), pair.frame_operator());
        let scale = g.frobenius_norm().max(1.0);
        for k in 1..=4u32 {
            let a = mat_trace(&mat_power(&g, k));
            let b = mat_trace(&mat_power(&s, k));
            prop_assert!((a - b).norm() <= 1e-10 * scale.powi(k as i32));
        }
    }

    #[test]
    fn hilbert_embedding_passes_spectral_hypothesis(
        seed in any::<u64>(), n in 1usize..12, d in 1usize..6, complex in any::<bool>()
    ) {
        let v = gaussian_matrix(&mut rng(seed), n, d, field(complex));
        let pair = DualPair::hilbert_embed(v, LpSpace::hilbert(d, field(complex))).unwrap();
        prop_assert!(pair.is_hilbert_structured(1e-12));
        let spec = eigen(&pair.frame_operator()).unwrap();
        prop_assert!(spectral_verdict(&spec, &ToleranceConfig::default()).holds());
        let g = pair.gram();
        for j in 0..n {
            for k in 0..n {
                prop_assert!(crel_close(g.get(j, k), g.get(k, j).conj(), 1e-13));
            }
        }
    }

    #[test]
    fn unit_hilbert_pairs_are_normalized(seed in any::<u64>(), n in 1usize..12, d in 1usize..6, complex in any::<bool>()) {
        let pair = unit_pair(seed, n, d, complex);
        prop_assert!(pair.normalization_report().max_dev() <= 1e-12);
        prop_assert!(pair.is_normalized(1e-12));
    }
}

#[test]
fn duality_of_exponents() {
    for (p, q) in [(2.0, 2.0), (3.0, 1.5), (4.0, 4.0 / 3.0)] {
        let e = Exponent::new(p).unwrap();
        assert!((e.dual().as_f64() - q).abs() < 1e-12);
        assert!((e.dual().dual().as_f64() - p).abs() < 1e-12);
    }
    assert_eq!(Exponent::Finite(1.0).dual(), Exponent::Infinity);
    assert_eq!(Exponent::Infinity.dual(), Exponent::Finite(1.0));
    assert!(Exponent::new(0.5).is_err());
}
