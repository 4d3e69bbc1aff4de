use ahp::inference::fisher_statistic;
use ahp::loss::{AHParams, PsiSpec};
use ahp::periodogram::{compute_ahp, normalize};
use ahp::regress::{AhrProblem, SolverConfig};
use ahp::simgen::{gen_ar2, gen_white_noise, inject_outliers, Model, ModelSpec, OutlierKind, OutlierSpec, Placement};
use ahp::spectrogram::window_starts;
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = OutlierKind> {
    prop_oneof![
        Just(OutlierKind::SinglePoint),
        Just(OutlierKind::Burst),
        Just(OutlierKind::Eyeblink)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fisher_g_is_bounded_and_scale_free(
        v in prop::collection::vec(1e-6f64..100.0, 2..200),
        c in 1e-3f64..1e3,
    ) {
        let (g, k) = fisher_statistic(&v).unwrap();
        let q = v.len() as f64;
        prop_assert!(g >= 1.0 / q - 1e-12 && g <= 1.0);
        let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
        let (g2, k2) = fisher_statistic(&scaled).unwrap();
        prop_assert_eq!(k, k2);
        prop_assert!((g - g2).abs() <= 1e-12 * g);
    }

    #[test]
    fn ahp_is_nonnegative_and_normalize_keeps_fisher_g(
        seed in 0u64..10_000,
        alpha in 0.05f64..0.95,
        mult in 0.3f64..3.0,
    ) {
        let y = gen_ar2(0.5, -0.3, 64, 100, seed).unwrap();
        let m = compute_ahp(&y, &[alpha], PsiSpec::StdMultiple(mult), &SolverConfig::default()).unwrap();
        prop_assert!(m.values.iter().all(|&v| v >= 0.0));
        let nm = normalize(&m).unwrap();
        let (g, k) = fisher_statistic(&m.column(0)).unwrap();
        let (gn, kn) = fisher_statistic(&nm.column(0)).unwrap();
        prop_assert_eq!(k, kn);
        prop_assert!((g - gn).abs() <= 1e-12);
    }

    #[test]
    fn large_threshold_ahp_scales_quadratically(seed in 0u64..10_000, c in 0.01f64..100.0) {
        let cfg = SolverConfig::default();
        let y = gen_white_noise(48, seed);
        let yc: Vec<f64> = y.iter().map(|v| v * c).collect();
        let a = compute_ahp(&y, &[0.5], PsiSpec::StdMultiple(1e6), &cfg).unwrap();
        let b = compute_ahp(&yc, &[0.5], PsiSpec::StdMultiple(1e6), &cfg).unwrap();
        for (x, z) in a.values.iter().zip(&b.values) {
            prop_assert!((z - c * c * x).abs() <= 1e-8 * (c * c * x).max(1e-12 * c * c));
        }
        let (na, nb) = (normalize(&a).unwrap(), normalize(&b).unwrap());
        for (x, z) in na.values.iter().zip(&nb.values) {
            prop_assert!((x - z).abs() <= 1e-8 * x.max(1e-12));
        }
    }

    #[test]
    fn irls_objective_never_increases(seed in 0u64..10_000, alpha in 0.05f64..0.95, mult in 0.2f64..2.0, k in 1usize..31) {
        let y = gen_white_noise(64, seed);
        let p = AHParams::std_multiple(alpha, mult, &y).unwrap();
        let prob = AhrProblem::new(&y, p).unwrap();
        let mut trace = Vec::new();
        let fit = prob.fit_index(k, &SolverConfig::default(), Some(&mut trace));
        prop_assert!(fit.converged);
        for w in trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn injection_touches_exactly_its_support(
        seed in 0u64..10_000,
        kind in kind(),
        c in 0.5f64..50.0,
        t in 1usize..150,
    ) {
        let y = gen_white_noise(200, seed);
        let spec = OutlierSpec::new(kind, c, Placement::Fixed(t), 0);
        let z = inject_outliers(&y, &spec).unwrap();
        prop_assert_eq!(z.len(), y.len());
        let support = (t - 1)..=(t - 1 + kind.extent());
        for (i, (a, b)) in y.iter().zip(&z).enumerate() {
            if support.contains(&i) {
                // the eyeblink waveform may vanish at isolated samples
                if kind != OutlierKind::Eyeblink {
                    prop_assert!(a != b, "index {} untouched", i);
                }
            } else {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn generators_are_pure_functions_of_the_seed(seed in 0u64..u64::MAX, n in 8usize..300) {
        for model in [
            Model::WhiteNoise,
            Model::Ar2 { phi1: 0.9, phi2: -0.9 },
            Model::Mixture,
            Model::Garch11 { omega0: 1e-6, arch: 0.49, garch: 0.49 },
        ] {
            let spec = ModelSpec::new(model, n);
            let a = spec.generate(seed).unwrap();
            prop_assert_eq!(a.len(), n);
            prop_assert_eq!(a, spec.generate(seed).unwrap());
        }
    }

    #[test]
    fn windows_cover_whole_blocks(n in 16usize..5000, w in 16usize..600, frac in 0.0f64..0.95) {
        let overlap = ((w as f64) * frac) as usize;
        match window_starts(n, w, overlap) {
            Ok(starts) => {
                let hop = w - overlap;
                prop_assert!(!starts.is_empty());
                prop_assert_eq!(starts[0], 0);
                for p in starts.windows(2) {
                    prop_assert_eq!(p[1] - p[0], hop);
                }
                let last = *starts.last().unwrap();
                prop_assert!(last + w <= n);
                // the dropped tail is shorter than one hop
                prop_assert!(n - (last + w) < hop);
            }
            Err(_) => prop_assert!(n < w),
        }
    }
}
