use std::f64::consts::TAU;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use styleplane::grad::finite_diff_check;
use styleplane::learn::{evaluate, random_plane};
use styleplane::manifold::{principal_angles, sample_dataset, ManifoldConfig};
use styleplane::patch::{match_patches, PatchFeature};
use styleplane::{gram_schmidt, DomainChart, RotationPlane};

fn vec_of(dim: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, dim)
}

fn plane_strategy(dim: usize) -> impl Strategy<Value = RotationPlane> {
    (vec_of(dim, 1.0), vec_of(dim, 1.0))
        .prop_filter_map("degenerate plane", |(mu, nu)| gram_schmidt(&mu, &nu).ok())
}

fn dims() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 3, 8, 64, 512])
}

fn setup() -> impl Strategy<Value = (Vec<f64>, RotationPlane, f64, f64)> {
    dims().prop_flat_map(|d| {
        (
            vec_of(d, 10.0),
            plane_strategy(d),
            -20.0..20.0f64,
            -20.0..20.0f64,
        )
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rotation_preserves_norm((s, w, t, _) in setup()) {
        let r = w.rotate(&s, t).unwrap();
        prop_assert!((norm(&r) - norm(&s)).abs() <= 1e-9 * norm(&s).max(1.0));
    }

    #[test]
    fn rotation_angles_add((s, w, t1, t2) in setup()) {
        let twice = w.rotate(&w.rotate(&s, t1).unwrap(), t2).unwrap();
        let once = w.rotate(&s, t1 + t2).unwrap();
        prop_assert!(dist(&twice, &once) <= 1e-9 * norm(&s).max(1.0));
    }

    #[test]
    fn rotation_is_periodic_and_invertible((s, w, t, _) in setup()) {
        let r = w.rotate(&s, t).unwrap();
        prop_assert!(dist(&w.rotate(&s, t + TAU).unwrap(), &r) <= 1e-9 * norm(&s).max(1.0));
        prop_assert!(dist(&w.rotate(&r, -t).unwrap(), &s) <= 1e-9 * norm(&s).max(1.0));
    }

    #[test]
    fn rotation_keeps_residual((s, w, t, _) in setup()) {
        let r = w.rotate(&s, t).unwrap();
        let before = w.residual(&s).unwrap();
        let after = w.residual(&r).unwrap();
        prop_assert!(dist(&before, &after) <= 1e-9 * norm(&s).max(1.0));
        let p = w.project(&s).unwrap();
        let sum: Vec<f64> = p.iter().zip(before.iter()).map(|(a, b)| a + b).collect();
        prop_assert!(dist(&sum, &s) <= 1e-12 * norm(&s).max(1.0));
    }

    #[test]
    fn basis_is_orthonormal(w in dims().prop_flat_map(plane_strategy)) {
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        prop_assert!((d(w.m(), w.m()) - 1.0).abs() <= 1e-12);
        prop_assert!((d(w.n(), w.n()) - 1.0).abs() <= 1e-12);
        prop_assert!(d(w.m(), w.n()).abs() <= 1e-12);
    }

    #[test]
    fn principal_angles_are_symmetric(
        (a, b) in prop::sample::select(vec![3usize, 8, 64])
            .prop_flat_map(|d| (plane_strategy(d), plane_strategy(d)))
    ) {
        let ab = principal_angles(&a, &b).unwrap();
        let ba = principal_angles(&b, &a).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(ab.0 <= ab.1 + 1e-15);
        prop_assert!(principal_angles(&a, &a).unwrap().1 <= 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn analytic_gradient_matches_finite_differences(
        (s, t, mu, nu, theta) in prop::sample::select(vec![3usize, 8, 64]).prop_flat_map(|d| {
            let sc = 1.0 / (d as f64).sqrt();
            (vec_of(d, 2.0 * sc), vec_of(d, 2.0 * sc), vec_of(d, 2.0 * sc), vec_of(d, 2.0 * sc), -3.1..3.1f64)
        })
    ) {
        prop_assume!(gram_schmidt(&mu, &nu).is_ok());
        let w = gram_schmidt(&mu, &nu).unwrap();
        // well-conditioned planes only
        let along: f64 = nu.iter().zip(w.m()).map(|(a, b)| a * b).sum();
        prop_assume!(norm(&mu) > 0.1 && (norm(&nu).powi(2) - along * along).sqrt() > 0.1 * norm(&nu));
        let report = finite_diff_check(&s, &t, &mu, &nu, theta).unwrap();
        prop_assert!(report.max_rel_error() <= 1e-5, "{:?}", report);
    }

    #[test]
    fn matching_is_permutation_covariant(
        feats in prop::collection::vec(vec_of(22, 1.0), 1..12),
        tgt in prop::collection::vec(vec_of(22, 1.0), 16),
        perm_seed in any::<u64>(),
    ) {
        prop_assume!(feats.iter().chain(&tgt).all(|f| norm(f) > 1e-6));
        let wrap = |fs: &[Vec<f64>]| -> Vec<PatchFeature> {
            fs.iter().map(|f| PatchFeature { origin: (0, 0), size: (1, 1), feature: f.clone() }).collect()
        };
        let mut order: Vec<usize> = (0..feats.len()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
        let permuted: Vec<Vec<f64>> = order.iter().map(|&i| feats[i].clone()).collect();
        let base = match_patches(&wrap(&feats), &wrap(&tgt)).unwrap();
        let moved = match_patches(&wrap(&permuted), &wrap(&tgt)).unwrap();
        for (k, &i) in order.iter().enumerate() {
            prop_assert_eq!(moved[k].tgt, base[i].tgt);
            prop_assert_eq!(moved[k].similarity, base[i].similarity);
            prop_assert!((-1.0..=1.0).contains(&moved[k].similarity));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sampling_is_seed_deterministic(seed in any::<u64>()) {
        let cfg = ManifoldConfig { dim: 8, samples_per_domain: 20, seed, ..ManifoldConfig::default() };
        let chart = DomainChart::seasons();
        let a = sample_dataset(&cfg.resolve().unwrap(), &chart).unwrap();
        let b = sample_dataset(&cfg.resolve().unwrap(), &chart).unwrap();
        prop_assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn true_plane_beats_random_planes(seed in any::<u64>()) {
        let cfg = ManifoldConfig { dim: 16, samples_per_domain: 50, seed, ..ManifoldConfig::default() };
        let spec = cfg.resolve().unwrap();
        let chart = DomainChart::seasons();
        let data = sample_dataset(&spec, &chart).unwrap();
        let truth = evaluate(&spec.true_plane().unwrap(), &data, &chart).unwrap().overall;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let w = random_plane(16, &mut rng).unwrap();
            prop_assert!(evaluate(&w, &data, &chart).unwrap().overall > truth);
        }
    }

    #[test]
    fn chart_shift_moves_samples_not_plane(seed in any::<u64>(), delta in 0.0..TAU) {
        let cfg = ManifoldConfig { dim: 16, samples_per_domain: 50, noise_sigma: 0.0, seed, ..ManifoldConfig::default() };
        let spec = cfg.resolve().unwrap();
        let chart = DomainChart::seasons();
        let data = sample_dataset(&spec, &chart).unwrap();
        let shifted = sample_dataset(&spec, &chart.shifted(delta)).unwrap();
        let fit = |d: &styleplane::LabeledStyleDataset| styleplane::manifold::pca_plane_oracle(d).unwrap();
        let (a1, a2) = principal_angles(&fit(&data), &fit(&shifted)).unwrap();
        prop_assert!(a1.max(a2) <= 1e-3);
    }
}
