use proptest::prelude::*;
use tsxplain::explainer::{explain_detailed, sample_masks};
use tsxplain::surrogate::kernel_weight;
use tsxplain::synthetic::{seasonal_series, uniform_sample};
use tsxplain::{explain, Algorithm, Builtin, ExplainConfig, Mask, ReplacementKind, Sample, SegmenterConfig};

/// Under zero replacement a linear model's output drops by exactly the
/// segment's inner-product share when that segment is switched off.
fn closed_form(model: &Builtin, sample: &Sample, segment: usize, labels: &[usize]) -> f64 {
    let Builtin::Linear { coefficients, .. } = model else { unreachable!() };
    sample
        .as_slice()
        .iter()
        .zip(coefficients)
        .zip(labels)
        .filter(|(_, &l)| l == segment)
        .map(|((x, c), _)| x * c)
        .sum()
}

#[test]
fn linear_recovery_every_segmenter() {
    for algorithm in Algorithm::ALL {
        for trial in 0..5u64 {
            let sample = uniform_sample(24, 2, 0.5, 2.0, 100 + trial);
            let model = Builtin::random_linear(24, 2, 200 + trial, 0.3);
            let config = ExplainConfig {
                rng_seed: trial,
                ..ExplainConfig::default()
            };
            let attr = explain(&sample, &SegmenterConfig::new(algorithm), &model, &config).unwrap();
            let labels = attr.segments().labels().to_vec();
            for (s, &coef) in attr.segment_coefficients().iter().enumerate() {
                let expected = closed_form(&model, &sample, s, &labels);
                let rel = (coef - expected).abs() / expected.abs();
                assert!(rel <= 0.05, "{algorithm} trial {trial} segment {s}: {coef} vs {expected}");
            }
        }
    }
}

#[test]
fn same_seed_same_attribution() {
    let sample = seasonal_series(30, 3, 4);
    let model = Builtin::random_linear(30, 3, 5, 0.0);
    for algorithm in Algorithm::ALL {
        let seg = SegmenterConfig::new(algorithm);
        let config = ExplainConfig {
            rng_seed: 11,
            replacement: ReplacementKind::Mean,
            ..ExplainConfig::default()
        };
        let a = explain(&sample, &seg, &model, &config).unwrap();
        let b = explain(&sample, &seg, &model, &config).unwrap();
        assert_eq!(a, b);
        let other = explain(&sample, &seg, &model, &ExplainConfig { rng_seed: 12, ..config }).unwrap();
        assert_eq!(a.segments(), other.segments());
    }
}

#[test]
fn batch_size_is_invisible() {
    let sample = seasonal_series(24, 2, 9);
    let model = Builtin::MaskedMotif { start: 3, end: 9 };
    let seg = SegmenterConfig::new(Algorithm::Slopes);
    let reference = explain(&sample, &seg, &model, &ExplainConfig::default()).unwrap();
    for batch_size in [1, 7, 64, 999, 1000, 5000] {
        let config = ExplainConfig {
            batch_size,
            ..ExplainConfig::default()
        };
        let attr = explain(&sample, &seg, &model, &config).unwrap();
        for (x, y) in attr.weights().iter().zip(reference.weights()) {
            assert!((x - y).abs() <= 1e-12, "batch {batch_size}");
        }
    }
}

#[test]
fn first_mask_is_full_and_weighs_one() {
    for d in [1, 3, 17] {
        let masks = sample_masks(d, 50, 0.5, 3);
        assert_eq!(masks[0], Mask::ones(d));
        assert!(masks.iter().all(|m| m.bits().iter().any(|&b| b)));
        for width in [0.1, 0.75, 10.0] {
            assert_eq!(kernel_weight(&masks[0], width), 1.0);
        }
    }
}

#[test]
fn explanation_reports_default_width() {
    let sample = seasonal_series(16, 1, 0);
    let seg = SegmenterConfig::new(Algorithm::Uniform).with_window_size(4);
    let e = explain_detailed(&sample, &seg, &Builtin::Mean { target: 0 }, &ExplainConfig::default()).unwrap();
    assert_eq!(e.attribution.segments().num_segments(), 4);
    assert!((e.kernel_width - 0.75 * 2.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn attributions_are_finite(
        seed in any::<u64>(),
        t in 8usize..32,
        f in 1usize..3,
        masks in 20usize..300,
        algo in 0usize..6,
        kind in 0usize..3,
        model_pick in 0usize..3,
    ) {
        let sample = seasonal_series(t, f, seed);
        let seg = SegmenterConfig::new(Algorithm::ALL[algo]).with_partitions(4);
        let segments = seg.segment(&sample).unwrap();
        prop_assume!(masks >= segments.num_segments() + 2);
        let model = match model_pick {
            0 => Builtin::random_linear(t, f, seed, 1.0),
            1 => Builtin::MaskedMotif { start: 1, end: t / 2 },
            _ => Builtin::LastValue { target: 0 },
        };
        let config = ExplainConfig {
            num_masks: masks,
            rng_seed: seed,
            replacement: ReplacementKind::ALL[kind],
            ..ExplainConfig::default()
        };
        let attr = explain(&sample, &seg, &model, &config).unwrap();
        prop_assert!(attr.weights().iter().all(|w| w.is_finite()));
        prop_assert!(attr.intercept().is_finite());
        prop_assert_eq!(attr.shape(), (t, f));
    }
}
