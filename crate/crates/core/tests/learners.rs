use eel_core::classifiers::Comparison;
use eel_core::ensemble::ensemble_error_count;
use eel_core::{
    adaboost_train, decode, error_rate, lms_train, off_eel, on_eel, BoostConfig, Dataset,
    Dataset32, Dataset64, DecisionStump, EelConfig, EelOutcome64, Ensemble, FoldPlan, GaConfig,
    Genome, LinearClassifier64, LinearEnsemble64, LmsConfig, Predict, WeightedEnsemble64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_config() -> EelConfig {
    EelConfig {
        ga: GaConfig {
            population_size: 24,
            max_evaluations: 480,
            ..GaConfig::default()
        },
        ..EelConfig::default()
    }
}

/// Noisy three-band data in [-1, 1]^2.
fn bands(n: usize, k: usize, seed: u64) -> Dataset64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        let noisy = x + 0.3 * y + rng.random_range(-0.3..0.3);
        let class = if k == 2 {
            usize::from(noisy > 0.0)
        } else if noisy < -0.35 {
            0
        } else if noisy < 0.35 {
            1
        } else {
            2
        };
        rows.push(vec![x, y]);
        labels.push(class);
    }
    Dataset::from_rows(&rows, labels, k).unwrap()
}

#[test]
fn off_eel_ensemble_never_worse_than_its_seed() {
    for (k, seed) in [(2, 1), (3, 2)] {
        let data = bands(90, k, seed);
        let out = off_eel(&data, &small_config(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let seed_errors = eel_core::error_count(
            &out.best_single.predict_dataset(&data).unwrap(),
            data.labels(),
        );
        assert!(ensemble_error_count(&out.ensemble, &data).unwrap() <= seed_errors);
        assert!(out.ensemble.len() <= 24 + 1);
    }
}

#[test]
fn on_eel_learns_three_bands() {
    let data = bands(90, 3, 5);
    let out = on_eel(&data, &small_config(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let err: f64 =
        error_rate(&out.ensemble.predict_dataset(&data).unwrap(), data.labels()).unwrap();
    // Guessing would sit near 2/3.
    assert!(err < 0.5, "{err}");
    assert_eq!(out.evaluations, 480);
}

#[test]
fn f32_pipeline_runs() {
    let d64 = bands(60, 2, 7);
    let rows: Vec<Vec<f32>> = d64
        .rows()
        .map(|r| r.iter().map(|&v| v as f32).collect())
        .collect();
    let d32: Dataset32 = Dataset::from_rows(&rows, d64.labels().to_vec(), 2).unwrap();
    let out = off_eel(&d32, &small_config(), &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
    assert!(out.train_error < 0.4);
    let lms = lms_train(
        &d32,
        &LmsConfig::default(),
        &mut ChaCha8Rng::seed_from_u64(7),
    )
    .unwrap();
    let err: f32 =
        error_rate(&lms.classifier.predict_dataset(&d32).unwrap(), d32.labels()).unwrap();
    assert!(err < 0.3);
}

#[test]
fn baselines_fit_separable_bands() {
    let data = bands(120, 2, 11);
    let lms = lms_train(
        &data,
        &LmsConfig::default(),
        &mut ChaCha8Rng::seed_from_u64(0),
    )
    .unwrap();
    let lms_err: f64 = error_rate(
        &lms.classifier.predict_dataset(&data).unwrap(),
        data.labels(),
    )
    .unwrap();
    assert!(lms_err < 0.2, "{lms_err}");
    let boost = adaboost_train(&data, &BoostConfig { max_rounds: 100 }).unwrap();
    let boost_err: f64 = error_rate(
        &boost.ensemble.predict_dataset(&data).unwrap(),
        data.labels(),
    )
    .unwrap();
    assert!(boost_err < lms_err + 0.05, "{boost_err}");
}

#[test]
fn json_round_trips() {
    let data = bands(60, 3, 13);
    let out: EelOutcome64 =
        off_eel(&data, &small_config(), &mut ChaCha8Rng::seed_from_u64(13)).unwrap();
    let text = serde_json::to_string(&out).unwrap();
    let back: EelOutcome64 = serde_json::from_str(&text).unwrap();
    assert_eq!(back, out);

    let ens: &LinearEnsemble64 = &out.ensemble;
    let back: LinearEnsemble64 =
        serde_json::from_str(&serde_json::to_string(ens).unwrap()).unwrap();
    assert_eq!(&back, ens);

    let c: LinearClassifier64 = decode(&Genome(vec![0.5, -1.0, 0.25]), 2, 2).unwrap();
    let v = serde_json::to_value(&c).unwrap();
    assert_eq!(
        v,
        serde_json::json!({"classes": 2, "genome": [0.5, -1.0, 0.25]})
    );
    assert_eq!(serde_json::from_value::<LinearClassifier64>(v).unwrap(), c);

    let plan = FoldPlan {
        k: 2,
        assignments: vec![0, 1, 1, 0],
        seed: 3,
    };
    let back: FoldPlan = serde_json::from_str(&serde_json::to_string(&plan).unwrap()).unwrap();
    assert_eq!(back, plan);

    let we = WeightedEnsemble64 {
        n_classes: 2,
        stumps: vec![DecisionStump {
            feature: 0,
            threshold: f64::NEG_INFINITY,
            op: Comparison::Greater,
            class_if_true: 1,
            class_if_false: 0,
        }],
        alphas: vec![0.7],
    };
    let text = serde_json::to_string(&we).unwrap();
    assert!(text.contains("\"-inf\""));
    assert_eq!(
        serde_json::from_str::<WeightedEnsemble64>(&text).unwrap(),
        we
    );
}

#[test]
fn single_member_ensemble_matches_member() {
    let data = bands(40, 3, 17);
    let c = decode(&Genome(vec![1.0, 0.0, 0.2, -1.0, 0.0, 0.2]), 3, 2).unwrap();
    let e = Ensemble::new(vec![c.clone()]);
    assert_eq!(
        e.predict_dataset(&data).unwrap(),
        c.predict_dataset(&data).unwrap()
    );
}
