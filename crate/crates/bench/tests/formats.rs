use handcraft_bench::cache;
use handcraft_bench::datasets::{load_csv, Schema};
use handcraft_bench::model_io::{deserialize, load, save, serialize, summary};
use handcraft_bench::BenchError;
use handcraft_core::classify::{fit, ClassifierKind, ForestConfig, GbdtConfig, TrainConfig, TrainedModel};
use handcraft_core::dataset::{LabeledDataset, Source};
use handcraft_core::features::{FeatureMethod, FeatureParams, HogParams};
use handcraft_core::imaging::PreprocessConfig;
use handcraft_core::{rng, Matrix};
use proptest::prelude::*;
use rand::Rng;

fn blobs(n: usize, d: usize, seed: u64) -> LabeledDataset {
    let mut rng = rng::stream(seed, 0);
    let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&l| (0..d).map(|j| if j % 3 == l { 1.0 } else { 0.0 } + rng.gen_range(-0.4..0.4)).collect())
        .collect();
    LabeledDataset::new(Matrix::from_rows(&rows).unwrap(), labels).unwrap()
}

fn models() -> Vec<TrainedModel> {
    let ds = blobs(60, 5, 1);
    [ClassifierKind::Knn, ClassifierKind::Svm, ClassifierKind::Rf, ClassifierKind::Gbdt]
        .into_iter()
        .map(|k| {
            let cfg = match TrainConfig::defaults(k) {
                TrainConfig::Rf(c) => TrainConfig::Rf(ForestConfig { n_trees: 15, ..c }),
                TrainConfig::Gbdt(c) => TrainConfig::Gbdt(GbdtConfig { n_rounds: 12, ..c }),
                other => other,
            };
            fit(&ds, &cfg).unwrap()
        })
        .collect()
}

#[test]
fn model_round_trip_predicts_identically() {
    let queries = blobs(80, 5, 2).features;
    let dir = tempfile::tempdir().unwrap();
    for model in models() {
        let back = deserialize(&serialize(&model)).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.predict(&queries).unwrap(), model.predict(&queries).unwrap());

        let path = dir.path().join(format!("{}.hcm", model.kind()));
        save(&path, &model).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(loaded.predict(&queries).unwrap(), model.predict(&queries).unwrap());
        assert!(summary(&loaded).starts_with(&format!("kind: {}\n", model.kind())));
    }
}

#[test]
fn model_files_start_with_magic_and_version() {
    for model in models() {
        let bytes = serialize(&model);
        assert_eq!(&bytes[..8], b"HCMODEL\0");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
    }
}

fn cached_models() -> &'static [TrainedModel] {
    static MODELS: std::sync::OnceLock<Vec<TrainedModel>> = std::sync::OnceLock::new();
    MODELS.get_or_init(models)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn truncated_or_corrupted_models_are_rejected_without_panicking(which in 0usize..4, cut in 0.0f64..1.0, flip in any::<(usize, u8)>()) {
        let bytes = serialize(&cached_models()[which]);
        let at = (cut * bytes.len() as f64) as usize;
        let truncated = deserialize(&bytes[..at]);
        prop_assert!(matches!(truncated, Err(BenchError::Format { .. })), "{:?}", truncated.map(|m| m.kind()));
        let mut corrupted = bytes.clone();
        let i = flip.0 % corrupted.len();
        corrupted[i] ^= flip.1 | 1;
        // any outcome is fine as long as decoding does not panic
        let _ = deserialize(&corrupted);
    }
}

#[test]
fn feature_cache_round_trip_and_stale_keys() {
    let dir = tempfile::tempdir().unwrap();
    let source = Source { name: "d".into(), digest: "abc".into() };
    let params = FeatureParams::Hog(HogParams::default());
    let ds = blobs(30, 7, 3).with_source(source.clone()).with_method(FeatureMethod::Hog);
    let pre = PreprocessConfig::default();
    let key = cache::cache_key(&source.digest, &pre, &params);

    assert!(cache::fetch(dir.path(), &key, &source, &params).unwrap().is_none());
    let path = cache::store(dir.path(), &key, &ds).unwrap();
    assert_eq!(&std::fs::read(&path).unwrap()[..8], b"HCFEAT\0\0");
    assert_eq!(cache::fetch(dir.path(), &key, &source, &params).unwrap(), Some(ds.clone()));

    // every input of the key changes it
    let other_pre = PreprocessConfig { deskew_enabled: false, ..pre };
    let other_params = FeatureParams::Hog(HogParams { n_bins: 8, ..HogParams::default() });
    for k in [
        cache::cache_key("abd", &pre, &params),
        cache::cache_key(&source.digest, &other_pre, &params),
        cache::cache_key(&source.digest, &pre, &other_params),
    ] {
        assert_ne!(k, key);
    }
    // a file for another key that happens to sit at this path is ignored
    let bytes = cache::encode("something else", &ds);
    assert!(cache::decode(&bytes, &key, &source, &params).unwrap().is_none());
    assert!(cache::decode(&bytes[..bytes.len() - 3], "something else", &source, &params).is_err());
}

#[test]
fn csv_errors_name_the_offending_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let good = format!("3{}\n", ",0".repeat(784));
    let ragged = format!("4{}\n", ",0".repeat(780));
    std::fs::write(&path, format!("{good}{good}{ragged}{good}")).unwrap();
    match load_csv(&path, Schema::LabelFirst, 28) {
        Err(BenchError::Parse { line, msg, .. }) => {
            assert_eq!(line, 3);
            assert!(msg.contains("785"), "{msg}");
        }
        other => panic!("expected parse error, got {other:?}"),
    }

    std::fs::write(&path, format!("{good}{good}")).unwrap();
    let set = load_csv(&path, Schema::LabelFirst, 28).unwrap();
    assert_eq!(set.labels, vec![3, 3]);
    assert_eq!(set.source.name, "d");
    assert_eq!(set.source.digest.len(), 64);

    let missing = load_csv(&dir.path().join("nope.csv"), Schema::LabelFirst, 28);
    assert!(matches!(missing, Err(BenchError::Io { .. })));
}
