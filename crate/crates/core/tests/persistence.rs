mod support;

use rand::Rng;
use support::{fixtures_matrix, rng};
use tubepulse_core::model::train;
use tubepulse_core::{BoostParams, ForestParams, ModelError, ModelSpec, RegressionModel, TargetTransform, TreeParams};

fn specs() -> Vec<ModelSpec> {
    vec![
        ModelSpec::Tree(TreeParams::default()),
        ModelSpec::Forest(ForestParams {
            n_trees: 20,
            seed: 11,
            ..ForestParams::default()
        }),
        ModelSpec::Boosted(BoostParams {
            n_rounds: 30,
            ..BoostParams::default()
        }),
    ]
}

fn saved(m: &RegressionModel) -> Vec<u8> {
    let mut out = Vec::new();
    m.save(&mut out).unwrap();
    out
}

#[test]
fn identical_inputs_give_byte_identical_files() {
    let data = fixtures_matrix("synthetic_200.csv");
    for spec in specs() {
        let a = train(&spec, &data, TargetTransform::Log1p, None).unwrap();
        let b = train(&spec, &data, TargetTransform::Log1p, None).unwrap();
        assert_eq!(saved(&a), saved(&b), "{:?}", spec.kind());
    }
}

#[test]
fn reloaded_models_predict_identically() {
    let data = fixtures_matrix("synthetic_200.csv");
    let mut r = rng(51);
    for spec in specs() {
        let m = train(&spec, &data, TargetTransform::Log1p, None).unwrap();
        let back = RegressionModel::load(saved(&m).as_slice()).unwrap();
        assert_eq!(back, m);
        for _ in 0..100 {
            // A stored row with every column nudged, so thresholds are
            // exercised off the training values too.
            let base = data.x.row(r.random_range(0..data.n_rows()));
            let row: Vec<f64> = base.iter().map(|v| v + r.random_range(-2.0..2.0)).collect();
            assert_eq!(
                m.predict_row(&row).unwrap().to_bits(),
                back.predict_row(&row).unwrap().to_bits()
            );
        }
    }
}

#[test]
fn truncated_files_fail_loudly() {
    let data = fixtures_matrix("synthetic_200.csv");
    let m = train(&specs()[1], &data, TargetTransform::Log1p, None).unwrap();
    let bytes = saved(&m);
    // The last byte is the newline, which carries no content.
    let body = bytes.len() - 1;
    let mut cuts: Vec<usize> = vec![0, 1, 10, 50, body / 2, body - 2, body - 1];
    let mut r = rng(52);
    cuts.extend((0..40).map(|_| r.random_range(0..body)));
    for cut in cuts {
        let err = RegressionModel::load(&bytes[..cut]).unwrap_err();
        assert!(
            matches!(err, ModelError::Corrupt(_) | ModelError::NotAModel),
            "cut {cut}: {err}"
        );
    }
    let mut flipped = bytes.clone();
    let i = bytes.len() - 40;
    flipped[i] = if flipped[i] == b'1' { b'2' } else { b'1' };
    assert!(RegressionModel::load(flipped.as_slice()).is_err());
}
