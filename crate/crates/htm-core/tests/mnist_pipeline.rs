//! End-to-end classification pipeline on the bundled MNIST subsets.
//!
//! These tests pin the engine's behavior on real data: exact sparsity on
//! every eligible test image, plausible KNN accuracy through the frozen
//! pooler, and the noise-level ordering. The strict published thresholds
//! live in the acceptance suite.

use std::path::PathBuf;

use htm_core::bits::BitVector;
use htm_core::config::RegionConfig;
use htm_core::data::{binarize, load_idx, resize_nearest};
use htm_core::experiments::{
    classify, noise_sweep, train_sp, ClassifySpec, FieldSpec, NoiseSweepSpec, TrainSpSpec,
};
use htm_core::region::Region;
use htm_core::synapse::FieldMode;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist")
}

fn mnist_available() -> bool {
    data_dir().join("train-images-10k-idx3-ubyte").exists()
}

#[test]
fn sparsity_is_exact_on_real_test_images() {
    if !mnist_available() {
        eprintln!("skipping: MNIST subsets not present under data/mnist");
        return;
    }
    let set = load_idx(
        &data_dir().join("test-images-2k-idx3-ubyte"),
        &data_dir().join("test-labels-2k-idx1-ubyte"),
    )
    .unwrap();
    let mut region = Region::new(
        RegionConfig::default(),
        FieldMode::LocalRom { radius: 5, rows: 16, cols: 16 },
    )
    .unwrap();
    let mut saturated = 0usize;
    for img in &set.images {
        let x: BitVector = binarize(&resize_nearest(img, 16, 16), 128);
        let r = region.sp_step(&x, false).unwrap();
        let eligible = r.eligible.popcount();
        if eligible >= 20 {
            assert_eq!(r.winners.len(), 20, "eligible={eligible}");
            saturated += 1;
        } else {
            assert_eq!(r.winners.len(), eligible);
        }
    }
    assert!(saturated > 1800, "only {saturated} of 2000 images saturated");
}

#[test]
fn classify_and_noise_pipeline() {
    if !mnist_available() {
        eprintln!("skipping: MNIST subsets not present under data/mnist");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let snapshot_path = dir.path().join("sp.htmr");
    let trained = train_sp(&TrainSpSpec {
        config: None,
        field: FieldSpec::default(),
        train_images: data_dir().join("train-images-10k-idx3-ubyte"),
        train_labels: data_dir().join("train-labels-10k-idx1-ubyte"),
        train_limit: Some(10_000),
        epochs: 3,
        seed: 42,
        snapshot_path: snapshot_path.clone(),
    })
    .unwrap();
    assert_eq!(trained.epochs.len(), 3);
    assert_eq!(trained.trained_images, 10_000);

    let result = classify(&ClassifySpec {
        snapshot_path: snapshot_path.clone(),
        train_images: data_dir().join("train-images-10k-idx3-ubyte"),
        train_labels: data_dir().join("train-labels-10k-idx1-ubyte"),
        test_images: data_dir().join("test-images-2k-idx3-ubyte"),
        test_labels: data_dir().join("test-labels-2k-idx1-ubyte"),
        train_limit: Some(10_000),
        test_limit: Some(2_000),
        knn_k: 5,
        sweep: None,
        dump_test_sdrs: false,
    })
    .unwrap();
    let acc = result.rows[0].accuracy;
    eprintln!("SP+KNN accuracy at 10k/2k: {acc:.4}");
    assert!(acc > 0.60, "accuracy collapsed: {acc}");

    let noise = noise_sweep(&NoiseSweepSpec {
        snapshot_path,
        train_images: data_dir().join("train-images-10k-idx3-ubyte"),
        train_labels: data_dir().join("train-labels-10k-idx1-ubyte"),
        test_images: data_dir().join("test-images-2k-idx3-ubyte"),
        test_labels: data_dir().join("test-labels-2k-idx1-ubyte"),
        train_limit: Some(10_000),
        test_limit: Some(2_000),
        knn_k: 5,
        seed: 42,
        sp_densities: vec![0.10, 0.20],
        gaussian_variances: vec![0.10, 0.20],
    })
    .unwrap();
    for row in &noise.rows {
        eprintln!("noise {} {} -> {:.4}", row.parameter, row.value, row.accuracy);
    }
    // stronger noise never helps
    assert!(noise.rows[2].accuracy <= noise.rows[1].accuracy + 1e-9, "salt&pepper ordering");
    assert!(noise.rows[4].accuracy <= noise.rows[3].accuracy + 1e-9, "gaussian ordering");
}
