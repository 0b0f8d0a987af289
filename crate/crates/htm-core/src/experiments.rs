//! Experiment orchestration: unsupervised SP training, KNN classification
//! with parameter sweeps, noise robustness, cyclic-sequence prediction and
//! a throughput benchmark.
//!
//! Every run is a pure function of its spec (seeded end to end), so
//! repeated invocations produce byte-identical reports.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::config::RegionConfig;
use crate::data::{
    self, binarize, gaussian_noise, load_idx, resize_nearest, salt_pepper, GrayImage, LabeledSet,
    DEFAULT_BINARIZE_THRESHOLD,
};
use crate::error::{HtmError, Result};
use crate::eval::{
    classification_accuracy, knn_classify_batch, prediction_accuracy, PredictionTrace, SdrDataset,
    DEFAULT_HIT_FRACTION,
};
use crate::glyphs::{self, GLYPH_COLS, GLYPH_ROWS};
use crate::region::Region;
use crate::snapshot;
use crate::synapse::FieldMode;

/// Input image side for the MNIST profile (28x28 sources are resized to
/// 16x16 before binarization).
pub const MNIST_SIDE: usize = 16;
/// Default receptive-field radius for local fields.
pub const DEFAULT_FIELD_RADIUS: usize = 5;
/// Winning columns used by the sequence-prediction profile.
pub const SEQUENCE_WINNERS: usize = 10;
/// SP passes over the glyph cycle before the poolers are frozen for the
/// tracked presentations.
pub const SEQUENCE_SP_WARMUP: usize = 3;

/// Serializable receptive-field choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FieldSpec {
    Global,
    Local { radius: usize },
}

impl FieldSpec {
    pub fn to_mode(self, rows: usize, cols: usize) -> FieldMode {
        match self {
            FieldSpec::Global => FieldMode::GlobalLfsr,
            FieldSpec::Local { radius } => FieldMode::LocalRom { radius, rows, cols },
        }
    }
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::Local { radius: DEFAULT_FIELD_RADIUS }
    }
}

/// One row of the sweep/accuracy CSV: (experiment, parameter, value,
/// accuracy).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub experiment: String,
    pub parameter: String,
    pub value: String,
    pub accuracy: f64,
}

pub fn accuracy_rows_to_csv(rows: &[AccuracyRow]) -> String {
    let mut out = String::from("experiment,parameter,value,accuracy\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.6}\n",
            r.experiment, r.parameter, r.value, r.accuracy
        ));
    }
    out
}

fn mnist_config(base: Option<RegionConfig>, seed: u64) -> RegionConfig {
    let mut cfg = base.unwrap_or_default();
    cfg.input_size = MNIST_SIDE * MNIST_SIDE;
    cfg.rng_seed = seed;
    cfg
}

fn encode_set(set: &LabeledSet) -> Vec<BitVector> {
    set.images
        .iter()
        .map(|img| binarize(&resize_nearest(img, MNIST_SIDE, MNIST_SIDE), DEFAULT_BINARIZE_THRESHOLD))
        .collect()
}

fn load_limited(images: &std::path::Path, labels: &std::path::Path, limit: Option<usize>) -> Result<LabeledSet> {
    let mut set = load_idx(images, labels)?;
    if let Some(n) = limit {
        if set.images.len() < n {
            return Err(HtmError::Data(format!(
                "{}: wanted {n} records, file holds {}",
                set.name,
                set.images.len()
            )));
        }
        set.images.truncate(n);
        set.labels.truncate(n);
    }
    Ok(set)
}

// ---------------------------------------------------------------------------
// train-sp

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainSpSpec {
    pub config: Option<RegionConfig>,
    #[serde(default)]
    pub field: FieldSpec,
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    /// Training subset size; None uses the whole file.
    pub train_limit: Option<usize>,
    pub epochs: usize,
    pub seed: u64,
    /// Where the frozen-region snapshot is written.
    pub snapshot_path: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainSpResult {
    /// (epoch, mean winner overlap) rows.
    pub epochs: Vec<(usize, f64)>,
    pub snapshot_bytes: usize,
    pub trained_images: usize,
}

pub fn train_sp(spec: &TrainSpSpec) -> Result<TrainSpResult> {
    let set = load_limited(&spec.train_images, &spec.train_labels, spec.train_limit)?;
    let cfg = mnist_config(spec.config.clone(), spec.seed);
    let mode = spec.field.to_mode(MNIST_SIDE, MNIST_SIDE);
    let mut region = Region::new(cfg, mode)?;
    let inputs = encode_set(&set);
    let mut epochs = Vec::with_capacity(spec.epochs);
    for epoch in 0..spec.epochs {
        let mut overlap_sum = 0.0;
        for x in &inputs {
            let r = region.sp_step(x, true)?;
            if !r.winners.is_empty() {
                let s: u32 = r.winners.iter().map(|&w| r.overlaps[w]).sum();
                overlap_sum += s as f64 / r.winners.len() as f64;
            }
        }
        epochs.push((epoch + 1, overlap_sum / inputs.len() as f64));
    }
    let snapshot_bytes = snapshot::save_region(&region, &spec.snapshot_path)?;
    Ok(TrainSpResult {
        epochs,
        snapshot_bytes,
        trained_images: inputs.len(),
    })
}

pub fn train_sp_csv(result: &TrainSpResult) -> String {
    let mut out = String::from("epoch,mean_winner_overlap\n");
    for (e, m) in &result.epochs {
        out.push_str(&format!("{e},{m:.6}\n"));
    }
    out
}

// ---------------------------------------------------------------------------
// classify

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifySpec {
    pub snapshot_path: PathBuf,
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
    pub knn_k: usize,
    /// Optional inference-time sweep: parameter name and values. Supported
    /// parameters: winners_per_step, min_overlap, train_size.
    pub sweep: Option<(String, Vec<u32>)>,
    /// Also return the test-set SDR dump (one line per input, winning
    /// column ids comma-separated).
    #[serde(default)]
    pub dump_test_sdrs: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyResult {
    pub rows: Vec<AccuracyRow>,
    /// Present when the request asked for the SDR dump; computed at the
    /// default (non-sweep) settings.
    #[serde(default)]
    pub sdr_dump: Option<String>,
}

fn encode_through(region: &mut Region, inputs: &[BitVector]) -> Result<Vec<BitVector>> {
    let mut out = Vec::with_capacity(inputs.len());
    for x in inputs {
        out.push(region.sp_step(x, false)?.sdr);
    }
    Ok(out)
}

pub fn classify(spec: &ClassifySpec) -> Result<ClassifyResult> {
    let base = snapshot::load_region(&spec.snapshot_path)?;
    let train = load_limited(&spec.train_images, &spec.train_labels, spec.train_limit)?;
    let test = load_limited(&spec.test_images, &spec.test_labels, spec.test_limit)?;
    if test.images.is_empty() {
        return Err(HtmError::Experiment("empty test set".into()));
    }
    let train_inputs = encode_set(&train);
    let test_inputs = encode_set(&test);

    let run_once = |cfg_patch: &dyn Fn(&mut RegionConfig), ref_limit: Option<usize>| -> Result<f64> {
        let mut region = base.clone();
        cfg_patch(&mut region.config);
        region.config = region.config.clone().validate()
            .map_err(|e| HtmError::Experiment(format!("sweep produced invalid config: {e}")))?;
        let mut train_sdrs = encode_through(&mut region, &train_inputs)?;
        let mut labels = train.labels.clone();
        if let Some(n) = ref_limit {
            train_sdrs.truncate(n);
            labels.truncate(n);
        }
        let refs = SdrDataset { sdrs: train_sdrs, labels };
        let test_sdrs = encode_through(&mut region, &test_inputs)?;
        let predicted = knn_classify_batch(&refs, &test_sdrs, spec.knn_k)?;
        classification_accuracy(&predicted, &test.labels)
    };

    let sdr_dump = if spec.dump_test_sdrs {
        let mut region = base.clone();
        let sdrs = encode_through(&mut region, &test_inputs)?;
        let mut out = String::new();
        for sdr in &sdrs {
            let ids: Vec<String> = sdr.ones().map(|i| i.to_string()).collect();
            out.push_str(&ids.join(","));
            out.push('\n');
        }
        Some(out)
    } else {
        None
    };

    let mut rows = Vec::new();
    match &spec.sweep {
        None => {
            let acc = run_once(&|_| {}, None)?;
            rows.push(AccuracyRow {
                experiment: "classify".into(),
                parameter: "default".into(),
                value: "-".into(),
                accuracy: acc,
            });
        }
        Some((param, values)) => {
            for &v in values {
                let acc = match param.as_str() {
                    "winners_per_step" => run_once(&move |c| c.winners_per_step = v as usize, None)?,
                    "min_overlap" => run_once(&move |c| c.min_overlap = v, None)?,
                    "train_size" => run_once(&|_| {}, Some(v as usize))?,
                    other => {
                        return Err(HtmError::Experiment(format!(
                            "unknown sweep parameter {other:?} (expected winners_per_step, \
                             min_overlap or train_size)"
                        )));
                    }
                };
                rows.push(AccuracyRow {
                    experiment: "classify".into(),
                    parameter: param.clone(),
                    value: v.to_string(),
                    accuracy: acc,
                });
            }
        }
    }
    Ok(ClassifyResult { rows, sdr_dump })
}

// ---------------------------------------------------------------------------
// noise sweep

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseSweepSpec {
    pub snapshot_path: PathBuf,
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
    pub knn_k: usize,
    pub seed: u64,
    /// Salt-and-pepper densities to evaluate.
    pub sp_densities: Vec<f64>,
    /// Gaussian variances (fraction of full scale squared) to evaluate.
    pub gaussian_variances: Vec<f64>,
}

impl NoiseSweepSpec {
    pub fn default_levels() -> (Vec<f64>, Vec<f64>) {
        (vec![0.10, 0.20], vec![0.10, 0.20])
    }
}

pub fn noise_sweep(spec: &NoiseSweepSpec) -> Result<ClassifyResult> {
    let base = snapshot::load_region(&spec.snapshot_path)?;
    let train = load_limited(&spec.train_images, &spec.train_labels, spec.train_limit)?;
    let test = load_limited(&spec.test_images, &spec.test_labels, spec.test_limit)?;
    let mut region = base.clone();
    let refs = SdrDataset {
        sdrs: encode_through(&mut region, &encode_set(&train))?,
        labels: train.labels.clone(),
    };

    let mut eval_images = |images: &[GrayImage], tag: (&str, String)| -> Result<AccuracyRow> {
        let inputs: Vec<BitVector> = images
            .iter()
            .map(|img| {
                binarize(
                    &resize_nearest(img, MNIST_SIDE, MNIST_SIDE),
                    DEFAULT_BINARIZE_THRESHOLD,
                )
            })
            .collect();
        let sdrs = encode_through(&mut region, &inputs)?;
        let predicted = knn_classify_batch(&refs, &sdrs, spec.knn_k)?;
        let accuracy = classification_accuracy(&predicted, &test.labels)?;
        Ok(AccuracyRow {
            experiment: "noise".into(),
            parameter: tag.0.into(),
            value: tag.1,
            accuracy,
        })
    };

    let mut rows = Vec::new();
    rows.push(eval_images(&test.images, ("clean", "0".into()))?);
    for &density in &spec.sp_densities {
        let noisy: Vec<GrayImage> = test
            .images
            .iter()
            .enumerate()
            .map(|(i, img)| salt_pepper(img, density, spec.seed.wrapping_add(i as u64)))
            .collect();
        rows.push(eval_images(&noisy, ("salt_pepper_density", format!("{density:.2}")))?);
    }
    for &variance in &spec.gaussian_variances {
        let noisy: Vec<GrayImage> = test
            .images
            .iter()
            .enumerate()
            .map(|(i, img)| gaussian_noise(img, variance, spec.seed.wrapping_add(i as u64)))
            .collect();
        rows.push(eval_images(&noisy, ("gaussian_variance", format!("{variance:.2}")))?);
    }
    Ok(ClassifyResult { rows, sdr_dump: None })
}

// ---------------------------------------------------------------------------
// sequence prediction

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceSpec {
    /// Directory of 0.pgm..9.pgm glyphs; the built-in set when None.
    pub glyph_dir: Option<PathBuf>,
    /// Cyclic digit order presented to the region.
    pub order: Vec<u8>,
    pub presentations: usize,
    /// Salt-and-pepper density applied per presentation (0 = clean).
    pub noise_density: f64,
    pub seed: u64,
    pub config: Option<RegionConfig>,
    #[serde(default)]
    pub field: FieldSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceResult {
    /// First-order accuracy per presentation.
    pub first_order: Vec<f64>,
    /// Second-order accuracy per presentation.
    pub second_order: Vec<f64>,
    /// Bursting-column count per presentation.
    pub bursting: Vec<usize>,
    /// CSV body: presentation,first_order,second_order
    pub prediction_csv: String,
    /// CSV body: t,column,cell,active,predictive,learning
    pub cell_state_csv: String,
}

fn sequence_config(base: Option<RegionConfig>, seed: u64) -> RegionConfig {
    let mut cfg = base.unwrap_or_else(|| RegionConfig {
        winners_per_step: SEQUENCE_WINNERS,
        ..RegionConfig::default()
    });
    cfg.input_size = GLYPH_ROWS * GLYPH_COLS;
    cfg.rng_seed = seed;
    cfg
}

pub fn sequence(spec: &SequenceSpec) -> Result<SequenceResult> {
    if spec.presentations == 0 {
        return Err(HtmError::Experiment("presentations must be >= 1".into()));
    }
    if spec.order.is_empty() {
        return Err(HtmError::Experiment("sequence order is empty".into()));
    }
    let glyphs = match &spec.glyph_dir {
        Some(dir) => glyphs::load_glyph_dir(dir)?,
        None => glyphs::builtin_glyph_set(),
    };
    let images: Vec<GrayImage> = spec
        .order
        .iter()
        .map(|&d| {
            glyphs
                .labels
                .iter()
                .position(|&l| l == d)
                .map(|i| glyphs.images[i].clone())
                .ok_or_else(|| HtmError::Data(format!("glyph {d} missing from the set")))
        })
        .collect::<Result<_>>()?;

    let cfg = sequence_config(spec.config.clone(), spec.seed);
    let mode = spec.field.to_mode(GLYPH_ROWS, GLYPH_COLS);
    let mut region = Region::new(cfg, mode)?;

    // SP warmup on the clean cycle, then freeze the pooler: the tracked
    // presentations exercise temporal-memory learning only.
    for _ in 0..SEQUENCE_SP_WARMUP {
        for img in &images {
            let x = binarize(img, DEFAULT_BINARIZE_THRESHOLD);
            region.sp_step(&x, true)?;
        }
    }
    region.reset_cell_state();

    let per = images.len();
    let n_c = region.config.num_columns;
    let mut trace = PredictionTrace {
        winning: Vec::with_capacity(per * spec.presentations),
        predicted_t1: Vec::with_capacity(per * spec.presentations),
        predicted_t2: Vec::with_capacity(per * spec.presentations),
        steps_per_presentation: per,
    };
    let mut bursting = Vec::with_capacity(spec.presentations);
    let mut cell_csv = String::from("t,column,cell,active,predictive,learning\n");
    let mut noise_counter = 0u64;
    for p in 0..spec.presentations {
        let mut bursts = 0usize;
        for (t, img) in images.iter().enumerate() {
            let presented = if spec.noise_density > 0.0 {
                noise_counter += 1;
                salt_pepper(img, spec.noise_density, spec.seed.wrapping_add(noise_counter))
            } else {
                img.clone()
            };
            let x = binarize(&presented, DEFAULT_BINARIZE_THRESHOLD);
            let sp = region.sp_step(&x, false)?;
            let report = region.tm_step(&sp, true);
            bursts += report.burst_columns.popcount();
            let ahead = region.lookahead(2);
            trace.winning.push(BitVector::from_indices(n_c, &sp.winners));
            trace.predicted_t1.push(ahead[0].clone());
            trace.predicted_t2.push(ahead[1].clone());
            region.dump_cell_state(p * per + t, &mut cell_csv);
        }
        bursting.push(bursts);
    }
    let first_order = prediction_accuracy(&trace, 1, DEFAULT_HIT_FRACTION)?;
    let second_order = prediction_accuracy(&trace, 2, DEFAULT_HIT_FRACTION)?;
    let mut prediction_csv = String::from("presentation,first_order,second_order\n");
    for p in 0..spec.presentations {
        prediction_csv.push_str(&format!(
            "{},{:.6},{:.6}\n",
            p + 1,
            first_order[p],
            second_order[p]
        ));
    }
    Ok(SequenceResult {
        first_order,
        second_order,
        bursting,
        prediction_csv,
        cell_state_csv: cell_csv,
    })
}

// ---------------------------------------------------------------------------
// bench

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSpec {
    pub samples: usize,
    pub seed: u64,
    pub config: Option<RegionConfig>,
    /// Worker counts to evaluate; [1, available cores] when empty.
    pub workers: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub metric: String,
    pub workers: usize,
    pub median_us: f64,
    pub samples_per_sec: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
    pub config_digest: u32,
    pub seed: u64,
    pub samples: usize,
}

fn synth_inputs(cfg: &RegionConfig, samples: usize, seed: u64) -> Vec<BitVector> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let ones: Vec<usize> = (0..cfg.input_size)
                .filter(|_| rng.gen::<f64>() < 0.15)
                .collect();
            BitVector::from_indices(cfg.input_size, &ones)
        })
        .collect()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if xs.is_empty() {
        return 0.0;
    }
    let mid = xs.len() / 2;
    if xs.len().is_multiple_of(2) {
        (xs[mid - 1] + xs[mid]) / 2.0
    } else {
        xs[mid]
    }
}

pub fn bench(spec: &BenchSpec) -> Result<BenchResult> {
    if spec.samples == 0 {
        return Err(HtmError::Experiment("bench needs at least one sample".into()));
    }
    let cfg = mnist_config(spec.config.clone(), spec.seed);
    let inputs = synth_inputs(&cfg, spec.samples, spec.seed);
    let workers = if spec.workers.is_empty() {
        let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        if cores > 1 {
            vec![1, cores]
        } else {
            vec![1]
        }
    } else {
        spec.workers.clone()
    };

    let mut rows = Vec::new();
    for &w in &workers {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| HtmError::Experiment(format!("thread pool: {e}")))?;
        pool.install(|| -> Result<()> {
            // SP training steps
            let mut region = Region::new(cfg.clone(), FieldSpec::default().to_mode(MNIST_SIDE, MNIST_SIDE))?;
            region.parallel = w > 1;
            let mut times = Vec::with_capacity(inputs.len());
            let start = Instant::now();
            for x in &inputs {
                let t0 = Instant::now();
                region.sp_step(x, true)?;
                times.push(t0.elapsed().as_secs_f64() * 1e6);
            }
            let wall = start.elapsed().as_secs_f64();
            rows.push(BenchRow {
                metric: "sp_train".into(),
                workers: w,
                median_us: median(times),
                samples_per_sec: inputs.len() as f64 / wall,
            });

            // SP inference steps (frozen permanences)
            let mut times = Vec::with_capacity(inputs.len());
            let start = Instant::now();
            for x in &inputs {
                let t0 = Instant::now();
                region.sp_step(x, false)?;
                times.push(t0.elapsed().as_secs_f64() * 1e6);
            }
            let wall = start.elapsed().as_secs_f64();
            rows.push(BenchRow {
                metric: "sp_infer".into(),
                workers: w,
                median_us: median(times),
                samples_per_sec: inputs.len() as f64 / wall,
            });

            // full TM steps on top of SP results
            let mut times = Vec::with_capacity(inputs.len());
            let start = Instant::now();
            for x in &inputs {
                let sp = region.sp_step(x, false)?;
                let t0 = Instant::now();
                region.tm_step(&sp, true);
                times.push(t0.elapsed().as_secs_f64() * 1e6);
            }
            let wall = start.elapsed().as_secs_f64();
            rows.push(BenchRow {
                metric: "tm_step".into(),
                workers: w,
                median_us: median(times),
                samples_per_sec: inputs.len() as f64 / wall,
            });
            Ok(())
        })?;
    }
    Ok(BenchResult {
        rows,
        config_digest: snapshot::config_digest(&cfg),
        seed: spec.seed,
        samples: spec.samples,
    })
}

pub fn bench_csv(result: &BenchResult) -> String {
    let mut out = String::from("metric,workers,median_us,samples_per_sec\n");
    for r in &result.rows {
        out.push_str(&format!(
            "{},{},{:.3},{:.1}\n",
            r.metric, r.workers, r.median_us, r.samples_per_sec
        ));
    }
    out.push_str(&format!(
        "# config_digest={:08x} seed={} samples={}\n",
        result.config_digest, result.seed, result.samples
    ));
    out
}

// ---------------------------------------------------------------------------

/// The built-in default presentation order.
pub fn default_sequence_order() -> Vec<u8> {
    glyphs::DEFAULT_SEQUENCE.to_vec()
}

/// The default noise levels evaluated by the noise sweep.
pub fn default_noise_levels() -> (Vec<f64>, Vec<f64>) {
    NoiseSweepSpec::default_levels()
}

pub use data::DEFAULT_BINARIZE_THRESHOLD as BINARIZE_THRESHOLD;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_clean_reaches_full_first_order() {
        let spec = SequenceSpec {
            glyph_dir: None,
            order: default_sequence_order(),
            presentations: 10,
            noise_density: 0.0,
            seed: 42,
            config: None,
            field: FieldSpec::default(),
        };
        let r = sequence(&spec).unwrap();
        assert_eq!(r.first_order.len(), 10);
        assert_eq!(r.first_order[0], 0.0, "no predictions at presentation 1");
        for p in 5..10 {
            assert!(
                r.first_order[p] >= 0.95,
                "presentation {}: first-order {:?}",
                p + 1,
                r.first_order
            );
        }
        for p in 0..3 {
            assert_eq!(r.second_order[p], 0.0, "{:?}", r.second_order);
        }
        assert!(r.second_order[3] > 0.0, "{:?}", r.second_order);
    }

    #[test]
    fn sequence_rejects_empty() {
        let bad = SequenceSpec {
            glyph_dir: None,
            order: vec![],
            presentations: 5,
            noise_density: 0.0,
            seed: 1,
            config: None,
            field: FieldSpec::default(),
        };
        assert!(sequence(&bad).is_err());
    }

    #[test]
    fn single_presentation_is_all_burst() {
        let spec = SequenceSpec {
            glyph_dir: None,
            order: default_sequence_order(),
            presentations: 1,
            noise_density: 0.0,
            seed: 42,
            config: None,
            field: FieldSpec::default(),
        };
        let r = sequence(&spec).unwrap();
        assert_eq!(r.first_order, vec![0.0]);
        assert_eq!(r.second_order, vec![0.0]);
        assert_eq!(r.bursting[0], 5 * SEQUENCE_WINNERS);
    }

    #[test]
    fn bench_zero_samples_rejected() {
        let spec = BenchSpec {
            samples: 0,
            seed: 1,
            config: None,
            workers: vec![1],
        };
        assert!(bench(&spec).is_err());
    }

    #[test]
    fn bench_smoke() {
        let spec = BenchSpec {
            samples: 50,
            seed: 1,
            config: None,
            workers: vec![1],
        };
        let r = bench(&spec).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows.iter().all(|row| row.samples_per_sec > 0.0));
        let csv = bench_csv(&r);
        assert!(csv.contains("sp_train"));
        assert!(csv.contains("config_digest"));
    }
}
