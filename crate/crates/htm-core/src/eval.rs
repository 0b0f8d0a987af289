//! Supervised read-out over SDRs and prediction-accuracy metrics.

use rayon::prelude::*;

use crate::bits::BitVector;
use crate::error::{HtmError, Result};

pub const DEFAULT_KNN_K: usize = 5;
pub const DEFAULT_HIT_FRACTION: f64 = 0.8;

/// SDRs plus class labels, the KNN reference set.
#[derive(Debug, Clone)]
pub struct SdrDataset {
    pub sdrs: Vec<BitVector>,
    pub labels: Vec<u8>,
}

/// Classify one query SDR by majority label among the k nearest reference
/// SDRs under Hamming distance. Distance ties at the cut break toward the
/// lower training index; majority ties break toward the smallest class id.
pub fn knn_classify(train: &SdrDataset, query: &BitVector, k: usize) -> Result<u8> {
    if train.sdrs.is_empty() {
        return Err(HtmError::Eval("empty KNN training set".into()));
    }
    debug_assert!(k >= 1);
    let mut dist: Vec<(usize, usize)> = train
        .sdrs
        .iter()
        .enumerate()
        .map(|(i, sdr)| (query.distance(sdr), i))
        .collect();
    let k = k.min(dist.len());
    dist.sort_unstable();
    let mut votes = [0usize; 256];
    for &(_, i) in dist.iter().take(k) {
        votes[train.labels[i] as usize] += 1;
    }
    let best = votes
        .iter()
        .enumerate()
        .max_by_key(|&(label, &count)| (count, std::cmp::Reverse(label)))
        .unwrap()
        .0;
    Ok(best as u8)
}

/// Classify a batch of queries (parallel over queries).
pub fn knn_classify_batch(train: &SdrDataset, queries: &[BitVector], k: usize) -> Result<Vec<u8>> {
    if train.sdrs.is_empty() {
        return Err(HtmError::Eval("empty KNN training set".into()));
    }
    Ok(queries
        .par_iter()
        .map(|q| knn_classify(train, q, k).expect("non-empty train set"))
        .collect())
}

/// Fraction of matching positions.
pub fn classification_accuracy(predicted: &[u8], truth: &[u8]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(HtmError::Eval(format!(
            "length mismatch: {} predictions vs {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(HtmError::Eval("empty prediction set".into()));
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// Per-step record of a sequence run: the winning columns and the columns
/// predicted one and two steps ahead (as emitted at this step).
#[derive(Debug, Clone)]
pub struct PredictionTrace {
    pub winning: Vec<BitVector>,
    pub predicted_t1: Vec<BitVector>,
    pub predicted_t2: Vec<BitVector>,
    /// Steps per presentation of the cyclic sequence.
    pub steps_per_presentation: usize,
}

/// Per-presentation prediction accuracy. Step t is a hit when the columns
/// predicted `order` steps earlier cover at least `hit_fraction` of the
/// winning columns; steps with no prior prediction (or an empty winner set)
/// are misses.
pub fn prediction_accuracy(
    trace: &PredictionTrace,
    order: usize,
    hit_fraction: f64,
) -> Result<Vec<f64>> {
    if trace.winning.is_empty() {
        return Err(HtmError::Eval("empty prediction trace".into()));
    }
    debug_assert!(order == 1 || order == 2);
    let per = trace.steps_per_presentation;
    debug_assert!(per > 0 && trace.winning.len().is_multiple_of(per));
    let predicted = if order == 1 {
        &trace.predicted_t1
    } else {
        &trace.predicted_t2
    };
    let presentations = trace.winning.len() / per;
    let mut out = Vec::with_capacity(presentations);
    for p in 0..presentations {
        let mut hits = 0usize;
        for s in p * per..(p + 1) * per {
            if s < order {
                continue;
            }
            let winners = &trace.winning[s];
            let total = winners.popcount();
            if total == 0 {
                continue;
            }
            let covered = predicted[s - order].intersection_count(winners);
            if covered as f64 / total as f64 >= hit_fraction {
                hits += 1;
            }
        }
        out.push(hits as f64 / per as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sdr(len: usize, ones: &[usize]) -> BitVector {
        BitVector::from_indices(len, ones)
    }

    #[test]
    fn knn_exact_match_k1() {
        let train = SdrDataset {
            sdrs: vec![sdr(100, &[1, 2]), sdr(100, &[50, 51]), sdr(100, &[90])],
            labels: vec![3, 7, 9],
        };
        assert_eq!(knn_classify(&train, &sdr(100, &[50, 51]), 1).unwrap(), 7);
    }

    #[test]
    fn knn_nearest_of_three() {
        // distances 2, 7, 11 from the query; k=1 picks the closest item
        let train = SdrDataset {
            sdrs: vec![
                sdr(100, &[0, 1, 2, 3]),
                sdr(100, &[0, 1, 10, 11, 12]),
                sdr(100, &[20, 21, 22, 23, 24]),
            ],
            labels: vec![1, 2, 3],
        };
        let q = sdr(100, &[0, 1, 2, 3, 4, 5]);
        assert_eq!(knn_classify(&train, &q, 1).unwrap(), 1);
    }

    #[test]
    fn knn_global_majority_when_k_is_everything() {
        let train = SdrDataset {
            sdrs: vec![sdr(10, &[0]), sdr(10, &[1]), sdr(10, &[2]), sdr(10, &[3])],
            labels: vec![5, 5, 5, 2],
        };
        assert_eq!(knn_classify(&train, &sdr(10, &[9]), 4).unwrap(), 5);
    }

    #[test]
    fn knn_tie_rules() {
        // two refs at the same distance: lower index enters the k-set first
        let train = SdrDataset {
            sdrs: vec![sdr(10, &[0]), sdr(10, &[1])],
            labels: vec![4, 6],
        };
        assert_eq!(knn_classify(&train, &sdr(10, &[5]), 1).unwrap(), 4);
        // majority tie between labels 4 and 6 -> smaller class id
        assert_eq!(knn_classify(&train, &sdr(10, &[5]), 2).unwrap(), 4);
        assert!(knn_classify(&SdrDataset { sdrs: vec![], labels: vec![] }, &sdr(10, &[0]), 1).is_err());
    }

    #[test]
    fn accuracy_basics() {
        assert_eq!(classification_accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(classification_accuracy(&[1, 2], &[3, 4]).unwrap(), 0.0);
        let pred: Vec<u8> = (0..100).map(|i| if i < 87 { 1 } else { 0 }).collect();
        let truth = vec![1u8; 100];
        assert!((classification_accuracy(&pred, &truth).unwrap() - 0.87).abs() < 1e-12);
        assert!(classification_accuracy(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn prediction_accuracy_perfect_and_empty() {
        let n = 10;
        let w: Vec<BitVector> = (0..10).map(|i| sdr(n, &[i % n])).collect();
        // predictions emitted at step s point at step s+1's winners
        let p1: Vec<BitVector> = (0..10).map(|i| sdr(n, &[(i + 1) % n])).collect();
        let none: Vec<BitVector> = (0..10).map(|_| BitVector::zeros(n)).collect();
        let trace = PredictionTrace {
            winning: w.clone(),
            predicted_t1: p1,
            predicted_t2: none.clone(),
            steps_per_presentation: 5,
        };
        let acc = prediction_accuracy(&trace, 1, 0.8).unwrap();
        // first presentation misses only step 0 (no prior prediction)
        assert_eq!(acc, vec![0.8, 1.0]);
        let acc2 = prediction_accuracy(&trace, 2, 0.8).unwrap();
        assert_eq!(acc2, vec![0.0, 0.0]);

        let empty_trace = PredictionTrace {
            winning: w,
            predicted_t1: none.clone(),
            predicted_t2: none,
            steps_per_presentation: 5,
        };
        let acc = prediction_accuracy(&empty_trace, 1, 0.8).unwrap();
        assert_eq!(acc, vec![0.0, 0.0]);
    }

    #[test]
    fn prediction_accuracy_threshold() {
        let n = 10;
        // winners two columns; prediction covers exactly one of two = 0.5
        let trace = PredictionTrace {
            winning: vec![sdr(n, &[0, 1]), sdr(n, &[2, 3])],
            predicted_t1: vec![sdr(n, &[2, 9]), BitVector::zeros(n)],
            predicted_t2: vec![BitVector::zeros(n), BitVector::zeros(n)],
            steps_per_presentation: 2,
        };
        assert_eq!(prediction_accuracy(&trace, 1, 0.8).unwrap(), vec![0.0]);
        assert_eq!(prediction_accuracy(&trace, 1, 0.5).unwrap(), vec![0.5]);
    }
}
