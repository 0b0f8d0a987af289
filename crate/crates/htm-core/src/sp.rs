//! Spatial pooler: overlap computation, global k-winner-take-all
//! inhibition, and Hebbian permanence learning.
//!
//! A step runs in three phase barriers. Overlaps are computed per column
//! (independent, parallelizable), the winner set is a sequential global
//! reduction, and learning touches only the winning columns (again
//! independent per column). Non-winning columns keep their permanences
//! bit-identical.

use rayon::prelude::*;

use crate::bits::BitVector;
use crate::config::RegionConfig;
use crate::error::{HtmError, Result};
use crate::synapse::ReceptiveField;

#[derive(Debug, Clone)]
pub struct Column {
    pub id: usize,
    pub field: ReceptiveField,
    /// Proximal permanences, one per potential synapse, saturating in [0,255].
    pub permanences: Vec<u8>,
    pub last_overlap: u32,
    /// Bit i set => synapse i was connected (perm >= P_th) AND its input bit
    /// was 1 in the last overlap pass.
    pub last_active_mask: BitVector,
    /// Bit i set => synapse i's input bit was 1 in the last overlap pass;
    /// this is the mask the learning phase consumes.
    pub last_input_mask: BitVector,
}

impl Column {
    pub fn new(field: ReceptiveField, permanences: Vec<u8>) -> Self {
        let n = field.addresses.len();
        debug_assert_eq!(n, permanences.len());
        Column {
            id: field.column_id,
            field,
            permanences,
            last_overlap: 0,
            last_active_mask: BitVector::zeros(n),
            last_input_mask: BitVector::zeros(n),
        }
    }
}

/// Result of one spatial-pooler step.
#[derive(Debug, Clone)]
pub struct SpResult {
    pub overlaps: Vec<u32>,
    /// Columns whose overlap passed min_overlap.
    pub eligible: BitVector,
    /// Winning column ids, ascending.
    pub winners: Vec<usize>,
    /// Column activity vector: bit j set iff column j won.
    pub sdr: BitVector,
}

/// Overlap of one column against the input: the number of connected
/// synapses (perm >= P_th) whose addressed input bit is 1. Also returns the
/// connected-and-active mask and the raw input mask at the synapse
/// addresses.
pub fn compute_overlap(
    field: &ReceptiveField,
    permanences: &[u8],
    x: &BitVector,
    perm_threshold: u8,
) -> (u32, BitVector, BitVector) {
    let n = field.addresses.len();
    let mut overlap = 0u32;
    let mut active_mask = BitVector::zeros(n);
    let mut input_mask = BitVector::zeros(n);
    for (i, &addr) in field.addresses.iter().enumerate() {
        if x.get(addr as usize) {
            input_mask.set(i, true);
            if permanences[i] >= perm_threshold {
                active_mask.set(i, true);
                overlap += 1;
            }
        }
    }
    (overlap, active_mask, input_mask)
}

/// Eligibility: overlap >= min_overlap, as a bit per column.
pub fn threshold_overlaps(overlaps: &[u32], min_overlap: u32) -> BitVector {
    let mut e = BitVector::zeros(overlaps.len());
    for (j, &ov) in overlaps.iter().enumerate() {
        if ov >= min_overlap {
            e.set(j, true);
        }
    }
    e
}

/// Global k-winner-take-all over eligible columns. Ties at the cut break
/// toward the smaller column id; when fewer than `winners_per_step` columns
/// are eligible, all of them win. Returns ids in ascending order.
pub fn select_winners(
    overlaps: &[u32],
    eligible: &BitVector,
    winners_per_step: usize,
) -> Vec<usize> {
    let mut candidates: Vec<usize> = eligible.ones().collect();
    candidates.sort_unstable_by_key(|&j| (std::cmp::Reverse(overlaps[j]), j));
    candidates.truncate(winners_per_step);
    candidates.sort_unstable();
    candidates
}

/// Hebbian update for one column after an overlap pass. Winners strengthen
/// synapses whose input bit was 1 by P+ and weaken the rest by P-,
/// saturating at [0,255]; non-winners are untouched.
pub fn learn_sp(
    column: &mut Column,
    is_winner: bool,
    input_mask: &BitVector,
    perm_inc: u8,
    perm_dec: u8,
) {
    if !is_winner {
        return;
    }
    for i in 0..column.permanences.len() {
        let p = &mut column.permanences[i];
        *p = if input_mask.get(i) {
            p.saturating_add(perm_inc)
        } else {
            p.saturating_sub(perm_dec)
        };
    }
}

/// One full SP step over a region's columns: overlap, inhibition and
/// (optionally) learning. Deterministic for a fixed column state and input.
pub fn sp_step(
    columns: &mut [Column],
    cfg: &RegionConfig,
    x: &BitVector,
    learn: bool,
    parallel: bool,
) -> Result<SpResult> {
    if x.len() != cfg.input_size {
        return Err(HtmError::InputLength {
            got: x.len(),
            want: cfg.input_size,
        });
    }
    let overlap_pass = |col: &mut Column| {
        let (ov, active, input) =
            compute_overlap(&col.field, &col.permanences, x, cfg.perm_threshold);
        col.last_overlap = ov;
        col.last_active_mask = active;
        col.last_input_mask = input;
    };
    if parallel {
        columns.par_iter_mut().for_each(overlap_pass);
    } else {
        columns.iter_mut().for_each(overlap_pass);
    }
    let overlaps: Vec<u32> = columns.iter().map(|c| c.last_overlap).collect();
    let eligible = threshold_overlaps(&overlaps, cfg.min_overlap);
    let winners = select_winners(&overlaps, &eligible, cfg.winners_per_step);
    let sdr = BitVector::from_indices(cfg.num_columns, &winners);
    if learn {
        let learn_pass = |col: &mut Column| {
            if sdr.get(col.id) {
                let mask = col.last_input_mask.clone();
                learn_sp(col, true, &mask, cfg.perm_inc, cfg.perm_dec);
            }
        };
        if parallel {
            columns.par_iter_mut().for_each(learn_pass);
        } else {
            columns.iter_mut().for_each(learn_pass);
        }
    }
    Ok(SpResult {
        overlaps,
        eligible,
        winners,
        sdr,
    })
}
