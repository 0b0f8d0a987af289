//! Synthetic synapses: proximal receptive-field generation and permanence
//! initialization.
//!
//! Connectivity is never wired explicitly; each column stores the input
//! addresses of its potential synapses. Addresses come from one of two
//! generators:
//!
//! * global: a per-column 16-bit LFSR stream taken modulo the input size,
//!   so a column can connect anywhere in the input space;
//! * local: a deterministic field sampled inside a Chebyshev window around
//!   the column's natural center on a 2-D input grid, with neighboring
//!   columns sharing input coverage.
//!
//! Both are pure functions of (config, column id), so fields for different
//! columns can be generated independently and reproduce bit-for-bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RegionConfig;
use crate::error::{HtmError, Result};
use crate::lfsr::Lfsr16;

/// How a column's proximal field is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMode {
    GlobalLfsr,
    /// Local field on a 2-D grid: the input is `rows` x `cols` and synapses
    /// stay within Chebyshev `radius` of the column's scaled center.
    LocalRom { radius: usize, rows: usize, cols: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceptiveField {
    pub column_id: usize,
    pub addresses: Vec<u16>,
}

/// splitmix64 step; used to derive independent per-column streams.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

pub(crate) fn column_stream(seed: u64, column_id: usize, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(
        seed ^ splitmix64(column_id as u64 ^ tag.rotate_left(17)),
    ))
}

const PERM_STREAM: u64 = 0x7065726D; // "perm"
const FIELD_STREAM: u64 = 0x6669656C; // "fiel"

/// Per-column LFSR seed: (rng_seed XOR (column_id+1)) truncated to 16 bits,
/// falling back to 0x0001 when the truncation lands on the forbidden zero.
fn lfsr_seed(rng_seed: u64, column_id: usize) -> u16 {
    let s = ((rng_seed ^ (column_id as u64 + 1)) & 0xFFFF) as u16;
    if s == 0 {
        1
    } else {
        s
    }
}

/// Draw LFSR values, map each to `value mod input_size`, skip duplicates,
/// until `synapses_per_column` distinct addresses are collected.
pub fn generate_global_field(cfg: &RegionConfig, column_id: usize) -> Result<ReceptiveField> {
    let n = cfg.input_size;
    let want = cfg.synapses_per_column;
    debug_assert!(want <= n && n <= 65535);
    let mut lfsr = Lfsr16::new(lfsr_seed(cfg.rng_seed, column_id))?;
    let mut seen = vec![false; n];
    let mut addresses = Vec::with_capacity(want);
    while addresses.len() < want {
        let addr = (lfsr.advance() as usize) % n;
        if !seen[addr] {
            seen[addr] = true;
            addresses.push(addr as u16);
        }
    }
    Ok(ReceptiveField { column_id, addresses })
}

/// Sample a local field of distinct addresses inside the Chebyshev window
/// around the column's natural center on the input grid.
pub fn generate_local_field(
    cfg: &RegionConfig,
    column_id: usize,
    radius: usize,
    rows: usize,
    cols: usize,
) -> Result<ReceptiveField> {
    if rows * cols != cfg.input_size {
        return Err(HtmError::Field(format!(
            "input grid {rows}x{cols} does not match input_size {}",
            cfg.input_size
        )));
    }
    let grid = (cfg.num_columns as f64).sqrt().round() as usize;
    if grid * grid != cfg.num_columns {
        return Err(HtmError::Field(format!(
            "local fields need a square column grid; {} columns is not a perfect square",
            cfg.num_columns
        )));
    }
    let (col_r, col_c) = (column_id / grid, column_id % grid);
    let center_r = col_r * rows / grid;
    let center_c = col_c * cols / grid;
    let r0 = center_r.saturating_sub(radius);
    let r1 = (center_r + radius).min(rows - 1);
    let c0 = center_c.saturating_sub(radius);
    let c1 = (center_c + radius).min(cols - 1);
    let mut candidates: Vec<u16> = Vec::with_capacity((r1 - r0 + 1) * (c1 - c0 + 1));
    for r in r0..=r1 {
        for c in c0..=c1 {
            candidates.push((r * cols + c) as u16);
        }
    }
    let want = cfg.synapses_per_column;
    if candidates.len() < want {
        return Err(HtmError::Field(format!(
            "column {column_id}: window {}x{} holds {} pixels < {} synapses",
            r1 - r0 + 1,
            c1 - c0 + 1,
            candidates.len(),
            want
        )));
    }
    // partial Fisher-Yates, seeded per column
    let mut rng = column_stream(cfg.rng_seed, column_id, FIELD_STREAM);
    for i in 0..want {
        let j = rng.gen_range(i..candidates.len());
        candidates.swap(i, j);
    }
    candidates.truncate(want);
    Ok(ReceptiveField { column_id, addresses: candidates })
}

/// Initial proximal permanences: uniform in [P_th - 3, P_th + 3] clamped to
/// [0, 255]. The narrow band around the threshold leaves roughly half the
/// synapses connected at t=0.
pub fn init_sp_permanences(cfg: &RegionConfig, column_id: usize) -> Vec<u8> {
    let low = cfg.perm_threshold.saturating_sub(3);
    let high = cfg.perm_threshold.saturating_add(3);
    let mut rng = column_stream(cfg.rng_seed, column_id, PERM_STREAM);
    (0..cfg.synapses_per_column)
        .map(|_| rng.gen_range(low..=high))
        .collect()
}
