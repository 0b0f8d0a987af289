//! Region configuration and the analytic sparsity/capacity formulas.
//!
//! One validated `RegionConfig` is shared read-only by every part of a
//! region. Permanences live in [0,255] with saturating arithmetic; there is
//! no floating-point permanence mode.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{HtmError, Result};

/// Inhibition scope. The local variant is representable but unsupported:
/// `validate` rejects it (global inhibition only, per the reference setup).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Inhibition {
    Global,
    Local { radius: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    /// Number of columns in the region (n_c).
    pub num_columns: usize,
    /// Cells per column (n_m).
    pub cells_per_column: usize,
    /// Proximal synapses per column (n_s).
    pub synapses_per_column: usize,
    /// Permanence threshold for a connected proximal synapse (P_th).
    pub perm_threshold: u8,
    /// Permanence increment (P+).
    pub perm_inc: u8,
    /// Permanence decrement (P-).
    pub perm_dec: u8,
    /// Minimum overlap for a column to enter inhibition (O_th).
    pub min_overlap: u32,
    /// Winning columns per step (w_c).
    pub winners_per_step: usize,
    pub inhibition: Inhibition,
    /// Distal segments per cell.
    pub segments_per_cell: usize,
    /// Synapses per distal segment.
    pub synapses_per_segment: usize,
    /// Fraction of a segment's synapses that must match for segment
    /// activity (M_th); the segment threshold is
    /// ceil(M_th * synapses_per_segment).
    pub segment_match_fraction: f64,
    /// Permanence threshold for a connected distal synapse.
    pub tm_connect_threshold: u8,
    /// Input space width in bits (n).
    pub input_size: usize,
    /// Seed for all synthetic-synapse generation and sampling.
    pub rng_seed: u64,
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig {
            num_columns: 100,
            cells_per_column: 3,
            synapses_per_column: 16,
            perm_threshold: 127,
            perm_inc: 1,
            perm_dec: 1,
            min_overlap: 2,
            winners_per_step: 20,
            inhibition: Inhibition::Global,
            segments_per_cell: 3,
            synapses_per_segment: 10,
            segment_match_fraction: 0.5,
            tm_connect_threshold: 128,
            input_size: 256,
            rng_seed: 42,
        }
    }
}

impl RegionConfig {
    /// Validate every invariant; returns the config unchanged on success.
    pub fn validate(self) -> Result<Self> {
        let fail = |msg: String| Err(HtmError::Config(msg));
        if self.num_columns == 0 {
            return fail("num_columns must be positive".into());
        }
        if self.cells_per_column == 0 {
            return fail("cells_per_column must be positive".into());
        }
        if self.synapses_per_column == 0 {
            return fail("synapses_per_column must be positive".into());
        }
        if self.winners_per_step == 0 {
            return fail("winners_per_step must be positive".into());
        }
        if self.winners_per_step > self.num_columns {
            return fail(format!(
                "winners_per_step ({}) exceeds num_columns ({})",
                self.winners_per_step, self.num_columns
            ));
        }
        if self.input_size == 0 {
            return fail("input_size must be positive".into());
        }
        if self.input_size > 65535 {
            return fail(format!(
                "input_size ({}) exceeds the 16-bit synthetic-synapse address space (65535)",
                self.input_size
            ));
        }
        if self.synapses_per_column > self.input_size {
            return fail(format!(
                "synapses_per_column ({}) exceeds input_size ({})",
                self.synapses_per_column, self.input_size
            ));
        }
        if let Inhibition::Local { radius } = self.inhibition {
            return fail(format!(
                "local inhibition (radius {radius}) is reserved but unsupported; use global"
            ));
        }
        if self.segments_per_cell == 0 {
            return fail("segments_per_cell must be positive".into());
        }
        if self.synapses_per_segment == 0 {
            return fail("synapses_per_segment must be positive".into());
        }
        if !(self.segment_match_fraction > 0.0 && self.segment_match_fraction <= 1.0) {
            return fail(format!(
                "segment_match_fraction ({}) must be in (0, 1]",
                self.segment_match_fraction
            ));
        }
        Ok(self)
    }

    /// Segment activation threshold S_th = ceil(M_th * synapses_per_segment).
    pub fn segment_threshold(&self) -> u32 {
        (self.segment_match_fraction * self.synapses_per_segment as f64).ceil() as u32
    }

    pub fn total_cells(&self) -> usize {
        self.num_columns * self.cells_per_column
    }

    /// Parse a flat key=value config file. Blank lines and lines starting
    /// with '#' are skipped; unknown keys are errors. The result is not yet
    /// validated (CLI overrides may apply first).
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut cfg = RegionConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HtmError::Config(format!("line {}: expected key=value, got {raw:?}", lineno + 1))
            })?;
            cfg.apply(key.trim(), value.trim())
                .map_err(|e| HtmError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    /// Set one field by its config-file key.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| HtmError::Config(format!("{key}: cannot parse {value:?}")))
        }
        match key {
            "num_columns" => self.num_columns = num(key, value)?,
            "cells_per_column" => self.cells_per_column = num(key, value)?,
            "synapses_per_column" => self.synapses_per_column = num(key, value)?,
            "perm_threshold" => self.perm_threshold = num(key, value)?,
            "perm_inc" => self.perm_inc = num(key, value)?,
            "perm_dec" => self.perm_dec = num(key, value)?,
            "min_overlap" => self.min_overlap = num(key, value)?,
            "winners_per_step" => self.winners_per_step = num(key, value)?,
            "inhibition" => {
                self.inhibition = if value == "global" {
                    Inhibition::Global
                } else if let Some(r) = value.strip_prefix("local:") {
                    Inhibition::Local { radius: num(key, r)? }
                } else {
                    return Err(HtmError::Config(format!(
                        "inhibition: expected 'global' or 'local:<radius>', got {value:?}"
                    )));
                }
            }
            "segments_per_cell" => self.segments_per_cell = num(key, value)?,
            "synapses_per_segment" => self.synapses_per_segment = num(key, value)?,
            "segment_match_fraction" => self.segment_match_fraction = num(key, value)?,
            "tm_connect_threshold" => self.tm_connect_threshold = num(key, value)?,
            "input_size" => self.input_size = num(key, value)?,
            "rng_seed" => self.rng_seed = num(key, value)?,
            other => {
                return Err(HtmError::Config(format!("unknown config key {other:?}")));
            }
        }
        Ok(())
    }
}

/// Sparsity level in percent: w_c / n_c * 100.
pub fn sparsity_level(cfg: &RegionConfig) -> f64 {
    cfg.winners_per_step as f64 / cfg.num_columns as f64 * 100.0
}

/// Exact SDR encoding capacity: C(n_c, w_c) as an arbitrary-precision integer.
pub fn encoding_capacity(num_columns: u64, winners: u64) -> Result<BigUint> {
    if winners > num_columns {
        return Err(HtmError::Config(format!(
            "winners ({winners}) exceeds columns ({num_columns})"
        )));
    }
    let k = winners.min(num_columns - winners);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= num_columns - i;
        acc /= i + 1;
    }
    Ok(acc)
}
