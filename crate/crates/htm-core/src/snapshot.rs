//! Versioned, bit-exact region snapshots.
//!
//! A decoded region reproduces the source region's behavior bit-for-bit on
//! any subsequent input stream. All multi-byte fields are little-endian.
//!
//! Byte layout, version 1:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "HTMR"
//! 4       2     version (u16) = 1
//!               -- config block --
//! 6       4     num_columns (u32)
//! 10      4     cells_per_column (u32)
//! 14      4     synapses_per_column (u32)
//! 18      1     perm_threshold (u8)
//! 19      1     perm_inc (u8)
//! 20      1     perm_dec (u8)
//! 21      4     min_overlap (u32)
//! 25      4     winners_per_step (u32)
//! 29      1     inhibition kind: 0 global, 1 local (reserved)
//! 30      4     inhibition radius (u32, 0 for global)
//! 34      4     segments_per_cell (u32)
//! 38      4     synapses_per_segment (u32)
//! 42      8     segment_match_fraction (f64 bit pattern)
//! 50      1     tm_connect_threshold (u8)
//! 51      4     input_size (u32)
//! 55      8     rng_seed (u64)
//!               -- proximal block: num_columns records --
//!               synapses_per_column x { address (u16), permanence (u8) }
//!               -- cell block: num_columns*cells_per_column records --
//!               1     timeline byte: bit0 active, bit1 learning,
//!                     bit2 predictive (at the snapshot step)
//!               1     segment count (u8)
//!               per segment:
//!                 1     flags: bit0 queued
//!                 2     last_matching (u16)
//!                 1     synapse count (u8)
//!                 per synapse: presynaptic flat cell (u32), permanence (u8)
//!               -- trailer --
//! end-4   4     CRC-32 (IEEE) of all preceding bytes
//! ```

use std::fs;
use std::path::Path;

use crate::config::{Inhibition, RegionConfig};
use crate::error::{HtmError, Result};
use crate::region::Region;
use crate::sp::Column;
use crate::synapse::ReceptiveField;
use crate::tm::{CellState, DistalSegment, TemporalMemory};
use crate::bits::BitVector;

pub const MAGIC: &[u8; 4] = b"HTMR";
pub const VERSION: u16 = 1;

fn encode_config(cfg: &RegionConfig, out: &mut Vec<u8>) {
    out.extend_from_slice(&(cfg.num_columns as u32).to_le_bytes());
    out.extend_from_slice(&(cfg.cells_per_column as u32).to_le_bytes());
    out.extend_from_slice(&(cfg.synapses_per_column as u32).to_le_bytes());
    out.push(cfg.perm_threshold);
    out.push(cfg.perm_inc);
    out.push(cfg.perm_dec);
    out.extend_from_slice(&cfg.min_overlap.to_le_bytes());
    out.extend_from_slice(&(cfg.winners_per_step as u32).to_le_bytes());
    match cfg.inhibition {
        Inhibition::Global => {
            out.push(0);
            out.extend_from_slice(&0u32.to_le_bytes());
        }
        Inhibition::Local { radius } => {
            out.push(1);
            out.extend_from_slice(&radius.to_le_bytes());
        }
    }
    out.extend_from_slice(&(cfg.segments_per_cell as u32).to_le_bytes());
    out.extend_from_slice(&(cfg.synapses_per_segment as u32).to_le_bytes());
    out.extend_from_slice(&cfg.segment_match_fraction.to_bits().to_le_bytes());
    out.push(cfg.tm_connect_threshold);
    out.extend_from_slice(&(cfg.input_size as u32).to_le_bytes());
    out.extend_from_slice(&cfg.rng_seed.to_le_bytes());
}

/// CRC-32 of the encoded config block; used as a provenance digest in
/// benchmark reports.
pub fn config_digest(cfg: &RegionConfig) -> u32 {
    let mut block = Vec::new();
    encode_config(cfg, &mut block);
    crc32fast::hash(&block)
}

/// Serialize a region to bytes (the on-disk format, CRC included).
pub fn encode_region(region: &Region) -> Vec<u8> {
    let cfg = &region.config;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    encode_config(cfg, &mut out);
    for col in &region.columns {
        for (i, &addr) in col.field.addresses.iter().enumerate() {
            out.extend_from_slice(&addr.to_le_bytes());
            out.push(col.permanences[i]);
        }
    }
    let tm = &region.tm;
    for (flat, cell) in tm.cells.iter().enumerate() {
        let mut timeline = 0u8;
        if tm.active.get(flat) {
            timeline |= 1;
        }
        if tm.learning.get(flat) {
            timeline |= 2;
        }
        if tm.predictive.get(flat) {
            timeline |= 4;
        }
        out.push(timeline);
        out.push(cell.segments.len() as u8);
        for seg in &cell.segments {
            out.push(seg.queued as u8);
            out.extend_from_slice(&(seg.last_matching.min(u16::MAX as u32) as u16).to_le_bytes());
            out.push(seg.synapses.len() as u8);
            for &(pre, perm) in &seg.synapses {
                out.extend_from_slice(&pre.to_le_bytes());
                out.push(perm);
            }
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

/// Write the snapshot; returns the byte count.
pub fn save_region(region: &Region, path: &Path) -> Result<usize> {
    let bytes = encode_region(region);
    fs::write(path, &bytes).map_err(|e| {
        HtmError::Snapshot(format!("cannot write {}: {e}", path.display()))
    })?;
    Ok(bytes.len())
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.bytes.len() {
            return Err(HtmError::Snapshot(format!(
                "truncated: wanted {n} bytes at offset {}, file has {}",
                self.at,
                self.bytes.len()
            )));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Decode a snapshot from bytes, validating magic, version and CRC.
pub fn decode_region(bytes: &[u8]) -> Result<Region> {
    if bytes.len() < 10 {
        return Err(HtmError::Snapshot("file shorter than header".into()));
    }
    let (payload, trailer) = bytes.split_at(bytes.len() - 4);
    let stored_crc = u32::from_le_bytes(trailer.try_into().unwrap());
    let actual_crc = crc32fast::hash(payload);
    if stored_crc != actual_crc {
        return Err(HtmError::Snapshot(format!(
            "CRC mismatch: stored {stored_crc:#010x}, computed {actual_crc:#010x}"
        )));
    }
    let mut r = Reader { bytes: payload, at: 0 };
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(HtmError::Snapshot(format!(
            "bad magic: expected {:?}, found {:?}",
            MAGIC, magic
        )));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(HtmError::Snapshot(format!(
            "unsupported version {version} (this build reads {VERSION})"
        )));
    }
    let num_columns = r.u32()? as usize;
    let cells_per_column = r.u32()? as usize;
    let synapses_per_column = r.u32()? as usize;
    let perm_threshold = r.u8()?;
    let perm_inc = r.u8()?;
    let perm_dec = r.u8()?;
    let min_overlap = r.u32()?;
    let winners_per_step = r.u32()? as usize;
    let inhibition = match r.u8()? {
        0 => {
            r.u32()?;
            Inhibition::Global
        }
        1 => Inhibition::Local { radius: r.u32()? },
        other => {
            return Err(HtmError::Snapshot(format!("unknown inhibition kind {other}")));
        }
    };
    let segments_per_cell = r.u32()? as usize;
    let synapses_per_segment = r.u32()? as usize;
    let segment_match_fraction = f64::from_bits(r.u64()?);
    let tm_connect_threshold = r.u8()?;
    let input_size = r.u32()? as usize;
    let rng_seed = r.u64()?;
    let config = RegionConfig {
        num_columns,
        cells_per_column,
        synapses_per_column,
        perm_threshold,
        perm_inc,
        perm_dec,
        min_overlap,
        winners_per_step,
        inhibition,
        segments_per_cell,
        synapses_per_segment,
        segment_match_fraction,
        tm_connect_threshold,
        input_size,
        rng_seed,
    }
    .validate()
    .map_err(|e| HtmError::Snapshot(format!("embedded config invalid: {e}")))?;

    let mut columns = Vec::with_capacity(num_columns);
    for id in 0..num_columns {
        let mut addresses = Vec::with_capacity(synapses_per_column);
        let mut permanences = Vec::with_capacity(synapses_per_column);
        for _ in 0..synapses_per_column {
            let addr = r.u16()?;
            if addr as usize >= input_size {
                return Err(HtmError::Snapshot(format!(
                    "column {id}: synapse address {addr} outside input space {input_size}"
                )));
            }
            addresses.push(addr);
            permanences.push(r.u8()?);
        }
        columns.push(Column::new(ReceptiveField { column_id: id, addresses }, permanences));
    }

    let n_cells = num_columns * cells_per_column;
    let mut tm = TemporalMemory {
        cells: Vec::with_capacity(n_cells),
        active: BitVector::zeros(n_cells),
        learning: BitVector::zeros(n_cells),
        predictive: BitVector::zeros(n_cells),
    };
    for flat in 0..n_cells {
        let timeline = r.u8()?;
        tm.active.set(flat, timeline & 1 != 0);
        tm.learning.set(flat, timeline & 2 != 0);
        tm.predictive.set(flat, timeline & 4 != 0);
        let seg_count = r.u8()? as usize;
        if seg_count > segments_per_cell {
            return Err(HtmError::Snapshot(format!(
                "cell {flat}: {seg_count} segments exceeds the {segments_per_cell} limit"
            )));
        }
        let mut segments = Vec::with_capacity(seg_count);
        for _ in 0..seg_count {
            let flags = r.u8()?;
            let last_matching = r.u16()? as u32;
            let syn_count = r.u8()? as usize;
            if syn_count > synapses_per_segment {
                return Err(HtmError::Snapshot(format!(
                    "cell {flat}: {syn_count} synapses exceeds the {synapses_per_segment} limit"
                )));
            }
            let mut synapses = Vec::with_capacity(syn_count);
            for _ in 0..syn_count {
                let pre = r.u32()?;
                if pre as usize >= n_cells {
                    return Err(HtmError::Snapshot(format!(
                        "cell {flat}: presynaptic id {pre} outside the region"
                    )));
                }
                synapses.push((pre, r.u8()?));
            }
            segments.push(DistalSegment {
                synapses,
                queued: flags & 1 != 0,
                last_matching,
            });
        }
        tm.cells.push(CellState { segments });
    }
    if r.at != payload.len() {
        return Err(HtmError::Snapshot(format!(
            "{} trailing bytes after the cell block",
            payload.len() - r.at
        )));
    }
    Ok(Region {
        config,
        columns,
        tm,
        parallel: false,
    })
}

/// Read a snapshot file.
pub fn load_region(path: &Path) -> Result<Region> {
    let bytes = fs::read(path)
        .map_err(|e| HtmError::Snapshot(format!("cannot read {}: {e}", path.display())))?;
    decode_region(&bytes)
}
