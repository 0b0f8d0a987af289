//! A full HTM region: configured columns (spatial pooler) plus the cells
//! and distal segments of the temporal memory, stepped as one unit.

use crate::bits::BitVector;
use crate::config::RegionConfig;
use crate::error::Result;
use crate::sp::{self, Column, SpResult};
use crate::synapse::{self, FieldMode};
use crate::tm::{TemporalMemory, TmStepReport};

#[derive(Debug, Clone)]
pub struct Region {
    pub config: RegionConfig,
    pub columns: Vec<Column>,
    pub tm: TemporalMemory,
    /// Run per-column phases on the rayon pool. Output is identical either
    /// way; the flag only trades latency for cores.
    pub parallel: bool,
}

/// Combined report of one region step.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub sp: SpResult,
    pub tm: TmStepReport,
}

impl Region {
    /// Build a region: validate the config, generate every column's
    /// receptive field and initial permanences, and allocate empty cells.
    pub fn new(config: RegionConfig, field_mode: FieldMode) -> Result<Self> {
        let config = config.validate()?;
        let mut columns = Vec::with_capacity(config.num_columns);
        for id in 0..config.num_columns {
            let field = match field_mode {
                FieldMode::GlobalLfsr => synapse::generate_global_field(&config, id)?,
                FieldMode::LocalRom { radius, rows, cols } => {
                    synapse::generate_local_field(&config, id, radius, rows, cols)?
                }
            };
            let permanences = synapse::init_sp_permanences(&config, id);
            columns.push(Column::new(field, permanences));
        }
        let tm = TemporalMemory::new(&config);
        Ok(Region {
            config,
            columns,
            tm,
            parallel: false,
        })
    }

    /// Spatial-pooler step only.
    pub fn sp_step(&mut self, x: &BitVector, learn: bool) -> Result<SpResult> {
        sp::sp_step(&mut self.columns, &self.config, x, learn, self.parallel)
    }

    /// Temporal-memory step for a previously computed SP result.
    pub fn tm_step(&mut self, sp_result: &SpResult, learn: bool) -> TmStepReport {
        self.tm.step(&self.config, &sp_result.winners, learn)
    }

    /// Full step: SP then TM.
    pub fn step(&mut self, x: &BitVector, learn_sp: bool, learn_tm: bool) -> Result<StepReport> {
        let sp = self.sp_step(x, learn_sp)?;
        let tm = self.tm_step(&sp, learn_tm);
        Ok(StepReport { sp, tm })
    }

    /// Column lookahead for the given depth (depth 1 = current predictions).
    pub fn lookahead(&self, depth: usize) -> Vec<BitVector> {
        self.tm.lookahead(&self.config, depth)
    }

    /// Clear all per-step cell state (activity, predictions, queued
    /// segments) while keeping every synapse. Used between sequences.
    pub fn reset_cell_state(&mut self) {
        let n = self.config.total_cells();
        self.tm.active = BitVector::zeros(n);
        self.tm.learning = BitVector::zeros(n);
        self.tm.predictive = BitVector::zeros(n);
        for cell in &mut self.tm.cells {
            for seg in &mut cell.segments {
                seg.queued = false;
            }
        }
    }

    /// One line per column: comma-separated receptive-field addresses.
    pub fn dump_fields(&self) -> String {
        let mut out = String::new();
        for col in &self.columns {
            let addrs: Vec<String> = col.field.addresses.iter().map(|a| a.to_string()).collect();
            out.push_str(&addrs.join(","));
            out.push('\n');
        }
        out
    }

    /// Cell-state rows (t, column, cell, active, predictive, learning) for
    /// the current step, appended to a CSV body.
    pub fn dump_cell_state(&self, t: usize, out: &mut String) {
        let m = self.config.cells_per_column;
        for flat in 0..self.config.total_cells() {
            let a = self.tm.active.get(flat);
            let p = self.tm.predictive.get(flat);
            let l = self.tm.learning.get(flat);
            if a || p || l {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    t,
                    flat / m,
                    flat % m,
                    a as u8,
                    p as u8,
                    l as u8
                ));
            }
        }
    }
}
