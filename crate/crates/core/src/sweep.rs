//! Resumable tabulation of every quantity on a grid of T values.

use serde::{Deserialize, Serialize};
use std::fs::{File, OpenOptions};
use std::path::Path;

use crate::engine::{AreaMode, Engine};
use crate::error::{Error, Result};
use crate::quad::{self, CheckpointFile, QuadResult, SweepCheckpoint};

/// Column order of the sweep CSV.
pub const SWEEP_HEADER: [&str; 14] = [
    "T",
    "i2",
    "i4",
    "phi",
    "sigma",
    "sigma1",
    "m_plus",
    "m_minus",
    "diff_moser",
    "diff_bala",
    "eta1",
    "eta2",
    "eta_gap_over_ln3T",
    "fourth_moment_ratio",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub i2: f64,
    pub i4: f64,
    pub phi: f64,
    pub sigma: f64,
    pub sigma1: f64,
    pub m_plus: f64,
    pub m_minus: f64,
    pub diff_moser: f64,
    pub diff_bala: f64,
    pub eta1: f64,
    pub eta2: f64,
    #[serde(rename = "eta_gap_over_ln3T")]
    pub eta_gap_over_ln3t: f64,
    pub fourth_moment_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPlan {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub log_grid: bool,
}

impl SweepPlan {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.t_min >= 10.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(Error::Domain(format!(
                "sweep needs 10 <= t_min < t_max, got {} and {}",
                self.t_min, self.t_max
            )));
        }
        if self.points < 2 {
            return Err(Error::Domain(format!(
                "sweep needs at least 2 points, got {}",
                self.points
            )));
        }
        let n = self.points - 1;
        let mut g: Vec<f64> = (0..=n)
            .map(|k| {
                let s = k as f64 / n as f64;
                if self.log_grid {
                    (self.t_min.ln() + s * (self.t_max / self.t_min).ln()).exp()
                } else {
                    self.t_min + s * (self.t_max - self.t_min)
                }
            })
            .collect();
        g[0] = self.t_min;
        g[n] = self.t_max;
        Ok(g)
    }
}

/// Row at `t` from the prefix integrals up to `t`.
pub fn sweep_row(engine: &Engine, t: f64, prefix: [QuadResult; 2]) -> Result<SweepRow> {
    let r = engine.area_report_with(t, AreaMode::Moser, prefix)?;
    let pt = r.ladder.expect("moser report carries the ladder point");
    Ok(SweepRow {
        t,
        i2: r.i2,
        i4: r.i4,
        phi: pt.phi,
        sigma: pt.sigma,
        sigma1: pt.sigma1,
        m_plus: r.m_plus,
        m_minus: r.m_minus,
        diff_moser: r.diff,
        diff_bala: r.i2 - t * pt.sigma1,
        eta1: r.eta1.unwrap_or(f64::NAN),
        eta2: r.eta2.unwrap_or(f64::NAN),
        eta_gap_over_ln3t: r.eta_gap_over_ln3t.unwrap_or(f64::NAN),
        fourth_moment_ratio: r.fourth_moment_ratio,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Frontier of the checkpoint the run resumed from, if any.
    pub resumed_from: Option<f64>,
    pub computed: usize,
    pub complete: bool,
}

pub fn read_rows(path: &Path) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

fn write_rows(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(File::create(path)?);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn append_row(path: &Path, row: &SweepRow) -> Result<()> {
    let file = OpenOptions::new().append(true).open(path)?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    w.serialize(row)?;
    let file = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    file.sync_data()?;
    Ok(())
}

/// Run (or resume) a sweep.
///
/// With a checkpoint, the prefix state is restored from its last row for this
/// configuration, output rows beyond that frontier are dropped, and the grid
/// continues from there. `max_rows` stops after that many new rows.
pub fn run_sweep(
    engine: &Engine,
    plan: &SweepPlan,
    out: Option<&Path>,
    checkpoint: Option<&Path>,
    max_rows: Option<usize>,
) -> Result<SweepOutcome> {
    let grid = plan.grid()?;
    let fp = engine.fingerprint();
    let ckfile = checkpoint.map(CheckpointFile::open).transpose()?;
    let restored = match &ckfile {
        Some(f) => f.latest(&fp, engine.prefix.policy)?,
        None => None,
    };
    let resumed_from = restored.as_ref().map(|c| c.frontier);
    let mut state = restored.unwrap_or_else(|| engine.fresh_checkpoint());

    let mut rows = Vec::new();
    if let (Some(path), Some(frontier)) = (out, resumed_from) {
        if path.exists() {
            rows = read_rows(path)?;
            rows.retain(|r| r.t <= frontier);
        }
    }
    if let Some(path) = out {
        write_rows(path, &rows)?;
    }

    let mut computed = 0;
    let start = state.frontier;
    for &t in grid.iter().filter(|&&t| t > start) {
        if max_rows.is_some_and(|m| computed >= m) {
            return Ok(SweepOutcome {
                rows,
                resumed_from,
                computed,
                complete: false,
            });
        }
        let mut next: SweepCheckpoint = state.clone();
        let prefix = quad::advance_prefix(&engine.z, &engine.prefix, &mut next, t)?;
        let row = sweep_row(engine, t, prefix)?;
        if let Some(path) = out {
            append_row(path, &row)?;
        }
        if let Some(f) = &ckfile {
            f.append(&next)?;
        }
        state = next;
        rows.push(row);
        computed += 1;
    }
    Ok(SweepOutcome {
        rows,
        resumed_from,
        computed,
        complete: true,
    })
}
