//! CSV and report writers.

use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use esdg::experiments::TimeRecord;

/// Full double precision in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn create_csv(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

/// Writes `timeseries.csv` as records arrive. A row is emitted once its successor is
/// known so that `-d kappa/dt` is a centered difference; the end rows use one-sided
/// differences.
pub struct TimeseriesWriter {
    out: csv::Writer<File>,
    prev: Option<TimeRecord>,
    cur: Option<TimeRecord>,
}

impl TimeseriesWriter {
    pub fn create(path: &Path, dim: usize) -> Result<Self> {
        let mut out = create_csv(path)?;
        let mut header = vec!["t".to_string(), "entropy".into(), "mass".into()];
        header.extend(["momentum_x", "momentum_y", "momentum_z"].iter().take(dim).map(|s| s.to_string()));
        header.extend(["energy".into(), "kinetic_energy".into(), "neg_dkappa_dt".into()]);
        out.write_record(&header)?;
        out.flush()?;
        Ok(Self { out, prev: None, cur: None })
    }

    pub fn push(&mut self, rec: &TimeRecord) -> Result<()> {
        if let Some(cur) = self.cur.take() {
            let rate = match &self.prev {
                Some(p) => -(rec.kinetic_energy - p.kinetic_energy) / (rec.time - p.time),
                None => -(rec.kinetic_energy - cur.kinetic_energy) / (rec.time - cur.time),
            };
            self.write(&cur, rate)?;
            self.prev = Some(cur);
        }
        self.cur = Some(rec.clone());
        Ok(())
    }

    /// Emits the last pending row.
    pub fn finish(&mut self) -> Result<()> {
        if let Some(cur) = self.cur.take() {
            let rate = match &self.prev {
                Some(p) => -(cur.kinetic_energy - p.kinetic_energy) / (cur.time - p.time),
                None => 0.0,
            };
            self.write(&cur, rate)?;
        }
        Ok(())
    }

    fn write(&mut self, r: &TimeRecord, rate: f64) -> Result<()> {
        let mut row = vec![num(r.time), num(r.entropy)];
        row.extend(r.totals.iter().map(|&x| num(x)));
        row.push(num(r.kinetic_energy));
        row.push(num(rate));
        self.out.write_record(&row)?;
        self.out.flush()?;
        Ok(())
    }
}
