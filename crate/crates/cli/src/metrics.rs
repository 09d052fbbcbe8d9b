use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use admm_embed_core::admm::MetricRow;

use crate::error::{Error, Result};

pub const HEADER: &str = "iter,loss_nlm,loss_rel,loss_penalty,mean_residual";

/// Streams metric rows to a CSV file as they are produced.
pub struct MetricsWriter {
    path: std::path::PathBuf,
    out: BufWriter<File>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = MetricsWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        };
        writeln!(w.out, "{HEADER}").map_err(|e| Error::io(path, e))?;
        Ok(w)
    }

    pub fn write(&mut self, row: &MetricRow) -> Result<()> {
        writeln!(self.out, "{}", format_row(row)).map_err(|e| Error::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn format_row(row: &MetricRow) -> String {
    format!(
        "{},{},{},{},{}",
        row.iteration, row.loss_nlm, row.loss_rel, row.loss_penalty, row.mean_residual
    )
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        _ => return Err(Error::format(path, "missing metrics header")),
    }
    lines
        .map(|(i, line)| {
            let bad = || Error::parse(path, i + 1, "malformed metrics row");
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok(MetricRow {
                iteration: f[0].parse().map_err(|_| bad())?,
                loss_nlm: num(f[1])?,
                loss_rel: num(f[2])?,
                loss_penalty: num(f[3])?,
                mean_residual: num(f[4])?,
            })
        })
        .collect()
}
