//! Condition-number tables and eigenvalue listings from experiment records.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::coarse::CoarseKind;
use crate::error::{Error, Result};
use crate::experiment::{OutputFormat, RunRecord, SelectionSummary};
use crate::harmonic::Structure;

/// `κ (iterations)`, with a `+` on the count when the solve did not converge.
pub fn cell(record: &RunRecord) -> String {
    let kappa = match record.report.cond_estimate {
        Some(k) => format_kappa(k),
        None => "-".to_string(),
    };
    let plus = if record.report.converged { "" } else { "+" };
    format!("{kappa} ({}{plus})", record.report.iterations)
}

/// Fixed notation below 1000, scientific above.
pub fn format_kappa(k: f64) -> String {
    if k.is_finite() && k.abs() < 1e3 {
        format!("{k:.2}")
    } else {
        format!("{k:.2e}")
    }
}

/// One condition-number table per coarse space.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub coarse: CoarseKind,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_text(&self) -> String {
        let ncol = self.header.len();
        let mut width = vec![0; ncol];
        for row in std::iter::once(&self.header).chain(&self.rows) {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = format!("{} coarse space: condition number estimate (iterations)\n", self.coarse.name());
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let line: Vec<String> = row
                .iter()
                .zip(&width)
                .enumerate()
                .map(|(j, (c, &w))| {
                    let pad = w - c.chars().count();
                    if j == 0 {
                        format!("{c}{}", " ".repeat(pad))
                    } else {
                        format!("{}{c}", " ".repeat(pad))
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Wirebasket table first, then vertex. Rows are distributions in first-seen
/// order; columns are the no-enrichment cells for every H/h followed by the
/// enrichment cells for every H/h.
pub fn build_tables(records: &[RunRecord]) -> Vec<Table> {
    let mut kinds = Vec::new();
    let mut dists: Vec<&str> = Vec::new();
    for r in records {
        if !kinds.contains(&r.coarse) {
            kinds.push(r.coarse);
        }
        if !dists.contains(&r.distribution.as_str()) {
            dists.push(&r.distribution);
        }
    }
    kinds.sort_by_key(|k| *k == CoarseKind::Vertex);
    kinds
        .into_iter()
        .map(|kind| {
            let mine: Vec<&RunRecord> = records.iter().filter(|r| r.coarse == kind).collect();
            let cols: BTreeSet<(bool, usize)> = mine.iter().map(|r| (r.enrichment, r.h_ratio)).collect();
            let mut header = vec!["distribution".to_string()];
            header.extend(cols.iter().map(|&(e, n)| {
                format!("{} H/h={n}", if e { "enrichment" } else { "no enrichment" })
            }));
            let rows = dists
                .iter()
                .filter(|d| mine.iter().any(|r| r.distribution == **d))
                .map(|d| {
                    let mut row = vec![d.to_string()];
                    for &(e, n) in &cols {
                        let c = mine
                            .iter()
                            .find(|r| r.distribution == *d && r.enrichment == e && r.h_ratio == n)
                            .map_or_else(|| "-".to_string(), |r| cell(r));
                        row.push(c);
                    }
                    row
                })
                .collect();
            Table { coarse: kind, header, rows }
        })
        .collect()
}

fn structure_label(s: &Structure) -> String {
    match s {
        Structure::Face(f) => format!("face {f}"),
        Structure::Edge(e) => format!("edge {e}"),
    }
}

/// Per-structure listing: selected eigenvalues, then the first excluded one
/// marked with `*`.
pub fn eigenvalue_listing(record: &RunRecord) -> String {
    let mut out = format!(
        "# {} / {} / enrichment {} / H/h={}\n# selected eigenvalues; the first excluded value is marked with *\n",
        record.distribution,
        record.coarse.name(),
        if record.enrichment { "on" } else { "off" },
        record.h_ratio
    );
    for s in &record.selections {
        let _ = write!(out, "{} (threshold {:.4e}):", structure_label(&s.structure), s.threshold);
        for v in &s.selected {
            let _ = write!(out, " {v:.4e}");
        }
        if let Some(v) = s.first_excluded {
            let _ = write!(out, " *{v:.4e}");
        }
        out.push('\n');
    }
    out
}

fn write_listing_csv(path: &Path, selections: &[SelectionSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["structure", "index", "eigenvalue", "status", "threshold"])?;
    for s in selections {
        let label = structure_label(&s.structure);
        for (i, v) in s.selected.iter().enumerate() {
            w.write_record([label.clone(), i.to_string(), format!("{v:e}"), "selected".into(), format!("{:e}", s.threshold)])?;
        }
        if let Some(v) = s.first_excluded {
            w.write_record([
                label.clone(),
                s.selected.len().to_string(),
                format!("{v:e}"),
                "first-excluded".into(),
                format!("{:e}", s.threshold),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes tables, eigenvalue listings, residual histories and the raw records
/// into `dir`. Returns the written paths.
pub fn emit_tables(records: &[RunRecord], dir: &Path, formats: &[OutputFormat]) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::Config("no run records to tabulate".into()));
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv = formats.contains(&OutputFormat::Csv);
    let text = formats.contains(&OutputFormat::Text);
    for table in build_tables(records) {
        let stem = format!("table_{}", table.coarse.name());
        if csv {
            let p = dir.join(format!("{stem}.csv"));
            table.write_csv(&p)?;
            written.push(p);
        }
        if text {
            let p = dir.join(format!("{stem}.txt"));
            std::fs::write(&p, table.to_text())?;
            written.push(p);
        }
    }
    let eig_dir = dir.join("eigenvalues");
    let res_dir = dir.join("residuals");
    for r in records {
        if csv {
            std::fs::create_dir_all(&res_dir)?;
            let p = res_dir.join(format!("{}.csv", r.stem()));
            r.report.write_residual_csv(&p)?;
            written.push(p);
        }
        if r.selections.is_empty() {
            continue;
        }
        std::fs::create_dir_all(&eig_dir)?;
        if text {
            let p = eig_dir.join(format!("{}.txt", r.stem()));
            std::fs::write(&p, eigenvalue_listing(r))?;
            written.push(p);
        }
        if csv {
            let p = eig_dir.join(format!("{}.csv", r.stem()));
            write_listing_csv(&p, &r.selections)?;
            written.push(p);
        }
    }
    if formats.contains(&OutputFormat::Json) {
        let p = dir.join("records.json");
        std::fs::write(&p, serde_json::to_string_pretty(records)?)?;
        written.push(p);
    }
    Ok(written)
}

/// Reads back a `records.json` written by [`emit_tables`].
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
