//! Edit-study label analysis: rows of `id, original_label, edit_label,
//! condition`, summarised per condition.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use super::kendall::{kendall_tau_b, KendallTau, PairedSample};
use super::proportion::ProportionEstimate;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelRow {
    pub id: String,
    pub original: f64,
    pub edited: f64,
    pub condition: String,
}

/// Reads delimiter-separated label rows. A first row whose label columns are
/// not numeric is treated as a header.
pub fn parse_labels<R: Read>(source_name: &str, reader: R, delimiter: u8) -> Result<Vec<LabelRow>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line()) as usize;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 4 {
            return Err(Error::parse(
                source_name,
                line,
                format!("expected 4 fields, found {}", record.len()),
            ));
        }
        let original = record[1].parse::<f64>();
        let edited = record[2].parse::<f64>();
        match (original, edited) {
            (Ok(original), Ok(edited)) if original.is_finite() && edited.is_finite() => {
                rows.push(LabelRow {
                    id: record[0].to_string(),
                    original,
                    edited,
                    condition: record[3].to_string(),
                });
            }
            _ if i == 0 => continue,
            _ => {
                return Err(Error::parse(
                    source_name,
                    line,
                    "labels must be finite numbers",
                ));
            }
        }
    }
    Ok(rows)
}

pub fn read_labels(path: impl AsRef<Path>, delimiter: u8) -> Result<Vec<LabelRow>> {
    let path = path.as_ref();
    parse_labels(
        &path.display().to_string(),
        File::open(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?,
        delimiter,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct ProportionSummary {
    pub successes: u64,
    pub trials: u64,
    pub proportion: f64,
    pub low: f64,
    pub high: f64,
}

impl ProportionSummary {
    fn new(successes: u64, trials: u64, z: f64) -> Result<Self> {
        let est = ProportionEstimate::new(successes, trials)?;
        let (low, high) = est.interval(z);
        Ok(ProportionSummary {
            successes,
            trials,
            proportion: est.point(),
            low,
            high,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub n: usize,
    pub mean_original: f64,
    pub mean_edited: f64,
    /// Rank correlation between original and edited labels.
    pub kendall: Option<KendallTau>,
    /// Why `kendall` is missing, when it is.
    pub kendall_error: Option<String>,
    pub original_toxic: ProportionSummary,
    pub edited_toxic: ProportionSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelsReport {
    /// Labels at or above this value count as toxic.
    pub toxic_threshold: f64,
    pub z: f64,
    pub conditions: Vec<ConditionReport>,
}

pub fn analyze_labels(rows: &[LabelRow], toxic_threshold: f64, z: f64) -> Result<LabelsReport> {
    let mut groups: BTreeMap<&str, Vec<&LabelRow>> = BTreeMap::new();
    for row in rows {
        groups.entry(row.condition.as_str()).or_default().push(row);
    }
    let conditions = groups
        .into_iter()
        .map(|(condition, rows)| {
            let n = rows.len();
            let samples: Vec<PairedSample> = rows
                .iter()
                .map(|r| PairedSample::new(r.original, r.edited))
                .collect();
            let (kendall, kendall_error) = match kendall_tau_b(&samples) {
                Ok(k) => (Some(k), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let toxic = |f: fn(&LabelRow) -> f64| {
                rows.iter().filter(|r| f(r) >= toxic_threshold).count() as u64
            };
            Ok(ConditionReport {
                condition: condition.to_string(),
                n,
                mean_original: rows.iter().map(|r| r.original).sum::<f64>() / n as f64,
                mean_edited: rows.iter().map(|r| r.edited).sum::<f64>() / n as f64,
                kendall,
                kendall_error,
                original_toxic: ProportionSummary::new(toxic(|r| r.original), n as u64, z)?,
                edited_toxic: ProportionSummary::new(toxic(|r| r.edited), n as u64, z)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabelsReport {
        toxic_threshold,
        z,
        conditions,
    })
}

impl fmt::Display for LabelsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "toxic if label >= {}, intervals at z = {}",
            self.toxic_threshold, self.z
        )?;
        for c in &self.conditions {
            writeln!(f)?;
            writeln!(f, "condition {} (n = {})", c.condition, c.n)?;
            writeln!(
                f,
                "  mean label      original {:.3}  edited {:.3}",
                c.mean_original, c.mean_edited
            )?;
            match (&c.kendall, &c.kendall_error) {
                (Some(k), _) => writeln!(
                    f,
                    "  kendall tau-b   {:+.4}  (z = {:.3}, p = {:.4}; C = {}, D = {})",
                    k.tau, k.z, k.p_value, k.concordant, k.discordant
                )?,
                (None, Some(e)) => writeln!(f, "  kendall tau-b   n/a ({e})")?,
                (None, None) => {}
            }
            for (label, p) in [("original", &c.original_toxic), ("edited", &c.edited_toxic)] {
                writeln!(
                    f,
                    "  toxic {:<9} {}/{} = {:.3}  [{:.3}, {:.3}]",
                    label, p.successes, p.trials, p.proportion, p.low, p.high
                )?;
            }
        }
        Ok(())
    }
}
