//! Record files, ROC point files and summaries.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{average_points, consistency_report, roc_from_cost_sweep, AucResult, ConsistencyReport};

use super::config::ReportFormat;
use super::experiment::ResultRecord;
use super::io::csv_io;

/// Fold- and seed-averaged operating point of one cost setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub cost_point_index: usize,
    pub c_pos: f64,
    pub c_neg: f64,
    pub c_rate: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocSummary {
    pub algorithm: String,
    pub mode: String,
    pub learner: String,
    pub dataset: String,
    pub points: Vec<RocPoint>,
    /// Area under the averaged cost-sweep ROC polyline.
    pub roc_auc: f64,
    /// Mean score-based AUC over all records.
    pub mean_auc: f64,
    pub records: usize,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    algorithm: &'a str,
    mode: &'a str,
    learner: &'a str,
    dataset: &'a str,
    records: usize,
    roc_auc: f64,
    mean_auc: f64,
}

type GroupKey = (String, String, String, String);

/// Groups records by `(algorithm, mode, learner, dataset)` and averages the operating
/// points of each cost index over seeds and folds.
pub fn roc_summaries(records: &[ResultRecord]) -> Result<Vec<RocSummary>> {
    let mut groups: BTreeMap<GroupKey, Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.algorithm.clone(), r.mode.clone(), r.learner.clone(), r.dataset.clone()))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((algorithm, mode, learner, dataset), rs)| {
            let mut by_cost: BTreeMap<usize, Vec<&ResultRecord>> = BTreeMap::new();
            for r in &rs {
                by_cost.entry(r.cost_point_index).or_default().push(r);
            }
            let points: Vec<RocPoint> = by_cost
                .into_iter()
                .map(|(j, cell)| {
                    let avg = average_points(&cell.iter().map(|r| vec![(r.fpr, r.tpr)]).collect::<Vec<_>>())?;
                    Ok(RocPoint {
                        cost_point_index: j,
                        c_pos: cell[0].c_pos,
                        c_neg: cell[0].c_neg,
                        c_rate: cell[0].c_rate,
                        fpr: avg[0].0,
                        tpr: avg[0].1,
                    })
                })
                .collect::<Result<_>>()?;
            let roc = roc_from_cost_sweep(&points.iter().map(|p| (p.fpr, p.tpr)).collect::<Vec<_>>())?;
            let mean_auc = rs.iter().map(|r| r.auc).sum::<f64>() / rs.len() as f64;
            Ok(RocSummary { algorithm, mode, learner, dataset, points, roc_auc: roc.auc, mean_auc, records: rs.len() })
        })
        .collect()
}

/// Batch versus online ROC AUC wherever both modes are present.
pub fn consistency_from(summaries: &[RocSummary]) -> Result<Option<ConsistencyReport>> {
    let pick = |mode: &str| -> Vec<AucResult> {
        summaries
            .iter()
            .filter(|s| s.mode == mode)
            .map(|s| AucResult {
                dataset: s.dataset.clone(),
                algorithm: s.algorithm.clone(),
                learner: s.learner.clone(),
                auc: s.roc_auc,
            })
            .collect()
    };
    let (batch, online) = (pick("batch"), pick("online"));
    let key = |r: &AucResult| (r.dataset.clone(), r.algorithm.clone(), r.learner.clone());
    let online_keys: Vec<_> = online.iter().map(key).collect();
    let batch: Vec<AucResult> = batch.into_iter().filter(|r| online_keys.contains(&key(r))).collect();
    let batch_keys: Vec<_> = batch.iter().map(key).collect();
    let online: Vec<AucResult> = online.into_iter().filter(|r| batch_keys.contains(&key(r))).collect();
    if batch.is_empty() {
        return Ok(None);
    }
    consistency_report(&batch, &online).map(Some)
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
    for row in rows {
        w.serialize(row).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut w, row).map_err(|e| Error::Io(e.into()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the records, one ROC point file per `(algorithm, mode, learner)` and a
/// summary; returns the paths written, in order.
pub fn emit_report(records: &[ResultRecord], dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::arg("no records to report"));
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if matches!(format, ReportFormat::Csv | ReportFormat::Both) {
        let p = dir.join("records.csv");
        write_csv(&p, records)?;
        written.push(p);
    }
    if matches!(format, ReportFormat::Jsonl | ReportFormat::Both) {
        let p = dir.join("records.jsonl");
        write_jsonl(&p, records)?;
        written.push(p);
    }
    let summaries = roc_summaries(records)?;
    let multi_dataset = summaries.iter().any(|s| s.dataset != summaries[0].dataset);
    for s in &summaries {
        let name = if multi_dataset {
            format!("roc_{}_{}_{}_{}.csv", s.dataset, s.algorithm, s.mode, s.learner)
        } else {
            format!("roc_{}_{}_{}.csv", s.algorithm, s.mode, s.learner)
        };
        let p = dir.join(name);
        write_csv(&p, &s.points)?;
        written.push(p);
    }
    let p = dir.join("summary.csv");
    write_csv(
        &p,
        summaries.iter().map(|s| SummaryRow {
            algorithm: &s.algorithm,
            mode: &s.mode,
            learner: &s.learner,
            dataset: &s.dataset,
            records: s.records,
            roc_auc: s.roc_auc,
            mean_auc: s.mean_auc,
        }),
    )?;
    written.push(p);
    if let Some(rep) = consistency_from(&summaries)? {
        let p = dir.join("consistency.csv");
        write_csv(&p, &rep.entries)?;
        written.push(p);
    }
    Ok(written)
}

/// Reads records written by [`emit_report`]; `.jsonl` files as JSON lines, anything
/// else as CSV.
pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        let reader = BufReader::new(File::open(path)?);
        let mut out = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&line).map_err(|e| Error::Parse { line: n + 1, message: e.to_string() })?);
        }
        Ok(out)
    } else {
        let mut r = csv::Reader::from_path(path).map_err(csv_io)?;
        r.deserialize()
            .map(|row| {
                row.map_err(|e| Error::Parse {
                    line: e.position().map_or(0, |p| p.line() as usize),
                    message: e.to_string(),
                })
            })
            .collect()
    }
}

/// Human-readable summary table.
pub fn format_summary(summaries: &[RocSummary], consistency: Option<&ConsistencyReport>) -> String {
    let mut out = String::from("algorithm  mode       learner  dataset          records  roc_auc  mean_auc\n");
    for s in summaries {
        out.push_str(&format!(
            "{:<10} {:<10} {:<8} {:<16} {:>7}  {:.4}   {:.4}\n",
            s.algorithm, s.mode, s.learner, s.dataset, s.records, s.roc_auc, s.mean_auc
        ));
    }
    if let Some(rep) = consistency {
        out.push_str("\nbatch vs online |AUC difference|\n");
        for d in &rep.summaries {
            out.push_str(&format!("{:<10} {:<8} n={:<3} mean={:.4} std={:.4}\n", d.algorithm, d.learner, d.count, d.mean, d.std));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(mode: &str, fold: i64, j: usize, fpr: f64, tpr: f64) -> ResultRecord {
        ResultRecord {
            algorithm: "uob".into(),
            mode: mode.into(),
            learner: "nb".into(),
            dataset: "toy".into(),
            seed: 1,
            fold,
            cost_point_index: j,
            c_pos: 1.0,
            c_neg: 1.0,
            c_rate: 1.0 + j as f64,
            fpr,
            tpr,
            auc: 0.9,
            violations: 0,
            wall_ms: 0,
        }
    }

    #[test]
    fn single_record_csv() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&[record("batch", 0, 0, 0.5, 0.5)], dir.path(), ReportFormat::Csv).unwrap();
        let text = std::fs::read_to_string(&files[0]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "algorithm,mode,learner,dataset,seed,fold,cost_point_index,c_pos,c_neg,c_rate,fpr,tpr,auc,violations,wall_ms"
        );
        assert_eq!(read_records(&files[0]).unwrap(), vec![record("batch", 0, 0, 0.5, 0.5)]);
    }

    #[test]
    fn jsonl_line_count_and_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let recs: Vec<ResultRecord> = (0..5).map(|f| record("online", f, 0, 0.1, 0.7)).collect();
        let files = emit_report(&recs, dir.path(), ReportFormat::Jsonl).unwrap();
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(read_records(&files[0]).unwrap(), recs);
        assert!(emit_report(&[], dir.path(), ReportFormat::Csv).is_err());
    }

    #[test]
    fn fold_averaging_and_consistency() {
        let recs = vec![
            record("batch", 0, 0, 0.2, 0.8),
            record("batch", 1, 0, 0.2, 0.8),
            record("online", 0, 0, 0.1, 0.8),
            record("online", 1, 0, 0.3, 0.8),
        ];
        let s = roc_summaries(&recs).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].points[0].fpr, 0.2);
        assert!((s[1].points[0].fpr - 0.2).abs() < 1e-15);
        let rep = consistency_from(&s).unwrap().unwrap();
        assert!(rep.entries[0].abs_diff < 1e-12);
    }
}
