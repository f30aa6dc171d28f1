use std::io::Write;
use std::time::Instant;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codelength::{score_pair, Decision, PairReport, TrainConfig};
use crate::data::{Direction, PairDataset};
use crate::{Error, Result};

use super::metrics::{accuracy, bi_auroc, weighted_accuracy};

/// Recorded in every summary so readers know how weights were used.
pub const WEIGHTING_NOTE: &str = "pair weights are applied to both weighted_accuracy and bi_auroc";

/// One scored (or failed) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub id: String,
    pub label: Direction,
    pub weight: f64,
    pub report: Option<PairReport>,
    pub error: Option<String>,
    pub runtime_secs: f64,
}

impl PairRow {
    pub fn decision(&self) -> Option<Decision> {
        self.report.as_ref().map(|r| r.decision)
    }

    pub fn final_delta(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.final_delta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub scored: usize,
    pub failed: usize,
    pub accuracy: Option<f64>,
    pub weighted_accuracy: Option<f64>,
    /// `None` when only one direction occurs among the scored pairs.
    pub bi_auroc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub config: TrainConfig,
    pub rows: Vec<PairRow>,
    pub aggregates: Aggregates,
    pub weighting: String,
    pub total_runtime_secs: f64,
}

fn score_row(pair: &PairDataset, label: Direction, cfg: &TrainConfig) -> PairRow {
    let start = Instant::now();
    let outcome = score_pair(pair, cfg);
    let runtime_secs = start.elapsed().as_secs_f64();
    let (report, error) = match outcome {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    PairRow {
        id: pair.id.clone(),
        label,
        weight: pair.weight,
        report,
        error,
        runtime_secs,
    }
}

fn aggregate(rows: &[PairRow]) -> Result<Aggregates> {
    let ok: Vec<&PairRow> = rows.iter().filter(|r| r.report.is_some()).collect();
    let failed = rows.len() - ok.len();
    if failed > 0 {
        warn!("{failed} of {} pairs failed and are excluded from the metrics", rows.len());
    }
    if ok.is_empty() {
        return Ok(Aggregates {
            scored: 0,
            failed,
            accuracy: None,
            weighted_accuracy: None,
            bi_auroc: None,
        });
    }
    let decisions: Vec<Decision> = ok.iter().filter_map(|r| r.decision()).collect();
    let deltas: Vec<f64> = ok.iter().filter_map(|r| r.final_delta()).collect();
    let labels: Vec<Direction> = ok.iter().map(|r| r.label).collect();
    let weights: Vec<f64> = ok.iter().map(|r| r.weight).collect();
    let both_classes = labels.contains(&Direction::XCausesY) && labels.contains(&Direction::YCausesX);
    Ok(Aggregates {
        scored: ok.len(),
        failed,
        accuracy: Some(accuracy(&decisions, &labels)?),
        weighted_accuracy: Some(weighted_accuracy(&decisions, &labels, &weights)?),
        bi_auroc: if both_classes {
            Some(bi_auroc(&deltas, &labels, &weights)?)
        } else {
            None
        },
    })
}

/// Scores every labelled pair on a pool of `parallelism` worker threads
/// and aggregates the metrics. Row order follows `pairs`; results do not
/// depend on the degree of parallelism.
pub fn run_benchmark(pairs: &[PairDataset], cfg: &TrainConfig, parallelism: usize) -> Result<BenchmarkResult> {
    if pairs.is_empty() {
        return Err(Error::argument("benchmark needs at least one pair"));
    }
    if parallelism == 0 {
        return Err(Error::argument("parallelism must be at least 1"));
    }
    cfg.validate()?;
    let labels = pairs
        .iter()
        .map(|p| {
            p.label
                .ok_or_else(|| Error::argument(format!("pair {} has no ground-truth label", p.id)))
        })
        .collect::<Result<Vec<_>>>()?;

    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::argument(format!("thread pool: {e}")))?;
    let rows: Vec<PairRow> = pool.install(|| {
        pairs
            .par_iter()
            .zip(labels.par_iter())
            .map(|(pair, &label)| score_row(pair, label, cfg))
            .collect()
    });
    let aggregates = aggregate(&rows)?;
    Ok(BenchmarkResult {
        config: cfg.clone(),
        rows,
        aggregates,
        weighting: WEIGHTING_NOTE.to_string(),
        total_runtime_secs: start.elapsed().as_secs_f64(),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

impl BenchmarkResult {
    /// Per-pair table, a blank line, then a `metric,value` summary block.
    /// Runtime columns are the only non-deterministic fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let to_err = |e: csv::Error| Error::argument(format!("csv: {e}"));
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record([
            "id",
            "label",
            "weight",
            "decision",
            "final_delta",
            "delta_xy",
            "delta_yx",
            "confidence",
            "runtime_secs",
            "error",
        ])
        .map_err(to_err)?;
        for row in &self.rows {
            let r = row.report.as_ref();
            w.write_record([
                row.id.clone(),
                row.label.to_string(),
                row.weight.to_string(),
                r.map_or("failed".into(), |r| r.decision.to_string()),
                opt(r.map(|r| r.final_delta)),
                opt(r.map(|r| r.forward.delta)),
                opt(r.map(|r| r.backward.delta)),
                opt(r.map(|r| r.confidence)),
                format!("{:.3}", row.runtime_secs),
                row.error.clone().unwrap_or_default(),
            ])
            .map_err(to_err)?;
        }
        let mut out = w
            .into_inner()
            .map_err(|e| Error::io("<csv>", e.into_error()))?;
        out.write_all(b"\n").map_err(|e| Error::io("<csv>", e))?;
        let mut w = csv::Writer::from_writer(out);
        let a = &self.aggregates;
        let summary = [
            ("metric", "value".to_string()),
            ("scored", a.scored.to_string()),
            ("failed", a.failed.to_string()),
            ("accuracy", opt(a.accuracy)),
            ("weighted_accuracy", opt(a.weighted_accuracy)),
            ("bi_auroc", opt(a.bi_auroc)),
            ("total_runtime_secs", format!("{:.3}", self.total_runtime_secs)),
        ];
        for (k, v) in summary {
            w.write_record([k.to_string(), v]).map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::argument(format!("json: {e}")))
    }
}
