//! Scoring a predictions file against a dataset split.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde_json::Value;
use thiserror::Error;

use super::{io_err, DatasetError, DatasetManifest, Split};
use crate::csg::{evaluate_source, normalize, sample_surface, PointCloud, DEFAULT_POINTS};
use crate::metrics::{
    chamfer, feedback_matches, jsd, mmd, pairwise_sum, rouge_l, MetricError, MetricsReport,
    DEFAULT_JSD_RESOLUTION,
};
use crate::review::{Candidate, FeedbackRecord};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("predictions line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub points: usize,
    pub seed: u64,
    pub jsd_resolution: usize,
    pub split: Split,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            points: DEFAULT_POINTS,
            seed: 0,
            jsd_resolution: DEFAULT_JSD_RESOLUTION,
            split: Split::Test,
        }
    }
}

fn parse_predictions(text: &str) -> Result<BTreeMap<String, Candidate>, EvalError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| EvalError::Schema {
            line: i + 1,
            message,
        };
        let v: Value = serde_json::from_str(line).map_err(|e| schema(e.to_string()))?;
        for key in ["feedback", "edited_program"] {
            if let Some(f) = v.get(key) {
                if !(f.is_string() || f.is_null()) {
                    return Err(schema(format!("`{key}` must be a string")));
                }
            }
        }
        let c = Candidate::from_json(&v).map_err(schema)?;
        if out.contains_key(&c.sample_id) {
            return Err(schema(format!(
                "duplicate prediction for `{}`",
                c.sample_id
            )));
        }
        out.insert(c.sample_id.clone(), c);
    }
    Ok(out)
}

fn read_gold(root: &Path, rel: &str) -> Result<(String, FeedbackRecord), DatasetError> {
    let dir = root.join(rel);
    let src_path = dir.join("correct.scad");
    let source = fs::read_to_string(&src_path).map_err(io_err(&src_path))?;
    let fb_path = dir.join("feedback.json");
    let text = fs::read_to_string(&fb_path).map_err(io_err(&fb_path))?;
    let feedback = serde_json::from_str(&text).map_err(|e| DatasetError::Corrupt {
        path: fb_path,
        message: e.to_string(),
    })?;
    Ok((source, feedback))
}

struct Scored {
    correct: bool,
    rouge: f64,
    gold: PointCloud,
    /// Prediction cloud in the gold frame and its chamfer distance; `None`
    /// for a missing or invalid edit.
    pred: Option<(PointCloud, f64)>,
}

fn score_one(
    root: &Path,
    rel: &str,
    pred: Option<&Candidate>,
    opts: &EvalOptions,
) -> Result<Scored, EvalError> {
    let (source, gold_fb) = read_gold(root, rel)?;
    let node = evaluate_source(&source).map_err(DatasetError::from)?;
    let corrupt = |e: crate::csg::SampleError| DatasetError::Corrupt {
        path: root.join(rel).join("correct.scad"),
        message: e.to_string(),
    };
    let gold = normalize(&sample_surface(&node, opts.points, opts.seed).map_err(corrupt)?)
        .map_err(corrupt)?;
    let record = pred.and_then(Candidate::record);
    let correct = record
        .as_ref()
        .is_some_and(|r| feedback_matches(r, &gold_fb));
    let rouge = pred.map_or(0.0, |p| rouge_l(&p.feedback, &gold_fb.description));
    let pred = pred
        .and_then(|p| p.edited_program.as_deref())
        .and_then(|src| evaluate_source(src).ok())
        .and_then(|n| sample_surface(&n, opts.points, opts.seed).ok())
        .map(|raw| raw.in_frame(&gold.normalization))
        .map(|cloud| {
            let cd = chamfer(&gold, &cloud).expect("non-empty clouds");
            (cloud, cd)
        });
    Ok(Scored {
        correct,
        rouge,
        gold,
        pred,
    })
}

/// Scores one prediction per sample of `opts.split`. A sample without a
/// prediction, or whose edit does not compile to a samplable solid, counts
/// as invalid and as a wrong diagnosis. CD, MMD and JSD use only valid edits
/// and are NaN when there are none.
pub fn run_eval(
    predictions: &str,
    root: &Path,
    manifest: &DatasetManifest,
    opts: &EvalOptions,
) -> Result<MetricsReport, EvalError> {
    let preds = parse_predictions(predictions)?;
    let entries: Vec<_> = manifest.split(opts.split).collect();
    if entries.is_empty() {
        return Err(MetricError::EmptyList.into());
    }
    let scored: Vec<Scored> = entries
        .par_iter()
        .map(|e| score_one(root, &e.path, preds.get(&e.id), opts))
        .collect::<Result<_, _>>()?;

    let n = scored.len();
    let golds: Vec<PointCloud> = scored.iter().map(|s| s.gold.clone()).collect();
    let valid: Vec<&(PointCloud, f64)> = scored.iter().filter_map(|s| s.pred.as_ref()).collect();
    let invalid = n - valid.len();
    let (cd_mean, mmd_v, jsd_v) = if valid.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        let cds: Vec<f64> = valid.iter().map(|v| v.1).collect();
        let clouds: Vec<PointCloud> = valid.iter().map(|v| v.0.clone()).collect();
        (
            pairwise_sum(&cds) / cds.len() as f64,
            mmd(&clouds, &golds)?,
            jsd(&clouds, &golds, opts.jsd_resolution)?,
        )
    };
    let hits = scored.iter().filter(|s| s.correct).count();
    let rouges: Vec<f64> = scored.iter().map(|s| s.rouge).collect();
    Ok(MetricsReport {
        cd_mean,
        mmd: mmd_v,
        jsd: jsd_v,
        ir: invalid as f64 / n as f64,
        feedback_acc: hits as f64 / n as f64,
        rouge_l: pairwise_sum(&rouges) / n as f64,
        samples: n,
        invalid,
    })
}

/// Oracle predictions for a split: gold feedback and the correct program as
/// the edit, one JSON object per line.
pub fn gold_predictions(
    root: &Path,
    manifest: &DatasetManifest,
    split: Split,
) -> Result<String, DatasetError> {
    let mut out = String::new();
    for e in manifest.split(split) {
        let (source, fb) = read_gold(root, &e.path)?;
        let c = Candidate {
            sample_id: fb.sample_id,
            error_type: Some(fb.error_type),
            block_id: Some(fb.block_id),
            feedback: fb.description,
            edited_program: Some(source),
        };
        out.push_str(&c.to_json().to_string());
        out.push('\n');
    }
    Ok(out)
}
