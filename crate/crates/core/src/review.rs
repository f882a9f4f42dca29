//! Review feedback records, reward functions and preference-pair filtering.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::csg::{evaluate_source, sample_surface, PointCloud};
use crate::metrics::{chamfer, feedback_matches};
use crate::mutate::ErrorType;
use crate::render::{render, Camera, Raster};

/// Retention margin on the visual reward for a preference pair.
pub const VISUAL_MARGIN: f64 = 0.25;
pub const EMBED_GRID: u32 = 32;

pub const CORRECT_FEEDBACK: [&str; 10] = [
    "The 3D rendering captures the essence of the design blueprint with remarkable precision and fidelity.",
    "The 3D model matches the design drawing perfectly, with no deviations in key features like frames and recesses.",
    "The OpenSCAD-generated 3D model matches the original design drawing perfectly in all aspects.",
    "The 3D model mirrors the design drawing with exceptional clarity, maintaining all specified features.",
    "The implementation of the design in OpenSCAD results in a highly accurate and detailed 3D model.",
    "The alignment between the 3D rendering and the design drawing is precise, with all features correctly placed.",
    "The design intent is fully realized in the 3D model, with precise implementation of all structural elements.",
    "The faithful replication of the design drawing in the 3D model indicates precise coding and attention to detail.",
    "The correspondence between the design plan and the 3D model is seamless, with no misalignment or deviation.",
    "A careful analysis shows the 3D model to be a perfect reproduction of the design drawing.",
];

pub fn predefined_correct_feedback(seed: u64) -> &'static str {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CORRECT_FEEDBACK[rng.gen_range(0..CORRECT_FEEDBACK.len())]
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReviewError {
    #[error("sample id mismatch: `{0}` vs `{1}`")]
    SampleMismatch(String, String),
    #[error("raster sets differ in count or resolution")]
    ShapeMismatch,
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub sample_id: String,
    pub error_type: ErrorType,
    /// 0 for `NoError`.
    pub block_id: u32,
    pub description: String,
}

/// 1 when the prediction names the gold block and error type, else 0.
pub fn diagnostic_reward(pred: &FeedbackRecord, gold: &FeedbackRecord) -> Result<u8, ReviewError> {
    if pred.sample_id != gold.sample_id {
        return Err(ReviewError::SampleMismatch(
            pred.sample_id.clone(),
            gold.sample_id.clone(),
        ));
    }
    Ok(u8::from(feedback_matches(pred, gold)))
}

fn block_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^\s*(?:block\s*)?(\d+)\s*$").expect("valid regex"))
}

fn type_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^\s*[a-z][a-z _-]*\s*$").expect("valid regex"))
}

/// Block id from a structured field: `3`, `"3"` or `"Block 3"`.
pub fn parse_block_id(v: &Value) -> Option<u32> {
    match v {
        Value::Number(n) => n.as_u64().and_then(|x| u32::try_from(x).ok()),
        Value::String(s) => block_re().captures(s)?.get(1)?.as_str().parse().ok(),
        _ => None,
    }
}

pub fn parse_error_type(v: &Value) -> Option<ErrorType> {
    let s = v.as_str()?;
    type_re()
        .is_match(s)
        .then(|| ErrorType::parse_lenient(s))
        .flatten()
}

/// One generated review. `error_type` and `block_id` are `None` when the
/// structured fields could not be read; such candidates earn no diagnostic
/// reward.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub sample_id: String,
    pub error_type: Option<ErrorType>,
    pub block_id: Option<u32>,
    pub feedback: String,
    pub edited_program: Option<String>,
}

impl Candidate {
    pub fn from_json(v: &Value) -> Result<Candidate, String> {
        let obj = v.as_object().ok_or("expected a JSON object")?;
        let sample_id = obj
            .get("sample_id")
            .and_then(Value::as_str)
            .ok_or("missing string field `sample_id`")?;
        Ok(Candidate {
            sample_id: sample_id.to_string(),
            error_type: obj.get("error_type").and_then(parse_error_type),
            block_id: obj.get("block_id").and_then(parse_block_id),
            feedback: obj
                .get("feedback")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string(),
            edited_program: obj
                .get("edited_program")
                .and_then(Value::as_str)
                .map(str::to_string),
        })
    }

    pub fn record(&self) -> Option<FeedbackRecord> {
        Some(FeedbackRecord {
            sample_id: self.sample_id.clone(),
            error_type: self.error_type?,
            block_id: self.block_id?,
            description: self.feedback.clone(),
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "sample_id": self.sample_id,
            "error_type": self.error_type.map(ErrorType::as_str),
            "block_id": self.block_id,
            "feedback": self.feedback,
            "edited_program": self.edited_program,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub sample_id: String,
    pub candidates: Vec<Candidate>,
}

/// Groups candidate JSONL rows by sample id, in order of first appearance.
pub fn read_candidates(text: &str) -> Result<Vec<CandidateSet>, ReviewError> {
    let mut sets: Vec<CandidateSet> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| ReviewError::Schema {
            line: i + 1,
            message,
        };
        let v: Value = serde_json::from_str(line).map_err(|e| schema(e.to_string()))?;
        let c = Candidate::from_json(&v).map_err(schema)?;
        match sets.iter_mut().find(|s| s.sample_id == c.sample_id) {
            Some(s) => s.candidates.push(c),
            None => sets.push(CandidateSet {
                sample_id: c.sample_id.clone(),
                candidates: vec![c],
            }),
        }
    }
    Ok(sets)
}

/// Maps a set of views to a feature vector for the visual reward.
pub trait VisualEmbedder: Sync {
    fn embed(&self, views: &[Raster]) -> Vec<f64>;
}

/// Concatenated per-view occupancy grids: each cell holds the fraction of
/// its pixels covered by the silhouette.
pub struct SilhouetteEmbedder {
    pub grid: u32,
}

impl Default for SilhouetteEmbedder {
    fn default() -> Self {
        SilhouetteEmbedder { grid: EMBED_GRID }
    }
}

impl VisualEmbedder for SilhouetteEmbedder {
    fn embed(&self, views: &[Raster]) -> Vec<f64> {
        let g = self.grid;
        let mut out = Vec::with_capacity(views.len() * (g * g) as usize);
        for r in views {
            let mut cells = vec![0.0; (g * g) as usize];
            let mut area = vec![0.0; (g * g) as usize];
            for row in 0..r.height {
                for col in 0..r.width {
                    let c = ((row * g / r.height) * g + col * g / r.width) as usize;
                    area[c] += 1.0;
                    if r.get(col, row) {
                        cells[c] += 1.0;
                    }
                }
            }
            out.extend(
                cells
                    .iter()
                    .zip(&area)
                    .map(|(h, a)| if *a > 0.0 { h / a } else { 0.0 }),
            );
        }
        out
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb).sqrt()).clamp(-1.0, 1.0)
    }
}

pub fn visual_reward(
    reference: &[Raster],
    rendered: &[Raster],
    embedder: &dyn VisualEmbedder,
) -> Result<f64, ReviewError> {
    if reference.len() != rendered.len()
        || reference
            .iter()
            .zip(rendered)
            .any(|(a, b)| (a.width, a.height) != (b.width, b.height))
    {
        return Err(ReviewError::ShapeMismatch);
    }
    Ok(cosine(
        &embedder.embed(reference),
        &embedder.embed(rendered),
    ))
}

/// Chamfer distance of each candidate's edited geometry to the gold cloud,
/// measured in the gold cloud's frame. Returns `(candidate index, cd)` sorted
/// ascending with ties by index; candidates without a compilable edit get
/// `+inf`.
pub fn pointcloud_reward(
    candidates: &[Candidate],
    gold_cloud: &PointCloud,
    points: usize,
    seed: u64,
) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let cd = c
                .edited_program
                .as_deref()
                .and_then(|src| evaluate_source(src).ok())
                .and_then(|node| sample_surface(&node, points, seed).ok())
                .and_then(|raw| chamfer(gold_cloud, &raw.in_frame(&gold_cloud.normalization)).ok())
                .unwrap_or(f64::INFINITY);
            (i, cd)
        })
        .collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// Chosen is diagnostically right, rejected wrong, and the visual gap
    /// exceeds the margin.
    #[default]
    And,
    /// Either the diagnostic split holds, or the visual gap exceeds the
    /// margin without the chosen being diagnostically worse.
    Or,
    /// Chosen and rejected are the closest and farthest edits by chamfer
    /// distance.
    PointCloud,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub candidate: Candidate,
    pub v_d: u8,
    pub v_visual: f64,
    pub cd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRewards {
    pub v_d_chosen: u8,
    pub v_d_rejected: u8,
    pub v_visual_chosen: f64,
    pub v_visual_rejected: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cd_chosen: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cd_rejected: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferencePair {
    pub sample_id: String,
    pub chosen: usize,
    pub rejected: usize,
    pub chosen_candidate: Candidate,
    pub rejected_candidate: Candidate,
    pub rewards: PairRewards,
}

impl PreferencePair {
    pub fn to_json(&self) -> Value {
        json!({
            "prompt_id": self.sample_id,
            "chosen": self.chosen_candidate.to_json(),
            "rejected": self.rejected_candidate.to_json(),
            "rewards": serde_json::to_value(&self.rewards).expect("plain data"),
        })
    }
}

/// The retention rule for an ordered (chosen, rejected) pair under the two
/// threshold modes.
pub fn retain(c: &ScoredCandidate, r: &ScoredCandidate, mode: PairMode) -> bool {
    let diag = c.v_d == 1 && r.v_d == 0;
    let vis = c.v_visual - r.v_visual > VISUAL_MARGIN;
    match mode {
        PairMode::And => diag && vis,
        PairMode::Or => diag || (vis && c.v_d >= r.v_d),
        PairMode::PointCloud => false,
    }
}

fn content_key(c: &Candidate) -> String {
    c.to_json().to_string()
}

pub fn build_dpo_pairs(
    sample_id: &str,
    scored: &[ScoredCandidate],
    mode: PairMode,
) -> Vec<PreferencePair> {
    let make = |ci: usize, ri: usize| {
        let (c, r) = (&scored[ci], &scored[ri]);
        PreferencePair {
            sample_id: sample_id.to_string(),
            chosen: ci,
            rejected: ri,
            chosen_candidate: c.candidate.clone(),
            rejected_candidate: r.candidate.clone(),
            rewards: PairRewards {
                v_d_chosen: c.v_d,
                v_d_rejected: r.v_d,
                v_visual_chosen: c.v_visual,
                v_visual_rejected: r.v_visual,
                cd_chosen: c.cd,
                cd_rejected: r.cd,
            },
        }
    };
    if mode == PairMode::PointCloud {
        let valid: Vec<(usize, f64)> = scored
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.cd.filter(|d| d.is_finite()).map(|d| (i, d)))
            .collect();
        let Some(min) = valid
            .iter()
            .copied()
            .reduce(|a, b| if b.1 < a.1 { b } else { a })
        else {
            return vec![];
        };
        let max = valid
            .iter()
            .copied()
            .reduce(|a, b| if b.1 > a.1 { b } else { a })
            .expect("non-empty");
        if min.1 == max.1 {
            return vec![];
        }
        return vec![make(min.0, max.0)];
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for ci in 0..scored.len() {
        for ri in 0..scored.len() {
            if ci == ri || !retain(&scored[ci], &scored[ri], mode) {
                continue;
            }
            let key = (
                content_key(&scored[ci].candidate),
                content_key(&scored[ri].candidate),
            );
            if key.0 == key.1 || !seen.insert(key) {
                continue;
            }
            out.push(make(ci, ri));
        }
    }
    out
}

/// What the rewards are measured against for one sample.
pub struct ScoringContext<'a> {
    pub gold: FeedbackRecord,
    pub cameras: Vec<Camera>,
    pub reference_views: Vec<Raster>,
    pub gold_cloud: Option<PointCloud>,
    pub points: usize,
    pub seed: u64,
    pub embedder: &'a dyn VisualEmbedder,
}

/// Computes all three rewards for every candidate. An edit that is missing
/// or does not compile scores a visual reward of 0.
pub fn score_candidates(set: &CandidateSet, ctx: &ScoringContext<'_>) -> Vec<ScoredCandidate> {
    let cds: Option<Vec<f64>> = ctx.gold_cloud.as_ref().map(|gold| {
        let mut cds = vec![f64::INFINITY; set.candidates.len()];
        for (i, cd) in pointcloud_reward(&set.candidates, gold, ctx.points, ctx.seed) {
            cds[i] = cd;
        }
        cds
    });
    set.candidates
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let v_d = c
                .record()
                .map_or(0, |r| u8::from(feedback_matches(&r, &ctx.gold)));
            let v_visual = c
                .edited_program
                .as_deref()
                .and_then(|src| evaluate_source(src).ok())
                .map(|node| {
                    let views: Vec<Raster> =
                        ctx.cameras.iter().map(|cam| render(&node, cam)).collect();
                    visual_reward(&ctx.reference_views, &views, ctx.embedder).unwrap_or(0.0)
                })
                .unwrap_or(0.0);
            ScoredCandidate {
                candidate: c.clone(),
                v_d,
                v_visual,
                cd: cds.as_ref().map(|v| v[i]),
            }
        })
        .collect()
}
