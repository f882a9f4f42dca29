//! Shape and feedback metrics: chamfer distance, minimum matching distance,
//! voxel Jensen-Shannon divergence, invalid ratio, feedback accuracy and
//! ROUGE-L.

mod kdtree;

pub use kdtree::KdTree;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csg::{evaluate_source, PointCloud};
use crate::review::FeedbackRecord;

pub const DEFAULT_JSD_RESOLUTION: usize = 16;
/// CD, MMD and JSD are reported multiplied by this factor.
pub const REPORT_SCALE: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("set is empty")]
    EmptySet,
    #[error("list is empty")]
    EmptyList,
    #[error("length mismatch: {0} predictions vs {1} references")]
    LengthMismatch(usize, usize),
    #[error("histogram resolution must be at least 2")]
    Resolution,
}

/// Sum with pairwise splitting, so the rounding does not depend on how a
/// parallel reduction was scheduled.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

fn one_sided(from: &[[f64; 3]], to: &KdTree) -> f64 {
    let d: Vec<f64> = from.iter().map(|p| to.nearest_sq(p)).collect();
    mean(&d)
}

/// Mean squared nearest-neighbor distance from P to Q plus from Q to P.
pub fn chamfer(p: &PointCloud, q: &PointCloud) -> Result<f64, MetricError> {
    if p.is_empty() || q.is_empty() {
        return Err(MetricError::EmptyCloud);
    }
    Ok(chamfer_trees(
        &p.points,
        &KdTree::new(&p.points),
        &q.points,
        &KdTree::new(&q.points),
    ))
}

fn chamfer_trees(p: &[[f64; 3]], pt: &KdTree, q: &[[f64; 3]], qt: &KdTree) -> f64 {
    one_sided(p, qt) + one_sided(q, pt)
}

/// Average over Y in `s` of the smallest chamfer distance to any X in `g`.
pub fn mmd(s: &[PointCloud], g: &[PointCloud]) -> Result<f64, MetricError> {
    if s.is_empty() || g.is_empty() {
        return Err(MetricError::EmptySet);
    }
    if s.iter().chain(g).any(PointCloud::is_empty) {
        return Err(MetricError::EmptyCloud);
    }
    let g_trees: Vec<KdTree> = g.par_iter().map(|x| KdTree::new(&x.points)).collect();
    let mins: Vec<f64> = s
        .par_iter()
        .map(|y| {
            let yt = KdTree::new(&y.points);
            g.iter()
                .zip(&g_trees)
                .map(|(x, xt)| chamfer_trees(&x.points, xt, &y.points, &yt))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(mean(&mins))
}

/// Occupancy counts over a cubic grid spanning [-0.5, 0.5]^3. Points outside
/// the cube are clamped into the border cells.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelHistogram {
    pub resolution: usize,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl VoxelHistogram {
    pub fn new(resolution: usize) -> VoxelHistogram {
        VoxelHistogram {
            resolution,
            counts: vec![0; resolution.pow(3)],
            total: 0,
        }
    }

    pub fn cell(&self, p: &[f64; 3]) -> usize {
        let r = self.resolution;
        let idx = |v: f64| (((v + 0.5) * r as f64).floor().max(0.0) as usize).min(r - 1);
        (idx(p[0]) * r + idx(p[1])) * r + idx(p[2])
    }

    pub fn add(&mut self, p: &[f64; 3]) {
        let c = self.cell(p);
        self.counts[c] += 1;
        self.total += 1;
    }

    pub fn from_clouds(clouds: &[PointCloud], resolution: usize) -> VoxelHistogram {
        let mut h = VoxelHistogram::new(resolution);
        for p in clouds.iter().flat_map(|c| &c.points) {
            h.add(p);
        }
        h
    }
}

/// Jensen-Shannon divergence (natural log) between the pooled voxel
/// distributions of two sets of normalized clouds.
pub fn jsd(s: &[PointCloud], g: &[PointCloud], resolution: usize) -> Result<f64, MetricError> {
    if s.is_empty() || g.is_empty() {
        return Err(MetricError::EmptySet);
    }
    if resolution < 2 {
        return Err(MetricError::Resolution);
    }
    let hs = VoxelHistogram::from_clouds(s, resolution);
    let hg = VoxelHistogram::from_clouds(g, resolution);
    if hs.total == 0 || hg.total == 0 {
        return Err(MetricError::EmptyCloud);
    }
    Ok(jsd_histograms(&hs, &hg))
}

pub fn jsd_histograms(a: &VoxelHistogram, b: &VoxelHistogram) -> f64 {
    let (ta, tb) = (a.total as f64, b.total as f64);
    let mut terms = Vec::new();
    for (ca, cb) in a.counts.iter().zip(&b.counts) {
        let (p, q) = (*ca as f64 / ta, *cb as f64 / tb);
        let m = 0.5 * (p + q);
        if p > 0.0 {
            terms.push(0.5 * p * (p / m).ln());
        }
        if q > 0.0 {
            terms.push(0.5 * q * (q / m).ln());
        }
    }
    pairwise_sum(&terms).clamp(0.0, std::f64::consts::LN_2)
}

/// Fraction of sources that fail to parse or evaluate.
pub fn invalid_ratio<S: AsRef<str> + Sync>(sources: &[S]) -> Result<f64, MetricError> {
    if sources.is_empty() {
        return Err(MetricError::EmptyList);
    }
    let bad = sources
        .par_iter()
        .filter(|s| evaluate_source(s.as_ref()).is_err())
        .count();
    Ok(bad as f64 / sources.len() as f64)
}

/// Whether a prediction names both the right block and the right error type.
/// Two no-error verdicts agree whatever block they carry.
pub fn feedback_matches(pred: &FeedbackRecord, gold: &FeedbackRecord) -> bool {
    use crate::mutate::ErrorType;
    pred.error_type == gold.error_type
        && (gold.error_type == ErrorType::NoError || pred.block_id == gold.block_id)
}

pub fn feedback_accuracy(
    pred: &[FeedbackRecord],
    gold: &[FeedbackRecord],
) -> Result<f64, MetricError> {
    if pred.len() != gold.len() {
        return Err(MetricError::LengthMismatch(pred.len(), gold.len()));
    }
    if gold.is_empty() {
        return Err(MetricError::EmptyList);
    }
    let hits = pred
        .iter()
        .zip(gold)
        .filter(|(p, g)| feedback_matches(p, g))
        .count();
    Ok(hits as f64 / gold.len() as f64)
}

/// Lowercased whitespace tokens with punctuation removed.
pub fn rouge_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| {
            t.chars()
                .filter(|c| !c.is_ascii_punctuation())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L F1 over word tokens.
pub fn rouge_l(candidate: &str, reference: &str) -> f64 {
    let (c, r) = (rouge_tokens(candidate), rouge_tokens(reference));
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let lcs = lcs_len(&c, &r) as f64;
    if lcs == 0.0 {
        return 0.0;
    }
    let (p, rec) = (lcs / c.len() as f64, lcs / r.len() as f64);
    2.0 * p * rec / (p + rec)
}

/// Aggregate evaluation scores. Values are raw; [`MetricsReport::table`]
/// and [`MetricsReport::to_json`] apply the reporting scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub cd_mean: f64,
    pub mmd: f64,
    pub jsd: f64,
    pub ir: f64,
    pub feedback_acc: f64,
    pub rouge_l: f64,
    pub samples: usize,
    pub invalid: usize,
}

impl MetricsReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "cd_x1000": self.cd_mean * REPORT_SCALE,
            "mmd_x1000": self.mmd * REPORT_SCALE,
            "jsd_x1000": self.jsd * REPORT_SCALE,
            "ir": self.ir,
            "feedback_acc": self.feedback_acc,
            "rouge_l": self.rouge_l,
            "samples": self.samples,
            "invalid": self.invalid,
        })
    }

    pub fn table(&self) -> String {
        let rows = [
            ("Acc", self.feedback_acc),
            ("ROUGE-L", self.rouge_l),
            ("CD (x1e3)", self.cd_mean * REPORT_SCALE),
            ("MMD (x1e3)", self.mmd * REPORT_SCALE),
            ("JSD (x1e3)", self.jsd * REPORT_SCALE),
            ("IR", self.ir),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&format!("{k:<12}{v:>12.4}\n"));
        }
        out.push_str(&format!("{:<12}{:>12}\n", "samples", self.samples));
        out
    }
}
