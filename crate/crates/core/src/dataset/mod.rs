//! Review dataset construction: synthetic sources expanded into
//! (correct program, erroneous program, views, feedback) samples.

mod eval;
mod synth;

pub use eval::{gold_predictions, run_eval, EvalError, EvalOptions};
pub use synth::{generate_synthetic_program, MAX_COMPLEXITY, MIN_COMPLEXITY};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ast::{print, Program};
use crate::csg::{evaluate, Aabb, CompileError};
use crate::io::{read_pgm, write_pgm8, FormatError};
use crate::mutate::{ErrorRecord, ErrorType, MutateError, Mutator};
use crate::render::{render, sample_views, Camera, Raster, ViewSet};
use crate::review::{predefined_correct_feedback, FeedbackRecord};

pub const DEFAULT_RENDER_SIZE: u32 = 128;
pub const DEFAULT_SOURCES: usize = 100;
pub const DEFAULT_FRACTIONS: [f64; 3] = [0.8, 0.1, 0.1];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("split fractions must be non-negative and sum to 1, got {0:?}")]
    InvalidFractions([f64; 3]),
    #[error(transparent)]
    Mutate(#[from] MutateError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

pub fn check_fractions(f: [f64; 3]) -> Result<(), DatasetError> {
    if f.iter().any(|x| !(*x >= 0.0)) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(DatasetError::InvalidFractions(f));
    }
    Ok(())
}

/// Mixes a base seed with a path of indices (splitmix64 finalizer per step).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut x = base;
    for p in path {
        x = x.wrapping_add(p.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^= x >> 31;
    }
    x
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub n_sources: usize,
    pub seed: u64,
    pub fractions: [f64; 3],
    pub render_size: u32,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            n_sources: DEFAULT_SOURCES,
            seed: 0,
            fractions: DEFAULT_FRACTIONS,
            render_size: DEFAULT_RENDER_SIZE,
        }
    }
}

/// The per-sample `record.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub source_id: String,
    pub split: Split,
    pub error: ErrorRecord,
    pub views: ViewSet,
    pub rendered_camera: Camera,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub record: SampleRecord,
    pub correct_program: String,
    pub erroneous_program: String,
    pub feedback: FeedbackRecord,
    /// Views of the correct program from `record.views`.
    pub reference_views: Vec<Raster>,
    /// The erroneous program seen from `record.rendered_camera`.
    pub rendered_view: Raster,
}

impl Sample {
    pub fn id(&self) -> &str {
        &self.record.id
    }
}

fn anomaly(ty: ErrorType) -> &'static str {
    match ty {
        ErrorType::Primitive => {
            "A part of the model has a different basic shape than in the reference views."
        }
        ErrorType::Rotation => {
            "A part of the model is turned away from the orientation shown in the reference views."
        }
        ErrorType::Position => {
            "A part of the model is displaced from where the reference views place it."
        }
        ErrorType::Size => "A part of the model is sized differently from the reference views.",
        ErrorType::Constant => {
            "Dimensions derived from a shared value disagree with the reference views."
        }
        ErrorType::Logic => "A repeated or conditional feature differs from the reference views.",
        ErrorType::MissingBlock => {
            "A part visible in the reference views is absent from the model."
        }
        ErrorType::RedundantBlock => {
            "The model contains an extra part that the reference views do not show."
        }
        ErrorType::NoError => "",
    }
}

/// Review text for an injected error: the visual symptom, then the block
/// and the error type.
pub fn error_feedback(record: &ErrorRecord) -> String {
    format!(
        "{} The cause is in Block {}, which has a {} error.",
        anomaly(record.error_type),
        record.block_id,
        record.error_type.words()
    )
}

/// A source program prepared once and expanded into many samples.
pub struct SourceContext {
    pub source_id: String,
    pub split: Split,
    pub mutator: Mutator,
    pub views: ViewSet,
    pub reference_views: Vec<Raster>,
    bounds: Aabb,
    render_size: u32,
}

impl SourceContext {
    pub fn new(
        source_id: &str,
        split: Split,
        program: &Program,
        view_seed: u64,
        render_size: u32,
    ) -> Result<SourceContext, DatasetError> {
        let mutator = Mutator::new(program)?;
        let node = &mutator.reference.node;
        let bounds = node.bounds();
        let views = sample_views(view_seed, &bounds, render_size);
        let reference_views = views.cameras.iter().map(|c| render(node, c)).collect();
        Ok(SourceContext {
            source_id: source_id.to_string(),
            split,
            mutator,
            views,
            reference_views,
            bounds,
            render_size,
        })
    }

    pub fn sample_id(&self, ty: ErrorType) -> String {
        format!("{}_{}", self.source_id, ty.as_str())
    }

    pub fn sample(&self, ty: ErrorType, seed: u64) -> Result<Sample, DatasetError> {
        let (mutant, error) = self.mutator.mutate(ty, seed)?;
        let id = self.sample_id(ty);
        let description = if ty == ErrorType::NoError {
            predefined_correct_feedback(seed).to_string()
        } else {
            error_feedback(&error)
        };
        let node = evaluate(&mutant)?;
        // frame both shapes, so a part moved or added outside the original
        // bounds stays in view
        let frame = self.bounds.union(&node.bounds());
        let rendered_camera = Camera::orbit(
            &frame,
            self.views.azimuths[0],
            self.views.elevations[0],
            self.render_size,
        );
        let rendered_view = render(&node, &rendered_camera);
        Ok(Sample {
            feedback: FeedbackRecord {
                sample_id: id.clone(),
                error_type: ty,
                block_id: error.block_id,
                description,
            },
            record: SampleRecord {
                id,
                source_id: self.source_id.clone(),
                split: self.split,
                error,
                views: self.views.clone(),
                rendered_camera,
            },
            correct_program: print(&self.mutator.program),
            erroneous_program: print(&mutant),
            reference_views: self.reference_views.clone(),
            rendered_view,
        })
    }
}

/// One sample from a standalone source.
pub fn build_sample(source: &Program, ty: ErrorType, seed: u64) -> Result<Sample, DatasetError> {
    SourceContext::new("source", Split::Train, source, seed, DEFAULT_RENDER_SIZE)?.sample(ty, seed)
}

/// Pretty JSON with object keys in sorted order.
pub fn to_sorted_json<T: Serialize>(value: &T) -> String {
    // serde_json's Value map is ordered by key
    let v = serde_json::to_value(value).expect("serializable data");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable data");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn pgm_bytes(r: &Raster) -> Vec<u8> {
    let mut out = Vec::new();
    write_pgm8(&mut out, r.width, r.height, &r.silhouette_bytes()).expect("in-memory write");
    out
}

pub fn read_silhouette(path: &Path) -> Result<Raster, DatasetError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let pgm = read_pgm(bytes.as_slice())?;
    let px: Vec<u8> = pgm
        .pixels
        .iter()
        .map(|p| if *p == 0 { 0 } else { 255 })
        .collect();
    Ok(Raster::from_silhouette_bytes(pgm.width, pgm.height, &px))
}

/// Writes the sample's files under `dir` and returns (relative path, sha256)
/// for each.
pub fn write_sample(dir: &Path, sample: &Sample) -> Result<BTreeMap<String, String>, DatasetError> {
    let mut files: Vec<(String, Vec<u8>)> = vec![
        (
            "correct.scad".into(),
            sample.correct_program.clone().into_bytes(),
        ),
        (
            "erroneous.scad".into(),
            sample.erroneous_program.clone().into_bytes(),
        ),
        (
            "record.json".into(),
            to_sorted_json(&sample.record).into_bytes(),
        ),
        (
            "feedback.json".into(),
            to_sorted_json(&sample.feedback).into_bytes(),
        ),
    ];
    for (i, v) in sample.reference_views.iter().enumerate() {
        files.push((format!("views/ref_{i}.pgm"), pgm_bytes(v)));
    }
    files.push((
        "views/rendered.pgm".into(),
        pgm_bytes(&sample.rendered_view),
    ));

    let views = dir.join("views");
    fs::create_dir_all(&views).map_err(io_err(&views))?;
    let mut digests = BTreeMap::new();
    for (name, bytes) in files {
        let path = dir.join(&name);
        fs::write(&path, &bytes).map_err(io_err(&path))?;
        digests.insert(name, sha256_hex(&bytes));
    }
    Ok(digests)
}

/// A sample read back from its directory.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredSample {
    pub record: SampleRecord,
    pub feedback: FeedbackRecord,
    pub correct_program: String,
    pub erroneous_program: String,
    pub reference_views: Vec<Raster>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, DatasetError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| DatasetError::Corrupt {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

impl StoredSample {
    pub fn load(dir: &Path) -> Result<StoredSample, DatasetError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(io_err(&path))
        };
        let record: SampleRecord = read_json(&dir.join("record.json"))?;
        let reference_views = (0..record.views.cameras.len())
            .map(|i| read_silhouette(&dir.join(format!("views/ref_{i}.pgm"))))
            .collect::<Result<_, _>>()?;
        Ok(StoredSample {
            feedback: read_json(&dir.join("feedback.json"))?,
            correct_program: read("correct.scad")?,
            erroneous_program: read("erroneous.scad")?,
            reference_views,
            record,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceEntry {
    pub id: String,
    pub complexity: u8,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub source_id: String,
    pub split: Split,
    pub error_type: ErrorType,
    pub block_id: u32,
    /// Directory relative to the dataset root.
    pub path: String,
    /// File name to sha256.
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedEntry {
    pub source_id: String,
    pub error_type: ErrorType,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub config: DatasetConfig,
    pub sources: Vec<SourceEntry>,
    pub samples: Vec<ManifestEntry>,
    pub skipped: Vec<SkippedEntry>,
    pub split_counts: BTreeMap<Split, usize>,
    pub error_histogram: BTreeMap<ErrorType, usize>,
}

impl DatasetManifest {
    pub fn to_json(&self) -> String {
        to_sorted_json(self)
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.to_json().as_bytes())
    }

    pub fn load(root: &Path) -> Result<DatasetManifest, DatasetError> {
        read_json(&root.join("manifest.json"))
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.samples.iter().filter(move |s| s.split == split)
    }
}

/// Assigns whole sources to splits: a seeded shuffle, then contiguous runs
/// sized by the fractions (rounded; the test split takes the remainder).
pub fn assign_splits(n: usize, fractions: [f64; 3], seed: u64) -> Vec<Split> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1])));
    let n_train = ((n as f64 * fractions[0]).round() as usize).min(n);
    let n_val = ((n as f64 * fractions[1]).round() as usize).min(n - n_train);
    let mut out = vec![Split::Test; n];
    for (rank, &src) in order.iter().enumerate() {
        out[src] = if rank < n_train {
            Split::Train
        } else if rank < n_train + n_val {
            Split::Val
        } else {
            Split::Test
        };
    }
    out
}

pub fn source_complexity(seed: u64, index: usize) -> u8 {
    MIN_COMPLEXITY + (derive_seed(seed, &[2, index as u64]) % u64::from(MAX_COMPLEXITY)) as u8
}

struct SourceOutcome {
    source: SourceEntry,
    samples: Vec<ManifestEntry>,
    skipped: Vec<SkippedEntry>,
}

fn expand_source(
    root: &Path,
    cfg: &DatasetConfig,
    index: usize,
    split: Split,
) -> Result<SourceOutcome, DatasetError> {
    let id = format!("src{index:04}");
    let complexity = source_complexity(cfg.seed, index);
    let program = generate_synthetic_program(derive_seed(cfg.seed, &[3, index as u64]), complexity);
    let ctx = SourceContext::new(
        &id,
        split,
        &program,
        derive_seed(cfg.seed, &[4, index as u64]),
        cfg.render_size,
    )?;
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for ty in ctx.mutator.applicable_types() {
        let seed = derive_seed(cfg.seed, &[5, index as u64, ty as u64]);
        match ctx.sample(ty, seed) {
            Ok(sample) => {
                let rel = format!("{}/{}", split.as_str(), sample.id());
                let files = write_sample(&root.join(&rel), &sample)?;
                samples.push(ManifestEntry {
                    id: sample.record.id.clone(),
                    source_id: id.clone(),
                    split,
                    error_type: ty,
                    block_id: sample.record.error.block_id,
                    path: rel,
                    files,
                });
            }
            Err(DatasetError::Mutate(e)) => skipped.push(SkippedEntry {
                source_id: id.clone(),
                error_type: ty,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(SourceOutcome {
        source: SourceEntry {
            id,
            complexity,
            split,
        },
        samples,
        skipped,
    })
}

/// Generates `cfg.n_sources` sources, expands each into one sample per
/// applicable error type (plus a no-error sample), and writes everything
/// under `root`. Returns the manifest after writing `manifest.json` and
/// `test_gold.jsonl` (oracle predictions for the test split).
pub fn build_dataset(root: &Path, cfg: &DatasetConfig) -> Result<DatasetManifest, DatasetError> {
    check_fractions(cfg.fractions)?;
    let splits = assign_splits(cfg.n_sources, cfg.fractions, cfg.seed);
    let outcomes: Vec<SourceOutcome> = (0..cfg.n_sources)
        .into_par_iter()
        .map(|i| expand_source(root, cfg, i, splits[i]))
        .collect::<Result<_, _>>()?;

    let mut manifest = DatasetManifest {
        config: cfg.clone(),
        sources: Vec::new(),
        samples: Vec::new(),
        skipped: Vec::new(),
        split_counts: Split::ALL.iter().map(|s| (*s, 0)).collect(),
        error_histogram: BTreeMap::new(),
    };
    for o in outcomes {
        for s in &o.samples {
            *manifest.split_counts.entry(s.split).or_default() += 1;
            *manifest.error_histogram.entry(s.error_type).or_default() += 1;
        }
        manifest.sources.push(o.source);
        manifest.samples.extend(o.samples);
        manifest.skipped.extend(o.skipped);
    }

    let path = root.join("manifest.json");
    fs::write(&path, manifest.to_json()).map_err(io_err(&path))?;
    let gold = gold_predictions(root, &manifest, Split::Test)?;
    let path = root.join("test_gold.jsonl");
    fs::write(&path, gold).map_err(io_err(&path))?;
    Ok(manifest)
}
