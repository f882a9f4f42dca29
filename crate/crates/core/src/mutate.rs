//! Program mutations for the eight error categories.
//!
//! Every mutation edits exactly one block of the annotated program, must
//! compile, and must change the geometry measurably. Attempts are retried
//! with fresh random streams until an edit passes or the retry cap is hit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::ast::{
    call_kind, print, print_expr, print_stmts, round_literal, BinaryOp, CallKind, Expr, Program,
    Stmt, StmtKind, UnaryOp,
};
use crate::csg::{
    evaluate, sample_surface, CompileError, CsgNode, Normalization, PointCloud, SampleError, Vec3,
};
use crate::metrics::chamfer;
use crate::segment::{annotate, segment, splice, BlockKind, BlockList, SegmentError};

pub const MAX_ATTEMPTS: u64 = 20;
/// Minimum chamfer distance between normalized original and mutant clouds.
pub const DELTA_VIS: f64 = 1e-3;
/// Minimum mean distance of one shape's samples from the other's surface, in
/// normalized units. Catches edits that move sample points but not the
/// surface, such as spinning a sphere.
pub const SURFACE_DELTA: f64 = 1e-4;
pub const ROTATION_ANGLES: [f64; 7] = [30.0, 45.0, 60.0, 90.0, 120.0, 150.0, 180.0];
pub const SIZE_FACTORS: [f64; 4] = [0.4, 0.6, 1.6, 2.2];
pub const CONSTANT_FACTORS: [f64; 2] = [0.5, 2.0];
pub const OFFSET_RANGE: (f64, f64) = (0.2, 0.6);
const VIS_POINTS: usize = 2048;
/// Same-seed estimates at this point count vary by up to ~40% between seeds,
/// so a mutant must clear `VIS_MARGIN * DELTA_VIS` on every seed here.
const VIS_SEEDS: [u64; 3] = [0x5eed, 0x5eee, 0x5eef];
const VIS_MARGIN: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", try_from = "String")]
pub enum ErrorType {
    Primitive,
    Rotation,
    Position,
    Size,
    Constant,
    Logic,
    MissingBlock,
    RedundantBlock,
    NoError,
}

impl ErrorType {
    pub const ALL: [ErrorType; 9] = [
        ErrorType::Primitive,
        ErrorType::Rotation,
        ErrorType::Position,
        ErrorType::Size,
        ErrorType::Constant,
        ErrorType::Logic,
        ErrorType::MissingBlock,
        ErrorType::RedundantBlock,
        ErrorType::NoError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorType::Primitive => "primitive",
            ErrorType::Rotation => "rotation",
            ErrorType::Position => "position",
            ErrorType::Size => "size",
            ErrorType::Constant => "constant",
            ErrorType::Logic => "logic",
            ErrorType::MissingBlock => "missing_block",
            ErrorType::RedundantBlock => "redundant_block",
            ErrorType::NoError => "no_error",
        }
    }

    /// Human-readable name used in feedback text.
    pub fn words(self) -> &'static str {
        match self {
            ErrorType::MissingBlock => "missing block",
            ErrorType::RedundantBlock => "redundant block",
            ErrorType::NoError => "no error",
            other => other.as_str(),
        }
    }

    /// Accepts any spelling that reduces to a known name once case,
    /// whitespace, `-` and `_` are ignored ("Missing Block", "missing-block").
    pub fn parse_lenient(s: &str) -> Option<ErrorType> {
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        let key = key
            .strip_suffix("error")
            .filter(|k| !k.is_empty() && *k != "no")
            .unwrap_or(&key);
        ErrorType::ALL
            .into_iter()
            .find(|t| t.as_str().replace('_', "") == key)
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorType::parse_lenient(s).ok_or_else(|| format!("unknown error type `{s}`"))
    }
}

impl TryFrom<String> for ErrorType {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub error_type: ErrorType,
    /// 0 for `NoError`.
    pub block_id: u32,
    pub original_snippet: String,
    pub mutated_snippet: String,
    pub params: BTreeMap<String, Value>,
}

impl ErrorRecord {
    pub fn no_error() -> ErrorRecord {
        ErrorRecord {
            error_type: ErrorType::NoError,
            block_id: 0,
            original_snippet: String::new(),
            mutated_snippet: String::new(),
            params: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MutateError {
    #[error("no block eligible for a {0} error")]
    NotApplicable(ErrorType),
    #[error("no visible {0} edit found in {MAX_ATTEMPTS} attempts")]
    ExhaustedRetries(ErrorType),
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// How far a mutant's geometry is from the original's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visibility {
    pub chamfer: f64,
    pub surface: f64,
}

impl Visibility {
    pub fn is_visible(&self) -> bool {
        self.chamfer > VIS_MARGIN * DELTA_VIS && self.surface > SURFACE_DELTA
    }
}

/// The original geometry and its sampled surfaces, shared by all mutations
/// of one program.
pub struct Reference {
    pub node: CsgNode,
    /// Raw samples for the first of `VIS_SEEDS`.
    pub raw: PointCloud,
    /// One cloud per seed in `VIS_SEEDS`, all in `frame`.
    pub clouds: Vec<PointCloud>,
    pub frame: Normalization,
}

impl Reference {
    pub fn new(node: CsgNode) -> Result<Reference, SampleError> {
        let raw = sample_surface(&node, VIS_POINTS, VIS_SEEDS[0])?;
        let frame = crate::csg::normalize(&raw)?.normalization;
        let clouds = VIS_SEEDS
            .iter()
            .map(|s| Ok(sample_surface(&node, VIS_POINTS, *s)?.in_frame(&frame)))
            .collect::<Result<_, SampleError>>()?;
        Ok(Reference {
            node,
            raw,
            clouds,
            frame,
        })
    }

    /// `chamfer` is the smallest same-seed estimate over `VIS_SEEDS`.
    pub fn visibility(&self, other: &CsgNode) -> Result<Visibility, SampleError> {
        let mut cd = f64::INFINITY;
        let mut first = None;
        for (seed, reference) in VIS_SEEDS.iter().zip(&self.clouds) {
            let raw = sample_surface(other, VIS_POINTS, *seed)?;
            let d =
                chamfer(reference, &raw.in_frame(&self.frame)).expect("both clouds are non-empty");
            cd = cd.min(d);
            first.get_or_insert(raw);
            if cd <= VIS_MARGIN * DELTA_VIS {
                break;
            }
        }
        let raw = first.expect("at least one seed");
        let mean_abs = |node: &CsgNode, pts: &[[f64; 3]]| {
            pts.iter()
                .map(|p| node.pseudo_sdf(&Vec3::from(*p)).abs())
                .sum::<f64>()
                / pts.len() as f64
        };
        let surface = (mean_abs(other, &self.raw.points) + mean_abs(&self.node, &raw.points))
            * self.frame.scale;
        Ok(Visibility {
            chamfer: cd,
            surface,
        })
    }
}

/// An annotated program prepared for repeated mutation.
pub struct Mutator {
    pub program: Program,
    pub blocks: BlockList,
    pub reference: Reference,
    /// Longest edge of the program's bounding box; scales position offsets.
    edge: f64,
}

type Params = BTreeMap<String, Value>;

struct Site {
    block: usize,
    stmt: usize,
    node: usize,
}

impl Mutator {
    pub fn new(program: &Program) -> Result<Mutator, MutateError> {
        let program = annotate(program)?;
        let blocks = segment(&program)?;
        let node = evaluate(&program)?;
        let ext = node.bounds().extent();
        let edge = ext.x.max(ext.y).max(ext.z);
        let reference = Reference::new(node)?;
        Ok(Mutator {
            program,
            blocks,
            reference,
            edge,
        })
    }

    pub fn applicable_types(&self) -> BTreeSet<ErrorType> {
        ErrorType::ALL
            .into_iter()
            .filter(|t| self.applicable(*t))
            .collect()
    }

    fn applicable(&self, ty: ErrorType) -> bool {
        match ty {
            ErrorType::NoError => true,
            ErrorType::MissingBlock => {
                self.blocks.len() >= 2
                    && self
                        .blocks
                        .blocks
                        .iter()
                        .any(|b| b.kind != BlockKind::MacroSet)
            }
            ErrorType::RedundantBlock => self.blocks.blocks.iter().any(|b| b.is_geometry()),
            _ => !self.sites(ty).is_empty(),
        }
    }

    fn sites(&self, ty: ErrorType) -> Vec<Site> {
        let mut out = Vec::new();
        for (bi, block) in self.blocks.blocks.iter().enumerate() {
            let in_macros = block.kind == BlockKind::MacroSet;
            if in_macros != (ty == ErrorType::Constant) {
                continue;
            }
            for (si, stmt) in block.statements.iter().enumerate() {
                let mut k = 0;
                stmt.walk(&mut |s| {
                    if eligible(ty, s) {
                        out.push(Site {
                            block: bi,
                            stmt: si,
                            node: k,
                        });
                    }
                    k += 1;
                });
            }
        }
        out
    }

    pub fn mutate(&self, ty: ErrorType, seed: u64) -> Result<(Program, ErrorRecord), MutateError> {
        if ty == ErrorType::NoError {
            return Ok((self.program.clone(), ErrorRecord::no_error()));
        }
        if !self.applicable(ty) {
            return Err(MutateError::NotApplicable(ty));
        }
        let sites = self.sites(ty);
        for attempt in 0..MAX_ATTEMPTS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(attempt);
            let Some((mutant, record)) = self.attempt(ty, &sites, &mut rng) else {
                continue;
            };
            let Ok(node) = evaluate(&mutant) else {
                continue;
            };
            match self.reference.visibility(&node) {
                Ok(v) if v.is_visible() => return Ok((mutant, record)),
                _ => continue,
            }
        }
        Err(MutateError::ExhaustedRetries(ty))
    }

    fn attempt(
        &self,
        ty: ErrorType,
        sites: &[Site],
        rng: &mut ChaCha8Rng,
    ) -> Option<(Program, ErrorRecord)> {
        match ty {
            ErrorType::MissingBlock => {
                let candidates: Vec<_> = self
                    .blocks
                    .blocks
                    .iter()
                    .filter(|b| b.kind != BlockKind::MacroSet)
                    .collect();
                let block = *candidates.choose(rng)?;
                let mutant =
                    splice(&self.blocks, &BTreeMap::from([(block.id, Vec::new())])).ok()?;
                let params =
                    Params::from([("deleted_kind".into(), json!(format!("{:?}", block.kind)))]);
                Some((mutant, record(ty, block.id, &block.statements, &[], params)))
            }
            ErrorType::RedundantBlock => {
                let candidates: Vec<_> = self
                    .blocks
                    .blocks
                    .iter()
                    .filter(|b| b.kind != BlockKind::MacroSet)
                    .collect();
                let block = *candidates.choose(rng)?;
                let mut copies: Vec<Stmt> = block.geometry_statements().cloned().collect();
                for s in &mut copies {
                    s.walk_mut(&mut |st| {
                        st.block_id = None;
                        st.comments.clear();
                    });
                }
                let offset = self.offset(rng);
                let child = if copies.len() == 1 {
                    copies.pop()?
                } else {
                    Stmt::new(StmtKind::Group {
                        stmts: copies,
                        trailing_comments: Vec::new(),
                    })
                };
                let mut dup = Stmt::call("translate", vec![vector(&offset)], vec![], Some(child));
                let id = self.blocks.max_id() + 1;
                dup.block_id = Some(id);
                let mut mutant = self.program.clone();
                mutant.statements.push(dup.clone());
                mutant.source_text = print(&mutant);
                let params = Params::from([
                    ("source_block".into(), json!(block.id)),
                    ("offset".into(), json!(offset)),
                ]);
                Some((mutant, record(ty, id, &[], &[dup], params)))
            }
            _ => {
                let site = sites.choose(rng)?;
                let block = &self.blocks.blocks[site.block];
                let mut stmts = block.statements.clone();
                let node = stmts[site.stmt].nth_mut(site.node)?;
                let params = match ty {
                    ErrorType::Primitive => edit_primitive(node, rng),
                    ErrorType::Rotation => edit_rotation(node, rng),
                    ErrorType::Position => {
                        let offset = self.offset(rng);
                        edit_position(node, &offset)
                    }
                    ErrorType::Size => edit_size(node, rng),
                    ErrorType::Constant => edit_constant(node, rng),
                    ErrorType::Logic => edit_logic(node, rng),
                    _ => unreachable!("handled above"),
                }?;
                let mutant =
                    splice(&self.blocks, &BTreeMap::from([(block.id, stmts.clone())])).ok()?;
                Some((
                    mutant,
                    record(ty, block.id, &block.statements, &stmts, params),
                ))
            }
        }
    }

    /// Each component is +/- U[0.2, 0.6] times the longest bbox edge.
    fn offset(&self, rng: &mut ChaCha8Rng) -> [f64; 3] {
        let mut out = [0.0; 3];
        for o in &mut out {
            let mag = rng.gen_range(OFFSET_RANGE.0..=OFFSET_RANGE.1) * self.edge;
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            *o = round2(sign * mag);
        }
        out
    }
}

/// Annotates `program` and applies one mutation of type `ty`.
pub fn mutate(
    program: &Program,
    ty: ErrorType,
    seed: u64,
) -> Result<(Program, ErrorRecord), MutateError> {
    Mutator::new(program)?.mutate(ty, seed)
}

/// Error types with at least one eligible site; always includes `NoError`.
pub fn applicable_types(program: &Program) -> Result<BTreeSet<ErrorType>, MutateError> {
    Ok(Mutator::new(program)?.applicable_types())
}

fn record(
    ty: ErrorType,
    block_id: u32,
    before: &[Stmt],
    after: &[Stmt],
    params: Params,
) -> ErrorRecord {
    ErrorRecord {
        error_type: ty,
        block_id,
        original_snippet: print_stmts(before),
        mutated_snippet: print_stmts(after),
        params,
    }
}

fn round2(v: f64) -> f64 {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        round_literal(v)
    } else {
        r
    }
}

fn vector(v: &[f64; 3]) -> Expr {
    Expr::Vector(v.iter().map(|x| Expr::Number(*x)).collect())
}

fn call_of(s: &Stmt) -> Option<(&str, CallKind)> {
    s.as_call().map(|c| (c.name.as_str(), call_kind(&c.name)))
}

fn is_terminal(s: &Stmt) -> bool {
    matches!(
        call_of(s),
        Some((_, CallKind::Primitive | CallKind::Boolean | CallKind::User))
    )
}

fn nonzero(e: &Expr) -> bool {
    e.as_number() != Some(0.0)
}

fn eligible(ty: ErrorType, s: &Stmt) -> bool {
    match ty {
        ErrorType::Primitive => primitive_extent(s).is_some(),
        ErrorType::Rotation => is_terminal(s) || rotate_literal(s).is_some(),
        ErrorType::Position => is_terminal(s) || matches!(call_of(s), Some(("translate", _))),
        ErrorType::Size => !size_args(s).is_empty(),
        ErrorType::Constant => match &s.kind {
            StmtKind::Assign { value, .. } => constant_target(value),
            _ => false,
        },
        ErrorType::Logic => match &s.kind {
            StmtKind::For { iter, .. } => match iter {
                Expr::Range { .. } => true,
                Expr::Vector(items) => items.len() >= 2,
                _ => false,
            },
            StmtKind::If { .. } => true,
            _ => false,
        },
        ErrorType::MissingBlock | ErrorType::RedundantBlock | ErrorType::NoError => false,
    }
}

/// Moves `s` under a new transform call, keeping the annotation and comments
/// on the outermost statement.
fn wrap(s: &mut Stmt, name: &str, arg: Expr) {
    let span = s.span;
    let block_id = s.block_id.take();
    let comments = std::mem::take(&mut s.comments);
    let inner = std::mem::replace(
        s,
        Stmt::new(StmtKind::Group {
            stmts: vec![],
            trailing_comments: vec![],
        }),
    );
    *s = Stmt::call(name, vec![arg], vec![], Some(inner));
    s.span = span;
    s.block_id = block_id;
    s.comments = comments;
}

fn half(e: &Expr) -> Expr {
    e.scaled(0.5)
}

fn double(e: &Expr) -> Expr {
    e.scaled(2.0)
}

enum Extent {
    /// Cube: per-axis side lengths (a single expression when uniform).
    Box {
        sides: Vec<Expr>,
        center: Option<Expr>,
    },
    Ball {
        radius: Expr,
    },
    Can {
        height: Expr,
        radius: Expr,
        center: Option<Expr>,
    },
}

fn primitive_extent(s: &Stmt) -> Option<Extent> {
    let c = s.as_call()?;
    let center = c.arg("center", Some(1)).cloned();
    match c.name.as_str() {
        "cube" => {
            let size = c.arg("size", Some(0)).cloned().unwrap_or(Expr::Number(1.0));
            let sides = match size {
                Expr::Vector(items) if items.len() == 3 => items,
                Expr::Vector(_) => return None,
                scalar => vec![scalar],
            };
            Some(Extent::Box { sides, center })
        }
        "sphere" => {
            let radius = match (c.arg("d", None), c.arg("r", Some(0))) {
                (Some(d), _) => half(d),
                (None, Some(r)) => r.clone(),
                (None, None) => Expr::Number(1.0),
            };
            Some(Extent::Ball { radius })
        }
        "cylinder" => {
            let height = c.arg("h", Some(0)).cloned().unwrap_or(Expr::Number(1.0));
            let radius = [("d", None), ("d1", None)]
                .iter()
                .find_map(|(n, p)| c.arg(n, *p).map(half))
                .or_else(|| {
                    [("r", None), ("r1", Some(1)), ("r2", Some(2))]
                        .iter()
                        .filter_map(|(n, p)| c.arg(n, *p))
                        .find(|e| nonzero(e))
                        .cloned()
                })
                .unwrap_or(Expr::Number(1.0));
            let center = c.arg("center", Some(3)).cloned();
            Some(Extent::Can {
                height,
                radius,
                center,
            })
        }
        _ => None,
    }
}

/// The largest side when all are literals; otherwise the first side, which
/// keeps any variable reference intact.
fn literal_max(items: &[Expr]) -> Option<Expr> {
    let vals: Option<Vec<f64>> = items.iter().map(Expr::as_number).collect();
    match vals {
        Some(v) => Some(Expr::Number(
            v.into_iter().fold(f64::NEG_INFINITY, f64::max),
        )),
        None => items.first().cloned(),
    }
}

fn with_center(
    mut named: Vec<(&'static str, Expr)>,
    center: Option<Expr>,
) -> Vec<(&'static str, Expr)> {
    if let Some(c) = center {
        named.push(("center", c));
    }
    named
}

fn edit_primitive(s: &mut Stmt, rng: &mut ChaCha8Rng) -> Option<Params> {
    let extent = primitive_extent(s)?;
    let from = s.as_call()?.name.clone();
    let targets: Vec<&str> = ["cube", "sphere", "cylinder"]
        .into_iter()
        .filter(|t| *t != from)
        .collect();
    let to = *targets.choose(rng)?;
    let (args, named): (Vec<Expr>, Vec<(&str, Expr)>) = match (extent, to) {
        (Extent::Box { sides, .. }, "sphere") => {
            let side = if sides.len() == 1 {
                sides[0].clone()
            } else {
                literal_max(&sides)?
            };
            (vec![], vec![("r", half(&side))])
        }
        (Extent::Box { sides, center }, _) => {
            let (h, w) = if sides.len() == 1 {
                (sides[0].clone(), sides[0].clone())
            } else {
                (sides[2].clone(), literal_max(&sides[..2])?)
            };
            (vec![], with_center(vec![("h", h), ("r", half(&w))], center))
        }
        (Extent::Ball { radius }, "cube") => (
            vec![],
            vec![("size", double(&radius)), ("center", Expr::Bool(true))],
        ),
        (Extent::Ball { radius }, _) => (
            vec![],
            vec![
                ("h", double(&radius)),
                ("r", radius),
                ("center", Expr::Bool(true)),
            ],
        ),
        (
            Extent::Can {
                height,
                radius,
                center,
            },
            "cube",
        ) => {
            let d = double(&radius);
            (
                vec![],
                with_center(
                    vec![("size", Expr::Vector(vec![d.clone(), d, height]))],
                    center,
                ),
            )
        }
        (Extent::Can { radius, .. }, _) => (vec![], vec![("r", radius)]),
    };
    let call = Stmt::call(to, args, named, None);
    s.kind = call.kind;
    Some(Params::from([
        ("from".into(), json!(from)),
        ("to".into(), json!(to)),
    ]))
}

/// A rotate call whose angle is a number literal or a 3-vector of literals.
fn rotate_literal(s: &Stmt) -> Option<Vec<f64>> {
    let c = s.as_call()?;
    if c.name != "rotate" || c.arg("v", Some(1)).is_some() {
        return None;
    }
    match c.arg("a", Some(0))? {
        Expr::Number(v) => Some(vec![*v]),
        e => e.as_number_vector().filter(|v| v.len() == 3),
    }
}

fn norm_angle(a: f64) -> f64 {
    round_literal(a.rem_euclid(360.0))
}

fn edit_rotation(s: &mut Stmt, rng: &mut ChaCha8Rng) -> Option<Params> {
    let delta = *ROTATION_ANGLES.choose(rng)? * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let axis = rng.gen_range(0..3usize);
    let (axis, before, inserted) = match rotate_literal(s) {
        Some(v) if v.len() == 1 => {
            let c = match &mut s.kind {
                StmtKind::Call(c) => c,
                _ => return None,
            };
            *c.arg_mut("a", Some(0))? = Expr::Number(round_literal(v[0] + delta));
            (2, v[0], false)
        }
        Some(v) => {
            let c = match &mut s.kind {
                StmtKind::Call(c) => c,
                _ => return None,
            };
            let mut nv = v.clone();
            nv[axis] = round_literal(nv[axis] + delta);
            *c.arg_mut("a", Some(0))? = vector(&[nv[0], nv[1], nv[2]]);
            (axis, v[axis], false)
        }
        None => {
            let mut nv = [0.0; 3];
            nv[axis] = delta;
            wrap(s, "rotate", vector(&nv));
            (axis, 0.0, true)
        }
    };
    Some(Params::from([
        ("axis".into(), json!(["x", "y", "z"][axis])),
        ("original_angle".into(), json!(norm_angle(before))),
        ("mutated_angle".into(), json!(norm_angle(before + delta))),
        ("delta".into(), json!(delta)),
        ("inserted".into(), json!(inserted)),
    ]))
}

fn edit_position(s: &mut Stmt, offset: &[f64; 3]) -> Option<Params> {
    let existing = matches!(call_of(s), Some(("translate", _)));
    if existing {
        let StmtKind::Call(c) = &mut s.kind else {
            return None;
        };
        let arg = c.arg_mut("v", Some(0))?;
        let before = print_expr(arg);
        *arg = match std::mem::replace(arg, Expr::Bool(false)) {
            Expr::Vector(items) if items.len() == 3 => Expr::Vector(
                items
                    .into_iter()
                    .zip(offset)
                    .map(|(e, d)| match e {
                        Expr::Number(v) => Expr::Number(round2(v + d)),
                        other => Expr::binary(BinaryOp::Add, other, Expr::Number(*d)),
                    })
                    .collect(),
            ),
            other => Expr::binary(BinaryOp::Add, other, vector(offset)),
        };
        let after = print_expr(arg);
        return Some(Params::from([
            ("offset".into(), json!(offset)),
            ("original".into(), json!(before)),
            ("mutated".into(), json!(after)),
            ("inserted".into(), json!(false)),
        ]));
    }
    wrap(s, "translate", vector(offset));
    Some(Params::from([
        ("offset".into(), json!(offset)),
        ("inserted".into(), json!(true)),
    ]))
}

/// (argument name, positional slot, vector component) triples eligible for
/// scaling.
fn size_args(s: &Stmt) -> Vec<(&'static str, Option<usize>, Option<usize>)> {
    let Some(c) = s.as_call() else { return vec![] };
    let names: &[(&'static str, Option<usize>)] = match c.name.as_str() {
        "cube" => &[("size", Some(0))],
        "sphere" => &[("r", Some(0)), ("d", None)],
        "cylinder" => &[
            ("h", Some(0)),
            ("r", None),
            ("r1", Some(1)),
            ("r2", Some(2)),
            ("d", None),
            ("d1", None),
            ("d2", None),
        ],
        _ => return vec![],
    };
    let mut out = Vec::new();
    for (n, p) in names {
        match c.arg(n, *p) {
            Some(Expr::Vector(items)) => {
                for (k, it) in items.iter().enumerate() {
                    if nonzero(it) {
                        out.push((*n, *p, Some(k)));
                    }
                }
            }
            Some(e) if nonzero(e) => out.push((*n, *p, None)),
            _ => {}
        }
    }
    out
}

fn edit_size(s: &mut Stmt, rng: &mut ChaCha8Rng) -> Option<Params> {
    let (name, pos, component) = *size_args(s).choose(rng)?;
    let factor = *SIZE_FACTORS.choose(rng)?;
    let StmtKind::Call(c) = &mut s.kind else {
        return None;
    };
    let arg = c.arg_mut(name, pos)?;
    let target = match (arg, component) {
        (Expr::Vector(items), Some(k)) => items.get_mut(k)?,
        (e, _) => e,
    };
    let before = print_expr(target);
    *target = target.scaled(factor);
    Some(Params::from([
        ("argument".into(), json!(name)),
        ("component".into(), json!(component)),
        ("factor".into(), json!(factor)),
        ("original".into(), json!(before)),
        ("mutated".into(), json!(print_expr(target))),
    ]))
}

fn constant_target(e: &Expr) -> bool {
    match e {
        Expr::Number(v) => *v != 0.0,
        Expr::Bool(_) => true,
        Expr::Vector(items) => items
            .iter()
            .any(|i| matches!(i, Expr::Number(v) if *v != 0.0)),
        Expr::Range { .. } => false,
        _ => true,
    }
}

fn edit_constant(s: &mut Stmt, rng: &mut ChaCha8Rng) -> Option<Params> {
    let StmtKind::Assign { name, value } = &mut s.kind else {
        return None;
    };
    let before = print_expr(value);
    let factor = *CONSTANT_FACTORS.choose(rng)?;
    match &mut *value {
        Expr::Bool(b) => *b = !*b,
        Expr::Vector(items) => {
            let idx: Vec<usize> = (0..items.len())
                .filter(|k| matches!(items[*k], Expr::Number(v) if v != 0.0))
                .collect();
            let k = *idx.choose(rng)?;
            items[k] = items[k].scaled(factor);
        }
        other => *other = other.scaled(factor),
    }
    Some(Params::from([
        ("name".into(), json!(name)),
        ("original".into(), json!(before)),
        ("mutated".into(), json!(print_expr(value))),
    ]))
}

fn shifted(e: &Expr, by: f64) -> Expr {
    match e {
        Expr::Number(v) => Expr::Number(v + by),
        other if by >= 0.0 => Expr::binary(BinaryOp::Add, other.clone(), Expr::Number(by)),
        other => Expr::binary(BinaryOp::Sub, other.clone(), Expr::Number(-by)),
    }
}

fn edit_logic(s: &mut Stmt, rng: &mut ChaCha8Rng) -> Option<Params> {
    match &mut s.kind {
        StmtKind::For { iter, .. } => {
            let before = print_expr(iter);
            let change = match iter {
                Expr::Range { start, step, end } => {
                    let k = f64::from(rng.gen_range(1..=3u8));
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    match rng.gen_range(0..3u8) {
                        0 => {
                            **start = shifted(start, sign * k);
                            "start"
                        }
                        1 => {
                            **end = shifted(end, sign * k);
                            "end"
                        }
                        _ => {
                            *step = Some(Box::new(match step.as_deref() {
                                Some(Expr::Number(v)) if v + sign * k > 0.0 => {
                                    Expr::Number(v + sign * k)
                                }
                                Some(e) => shifted(e, k),
                                None => Expr::Number(1.0 + k),
                            }));
                            "step"
                        }
                    }
                }
                Expr::Vector(items) if items.len() >= 2 => {
                    let k = rng.gen_range(0..items.len());
                    items.remove(k);
                    "element"
                }
                _ => return None,
            };
            Some(Params::from([
                ("construct".into(), json!("for")),
                ("change".into(), json!(change)),
                ("original".into(), json!(before)),
                ("mutated".into(), json!(print_expr(iter))),
            ]))
        }
        StmtKind::If { cond, .. } => {
            let before = print_expr(cond);
            *cond = match std::mem::replace(cond, Expr::Bool(false)) {
                Expr::Unary(UnaryOp::Not, inner) => *inner,
                other => Expr::Unary(UnaryOp::Not, Box::new(other)),
            };
            Some(Params::from([
                ("construct".into(), json!("if")),
                ("change".into(), json!("negated")),
                ("original".into(), json!(before)),
                ("mutated".into(), json!(print_expr(cond))),
            ]))
        }
        _ => None,
    }
}
