//! Block segmentation: splits a program's top-level statements into
//! contiguous, ID'd blocks and reassembles programs from edited blocks.
//!
//! Traversal is top-down and stops at irreducible statements; a boolean
//! operation is one block regardless of how many children it has. A leading
//! run of assignments forms block 1. Assignments that appear later join the
//! block that follows them (or the preceding block when nothing follows).

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{call_kind, CallKind, Program, SourceSpan, Stmt, StmtKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BlockKind {
    MacroSet,
    ModuleDef,
    ControlFlow,
    BooleanOp,
    Primitive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub id: u32,
    pub kind: BlockKind,
    pub statements: Vec<Stmt>,
    pub span: SourceSpan,
}

impl Block {
    /// Statements that produce or define geometry (everything but assignments).
    pub fn geometry_statements(&self) -> impl Iterator<Item = &Stmt> {
        self.statements.iter().filter(|s| !s.is_assign())
    }

    /// Blocks that instantiate geometry at top level (not macros, not module
    /// definitions).
    pub fn is_geometry(&self) -> bool {
        !matches!(self.kind, BlockKind::MacroSet | BlockKind::ModuleDef)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockList {
    pub blocks: Vec<Block>,
    pub program: Program,
}

impl BlockList {
    pub fn get(&self, id: u32) -> Option<&Block> {
        self.blocks.iter().find(|b| b.id == id)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn max_id(&self) -> u32 {
        self.blocks.iter().map(|b| b.id).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentError {
    #[error("program has no statements")]
    EmptyProgram,
    #[error("unknown block id {0}")]
    UnknownBlockId(u32),
}

/// Kind of a geometry statement, decided by the end of its transform chain.
pub fn classify(stmt: &Stmt) -> BlockKind {
    match &stmt.kind {
        StmtKind::Assign { .. } => BlockKind::MacroSet,
        StmtKind::ModuleDef { .. } => BlockKind::ModuleDef,
        StmtKind::For { .. } | StmtKind::If { .. } => BlockKind::ControlFlow,
        StmtKind::Group { .. } => BlockKind::BooleanOp,
        StmtKind::Call(c) => match call_kind(&c.name) {
            CallKind::Boolean => BlockKind::BooleanOp,
            CallKind::Primitive | CallKind::User => BlockKind::Primitive,
            CallKind::Transform => c.child.as_deref().map_or(BlockKind::Primitive, classify),
        },
    }
}

pub fn segment(program: &Program) -> Result<BlockList, SegmentError> {
    let stmts = &program.statements;
    if stmts.is_empty() {
        return Err(SegmentError::EmptyProgram);
    }

    // (kind, statement index range)
    let mut groups: Vec<(BlockKind, usize, usize)> = Vec::new();
    let lead = stmts.iter().take_while(|s| s.is_assign()).count();
    if lead > 0 {
        groups.push((BlockKind::MacroSet, 0, lead));
    }
    let mut preamble_start: Option<usize> = None;
    for (i, s) in stmts.iter().enumerate().skip(lead) {
        if s.is_assign() {
            preamble_start.get_or_insert(i);
            continue;
        }
        let start = preamble_start.take().unwrap_or(i);
        groups.push((classify(s), start, i + 1));
    }
    if preamble_start.is_some() {
        // trailing assignments fold into the last block
        if let Some(last) = groups.last_mut() {
            last.2 = stmts.len();
        }
    }

    let blocks = groups
        .into_iter()
        .enumerate()
        .map(|(i, (kind, start, end))| {
            let span = stmts[start].span.join(stmts[end - 1].span);
            Block {
                id: i as u32 + 1,
                kind,
                statements: stmts[start..end].to_vec(),
                span,
            }
        })
        .collect();
    Ok(BlockList {
        blocks,
        program: program.clone(),
    })
}

/// Returns a copy of `program` whose statements carry block-ID annotations
/// matching [`segment`]. Any existing annotation, at any depth, is replaced.
pub fn annotate(program: &Program) -> Result<Program, SegmentError> {
    let blocks = segment(program)?;
    let mut out = program.clone();
    out.clear_block_ids();
    let mut idx = 0;
    for b in &blocks.blocks {
        out.statements[idx].block_id = Some(b.id);
        idx += b.statements.len();
    }
    out.source_text = crate::ast::print(&out);
    Ok(out)
}

/// Rebuilds a program with the statements of the named blocks replaced. An
/// empty replacement deletes the block. When the replaced block carried an
/// annotation, the first replacement statement inherits it.
pub fn splice(
    blocks: &BlockList,
    replace: &BTreeMap<u32, Vec<Stmt>>,
) -> Result<Program, SegmentError> {
    if let Some(bad) = replace.keys().find(|id| blocks.get(**id).is_none()) {
        return Err(SegmentError::UnknownBlockId(*bad));
    }
    let mut statements = Vec::new();
    for b in &blocks.blocks {
        match replace.get(&b.id) {
            None => statements.extend(b.statements.iter().cloned()),
            Some(new) => {
                let mut new = new.clone();
                let annotation = b.statements.first().and_then(|s| s.block_id);
                if let (Some(first), Some(id)) = (new.first_mut(), annotation) {
                    first.block_id = Some(id);
                }
                statements.extend(new);
            }
        }
    }
    let mut p = Program {
        statements,
        trailing_comments: blocks.program.trailing_comments.clone(),
        source_text: String::new(),
    };
    p.source_text = crate::ast::print(&p);
    Ok(p)
}
