//! Integer quantization of spatial literals against the program's bounding box.

use serde::{Deserialize, Serialize};

use super::eval::{evaluate, CompileError};
use crate::ast::{Expr, Program, StmtKind};

/// Per-axis value range used to map coordinates to `0..=2^bits`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizeFrame {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub bits: u32,
}

impl QuantizeFrame {
    pub fn levels(&self) -> u32 {
        1 << self.bits
    }
}

/// `round((v - lo) / (hi - lo) * 2^bits)`, clamped to `0..=2^bits`. A
/// collapsed range maps everything to 0.
pub fn quantize_value(v: f64, lo: f64, hi: f64, bits: u32) -> u32 {
    let levels = f64::from(1u32 << bits);
    if !(hi > lo) {
        return 0;
    }
    ((v - lo) / (hi - lo) * levels).round().clamp(0.0, levels) as u32
}

pub fn dequantize_value(q: u32, lo: f64, hi: f64, bits: u32) -> f64 {
    lo + f64::from(q) / f64::from(1u32 << bits) * (hi - lo)
}

/// Replaces every numeric literal component of a `translate` vector with its
/// quantized level on that axis. Angles, sizes, loop bounds and conditions
/// are left alone, as are computed (non-literal) offsets.
pub fn quantize(program: &Program, bits: u32) -> Result<(Program, QuantizeFrame), CompileError> {
    assert!((1..=24).contains(&bits), "bits must be in 1..=24");
    let bounds = evaluate(program)?.bounds();
    let frame = QuantizeFrame {
        lo: bounds.min,
        hi: bounds.max,
        bits,
    };
    let mut out = program.clone();
    for s in &mut out.statements {
        s.walk_mut(&mut |st| {
            let StmtKind::Call(call) = &mut st.kind else {
                return;
            };
            if call.name != "translate" {
                return;
            }
            if let Some(Expr::Vector(items)) = call.arg_mut("v", Some(0)) {
                for (axis, item) in items.iter_mut().enumerate().take(3) {
                    if let Expr::Number(v) = item {
                        let q = quantize_value(*v, frame.lo[axis], frame.hi[axis], bits);
                        *item = Expr::Number(f64::from(q));
                    }
                }
            }
        });
    }
    out.source_text = crate::ast::print(&out);
    Ok((out, frame))
}
