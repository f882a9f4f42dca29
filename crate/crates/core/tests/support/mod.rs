//! Independent reference implementations used as test oracles. Nothing here
//! calls into the engine it checks: membership is decided straight from the
//! syntax tree, and distances by exhaustive scans.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use scad_review::ast::{BinaryOp, Call, Expr, Param, Program, Stmt, StmtKind, UnaryOp};

// ---------------------------------------------------------------------------
// membership

#[derive(Debug, Clone)]
enum V {
    N(f64),
    B(bool),
    L(Vec<V>),
    R(f64, f64, f64),
}

impl V {
    fn num(&self) -> f64 {
        match self {
            V::N(x) => *x,
            other => panic!("oracle expected a number, got {other:?}"),
        }
    }

    fn vec3(&self) -> [f64; 3] {
        match self {
            V::L(items) if items.len() == 3 => [items[0].num(), items[1].num(), items[2].num()],
            V::N(x) => [*x; 3],
            other => panic!("oracle expected a 3-vector, got {other:?}"),
        }
    }

    fn truthy(&self) -> bool {
        match self {
            V::N(x) => *x != 0.0,
            V::B(b) => *b,
            V::L(l) => !l.is_empty(),
            V::R(..) => true,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    Cube {
        size: [f64; 3],
        center: bool,
    },
    Sphere(f64),
    Cylinder {
        h: f64,
        r1: f64,
        r2: f64,
        center: bool,
    },
    Translate([f64; 3], Box<Shape>),
    RotateXyz([f64; 3], Box<Shape>),
    RotateAxis(f64, [f64; 3], Box<Shape>),
    Scale([f64; 3], Box<Shape>),
    Mirror([f64; 3], Box<Shape>),
    Union(Vec<Shape>),
    Difference(Vec<Shape>),
    Intersection(Vec<Shape>),
}

fn rot_x(p: [f64; 3], deg: f64) -> [f64; 3] {
    let (s, c) = deg.to_radians().sin_cos();
    [p[0], c * p[1] - s * p[2], s * p[1] + c * p[2]]
}

fn rot_y(p: [f64; 3], deg: f64) -> [f64; 3] {
    let (s, c) = deg.to_radians().sin_cos();
    [c * p[0] + s * p[2], p[1], -s * p[0] + c * p[2]]
}

fn rot_z(p: [f64; 3], deg: f64) -> [f64; 3] {
    let (s, c) = deg.to_radians().sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]]
}

/// Rodrigues rotation of `p` by `deg` about `axis`.
fn rot_axis(p: [f64; 3], deg: f64, axis: [f64; 3]) -> [f64; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let k = [axis[0] / n, axis[1] / n, axis[2] / n];
    let (s, c) = deg.to_radians().sin_cos();
    let dot = k[0] * p[0] + k[1] * p[1] + k[2] * p[2];
    let cross = [
        k[1] * p[2] - k[2] * p[1],
        k[2] * p[0] - k[0] * p[2],
        k[0] * p[1] - k[1] * p[0],
    ];
    [0, 1, 2].map(|i| p[i] * c + cross[i] * s + k[i] * dot * (1.0 - c))
}

impl Shape {
    pub fn inside(&self, p: [f64; 3]) -> bool {
        match self {
            Shape::Cube { size, center } => (0..3).all(|i| {
                let lo = if *center { -size[i] / 2.0 } else { 0.0 };
                p[i] >= lo && p[i] <= lo + size[i]
            }),
            Shape::Sphere(r) => p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= r * r,
            Shape::Cylinder { h, r1, r2, center } => {
                let z0 = if *center { -h / 2.0 } else { 0.0 };
                if p[2] < z0 || p[2] > z0 + h {
                    return false;
                }
                let r = r1 + (r2 - r1) * (p[2] - z0) / h;
                p[0] * p[0] + p[1] * p[1] <= r * r
            }
            Shape::Translate(v, s) => s.inside([p[0] - v[0], p[1] - v[1], p[2] - v[2]]),
            // forward order is x, then y, then z; undo it in reverse
            Shape::RotateXyz(a, s) => s.inside(rot_x(rot_y(rot_z(p, -a[2]), -a[1]), -a[0])),
            Shape::RotateAxis(deg, axis, s) => s.inside(rot_axis(p, -deg, *axis)),
            Shape::Scale(v, s) => s.inside([p[0] / v[0], p[1] / v[1], p[2] / v[2]]),
            Shape::Mirror(n, s) => {
                let k = (p[0] * n[0] + p[1] * n[1] + p[2] * n[2])
                    / (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
                s.inside([
                    p[0] - 2.0 * k * n[0],
                    p[1] - 2.0 * k * n[1],
                    p[2] - 2.0 * k * n[2],
                ])
            }
            Shape::Union(c) => c.iter().any(|s| s.inside(p)),
            Shape::Difference(c) => {
                c.first().is_some_and(|f| f.inside(p)) && !c[1..].iter().any(|s| s.inside(p))
            }
            Shape::Intersection(c) => !c.is_empty() && c.iter().all(|s| s.inside(p)),
        }
    }
}

struct Interp<'a> {
    vars: Vec<(String, V)>,
    modules: Vec<(&'a str, &'a [Param], &'a Stmt)>,
}

fn arg<'c>(call: &'c Call, name: &str, pos: Option<usize>) -> Option<&'c Expr> {
    for (n, e) in &call.named {
        if n == name {
            return Some(e);
        }
    }
    pos.and_then(|p| call.args.get(p))
}

impl<'a> Interp<'a> {
    fn lookup(&self, name: &str) -> V {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
            .expect("defined variable")
    }

    fn expr(&self, e: &Expr) -> V {
        match e {
            Expr::Number(x) => V::N(*x),
            Expr::Bool(b) => V::B(*b),
            Expr::Var(n) => self.lookup(n),
            Expr::Vector(items) => V::L(items.iter().map(|i| self.expr(i)).collect()),
            Expr::Range { start, step, end } => V::R(
                self.expr(start).num(),
                step.as_ref().map_or(1.0, |s| self.expr(s).num()),
                self.expr(end).num(),
            ),
            Expr::Unary(op, x) => match (op, self.expr(x)) {
                (UnaryOp::Neg, V::N(v)) => V::N(-v),
                (UnaryOp::Neg, V::L(l)) => V::L(l.into_iter().map(|v| V::N(-v.num())).collect()),
                (UnaryOp::Not, v) => V::B(!v.truthy()),
                (op, v) => panic!("oracle: {op:?} on {v:?}"),
            },
            Expr::Binary(op, a, b) => self.binary(*op, self.expr(a), self.expr(b)),
        }
    }

    fn binary(&self, op: BinaryOp, a: V, b: V) -> V {
        use BinaryOp::*;
        match op {
            And => return V::B(a.truthy() && b.truthy()),
            Or => return V::B(a.truthy() || b.truthy()),
            _ => {}
        }
        match (a, b) {
            (V::N(x), V::N(y)) => match op {
                Add => V::N(x + y),
                Sub => V::N(x - y),
                Mul => V::N(x * y),
                Div => V::N(x / y),
                Mod => V::N(x % y),
                Lt => V::B(x < y),
                Le => V::B(x <= y),
                Gt => V::B(x > y),
                Ge => V::B(x >= y),
                Eq => V::B(x == y),
                Ne => V::B(x != y),
                And | Or => unreachable!(),
            },
            (V::L(l), V::N(y)) => {
                V::L(l.into_iter().map(|v| self.binary(op, v, V::N(y))).collect())
            }
            (V::N(x), V::L(l)) if op == Mul => {
                V::L(l.into_iter().map(|v| V::N(x * v.num())).collect())
            }
            (V::L(l), V::L(m)) if matches!(op, Add | Sub) => V::L(
                l.into_iter()
                    .zip(m)
                    .map(|(p, q)| self.binary(op, p, q))
                    .collect(),
            ),
            (a, b) => panic!("oracle: {a:?} {op:?} {b:?}"),
        }
    }

    fn num(&self, call: &Call, name: &str, pos: Option<usize>) -> Option<f64> {
        arg(call, name, pos).map(|e| self.expr(e).num())
    }

    fn flag(&self, call: &Call, pos: usize) -> bool {
        arg(call, "center", Some(pos)).is_some_and(|e| self.expr(e).truthy())
    }

    /// Each statement of a list contributes at most one shape.
    fn list(&mut self, stmts: &'a [Stmt]) -> Vec<Shape> {
        let (nv, nm) = (self.vars.len(), self.modules.len());
        for s in stmts {
            if let StmtKind::ModuleDef { name, params, body } = &s.kind {
                self.modules.push((name, params, body));
            }
        }
        let mut out = Vec::new();
        for s in stmts {
            if let StmtKind::Assign { name, value } = &s.kind {
                let v = self.expr(value);
                self.vars.push((name.clone(), v));
            } else if let Some(shape) = self.stmt(s) {
                out.push(shape);
            }
        }
        self.vars.truncate(nv);
        self.modules.truncate(nm);
        out
    }

    fn one(shapes: Vec<Shape>) -> Option<Shape> {
        if shapes.is_empty() {
            None
        } else {
            Some(Shape::Union(shapes))
        }
    }

    /// Shapes of a call's child: a group gives one per statement.
    fn children(&mut self, child: Option<&'a Stmt>) -> Vec<Shape> {
        match child {
            None => vec![],
            Some(Stmt {
                kind: StmtKind::Group { stmts, .. },
                ..
            }) => self.list(stmts),
            Some(s) => self.list(std::slice::from_ref(s)),
        }
    }

    fn stmt(&mut self, s: &'a Stmt) -> Option<Shape> {
        match &s.kind {
            StmtKind::Assign { .. } | StmtKind::ModuleDef { .. } => None,
            StmtKind::Group { stmts, .. } => Self::one(self.list(stmts)),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                if self.expr(cond).truthy() {
                    Self::one(self.list(std::slice::from_ref(then_branch)))
                } else {
                    else_branch
                        .as_deref()
                        .and_then(|e| Self::one(self.list(std::slice::from_ref(e))))
                }
            }
            StmtKind::For { var, iter, body } => {
                let values: Vec<V> = match self.expr(iter) {
                    V::R(a, st, b) => {
                        let mut out = vec![];
                        let mut k = 0.0;
                        while a + k * st <= b + 1e-9 * st.abs() {
                            out.push(V::N(a + k * st));
                            k += 1.0;
                        }
                        out
                    }
                    V::L(l) => l,
                    v => vec![v],
                };
                let mut shapes = vec![];
                for v in values {
                    self.vars.push((var.clone(), v));
                    shapes.extend(self.list(std::slice::from_ref(body)));
                    self.vars.pop();
                }
                Self::one(shapes)
            }
            StmtKind::Call(c) => self.call(c),
        }
    }

    fn call(&mut self, c: &'a Call) -> Option<Shape> {
        let child = c.child.as_deref();
        match c.name.as_str() {
            "cube" => {
                let size = arg(c, "size", Some(0)).map_or([1.0; 3], |e| self.expr(e).vec3());
                Some(Shape::Cube {
                    size,
                    center: self.flag(c, 1),
                })
            }
            "sphere" => {
                let r = self
                    .num(c, "d", None)
                    .map(|d| d / 2.0)
                    .or(self.num(c, "r", Some(0)))
                    .unwrap_or(1.0);
                Some(Shape::Sphere(r))
            }
            "cylinder" => {
                let h = self.num(c, "h", Some(0)).unwrap_or(1.0);
                let r = self
                    .num(c, "d", None)
                    .map(|d| d / 2.0)
                    .or(self.num(c, "r", None));
                let r1 = self
                    .num(c, "d1", None)
                    .map(|d| d / 2.0)
                    .or(self.num(c, "r1", Some(1)))
                    .or(r)
                    .unwrap_or(1.0);
                let r2 = self
                    .num(c, "d2", None)
                    .map(|d| d / 2.0)
                    .or(self.num(c, "r2", Some(2)))
                    .or(r)
                    .unwrap_or(1.0);
                Some(Shape::Cylinder {
                    h,
                    r1,
                    r2,
                    center: self.flag(c, 3),
                })
            }
            "union" => Self::one(self.children(child)),
            "difference" => {
                let ch = self.children(child);
                (!ch.is_empty()).then_some(Shape::Difference(ch))
            }
            "intersection" => {
                let ch = self.children(child);
                (!ch.is_empty()).then_some(Shape::Intersection(ch))
            }
            "translate" | "rotate" | "scale" | "mirror" => {
                let inner = Box::new(Self::one(self.children(child))?);
                let first = arg(c, if c.name == "rotate" { "a" } else { "v" }, Some(0))
                    .map(|e| self.expr(e));
                Some(match c.name.as_str() {
                    "translate" => Shape::Translate(first.expect("vector").vec3(), inner),
                    "scale" => Shape::Scale(first.expect("factor").vec3(), inner),
                    "mirror" => Shape::Mirror(first.expect("normal").vec3(), inner),
                    _ => match (first, arg(c, "v", Some(1)).map(|e| self.expr(e))) {
                        (Some(V::N(deg)), Some(axis)) => Shape::RotateAxis(deg, axis.vec3(), inner),
                        (Some(V::N(deg)), None) => Shape::RotateAxis(deg, [0.0, 0.0, 1.0], inner),
                        (Some(v), _) => Shape::RotateXyz(v.vec3(), inner),
                        (None, _) => *inner,
                    },
                })
            }
            name => {
                let (_, params, body) = *self
                    .modules
                    .iter()
                    .rev()
                    .find(|(n, _, _)| *n == name)
                    .expect("module");
                let mut bound = vec![];
                for (i, p) in params.iter().enumerate() {
                    let e = arg(c, &p.name, Some(i)).or(p.default.as_ref());
                    if let Some(e) = e {
                        bound.push((p.name.clone(), self.expr(e)));
                    }
                }
                let n = self.vars.len();
                self.vars.extend(bound);
                let out = Self::one(self.list(std::slice::from_ref(body)));
                self.vars.truncate(n);
                out
            }
        }
    }
}

/// The program's solid as an oracle tree; `None` when it has no geometry.
pub fn oracle_shape(program: &Program) -> Option<Shape> {
    let mut it = Interp {
        vars: vec![],
        modules: vec![],
    };
    Interp::one(it.list(&program.statements))
}

// ---------------------------------------------------------------------------
// distances

fn d2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Mean squared nearest-neighbor distance both ways, by full scan.
pub fn brute_chamfer(p: &[[f64; 3]], q: &[[f64; 3]]) -> f64 {
    let side = |a: &[[f64; 3]], b: &[[f64; 3]]| {
        a.iter()
            .map(|x| b.iter().map(|y| d2(x, y)).fold(f64::INFINITY, f64::min))
            .sum::<f64>()
            / a.len() as f64
    };
    side(p, q) + side(q, p)
}

// ---------------------------------------------------------------------------
// mutation locality

fn stripped(stmts: &[Stmt]) -> Vec<Stmt> {
    let mut out = stmts.to_vec();
    for s in &mut out {
        s.walk_mut(&mut |t| {
            t.block_id = None;
            t.comments.clear();
        });
    }
    out
}

/// Block contents with annotations removed, in order.
pub fn block_bodies(program: &Program) -> Vec<Vec<Stmt>> {
    let blocks = scad_review::segment::segment(program).expect("segmentable");
    blocks
        .blocks
        .iter()
        .map(|b| stripped(&b.statements))
        .collect()
}

/// Checks that `mutant` differs from `original` only at `block_id`: a
/// changed block in place, a deleted block, or one appended block.
pub fn locality(
    original: &Program,
    mutant: &Program,
    kind: &str,
    block_id: u32,
) -> Result<(), String> {
    let o = block_bodies(original);
    let m = block_bodies(mutant);
    let k = block_id as usize;
    match kind {
        "missing_block" => {
            if m.len() + 1 != o.len() {
                return Err(format!("expected {} blocks, got {}", o.len() - 1, m.len()));
            }
            let mut expect = o.clone();
            expect.remove(k - 1);
            (expect == m)
                .then_some(())
                .ok_or_else(|| "blocks other than the deleted one changed".into())
        }
        "redundant_block" => {
            if m.len() != o.len() + 1 || k != m.len() {
                return Err(format!(
                    "expected block {} appended, got {} blocks",
                    o.len() + 1,
                    m.len()
                ));
            }
            (m[..o.len()] == o[..])
                .then_some(())
                .ok_or_else(|| "original blocks changed".into())
        }
        _ => {
            if m.len() != o.len() {
                return Err(format!("block count changed: {} -> {}", o.len(), m.len()));
            }
            let diff: Vec<usize> = (0..o.len())
                .filter(|i| o[*i] != m[*i])
                .map(|i| i + 1)
                .collect();
            (diff == [k])
                .then_some(())
                .ok_or_else(|| format!("changed blocks {diff:?}, recorded {k}"))
        }
    }
}

// ---------------------------------------------------------------------------
// preference pairs

/// Ordered (chosen, rejected) index pairs kept by an exhaustive scan, as a
/// set. `rule` is "and" or "or".
pub fn brute_pairs(vd: &[u8], vv: &[f64], rule: &str) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for c in 0..vd.len() {
        for r in 0..vd.len() {
            if c == r {
                continue;
            }
            let diagnostic = vd[c] == 1 && vd[r] == 0;
            let visual = vv[c] - vv[r] > 0.25;
            let keep = match rule {
                "and" => diagnostic && visual,
                _ => diagnostic || (visual && vd[c] >= vd[r]),
            };
            if keep {
                out.insert((c, r));
            }
        }
    }
    out
}

/// (argmin, argmax) over finite values with lowest-index ties; `None` when
/// no finite value exists or all finite values are equal.
pub fn brute_extremes(cds: &[f64]) -> Option<(usize, usize)> {
    let finite: BTreeMap<usize, f64> = cds
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, d)| d.is_finite())
        .collect();
    let lo = finite.values().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.values().copied().fold(f64::NEG_INFINITY, f64::max);
    if finite.is_empty() || lo == hi {
        return None;
    }
    let first = |v: f64| *finite.iter().find(|(_, d)| **d == v).unwrap().0;
    Some((first(lo), first(hi)))
}

// ---------------------------------------------------------------------------
// hand-written corpus

/// Programs covering every grammar construct, including comments in odd
/// places and annotated blocks.
pub const CORPUS: &[&str] = &[
    "cube(10);",
    "x = 1 + 2 * 3;",
    "translate([0,0,5]) cube([2,2,2], center=true);",
    "for (i = [0:2]) sphere(r=i+1);",
    "// Block 2\nsphere(r=3);",
    "a = -2; b = !true; c = [1, [2, 3], a]; d = (1 + 2) * 3 - 4 / 5 % 6;",
    "e = 1 < 2 && 3 >= 2 || 4 != 4 && !(5 == 5);",
    "for (k = [0 : 0.5 : 2]) translate([k, 0, 0]) cylinder(h = 1, r1 = 0.5, r2 = 0.2);",
    "module peg(h = 2, r) {\n  cylinder(h = h, r = r);\n}\npeg(r = 1);\npeg(3, 0.5);",
    "if (1 > 0) cube(1); else sphere(1);",
    "if (false) { cube(1); } else if (true) { sphere(2); }",
    "difference() {\n  cube(4, center = true);\n  sphere(r = 2.5);\n}",
    "intersection() { cube([2, 2, 2], true); rotate([0, 45, 0]) cube(2, center = true); }",
    "union() {\n  // lid\n  translate([0, 0, 3]) cube([4, 4, 1]);\n  /* base */ cube([4, 4, 3]);\n}",
    "mirror([1, 0, 0]) scale([1, 2, 0.5]) translate([1, 0, 0]) sphere(d = 2);",
    "rotate(30) cube(1);\nrotate(a = 90, v = [1, 0, 0]) cylinder(h = 3, d = 1);",
    "// Block 1\nw = 10;\nh = 2;\n// Block 2\ncube([w, w, h]);\n// Block 3\nfor (x = [1, 3, 5]) translate([x, 1, h]) cylinder(h = 4, r = 0.5);",
    "/* header\n   spans lines */\nside = 3; // trailing\n{\n  cube(side);\n  translate([side, 0, 0]) cube(side);\n}\n// end",
    "module ring(r) {\n  difference() {\n    cylinder(h = 1, r = r);\n    translate([0, 0, -1]) cylinder(h = 3, r = r / 2);\n  }\n}\nfor (i = [1 : 3]) translate([0, 0, i * 2]) ring(i);",
    "n = 3;\nfor (i = [0 : n - 1]) if (i % 2 == 0) translate([i * 2, 0, 0]) cube(1); else translate([i * 2, 0, 0]) sphere(0.5);",
];

// ---------------------------------------------------------------------------
// hand-labeled diagnostic cases

/// (gold error type, gold block, candidate JSON, expected reward). Labels were
/// assigned by reading each row, not by running the parser.
pub const REWARD_CASES: &[(&str, u32, &str, u8)] = &[
    (
        "size",
        3,
        r#"{"sample_id":"s","error_type":"size","block_id":3,"feedback":"x"}"#,
        1,
    ),
    (
        "size",
        3,
        r#"{"sample_id":"s","error_type":"size","block_id":2,"feedback":"x"}"#,
        0,
    ),
    (
        "size",
        3,
        r#"{"sample_id":"s","error_type":"position","block_id":3,"feedback":"x"}"#,
        0,
    ),
    (
        "size",
        3,
        r#"{"sample_id":"s","error_type":"Size","block_id":"Block 3","feedback":"x"}"#,
        1,
    ),
    (
        "size",
        3,
        r#"{"sample_id":"s","error_type":"size","block_id":"3","feedback":"x"}"#,
        1,
    ),
    (
        "size",
        3,
        r#"{"sample_id":"s","error_type":"size error","block_id":"block 3","feedback":"x"}"#,
        1,
    ),
    (
        "size",
        3,
        r#"{"sample_id":"s","feedback":"Block 3 has a size error."}"#,
        0,
    ),
    (
        "size",
        3,
        r#"{"sample_id":"s","error_type":"size","feedback":"Block 3"}"#,
        0,
    ),
    (
        "size",
        3,
        r#"{"sample_id":"s","error_type":"size","block_id":"Block 3 and 4","feedback":"x"}"#,
        0,
    ),
    (
        "size",
        3,
        r#"{"sample_id":"s","error_type":"size","block_id":-3,"feedback":"x"}"#,
        0,
    ),
    (
        "missing_block",
        2,
        r#"{"sample_id":"s","error_type":"Missing Block","block_id":2,"feedback":"x"}"#,
        1,
    ),
    (
        "missing_block",
        2,
        r#"{"sample_id":"s","error_type":"missing-block","block_id":2,"feedback":"x"}"#,
        1,
    ),
    (
        "missing_block",
        2,
        r#"{"sample_id":"s","error_type":"redundant_block","block_id":2,"feedback":"x"}"#,
        0,
    ),
    (
        "redundant_block",
        5,
        r#"{"sample_id":"s","error_type":"redundant_block","block_id":5,"feedback":"x"}"#,
        1,
    ),
    (
        "no_error",
        0,
        r#"{"sample_id":"s","error_type":"no_error","block_id":0,"feedback":"fine"}"#,
        1,
    ),
    (
        "no_error",
        0,
        r#"{"sample_id":"s","error_type":"no error","block_id":4,"feedback":"fine"}"#,
        1,
    ),
    (
        "no_error",
        0,
        r#"{"sample_id":"s","error_type":"rotation","block_id":0,"feedback":"x"}"#,
        0,
    ),
    (
        "rotation",
        1,
        r#"{"sample_id":"s","error_type":"no_error","block_id":1,"feedback":"x"}"#,
        0,
    ),
    (
        "constant",
        1,
        r#"{"sample_id":"s","error_type":"constant","block_id":1,"feedback":"x"}"#,
        1,
    ),
    (
        "logic",
        4,
        r#"{"sample_id":"s","error_type":"logic; size","block_id":4,"feedback":"x"}"#,
        0,
    ),
];
