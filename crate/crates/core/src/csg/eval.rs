//! Program evaluation: expressions to values, statements to CSG nodes.
//!
//! Semantics follow OpenSCAD where the subset overlaps: `for` ranges are
//! inclusive, `rotate([x, y, z])` applies x then y then z in degrees, sibling
//! geometry is implicitly unioned, and loops, conditionals and module calls
//! each contribute a single (unioned) child to their parent.

use std::collections::HashMap;

use nalgebra::{Matrix4, Rotation3, Unit};
use thiserror::Error;

use super::{Affine, BoolOp, CsgNode, Vec3};
use crate::ast::{
    parse, BinaryOp, Call, Expr, Param, Program, Stmt, StmtKind, SyntaxError, UnaryOp,
};

/// Total loop iterations allowed per evaluation.
pub const LOOP_BUDGET: usize = 10_000;
/// Maximum module call nesting.
pub const MAX_RECURSION: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("undefined variable `{0}`")]
    UndefinedVariable(String),
    #[error("non-positive dimension in `{call}`: {value}")]
    NonPositiveDimension { call: String, value: f64 },
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("loop budget of {LOOP_BUDGET} iterations exceeded")]
    LoopBudgetExceeded,
    #[error("module recursion deeper than {MAX_RECURSION}")]
    RecursionLimit,
    #[error("type error: {0}")]
    Type(String),
    #[error("singular transform in `{0}`")]
    SingularTransform(String),
    #[error("program produces no geometry")]
    EmptyGeometry,
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Bool(bool),
    Vector(Vec<Value>),
    Range { start: f64, step: f64, end: f64 },
}

impl Value {
    fn truthy(&self) -> bool {
        match self {
            Value::Number(v) => *v != 0.0,
            Value::Bool(b) => *b,
            Value::Vector(items) => !items.is_empty(),
            Value::Range { .. } => true,
        }
    }

    fn describe(&self) -> &'static str {
        match self {
            Value::Number(_) => "number",
            Value::Bool(_) => "bool",
            Value::Vector(_) => "vector",
            Value::Range { .. } => "range",
        }
    }
}

/// Parses and evaluates source text.
pub fn evaluate_source(source: &str) -> Result<CsgNode, CompileError> {
    evaluate(&parse(source)?)
}

/// Compiles a program to a single CSG tree.
pub fn evaluate(program: &Program) -> Result<CsgNode, CompileError> {
    let mut ev = Evaluator {
        scopes: Vec::new(),
        modules: Vec::new(),
        budget: LOOP_BUDGET,
        depth: 0,
    };
    let nodes = ev.stmt_list(&program.statements)?;
    union_of(nodes).ok_or(CompileError::EmptyGeometry)
}

fn union_of(mut nodes: Vec<CsgNode>) -> Option<CsgNode> {
    match nodes.len() {
        0 => None,
        1 => nodes.pop(),
        _ => Some(CsgNode::Boolean {
            op: BoolOp::Union,
            children: nodes,
        }),
    }
}

struct ModuleDef<'a> {
    params: &'a [Param],
    body: &'a Stmt,
}

struct Evaluator<'a> {
    scopes: Vec<HashMap<String, Value>>,
    modules: Vec<HashMap<String, ModuleDef<'a>>>,
    budget: usize,
    depth: usize,
}

impl<'a> Evaluator<'a> {
    fn lookup(&self, name: &str) -> Result<Value, CompileError> {
        self.scopes
            .iter()
            .rev()
            .find_map(|s| s.get(name))
            .cloned()
            .ok_or_else(|| CompileError::UndefinedVariable(name.to_string()))
    }

    fn bind(&mut self, name: &str, value: Value) {
        self.scopes
            .last_mut()
            .expect("scope stack never empty during evaluation")
            .insert(name.to_string(), value);
    }

    /// Evaluates a statement list in a fresh scope; module definitions in the
    /// list are visible to every statement in it.
    fn stmt_list(&mut self, stmts: &'a [Stmt]) -> Result<Vec<CsgNode>, CompileError> {
        let mut table = HashMap::new();
        for s in stmts {
            if let StmtKind::ModuleDef { name, params, body } = &s.kind {
                table.insert(name.clone(), ModuleDef { params, body });
            }
        }
        self.modules.push(table);
        self.scopes.push(HashMap::new());
        let result = stmts.iter().try_fold(Vec::new(), |mut acc, s| {
            acc.extend(self.stmt(s)?);
            Ok(acc)
        });
        self.scopes.pop();
        self.modules.pop();
        result
    }

    /// A nested body: groups are flattened, anything else is one statement.
    fn body(&mut self, s: &'a Stmt) -> Result<Vec<CsgNode>, CompileError> {
        match &s.kind {
            StmtKind::Group { stmts, .. } => self.stmt_list(stmts),
            _ => self.stmt_list(std::slice::from_ref(s)),
        }
    }

    fn stmt(&mut self, s: &'a Stmt) -> Result<Vec<CsgNode>, CompileError> {
        match &s.kind {
            StmtKind::Assign { name, value } => {
                let v = self.expr(value)?;
                self.bind(name, v);
                Ok(Vec::new())
            }
            StmtKind::ModuleDef { .. } => Ok(Vec::new()),
            StmtKind::Group { stmts, .. } => self.stmt_list(stmts),
            StmtKind::For { var, iter, body } => {
                let values = match self.expr(iter)? {
                    Value::Range { start, step, end } => {
                        range_values(start, step, end, self.budget)?
                    }
                    Value::Vector(items) => items,
                    other => {
                        return Err(CompileError::Type(format!(
                            "cannot iterate over a {}",
                            other.describe()
                        )))
                    }
                };
                let mut out = Vec::new();
                for v in values {
                    if self.budget == 0 {
                        return Err(CompileError::LoopBudgetExceeded);
                    }
                    self.budget -= 1;
                    self.scopes.push(HashMap::from([(var.clone(), v)]));
                    let r = self.body(body);
                    self.scopes.pop();
                    out.extend(r?);
                }
                Ok(union_of(out).into_iter().collect())
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let nodes = if self.expr(cond)?.truthy() {
                    self.body(then_branch)?
                } else if let Some(e) = else_branch {
                    self.body(e)?
                } else {
                    Vec::new()
                };
                Ok(union_of(nodes).into_iter().collect())
            }
            StmtKind::Call(call) => self.call(call),
        }
    }

    fn call(&mut self, call: &'a Call) -> Result<Vec<CsgNode>, CompileError> {
        let children = |ev: &mut Self| -> Result<Vec<CsgNode>, CompileError> {
            match &call.child {
                Some(c) => ev.body(c),
                None => Ok(Vec::new()),
            }
        };
        let node = match call.name.as_str() {
            "cube" => Some(self.cube(call)?),
            "sphere" => Some(self.sphere(call)?),
            "cylinder" => Some(self.cylinder(call)?),
            "translate" | "rotate" | "scale" | "mirror" => {
                let t = self.transform(call)?;
                union_of(children(self)?).map(|c| c.transformed(t))
            }
            "union" => union_of(children(self)?),
            "intersection" | "difference" => {
                let kids = children(self)?;
                match kids.len() {
                    0 => None,
                    1 => kids.into_iter().next(),
                    _ => {
                        let op = if call.name == "difference" {
                            BoolOp::Difference
                        } else {
                            BoolOp::Intersection
                        };
                        Some(CsgNode::Boolean { op, children: kids })
                    }
                }
            }
            name => self.module_call(name, call)?,
        };
        Ok(node.into_iter().collect())
    }

    fn module_call(&mut self, name: &str, call: &'a Call) -> Result<Option<CsgNode>, CompileError> {
        let (params, body) = {
            let def = self
                .modules
                .iter()
                .rev()
                .find_map(|t| t.get(name))
                .ok_or_else(|| CompileError::UnknownModule(name.to_string()))?;
            (def.params, def.body)
        };
        if self.depth >= MAX_RECURSION {
            return Err(CompileError::RecursionLimit);
        }
        if call.args.len() > params.len() {
            return Err(CompileError::Type(format!(
                "`{name}` takes {} arguments",
                params.len()
            )));
        }
        let mut frame = HashMap::new();
        for (i, p) in params.iter().enumerate() {
            let value = if let Some((_, e)) = call.named.iter().find(|(n, _)| *n == p.name) {
                Some(self.expr(e)?)
            } else if let Some(e) = call.args.get(i) {
                Some(self.expr(e)?)
            } else {
                None
            };
            if let Some(v) = value {
                frame.insert(p.name.clone(), v);
            }
        }
        if let Some((bad, _)) = call
            .named
            .iter()
            .find(|(n, _)| !params.iter().any(|p| p.name == *n))
        {
            return Err(CompileError::Type(format!(
                "`{name}` has no parameter `{bad}`"
            )));
        }
        // defaults may refer to earlier parameters
        self.scopes.push(frame);
        for p in params {
            if !self.scopes.last().is_some_and(|f| f.contains_key(&p.name)) {
                if let Some(d) = &p.default {
                    match self.expr(d) {
                        Ok(v) => self.bind(&p.name, v),
                        Err(e) => {
                            self.scopes.pop();
                            return Err(e);
                        }
                    }
                }
            }
        }
        self.depth += 1;
        let result = self.body(body);
        self.depth -= 1;
        self.scopes.pop();
        Ok(union_of(result?))
    }

    fn number_arg(
        &mut self,
        call: &'a Call,
        name: &str,
        pos: Option<usize>,
    ) -> Result<Option<f64>, CompileError> {
        match call.arg(name, pos) {
            None => Ok(None),
            Some(e) => match self.expr(e)? {
                Value::Number(v) => Ok(Some(v)),
                other => Err(CompileError::Type(format!(
                    "`{}` expects a number for `{name}`, got {}",
                    call.name,
                    other.describe()
                ))),
            },
        }
    }

    fn bool_arg(
        &mut self,
        call: &'a Call,
        name: &str,
        pos: Option<usize>,
    ) -> Result<bool, CompileError> {
        match call.arg(name, pos) {
            None => Ok(false),
            Some(e) => Ok(self.expr(e)?.truthy()),
        }
    }

    fn cube(&mut self, call: &'a Call) -> Result<CsgNode, CompileError> {
        let size = match call.arg("size", Some(0)) {
            None => [1.0; 3],
            Some(e) => match self.expr(e)? {
                Value::Number(s) => [s; 3],
                v @ Value::Vector(_) => vec3_of(&v, &call.name)?,
                other => {
                    return Err(CompileError::Type(format!(
                        "cube size cannot be a {}",
                        other.describe()
                    )))
                }
            },
        };
        for s in size {
            positive(s, call)?;
        }
        let centered = self.bool_arg(call, "center", Some(1))?;
        Ok(CsgNode::cube(size, centered))
    }

    fn sphere(&mut self, call: &'a Call) -> Result<CsgNode, CompileError> {
        let r = match self.number_arg(call, "d", None)? {
            Some(d) => d / 2.0,
            None => self.number_arg(call, "r", Some(0))?.unwrap_or(1.0),
        };
        Ok(CsgNode::sphere(positive(r, call)?))
    }

    fn cylinder(&mut self, call: &'a Call) -> Result<CsgNode, CompileError> {
        let h = positive(self.number_arg(call, "h", Some(0))?.unwrap_or(1.0), call)?;
        let r = match self.number_arg(call, "d", None)? {
            Some(d) => Some(d / 2.0),
            None => self.number_arg(call, "r", None)?,
        };
        let r1 = match self.number_arg(call, "d1", None)? {
            Some(d) => Some(d / 2.0),
            None => self.number_arg(call, "r1", Some(1))?,
        };
        let r2 = match self.number_arg(call, "d2", None)? {
            Some(d) => Some(d / 2.0),
            None => self.number_arg(call, "r2", Some(2))?,
        };
        let r1 = r1.or(r).unwrap_or(1.0);
        let r2 = r2.or(r).unwrap_or(1.0);
        // one radius may be zero (a cone), not both
        for v in [r1, r2] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CompileError::NonPositiveDimension {
                    call: call.name.clone(),
                    value: v,
                });
            }
        }
        positive(r1.max(r2), call)?;
        let centered = self.bool_arg(call, "center", Some(3))?;
        Ok(CsgNode::cylinder(h, r1, r2, centered))
    }

    fn transform(&mut self, call: &'a Call) -> Result<Affine, CompileError> {
        let name = call.name.as_str();
        let m = match name {
            "translate" => {
                let v = self.vec_arg(call, "v")?;
                Matrix4::new_translation(&v)
            }
            "scale" => {
                let v = match call.arg("v", Some(0)) {
                    Some(e) => match self.expr(e)? {
                        Value::Number(s) => Vec3::new(s, s, s),
                        v => Vec3::from(vec3_of(&v, name)?),
                    },
                    None => return Err(CompileError::Type("scale needs a factor".into())),
                };
                Matrix4::new_nonuniform_scaling(&v)
            }
            "mirror" => {
                let n = self.vec_arg(call, "v")?;
                let len2 = n.norm_squared();
                if len2 == 0.0 {
                    return Err(CompileError::SingularTransform(name.to_string()));
                }
                let lin = nalgebra::Matrix3::identity() - 2.0 / len2 * n * n.transpose();
                lin.to_homogeneous()
            }
            "rotate" => {
                let a = call.arg("a", Some(0)).map(|e| self.expr(e)).transpose()?;
                let axis = call.arg("v", Some(1)).map(|e| self.expr(e)).transpose()?;
                match (a, axis) {
                    (Some(Value::Number(deg)), Some(ax)) => {
                        let ax = Vec3::from(vec3_of(&ax, name)?);
                        let unit = Unit::try_new(ax, 1e-12)
                            .ok_or_else(|| CompileError::SingularTransform(name.into()))?;
                        Rotation3::from_axis_angle(&unit, deg.to_radians()).to_homogeneous()
                    }
                    (Some(Value::Number(deg)), None) => {
                        Rotation3::from_axis_angle(&Vec3::z_axis(), deg.to_radians())
                            .to_homogeneous()
                    }
                    (Some(v @ Value::Vector(_)), _) => {
                        let [x, y, z] = vec3_of(&v, name)?;
                        rotation_xyz(x, y, z)
                    }
                    (None, _) => Matrix4::identity(),
                    (Some(other), _) => {
                        return Err(CompileError::Type(format!(
                            "rotate angle cannot be a {}",
                            other.describe()
                        )));
                    }
                }
            }
            _ => unreachable!("not a transform: {name}"),
        };
        Affine::new(m).ok_or_else(|| CompileError::SingularTransform(name.to_string()))
    }

    fn vec_arg(&mut self, call: &'a Call, name: &str) -> Result<Vec3, CompileError> {
        match call.arg(name, Some(0)) {
            Some(e) => {
                let v = self.expr(e)?;
                Ok(Vec3::from(vec3_of(&v, &call.name)?))
            }
            None => Err(CompileError::Type(format!(
                "`{}` needs a vector argument",
                call.name
            ))),
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<Value, CompileError> {
        Ok(match e {
            Expr::Number(v) => Value::Number(*v),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Var(name) => self.lookup(name)?,
            Expr::Vector(items) => Value::Vector(
                items
                    .iter()
                    .map(|i| self.expr(i))
                    .collect::<Result<_, _>>()?,
            ),
            Expr::Range { start, step, end } => {
                let start = self.scalar(start)?;
                let step = match step {
                    Some(s) => self.scalar(s)?,
                    None => 1.0,
                };
                let end = self.scalar(end)?;
                Value::Range { start, step, end }
            }
            Expr::Unary(op, operand) => {
                let v = self.expr(operand)?;
                match op {
                    UnaryOp::Not => Value::Bool(!v.truthy()),
                    UnaryOp::Neg => negate(v)?,
                }
            }
            Expr::Binary(op, lhs, rhs) => {
                let l = self.expr(lhs)?;
                match op {
                    BinaryOp::And => {
                        return Ok(Value::Bool(l.truthy() && self.expr(rhs)?.truthy()))
                    }
                    BinaryOp::Or => return Ok(Value::Bool(l.truthy() || self.expr(rhs)?.truthy())),
                    _ => {}
                }
                let r = self.expr(rhs)?;
                binary(*op, l, r)?
            }
        })
    }

    fn scalar(&mut self, e: &Expr) -> Result<f64, CompileError> {
        match self.expr(e)? {
            Value::Number(v) => Ok(v),
            other => Err(CompileError::Type(format!(
                "expected a number, got {}",
                other.describe()
            ))),
        }
    }
}

fn positive(v: f64, call: &Call) -> Result<f64, CompileError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CompileError::NonPositiveDimension {
            call: call.name.clone(),
            value: v,
        })
    }
}

/// Vectors of 2 components get z = 0.
fn vec3_of(v: &Value, context: &str) -> Result<[f64; 3], CompileError> {
    let Value::Vector(items) = v else {
        return Err(CompileError::Type(format!(
            "`{context}` expects a vector, got {}",
            v.describe()
        )));
    };
    if !(2..=3).contains(&items.len()) {
        return Err(CompileError::Type(format!(
            "`{context}` expects 3 components, got {}",
            items.len()
        )));
    }
    let mut out = [0.0; 3];
    for (o, it) in out.iter_mut().zip(items) {
        match it {
            Value::Number(x) if x.is_finite() => *o = *x,
            other => {
                return Err(CompileError::Type(format!(
                    "`{context}` vector holds a non-number {}",
                    other.describe()
                )))
            }
        }
    }
    Ok(out)
}

pub(crate) fn rotation_xyz(x_deg: f64, y_deg: f64, z_deg: f64) -> Matrix4<f64> {
    let rx = Rotation3::from_axis_angle(&Vec3::x_axis(), x_deg.to_radians());
    let ry = Rotation3::from_axis_angle(&Vec3::y_axis(), y_deg.to_radians());
    let rz = Rotation3::from_axis_angle(&Vec3::z_axis(), z_deg.to_radians());
    (rz * ry * rx).to_homogeneous()
}

fn range_values(
    start: f64,
    step: f64,
    end: f64,
    budget: usize,
) -> Result<Vec<Value>, CompileError> {
    if step == 0.0 || !step.is_finite() || !start.is_finite() || !end.is_finite() {
        return Err(CompileError::Type(
            "range step must be finite and nonzero".into(),
        ));
    }
    let count = ((end - start) / step + 1e-9).floor();
    if count < 0.0 {
        return Ok(Vec::new());
    }
    if count >= budget as f64 {
        return Err(CompileError::LoopBudgetExceeded);
    }
    Ok((0..=count as usize)
        .map(|i| Value::Number(start + step * i as f64))
        .collect())
}

fn negate(v: Value) -> Result<Value, CompileError> {
    match v {
        Value::Number(x) => Ok(Value::Number(-x)),
        Value::Vector(items) => Ok(Value::Vector(
            items.into_iter().map(negate).collect::<Result<_, _>>()?,
        )),
        other => Err(CompileError::Type(format!(
            "cannot negate a {}",
            other.describe()
        ))),
    }
}

fn binary(op: BinaryOp, l: Value, r: Value) -> Result<Value, CompileError> {
    use Value::{Number as N, Vector as V};
    let type_err = |l: &Value, r: &Value| {
        CompileError::Type(format!(
            "unsupported operands for `{}`: {} and {}",
            op.symbol(),
            l.describe(),
            r.describe()
        ))
    };
    match op {
        BinaryOp::Eq => return Ok(Value::Bool(l == r)),
        BinaryOp::Ne => return Ok(Value::Bool(l != r)),
        _ => {}
    }
    match (op, l, r) {
        (BinaryOp::Add, N(a), N(b)) => Ok(N(a + b)),
        (BinaryOp::Sub, N(a), N(b)) => Ok(N(a - b)),
        (BinaryOp::Mul, N(a), N(b)) => Ok(N(a * b)),
        (BinaryOp::Div, N(a), N(b)) => Ok(N(a / b)),
        (BinaryOp::Mod, N(a), N(b)) => Ok(N(a % b)),
        (BinaryOp::Lt, N(a), N(b)) => Ok(Value::Bool(a < b)),
        (BinaryOp::Le, N(a), N(b)) => Ok(Value::Bool(a <= b)),
        (BinaryOp::Gt, N(a), N(b)) => Ok(Value::Bool(a > b)),
        (BinaryOp::Ge, N(a), N(b)) => Ok(Value::Bool(a >= b)),
        (BinaryOp::Add | BinaryOp::Sub, V(a), V(b)) if a.len() == b.len() => Ok(V(a
            .into_iter()
            .zip(b)
            .map(|(x, y)| binary(op, x, y))
            .collect::<Result<_, _>>()?)),
        (BinaryOp::Mul | BinaryOp::Div, V(a), N(s)) => Ok(V(a
            .into_iter()
            .map(|x| binary(op, x, N(s)))
            .collect::<Result<_, _>>()?)),
        (BinaryOp::Mul, N(s), V(a)) => Ok(V(a
            .into_iter()
            .map(|x| binary(op, N(s), x))
            .collect::<Result<_, _>>()?)),
        (_, l, r) => Err(type_err(&l, &r)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csg::Primitive;

    fn eval(src: &str) -> Result<CsgNode, CompileError> {
        evaluate_source(src)
    }

    #[test]
    fn centered_cube() {
        assert_eq!(
            eval("cube(2, center=true);").unwrap(),
            CsgNode::cube([2.0; 3], true)
        );
    }

    #[test]
    fn loop_unrolls_into_union() {
        let n = eval("for (i=[0:1]) translate([i*3,0,0]) sphere(1);").unwrap();
        let expected = CsgNode::boolean(
            BoolOp::Union,
            vec![
                CsgNode::sphere(1.0).translated([0.0, 0.0, 0.0]),
                CsgNode::sphere(1.0).translated([3.0, 0.0, 0.0]),
            ],
        );
        assert_eq!(n, expected);
    }

    #[test]
    fn undefined_variable() {
        assert_eq!(
            eval("cube(undefined_var);"),
            Err(CompileError::UndefinedVariable("undefined_var".into()))
        );
    }

    #[test]
    fn non_positive_dimension() {
        assert!(matches!(
            eval("cube([1, 0, 1]);"),
            Err(CompileError::NonPositiveDimension { .. })
        ));
        assert!(matches!(
            eval("sphere(r = -1);"),
            Err(CompileError::NonPositiveDimension { .. })
        ));
        assert!(matches!(
            eval("cylinder(h = 1, r1 = 0, r2 = 0);"),
            Err(CompileError::NonPositiveDimension { .. })
        ));
        assert!(eval("cylinder(h = 1, r1 = 1, r2 = 0);").is_ok());
    }

    #[test]
    fn unknown_module_and_recursion() {
        assert_eq!(
            eval("gizmo();"),
            Err(CompileError::UnknownModule("gizmo".into()))
        );
        assert_eq!(
            eval("module m() m(); m();"),
            Err(CompileError::RecursionLimit)
        );
    }

    #[test]
    fn loop_budget() {
        assert_eq!(
            eval("for (i = [0:20000]) cube(1);"),
            Err(CompileError::LoopBudgetExceeded)
        );
        assert_eq!(
            eval("for (i = [0:200]) for (j = [0:200]) cube(1);"),
            Err(CompileError::LoopBudgetExceeded)
        );
    }

    #[test]
    fn empty_geometry() {
        assert_eq!(eval("r = 2;"), Err(CompileError::EmptyGeometry));
        assert_eq!(
            eval("for (i = [3:1]) cube(1);"),
            Err(CompileError::EmptyGeometry)
        );
    }

    #[test]
    fn modules_with_defaults_and_named_args() {
        let n = eval("module peg(h = 2, r = h / 2) cylinder(h = h, r = r); peg(r = 3);").unwrap();
        assert_eq!(n, CsgNode::cylinder(2.0, 3.0, 3.0, false));
        let n = eval("module peg(h = 2, r = h / 2) cylinder(h = h, r = r); peg(4);").unwrap();
        assert_eq!(n, CsgNode::cylinder(4.0, 2.0, 2.0, false));
    }

    #[test]
    fn if_selects_branch() {
        assert_eq!(
            eval("a = 3; if (a > 2) cube(1); else sphere(1);").unwrap(),
            CsgNode::cube([1.0; 3], false)
        );
        assert_eq!(
            eval("a = 1; if (a > 2 && true) cube(1); else sphere(1);").unwrap(),
            CsgNode::sphere(1.0)
        );
    }

    #[test]
    fn rotation_order_is_x_then_y_then_z() {
        let n = eval("rotate([90, 90, 0]) cube(1);").unwrap();
        let CsgNode::Transform { transform, .. } = n else {
            panic!()
        };
        // x first: +y -> +z; then y: +z -> +x
        let p = transform.apply(&Vec3::new(0.0, 1.0, 0.0));
        assert!((p - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12, "{p:?}");
    }

    #[test]
    fn scalar_rotate_is_about_z() {
        let CsgNode::Transform { transform, .. } = eval("rotate(90) cube(1);").unwrap() else {
            panic!()
        };
        let p = transform.apply(&Vec3::new(1.0, 0.0, 0.0));
        assert!((p - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mirror_and_scale() {
        let CsgNode::Transform { transform, .. } = eval("mirror([1,0,0]) cube(1);").unwrap() else {
            panic!()
        };
        assert!(
            (transform.apply(&Vec3::new(2.0, 1.0, 0.0)) - Vec3::new(-2.0, 1.0, 0.0)).norm() < 1e-12
        );
        assert!(matches!(
            eval("scale([1, 0, 1]) cube(1);"),
            Err(CompileError::SingularTransform(_))
        ));
    }

    #[test]
    fn difference_children_and_for_as_single_child() {
        let n =
            eval("difference() { cube(10); for (i = [1:3]) translate([i*2, 5, 5]) sphere(0.5); }")
                .unwrap();
        let CsgNode::Boolean {
            op: BoolOp::Difference,
            children,
        } = n
        else {
            panic!()
        };
        assert_eq!(children.len(), 2);
        assert!(
            matches!(&children[1], CsgNode::Boolean { op: BoolOp::Union, children } if children.len() == 3)
        );
    }

    #[test]
    fn vector_arithmetic() {
        let n = eval("o = [1, 2, 3]; translate(o * 2 - [1, 1, 1]) sphere(1);").unwrap();
        let CsgNode::Transform { transform, .. } = n else {
            panic!()
        };
        assert!((transform.apply(&Vec3::zeros()) - Vec3::new(1.0, 3.0, 5.0)).norm() < 1e-12);
    }

    #[test]
    fn cylinder_argument_forms() {
        assert_eq!(
            eval("cylinder(3, 1, 2);").unwrap(),
            CsgNode::cylinder(3.0, 1.0, 2.0, false)
        );
        assert_eq!(
            eval("cylinder(h=3, d=4, center=true);").unwrap(),
            CsgNode::cylinder(3.0, 2.0, 2.0, true)
        );
        let n = eval("sphere(d = 3);").unwrap();
        assert_eq!(n, CsgNode::Primitive(Primitive::Sphere { radius: 1.5 }));
    }

    #[test]
    fn inner_scope_shadows_outer() {
        let n = eval("r = 1; module m(r) sphere(r); m(4); sphere(r);").unwrap();
        let CsgNode::Boolean { children, .. } = n else {
            panic!()
        };
        assert_eq!(children, vec![CsgNode::sphere(4.0), CsgNode::sphere(1.0)]);
    }
}
