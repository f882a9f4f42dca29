//! CSG geometry: evaluated trees of primitives, affine transforms and
//! booleans, with exact membership and a signed-distance lower bound.

mod eval;
mod quantize;
mod sample;

pub use eval::{evaluate, evaluate_source, CompileError, LOOP_BUDGET, MAX_RECURSION};
pub use quantize::{dequantize_value, quantize, quantize_value, QuantizeFrame};
pub use sample::{
    normalize, sample_surface, Normalization, PointCloud, SampleError, BOUNDARY_TOLERANCE,
    DEFAULT_POINTS,
};

use nalgebra::{Matrix3, Matrix4, Point3, Vector3};
use serde::Serialize;

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoolOp {
    Union,
    Difference,
    Intersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Primitive {
    Cube {
        size: [f64; 3],
        centered: bool,
    },
    Sphere {
        radius: f64,
    },
    /// Cone frustum along +z; `r1` at the bottom, `r2` at the top.
    Cylinder {
        height: f64,
        r1: f64,
        r2: f64,
        centered: bool,
    },
}

/// Invertible affine map with its inverse and the smallest singular value of
/// its linear part cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub matrix: Matrix4<f64>,
    pub inverse: Matrix4<f64>,
    /// Smallest singular value of the linear part: world distances are at
    /// least this factor times local distances.
    pub min_stretch: f64,
}

impl Affine {
    pub fn new(matrix: Matrix4<f64>) -> Option<Affine> {
        let inverse = matrix.try_inverse()?;
        let lin: Matrix3<f64> = matrix.fixed_view::<3, 3>(0, 0).into_owned();
        let min_stretch = lin.singular_values().min();
        if !(min_stretch > 1e-12) || !matrix.iter().all(|v| v.is_finite()) {
            return None;
        }
        Some(Affine {
            matrix,
            inverse,
            min_stretch,
        })
    }

    pub fn identity() -> Affine {
        Affine::new(Matrix4::identity()).expect("identity is invertible")
    }

    pub fn translation(v: Vec3) -> Affine {
        Affine::new(Matrix4::new_translation(&v)).expect("translation is invertible")
    }

    pub fn then(&self, outer: &Affine) -> Affine {
        Affine::new(outer.matrix * self.matrix).expect("product of invertible maps")
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.matrix.transform_point(&Point3::from(*p)).coords
    }

    pub fn apply_inverse(&self, p: &Vec3) -> Vec3 {
        self.inverse.transform_point(&Point3::from(*p)).coords
    }

    pub fn linear(&self) -> Matrix3<f64> {
        self.matrix.fixed_view::<3, 3>(0, 0).into_owned()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CsgNode {
    Primitive(Primitive),
    Transform {
        transform: Affine,
        child: Box<CsgNode>,
    },
    /// `Difference` subtracts every later child from the first.
    Boolean {
        op: BoolOp,
        children: Vec<CsgNode>,
    },
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn empty() -> Aabb {
        Aabb {
            min: [f64::INFINITY; 3],
            max: [f64::NEG_INFINITY; 3],
        }
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.min[i] > self.max[i])
    }

    pub fn include(&mut self, p: &Vec3) {
        for i in 0..3 {
            self.min[i] = self.min[i].min(p[i]);
            self.max[i] = self.max[i].max(p[i]);
        }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut out = *self;
        for i in 0..3 {
            out.min[i] = out.min[i].min(other.min[i]);
            out.max[i] = out.max[i].max(other.max[i]);
        }
        out
    }

    pub fn intersection(&self, other: &Aabb) -> Aabb {
        let mut out = *self;
        for i in 0..3 {
            out.min[i] = out.min[i].max(other.min[i]);
            out.max[i] = out.max[i].min(other.max[i]);
        }
        out
    }

    pub fn center(&self) -> Vec3 {
        Vec3::new(
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        )
    }

    pub fn extent(&self) -> Vec3 {
        Vec3::new(
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        )
    }

    pub fn diagonal(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.extent().norm()
        }
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let mut out = [Vec3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            *c = Vec3::new(
                if i & 1 == 0 { self.min[0] } else { self.max[0] },
                if i & 2 == 0 { self.min[1] } else { self.max[1] },
                if i & 4 == 0 { self.min[2] } else { self.max[2] },
            );
        }
        out
    }

    pub fn transformed(&self, t: &Affine) -> Aabb {
        if self.is_empty() {
            return *self;
        }
        let mut out = Aabb::empty();
        for c in self.corners() {
            out.include(&t.apply(&c));
        }
        out
    }

    /// Parametric interval where the ray `origin + t * dir` is inside the box.
    pub fn ray_interval(&self, origin: &Vec3, dir: &Vec3) -> Option<(f64, f64)> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for i in 0..3 {
            if dir[i].abs() < 1e-300 {
                if origin[i] < self.min[i] || origin[i] > self.max[i] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[i];
            let (a, b) = (
                (self.min[i] - origin[i]) * inv,
                (self.max[i] - origin[i]) * inv,
            );
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            t0 = t0.max(a);
            t1 = t1.min(b);
        }
        (t0 <= t1).then_some((t0, t1))
    }
}

impl Primitive {
    pub fn local_bounds(&self) -> Aabb {
        match *self {
            Primitive::Cube { size, centered } => {
                let lo = if centered {
                    [-size[0] / 2.0, -size[1] / 2.0, -size[2] / 2.0]
                } else {
                    [0.0; 3]
                };
                Aabb {
                    min: lo,
                    max: [lo[0] + size[0], lo[1] + size[1], lo[2] + size[2]],
                }
            }
            Primitive::Sphere { radius } => Aabb {
                min: [-radius; 3],
                max: [radius; 3],
            },
            Primitive::Cylinder {
                height,
                r1,
                r2,
                centered,
            } => {
                let r = r1.max(r2);
                let z0 = if centered { -height / 2.0 } else { 0.0 };
                Aabb {
                    min: [-r, -r, z0],
                    max: [r, r, z0 + height],
                }
            }
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        match *self {
            Primitive::Cube { size, centered } => (0..3).all(|i| {
                let lo = if centered { -size[i] / 2.0 } else { 0.0 };
                p[i] >= lo && p[i] <= lo + size[i]
            }),
            Primitive::Sphere { radius } => p.norm_squared() <= radius * radius,
            Primitive::Cylinder {
                height,
                r1,
                r2,
                centered,
            } => {
                let z = if centered { p.z + height / 2.0 } else { p.z };
                if !(0.0..=height).contains(&z) {
                    return false;
                }
                let r = r1 + (r2 - r1) * (z / height);
                p.x * p.x + p.y * p.y <= r * r
            }
        }
    }

    /// Exact signed distance in the primitive's own frame.
    pub fn sdf(&self, p: &Vec3) -> f64 {
        match *self {
            Primitive::Cube { size, centered } => {
                let half = Vec3::new(size[0] / 2.0, size[1] / 2.0, size[2] / 2.0);
                let c = if centered { *p } else { p - half };
                let q = Vec3::new(c.x.abs() - half.x, c.y.abs() - half.y, c.z.abs() - half.z);
                let outside = Vec3::new(q.x.max(0.0), q.y.max(0.0), q.z.max(0.0)).norm();
                outside + q.x.max(q.y).max(q.z).min(0.0)
            }
            Primitive::Sphere { radius } => p.norm() - radius,
            Primitive::Cylinder {
                height,
                r1,
                r2,
                centered,
            } => {
                // capped cone, centered on the origin with half-height h
                let h = height / 2.0;
                let z = if centered { p.z } else { p.z - h };
                let qx = (p.x * p.x + p.y * p.y).sqrt();
                let qy = z;
                let (k1x, k1y) = (r2, h);
                let (k2x, k2y) = (r2 - r1, 2.0 * h);
                let cap_r = if qy < 0.0 { r1 } else { r2 };
                let (cax, cay) = (qx - qx.min(cap_r), qy.abs() - h);
                let t = (((k1x - qx) * k2x + (k1y - qy) * k2y) / (k2x * k2x + k2y * k2y))
                    .clamp(0.0, 1.0);
                let (cbx, cby) = (qx - k1x + k2x * t, qy - k1y + k2y * t);
                let s = if cbx < 0.0 && cay < 0.0 { -1.0 } else { 1.0 };
                s * (cax * cax + cay * cay).min(cbx * cbx + cby * cby).sqrt()
            }
        }
    }

    pub fn surface_area(&self) -> f64 {
        use std::f64::consts::PI;
        match *self {
            Primitive::Cube {
                size: [x, y, z], ..
            } => 2.0 * (x * y + y * z + x * z),
            Primitive::Sphere { radius } => 4.0 * PI * radius * radius,
            Primitive::Cylinder { height, r1, r2, .. } => {
                let slant = (height * height + (r1 - r2) * (r1 - r2)).sqrt();
                PI * (r1 + r2) * slant + PI * (r1 * r1 + r2 * r2)
            }
        }
    }

    pub fn volume(&self) -> f64 {
        use std::f64::consts::PI;
        match *self {
            Primitive::Cube {
                size: [x, y, z], ..
            } => x * y * z,
            Primitive::Sphere { radius } => 4.0 / 3.0 * PI * radius.powi(3),
            Primitive::Cylinder { height, r1, r2, .. } => {
                PI * height / 3.0 * (r1 * r1 + r1 * r2 + r2 * r2)
            }
        }
    }
}

impl CsgNode {
    pub fn cube(size: [f64; 3], centered: bool) -> CsgNode {
        CsgNode::Primitive(Primitive::Cube { size, centered })
    }

    pub fn sphere(radius: f64) -> CsgNode {
        CsgNode::Primitive(Primitive::Sphere { radius })
    }

    pub fn cylinder(height: f64, r1: f64, r2: f64, centered: bool) -> CsgNode {
        CsgNode::Primitive(Primitive::Cylinder {
            height,
            r1,
            r2,
            centered,
        })
    }

    pub fn transformed(self, transform: Affine) -> CsgNode {
        CsgNode::Transform {
            transform,
            child: Box::new(self),
        }
    }

    pub fn translated(self, v: [f64; 3]) -> CsgNode {
        self.transformed(Affine::translation(Vec3::from(v)))
    }

    pub fn boolean(op: BoolOp, children: Vec<CsgNode>) -> CsgNode {
        CsgNode::Boolean { op, children }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        match self {
            CsgNode::Primitive(prim) => prim.contains(p),
            CsgNode::Transform { transform, child } => child.contains(&transform.apply_inverse(p)),
            CsgNode::Boolean { op, children } => match op {
                BoolOp::Union => children.iter().any(|c| c.contains(p)),
                BoolOp::Intersection => children.iter().all(|c| c.contains(p)),
                BoolOp::Difference => match children.split_first() {
                    Some((first, rest)) => first.contains(p) && !rest.iter().any(|c| c.contains(p)),
                    None => false,
                },
            },
        }
    }

    /// Signed-distance lower bound: exact at leaves, min/max at booleans,
    /// scaled by the minimum stretch through transforms.
    pub fn pseudo_sdf(&self, p: &Vec3) -> f64 {
        match self {
            CsgNode::Primitive(prim) => prim.sdf(p),
            CsgNode::Transform { transform, child } => {
                child.pseudo_sdf(&transform.apply_inverse(p)) * transform.min_stretch
            }
            CsgNode::Boolean { op, children } => match op {
                BoolOp::Union => children
                    .iter()
                    .map(|c| c.pseudo_sdf(p))
                    .fold(f64::INFINITY, f64::min),
                BoolOp::Intersection => children
                    .iter()
                    .map(|c| c.pseudo_sdf(p))
                    .fold(f64::NEG_INFINITY, f64::max),
                BoolOp::Difference => match children.split_first() {
                    Some((first, rest)) => rest
                        .iter()
                        .map(|c| -c.pseudo_sdf(p))
                        .fold(first.pseudo_sdf(p), f64::max),
                    None => f64::INFINITY,
                },
            },
        }
    }

    /// Conservative world-space bounds.
    pub fn bounds(&self) -> Aabb {
        match self {
            CsgNode::Primitive(prim) => prim.local_bounds(),
            CsgNode::Transform { transform, child } => child.bounds().transformed(transform),
            CsgNode::Boolean { op, children } => match op {
                BoolOp::Union => children
                    .iter()
                    .fold(Aabb::empty(), |acc, c| acc.union(&c.bounds())),
                BoolOp::Intersection => {
                    let mut it = children.iter();
                    let first = it.next().map_or(Aabb::empty(), CsgNode::bounds);
                    it.fold(first, |acc, c| acc.intersection(&c.bounds()))
                }
                BoolOp::Difference => children.first().map_or(Aabb::empty(), CsgNode::bounds),
            },
        }
    }

    /// Every primitive leaf with its accumulated world transform, in
    /// depth-first order.
    pub fn leaves(&self) -> Vec<(Primitive, Affine)> {
        fn go(n: &CsgNode, acc: &Affine, out: &mut Vec<(Primitive, Affine)>) {
            match n {
                CsgNode::Primitive(p) => out.push((*p, acc.clone())),
                CsgNode::Transform { transform, child } => go(child, &transform.then(acc), out),
                CsgNode::Boolean { children, .. } => children.iter().for_each(|c| go(c, acc, out)),
            }
        }
        let mut out = Vec::new();
        go(self, &Affine::identity(), &mut out);
        out
    }
}
