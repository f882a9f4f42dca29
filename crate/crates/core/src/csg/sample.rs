//! Surface point sampling and point-cloud normalization.
//!
//! Candidates are drawn on every leaf surface, mapped to world space, and
//! kept only where the whole tree's pseudo-SDF is near zero, which discards
//! faces buried inside unions or carved away by differences. Each leaf has
//! its own counter-addressed random stream, so the result depends only on
//! the seed and never on how the work is scheduled.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use rand::{seq::index, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Affine, CsgNode, Primitive, Vec3};

pub const DEFAULT_POINTS: usize = 2048;
/// Boundary tolerance as a fraction of the bounding-box diagonal.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;
const MAX_ROUNDS: u32 = 6;
/// Candidates per requested point in the first round.
const OVERSAMPLE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("no surface points survive (empty or degenerate solid)")]
    DegenerateGeometry,
    #[error("point cloud has zero extent")]
    ZeroExtent,
}

/// Maps raw coordinates to normalized ones: `(p - center) * scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub center: [f64; 3],
    pub scale: f64,
}

impl Normalization {
    pub fn identity() -> Normalization {
        Normalization {
            center: [0.0; 3],
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: &[f64; 3]) -> [f64; 3] {
        [
            (p[0] - self.center[0]) * self.scale,
            (p[1] - self.center[1]) * self.scale,
            (p[2] - self.center[2]) * self.scale,
        ]
    }

    /// The frame that first applies `self`, then `next`.
    fn compose(&self, next: &Normalization) -> Normalization {
        Normalization {
            center: [
                self.center[0] + next.center[0] / self.scale,
                self.center[1] + next.center[1] / self.scale,
                self.center[2] + next.center[2] / self.scale,
            ],
            scale: self.scale * next.scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<[f64; 3]>,
    /// Frame that produced `points` from raw world coordinates.
    pub normalization: Normalization,
}

impl PointCloud {
    pub fn raw(points: Vec<[f64; 3]>) -> PointCloud {
        PointCloud {
            points,
            normalization: Normalization::identity(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Re-expresses the cloud in another cloud's frame, so that several
    /// clouds can be compared in one shared normalized space.
    pub fn in_frame(&self, frame: &Normalization) -> PointCloud {
        let inv = self.normalization;
        let points = self
            .points
            .iter()
            .map(|p| {
                let raw = [
                    p[0] / inv.scale + inv.center[0],
                    p[1] / inv.scale + inv.center[1],
                    p[2] / inv.scale + inv.center[2],
                ];
                frame.apply(&raw)
            })
            .collect();
        PointCloud {
            points,
            normalization: *frame,
        }
    }

    /// Axis-aligned extent as (min, max).
    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.points {
            for i in 0..3 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        (lo, hi)
    }
}

/// Centers the cloud on its bounding box and scales the longest edge to 1.
pub fn normalize(cloud: &PointCloud) -> Result<PointCloud, SampleError> {
    if cloud.is_empty() {
        return Err(SampleError::ZeroExtent);
    }
    let (lo, hi) = cloud.bounds();
    let longest = (0..3).map(|i| hi[i] - lo[i]).fold(0.0, f64::max);
    if !(longest > 0.0) || !longest.is_finite() {
        return Err(SampleError::ZeroExtent);
    }
    let step = Normalization {
        center: [
            (lo[0] + hi[0]) / 2.0,
            (lo[1] + hi[1]) / 2.0,
            (lo[2] + hi[2]) / 2.0,
        ],
        scale: 1.0 / longest,
    };
    let points = cloud.points.iter().map(|p| step.apply(p)).collect();
    Ok(PointCloud {
        points,
        normalization: cloud.normalization.compose(&step),
    })
}

struct Leaf {
    prim: Primitive,
    transform: Affine,
    /// |det A|, the volume stretch of the linear part.
    det: f64,
    /// Inverse transpose of the linear part, which carries normals.
    normal_map: Matrix3<f64>,
    /// Upper bound on the area stretch: |det A| / sigma_min(A).
    max_area_stretch: f64,
    weight: f64,
}

/// Samples `n` points on the boundary of `node`, in world coordinates.
pub fn sample_surface(node: &CsgNode, n: usize, seed: u64) -> Result<PointCloud, SampleError> {
    let bounds = node.bounds();
    if bounds.is_empty() || n == 0 {
        return Err(SampleError::DegenerateGeometry);
    }
    let eps = BOUNDARY_TOLERANCE * bounds.diagonal();
    let leaves: Vec<Leaf> = node
        .leaves()
        .into_iter()
        .map(|(prim, transform)| {
            let lin = transform.linear();
            let det = lin.determinant().abs();
            let normal_map = lin.try_inverse().unwrap_or_else(Matrix3::zeros).transpose();
            let max_area_stretch = det / transform.min_stretch;
            let weight = prim.surface_area() * max_area_stretch;
            Leaf {
                prim,
                transform,
                det,
                normal_map,
                max_area_stretch,
                weight,
            }
        })
        .collect();
    let total: f64 = leaves.iter().map(|l| l.weight).sum();
    if !(total > 0.0) {
        return Err(SampleError::DegenerateGeometry);
    }

    let mut kept: Vec<[f64; 3]> = Vec::new();
    for round in 0..MAX_ROUNDS {
        let budget = (OVERSAMPLE * n) as f64 * f64::from(1u32 << round);
        let per_leaf: Vec<Vec<[f64; 3]>> = leaves
            .par_iter()
            .enumerate()
            .map(|(i, leaf)| {
                let count = (budget * leaf.weight / total).ceil() as usize;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((u64::from(round) << 32) | i as u64);
                let mut out = Vec::new();
                for _ in 0..count {
                    let (local, normal) = surface_point(&leaf.prim, &mut rng);
                    let accept: f64 = rng.gen();
                    // thin the stretched-area density back to uniform
                    let stretch = leaf.det * (leaf.normal_map * normal).norm();
                    if accept * leaf.max_area_stretch > stretch {
                        continue;
                    }
                    let world = leaf.transform.apply(&local);
                    if node.pseudo_sdf(&world).abs() <= eps {
                        out.push([world.x, world.y, world.z]);
                    }
                }
                out
            })
            .collect();
        kept.extend(per_leaf.into_iter().flatten());
        if kept.len() >= n {
            break;
        }
    }
    if kept.is_empty() {
        return Err(SampleError::DegenerateGeometry);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let points = if kept.len() >= n {
        let mut idx = index::sample(&mut rng, kept.len(), n).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| kept[i]).collect()
    } else {
        let mut idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..kept.len())).collect();
        idx.sort_unstable();
        idx.into_iter().map(|i| kept[i]).collect()
    };
    Ok(PointCloud::raw(points))
}

/// Area-uniform point on a primitive's surface in its local frame, with the
/// outward unit normal. Always consumes three uniforms.
fn surface_point(prim: &Primitive, rng: &mut ChaCha8Rng) -> (Vec3, Vec3) {
    let (u0, u1, u2): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    match *prim {
        Primitive::Cube {
            size: [sx, sy, sz],
            centered,
        } => {
            let areas = [sy * sz, sx * sz, sx * sy];
            let total = areas.iter().sum::<f64>();
            let mut pick = u0 * 2.0 * total;
            let mut face = 5;
            for f in 0..6 {
                if pick < areas[f / 2] {
                    face = f;
                    break;
                }
                pick -= areas[f / 2];
            }
            let axis = face / 2;
            let high = face % 2 == 1;
            let size = [sx, sy, sz];
            let lo = if centered {
                [-sx / 2.0, -sy / 2.0, -sz / 2.0]
            } else {
                [0.0; 3]
            };
            let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
            let mut p = Vec3::zeros();
            p[axis] = lo[axis] + if high { size[axis] } else { 0.0 };
            p[a] = lo[a] + u1 * size[a];
            p[b] = lo[b] + u2 * size[b];
            let mut n = Vec3::zeros();
            n[axis] = if high { 1.0 } else { -1.0 };
            (p, n)
        }
        Primitive::Sphere { radius } => {
            let z = 1.0 - 2.0 * u1;
            let s = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * PI * u2;
            let n = Vec3::new(s * phi.cos(), s * phi.sin(), z);
            (n * radius, n)
        }
        Primitive::Cylinder {
            height,
            r1,
            r2,
            centered,
        } => {
            let z0 = if centered { -height / 2.0 } else { 0.0 };
            let slant = (height * height + (r1 - r2) * (r1 - r2)).sqrt();
            let side = PI * (r1 + r2) * slant;
            let (bottom, top) = (PI * r1 * r1, PI * r2 * r2);
            let pick = u0 * (side + bottom + top);
            let theta = 2.0 * PI * u2;
            let (c, s) = (theta.cos(), theta.sin());
            if pick < bottom {
                let r = r1 * u1.sqrt();
                (Vec3::new(r * c, r * s, z0), -Vec3::z())
            } else if pick < bottom + top {
                let r = r2 * u1.sqrt();
                (Vec3::new(r * c, r * s, z0 + height), Vec3::z())
            } else {
                // density along the axis is proportional to the local radius
                let a = (r2 - r1) / 2.0;
                let m = (r1 + r2) / 2.0;
                let t = 2.0 * u1 * m / (r1 + (r1 * r1 + 4.0 * a * u1 * m).max(0.0).sqrt());
                let r = r1 + (r2 - r1) * t;
                let n = Vec3::new(height * c, height * s, r1 - r2) / slant;
                (Vec3::new(r * c, r * s, z0 + t * height), n)
            }
        }
    }
}
