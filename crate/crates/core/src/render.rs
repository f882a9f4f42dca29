//! Silhouette and depth rendering by sphere tracing the pseudo-SDF.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csg::{Aabb, CsgNode, Vec3};

pub const MAX_STEPS: usize = 256;
/// Hit threshold as a fraction of the scene's bounding-box diagonal.
pub const HIT_TOLERANCE: f64 = 1e-4;
pub const CAMERA_DISTANCE: f64 = 2.2;
pub const DEFAULT_FOV: f64 = 40.0;
pub const ELEVATIONS: [f64; 3] = [20.0, 35.0, 50.0];
pub const MIN_AZIMUTH_GAP: f64 = PI / 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub eye: [f64; 3],
    pub target: [f64; 3],
    pub up: [f64; 3],
    /// Degrees.
    pub vertical_fov: f64,
    pub width: u32,
    pub height: u32,
}

impl Camera {
    /// Orbit camera around `bounds`: looks at the box center from
    /// `CAMERA_DISTANCE` diagonals away. Angles in radians.
    pub fn orbit(bounds: &Aabb, azimuth: f64, elevation: f64, size: u32) -> Camera {
        let target = if bounds.is_empty() {
            Vec3::zeros()
        } else {
            bounds.center()
        };
        let diag = bounds.diagonal();
        let dist = CAMERA_DISTANCE * if diag > 0.0 { diag } else { 1.0 };
        let dir = Vec3::new(
            elevation.cos() * azimuth.cos(),
            elevation.cos() * azimuth.sin(),
            elevation.sin(),
        );
        let eye = target + dir * dist;
        Camera {
            eye: eye.into(),
            target: target.into(),
            up: [0.0, 0.0, 1.0],
            vertical_fov: DEFAULT_FOV,
            width: size,
            height: size,
        }
    }

    /// Unit ray direction through the center of pixel (col, row); row 0 is
    /// the top of the image.
    fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let forward = (Vec3::from(self.target) - Vec3::from(self.eye)).normalize();
        let mut up = Vec3::from(self.up);
        if forward.cross(&up).norm() < 1e-9 {
            up = if forward.x.abs() < 0.9 {
                Vec3::x()
            } else {
                Vec3::y()
            };
        }
        let right = forward.cross(&up).normalize();
        let true_up = right.cross(&forward);
        (forward, right, true_up)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewSet {
    pub cameras: Vec<Camera>,
    /// Radians.
    pub azimuths: Vec<f64>,
    /// Radians.
    pub elevations: Vec<f64>,
}

/// Smallest circular gap between any two azimuths.
pub fn min_circular_gap(azimuths: &[f64]) -> f64 {
    let mut min = f64::INFINITY;
    for (i, a) in azimuths.iter().enumerate() {
        for b in &azimuths[i + 1..] {
            let d = (a - b).rem_euclid(TAU);
            min = min.min(d.min(TAU - d));
        }
    }
    min
}

pub fn azimuths_ok(azimuths: &[f64]) -> bool {
    min_circular_gap(azimuths) > MIN_AZIMUTH_GAP
}

/// Three azimuths drawn uniformly until pairwise separated, paired with the
/// fixed elevations in order, aimed at `bounds`.
pub fn sample_views(seed: u64, bounds: &Aabb, size: u32) -> ViewSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let azimuths = loop {
        let az: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..TAU)).collect();
        if azimuths_ok(&az) {
            break az;
        }
    };
    let elevations: Vec<f64> = ELEVATIONS.iter().map(|e| e.to_radians()).collect();
    let cameras = azimuths
        .iter()
        .zip(&elevations)
        .map(|(a, e)| Camera::orbit(bounds, *a, *e, size))
        .collect();
    ViewSet {
        cameras,
        azimuths,
        elevations,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    /// Row-major hit mask.
    pub silhouette: Vec<bool>,
    /// Ray parameter at the hit; `+inf` on a miss.
    pub depth: Vec<f64>,
}

impl Raster {
    pub fn get(&self, col: u32, row: u32) -> bool {
        self.silhouette[(row * self.width + col) as usize]
    }

    pub fn coverage(&self) -> f64 {
        self.silhouette.iter().filter(|h| **h).count() as f64 / self.silhouette.len() as f64
    }

    /// 8-bit image: object black on a white background.
    pub fn silhouette_bytes(&self) -> Vec<u8> {
        self.silhouette
            .iter()
            .map(|h| if *h { 0 } else { 255 })
            .collect()
    }

    /// 16-bit depth over [near, far]; misses map to 65535.
    pub fn depth_u16(&self, near: f64, far: f64) -> Vec<u16> {
        let span = (far - near).max(f64::MIN_POSITIVE);
        self.depth
            .iter()
            .map(|d| {
                if d.is_finite() {
                    ((d - near) / span * 65534.0).round().clamp(0.0, 65534.0) as u16
                } else {
                    u16::MAX
                }
            })
            .collect()
    }

    pub fn from_silhouette_bytes(width: u32, height: u32, bytes: &[u8]) -> Raster {
        Raster {
            width,
            height,
            silhouette: bytes.iter().map(|b| *b < 128).collect(),
            depth: bytes
                .iter()
                .map(|b| if *b < 128 { 0.0 } else { f64::INFINITY })
                .collect(),
        }
    }
}

/// Sphere-traces one ray per pixel against the pseudo-SDF inside the scene's
/// bounding box. A ray that exhausts its step budget while still inside the
/// box is counted as a hit: it is creeping along a surface closer than any
/// step it can take.
pub fn render(node: &CsgNode, camera: &Camera) -> Raster {
    let (w, h) = (camera.width, camera.height);
    let bounds = node.bounds();
    let n = (w * h) as usize;
    if bounds.is_empty() {
        return Raster {
            width: w,
            height: h,
            silhouette: vec![false; n],
            depth: vec![f64::INFINITY; n],
        };
    }
    let eps = HIT_TOLERANCE * bounds.diagonal();
    let mut padded = bounds;
    for i in 0..3 {
        padded.min[i] -= 2.0 * eps;
        padded.max[i] += 2.0 * eps;
    }
    let (forward, right, up) = camera.basis();
    let eye = Vec3::from(camera.eye);
    let half = (camera.vertical_fov.to_radians() / 2.0).tan();
    let aspect = f64::from(w) / f64::from(h);

    let depth: Vec<f64> = (0..h)
        .into_par_iter()
        .flat_map_iter(|row| {
            let y = (1.0 - 2.0 * (f64::from(row) + 0.5) / f64::from(h)) * half;
            (0..w).map(move |col| {
                let x = (2.0 * (f64::from(col) + 0.5) / f64::from(w) - 1.0) * half * aspect;
                let dir = (forward + right * x + up * y).normalize();
                trace(node, &padded, &eye, &dir, eps)
            })
        })
        .collect();
    let silhouette = depth.iter().map(|d| d.is_finite()).collect();
    Raster {
        width: w,
        height: h,
        silhouette,
        depth,
    }
}

fn trace(node: &CsgNode, bounds: &Aabb, origin: &Vec3, dir: &Vec3, eps: f64) -> f64 {
    let Some((t0, t1)) = bounds.ray_interval(origin, dir) else {
        return f64::INFINITY;
    };
    if t1 < 0.0 {
        return f64::INFINITY;
    }
    let mut t = t0.max(0.0);
    for _ in 0..MAX_STEPS {
        let d = node.pseudo_sdf(&(origin + dir * t));
        if d < eps {
            return t;
        }
        t += d;
        if t > t1 {
            return f64::INFINITY;
        }
    }
    t
}

/// Halves a silhouette by 2x2 blocks; a block is set when at least two of its
/// pixels are set.
pub fn downsample(r: &Raster) -> Raster {
    let (w, h) = (r.width / 2, r.height / 2);
    let mut silhouette = Vec::with_capacity((w * h) as usize);
    for row in 0..h {
        for col in 0..w {
            let n = [(0, 0), (1, 0), (0, 1), (1, 1)]
                .iter()
                .filter(|(dc, dr)| r.get(2 * col + dc, 2 * row + dr))
                .count();
            silhouette.push(n >= 2);
        }
    }
    let depth = silhouette
        .iter()
        .map(|s| if *s { 0.0 } else { f64::INFINITY })
        .collect();
    Raster {
        width: w,
        height: h,
        silhouette,
        depth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csg::{evaluate_source, BoolOp};

    fn axis_camera(size: u32) -> Camera {
        Camera {
            eye: [5.0, 0.0, 0.0],
            target: [0.0; 3],
            up: [0.0, 0.0, 1.0],
            vertical_fov: DEFAULT_FOV,
            width: size,
            height: size,
        }
    }

    #[test]
    fn sphere_silhouette_matches_disc() {
        let cam = axis_camera(256);
        let r = render(&CsgNode::sphere(1.0), &cam);
        // analytic: a ray hits the sphere iff its angle to the axis is below asin(r/d)
        let (forward, right, up) = cam.basis();
        let half = (DEFAULT_FOV.to_radians() / 2.0).tan();
        let limit = (1.0f64 / 5.0).asin();
        let (mut inter, mut uni) = (0, 0);
        for row in 0..256 {
            for col in 0..256 {
                let x = (2.0 * (col as f64 + 0.5) / 256.0 - 1.0) * half;
                let y = (1.0 - 2.0 * (row as f64 + 0.5) / 256.0) * half;
                let dir = (forward + right * x + up * y).normalize();
                let inside = dir.dot(&forward).acos() < limit;
                let hit = r.get(col, row);
                inter += (inside && hit) as u32;
                uni += (inside || hit) as u32;
            }
        }
        let iou = f64::from(inter) / f64::from(uni);
        assert!(iou >= 0.98, "{iou}");
    }

    #[test]
    fn geometry_behind_camera_is_blank() {
        let cam = Camera {
            eye: [5.0, 0.0, 0.0],
            target: [10.0, 0.0, 0.0],
            ..axis_camera(32)
        };
        let r = render(&CsgNode::sphere(1.0), &cam);
        assert!(r.silhouette.iter().all(|h| !h));
    }

    #[test]
    fn deterministic() {
        let node = evaluate_source(
            "difference() { cube(2, center=true); cylinder(h=3, r=0.5, center=true); }",
        )
        .unwrap();
        let views = sample_views(4, &node.bounds(), 48);
        assert_eq!(views, sample_views(4, &node.bounds(), 48));
        assert_eq!(
            render(&node, &views.cameras[0]),
            render(&node, &views.cameras[0])
        );
    }

    #[test]
    fn views_are_separated() {
        for seed in 0..200 {
            let v = sample_views(
                seed,
                &Aabb {
                    min: [0.0; 3],
                    max: [1.0; 3],
                },
                16,
            );
            assert_eq!(v.cameras.len(), 3);
            assert!(min_circular_gap(&v.azimuths) > PI / 10.0);
        }
        assert!(!azimuths_ok(&[0.0, 0.1, 3.0]));
        assert!(!azimuths_ok(&[0.05, TAU - 0.05, 3.0]));
    }

    #[test]
    fn hollow_box_sees_outer_shell() {
        let node = CsgNode::boolean(
            BoolOp::Difference,
            vec![CsgNode::cube([2.0; 3], true), CsgNode::sphere(0.9)],
        );
        let r = render(&node, &axis_camera(64));
        assert!(r.get(32, 32));
        assert!(r.depth[32 * 64 + 32] > 3.9 && r.depth[32 * 64 + 32] < 4.01);
    }

    #[test]
    fn depth_encoding() {
        let r = Raster {
            width: 2,
            height: 1,
            silhouette: vec![true, false],
            depth: vec![2.0, f64::INFINITY],
        };
        assert_eq!(r.depth_u16(1.0, 3.0), vec![32767, 65535]);
        assert_eq!(r.silhouette_bytes(), vec![0, 255]);
    }
}
