//! Static 3-d tree for exact nearest-neighbor distance queries.

/// Implicit balanced tree: the median of each slice is its root, split on
/// `depth % 3`.
pub struct KdTree {
    points: Vec<[f64; 3]>,
}

impl KdTree {
    pub fn new(points: &[[f64; 3]]) -> KdTree {
        let mut points = points.to_vec();
        build(&mut points, 0);
        KdTree { points }
    }

    /// Squared distance from `q` to its nearest point; `+inf` when empty.
    pub fn nearest_sq(&self, q: &[f64; 3]) -> f64 {
        let mut best = f64::INFINITY;
        search(&self.points, 0, q, &mut best);
        best
    }
}

fn build(pts: &mut [[f64; 3]], depth: usize) {
    if pts.len() <= 1 {
        return;
    }
    let axis = depth % 3;
    let mid = pts.len() / 2;
    pts.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
    let (left, right) = pts.split_at_mut(mid);
    build(left, depth + 1);
    build(&mut right[1..], depth + 1);
}

fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (dx, dy, dz) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    dx * dx + dy * dy + dz * dz
}

fn search(pts: &[[f64; 3]], depth: usize, q: &[f64; 3], best: &mut f64) {
    if pts.is_empty() {
        return;
    }
    let axis = depth % 3;
    let mid = pts.len() / 2;
    let p = &pts[mid];
    *best = best.min(dist_sq(p, q));
    let diff = q[axis] - p[axis];
    let (near, far) = if diff < 0.0 {
        (&pts[..mid], &pts[mid + 1..])
    } else {
        (&pts[mid + 1..], &pts[..mid])
    };
    search(near, depth + 1, q, best);
    if diff * diff <= *best {
        search(far, depth + 1, q, best);
    }
}
