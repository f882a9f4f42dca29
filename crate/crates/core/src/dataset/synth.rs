//! Seeded procedural source programs: a base plate with parts on it.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{parse, Program};
use crate::csg::{evaluate, sample_surface};

pub const MIN_COMPLEXITY: u8 = 1;
pub const MAX_COMPLEXITY: u8 = 5;
const CHECK_POINTS: usize = 256;

/// Geometry-block count range per complexity level.
fn block_range(complexity: u8) -> (usize, usize) {
    match complexity {
        1 => (1, 1),
        2 => (2, 3),
        3 => (3, 5),
        4 => (4, 8),
        _ => (6, 12),
    }
}

fn macro_count(complexity: u8) -> usize {
    match complexity {
        1 => 1,
        2 | 3 => 2,
        _ => 3,
    }
}

/// Generates a program that compiles and has a samplable surface. Draws
/// that fail either check are discarded and redrawn from the next stream.
pub fn generate_synthetic_program(seed: u64, complexity: u8) -> Program {
    let complexity = complexity.clamp(MIN_COMPLEXITY, MAX_COMPLEXITY);
    for stream in 0.. {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let text = Builder::new(&mut rng, complexity).build();
        let Ok(program) = parse(&text) else { continue };
        let Ok(node) = evaluate(&program) else {
            continue;
        };
        if sample_surface(&node, CHECK_POINTS, seed).is_ok() {
            return program;
        }
    }
    unreachable!("stream space is unbounded")
}

fn r1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

struct Builder<'a> {
    rng: &'a mut ChaCha8Rng,
    complexity: u8,
    out: String,
    w: f64,
    d: f64,
    h: f64,
    r: f64,
    macros: usize,
    radius_used: bool,
}

impl<'a> Builder<'a> {
    fn new(rng: &'a mut ChaCha8Rng, complexity: u8) -> Self {
        let w = r1(rng.gen_range(10.0..24.0));
        let d = r1(w * rng.gen_range(0.5..0.9));
        let h = r1(rng.gen_range(2.0..5.0));
        let r = r1(rng.gen_range(1.2..3.0));
        Builder {
            rng,
            complexity,
            out: String::new(),
            w,
            d,
            h,
            r,
            macros: macro_count(complexity),
            radius_used: false,
        }
    }

    fn build(mut self) -> String {
        let mut head = format!("width = {};\n", self.w);
        if self.macros >= 2 {
            writeln!(head, "thick = {};", self.h).unwrap();
        }
        if self.macros >= 3 {
            writeln!(head, "radius = {};", self.r).unwrap();
        }
        self.out = head;

        let (lo, hi) = block_range(self.complexity);
        let n = self.rng.gen_range(lo..=hi);
        let module = self.complexity >= 5 && self.rng.gen_bool(0.5);
        if module {
            self.out
                .push_str("module post(len) {\n  cylinder(h = len, r = radius);\n}\n");
            self.radius_used = true;
        }

        self.plate();
        let mut kinds = Vec::new();
        for i in 1..n {
            // the first slots guarantee the features each level requires
            let kind = match i {
                1 if self.complexity >= 3 => Part::Boolean,
                2 if self.complexity >= 4 => Part::Loop,
                3 if module => Part::Post,
                _ => self.random_part(module),
            };
            kinds.push(kind);
        }
        if self.macros >= 3 && !self.radius_used && !kinds.is_empty() {
            let last = kinds.len() - 1;
            kinds[last] = Part::Cylinder;
        }
        for k in kinds {
            self.part(k);
        }
        self.out
    }

    fn random_part(&mut self, module: bool) -> Part {
        let mut pool = vec![Part::Cube, Part::Cylinder, Part::Sphere, Part::Tilted];
        if self.complexity >= 3 {
            pool.push(Part::Boolean);
        }
        if self.complexity >= 4 {
            pool.push(Part::Loop);
        }
        if module {
            pool.push(Part::Post);
        }
        pool[self.rng.gen_range(0..pool.len())]
    }

    fn thick(&self) -> String {
        if self.macros >= 2 {
            "thick".into()
        } else {
            self.h.to_string()
        }
    }

    fn radius(&mut self) -> String {
        if self.macros >= 3 {
            self.radius_used = true;
            "radius".into()
        } else {
            self.r.to_string()
        }
    }

    /// Height of the plate's top face.
    fn top(&self) -> f64 {
        self.h
    }

    fn plate(&mut self) {
        let depth = r1(self.d / self.w);
        let line = format!("cube([width, width * {depth}, {}]);\n", self.thick());
        self.out.push_str(&line);
    }

    fn spot(&mut self) -> (f64, f64) {
        (
            r1(self.rng.gen_range(0.15..0.85) * self.w),
            r1(self.rng.gen_range(0.15..0.85) * self.d),
        )
    }

    fn size(&mut self, lo: f64, hi: f64) -> f64 {
        r1(self.rng.gen_range(lo..hi))
    }

    fn part(&mut self, kind: Part) {
        let (x, y) = self.spot();
        let z = self.top();
        let line = match kind {
            Part::Cube => {
                let (a, b, c) = (
                    self.size(1.5, 5.0),
                    self.size(1.5, 5.0),
                    self.size(1.5, 6.0),
                );
                format!(
                    "translate([{}, {}, {z}]) cube([{a}, {b}, {c}]);\n",
                    r1(x - a / 2.0),
                    r1(y - b / 2.0)
                )
            }
            Part::Cylinder => {
                let h = self.size(2.0, 8.0);
                let r = self.radius();
                format!("translate([{x}, {y}, {z}]) cylinder(h = {h}, r = {r});\n")
            }
            Part::Sphere => {
                let r = self.size(1.0, 3.0);
                format!(
                    "translate([{x}, {y}, {}]) sphere(r = {r});\n",
                    r1(z + r * 0.5)
                )
            }
            Part::Tilted => {
                let (h, r) = (self.size(3.0, 8.0), self.size(0.6, 1.6));
                let ang = [30, 45, 60, 90][self.rng.gen_range(0..4)];
                format!(
                    "translate([{x}, {y}, {}]) rotate([{ang}, 0, 0]) cylinder(h = {h}, r = {r}, center = true);\n",
                    r1(z + r)
                )
            }
            Part::Post => {
                let len = self.size(3.0, 9.0);
                format!("translate([{x}, {y}, {z}]) post({len});\n")
            }
            Part::Boolean => self.boolean(x, y, z),
            Part::Loop => self.repeat(z),
        };
        self.out.push_str(&line);
    }

    fn boolean(&mut self, x: f64, y: f64, z: f64) -> String {
        let s = self.size(3.0, 6.0);
        let (cx, cy) = (r1(x - s / 2.0), r1(y - s / 2.0));
        match self.rng.gen_range(0..3) {
            0 => {
                let r = r1(s * self.rng.gen_range(0.2..0.35));
                format!(
                    "difference() {{\n  translate([{cx}, {cy}, {z}]) cube([{s}, {s}, {s}]);\n  \
                     translate([{x}, {y}, {z}]) cylinder(h = {}, r = {r});\n}}\n",
                    r1(s * 3.0)
                )
            }
            1 => {
                let r = self.radius();
                let h = self.size(1.0, 3.0);
                format!(
                    "union() {{\n  translate([{x}, {y}, {z}]) cylinder(h = {h}, r = {r} * 1.5);\n  \
                     translate([{x}, {y}, {}]) cylinder(h = {}, r = {r});\n}}\n",
                    r1(z + h),
                    r1(h * 2.0)
                )
            }
            _ => {
                // cube corners poke out of the sphere, so the result is not either operand
                let r = r1(s * 0.65);
                format!(
                    "intersection() {{\n  translate([{x}, {y}, {}]) cube([{s}, {s}, {s}], center = true);\n  \
                     translate([{x}, {y}, {}]) sphere(r = {r});\n}}\n",
                    r1(z + s / 2.0),
                    r1(z + s / 2.0)
                )
            }
        }
    }

    fn repeat(&mut self, z: f64) -> String {
        let count = self.rng.gen_range(2..=4);
        let gap = r1(self.w / (count as f64 + 1.0));
        let y = r1(self.rng.gen_range(0.2..0.8) * self.d);
        let s = r1(gap * self.rng.gen_range(0.3..0.6));
        if self.rng.gen_bool(0.5) {
            format!(
                "for (i = [1 : {count}]) translate([i * {gap} - {}, {}, {z}]) cube([{s}, {s}, {s}]);\n",
                r1(s / 2.0),
                r1(y - s / 2.0)
            )
        } else {
            let xs: Vec<String> = (1..=count)
                .map(|i| r1(i as f64 * gap).to_string())
                .collect();
            let r = r1(s / 2.0);
            format!(
                "for (x = [{}]) translate([x, {y}, {z}]) cylinder(h = {}, r = {r});\n",
                xs.join(", "),
                self.size(2.0, 6.0)
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Part {
    Cube,
    Cylinder,
    Sphere,
    Tilted,
    Post,
    Boolean,
    Loop,
}
