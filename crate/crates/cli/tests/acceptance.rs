//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runtime limits are part of the criteria they belong to.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scad_review::ast::{parse, print, Program};
use scad_review::csg::{
    dequantize_value, evaluate, evaluate_source, normalize, quantize_value, sample_surface,
    PointCloud, Vec3, DEFAULT_POINTS,
};
use scad_review::dataset::generate_synthetic_program;
use scad_review::metrics::{chamfer, invalid_ratio, jsd, mmd};
use scad_review::mutate::{applicable_types, mutate, ErrorType, MutateError};
use scad_review::render::{render, Camera, DEFAULT_FOV};
use scad_review::review::{
    build_dpo_pairs, diagnostic_reward, pointcloud_reward, Candidate, FeedbackRecord, PairMode,
    ScoredCandidate,
};
use scad_review::segment::{annotate, segment};
use serde_json::Value;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn synthetic(seed: u64) -> Program {
    generate_synthetic_program(seed, 1 + (seed % 5) as u8)
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
    PointCloud::raw(
        (0..n)
            .map(|_| [0, 1, 2].map(|_| rng.gen_range(-0.5..0.5)))
            .collect(),
    )
}

// 1 -------------------------------------------------------------------------

fn metric_formulas() -> Check {
    let cd = chamfer(
        &PointCloud::raw(vec![[0.0; 3]]),
        &PointCloud::raw(vec![[1.0, 0.0, 0.0]]),
    )
    .unwrap();
    ensure(cd == 2.0, || format!("CD({{0}},{{e1}}) = {cd}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let set: Vec<_> = (0..5).map(|_| random_cloud(&mut rng, 100)).collect();
    let m = mmd(&set, &set).unwrap();
    ensure(m == 0.0, || format!("MMD(S,S) = {m}"))?;
    let same = jsd(&set, &set, 16).unwrap();
    ensure(same < 1e-12, || format!("JSD(identical) = {same}"))?;
    let a = vec![PointCloud::raw(vec![[-0.45, -0.45, -0.45]; 20])];
    let b = vec![PointCloud::raw(vec![[0.45, 0.45, 0.45]; 20])];
    let disjoint = jsd(&a, &b, 16).unwrap();
    ensure((disjoint - std::f64::consts::LN_2).abs() <= 1e-9, || {
        format!("JSD(disjoint) = {disjoint}")
    })?;
    let ir = invalid_ratio(&[
        "cube(2);",
        "sphere(1);",
        "cube([1, 2, 3];",
        "cylinder(h = 2, r = 1);",
    ])
    .unwrap();
    ensure(ir == 0.25, || format!("IR = {ir}"))?;
    Ok(format!(
        "cd 2, mmd 0, jsd {same:.1e} / ln2{:+.1e}, ir 0.25",
        disjoint - std::f64::consts::LN_2
    ))
}

// 2 -------------------------------------------------------------------------

fn brute_force_chamfer() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (n, m) = (rng.gen_range(1..=512), rng.gen_range(1..=512));
        let (p, q) = (random_cloud(&mut rng, n), random_cloud(&mut rng, m));
        let diff = (chamfer(&p, &q).unwrap() - support::brute_chamfer(&p.points, &q.points)).abs();
        worst = worst.max(diff);
    }
    ensure(worst <= 1e-12, || format!("max |fast - scan| = {worst:e}"))?;
    Ok(format!("100 pairs, max diff {worst:.1e}"))
}

// 3 -------------------------------------------------------------------------

fn csg_oracle() -> Check {
    let pi = std::f64::consts::PI;
    let shapes = [
        ("cube([2, 3, 4]);", 24.0),
        ("sphere(r = 1.5);", 4.0 / 3.0 * pi * 3.375),
        ("cylinder(h = 3, r = 1.2);", pi * 1.44 * 3.0),
        (
            "difference() { cube(4, center = true); sphere(r = 1.5); }",
            64.0 - 4.0 / 3.0 * pi * 3.375,
        ),
    ];
    let mut worst_vol = 0.0f64;
    for (src, exact) in shapes {
        let node = evaluate_source(src).unwrap();
        let b = node.bounds();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 400_000;
        let hits = (0..n)
            .filter(|_| {
                node.contains(&Vec3::from(
                    [0, 1, 2].map(|i| rng.gen_range(b.min[i]..b.max[i])),
                ))
            })
            .count();
        let box_vol: f64 = (0..3).map(|i| b.max[i] - b.min[i]).product();
        let rel = (hits as f64 / n as f64 * box_vol - exact).abs() / exact;
        ensure(rel < 0.02, || {
            format!("{src}: volume off by {:.2}%", rel * 100.0)
        })?;
        worst_vol = worst_vol.max(rel);
    }

    const G: usize = 64;
    let (mut agree, mut total) = (0usize, 0usize);
    for seed in 0..50u64 {
        let program = synthetic(seed);
        let node = evaluate(&program).unwrap();
        let shape = support::oracle_shape(&program).ok_or("oracle found no geometry")?;
        let b = node.bounds();
        let pad = 0.05 * b.diagonal();
        let step = [0, 1, 2].map(|i| (b.max[i] - b.min[i] + 2.0 * pad) / G as f64);
        for i in 0..G {
            for j in 0..G {
                for k in 0..G {
                    let p = [(i, 0), (j, 1), (k, 2)]
                        .map(|(c, ax)| b.min[ax] - pad + (c as f64 + 0.5) * step[ax]);
                    total += 1;
                    if node.contains(&Vec3::from(p)) == shape.inside(p) {
                        agree += 1;
                    }
                }
            }
        }
    }
    let frac = agree as f64 / total as f64;
    ensure(frac >= 0.999, || format!("grid agreement {frac}"))?;
    Ok(format!(
        "volume error <= {:.2}%, grid agreement {:.5}",
        worst_vol * 100.0,
        frac
    ))
}

// 4 -------------------------------------------------------------------------

fn parser_round_trip() -> Check {
    let generated: Vec<String> = (0..200).map(|s| print(&synthetic(s))).collect();
    let mut failures = Vec::new();
    for src in generated
        .iter()
        .map(String::as_str)
        .chain(support::CORPUS.iter().copied())
    {
        let ok = parse(src)
            .ok()
            .and_then(|a| parse(&print(&a)).ok().map(|b| a == b))
            .unwrap_or(false);
        if !ok {
            failures.push(src.to_string());
        }
    }
    ensure(failures.is_empty(), || {
        format!("{} failures, first:\n{}", failures.len(), failures[0])
    })?;
    Ok(format!("{} programs", 200 + support::CORPUS.len()))
}

// 5 -------------------------------------------------------------------------

fn segmentation() -> Check {
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let program = parse(&print(&synthetic(seed))).unwrap();
        let blocks = segment(&program).map_err(|e| e.to_string())?;
        let mut flat: Vec<_> = blocks
            .blocks
            .iter()
            .flat_map(|b| b.statements.clone())
            .collect();
        let mut expect = program.statements.clone();
        for s in flat.iter_mut().chain(expect.iter_mut()) {
            s.block_id = None;
        }
        ensure(flat == expect, || {
            format!("seed {seed}: blocks do not partition the program")
        })?;

        let annotated = parse(&print(&annotate(&program).unwrap())).unwrap();
        let a =
            normalize(&sample_surface(&evaluate(&program).unwrap(), 1024, seed).unwrap()).unwrap();
        let b = sample_surface(&evaluate(&annotated).unwrap(), 1024, seed)
            .unwrap()
            .in_frame(&a.normalization);
        let cd = chamfer(&a, &b).unwrap();
        ensure(cd < 1e-9, || format!("seed {seed}: annotated cd {cd}"))?;
        worst = worst.max(cd);
    }
    Ok(format!("100 programs, max cd {worst:.1e}"))
}

// 6 -------------------------------------------------------------------------

fn mutation_suite() -> Check {
    let (mut emitted, mut exhausted, mut min_cd) = (Vec::new(), 0, f64::INFINITY);
    for seed in 0..50u64 {
        let program = synthetic(700 + seed);
        let reference =
            normalize(&sample_surface(&evaluate(&program).unwrap(), DEFAULT_POINTS, 5).unwrap())
                .unwrap();
        for ty in applicable_types(&program).unwrap() {
            if ty == ErrorType::NoError {
                continue;
            }
            let (mutant, record) = match mutate(&program, ty, seed) {
                Ok(m) => m,
                Err(MutateError::ExhaustedRetries(_)) => {
                    // deleting the only geometry block leaves nothing to compare
                    let lone = segment(&program)
                        .unwrap()
                        .blocks
                        .iter()
                        .filter(|b| b.is_geometry())
                        .count()
                        == 1;
                    if !(ty == ErrorType::MissingBlock && lone) {
                        exhausted += 1;
                    }
                    continue;
                }
                Err(e) => return Err(format!("seed {seed} {ty}: {e}")),
            };
            let text = print(&mutant);
            let reparsed = parse(&text).map_err(|e| format!("seed {seed} {ty}: {e}"))?;
            support::locality(&program, &reparsed, ty.as_str(), record.block_id)
                .map_err(|e| format!("seed {seed} {ty}: {e}"))?;
            if let Ok(node) = evaluate(&reparsed) {
                let cloud = sample_surface(&node, DEFAULT_POINTS, 5)
                    .unwrap()
                    .in_frame(&reference.normalization);
                let cd = support::brute_chamfer(&reference.points, &cloud.points);
                ensure(cd > 1e-3, || format!("seed {seed} {ty}: cd {cd}"))?;
                min_cd = min_cd.min(cd);
            }
            emitted.push(text);
        }
    }
    let ir = invalid_ratio(&emitted).unwrap();
    ensure(ir == 0.0, || format!("mutant IR {ir}"))?;
    ensure(exhausted * 20 < emitted.len(), || {
        format!("{exhausted} exhausted of {}", emitted.len())
    })?;
    Ok(format!(
        "{} mutants, ir 0, min cd {min_cd:.2e}, {exhausted} not emitted",
        emitted.len()
    ))
}

// 7 -------------------------------------------------------------------------

fn quantization() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let lo = rng.gen_range(-50.0..50.0);
        let hi = lo + rng.gen_range(0.1..100.0);
        let v = rng.gen_range(lo..=hi);
        let err = (dequantize_value(quantize_value(v, lo, hi, 8), lo, hi, 8) - v).abs() / (hi - lo);
        worst = worst.max(err);
    }
    ensure(worst <= 1.0 / 512.0 + 1e-12, || {
        format!("max error {worst} of range")
    })?;
    let top = quantize_value(12.5, -3.0, 12.5, 8);
    ensure(top == 256, || format!("hi maps to {top}"))?;
    Ok(format!(
        "max error {:.3}/512 of range, hi -> 256",
        worst * 512.0
    ))
}

// 8 -------------------------------------------------------------------------

fn reward_harness() -> Check {
    for (ty, block, json, want) in support::REWARD_CASES {
        let gold = FeedbackRecord {
            sample_id: "s".into(),
            error_type: ty.parse().unwrap(),
            block_id: *block,
            description: String::new(),
        };
        let c = Candidate::from_json(&serde_json::from_str(json).unwrap()).unwrap();
        let got = c
            .record()
            .map_or(0, |r| diagnostic_reward(&r, &gold).unwrap());
        ensure(got == *want, || {
            format!("{json}: reward {got}, labeled {want}")
        })?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for set in 0..50 {
        let n = rng.gen_range(1..10);
        let vd: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
        let vv: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let scored: Vec<ScoredCandidate> = (0..n)
            .map(|i| ScoredCandidate {
                candidate: Candidate {
                    sample_id: "s".into(),
                    error_type: Some(ErrorType::Logic),
                    block_id: Some(i as u32),
                    feedback: format!("candidate {i}"),
                    edited_program: None,
                },
                v_d: vd[i],
                v_visual: vv[i],
                cd: None,
            })
            .collect();
        for (mode, rule) in [(PairMode::And, "and"), (PairMode::Or, "or")] {
            let got: BTreeSet<_> = build_dpo_pairs("s", &scored, mode)
                .iter()
                .map(|p| (p.chosen, p.rejected))
                .collect();
            let want = support::brute_pairs(&vd, &vv, rule);
            ensure(got == want, || {
                format!("set {set} {rule}: {got:?} vs {want:?}")
            })?;
        }
    }

    for seed in 0..10u64 {
        let program = synthetic(900 + seed);
        let gold =
            normalize(&sample_surface(&evaluate(&program).unwrap(), 512, seed).unwrap()).unwrap();
        let mut edits: Vec<Option<String>> =
            vec![Some(print(&program)), None, Some("cube(".into())];
        for ty in [
            ErrorType::Size,
            ErrorType::Position,
            ErrorType::RedundantBlock,
            ErrorType::Rotation,
        ] {
            if let Ok((m, _)) = mutate(&program, ty, seed) {
                edits.push(Some(print(&m)));
            }
        }
        let cands: Vec<Candidate> = edits
            .into_iter()
            .enumerate()
            .map(|(i, e)| Candidate {
                sample_id: "s".into(),
                error_type: None,
                block_id: None,
                feedback: format!("edit {i}"),
                edited_program: e,
            })
            .collect();
        let mut cds = vec![f64::INFINITY; cands.len()];
        for (i, d) in pointcloud_reward(&cands, &gold, 512, seed) {
            cds[i] = d;
        }
        let brute: Vec<f64> = cands
            .iter()
            .map(|c| {
                c.edited_program
                    .as_deref()
                    .and_then(|s| evaluate_source(s).ok())
                    .and_then(|n| sample_surface(&n, 512, seed).ok())
                    .map_or(f64::INFINITY, |raw| {
                        support::brute_chamfer(
                            &gold.points,
                            &raw.in_frame(&gold.normalization).points,
                        )
                    })
            })
            .collect();
        let scored: Vec<ScoredCandidate> = cands
            .iter()
            .zip(&cds)
            .map(|(c, d)| ScoredCandidate {
                candidate: c.clone(),
                v_d: 0,
                v_visual: 0.0,
                cd: Some(*d),
            })
            .collect();
        let got = build_dpo_pairs("s", &scored, PairMode::PointCloud)
            .first()
            .map(|p| (p.chosen, p.rejected));
        let want = support::brute_extremes(&brute);
        ensure(got == want, || {
            format!("program {seed}: pair {got:?}, oracle {want:?}")
        })?;
    }
    Ok(format!(
        "{} labeled cases, 50 sets x 2 modes, 10 cloud sets",
        support::REWARD_CASES.len()
    ))
}

// 9 -------------------------------------------------------------------------

/// Disc covered by a sphere of radius `r` at distance `d` on the optical
/// axis: pixel rays within asin(r / d) of the axis.
fn analytic_disc(size: u32, fov_deg: f64, r: f64, d: f64) -> Vec<bool> {
    let half = (fov_deg.to_radians() / 2.0).tan();
    let limit = (r / d).asin();
    let mut out = Vec::with_capacity((size * size) as usize);
    for row in 0..size {
        for col in 0..size {
            let x = (2.0 * (f64::from(col) + 0.5) / f64::from(size) - 1.0) * half;
            let y = (1.0 - 2.0 * (f64::from(row) + 0.5) / f64::from(size)) * half;
            out.push((x * x + y * y).sqrt().atan() <= limit);
        }
    }
    out
}

fn renderer() -> Check {
    let cam = Camera {
        eye: [5.0, 0.0, 0.0],
        target: [0.0; 3],
        up: [0.0, 0.0, 1.0],
        vertical_fov: DEFAULT_FOV,
        width: 256,
        height: 256,
    };
    let raster = render(&evaluate_source("sphere(r = 1);").unwrap(), &cam);
    let disc = analytic_disc(256, DEFAULT_FOV, 1.0, 5.0);
    let inter = raster
        .silhouette
        .iter()
        .zip(&disc)
        .filter(|(a, b)| **a && **b)
        .count();
    let union = raster
        .silhouette
        .iter()
        .zip(&disc)
        .filter(|(a, b)| **a || **b)
        .count();
    let iou = inter as f64 / union as f64;
    ensure(iou >= 0.98, || format!("IoU {iou}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let shapes = [
        "cube([3, 2, 1])",
        "sphere(r = 1.5)",
        "cylinder(h = 3, r1 = 1, r2 = 0.5)",
    ];
    for pair in 0..20 {
        let mut solid = || {
            let s = shapes[rng.gen_range(0..shapes.len())];
            let t = [0, 1, 2].map(|_| rng.gen_range(-3..=3));
            format!(
                "translate([{}, {}, {}]) rotate([{}, 0, 0]) {s};",
                t[0],
                t[1],
                t[2],
                rng.gen_range(0..6) * 30
            )
        };
        let (a, b) = (solid(), solid());
        let na = evaluate_source(&a).unwrap();
        let nu = evaluate_source(&format!("union() {{ {a} {b} }}")).unwrap();
        let cam = Camera::orbit(
            &nu.bounds(),
            rng.gen_range(0.0..6.28),
            rng.gen_range(-1.0..1.0),
            128,
        );
        let (ra, ru) = (render(&na, &cam), render(&nu, &cam));
        let escaped = ra
            .silhouette
            .iter()
            .zip(&ru.silhouette)
            .filter(|(x, y)| **x && !**y)
            .count();
        ensure(escaped == 0, || {
            format!("pair {pair}: {escaped} pixels lost in union")
        })?;
    }
    Ok(format!("IoU {iou:.4}, 20 union pairs monotone"))
}

// 10 ------------------------------------------------------------------------

fn scad(args: &[&str]) -> Result<Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_scad"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "scad {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| format!("scad {args:?}: bad JSON: {e}"))
}

fn end_to_end() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let build = |dir: &Path| -> Result<(Value, Duration), String> {
        let start = Instant::now();
        let v = scad(&[
            "build-dataset",
            "--out",
            dir.to_str().unwrap(),
            "--sources",
            "100",
            "--seed",
            "0",
        ])?;
        Ok((v, start.elapsed()))
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let (first, t1) = build(&a)?;
    let (second, t2) = build(&b)?;
    let limit = Duration::from_secs(300);
    ensure(t1 < limit && t2 < limit, || {
        format!("build took {t1:?} / {t2:?}")
    })?;
    let (h1, h2) = (&first["manifest_sha256"], &second["manifest_sha256"]);
    ensure(h1.is_string() && h1 == h2, || {
        format!("manifest hashes differ: {h1} vs {h2}")
    })?;
    let bytes = |d: &Path| std::fs::read(d.join("manifest.json")).unwrap();
    ensure(bytes(&a) == bytes(&b), || "manifest files differ".into())?;

    let gold = a.join("test_gold.jsonl");
    let report = scad(&[
        "eval",
        "--dataset",
        a.to_str().unwrap(),
        "--pred",
        gold.to_str().unwrap(),
    ])?;
    let acc = report["feedback_acc"].as_f64().unwrap_or(f64::NAN);
    let ir = report["ir"].as_f64().unwrap_or(f64::NAN);
    let cd = report["cd_x1000"].as_f64().unwrap_or(f64::NAN);
    ensure(acc == 1.0 && ir == 0.0 && cd < 1.0, || {
        format!("gold eval: acc {acc}, ir {ir}, cd x1e3 {cd}")
    })?;
    Ok(format!(
        "{} samples, build {:.1}s, hash {}…, acc {acc}, ir {ir}, cd x1e3 {cd:.3}",
        first["samples"],
        t1.as_secs_f64(),
        &h1.as_str().unwrap()[..12]
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Option<u64>, fn() -> Check); 10] = [
        ("metric formula fidelity", Some(1), metric_formulas),
        (
            "brute-force chamfer equivalence",
            Some(30),
            brute_force_chamfer,
        ),
        ("csg oracle", Some(180), csg_oracle),
        ("parser round-trip", None, parser_round_trip),
        ("segmentation semantics", None, segmentation),
        ("mutation suite", Some(300), mutation_suite),
        ("quantization", None, quantization),
        ("reward and pair harness", None, reward_harness),
        ("renderer", None, renderer),
        ("end-to-end dataset and eval", None, end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let result = match (result, limit) {
            (Ok(_), Some(secs)) if took > Duration::from_secs(secs) => {
                Err(format!("took {:.1}s, limit {secs}s", took.as_secs_f64()))
            }
            (r, _) => r,
        };
        let (verdict, detail) = match &result {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => {
                failed += 1;
                ("FAIL", e.clone())
            }
        };
        println!(
            "criterion {:>2} {name} ... {verdict} ({detail}; {:.1}s)",
            i + 1,
            took.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
