//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use textgraph::eval::{aggregate, match_detections, prf, prf_counts};
use textgraph::geometry::{delaunay, maximum_spanning_tree, Point2, WeightedGraph};
use textgraph::io::tmap::{read_tmap, write_tmap};
use textgraph::io::DetectionFile;
use textgraph::labelgen::normalize_orientation;
use textgraph::lines::DetectionKind;
use textgraph::losses::{
    balanced_cross_entropy_gradient, balanced_cross_entropy_values, character_loss,
    orientation_loss, orientation_pixel_loss, region_loss, Reduction,
};
use textgraph::pipeline::{detect, DetectConfig, DetectionReport};
use textgraph::raster::{Channel, RasterMap};
use textgraph::synth::{gen_scene, oracle_suite, Scene, SceneSpec};

const SUITE_SEED: u64 = 2024;
const TAU: f64 = 0.8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn map(ch: Channel, v: &[f32]) -> RasterMap {
    RasterMap::from_vec(v.len(), 1, ch, v.to_vec()).unwrap()
}

fn loss_fixtures() -> Outcome {
    let start = Instant::now();
    let expect = -0.5 * 0.8f64.ln() - 0.5 * 0.6f64.ln();
    let (region, beta) = region_loss(
        &map(Channel::Region, &[0.8, 0.4]),
        &map(Channel::Region, &[1.0, 0.0]),
    )
    .unwrap();
    let (swapped, _) = character_loss(
        &map(Channel::Character, &[0.4, 0.8]),
        &map(Channel::Character, &[0.0, 1.0]),
    )
    .unwrap();
    let fg = map(Channel::Region, &[1.0]);
    let o = |v: f32| map(Channel::Orientation, &[v]);
    let peak = orientation_loss(&o(0.75), &o(0.25), &fg, Reduction::Sum).unwrap();
    let wrap = orientation_loss(&o(1.0), &o(0.0), &fg, Reduction::Sum).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = (region - expect).abs() <= 1e-6
        && (swapped - expect).abs() <= 1e-6
        && beta == 0.5
        && (peak - 1.0).abs() <= 1e-6
        && wrap.abs() <= 1e-6
        && secs < 1.0;
    outcome(
        pass,
        format!("region {region:.6} swapped {swapped:.6} (expected {expect:.6}), peak {peak:.6}, wrap {wrap:.2e}, {secs:.3}s"),
    )
}

fn double_peak() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut max_on_grid: f64 = 0.0;
    for k in 0..64 {
        let d = k as f64 / 63.0;
        let l = orientation_pixel_loss(d, 0.0);
        worst = worst.max((l - (PI * d).sin()).abs());
        max_on_grid = max_on_grid.max(l);
    }
    let at_half = orientation_pixel_loss(0.5, 0.0);
    let ends = orientation_pixel_loss(0.0, 0.0).max(orientation_pixel_loss(1.0, 0.0));
    let pass =
        worst <= 1e-9 && at_half >= max_on_grid && (at_half - 1.0).abs() <= 1e-12 && ends <= 1e-9;
    outcome(pass, format!("max |loss - sin(pi d)| {worst:.2e}, loss(0.5) {at_half}, loss at 0 and 1 <= {ends:.2e}"))
}

fn gradient_check() -> Outcome {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let pred: Vec<f64> = (0..64).map(|_| rng.random_range(0.05..0.95)).collect();
        let gt: Vec<f64> = (0..64)
            .map(|_| if rng.random_bool(0.3) { 1.0 } else { 0.0 })
            .collect();
        let grad = balanced_cross_entropy_gradient(&pred, &gt);
        for j in 0..64 {
            let mut p = pred.clone();
            p[j] = pred[j] + h;
            let up = balanced_cross_entropy_values(&p, &gt).0;
            p[j] = pred[j] - h;
            let down = balanced_cross_entropy_values(&p, &gt).0;
            let fd = (up - down) / (2.0 * h);
            let rel = (grad[j] - fd).abs() / grad[j].abs().max(1e-12);
            worst = worst.max(rel);
        }
    }
    outcome(
        worst <= 1e-4,
        format!("100 trials on 8x8 maps, worst relative error {worst:.2e}"),
    )
}

/// Best spanning-forest weight by enumerating every edge subset.
fn enumerate_best_forest(n: usize, edges: &[(usize, usize, f64)]) -> (f64, usize) {
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut best = (f64::NEG_INFINITY, 0usize);
    for mask in 0u32..(1 << edges.len()) {
        let mut parent: Vec<usize> = (0..n).collect();
        let mut ok = true;
        let (mut w, mut count) = (0.0, 0);
        for (k, &(a, b, weight)) in edges.iter().enumerate() {
            if mask & (1 << k) == 0 {
                continue;
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                ok = false;
                break;
            }
            parent[ra] = rb;
            w += weight;
            count += 1;
        }
        // Only maximal forests count: as many edges as possible.
        if ok && (count > best.1 || (count == best.1 && w > best.0)) {
            best = (w, count);
        }
    }
    best
}

fn circumcircle_violations(points: &[Point2], tri: [usize; 3]) -> usize {
    let [a, b, c] = tri.map(|i| points[i]);
    let mut bad = 0;
    for (k, &p) in points.iter().enumerate() {
        if tri.contains(&k) || [a, b, c].iter().any(|q| q.distance(p) < 1e-6) {
            continue;
        }
        let (ax, ay) = (a.x - p.x, a.y - p.y);
        let (bx, by) = (b.x - p.x, b.y - p.y);
        let (cx, cy) = (c.x - p.x, c.y - p.y);
        let det = (ax * ax + ay * ay) * (bx * cy - cx * by)
            - (bx * bx + by * by) * (ax * cy - cx * ay)
            + (cx * cx + cy * cy) * (ax * by - bx * ay);
        let orient = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        let scale = [a, b, c]
            .iter()
            .map(|q| q.distance(p))
            .fold(0.0f64, f64::max)
            .powi(4);
        if det * orient.signum() > 1e-9 * scale.max(1.0) {
            bad += 1;
        }
    }
    bad
}

fn hull_area(points: &[Point2]) -> f64 {
    textgraph::geometry::polygon::area(&textgraph::geometry::polygon::convex_hull(points))
}

fn geometry_oracles() -> Outcome {
    let start = Instant::now();
    let mut mst_failures = 0;
    for g in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + g);
        let n = rng.random_range(1..=6usize);
        let mut graph = WeightedGraph::new(n);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.7) {
                    // Coarse weights create ties.
                    let w = if g % 2 == 0 {
                        rng.random_range(0..5) as f64 / 4.0
                    } else {
                        rng.random::<f64>()
                    };
                    graph.add_edge(a, b, w).unwrap();
                    edges.push((a, b, w));
                }
            }
        }
        let tree = maximum_spanning_tree(&graph);
        let (best, count) = enumerate_best_forest(n, &edges);
        let best = if count == 0 { 0.0 } else { best };
        if tree.edges().len() != count || (tree.total_weight() - best).abs() > 1e-12 {
            mst_failures += 1;
        }
    }

    let mut dt_failures = 0;
    for s in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + s);
        let m = rng.random_range(3..=12usize);
        let points: Vec<Point2> = match s % 4 {
            // Integer lattice points: many cocircular and collinear subsets.
            0 => (0..m)
                .map(|_| Point2::new(rng.random_range(0..4) as f64, rng.random_range(0..4) as f64))
                .collect(),
            _ => (0..m)
                .map(|_| Point2::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
                .collect(),
        };
        let t = delaunay(&points).unwrap();
        let violations: usize = t
            .triangles()
            .iter()
            .map(|&tri| circumcircle_violations(&points, tri))
            .sum();
        let covered: f64 = t
            .triangles()
            .iter()
            .map(|tri| textgraph::geometry::polygon::area(&tri.map(|i| points[i])))
            .sum();
        let hull = hull_area(&points);
        if violations > 0 || (covered - hull).abs() > 1e-9 * hull.max(1.0) {
            dt_failures += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mst_failures == 0 && dt_failures == 0 && secs < 30.0,
        format!(
            "MST mismatches {mst_failures}/200, Delaunay failures {dt_failures}/200, {secs:.2}s"
        ),
    )
}

struct SuiteRun {
    scene: Scene,
    report: DetectionReport,
}

fn run_suite(specs: &[SceneSpec], perturb: bool) -> Vec<SuiteRun> {
    specs
        .iter()
        .map(|spec| {
            let scene = gen_scene(spec).unwrap();
            let maps = if perturb {
                scene.perturbed()
            } else {
                scene.maps.clone()
            };
            let report = detect(&maps, &DetectConfig::default()).unwrap();
            SuiteRun { scene, report }
        })
        .collect()
}

fn end_to_end(runs: &[SuiteRun]) -> Outcome {
    let mut exact = 0;
    let mut low_iou = Vec::new();
    let mut max_cut: f64 = 0.0;
    let (mut min_straight, mut min_arc) = (1.0f64, 1.0f64);
    for (k, run) in runs.iter().enumerate() {
        let report = &run.report.scales[0];
        if common::exact_grouping(&run.scene, report) {
            exact += 1;
        }
        let curved = run.scene.lines.iter().any(|l| l.curved);
        for iou in common::line_ious(&run.scene, report) {
            if curved {
                min_arc = min_arc.min(iou);
            } else {
                min_straight = min_straight.min(iou);
            }
            if iou < 0.8 {
                low_iou.push(k);
            }
        }
        for e in &report.cut_edges {
            max_cut = max_cut.max(e.weight);
        }
    }
    low_iou.dedup();
    let tau_ok = max_cut <= TAU;
    let pass = exact == runs.len() && low_iou.is_empty() && tau_ok;
    outcome(
        pass,
        format!(
            "exact groupings {exact}/{}, scenes with a line box IoU < 0.8: {} {:?}, min IoU straight {min_straight:.3} arc {min_arc:.3}, max cut weight {max_cut:.3}",
            runs.len(),
            low_iou.len(),
            low_iou
        ),
    )
}

fn robustness(specs: &[SceneSpec]) -> Outcome {
    let noisy: Vec<SceneSpec> = specs
        .iter()
        .map(|s| SceneSpec {
            noise_sigma: 0.05,
            blur_radius: 1,
            ..s.clone()
        })
        .collect();
    let runs = run_suite(&noisy, true);
    let exact = runs
        .iter()
        .filter(|r| common::exact_grouping(&r.scene, &r.report.scales[0]))
        .count();
    let rate = exact as f64 / runs.len() as f64;
    outcome(
        rate >= 0.9,
        format!(
            "exact groupings {exact}/{} ({:.1}%) at sigma 0.05, blur 1",
            runs.len(),
            100.0 * rate
        ),
    )
}

fn angle_delta(a: f64, b: f64) -> f64 {
    (b - a + PI / 2.0).rem_euclid(PI) - PI / 2.0
}

fn equivariance(specs: &[SceneSpec], base: &[SuiteRun]) -> Outcome {
    let alpha = 10f64.to_radians();
    let rotated: Vec<SceneSpec> = specs.iter().map(|s| s.rotated(alpha)).collect();
    let runs = run_suite(&rotated, false);
    let (mut worst, mut count_mismatch, mut unmatched) = (0.0f64, 0, 0);
    for (b, r) in base.iter().zip(&runs) {
        let (rb, rr) = (&b.report.scales[0], &r.report.scales[0]);
        if rb.chars.len() != rr.chars.len() {
            count_mismatch += 1;
        }
        for line in &rb.lines {
            let Some(g) = common::gt_line_of(&b.scene, rb, line) else {
                unmatched += 1;
                continue;
            };
            let twin = rr
                .lines
                .iter()
                .find(|l| common::gt_line_of(&r.scene, rr, l) == Some(g));
            match twin {
                Some(t) => {
                    if t.chars.len() != line.chars.len() {
                        count_mismatch += 1;
                    }
                    let d = angle_delta(line.bbox.angle.radians(), t.bbox.angle.radians());
                    worst = worst.max((d - alpha).abs());
                }
                None => unmatched += 1,
            }
        }
    }
    let tol = 2f64.to_radians();
    outcome(
        worst <= tol && count_mismatch == 0 && unmatched == 0,
        format!(
            "worst angle error {:.3} deg, character count mismatches {count_mismatch}, unmatched lines {unmatched}",
            worst.to_degrees()
        ),
    )
}

fn evaluator(base: &[SuiteRun]) -> Outcome {
    let sq = |x: f64| {
        vec![
            Point2::new(x, 0.0),
            Point2::new(x + 10.0, 0.0),
            Point2::new(x + 10.0, 10.0),
            Point2::new(x, 10.0),
        ]
    };
    let p1 = prf_counts(2, 2, 2);
    let p2 = prf_counts(1, 1, 2);
    let p3 = prf_counts(1, 2, 2);
    let gts = vec![sq(0.0), sq(20.0)];
    let perfect = prf(&match_detections(&gts, &gts, 0.5));
    let competing = match_detections(&[sq(1.0), sq(0.0)], &gts[..1], 0.5);
    let none: Vec<Vec<Point2>> = Vec::new();
    let empty = match_detections(&none, &gts, 0.5);
    let fixtures = (p1.precision, p1.recall, p1.f_measure) == (1.0, 1.0, 1.0)
        && (p2.precision, p2.recall, p2.f_measure) == (1.0, 0.5, 2.0 / 3.0)
        && (p3.precision, p3.recall, p3.f_measure) == (0.5, 0.5, 0.5)
        && (perfect.precision, perfect.recall, perfect.f_measure) == (1.0, 1.0, 1.0)
        && competing.pairs.len() == 1
        && competing.pairs[0].detection == 1
        && empty.unmatched_gts == vec![0, 1];

    let mut k = 0usize;
    let mut results = Vec::new();
    for run in base {
        let kept: Vec<Vec<Point2>> = run
            .report
            .detections
            .iter()
            .filter(|d| d.kind == DetectionKind::Line)
            .filter(|_| {
                k += 1;
                k % 2 == 1
            })
            .map(|d| d.polygon())
            .collect();
        let gts: Vec<Vec<Point2>> = run.scene.lines.iter().map(|l| l.region.clone()).collect();
        results.push(match_detections(&kept, &gts, 0.5));
    }
    let half = aggregate(&results);
    let pass = fixtures && (half.recall - 0.5).abs() <= 0.02;
    outcome(
        pass,
        format!(
            "P/R/F fixtures {}, half-missing recall {:.4}",
            if fixtures { "exact" } else { "WRONG" },
            half.recall
        ),
    )
}

fn determinism(specs: &[SceneSpec]) -> Outcome {
    let render = || -> Vec<String> {
        specs
            .iter()
            .enumerate()
            .map(|(k, spec)| {
                let scene = gen_scene(spec).unwrap();
                let r = detect(&scene.maps, &DetectConfig::default()).unwrap();
                DetectionFile::new(format!("scene_{k:03}"), &r.detections).to_json()
            })
            .collect()
    };
    let (a, b) = (render(), render());
    let identical = a == b;

    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut exact = 0;
    for k in 0..100 {
        let (w, h) = (rng.random_range(1..40usize), rng.random_range(1..40usize));
        let data: Vec<f32> = (0..w * h).map(|_| rng.random::<f32>()).collect();
        let channel = Channel::from_tag(k % 3).unwrap();
        let m = RasterMap::from_vec(w, h, channel, data).unwrap();
        let path = dir.path().join(format!("m{k}.tmap"));
        write_tmap(&m, &path).unwrap();
        let back = read_tmap(&path).unwrap();
        let same_bits = back
            .data()
            .iter()
            .map(|v| v.to_bits())
            .eq(m.data().iter().map(|v| v.to_bits()));
        if same_bits && back == m {
            exact += 1;
        }
    }
    outcome(
        identical && exact == 100,
        format!("suite detections identical across runs: {identical}, bit-exact TMAP round trips {exact}/100"),
    )
}

fn main() {
    // Guard against an accidental change of the orientation encoding.
    assert_eq!(
        normalize_orientation(textgraph::geometry::Orientation::HORIZONTAL),
        0.5
    );

    let specs = oracle_suite(SUITE_SEED);
    let base = run_suite(&specs, false);
    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "loss fixtures", loss_fixtures()),
        (2, "double-peak orientation loss", double_peak()),
        (3, "cross-entropy gradient check", gradient_check()),
        (4, "MST and Delaunay oracles", geometry_oracles()),
        (5, "end-to-end oracle suite", end_to_end(&base)),
        (6, "robustness floor", robustness(&specs)),
        (7, "rotation equivariance", equivariance(&specs, &base)),
        (8, "evaluator", evaluator(&base)),
        (9, "determinism", determinism(&specs)),
    ];

    let mut failed = 0;
    for (id, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} [{tag}] {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
