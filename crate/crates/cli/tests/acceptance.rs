//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is printed even when
//! output capture is on. Exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use itertools::Itertools;
use nalgebra::DMatrix;
use netloc_cli::commands::{cmd_constraints, cmd_generate, cmd_localize, ConstraintOptions, SolverChoice};
use netloc_cli::scenario::{GraphModel, MeasurementKindName, ScenarioConfig};
use netloc_cli::schema::NetworkFile;
use netloc_core::angle_params::{
    params_from_angles, params_from_points, AngleParameterSet, CaseLabel, TriangleAngles, Vertex,
};
use netloc_core::constraints::{
    build_constraint, displacement_from_distance, displacement_from_ratio, enumerate_tuples, mds_embed, BuilderConfig,
    ConstraintTuple, DistanceMatrix,
};
use netloc_core::geom::{
    random_frames, seeded_rng, synthesize_measurements, MeasurementKind, NetworkGraph, NodeId, NoiseSpec, Position3,
};
use netloc_core::localization::{
    angle_forms_from_truth, assemble, invariance_check, rmse, solve_distributed, solve_global, DistributedParams,
    InvarianceProbe,
};
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: String) -> Outcome {
    Outcome { pass, summary }
}

// ---------------------------------------------------------------------------
// independent angle oracle: search (theta_i, theta_j) for the zero of the
// three parameter equations, never inverting them

fn oracle_residuals(w: &AngleParameterSet, ti: f64, tj: f64) -> [f64; 3] {
    let tk = PI - ti - tj;
    let (si, sj, sk) = (ti.sin(), tj.sin(), tk.sin());
    let (ci, cj, ck) = (ti.cos(), tj.cos(), tk.cos());
    let eq = |wa: f64, wb: f64, a: f64, b: f64| (wa * a + wb * b) / (wa.hypot(wb) * a.hypot(b));
    // sides from the sine rule: d_ij = sin k, d_ik = sin j, d_jk = sin i
    let r1 = eq(w.w_ik, w.w_ki, sk * ci, si * ck);
    let r2 = eq(w.w_ij, w.w_ji, sj * ci, si * cj);
    let r3 = eq(w.w_jk, w.w_kj, sk * cj, sj * ck);
    [r1, r2, r3]
}

fn oracle_objective(w: &AngleParameterSet, ti: f64, tj: f64) -> f64 {
    oracle_residuals(w, ti, tj).iter().map(|r| r * r).sum()
}

// Levenberg-Marquardt on the residual vector with a central-difference Jacobian
fn oracle_polish(w: &AngleParameterSet, mut x: [f64; 2]) -> [f64; 2] {
    let inside = |x: [f64; 2]| x[0] > 0.0 && x[1] > 0.0 && x[0] + x[1] < PI;
    let mut f = oracle_objective(w, x[0], x[1]);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let r = oracle_residuals(w, x[0], x[1]);
        let h = 1e-7 * x[0].min(x[1]).min(PI - x[0] - x[1]);
        let mut jac = [[0.0; 2]; 3];
        for c in 0..2 {
            let (mut a, mut b) = (x, x);
            a[c] += h;
            b[c] -= h;
            let (ra, rb) = (oracle_residuals(w, a[0], a[1]), oracle_residuals(w, b[0], b[1]));
            for row in 0..3 {
                jac[row][c] = (ra[row] - rb[row]) / (2.0 * h);
            }
        }
        let mut jtj = [[0.0; 2]; 2];
        let mut jtr = [0.0; 2];
        for row in 0..3 {
            for a in 0..2 {
                jtr[a] += jac[row][a] * r[row];
                for b in 0..2 {
                    jtj[a][b] += jac[row][a] * jac[row][b];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let m = [
                [jtj[0][0] * (1.0 + lambda), jtj[0][1]],
                [jtj[1][0], jtj[1][1] * (1.0 + lambda)],
            ];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let dx = [
                (-m[1][1] * jtr[0] + m[0][1] * jtr[1]) / det,
                (m[1][0] * jtr[0] - m[0][0] * jtr[1]) / det,
            ];
            let cand = [x[0] + dx[0], x[1] + dx[1]];
            if det.is_finite() && det != 0.0 && inside(cand) {
                let fc = oracle_objective(w, cand[0], cand[1]);
                if fc < f {
                    (x, f) = (cand, fc);
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved || f == 0.0 {
            break;
        }
    }
    x
}

fn oracle_angles(w: &AngleParameterSet) -> (f64, f64) {
    let n = 240;
    let h = PI / n as f64;
    let inside = |a: f64, b: f64| a > 0.0 && b > 0.0 && a + b < PI;
    let mut seeds: Vec<(f64, f64, f64)> = (1..n)
        .flat_map(|a| (1..n - a).map(move |b| (a as f64 * h, b as f64 * h)))
        .map(|(a, b)| (oracle_objective(w, a, b), a, b))
        .collect();
    seeds.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for &(_, mut ti, mut tj) in seeds.iter().take(6) {
        let mut f = oracle_objective(w, ti, tj);
        let mut span = 2.0 * h;
        let mut rounds = 0;
        while span > 1e-10 && rounds < 5_000 {
            rounds += 1;
            let (ci, cj) = (ti, tj);
            for a in -5..=5 {
                for b in -5..=5 {
                    let (x, y) = (ci + span * a as f64 / 5.0, cj + span * b as f64 / 5.0);
                    if inside(x, y) {
                        let v = oracle_objective(w, x, y);
                        if v < f {
                            (f, ti, tj) = (v, x, y);
                        }
                    }
                }
            }
            if (ti, tj) == (ci, cj) {
                span /= 2.0;
            }
        }
        [ti, tj] = oracle_polish(w, [ti, tj]);
        f = oracle_objective(w, ti, tj);
        if f < best.0 {
            best = (f, ti, tj);
        }
    }
    (best.1, best.2)
}

fn far_from_special(t: f64, margin: f64) -> bool {
    t > margin && (t - PI / 2.0).abs() > margin && (PI - t) > margin
}

fn random_triangle<R: Rng>(rng: &mut R, margin: f64) -> TriangleAngles {
    loop {
        let a = rng.random_range(0.0..PI);
        let b = rng.random_range(0.0..PI - a);
        let c = PI - a - b;
        if [a, b, c].iter().all(|&t| far_from_special(t, margin)) {
            return TriangleAngles {
                theta_i: a,
                theta_j: b,
                theta_k: c,
            };
        }
    }
}

fn random_obtuse<R: Rng>(rng: &mut R) -> TriangleAngles {
    loop {
        let t = random_triangle(rng, 1e-3);
        if t.as_array().iter().any(|&x| x > PI / 2.0) {
            return t;
        }
    }
}

fn criterion_1() -> Outcome {
    let mut rng = seeded_rng(101);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a = random_triangle(&mut rng, 1e-3);
        let back = params_from_angles(&a, None).and_then(|w| w.recover_angles());
        match back {
            Ok(b) => {
                for (x, y) in a.as_array().iter().zip(b.as_array()) {
                    worst = worst.max((x - y).abs());
                }
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    let obtuse: Vec<TriangleAngles> = (0..200).map(|_| random_obtuse(&mut rng)).collect();
    let oracle_gap = obtuse
        .par_iter()
        .map(|a| {
            let w = params_from_angles(a, None).unwrap();
            let got = match w.recover_angles() {
                Ok(g) => g,
                Err(_) => return f64::INFINITY,
            };
            let (oi, oj) = oracle_angles(&w);
            let ok = PI - oi - oj;
            (got.theta_i - oi)
                .abs()
                .max((got.theta_j - oj).abs())
                .max((got.theta_k - ok).abs())
        })
        .reduce(|| 0.0, f64::max);
    outcome(
        worst <= 1e-9 && oracle_gap <= 1e-6,
        format!(
            "angle round-trip: 1000 triangles max error {worst:.2e} (tol 1e-9); 200 obtuse vs brute-force oracle max gap {oracle_gap:.2e} (tol 1e-6)"
        ),
    )
}

// ---------------------------------------------------------------------------

fn random_point<R: Rng>(rng: &mut R) -> Position3 {
    Position3::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = seeded_rng(202);
    let mut misclassified = 0;
    let mut wrong_middle = 0;
    let mut all_fired = 0;
    for _ in 0..500 {
        let base = random_point(&mut rng);
        let dir = random_point(&mut rng).coords.normalize() * rng.random_range(0.1..3.0);
        let offsets = [0.0, rng.random_range(0.05..0.95), 1.0];
        // the point at offset index 1 is between the other two
        let perm = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 0, 1], [1, 2, 0], [2, 1, 0]][rng.random_range(0..6)];
        let pts: Vec<Position3> = perm.iter().map(|&o| base + dir * offsets[o]).collect();
        let expected = [Vertex::I, Vertex::J, Vertex::K][perm.iter().position(|&o| o == 1).unwrap()];
        let Ok((_, w)) = params_from_points(&pts[0], &pts[1], &pts[2]) else {
            misclassified += 1;
            continue;
        };
        let test = w.is_colinear();
        if !test.colinear {
            misclassified += 1;
        }
        if test.fired.len() == 3 {
            all_fired += 1;
        }
        match w.classify() {
            Ok(CaseLabel::Colinear(v)) if v == expected => {}
            Ok(CaseLabel::Colinear(_)) => wrong_middle += 1,
            _ => misclassified += 1,
        }
    }
    let mut generic = 0;
    while generic < 500 {
        let p: Vec<Position3> = (0..3).map(|_| random_point(&mut rng)).collect();
        let Ok((angles, w)) = params_from_points(&p[0], &p[1], &p[2]) else {
            continue;
        };
        if !angles.as_array().iter().all(|&t| far_from_special(t, 1e-3)) {
            continue;
        }
        generic += 1;
        if w.is_colinear().colinear || !matches!(w.classify(), Ok(CaseLabel::Generic(_))) {
            misclassified += 1;
        }
    }
    outcome(
        misclassified == 0 && wrong_middle == 0,
        format!(
            "colinearity: 500 colinear + 500 generic, {misclassified} misclassified, {wrong_middle} wrong middle vertex (eps 1e-9); all three ratio sums fired on {all_fired}/500 colinear triples"
        ),
    )
}

// ---------------------------------------------------------------------------

fn scenario(nodes: usize, anchors: usize, coplanar: bool, radius: f64, seed: u64) -> NetworkFile {
    cmd_generate(&ScenarioConfig {
        nodes,
        anchors,
        graph: GraphModel::RandomGeometric { radius },
        kind: MeasurementKindName(MeasurementKind::Distance),
        coplanar,
        seed,
        ..Default::default()
    })
    .expect("scenario generation")
}

fn constraints_for(
    net: &NetworkFile,
    kind: MeasurementKind,
    coplanar: bool,
    sigma: f64,
    seed: u64,
) -> netloc_cli::schema::ConstraintsFile {
    let opts = ConstraintOptions {
        kind: Some(kind),
        coplanar,
        noise_sigma: sigma,
        seed,
        max_tuples_per_node: Some(12),
    };
    // drop stored measurements so every family is synthesized from the same truth
    let mut bare = net.clone();
    bare.measurements = None;
    cmd_constraints(&bare, &opts).expect("constraints").0
}

fn criterion_3() -> Outcome {
    let net = scenario(30, 4, false, 0.75, 3);
    let graph = net.graph().unwrap();
    let truth = net.truth().unwrap();
    let forms = angle_forms_from_truth(&graph, &truth).unwrap();
    let mut worst_disp = 0.0f64;
    let mut worst_angle = 0.0f64;
    let mut lines = Vec::new();
    for kind in MeasurementKind::ALL {
        let cons = constraints_for(&net, kind, false, 0.0, 0);
        let sys = assemble(cons.constraints(graph.len()).unwrap(), graph.len()).unwrap();
        let mut d = 0.0f64;
        for seed in 0..5 {
            let rep = invariance_check(&sys, &forms, &truth, &InvarianceProbe::random(seed));
            d = d.max(rep.max_displacement());
            worst_angle = worst_angle.max(rep.max_angle());
        }
        if sys.is_empty() {
            d = f64::INFINITY;
        }
        worst_disp = worst_disp.max(d);
        lines.push(format!("{kind} {d:.1e}"));
    }
    outcome(
        worst_disp <= 1e-9 && worst_angle <= 1e-9,
        format!(
            "invariance on 30-node network: kernel residual [{}] (tol 1e-9); {} angle forms under translation/rotation/scaling max {worst_angle:.1e} (tol 1e-9)",
            lines.join(", "),
            forms.len()
        ),
    )
}

// ---------------------------------------------------------------------------

fn complete_graph(n: usize) -> NetworkGraph {
    NetworkGraph::new(n, [], (0..n).tuple_combinations().map(|(a, b)| (NodeId(a), NodeId(b)))).unwrap()
}

fn criterion_4() -> Outcome {
    let mut rng = seeded_rng(404);
    let g = complete_graph(5);
    let tuple = ConstraintTuple::new(NodeId(4), (0..4).map(NodeId).collect()).unwrap();
    let cfg = BuilderConfig::default();
    let mut worst_d = 0.0f64;
    let mut worst_mu = 0.0f64;
    for _ in 0..200 {
        let p: Vec<Position3> = (0..5).map(|_| random_point(&mut rng)).collect();
        let d = DMatrix::from_fn(5, 5, |a, b| (p[a] - p[b]).norm());
        match mds_embed(&DistanceMatrix::from_distances(&d).unwrap(), 3, cfg.embed_tol) {
            Ok(emb) => {
                let got = emb.squared_distances().map(f64::sqrt);
                worst_d = worst_d.max((got - &d).amax());
            }
            Err(_) => worst_d = f64::INFINITY,
        }
        let dist = synthesize_measurements(&g, &p, MeasurementKind::Distance, &NoiseSpec::none(), 0).unwrap();
        let ratio = synthesize_measurements(&g, &p, MeasurementKind::RatioOfDistance, &NoiseSpec::none(), 0).unwrap();
        match (
            displacement_from_distance(&tuple, &dist, &cfg),
            displacement_from_ratio(&tuple, &ratio, &cfg),
        ) {
            (Ok(a), Ok(b)) => worst_mu = worst_mu.max(a.mu_distance(&b)),
            _ => worst_mu = f64::INFINITY,
        }
    }
    outcome(
        worst_d <= 1e-9 && worst_mu <= 1e-9,
        format!(
            "MDS congruence: 200 random 5-point sets, max distance error {worst_d:.1e} (tol 1e-9); ratio vs distance mu max gap {worst_mu:.1e} (tol 1e-9)"
        ),
    )
}

// ---------------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let net = scenario(34, 4, false, 0.7, 5);
    let graph = net
        .graph()
        .unwrap()
        .with_frames(random_frames(34, &mut seeded_rng(55)))
        .unwrap();
    let truth = net.truth().unwrap();
    // tuples satisfying the distance pattern satisfy every other pattern too
    let candidates = enumerate_tuples(&graph, MeasurementKind::Distance, false);
    let mut rng = seeded_rng(505);
    let picks: Vec<&ConstraintTuple> = (0..100)
        .map(|_| &candidates[rng.random_range(0..candidates.len())])
        .collect();
    let sets: Vec<_> = MeasurementKind::ALL
        .iter()
        .map(|&k| synthesize_measurements(&graph, &truth, k, &NoiseSpec::none(), 9).unwrap())
        .collect();
    let cfg = BuilderConfig::default();
    let mut worst = 0.0f64;
    let mut failed = 0;
    for t in &picks {
        let mus: Vec<_> = sets.iter().map(|m| build_constraint(t, m, &cfg)).collect();
        match mus.into_iter().collect::<Result<Vec<_>, _>>() {
            Ok(cs) => {
                for c in &cs[1..] {
                    worst = worst.max(cs[0].mu_distance(c));
                }
            }
            Err(_) => failed += 1,
        }
    }
    outcome(
        failed == 0 && worst <= 1e-8,
        format!(
            "cross-builder agreement: 100 tuples (of {} candidates) x 5 families, max mu gap {worst:.1e} (tol 1e-8), {failed} build failures",
            candidates.len()
        ),
    )
}

// ---------------------------------------------------------------------------

fn criterion_6() -> Outcome {
    let net = scenario(34, 4, false, 0.7, 0);
    let graph = net.graph().unwrap();
    let truth = net.truth().unwrap();
    let anchors = net.anchor_positions().unwrap();
    let free: Vec<NodeId> = graph.free_nodes().collect();
    let mut ok = free.len() == 30 && anchors.len() == 4;
    let mut parts = Vec::new();
    for kind in MeasurementKind::ALL {
        let cons = constraints_for(&net, kind, false, 0.0, 0);
        let sys = assemble(cons.constraints(graph.len()).unwrap(), graph.len()).unwrap();
        let g = solve_global(&sys, &anchors).unwrap();
        let d = solve_distributed(&sys, &anchors, &DistributedParams::default()).unwrap();
        let e_g = rmse(&g.positions, &truth, &free).unwrap();
        let e_d = rmse(&d.positions, &g.positions, &free).unwrap();
        ok &= g.converged && d.converged && e_g <= 1e-6 && e_d <= 1e-4;
        parts.push(format!(
            "{kind} global {e_g:.1e} distributed {e_d:.1e} ({} rounds)",
            d.iterations
        ));
    }

    let mean_rmse = |sigma: f64| {
        (0..20u64)
            .into_par_iter()
            .map(|seed| {
                let cons = constraints_for(&net, MeasurementKind::Distance, false, sigma, seed);
                let (out, _) = cmd_localize(&net, &cons, &SolverChoice::Global, false).unwrap();
                out.report.rmse.unwrap()
            })
            .sum::<f64>()
            / 20.0
    };
    let (low, high) = (mean_rmse(0.001), mean_rmse(0.01));
    ok &= high > low;
    outcome(
        ok,
        format!(
            "end-to-end, 30 free + 4 anchors: {} (tol 1e-6 / 1e-4); distance noise over 20 seeds mean RMSE {low:.3e} at 0.001 < {high:.3e} at 0.01",
            parts.join("; ")
        ),
    )
}

// ---------------------------------------------------------------------------

fn criterion_7() -> Outcome {
    let net = scenario(20, 3, true, 0.6, 0);
    let graph = net.graph().unwrap();
    let truth = net.truth().unwrap();
    let anchors = net.anchor_positions().unwrap();
    let free: Vec<NodeId> = graph.free_nodes().collect();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for kind in MeasurementKind::ALL {
        let cons = constraints_for(&net, kind, true, 0.0, 0);
        let all_three = cons.constraints.iter().all(|c| c.neighbors.len() == 3);
        let sys = assemble(cons.constraints(graph.len()).unwrap(), graph.len()).unwrap();
        let g = solve_global(&sys, &anchors).unwrap();
        let e = if all_three && g.converged {
            rmse(&g.positions, &truth, &free).unwrap()
        } else {
            f64::INFINITY
        };
        worst = worst.max(e);
        parts.push(format!("{kind} {e:.1e}"));
    }
    outcome(
        worst <= 1e-6,
        format!(
            "coplanar 20-node network, 3-neighbor tuples: RMSE [{}] (tol 1e-6)",
            parts.join(", ")
        ),
    )
}

// ---------------------------------------------------------------------------

fn run_pipeline(dir: &Path, extra: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_netloc"))
        .arg("--out")
        .arg(dir)
        .arg("pipeline")
        .args(["--seed", "42"])
        .args(extra)
        .output()
        .expect("run netloc")
}

fn files_of(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn criterion_8() -> Outcome {
    let variants: [&[&str]; 3] = [
        &["--kind", "distance"],
        &["--kind", "bearing", "--solver", "distributed"],
        &["--kind", "angle", "--noise-sigma", "0.01"],
    ];
    let mut ok = true;
    let mut compared = 0;
    for extra in variants {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (ra, rb) = (run_pipeline(a.path(), extra), run_pipeline(b.path(), extra));
        let (fa, fb) = (files_of(a.path()), files_of(b.path()));
        ok &= ra.status.success() && rb.status.success();
        ok &= ra.stdout == rb.stdout && fa == fb && fa.len() == 5;
        compared += fa.len();
    }
    outcome(
        ok,
        format!("determinism: 3 pipeline configurations run twice, {compared} artifacts byte-identical"),
    )
}

fn main() {
    let criteria: [fn() -> Outcome; 8] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
    ];
    let mut failed = 0;
    for (n, f) in criteria.iter().enumerate() {
        let id = n + 1;
        let t = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} [{id}] {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.summary,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
