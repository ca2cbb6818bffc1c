//! Angle recovery checked against a brute-force search that never inverts
//! the parameter equations.

use std::f64::consts::PI;

use netloc_core::angle_params::{params_from_angles, AngleParameterSet, CaseLabel, TriangleAngles, Vertex};
use netloc_core::geom::seeded_rng;
use rand::Rng;

/// Sum of squared normalized residuals of the three equations at
/// `(theta_i, theta_j)`, with the sine rule standing in for side lengths.
fn objective(w: &AngleParameterSet, ti: f64, tj: f64) -> f64 {
    let tk = PI - ti - tj;
    let (si, sj, sk) = (ti.sin(), tj.sin(), tk.sin());
    let (ci, cj, ck) = (ti.cos(), tj.cos(), tk.cos());
    let eq = |wa: f64, wb: f64, a: f64, b: f64| {
        let r = wa * a + wb * b;
        r / (wa.hypot(wb) * a.hypot(b))
    };
    let r1 = eq(w.w_ik, w.w_ki, sk * ci, si * ck);
    let r2 = eq(w.w_ij, w.w_ji, sj * ci, si * cj);
    let r3 = eq(w.w_jk, w.w_kj, sk * cj, sj * ck);
    r1 * r1 + r2 * r2 + r3 * r3
}

fn inside(ti: f64, tj: f64) -> bool {
    ti > 0.0 && tj > 0.0 && ti + tj < PI
}

fn oracle(w: &AngleParameterSet) -> (f64, f64) {
    let n = 240;
    let h = PI / n as f64;
    let mut seeds = Vec::new();
    for a in 1..n {
        for b in 1..n - a {
            let (ti, tj) = (a as f64 * h, b as f64 * h);
            seeds.push((objective(w, ti, tj), ti, tj));
        }
    }
    seeds.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for &(_, mut ti, mut tj) in seeds.iter().take(6) {
        let mut span = 2.0 * h;
        let mut f = objective(w, ti, tj);
        let mut rounds = 0;
        // walk a shrinking stencil: move while a neighbor improves, else halve
        while span > 1e-13 && rounds < 20_000 {
            rounds += 1;
            let steps = 5;
            let (ci, cj) = (ti, tj);
            for a in -steps..=steps {
                for b in -steps..=steps {
                    let (x, y) = (ci + span * a as f64 / steps as f64, cj + span * b as f64 / steps as f64);
                    if inside(x, y) {
                        let v = objective(w, x, y);
                        if v < f {
                            f = v;
                            ti = x;
                            tj = y;
                        }
                    }
                }
            }
            if (ti, tj) == (ci, cj) {
                span /= 2.0;
            }
        }
        if f < best.0 {
            best = (f, ti, tj);
        }
    }
    (best.1, best.2)
}

fn random_obtuse<R: Rng>(rng: &mut R) -> TriangleAngles {
    loop {
        let big = rng.random_range(PI / 2.0 + 1e-2..PI - 2e-2);
        let small = rng.random_range(1e-2..PI - big - 1e-2);
        let rest = PI - big - small;
        if rest < 1e-2 {
            continue;
        }
        let mut t = [big, small, rest];
        let slot = rng.random_range(0..3);
        t.swap(0, slot);
        return TriangleAngles {
            theta_i: t[0],
            theta_j: t[1],
            theta_k: t[2],
        };
    }
}

#[test]
fn obtuse_triangles_match_brute_force() {
    let mut rng = seeded_rng(2024);
    for _ in 0..40 {
        let truth = random_obtuse(&mut rng);
        let w = params_from_angles(&truth, None)
            .unwrap()
            .scaled(rng.random_range(0.1..10.0));
        let got = w.recover_angles().unwrap();
        let (oi, oj) = oracle(&w);
        assert!((got.theta_i - oi).abs() < 1e-6, "{truth:?}: {got:?} vs ({oi}, {oj})");
        assert!((got.theta_j - oj).abs() < 1e-6, "{truth:?}: {got:?} vs ({oi}, {oj})");
        assert!(matches!(w.classify().unwrap(), CaseLabel::Generic(Some(_))));
    }
}

#[test]
fn oracle_agrees_on_the_right_triangle_family() {
    // parameters of a 30-60-90 triangle with the right angle at each vertex
    for (ti, tj) in [(PI / 2.0, PI / 6.0), (PI / 3.0, PI / 2.0), (PI / 6.0, PI / 3.0)] {
        let a = TriangleAngles::new(ti, tj, PI - ti - tj).unwrap();
        let w = params_from_angles(&a, None).unwrap();
        let (oi, oj) = oracle(&w);
        let got = w.recover_angles().unwrap();
        assert!((got.theta_i - oi).abs() < 1e-6 && (got.theta_j - oj).abs() < 1e-6);
    }
}

#[test]
fn obtuse_vertex_is_reported() {
    let a = TriangleAngles::new(0.3, 2.2, PI - 2.5).unwrap();
    let w = params_from_angles(&a, None).unwrap();
    assert_eq!(w.classify().unwrap(), CaseLabel::Generic(Some(Vertex::J)));
}
