mod common;

use std::collections::BTreeMap;

use common::Scenario;
use nalgebra::Vector3;
use netloc_core::constraints::{build_constraint, enumerate_tuples, BuilderConfig};
use netloc_core::fixtures::{sample_network, sample_positions};
use netloc_core::geom::{synthesize_measurements, MeasurementKind, NodeId, NoiseSpec};
use netloc_core::localization::{
    angle_forms_from_truth, assemble, invariance_check, rmse, solve_distributed, solve_global, DistributedParams,
    InvarianceProbe,
};

fn noiseless() -> NoiseSpec {
    NoiseSpec::none()
}

#[test]
fn every_family_recovers_truth() {
    let sc = Scenario::random(34, 4, 0.7, false, 0);
    for kind in MeasurementKind::ALL {
        let sys = sc.system(kind, false, &noiseless(), &BuilderConfig::default(), 3);
        let g = solve_global(&sys, &sc.anchors()).unwrap();
        assert!(g.converged, "{kind}");
        assert!(rmse(&g.positions, &sc.truth, &sc.free()).unwrap() < 1e-6, "{kind}");

        let d = solve_distributed(&sys, &sc.anchors(), &DistributedParams::default()).unwrap();
        assert!(d.converged, "{kind}");
        assert!(rmse(&d.positions, &g.positions, &sc.free()).unwrap() < 1e-4, "{kind}");
        for a in sc.graph.anchors() {
            assert_eq!(d.positions[a.0], sc.truth[a.0]);
        }
    }
}

#[test]
fn coplanar_networks_use_three_neighbor_tuples() {
    let sc = Scenario::random(20, 3, 0.6, true, 0);
    for kind in MeasurementKind::ALL {
        let sys = sc.system(kind, true, &noiseless(), &BuilderConfig::default(), 1);
        assert!(sys.rows.iter().all(|r| r.constraint.neighbors.len() == 3));
        let g = solve_global(&sys, &sc.anchors()).unwrap();
        assert!(rmse(&g.positions, &sc.truth, &sc.free()).unwrap() < 1e-6, "{kind}");
    }
}

#[test]
fn noise_raises_error() {
    let sc = Scenario::random(34, 4, 0.7, false, 0);
    let mean = |sigma: f64| {
        (0..8)
            .map(|seed| {
                let sys = sc.system(
                    MeasurementKind::Distance,
                    false,
                    &NoiseSpec::gaussian(sigma),
                    &BuilderConfig::noisy(),
                    seed,
                );
                let g = solve_global(&sys, &sc.anchors()).unwrap();
                rmse(&g.positions, &sc.truth, &sc.free()).unwrap()
            })
            .sum::<f64>()
            / 8.0
    };
    let (small, large) = (mean(0.001), mean(0.01));
    assert!(small > 0.0 && large > small, "{small} vs {large}");
}

#[test]
fn invariance_for_every_family() {
    let sc = Scenario::random(30, 4, 0.7, false, 5);
    let forms = angle_forms_from_truth(&sc.graph, &sc.truth).unwrap();
    assert!(!forms.is_empty());
    for kind in MeasurementKind::ALL {
        let sys = sc.system(kind, false, &noiseless(), &BuilderConfig::default(), 2);
        assert!(!sys.is_empty());
        for seed in 0..3 {
            let rep = invariance_check(&sys, &forms, &sc.truth, &InvarianceProbe::random(seed));
            assert!(rep.max() < 1e-9, "{kind}: {rep:?}");
        }
        // a perturbed configuration is not in the null space
        let mut x: Vec<Vector3<f64>> = sc.truth.iter().map(|p| p.coords).collect();
        x[7] += Vector3::new(0.05, -0.02, 0.03);
        assert!(sys.residual_norm(&x) > 1e-4, "{kind}");
    }
}

#[test]
fn sample_network_bearings() {
    let g = sample_network();
    let truth = sample_positions();
    let meas = synthesize_measurements(&g, &truth, MeasurementKind::LocalBearing, &noiseless(), 0).unwrap();
    let tuples = enumerate_tuples(&g, MeasurementKind::LocalBearing, false);
    let built: Vec<_> = tuples
        .iter()
        .map(|t| build_constraint(t, &meas, &BuilderConfig::default()).unwrap())
        .collect();
    let sys = assemble(built, g.len()).unwrap();
    let x: Vec<_> = truth.iter().map(|p| p.coords).collect();
    assert!(sys.residual_norm(&x) <= 1e-9);

    let anchors: BTreeMap<_, _> = g.anchors().iter().map(|&a| (a, truth[a.0])).collect();
    let rep = solve_global(&sys, &anchors).unwrap();
    let free: Vec<NodeId> = g.free_nodes().collect();
    assert!(rep.converged);
    assert!(rmse(&rep.positions, &truth, &free).unwrap() < 1e-6);
}

#[test]
fn too_few_anchors_is_reported() {
    let sc = Scenario::random(34, 4, 0.7, false, 0);
    let sys = sc.system(
        MeasurementKind::Distance,
        false,
        &noiseless(),
        &BuilderConfig::default(),
        0,
    );
    // three anchors leave an affine degree of freedom in 3-D
    let anchors: BTreeMap<_, _> = sc.anchors().into_iter().take(3).collect();
    let g = solve_global(&sys, &anchors).unwrap();
    assert!(!g.converged);
    assert!(!g.rank_diagnostics.full_rank());
    let d = solve_distributed(
        &sys,
        &anchors,
        &DistributedParams {
            max_iters: 200,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(!d.converged);
}

#[test]
fn isolated_free_node_is_unlocalizable() {
    let sc = Scenario::random(34, 4, 0.7, false, 0);
    let sys = sc.system(
        MeasurementKind::Distance,
        false,
        &noiseless(),
        &BuilderConfig::default(),
        0,
    );
    let target = NodeId(9);
    let rows: Vec<_> = sys
        .rows
        .iter()
        .filter(|r| r.constraint.center != target && !r.constraint.neighbors.contains(&target))
        .map(|r| r.constraint.clone())
        .collect();
    let cut = assemble(rows, sys.n).unwrap();
    let g = solve_global(&cut, &sc.anchors()).unwrap();
    assert!(!g.converged);
    assert_eq!(g.rank_diagnostics.rank, g.rank_diagnostics.free_columns - 1);
}
