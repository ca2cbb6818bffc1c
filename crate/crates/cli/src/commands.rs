//! The five subcommands as pure functions over in-memory artifacts.
//!
//! Each command returns its artifacts together with an optional failure.
//! A failure that comes with artifacts means "write what we have, then exit
//! nonzero" (e.g. positions of a rank-deficient system).

use std::collections::BTreeMap;
use std::time::Instant;

use netloc_core::angle_params::{params_from_points, CaseLabel, TriangleAngles};
use netloc_core::constraints::{build_all, enumerate_tuples_capped, BuilderConfig};
use netloc_core::geom::{synthesize_measurements, MeasurementKind, NoiseSpec, RNG_ALGORITHM};
use netloc_core::localization::{
    angle_forms_from_truth, assemble, invariance_check, rmse, solve_distributed, solve_global, DistributedParams,
    InvarianceProbe, SolveReport,
};
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, ExitKind};
use crate::report::{thin_trace, BuilderDiagnostics, InvarianceSummary, RankReport, RunReport};
use crate::scenario::{generate, ScenarioConfig};
use crate::schema::{positions_csv, ConstraintRecord, ConstraintsFile, NetworkFile, SkippedTuple};

/// Tolerance for every check performed by `verify`.
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverChoice {
    Global,
    Distributed(DistributedParams),
}

impl SolverChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SolverChoice::Global => "global",
            SolverChoice::Distributed(_) => "distributed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintOptions {
    /// Defaults to the kind of the measurements in the file.
    pub kind: Option<MeasurementKind>,
    pub coplanar: bool,
    /// Noise for measurements synthesized from truth.
    pub noise_sigma: f64,
    pub seed: u64,
    pub max_tuples_per_node: Option<usize>,
}

impl Default for ConstraintOptions {
    fn default() -> Self {
        ConstraintOptions {
            kind: None,
            coplanar: false,
            noise_sigma: 0.0,
            seed: 0,
            max_tuples_per_node: Some(12),
        }
    }
}

pub fn cmd_generate(config: &ScenarioConfig) -> Result<NetworkFile, CliError> {
    let sc = generate(config)?;
    let meas = synthesize_measurements(
        &sc.graph,
        &sc.truth,
        config.kind(),
        &NoiseSpec::gaussian(config.noise_sigma),
        config.seed,
    )
    .map_err(CliError::from_core)?;
    let meta = json!({
        "generator": "netloc",
        "rng": RNG_ALGORITHM,
        "attempt": sc.attempt,
        "config": config,
    });
    Ok(NetworkFile::from_parts(
        &sc.graph,
        Some(&sc.truth),
        Some(&meas),
        Some(meta),
    ))
}

fn meta_sigma(net: &NetworkFile) -> Option<f64> {
    net.meta.as_ref()?.get("config")?.get("noise_sigma")?.as_f64()
}

pub fn cmd_constraints(
    net: &NetworkFile,
    opts: &ConstraintOptions,
) -> Result<(ConstraintsFile, BuilderDiagnostics, Option<CliError>), CliError> {
    let graph = net.graph()?;
    let truth = net.truth();
    let stored = net.measurement_set()?;
    let kind = opts
        .kind
        .or(stored.as_ref().map(|m| m.kind()))
        .ok_or_else(|| CliError::validation("no measurement kind given and none stored in the network file"))?;

    let (meas, sigma) = match stored {
        Some(m) if m.kind() == kind => (m, meta_sigma(net).unwrap_or(opts.noise_sigma)),
        _ => {
            let t = truth.as_ref().ok_or_else(|| {
                CliError::validation(format!(
                    "no {kind} measurements in the file and no truth to synthesize them from"
                ))
            })?;
            let m = synthesize_measurements(&graph, t, kind, &NoiseSpec::gaussian(opts.noise_sigma), opts.seed)
                .map_err(CliError::from_core)?;
            (m, opts.noise_sigma)
        }
    };
    let config = if sigma > 0.0 {
        BuilderConfig::noisy()
    } else {
        BuilderConfig::default()
    };

    let tuples = enumerate_tuples_capped(&graph, kind, opts.coplanar, opts.max_tuples_per_node);
    let results = build_all(&tuples, &meas, &config);

    let mut constraints = Vec::new();
    let mut skipped = Vec::new();
    let mut reasons: BTreeMap<String, usize> = BTreeMap::new();
    for (t, r) in tuples.iter().zip(results) {
        match r {
            Ok(c) => constraints.push(ConstraintRecord::from_constraint(&c, truth.as_deref())),
            Err(e) => {
                *reasons.entry(e.tag().to_string()).or_default() += 1;
                skipped.push(SkippedTuple {
                    center: t.center.0,
                    neighbors: t.neighbors.iter().map(|v| v.0).collect(),
                    error: e.tag().to_string(),
                    message: e.to_string(),
                });
            }
        }
    }
    let diagnostics = BuilderDiagnostics {
        tuples: tuples.len(),
        built: constraints.len(),
        degenerate: constraints.iter().filter(|c| c.degenerate).count(),
        skipped: reasons,
        max_residual: truth
            .is_some()
            .then(|| constraints.iter().filter_map(|c| c.residual).fold(0.0, f64::max)),
    };
    let failure = constraints.is_empty().then(|| {
        CliError::new(
            ExitKind::Unlocalizable,
            "no_constraints",
            format!(
                "no {kind} constraints could be built from {} candidate tuples",
                tuples.len()
            ),
        )
        .with_details(json!({ "skipped": diagnostics.skipped }))
    });
    let file = ConstraintsFile {
        kind: kind.name().to_string(),
        coplanar: opts.coplanar,
        constraints,
        skipped,
    };
    Ok((file, diagnostics, failure))
}

fn diagnostics_of(cons: &ConstraintsFile) -> BuilderDiagnostics {
    let mut skipped: BTreeMap<String, usize> = BTreeMap::new();
    for s in &cons.skipped {
        *skipped.entry(s.error.clone()).or_default() += 1;
    }
    BuilderDiagnostics {
        tuples: cons.constraints.len() + cons.skipped.len(),
        built: cons.constraints.len(),
        degenerate: cons.constraints.iter().filter(|c| c.degenerate).count(),
        skipped,
        max_residual: cons
            .constraints
            .iter()
            .map(|c| c.residual)
            .collect::<Option<Vec<_>>>()
            .map(|r| r.into_iter().fold(0.0, f64::max)),
    }
}

pub struct LocalizeOutput {
    pub csv: String,
    pub report: RunReport,
    pub solve: SolveReport,
}

pub fn cmd_localize(
    net: &NetworkFile,
    cons: &ConstraintsFile,
    solver: &SolverChoice,
    timings: bool,
) -> Result<(LocalizeOutput, Option<CliError>), CliError> {
    let start = Instant::now();
    let graph = net.graph()?;
    let anchors = net.anchor_positions()?;
    let system = assemble(cons.constraints(graph.len())?, graph.len()).map_err(CliError::from_core)?;
    let assembled = start.elapsed();
    let solve = match solver {
        SolverChoice::Global => solve_global(&system, &anchors),
        SolverChoice::Distributed(p) => solve_distributed(&system, &anchors, p),
    }
    .map_err(CliError::from_core)?;
    let solved = start.elapsed();

    let truth = net.truth();
    let free: Vec<_> = graph.free_nodes().collect();
    let error = match (&truth, free.is_empty()) {
        (Some(t), false) => Some(rmse(&solve.positions, t, &free).map_err(CliError::from_core)?),
        _ => None,
    };
    let report = RunReport {
        rng_algorithm: RNG_ALGORITHM,
        kind: cons.kind.clone(),
        solver: solver.name().to_string(),
        nodes: graph.len(),
        anchors: anchors.len(),
        constraint_count: system.rows.len(),
        builder: diagnostics_of(cons),
        rank: RankReport::from(&solve.rank_diagnostics),
        residual_norm: solve.residual_norm,
        rmse: error,
        iterations: solve.iterations,
        converged: solve.converged,
        diverged: solve.diverged,
        trace: thin_trace(&solve.trace),
        invariance: None,
        timings_ms: timings.then(|| {
            BTreeMap::from([
                ("assemble".to_string(), assembled.as_secs_f64() * 1e3),
                ("solve".to_string(), (solved - assembled).as_secs_f64() * 1e3),
            ])
        }),
    };
    let rank = &solve.rank_diagnostics;
    let failure = if system.is_empty() {
        Some(CliError::new(
            ExitKind::Unlocalizable,
            "no_constraints",
            "constraint file holds no usable constraints",
        ))
    } else if !rank.full_rank() {
        Some(
            CliError::new(
                ExitKind::Unlocalizable,
                "rank_deficient",
                format!("free block has rank {} of {} columns", rank.rank, rank.free_columns),
            )
            .with_details(serde_json::to_value(RankReport::from(rank)).unwrap()),
        )
    } else if !solve.converged {
        Some(CliError::new(
            ExitKind::ToleranceBreach,
            if solve.diverged { "diverged" } else { "not_converged" },
            format!(
                "solver stopped after {} rounds at residual {:e}",
                solve.iterations, solve.residual_norm
            ),
        ))
    } else {
        None
    };
    let csv = positions_csv(&solve.positions, truth.as_deref());
    Ok((LocalizeOutput { csv, report, solve }, failure))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Offender {
    pub constraint: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub tolerance: f64,
    pub constraints: usize,
    pub max_constraint_residual: f64,
    pub worst_constraints: Vec<Offender>,
    pub invariance: InvarianceSummary,
    pub triangles: usize,
    pub max_angle_round_trip: f64,
    pub colinear_triangles: usize,
    /// Largest `|sum - 1|` over the ratio sums of colinear triangles.
    pub max_colinear_ratio_sum_gap: f64,
    pub pass: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("verify report serializes");
        s.push('\n');
        s
    }
}

pub fn cmd_verify(net: &NetworkFile, cons: &ConstraintsFile) -> Result<(VerifyReport, Option<CliError>), CliError> {
    let graph = net.graph()?;
    let truth = net
        .truth()
        .ok_or_else(|| CliError::validation("verify needs ground truth on every node"))?;
    let constraints = cons.constraints(graph.len())?;

    let mut residuals: Vec<Offender> = constraints
        .iter()
        .zip(&cons.constraints)
        .filter(|(c, _)| !c.degenerate)
        .map(|(c, rec)| Offender {
            constraint: rec.label(),
            residual: c.relative_residual(&truth),
        })
        .collect();
    residuals.sort_by(|a, b| {
        b.residual
            .total_cmp(&a.residual)
            .then_with(|| a.constraint.cmp(&b.constraint))
    });
    let max_constraint_residual = residuals.first().map_or(0.0, |o| o.residual);

    let system = assemble(constraints, graph.len()).map_err(CliError::from_core)?;
    let forms = angle_forms_from_truth(&graph, &truth).map_err(CliError::from_core)?;
    let inv = invariance_check(&system, &forms, &truth, &InvarianceProbe::random(0));

    let triangles = graph.triangles();
    let mut max_round_trip = 0.0f64;
    let mut colinear = 0;
    let mut max_gap = 0.0f64;
    for t in &triangles {
        let [a, b, c] = t.map(|v| truth[v.0]);
        let (angles, params) = params_from_points(&a, &b, &c).map_err(CliError::from_core)?;
        let back: TriangleAngles = params
            .recover_angles()
            .map_err(|e| CliError::from_core(e).context(format!("{t:?}")))?;
        for (x, y) in angles.as_array().iter().zip(back.as_array()) {
            max_round_trip = max_round_trip.max((x - y).abs());
        }
        if let Ok(CaseLabel::Colinear(_)) = params.classify() {
            colinear += 1;
            let w = params;
            for s in [
                w.w_ki / w.w_ik + w.w_ji / w.w_ij,
                w.w_ij / w.w_ji + w.w_kj / w.w_jk,
                w.w_ik / w.w_ki + w.w_jk / w.w_kj,
            ] {
                max_gap = max_gap.max((s - 1.0).abs());
            }
        }
    }

    let summary = InvarianceSummary::from(&inv);
    let pass = max_constraint_residual <= VERIFY_TOL
        && inv.max() <= VERIFY_TOL
        && max_round_trip <= VERIFY_TOL
        && max_gap <= VERIFY_TOL;
    let worst: Vec<Offender> = residuals.iter().take(5).cloned().collect();
    let report = VerifyReport {
        tolerance: VERIFY_TOL,
        constraints: system.rows.len(),
        max_constraint_residual,
        worst_constraints: worst.clone(),
        invariance: summary.clone(),
        triangles: triangles.len(),
        max_angle_round_trip: max_round_trip,
        colinear_triangles: colinear,
        max_colinear_ratio_sum_gap: max_gap,
        pass,
    };
    let failure = (!pass).then(|| {
        let offenders: Vec<&Offender> = residuals
            .iter()
            .take_while(|o| o.residual > VERIFY_TOL)
            .take(5)
            .collect();
        let message = match offenders.first() {
            Some(o) => format!(
                "constraint {} has residual {:e} > {VERIFY_TOL:e}",
                o.constraint, o.residual
            ),
            None => format!("invariance or angle checks exceed {VERIFY_TOL:e}"),
        };
        CliError::new(ExitKind::ToleranceBreach, "tolerance_breach", message).with_details(json!({
            "offenders": offenders,
            "invariance": summary,
            "max_angle_round_trip": max_round_trip,
            "max_colinear_ratio_sum_gap": max_gap,
        }))
    });
    Ok((report, failure))
}

/// Every artifact of one `pipeline` run.
pub struct PipelineOutput {
    pub network: NetworkFile,
    pub constraints: ConstraintsFile,
    pub localize: Option<LocalizeOutput>,
    pub verify: Option<VerifyReport>,
}

pub fn cmd_pipeline(
    config: &ScenarioConfig,
    solver: &SolverChoice,
    timings: bool,
) -> Result<(PipelineOutput, Option<CliError>), CliError> {
    let network = cmd_generate(config)?;
    let opts = ConstraintOptions {
        kind: Some(config.kind()),
        coplanar: config.coplanar,
        noise_sigma: config.noise_sigma,
        seed: config.seed,
        max_tuples_per_node: config.max_tuples_per_node,
    };
    let (constraints, _, failure) = cmd_constraints(&network, &opts)?;
    if failure.is_some() {
        return Ok((
            PipelineOutput {
                network,
                constraints,
                localize: None,
                verify: None,
            },
            failure,
        ));
    }
    let (mut localize, loc_failure) = cmd_localize(&network, &constraints, solver, timings)?;
    let (verify, verify_failure) = cmd_verify(&network, &constraints)?;
    localize.report.invariance = Some(verify.invariance.clone());
    // with noise the truth is not an exact solution, so verify is informative only
    let failure = loc_failure.or(if config.noise_sigma == 0.0 {
        verify_failure
    } else {
        None
    });
    Ok((
        PipelineOutput {
            network,
            constraints,
            localize: Some(localize),
            verify: Some(verify),
        },
        failure,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{GraphModel, MeasurementKindName};

    fn cfg(kind: MeasurementKind) -> ScenarioConfig {
        ScenarioConfig {
            kind: MeasurementKindName(kind),
            ..Default::default()
        }
    }

    #[test]
    fn pipeline_recovers_truth_for_every_family() {
        for kind in MeasurementKind::ALL {
            let (out, failure) = cmd_pipeline(&cfg(kind), &SolverChoice::Global, false).unwrap();
            assert!(failure.is_none(), "{kind}: {failure:?}");
            let loc = out.localize.unwrap();
            assert!(loc.report.rmse.unwrap() < 1e-6, "{kind}");
            assert!(out.verify.unwrap().pass, "{kind}");
        }
    }

    #[test]
    fn no_edges_means_no_constraints() {
        let c = ScenarioConfig {
            nodes: 6,
            anchors: 4,
            graph: GraphModel::Complete,
            ..Default::default()
        };
        let mut net = cmd_generate(&c).unwrap();
        net.edges.clear();
        net.measurements = None;
        let opts = ConstraintOptions {
            kind: Some(MeasurementKind::Distance),
            ..Default::default()
        };
        let (file, _, failure) = cmd_constraints(&net, &opts).unwrap();
        assert!(file.constraints.is_empty());
        let f = failure.unwrap();
        assert_eq!((f.code(), f.error.as_str()), (3, "no_constraints"));
    }

    #[test]
    fn angle_tuple_missing_an_edge_is_skipped() {
        let c = ScenarioConfig {
            nodes: 6,
            anchors: 4,
            graph: GraphModel::Complete,
            kind: MeasurementKindName(MeasurementKind::Angle),
            ..Default::default()
        };
        let mut net = cmd_generate(&c).unwrap();
        net.edges.retain(|e| *e != [4, 5]);
        net.measurements = None;
        let opts = ConstraintOptions {
            kind: Some(MeasurementKind::Angle),
            ..Default::default()
        };
        let (file, _, _) = cmd_constraints(&net, &opts).unwrap();
        assert!(file.constraints.iter().all(|r| {
            let nodes: Vec<usize> = std::iter::once(r.center).chain(r.neighbors.iter().copied()).collect();
            !(nodes.contains(&4) && nodes.contains(&5))
        }));
    }

    #[test]
    fn corrupted_mu_fails_verify() {
        let net = cmd_generate(&cfg(MeasurementKind::Distance)).unwrap();
        let (mut cons, _, _) = cmd_constraints(&net, &ConstraintOptions::default()).unwrap();
        cons.constraints[3].mu[0] += 0.1;
        let label = cons.constraints[3].label();
        let (report, failure) = cmd_verify(&net, &cons).unwrap();
        assert!(!report.pass);
        let f = failure.unwrap();
        assert_eq!(f.code(), 4);
        assert!(f.message.contains(&label), "{}", f.message);
    }

    #[test]
    fn missing_anchor_rows_are_rejected() {
        let mut net = cmd_generate(&cfg(MeasurementKind::Distance)).unwrap();
        let (cons, _, _) = cmd_constraints(&net, &ConstraintOptions::default()).unwrap();
        for n in &mut net.nodes {
            n.role = crate::schema::Role::Free;
        }
        let e = cmd_localize(&net, &cons, &SolverChoice::Global, false).err().unwrap();
        assert_eq!(e.code(), 2);
    }

    #[test]
    fn three_anchors_are_unlocalizable_in_space() {
        let c = ScenarioConfig {
            anchors: 3,
            ..cfg(MeasurementKind::Distance)
        };
        let (_, failure) = cmd_pipeline(&c, &SolverChoice::Global, false).unwrap();
        let f = failure.unwrap();
        assert_eq!((f.code(), f.error.as_str()), (3, "rank_deficient"));
    }
}
