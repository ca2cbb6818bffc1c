use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use super::StackedConstraintSystem;
use crate::angle_params::{params_from_points, AngleParameterSet};
use crate::error::Result;
use crate::geom::{seeded_rng, LocalFrame, NetworkGraph, NodeId, Position3};

/// Scalar angle constraint on a triple `(i, j, k)`:
/// `w_ik <e_ik, e_ij> + w_ki <e_ki, e_kj> = 0` with `e_ab = p_b - p_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleConstraintForm {
    pub triple: [NodeId; 3],
    pub w_ik: f64,
    pub w_ki: f64,
}

impl AngleConstraintForm {
    pub fn value(&self, x: &[Vector3<f64>]) -> f64 {
        let [i, j, k] = self.triple.map(|n| x[n.0]);
        self.w_ik * (k - i).dot(&(j - i)) + self.w_ki * (i - k).dot(&(j - k))
    }

    /// `value` over `(|w_ik| + |w_ki|) * (longest side)^2`.
    pub fn relative_value(&self, x: &[Vector3<f64>]) -> f64 {
        let [i, j, k] = self.triple.map(|n| x[n.0]);
        let side = (j - i).norm().max((k - i).norm()).max((k - j).norm());
        let scale = (self.w_ik.abs() + self.w_ki.abs()) * side * side;
        let v = self.value(x);
        if scale == 0.0 {
            v.abs()
        } else {
            v.abs() / scale
        }
    }

    /// The three forms of a triangle, one per parameter equation.
    pub fn for_triangle(triple: [NodeId; 3], p: &AngleParameterSet) -> [AngleConstraintForm; 3] {
        let [i, j, k] = triple;
        [
            AngleConstraintForm {
                triple: [i, j, k],
                w_ik: p.w_ik,
                w_ki: p.w_ki,
            },
            AngleConstraintForm {
                triple: [i, k, j],
                w_ik: p.w_ij,
                w_ki: p.w_ji,
            },
            AngleConstraintForm {
                triple: [j, i, k],
                w_ik: p.w_jk,
                w_ki: p.w_kj,
            },
        ]
    }
}

/// Forms for every triangle of `graph`, parameterized from `truth`.
pub fn angle_forms_from_truth(graph: &NetworkGraph, truth: &[Position3]) -> Result<Vec<AngleConstraintForm>> {
    let mut out = Vec::new();
    for t in graph.triangles() {
        let (_, params) = params_from_points(&truth[t[0].0], &truth[t[1].0], &truth[t[2].0])?;
        out.extend(AngleConstraintForm::for_triangle(t, &params));
    }
    Ok(out)
}

/// Similarity transform applied to the configuration by [`invariance_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceProbe {
    pub translation: Vector3<f64>,
    pub rotation: Rotation3<f64>,
    pub scale: f64,
}

impl InvarianceProbe {
    pub fn random(seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let translation = Vector3::from_fn(|_, _| 10.0 * rng.sample::<f64, _>(StandardNormal));
        let rotation = Rotation3::from_matrix_unchecked(LocalFrame::random(&mut rng).matrix());
        let scale = rng.random_range(0.25..4.0);
        InvarianceProbe {
            translation,
            rotation,
            scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvarianceReport {
    /// Max relative residual of `B p`.
    pub scaling: f64,
    /// Max relative residual of `B (1_n (x) I_3)` over the three axes.
    pub translation: f64,
    /// Max relative residual of `B (I_n (x) A) p` over a skew-symmetric basis.
    pub rotation: f64,
    pub angle_base: f64,
    pub angle_translated: f64,
    pub angle_rotated: f64,
    pub angle_scaled: f64,
}

impl InvarianceReport {
    pub fn max_displacement(&self) -> f64 {
        self.scaling.max(self.translation).max(self.rotation)
    }

    pub fn max_angle(&self) -> f64 {
        self.angle_base
            .max(self.angle_translated)
            .max(self.angle_rotated)
            .max(self.angle_scaled)
    }

    pub fn max(&self) -> f64 {
        self.max_displacement().max(self.max_angle())
    }
}

fn skew_basis() -> [Matrix3<f64>; 3] {
    [
        Matrix3::new(0., -1., 0., 1., 0., 0., 0., 0., 0.),
        Matrix3::new(0., 0., 1., 0., 0., 0., -1., 0., 0.),
        Matrix3::new(0., 0., 0., 0., 0., -1., 0., 1., 0.),
    ]
}

/// Residuals of the null-space and similarity-invariance properties.
pub fn invariance_check(
    system: &StackedConstraintSystem,
    angle_forms: &[AngleConstraintForm],
    p: &[Position3],
    probe: &InvarianceProbe,
) -> InvarianceReport {
    let x: Vec<Vector3<f64>> = p.iter().map(|q| q.coords).collect();
    let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
    let translation = axes
        .iter()
        .map(|e| system.max_relative_residual(&vec![*e; x.len()]))
        .fold(0.0, f64::max);
    let rotation = skew_basis()
        .iter()
        .map(|a| system.max_relative_residual(&x.iter().map(|v| a * v).collect::<Vec<_>>()))
        .fold(0.0, f64::max);

    let forms_max = |y: &[Vector3<f64>]| angle_forms.iter().map(|f| f.relative_value(y)).fold(0.0, f64::max);
    let translated: Vec<_> = x.iter().map(|v| v + probe.translation).collect();
    let rotated: Vec<_> = x.iter().map(|v| probe.rotation * v).collect();
    let scaled: Vec<_> = x.iter().map(|v| v * probe.scale).collect();

    InvarianceReport {
        scaling: system.max_relative_residual(&x),
        translation,
        rotation,
        angle_base: forms_max(&x),
        angle_translated: forms_max(&translated),
        angle_rotated: forms_max(&rotated),
        angle_scaled: forms_max(&scaled),
    }
}
