//! Degeneration experiments: straight matrix paths from an interior angle
//! Gram toward a boundary matrix, per-step volume estimates with a Cauchy
//! verdict, and the experiments built on random simplices.

mod experiments;
mod families;
mod random;

pub use experiments::{
    apex_distance_bound_case, apex_distance_bound_experiment, length_discontinuity_demo,
    ApexBoundCase, ApexBoundReport, LengthDiscontinuityReport, LengthSequence,
};
pub use families::{regular_gram, triangle_gram, PathFamily};
pub use random::{random_angle_gram, random_simplex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{AngleGramMatrix, Geometry, Tag};
use crate::matrix_core::{sym_eigen, SymMatrix};
use crate::volume_engine::{
    combined_se, hyperbolic_volume, spherical_volume, HyperbolicMethod, MCConfig, VolumeEstimate,
};

/// Default Cauchy threshold on successive volume differences.
pub const DEFAULT_THRESHOLD: f64 = 0.02;
/// Default number of schedule points.
pub const DEFAULT_STEPS: usize = 24;
/// Default `1 − t` at the last geometric schedule point.
pub const DEFAULT_FINAL_GAP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Geometric,
    Linear,
}

/// `steps` points from `t0` up to `1 − final_gap`.
///
/// Geometric spacing uses `1 − t_k = (1 − t0)·ρᵏ`; linear spacing is
/// uniform. A single step is `{t0}`.
pub fn schedule(steps: usize, spacing: Spacing, t0: f64, final_gap: f64) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("a path needs at least one step".into()));
    }
    if !(0.0..1.0).contains(&t0) {
        return Err(Error::InvalidArgument(format!("t0 must lie in [0,1), got {t0}")));
    }
    if !(final_gap > 0.0 && final_gap < 1.0 - t0) {
        return Err(Error::InvalidArgument(format!(
            "final gap must lie in (0, {}), got {final_gap}",
            1.0 - t0
        )));
    }
    if steps == 1 {
        return Ok(vec![t0]);
    }
    let last = (steps - 1) as f64;
    Ok(match spacing {
        Spacing::Geometric => {
            let rho = (final_gap / (1.0 - t0)).powf(1.0 / last);
            (0..steps)
                .map(|k| 1.0 - (1.0 - t0) * rho.powi(k as i32))
                .collect()
        }
        Spacing::Linear => {
            let end = 1.0 - final_gap;
            (0..steps).map(|k| t0 + (end - t0) * k as f64 / last).collect()
        }
    })
}

/// `A(t) = (1−t)·A0 + t·A1` sampled on an increasing schedule in `[0, 1)`.
#[derive(Clone, Debug, Serialize)]
pub struct MatrixPath {
    a0: AngleGramMatrix,
    a1: SymMatrix,
    schedule: Vec<f64>,
    geometry: Geometry,
}

impl MatrixPath {
    /// Checks the endpoints and the schedule, then classifies `A(t)` at every
    /// scheduled `t`; the first `t` where the class changes is reported.
    pub fn new(a0: AngleGramMatrix, a1: SymMatrix, schedule: Vec<f64>) -> Result<Self> {
        let geometry = match a0.tag().geometry() {
            Some(g) => g,
            None if a0.tag() == Tag::ClosureBoundary => return Err(Error::BoundaryMatrix),
            None => {
                return Err(Error::ClassificationMismatch {
                    expected: "Spherical or Hyperbolic".into(),
                    found: a0.tag().to_string(),
                })
            }
        };
        if a1.dim() != a0.matrix().dim() {
            return Err(Error::DimensionMismatch {
                expected: a0.matrix().dim(),
                found: a1.dim(),
            });
        }
        for i in 0..a1.dim() {
            if (a1[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::NotAngleGramCandidate {
                    index: i,
                    value: a1[(i, i)],
                });
            }
        }
        if schedule.is_empty() {
            return Err(Error::InvalidArgument("empty schedule".into()));
        }
        for (k, &t) in schedule.iter().enumerate() {
            if !(0.0..1.0).contains(&t) {
                return Err(Error::InvalidArgument(format!(
                    "schedule value {t} at position {k} lies outside [0,1)"
                )));
            }
            if k > 0 && t <= schedule[k - 1] {
                return Err(Error::InvalidArgument(format!(
                    "schedule is not strictly increasing at position {k}"
                )));
            }
        }
        let path = MatrixPath {
            a0,
            a1,
            schedule,
            geometry,
        };
        for &t in &path.schedule {
            let inside = path
                .angle_gram_at(t)
                .is_ok_and(|a| a.tag() == Tag::from(geometry));
            if !inside {
                return Err(Error::PathExitsClass {
                    t,
                    expected: geometry.to_string(),
                });
            }
        }
        Ok(path)
    }

    pub fn a0(&self) -> &AngleGramMatrix {
        &self.a0
    }

    pub fn a1(&self) -> &SymMatrix {
        &self.a1
    }

    pub fn schedule(&self) -> &[f64] {
        &self.schedule
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn matrix_at(&self, t: f64) -> SymMatrix {
        let a0 = self.a0.matrix();
        SymMatrix::from_upper(a0.dim(), |i, j| (1.0 - t) * a0[(i, j)] + t * self.a1[(i, j)])
    }

    pub fn angle_gram_at(&self, t: f64) -> Result<AngleGramMatrix> {
        AngleGramMatrix::with_default_tol(self.matrix_at(t))
    }
}

/// [`MatrixPath`] on a default-parameter schedule starting at `t = 0`.
pub fn build_path(
    a0: AngleGramMatrix,
    a1: SymMatrix,
    steps: usize,
    spacing: Spacing,
) -> Result<MatrixPath> {
    MatrixPath::new(a0, a1, schedule(steps, spacing, 0.0, DEFAULT_FINAL_GAP)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub threshold: f64,
    pub hyperbolic_method: HyperbolicMethod,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            threshold: DEFAULT_THRESHOLD,
            hyperbolic_method: HyperbolicMethod::KleinMC,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub t: f64,
    pub tag: Tag,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub det: f64,
    pub min_adjugate: f64,
    pub volume: VolumeEstimate,
    /// `|V(t_k) − V(t_{k−1})|`; absent on the first step.
    pub succ_diff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuitySummary {
    pub threshold: f64,
    /// Index of the first step of the last quartile.
    pub last_quartile_start: usize,
    pub max_last_quartile_diff: f64,
    /// Largest `diff − (threshold + 3·combined SE)` over the last quartile;
    /// negative when every difference clears its bound.
    pub max_excess: f64,
    pub verdict: Verdict,
    pub limit_estimate: VolumeEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerationReport {
    pub geometry: Geometry,
    pub steps: Vec<StepRow>,
    pub summary: ContinuitySummary,
}

/// Runs [`run_continuity_experiment_with`] with default options.
pub fn run_continuity_experiment(path: &MatrixPath, mc: &MCConfig) -> Result<DegenerationReport> {
    run_continuity_experiment_with(path, mc, &ExperimentOptions::default())
}

/// Estimates the volume at every scheduled `t` (step `k` draws from
/// `mc.fork(k)`) and applies the Cauchy test to the last quartile:
/// pass iff every successive difference there is below
/// `threshold + 3·combined SE`. Any step with variance overflow makes the
/// verdict inconclusive.
pub fn run_continuity_experiment_with(
    path: &MatrixPath,
    mc: &MCConfig,
    opts: &ExperimentOptions,
) -> Result<DegenerationReport> {
    mc.validate()?;
    if !(opts.threshold >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be nonnegative, got {}",
            opts.threshold
        )));
    }
    let rows: Vec<StepRow> = path
        .schedule
        .par_iter()
        .enumerate()
        .map(|(k, &t)| {
            let a = path.angle_gram_at(t)?;
            let c = a.classification();
            let eig = sym_eigen(a.matrix())?;
            let step_mc = mc.fork(k as u64);
            let volume = match path.geometry {
                Geometry::Spherical => spherical_volume(&a, &step_mc)?,
                Geometry::Hyperbolic => hyperbolic_volume(&a, &step_mc, opts.hyperbolic_method)?,
            };
            Ok(StepRow {
                t,
                tag: c.tag,
                lambda_min: eig.min_value(),
                lambda_max: eig.max_value(),
                det: c.det,
                min_adjugate: c.min_adjugate_entry,
                volume,
                succ_diff: None,
            })
        })
        .collect::<Result<_>>()?;
    let mut rows = rows;
    for k in 1..rows.len() {
        rows[k].succ_diff = Some((rows[k].volume.value - rows[k - 1].volume.value).abs());
    }

    let n = rows.len();
    let start = n - n.div_ceil(4);
    let mut max_diff = 0.0f64;
    let mut max_excess = f64::NEG_INFINITY;
    for k in start.max(1)..n {
        let diff = rows[k].succ_diff.unwrap_or(0.0);
        let se = combined_se(rows[k].volume.std_error, rows[k - 1].volume.std_error);
        max_diff = max_diff.max(diff);
        max_excess = max_excess.max(diff - (opts.threshold + 3.0 * se));
    }
    if max_excess == f64::NEG_INFINITY {
        max_excess = -opts.threshold;
    }
    let verdict = if rows.iter().any(|r| r.volume.variance_overflow) {
        Verdict::Inconclusive
    } else if max_excess < 0.0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let limit_estimate = rows[n - 1].volume;
    Ok(DegenerationReport {
        geometry: path.geometry,
        steps: rows,
        summary: ContinuitySummary {
            threshold: opts.threshold,
            last_quartile_start: start,
            max_last_quartile_diff: max_diff,
            max_excess,
            verdict,
            limit_estimate,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{angle_gram_from_angles, AngleMatrix};
    use crate::volume_engine::within_se;
    use std::f64::consts::PI;

    fn ones(m: usize) -> SymMatrix {
        SymMatrix::from_upper(m, |_, _| 1.0)
    }

    #[test]
    fn schedules() {
        let g = schedule(24, Spacing::Geometric, 0.0, 1e-4).unwrap();
        assert_eq!(g.len(), 24);
        assert_eq!(g[0], 0.0);
        assert!((1.0 - g[23] - 1e-4).abs() < 1e-15);
        for k in 1..24 {
            assert!(g[k] > g[k - 1]);
            let ratio = (1.0 - g[k]) / (1.0 - g[k - 1]);
            assert!((ratio - (1e-4f64).powf(1.0 / 23.0)).abs() < 1e-12);
        }
        let l = schedule(5, Spacing::Linear, 0.2, 0.2).unwrap();
        let expected = [0.2, 0.35, 0.5, 0.65, 0.8];
        for (a, b) in l.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(schedule(1, Spacing::Geometric, 0.3, 1e-4).unwrap(), vec![0.3]);
        assert!(schedule(0, Spacing::Linear, 0.0, 1e-4).is_err());
        assert!(schedule(3, Spacing::Linear, 1.0, 1e-4).is_err());
        assert!(schedule(3, Spacing::Linear, 0.5, 0.6).is_err());
    }

    #[test]
    fn identity_toward_all_ones_stays_spherical() {
        for m in 2..=5 {
            let a0 = AngleGramMatrix::with_default_tol(SymMatrix::identity(m)).unwrap();
            let path = build_path(a0, ones(m), 24, Spacing::Geometric).unwrap();
            for &t in path.schedule() {
                let eig = sym_eigen(&path.matrix_at(t)).unwrap();
                assert!((eig.min_value() - (1.0 - t)).abs() < 1e-12);
                assert!((eig.max_value() - (1.0 + (m as f64 - 1.0) * t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hyperbolic_triangle_toward_euclidean() {
        let a0 = angle_gram_from_angles(&AngleMatrix::regular(2, PI / 6.0).unwrap()).unwrap();
        let a1 = regular_gram(2, PI / 3.0);
        let path = build_path(a0, a1, 24, Spacing::Geometric).unwrap();
        for &t in path.schedule() {
            assert_eq!(path.angle_gram_at(t).unwrap().tag(), Tag::Hyperbolic);
        }
    }

    #[test]
    fn exits_are_reported_at_first_bad_t() {
        // spherical identity toward a matrix with an off-diagonal −1: the
        // 2×2 minor loses definiteness only at t = 1, but −2 crosses at t = 1/2
        let a0 = AngleGramMatrix::with_default_tol(SymMatrix::identity(3)).unwrap();
        let a1 = SymMatrix::from_upper(3, |i, j| if i == j { 1.0 } else if j == 1 { -2.0 } else { 0.0 });
        let s = vec![0.1, 0.3, 0.6, 0.9];
        match MatrixPath::new(a0, a1, s) {
            Err(Error::PathExitsClass { t, expected }) => {
                assert_eq!(t, 0.6);
                assert_eq!(expected, "Spherical");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_schedules() {
        let a0 = AngleGramMatrix::with_default_tol(SymMatrix::identity(3)).unwrap();
        for s in [vec![0.1, 0.1], vec![0.5, 0.2], vec![0.2, 1.0], vec![-0.1], vec![]] {
            let err = MatrixPath::new(a0.clone(), ones(3), s).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{err}");
        }
        let boundary = AngleGramMatrix::with_default_tol(ones(3)).unwrap();
        assert!(matches!(
            MatrixPath::new(boundary, ones(3), vec![0.0]),
            Err(Error::BoundaryMatrix)
        ));
        assert!(MatrixPath::new(a0, ones(4), vec![0.0]).is_err());
    }

    #[test]
    fn constant_path_differences_are_noise() {
        let a0 = angle_gram_from_angles(&AngleMatrix::regular(2, 1.3).unwrap()).unwrap();
        let a1 = a0.matrix().clone();
        let path = MatrixPath::new(a0, a1, schedule(8, Spacing::Linear, 0.0, 0.1).unwrap()).unwrap();
        let report = run_continuity_experiment(&path, &MCConfig::new(3, 50_000)).unwrap();
        assert_eq!(report.steps.len(), 8);
        for w in report.steps.windows(2) {
            let se = combined_se(w[0].volume.std_error, w[1].volume.std_error);
            assert!(within_se(w[1].volume.value, w[0].volume.value, se, 4.0));
        }
        assert_eq!(report.summary.verdict, Verdict::Pass);
    }

    #[test]
    fn hyperbolic_triangle_tracks_angle_defect() {
        let start = triangle_gram([PI / 6.0 + 0.3, PI / 6.0, PI / 6.0]);
        let a0 = AngleGramMatrix::with_default_tol(start).unwrap();
        let a1 = triangle_gram([PI / 6.0; 3]);
        let path = build_path(a0, a1, 10, Spacing::Linear).unwrap();
        let report = run_continuity_experiment(&path, &MCConfig::new(8, 100_000)).unwrap();
        for row in &report.steps {
            let a = path.angle_gram_at(row.t).unwrap().angles().unwrap();
            let defect = PI - a.pairs().iter().map(|p| p.2).sum::<f64>();
            assert!(within_se(row.volume.value, defect, row.volume.std_error, 4.0), "t = {}", row.t);
        }
    }

    #[test]
    fn euclidean_limit_volumes_vanish() {
        let a0 = angle_gram_from_angles(&AngleMatrix::regular(2, PI / 6.0).unwrap()).unwrap();
        let path = build_path(a0, regular_gram(2, PI / 3.0), 24, Spacing::Geometric).unwrap();
        let report = run_continuity_experiment(&path, &MCConfig::new(2, 100_000)).unwrap();
        assert_eq!(report.summary.verdict, Verdict::Pass);
        let last = report.summary.limit_estimate;
        assert!(last.value < 1e-3, "{last:?}");
        let first = report.steps[0].volume;
        assert!(within_se(first.value, PI / 2.0, first.std_error, 4.0));
    }

    #[test]
    fn reports_are_deterministic() {
        let path = PathFamily::Lune { alpha: 1.0 }.path(12, Spacing::Geometric).unwrap();
        let mc = MCConfig::new(17, 20_000);
        let a = run_continuity_experiment(&path, &mc).unwrap();
        let b = run_continuity_experiment(&path, &mc).unwrap();
        assert_eq!(a, b);
    }
}
