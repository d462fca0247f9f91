//! Numerical certificates for the inequalities the step-size rules rely on.
//!
//! Checkers draw their samples from a caller-supplied [`Rng`] and report the
//! worst normalized slack `rhs - lhs` they saw. Where possible the left-hand
//! sides are computed by routes independent of the main code paths (finite
//! differences, direct DFT sums, explicit enumeration).

mod checks;

use serde::{Deserialize, Serialize};

pub use checks::{
    check_bilinear_bound, check_descent_lemma, check_fd_gradient, check_gradient_bounds, check_lipschitz_bound,
    check_lipschitz_constants, check_loss_bound, check_unbiasedness, descent_lemma_rhs, lipschitz_lemma_constant,
};

use crate::math::{Complex64, ComplexVector};
use crate::model::ProblemInstance;
use crate::objective::{loss, GradientPair};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub worst_slack: f64,
    pub passed: bool,
    pub detail: String,
}

/// Collects slacks and builds a report that passes iff the worst one is at
/// least `-tolerance`.
#[derive(Debug, Clone)]
pub(crate) struct SlackTracker {
    name: String,
    tolerance: f64,
    normalization: &'static str,
    samples: usize,
    worst: f64,
    worst_at: Option<(f64, f64)>,
}

impl SlackTracker {
    pub(crate) fn new(name: impl Into<String>, tolerance: f64, normalization: &'static str) -> Self {
        Self {
            name: name.into(),
            tolerance,
            normalization,
            samples: 0,
            worst: f64::INFINITY,
            worst_at: None,
        }
    }

    /// `(rhs - lhs) / (1 + |rhs|)`
    pub(crate) fn observe_shifted(&mut self, lhs: f64, rhs: f64) {
        self.push((rhs - lhs) / (1.0 + rhs.abs()), lhs, rhs);
    }

    /// `(rhs - lhs) / max(|lhs|, |rhs|)`, zero when both sides vanish.
    pub(crate) fn observe_relative(&mut self, lhs: f64, rhs: f64) {
        let scale = lhs.abs().max(rhs.abs());
        let slack = if scale == 0.0 { 0.0 } else { (rhs - lhs) / scale };
        self.push(slack, lhs, rhs);
    }

    /// A plain slack value, already normalized.
    pub(crate) fn observe_slack(&mut self, slack: f64) {
        self.push(slack, f64::NAN, f64::NAN);
    }

    fn push(&mut self, slack: f64, lhs: f64, rhs: f64) {
        self.samples += 1;
        // NaN must fail the check, never hide behind a comparison
        let slack = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
        if slack < self.worst || self.worst_at.is_none() {
            self.worst = slack;
            self.worst_at = Some((lhs, rhs));
        }
    }

    pub(crate) fn finish(self, note: &str) -> CheckReport {
        let worst = if self.samples == 0 { 0.0 } else { self.worst };
        let passed = worst >= -self.tolerance;
        let mut detail = format!("tolerance {:e}; slack {}", self.tolerance, self.normalization);
        if let Some((lhs, rhs)) = self.worst_at.filter(|(l, r)| l.is_finite() && r.is_finite()) {
            detail.push_str(&format!("; worst sample lhs {lhs:e}, rhs {rhs:e}"));
        }
        if !note.is_empty() {
            detail.push_str("; ");
            detail.push_str(note);
        }
        CheckReport {
            name: self.name,
            samples: self.samples,
            worst_slack: worst,
            passed,
            detail,
        }
    }
}

/// Default finite-difference step `1e-6 (1 + max(||z||_inf, ||v||_inf))`.
pub fn default_fd_step(z: &ComplexVector, v: &ComplexVector) -> f64 {
    1e-6 * (1.0 + z.norm_inf().max(v.norm_inf()))
}

/// Central-difference Wirtinger gradient of `J`:
/// `grad_z J_j = 1/2 (dJ/dRe z_j + i dJ/dIm z_j)`, likewise for `v`.
pub fn fd_wirtinger_gradient(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector, h_step: f64) -> GradientPair {
    let f = |z: &ComplexVector, v: &ComplexVector| loss(problem, z, v).j;
    let partial = |target: &ComplexVector, direction: Complex64, at_z: bool, j: usize| -> f64 {
        let mut plus = target.clone();
        let mut minus = target.clone();
        plus[j] += direction * h_step;
        minus[j] -= direction * h_step;
        let (fp, fm) = if at_z { (f(&plus, v), f(&minus, v)) } else { (f(z, &plus), f(z, &minus)) };
        (fp - fm) / (2.0 * h_step)
    };
    let component = |target: &ComplexVector, at_z: bool| -> ComplexVector {
        (0..target.len())
            .map(|j| {
                let re = partial(target, Complex64::new(1.0, 0.0), at_z, j);
                let im = partial(target, Complex64::new(0.0, 1.0), at_z, j);
                Complex64::new(0.5 * re, 0.5 * im)
            })
            .collect()
    };
    GradientPair {
        g_z: component(z, true),
        g_v: component(v, false),
    }
}

/// `||a - b|| / ||b||` on the stacked gradient; the absolute difference
/// when `b` vanishes.
pub fn relative_gradient_error(a: &GradientPair, b: &GradientPair) -> f64 {
    let diff = (a.g_z.sub(&b.g_z).norm_sq() + a.g_v.sub(&b.g_v).norm_sq()).sqrt();
    let scale = b.norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Entrywise standard complex normal times `scale`.
pub(crate) fn sample_vector(rng: &mut Rng, d: usize, scale: f64) -> ComplexVector {
    rng.complex_normal_vector(d).scale_real(scale)
}

/// Which checkers a suite runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Gradient,
    Descent,
    Unbiased,
    Bounds,
    Lipschitz,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gradient" => Ok(Self::Gradient),
            "descent" => Ok(Self::Descent),
            "unbiased" => Ok(Self::Unbiased),
            "bounds" => Ok(Self::Bounds),
            "lipschitz" => Ok(Self::Lipschitz),
            "all" => Ok(Self::All),
            other => Err(format!(
                "unknown suite `{other}` (gradient | descent | unbiased | bounds | lipschitz | all)"
            )),
        }
    }
}

/// Runs the checkers of `suite` on `problem` with sample sizes suited to a
/// quick desk run. Each checker gets its own stream of `seed`.
pub fn run_suite(suite: Suite, problem: &ProblemInstance, seed: u64, samples: usize) -> Vec<CheckReport> {
    let wants = |s: Suite| suite == Suite::All || suite == s;
    let mut reports = Vec::new();
    let d = problem.dim();
    if wants(Suite::Gradient) {
        let mut rng = Rng::with_stream(seed, 1);
        reports.push(check_fd_gradient(problem, samples.min(20), 1.0, &mut rng));
    }
    if wants(Suite::Descent) {
        for (i, scale) in [0.1, 1.0, 10.0].into_iter().enumerate() {
            let mut rng = Rng::with_stream(seed, 10 + i as u64);
            reports.push(check_descent_lemma(problem, samples, scale, &mut rng));
        }
    }
    if wants(Suite::Unbiased) {
        let mut rng = Rng::with_stream(seed, 20);
        for _ in 0..samples.min(10) {
            let z = rng.complex_normal_vector(d);
            let v = rng.complex_normal_vector(d);
            reports.push(check_unbiasedness(problem, &z, &v));
        }
    }
    if wants(Suite::Bounds) {
        let mut rng = Rng::with_stream(seed, 30);
        reports.push(check_gradient_bounds(problem, samples, &mut rng));
        reports.push(check_bilinear_bound(d, problem.shifts(), samples, &mut rng));
        reports.push(check_loss_bound(problem, samples, &mut rng));
        reports.push(check_lipschitz_constants(problem, samples, &mut rng));
    }
    if wants(Suite::Lipschitz) {
        let mut rng = Rng::with_stream(seed, 40);
        reports.push(check_lipschitz_bound(problem, samples, &mut rng));
    }
    reports
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{synthesize_problem, LossParams, MeasurementSet, SynthesisSpec};
    use crate::objective::gradient;

    fn problem(d: usize, seed: u64, loss: LossParams) -> ProblemInstance {
        let mut spec = SynthesisSpec::new(d, seed);
        spec.loss = loss;
        synthesize_problem(&spec).unwrap()
    }

    #[test]
    fn fd_recovers_tikhonov_gradient_without_data() {
        let p = problem(4, 1, LossParams::new(1e-3, 0.3, 0.0));
        let zeros = MeasurementSet::new(vec![vec![0.0; 4]; 4], p.shifts().clone()).unwrap();
        let p = p.with_measurements(zeros).unwrap();
        let mut rng = Rng::new(2);
        let z = rng.complex_normal_vector(4);
        // zero window: every region term is the constant d * eps
        let v = ComplexVector::zeros(4);
        let g = fd_wirtinger_gradient(&p, &z, &v, default_fd_step(&z, &v));
        assert!(g.g_z.max_abs_diff(&z.scale_real(0.3)) < 1e-8);
        assert!(g.g_v.norm_inf() < 1e-8);
    }

    #[test]
    fn fd_matches_analytic_gradient() {
        let p = problem(8, 3, LossParams::new(1e-3, 1e-3, 1e-3));
        let mut rng = Rng::new(4);
        let z = rng.complex_normal_vector(8);
        let v = rng.complex_normal_vector(8);
        let fd = fd_wirtinger_gradient(&p, &z, &v, default_fd_step(&z, &v));
        assert!(relative_gradient_error(&fd, &gradient(&p, &z, &v)) < 1e-6);
    }

    #[test]
    fn fd_vanishes_at_noiseless_truth() {
        let p = problem(8, 3, LossParams::new(1e-3, 0.0, 0.0));
        let t = p.ground_truth().unwrap();
        let g = fd_wirtinger_gradient(&p, &t.x, &t.w, default_fd_step(&t.x, &t.w));
        assert!(g.norm() < 1e-8);
    }

    #[test]
    fn fd_error_shrinks_quadratically() {
        // steps large enough that truncation, not rounding, dominates
        let p = problem(8, 5, LossParams::new(1.0, 1e-3, 1e-3));
        let mut rng = Rng::new(6);
        let z = rng.complex_normal_vector(8);
        let v = rng.complex_normal_vector(8);
        let exact = gradient(&p, &z, &v);
        let coarse = relative_gradient_error(&fd_wirtinger_gradient(&p, &z, &v, 2e-2), &exact);
        let fine = relative_gradient_error(&fd_wirtinger_gradient(&p, &z, &v, 1e-2), &exact);
        let ratio = coarse / fine;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn tracker_fails_on_nan_and_negative_slack() {
        let mut t = SlackTracker::new("x", 1e-9, "relative");
        t.observe_relative(1.0, 1.0);
        assert!(t.clone().finish("").passed);
        t.observe_slack(f64::NAN);
        assert!(!t.finish("").passed);
        let mut t = SlackTracker::new("x", 1e-9, "relative");
        t.observe_relative(2.0, 1.0);
        let r = t.finish("");
        assert_eq!(r.worst_slack, -0.5);
        assert!(!r.passed);
    }

    #[test]
    fn suite_all_passes_on_default_instance() {
        let p = synthesize_problem(&SynthesisSpec::new(8, 0)).unwrap();
        let reports = run_suite(Suite::All, &p, 0, 20);
        assert!(reports.len() >= 9);
        for r in &reports {
            assert!(r.passed, "{r:?}");
        }
    }
}
