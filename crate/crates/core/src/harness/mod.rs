//! Experiment plumbing: error metrics, run summaries, experiment matrices and
//! the `ptycho` command line.

pub mod cli;
mod experiment;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use experiment::{run_experiment, summary_table, ExperimentConfig, ProblemConfig};

use crate::json::FieldError;
use crate::math::{ComplexVector, ShiftMode};
use crate::model::{ModelError, ProblemInstance};
use crate::rng::Rng;
use crate::solvers::{Algorithm, IteratePair, SolverConfig, SolverError, SolverRun, StopReason, Trace};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("config: {0}")]
    Parse(#[from] FieldError),
    #[error("invalid `{field}`: {reason}")]
    InvalidField { field: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Distance to the ground truth after removing the global phase and scaling
/// ambiguities:
///
/// ```text
/// g = <z, x> / ||z||^2,   c = phase of <v / g, w>
/// err = ||g z - x|| / ||x|| + ||c v / g - w|| / ||w||
/// ```
///
/// `g` fixes the object completely; `c` removes the window's own global
/// phase, which the measurements cannot see either. Returns `+inf` when `z`
/// vanishes or is orthogonal to `x`.
pub fn reconstruction_error(
    z: &ComplexVector,
    v: &ComplexVector,
    x: &ComplexVector,
    w: &ComplexVector,
) -> Result<f64, HarnessError> {
    if x.norm() == 0.0 {
        return Err(HarnessError::field("x", "ground-truth object has zero norm"));
    }
    if w.norm() == 0.0 {
        return Err(HarnessError::field("w", "ground-truth window has zero norm"));
    }
    let zz = z.norm_sq();
    if zz == 0.0 {
        return Ok(f64::INFINITY);
    }
    let g = z.inner(x) / zz;
    if g.norm() == 0.0 {
        return Ok(f64::INFINITY);
    }
    let v_scaled = v.scale(g.inv());
    let overlap = v_scaled.inner(w);
    let phase = if overlap.norm() == 0.0 {
        crate::math::Complex64::new(1.0, 0.0)
    } else {
        overlap / overlap.norm()
    };
    let object = z.scale(g).sub(x).norm() / x.norm();
    let window = v_scaled.scale(phase).sub(w).norm() / w.norm();
    Ok(object + window)
}

/// Least-squares slope of `log(min-so-far ||grad J||^2)` against `log t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    /// Set when the series is constant (or has fewer than two usable
    /// points); the slope is then 0.
    pub degenerate: bool,
}

/// Fits the decay of the running minimum of `||grad J||^2` over records with
/// `t >= max(t_min, 1)`. Needs more than `t_min + 100` records.
pub fn fit_decay_slope(trace: &Trace, t_min: usize) -> Result<SlopeFit, HarnessError> {
    if trace.len() <= t_min + 100 {
        return Err(HarnessError::field(
            "trace",
            format!("{} records; the fit needs more than t_min + 100 = {}", trace.len(), t_min + 100),
        ));
    }
    let running = trace.running_min_grad_sq();
    let points: Vec<(f64, f64)> = trace
        .records()
        .iter()
        .zip(&running)
        .filter(|(r, &g)| r.t >= t_min.max(1) && g > 0.0 && g.is_finite())
        .map(|(r, &g)| ((r.t as f64).ln(), g.ln()))
        .collect();
    Ok(least_squares_slope(&points))
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> SlopeFit {
    let degenerate = SlopeFit {
        slope: 0.0,
        degenerate: true,
    };
    let constant = |get: fn(&(f64, f64)) -> f64| points.iter().all(|p| get(p) == get(&points[0]));
    if points.len() < 2 || constant(|p| p.0) || constant(|p| p.1) {
        return degenerate;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    SlopeFit {
        slope: sxy / sxx,
        degenerate: false,
    }
}

/// Problem parameters echoed into every summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub d: usize,
    pub regions: usize,
    pub mode: ShiftMode,
    pub epsilon: f64,
    #[serde(rename = "alpha_T")]
    pub alpha_t: f64,
    #[serde(rename = "beta_T")]
    pub beta_t: f64,
    #[serde(rename = "K")]
    pub k: usize,
}

impl From<&ProblemInstance> for ProblemParams {
    fn from(p: &ProblemInstance) -> Self {
        Self {
            d: p.dim(),
            regions: p.num_regions(),
            mode: p.shifts().mode(),
            epsilon: p.epsilon(),
            alpha_t: p.alpha_t(),
            beta_t: p.beta_t(),
            k: p.batch_size(),
        }
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub iterations: usize,
    pub stop: String,
    #[serde(rename = "final_J")]
    pub final_j: f64,
    /// `min_t ||grad J(z^t, v^t)||^2` over the whole trace.
    pub min_grad_sq: f64,
    /// Present when the trace has more than 100 records.
    pub decay_slope: Option<f64>,
    pub decay_slope_degenerate: bool,
    /// Present when the problem carries a ground truth.
    pub reconstruction_error: Option<f64>,
    /// Seconds.
    pub wall_time: f64,
    pub config: SolverConfig,
    pub problem: ProblemParams,
}

impl Summary {
    pub fn to_json(&self) -> String {
        crate::json::to_string(self).expect("summary serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(crate::json::from_str(text)?)
    }
}

pub fn summarize(problem: &ProblemInstance, config: &SolverConfig, run: &SolverRun) -> Result<Summary, HarnessError> {
    let last = run.trace.last().expect("solver traces are never empty");
    let fit = fit_decay_slope(&run.trace, 0).ok();
    let reconstruction_error = match problem.ground_truth() {
        Some(t) => Some(reconstruction_error(&run.iterate.z, &run.iterate.v, &t.x, &t.w)?),
        None => None,
    };
    Ok(Summary {
        algorithm: config.algorithm,
        seed: config.seed,
        iterations: last.t,
        stop: match run.stop {
            StopReason::MaxIters => "max_iters".into(),
            StopReason::GradTol => "grad_tol".into(),
        },
        final_j: last.j,
        min_grad_sq: run.trace.min_grad_sq(run.trace.len()),
        decay_slope: fit.map(|f| f.slope),
        decay_slope_degenerate: fit.is_some_and(|f| f.degenerate),
        reconstruction_error,
        wall_time: last.wall_ns as f64 * 1e-9,
        config: config.clone(),
        problem: problem.into(),
    })
}

/// Standard complex normal start drawn from stream 1 of `seed`, so it never
/// overlaps the index stream the stochastic solvers draw from `seed`.
pub fn initial_iterate(d: usize, seed: u64) -> IteratePair {
    IteratePair::random(d, &mut Rng::with_stream(seed, 1))
}
