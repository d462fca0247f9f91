//! Deterministic, stochastic and ePIE-type iterations on `J`.
//!
//! Every solver records one [`TraceRecord`] per visited iterate, including a
//! terminal record for the returned iterate with zero step sizes.

mod config;
mod epie;
mod gd;
mod interval;
mod sgd;
mod trace;

use std::time::Instant;

use thiserror::Error;

pub use config::{Algorithm, IndexSchedule, SgdStepRule, SolverConfig};
pub use epie::{epie_update, run_epie, IndexStream};
pub use gd::{gd_step_size, run_gd};
pub use interval::{run_interval, IntervalStep};
pub use sgd::{run_sgd, sample_indices, sgd_mu_max, stochastic_gradient};
pub use trace::{Trace, TraceRecord, CSV_HEADER};

use crate::math::ComplexVector;
use crate::model::ProblemInstance;
use crate::objective::{loss_and_gradient, GradientPair, LossValue};
use crate::rng::Rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver setting `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("initial {which} has length {got}, expected {expected}")]
    DimensionMismatch {
        which: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite {quantity} at iteration {iteration}")]
    NonFinite { iteration: usize, quantity: &'static str },
    #[error("{which} vanished at iteration {iteration}")]
    VanishingIterate { iteration: usize, which: &'static str },
}

/// Object estimate `z` and window estimate `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct IteratePair {
    pub z: ComplexVector,
    pub v: ComplexVector,
}

impl IteratePair {
    pub fn new(z: ComplexVector, v: ComplexVector) -> Self {
        Self { z, v }
    }

    /// Standard complex normal start, object first.
    pub fn random(d: usize, rng: &mut Rng) -> Self {
        let z = rng.complex_normal_vector(d);
        let v = rng.complex_normal_vector(d);
        Self { z, v }
    }

    pub fn is_finite(&self) -> bool {
        self.z.is_finite() && self.v.is_finite()
    }

    pub fn max_abs_diff(&self, other: &IteratePair) -> f64 {
        self.z.max_abs_diff(&other.z).max(self.v.max_abs_diff(&other.v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    GradTol,
}

#[derive(Debug, Clone)]
pub struct SolverRun {
    pub iterate: IteratePair,
    pub trace: Trace,
    pub stop: StopReason,
    /// Per-step diagnostics of the interval method; empty otherwise.
    pub interval_steps: Vec<IntervalStep>,
}

/// Runs the algorithm selected in `config`.
pub fn run(problem: &ProblemInstance, start: IteratePair, config: &SolverConfig) -> Result<SolverRun, SolverError> {
    match config.algorithm {
        Algorithm::Gd => run_gd(problem, start, config),
        Algorithm::Sgd => run_sgd(problem, start, config),
        Algorithm::Epie => run_epie(problem, start, config),
        Algorithm::Interval => run_interval(problem, start, config),
    }
}

/// What one iteration produced.
struct Step {
    next: IteratePair,
    mu: f64,
    nu: f64,
}

fn check_start(problem: &ProblemInstance, start: &IteratePair) -> Result<(), SolverError> {
    let d = problem.dim();
    for (which, x) in [("object", &start.z), ("window", &start.v)] {
        if x.len() != d {
            return Err(SolverError::DimensionMismatch {
                which,
                expected: d,
                got: x.len(),
            });
        }
    }
    if !start.is_finite() {
        return Err(SolverError::NonFinite {
            iteration: 0,
            quantity: "iterate",
        });
    }
    Ok(())
}

fn evaluate(problem: &ProblemInstance, it: &IteratePair, t: usize) -> Result<(LossValue, GradientPair), SolverError> {
    let (value, grad) = loss_and_gradient(problem, &it.z, &it.v);
    if !value.j.is_finite() {
        return Err(SolverError::NonFinite { iteration: t, quantity: "loss" });
    }
    if !grad.is_finite() {
        return Err(SolverError::NonFinite {
            iteration: t,
            quantity: "gradient",
        });
    }
    Ok((value, grad))
}

/// Shared outer loop: evaluate, record, step.
fn drive<F>(problem: &ProblemInstance, start: IteratePair, config: &SolverConfig, mut step: F) -> Result<SolverRun, SolverError>
where
    F: FnMut(usize, &IteratePair, &LossValue, &GradientPair) -> Result<Step, SolverError>,
{
    config.validate()?;
    check_start(problem, &start)?;
    let clock = Instant::now();
    let mut trace = Trace::new();
    let mut record = |t: usize, value: &LossValue, grad: &GradientPair, mu: f64, nu: f64| {
        trace.push(TraceRecord {
            t,
            j: value.j,
            l_eps: value.l_eps,
            grad_z_norm: grad.g_z.norm(),
            grad_v_norm: grad.g_v.norm(),
            mu_t: mu,
            nu_t: nu,
            wall_ns: clock.elapsed().as_nanos() as u64,
        })
    };

    let mut it = start;
    let mut stop = StopReason::MaxIters;
    let mut t = 0;
    while t < config.max_iters {
        let (value, grad) = evaluate(problem, &it, t)?;
        if config.grad_tol > 0.0 && grad.norm() <= config.grad_tol {
            stop = StopReason::GradTol;
            break;
        }
        let Step { next, mu, nu } = step(t, &it, &value, &grad)?;
        if !next.is_finite() {
            return Err(SolverError::NonFinite {
                iteration: t + 1,
                quantity: "iterate",
            });
        }
        record(t, &value, &grad, mu, nu);
        it = next;
        t += 1;
    }
    let (value, grad) = evaluate(problem, &it, t)?;
    record(t, &value, &grad, 0.0, 0.0);
    Ok(SolverRun {
        iterate: it,
        trace,
        stop,
        interval_steps: Vec::new(),
    })
}

/// A step rule that evaluates to infinity only arises when every bound
/// vanishes, which forces a zero gradient; stepping by zero is then exact.
fn finite_or_zero(step: f64) -> f64 {
    if step.is_finite() {
        step
    } else {
        0.0
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::model::{synthesize_problem, LossParams, SynthesisSpec};

    pub fn problem(d: usize, seed: u64, loss: LossParams) -> ProblemInstance {
        let mut spec = SynthesisSpec::new(d, seed);
        spec.loss = loss;
        synthesize_problem(&spec).unwrap()
    }

    pub fn start_near_truth(problem: &ProblemInstance, scale: f64, seed: u64) -> IteratePair {
        let truth = problem.ground_truth().unwrap();
        let mut rng = Rng::new(seed);
        let noise = IteratePair::random(problem.dim(), &mut rng);
        IteratePair::new(
            truth.x.add(&noise.z.scale_real(scale)),
            truth.w.add(&noise.v.scale_real(scale)),
        )
    }
}
