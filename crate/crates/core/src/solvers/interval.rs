use super::{drive, IteratePair, SolverConfig, SolverError, SolverRun, Step};
use crate::model::ProblemInstance;
use crate::objective::{lipschitz_constants, loss};

/// What the interval search saw at one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalStep {
    pub t: usize,
    /// Selected point; 1 moves only the object, 0 only the window.
    pub gamma: f64,
    pub l_v: f64,
    pub l_z: f64,
    pub j_start: f64,
    pub j_selected: f64,
    /// `J(z_+, v)`, the `gamma = 1` end.
    pub j_object_step: f64,
    /// `J(z, v_+)`, the `gamma = 0` end.
    pub j_window_step: f64,
    /// `1/2 ||g_z||^2 / L_z + 1/2 ||g_v||^2 / L_v`.
    pub decrease_cross: f64,
    /// `1/2 ||g_z||^2 / L_v + 1/2 ||g_v||^2 / L_z`.
    pub decrease_matched: f64,
}

impl IntervalStep {
    pub fn decrease(&self) -> f64 {
        self.j_start - self.j_selected
    }
}

/// Alternating descent on the segment
/// `z(gamma) = z - gamma L_v^{-1} g_z`, `v(gamma) = v - (1 - gamma) L_z^{-1} g_v`,
/// `gamma` on the grid `i / (n - 1)`. The grid point with the smallest `J`
/// wins; ties go to the larger `gamma`.
pub fn run_interval(problem: &ProblemInstance, start: IteratePair, config: &SolverConfig) -> Result<SolverRun, SolverError> {
    if !(problem.alpha_t() > 0.0 && problem.beta_t() > 0.0) {
        return Err(SolverError::InvalidConfig {
            field: "alpha_T",
            reason: "the interval method needs alpha_T > 0 and beta_T > 0".into(),
        });
    }
    let n = config.gamma_grid;
    let mut steps = Vec::new();
    let mut run = drive(problem, start, config, |t, it, value, grad| {
        let (l_v, l_z) = lipschitz_constants(problem, &it.z, &it.v);
        let (step_z, step_v) = (l_v.recip(), l_z.recip());
        let mut best: Option<(f64, f64, IteratePair)> = None;
        let mut ends = [0.0; 2];
        for i in (0..n).rev() {
            let gamma = if i == n - 1 { 1.0 } else { i as f64 / (n - 1) as f64 };
            let candidate = IteratePair::new(
                it.z.step(gamma * step_z, &grad.g_z),
                it.v.step((1.0 - gamma) * step_v, &grad.g_v),
            );
            let j = loss(problem, &candidate.z, &candidate.v).j;
            if i == n - 1 {
                ends[0] = j;
            }
            if i == 0 {
                ends[1] = j;
            }
            if best.as_ref().is_none_or(|(_, best_j, _)| j < *best_j) {
                best = Some((gamma, j, candidate));
            }
        }
        let (gamma, j_selected, next) = best.expect("grid has at least two points");
        let (gz, gv) = (grad.g_z.norm_sq(), grad.g_v.norm_sq());
        steps.push(IntervalStep {
            t,
            gamma,
            l_v,
            l_z,
            j_start: value.j,
            j_selected,
            j_object_step: ends[0],
            j_window_step: ends[1],
            decrease_cross: 0.5 * gz / l_z + 0.5 * gv / l_v,
            decrease_matched: 0.5 * gz / l_v + 0.5 * gv / l_z,
        });
        Ok(Step {
            next,
            mu: gamma * step_z,
            nu: (1.0 - gamma) * step_v,
        })
    })?;
    run.interval_steps = steps;
    Ok(run)
}
