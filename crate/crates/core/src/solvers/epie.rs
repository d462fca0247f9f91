use num_complex::Complex64;
use rand::seq::SliceRandom;

use super::{drive, IndexSchedule, IteratePair, SolverConfig, SolverError, SolverRun, Step};
use crate::math::{dft, idft, shift, ComplexVector};
use crate::model::ProblemInstance;
use crate::rng::Rng;

/// Region order for ePIE sweeps.
#[derive(Debug, Clone)]
pub struct IndexStream {
    rng: Rng,
    schedule: IndexSchedule,
    order: Vec<usize>,
    pos: usize,
}

impl IndexStream {
    pub fn new(seed: u64, schedule: IndexSchedule) -> Self {
        Self {
            rng: Rng::new(seed),
            schedule,
            order: Vec::new(),
            pos: 0,
        }
    }

    pub fn next_index(&mut self, p: &[f64]) -> usize {
        match self.schedule {
            IndexSchedule::Iid => self.rng.categorical(p),
            IndexSchedule::ShuffledLoop => {
                if self.pos == self.order.len() {
                    self.order = (0..p.len()).collect();
                    self.order.shuffle(&mut self.rng);
                    self.pos = 0;
                }
                self.pos += 1;
                self.order[self.pos - 1]
            }
        }
    }
}

pub(super) fn sup_norms(it: &IteratePair, t: usize) -> Result<(f64, f64), SolverError> {
    let z_inf = it.z.norm_inf();
    let v_inf = it.v.norm_inf();
    if z_inf == 0.0 {
        return Err(SolverError::VanishingIterate { iteration: t, which: "object" });
    }
    if v_inf == 0.0 {
        return Err(SolverError::VanishingIterate { iteration: t, which: "window" });
    }
    Ok((z_inf, v_inf))
}

/// One ePIE update on region `region`:
///
/// ```text
/// psi  = z o S_r v,  psi' = F^{-1}[ sqrt(y_r) Psi / |Psi| ],  Psi = F psi
/// z+   = z + alpha conj(S_r v) o (psi' - psi) / ||v||_inf^2
/// v+   = v + beta S_{-r}[ conj(z) o (psi' - psi) ] / ||z||_inf^2
/// ```
///
/// A zero transform coefficient is projected to zero.
pub fn epie_update(
    problem: &ProblemInstance,
    it: &IteratePair,
    region: usize,
    alpha: f64,
    beta: f64,
    t: usize,
) -> Result<IteratePair, SolverError> {
    let (z_inf, v_inf) = sup_norms(it, t)?;
    let offset = problem.shifts().offsets()[region];
    let mode = problem.shifts().mode();
    let shifted = shift(&it.v, offset, mode);
    let exit = it.z.hadamard(&shifted);
    let projected: ComplexVector = dft(&exit)
        .iter()
        .zip(problem.measurements().row(region))
        .map(|(&psi, &y)| {
            let modulus = psi.norm();
            if modulus == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                psi * (y.sqrt() / modulus)
            }
        })
        .collect();
    let diff = idft(&projected).sub(&exit);
    let mut z = it.z.clone();
    z.axpy(alpha / (v_inf * v_inf), &shifted.conj().hadamard(&diff));
    let mut v = it.v.clone();
    v.axpy(beta / (z_inf * z_inf), &shift(&it.z.conj().hadamard(&diff), -offset, mode));
    Ok(IteratePair::new(z, v))
}

/// ePIE with factors `config.epie_alpha`, `config.epie_beta`. The trace
/// reports the equivalent SGD steps `alpha p_r / (d ||v||_inf^2)` and
/// `beta p_r / (d ||z||_inf^2)`.
pub fn run_epie(problem: &ProblemInstance, start: IteratePair, config: &SolverConfig) -> Result<SolverRun, SolverError> {
    let mut stream = IndexStream::new(config.seed, config.schedule);
    let d = problem.dim() as f64;
    drive(problem, start, config, |t, it, _, _| {
        let r = stream.next_index(problem.p());
        let (z_inf, v_inf) = sup_norms(it, t)?;
        let p_r = problem.p()[r];
        Ok(Step {
            next: epie_update(problem, it, r, config.epie_alpha, config.epie_beta, t)?,
            mu: config.epie_alpha * p_r / (d * v_inf * v_inf),
            nu: config.epie_beta * p_r / (d * z_inf * z_inf),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::{run_sgd, Algorithm, SgdStepRule};
    use super::*;
    use crate::model::LossParams;
    use crate::objective::gradient_region;

    fn plain(d: usize, seed: u64) -> ProblemInstance {
        problem(d, seed, LossParams::new(0.0, 0.0, 0.0))
    }

    #[test]
    fn zero_factors_leave_iterates_unchanged() {
        let p = plain(8, 1);
        let start = start_near_truth(&p, 0.4, 2);
        let mut cfg = SolverConfig::new(Algorithm::Epie);
        cfg.epie_alpha = 0.0;
        cfg.epie_beta = 0.0;
        cfg.max_iters = 10;
        let out = run_epie(&p, start.clone(), &cfg).unwrap();
        assert_eq!(out.iterate, start);
    }

    #[test]
    fn ground_truth_is_a_fixed_point() {
        let p = plain(8, 1);
        let truth = p.ground_truth().unwrap().clone();
        let start = IteratePair::new(truth.x, truth.w);
        for r in 0..p.num_regions() {
            let next = epie_update(&p, &start, r, 1.0, 1.0, 0).unwrap();
            assert!(next.max_abs_diff(&start) < 1e-12);
        }
    }

    #[test]
    fn update_is_a_scaled_region_gradient_step() {
        let p = plain(8, 3);
        let it = start_near_truth(&p, 0.5, 4);
        let d = 8.0;
        let (alpha, beta) = (0.7, 0.3);
        let (z_inf, v_inf) = (it.z.norm_inf(), it.v.norm_inf());
        for r in 0..p.num_regions() {
            let g = gradient_region(&p, &it.z, &it.v, r);
            let z = it.z.step(alpha / (d * v_inf * v_inf), &g.g_z);
            let v = it.v.step(beta / (d * z_inf * z_inf), &g.g_v);
            let next = epie_update(&p, &it, r, alpha, beta, 0).unwrap();
            assert!(next.z.max_abs_diff(&z) < 1e-12);
            assert!(next.v.max_abs_diff(&v) < 1e-12);
        }
    }

    #[test]
    fn matches_sgd_with_mapped_steps() {
        let p = plain(8, 5).with_sampling(vec![0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.2]).unwrap();
        let start = start_near_truth(&p, 0.5, 6);
        let mut cfg = SolverConfig::new(Algorithm::Epie);
        cfg.max_iters = 200;
        cfg.seed = 9;
        cfg.epie_alpha = 0.5;
        cfg.epie_beta = 0.5;
        let epie = run_epie(&p, start.clone(), &cfg).unwrap();
        cfg.algorithm = Algorithm::Sgd;
        cfg.sgd_steps = SgdStepRule::EpieMapped;
        let sgd = run_sgd(&p, start, &cfg).unwrap();
        let scale = 1.0 + epie.iterate.z.norm_inf().max(epie.iterate.v.norm_inf());
        assert!(epie.iterate.max_abs_diff(&sgd.iterate) <= 1e-12 * scale);
        for (a, b) in epie.trace.records().iter().zip(sgd.trace.records()) {
            assert!((a.j - b.j).abs() <= 1e-12 * (1.0 + a.j));
            assert!((a.mu_t - b.mu_t).abs() <= 1e-12 * a.mu_t);
        }
    }

    #[test]
    fn vanishing_window_is_an_error() {
        let p = plain(4, 1);
        let start = IteratePair::new(ComplexVector::from_real(&[1.0; 4]), ComplexVector::zeros(4));
        let err = run_epie(&p, start, &SolverConfig::new(Algorithm::Epie)).unwrap_err();
        assert_eq!(err, SolverError::VanishingIterate { iteration: 0, which: "window" });
    }

    #[test]
    fn shuffled_loop_visits_every_region_per_sweep() {
        let mut stream = IndexStream::new(3, IndexSchedule::ShuffledLoop);
        let p = [0.25; 4];
        for _ in 0..5 {
            let mut sweep: Vec<usize> = (0..4).map(|_| stream.next_index(&p)).collect();
            sweep.sort_unstable();
            assert_eq!(sweep, vec![0, 1, 2, 3]);
        }
    }
}
