use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{initial_iterate, summarize, HarnessError, Summary};
use crate::math::{ShiftMode, ShiftSet};
use crate::model::{synthesize_problem, LossParams, NoiseModel, ProblemInstance, SynthesisSpec};
use crate::solvers::{run, SolverConfig};

/// Synthetic problem description as it appears in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub d: usize,
    /// Shift offsets; all of `0..d` when absent.
    pub offsets: Option<Vec<i64>>,
    pub mode: ShiftMode,
    pub seed: u64,
    pub noise: NoiseModel,
    pub epsilon: f64,
    #[serde(rename = "alpha_T")]
    pub alpha_t: f64,
    #[serde(rename = "beta_T")]
    pub beta_t: f64,
    /// Sampling distribution; uniform when absent.
    pub p: Option<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: usize,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        let loss = LossParams::default();
        Self {
            d: 8,
            offsets: None,
            mode: ShiftMode::Circular,
            seed: 0,
            noise: NoiseModel::None,
            epsilon: loss.epsilon,
            alpha_t: loss.alpha_t,
            beta_t: loss.beta_t,
            p: None,
            k: 1,
        }
    }
}

impl ProblemConfig {
    pub fn to_spec(&self) -> Result<SynthesisSpec, HarnessError> {
        if self.d == 0 {
            return Err(HarnessError::field("d", "dimension must be >= 1"));
        }
        let offsets = self.offsets.clone().unwrap_or_else(|| (0..self.d as i64).collect());
        let shifts =
            ShiftSet::new(offsets, self.mode, self.d).map_err(|e| HarnessError::field("offsets", e.to_string()))?;
        Ok(SynthesisSpec {
            d: self.d,
            shifts,
            seed: self.seed,
            noise: self.noise.clone(),
            loss: LossParams::new(self.epsilon, self.alpha_t, self.beta_t),
            p: self.p.clone(),
            batch_size: self.k,
        })
    }

    pub fn synthesize(&self) -> Result<ProblemInstance, HarnessError> {
        Ok(synthesize_problem(&self.to_spec()?)?)
    }
}

/// A matrix of solver runs on one synthetic problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub problem: ProblemConfig,
    pub solvers: Vec<SolverConfig>,
    #[serde(default = "one")]
    pub repetitions: usize,
    pub output_dir: PathBuf,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = crate::json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.repetitions == 0 {
            return Err(HarnessError::field("repetitions", "must be >= 1"));
        }
        if self.solvers.is_empty() {
            return Err(HarnessError::field("solvers", "at least one solver is required"));
        }
        for (i, s) in self.solvers.iter().enumerate() {
            s.validate()
                .map_err(|e| HarnessError::field(format!("solvers[{i}]"), e.to_string()))?;
        }
        Ok(())
    }
}

/// Runs every (solver, repetition) pair in parallel. Repetition `k` of a
/// solver uses seed `solver.seed + k` for both its start and its index
/// stream. Writes `<name>.csv` and `<name>.summary.json` per run and a
/// `summary.csv` table once all runs are done.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<(String, Summary)>, HarnessError> {
    cfg.validate()?;
    let problem = cfg.problem.synthesize()?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    problem
        .save(dir.join("problem.json"))
        .map_err(HarnessError::Model)?;

    let jobs: Vec<(usize, usize)> = (0..cfg.solvers.len())
        .flat_map(|i| (0..cfg.repetitions).map(move |k| (i, k)))
        .collect();
    let results: Vec<Result<(String, Summary), HarnessError>> = jobs
        .par_iter()
        .map(|&(i, k)| {
            let mut solver = cfg.solvers[i].clone();
            solver.seed = solver.seed.wrapping_add(k as u64);
            let name = format!("{i:02}-{}-rep{k}", solver.algorithm);
            let start = initial_iterate(problem.dim(), solver.seed);
            let out = run(&problem, start, &solver)?;
            write(&dir.join(format!("{name}.csv")), &out.trace.to_csv())?;
            let summary = summarize(&problem, &solver, &out)?;
            write(&dir.join(format!("{name}.summary.json")), &summary.to_json())?;
            Ok((name, summary))
        })
        .collect();
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    write(&dir.join("summary.csv"), &summary_table(&rows))?;
    Ok(rows)
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// One CSV row per summary; absent optional values are empty cells.
pub fn summary_table(rows: &[(String, Summary)]) -> String {
    let mut out =
        String::from("run,algorithm,seed,iterations,stop,final_J,min_grad_sq,decay_slope,reconstruction_error,wall_time\n");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for (name, s) in rows {
        writeln!(
            out,
            "{name},{},{},{},{},{:.16e},{:.16e},{},{},{:.6e}",
            s.algorithm,
            s.seed,
            s.iterations,
            s.stop,
            s.final_j,
            s.min_grad_sq,
            opt(s.decay_slope),
            opt(s.reconstruction_error),
            s.wall_time
        )
        .expect("writing to a String cannot fail");
    }
    out
}
