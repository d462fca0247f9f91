use serde::{Deserialize, Serialize};

use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Gd,
    Sgd,
    Epie,
    Interval,
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gd" => Ok(Self::Gd),
            "sgd" => Ok(Self::Sgd),
            "epie" => Ok(Self::Epie),
            "interval" => Ok(Self::Interval),
            other => Err(format!("unknown algorithm `{other}` (gd | sgd | epie | interval)")),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gd => "gd",
            Self::Sgd => "sgd",
            Self::Epie => "epie",
            Self::Interval => "interval",
        })
    }
}

/// Step-size rule of the stochastic solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SgdStepRule {
    /// `mu_t = mu * mu_max(t)`, `nu_t = nu * mu_max(t)`.
    #[default]
    Theorem,
    /// The ePIE factors rewritten as SGD steps:
    /// `mu_t = alpha p_r / (d ||v||_inf^2)`, `nu_t = beta p_r / (d ||z||_inf^2)`.
    /// Needs `K = 1`.
    EpieMapped,
}

/// Order in which ePIE visits regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexSchedule {
    /// Independent draws from `p`.
    #[default]
    Iid,
    /// Loop over a fresh random permutation of the regions each sweep.
    ShuffledLoop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Normalization power of the stochastic steps, in `[0, 1)`.
    pub theta: f64,
    /// Step decay exponent; `kappa < theta / (1 + theta)`.
    pub kappa: f64,
    pub mu: f64,
    pub nu: f64,
    /// ePIE object update factor.
    pub epie_alpha: f64,
    /// ePIE window update factor.
    pub epie_beta: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Stop once `||grad J|| <= grad_tol`; zero disables the test.
    pub grad_tol: f64,
    /// Number of equispaced points in `[0, 1]` for the interval search.
    pub gamma_grid: usize,
    /// Multiplier on the gradient descent step; 1 is the rate mode.
    pub gd_step_factor: f64,
    pub sgd_steps: SgdStepRule,
    pub schedule: IndexSchedule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Gd,
            theta: 0.5,
            kappa: 0.2,
            mu: 1.0,
            nu: 1.0,
            epie_alpha: 1.0,
            epie_beta: 1.0,
            max_iters: 1000,
            seed: 0,
            grad_tol: 0.0,
            gamma_grid: 2,
            gd_step_factor: 1.0,
            sgd_steps: SgdStepRule::Theorem,
            schedule: IndexSchedule::Iid,
        }
    }
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    /// Checks the parameters the selected algorithm actually uses.
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |field: &'static str, reason: String| Err(SolverError::InvalidConfig { field, reason });
        if !(self.grad_tol.is_finite() && self.grad_tol >= 0.0) {
            return bad("grad_tol", format!("must be finite and >= 0, got {}", self.grad_tol));
        }
        match self.algorithm {
            Algorithm::Gd => {
                if !(self.gd_step_factor > 0.0 && self.gd_step_factor <= 1.0) {
                    return bad("gd_step_factor", format!("must lie in (0, 1], got {}", self.gd_step_factor));
                }
            }
            Algorithm::Sgd => match self.sgd_steps {
                SgdStepRule::Theorem => {
                    if !(0.0..1.0).contains(&self.theta) {
                        return bad("theta", format!("must lie in [0, 1), got {}", self.theta));
                    }
                    if !(self.kappa < self.theta / (1.0 + self.theta)) {
                        return bad(
                            "kappa",
                            format!("must be below theta / (1 + theta) = {}, got {}", self.theta / (1.0 + self.theta), self.kappa),
                        );
                    }
                    if !(self.kappa.is_finite() && self.kappa >= 0.0) {
                        return bad("kappa", format!("must be >= 0, got {}", self.kappa));
                    }
                    for (field, value) in [("mu", self.mu), ("nu", self.nu)] {
                        if !(value > 0.0 && value <= 1.0) {
                            return bad(field, format!("must lie in (0, 1], got {value}"));
                        }
                    }
                }
                SgdStepRule::EpieMapped => self.validate_epie_factors()?,
            },
            Algorithm::Epie => self.validate_epie_factors()?,
            Algorithm::Interval => {
                if self.gamma_grid < 2 {
                    return bad("gamma_grid", format!("must be >= 2, got {}", self.gamma_grid));
                }
            }
        }
        Ok(())
    }

    fn validate_epie_factors(&self) -> Result<(), SolverError> {
        for (field, value) in [("epie_alpha", self.epie_alpha), ("epie_beta", self.epie_beta)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(SolverError::InvalidConfig {
                    field,
                    reason: format!("must be finite and >= 0, got {value}"),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_for_every_algorithm() {
        for algorithm in [Algorithm::Gd, Algorithm::Sgd, Algorithm::Epie, Algorithm::Interval] {
            SolverConfig::new(algorithm).validate().unwrap();
        }
    }

    #[test]
    fn invalid_parameters_name_the_field() {
        let mut cfg = SolverConfig::new(Algorithm::Sgd);
        cfg.kappa = 0.4;
        assert!(matches!(cfg.validate(), Err(SolverError::InvalidConfig { field: "kappa", .. })));
        cfg.kappa = 0.2;
        cfg.theta = 1.0;
        assert!(matches!(cfg.validate(), Err(SolverError::InvalidConfig { field: "theta", .. })));
        let mut cfg = SolverConfig::new(Algorithm::Interval);
        cfg.gamma_grid = 1;
        assert!(matches!(cfg.validate(), Err(SolverError::InvalidConfig { field: "gamma_grid", .. })));
        let mut cfg = SolverConfig::new(Algorithm::Gd);
        cfg.gd_step_factor = 1.5;
        assert!(matches!(cfg.validate(), Err(SolverError::InvalidConfig { field: "gd_step_factor", .. })));
    }

    #[test]
    fn config_json_fills_defaults() {
        let cfg: SolverConfig = serde_json::from_str(r#"{"algorithm":"sgd","seed":7}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.theta, 0.5);
        assert!(serde_json::from_str::<SolverConfig>(r#"{"algo":"sgd"}"#).is_err());
    }
}
