use serde::{Deserialize, Serialize};

use super::MeasurementSet;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseModel {
    #[default]
    None,
    /// Each intensity replaced by a Poisson draw with that mean.
    Poisson,
    /// Additive `sigma * N(0, 1)`, clamped at zero.
    Gaussian { sigma: f64 },
}

impl std::str::FromStr for NoiseModel {
    type Err = String;

    /// `none`, `poisson` or `gaussian:<sigma>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self::None),
            "poisson" => Ok(Self::Poisson),
            _ => match s.strip_prefix("gaussian:") {
                Some(sigma) => {
                    let sigma: f64 = sigma.parse().map_err(|e| format!("bad sigma `{sigma}`: {e}"))?;
                    if !(sigma.is_finite() && sigma >= 0.0) {
                        return Err(format!("sigma must be finite and >= 0, got {sigma}"));
                    }
                    Ok(Self::Gaussian { sigma })
                }
                None => Err(format!("unknown noise model `{s}` (none | poisson | gaussian:<sigma>)")),
            },
        }
    }
}

pub fn add_noise(y: &MeasurementSet, model: &NoiseModel, rng: &mut Rng) -> MeasurementSet {
    match *model {
        NoiseModel::None => y.clone(),
        NoiseModel::Poisson => y.map_values(|mean| rng.poisson(mean)),
        NoiseModel::Gaussian { sigma } => {
            if sigma == 0.0 {
                return y.clone();
            }
            y.map_values(|value| (value + sigma * rng.standard_normal()).max(0.0))
        }
    }
}
