use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GroundTruth, LossParams, MeasurementSet, ModelError, ProblemInstance};
use crate::math::{Complex64, ComplexVector, ShiftMode, ShiftSet};

/// On-disk form of a [`ProblemInstance`].
///
/// `y` is R x d, one row per entry of `offsets`; `p` is aligned with
/// `offsets`. Complex vectors are arrays of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub d: usize,
    pub mode: ShiftMode,
    pub offsets: Vec<i64>,
    pub epsilon: f64,
    #[serde(rename = "alpha_T")]
    pub alpha_t: f64,
    #[serde(rename = "beta_T")]
    pub beta_t: f64,
    pub p: Vec<f64>,
    #[serde(rename = "K")]
    pub k: usize,
    pub y: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<[f64; 2]>>,
}

fn to_pairs(v: &ComplexVector) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn from_pairs(field: &'static str, pairs: &[[f64; 2]], d: usize) -> Result<ComplexVector, ModelError> {
    if pairs.len() != d {
        return Err(ModelError::field(field, format!("length {} (expected {d})", pairs.len())));
    }
    ComplexVector::new(pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .map_err(|e| ModelError::field(field, e.to_string()))
}

impl From<&ProblemInstance> for ProblemFile {
    fn from(problem: &ProblemInstance) -> Self {
        let truth = problem.ground_truth();
        Self {
            d: problem.dim(),
            mode: problem.shifts().mode(),
            offsets: problem.shifts().offsets().to_vec(),
            epsilon: problem.epsilon(),
            alpha_t: problem.alpha_t(),
            beta_t: problem.beta_t(),
            p: problem.p().to_vec(),
            k: problem.batch_size(),
            y: problem.measurements().rows().map(<[f64]>::to_vec).collect(),
            x: truth.map(|t| to_pairs(&t.x)),
            w: truth.map(|t| to_pairs(&t.w)),
        }
    }
}

impl TryFrom<ProblemFile> for ProblemInstance {
    type Error = ModelError;

    fn try_from(file: ProblemFile) -> Result<Self, ModelError> {
        if file.d == 0 {
            return Err(ModelError::field("d", "dimension must be >= 1"));
        }
        if file.offsets.len() != file.y.len() {
            return Err(ModelError::field(
                "offsets",
                format!("{} offsets but {} rows in y", file.offsets.len(), file.y.len()),
            ));
        }
        if file.p.len() != file.offsets.len() {
            return Err(ModelError::field("p", format!("length {} does not match offsets", file.p.len())));
        }
        if let Some((r, _)) = file.y.iter().enumerate().find(|(_, row)| row.len() != file.d) {
            return Err(ModelError::field("y", format!("row {r} does not have length d = {}", file.d)));
        }
        let shifts = ShiftSet::new(file.offsets.clone(), file.mode, file.d)
            .map_err(|e| ModelError::field("offsets", e.to_string()))?;
        // rows and probabilities follow the ascending offset order of the set
        let mut order: Vec<usize> = (0..file.offsets.len()).collect();
        order.sort_by_key(|&i| file.offsets[i]);
        let rows = order.iter().map(|&i| file.y[i].clone()).collect();
        let p = order.iter().map(|&i| file.p[i]).collect();
        let measurements = MeasurementSet::new(rows, shifts)?;
        let ground_truth = match (&file.x, &file.w) {
            (Some(x), Some(w)) => Some(GroundTruth {
                x: from_pairs("x", x, file.d)?,
                w: from_pairs("w", w, file.d)?,
            }),
            (None, None) => None,
            (Some(_), None) => return Err(ModelError::field("w", "x given without w")),
            (None, Some(_)) => return Err(ModelError::field("x", "w given without x")),
        };
        ProblemInstance::new(
            measurements,
            LossParams::new(file.epsilon, file.alpha_t, file.beta_t),
            Some(p),
            file.k,
            ground_truth,
        )
    }
}

impl ProblemInstance {
    pub fn to_json(&self) -> String {
        crate::json::to_string(&ProblemFile::from(self)).expect("problem serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: ProblemFile = crate::json::from_str(text)?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
