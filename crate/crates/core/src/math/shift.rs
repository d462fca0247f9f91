use serde::{Deserialize, Serialize};

use super::{ComplexVector, MathError};

/// How a window shift treats indices that leave `0..d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftMode {
    /// `(S_r v)_j = v_{(j - r) mod d}`
    #[default]
    Circular,
    /// `(S_r v)_j = v_{j - r}` inside the range, zero outside.
    ZeroPadded,
}

impl std::str::FromStr for ShiftMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "circular" => Ok(Self::Circular),
            "zero-padded" | "zero_padded" | "noncircular" => Ok(Self::ZeroPadded),
            other => Err(format!("unknown shift mode `{other}`")),
        }
    }
}

/// Shifts a vector by `offset` positions.
///
/// `shift(v, -r, mode)` is the adjoint of `shift(v, r, mode)` in both modes.
pub fn shift(v: &ComplexVector, offset: i64, mode: ShiftMode) -> ComplexVector {
    let d = v.len() as i64;
    let mut out = ComplexVector::zeros(v.len());
    match mode {
        ShiftMode::Circular => {
            let r = offset.rem_euclid(d);
            for j in 0..d {
                out[j as usize] = v[(j - r).rem_euclid(d) as usize];
            }
        }
        ShiftMode::ZeroPadded => {
            for j in 0..d {
                let src = j - offset;
                if (0..d).contains(&src) {
                    out[j as usize] = v[src as usize];
                }
            }
        }
    }
    out
}

/// The scan positions of the window.
///
/// Offsets are kept in ascending order; every region-indexed quantity in the
/// crate (measurement rows, sampling probabilities, per-region gradients)
/// follows this order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftSet {
    offsets: Vec<i64>,
    mode: ShiftMode,
}

impl ShiftSet {
    pub fn new(mut offsets: Vec<i64>, mode: ShiftMode, d: usize) -> Result<Self, MathError> {
        if offsets.is_empty() {
            return Err(MathError::EmptyShiftSet);
        }
        offsets.sort_unstable();
        if let Some(w) = offsets.windows(2).find(|w| w[0] == w[1]) {
            return Err(MathError::DuplicateShift(w[0]));
        }
        if mode == ShiftMode::Circular {
            let mut reduced: Vec<i64> = offsets.iter().map(|r| r.rem_euclid(d as i64)).collect();
            reduced.sort_unstable();
            if let Some(w) = reduced.windows(2).find(|w| w[0] == w[1]) {
                return Err(MathError::DuplicateShift(w[0]));
            }
        }
        Ok(Self { offsets, mode })
    }

    /// Every circular shift `0..d`.
    pub fn all_circular(d: usize) -> Self {
        Self {
            offsets: (0..d as i64).collect(),
            mode: ShiftMode::Circular,
        }
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn mode(&self) -> ShiftMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Region index of an offset, if present.
    pub fn position(&self, offset: i64) -> Option<usize> {
        self.offsets.binary_search(&offset).ok()
    }
}
