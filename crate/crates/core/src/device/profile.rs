use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("profile `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

/// Scalar field on the device, evaluated at cell centroids and face
/// midpoints.
///
/// `Piecewise` and `Tabulated` depend on `x` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `value + gradient · (x, y)`.
    Linear {
        value: f64,
        gradient: [f64; 2],
    },
    /// `values[i]` on the i-th interval cut by `breaks` (ascending);
    /// `values.len() == breaks.len() + 1`.
    Piecewise {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
    /// Linear interpolation through `(x[i], values[i])`, constant beyond the
    /// table ends.
    Tabulated {
        x: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    /// Checks the table shapes and that every value is finite.
    pub fn validate(&self, field: &str) -> Result<(), ProfileError> {
        let fail = |reason: &str| {
            Err(ProfileError::Invalid {
                field: field.to_string(),
                reason: reason.to_string(),
            })
        };
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Self::Constant { value } => {
                if !value.is_finite() {
                    return fail("value must be finite");
                }
            }
            Self::Linear { value, gradient } => {
                if !value.is_finite() || !finite(gradient) {
                    return fail("value and gradient must be finite");
                }
            }
            Self::Piecewise { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return fail("needs exactly one more value than breaks");
                }
                if !finite(breaks) || !finite(values) {
                    return fail("entries must be finite");
                }
                if breaks.windows(2).any(|w| w[0] >= w[1]) {
                    return fail("breaks must be strictly increasing");
                }
            }
            Self::Tabulated { x, values } => {
                if x.is_empty() || x.len() != values.len() {
                    return fail("x and values must be non-empty and of equal length");
                }
                if !finite(x) || !finite(values) {
                    return fail("entries must be finite");
                }
                if x.windows(2).any(|w| w[0] >= w[1]) {
                    return fail("x must be strictly increasing");
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Linear { value, gradient } => value + gradient[0] * p[0] + gradient[1] * p[1],
            Self::Piecewise { breaks, values } => {
                let i = breaks.partition_point(|&b| b <= p[0]);
                values[i]
            }
            Self::Tabulated { x, values } => {
                let t = p[0];
                if t <= x[0] {
                    return values[0];
                }
                let last = x.len() - 1;
                if t >= x[last] {
                    return values[last];
                }
                let i = x.partition_point(|&b| b <= t);
                let (x0, x1) = (x[i - 1], x[i]);
                let w = (t - x0) / (x1 - x0);
                values[i - 1] * (1.0 - w) + values[i] * w
            }
        }
    }

    /// Smallest value the profile attains.
    pub fn infimum(&self, extent: [f64; 2]) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Linear { value, gradient } => {
                value + (gradient[0] * extent[0]).min(0.0) + (gradient[1] * extent[1]).min(0.0)
            }
            Self::Piecewise { values, .. } | Self::Tabulated { values, .. } => {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }
}
