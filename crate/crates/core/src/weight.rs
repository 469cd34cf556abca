//! Logarithmic weight of the squared gradient norm used by the monitored
//! quantity: `w(s) = -log(1 + s_max - s)/2` together with its derivatives.

use crate::scalar::{lit, Real};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("invalid state: s = {s} must satisfy 0 <= s <= s_max = {s_max}")]
    InvalidState { s: f64, s_max: f64 },
}

/// Current squared gradient norm together with its domain supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientWeight<F> {
    s: F,
    s_max: F,
}

/// Weight value and its first two derivatives in `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightDerivatives<F> {
    pub value: F,
    pub first: F,
    pub second: F,
}

impl<F: Real> GradientWeight<F> {
    pub fn new(s: F, s_max: F) -> Result<Self, WeightError> {
        if s < F::zero() || s > s_max || !s.is_finite() || !s_max.is_finite() {
            return Err(WeightError::InvalidState {
                s: s.to_f64().unwrap_or(f64::NAN),
                s_max: s_max.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(GradientWeight { s, s_max })
    }

    /// Evaluates the weight; the second derivative satisfies `w'' = 2 (w')^2`
    /// and `1/(2 + 2 s_max) <= w' <= 1/2` identically.
    pub fn evaluate(&self) -> WeightDerivatives<F> {
        let u = F::one() + self.s_max - self.s;
        let half = lit::<F>(0.5);
        WeightDerivatives {
            value: -half * u.ln(),
            first: half / u,
            second: half / (u * u),
        }
    }
}
