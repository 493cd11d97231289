//! Deterministic tuning-parameter sequences λ_T.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// λ_T as a function of the sample size, always of the form `scale · T^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub enum TuningRule<F> {
    /// λ_T ≡ λ₀ (conservative tuning).
    Const { lambda0: F },
    /// λ_T = T^a.
    Power { exponent: F },
    /// λ_T = T.
    Linear,
}

impl<F: Scalar> TuningRule<F> {
    pub fn lambda_at(&self, t: usize) -> F {
        self.scale() * F::of_usize(t).powf(self.exponent())
    }

    pub fn exponent(&self) -> F {
        match self {
            TuningRule::Const { .. } => F::zero(),
            TuningRule::Power { exponent } => *exponent,
            TuningRule::Linear => F::one(),
        }
    }

    pub fn scale(&self) -> F {
        match self {
            TuningRule::Const { lambda0 } => *lambda0,
            _ => F::one(),
        }
    }

    /// λ_T stays bounded (limit λ₀ < ∞).
    pub fn is_conservative(&self) -> bool {
        self.exponent() <= F::zero()
    }

    /// The finite limit λ₀ for conservative rules.
    pub fn limit(&self) -> Option<F> {
        let a = self.exponent();
        if a < F::zero() {
            Some(F::zero())
        } else if a == F::zero() {
            Some(self.scale())
        } else {
            None
        }
    }

    /// λ_T > 0 and T⁻²λ_T → 0.
    pub fn validate(&self) -> Result<()> {
        if let TuningRule::Const { lambda0 } = self {
            if !(*lambda0 > F::zero()) || !lambda0.is_finite() {
                return Err(Error::Config(format!(
                    "constant tuning parameter must be positive and finite, got {lambda0}"
                )));
            }
        }
        let a = self.exponent();
        if !a.is_finite() || a >= F::of(2.0) {
            return Err(Error::Config(format!(
                "tuning exponent {a} violates T^-2 lambda_T -> 0 (need exponent < 2)"
            )));
        }
        Ok(())
    }

    /// Short tag used in file names, e.g. `c1`, `p0.25`, `T`.
    pub fn label(&self) -> String {
        match self {
            TuningRule::Const { lambda0 } => format!("c{lambda0}"),
            TuningRule::Power { exponent } => format!("p{exponent}"),
            TuningRule::Linear => "T".to_string(),
        }
    }
}

impl<F: Scalar> fmt::Display for TuningRule<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TuningRule::Const { lambda0 } => write!(f, "lambda_T = {lambda0}"),
            TuningRule::Power { exponent } => write!(f, "lambda_T = T^{exponent}"),
            TuningRule::Linear => f.write_str("lambda_T = T"),
        }
    }
}
