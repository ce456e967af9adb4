//! Sharp per-set bounds on the probability that the case is exposed, under
//! the `(Γ, Θ)` sensitivity model.
//!
//! For a matched set with `m` exposed subjects out of `J`, unmeasured
//! confounding of magnitude `Γ` bounds the case-exposure probability by
//!
//! ```text
//! m / (m + (J - m)Γ)  <=  Pr(Y = 1)  <=  mΓ / (mΓ + J - m)
//! ```
//!
//! Restricting to narrow-case matched sets adds selection bias: with the
//! treatment-on-case-definition effect bounded by `Θ`, the upper bound
//! becomes `mΘΓ / (mΘΓ + J - m)` while the lower bound keeps `Γ` alone
//! (or uses `ΘΓ` under the symmetric variant of the model). Both bounds
//! are attained by extreme allocations of the unobserved confounder, so
//! they are sharp.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Direction of the bound on the narrow-case risk ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaSense {
    /// `1 <= θ_T/θ_C <= Θ`: treatment can only make an always-case more
    /// likely to be narrow. The default, matching the main model.
    #[default]
    UpperOnly,
    /// `Θ⁻¹ <= θ_T/θ_C <= Θ`: treatment may move the ratio either way.
    Symmetric,
}

/// The pair `(Γ, Θ)` of sensitivity parameters, plus the sense of the
/// `Θ` bound. `Γ = Θ = 1` recovers plain randomization inference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityParams {
    pub gamma: f64,
    pub theta: f64,
    pub theta_sense: ThetaSense,
}

impl SensitivityParams {
    /// Validates `gamma >= 1` and `theta >= 1`.
    pub fn new(gamma: f64, theta: f64, theta_sense: ThetaSense) -> Result<Self> {
        if !(gamma >= 1.0) {
            return Err(Error::InvalidGamma(gamma));
        }
        if !(theta >= 1.0) {
            return Err(Error::InvalidTheta(theta));
        }
        Ok(Self { gamma, theta, theta_sense })
    }

    /// `(Γ, 1, upper-only)`: unmeasured confounding alone.
    pub fn gamma_only(gamma: f64) -> Result<Self> {
        Self::new(gamma, 1.0, ThetaSense::UpperOnly)
    }

    /// Randomization inference: `Γ = Θ = 1`.
    pub fn none() -> Self {
        Self { gamma: 1.0, theta: 1.0, theta_sense: ThetaSense::UpperOnly }
    }
}

/// A sharp `[lower, upper]` interval for one set's case-exposure
/// probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbBounds {
    pub lower: f64,
    pub upper: f64,
}

fn check_set(m: u32, j: u32, gamma: f64) -> Result<()> {
    if !(gamma >= 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    if j < 2 {
        return Err(Error::InvalidModel(format!("set size J must be >= 2, got {j}")));
    }
    if m > j {
        return Err(Error::InvalidCount { m, j });
    }
    Ok(())
}

/// Bounds for the broad-case analysis: `m/(m + (J-m)Γ) .. mΓ/(mΓ + J-m)`.
///
/// Degenerate `m = 0` and `m = J` give the point masses `(0, 0)` and
/// `(1, 1)`.
pub fn broad_bounds(m: u32, j: u32, gamma: f64) -> Result<ProbBounds> {
    check_set(m, j, gamma)?;
    if m == 0 {
        return Ok(ProbBounds { lower: 0.0, upper: 0.0 });
    }
    if m == j {
        return Ok(ProbBounds { lower: 1.0, upper: 1.0 });
    }
    let (m, j) = (f64::from(m), f64::from(j));
    Ok(ProbBounds {
        lower: m / (m + (j - m) * gamma),
        upper: m * gamma / (m * gamma + j - m),
    })
}

/// Bounds for the narrow-case analysis under `(Γ, Θ)`.
///
/// The upper bound is `mΘΓ/(mΘΓ + J-m)`. The lower bound is
/// `m/(m + (J-m)Γ)` when only upward selection is allowed, and
/// `m/(m + (J-m)ΘΓ)` under the symmetric bound.
pub fn narrow_bounds(m: u32, j: u32, params: &SensitivityParams) -> Result<ProbBounds> {
    check_set(m, j, params.gamma)?;
    if !(params.theta >= 1.0) {
        return Err(Error::InvalidTheta(params.theta));
    }
    if m == 0 {
        return Ok(ProbBounds { lower: 0.0, upper: 0.0 });
    }
    if m == j {
        return Ok(ProbBounds { lower: 1.0, upper: 1.0 });
    }
    let (m, j) = (f64::from(m), f64::from(j));
    let tg = params.theta * params.gamma;
    let lower_rate = match params.theta_sense {
        ThetaSense::UpperOnly => params.gamma,
        ThetaSense::Symmetric => tg,
    };
    Ok(ProbBounds {
        lower: m / (m + (j - m) * lower_rate),
        upper: m * tg / (m * tg + j - m),
    })
}

/// `Θ` implied by a maximum displaced fraction of always-cases.
///
/// A fraction `f` of narrow cases that the treatment could have moved in
/// from the marginal cases corresponds to `Θ = 1/(1 - f)`.
pub fn theta_from_displacement(fraction: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidProbability {
            name: "displaced fraction",
            range: "[0, 1)",
            value: fraction,
        });
    }
    Ok(1.0 / (1.0 - fraction))
}

/// Inverse of [`theta_from_displacement`]: `f = 1 - 1/Θ`.
pub fn displacement_from_theta(theta: f64) -> Result<f64> {
    if !(theta >= 1.0) {
        return Err(Error::InvalidTheta(theta));
    }
    Ok(1.0 - 1.0 / theta)
}
