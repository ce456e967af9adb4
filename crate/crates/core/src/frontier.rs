//! The sensitivity frontier: the largest `Γ` at which a test still
//! rejects, traced over a grid of `Θ` values.
//!
//! Because every worst-case p-value upper bound is nondecreasing in `Γ`,
//! the rejection region in `Γ` is an interval starting at 1 and `Γ*` is
//! found by bisection. The broad test never involves `Θ`, so its frontier
//! is a horizontal line; the narrow and combined frontiers are
//! nonincreasing in `Θ`.

use serde::{Deserialize, Serialize};

use crate::bounds::{SensitivityParams, ThetaSense};
use crate::error::{Error, Result};
use crate::inference::{broad_test, combined_test, narrow_test, Alternative, Method, TestKind};
use crate::study::Study;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Γ search ceiling; beyond this a frontier is reported as `AtLeast`.
pub const GAMMA_CEILING: f64 = 100.0;

/// Absolute bisection tolerance in Γ.
pub const GAMMA_TOLERANCE: f64 = 1e-4;

/// Outcome of a largest-Γ search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaStar {
    /// The supremum Γ at which the test still rejects, to [`GAMMA_TOLERANCE`].
    Value(f64),
    /// The test still rejects at the search ceiling.
    AtLeast(f64),
    /// The test does not reject even at Γ = 1.
    RejectsNowhere,
}

impl GammaStar {
    /// Numeric value for plotting: the ceiling stands in for `AtLeast`,
    /// `None` for a test that rejects nowhere.
    pub fn plot_value(&self) -> Option<f64> {
        match *self {
            GammaStar::Value(g) => Some(g),
            GammaStar::AtLeast(g) => Some(g),
            GammaStar::RejectsNowhere => None,
        }
    }
}

/// One grid point of the frontier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub theta: f64,
    pub gamma_star_broad: GammaStar,
    pub gamma_star_narrow: GammaStar,
    pub gamma_star_combined: GammaStar,
}

/// Worst-case one-sided p-value upper bound for the given test at
/// `(Γ, Θ)`.
fn p_upper(study: &Study, gamma: f64, theta: f64, test: TestKind, method: Method) -> Result<f64> {
    let params = SensitivityParams::new(gamma, theta, ThetaSense::UpperOnly)?;
    Ok(match test {
        TestKind::Broad => broad_test(study, gamma, Alternative::Greater, method)?.upper,
        TestKind::Narrow => narrow_test(study, &params, Alternative::Greater, method)?.upper,
        TestKind::Combined => combined_test(study, &params, Alternative::Greater, method)?.bonferroni_p,
    })
}

/// The largest `Γ` at which the test still rejects at level `alpha`, for
/// the given `Θ`, found by bisection over `[1, GAMMA_CEILING]`.
///
/// Errors with [`Error::NoRejectionAtOne`] when the test already fails at
/// `Γ = 1`; returns [`GammaStar::AtLeast`] when it still rejects at the
/// ceiling.
pub fn gamma_star(
    study: &Study,
    alpha: f64,
    theta: f64,
    test: TestKind,
    method: Method,
) -> Result<GammaStar> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidProbability { name: "alpha", range: "(0, 1)", value: alpha });
    }
    let p_at_one = p_upper(study, 1.0, theta, test, method)?;
    if p_at_one > alpha {
        return Err(Error::NoRejectionAtOne { p_upper: p_at_one, alpha });
    }
    if p_upper(study, GAMMA_CEILING, theta, test, method)? <= alpha {
        return Ok(GammaStar::AtLeast(GAMMA_CEILING));
    }
    // Invariant: rejects at lo, fails at hi; the upper bound is monotone
    // nondecreasing in gamma.
    let (mut lo, mut hi) = (1.0, GAMMA_CEILING);
    while hi - lo > GAMMA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if p_upper(study, mid, theta, test, method)? <= alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(GammaStar::Value(0.5 * (lo + hi)))
}

fn point_at(study: &Study, alpha: f64, theta: f64, broad: GammaStar, method: Method) -> Result<FrontierPoint> {
    let soften = |r: Result<GammaStar>| match r {
        Ok(g) => Ok(g),
        Err(Error::NoRejectionAtOne { .. }) => Ok(GammaStar::RejectsNowhere),
        Err(e) => Err(e),
    };
    Ok(FrontierPoint {
        theta,
        gamma_star_broad: broad,
        gamma_star_narrow: soften(gamma_star(study, alpha, theta, TestKind::Narrow, method))?,
        gamma_star_combined: soften(gamma_star(study, alpha, theta, TestKind::Combined, method))?,
    })
}

/// The frontier over `Θ` in `[theta_min, theta_max]` with the given step.
///
/// The broad `Γ*` is computed once and repeated across the grid. A test
/// that fails to reject at `Γ = 1` is flagged `RejectsNowhere` rather than
/// aborting the curve. Grid points evaluate independently (in parallel
/// when the `parallel` feature is on) and the output is deterministic.
pub fn frontier_curve(
    study: &Study,
    alpha: f64,
    theta_min: f64,
    theta_max: f64,
    step: f64,
    method: Method,
) -> Result<Vec<FrontierPoint>> {
    if !(theta_min >= 1.0) {
        return Err(Error::InvalidTheta(theta_min));
    }
    if theta_max < theta_min || !(step > 0.0) {
        return Err(Error::InvalidModel(format!(
            "bad theta grid: min {theta_min}, max {theta_max}, step {step}"
        )));
    }
    let broad = match gamma_star(study, alpha, 1.0, TestKind::Broad, method) {
        Ok(g) => g,
        Err(Error::NoRejectionAtOne { .. }) => GammaStar::RejectsNowhere,
        Err(e) => return Err(e),
    };
    let n_points = ((theta_max - theta_min) / step + 1e-9).floor() as usize + 1;
    let thetas: Vec<f64> = (0..n_points).map(|k| theta_min + k as f64 * step).collect();

    #[cfg(feature = "parallel")]
    let iter = thetas.into_par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = thetas.into_iter();

    iter.map(|theta| point_at(study, alpha, theta, broad, method)).collect()
}
