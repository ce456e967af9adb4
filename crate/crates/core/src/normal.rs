//! Thin wrappers around the standard normal distribution.

use statrs::distribution::{ContinuousCDF, Normal};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Standard normal CDF `Φ(x)`.
pub(crate) fn phi(x: f64) -> f64 {
    std_normal().cdf(x)
}

/// Standard normal survival `1 - Φ(x)`, computed without cancellation.
pub(crate) fn phi_sf(x: f64) -> f64 {
    std_normal().sf(x)
}

/// Standard normal quantile `Φ⁻¹(p)`.
pub(crate) fn phi_inv(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}
