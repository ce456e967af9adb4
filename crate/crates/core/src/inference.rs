//! P-value bounds for the broad-case, narrow-case, and Bonferroni-combined
//! tests of Fisher's sharp null.
//!
//! The broad test statistic is the Mantel-Haenszel count `Y_b`: the number
//! of matched sets whose case is exposed. The narrow test restricts the
//! count to narrow-case matched sets. Under the `(Γ, Θ)` model each set
//! contributes an independent Bernoulli with probability inside its sharp
//! [`ProbBounds`], so the extreme allocations give sharp lower and upper
//! tail probabilities: exactly, through the Poisson-binomial convolution,
//! or through a large-sample normal approximation.

use serde::{Deserialize, Serialize};

use crate::bounds::{broad_bounds, narrow_bounds, SensitivityParams};
use crate::dist::BernoulliSum;
use crate::error::{Error, Result};
use crate::normal::{phi, phi_sf};
use crate::study::Study;

/// Which test a query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Broad,
    Narrow,
    Combined,
}

/// Direction of the alternative hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// Exposure increases case risk: reject for large `Y`.
    #[default]
    Greater,
    /// Reject for small `Y`.
    Less,
    /// Both one-sided upper bounds, smaller one doubled, capped at 1.
    TwoSided,
}

/// How tail probabilities are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact Poisson-binomial convolution.
    #[default]
    Exact,
    /// Large-sample normal approximation, no continuity correction.
    Normal,
}

/// Sharp bounds on the p-value, together with the observed statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValueBounds {
    pub lower: f64,
    pub upper: f64,
    /// Observed test statistic (count of exposed cases among the sets
    /// used).
    pub statistic: u64,
    pub n_sets_used: usize,
    pub method: Method,
    /// True when the normal path hit a zero-variance extreme allocation and
    /// fell back to the exact point-mass tail.
    pub zero_variance: bool,
}

/// Output of the Bonferroni-combined test, with its component bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinedResult {
    pub broad: PValueBounds,
    pub narrow: PValueBounds,
    /// `min(1, 2 min(broad upper, narrow upper))`.
    pub bonferroni_p: f64,
}

impl CombinedResult {
    pub fn p_broad_upper(&self) -> f64 {
        self.broad.upper
    }

    pub fn p_narrow_upper(&self) -> f64 {
        self.narrow.upper
    }
}

/// The Bonferroni combination rule for two worst-case p-values.
pub fn bonferroni_p(p_broad_upper: f64, p_narrow_upper: f64) -> f64 {
    (2.0 * p_broad_upper.min(p_narrow_upper)).min(1.0)
}

fn clamp_unit(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// `Pr(Y >= k)` for independent Bernoullis, by the requested method.
/// Returns the probability and whether a zero-variance fallback fired.
fn upper_tail(probs: &[f64], k: u64, method: Method) -> Result<(f64, bool)> {
    match method {
        Method::Exact => Ok((BernoulliSum::new(probs)?.tail_ge(k as usize), false)),
        Method::Normal => {
            let mu: f64 = probs.iter().sum();
            let var: f64 = probs.iter().map(|p| p * (1.0 - p)).sum();
            if var <= 0.0 {
                // Point mass at mu: the tail is 0 or 1 exactly.
                return Ok((if k as f64 <= mu { 1.0 } else { 0.0 }, true));
            }
            Ok((clamp_unit(phi_sf((k as f64 - mu) / var.sqrt())), false))
        }
    }
}

/// `Pr(Y <= k)`, the mirror of [`upper_tail`].
fn lower_tail(probs: &[f64], k: u64, method: Method) -> Result<(f64, bool)> {
    match method {
        Method::Exact => Ok((BernoulliSum::new(probs)?.tail_le(k as usize), false)),
        Method::Normal => {
            let mu: f64 = probs.iter().sum();
            let var: f64 = probs.iter().map(|p| p * (1.0 - p)).sum();
            if var <= 0.0 {
                return Ok((if k as f64 >= mu { 1.0 } else { 0.0 }, true));
            }
            Ok((clamp_unit(phi((k as f64 - mu) / var.sqrt())), false))
        }
    }
}

/// Sharp p-value bounds for a statistic `k` observed on sets whose
/// per-set probabilities lie inside `[lowers, uppers]`.
fn tail_pvalue_bounds(
    lowers: &[f64],
    uppers: &[f64],
    k: u64,
    alternative: Alternative,
    method: Method,
) -> Result<PValueBounds> {
    let (lower, upper, zv) = match alternative {
        Alternative::Greater => {
            // Pr(Y >= k) is largest when every set sits at its upper bound.
            let (up, z1) = upper_tail(uppers, k, method)?;
            let (lo, z2) = upper_tail(lowers, k, method)?;
            (lo, up, z1 || z2)
        }
        Alternative::Less => {
            // Pr(Y <= k) is largest at the lower extreme allocation.
            let (up, z1) = lower_tail(lowers, k, method)?;
            let (lo, z2) = lower_tail(uppers, k, method)?;
            (lo, up, z1 || z2)
        }
        Alternative::TwoSided => {
            let g = tail_pvalue_bounds(lowers, uppers, k, Alternative::Greater, method)?;
            let l = tail_pvalue_bounds(lowers, uppers, k, Alternative::Less, method)?;
            (
                (2.0 * g.lower.min(l.lower)).min(1.0),
                (2.0 * g.upper.min(l.upper)).min(1.0),
                g.zero_variance || l.zero_variance,
            )
        }
    };
    Ok(PValueBounds {
        lower,
        upper,
        statistic: k,
        n_sets_used: lowers.len(),
        method,
        zero_variance: zv,
    })
}

/// Broad-case test: all `I` sets, unmeasured confounding at most `Γ`.
pub fn broad_test(
    study: &Study,
    gamma: f64,
    alternative: Alternative,
    method: Method,
) -> Result<PValueBounds> {
    if study.n_sets() == 0 {
        return Err(Error::EmptyStudy);
    }
    let mut lowers = Vec::with_capacity(study.n_sets());
    let mut uppers = Vec::with_capacity(study.n_sets());
    for s in study.sets() {
        let b = broad_bounds(s.exposed_count, s.size, gamma)?;
        lowers.push(b.lower);
        uppers.push(b.upper);
    }
    tail_pvalue_bounds(&lowers, &uppers, study.statistic_broad(), alternative, method)
}

/// Narrow-case test: only the narrow-case matched sets, under `(Γ, Θ)`.
///
/// Errors with [`Error::NoNarrowSets`] when the study has none; the test is
/// undefined there and must not silently return 1.
pub fn narrow_test(
    study: &Study,
    params: &SensitivityParams,
    alternative: Alternative,
    method: Method,
) -> Result<PValueBounds> {
    if study.n_sets() == 0 {
        return Err(Error::EmptyStudy);
    }
    if study.narrow_count() == 0 {
        return Err(Error::NoNarrowSets);
    }
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    for s in study.narrow_sets() {
        let b = narrow_bounds(s.exposed_count, s.size, params)?;
        lowers.push(b.lower);
        uppers.push(b.upper);
    }
    tail_pvalue_bounds(&lowers, &uppers, study.statistic_narrow(), alternative, method)
}

/// Bonferroni combination of the broad and narrow tests.
///
/// Both component worst cases are attained at the same extreme allocation,
/// so doubling the smaller worst-case p-value is not unduly conservative
/// here.
pub fn combined_test(
    study: &Study,
    params: &SensitivityParams,
    alternative: Alternative,
    method: Method,
) -> Result<CombinedResult> {
    let broad = broad_test(study, params.gamma, alternative, method)?;
    let narrow = narrow_test(study, params, alternative, method)?;
    Ok(CombinedResult { broad, narrow, bonferroni_p: bonferroni_p(broad.upper, narrow.upper) })
}

/// Normal-approximation bounds on `Pr(Y >= k)` given the extreme per-set
/// probabilities: `1 - Φ((k - Σp)/√(Σp(1-p)))` evaluated at each extreme.
/// A zero-variance allocation falls back to the exact point-mass tail and
/// sets the `zero_variance` flag.
pub fn normal_tail_bounds(probs_lower: &[f64], probs_upper: &[f64], k: u64) -> Result<PValueBounds> {
    if probs_lower.is_empty() || probs_upper.is_empty() {
        return Err(Error::EmptyInput);
    }
    tail_pvalue_bounds(probs_lower, probs_upper, k, Alternative::Greater, Method::Normal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::ThetaSense;
    use crate::study::MatchedSet;
    use approx::assert_abs_diff_eq;

    fn pair_study(n: usize, exposed_cases: usize, narrow: &[bool]) -> Study {
        // n pairs (J = 2), every set with m = 1.
        let sets = (0..n)
            .map(|i| MatchedSet {
                set_id: i as u64 + 1,
                size: 2,
                exposed_count: 1,
                case_exposed: i < exposed_cases,
                is_narrow: narrow.get(i).copied().unwrap_or(false),
            })
            .collect();
        Study::new(sets).unwrap()
    }

    #[test]
    fn randomization_pvalue_fair_coins() {
        let study = pair_study(3, 3, &[]);
        let p = broad_test(&study, 1.0, Alternative::Greater, Method::Exact).unwrap();
        assert_abs_diff_eq!(p.lower, 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(p.upper, 0.125, epsilon = 1e-12);
        assert_eq!(p.statistic, 3);
    }

    #[test]
    fn gamma_two_bounds() {
        let study = pair_study(3, 3, &[]);
        let p = broad_test(&study, 2.0, Alternative::Greater, Method::Exact).unwrap();
        assert_abs_diff_eq!(p.upper, (2.0f64 / 3.0).powi(3), epsilon = 1e-12);
        assert_abs_diff_eq!(p.lower, (1.0f64 / 3.0).powi(3), epsilon = 1e-12);
    }

    #[test]
    fn gamma_one_collapses() {
        for exposed in 0..=4 {
            let study = pair_study(4, exposed, &[]);
            let p = broad_test(&study, 1.0, Alternative::Greater, Method::Exact).unwrap();
            assert_abs_diff_eq!(p.lower, p.upper, epsilon = 1e-14);
        }
    }

    #[test]
    fn narrow_single_set() {
        let study = pair_study(1, 1, &[true]);
        let p = narrow_test(&study, &SensitivityParams::none(), Alternative::Greater, Method::Exact)
            .unwrap();
        assert_abs_diff_eq!(p.lower, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.upper, 0.5, epsilon = 1e-12);

        let params = SensitivityParams::new(1.0, 3.0, ThetaSense::UpperOnly).unwrap();
        let p = narrow_test(&study, &params, Alternative::Greater, Method::Exact).unwrap();
        assert_abs_diff_eq!(p.upper, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(p.lower, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn no_narrow_sets_is_an_error() {
        let study = pair_study(3, 2, &[]);
        let r = narrow_test(&study, &SensitivityParams::none(), Alternative::Greater, Method::Exact);
        assert!(matches!(r, Err(Error::NoNarrowSets)));
        let r = combined_test(&study, &SensitivityParams::none(), Alternative::Greater, Method::Exact);
        assert!(matches!(r, Err(Error::NoNarrowSets)));
    }

    #[test]
    fn bonferroni_rule() {
        assert_abs_diff_eq!(bonferroni_p(0.01, 0.04), 0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(bonferroni_p(0.9, 0.8), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn combined_at_null_params_doubles_min_exact_pvalue() {
        let study = pair_study(4, 3, &[true, true, false, false]);
        let c = combined_test(&study, &SensitivityParams::none(), Alternative::Greater, Method::Exact)
            .unwrap();
        let pb = broad_test(&study, 1.0, Alternative::Greater, Method::Exact).unwrap();
        let pn = narrow_test(&study, &SensitivityParams::none(), Alternative::Greater, Method::Exact)
            .unwrap();
        assert_abs_diff_eq!(
            c.bonferroni_p,
            (2.0 * pb.upper.min(pn.upper)).min(1.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn normal_tail_reference_value() {
        // 100 sets with worst-case probability 1/2, k = 60: 1 - Φ(2).
        let probs = vec![0.5; 100];
        let p = normal_tail_bounds(&probs, &probs, 60).unwrap();
        assert_abs_diff_eq!(p.upper, 0.022750131948, epsilon = 1e-9);
        assert_abs_diff_eq!(p.lower, p.upper, epsilon = 1e-15);
    }

    #[test]
    fn normal_tail_whole_support() {
        let probs = vec![0.5; 100];
        let p = normal_tail_bounds(&probs, &probs, 0).unwrap();
        assert!(p.upper <= 1.0 && p.lower <= 1.0);
        assert!(p.upper > 1.0 - 1e-12);
    }

    #[test]
    fn normal_zero_variance_falls_back_to_exact() {
        let probs = vec![1.0, 1.0, 0.0];
        let p = normal_tail_bounds(&probs, &probs, 2).unwrap();
        assert!(p.zero_variance);
        assert_eq!(p.upper, 1.0);
        let p = normal_tail_bounds(&probs, &probs, 3).unwrap();
        assert_eq!(p.upper, 0.0);
    }

    #[test]
    fn two_sided_doubles_smaller_upper() {
        let study = pair_study(5, 4, &[]);
        for method in [Method::Exact, Method::Normal] {
            let g = broad_test(&study, 1.5, Alternative::Greater, method).unwrap();
            let l = broad_test(&study, 1.5, Alternative::Less, method).unwrap();
            let t = broad_test(&study, 1.5, Alternative::TwoSided, method).unwrap();
            assert_abs_diff_eq!(t.upper, (2.0 * g.upper.min(l.upper)).min(1.0), epsilon = 1e-15);
            assert!(t.lower <= t.upper);
        }
    }

    #[test]
    fn less_alternative_mirrors() {
        // All cases unexposed: Pr(Y <= 0) should be small at the upper
        // allocation and the bounds must straddle correctly.
        let study = pair_study(6, 0, &[]);
        let p = broad_test(&study, 2.0, Alternative::Less, Method::Exact).unwrap();
        assert_abs_diff_eq!(p.upper, (2.0f64 / 3.0).powi(6), epsilon = 1e-12);
        assert_abs_diff_eq!(p.lower, (1.0f64 / 3.0).powi(6), epsilon = 1e-12);
    }
}
