//! Closed-form power of sensitivity analysis, design sensitivities, and
//! sample-size solving under an iid favorable data-generating model.
//!
//! The favorable model fixes an exposure prevalence `π`, broad-case risks
//! `b_T, b_C` given exposure status, and narrow-given-broad risks
//! `η_T, η_C`. Power is the probability that a level-`α` sensitivity
//! analysis at `(Γ, Θ)` rejects when in truth there is an effect and no
//! bias. Conditioning on one case and `J - 1` referents per set gives a
//! closed-form pmf for the exposed-subject count `m`, hence exact
//! expectations of the worst-case per-set probabilities and a normal-limit
//! power formula for each test.
//!
//! As the number of sets grows, power tends to 1 below the design
//! sensitivity `Γ̃` and to 0 above it; `Γ̃` has the closed forms
//! `Γ̃_b = odds(b_T)/odds(b_C)` and `Γ̃_n = Γ̃_b · (η_T/η_C)/Θ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{phi, phi_inv};

/// Which case definition a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definition {
    Broad,
    Narrow,
}

/// The iid generative model `(π, b_T, b_C, η_T, η_C, J)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FavorableModel {
    /// Exposure prevalence `Pr(Z = 1)`.
    pub pi: f64,
    /// `Pr(broad case | exposed)`.
    pub b_t: f64,
    /// `Pr(broad case | unexposed)`.
    pub b_c: f64,
    /// `Pr(narrow | broad case, exposed)`.
    pub eta_t: f64,
    /// `Pr(narrow | broad case, unexposed)`.
    pub eta_c: f64,
    /// Matched-set size (one case plus `J - 1` referents).
    pub j: u32,
}

/// Largest set size for which the exact pmf summation is used.
pub const MAX_SET_SIZE: u32 = 30;

impl FavorableModel {
    pub fn new(pi: f64, b_t: f64, b_c: f64, eta_t: f64, eta_c: f64, j: u32) -> Result<Self> {
        for (name, v) in [("pi", pi), ("b_t", b_t), ("b_c", b_c), ("eta_t", eta_t), ("eta_c", eta_c)]
        {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidProbability { name, range: "(0, 1)", value: v });
            }
        }
        if !(2..=MAX_SET_SIZE).contains(&j) {
            return Err(Error::InvalidModel(format!(
                "set size J must be in [2, {MAX_SET_SIZE}], got {j}"
            )));
        }
        Ok(Self { pi, b_t, b_c, eta_t, eta_c, j })
    }

    /// True when an "effect" parameter runs backwards (`b_T < b_C` or
    /// `η_T < η_C`). The formulas still hold; callers may want to warn.
    pub fn has_reversed_effect(&self) -> bool {
        self.b_t < self.b_c || self.eta_t < self.eta_c
    }

    /// `q = Pr(narrow | broad case)`: the expected fraction of matched sets
    /// that are narrow.
    pub fn narrow_fraction(&self) -> f64 {
        (self.eta_t * self.b_t * self.pi + self.eta_c * self.b_c * (1.0 - self.pi))
            / (self.b_t * self.pi + self.b_c * (1.0 - self.pi))
    }

    /// `Pr(Z = 1 | referent)`, from Bayes' rule.
    pub fn referent_exposure_prob(&self) -> f64 {
        let num = (1.0 - self.b_t) * self.pi;
        num / (num + (1.0 - self.b_c) * (1.0 - self.pi))
    }
}

/// A power query: model, number of broad-case sets, `(Γ, Θ)`, level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSpec {
    pub model: FavorableModel,
    pub n_sets: u32,
    pub gamma: f64,
    pub theta: f64,
    pub alpha: f64,
}

impl PowerSpec {
    pub fn new(model: FavorableModel, n_sets: u32, gamma: f64, theta: f64, alpha: f64) -> Result<Self> {
        if !(gamma >= 1.0) {
            return Err(Error::InvalidGamma(gamma));
        }
        if !(theta >= 1.0) {
            return Err(Error::InvalidTheta(theta));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidProbability { name: "alpha", range: "(0, 1)", value: alpha });
        }
        if n_sets == 0 {
            return Err(Error::InvalidModel("number of sets must be >= 1".into()));
        }
        Ok(Self { model, n_sets, gamma, theta, alpha })
    }
}

/// Exact binomial coefficient as a float; exact in f64 for `n <= 30`.
fn binom(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c *= f64::from(n - i) / f64::from(i + 1);
    }
    c
}

/// Shared pmf kernel: `eta_t = eta_c = 1` gives the broad-case pmf of `m`
/// conditional on the one-case-per-set frame; general `η` weights condition
/// additionally on the set being narrow.
fn pmf_m(model: &FavorableModel, t: u32, eta_t: f64, eta_c: f64) -> f64 {
    let FavorableModel { pi, b_t, b_c, j, .. } = *model;
    let jf = f64::from(j);
    let denom = (b_t * eta_t * pi + b_c * eta_c * (1.0 - pi))
        * ((1.0 - b_t) * pi + (1.0 - b_c) * (1.0 - pi)).powf(jf - 1.0);
    let tf = f64::from(t);
    let num = if t == 0 {
        (1.0 - pi).powf(jf) * b_c * eta_c * (1.0 - b_c).powf(jf - 1.0)
    } else if t == j {
        pi.powf(jf) * b_t * eta_t * (1.0 - b_t).powf(jf - 1.0)
    } else {
        pi.powf(tf)
            * (1.0 - pi).powf(jf - tf)
            * (b_t * eta_t * binom(j - 1, t - 1) * (1.0 - b_t).powf(tf - 1.0)
                * (1.0 - b_c).powf(jf - tf)
                + b_c * eta_c * binom(j - 1, t) * (1.0 - b_t).powf(tf)
                    * (1.0 - b_c).powf(jf - 1.0 - tf))
    };
    num / denom
}

/// `Pr(m = t)` in a broad-case matched set.
pub fn pmf_m_broad(model: &FavorableModel, t: u32) -> Result<f64> {
    if t > model.j {
        return Err(Error::InvalidCount { m: t, j: model.j });
    }
    Ok(pmf_m(model, t, 1.0, 1.0))
}

/// `Pr(m = t)` in a narrow-case matched set.
pub fn pmf_m_narrow(model: &FavorableModel, t: u32) -> Result<f64> {
    if t > model.j {
        return Err(Error::InvalidCount { m: t, j: model.j });
    }
    Ok(pmf_m(model, t, model.eta_t, model.eta_c))
}

/// `Pr(Z = 1 | case)` under the favorable model, for either definition.
pub fn case_exposure_prob(model: &FavorableModel, definition: Definition) -> f64 {
    let (wt, wc) = match definition {
        Definition::Broad => (1.0, 1.0),
        Definition::Narrow => (model.eta_t, model.eta_c),
    };
    let num = model.b_t * wt * model.pi;
    num / (num + model.b_c * wc * (1.0 - model.pi))
}

/// Worst-case upper bound probability for a set with `t` exposed of `j`,
/// at odds multiplier `rate` (`Γ` for broad, `ΘΓ` for narrow).
fn worst_case_prob(t: u32, j: u32, rate: f64) -> f64 {
    let (t, j) = (f64::from(t), f64::from(j));
    t * rate / (t * rate + j - t)
}

/// `(E[p̿], E[p̿(1 - p̿)])` over the pmf of `m` for the given definition.
fn worst_case_moments(model: &FavorableModel, rate: f64, definition: Definition) -> (f64, f64) {
    let (eta_t, eta_c) = match definition {
        Definition::Broad => (1.0, 1.0),
        Definition::Narrow => (model.eta_t, model.eta_c),
    };
    let mut mean = 0.0;
    let mut spread = 0.0;
    for t in 0..=model.j {
        let w = pmf_m(model, t, eta_t, eta_c);
        let p = worst_case_prob(t, model.j, rate);
        mean += w * p;
        spread += w * p * (1.0 - p);
    }
    (mean, spread)
}

/// Normal-limit power with a possibly fractional number of sets. Exposed
/// for identities that substitute the expected narrow count `qI`.
pub fn power_at(
    model: &FavorableModel,
    n_sets: f64,
    gamma: f64,
    theta: f64,
    alpha: f64,
    definition: Definition,
) -> f64 {
    let (rate, p_case) = match definition {
        Definition::Broad => (gamma, case_exposure_prob(model, Definition::Broad)),
        Definition::Narrow => (theta * gamma, case_exposure_prob(model, Definition::Narrow)),
    };
    let (e_upper, e_spread) = worst_case_moments(model, rate, definition);
    let z = phi_inv(1.0 - alpha);
    phi((n_sets.sqrt() * (p_case - e_upper) - z * e_spread.sqrt()) / (p_case * (1.0 - p_case)).sqrt())
}

/// Power of the broad-case sensitivity analysis at level `α` and bias `Γ`.
pub fn power_broad(spec: &PowerSpec) -> f64 {
    power_at(&spec.model, f64::from(spec.n_sets), spec.gamma, 1.0, spec.alpha, Definition::Broad)
}

/// Power of the narrow-case sensitivity analysis at `(Γ, Θ)`, with the
/// expected narrow count `qI` standing in for `|N|`.
pub fn power_narrow(spec: &PowerSpec) -> f64 {
    let q = spec.model.narrow_fraction();
    power_at(
        &spec.model,
        q * f64::from(spec.n_sets),
        spec.gamma,
        spec.theta,
        spec.alpha,
        Definition::Narrow,
    )
}

/// Expected number of narrow-case matched sets, `q · I`.
pub fn expected_narrow_sets(model: &FavorableModel, n_sets: u32) -> f64 {
    model.narrow_fraction() * f64::from(n_sets)
}

/// Closed-form design sensitivity. `theta` is required for the narrow
/// definition and ignored for the broad one.
pub fn design_sensitivity(
    model: &FavorableModel,
    theta: Option<f64>,
    definition: Definition,
) -> Result<f64> {
    let broad = (model.b_t / (1.0 - model.b_t)) / (model.b_c / (1.0 - model.b_c));
    match definition {
        Definition::Broad => Ok(broad),
        Definition::Narrow => {
            let theta = theta.ok_or_else(|| {
                Error::InvalidModel("theta is required for the narrow design sensitivity".into())
            })?;
            if !(theta >= 1.0) {
                return Err(Error::InvalidTheta(theta));
            }
            Ok(broad * (model.eta_t / model.eta_c) / theta)
        }
    }
}

const DESIGN_ROOT_CEIL: f64 = 1e3;
const DESIGN_ROOT_TOL: f64 = 1e-8;

/// Design sensitivity found as the root in `Γ` of
/// `p_case - E(p̿ | definition) = 0` by bisection, independent of the
/// closed form.
pub fn design_sensitivity_numeric(
    model: &FavorableModel,
    theta: Option<f64>,
    definition: Definition,
) -> Result<f64> {
    let (theta, p_case) = match definition {
        Definition::Broad => (1.0, case_exposure_prob(model, Definition::Broad)),
        Definition::Narrow => {
            let theta = theta.ok_or_else(|| {
                Error::InvalidModel("theta is required for the narrow design sensitivity".into())
            })?;
            (theta, case_exposure_prob(model, Definition::Narrow))
        }
    };
    let gap = |gamma: f64| p_case - worst_case_moments(model, theta * gamma, definition).0;
    let (mut lo, mut hi) = (1.0, DESIGN_ROOT_CEIL);
    if gap(lo) < 0.0 || gap(hi) > 0.0 {
        return Err(Error::NotBracketed { lo, hi });
    }
    while hi - lo > DESIGN_ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if gap(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Number of broad-case matched sets needed for the target power.
///
/// Solves the normal-limit power equation for the (real) set count and
/// rounds to the nearest integer, so the printed power at the result may
/// sit a hair's breadth either side of the target. Unattainable when `Γ`
/// is at or beyond the design sensitivity.
pub fn required_sets(
    model: &FavorableModel,
    gamma: f64,
    theta: Option<f64>,
    alpha: f64,
    target_power: f64,
    definition: Definition,
) -> Result<u64> {
    if !(target_power > 0.0 && target_power < 1.0) {
        return Err(Error::InvalidProbability {
            name: "target_power",
            range: "(0, 1)",
            value: target_power,
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidProbability { name: "alpha", range: "(0, 1)", value: alpha });
    }
    if !(gamma >= 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    let design = design_sensitivity(model, theta, definition)?;
    if gamma >= design {
        return Err(Error::Unattainable { gamma, design });
    }
    let (rate, p_case, q) = match definition {
        Definition::Broad => (gamma, case_exposure_prob(model, Definition::Broad), 1.0),
        Definition::Narrow => (
            theta.unwrap_or(1.0) * gamma,
            case_exposure_prob(model, Definition::Narrow),
            model.narrow_fraction(),
        ),
    };
    let (e_upper, e_spread) = worst_case_moments(model, rate, definition);
    let margin = p_case - e_upper; // positive below the design sensitivity
    let root = (phi_inv(1.0 - alpha) * e_spread.sqrt()
        + phi_inv(target_power) * (p_case * (1.0 - p_case)).sqrt())
        / margin;
    let sets = (root * root / q).round().max(1.0);
    Ok(sets as u64)
}

/// Whether the narrow test's design sensitivity is at least the broad
/// test's: `η_T/η_C >= Θ`.
pub fn favorable_condition_check(model: &FavorableModel, theta: f64) -> bool {
    model.eta_t / model.eta_c >= theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn model(b_c: f64, b_t: f64, eta_c: f64, eta_t: f64) -> FavorableModel {
        FavorableModel::new(1.0 / 3.0, b_t, b_c, eta_t, eta_c, 6).unwrap()
    }

    #[test]
    fn pmf_normalizes() {
        for m in [model(0.1, 0.3, 0.15, 0.30), model(0.01, 0.03, 0.80, 0.85)] {
            let broad: f64 = (0..=m.j).map(|t| pmf_m_broad(&m, t).unwrap()).sum();
            let narrow: f64 = (0..=m.j).map(|t| pmf_m_narrow(&m, t).unwrap()).sum();
            assert_abs_diff_eq!(broad, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(narrow, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pmf_degenerates_without_exposure() {
        let m = FavorableModel::new(1e-9, 0.3, 0.1, 0.3, 0.15, 6).unwrap();
        assert!(pmf_m_broad(&m, 0).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn narrow_pmf_matches_broad_when_eta_equal() {
        let m = model(0.1, 0.3, 0.4, 0.4);
        for t in 0..=m.j {
            assert_abs_diff_eq!(
                pmf_m_broad(&m, t).unwrap(),
                pmf_m_narrow(&m, t).unwrap(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn case_exposure_probabilities() {
        let m = model(0.1, 0.3, 0.15, 0.30);
        assert_abs_diff_eq!(case_exposure_prob(&m, Definition::Broad), 0.6, epsilon = 1e-12);
        let flat = model(0.2, 0.2, 0.15, 0.30);
        assert_abs_diff_eq!(case_exposure_prob(&flat, Definition::Broad), flat.pi, epsilon = 1e-12);
        let eq = model(0.1, 0.3, 0.4, 0.4);
        assert_abs_diff_eq!(
            case_exposure_prob(&eq, Definition::Narrow),
            case_exposure_prob(&eq, Definition::Broad),
            epsilon = 1e-15
        );
    }

    #[test]
    fn broad_power_reference_values() {
        let m = model(0.1, 0.3, 0.15, 0.30);
        let p = |gamma, n| {
            power_broad(&PowerSpec::new(m, n, gamma, 1.0, 0.05).unwrap())
        };
        assert_abs_diff_eq!(p(1.0, 18), 0.804, epsilon = 5e-4);
        assert_abs_diff_eq!(p(3.0, 559), 0.800, epsilon = 5e-4);
        let small = model(0.01, 0.03, 0.15, 0.30);
        let p = power_broad(&PowerSpec::new(small, 559, 3.0, 1.0, 0.05).unwrap());
        assert_abs_diff_eq!(p, 0.099, epsilon = 5e-4);
    }

    #[test]
    fn narrow_power_reference_values() {
        let m = model(0.1, 0.3, 0.15, 0.30);
        let p1 = power_narrow(&PowerSpec::new(m, 18, 1.0, 1.0, 0.05).unwrap());
        assert_abs_diff_eq!(p1, 0.577, epsilon = 5e-4);
        let p2 = power_narrow(&PowerSpec::new(m, 559, 3.0, 1.0, 0.05).unwrap());
        assert_abs_diff_eq!(p2, 0.997, epsilon = 5e-4);
        let m85 = model(0.1, 0.3, 0.80, 0.85);
        let p3 = power_narrow(&PowerSpec::new(m85, 18, 1.0, 2.0, 0.05).unwrap());
        assert_abs_diff_eq!(p3, 0.343, epsilon = 5e-4);
    }

    #[test]
    fn design_sensitivity_closed_forms() {
        let m = model(0.1, 0.3, 0.15, 0.30);
        let broad = design_sensitivity(&m, None, Definition::Broad).unwrap();
        assert_abs_diff_eq!(broad, 27.0 / 7.0, epsilon = 1e-12);
        let narrow = design_sensitivity(&m, Some(1.0), Definition::Narrow).unwrap();
        assert_abs_diff_eq!(narrow, 2.0 * broad, epsilon = 1e-12);
        let narrow15 = design_sensitivity(&m, Some(1.5), Definition::Narrow).unwrap();
        assert_abs_diff_eq!(narrow15, 2.0 * broad / 1.5, epsilon = 1e-12);
        let flat = model(0.2, 0.2, 0.15, 0.30);
        assert_abs_diff_eq!(
            design_sensitivity(&flat, None, Definition::Broad).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn numeric_design_sensitivity_agrees() {
        for (b_c, b_t) in [(0.1, 0.3), (0.01, 0.03), (0.2, 0.5)] {
            let m = model(b_c, b_t, 0.15, 0.30);
            let closed = design_sensitivity(&m, None, Definition::Broad).unwrap();
            let numeric = design_sensitivity_numeric(&m, None, Definition::Broad).unwrap();
            assert_abs_diff_eq!(numeric, closed, epsilon = 1e-6);
            let closed_n = design_sensitivity(&m, Some(1.4), Definition::Narrow).unwrap();
            let numeric_n = design_sensitivity_numeric(&m, Some(1.4), Definition::Narrow).unwrap();
            assert_abs_diff_eq!(numeric_n, closed_n, epsilon = 1e-6);
        }
        let small = model(0.01, 0.03, 0.15, 0.30);
        let g = design_sensitivity_numeric(&small, None, Definition::Broad).unwrap();
        assert_abs_diff_eq!(g, 3.0618556701, epsilon = 1e-6);
    }

    #[test]
    fn narrow_design_matches_broad_when_theta_cancels() {
        let m = model(0.1, 0.3, 0.15, 0.30);
        let theta = m.eta_t / m.eta_c;
        let broad = design_sensitivity_numeric(&m, None, Definition::Broad).unwrap();
        let narrow = design_sensitivity_numeric(&m, Some(theta), Definition::Narrow).unwrap();
        assert_abs_diff_eq!(broad, narrow, epsilon = 1e-6);
    }

    #[test]
    fn required_sets_reference_values() {
        let m = model(0.1, 0.3, 0.15, 0.30);
        let solve = |gamma| required_sets(&m, gamma, None, 0.05, 0.80, Definition::Broad).unwrap();
        assert_eq!(solve(1.0), 18);
        assert_eq!(solve(3.0), 559);
        assert_eq!(solve(3.5), 3785);
    }

    #[test]
    fn required_sets_unattainable_beyond_design() {
        let m = model(0.1, 0.3, 0.15, 0.30);
        let r = required_sets(&m, 3.9, None, 0.05, 0.80, Definition::Broad);
        assert!(matches!(r, Err(Error::Unattainable { .. })));
    }

    #[test]
    fn favorable_condition() {
        let m = model(0.1, 0.3, 0.15, 0.30);
        assert!(favorable_condition_check(&m, 1.5));
        assert!(favorable_condition_check(&m, 2.0));
        let weak = model(0.1, 0.3, 0.80, 0.85);
        assert!(!favorable_condition_check(&weak, 2.0));
    }

    #[test]
    fn expected_narrow_set_counts() {
        let m = model(0.1, 0.3, 0.80, 0.85);
        let e = expected_narrow_sets(&m, 18);
        assert!((e - 14.94).abs() < 0.01);
        assert_eq!(e.round() as u64, 15);
        let m2 = model(0.1, 0.3, 0.15, 0.30);
        assert_eq!(expected_narrow_sets(&m2, 18).round() as u64, 4);
        let flat = model(0.1, 0.3, 0.4, 0.4);
        assert_abs_diff_eq!(flat.narrow_fraction(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn power_monotonicity() {
        // Parameter region chosen to keep every power strictly inside
        // (0, 1) so the comparisons are meaningful.
        let m = model(0.1, 0.3, 0.15, 0.30);
        let p = |gamma: f64, theta: f64, n: u32| {
            (
                power_broad(&PowerSpec::new(m, n, gamma, 1.0, 0.05).unwrap()),
                power_narrow(&PowerSpec::new(m, n, gamma, theta, 0.05).unwrap()),
            )
        };
        for n in [100u32, 400] {
            let (b1, n1) = p(3.0, 2.5, n);
            assert!(b1 > 0.01 && b1 < 0.99 && n1 > 0.01 && n1 < 0.99);
            let (b2, n2) = p(3.4, 2.5, n);
            assert!(b2 < b1 && n2 < n1, "power must fall in gamma");
            let (b3, n3) = p(3.0, 2.5, 4 * n);
            assert!(b3 > b1 && n3 > n1, "power must rise in the set count");
            let (_, nt) = p(3.0, 2.9, n);
            assert!(nt < n1, "narrow power must fall in theta");
        }
    }

    #[test]
    fn power_limits_straddle_design_sensitivity() {
        let m = model(0.1, 0.3, 0.15, 0.30);
        let design = design_sensitivity(&m, None, Definition::Broad).unwrap();
        let below = design * 0.9;
        let above = design * 1.1;
        let mut last_below = 0.0;
        let mut last_above = 1.0;
        for n in [100u32, 1_000, 10_000, 100_000] {
            let pb = power_broad(&PowerSpec::new(m, n, below, 1.0, 0.05).unwrap());
            let pa = power_broad(&PowerSpec::new(m, n, above, 1.0, 0.05).unwrap());
            assert!(pb >= last_below && pa <= last_above);
            last_below = pb;
            last_above = pa;
        }
        assert!(last_below > 0.999, "below design sensitivity power -> 1");
        assert!(last_above < 0.001, "above design sensitivity power -> 0");
    }

    #[test]
    fn narrow_power_reduces_to_broad_on_expected_sets() {
        let m = model(0.1, 0.3, 0.4, 0.4);
        let q = m.narrow_fraction();
        for (gamma, n) in [(1.0, 100u32), (2.0, 400), (3.0, 900)] {
            let narrow = power_narrow(&PowerSpec::new(m, n, gamma, 1.0, 0.05).unwrap());
            let broad_qi =
                power_at(&m, q * f64::from(n), gamma, 1.0, 0.05, Definition::Broad);
            assert_abs_diff_eq!(narrow, broad_qi, epsilon = 1e-9);
        }
    }

    #[test]
    fn combined_limit_tracks_larger_design_sensitivity() {
        // For gamma strictly between the two design sensitivities, the
        // better component's alpha/2 power must approach 1 with I.
        let m = model(0.1, 0.3, 0.15, 0.30);
        let d_broad = design_sensitivity(&m, None, Definition::Broad).unwrap();
        let d_narrow = design_sensitivity(&m, Some(1.0), Definition::Narrow).unwrap();
        assert!(d_narrow > d_broad);
        let gamma = 0.5 * (d_broad + d_narrow);
        let mut best = 0.0;
        for n in [1_000u32, 10_000, 100_000] {
            let pb = power_broad(&PowerSpec::new(m, n, gamma, 1.0, 0.025).unwrap());
            let pn = power_narrow(&PowerSpec::new(m, n, gamma, 1.0, 0.025).unwrap());
            let better = pb.max(pn);
            assert!(better >= best);
            best = better;
        }
        assert!(best > 0.999);
    }

    #[test]
    fn rejects_invalid_models() {
        assert!(FavorableModel::new(0.0, 0.3, 0.1, 0.3, 0.15, 6).is_err());
        assert!(FavorableModel::new(0.3, 1.0, 0.1, 0.3, 0.15, 6).is_err());
        assert!(FavorableModel::new(0.3, 0.3, 0.1, 0.3, 0.15, 1).is_err());
        assert!(FavorableModel::new(0.3, 0.3, 0.1, 0.3, 0.15, 31).is_err());
        let m = model(0.1, 0.3, 0.15, 0.30);
        assert!(!m.has_reversed_effect());
        assert!(model(0.3, 0.1, 0.15, 0.30).has_reversed_effect());
    }
}
