//! Seeded Monte Carlo power estimation for the broad, narrow, and
//! Bonferroni-combined sensitivity analyses.
//!
//! Each replication draws a study from the favorable model in three steps:
//! fix one case and `J - 1` referents per set, draw exposures from the
//! case- and referent-conditional probabilities, then draw the case's
//! narrow flag (`η_T` if exposed, `η_C` if not; referents are never
//! narrow). The broad test rejects when its worst-case p-value upper bound
//! at `Γ` is at most `α`; the narrow test likewise at `(Γ, Θ)`; the
//! combined rule rejects when either component rejects at `α/2`.
//!
//! Replications are independent: each uses its own counter-indexed ChaCha
//! stream derived from the seed, so results are bit-identical for a given
//! `SimConfig` no matter how many worker threads run (reps are aggregated
//! in index order).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{SensitivityParams, ThetaSense};
use crate::error::{Error, Result};
use crate::inference::{broad_test, narrow_test, Alternative, Method};
use crate::power::{case_exposure_prob, Definition, FavorableModel};
use crate::study::{MatchedSet, Study};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// One Monte Carlo power query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: FavorableModel,
    /// Number of broad-case matched sets per replication.
    pub n_sets: u32,
    pub reps: u32,
    pub seed: u64,
    pub alpha: f64,
    pub gamma: f64,
    pub theta: f64,
    pub method: Method,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidModel("reps must be >= 1".into()));
        }
        if self.n_sets == 0 {
            return Err(Error::InvalidModel("number of sets must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidProbability {
                name: "alpha",
                range: "(0, 1)",
                value: self.alpha,
            });
        }
        if !(self.gamma >= 1.0) {
            return Err(Error::InvalidGamma(self.gamma));
        }
        if !(self.theta >= 1.0) {
            return Err(Error::InvalidTheta(self.theta));
        }
        Ok(())
    }
}

/// Estimated rejection rates with their Monte Carlo standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub power_broad: f64,
    pub power_narrow: f64,
    pub power_combined: f64,
    /// Average number of narrow-case matched sets per replication.
    pub mean_narrow_sets: f64,
    pub reps: u32,
    pub stderr_broad: f64,
    pub stderr_narrow: f64,
    pub stderr_combined: f64,
}

/// Draws one study of `n_sets` matched sets from the favorable model.
///
/// Within each set the draw order is fixed: case exposure, then the
/// `J - 1` referent exposures, then the case's narrow flag.
pub fn generate_study<R: Rng>(model: &FavorableModel, n_sets: u32, rng: &mut R) -> Study {
    let p_case = case_exposure_prob(model, Definition::Broad);
    let p_ref = model.referent_exposure_prob();
    let sets = (1..=n_sets)
        .map(|set_id| {
            let case_exposed = rng.random_bool(p_case);
            let mut exposed_count = u32::from(case_exposed);
            for _ in 1..model.j {
                exposed_count += u32::from(rng.random_bool(p_ref));
            }
            let eta = if case_exposed { model.eta_t } else { model.eta_c };
            MatchedSet {
                set_id: u64::from(set_id),
                size: model.j,
                exposed_count,
                case_exposed,
                is_narrow: rng.random_bool(eta),
            }
        })
        .collect();
    Study::new(sets).expect("generated sets satisfy the study invariants")
}

#[derive(Clone, Copy, Default)]
struct RepOutcome {
    broad: bool,
    narrow: bool,
    combined: bool,
    narrow_sets: u32,
}

fn run_rep(config: &SimConfig, rep: u32) -> RepOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(u64::from(rep));
    let study = generate_study(&config.model, config.n_sets, &mut rng);

    let p_broad = broad_test(&study, config.gamma, Alternative::Greater, config.method)
        .expect("broad test is defined on every generated study")
        .upper;
    let params = SensitivityParams {
        gamma: config.gamma,
        theta: config.theta,
        theta_sense: ThetaSense::UpperOnly,
    };
    // A replication without narrow sets cannot reject through the narrow
    // component; it still counts in the denominator.
    let p_narrow = match narrow_test(&study, &params, Alternative::Greater, config.method) {
        Ok(b) => Some(b.upper),
        Err(Error::NoNarrowSets) => None,
        Err(e) => panic!("narrow test failed on a generated study: {e}"),
    };

    let half = config.alpha / 2.0;
    RepOutcome {
        broad: p_broad <= config.alpha,
        narrow: p_narrow.is_some_and(|p| p <= config.alpha),
        combined: p_broad <= half || p_narrow.is_some_and(|p| p <= half),
        narrow_sets: study.narrow_count() as u32,
    }
}

fn mc_stderr(p: f64, reps: u32) -> f64 {
    (p * (1.0 - p) / f64::from(reps)).sqrt()
}

/// Runs the Monte Carlo power study described by `config`.
pub fn simulate_power(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let reps = config.reps;

    #[cfg(feature = "parallel")]
    let outcomes: Vec<RepOutcome> = (0..reps).into_par_iter().map(|r| run_rep(config, r)).collect();
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<RepOutcome> = (0..reps).map(|r| run_rep(config, r)).collect();

    let mut broad = 0u32;
    let mut narrow = 0u32;
    let mut combined = 0u32;
    let mut narrow_sets = 0u64;
    for o in &outcomes {
        broad += u32::from(o.broad);
        narrow += u32::from(o.narrow);
        combined += u32::from(o.combined);
        narrow_sets += u64::from(o.narrow_sets);
    }
    let rate = |count: u32| f64::from(count) / f64::from(reps);
    let (pb, pn, pc) = (rate(broad), rate(narrow), rate(combined));
    Ok(SimResult {
        power_broad: pb,
        power_narrow: pn,
        power_combined: pc,
        mean_narrow_sets: narrow_sets as f64 / f64::from(reps),
        reps,
        stderr_broad: mc_stderr(pb, reps),
        stderr_narrow: mc_stderr(pn, reps),
        stderr_combined: mc_stderr(pc, reps),
    })
}

/// Runs one [`simulate_power`] per config, in order.
pub fn power_sweep(configs: &[SimConfig]) -> Result<Vec<SimResult>> {
    if configs.is_empty() {
        return Err(Error::EmptyInput);
    }
    configs.iter().map(simulate_power).collect()
}
