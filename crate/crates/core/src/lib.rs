//! Randomization inference and sensitivity analysis for matched
//! case-referent studies that use both a broad and a narrow case
//! definition.
//!
//! A matched case-referent study compares one case per matched set against
//! `J - 1` referents who share observed covariates, recording retrospective
//! exposure. This crate tests Fisher's sharp null of no treatment effect on
//! the broad case definition, allowing for two biases at once:
//!
//! * unmeasured confounding, bounded by `Γ ≥ 1` (two matched subjects may
//!   differ in their odds of exposure by at most `Γ`), and
//! * selection bias from restricting to narrow-case matched sets, bounded by
//!   `Θ ≥ 1` (the treatment may make an always-case at most `Θ` times more
//!   likely to be a narrow case).
//!
//! The main entry points:
//!
//! * [`study`] — parse and summarize matched-set data.
//! * [`bounds`] — sharp per-set bounds on the case-exposure probability
//!   under `(Γ, Θ)`.
//! * [`inference`] — exact and normal-approximation p-value bounds for the
//!   broad, narrow, and Bonferroni-combined tests.
//! * [`frontier`] — the largest `Γ` at which each test still rejects, as a
//!   function of `Θ`.
//! * [`power`] — closed-form power of sensitivity analysis, design
//!   sensitivities, and sample-size solving under an iid favorable model.
//! * [`sim`] — seeded Monte Carlo power estimation, including the combined
//!   test.
//! * [`matching`] — optimal 1-to-k matched-set construction with exact
//!   strata and a rank-based robust Mahalanobis distance, plus covariate
//!   balance tables.
//!
//! Monte Carlo loops and frontier grids run on rayon when the `parallel`
//! feature (default) is enabled, falling back to sequential iteration
//! without it; results are bit-identical either way.
//!
//! ```no_run
//! use casesens::bounds::SensitivityParams;
//! use casesens::inference::{combined_test, Alternative, Method};
//! use casesens::study::read_study_file;
//!
//! fn main() -> casesens::Result<()> {
//!     let study = read_study_file("study.csv")?;
//!     let params = SensitivityParams::new(3.5, 1.12, Default::default())?;
//!     let result = combined_test(&study, &params, Alternative::Greater, Method::Exact)?;
//!     println!("worst-case Bonferroni p = {}", result.bonferroni_p);
//!     Ok(())
//! }
//! ```

// Parameter guards are written `!(x >= 1.0)` so NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dist;
pub mod error;
pub mod frontier;
pub mod inference;
pub mod matching;
mod normal;
pub mod power;
pub mod report;
pub mod sim;
pub mod study;

pub use bounds::{ProbBounds, SensitivityParams, ThetaSense};
pub use dist::BernoulliSum;
pub use error::{Error, Result};
pub use frontier::{FrontierPoint, GammaStar};
pub use inference::{Alternative, CombinedResult, Method, PValueBounds};
pub use power::{Definition, FavorableModel, PowerSpec};
pub use sim::{SimConfig, SimResult};
pub use study::{MatchedSet, Study, StudySummary, SubjectRecord};
