//! Stable machine-readable output records: the JSON analysis record and
//! the CSV layouts for frontier curves, simulated power tables, matched
//! sets, and balance tables.

use std::io;

use serde::{Deserialize, Serialize};

use crate::bounds::ThetaSense;
use crate::error::Result;
use crate::frontier::{FrontierPoint, GammaStar};
use crate::inference::{Alternative, CombinedResult, Method, PValueBounds, TestKind};
use crate::matching::{BalanceRow, MatchResult};
use crate::power::FavorableModel;
use crate::sim::{SimConfig, SimResult};

/// The JSON record emitted for one test run. For the combined test the
/// single-statistic fields are null and the Bonferroni fields are present
/// instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub test: TestKind,
    pub gamma: f64,
    pub theta: f64,
    pub theta_sense: ThetaSense,
    pub alternative: Alternative,
    pub method: Method,
    pub statistic: Option<u64>,
    pub n_sets: usize,
    pub p_lower: Option<f64>,
    pub p_upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bonferroni_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_broad_upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_narrow_upper: Option<f64>,
}

impl AnalysisRecord {
    pub fn single(
        test: TestKind,
        gamma: f64,
        theta: f64,
        theta_sense: ThetaSense,
        alternative: Alternative,
        bounds: &PValueBounds,
    ) -> Self {
        Self {
            test,
            gamma,
            theta,
            theta_sense,
            alternative,
            method: bounds.method,
            statistic: Some(bounds.statistic),
            n_sets: bounds.n_sets_used,
            p_lower: Some(bounds.lower),
            p_upper: Some(bounds.upper),
            bonferroni_p: None,
            p_broad_upper: None,
            p_narrow_upper: None,
        }
    }

    pub fn combined(
        gamma: f64,
        theta: f64,
        theta_sense: ThetaSense,
        alternative: Alternative,
        result: &CombinedResult,
        n_sets: usize,
    ) -> Self {
        Self {
            test: TestKind::Combined,
            gamma,
            theta,
            theta_sense,
            alternative,
            method: result.broad.method,
            statistic: None,
            n_sets,
            p_lower: None,
            p_upper: None,
            bonferroni_p: Some(result.bonferroni_p),
            p_broad_upper: Some(result.broad.upper),
            p_narrow_upper: Some(result.narrow.upper),
        }
    }
}

/// The JSON record emitted for a power/design query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRecord {
    pub model: FavorableModel,
    pub gamma: f64,
    pub theta: f64,
    pub alpha: f64,
    #[serde(rename = "I")]
    pub n_sets: u32,
    pub power_broad: f64,
    pub power_narrow: f64,
    pub design_gamma_broad: f64,
    pub design_gamma_narrow: f64,
    pub expected_narrow_sets: f64,
    /// Whether `η_T/η_C >= Θ`, the condition for the narrow test to raise
    /// the design sensitivity.
    pub favorable_condition: bool,
}

fn gamma_star_cell(g: &GammaStar) -> String {
    match g.plot_value() {
        Some(v) => format!("{v:.4}"),
        None => "NA".to_string(),
    }
}

/// Writes the frontier as plot-ready CSV:
/// `theta,gamma_star_broad,gamma_star_narrow,gamma_star_combined`.
/// `NA` marks a test that rejects nowhere; a value at the search ceiling
/// means "at least this".
pub fn write_frontier_csv<W: io::Write>(points: &[FrontierPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["theta", "gamma_star_broad", "gamma_star_narrow", "gamma_star_combined"])?;
    for p in points {
        w.write_record([
            format!("{:.6}", p.theta),
            gamma_star_cell(&p.gamma_star_broad),
            gamma_star_cell(&p.gamma_star_narrow),
            gamma_star_cell(&p.gamma_star_combined),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes simulated-power rows with the same columns as the power tables:
/// `gamma,theta,I,b_C,b_T,eta_C,eta_T,E_narrow,ds_broad,ds_narrow,`
/// `power_broad,power_narrow,power_combined` (powers in percent, one
/// decimal).
pub fn write_simulation_csv<W: io::Write>(
    rows: &[(SimConfig, SimResult)],
    writer: W,
) -> Result<()> {
    use crate::power::{design_sensitivity, expected_narrow_sets, Definition};

    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "gamma",
        "theta",
        "I",
        "b_C",
        "b_T",
        "eta_C",
        "eta_T",
        "E_narrow",
        "ds_broad",
        "ds_narrow",
        "power_broad",
        "power_narrow",
        "power_combined",
    ])?;
    for (cfg, res) in rows {
        let ds_b = design_sensitivity(&cfg.model, None, Definition::Broad)?;
        let ds_n = design_sensitivity(&cfg.model, Some(cfg.theta), Definition::Narrow)?;
        w.write_record([
            format!("{}", cfg.gamma),
            format!("{}", cfg.theta),
            format!("{}", cfg.n_sets),
            format!("{}", cfg.model.b_c),
            format!("{}", cfg.model.b_t),
            format!("{}", cfg.model.eta_c),
            format!("{}", cfg.model.eta_t),
            format!("{}", expected_narrow_sets(&cfg.model, cfg.n_sets).round() as u64),
            format!("{ds_b:.1}"),
            format!("{ds_n:.1}"),
            format!("{:.1}", 100.0 * res.power_broad),
            format!("{:.1}", 100.0 * res.power_narrow),
            format!("{:.1}", 100.0 * res.power_combined),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes matched sets as `set_id,subject_id,role` rows, one set per
/// case in case-id order. Joining exposure and case flags onto these rows
/// yields study-data subject records.
pub fn write_matched_csv<W: io::Write>(result: &MatchResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["set_id", "subject_id", "role"])?;
    for (set_idx, (case_id, ref_ids)) in result.sets.iter().enumerate() {
        let set_id = (set_idx + 1).to_string();
        w.write_record([set_id.as_str(), case_id.as_str(), "case"])?;
        for rid in ref_ids {
            w.write_record([set_id.as_str(), rid.as_str(), "referent"])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads matched sets back from [`write_matched_csv`] output.
pub fn read_matched_csv<R: io::Read>(reader: R) -> Result<MatchResult> {
    use std::collections::BTreeMap;
    let mut rdr = csv::Reader::from_reader(reader);
    let mut sets: BTreeMap<u64, (Option<String>, Vec<String>)> = BTreeMap::new();
    for record in rdr.deserialize() {
        let (set_id, subject_id, role): (u64, String, String) = record?;
        let entry = sets.entry(set_id).or_default();
        if role == "case" {
            entry.0 = Some(subject_id);
        } else {
            entry.1.push(subject_id);
        }
    }
    let mut out = Vec::new();
    for (set_id, (case, refs)) in sets {
        let case = case.ok_or(crate::error::Error::MissingCase { set_id })?;
        out.push((case, refs));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(MatchResult::from_sets(out))
}

/// Writes a balance table as
/// `covariate,case_mean,referent_mean,smd,zero_pooled_sd`; an
/// unstandardizable row (zero pooled SD, unequal means) leaves `smd`
/// empty.
pub fn write_balance_csv<W: io::Write>(rows: &[BalanceRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["covariate", "case_mean", "referent_mean", "smd", "zero_pooled_sd"])?;
    for r in rows {
        let smd = if r.smd.is_nan() { String::new() } else { format!("{:.6}", r.smd) };
        w.write_record([
            r.covariate.clone(),
            format!("{:.6}", r.case_mean),
            format!("{:.6}", r.referent_mean),
            smd,
            r.zero_pooled_sd.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
