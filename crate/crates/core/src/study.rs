//! Matched case-referent study data: per-subject records, per-set
//! aggregates, and descriptive summaries.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One subject row, as read from CSV. `exposed`, `broad_case` and
/// `narrow_case` are 0/1 indicators; a narrow case must also be a broad
/// case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub set_id: u64,
    pub subject_id: String,
    pub exposed: u8,
    pub broad_case: u8,
    pub narrow_case: u8,
}

impl SubjectRecord {
    fn validate(&self) -> Result<()> {
        if self.set_id == 0 {
            return Err(Error::BadSetId { subject_id: self.subject_id.clone() });
        }
        for (field, value) in [
            ("exposed", self.exposed),
            ("broad_case", self.broad_case),
            ("narrow_case", self.narrow_case),
        ] {
            if value > 1 {
                return Err(Error::BadBinary {
                    set_id: self.set_id,
                    subject_id: self.subject_id.clone(),
                    field,
                    value: i64::from(value),
                });
            }
        }
        if self.narrow_case == 1 && self.broad_case == 0 {
            return Err(Error::NarrowReferent {
                set_id: self.set_id,
                subject_id: self.subject_id.clone(),
            });
        }
        Ok(())
    }
}

/// Aggregates for one matched set: one broad case plus `size - 1`
/// referents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedSet {
    pub set_id: u64,
    /// Total subjects `J` in the set, case included.
    pub size: u32,
    /// Number of exposed subjects `m`, case included.
    pub exposed_count: u32,
    /// Whether the case itself is exposed (`Y`).
    pub case_exposed: bool,
    /// Whether the case meets the narrow definition.
    pub is_narrow: bool,
}

impl MatchedSet {
    fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::SetTooSmall { set_id: self.set_id, size: self.size as usize });
        }
        let m = self.exposed_count;
        let j = self.size;
        if m > j || (self.case_exposed && m < 1) || (!self.case_exposed && m > j - 1) {
            return Err(Error::InvalidCount { m, j });
        }
        Ok(())
    }

    /// Exposed referents in this set.
    pub fn exposed_referents(&self) -> u32 {
        self.exposed_count - u32::from(self.case_exposed)
    }
}

/// A full study: the ordered collection of matched sets, sorted by set id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Study {
    sets: Vec<MatchedSet>,
}

impl Study {
    /// Builds a study from per-set aggregates, checking every set
    /// invariant and the uniqueness of set ids. Sets are stored sorted by
    /// set id.
    pub fn new(mut sets: Vec<MatchedSet>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::EmptyInput);
        }
        sets.sort_by_key(|s| s.set_id);
        for pair in sets.windows(2) {
            if pair[0].set_id == pair[1].set_id {
                return Err(Error::MultipleCases { set_id: pair[0].set_id, count: 2 });
            }
        }
        for s in &sets {
            s.validate()?;
        }
        Ok(Self { sets })
    }

    pub fn sets(&self) -> &[MatchedSet] {
        &self.sets
    }

    /// Number of matched sets `I`.
    pub fn n_sets(&self) -> usize {
        self.sets.len()
    }

    /// Number of narrow-case matched sets `|N|`.
    pub fn narrow_count(&self) -> usize {
        self.sets.iter().filter(|s| s.is_narrow).count()
    }

    /// The narrow-case matched sets, in set-id order.
    pub fn narrow_sets(&self) -> impl Iterator<Item = &MatchedSet> {
        self.sets.iter().filter(|s| s.is_narrow)
    }

    /// Count of sets whose case is exposed, over all sets (`Y_b`).
    pub fn statistic_broad(&self) -> u64 {
        self.sets.iter().filter(|s| s.case_exposed).count() as u64
    }

    /// Count of narrow sets whose case is exposed (`Y_n`).
    pub fn statistic_narrow(&self) -> u64 {
        self.sets.iter().filter(|s| s.is_narrow && s.case_exposed).count() as u64
    }

    /// Expands each set back into canonical subject rows: the case first,
    /// then exposed referents, then unexposed referents. Parsing these rows
    /// reproduces the study exactly.
    pub fn to_rows(&self) -> Vec<SubjectRecord> {
        let mut rows = Vec::new();
        for s in &self.sets {
            rows.push(SubjectRecord {
                set_id: s.set_id,
                subject_id: format!("{}-case", s.set_id),
                exposed: u8::from(s.case_exposed),
                broad_case: 1,
                narrow_case: u8::from(s.is_narrow),
            });
            let exposed_refs = s.exposed_referents();
            for r in 1..s.size {
                rows.push(SubjectRecord {
                    set_id: s.set_id,
                    subject_id: format!("{}-ref{}", s.set_id, r),
                    exposed: u8::from(r <= exposed_refs),
                    broad_case: 0,
                    narrow_case: 0,
                });
            }
        }
        rows
    }
}

/// Aggregates subject rows into a validated [`Study`].
///
/// Rows belonging to the same `set_id` may appear anywhere in the input.
/// Any set violating an invariant (no case, several cases, a narrow
/// referent, out-of-range indicator) rejects the whole input.
pub fn parse_study(rows: &[SubjectRecord]) -> Result<Study> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut by_set: BTreeMap<u64, Vec<&SubjectRecord>> = BTreeMap::new();
    for row in rows {
        row.validate()?;
        by_set.entry(row.set_id).or_default().push(row);
    }
    let mut sets = Vec::with_capacity(by_set.len());
    for (set_id, members) in by_set {
        if members.len() < 2 {
            return Err(Error::SetTooSmall { set_id, size: members.len() });
        }
        let cases: Vec<_> = members.iter().filter(|r| r.broad_case == 1).collect();
        let case = match cases.len() {
            0 => return Err(Error::MissingCase { set_id }),
            1 => cases[0],
            n => return Err(Error::MultipleCases { set_id, count: n }),
        };
        sets.push(MatchedSet {
            set_id,
            size: members.len() as u32,
            exposed_count: members.iter().map(|r| u32::from(r.exposed)).sum(),
            case_exposed: case.exposed == 1,
            is_narrow: case.narrow_case == 1,
        });
    }
    Study::new(sets)
}

/// Reads subject rows from CSV with a header; column order is free, names
/// are fixed.
pub fn read_study_csv<R: io::Read>(reader: R) -> Result<Study> {
    let mut rdr = csv::Reader::from_reader(reader);
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<SubjectRecord>, _>>()?;
    parse_study(&rows)
}

/// Reads a study from a CSV file path.
pub fn read_study_file<P: AsRef<Path>>(path: P) -> Result<Study> {
    read_study_csv(std::fs::File::open(path)?)
}

/// Writes a study back out as subject rows.
pub fn write_study_csv<W: io::Write>(study: &Study, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in study.to_rows() {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Descriptive summary of a study, including the marginal exposure odds
/// ratio for cases versus referents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    #[serde(rename = "I")]
    pub n_sets: usize,
    pub narrow_sets: usize,
    #[serde(rename = "Y_b")]
    pub y_broad: u64,
    #[serde(rename = "Y_n")]
    pub y_narrow: u64,
    /// Count of sets with each exposed-subject total `m = 0, 1, ...`.
    pub m_histogram: Vec<u64>,
    /// `(cases exposed / cases unexposed) / (referents exposed / referents
    /// unexposed)`; absent when a 2x2 cell is zero.
    pub odds_ratio: Option<f64>,
    pub odds_ratio_degenerate: bool,
}

/// Computes the [`StudySummary`] for a study.
pub fn summarize(study: &Study) -> StudySummary {
    let n_sets = study.n_sets();
    let y_broad = study.statistic_broad();
    let max_m = study.sets().iter().map(|s| s.exposed_count).max().unwrap_or(0);
    let mut m_histogram = vec![0u64; max_m as usize + 1];
    let mut referents_exposed = 0u64;
    let mut referents_unexposed = 0u64;
    for s in study.sets() {
        m_histogram[s.exposed_count as usize] += 1;
        let re = u64::from(s.exposed_referents());
        referents_exposed += re;
        referents_unexposed += u64::from(s.size - 1) - re;
    }
    let cases_unexposed = n_sets as u64 - y_broad;
    let degenerate =
        y_broad == 0 || cases_unexposed == 0 || referents_exposed == 0 || referents_unexposed == 0;
    let odds_ratio = (!degenerate).then(|| {
        (y_broad as f64 * referents_unexposed as f64)
            / (cases_unexposed as f64 * referents_exposed as f64)
    });
    StudySummary {
        n_sets,
        narrow_sets: study.narrow_count(),
        y_broad,
        y_narrow: study.statistic_narrow(),
        m_histogram,
        odds_ratio,
        odds_ratio_degenerate: degenerate,
    }
}
