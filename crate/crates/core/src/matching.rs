//! Construction of 1-to-k matched sets from a case file and a referent
//! pool, and covariate balance reporting.
//!
//! Matching stratifies exactly on the requested categorical keys, then
//! assigns referents to cases within each stratum by minimum-cost
//! assignment under a rank-based robust Mahalanobis distance: covariates
//! are replaced by average ranks, the rank covariance matrix has its
//! diagonal rescaled to the variance of untied ranks, and distances are
//! quadratic forms in the inverse of the adjusted matrix. Each stratum's
//! assignment is globally optimal (min-cost flow), with every case taking
//! exactly `k` distinct referents.

use std::collections::BTreeMap;
use std::io;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Subjects with ids, case/referent group, exact-match keys, and numeric
/// covariates. Rows keep their input order; cases and referents may be
/// interleaved.
#[derive(Debug, Clone)]
pub struct CovariateTable {
    ids: Vec<String>,
    is_case: Vec<bool>,
    exact_names: Vec<String>,
    exact_keys: Vec<Vec<String>>,
    covariate_names: Vec<String>,
    covariates: Vec<Vec<f64>>,
}

impl CovariateTable {
    pub fn new(
        ids: Vec<String>,
        is_case: Vec<bool>,
        exact_names: Vec<String>,
        exact_keys: Vec<Vec<String>>,
        covariate_names: Vec<String>,
        covariates: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = ids.len();
        if n < 2 {
            return Err(Error::InvalidMatchInput("need at least two subjects".into()));
        }
        if covariate_names.is_empty() {
            return Err(Error::InvalidMatchInput("need at least one numeric covariate".into()));
        }
        if is_case.len() != n || exact_keys.len() != n || covariates.len() != n {
            return Err(Error::InvalidMatchInput("column lengths disagree".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidMatchInput(format!("duplicate subject id {id}")));
            }
        }
        for (i, row) in exact_keys.iter().enumerate() {
            if row.len() != exact_names.len() {
                return Err(Error::InvalidMatchInput(format!(
                    "subject {} has {} exact keys, expected {}",
                    ids[i],
                    row.len(),
                    exact_names.len()
                )));
            }
        }
        for (i, row) in covariates.iter().enumerate() {
            if row.len() != covariate_names.len() {
                return Err(Error::InvalidMatchInput(format!(
                    "subject {} has {} covariates, expected {}",
                    ids[i],
                    row.len(),
                    covariate_names.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidMatchInput(format!(
                    "subject {} has a non-finite covariate",
                    ids[i]
                )));
            }
        }
        Ok(Self { ids, is_case, exact_names, exact_keys, covariate_names, covariates })
    }

    pub fn n_subjects(&self) -> usize {
        self.ids.len()
    }

    pub fn case_indices(&self) -> Vec<usize> {
        (0..self.ids.len()).filter(|&i| self.is_case[i]).collect()
    }

    pub fn referent_indices(&self) -> Vec<usize> {
        (0..self.ids.len()).filter(|&i| !self.is_case[i]).collect()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn exact_names(&self) -> &[String] {
        &self.exact_names
    }

    fn index_of_id(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Reads one CSV of cases and one of referents sharing the same
    /// columns.
    pub fn from_csv_pair<R1: io::Read, R2: io::Read>(
        cases: R1,
        referents: R2,
        id_col: &str,
        exact_cols: &[String],
        covariate_cols: &[String],
    ) -> Result<Self> {
        let mut b = TableBuilder::new(exact_cols, covariate_cols);
        b.read(cases, id_col, |_| true)?;
        let n_cases = b.ids.len();
        b.read(referents, id_col, |_| false)?;
        if n_cases == 0 || b.ids.len() == n_cases {
            return Err(Error::InvalidMatchInput("need at least one case and one referent".into()));
        }
        b.finish()
    }

    /// Reads a single CSV distinguishing cases by `group_col == case_value`.
    pub fn from_grouped_csv<R: io::Read>(
        data: R,
        id_col: &str,
        group_col: &str,
        case_value: &str,
        exact_cols: &[String],
        covariate_cols: &[String],
    ) -> Result<Self> {
        let mut b = TableBuilder::new(exact_cols, covariate_cols);
        b.read_grouped(data, id_col, group_col, case_value)?;
        b.finish()
    }
}

struct TableBuilder {
    ids: Vec<String>,
    is_case: Vec<bool>,
    exact_names: Vec<String>,
    exact_keys: Vec<Vec<String>>,
    covariate_names: Vec<String>,
    covariates: Vec<Vec<f64>>,
}

impl TableBuilder {
    fn new(exact_cols: &[String], covariate_cols: &[String]) -> Self {
        Self {
            ids: Vec::new(),
            is_case: Vec::new(),
            exact_names: exact_cols.to_vec(),
            exact_keys: Vec::new(),
            covariate_names: covariate_cols.to_vec(),
            covariates: Vec::new(),
        }
    }

    fn header_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidMatchInput(format!("missing column {name}")))
    }

    fn push_row(
        &mut self,
        record: &csv::StringRecord,
        id_idx: usize,
        exact_idx: &[usize],
        cov_idx: &[usize],
        is_case: bool,
    ) -> Result<()> {
        let id = record.get(id_idx).unwrap_or("").to_string();
        let mut covs = Vec::with_capacity(cov_idx.len());
        for (&c, name) in cov_idx.iter().zip(&self.covariate_names) {
            let raw = record.get(c).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| {
                Error::InvalidMatchInput(format!("subject {id}: covariate {name} is not numeric: {raw:?}"))
            })?;
            covs.push(v);
        }
        self.exact_keys
            .push(exact_idx.iter().map(|&e| record.get(e).unwrap_or("").to_string()).collect());
        self.covariates.push(covs);
        self.ids.push(id);
        self.is_case.push(is_case);
        Ok(())
    }

    fn read<R: io::Read>(
        &mut self,
        reader: R,
        id_col: &str,
        is_case: impl Fn(&csv::StringRecord) -> bool,
    ) -> Result<()> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let id_idx = Self::header_index(&headers, id_col)?;
        let exact_idx: Vec<usize> = self
            .exact_names
            .iter()
            .map(|c| Self::header_index(&headers, c))
            .collect::<Result<_>>()?;
        let cov_idx: Vec<usize> = self
            .covariate_names
            .iter()
            .map(|c| Self::header_index(&headers, c))
            .collect::<Result<_>>()?;
        for record in rdr.records() {
            let record = record?;
            let case = is_case(&record);
            self.push_row(&record, id_idx, &exact_idx, &cov_idx, case)?;
        }
        Ok(())
    }

    fn read_grouped<R: io::Read>(
        &mut self,
        reader: R,
        id_col: &str,
        group_col: &str,
        case_value: &str,
    ) -> Result<()> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let id_idx = Self::header_index(&headers, id_col)?;
        let group_idx = Self::header_index(&headers, group_col)?;
        let exact_idx: Vec<usize> = self
            .exact_names
            .iter()
            .map(|c| Self::header_index(&headers, c))
            .collect::<Result<_>>()?;
        let cov_idx: Vec<usize> = self
            .covariate_names
            .iter()
            .map(|c| Self::header_index(&headers, c))
            .collect::<Result<_>>()?;
        for record in rdr.records() {
            let record = record?;
            let case = record.get(group_idx).unwrap_or("") == case_value;
            self.push_row(&record, id_idx, &exact_idx, &cov_idx, case)?;
        }
        Ok(())
    }

    fn finish(self) -> Result<CovariateTable> {
        CovariateTable::new(
            self.ids,
            self.is_case,
            self.exact_names,
            self.exact_keys,
            self.covariate_names,
            self.covariates,
        )
    }
}

/// Case-by-referent distances plus diagnostics from the distance build.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    /// Row indices into the table (cases, input order).
    pub case_indices: Vec<usize>,
    /// Column indices into the table (referents, input order).
    pub referent_indices: Vec<usize>,
    /// `dist[c][r]` between `case_indices[c]` and `referent_indices[r]`.
    pub dist: Vec<Vec<f64>>,
    /// Constant covariate columns dropped before inverting.
    pub dropped_columns: Vec<String>,
    /// Whether a singular covariance forced the pseudo-inverse.
    pub used_pseudo_inverse: bool,
}

/// Average ranks (1-based) with ties sharing the mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

const SINGULAR_RTOL: f64 = 1e-10;

/// Inverse of a symmetric positive semidefinite matrix through its
/// eigendecomposition; near-null directions are zeroed (pseudo-inverse)
/// and reported.
fn symmetric_inverse(m: DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let eigen = m.symmetric_eigen();
    let max_ev = eigen.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let cutoff = max_ev * SINGULAR_RTOL;
    let mut pseudo = false;
    let inv_ev: DVector<f64> = eigen.eigenvalues.map(|ev| {
        if ev.abs() <= cutoff {
            pseudo = true;
            0.0
        } else {
            1.0 / ev
        }
    });
    let v = eigen.eigenvectors;
    let inv = &v * DMatrix::from_diagonal(&inv_ev) * v.transpose();
    (inv, pseudo)
}

/// Rank-based robust Mahalanobis distances between every case and every
/// referent.
///
/// Constant covariate columns are dropped (and reported); a singular rank
/// covariance falls back to the pseudo-inverse with the flag set.
pub fn robust_mahalanobis(table: &CovariateTable) -> Result<DistanceMatrix> {
    let n = table.n_subjects();
    let p_all = table.covariate_names.len();

    let mut rank_cols: Vec<Vec<f64>> = Vec::new();
    let mut kept_names: Vec<String> = Vec::new();
    let mut dropped_columns: Vec<String> = Vec::new();
    for j in 0..p_all {
        let col: Vec<f64> = (0..n).map(|i| table.covariates[i][j]).collect();
        if col.iter().all(|&v| v == col[0]) {
            dropped_columns.push(table.covariate_names[j].clone());
            continue;
        }
        rank_cols.push(average_ranks(&col));
        kept_names.push(table.covariate_names[j].clone());
    }
    if rank_cols.is_empty() {
        return Err(Error::InvalidMatchInput("all numeric covariates are constant".into()));
    }
    let p = rank_cols.len();

    // Sample covariance of the rank columns.
    let means: Vec<f64> = rank_cols.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let mut cov = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let s: f64 = rank_cols[a]
                .iter()
                .zip(&rank_cols[b])
                .map(|(x, y)| (x - means[a]) * (y - means[b]))
                .sum();
            let c = s / (n as f64 - 1.0);
            cov[(a, b)] = c;
            cov[(b, a)] = c;
        }
    }

    // Rescale the diagonal to the variance of untied ranks 1..n; the
    // off-diagonals pick up the square-root ratio on each side.
    let untied_var = n as f64 * (n as f64 + 1.0) / 12.0;
    let ratios: Vec<f64> = (0..p).map(|j| (untied_var / cov[(j, j)]).sqrt()).collect();
    for a in 0..p {
        for b in 0..p {
            cov[(a, b)] *= ratios[a] * ratios[b];
        }
    }

    let (inv, used_pseudo_inverse) = symmetric_inverse(cov);

    let case_indices = table.case_indices();
    let referent_indices = table.referent_indices();
    let mut dist = vec![vec![0.0; referent_indices.len()]; case_indices.len()];
    let mut diff = DVector::zeros(p);
    for (ci, &c) in case_indices.iter().enumerate() {
        for (ri, &r) in referent_indices.iter().enumerate() {
            for j in 0..p {
                diff[j] = rank_cols[j][c] - rank_cols[j][r];
            }
            dist[ci][ri] = (inv.clone() * &diff).dot(&diff);
        }
    }
    Ok(DistanceMatrix { case_indices, referent_indices, dist, dropped_columns, used_pseudo_inverse })
}

/// Matched sets keyed by case id, with the achieved total distance and any
/// cases whose stratum could not supply `k` referents each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// `(case id, referent ids)` sorted by case id; every matched case has
    /// exactly `k` referents from its own exact stratum.
    pub sets: Vec<(String, Vec<String>)>,
    pub total_distance: f64,
    pub unmatched_cases: Vec<String>,
}

impl MatchResult {
    /// Rebuilds a result from bare sets (as read back from a matched-sets
    /// file); the total distance is unknown there.
    pub fn from_sets(sets: Vec<(String, Vec<String>)>) -> Self {
        Self { sets, total_distance: f64::NAN, unmatched_cases: Vec::new() }
    }
}

/// Minimum-cost flow on a bipartite case/referent graph: each case wants
/// `k` referents, each referent serves at most one case. Successive
/// shortest augmenting paths with Johnson potentials; costs are
/// nonnegative distances.
mod flow {
    #[derive(Clone)]
    struct Edge {
        to: usize,
        rev: usize,
        cap: u32,
        cost: f64,
    }

    pub struct MinCostFlow {
        graph: Vec<Vec<Edge>>,
    }

    impl MinCostFlow {
        pub fn new(nodes: usize) -> Self {
            Self { graph: vec![Vec::new(); nodes] }
        }

        pub fn add_edge(&mut self, from: usize, to: usize, cap: u32, cost: f64) {
            let rev_from = self.graph[to].len();
            let rev_to = self.graph[from].len();
            self.graph[from].push(Edge { to, rev: rev_from, cap, cost });
            self.graph[to].push(Edge { to: from, rev: rev_to, cap: 0, cost: -cost });
        }

        /// Sends `target` units from `source` to `sink`; returns the total
        /// cost, or None if the flow is infeasible.
        pub fn run(&mut self, source: usize, sink: usize, target: u32) -> Option<f64> {
            let n = self.graph.len();
            let mut potential = vec![0.0f64; n];
            let mut flow = 0u32;
            let mut total_cost = 0.0f64;
            while flow < target {
                // Dijkstra over reduced costs.
                let mut dist = vec![f64::INFINITY; n];
                let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
                let mut heap = std::collections::BinaryHeap::new();
                dist[source] = 0.0;
                heap.push(HeapItem { dist: 0.0, node: source });
                while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
                    if d > dist[u] {
                        continue;
                    }
                    for (ei, e) in self.graph[u].iter().enumerate() {
                        if e.cap == 0 {
                            continue;
                        }
                        let nd = d + e.cost + potential[u] - potential[e.to];
                        if nd < dist[e.to] - 1e-12 {
                            dist[e.to] = nd;
                            prev[e.to] = Some((u, ei));
                            heap.push(HeapItem { dist: nd, node: e.to });
                        }
                    }
                }
                if !dist[sink].is_finite() {
                    return None;
                }
                for v in 0..n {
                    if dist[v].is_finite() {
                        potential[v] += dist[v];
                    }
                }
                // Bottleneck along the augmenting path.
                let mut bottleneck = target - flow;
                let mut v = sink;
                while let Some((u, ei)) = prev[v] {
                    bottleneck = bottleneck.min(self.graph[u][ei].cap);
                    v = u;
                }
                let mut v = sink;
                while let Some((u, ei)) = prev[v] {
                    let rev = self.graph[u][ei].rev;
                    self.graph[u][ei].cap -= bottleneck;
                    self.graph[v][rev].cap += bottleneck;
                    total_cost += f64::from(bottleneck) * self.graph[u][ei].cost;
                    v = u;
                }
                flow += bottleneck;
            }
            Some(total_cost)
        }

        /// Unit-flow case-to-referent pairs after `run`, read off the
        /// residual graph. Only forward case-to-referent edges live in a
        /// case node's adjacency toward referent nodes, so a spent
        /// capacity identifies a used pair.
        pub fn assignments(&self, cases: std::ops::Range<usize>, refs: std::ops::Range<usize>) -> Vec<(usize, usize)> {
            let mut pairs = Vec::new();
            for u in cases {
                for e in &self.graph[u] {
                    if refs.contains(&e.to) && e.cap == 0 {
                        pairs.push((u, e.to));
                    }
                }
            }
            pairs
        }
    }

    struct HeapItem {
        dist: f64,
        node: usize,
    }

    impl PartialEq for HeapItem {
        fn eq(&self, other: &Self) -> bool {
            self.dist == other.dist && self.node == other.node
        }
    }
    impl Eq for HeapItem {}
    impl PartialOrd for HeapItem {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for HeapItem {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            // Min-heap by distance, ties on node index for determinism.
            other
                .dist
                .total_cmp(&self.dist)
                .then_with(|| other.node.cmp(&self.node))
        }
    }
}

/// Solves one stratum: rows of `cost` are cases, columns referents.
/// Returns per-case referent columns and the total cost.
fn solve_stratum(cost: &[Vec<f64>], k: u32) -> (Vec<Vec<usize>>, f64) {
    let n_cases = cost.len();
    let n_refs = cost[0].len();
    let source = 0;
    let case0 = 1;
    let ref0 = case0 + n_cases;
    let sink = ref0 + n_refs;
    let mut net = flow::MinCostFlow::new(sink + 1);
    for (c, row) in cost.iter().enumerate() {
        net.add_edge(source, case0 + c, k, 0.0);
        for (r, &d) in row.iter().enumerate() {
            net.add_edge(case0 + c, ref0 + r, 1, d);
        }
    }
    for r in 0..n_refs {
        net.add_edge(ref0 + r, sink, 1, 0.0);
    }
    let total = net
        .run(source, sink, k * n_cases as u32)
        .expect("stratum checked feasible before solving");
    let mut picked = vec![Vec::new(); n_cases];
    for (u, v) in net.assignments(case0..ref0, ref0..sink) {
        picked[u - case0].push(v - ref0);
    }
    (picked, total)
}

/// Optimal 1-to-k matching within exact strata.
///
/// A stratum whose referent pool cannot give every one of its cases `k`
/// referents is infeasible; all of its cases land in `unmatched_cases`
/// and the remaining strata are still solved.
pub fn optimal_match(table: &CovariateTable, k: u32) -> Result<MatchResult> {
    if k == 0 {
        return Err(Error::InvalidMatchInput("k must be >= 1".into()));
    }
    let distances = robust_mahalanobis(table)?;
    let case_col: BTreeMap<usize, usize> =
        distances.case_indices.iter().enumerate().map(|(ci, &i)| (i, ci)).collect();
    let ref_col: BTreeMap<usize, usize> =
        distances.referent_indices.iter().enumerate().map(|(ri, &i)| (i, ri)).collect();

    // Group subject indices by their exact key tuple.
    let mut strata: BTreeMap<&[String], (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for i in 0..table.n_subjects() {
        let entry = strata.entry(&table.exact_keys[i]).or_default();
        if table.is_case[i] {
            entry.0.push(i);
        } else {
            entry.1.push(i);
        }
    }

    let mut sets: Vec<(String, Vec<String>)> = Vec::new();
    let mut unmatched_cases: Vec<String> = Vec::new();
    let mut total_distance = 0.0;
    for (cases, refs) in strata.values() {
        if cases.is_empty() {
            continue;
        }
        if refs.len() < cases.len() * k as usize {
            unmatched_cases.extend(cases.iter().map(|&i| table.id(i).to_string()));
            continue;
        }
        let cost: Vec<Vec<f64>> = cases
            .iter()
            .map(|&c| refs.iter().map(|&r| distances.dist[case_col[&c]][ref_col[&r]]).collect())
            .collect();
        let (picked, cost_total) = solve_stratum(&cost, k);
        total_distance += cost_total;
        for (ci, cols) in picked.iter().enumerate() {
            let mut ids: Vec<String> =
                cols.iter().map(|&r| table.id(refs[r]).to_string()).collect();
            ids.sort();
            sets.push((table.id(cases[ci]).to_string(), ids));
        }
    }
    sets.sort_by(|a, b| a.0.cmp(&b.0));
    unmatched_cases.sort();
    Ok(MatchResult { sets, total_distance, unmatched_cases })
}

/// One row of the balance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceRow {
    pub covariate: String,
    pub case_mean: f64,
    pub referent_mean: f64,
    /// `(case mean - referent mean) / sqrt((s²_case + s²_ref)/2)` on the
    /// matched sample. 0 when both groups are constant and equal; NaN with
    /// the flag set when they are constant but different.
    pub smd: f64,
    pub zero_pooled_sd: bool,
}

fn mean_and_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() < 2 {
        0.0
    } else {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    };
    (mean, var)
}

fn smd_row(name: &str, cases: &[f64], refs: &[f64]) -> BalanceRow {
    let (case_mean, case_var) = mean_and_var(cases);
    let (referent_mean, ref_var) = mean_and_var(refs);
    let pooled = ((case_var + ref_var) / 2.0).sqrt();
    let (smd, zero_pooled_sd) = if pooled > 0.0 {
        ((case_mean - referent_mean) / pooled, false)
    } else if (case_mean - referent_mean).abs() < 1e-12 {
        (0.0, false)
    } else {
        (f64::NAN, true)
    };
    BalanceRow { covariate: name.to_string(), case_mean, referent_mean, smd, zero_pooled_sd }
}

/// Covariate balance on the matched sample: one row per numeric covariate
/// plus one indicator row per observed level of each exact key.
pub fn balance_table(table: &CovariateTable, result: &MatchResult) -> Result<Vec<BalanceRow>> {
    if result.sets.is_empty() {
        return Err(Error::InvalidMatchInput("match result has no matched sets".into()));
    }
    let mut case_rows: Vec<usize> = Vec::new();
    let mut ref_rows: Vec<usize> = Vec::new();
    for (case_id, ref_ids) in &result.sets {
        case_rows.push(table.index_of_id(case_id).ok_or_else(|| {
            Error::InvalidMatchInput(format!("matched case {case_id} not in the covariate table"))
        })?);
        for rid in ref_ids {
            ref_rows.push(table.index_of_id(rid).ok_or_else(|| {
                Error::InvalidMatchInput(format!("matched referent {rid} not in the covariate table"))
            })?);
        }
    }

    let mut rows = Vec::new();
    for (j, name) in table.covariate_names.iter().enumerate() {
        let cases: Vec<f64> = case_rows.iter().map(|&i| table.covariates[i][j]).collect();
        let refs: Vec<f64> = ref_rows.iter().map(|&i| table.covariates[i][j]).collect();
        rows.push(smd_row(name, &cases, &refs));
    }
    for (j, name) in table.exact_names.iter().enumerate() {
        let mut levels: Vec<&String> = table.exact_keys.iter().map(|k| &k[j]).collect();
        levels.sort();
        levels.dedup();
        for level in levels {
            let ind = |i: usize| f64::from(u8::from(&table.exact_keys[i][j] == level));
            let cases: Vec<f64> = case_rows.iter().map(|&i| ind(i)).collect();
            let refs: Vec<f64> = ref_rows.iter().map(|&i| ind(i)).collect();
            rows.push(smd_row(&format!("{name}={level}"), &cases, &refs));
        }
    }
    Ok(rows)
}
