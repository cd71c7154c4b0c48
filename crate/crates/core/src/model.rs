//! Domain types for a multi-period project portfolio: projects, dependency
//! edges, instances, schedules and the bit-matrix chromosome encoding.
//!
//! Conventions used throughout the crate:
//!
//! * projects are addressed by zero-based index internally; their public
//!   `id` is `index + 1`;
//! * periods are one-based (`1..=N`) everywhere a schedule is exposed, which
//!   matches the textual and JSON forms.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for monetary comparisons.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("period index must be >= 1, got {0}")]
    PeriodOutOfRange(usize),
    #[error("discount rate must be finite and >= 0, got {0}")]
    InvalidRate(f64),
    #[error("return stream is empty")]
    EmptyStream,
    #[error("schedule entry for project {project} is period {period}, expected 1..={periods}")]
    ScheduleEntry {
        project: usize,
        period: usize,
        periods: usize,
    },
    #[error("schedule has {got} entries, expected {expected}")]
    ScheduleLength { got: usize, expected: usize },
    #[error("cannot parse schedule: {0}")]
    ScheduleSyntax(String),
}

/// How edges of level 1 are enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DependencyMode {
    /// A totally dependent project may never be funded before its predecessor.
    #[default]
    Hard,
    /// Precedence is left to the objective: a dependent funded before its
    /// predecessor simply loses its whole return.
    Soft,
}

impl fmt::Display for DependencyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DependencyMode::Hard => f.write_str("hard"),
            DependencyMode::Soft => f.write_str("soft"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Project {
    pub id: usize,
    pub label: String,
    /// Present value of the cost when funded in period `k` (index `k - 1`).
    pub cost_pv: Vec<f64>,
    /// Present value of the return when implemented in period `k`.
    pub return_pv: Vec<f64>,
    /// Undiscounted cost, if the per-period table was derived from it.
    pub raw_cost: Option<f64>,
    /// Per-period returns counted from the implementation period.
    pub return_stream: Option<Vec<f64>>,
}

impl Project {
    /// A project whose cost and return are the same in every period.
    pub fn flat(id: usize, label: impl Into<String>, cost: f64, ret: f64, periods: usize) -> Self {
        Self {
            id,
            label: label.into(),
            cost_pv: vec![cost; periods],
            return_pv: vec![ret; periods],
            raw_cost: None,
            return_stream: None,
        }
    }

    /// Builds the per-period tables by discounting raw inputs.
    pub fn from_raw(
        id: usize,
        label: impl Into<String>,
        raw_cost: f64,
        return_stream: Vec<f64>,
        rate: f64,
        periods: usize,
    ) -> Result<Self, ModelError> {
        let mut cost_pv = Vec::with_capacity(periods);
        let mut return_pv = Vec::with_capacity(periods);
        for k in 1..=periods {
            cost_pv.push(cost_present_value(raw_cost, rate, k)?);
            return_pv.push(return_present_value(&return_stream, rate, k)?);
        }
        Ok(Self {
            id,
            label: label.into(),
            cost_pv,
            return_pv,
            raw_cost: Some(raw_cost),
            return_stream: Some(return_stream),
        })
    }
}

/// `predecessor` creates an option on `dependent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependencyEdge {
    pub predecessor: usize,
    pub dependent: usize,
    /// 1 for total dependency, in (0, 1) for partial.
    pub level: f64,
    /// Option value credited to the predecessor when it strictly precedes
    /// the dependent.
    pub option_value: f64,
}

impl DependencyEdge {
    pub fn is_total(&self) -> bool {
        self.level >= 1.0
    }
}

/// Opaque identity of an instance's contents, used to reject mixing
/// evaluations from different instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct InstanceId(pub u64);

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n_projects: usize,
    n_periods: usize,
    projects: Vec<Project>,
    edges: Vec<DependencyEdge>,
    budgets: Vec<f64>,
    q_min: Vec<usize>,
    q_max: Vec<usize>,
    rate: f64,
    mode: DependencyMode,
    comment: Option<String>,
    id: InstanceId,
}

impl Instance {
    /// Assembles an instance. The declared sizes are taken from `projects`
    /// and `budgets`; nothing is validated here, see [`validate_instance`].
    pub fn new(
        projects: Vec<Project>,
        edges: Vec<DependencyEdge>,
        budgets: Vec<f64>,
        q_min: Vec<usize>,
        q_max: Vec<usize>,
    ) -> Self {
        let n_projects = projects.len();
        let n_periods = budgets.len();
        Self::with_declared_sizes(
            n_projects, n_periods, projects, edges, budgets, q_min, q_max,
        )
    }

    /// Like [`Instance::new`] but with explicitly declared `n_p` and `N`,
    /// which may disagree with the list lengths (reported by validation).
    pub fn with_declared_sizes(
        n_projects: usize,
        n_periods: usize,
        projects: Vec<Project>,
        edges: Vec<DependencyEdge>,
        budgets: Vec<f64>,
        q_min: Vec<usize>,
        q_max: Vec<usize>,
    ) -> Self {
        let mut inst = Self {
            n_projects,
            n_periods,
            projects,
            edges,
            budgets,
            q_min,
            q_max,
            rate: 0.0,
            mode: DependencyMode::Hard,
            comment: None,
            id: InstanceId(0),
        };
        inst.refresh_id();
        inst
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self.refresh_id();
        self
    }

    pub fn with_mode(mut self, mode: DependencyMode) -> Self {
        self.mode = mode;
        self.refresh_id();
        self
    }

    pub fn with_comment(mut self, comment: Option<String>) -> Self {
        self.comment = comment;
        self
    }

    /// Same instance with uniform cardinality bounds in every period.
    pub fn with_cardinality(mut self, q_min: usize, q_max: usize) -> Self {
        self.q_min = vec![q_min; self.n_periods];
        self.q_max = vec![q_max; self.n_periods];
        self.refresh_id();
        self
    }

    pub fn with_budgets(mut self, budgets: Vec<f64>) -> Self {
        self.budgets = budgets;
        self.refresh_id();
        self
    }

    pub fn with_bounds(mut self, q_min: Vec<usize>, q_max: Vec<usize>) -> Self {
        self.q_min = q_min;
        self.q_max = q_max;
        self.refresh_id();
        self
    }

    pub fn with_edges(mut self, edges: Vec<DependencyEdge>) -> Self {
        self.edges = edges;
        self.refresh_id();
        self
    }

    fn refresh_id(&mut self) {
        let mut h = DefaultHasher::new();
        self.n_projects.hash(&mut h);
        self.n_periods.hash(&mut h);
        for p in &self.projects {
            p.id.hash(&mut h);
            p.cost_pv.iter().for_each(|v| v.to_bits().hash(&mut h));
            p.return_pv.iter().for_each(|v| v.to_bits().hash(&mut h));
        }
        for e in &self.edges {
            e.predecessor.hash(&mut h);
            e.dependent.hash(&mut h);
            e.level.to_bits().hash(&mut h);
            e.option_value.to_bits().hash(&mut h);
        }
        self.budgets.iter().for_each(|v| v.to_bits().hash(&mut h));
        self.q_min.hash(&mut h);
        self.q_max.hash(&mut h);
        self.rate.to_bits().hash(&mut h);
        self.mode.hash(&mut h);
        self.id = InstanceId(h.finish());
    }

    pub fn n_projects(&self) -> usize {
        self.n_projects
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn projects(&self) -> &[Project] {
        &self.projects
    }

    pub fn edges(&self) -> &[DependencyEdge] {
        &self.edges
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn q_min(&self) -> &[usize] {
        &self.q_min
    }

    pub fn q_max(&self) -> &[usize] {
        &self.q_max
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mode(&self) -> DependencyMode {
        self.mode
    }

    pub fn comment(&self) -> Option<&str> {
        self.comment.as_deref()
    }

    pub fn id(&self) -> InstanceId {
        self.id
    }

    /// `N^n_p`, or `None` on overflow.
    pub fn search_space_size(&self) -> Option<u64> {
        (self.n_periods as u64).checked_pow(u32::try_from(self.n_projects).ok()?)
    }
}

/// Discounts a cost paid at the start of period `k` back to time zero.
pub fn cost_present_value(raw_cost: f64, rate: f64, k: usize) -> Result<f64, ModelError> {
    check_rate(rate)?;
    if k < 1 {
        return Err(ModelError::PeriodOutOfRange(k));
    }
    if k == 1 {
        return Ok(raw_cost);
    }
    Ok(raw_cost / (1.0 + rate).powi((k - 1) as i32))
}

/// Present value at time zero of a return stream that starts with the
/// implementation in period `k`. `stream[t - 1]` arrives at the end of the
/// `t`-th period after implementation.
pub fn return_present_value(stream: &[f64], rate: f64, k: usize) -> Result<f64, ModelError> {
    check_rate(rate)?;
    if k < 1 {
        return Err(ModelError::PeriodOutOfRange(k));
    }
    if stream.is_empty() {
        return Err(ModelError::EmptyStream);
    }
    let growth = 1.0 + rate;
    let at_implementation: f64 = stream
        .iter()
        .enumerate()
        .map(|(t, r)| r / growth.powi(t as i32 + 1))
        .sum();
    Ok(at_implementation / growth.powi((k - 1) as i32))
}

fn check_rate(rate: f64) -> Result<(), ModelError> {
    if rate.is_finite() && rate >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidRate(rate))
    }
}

/// Returns one message per violated instance invariant; empty means valid.
pub fn validate_instance(inst: &Instance) -> Vec<String> {
    validate(inst, true)
}

/// [`validate_instance`] without the two counting conditions
/// `sum(q_max) >= n_p` and `sum(q_min) <= n_p`. Instances that pass only
/// this check are well-formed but have no feasible schedule, which the
/// solvers report as infeasibility rather than as an input error.
pub fn validate_structure(inst: &Instance) -> Vec<String> {
    validate(inst, false)
}

fn validate(inst: &Instance, counting: bool) -> Vec<String> {
    let mut out = Vec::new();
    let n = inst.n_projects;
    let periods = inst.n_periods;

    if inst.projects.len() != n {
        out.push(format!(
            "projects has {} entries but n_p is {n}",
            inst.projects.len()
        ));
    }
    if periods == 0 {
        out.push("N must be >= 1".to_string());
    }
    if !(inst.rate.is_finite() && inst.rate >= 0.0) {
        out.push(format!("rate must be >= 0, got {}", inst.rate));
    }

    for (idx, p) in inst.projects.iter().enumerate() {
        if p.id != idx + 1 {
            out.push(format!(
                "project at position {} has id {}, expected {}",
                idx + 1,
                p.id,
                idx + 1
            ));
        }
        if p.cost_pv.len() != periods {
            out.push(format!(
                "project {} cost_pv has {} entries, expected {periods}",
                p.id,
                p.cost_pv.len()
            ));
        }
        if p.return_pv.len() != periods {
            out.push(format!(
                "project {} return_pv has {} entries, expected {periods}",
                p.id,
                p.return_pv.len()
            ));
        }
        if let Some(k) = p.cost_pv.iter().position(|c| !(c.is_finite() && *c > 0.0)) {
            out.push(format!(
                "project {} cost_pv[{}] = {} must be > 0",
                p.id,
                k + 1,
                p.cost_pv[k]
            ));
        }
        if let Some(k) = p
            .return_pv
            .iter()
            .position(|r| !(r.is_finite() && *r >= 0.0))
        {
            out.push(format!(
                "project {} return_pv[{}] = {} must be >= 0",
                p.id,
                k + 1,
                p.return_pv[k]
            ));
        }
        check_raw_inputs(p, inst.rate, &mut out);
    }

    if inst.budgets.len() != periods {
        out.push(format!(
            "budgets has {} entries, expected {periods}",
            inst.budgets.len()
        ));
    }
    for (k, b) in inst.budgets.iter().enumerate() {
        if !(b.is_finite() && *b > 0.0) {
            out.push(format!("budgets[{}] = {b} must be > 0", k + 1));
        }
    }
    if inst.q_min.len() != periods {
        out.push(format!(
            "q_min has {} entries, expected {periods}",
            inst.q_min.len()
        ));
    }
    if inst.q_max.len() != periods {
        out.push(format!(
            "q_max has {} entries, expected {periods}",
            inst.q_max.len()
        ));
    }
    for (k, (lo, hi)) in inst.q_min.iter().zip(&inst.q_max).enumerate() {
        if lo > hi {
            out.push(format!("q_min[{}] ({lo}) > q_max[{}] ({hi})", k + 1, k + 1));
        }
        if *hi > n {
            out.push(format!("q_max[{}] ({hi}) > n_p ({n})", k + 1));
        }
    }
    let max_sum: usize = inst.q_max.iter().sum();
    let min_sum: usize = inst.q_min.iter().sum();
    if counting && max_sum < n {
        out.push(format!("sum of q_max ({max_sum}) < n_p ({n})"));
    }
    if counting && min_sum > n {
        out.push(format!("sum of q_min ({min_sum}) > n_p ({n})"));
    }

    let mut seen = BTreeSet::new();
    let mut edges_ok = true;
    for e in &inst.edges {
        if e.predecessor == e.dependent {
            out.push(format!(
                "edge predecessor equals dependent ({})",
                e.predecessor
            ));
            edges_ok = false;
        }
        for (name, id) in [("predecessor", e.predecessor), ("dependent", e.dependent)] {
            if id < 1 || id > n {
                out.push(format!("edge {name} {id} is not a project id in 1..={n}"));
                edges_ok = false;
            }
        }
        if !seen.insert((e.predecessor, e.dependent)) {
            out.push(format!(
                "duplicate edge {} -> {}",
                e.predecessor, e.dependent
            ));
        }
        if !(e.level > 0.0 && e.level <= 1.0) {
            out.push(format!(
                "edge {} -> {} level {} must be in (0, 1]",
                e.predecessor, e.dependent, e.level
            ));
        }
        if !(e.option_value.is_finite() && e.option_value >= 0.0) {
            out.push(format!(
                "edge {} -> {} option_value {} must be >= 0",
                e.predecessor, e.dependent, e.option_value
            ));
        }
    }
    if edges_ok && has_cycle(n, &inst.edges) {
        out.push("edges contain a dependency cycle".to_string());
    }
    out
}

fn check_raw_inputs(p: &Project, rate: f64, out: &mut Vec<String>) {
    if let Some(raw) = p.raw_cost {
        for (k, c) in p.cost_pv.iter().enumerate() {
            match cost_present_value(raw, rate, k + 1) {
                Ok(expected) if (expected - c).abs() <= TOLERANCE => {}
                Ok(expected) => out.push(format!(
                    "project {} cost_pv[{}] = {c} disagrees with raw_cost discounted ({expected})",
                    p.id,
                    k + 1
                )),
                Err(e) => out.push(format!("project {} raw_cost: {e}", p.id)),
            }
        }
    }
    if let Some(stream) = &p.return_stream {
        for (k, r) in p.return_pv.iter().enumerate() {
            match return_present_value(stream, rate, k + 1) {
                Ok(expected) if (expected - r).abs() <= TOLERANCE => {}
                Ok(expected) => out.push(format!(
                    "project {} return_pv[{}] = {r} disagrees with return_stream discounted ({expected})",
                    p.id,
                    k + 1
                )),
                Err(e) => out.push(format!("project {} return_stream: {e}", p.id)),
            }
        }
    }
}

fn has_cycle(n: usize, edges: &[DependencyEdge]) -> bool {
    let mut indegree = vec![0usize; n];
    let mut out_adj = vec![Vec::new(); n];
    for e in edges {
        out_adj[e.predecessor - 1].push(e.dependent - 1);
        indegree[e.dependent - 1] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut visited = 0;
    while let Some(i) = ready.pop() {
        visited += 1;
        for &j in &out_adj[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(j);
            }
        }
    }
    visited != n
}

/// Assignment of every project to exactly one period (one-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule(Vec<usize>);

impl Schedule {
    /// Checks every entry lies in `1..=n_periods`.
    pub fn new(period_of: Vec<usize>, n_periods: usize) -> Result<Self, ModelError> {
        if let Some(i) = period_of.iter().position(|&k| k < 1 || k > n_periods) {
            return Err(ModelError::ScheduleEntry {
                project: i + 1,
                period: period_of[i],
                periods: n_periods,
            });
        }
        Ok(Self(period_of))
    }

    /// Validates against an instance's dimensions.
    pub fn for_instance(period_of: Vec<usize>, inst: &Instance) -> Result<Self, ModelError> {
        if period_of.len() != inst.n_projects() {
            return Err(ModelError::ScheduleLength {
                got: period_of.len(),
                expected: inst.n_projects(),
            });
        }
        Self::new(period_of, inst.n_periods())
    }

    pub(crate) fn from_vec_unchecked(period_of: Vec<usize>) -> Self {
        Self(period_of)
    }

    pub fn period_of(&self) -> &[usize] {
        &self.0
    }

    /// Period of the project at zero-based index `i`.
    pub fn period(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `true` iff project `i` is funded strictly before project `j`.
    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.0[i] < self.0[j]
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

/// Parses the comma form, e.g. `1,2,1,2,2,3,3`. Range checks happen in
/// [`Schedule::for_instance`].
pub fn parse_period_list(text: &str) -> Result<Vec<usize>, ModelError> {
    text.trim()
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| ModelError::ScheduleSyntax(format!("bad period {tok:?}")))
        })
        .collect()
}

/// `n_p x N` bit matrix; row = project, column = period. Rows need not be
/// one-hot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chromosome {
    n_projects: usize,
    n_periods: usize,
    bits: Vec<bool>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChromosomeError {
    #[error("chromosome is {got_rows}x{got_cols}, expected {rows}x{cols}")]
    Dimension {
        rows: usize,
        cols: usize,
        got_rows: usize,
        got_cols: usize,
    },
    #[error("{}", describe_defects(.0))]
    InvalidRows(Vec<RowDefect>),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

/// A row that does not have exactly one set bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RowDefect {
    /// One-based project row.
    pub row: usize,
    pub set_bits: usize,
}

fn describe_defects(defects: &[RowDefect]) -> String {
    let parts: Vec<String> = defects
        .iter()
        .map(|d| format!("row {} has {} set bits", d.row, d.set_bits))
        .collect();
    format!("invalid chromosome: {}", parts.join("; "))
}

impl Chromosome {
    pub fn zeros(n_projects: usize, n_periods: usize) -> Self {
        Self {
            n_projects,
            n_periods,
            bits: vec![false; n_projects * n_periods],
        }
    }

    /// Builds from explicit rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self, ChromosomeError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(ChromosomeError::Syntax {
                line: bad + 1,
                msg: format!("row has {} bits, expected {cols}", rows[bad].len()),
            });
        }
        Ok(Self {
            n_projects: rows.len(),
            n_periods: cols,
            bits: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn n_projects(&self) -> usize {
        self.n_projects
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn get(&self, project: usize, period: usize) -> bool {
        self.bits[project * self.n_periods + period]
    }

    pub fn set(&mut self, project: usize, period: usize, value: bool) {
        self.bits[project * self.n_periods + period] = value;
    }

    pub fn row(&self, project: usize) -> &[bool] {
        let start = project * self.n_periods;
        &self.bits[start..start + self.n_periods]
    }

    /// The flat `n_p * N` bit string, row-major.
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Rows as `'0'`/`'1'` strings.
    pub fn row_strings(&self) -> Vec<String> {
        (0..self.n_projects)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|&b| if b { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.row_strings() {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl FromStr for Chromosome {
    type Err = ChromosomeError;

    /// One row per non-blank line, characters `0`/`1` only.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut rows = Vec::new();
        for (n, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(ChromosomeError::Syntax {
                        line: n + 1,
                        msg: format!("unexpected character {other:?}"),
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }
}

/// Reads the schedule out of a one-hot chromosome.
pub fn decode_chromosome(
    c: &Chromosome,
    n_projects: usize,
    n_periods: usize,
) -> Result<Schedule, ChromosomeError> {
    if c.n_projects != n_projects || c.n_periods != n_periods {
        return Err(ChromosomeError::Dimension {
            rows: n_projects,
            cols: n_periods,
            got_rows: c.n_projects,
            got_cols: c.n_periods,
        });
    }
    let mut period_of = Vec::with_capacity(n_projects);
    let mut defects = Vec::new();
    for i in 0..n_projects {
        let row = c.row(i);
        let set_bits = row.iter().filter(|&&b| b).count();
        if set_bits == 1 {
            period_of.push(row.iter().position(|&b| b).unwrap() + 1);
        } else {
            defects.push(RowDefect {
                row: i + 1,
                set_bits,
            });
        }
    }
    if defects.is_empty() {
        Ok(Schedule(period_of))
    } else {
        Err(ChromosomeError::InvalidRows(defects))
    }
}

/// One-hot encoding of a schedule.
pub fn encode_schedule(s: &Schedule, n_periods: usize) -> Chromosome {
    let mut c = Chromosome::zeros(s.len(), n_periods);
    for (i, &k) in s.period_of().iter().enumerate() {
        c.set(i, k - 1, true);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(edges: Vec<DependencyEdge>) -> Instance {
        let projects = (1..=3)
            .map(|i| Project::flat(i, format!("p{i}"), 10.0, 20.0, 2))
            .collect();
        Instance::new(projects, edges, vec![100.0, 100.0], vec![0, 0], vec![3, 3])
    }

    fn edge(p: usize, d: usize) -> DependencyEdge {
        DependencyEdge {
            predecessor: p,
            dependent: d,
            level: 1.0,
            option_value: 1.0,
        }
    }

    #[test]
    fn cost_discounting() {
        assert_eq!(cost_present_value(100.0, 0.1, 1).unwrap(), 100.0);
        assert!((cost_present_value(110.0, 0.1, 2).unwrap() - 100.0).abs() < 1e-12);
        assert_eq!(cost_present_value(100.0, 0.0, 3).unwrap(), 100.0);
        assert_eq!(
            cost_present_value(100.0, 0.1, 0),
            Err(ModelError::PeriodOutOfRange(0))
        );
    }

    #[test]
    fn cost_discounting_monotone_in_period() {
        let v: Vec<f64> = (1..6)
            .map(|k| cost_present_value(50.0, 0.07, k).unwrap())
            .collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        let flat: Vec<f64> = (1..6)
            .map(|k| cost_present_value(50.0, 0.0, k).unwrap())
            .collect();
        assert!(flat.iter().all(|&c| c == 50.0));
    }

    #[test]
    fn return_discounting() {
        assert!((return_present_value(&[110.0], 0.1, 1).unwrap() - 100.0).abs() < 1e-12);
        assert_eq!(
            return_present_value(&[100.0, 100.0], 0.0, 1).unwrap(),
            200.0
        );
        // 110 / 1.1 / 1.1
        let expected = 1000.0 / 11.0;
        assert!((return_present_value(&[110.0], 0.1, 2).unwrap() - expected).abs() < 1e-9);
        assert_eq!(
            return_present_value(&[], 0.1, 1),
            Err(ModelError::EmptyStream)
        );
    }

    #[test]
    fn self_loop_reported() {
        let v = validate_instance(&tiny(vec![edge(1, 1)]));
        assert_eq!(v, vec!["edge predecessor equals dependent (1)".to_string()]);
    }

    #[test]
    fn pigeonhole_on_q_max() {
        let projects = (1..=7).map(|i| Project::flat(i, "", 1.0, 1.0, 3)).collect();
        let inst = Instance::new(projects, vec![], vec![10.0; 3], vec![0; 3], vec![2; 3]);
        assert_eq!(
            validate_instance(&inst),
            vec!["sum of q_max (6) < n_p (7)".to_string()]
        );
    }

    #[test]
    fn cycle_and_duplicates_reported() {
        let v = validate_instance(&tiny(vec![edge(1, 2), edge(2, 3), edge(3, 1)]));
        assert!(v.iter().any(|m| m.contains("cycle")), "{v:?}");
        let v = validate_instance(&tiny(vec![edge(1, 2), edge(1, 2)]));
        assert!(v.iter().any(|m| m.contains("duplicate")), "{v:?}");
        let v = validate_instance(&tiny(vec![edge(1, 9)]));
        assert!(v.iter().any(|m| m.contains("dependent 9")), "{v:?}");
    }

    #[test]
    fn bad_levels_and_costs() {
        let mut e = edge(1, 2);
        e.level = 0.0;
        let v = validate_instance(&tiny(vec![e]));
        assert!(v.iter().any(|m| m.contains("level")), "{v:?}");

        let mut projects: Vec<Project> = (1..=2)
            .map(|i| Project::flat(i, "", 10.0, 20.0, 2))
            .collect();
        projects[1].cost_pv[0] = 0.0;
        let inst = Instance::new(projects, vec![], vec![1.0, 0.0], vec![0, 0], vec![2, 2]);
        let v = validate_instance(&inst);
        assert!(v.iter().any(|m| m.contains("cost_pv[1]")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("budgets[2]")), "{v:?}");
    }

    #[test]
    fn raw_inputs_must_match_tables() {
        let p = Project::from_raw(1, "a", 110.0, vec![50.0, 60.0], 0.1, 3).unwrap();
        let inst = Instance::new(
            vec![p.clone()],
            vec![],
            vec![1000.0; 3],
            vec![0; 3],
            vec![1; 3],
        )
        .with_rate(0.1);
        assert!(validate_instance(&inst).is_empty());

        let mut tampered = p;
        tampered.cost_pv[2] += 1.0;
        let inst = Instance::new(
            vec![tampered],
            vec![],
            vec![1000.0; 3],
            vec![0; 3],
            vec![1; 3],
        )
        .with_rate(0.1);
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("cost_pv[3]"));
    }

    #[test]
    fn empty_instance_is_valid() {
        let inst = Instance::new(vec![], vec![], vec![5.0], vec![0], vec![0]);
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn decode_figure_chromosome() {
        let c: Chromosome = "100\n010\n100\n010\n010\n001\n001\n".parse().unwrap();
        let s = decode_chromosome(&c, 7, 3).unwrap();
        assert_eq!(s.period_of(), &[1, 2, 1, 2, 2, 3, 3]);
        assert_eq!(encode_schedule(&s, 3), c);
        assert_eq!(c.to_string(), "100\n010\n100\n010\n010\n001\n001\n");
    }

    #[test]
    fn decode_reports_bad_rows() {
        let c: Chromosome = "110\n010".parse().unwrap();
        assert_eq!(
            decode_chromosome(&c, 2, 3),
            Err(ChromosomeError::InvalidRows(vec![RowDefect {
                row: 1,
                set_bits: 2
            }]))
        );
        let c: Chromosome = "000\n010".parse().unwrap();
        let err = decode_chromosome(&c, 2, 3).unwrap_err();
        assert_eq!(err.to_string(), "invalid chromosome: row 1 has 0 set bits");
        assert!(matches!(
            decode_chromosome(&c, 3, 3),
            Err(ChromosomeError::Dimension { .. })
        ));
        assert!(matches!(
            "10\n102".parse::<Chromosome>(),
            Err(ChromosomeError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn single_cell_encoding() {
        let s = Schedule::new(vec![1], 1).unwrap();
        assert_eq!(encode_schedule(&s, 1).row_strings(), vec!["1"]);
    }

    #[test]
    fn schedule_checks() {
        assert!(Schedule::new(vec![1, 0], 2).is_err());
        assert!(Schedule::new(vec![1, 3], 2).is_err());
        assert_eq!(parse_period_list(" 1, 2,3").unwrap(), vec![1, 2, 3]);
        assert!(parse_period_list("1,x").is_err());
        let s = Schedule::new(vec![2, 1], 2).unwrap();
        assert!(s.precedes(1, 0));
        assert!(!s.precedes(0, 1));
        assert_eq!(s.to_string(), "2,1");
    }
}
