//! Portfolio value of a schedule: discounted cash flow per project, reduced
//! by unmet partial dependencies, plus option values accrued by projects
//! funded strictly before their dependents.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::model::{DependencyEdge, DependencyMode, Instance, InstanceId, Schedule, TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValuationError {
    #[error("candidates were evaluated against different instances")]
    InstanceMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectValuation {
    pub id: usize,
    pub period: usize,
    pub cost: f64,
    pub partial_factor: f64,
    pub effective_return: f64,
    pub dcf_value: f64,
    pub option_accrued: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violations {
    /// Spend above `B_k`, per period (>= 0).
    pub budget_excess: Vec<f64>,
    pub cardinality_shortfall: Vec<usize>,
    pub cardinality_excess: Vec<usize>,
    /// Total-dependency edges whose dependent is funded before the
    /// predecessor (hard mode only).
    pub precedence_violations: Vec<DependencyEdge>,
}

impl Violations {
    pub fn is_empty(&self) -> bool {
        self.budget_excess.iter().all(|&b| b == 0.0)
            && self.cardinality_shortfall.iter().all(|&c| c == 0)
            && self.cardinality_excess.iter().all(|&c| c == 0)
            && self.precedence_violations.is_empty()
    }

    /// Scale-free violation total: budget excess over total budget, plus
    /// cardinality deviation over `n_p`, plus one per precedence violation.
    pub fn magnitude(&self, inst: &Instance) -> f64 {
        let budget_scale: f64 = inst.budgets().iter().sum::<f64>().max(f64::MIN_POSITIVE);
        let card_scale = inst.n_projects().max(1) as f64;
        let budget: f64 = self.budget_excess.iter().sum();
        let card: usize = self
            .cardinality_shortfall
            .iter()
            .chain(&self.cardinality_excess)
            .sum();
        budget / budget_scale + card as f64 / card_scale + self.precedence_violations.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationBreakdown {
    #[serde(skip)]
    instance: InstanceId,
    pub schedule: Schedule,
    pub projects: Vec<ProjectValuation>,
    pub total_dcf: f64,
    pub total_option: f64,
    pub total_value: f64,
    pub total_cost_per_period: Vec<f64>,
    pub count_per_period: Vec<usize>,
    pub violations: Violations,
    pub total_violation: f64,
    pub feasible: bool,
}

impl EvaluationBreakdown {
    pub fn instance(&self) -> InstanceId {
        self.instance
    }

    /// Ordering key: smaller is better.
    fn rank(&self) -> (i128, i128) {
        (quantize(self.total_violation), -quantize(self.total_value))
    }
}

/// Values within [`TOLERANCE`] of each other compare equal once quantized.
fn quantize(x: f64) -> i128 {
    (x / TOLERANCE).round() as i128
}

fn edge_indices(e: &DependencyEdge) -> (usize, usize) {
    (e.predecessor - 1, e.dependent - 1)
}

/// Whether an edge reduces its dependent's benefit when unmet.
fn edge_reduces_benefit(e: &DependencyEdge, mode: DependencyMode) -> bool {
    !e.is_total() || mode == DependencyMode::Soft
}

/// Product of `(1 - d)` over incoming edges whose predecessor is funded
/// strictly after project `i` (zero-based). Level-1 edges join only in soft
/// mode.
pub fn partial_benefit_factor(i: usize, s: &Schedule, inst: &Instance) -> f64 {
    inst.edges()
        .iter()
        .filter(|e| e.dependent == i + 1 && edge_reduces_benefit(e, inst.mode()))
        .filter(|e| {
            let (pred, dep) = edge_indices(e);
            s.precedes(dep, pred)
        })
        .map(|e| 1.0 - e.level)
        .product()
}

/// `return x factor - cost` for project `i` in its scheduled period.
pub fn dcf_value(i: usize, s: &Schedule, inst: &Instance) -> f64 {
    let p = &inst.projects()[i];
    let k = s.period(i) - 1;
    p.return_pv[k] * partial_benefit_factor(i, s, inst) - p.cost_pv[k]
}

/// Option values credited to project `i` by dependents funded strictly later.
pub fn option_accrual(i: usize, s: &Schedule, inst: &Instance) -> f64 {
    inst.edges()
        .iter()
        .filter(|e| e.predecessor == i + 1)
        .filter(|e| {
            let (pred, dep) = edge_indices(e);
            s.precedes(pred, dep)
        })
        .map(|e| e.option_value)
        .sum()
}

fn period_totals(s: &Schedule, inst: &Instance) -> (Vec<f64>, Vec<usize>) {
    let mut cost = vec![0.0; inst.n_periods()];
    let mut count = vec![0usize; inst.n_periods()];
    for (i, p) in inst.projects().iter().enumerate() {
        let k = s.period(i) - 1;
        cost[k] += p.cost_pv[k];
        count[k] += 1;
    }
    (cost, count)
}

fn violations_from_totals(
    s: &Schedule,
    inst: &Instance,
    cost: &[f64],
    count: &[usize],
) -> Violations {
    let budget_excess = cost
        .iter()
        .zip(inst.budgets())
        .map(|(c, b)| if c - b > TOLERANCE { c - b } else { 0.0 })
        .collect();
    let cardinality_shortfall = count
        .iter()
        .zip(inst.q_min())
        .map(|(&c, &lo)| lo.saturating_sub(c))
        .collect();
    let cardinality_excess = count
        .iter()
        .zip(inst.q_max())
        .map(|(&c, &hi)| c.saturating_sub(hi))
        .collect();
    let precedence_violations = match inst.mode() {
        DependencyMode::Soft => Vec::new(),
        DependencyMode::Hard => inst
            .edges()
            .iter()
            .filter(|e| e.is_total())
            .filter(|e| {
                let (pred, dep) = edge_indices(e);
                s.precedes(dep, pred)
            })
            .copied()
            .collect(),
    };
    Violations {
        budget_excess,
        cardinality_shortfall,
        cardinality_excess,
        precedence_violations,
    }
}

/// Budget, cardinality and (hard mode) precedence violations of `s`.
pub fn check_feasibility(s: &Schedule, inst: &Instance) -> Violations {
    let (cost, count) = period_totals(s, inst);
    violations_from_totals(s, inst, &cost, &count)
}

/// Full valuation of a schedule. `s` must have one entry per project, each
/// in `1..=N`.
pub fn evaluate(s: &Schedule, inst: &Instance) -> EvaluationBreakdown {
    assert_eq!(
        s.len(),
        inst.n_projects(),
        "schedule length does not match the instance"
    );
    let n = inst.n_projects();
    let mut factor = vec![1.0; n];
    let mut accrued = vec![0.0; n];
    for e in inst.edges() {
        let (pred, dep) = edge_indices(e);
        if s.precedes(pred, dep) {
            accrued[pred] += e.option_value;
        } else if s.precedes(dep, pred) && edge_reduces_benefit(e, inst.mode()) {
            factor[dep] *= 1.0 - e.level;
        }
    }

    let projects: Vec<ProjectValuation> = inst
        .projects()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let k = s.period(i) - 1;
            let effective_return = p.return_pv[k] * factor[i];
            ProjectValuation {
                id: p.id,
                period: k + 1,
                cost: p.cost_pv[k],
                partial_factor: factor[i],
                effective_return,
                dcf_value: effective_return - p.cost_pv[k],
                option_accrued: accrued[i],
            }
        })
        .collect();

    let total_dcf: f64 = projects.iter().map(|p| p.dcf_value).sum();
    let total_option: f64 = projects.iter().map(|p| p.option_accrued).sum();
    let (cost, count) = period_totals(s, inst);
    let violations = violations_from_totals(s, inst, &cost, &count);
    let total_violation = violations.magnitude(inst);
    let feasible = violations.is_empty();

    EvaluationBreakdown {
        instance: inst.id(),
        schedule: s.clone(),
        projects,
        total_dcf,
        total_option,
        total_value: total_dcf + total_option,
        total_cost_per_period: cost,
        count_per_period: count,
        violations,
        total_violation,
        feasible,
    }
}

/// Feasibility-first ordering. `Greater` means `a` is the better candidate:
/// lower violation, then higher value, then lexicographically smaller
/// schedule.
pub fn compare_candidates(
    a: &EvaluationBreakdown,
    b: &EvaluationBreakdown,
) -> Result<Ordering, ValuationError> {
    if a.instance != b.instance {
        return Err(ValuationError::InstanceMismatch);
    }
    Ok(better_order(a, b))
}

/// [`compare_candidates`] without the instance check.
pub(crate) fn better_order(a: &EvaluationBreakdown, b: &EvaluationBreakdown) -> Ordering {
    a.rank()
        .cmp(&b.rank())
        .then_with(|| a.schedule.cmp(&b.schedule))
        .reverse()
}
