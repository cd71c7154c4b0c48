//! Exact solver: depth-first enumeration of all `N^n_p` assignments with
//! budget and cardinality pruning.

use std::cmp::Ordering;

use thiserror::Error;

use crate::model::{validate_structure, Instance, Schedule, TOLERANCE};
use crate::par::Execution;
use crate::valuation::{better_order, evaluate, EvaluationBreakdown};

pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),
    #[error("search space N^n_p = {n_periods}^{n_projects} = {} exceeds the cap of {cap}", .space.map_or("overflow".to_string(), |s| s.to_string()))]
    OverCap {
        n_periods: usize,
        n_projects: usize,
        space: Option<u64>,
        cap: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    /// Best feasible schedule, `None` when nothing is feasible.
    pub best: Option<EvaluationBreakdown>,
    pub feasible_count: u64,
    pub space_size: u64,
}

impl ExactResult {
    pub fn best_value(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.total_value)
    }

    pub fn best_schedule(&self) -> Option<&Schedule> {
        self.best.as_ref().map(|b| &b.schedule)
    }
}

pub fn enumerate_optimal(inst: &Instance) -> Result<ExactResult, OracleError> {
    enumerate_optimal_with(inst, DEFAULT_CAP, Execution::default())
}

pub fn count_feasible(inst: &Instance) -> Result<u64, OracleError> {
    Ok(enumerate_optimal(inst)?.feasible_count)
}

/// Enumeration is split across workers by the leading genes; the merged
/// result keeps the lexicographically smallest schedule among optima, so it
/// does not depend on the split.
pub fn enumerate_optimal_with(
    inst: &Instance,
    cap: u64,
    exec: Execution,
) -> Result<ExactResult, OracleError> {
    let violations = validate_structure(inst);
    if !violations.is_empty() {
        return Err(OracleError::InvalidInstance(violations));
    }
    let space = inst.search_space_size();
    let space_size = match space {
        Some(s) if s <= cap => s,
        _ => {
            return Err(OracleError::OverCap {
                n_periods: inst.n_periods(),
                n_projects: inst.n_projects(),
                space,
                cap,
            })
        }
    };

    let n = inst.n_projects();
    let periods = inst.n_periods();
    // enough prefixes to keep a pool busy without tiny tasks
    let mut prefix_len = 0;
    while prefix_len < n && periods.pow(prefix_len as u32) < 64 {
        prefix_len += 1;
    }
    let prefixes = periods.pow(prefix_len as u32);

    let partials = exec.map_indexed(prefixes, |code| {
        let mut search = Search::new(inst);
        let mut rest = code;
        for _ in 0..prefix_len {
            let k = rest % periods;
            rest /= periods;
            if !search.push(k) {
                return Partial::default();
            }
        }
        search.descend();
        search.found
    });

    let mut merged = Partial::default();
    for p in partials {
        merged.absorb(p);
    }
    Ok(ExactResult {
        best: merged.best,
        feasible_count: merged.feasible,
        space_size,
    })
}

#[derive(Default)]
struct Partial {
    best: Option<EvaluationBreakdown>,
    feasible: u64,
}

impl Partial {
    fn offer(&mut self, candidate: EvaluationBreakdown) {
        self.feasible += 1;
        if self
            .best
            .as_ref()
            .is_none_or(|b| better_order(&candidate, b) == Ordering::Greater)
        {
            self.best = Some(candidate);
        }
    }

    fn absorb(&mut self, other: Partial) {
        self.feasible += other.feasible;
        if let Some(candidate) = other.best {
            if self
                .best
                .as_ref()
                .is_none_or(|b| better_order(&candidate, b) == Ordering::Greater)
            {
                self.best = Some(candidate);
            }
        }
    }
}

struct Search<'a> {
    inst: &'a Instance,
    period_of: Vec<usize>,
    spent: Vec<f64>,
    count: Vec<usize>,
    found: Partial,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance) -> Self {
        Self {
            inst,
            period_of: Vec::with_capacity(inst.n_projects()),
            spent: vec![0.0; inst.n_periods()],
            count: vec![0; inst.n_periods()],
            found: Partial::default(),
        }
    }

    /// Assigns the next project to zero-based period `k`; `false` (and no
    /// change) if that already breaks a budget or cardinality cap.
    fn push(&mut self, k: usize) -> bool {
        let i = self.period_of.len();
        let spent = self.spent[k] + self.inst.projects()[i].cost_pv[k];
        if spent - self.inst.budgets()[k] > TOLERANCE || self.count[k] + 1 > self.inst.q_max()[k] {
            return false;
        }
        self.spent[k] = spent;
        self.count[k] += 1;
        self.period_of.push(k + 1);
        true
    }

    fn pop(&mut self, saved_spent: f64) {
        let k = self.period_of.pop().unwrap() - 1;
        self.spent[k] = saved_spent;
        self.count[k] -= 1;
    }

    fn minimums_reachable(&self) -> bool {
        let remaining = self.inst.n_projects() - self.period_of.len();
        let shortfall: usize = self
            .count
            .iter()
            .zip(self.inst.q_min())
            .map(|(&c, &lo)| lo.saturating_sub(c))
            .sum();
        shortfall <= remaining
    }

    fn descend(&mut self) {
        if !self.minimums_reachable() {
            return;
        }
        if self.period_of.len() == self.inst.n_projects() {
            let s = Schedule::from_vec_unchecked(self.period_of.clone());
            let b = evaluate(&s, self.inst);
            if b.feasible {
                self.found.offer(b);
            }
            return;
        }
        for k in 0..self.inst.n_periods() {
            let saved = self.spent[k];
            if self.push(k) {
                self.descend();
                self.pop(saved);
            }
        }
    }
}
