#![allow(clippy::needless_range_loop)]

//! Test-only reference implementation, written directly against the
//! indicator-matrix formulation (`X[i][k] = 1` iff project i is funded in
//! period k) and a plain odometer enumeration. It shares no code with the
//! crate's valuation or oracle paths.

#![allow(dead_code)]

use portfolio_core::model::DependencyMode;
use portfolio_core::Instance;

pub const EPS: f64 = 1e-9;

pub struct Reference {
    pub value: f64,
    pub dcf: f64,
    pub options: f64,
    pub feasible: bool,
}

/// Indicator matrix from a one-based period vector.
pub fn indicator(period_of: &[usize], periods: usize) -> Vec<Vec<u8>> {
    period_of
        .iter()
        .map(|&k| (1..=periods).map(|c| u8::from(c == k)).collect())
        .collect()
}

/// Period index (one-based) recovered from an indicator row.
fn when(x: &[Vec<u8>], i: usize) -> usize {
    x[i].iter().position(|&b| b == 1).unwrap() + 1
}

pub fn reference_value(inst: &Instance, period_of: &[usize]) -> Reference {
    let n = inst.n_projects();
    let periods = inst.n_periods();
    let x = indicator(period_of, periods);

    // Y[i][j] = 1 iff i is funded strictly before j
    let y = |i: usize, j: usize| when(&x, i) < when(&x, j);

    let mut dcf = 0.0;
    let mut options = 0.0;
    for i in 0..n {
        let p = &inst.projects()[i];
        let mut benefit = 1.0;
        for e in inst.edges() {
            if e.dependent != i + 1 {
                continue;
            }
            let counts = e.level < 1.0 || inst.mode() == DependencyMode::Soft;
            if counts && y(i, e.predecessor - 1) {
                benefit *= 1.0 - e.level;
            }
        }
        for k in 0..periods {
            if x[i][k] == 1 {
                dcf += p.return_pv[k] * benefit - p.cost_pv[k];
            }
        }
        for e in inst.edges() {
            if e.predecessor == i + 1 && y(i, e.dependent - 1) {
                options += e.option_value;
            }
        }
    }

    let mut feasible = true;
    for k in 0..periods {
        let spend: f64 = (0..n)
            .map(|i| inst.projects()[i].cost_pv[k] * x[i][k] as f64)
            .sum();
        let count: usize = (0..n).map(|i| x[i][k] as usize).sum();
        if spend > inst.budgets()[k] + EPS || count < inst.q_min()[k] || count > inst.q_max()[k] {
            feasible = false;
        }
    }
    if inst.mode() == DependencyMode::Hard {
        for e in inst.edges() {
            if e.level >= 1.0 && y(e.dependent - 1, e.predecessor - 1) {
                feasible = false;
            }
        }
    }
    Reference {
        value: dcf + options,
        dcf,
        options,
        feasible,
    }
}

/// Every assignment in odometer order.
pub fn all_schedules(n: usize, periods: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (periods as u64).pow(n as u32);
    (0..total).map(move |mut code| {
        let mut v = vec![0; n];
        for slot in v.iter_mut().rev() {
            *slot = (code % periods as u64) as usize + 1;
            code /= periods as u64;
        }
        v
    })
}

pub struct BruteForce {
    pub best_value: Option<f64>,
    /// All optimal schedules (within EPS).
    pub optima: Vec<Vec<usize>>,
    pub feasible: u64,
}

pub fn brute_force(inst: &Instance) -> BruteForce {
    let mut best_value: Option<f64> = None;
    let mut optima = Vec::new();
    let mut feasible = 0;
    for s in all_schedules(inst.n_projects(), inst.n_periods()) {
        let r = reference_value(inst, &s);
        if !r.feasible {
            continue;
        }
        feasible += 1;
        match best_value {
            Some(b) if r.value < b - EPS => {}
            Some(b) if r.value <= b + EPS => optima.push(s),
            _ => {
                best_value = Some(r.value);
                optima = vec![s];
            }
        }
    }
    BruteForce {
        best_value,
        optima,
        feasible,
    }
}
