//! Seeded random instances for certification runs.

use rand::Rng;
use thiserror::Error;

use crate::ga::substream;
use crate::model::{DependencyEdge, DependencyMode, Instance, Project};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generator parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub projects: usize,
    pub periods: usize,
    /// Probability of an edge for each ordered pair `i < j`.
    pub edge_density: f64,
    /// Share of edges that are partial (level < 1).
    pub partial_fraction: f64,
    /// Per-period budget as a multiple of `total cost / N`.
    pub budget_tightness: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            projects: 7,
            periods: 3,
            edge_density: 0.3,
            partial_fraction: 0.3,
            budget_tightness: 1.2,
            seed: 0,
        }
    }
}

impl GenParams {
    /// The certification corpus: `n_p` cycles through 5..=8 and `N` through
    /// 2..=3 as the seed advances.
    pub fn corpus(seed: u64) -> Self {
        Self {
            projects: 5 + (seed % 4) as usize,
            periods: 2 + ((seed / 4) % 2) as usize,
            seed,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<(), GenError> {
        let fail = |m: String| Err(GenError::Parameter(m));
        if self.projects < 1 {
            return fail("projects must be >= 1".into());
        }
        if self.periods < 1 {
            return fail("periods must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.edge_density) {
            return fail(format!("edge density {} not in [0, 1]", self.edge_density));
        }
        if !(0.0..=1.0).contains(&self.partial_fraction) {
            return fail(format!(
                "partial fraction {} not in [0, 1]",
                self.partial_fraction
            ));
        }
        if !(self.budget_tightness.is_finite() && self.budget_tightness > 0.0) {
            return fail(format!(
                "budget tightness {} must be > 0",
                self.budget_tightness
            ));
        }
        Ok(())
    }
}

fn cents(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Acyclic by construction: edges only run from lower to higher id.
pub fn generate_instance(params: &GenParams) -> Result<Instance, GenError> {
    params.check()?;
    let mut rng = substream(params.seed, &[0x0067_656e]);
    let n = params.projects;
    let periods = params.periods;

    let projects: Vec<Project> = (1..=n)
        .map(|id| {
            let cost = cents(rng.gen_range(10.0..=150.0));
            let ret = cents(rng.gen_range(0.5 * cost..=3.0 * cost));
            Project::flat(id, format!("P{id}"), cost, ret, periods)
        })
        .collect();

    let mut edges = Vec::new();
    for pred in 1..=n {
        for dep in pred + 1..=n {
            if !rng.gen_bool(params.edge_density) {
                continue;
            }
            let level = if rng.gen_bool(params.partial_fraction) {
                cents(rng.gen_range(0.01..=0.99))
            } else {
                1.0
            };
            edges.push(DependencyEdge {
                predecessor: pred,
                dependent: dep,
                level,
                option_value: cents(rng.gen_range(0.0..=20.0)),
            });
        }
    }

    let total_cost: f64 = projects.iter().map(|p| p.cost_pv[0]).sum();
    let budget = cents(params.budget_tightness * total_cost / periods as f64).max(0.01);
    let q_min = (n / periods).saturating_sub(1);
    let q_max = (n.div_ceil(periods) + 1).min(n);

    Ok(Instance::new(
        projects,
        edges,
        vec![budget; periods],
        vec![q_min; periods],
        vec![q_max; periods],
    )
    .with_mode(DependencyMode::Hard))
}
