//! Genetic algorithm over period assignments.
//!
//! Individuals are integer gene vectors (period per project), so crossover
//! and mutation never leave the space of valid schedules; raw bit-matrix
//! chromosomes enter through [`repair`]. Selection is a tournament under the
//! feasibility-first comparator, and the best `elite_count` individuals are
//! carried over unchanged each generation.
//!
//! Every random draw comes from a ChaCha stream keyed by
//! `(seed, restart, generation, slot)`, so a run is bit-for-bit reproducible
//! regardless of how evaluation and breeding are spread over threads.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::model::{validate_structure, Chromosome, Instance, Schedule};
use crate::par::Execution;
use crate::valuation::{better_order, evaluate, EvaluationBreakdown};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaError {
    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    /// Generations without improvement of the restart's best before giving up.
    pub stagnation_limit: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-gene probability; `None` means `1 / n_p`.
    pub mutation_rate: Option<f64>,
    pub elite_count: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            max_generations: 200,
            stagnation_limit: 50,
            tournament_size: 3,
            crossover_rate: 0.8,
            mutation_rate: None,
            elite_count: 2,
            restarts: 1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<(), GaError> {
        let fail = |msg: String| Err(GaError::InvalidConfig(msg));
        if self.population_size < 2 {
            return fail(format!("population_size {} < 2", self.population_size));
        }
        if self.elite_count >= self.population_size {
            return fail(format!(
                "elite_count {} must be < population_size {}",
                self.elite_count, self.population_size
            ));
        }
        if self.tournament_size < 1 {
            return fail("tournament_size must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return fail(format!(
                "crossover_rate {} not in [0, 1]",
                self.crossover_rate
            ));
        }
        if let Some(m) = self.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return fail(format!("mutation_rate {m} not in [0, 1]"));
            }
        }
        if self.max_generations < 1 {
            return fail("max_generations must be >= 1".into());
        }
        if self.restarts < 1 {
            return fail("restarts must be >= 1".into());
        }
        Ok(())
    }

    pub fn mutation_rate_for(&self, n_projects: usize) -> f64 {
        self.mutation_rate
            .unwrap_or_else(|| 1.0 / n_projects.max(1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxGenerations,
    Stagnation,
}

/// One line of the convergence trace. `best_*` describe the incumbent (best
/// individual seen so far in the run); the other columns describe the
/// current population.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub generation: usize,
    pub best_value: f64,
    pub mean_feasible_value: Option<f64>,
    pub feasible_count: usize,
    pub best_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub best_schedule: Schedule,
    pub best_breakdown: EvaluationBreakdown,
    pub generations_run: usize,
    pub trace: Vec<TraceRow>,
    pub terminated_by: Termination,
}

impl SolveResult {
    /// `false` means no feasible schedule was found; the best infeasible one
    /// is still reported.
    pub fn is_feasible(&self) -> bool {
        self.best_breakdown.feasible
    }
}

pub const TRACE_CSV_HEADER: &str =
    "generation,best_value,mean_feasible_value,feasible_count,best_violation";

/// Trace as CSV with six decimals; the mean column is empty when the
/// population holds no feasible individual.
pub fn trace_to_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for row in trace {
        let mean = row
            .mean_feasible_value
            .map(|m| format!("{m:.6}"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:.6},{},{},{:.6}",
            row.generation, row.best_value, mean, row.feasible_count, row.best_violation
        );
    }
    out
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent random stream for one `(seed, tags...)` coordinate.
pub fn substream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let key = tags
        .iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)));
    ChaCha8Rng::seed_from_u64(key)
}

/// Turns an arbitrary bit matrix into a schedule: one-hot rows map directly,
/// rows with several set bits keep one of them at random, empty rows get a
/// uniformly random period.
pub fn repair<R: Rng + ?Sized>(c: &Chromosome, rng: &mut R) -> Schedule {
    let periods = c.n_periods();
    let period_of = (0..c.n_projects())
        .map(|i| {
            let set: Vec<usize> = c
                .row(i)
                .iter()
                .enumerate()
                .filter_map(|(k, &b)| b.then_some(k + 1))
                .collect();
            match set.len() {
                1 => set[0],
                0 => rng.gen_range(1..=periods),
                n => set[rng.gen_range(0..n)],
            }
        })
        .collect();
    Schedule::from_vec_unchecked(period_of)
}

/// Best of `k` individuals drawn uniformly with replacement.
pub fn tournament_select<'a, R: Rng + ?Sized>(
    population: &'a [EvaluationBreakdown],
    k: usize,
    rng: &mut R,
) -> &'a EvaluationBreakdown {
    assert!(
        !population.is_empty(),
        "tournament over an empty population"
    );
    let mut best = population.choose(rng).unwrap();
    for _ in 1..k {
        let challenger = population.choose(rng).unwrap();
        if better_order(challenger, best) == Ordering::Greater {
            best = challenger;
        }
    }
    best
}

/// Swaps the tails of `a` and `b` after the first `cut` genes.
pub fn one_point_crossover(a: &Schedule, b: &Schedule, cut: usize) -> (Schedule, Schedule) {
    let (a, b) = (a.period_of(), b.period_of());
    let mut c1 = a[..cut].to_vec();
    c1.extend_from_slice(&b[cut..]);
    let mut c2 = b[..cut].to_vec();
    c2.extend_from_slice(&a[cut..]);
    (
        Schedule::from_vec_unchecked(c1),
        Schedule::from_vec_unchecked(c2),
    )
}

/// With probability `rate`, one-point crossover at a uniform cut in
/// `1..n_p`; otherwise the parents are returned unchanged.
pub fn crossover<R: Rng + ?Sized>(
    a: &Schedule,
    b: &Schedule,
    rate: f64,
    rng: &mut R,
) -> (Schedule, Schedule) {
    assert_eq!(a.len(), b.len(), "crossover parents differ in length");
    if a.len() < 2 || !rng.gen_bool(rate) {
        return (a.clone(), b.clone());
    }
    let cut = rng.gen_range(1..a.len());
    one_point_crossover(a, b, cut)
}

/// Each gene, with probability `rate`, moves to a different uniformly
/// chosen period.
pub fn mutate<R: Rng + ?Sized>(s: &Schedule, rate: f64, n_periods: usize, rng: &mut R) -> Schedule {
    if n_periods < 2 {
        return s.clone();
    }
    let period_of = s
        .period_of()
        .iter()
        .map(|&k| {
            if rng.gen_bool(rate) {
                // uniform over the other N - 1 periods
                let draw = rng.gen_range(1..n_periods);
                if draw >= k {
                    draw + 1
                } else {
                    draw
                }
            } else {
                k
            }
        })
        .collect();
    Schedule::from_vec_unchecked(period_of)
}

/// Cheapest projects first, each into the earliest period that still has
/// budget and cardinality room; leftovers go to the roomiest period.
pub fn greedy_schedule(inst: &Instance) -> Schedule {
    let periods = inst.n_periods();
    let mut order: Vec<usize> = (0..inst.n_projects()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (inst.projects()[a].cost_pv[0], inst.projects()[b].cost_pv[0]);
        ca.total_cmp(&cb).then(a.cmp(&b))
    });
    let mut spent = vec![0.0; periods];
    let mut count = vec![0usize; periods];
    let mut period_of = vec![1; inst.n_projects()];
    for i in order {
        let cost = &inst.projects()[i].cost_pv;
        let fits = (0..periods)
            .find(|&k| count[k] < inst.q_max()[k] && spent[k] + cost[k] <= inst.budgets()[k]);
        let k = fits.unwrap_or_else(|| {
            (0..periods)
                .max_by(|&a, &b| {
                    let ra = inst.budgets()[a] - spent[a];
                    let rb = inst.budgets()[b] - spent[b];
                    ra.total_cmp(&rb).then(b.cmp(&a))
                })
                .unwrap()
        });
        spent[k] += cost[k];
        count[k] += 1;
        period_of[i] = k + 1;
    }
    Schedule::from_vec_unchecked(period_of)
}

fn random_schedule<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Schedule {
    let periods = inst.n_periods();
    Schedule::from_vec_unchecked(
        (0..inst.n_projects())
            .map(|_| rng.gen_range(1..=periods))
            .collect(),
    )
}

/// Runs the GA on the default execution policy.
pub fn run_ga(inst: &Instance, cfg: &GaConfig) -> Result<SolveResult, GaError> {
    run_ga_with(inst, cfg, Execution::default())
}

pub fn run_ga_with(
    inst: &Instance,
    cfg: &GaConfig,
    exec: Execution,
) -> Result<SolveResult, GaError> {
    let violations = validate_structure(inst);
    if !violations.is_empty() {
        return Err(GaError::InvalidInstance(violations));
    }
    cfg.validate()?;

    let mutation_rate = cfg.mutation_rate_for(inst.n_projects());
    let periods = inst.n_periods();
    let mut trace = Vec::new();
    let mut incumbent: Option<EvaluationBreakdown> = None;
    let mut terminated_by = Termination::MaxGenerations;

    for restart in 0..cfg.restarts as u64 {
        let initial: Vec<Schedule> = exec.map_indexed(cfg.population_size, |idx| {
            if restart == 0 && idx == 0 {
                greedy_schedule(inst)
            } else {
                let mut rng = substream(cfg.seed, &[restart, 0, idx as u64]);
                random_schedule(inst, &mut rng)
            }
        });
        let mut population = exec.map_slice(&initial, |s| evaluate(s, inst));
        let mut restart_best: Option<EvaluationBreakdown> = None;
        let mut stagnant = 0usize;

        for generation in 0..cfg.max_generations {
            population.sort_by(|a, b| better_order(b, a));
            let leader = &population[0];

            match &restart_best {
                Some(best) if better_order(leader, best) != Ordering::Greater => stagnant += 1,
                _ => {
                    restart_best = Some(leader.clone());
                    stagnant = 0;
                }
            }
            if incumbent
                .as_ref()
                .is_none_or(|best| better_order(leader, best) == Ordering::Greater)
            {
                incumbent = Some(leader.clone());
            }
            let best = incumbent.as_ref().unwrap();

            let feasible: Vec<f64> = population
                .iter()
                .filter(|b| b.feasible)
                .map(|b| b.total_value)
                .collect();
            trace.push(TraceRow {
                generation: trace.len(),
                best_value: best.total_value,
                mean_feasible_value: (!feasible.is_empty())
                    .then(|| feasible.iter().sum::<f64>() / feasible.len() as f64),
                feasible_count: feasible.len(),
                best_violation: best.total_violation,
            });

            if stagnant >= cfg.stagnation_limit {
                terminated_by = Termination::Stagnation;
                break;
            }
            if generation + 1 == cfg.max_generations {
                terminated_by = Termination::MaxGenerations;
                break;
            }

            let n_children = cfg.population_size - cfg.elite_count;
            let slot_gen = generation as u64 + 1;
            let parents = &population;
            let children: Vec<Schedule> = exec
                .map_indexed(n_children.div_ceil(2), |pair| {
                    let mut rng = substream(cfg.seed, &[restart, slot_gen, pair as u64]);
                    let a = tournament_select(parents, cfg.tournament_size, &mut rng);
                    let b = tournament_select(parents, cfg.tournament_size, &mut rng);
                    let (c1, c2) =
                        crossover(&a.schedule, &b.schedule, cfg.crossover_rate, &mut rng);
                    [
                        mutate(&c1, mutation_rate, periods, &mut rng),
                        mutate(&c2, mutation_rate, periods, &mut rng),
                    ]
                })
                .into_iter()
                .flatten()
                .take(n_children)
                .collect();
            let offspring = exec.map_slice(&children, |s| evaluate(s, inst));
            population.truncate(cfg.elite_count);
            population.extend(offspring);
        }
    }

    let best = incumbent.expect("at least one generation runs");
    Ok(SolveResult {
        best_schedule: best.schedule.clone(),
        best_breakdown: best,
        generations_run: trace.len(),
        trace,
        terminated_by,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::{case_study, CASE_STUDY_CHROMOSOME, CASE_STUDY_OPTIMUM};
    use crate::model::Project;
    use rand::rngs::mock::StepRng;

    fn sched(v: &[usize]) -> Schedule {
        Schedule::from_vec_unchecked(v.to_vec())
    }

    #[test]
    fn repair_passes_valid_rows_through() {
        let c: Chromosome = CASE_STUDY_CHROMOSOME.parse().unwrap();
        let mut rng = substream(7, &[]);
        assert_eq!(repair(&c, &mut rng).period_of(), &CASE_STUDY_OPTIMUM);
    }

    #[test]
    fn repair_full_row_with_forced_draw() {
        let c: Chromosome = "111".parse().unwrap();
        let mut rng = StepRng::new(0, 0);
        assert_eq!(repair(&c, &mut rng).period_of(), &[1]);
    }

    #[test]
    fn repair_picks_among_set_bits() {
        let c: Chromosome = "0101\n0000".parse().unwrap();
        for seed in 0..200 {
            let s = repair(&c, &mut substream(seed, &[]));
            assert!(s.period(0) == 2 || s.period(0) == 4);
            assert!((1..=4).contains(&s.period(1)));
        }
    }

    #[test]
    fn crossover_textbook_case() {
        let (c1, c2) = one_point_crossover(&sched(&[1, 2, 3]), &sched(&[3, 2, 1]), 1);
        assert_eq!(c1.period_of(), &[1, 2, 1]);
        assert_eq!(c2.period_of(), &[3, 2, 3]);
    }

    #[test]
    fn crossover_rate_zero_is_identity() {
        let a = sched(&[1, 2, 3, 1]);
        let b = sched(&[3, 3, 1, 2]);
        for seed in 0..50 {
            let (c1, c2) = crossover(&a, &b, 0.0, &mut substream(seed, &[]));
            assert_eq!((c1, c2), (a.clone(), b.clone()));
        }
        let single = sched(&[2]);
        let (c1, _) = crossover(&single, &sched(&[1]), 1.0, &mut substream(0, &[]));
        assert_eq!(c1, single);
    }

    #[test]
    fn mutation_extremes() {
        let s = sched(&[1, 2, 2, 1, 2]);
        let mut rng = substream(3, &[]);
        assert_eq!(mutate(&s, 0.0, 2, &mut rng), s);
        assert_eq!(mutate(&s, 1.0, 2, &mut rng).period_of(), &[2, 1, 1, 2, 1]);
        let moved = mutate(&s, 1.0, 5, &mut rng);
        assert!(moved
            .period_of()
            .iter()
            .zip(s.period_of())
            .all(|(a, b)| a != b && (1..=5).contains(a)));
        assert_eq!(mutate(&sched(&[1, 1]), 1.0, 1, &mut rng), sched(&[1, 1]));
    }

    #[test]
    fn mutation_changes_about_one_gene() {
        // expected changes per call = n_p * (1 / n_p) = 1, variance = 1 - 1/n_p
        let n = 8;
        let s = sched(&[1; 8]);
        let trials = 10_000;
        let mut rng = substream(11, &[]);
        let changed: usize = (0..trials)
            .map(|_| {
                let m = mutate(&s, 1.0 / n as f64, 3, &mut rng);
                m.period_of().iter().filter(|&&k| k != 1).count()
            })
            .sum();
        let mean = changed as f64 / trials as f64;
        let sigma = ((1.0 - 1.0 / n as f64) / trials as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * sigma, "mean {mean}");
    }

    fn evaluated(inst: &Instance, schedules: &[&[usize]]) -> Vec<EvaluationBreakdown> {
        schedules
            .iter()
            .map(|s| evaluate(&Schedule::for_instance(s.to_vec(), inst).unwrap(), inst))
            .collect()
    }

    #[test]
    fn tournament_prefers_feasible() {
        let inst = case_study();
        let pop = evaluated(&inst, &[&CASE_STUDY_OPTIMUM, &[1; 7]]);
        let mut rng = substream(5, &[]);
        let mut feasible_hits = 0;
        for _ in 0..1000 {
            let winner = tournament_select(&pop, 2, &mut rng);
            if winner.feasible {
                feasible_hits += 1;
            }
        }
        // a size-2 tournament only misses the feasible one when it draws the
        // infeasible individual twice
        assert!(
            feasible_hits > 650 && feasible_hits < 850,
            "{feasible_hits}"
        );
    }

    #[test]
    fn tournament_pressure() {
        let inst = Instance::new(
            (1..=4)
                .map(|i| Project::flat(i, "", 1.0, 1.0 + i as f64, 2))
                .collect(),
            vec![],
            vec![100.0; 2],
            vec![0; 2],
            vec![4; 2],
        );
        let schedules: Vec<Vec<usize>> = (0..16)
            .map(|m| (0..4).map(|b| ((m >> b) & 1) + 1).collect())
            .collect();
        let pop: Vec<_> = schedules
            .iter()
            .map(|s| evaluate(&Schedule::for_instance(s.clone(), &inst).unwrap(), &inst))
            .collect();
        let best = pop
            .iter()
            .max_by(|a, b| better_order(a, b))
            .unwrap()
            .clone();
        let mut rng = substream(9, &[]);
        let draws = 10_000;
        let hits = (0..draws)
            .filter(|_| *tournament_select(&pop, 3, &mut rng) == best)
            .count();
        // P(best in 3 draws) = 1 - (15/16)^3 ~ 0.176 versus 1/16 uniform
        assert!(hits as f64 / draws as f64 > 1.0 / 16.0 * 2.0, "{hits}");

        let uniform = (0..draws)
            .filter(|_| *tournament_select(&pop, 1, &mut rng) == best)
            .count();
        assert!((uniform as f64 / draws as f64 - 1.0 / 16.0).abs() < 0.015);
    }

    #[test]
    fn greedy_fills_cheapest_first() {
        let inst = case_study();
        // 1, 5, 2 fill period 1; 6 and 4 go to period 2, 3 to period 3 and
        // 7 fits nowhere so it lands where most budget is left (period 3)
        assert_eq!(greedy_schedule(&inst).period_of(), &[1, 1, 3, 2, 1, 2, 3]);

        let roomy = inst.with_budgets(vec![1000.0; 3]);
        let b = evaluate(&greedy_schedule(&roomy), &roomy);
        assert!(b.violations.budget_excess.iter().all(|&x| x == 0.0));
        assert!(b.violations.cardinality_excess.iter().all(|&x| x == 0));
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        let bad = GaConfig {
            elite_count: 100,
            ..GaConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = GaConfig {
            population_size: 1,
            elite_count: 0,
            ..GaConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = GaConfig {
            mutation_rate: Some(1.5),
            ..GaConfig::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(GaConfig::default().mutation_rate_for(4), 0.25);
    }

    #[test]
    fn fixture_optimum_found() {
        let inst = case_study();
        let result = run_ga(&inst, &GaConfig::default().with_seed(42)).unwrap();
        assert!(result.is_feasible());
        assert_eq!(result.best_breakdown.total_value, 203.0);
        assert_eq!(result.best_schedule.period_of(), &CASE_STUDY_OPTIMUM);
        assert_eq!(result.trace.len(), result.generations_run);
    }

    #[test]
    fn single_schedule_space() {
        let inst = Instance::new(
            (1..=3).map(|i| Project::flat(i, "", 1.0, 2.0, 1)).collect(),
            vec![],
            vec![10.0],
            vec![3],
            vec![3],
        );
        let cfg = GaConfig {
            stagnation_limit: 1,
            ..GaConfig::default()
        };
        let r = run_ga(&inst, &cfg).unwrap();
        assert_eq!(r.best_schedule.period_of(), &[1, 1, 1]);
        assert_eq!(r.trace[0].best_value, 3.0);
        assert_eq!(r.terminated_by, Termination::Stagnation);
    }

    #[test]
    fn infeasible_instance_still_reports_best() {
        let inst = Instance::new(
            vec![Project::flat(1, "", 50.0, 60.0, 2)],
            vec![],
            vec![10.0, 20.0],
            vec![0, 0],
            vec![1, 1],
        );
        let cfg = GaConfig {
            max_generations: 5,
            ..GaConfig::default()
        };
        let r = run_ga(&inst, &cfg).unwrap();
        assert!(!r.is_feasible());
        // 30 over in period 2 beats 40 over in period 1
        assert_eq!(r.best_schedule.period_of(), &[2]);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let inst = case_study().with_cardinality(2, 1);
        assert!(matches!(
            run_ga(&inst, &GaConfig::default()),
            Err(GaError::InvalidInstance(_))
        ));
    }

    #[test]
    fn trace_csv_format() {
        let rows = vec![
            TraceRow {
                generation: 0,
                best_value: 1.5,
                mean_feasible_value: None,
                feasible_count: 0,
                best_violation: 0.25,
            },
            TraceRow {
                generation: 1,
                best_value: 203.0,
                mean_feasible_value: Some(100.0 / 3.0),
                feasible_count: 3,
                best_violation: 0.0,
            },
        ];
        assert_eq!(
            trace_to_csv(&rows),
            "generation,best_value,mean_feasible_value,feasible_count,best_violation\n\
             0,1.500000,,0,0.250000\n\
             1,203.000000,33.333333,3,0.000000\n"
        );
    }
}
