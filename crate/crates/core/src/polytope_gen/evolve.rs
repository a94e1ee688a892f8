//! Generational evolutionary search over polytope sets.

use std::cmp::Ordering;
use std::sync::Arc;

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polytope_gen::individual::{ClusterProblem, EvaluatedPolytope, Individual};
use crate::polytope_gen::operators::{crossover, mutate, random_polytope};
use crate::rng::{substream, Rng};
use crate::scalar::Real;

const TAG_INIT: u64 = 0x494e_4954;
const TAG_GEN: u64 = 0x4745_4e00;

#[derive(Debug, Clone)]
pub struct EvolveResult<T> {
    pub best: Individual<T>,
    /// Generations run, counting the initial population as the first.
    pub generations: usize,
    /// Best-ever score after each generation.
    pub trace: Vec<T>,
    pub evaluations: usize,
}

/// Per-cluster diagnostics for the run report.
#[derive(Debug, Clone, Serialize)]
pub struct EvolveSummary {
    pub generations: usize,
    pub best_score: f64,
    pub trace: Vec<f64>,
    pub polytope_count: usize,
    pub plane_sets: Vec<Vec<usize>>,
    pub polytope_scores: Vec<f64>,
    pub evaluations: usize,
}

impl<T: Real> EvolveResult<T> {
    pub fn summary(&self) -> EvolveSummary {
        EvolveSummary {
            generations: self.generations,
            best_score: self.best.score.as_f64(),
            trace: self.trace.iter().map(|v| v.as_f64()).collect(),
            polytope_count: self.best.len(),
            plane_sets: self.best.plane_sets(),
            polytope_scores: self.best.polytope_scores().iter().map(|v| v.as_f64()).collect(),
            evaluations: self.evaluations,
        }
    }
}

fn random_individual<T: Real>(problem: &ClusterProblem<'_, T>, rng: &mut Rng) -> Option<Individual<T>> {
    let count = rng.gen_range(1..=problem.params.n_i_max);
    let polys: Vec<_> = (0..count).filter_map(|_| random_polytope(problem, rng)).collect();
    (!polys.is_empty()).then(|| problem.individual(polys))
}

fn tournament<'p, T: Real>(pop: &'p [Individual<T>], size: usize, rng: &mut Rng) -> &'p Individual<T> {
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..size {
        let c = rng.gen_range(0..pop.len());
        if pop[c].score > pop[best].score || (pop[c].score == pop[best].score && c < best) {
            best = c;
        }
    }
    &pop[best]
}

fn best_index<T: Real>(pop: &[Individual<T>]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate() {
        if ind.score > pop[best].score {
            best = i;
        }
    }
    best
}

/// The `size` best polytopes of the population by volume term, distinct by plane set.
fn elite<T: Real>(pop: &[Individual<T>], size: usize) -> Vec<Arc<EvaluatedPolytope<T>>> {
    let mut all: Vec<Arc<EvaluatedPolytope<T>>> = pop.iter().flat_map(|i| i.polytopes.iter().cloned()).collect();
    all.sort_by(|a, b| b.fp.partial_cmp(&a.fp).unwrap_or(Ordering::Equal).then_with(|| a.key().cmp(b.key())));
    all.dedup_by(|a, b| a.key() == b.key());
    all.truncate(size.max(1));
    all
}

/// Runs the EA for one cluster and returns the best individual ever seen.
pub fn evolve<T: Real>(problem: &ClusterProblem<'_, T>, seed: u64) -> Result<EvolveResult<T>> {
    let p = problem.params;
    let mut population = Vec::with_capacity(p.population_size);
    for slot in 0..p.population_size {
        let mut rng = substream(seed, TAG_INIT, slot as u64);
        if let Some(ind) = random_individual(problem, &mut rng) {
            population.push(ind);
        }
    }
    if population.is_empty() {
        return Err(Error::NoBoundedPolytope);
    }
    // Refill slots whose draws all failed from the successful ones.
    let valid = population.len();
    for slot in valid..p.population_size {
        population.push(population[slot % valid].clone());
    }

    let mut best = population[best_index(&population)].clone();
    let mut trace = vec![best.score];
    let mut generations = 1;
    let mut stall = 0;
    while generations < p.max_iterations && stall < p.stall_limit {
        let mut rng = substream(seed, TAG_GEN, generations as u64);
        let mut next = Vec::with_capacity(p.population_size);
        next.push(best.clone());
        if p.elite_individual {
            let current = &population[best_index(&population)];
            next.push(problem.individual(elite(&population, current.len())));
        }
        while next.len() < p.population_size {
            let a = tournament(&population, p.tournament_size, &mut rng);
            let b = tournament(&population, p.tournament_size, &mut rng);
            let (ca, cb) = if rng.gen_bool(p.crossover_rate) {
                let (x, y) = crossover(&a.polytopes, &b.polytopes, &mut rng);
                (problem.individual(x), problem.individual(y))
            } else {
                (a.clone(), b.clone())
            };
            for child in [ca, cb] {
                if next.len() == p.population_size {
                    break;
                }
                let child = if rng.gen_bool(p.mutation_rate) { mutate(problem, &child, &mut rng) } else { child };
                next.push(child);
            }
        }
        population = next;
        generations += 1;
        let gen_best = &population[best_index(&population)];
        if gen_best.score > best.score {
            best = gen_best.clone();
            stall = 0;
        } else {
            stall += 1;
        }
        trace.push(best.score);
    }
    log::debug!("ea finished after {generations} generations, best {:?}", best.score.as_f64());
    Ok(EvolveResult { best, generations, trace, evaluations: problem.evaluations() })
}
