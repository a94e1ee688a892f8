//! Random polytope construction and the variation operators.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng as _;

use crate::polytope_gen::individual::{ClusterProblem, EvaluatedPolytope, Individual};
use crate::rng::Rng;
use crate::scalar::Real;

/// Mutation kinds, drawn uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    Replace,
    Add,
    Remove,
    Extend,
}

impl Mutation {
    pub const ALL: [Mutation; 4] = [Mutation::Replace, Mutation::Add, Mutation::Remove, Mutation::Extend];
}

/// Pool planes reachable from `seed` through the neighborhood graph.
fn component<T: Real>(problem: &ClusterProblem<'_, T>, seed: usize) -> BTreeSet<usize> {
    let allowed: BTreeSet<usize> = problem.pool.iter().copied().collect();
    let mut seen = BTreeSet::from([seed]);
    let mut stack = vec![seed];
    while let Some(i) = stack.pop() {
        for j in problem.graph.neighbors(i) {
            if allowed.contains(&j) && seen.insert(j) {
                stack.push(j);
            }
        }
    }
    seen
}

/// Random plane subset: a uniform seed plane from the cluster plus 3 to 12 planes
/// collected by a randomized breadth-first walk over the neighborhood graph,
/// restricted to the pool.
///
/// If fewer than four planes are reachable the walk runs over the complete graph
/// on the candidate planes.
pub fn random_plane_walk<T: Real>(problem: &ClusterProblem<'_, T>, rng: &mut Rng) -> Vec<usize> {
    let cands = &problem.candidates;
    if cands.is_empty() {
        return Vec::new();
    }
    let seed = cands[rng.gen_range(0..cands.len())];
    let p = problem.params;
    let target = rng.gen_range(p.min_walk..=p.max_walk);
    let reachable = component(problem, seed);
    let complete = reachable.len() < 4;
    let mut chosen = BTreeSet::from([seed]);
    let mut frontier = BTreeSet::new();
    let extend_frontier = |i: usize, chosen: &BTreeSet<usize>, frontier: &mut BTreeSet<usize>| {
        if complete {
            frontier.extend(cands.iter().copied().filter(|j| !chosen.contains(j)));
        } else {
            frontier.extend(problem.graph.neighbors(i).into_iter().filter(|j| reachable.contains(j) && !chosen.contains(j)));
        }
    };
    extend_frontier(seed, &chosen, &mut frontier);
    let mut added = 0;
    while added < target && !frontier.is_empty() {
        let pick = *frontier.iter().nth(rng.gen_range(0..frontier.len())).expect("non-empty frontier");
        frontier.remove(&pick);
        chosen.insert(pick);
        added += 1;
        extend_frontier(pick, &chosen, &mut frontier);
        frontier.retain(|j| !chosen.contains(j));
    }
    chosen.into_iter().collect()
}

/// Draws plane walks until one bounds a polytope, at most `max_retries` times.
pub fn random_polytope<T: Real>(problem: &ClusterProblem<'_, T>, rng: &mut Rng) -> Option<Arc<EvaluatedPolytope<T>>> {
    (0..problem.params.max_retries.max(1)).find_map(|_| {
        let ids = random_plane_walk(problem, rng);
        problem.evaluate(&ids)
    })
}

/// Swaps a random contiguous range of `a` with one of `b`.
///
/// Both ranges are non-empty, so neither child can end up empty, and the
/// multiset union of the children equals that of the parents.
pub fn crossover<E: Clone>(a: &[E], b: &[E], rng: &mut Rng) -> (Vec<E>, Vec<E>) {
    if a.is_empty() || b.is_empty() {
        return (a.to_vec(), b.to_vec());
    }
    let range = |n: usize, rng: &mut Rng| {
        let start = rng.gen_range(0..n);
        let len = rng.gen_range(1..=n - start);
        start..start + len
    };
    let ra = range(a.len(), rng);
    let rb = range(b.len(), rng);
    let mut ca = a[..ra.start].to_vec();
    ca.extend_from_slice(&b[rb.clone()]);
    ca.extend_from_slice(&a[ra.end..]);
    let mut cb = b[..rb.start].to_vec();
    cb.extend_from_slice(&a[ra]);
    cb.extend_from_slice(&b[rb.end..]);
    (ca, cb)
}

/// Applies one uniformly drawn mutation.
pub fn mutate<T: Real>(problem: &ClusterProblem<'_, T>, ind: &Individual<T>, rng: &mut Rng) -> Individual<T> {
    let kind = Mutation::ALL[rng.gen_range(0..Mutation::ALL.len())];
    mutate_with(problem, ind, kind, rng)
}

/// Applies the given mutation; failed sub-steps leave the individual unchanged.
pub fn mutate_with<T: Real>(problem: &ClusterProblem<'_, T>, ind: &Individual<T>, kind: Mutation, rng: &mut Rng) -> Individual<T> {
    if ind.is_empty() {
        return ind.clone();
    }
    let mut polys = ind.polytopes.clone();
    match kind {
        Mutation::Replace => {
            let i = rng.gen_range(0..polys.len());
            match random_polytope(problem, rng) {
                Some(p) => polys[i] = p,
                None => return ind.clone(),
            }
        }
        Mutation::Add => {
            if polys.len() >= problem.params.n_i_max {
                return ind.clone();
            }
            match random_polytope(problem, rng) {
                Some(p) => polys.push(p),
                None => return ind.clone(),
            }
        }
        Mutation::Remove => {
            if polys.len() <= 1 {
                return ind.clone();
            }
            polys.remove(rng.gen_range(0..polys.len()));
        }
        Mutation::Extend => {
            let i = rng.gen_range(0..polys.len());
            let pool = &problem.pool;
            let plane = pool[rng.gen_range(0..pool.len())];
            let mut ids = polys[i].key().to_vec();
            if ids.contains(&plane) {
                return ind.clone();
            }
            ids.push(plane);
            match problem.evaluate(&ids) {
                Some(p) => polys[i] = p,
                None => return ind.clone(),
            }
        }
    }
    problem.individual(polys)
}
