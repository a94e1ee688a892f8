use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Evolutionary search parameters. Lengths left as `None` are derived from the
/// model scale by [`EaConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EaConfig<T> {
    pub population_size: usize,
    pub max_iterations: usize,
    pub stall_limit: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub n_i_max: usize,
    pub eps_geo: Option<T>,
    pub eps_vol: Option<T>,
    pub voxel_cell: Option<T>,
    pub tournament_size: usize,
    pub filter_threshold: T,
    /// Divide the volume term by the number of polytopes.
    pub normalize_fp: bool,
    /// Search over all model planes instead of the cluster's planes.
    pub use_all_planes: bool,
    /// Add the individual assembled from the population's best polytopes each generation.
    pub elite_individual: bool,
    pub max_retries: usize,
    pub min_walk: usize,
    pub max_walk: usize,
}

impl<T: Real> Default for EaConfig<T> {
    fn default() -> Self {
        Self {
            population_size: 150,
            max_iterations: 300,
            stall_limit: 40,
            crossover_rate: 0.4,
            mutation_rate: 0.7,
            alpha: T::one(),
            beta: T::one(),
            gamma: T::lit(0.1),
            n_i_max: 10,
            eps_geo: None,
            eps_vol: None,
            voxel_cell: None,
            tournament_size: 2,
            filter_threshold: T::lit(0.5),
            normalize_fp: true,
            use_all_planes: false,
            elite_individual: true,
            max_retries: 20,
            min_walk: 3,
            max_walk: 12,
        }
    }
}

/// EA parameters with concrete lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct EaParams<T> {
    pub population_size: usize,
    pub max_iterations: usize,
    pub stall_limit: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub n_i_max: usize,
    pub eps_geo: T,
    pub eps_vol: T,
    pub voxel_cell: T,
    pub tournament_size: usize,
    pub filter_threshold: T,
    pub normalize_fp: bool,
    pub use_all_planes: bool,
    pub elite_individual: bool,
    pub max_retries: usize,
    pub min_walk: usize,
    pub max_walk: usize,
}

impl<T: Real> EaConfig<T> {
    /// `eps_geo = 2 ε`, `voxel_cell = diagonal / 50`, `eps_vol = voxel_cell` unless set.
    pub fn resolve(&self, diagonal: T, structuring_eps: T) -> Result<EaParams<T>> {
        let voxel_cell = self.voxel_cell.unwrap_or(diagonal / T::lit(50.0));
        let p = EaParams {
            population_size: self.population_size,
            max_iterations: self.max_iterations,
            stall_limit: self.stall_limit,
            crossover_rate: self.crossover_rate,
            mutation_rate: self.mutation_rate,
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            n_i_max: self.n_i_max,
            eps_geo: self.eps_geo.unwrap_or(T::lit(2.0) * structuring_eps),
            eps_vol: self.eps_vol.unwrap_or(voxel_cell),
            voxel_cell,
            tournament_size: self.tournament_size,
            filter_threshold: self.filter_threshold,
            normalize_fp: self.normalize_fp,
            use_all_planes: self.use_all_planes,
            elite_individual: self.elite_individual,
            max_retries: self.max_retries,
            min_walk: self.min_walk,
            max_walk: self.max_walk,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks the settings that do not depend on the cloud's scale.
    pub fn validate(&self) -> Result<()> {
        self.resolve(T::one(), T::lit(0.01)).map(|_| ())
    }
}

impl<T: Real> EaParams<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.population_size < 4 {
            return bad("ea.population_size must be at least 4");
        }
        if self.n_i_max == 0 {
            return bad("ea.n_i_max must be at least 1");
        }
        if self.alpha < T::zero() || self.beta < T::zero() || self.gamma < T::zero() {
            return bad("ea objective weights must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("ea rates must lie in [0, 1]");
        }
        if !(self.voxel_cell > T::zero() && self.eps_geo > T::zero()) || !self.eps_vol.is_finite() {
            return bad("ea lengths must be positive");
        }
        if self.tournament_size == 0 || self.max_iterations == 0 {
            return bad("ea.tournament_size and ea.max_iterations must be positive");
        }
        if self.min_walk > self.max_walk {
            return bad("ea.min_walk exceeds ea.max_walk");
        }
        Ok(())
    }
}
