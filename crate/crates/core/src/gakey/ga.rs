use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::individual::{crossover_one_point, fitness, mutate, Individual};
use super::oracle::{validate_regions, RoiOracle};
use crate::permkit::{apply_pbox, GrayImage};
use crate::rng::{mix, SplitMix64};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub max_generations: usize,
    pub mutation_prob: f64,
    /// Individuals carried over unchanged each generation.
    pub elitism: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 50,
            max_generations: 200,
            mutation_prob: 0.01,
            elitism: 25,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config("population must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(Error::Config(format!("mutation_prob {} outside [0, 1]", self.mutation_prob)));
        }
        if self.elitism == 0 || self.elitism >= self.population {
            return Err(Error::Config(format!(
                "elitism {} must lie in 1..{}",
                self.elitism, self.population
            )));
        }
        Ok(())
    }
}

/// Applies the candidate key to `cipher`, asks the oracle for regions and
/// fixes every unfixed cell whose pixel lands inside one. Fixed cells never
/// change.
pub fn evaluate(ind: &Individual, cipher: &GrayImage, oracle: &dyn RoiOracle) -> Result<Individual> {
    let key = ind.to_pbox();
    let decrypted = apply_pbox(cipher, &key)?;
    let regions = oracle.detect(&decrypted).map_err(|e| match e {
        Error::Oracle(msg) => Error::Oracle(format!("while evaluating candidate: {msg}")),
        other => Error::Oracle(format!("while evaluating candidate: {other}")),
    })?;
    validate_regions(&regions, ind.cells().len())?;
    let inv = key.inverse();
    let mut out = ind.clone();
    let cells = out.cells_mut();
    for r in &regions {
        for &q in &r.mask {
            let c = &mut cells[inv.table()[q] as usize];
            if c.state == 0 {
                c.state = r.id;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub generation: usize,
    pub best_fitness: f64,
    pub fixed_cells: usize,
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Individual,
    pub log: Vec<GenerationLog>,
    pub converged: bool,
}

impl GaOutcome {
    pub fn log_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.log {
            w.serialize(row).map_err(|e| Error::invalid(e.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn save_log(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.log_csv_bytes()?).map_err(|e| Error::io(path, e))
    }
}

fn evaluate_all(pop: Vec<Individual>, cipher: &GrayImage, oracle: &dyn RoiOracle) -> Result<Vec<Individual>> {
    pop.par_iter().map(|i| evaluate(i, cipher, oracle)).collect()
}

/// Sorts by fitness, best first; ties keep their order.
fn rank(pop: &mut [Individual]) {
    pop.sort_by(|a, b| fitness(b).total_cmp(&fitness(a)));
}

/// Generational search: evaluate, keep the `elitism` fittest, refill with
/// mutated one-point crossovers of random survivors. Stops at fitness 1 or
/// after `max_generations` and returns the best of the last population.
pub fn run_ga(cipher: &GrayImage, oracle: &dyn RoiOracle, cfg: &GaConfig) -> Result<GaOutcome> {
    cfg.validate()?;
    let dims = cipher.dims();
    let init: Vec<Individual> = (0..cfg.population)
        .map(|i| Individual::random(dims, &mut SplitMix64::stream(mix(cfg.seed, 0), i as u64)))
        .collect();
    let mut pop = evaluate_all(init, cipher, oracle)?;
    rank(&mut pop);
    let mut log = Vec::new();
    let record = |gen: usize, pop: &[Individual], log: &mut Vec<GenerationLog>| {
        log.push(GenerationLog {
            generation: gen,
            best_fitness: fitness(&pop[0]),
            fixed_cells: pop[0].fixed_count(),
        })
    };
    record(0, &pop, &mut log);
    for gen in 1..=cfg.max_generations {
        if fitness(&pop[0]) >= 1.0 {
            break;
        }
        pop.truncate(cfg.elitism);
        let children: Vec<Individual> = (0..cfg.population - cfg.elitism)
            .map(|c| {
                let mut rng = SplitMix64::stream(mix(cfg.seed, gen as u64), c as u64);
                let a = &pop[rng.below(cfg.elitism as u64) as usize];
                let b = &pop[rng.below(cfg.elitism as u64) as usize];
                let child = crossover_one_point(a, b, rng.next_u64())?;
                mutate(&child, cfg.mutation_prob, rng.next_u64())
            })
            .collect::<Result<_>>()?;
        pop.extend(evaluate_all(children, cipher, oracle)?);
        debug_assert!(pop.iter().all(Individual::is_permutation));
        rank(&mut pop);
        record(gen, &pop, &mut log);
    }
    let best = pop.swap_remove(0);
    Ok(GaOutcome {
        converged: fitness(&best) >= 1.0,
        best,
        log,
    })
}
