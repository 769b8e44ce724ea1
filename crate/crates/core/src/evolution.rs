//! The environment outer loop: pick parents, mutate, filter children through
//! a validator, admit survivors and cull the oldest pairs.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{GenomeId, MutationConfig};
use crate::managers::{Pair, PairId};
use crate::runtime::seed::Seed;
use crate::solvers::Solver;
use crate::validators::{
    mc_range_validate, regret_validate, solvability_validate, McRange, Reason, ValidationOutcome, ValidatorKind,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub parents_per_step: usize,
    pub children_per_parent: usize,
    pub max_population: usize,
    #[serde(default)]
    pub mutation: MutationConfig,
    pub validator: ValidatorKind,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.parents_per_step == 0 || self.children_per_parent == 0 || self.max_population == 0 {
            return Err(Error::Config(
                "evolution parents_per_step, children_per_parent and max_population must be positive".into(),
            ));
        }
        if self.parents_per_step > self.max_population {
            return Err(Error::Config(format!(
                "parents_per_step {} exceeds max_population {}",
                self.parents_per_step, self.max_population
            )));
        }
        self.mutation.validate()?;
        self.validator.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildRecord {
    pub child_id: u64,
    pub parent_id: u64,
    pub reason: Reason,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionStepReport {
    pub proposed: usize,
    pub accepted: usize,
    pub rejected_by_reason: BTreeMap<Reason, usize>,
    pub culled_ids: Vec<u64>,
    pub children: Vec<ChildRecord>,
}

impl EvolutionStepReport {
    pub fn rejected(&self) -> usize {
        self.rejected_by_reason.values().sum()
    }
}

/// Indices of `k` parents drawn uniformly, without replacement unless `k`
/// exceeds the population.
pub fn select_parents(population_size: usize, k: usize, seed: Seed) -> Result<Vec<usize>> {
    if population_size == 0 {
        return Err(Error::EmptyPopulation);
    }
    let mut rng = seed.rng();
    if k <= population_size {
        Ok(sample(&mut rng, population_size, k).into_vec())
    } else {
        Ok((0..k).map(|_| rng.random_range(0..population_size)).collect())
    }
}

/// Everything an evolution step needs besides the population.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub solver: &'a Solver,
    pub loop_idx: u64,
    pub seed: Seed,
    /// First id handed to a proposed child; proposals consume ids in order.
    pub next_id: u64,
}

/// One evolution step. Returns the new population, the report and the next
/// unused id.
///
/// Children are validated in parallel; admission and culling happen
/// afterwards in proposal order. Pairs are culled oldest first by
/// `(birth_loop, id)`.
pub fn evolution_step(
    population: &[Pair],
    cfg: &EvolutionConfig,
    ctx: StepContext<'_>,
) -> Result<(Vec<Pair>, EvolutionStepReport, u64)> {
    cfg.validate()?;
    let parents = select_parents(population.len(), cfg.parents_per_step, ctx.seed.derive("parents", &[]))?;
    let proposals: Vec<(usize, u64)> = parents
        .iter()
        .flat_map(|&p| std::iter::repeat_n(p, cfg.children_per_parent))
        .enumerate()
        .map(|(i, p)| (p, ctx.next_id + i as u64))
        .collect();
    let next_id = ctx.next_id + proposals.len() as u64;

    let judged = ctx.solver.pool().map(&proposals, |i, &(p, child_id)| {
        let parent = &population[p];
        let genome = parent.genome.mutate(
            &cfg.mutation,
            GenomeId(child_id),
            ctx.loop_idx,
            ctx.seed.derive("mutate", &[i as u64]),
        )?;
        let outcome = judge(population, p, genome.level(), cfg, ctx, ctx.seed.derive("validate", &[i as u64]))?;
        Ok((genome, outcome))
    })?;

    let mut report = EvolutionStepReport {
        proposed: proposals.len(),
        accepted: 0,
        rejected_by_reason: BTreeMap::new(),
        culled_ids: Vec::new(),
        children: Vec::with_capacity(proposals.len()),
    };
    let mut next: Vec<Pair> = population.to_vec();
    for ((p, child_id), (genome, outcome)) in proposals.into_iter().zip(judged) {
        let parent = &population[p];
        report.children.push(ChildRecord {
            child_id,
            parent_id: parent.id.0,
            reason: outcome.reason,
            score: outcome.score,
        });
        if outcome.accepted {
            report.accepted += 1;
            next.push(Pair {
                id: PairId(child_id),
                genome,
                agent: parent.agent.clone(),
                birth_loop: ctx.loop_idx,
                steps_optimized: 0,
            });
        } else {
            *report.rejected_by_reason.entry(outcome.reason).or_default() += 1;
        }
    }

    if next.len() > cfg.max_population {
        let mut order: Vec<usize> = (0..next.len()).collect();
        order.sort_by_key(|&i| (next[i].birth_loop, next[i].id));
        let excess = next.len() - cfg.max_population;
        let doomed: Vec<PairId> = order[..excess].iter().map(|&i| next[i].id).collect();
        report.culled_ids = doomed.iter().map(|id| id.0).collect();
        next.retain(|p| !doomed.contains(&p.id));
    }
    Ok((next, report, next_id))
}

fn judge(
    population: &[Pair],
    parent: usize,
    child: &crate::maze::Level,
    cfg: &EvolutionConfig,
    ctx: StepContext<'_>,
    seed: Seed,
) -> Result<ValidationOutcome> {
    let solver = ctx.solver;
    match cfg.validator {
        ValidatorKind::Solvability {} => Ok(solvability_validate(child)),
        ValidatorKind::McRange { mc_min, mc_max, episodes } => mc_range_validate(
            &population[parent].agent,
            child,
            McRange::new(mc_min, mc_max)?,
            episodes,
            solver.horizon,
            seed,
        ),
        ValidatorKind::Regret { threshold, episodes } => {
            // The parent's own agent plays protagonist; the strongest other
            // archive agent plays antagonist (the parent itself when alone).
            let protagonist = solver.evaluate(&population[parent].agent, child, episodes, seed)?;
            let mut antagonist = if population.len() == 1 { protagonist } else { f64::NEG_INFINITY };
            for (i, pair) in population.iter().enumerate() {
                if i != parent {
                    antagonist = antagonist.max(solver.evaluate(&pair.agent, child, episodes, seed)?);
                }
            }
            Ok(regret_validate(antagonist, protagonist, threshold))
        }
    }
}
