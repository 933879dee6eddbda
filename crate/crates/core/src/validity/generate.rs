//! Bounded-exhaustive and seeded-random model generators.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::GameModel;

/// Exact sizes for generated models.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorBounds {
    pub agents: usize,
    pub states: usize,
    /// Actions per agent per state.
    pub actions: usize,
    pub atoms: Vec<String>,
}

impl GeneratorBounds {
    pub fn new(agents: usize, states: usize, actions: usize, atoms: &[&str]) -> Self {
        GeneratorBounds {
            agents,
            states,
            actions,
            atoms: atoms.iter().map(|a| a.to_string()).collect(),
        }
    }

    pub fn check(&self) -> Result<(), GenerateError> {
        if self.agents == 0 || self.states == 0 || self.actions == 0 {
            return Err(GenerateError::ZeroBound);
        }
        if self.agents > 26 || self.states > 64 {
            return Err(GenerateError::TooLarge);
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("all bounds must be at least 1")]
    ZeroBound,
    #[error("at most 26 agents and 64 states are supported")]
    TooLarge,
    #[error("the family has {count} models, above the cap of {cap}")]
    CapExceeded { count: u128, cap: u128 },
}

pub const DEFAULT_CAP: u128 = 1_000_000;

fn agent_name(a: usize) -> String {
    ((b'a' + a as u8) as char).to_string()
}

/// Assembles a model from per-state action counts, outcome rows and a
/// labelling given as one atom bitmask per state.
fn assemble(agents: usize, counts: &[Vec<usize>], outcomes: Vec<Vec<usize>>, labels: &[u64], atoms: &[String]) -> GameModel {
    let agent_names: Vec<String> = (0..agents).map(agent_name).collect();
    let states: Vec<String> = (0..counts.len()).map(|s| format!("s{s}")).collect();
    let actions = counts
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(a, &k)| (1..=k).map(|i| format!("{}{i}", agent_names[a])).collect())
                .collect()
        })
        .collect();
    let mut valuation: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (i, atom) in atoms.iter().enumerate() {
        let members = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l & (1 << i) != 0)
            .map(|(s, _)| s)
            .collect();
        valuation.insert(atom.clone(), members);
    }
    GameModel::from_tables(agent_names, states, actions, outcomes, valuation)
        .expect("generated models are total by construction")
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base))
}

/// Number of models with exactly the given sizes.
pub fn count_models(bounds: &GeneratorBounds) -> Option<u128> {
    let n = bounds.states as u128;
    let profiles = bounds.actions.checked_pow(bounds.agents as u32)?;
    let per_state = checked_pow(n, profiles)?;
    let outcomes = checked_pow(per_state, bounds.states)?;
    let labels = checked_pow(checked_pow(2, bounds.atoms.len())?, bounds.states)?;
    outcomes.checked_mul(labels)
}

/// Mixed-radix odometer; returns false after the last value.
fn advance(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// Every model of one shape (action counts per state and agent): all
/// outcome functions, then all labellings, in odometer order.
fn shape_models(agents: usize, counts: Vec<Vec<usize>>, atoms: Vec<String>) -> impl Iterator<Item = GameModel> {
    let states = counts.len();
    let row_len: Vec<usize> = counts.iter().map(|r| r.iter().product()).collect();
    let offsets: Vec<usize> = row_len
        .iter()
        .scan(0, |acc, &l| {
            let o = *acc;
            *acc += l;
            Some(o)
        })
        .collect();
    let total: usize = row_len.iter().sum();
    let label_radix = 1usize << atoms.len();
    let mut digits = vec![0usize; total];
    let mut labels = vec![0usize; states];
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let outcomes = (0..states)
            .map(|s| digits[offsets[s]..offsets[s] + row_len[s]].to_vec())
            .collect();
        let masks: Vec<u64> = labels.iter().map(|&l| l as u64).collect();
        let model = assemble(agents, &counts, outcomes, &masks, &atoms);
        if !advance(&mut labels, |_| label_radix) && !advance(&mut digits, |_| states) {
            done = true;
        }
        Some(model)
    })
}

/// Every model with exactly the given sizes, in a fixed order. Refuses
/// families larger than `cap`.
pub fn enumerate_models(bounds: &GeneratorBounds, cap: u128) -> Result<impl Iterator<Item = GameModel>, GenerateError> {
    bounds.check()?;
    let count = count_models(bounds).unwrap_or(u128::MAX);
    if count > cap {
        return Err(GenerateError::CapExceeded { count, cap });
    }
    let counts = vec![vec![bounds.actions; bounds.agents]; bounds.states];
    Ok(shape_models(bounds.agents, counts, bounds.atoms.clone()))
}

fn shapes(agents: usize, states: usize, max_actions: usize) -> Vec<Vec<Vec<usize>>> {
    let mut digits = vec![0usize; agents * states];
    let mut out = Vec::new();
    loop {
        out.push(digits.chunks(agents).map(|c| c.iter().map(|d| d + 1).collect()).collect());
        if !advance(&mut digits, |_| max_actions) {
            return out;
        }
    }
}

fn shape_count(shape: &[Vec<usize>], atoms: usize) -> Option<u128> {
    let states = shape.len();
    shape.iter().try_fold(checked_pow(2, atoms * states)?, |acc, row| {
        acc.checked_mul(checked_pow(states as u128, row.iter().product())?)
    })
}

/// Number of models with exactly `bounds.agents` agents, 1 to
/// `bounds.states` states and 1 to `bounds.actions` actions for each agent
/// at each state.
pub fn count_bounded(bounds: &GeneratorBounds) -> Option<u128> {
    (1..=bounds.states).try_fold(0u128, |acc, k| {
        shapes(bounds.agents, k, bounds.actions)
            .iter()
            .try_fold(acc, |acc, shape| acc.checked_add(shape_count(shape, bounds.atoms.len())?))
    })
}

/// Every model counted by [`count_bounded`]: by state count, then by
/// action shape, then as in [`enumerate_models`].
pub fn enumerate_bounded(bounds: &GeneratorBounds, cap: u128) -> Result<impl Iterator<Item = GameModel>, GenerateError> {
    bounds.check()?;
    let count = count_bounded(bounds).unwrap_or(u128::MAX);
    if count > cap {
        return Err(GenerateError::CapExceeded { count, cap });
    }
    let agents = bounds.agents;
    let atoms = bounds.atoms.clone();
    let max_actions = bounds.actions;
    Ok((1..=bounds.states)
        .flat_map(move |k| shapes(agents, k, max_actions))
        .flat_map(move |shape| shape_models(agents, shape, atoms.clone())))
}

fn random_with(rng: &mut ChaCha8Rng, agents: usize, states: usize, actions: usize, atoms: &[String]) -> GameModel {
    let counts = vec![vec![actions; agents]; states];
    let profiles = actions.pow(agents as u32);
    let outcomes = (0..states)
        .map(|_| (0..profiles).map(|_| rng.gen_range(0..states)).collect())
        .collect();
    let labels: Vec<u64> = (0..states).map(|_| rng.gen_range(0..1u64 << atoms.len())).collect();
    assemble(agents, &counts, outcomes, &labels, atoms)
}

/// A uniformly random model with exactly the given sizes; the same seed
/// always gives the same model.
pub fn random_model(bounds: &GeneratorBounds, seed: u64) -> GameModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_with(&mut rng, bounds.agents, bounds.states, bounds.actions, &bounds.atoms)
}

/// Random models whose sizes are drawn per model from inclusive ranges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomFamily {
    pub agents: (usize, usize),
    pub states: (usize, usize),
    pub actions: (usize, usize),
    pub atoms: Vec<String>,
    pub count: usize,
    pub seed: u64,
}

impl RandomFamily {
    /// Model `index` of the family, seeded by `seed + index`.
    pub fn model(&self, index: usize) -> GameModel {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(index as u64));
        let agents = rng.gen_range(self.agents.0..=self.agents.1);
        let states = rng.gen_range(self.states.0..=self.states.1);
        let actions = rng.gen_range(self.actions.0..=self.actions.1);
        random_with(&mut rng, agents, states, actions, &self.atoms)
    }

    pub fn check(&self) -> Result<(), GenerateError> {
        let lows = [self.agents.0, self.states.0, self.actions.0];
        if lows.contains(&0) || self.agents.0 > self.agents.1 || self.states.0 > self.states.1 || self.actions.0 > self.actions.1 {
            return Err(GenerateError::ZeroBound);
        }
        if self.agents.1 > 26 || self.states.1 > 64 {
            return Err(GenerateError::TooLarge);
        }
        Ok(())
    }
}
