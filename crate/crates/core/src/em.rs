//! EM selection over reduced parse forests.
//!
//! Every clause `i` offers a set `A_i` of parse types. Starting from unit
//! weights, each iteration turns the weights into per-clause conditionals
//! (normalizing within `A_i`) and averages the conditionals over all clauses
//! to obtain the next weights. Each step never decreases
//! `sum_i log sum_{j in A_i} p_j`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bank::{Bank, ParseForest, ParseType};
use crate::error::{Result, ValexError};

/// Default number of EM iterations.
pub const DEFAULT_EM_ITERS: usize = 10;

/// Relative tolerance under which two conditionals count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Parse-type weights `p_j^(n)` after `n` iterations.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    types: Vec<ParseType>,
    index: BTreeMap<ParseType, usize>,
    weights: Vec<f64>,
    iteration: usize,
}

impl WeightTable {
    /// The unnormalized starting table with every weight equal to 1.
    pub fn initial(bank: &Bank) -> WeightTable {
        let index: BTreeMap<ParseType, usize> = bank
            .forests()
            .iter()
            .flat_map(|f| f.parses().iter().map(|p| p.parse_type()))
            .map(|t| (t, 0))
            .collect();
        let types: Vec<ParseType> = index.keys().cloned().collect();
        let index = types.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let weights = vec![1.0; types.len()];
        WeightTable {
            types,
            index,
            weights,
            iteration: 1,
        }
    }

    /// A table with explicit weights, e.g. read back from disk.
    pub fn from_weights(weights: BTreeMap<ParseType, f64>, iteration: usize) -> WeightTable {
        let types: Vec<ParseType> = weights.keys().cloned().collect();
        let index = types.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        WeightTable {
            weights: weights.into_values().collect(),
            types,
            index,
            iteration,
        }
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn weight(&self, parse_type: &ParseType) -> Option<f64> {
        self.index.get(parse_type).map(|&i| self.weights[i])
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// Parse types with their weights in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&ParseType, f64)> {
        self.types.iter().zip(self.weights.iter().copied())
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn ids(&self, forest: &ParseForest) -> Result<Vec<usize>> {
        forest
            .parses()
            .iter()
            .map(|p| {
                self.index.get(&p.parse_type()).copied().ok_or_else(|| {
                    ValexError::data(format!(
                        "weight table lacks parse type {} of clause {}",
                        p.parse_type(),
                        forest.clause_id
                    ))
                })
            })
            .collect()
    }

    /// Conditionals `p_ji` of one forest, aligned with its parses.
    pub fn conditionals(&self, forest: &ParseForest) -> Result<Vec<f64>> {
        let ids = self.ids(forest)?;
        let mass = forest_mass(&self.weights, &ids);
        if mass <= 0.0 {
            return Err(ValexError::numeric(format!(
                "clause {} has zero total weight",
                forest.clause_id
            )));
        }
        Ok(ids.iter().map(|&j| self.weights[j] / mass).collect())
    }

    /// One conditional-then-average step.
    pub fn step(&self, bank: &Bank) -> Result<WeightTable> {
        if bank.is_empty() {
            return Err(ValexError::data("EM needs a nonempty bank"));
        }
        let mut acc = vec![0.0; self.weights.len()];
        for forest in bank.forests() {
            let ids = self.ids(forest)?;
            let mass = forest_mass(&self.weights, &ids);
            if mass <= 0.0 {
                return Err(ValexError::numeric(format!(
                    "clause {} has zero total weight",
                    forest.clause_id
                )));
            }
            for &j in &ids {
                acc[j] += self.weights[j] / mass;
            }
        }
        let m = bank.len() as f64;
        Ok(WeightTable {
            types: self.types.clone(),
            index: self.index.clone(),
            weights: acc.into_iter().map(|a| a / m).collect(),
            iteration: self.iteration + 1,
        })
    }
}

/// Sum of a forest's weights in canonical parse-type order.
fn forest_mass(weights: &[f64], ids: &[usize]) -> f64 {
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    sorted.iter().map(|&j| weights[j]).sum()
}

/// Runs EM up to iteration `n_iters` (the initial table is iteration 1).
pub fn em_weights(bank: &Bank, n_iters: usize) -> Result<WeightTable> {
    if bank.is_empty() {
        return Err(ValexError::data("EM needs a nonempty bank"));
    }
    if n_iters == 0 {
        return Err(ValexError::data("the number of EM iterations must be positive"));
    }
    let mut table = WeightTable::initial(bank);
    while table.iteration < n_iters {
        table = table.step(bank)?;
    }
    Ok(table)
}

/// `sum_i log sum_{j in A_i} p_j`; negative infinity when a clause has no mass.
pub fn log_likelihood(bank: &Bank, table: &WeightTable) -> Result<f64> {
    let mut total = 0.0;
    for forest in bank.forests() {
        let mass = forest_mass(&table.weights, &table.ids(forest)?);
        if mass <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += mass.ln();
    }
    Ok(total)
}

/// How a single parse is drawn from a forest.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SelectionPolicy {
    /// Shortest among the parses with the largest conditional.
    #[default]
    EmShort,
    /// Any parse with the largest conditional.
    EmMax,
    /// Any parse of minimal frame length.
    MinLength,
    /// Any parse.
    Blind,
}

impl SelectionPolicy {
    pub const ALL: [SelectionPolicy; 4] = [
        SelectionPolicy::EmShort,
        SelectionPolicy::EmMax,
        SelectionPolicy::MinLength,
        SelectionPolicy::Blind,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SelectionPolicy::EmShort => "em-short",
            SelectionPolicy::EmMax => "em-max",
            SelectionPolicy::MinLength => "min-length",
            SelectionPolicy::Blind => "blind",
        }
    }

    fn uses_weights(self) -> bool {
        matches!(self, SelectionPolicy::EmShort | SelectionPolicy::EmMax)
    }
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectionPolicy {
    type Err = ValexError;

    fn from_str(s: &str) -> Result<Self> {
        SelectionPolicy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| ValexError::data(format!("unknown selection policy {s:?}")))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-clause random stream derived from the run seed.
pub(crate) fn clause_rng(seed: u64, clause_id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(clause_id as u64)))
}

/// Candidate parse indices of a forest under `policy`.
fn candidates(
    forest: &ParseForest,
    table: &WeightTable,
    policy: SelectionPolicy,
) -> Result<Vec<usize>> {
    let mut pool: Vec<usize> = (0..forest.len()).collect();
    if policy.uses_weights() {
        let cond = table.conditionals(forest)?;
        let best = cond.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        pool.retain(|&k| cond[k] >= best - TIE_TOLERANCE * best);
    }
    if matches!(policy, SelectionPolicy::EmShort | SelectionPolicy::MinLength) {
        let shortest = pool
            .iter()
            .map(|&k| forest.parses()[k].frame.len())
            .min()
            .unwrap_or(0);
        pool.retain(|&k| forest.parses()[k].frame.len() == shortest);
    }
    Ok(pool)
}

/// Draws one parse per clause. Deterministic in `(bank, table, policy, seed)`.
pub fn select(
    bank: &Bank,
    table: &WeightTable,
    policy: SelectionPolicy,
    seed: u64,
) -> Result<Vec<ParseType>> {
    bank.forests()
        .iter()
        .map(|forest| {
            let pool = candidates(forest, table, policy)?;
            let mut rng = clause_rng(seed, forest.clause_id);
            let pick = pool[rng.gen_range(0..pool.len())];
            Ok(forest.parses()[pick].parse_type())
        })
        .collect()
}

/// Fraction of gold-marked clauses whose selection is marked gold.
pub fn disambiguation_accuracy(bank: &Bank, selections: &[ParseType]) -> Result<f64> {
    if selections.len() != bank.len() {
        return Err(ValexError::data(format!(
            "{} selections for {} clauses",
            selections.len(),
            bank.len()
        )));
    }
    let mut marked = 0usize;
    let mut correct = 0usize;
    for (forest, chosen) in bank.forests().iter().zip(selections) {
        if !forest.has_gold() {
            continue;
        }
        marked += 1;
        if forest.parses().iter().any(|p| p.gold && p.is(chosen)) {
            correct += 1;
        }
    }
    if marked == 0 {
        return Err(ValexError::data("no clause carries a gold mark"));
    }
    Ok(correct as f64 / marked as f64)
}
