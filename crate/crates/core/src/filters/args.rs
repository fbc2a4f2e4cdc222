//! Argument-level filtering of possible and required sets.
//!
//! An argument `a` stays possible for verb `v` when `c(v,a) >= p_a c(v) + t`,
//! and a possible argument is required unless
//! `c(v) - c(v,a) >= p_not_a c(v) + t`. Thresholds depend on the argument,
//! not on the verb, and are learned against a training dictionary.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::grid::{learn_threshold, GridLearnerResult};
use super::COUNT_EPS;
use crate::cooc::arg_sets;
use crate::error::{Result, ValexError};
use crate::frame::{ArgSet, ArgToken, Frame};
use crate::lexicon::{arg_total, verb_total, FrameCounts, Lexicon};

/// Default additive offset `t`.
pub const DEFAULT_ARG_OFFSET: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ArgThresholds {
    pub p_pos: BTreeMap<ArgToken, f64>,
    pub p_neg: BTreeMap<ArgToken, f64>,
    pub t: u32,
}

impl Default for ArgThresholds {
    fn default() -> Self {
        ArgThresholds {
            p_pos: BTreeMap::new(),
            p_neg: BTreeMap::new(),
            t: DEFAULT_ARG_OFFSET,
        }
    }
}

fn kept(c_va: f64, c_v: f64, p: f64, t: u32) -> bool {
    c_va >= p * c_v + t as f64 - COUNT_EPS
}

fn dropped_from_required(c_va: f64, c_v: f64, p: f64, t: u32) -> bool {
    c_v - c_va >= p * c_v + t as f64 - COUNT_EPS
}

/// Filtered possible arguments of one counted entry.
///
/// Arguments without a learned threshold are rejected.
pub fn filter_possible(entry: &FrameCounts, thresholds: &ArgThresholds) -> ArgSet {
    let c_v = verb_total(entry);
    let observed: ArgSet = entry.keys().flat_map(|f| f.iter().cloned()).collect();
    observed
        .into_iter()
        .filter(|a| match thresholds.p_pos.get(a) {
            Some(&p) => kept(arg_total(entry, a), c_v, p, thresholds.t),
            None => false,
        })
        .collect()
}

/// Filtered required arguments among `possible`.
///
/// An argument without a learned `p_not_a` is never required.
pub fn filter_required(
    entry: &FrameCounts,
    possible: &ArgSet,
    thresholds: &ArgThresholds,
) -> ArgSet {
    let c_v = verb_total(entry);
    possible
        .iter()
        .filter(|a| match thresholds.p_neg.get(*a) {
            Some(&p) => !dropped_from_required(arg_total(entry, a), c_v, p, thresholds.t),
            None => false,
        })
        .cloned()
        .collect()
}

/// Maps every frame `f` to `(f ∪ required) ∩ possible`, summing the counts
/// of frames with the same image.
pub fn restrict_frames(frames: &FrameCounts, possible: &ArgSet, required: &ArgSet) -> FrameCounts {
    let mut out = FrameCounts::new();
    for (frame, count) in frames {
        let image: ArgSet = frame
            .iter()
            .chain(required.iter())
            .filter(|a| possible.contains(*a))
            .cloned()
            .collect();
        *out.entry(Frame::from_set(&image)).or_insert(0.0) += count;
    }
    out
}

/// Per-verb statistics used while learning.
struct VerbStats {
    c_v: f64,
    c_va: BTreeMap<ArgToken, f64>,
    gold_possible: ArgSet,
    gold_required: ArgSet,
}

fn shared_stats(prelim: &Lexicon, training: &Lexicon) -> Result<Vec<VerbStats>> {
    let mut stats = Vec::new();
    for (verb, entry) in prelim.entries() {
        if !training.contains_verb(verb) {
            continue;
        }
        let (gold_possible, gold_required) = arg_sets(&training.frames(verb))?;
        let args: BTreeSet<&ArgToken> = entry.keys().flat_map(|f| f.iter()).collect();
        stats.push(VerbStats {
            c_v: verb_total(entry),
            c_va: args.into_iter().map(|a| (a.clone(), arg_total(entry, a))).collect(),
            gold_possible,
            gold_required,
        });
    }
    if stats.is_empty() {
        return Err(ValexError::data(
            "the preliminary and training dictionaries share no verbs",
        ));
    }
    Ok(stats)
}

/// Learned thresholds together with the learner diagnostics per argument.
#[derive(Clone, Debug)]
pub struct ArgLearning {
    pub thresholds: ArgThresholds,
    pub pos: BTreeMap<ArgToken, GridLearnerResult>,
    pub neg: BTreeMap<ArgToken, GridLearnerResult>,
}

/// Learns `p_a` and `p_not_a` for every argument seen in either dictionary,
/// weighting each shared verb equally.
pub fn learn_arg_thresholds(prelim: &Lexicon, training: &Lexicon, t: u32) -> Result<ArgLearning> {
    let stats = shared_stats(prelim, training)?;
    let args: Vec<ArgToken> = prelim
        .arguments()
        .union(&training.arguments())
        .cloned()
        .collect();

    let learned: Vec<(ArgToken, GridLearnerResult, GridLearnerResult)> = args
        .into_par_iter()
        .map(|a| {
            let pos = learn_threshold(|p| {
                stats
                    .iter()
                    .filter(|s| {
                        let c_va = s.c_va.get(&a).copied().unwrap_or(0.0);
                        kept(c_va, s.c_v, p, t) != s.gold_possible.contains(&a)
                    })
                    .count() as u64
            });
            let neg = learn_threshold(|p| {
                stats
                    .iter()
                    .filter(|s| {
                        let c_va = s.c_va.get(&a).copied().unwrap_or(0.0);
                        let required = !dropped_from_required(c_va, s.c_v, p, t);
                        required != s.gold_required.contains(&a)
                    })
                    .count() as u64
            });
            (a, pos, neg)
        })
        .collect();

    let mut out = ArgLearning {
        thresholds: ArgThresholds {
            t,
            ..ArgThresholds::default()
        },
        pos: BTreeMap::new(),
        neg: BTreeMap::new(),
    };
    for (a, pos, neg) in learned {
        out.thresholds.p_pos.insert(a.clone(), pos.threshold);
        out.thresholds.p_neg.insert(a.clone(), neg.threshold);
        out.pos.insert(a.clone(), pos);
        out.neg.insert(a, neg);
    }
    Ok(out)
}
