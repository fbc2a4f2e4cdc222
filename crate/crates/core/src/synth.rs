//! Seeded synthetic gold dictionaries and noisy ambiguous banks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Zipf;

use crate::bank::{Bank, ReducedParse};
use crate::cooc::{reconstruct_dp, CoocMatrix, EntryTriple, Relation};
use crate::em::clause_rng;
use crate::error::{Result, ValexError};
use crate::frame::{ArgSet, ArgToken, Frame, FrameSet};
use crate::lexicon::Lexicon;

/// Largest forest the generator produces.
pub const MAX_AMBIGUITY: usize = 40;

const NAMED_ARGS: [&str; 16] = [
    "np(nom)",
    "np(acc)",
    "np(gen)",
    "np(dat)",
    "np(inst)",
    "sie",
    "na+np(loc)",
    "na+np(acc)",
    "w+np(loc)",
    "z+np(inst)",
    "do+np(gen)",
    "o+np(loc)",
    "ZE",
    "inf",
    "adv",
    "adj(nom)",
];

// Stream salts keep the generators' random streams apart.
const GOLD_STREAM: u64 = 0x676f_6c64;
const BANK_STREAM: u64 = 0x6261_6e6b;
const SPLIT_STREAM: u64 = 0x7370_6c74;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GoldMode {
    /// Random frame sets.
    Free,
    /// Frame sets reconstructed from random triples, so reconstruction is
    /// lossless on them.
    #[default]
    MatrixConsistent,
}

impl fmt::Display for GoldMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GoldMode::Free => "free",
            GoldMode::MatrixConsistent => "matrix-consistent",
        })
    }
}

impl FromStr for GoldMode {
    type Err = ValexError;

    fn from_str(s: &str) -> Result<GoldMode> {
        match s {
            "free" => Ok(GoldMode::Free),
            "matrix-consistent" => Ok(GoldMode::MatrixConsistent),
            _ => Err(ValexError::data(format!("unknown gold mode {s:?}"))),
        }
    }
}

/// Relative weights of the frame edits used for distractors and noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EditWeights {
    pub add: f64,
    pub drop: f64,
    pub swap: f64,
}

impl Default for EditWeights {
    fn default() -> Self {
        EditWeights {
            add: 0.4,
            drop: 0.3,
            swap: 0.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_verbs: usize,
    pub inventory: usize,
    pub gold_mode: GoldMode,
    /// Possible arguments per verb, inclusive range.
    pub args_per_verb: (usize, usize),
    /// Frames per verb, inclusive range.
    pub frames_per_verb: (usize, usize),
    /// Clause budget per verb, inclusive range; clauses are then spread
    /// over verbs by a Zipf law.
    pub clauses_per_verb: (usize, usize),
    pub zipf_exponent: f64,
    /// Clauses planted for every gold (verb, frame) pair before sampling.
    pub min_frame_observations: usize,
    /// Forest size, inclusive range.
    pub ambiguity: (usize, usize),
    /// Probability that the intended parse is replaced by a corrupted one.
    pub noise: f64,
    pub edits: EditWeights,
    /// Probability that a distractor keeps the frame but changes the verb.
    pub verb_swap: f64,
    /// Reject distractors that coincide with a gold (verb, frame) pair.
    pub distractors_avoid_gold: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_verbs: 50,
            inventory: 12,
            gold_mode: GoldMode::default(),
            args_per_verb: (2, 5),
            frames_per_verb: (1, 6),
            clauses_per_verb: (20, 60),
            zipf_exponent: 1.0,
            min_frame_observations: 0,
            ambiguity: (1, 5),
            noise: 0.0,
            edits: EditWeights::default(),
            verb_swap: 0.2,
            distractors_avoid_gold: false,
        }
    }
}

fn check_range(name: &str, (lo, hi): (usize, usize)) -> Result<()> {
    if lo > hi {
        return Err(ValexError::data(format!("{name} range {lo}..{hi} is empty")));
    }
    Ok(())
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        check_range("arguments per verb", self.args_per_verb)?;
        check_range("frames per verb", self.frames_per_verb)?;
        check_range("clauses per verb", self.clauses_per_verb)?;
        check_range("ambiguity", self.ambiguity)?;
        if self.frames_per_verb.0 == 0 {
            return Err(ValexError::data("every verb needs at least one frame"));
        }
        if self.ambiguity.0 == 0 || self.ambiguity.1 > MAX_AMBIGUITY {
            return Err(ValexError::data(format!(
                "ambiguity must lie within 1..={MAX_AMBIGUITY}"
            )));
        }
        if self.args_per_verb.1 > self.inventory {
            return Err(ValexError::data(format!(
                "{} arguments per verb exceed the inventory of {}",
                self.args_per_verb.1, self.inventory
            )));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return Err(ValexError::numeric(format!("noise rate {} outside [0, 1)", self.noise)));
        }
        if !(0.0..=1.0).contains(&self.verb_swap) {
            return Err(ValexError::numeric(format!(
                "verb swap rate {} outside [0, 1]",
                self.verb_swap
            )));
        }
        let w = self.edits;
        if [w.add, w.drop, w.swap].iter().any(|x| x.is_nan() || *x < 0.0) || (w.add + w.drop + w.swap - 1.0).abs() > 1e-9 {
            return Err(ValexError::numeric("edit weights must be nonnegative and sum to 1"));
        }
        if self.zipf_exponent.is_nan() || self.zipf_exponent < 0.0 {
            return Err(ValexError::numeric("the Zipf exponent must be nonnegative"));
        }
        Ok(())
    }

    /// `(key, value)` rows describing the configuration.
    pub fn describe(&self) -> Vec<(String, String)> {
        let range = |(lo, hi): (usize, usize)| format!("{lo}..{hi}");
        vec![
            ("seed".into(), self.seed.to_string()),
            ("n_verbs".into(), self.n_verbs.to_string()),
            ("inventory".into(), self.inventory.to_string()),
            ("gold_mode".into(), self.gold_mode.to_string()),
            ("args_per_verb".into(), range(self.args_per_verb)),
            ("frames_per_verb".into(), range(self.frames_per_verb)),
            ("clauses_per_verb".into(), range(self.clauses_per_verb)),
            ("zipf_exponent".into(), self.zipf_exponent.to_string()),
            ("min_frame_observations".into(), self.min_frame_observations.to_string()),
            ("ambiguity".into(), range(self.ambiguity)),
            ("noise".into(), self.noise.to_string()),
            (
                "edits".into(),
                format!("{},{},{}", self.edits.add, self.edits.drop, self.edits.swap),
            ),
            ("verb_swap".into(), self.verb_swap.to_string()),
            ("distractors_avoid_gold".into(), self.distractors_avoid_gold.to_string()),
        ]
    }
}

/// The first `n` argument tokens of the synthetic inventory.
pub fn inventory_tokens(n: usize) -> Vec<ArgToken> {
    (0..n)
        .map(|i| match NAMED_ARGS.get(i) {
            Some(name) => ArgToken::parse(name),
            None => ArgToken::parse(&format!("x{i}")),
        })
        .collect::<Result<Vec<_>>>()
        .expect("inventory names are valid tokens")
}

fn verb_name(i: usize) -> String {
    format!("verb{i:03}")
}

fn pick_range(rng: &mut ChaCha8Rng, (lo, hi): (usize, usize)) -> usize {
    rng.gen_range(lo..=hi)
}

fn random_subset(rng: &mut ChaCha8Rng, pool: &[ArgToken], size: usize) -> Vec<ArgToken> {
    let mut picked: Vec<ArgToken> = pool.choose_multiple(rng, size).cloned().collect();
    picked.sort();
    picked
}

/// Relation of a random pair, skewed towards exclusion and independence.
fn random_relation(rng: &mut ChaCha8Rng) -> Relation {
    const WEIGHTS: [u32; 5] = [4, 1, 2, 2, 3];
    let dist = WeightedIndex::new(WEIGHTS).expect("static weights");
    Relation::ALL[dist.sample(rng)]
}

fn free_frames(rng: &mut ChaCha8Rng, config: &SynthConfig, pool: &[ArgToken]) -> Result<FrameSet> {
    let size = pick_range(rng, config.args_per_verb);
    let args = random_subset(rng, pool, size);
    let wanted = pick_range(rng, config.frames_per_verb);
    let mut frames = FrameSet::new();
    while frames.len() < wanted {
        let chosen = args.iter().filter(|_| rng.gen_bool(0.5)).cloned();
        frames.insert(Frame::new(chosen)?);
    }
    Ok(frames)
}

const MAX_TRIPLE_ATTEMPTS: usize = 10_000;

/// Reconstruction of random triples whose matrices perturb `prototype`,
/// retried until the frame count falls in the configured range.
fn consistent_frames(
    rng: &mut ChaCha8Rng,
    config: &SynthConfig,
    pool: &[ArgToken],
    prototype: &CoocMatrix,
) -> Result<FrameSet> {
    let (lo, hi) = config.frames_per_verb;
    for _ in 0..MAX_TRIPLE_ATTEMPTS {
        let size = pick_range(rng, config.args_per_verb);
        let args = random_subset(rng, pool, size);
        let required: ArgSet = args.iter().filter(|_| rng.gen_bool(0.25)).cloned().collect();
        let positions: Vec<usize> = args
            .iter()
            .map(|a| prototype.position(a).expect("prototype covers the inventory"))
            .collect();
        let matrix = CoocMatrix::from_upper(args.clone(), |i, j| {
            let base = prototype.at(positions[i], positions[j]);
            if rng.gen_bool(0.1) {
                random_relation(rng)
            } else {
                base
            }
        });
        let triple = EntryTriple::new(args.iter().cloned().collect(), required, matrix)?;
        let frames = reconstruct_dp(&triple)?;
        let nontrivial = frames.iter().any(|f| !f.is_empty());
        if nontrivial && (lo..=hi).contains(&frames.len()) {
            return Ok(frames);
        }
    }
    Err(ValexError::data(format!(
        "no random triple produced between {lo} and {hi} frames; widen the frame range"
    )))
}

/// Gold dictionary over `n_verbs` verbs. Deterministic in the config.
pub fn gen_gold(config: &SynthConfig) -> Result<Lexicon> {
    config.validate()?;
    let smallest = config.args_per_verb.0;
    if config.gold_mode == GoldMode::Free
        && (smallest as u32) < usize::BITS
        && config.frames_per_verb.1 > 1 << smallest
    {
        return Err(ValexError::data(format!(
            "{} frames per verb cannot be drawn over {smallest} arguments",
            config.frames_per_verb.1
        )));
    }
    let mut pool = inventory_tokens(config.inventory);
    pool.sort();
    let mut rng = clause_rng(config.seed ^ GOLD_STREAM, 0);
    let prototype = CoocMatrix::from_upper(pool.clone(), |_, _| random_relation(&mut rng));
    let mut gold = Lexicon::new();
    for i in 0..config.n_verbs {
        let mut rng = clause_rng(config.seed ^ GOLD_STREAM, i + 1);
        let frames = match config.gold_mode {
            GoldMode::Free => free_frames(&mut rng, config, &pool)?,
            GoldMode::MatrixConsistent => consistent_frames(&mut rng, config, &pool, &prototype)?,
        };
        gold.set_frames(&verb_name(i), &frames);
    }
    Ok(gold)
}

#[derive(Clone, Copy, Debug)]
enum Edit {
    Add,
    Drop,
    Swap,
}

/// A frame different from `frame`, or `None` when no edit applies.
fn edit_frame(
    rng: &mut ChaCha8Rng,
    frame: &Frame,
    pool: &[ArgToken],
    weights: &WeightedIndex<f64>,
) -> Option<Frame> {
    let absent: Vec<&ArgToken> = pool.iter().filter(|a| !frame.contains(a)).collect();
    let first = [Edit::Add, Edit::Drop, Edit::Swap][weights.sample(rng)];
    let order = match first {
        Edit::Add => [Edit::Add, Edit::Drop, Edit::Swap],
        Edit::Drop => [Edit::Drop, Edit::Add, Edit::Swap],
        Edit::Swap => [Edit::Swap, Edit::Add, Edit::Drop],
    };
    for edit in order {
        let mut args = frame.to_set();
        match edit {
            Edit::Add if !absent.is_empty() => {
                args.insert((*absent.choose(rng)?).clone());
            }
            Edit::Drop if !frame.is_empty() => {
                let victim = frame.args().choose(rng)?.clone();
                args.remove(&victim);
            }
            Edit::Swap if !frame.is_empty() && !absent.is_empty() => {
                let victim = frame.args().choose(rng)?.clone();
                args.remove(&victim);
                args.insert((*absent.choose(rng)?).clone());
            }
            _ => continue,
        }
        return Some(Frame::from_set(&args));
    }
    None
}

/// Bank of ambiguous forests around clauses drawn from `gold`.
///
/// Each clause gets an intended `(verb, frame)`; with probability `noise`
/// the parser's analysis is a corrupted copy of it. The remaining forest
/// members are distractors derived from that analysis. A parse is marked
/// gold when it equals the intended one.
pub fn gen_bank(gold: &Lexicon, config: &SynthConfig) -> Result<Bank> {
    config.validate()?;
    if gold.is_empty() {
        return Err(ValexError::data("cannot generate a bank from an empty gold dictionary"));
    }
    let verbs: Vec<&String> = gold.verbs().collect();
    let frames: BTreeMap<&String, Vec<Frame>> = verbs
        .iter()
        .map(|v| (*v, gold.frames(v).into_iter().collect()))
        .collect();
    let mut pool = inventory_tokens(config.inventory);
    pool.extend(gold.arguments());
    pool.sort();
    pool.dedup();

    let mut rng = clause_rng(config.seed ^ BANK_STREAM, 0);
    let mut intended: Vec<(usize, Frame)> = Vec::new();
    for (vi, v) in verbs.iter().enumerate() {
        for f in &frames[v] {
            for _ in 0..config.min_frame_observations {
                intended.push((vi, f.clone()));
            }
        }
    }
    let budget: usize = verbs.iter().map(|_| pick_range(&mut rng, config.clauses_per_verb)).sum();
    let mut ranks: Vec<usize> = (0..verbs.len()).collect();
    ranks.shuffle(&mut rng);
    let zipf = Zipf::new(verbs.len() as u64, config.zipf_exponent)
        .map_err(|e| ValexError::numeric(format!("Zipf law: {e}")))?;
    for _ in 0..budget {
        let rank = zipf.sample(&mut rng) as usize - 1;
        let vi = ranks[rank];
        let f = frames[verbs[vi]].choose(&mut rng).expect("gold entries are nonempty").clone();
        intended.push((vi, f));
    }
    intended.shuffle(&mut rng);

    let w = config.edits;
    let edits = WeightedIndex::new([w.add, w.drop, w.swap])
        .map_err(|e| ValexError::numeric(format!("edit weights: {e}")))?;
    let forests = intended
        .iter()
        .enumerate()
        .map(|(id, (vi, frame))| {
            let mut rng = clause_rng(config.seed ^ BANK_STREAM, id + 1);
            let verb = verbs[*vi].as_str();
            let mut head = frame.clone();
            if config.noise > 0.0 && rng.gen_bool(config.noise) {
                if let Some(corrupted) = edit_frame(&mut rng, frame, &pool, &edits) {
                    head = corrupted;
                }
            }
            let k = pick_range(&mut rng, config.ambiguity);
            let mut parses: Vec<(String, Frame)> = vec![(verb.to_string(), head.clone())];
            let mut attempts = 0;
            while parses.len() < k && attempts < 20 * k {
                attempts += 1;
                let candidate = if verbs.len() > 1 && rng.gen_bool(config.verb_swap) {
                    let other = verbs[rng.gen_range(0..verbs.len())];
                    (other.clone(), head.clone())
                } else {
                    match edit_frame(&mut rng, &head, &pool, &edits) {
                        Some(f) => (verb.to_string(), f),
                        None => continue,
                    }
                };
                let planted = config.distractors_avoid_gold
                    && frames.get(&candidate.0).is_some_and(|fs| fs.contains(&candidate.1));
                if !planted && !parses.contains(&candidate) {
                    parses.push(candidate);
                }
            }
            parses.shuffle(&mut rng);
            parses
                .into_iter()
                .map(|(v, f)| {
                    let is_gold = v == verb && &f == frame;
                    ReducedParse::new(v, f, is_gold)
                })
                .collect()
        })
        .collect();
    Bank::from_parses(forests)
}

/// Splits a dictionary into training and test parts, `n_test` verbs going
/// to the test part.
pub fn split_verbs(gold: &Lexicon, n_test: usize, seed: u64) -> Result<(Lexicon, Lexicon)> {
    let mut verbs: Vec<String> = gold.verbs().cloned().collect();
    if n_test > verbs.len() {
        return Err(ValexError::data(format!(
            "{n_test} test verbs requested from {} verbs",
            verbs.len()
        )));
    }
    verbs.shuffle(&mut clause_rng(seed ^ SPLIT_STREAM, 0));
    let (test, train) = verbs.split_at(n_test);
    Ok((gold.restrict(train), gold.restrict(test)))
}
