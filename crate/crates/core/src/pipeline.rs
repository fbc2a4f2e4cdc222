//! End-to-end dictionary extraction.
//!
//! The two-stage path runs, per verb: argument filtering of the possible
//! and required sets, restriction of the counted frames to them, matrix
//! derivation and correction, and reconstruction. The baseline path keeps
//! frames that pass a binomial test instead.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bank::Bank;
use crate::cooc::{cooc_matrix, reconstruct_dp, CoocMatrix, EntryTriple};
use crate::em::{em_weights, select, SelectionPolicy, DEFAULT_EM_ITERS};
use crate::error::{Result, ValexError};
use crate::filters::{
    bht_filter, correct_matrix, filter_possible, filter_required, learn_arg_thresholds,
    learn_frame_thresholds, learn_matrix_params, restrict_frames, ArgThresholds, FrameThresholds,
    LearnedParams, MatrixCorrectionParams, MatrixMethod,
};
use crate::filters::args::DEFAULT_ARG_OFFSET;
use crate::filters::bht::DEFAULT_ALPHA;
use crate::frame::FrameSet;
use crate::lexicon::{hard_counts, soft_counts, verb_total, FrameCounts, Lexicon};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Counting {
    /// One count per clause for its selected parse.
    #[default]
    Hard,
    /// Expected counts from the EM weights.
    Soft,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FilterPath {
    #[default]
    TwoStage,
    Bht,
    /// Union of the two-stage and binomial-test dictionaries.
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineMode {
    Union,
    Intersection,
    Majority,
}

macro_rules! named_enum {
    ($ty:ident, $what:literal, $($variant:ident => $name:literal),+) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self { $($ty::$variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = ValexError;

            fn from_str(s: &str) -> Result<$ty> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    _ => Err(ValexError::data(format!(concat!("unknown ", $what, " {:?}"), s))),
                }
            }
        }
    };
}

named_enum!(Counting, "counting mode", Hard => "hard", Soft => "soft");
named_enum!(FilterPath, "filter path", TwoStage => "two-stage", Bht => "bht", Both => "both");
named_enum!(
    CombineMode,
    "combine mode",
    Union => "union",
    Intersection => "intersection",
    Majority => "majority"
);

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub em_iters: usize,
    pub policy: SelectionPolicy,
    pub seed: u64,
    pub counting: Counting,
    pub path: FilterPath,
    pub matrix_method: MatrixMethod,
    /// Offset `t` of both argument rules.
    pub arg_offset: u32,
    pub alpha: f64,
    /// Verbs with a smaller total count are dropped before filtering.
    pub min_verb_count: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            em_iters: DEFAULT_EM_ITERS,
            policy: SelectionPolicy::default(),
            seed: 0,
            counting: Counting::default(),
            path: FilterPath::default(),
            matrix_method: MatrixMethod::default(),
            arg_offset: DEFAULT_ARG_OFFSET,
            alpha: DEFAULT_ALPHA,
            min_verb_count: 1.0,
        }
    }
}

/// Size of an intermediate dictionary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageCount {
    pub stage: &'static str,
    pub entries: usize,
    pub frames: usize,
}

impl StageCount {
    pub fn of(stage: &'static str, lexicon: &Lexicon) -> StageCount {
        StageCount {
            stage,
            entries: lexicon.verb_count(),
            frames: lexicon.pair_count(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub output: Lexicon,
    pub params: LearnedParams,
    pub stages: Vec<StageCount>,
}

/// Counted preliminary dictionary: EM, selection (hard counting only) and
/// the minimum-count cut.
pub fn preliminary(bank: &Bank, config: &PipelineConfig) -> Result<Lexicon> {
    let table = em_weights(bank, config.em_iters)?;
    let counted = match config.counting {
        Counting::Hard => hard_counts(bank, &select(bank, &table, config.policy, config.seed)?)?,
        Counting::Soft => soft_counts(bank, &table)?,
    };
    let mut out = Lexicon::new();
    for (verb, entry) in counted.entries() {
        if verb_total(entry) >= config.min_verb_count {
            out.set_entry(verb, entry.clone());
        }
    }
    Ok(out)
}

fn map_entries(
    lexicon: &Lexicon,
    f: impl Fn(&str, &FrameCounts) -> Result<Option<FrameCounts>> + Sync,
) -> Result<Lexicon> {
    let entries: Vec<(&String, &FrameCounts)> = lexicon.entries().collect();
    let mapped: Vec<(String, Option<FrameCounts>)> = entries
        .into_par_iter()
        .map(|(v, e)| Ok((v.clone(), f(v, e)?)))
        .collect::<Result<_>>()?;
    let mut out = Lexicon::new();
    for (verb, entry) in mapped {
        if let Some(entry) = entry {
            out.set_entry(&verb, entry);
        }
    }
    Ok(out)
}

/// Argument filtering of one counted entry followed by frame restriction.
/// `None` when no argument survives.
pub fn filter_args_entry(entry: &FrameCounts, thresholds: &ArgThresholds) -> Option<FrameCounts> {
    let possible = filter_possible(entry, thresholds);
    if possible.is_empty() {
        return None;
    }
    let required = filter_required(entry, &possible, thresholds);
    Some(restrict_frames(entry, &possible, &required))
}

pub fn filter_args(prelim: &Lexicon, thresholds: &ArgThresholds) -> Result<Lexicon> {
    map_entries(prelim, |_, e| Ok(filter_args_entry(e, thresholds)))
}

/// Matrices of the argument-filtered dictionary.
pub fn step4_matrices(filtered: &Lexicon) -> Result<BTreeMap<String, CoocMatrix>> {
    let verbs: Vec<&String> = filtered.verbs().collect();
    verbs
        .into_par_iter()
        .map(|v| Ok((v.clone(), cooc_matrix(&filtered.frames(v))?)))
        .collect()
}

/// Corrected matrix and reconstruction of one frame set.
pub fn reconstruct_corrected(
    frames: &FrameSet,
    method: MatrixMethod,
    params: &MatrixCorrectionParams,
) -> Result<FrameSet> {
    let triple = EntryTriple::from_frames(frames)?;
    let corrected = correct_matrix(triple.matrix(), method, params);
    reconstruct_dp(&triple.with_matrix(corrected)?)
}

/// Matrix correction and reconstruction over an argument-filtered
/// dictionary. Every output frame has count 1.
pub fn filter_matrix(
    filtered: &Lexicon,
    method: MatrixMethod,
    params: &MatrixCorrectionParams,
) -> Result<Lexicon> {
    map_entries(filtered, |_, e| {
        let frames: FrameSet = e.keys().cloned().collect();
        let rebuilt = reconstruct_corrected(&frames, method, params)?;
        Ok(Some(rebuilt.into_iter().map(|f| (f, 1.0)).collect()))
    })
}

/// Frames passing the binomial test, with count 1.
pub fn filter_bht(prelim: &Lexicon, thresholds: &FrameThresholds) -> Result<Lexicon> {
    map_entries(prelim, |_, e| {
        let kept = bht_filter(e, thresholds);
        Ok(Some(kept.into_iter().map(|f| (f, 1.0)).collect()))
    })
}

fn require_training(training: &Lexicon) -> Result<()> {
    if training.is_empty() {
        return Err(ValexError::data("the training dictionary is empty"));
    }
    Ok(())
}

/// Learns argument thresholds and, for method C, the matrix rules.
/// Majority statistics are always filled in.
pub fn learn_two_stage(
    prelim: &Lexicon,
    training: &Lexicon,
    config: &PipelineConfig,
) -> Result<(ArgThresholds, MatrixCorrectionParams)> {
    require_training(training)?;
    let args = learn_arg_thresholds(prelim, training, config.arg_offset)?.thresholds;
    let train_verbs: Vec<&String> = training.verbs().collect();
    let filtered = filter_args(&prelim.restrict(train_verbs), &args)?;
    let step4 = step4_matrices(&filtered)?;
    let matrix = learn_matrix_params(&step4, training)?;
    Ok((args, matrix))
}

pub fn learn_all(prelim: &Lexicon, training: &Lexicon, config: &PipelineConfig) -> Result<LearnedParams> {
    let (args, matrix) = learn_two_stage(prelim, training, config)?;
    let frames = learn_frame_thresholds(prelim, training, config.alpha)?.thresholds;
    Ok(LearnedParams { args, frames, matrix })
}

/// Two-stage dictionary from an already counted preliminary dictionary.
pub fn two_stage_from_prelim(
    prelim: &Lexicon,
    training: &Lexicon,
    config: &PipelineConfig,
) -> Result<PipelineRun> {
    let (args, matrix) = learn_two_stage(prelim, training, config)?;
    let filtered = filter_args(prelim, &args)?;
    let output = filter_matrix(&filtered, config.matrix_method, &matrix)?;
    let stages = vec![
        StageCount::of("preliminary", prelim),
        StageCount::of("argument-filtered", &filtered),
        StageCount::of("reconstructed", &output),
    ];
    let params = LearnedParams {
        args,
        frames: FrameThresholds {
            alpha: config.alpha,
            ..FrameThresholds::default()
        },
        matrix,
    };
    Ok(PipelineRun { output, params, stages })
}

/// Baseline dictionary from an already counted preliminary dictionary.
pub fn bht_from_prelim(
    prelim: &Lexicon,
    training: &Lexicon,
    config: &PipelineConfig,
) -> Result<PipelineRun> {
    require_training(training)?;
    let frames = learn_frame_thresholds(prelim, training, config.alpha)?.thresholds;
    let output = filter_bht(prelim, &frames)?;
    let stages = vec![
        StageCount::of("preliminary", prelim),
        StageCount::of("bht-filtered", &output),
    ];
    let params = LearnedParams {
        args: ArgThresholds {
            t: config.arg_offset,
            ..ArgThresholds::default()
        },
        frames,
        matrix: MatrixCorrectionParams::default(),
    };
    Ok(PipelineRun { output, params, stages })
}

pub fn run_two_stage(bank: &Bank, training: &Lexicon, config: &PipelineConfig) -> Result<PipelineRun> {
    require_training(training)?;
    two_stage_from_prelim(&preliminary(bank, config)?, training, config)
}

pub fn run_bht(bank: &Bank, training: &Lexicon, config: &PipelineConfig) -> Result<PipelineRun> {
    require_training(training)?;
    bht_from_prelim(&preliminary(bank, config)?, training, config)
}

/// Runs the path selected by `config.path`.
pub fn run_pipeline(bank: &Bank, training: &Lexicon, config: &PipelineConfig) -> Result<PipelineRun> {
    require_training(training)?;
    let prelim = preliminary(bank, config)?;
    match config.path {
        FilterPath::TwoStage => two_stage_from_prelim(&prelim, training, config),
        FilterPath::Bht => bht_from_prelim(&prelim, training, config),
        FilterPath::Both => {
            let two = two_stage_from_prelim(&prelim, training, config)?;
            let bht = bht_from_prelim(&prelim, training, config)?;
            let output = combine(&[two.output, bht.output], CombineMode::Union)?;
            let mut stages = two.stages;
            stages.extend(bht.stages.into_iter().skip(1));
            stages.push(StageCount::of("union", &output));
            let params = LearnedParams {
                args: two.params.args,
                frames: bht.params.frames,
                matrix: two.params.matrix,
            };
            Ok(PipelineRun { output, params, stages })
        }
    }
}

/// Combines dictionaries on (verb, frame) pairs.
///
/// Union keeps the largest count and intersection the smallest. Majority
/// keeps a pair listed by strictly more than half of the inputs that list
/// the verb at all, with its largest count.
pub fn combine(lexica: &[Lexicon], mode: CombineMode) -> Result<Lexicon> {
    if lexica.is_empty() {
        return Err(ValexError::data("nothing to combine"));
    }
    if mode == CombineMode::Majority && lexica.len() < 2 {
        return Err(ValexError::data("majority voting needs at least two dictionaries"));
    }
    let mut out = Lexicon::new();
    let verbs: std::collections::BTreeSet<&String> = lexica.iter().flat_map(|l| l.verbs()).collect();
    for verb in verbs {
        let listing: Vec<&FrameCounts> = lexica.iter().filter_map(|l| l.entry(verb)).collect();
        if mode == CombineMode::Intersection && listing.len() < lexica.len() {
            continue;
        }
        let mut votes: BTreeMap<&crate::frame::Frame, (usize, f64, f64)> = BTreeMap::new();
        for entry in &listing {
            for (f, &c) in entry.iter() {
                let slot = votes.entry(f).or_insert((0, c, c));
                slot.0 += 1;
                slot.1 = slot.1.max(c);
                slot.2 = slot.2.min(c);
            }
        }
        let entry: FrameCounts = votes
            .into_iter()
            .filter_map(|(f, (n, max, min))| {
                let keep = match mode {
                    CombineMode::Union => Some(max),
                    CombineMode::Intersection => (n == lexica.len()).then_some(min),
                    CombineMode::Majority => (2 * n > listing.len()).then_some(max),
                };
                keep.map(|c| (f.clone(), c))
            })
            .collect();
        out.set_entry(verb, entry);
    }
    Ok(out)
}

/// Whether `frames` is reproduced by reconstruction from its own triple.
pub fn is_fixed_point(frames: &FrameSet) -> Result<bool> {
    Ok(&reconstruct_dp(&EntryTriple::from_frames(frames)?)? == frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bank::ReducedParse;
    use crate::frame::frame;
    use proptest::prelude::*;

    fn lex(rows: &[(&str, &str)]) -> Lexicon {
        let mut l = Lexicon::new();
        for (v, f) in rows {
            l.add(v, frame(f), 1.0);
        }
        l
    }

    #[test]
    fn combine_examples() {
        let x = lex(&[("v", "a"), ("v", "a,b"), ("w", "c")]);
        assert_eq!(combine(std::slice::from_ref(&x), CombineMode::Union).unwrap(), x);
        assert!(combine(std::slice::from_ref(&x), CombineMode::Majority).is_err());
        assert!(combine(&[], CombineMode::Union).is_err());

        let y = lex(&[("v", "a"), ("v", "g")]);
        let z = lex(&[("v", "g"), ("u", "a")]);
        let mv = combine(&[x.clone(), y.clone(), z.clone()], CombineMode::Majority).unwrap();
        assert_eq!(mv.frames("v"), [frame("a"), frame("g")].into());
        // w and u are each listed by one source only, which then forms the majority.
        assert!(mv.contains_verb("w"));
        let mv2 = combine(&[x.clone(), z.clone()], CombineMode::Majority).unwrap();
        assert!(!mv2.frames("v").contains(&frame("g")));

        let inter = combine(&[x.clone(), y.clone()], CombineMode::Intersection).unwrap();
        assert_eq!(inter, lex(&[("v", "a")]));
    }

    #[test]
    fn union_keeps_max_and_intersection_min() {
        let mut x = Lexicon::new();
        x.add("v", frame("a"), 2.0);
        let mut y = Lexicon::new();
        y.add("v", frame("a"), 5.0);
        assert_eq!(combine(&[x.clone(), y.clone()], CombineMode::Union).unwrap().count("v", &frame("a")), 5.0);
        assert_eq!(combine(&[x, y], CombineMode::Intersection).unwrap().count("v", &frame("a")), 2.0);
    }

    #[test]
    fn repeated_unambiguous_parse() {
        let forests: Vec<Vec<ReducedParse>> = (0..10)
            .map(|_| vec![ReducedParse::new("v", frame("a,b"), true)])
            .collect();
        let bank = Bank::from_parses(forests).unwrap();
        let mut training = Lexicon::new();
        training.add("v", frame("a,b"), 1.0);
        let run = run_two_stage(&bank, &training, &PipelineConfig::default()).unwrap();
        assert_eq!(run.output, training);
        assert_eq!(run.stages.len(), 3);
        let run = run_bht(&bank, &training, &PipelineConfig::default()).unwrap();
        assert_eq!(run.output, training);
    }

    #[test]
    fn empty_training_is_an_error() {
        let bank = Bank::from_parses(vec![vec![ReducedParse::new("v", frame("a"), false)]]).unwrap();
        assert!(run_two_stage(&bank, &Lexicon::new(), &PipelineConfig::default()).is_err());
        assert!(run_bht(&bank, &Lexicon::new(), &PipelineConfig::default()).is_err());
    }

    #[test]
    fn names_round_trip() {
        for c in [Counting::Hard, Counting::Soft] {
            assert_eq!(c.name().parse::<Counting>().unwrap(), c);
        }
        for p in [FilterPath::TwoStage, FilterPath::Bht, FilterPath::Both] {
            assert_eq!(p.name().parse::<FilterPath>().unwrap(), p);
        }
        for m in [CombineMode::Union, CombineMode::Intersection, CombineMode::Majority] {
            assert_eq!(m.name().parse::<CombineMode>().unwrap(), m);
        }
        assert!("mv".parse::<CombineMode>().is_err());
    }

    #[test]
    fn two_stage_output_is_a_fixed_point() {
        let mut prelim = Lexicon::new();
        prelim.add("v", frame("a,b"), 6.0);
        prelim.add("v", frame("a"), 5.0);
        prelim.add("v", frame("a,c"), 4.0);
        prelim.add("v", frame("a,b,x"), 1.0);
        let mut training = Lexicon::new();
        training.set_frames("v", &[frame("a,b"), frame("a"), frame("a,c")].into());
        let run = two_stage_from_prelim(&prelim, &training, &PipelineConfig::default()).unwrap();
        for (verb, _) in run.output.entries() {
            assert!(is_fixed_point(&run.output.frames(verb)).unwrap());
        }
    }

    fn arb_lexicon() -> impl Strategy<Value = Lexicon> {
        let verb = prop_oneof![Just("u"), Just("v"), Just("w")];
        let f = prop_oneof![Just("a"), Just("b"), Just("a,b"), Just("c")];
        proptest::collection::vec((verb, f), 0..8).prop_map(|rows| {
            let mut l = Lexicon::new();
            for (v, f) in rows {
                l.add(v, frame(f), 1.0);
            }
            l.as_dictionary()
        })
    }

    proptest! {
        #[test]
        fn combine_set_laws(a in arb_lexicon(), b in arb_lexicon(), c in arb_lexicon()) {
            let all = [a.clone(), b.clone(), c.clone()];
            let union = combine(&all, CombineMode::Union).unwrap();
            let inter = combine(&all, CombineMode::Intersection).unwrap();
            let mv = combine(&all, CombineMode::Majority).unwrap();
            for l in &all {
                for (v, e) in l.entries() {
                    for f in e.keys() {
                        prop_assert!(union.frames(v).contains(f));
                    }
                }
                for (v, e) in inter.entries() {
                    for f in e.keys() {
                        prop_assert!(l.frames(v).contains(f));
                    }
                }
            }
            for (v, e) in mv.entries() {
                for f in e.keys() {
                    prop_assert!(union.frames(v).contains(f));
                }
            }
        }
    }
}
