//! Correction of per-verb co-occurrence matrices towards relations that are
//! prevalent across the training dictionary.
//!
//! Pair statistics are kept for canonically ordered argument pairs
//! `(a, b)` with `a < b`; the reversed orientation is read through
//! [`Relation::converse`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::COUNT_EPS;
use crate::cooc::{agreement_counts, cooc_matrix, CoocMatrix, Relation};
use crate::error::{Result, ValexError};
use crate::frame::ArgToken;
use crate::lexicon::Lexicon;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MatrixMethod {
    /// Leave matrices as derived from the filtered counts.
    A,
    /// Replace every known pair by its training majority.
    B,
    /// Replace a pair by its majority only where a learned rule fires.
    #[default]
    C,
}

impl fmt::Display for MatrixMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            MatrixMethod::A => "A",
            MatrixMethod::B => "B",
            MatrixMethod::C => "C",
        };
        f.write_str(name)
    }
}

impl FromStr for MatrixMethod {
    type Err = ValexError;

    fn from_str(s: &str) -> Result<MatrixMethod> {
        match s {
            "A" | "a" => Ok(MatrixMethod::A),
            "B" | "b" => Ok(MatrixMethod::B),
            "C" | "c" => Ok(MatrixMethod::C),
            _ => Err(ValexError::data(format!("unknown matrix method {s:?}"))),
        }
    }
}

/// Substitution rule for one ordered relation pair `S => R`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum RuleParams {
    #[default]
    Never,
    /// Fires when `C(a R b) >= p C(a,b) + t`.
    Fire { p: f64, t: u32 },
}

impl RuleParams {
    pub fn fires(&self, c_rel: u32, c_pair: u32) -> bool {
        match *self {
            RuleParams::Never => false,
            RuleParams::Fire { p, t } => c_rel as f64 >= p * c_pair as f64 + t as f64 - COUNT_EPS,
        }
    }
}

impl fmt::Display for RuleParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleParams::Never => f.write_str("NEVER"),
            RuleParams::Fire { p, t } => write!(f, "{p},{t}"),
        }
    }
}

impl FromStr for RuleParams {
    type Err = ValexError;

    fn from_str(s: &str) -> Result<RuleParams> {
        if s == "NEVER" {
            return Ok(RuleParams::Never);
        }
        let bad = || ValexError::data(format!("malformed rule {s:?}, expected NEVER or p,t"));
        let (p, t) = s.split_once(',').ok_or_else(bad)?;
        let p: f64 = p.parse().map_err(|_| bad())?;
        let t: u32 = t.parse().map_err(|_| bad())?;
        if !(0.0..=1.0).contains(&p) {
            return Err(ValexError::numeric(format!("rule threshold {p} outside [0, 1]")));
        }
        Ok(RuleParams::Fire { p, t })
    }
}

/// Training counts for one canonical pair `(a, b)`, `a < b`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairStats {
    /// `C(a R b)` indexed by [`Relation::index`].
    pub by_relation: [u32; 5],
}

impl PairStats {
    /// `C(a,b)`: verbs whose possible set holds both arguments.
    pub fn total(&self) -> u32 {
        self.by_relation.iter().sum()
    }

    pub fn count(&self, relation: Relation) -> u32 {
        self.by_relation[relation.index()]
    }

    /// Most frequent relation, ties going to the earlier one in
    /// [`Relation::ALL`].
    pub fn majority(&self) -> Relation {
        let mut best = Relation::Excl;
        for r in Relation::ALL {
            if self.count(r) > self.count(best) {
                best = r;
            }
        }
        best
    }

    /// The same counts seen from `(b, a)`.
    fn reversed(&self) -> PairStats {
        let mut out = PairStats::default();
        for r in Relation::ALL {
            out.by_relation[r.converse().index()] = self.count(r);
        }
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MatrixCorrectionParams {
    pub pairs: BTreeMap<(ArgToken, ArgToken), PairStats>,
    pub rules: BTreeMap<(Relation, Relation), RuleParams>,
}

impl MatrixCorrectionParams {
    /// Statistics of `(a, b)` in that orientation, if the pair was seen.
    pub fn stats(&self, a: &ArgToken, b: &ArgToken) -> Option<PairStats> {
        if a < b {
            self.pairs.get(&(a.clone(), b.clone())).copied()
        } else {
            self.pairs.get(&(b.clone(), a.clone())).map(PairStats::reversed)
        }
    }

    pub fn majority(&self, a: &ArgToken, b: &ArgToken) -> Option<Relation> {
        self.stats(a, b).filter(|s| s.total() > 0).map(|s| s.majority())
    }

    pub fn rule(&self, from: Relation, to: Relation) -> RuleParams {
        self.rules.get(&(from, to)).copied().unwrap_or_default()
    }
}

/// All 20 ordered pairs `(S, R)` with `S != R`.
pub fn rule_keys() -> impl Iterator<Item = (Relation, Relation)> {
    Relation::ALL
        .into_iter()
        .flat_map(|s| Relation::ALL.into_iter().map(move |r| (s, r)))
        .filter(|(s, r)| s != r)
}

/// Pair statistics over a collection of matrices; rules are all `NEVER`.
pub fn majority_from_matrices<'a>(
    matrices: impl IntoIterator<Item = &'a CoocMatrix>,
) -> MatrixCorrectionParams {
    let mut pairs: BTreeMap<(ArgToken, ArgToken), PairStats> = BTreeMap::new();
    for m in matrices {
        let order = m.order();
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                let stats = pairs.entry((order[i].clone(), order[j].clone())).or_default();
                stats.by_relation[m.at(i, j).index()] += 1;
            }
        }
    }
    MatrixCorrectionParams {
        pairs,
        rules: rule_keys().map(|k| (k, RuleParams::Never)).collect(),
    }
}

/// Majority relations and pair counts of a training dictionary.
pub fn matrix_majority(training: &Lexicon) -> Result<MatrixCorrectionParams> {
    let matrices = training_matrices(training)?;
    Ok(majority_from_matrices(matrices.values()))
}

pub fn training_matrices(training: &Lexicon) -> Result<BTreeMap<String, CoocMatrix>> {
    training
        .verbs()
        .map(|v| Ok((v.clone(), cooc_matrix(&training.frames(v))?)))
        .collect()
}

/// Corrected copy of `matrix`. Every cell is decided from the input value,
/// so corrections never cascade.
pub fn correct_matrix(
    matrix: &CoocMatrix,
    method: MatrixMethod,
    params: &MatrixCorrectionParams,
) -> CoocMatrix {
    let mut out = matrix.clone();
    if method == MatrixMethod::A {
        return out;
    }
    let order = matrix.order();
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            let Some(stats) = params.stats(&order[i], &order[j]) else { continue };
            if stats.total() == 0 {
                continue;
            }
            let current = matrix.at(i, j);
            let majority = stats.majority();
            if current == majority {
                continue;
            }
            let replace = match method {
                MatrixMethod::A => false,
                MatrixMethod::B => true,
                MatrixMethod::C => params
                    .rule(current, majority)
                    .fires(stats.count(majority), stats.total()),
            };
            if replace {
                out.set_pair(i, j, majority);
            }
        }
    }
    out
}

/// Thresholds tried for `p`: multiples of 1/20.
pub const RULE_P_STEPS: u32 = 20;
/// Largest offset `t` tried.
pub const RULE_MAX_T: u32 = 3;

/// A cell the rule `(S, R)` could flip, with the agreement change if it did.
struct Candidate {
    c_rel: u32,
    c_pair: u32,
    gain: i64,
}

/// Learns the rule table of method C by maximizing agreement between the
/// corrected `step4` matrices and the training matrices.
///
/// Each cell can only be flipped by the rule keyed by its own value and its
/// majority, so the 20 rules are optimized independently.
pub fn learn_matrix_params(
    step4: &BTreeMap<String, CoocMatrix>,
    training: &Lexicon,
) -> Result<MatrixCorrectionParams> {
    let gold = training_matrices(training)?;
    let (_, total) = agreement_counts(step4, &gold);
    if total == 0 {
        return Err(ValexError::data("no comparable triples"));
    }
    let mut params = majority_from_matrices(gold.values());

    let mut candidates: BTreeMap<(Relation, Relation), Vec<Candidate>> = BTreeMap::new();
    for (verb, m) in step4 {
        let Some(g) = gold.get(verb) else { continue };
        let order = m.order();
        for i in 0..order.len() {
            let Some(gi) = g.position(&order[i]) else { continue };
            for j in i + 1..order.len() {
                let Some(gj) = g.position(&order[j]) else { continue };
                let Some(stats) = params.stats(&order[i], &order[j]) else { continue };
                let current = m.at(i, j);
                let majority = stats.majority();
                if current == majority {
                    continue;
                }
                let target = g.at(gi, gj);
                // Both (i, j) and its mirror change together.
                let gain = 2 * ((majority == target) as i64 - (current == target) as i64);
                candidates.entry((current, majority)).or_default().push(Candidate {
                    c_rel: stats.count(majority),
                    c_pair: stats.total(),
                    gain,
                });
            }
        }
    }

    for key in rule_keys() {
        let Some(cells) = candidates.get(&key) else { continue };
        let mut best = (0i64, RuleParams::Never);
        // Larger p and t come first so that equal gains keep the more
        // conservative rule.
        for k in (0..=RULE_P_STEPS).rev() {
            for t in (0..=RULE_MAX_T).rev() {
                let rule = RuleParams::Fire {
                    p: k as f64 / RULE_P_STEPS as f64,
                    t,
                };
                let gain: i64 = cells
                    .iter()
                    .filter(|c| rule.fires(c.c_rel, c.c_pair))
                    .map(|c| c.gain)
                    .sum();
                if gain > best.0 {
                    best = (gain, rule);
                }
            }
        }
        params.rules.insert(key, best.1);
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooc::agreement_score;
    use crate::frame::{frame, tok, FrameSet};
    use proptest::prelude::*;

    fn frames(list: &[&str]) -> FrameSet {
        list.iter().map(|f| frame(f)).collect()
    }

    fn matrix(list: &[&str]) -> CoocMatrix {
        cooc_matrix(&frames(list)).unwrap()
    }

    #[test]
    fn single_verb_majority_is_its_matrix() {
        let mut training = Lexicon::new();
        training.set_frames("v", &frames(&["a,b", "a", "c"]));
        let params = matrix_majority(&training).unwrap();
        let m = matrix(&["a,b", "a", "c"]);
        for a in m.order() {
            for b in m.order() {
                if a != b {
                    assert_eq!(params.majority(a, b), m.get(a, b));
                }
            }
        }
        assert_eq!(params.rules.len(), 20);
        assert!(params.rules.values().all(|r| *r == RuleParams::Never));
    }

    #[test]
    fn ties_follow_the_relation_order() {
        let mut training = Lexicon::new();
        training.set_frames("v", &frames(&["a", "b"]));
        training.set_frames("w", &frames(&["a", "b", "a,b", ""]));
        let params = matrix_majority(&training).unwrap();
        assert_eq!(params.majority(&tok("a"), &tok("b")), Some(Relation::Excl));
    }

    #[test]
    fn seven_of_ten_implications() {
        let mut training = Lexicon::new();
        for i in 0..10 {
            let list: &[&str] = if i < 7 { &["a,b", "b"] } else { &["a", "b"] };
            training.set_frames(&format!("v{i}"), &frames(list));
        }
        let params = matrix_majority(&training).unwrap();
        let (a, b) = (tok("a"), tok("b"));
        let stats = params.stats(&a, &b).unwrap();
        assert_eq!(params.majority(&a, &b), Some(Relation::Impl));
        assert_eq!(stats.count(Relation::Impl), 7);
        assert_eq!(stats.total(), 10);
        assert_eq!(params.majority(&b, &a), Some(Relation::ImplBy));
        assert_eq!(params.stats(&b, &a).unwrap().count(Relation::ImplBy), 7);
    }

    #[test]
    fn method_a_and_b() {
        let mut training = Lexicon::new();
        training.set_frames("w", &frames(&["a", "b"]));
        let params = matrix_majority(&training).unwrap();
        let m = matrix(&["a,b,c", "a", "b", ""]);
        assert_eq!(correct_matrix(&m, MatrixMethod::A, &params), m);
        let b = correct_matrix(&m, MatrixMethod::B, &params);
        assert_eq!(b.get(&tok("a"), &tok("b")), Some(Relation::Excl));
        // Pairs unknown to the training dictionary stay as they are.
        assert_eq!(b.get(&tok("a"), &tok("c")), m.get(&tok("a"), &tok("c")));
        assert_eq!(b.get(&tok("c"), &tok("b")), m.get(&tok("c"), &tok("b")));
    }

    #[test]
    fn method_c_flips_when_the_count_test_passes() {
        let mut training = Lexicon::new();
        for i in 0..9 {
            training.set_frames(&format!("x{i}"), &frames(&["a", "b"]));
        }
        training.set_frames("y", &frames(&["a", "b", "a,b", ""]));
        let mut params = matrix_majority(&training).unwrap();
        let indep = matrix(&["a", "b", "a,b", ""]);
        params
            .rules
            .insert((Relation::Indep, Relation::Excl), RuleParams::Fire { p: 0.85, t: 1 });
        // 9 >= 0.85 * 10 + 1 fails.
        let out = correct_matrix(&indep, MatrixMethod::C, &params);
        assert_eq!(out.get(&tok("a"), &tok("b")), Some(Relation::Indep));
        params
            .rules
            .insert((Relation::Indep, Relation::Excl), RuleParams::Fire { p: 0.8, t: 1 });
        let out = correct_matrix(&indep, MatrixMethod::C, &params);
        assert_eq!(out.get(&tok("a"), &tok("b")), Some(Relation::Excl));
        assert_eq!(out.get(&tok("b"), &tok("a")), Some(Relation::Excl));
    }

    #[test]
    fn perfect_step4_learns_never() {
        let mut training = Lexicon::new();
        training.set_frames("v", &frames(&["a,b", "a"]));
        training.set_frames("w", &frames(&["a", "b"]));
        let step4: BTreeMap<String, CoocMatrix> = training_matrices(&training).unwrap();
        let params = learn_matrix_params(&step4, &training).unwrap();
        assert!(params.rules.values().all(|r| *r == RuleParams::Never));
    }

    #[test]
    fn planted_independence_error_is_corrected() {
        let mut training = Lexicon::new();
        let mut step4 = BTreeMap::new();
        for i in 0..20 {
            let verb = format!("v{i:02}");
            let gold: &[&str] = if i < 18 { &["a", "b"] } else { &["a", "b", "a,b", ""] };
            training.set_frames(&verb, &frames(gold));
            step4.insert(verb, matrix(&["a", "b", "a,b", ""]));
        }
        let params = learn_matrix_params(&step4, &training).unwrap();
        let rule = params.rule(Relation::Indep, Relation::Excl);
        assert!(rule.fires(18, 20), "{rule}");
        let before = agreement_score(&step4, &training_matrices(&training).unwrap()).unwrap();
        let corrected: BTreeMap<String, CoocMatrix> = step4
            .iter()
            .map(|(v, m)| (v.clone(), correct_matrix(m, MatrixMethod::C, &params)))
            .collect();
        let after = agreement_score(&corrected, &training_matrices(&training).unwrap()).unwrap();
        assert!(after > before, "{after} <= {before}");
    }

    #[test]
    fn no_comparable_triples() {
        let mut training = Lexicon::new();
        training.set_frames("v", &frames(&["a"]));
        let step4: BTreeMap<String, CoocMatrix> = [("w".to_string(), matrix(&["a"]))].into();
        assert!(learn_matrix_params(&step4, &training).is_err());
    }

    #[test]
    fn rule_text_round_trip() {
        for rule in [
            RuleParams::Never,
            RuleParams::Fire { p: 0.35, t: 2 },
            RuleParams::Fire { p: 1.0, t: 0 },
        ] {
            assert_eq!(rule.to_string().parse::<RuleParams>().unwrap(), rule);
        }
        assert!("0.5".parse::<RuleParams>().is_err());
        assert!("1.5,1".parse::<RuleParams>().is_err());
        assert_eq!("c".parse::<MatrixMethod>().unwrap(), MatrixMethod::C);
        assert!("D".parse::<MatrixMethod>().is_err());
    }

    fn arb_lexicon(prefix: &'static str) -> impl Strategy<Value = Lexicon> {
        let frame_set = proptest::collection::btree_set(0u8..16, 1..6);
        proptest::collection::vec(frame_set, 1..8).prop_map(move |verbs| {
            let mut lex = Lexicon::new();
            for (i, masks) in verbs.into_iter().enumerate() {
                let set: FrameSet = masks
                    .into_iter()
                    .map(|m| {
                        let args = ["a", "b", "c", "d"]
                            .iter()
                            .enumerate()
                            .filter(|(k, _)| m & (1 << k) != 0)
                            .map(|(_, a)| tok(a));
                        Frame::new(args).unwrap()
                    })
                    .collect();
                lex.set_frames(&format!("{prefix}{i}"), &set);
            }
            lex
        })
    }

    use crate::frame::Frame;

    proptest! {
        #[test]
        fn method_c_never_loses_training_agreement(
            training in arb_lexicon("v"),
            noisy in arb_lexicon("v"),
        ) {
            let step4: BTreeMap<String, CoocMatrix> = training_matrices(&noisy).unwrap();
            let gold = training_matrices(&training).unwrap();
            if let Ok(params) = learn_matrix_params(&step4, &training) {
                let corrected: BTreeMap<String, CoocMatrix> = step4
                    .iter()
                    .map(|(v, m)| (v.clone(), correct_matrix(m, MatrixMethod::C, &params)))
                    .collect();
                let a = agreement_score(&step4, &gold).unwrap();
                let c = agreement_score(&corrected, &gold).unwrap();
                prop_assert!(c >= a);
            }
        }
    }
}
