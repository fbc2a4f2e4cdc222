//! Counted and gold valence dictionaries.
//!
//! A [`Lexicon`] maps a verb lemma to its frames with nonnegative counts.
//! Preliminary dictionaries carry corpus counts (integral for hard counting,
//! fractional for soft counting); gold and filtered dictionaries carry 1.
//!
//! The file format is a TSV with one `verb<TAB>args<TAB>count` row per
//! (verb, frame) pair, sorted by verb and frame. The count column may be
//! omitted on input and then defaults to 1.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::bank::{Bank, ParseType};
use crate::em::WeightTable;
use crate::error::{Result, ValexError};
use crate::frame::{ArgSet, ArgToken, Frame, FrameSet};

/// Counted frames of a single verb.
pub type FrameCounts = BTreeMap<Frame, f64>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, FrameCounts>,
}

impl Lexicon {
    pub fn new() -> Lexicon {
        Lexicon::default()
    }

    /// Adds `count` to the (verb, frame) cell. Nonpositive counts are ignored.
    pub fn add(&mut self, verb: &str, frame: Frame, count: f64) {
        if count > 0.0 {
            *self
                .entries
                .entry(verb.to_string())
                .or_default()
                .entry(frame)
                .or_insert(0.0) += count;
        }
    }

    /// Replaces a verb's entry; an empty map removes the verb.
    pub fn set_entry(&mut self, verb: &str, frames: FrameCounts) {
        let frames: FrameCounts = frames.into_iter().filter(|(_, c)| *c > 0.0).collect();
        if frames.is_empty() {
            self.entries.remove(verb);
        } else {
            self.entries.insert(verb.to_string(), frames);
        }
    }

    /// Adds every frame of `frames` with count 1.
    pub fn set_frames(&mut self, verb: &str, frames: &FrameSet) {
        self.set_entry(verb, frames.iter().map(|f| (f.clone(), 1.0)).collect());
    }

    pub fn entry(&self, verb: &str) -> Option<&FrameCounts> {
        self.entries.get(verb)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &FrameCounts)> {
        self.entries.iter()
    }

    pub fn verbs(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    pub fn contains_verb(&self, verb: &str) -> bool {
        self.entries.contains_key(verb)
    }

    pub fn count(&self, verb: &str, frame: &Frame) -> f64 {
        self.entries
            .get(verb)
            .and_then(|e| e.get(frame))
            .copied()
            .unwrap_or(0.0)
    }

    /// Frame set of a verb (empty when the verb is absent).
    pub fn frames(&self, verb: &str) -> FrameSet {
        self.entries
            .get(verb)
            .map(|e| e.keys().cloned().collect())
            .unwrap_or_default()
    }

    /// Possible arguments of a verb: the union of its frames.
    pub fn possible(&self, verb: &str) -> ArgSet {
        self.entries
            .get(verb)
            .map(|e| e.keys().flat_map(|f| f.iter().cloned()).collect())
            .unwrap_or_default()
    }

    /// Every argument type that occurs in some frame.
    pub fn arguments(&self) -> ArgSet {
        self.entries
            .values()
            .flat_map(|e| e.keys().flat_map(|f| f.iter().cloned()))
            .collect()
    }

    pub fn verb_count(&self) -> usize {
        self.entries.len()
    }

    /// Number of (verb, frame) pairs.
    pub fn pair_count(&self) -> usize {
        self.entries.values().map(|e| e.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all counts.
    pub fn total(&self) -> f64 {
        self.entries.values().flat_map(|e| e.values()).sum()
    }

    /// The sub-lexicon over the given verbs.
    pub fn restrict<'a>(&self, verbs: impl IntoIterator<Item = &'a String>) -> Lexicon {
        let entries = verbs
            .into_iter()
            .filter_map(|v| self.entries.get(v).map(|e| (v.clone(), e.clone())))
            .collect();
        Lexicon { entries }
    }

    /// Copy of the lexicon with every count set to 1.
    pub fn as_dictionary(&self) -> Lexicon {
        let entries = self
            .entries
            .iter()
            .map(|(v, e)| (v.clone(), e.keys().map(|f| (f.clone(), 1.0)).collect()))
            .collect();
        Lexicon { entries }
    }
}

/// `c(v)`: total count of a verb's entry.
pub fn verb_total(entry: &FrameCounts) -> f64 {
    entry.values().sum()
}

/// `c(v, a)`: total count of the frames containing `arg`.
pub fn arg_total(entry: &FrameCounts, arg: &ArgToken) -> f64 {
    entry
        .iter()
        .filter(|(f, _)| f.contains(arg))
        .map(|(_, c)| c)
        .sum()
}

/// Reads a lexicon TSV; `source_name` is used in error messages.
pub fn read_lexicon(input: impl BufRead, source_name: &str) -> Result<Lexicon> {
    let mut lexicon = Lexicon::new();
    let mut seen = std::collections::BTreeSet::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| ValexError::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let err = |msg: String| ValexError::format(source_name, line_no, msg);
        if fields.len() < 2 || fields.len() > 3 {
            return Err(err(format!(
                "expected verb, frame and optional count, found {} fields",
                fields.len()
            )));
        }
        let verb = fields[0].trim();
        if verb.is_empty() || verb.chars().any(char::is_whitespace) {
            return Err(err(format!("invalid verb lemma {verb:?}")));
        }
        let frame = Frame::parse(fields[1]).map_err(|e| err(e.to_string()))?;
        let count = match fields.get(2) {
            None => 1.0,
            Some(text) => parse_count(text.trim()).ok_or_else(|| {
                err(format!("count {text:?} is not a nonnegative number"))
            })?,
        };
        if !seen.insert((verb.to_string(), frame.clone())) {
            return Err(err(format!("duplicate row for {verb} | {frame}")));
        }
        if count > 0.0 {
            lexicon.add(verb, frame, count);
        }
    }
    Ok(lexicon)
}

fn parse_count(text: &str) -> Option<f64> {
    let value: f64 = text.parse().ok()?;
    (value.is_finite() && value >= 0.0).then_some(value)
}

/// Renders a count with at most nine fractional digits and no trailing zeros.
pub fn format_count(count: f64) -> String {
    let text = format!("{count:.9}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    if text == "-0" {
        "0".to_string()
    } else {
        text.to_string()
    }
}

pub fn write_lexicon(lexicon: &Lexicon, mut out: impl Write) -> std::io::Result<()> {
    for (verb, entry) in &lexicon.entries {
        for (frame, count) in entry {
            let count = format_count(*count);
            // Counts below the file resolution are not representable.
            if count != "0" {
                writeln!(out, "{verb}\t{frame}\t{count}")?;
            }
        }
    }
    Ok(())
}

pub fn lexicon_to_string(lexicon: &Lexicon) -> String {
    let mut buf = Vec::new();
    write_lexicon(lexicon, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("lexicon text is UTF-8")
}

/// Frequency table of the selected parses, one per clause.
pub fn hard_counts(bank: &Bank, selections: &[ParseType]) -> Result<Lexicon> {
    if selections.len() != bank.len() {
        return Err(ValexError::data(format!(
            "{} selections for {} clauses",
            selections.len(),
            bank.len()
        )));
    }
    let mut lexicon = Lexicon::new();
    for (forest, chosen) in bank.forests().iter().zip(selections) {
        if !forest.contains(chosen) {
            return Err(ValexError::data(format!(
                "selection {chosen} is not in clause {}",
                forest.clause_id
            )));
        }
        lexicon.add(&chosen.verb, chosen.frame.clone(), 1.0);
    }
    Ok(lexicon)
}

/// Expected counts `M * p_j` from EM weights.
///
/// A table still at its first iteration (all weights 1) is advanced one
/// step first, since those weights are not yet normalized.
pub fn soft_counts(bank: &Bank, weights: &WeightTable) -> Result<Lexicon> {
    let mut lexicon = Lexicon::new();
    if bank.is_empty() {
        return Ok(lexicon);
    }
    for forest in bank.forests() {
        for p in forest.parses() {
            if weights.weight(&p.parse_type()).is_none() {
                return Err(ValexError::data(format!(
                    "weights lack parse type {}",
                    p.parse_type()
                )));
            }
        }
    }
    let advanced;
    let table = if weights.iteration() < 2 {
        advanced = weights.step(bank)?;
        &advanced
    } else {
        weights
    };
    let m = bank.len() as f64;
    for (parse_type, weight) in table.iter() {
        lexicon.add(&parse_type.verb, parse_type.frame.clone(), m * weight);
    }
    Ok(lexicon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bank::ReducedParse;
    use crate::em::em_weights;
    use crate::frame::frame;
    use proptest::prelude::*;

    fn read(text: &str) -> Result<Lexicon> {
        read_lexicon(text.as_bytes(), "test")
    }

    #[test]
    fn reads_counted_row() {
        let lex = read("przyłapać\tnp(acc),np(nom)\t4\n").unwrap();
        assert_eq!(lex.count("przyłapać", &frame("np(nom),np(acc)")), 4.0);
    }

    #[test]
    fn missing_count_defaults_to_one() {
        let lex = read("v\ta,b\n").unwrap();
        assert_eq!(lex.count("v", &frame("a,b")), 1.0);
    }

    #[test]
    fn empty_frame_field_is_accepted() {
        let lex = read("padać\t\t2\n").unwrap();
        assert_eq!(lex.count("padać", &Frame::empty()), 2.0);
        assert_eq!(lexicon_to_string(&lex), "padać\t\t2\n");
    }

    #[test]
    fn bad_rows_are_rejected() {
        assert!(matches!(
            read("v\ta\t1\nv\ta\t2\n").unwrap_err(),
            ValexError::Format { line: 2, .. }
        ));
        assert!(read("v\ta\tmany\n").is_err());
        assert!(read("v\ta\t-1\n").is_err());
        assert!(read("v\n").is_err());
        assert!(read("v\tb,a\t1\nv\ta,b\t1\n").is_err());
    }

    #[test]
    fn rows_are_sorted_on_output() {
        let lex = read("w\ta\t1\nv\tb\t2.5\nv\ta\t0.333333333333\n").unwrap();
        assert_eq!(lexicon_to_string(&lex), "v\ta\t0.333333333\nv\tb\t2.5\nw\ta\t1\n");
    }

    #[test]
    fn count_formatting() {
        assert_eq!(format_count(4.0), "4");
        assert_eq!(format_count(1.6), "1.6");
        assert_eq!(format_count(16.0 / 15.0), "1.066666667");
        assert_eq!(format_count(1e-12), "0");
    }

    fn przylapac_like_bank() -> Bank {
        let parse = |f: &str, gold| ReducedParse::new("przyłapać", frame(f), gold);
        Bank::from_parses(vec![
            vec![parse("np(acc),np(nom)", true), parse("np(acc),np(gen),np(nom)", false)],
            vec![parse("np(acc),np(nom)", true)],
            vec![parse("np(acc),np(nom)", true), parse("adv,np(nom)", false)],
            vec![parse("np(acc),np(nom)", true)],
            vec![parse("na+np(loc),np(nom),sie", true)],
        ])
        .unwrap()
    }

    #[test]
    fn hard_counts_of_selected_parses() {
        let bank = przylapac_like_bank();
        let picks: Vec<ParseType> = bank
            .forests()
            .iter()
            .map(|f| f.parses()[0].parse_type())
            .collect();
        let lex = hard_counts(&bank, &picks).unwrap();
        assert_eq!(lex.count("przyłapać", &frame("np(acc),np(nom)")), 4.0);
        assert_eq!(lex.count("przyłapać", &frame("na+np(loc),np(nom),sie")), 1.0);
        assert_eq!(lex.total(), bank.len() as f64);

        let mut wrong = picks.clone();
        wrong[1] = ParseType::new("przyłapać", frame("adv"));
        assert!(hard_counts(&bank, &wrong).is_err());
        assert!(hard_counts(&Bank::default(), &[]).unwrap().is_empty());
    }

    #[test]
    fn soft_counts_of_worked_example() {
        let (j1, j2, j3) = (frame("a"), frame("b"), frame("c"));
        let p = |f: &Frame| ReducedParse::new("v", f.clone(), false);
        let bank = Bank::from_parses(vec![vec![p(&j1), p(&j2)], vec![p(&j1)], vec![p(&j2), p(&j3)]])
            .unwrap();
        let table = em_weights(&bank, 3).unwrap();
        let lex = soft_counts(&bank, &table).unwrap();
        assert!((lex.count("v", &j1) - 1.6).abs() < 1e-12);
        assert!((lex.count("v", &j2) - 16.0 / 15.0).abs() < 1e-12);
        assert!((lex.count("v", &j3) - 1.0 / 3.0).abs() < 1e-12);
        assert!((lex.total() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn soft_counts_of_unambiguous_bank_equal_hard_counts() {
        let bank = przylapac_like_bank();
        let single = Bank::from_parses(
            bank.forests().iter().map(|f| vec![f.parses()[0].clone()]).collect(),
        )
        .unwrap();
        let picks: Vec<ParseType> =
            single.forests().iter().map(|f| f.parses()[0].parse_type()).collect();
        let hard = hard_counts(&single, &picks).unwrap();
        for n in 1..4 {
            let soft = soft_counts(&single, &em_weights(&single, n).unwrap()).unwrap();
            assert_eq!(lexicon_to_string(&soft), lexicon_to_string(&hard));
        }
        let missing = em_weights(&single, 2).unwrap();
        assert!(soft_counts(&bank, &missing).is_err());
        assert!(soft_counts(&Bank::default(), &missing).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn lexicon_round_trip(rows in proptest::collection::btree_map(
            ("[a-c]{1,3}", proptest::collection::btree_set("[a-e]", 0..4)),
            0u32..5_000_000,
            0..12,
        )) {
            let mut lex = Lexicon::new();
            for ((verb, args), milli) in rows {
                let f = Frame::new(args.iter().map(|a| a.parse().unwrap())).unwrap();
                lex.add(&verb, f, milli as f64 / 1000.0 + 0.001);
            }
            let text = lexicon_to_string(&lex);
            let back = read(&text).unwrap();
            prop_assert_eq!(lexicon_to_string(&back), text);
        }
    }
}
