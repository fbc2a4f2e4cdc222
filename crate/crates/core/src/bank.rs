//! Banks of reduced parse forests and their text format.
//!
//! A bank file is a sequence of blank-line separated blocks, one per clause:
//!
//! ```text
//! # Kto zastąpi piekarza?
//! + zastąpić | np(acc),np(nom)
//!   zastąpić | np(gen),np(nom)
//! ```
//!
//! The optional `#` line carries the sentence; every other line is one
//! reduced parse, `+`-prefixed when it is the correct one.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Result, ValexError};
use crate::frame::Frame;

/// A parse type: the identity of a reduced parse across the bank.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParseType {
    pub verb: String,
    pub frame: Frame,
}

impl ParseType {
    pub fn new(verb: impl Into<String>, frame: Frame) -> ParseType {
        ParseType {
            verb: verb.into(),
            frame,
        }
    }
}

impl fmt::Display for ParseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {}", self.verb, self.frame)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedParse {
    pub verb: String,
    pub frame: Frame,
    pub gold: bool,
}

impl ReducedParse {
    pub fn new(verb: impl Into<String>, frame: Frame, gold: bool) -> ReducedParse {
        ReducedParse {
            verb: verb.into(),
            frame,
            gold,
        }
    }

    pub fn parse_type(&self) -> ParseType {
        ParseType::new(self.verb.clone(), self.frame.clone())
    }

    pub fn is(&self, parse_type: &ParseType) -> bool {
        self.verb == parse_type.verb && self.frame == parse_type.frame
    }
}

/// The alternative reduced parses of one clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseForest {
    pub clause_id: usize,
    pub sentence: Option<String>,
    parses: Vec<ReducedParse>,
}

impl ParseForest {
    pub fn new(
        clause_id: usize,
        sentence: Option<String>,
        parses: Vec<ReducedParse>,
    ) -> Result<ParseForest> {
        if parses.is_empty() {
            return Err(ValexError::data(format!("clause {clause_id} has no parses")));
        }
        let mut seen = BTreeSet::new();
        for p in &parses {
            validate_verb(&p.verb)?;
            if !seen.insert((&p.verb, &p.frame)) {
                return Err(ValexError::data(format!(
                    "clause {clause_id} lists parse {} | {} twice",
                    p.verb, p.frame
                )));
            }
        }
        if let Some(s) = &sentence {
            if s.contains('\n') {
                return Err(ValexError::data("sentence text spans several lines"));
            }
        }
        Ok(ParseForest {
            clause_id,
            sentence,
            parses,
        })
    }

    pub fn parses(&self) -> &[ReducedParse] {
        &self.parses
    }

    pub fn len(&self) -> usize {
        self.parses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parses.is_empty()
    }

    pub fn contains(&self, parse_type: &ParseType) -> bool {
        self.parses.iter().any(|p| p.is(parse_type))
    }

    pub fn has_gold(&self) -> bool {
        self.parses.iter().any(|p| p.gold)
    }
}

fn validate_verb(verb: &str) -> Result<()> {
    if verb.is_empty() {
        return Err(ValexError::data("empty verb lemma"));
    }
    if verb.chars().any(|c| c.is_whitespace() || c == '|') || verb.starts_with(['+', '#']) {
        return Err(ValexError::data(format!("invalid verb lemma {verb:?}")));
    }
    Ok(())
}

/// An ordered sequence of parse forests with contiguous clause ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bank {
    forests: Vec<ParseForest>,
}

impl Bank {
    pub fn new(forests: Vec<ParseForest>) -> Result<Bank> {
        if let Some((i, f)) = forests.iter().enumerate().find(|(i, f)| f.clause_id != *i) {
            return Err(ValexError::data(format!(
                "clause id {} found at position {i}; ids must be contiguous from 0",
                f.clause_id
            )));
        }
        Ok(Bank { forests })
    }

    /// Builds a bank from parse lists, numbering clauses from 0.
    pub fn from_parses(forests: Vec<Vec<ReducedParse>>) -> Result<Bank> {
        let forests = forests
            .into_iter()
            .enumerate()
            .map(|(i, parses)| ParseForest::new(i, None, parses))
            .collect::<Result<Vec<_>>>()?;
        Ok(Bank { forests })
    }

    pub fn forests(&self) -> &[ParseForest] {
        &self.forests
    }

    pub fn len(&self) -> usize {
        self.forests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forests.is_empty()
    }
}

/// Reads a bank; `source_name` is used in error messages.
pub fn read_bank(input: impl BufRead, source_name: &str) -> Result<Bank> {
    let mut forests = Vec::new();
    let mut sentence: Option<String> = None;
    let mut parses: Vec<ReducedParse> = Vec::new();
    let mut block_start = 0;

    let close = |sentence: &mut Option<String>,
                     parses: &mut Vec<ReducedParse>,
                     line: usize,
                     forests: &mut Vec<ParseForest>|
     -> Result<()> {
        if sentence.is_none() && parses.is_empty() {
            return Ok(());
        }
        let forest = ParseForest::new(forests.len(), sentence.take(), std::mem::take(parses))
            .map_err(|e| ValexError::format(source_name, line, e.to_string()))?;
        forests.push(forest);
        Ok(())
    };

    let mut line_no = 0;
    for line in input.lines() {
        line_no += 1;
        let line = line.map_err(|e| ValexError::io(source_name, e))?;
        if line.trim().is_empty() {
            close(&mut sentence, &mut parses, block_start, &mut forests)?;
            continue;
        }
        if sentence.is_none() && parses.is_empty() {
            block_start = line_no;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if !parses.is_empty() || sentence.is_some() {
                return Err(ValexError::format(
                    source_name,
                    line_no,
                    "sentence line must open a block",
                ));
            }
            sentence = Some(rest.strip_prefix(' ').unwrap_or(rest).to_string());
            continue;
        }
        let parse = parse_line(&line)
            .map_err(|msg| ValexError::format(source_name, line_no, msg))?;
        parses.push(parse);
    }
    close(&mut sentence, &mut parses, block_start, &mut forests)?;
    Ok(Bank { forests })
}

fn parse_line(line: &str) -> std::result::Result<ReducedParse, String> {
    let trimmed = line.trim_start();
    let (gold, body) = match trimmed.strip_prefix('+') {
        Some(rest) => (true, rest),
        None => (false, trimmed),
    };
    let (verb, args) = body
        .split_once('|')
        .ok_or_else(|| format!("parse line {line:?} lacks the '|' separator"))?;
    let verb = verb.trim();
    validate_verb(verb).map_err(|e| e.to_string())?;
    let frame = Frame::parse(args).map_err(|e| e.to_string())?;
    Ok(ReducedParse::new(verb, frame, gold))
}

/// Writes the canonical rendering of a bank.
pub fn write_bank(bank: &Bank, mut out: impl Write) -> std::io::Result<()> {
    for forest in &bank.forests {
        if let Some(s) = &forest.sentence {
            writeln!(out, "# {s}")?;
        }
        for p in &forest.parses {
            let mark = if p.gold { "+ " } else { "  " };
            if p.frame.is_empty() {
                writeln!(out, "{mark}{} |", p.verb)?;
            } else {
                writeln!(out, "{mark}{} | {}", p.verb, p.frame)?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn bank_to_string(bank: &Bank) -> String {
    let mut buf = Vec::new();
    write_bank(bank, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("bank text is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::frame;
    use proptest::prelude::*;

    fn read(text: &str) -> Result<Bank> {
        read_bank(text.as_bytes(), "test")
    }

    #[test]
    fn reads_gold_marked_block() {
        let bank = read(
            "# Kto zastąpi piekarza?\n+ zastąpić | np(acc),np(nom)\n  zastąpić | np(gen),np(nom)\n",
        )
        .unwrap();
        assert_eq!(bank.len(), 1);
        let forest = &bank.forests()[0];
        assert_eq!(forest.sentence.as_deref(), Some("Kto zastąpi piekarza?"));
        assert_eq!(forest.len(), 2);
        assert!(forest.parses()[0].gold);
        assert!(!forest.parses()[1].gold);
        assert_eq!(forest.parses()[1].frame, frame("np(nom),np(gen)"));
    }

    #[test]
    fn accepts_parser_colon_notation() {
        let bank = read("+płakać | :np:nom:,:prepnp:na:loc:\n").unwrap();
        assert_eq!(bank.forests()[0].parses()[0].frame, frame("np(nom),na+np(loc)"));
    }

    #[test]
    fn missing_separator_reports_line() {
        let err = read("# s\n+ a | x\n\nzastąpić np(acc)\n").unwrap_err();
        assert!(matches!(err, ValexError::Format { line: 4, .. }), "{err}");
    }

    #[test]
    fn duplicate_parse_is_rejected() {
        let err = read("v | a,b\nv | b,a\n").unwrap_err();
        assert!(err.to_string().contains("twice"), "{err}");
    }

    #[test]
    fn sentence_without_parses_is_rejected() {
        assert!(read("# lonely\n\nv | a\n").is_err());
    }

    #[test]
    fn empty_bank_writes_nothing() {
        assert_eq!(bank_to_string(&Bank::default()), "");
        assert!(read("").unwrap().is_empty());
    }

    #[test]
    fn single_parse_block() {
        let forest = ParseForest::new(
            0,
            Some("s".into()),
            vec![ReducedParse::new("v", frame("a"), true)],
        )
        .unwrap();
        let text = bank_to_string(&Bank::new(vec![forest]).unwrap());
        assert_eq!(text, "# s\n+ v | a\n\n");
    }

    #[test]
    fn empty_frame_is_written_without_trailing_space() {
        let bank = Bank::from_parses(vec![vec![ReducedParse::new("padać", Frame::empty(), false)]])
            .unwrap();
        let text = bank_to_string(&bank);
        assert_eq!(text, "  padać |\n\n");
        assert_eq!(read(&text).unwrap(), bank);
    }

    #[test]
    fn clause_ids_must_be_contiguous() {
        let forest = ParseForest::new(3, None, vec![ReducedParse::new("v", frame("a"), false)])
            .unwrap();
        assert!(Bank::new(vec![forest]).is_err());
    }

    fn arb_bank() -> impl Strategy<Value = Bank> {
        let parse = ("[a-c]{1,2}", proptest::collection::btree_set("[a-d]", 0..3), any::<bool>());
        let forest = (
            proptest::option::of("[a-z ]{0,10}"),
            proptest::collection::vec(parse, 1..4),
        );
        proptest::collection::vec(forest, 0..6).prop_map(|forests| {
            let forests = forests
                .into_iter()
                .enumerate()
                .map(|(i, (sentence, parses))| {
                    let mut seen = BTreeSet::new();
                    let parses = parses
                        .into_iter()
                        .filter(|(v, args, _)| seen.insert((v.clone(), args.clone())))
                        .map(|(v, args, gold)| {
                            let f = Frame::new(args.iter().map(|a| a.parse().unwrap())).unwrap();
                            ReducedParse::new(v, f, gold)
                        })
                        .collect();
                    ParseForest::new(i, sentence, parses).unwrap()
                })
                .collect();
            Bank::new(forests).unwrap()
        })
    }

    proptest! {
        #[test]
        fn write_read_round_trip(bank in arb_bank()) {
            let text = bank_to_string(&bank);
            let back = read(&text).unwrap();
            prop_assert_eq!(bank_to_string(&back), text);
        }
    }
}
