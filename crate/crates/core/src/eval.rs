//! Dictionary comparison over a fixed list of test verbs.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Result, ValexError};
use crate::lexicon::Lexicon;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EvalLevel {
    /// Pairs `(verb, frame)`.
    #[default]
    Frame,
    /// Pairs `(verb, argument)` over the possible arguments of each verb.
    Argument,
}

impl EvalLevel {
    pub fn name(self) -> &'static str {
        match self {
            EvalLevel::Frame => "frame",
            EvalLevel::Argument => "argument",
        }
    }
}

impl fmt::Display for EvalLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EvalLevel {
    type Err = ValexError;

    fn from_str(s: &str) -> Result<EvalLevel> {
        match s {
            "frame" => Ok(EvalLevel::Frame),
            "argument" => Ok(EvalLevel::Argument),
            _ => Err(ValexError::data(format!("unknown evaluation level {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prf {
    pub recall: f64,
    pub precision: f64,
    pub f_score: f64,
}

impl Prf {
    pub fn new(recall: f64, precision: f64) -> Prf {
        let f_score = if recall + precision > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            recall,
            precision,
            f_score,
        }
    }
}

type Pair = (String, String);

/// Pairs of `lexicon` restricted to `verbs`.
pub fn pairs(lexicon: &Lexicon, level: EvalLevel, verbs: &[String]) -> BTreeSet<Pair> {
    let mut out = BTreeSet::new();
    for verb in verbs {
        let Some(entry) = lexicon.entry(verb) else { continue };
        match level {
            EvalLevel::Frame => {
                out.extend(entry.keys().map(|f| (verb.clone(), f.to_string())));
            }
            EvalLevel::Argument => {
                out.extend(
                    entry
                        .keys()
                        .flat_map(|f| f.iter())
                        .map(|a| (verb.clone(), a.to_string())),
                );
            }
        }
    }
    out
}

fn require_verbs(verbs: &[String]) -> Result<()> {
    if verbs.is_empty() {
        return Err(ValexError::data("the test verb list is empty"));
    }
    Ok(())
}

/// Number of pairs present in both dictionaries.
pub fn pair_count(first: &Lexicon, second: &Lexicon, level: EvalLevel, verbs: &[String]) -> Result<usize> {
    require_verbs(verbs)?;
    let a = pairs(first, level, verbs);
    let b = pairs(second, level, verbs);
    Ok(a.intersection(&b).count())
}

/// Recall, precision and F of `candidate` against `reference`. An empty
/// candidate has precision 0.
pub fn prf(candidate: &Lexicon, reference: &Lexicon, level: EvalLevel, verbs: &[String]) -> Result<Prf> {
    require_verbs(verbs)?;
    let cand = pairs(candidate, level, verbs);
    let refs = pairs(reference, level, verbs);
    if refs.is_empty() {
        return Err(ValexError::data("the reference has no pairs for the test verbs"));
    }
    let shared = cand.intersection(&refs).count() as f64;
    let precision = if cand.is_empty() { 0.0 } else { shared / cand.len() as f64 };
    Ok(Prf::new(shared / refs.len() as f64, precision))
}

/// Pairwise pair counts (lower triangle, diagonal included) and scores of
/// every dictionary against the one at `reference`.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub names: Vec<String>,
    pub level: EvalLevel,
    /// `counts[i][j]` for `j <= i`.
    pub counts: Vec<Vec<usize>>,
    pub reference: usize,
    pub scores: Vec<Prf>,
}

pub fn report_matrix(
    lexica: &[(String, Lexicon)],
    level: EvalLevel,
    verbs: &[String],
    reference: usize,
) -> Result<Report> {
    if lexica.len() < 2 {
        return Err(ValexError::data("a report needs at least two dictionaries"));
    }
    if reference >= lexica.len() {
        return Err(ValexError::data(format!("no dictionary at position {reference}")));
    }
    require_verbs(verbs)?;
    let sets: Vec<BTreeSet<Pair>> = lexica.iter().map(|(_, l)| pairs(l, level, verbs)).collect();
    let counts = (0..sets.len())
        .map(|i| (0..=i).map(|j| sets[i].intersection(&sets[j]).count()).collect())
        .collect();
    let scores = lexica
        .iter()
        .map(|(_, l)| prf(l, &lexica[reference].1, level, verbs))
        .collect::<Result<_>>()?;
    Ok(Report {
        names: lexica.iter().map(|(n, _)| n.clone()).collect(),
        level,
        counts,
        reference,
        scores,
    })
}

impl Report {
    fn write(&self, mut out: impl Write, score: impl Fn(f64) -> String) -> std::io::Result<()> {
        writeln!(out, "{}\t{}", self.level, self.names.join("\t"))?;
        for (name, row) in self.names.iter().zip(&self.counts) {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            writeln!(out, "{name}\t{}", cells.join("\t"))?;
        }
        let rows: [(&str, fn(&Prf) -> f64); 3] = [
            ("recall", |s| s.recall),
            ("precision", |s| s.precision),
            ("F", |s| s.f_score),
        ];
        for (label, get) in rows {
            let cells: Vec<String> = self.scores.iter().map(|s| score(get(s))).collect();
            writeln!(out, "{label}\t{}", cells.join("\t"))?;
        }
        Ok(())
    }

    /// Report with scores rounded to two decimals.
    pub fn write_tsv(&self, out: impl Write) -> std::io::Result<()> {
        self.write(out, |x| format!("{x:.2}"))
    }

    /// Same layout with scores at full precision.
    pub fn write_full_tsv(&self, out: impl Write) -> std::io::Result<()> {
        self.write(out, |x| format!("{x}"))
    }

    pub fn to_tsv(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("report is UTF-8")
    }
}

/// One verb per line; blank lines are skipped.
pub fn read_verb_list(input: impl BufRead, source_name: &str) -> Result<Vec<String>> {
    let mut verbs = Vec::new();
    let mut seen = BTreeSet::new();
    for (index, line) in input.lines().enumerate() {
        let line = line.map_err(|e| ValexError::io(source_name, e))?;
        let verb = line.trim();
        if verb.is_empty() {
            continue;
        }
        if verb.contains(char::is_whitespace) {
            return Err(ValexError::format(source_name, index + 1, "verb contains whitespace"));
        }
        if seen.insert(verb.to_string()) {
            verbs.push(verb.to_string());
        }
    }
    Ok(verbs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::frame;
    use proptest::prelude::*;

    fn lex(rows: &[(&str, &str)]) -> Lexicon {
        let mut l = Lexicon::new();
        for (v, f) in rows {
            l.add(v, frame(f), 1.0);
        }
        l
    }

    fn verbs(list: &[&str]) -> Vec<String> {
        list.iter().map(|v| v.to_string()).collect()
    }

    #[test]
    fn toy_pair_counts() {
        let x = lex(&[("v", "a"), ("v", "a,b")]);
        let y = lex(&[("v", "a,b"), ("w", "a")]);
        let vw = verbs(&["v", "w"]);
        assert_eq!(pair_count(&x, &y, EvalLevel::Frame, &vw).unwrap(), 1);
        assert_eq!(pair_count(&x, &y, EvalLevel::Argument, &vw).unwrap(), 2);
        assert_eq!(pair_count(&x, &x, EvalLevel::Frame, &vw).unwrap(), 2);
        assert_eq!(pair_count(&x, &lex(&[("u", "a")]), EvalLevel::Frame, &vw).unwrap(), 0);
        assert!(pair_count(&x, &y, EvalLevel::Frame, &[]).is_err());

        let s = prf(&x, &y, EvalLevel::Frame, &vw).unwrap();
        assert_eq!((s.recall, s.precision, s.f_score), (0.5, 0.5, 0.5));
        let s = prf(&x, &x, EvalLevel::Frame, &vw).unwrap();
        assert_eq!((s.recall, s.precision, s.f_score), (1.0, 1.0, 1.0));
        let s = prf(&lex(&[("v", "c")]), &x, EvalLevel::Frame, &vw).unwrap();
        assert_eq!((s.recall, s.precision, s.f_score), (0.0, 0.0, 0.0));
        assert!(prf(&x, &Lexicon::new(), EvalLevel::Frame, &vw).is_err());
    }

    #[test]
    fn report_layout() {
        let x = lex(&[("v", "a"), ("v", "a,b")]);
        let y = lex(&[("v", "a,b"), ("w", "a")]);
        let z = lex(&[("v", "a"), ("w", "a")]);
        let named = vec![
            ("X".to_string(), x),
            ("Y".to_string(), y),
            ("Z".to_string(), z),
        ];
        let report = report_matrix(&named, EvalLevel::Frame, &verbs(&["v", "w"]), 1).unwrap();
        assert_eq!(report.counts, vec![vec![2], vec![1, 2], vec![1, 1, 2]]);
        assert_eq!(report.counts.iter().map(Vec::len).sum::<usize>(), 6);
        assert_eq!(
            report.to_tsv(),
            "frame\tX\tY\tZ\nX\t2\nY\t1\t2\nZ\t1\t1\t2\n\
             recall\t0.50\t1.00\t0.50\nprecision\t0.50\t1.00\t0.50\nF\t0.50\t1.00\t0.50\n"
        );
        assert!(report_matrix(&named[..1], EvalLevel::Frame, &verbs(&["v"]), 0).is_err());
    }

    #[test]
    fn verb_list_reading() {
        let list = read_verb_list("a\n\nb\na\n".as_bytes(), "v.txt").unwrap();
        assert_eq!(list, verbs(&["a", "b"]));
        assert!(read_verb_list("a b\n".as_bytes(), "v.txt").is_err());
    }

    fn arb_lexicon() -> impl Strategy<Value = Lexicon> {
        let verb = prop_oneof![Just("u"), Just("v")];
        let f = prop_oneof![Just("a"), Just("b"), Just("a,b"), Just("c"), Just("")];
        proptest::collection::vec((verb, f), 1..8).prop_map(|rows| {
            let mut l = Lexicon::new();
            for (v, f) in rows {
                l.add(v, frame(f), 1.0);
            }
            l
        })
    }

    proptest! {
        #[test]
        fn pair_count_laws(x in arb_lexicon(), y in arb_lexicon()) {
            let vs = verbs(&["u", "v"]);
            for level in [EvalLevel::Frame, EvalLevel::Argument] {
                let xy = pair_count(&x, &y, level, &vs).unwrap();
                prop_assert_eq!(xy, pair_count(&y, &x, level, &vs).unwrap());
                let xx = pair_count(&x, &x, level, &vs).unwrap();
                let yy = pair_count(&y, &y, level, &vs).unwrap();
                prop_assert!(xy <= xx.min(yy));
            }
        }

        #[test]
        fn prf_swaps(x in arb_lexicon(), y in arb_lexicon()) {
            let vs = verbs(&["u", "v"]);
            if let (Ok(a), Ok(b)) = (prf(&x, &y, EvalLevel::Frame, &vs), prf(&y, &x, EvalLevel::Frame, &vs)) {
                prop_assert_eq!(a.recall, b.precision);
                prop_assert_eq!(a.precision, b.recall);
            }
        }

        #[test]
        fn argument_level_is_frame_level_of_singletons(x in arb_lexicon()) {
            let vs = verbs(&["u", "v"]);
            let mut singles = Lexicon::new();
            for (v, _) in x.entries() {
                for a in x.possible(v) {
                    singles.add(v, crate::frame::Frame::new([a]).unwrap(), 1.0);
                }
            }
            let args = pairs(&x, EvalLevel::Argument, &vs);
            let frames = pairs(&singles, EvalLevel::Frame, &vs);
            prop_assert_eq!(args, frames);
        }
    }
}
