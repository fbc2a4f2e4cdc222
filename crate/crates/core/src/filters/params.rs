//! Learned-parameter files.
//!
//! One `kind TAB key TAB value` row per parameter:
//!
//! | kind          | key              | value                        |
//! |---------------|------------------|------------------------------|
//! | `t_arg`       | `*`              | offset `t` of the arg rules  |
//! | `p_pos`       | argument         | threshold                    |
//! | `p_neg`       | argument         | threshold                    |
//! | `alpha`       | `*`              | significance level           |
//! | `p_frame`     | frame            | threshold                    |
//! | `pair_counts` | `a,b` with a < b | five counts, relation order  |
//! | `matrix_rule` | `S=>R`           | `NEVER` or `p,t`             |
//!
//! Rows are written in the order above, keys sorted within a kind.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use super::args::ArgThresholds;
use super::bht::FrameThresholds;
use super::matrix::{rule_keys, MatrixCorrectionParams, PairStats, RuleParams};
use crate::cooc::Relation;
use crate::error::{Result, ValexError};
use crate::frame::{ArgToken, Frame};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LearnedParams {
    pub args: ArgThresholds,
    pub frames: FrameThresholds,
    pub matrix: MatrixCorrectionParams,
}

const GLOBAL_KEY: &str = "*";

fn threshold(value: &str, source_name: &str, line: usize) -> Result<f64> {
    let p: f64 = value
        .parse()
        .map_err(|_| ValexError::format(source_name, line, format!("bad number {value:?}")))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(ValexError::format(
            source_name,
            line,
            format!("threshold {p} outside [0, 1]"),
        ));
    }
    Ok(p)
}

fn rule_key(key: &str) -> Option<(Relation, Relation)> {
    let (s, r) = key.split_once("=>")?;
    let (s, r) = (s.parse().ok()?, r.parse().ok()?);
    (s != r).then_some((s, r))
}

pub fn read_params(input: impl BufRead, source_name: &str) -> Result<LearnedParams> {
    let mut params = LearnedParams::default();
    let mut seen = BTreeSet::new();
    for (index, line) in input.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|e| ValexError::io(source_name, e))?;
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ValexError::format(source_name, line_no, message);
        let fields: Vec<&str> = line.split('\t').collect();
        let [kind, key, value] = fields[..] else {
            return Err(err(format!("expected 3 tab-separated fields, found {}", fields.len())));
        };
        if !seen.insert((kind.to_string(), key.to_string())) {
            return Err(err(format!("duplicate {kind} entry for {key:?}")));
        }
        match kind {
            "t_arg" => {
                params.args.t = value.parse().map_err(|_| err(format!("bad offset {value:?}")))?;
            }
            "alpha" => {
                let alpha = threshold(value, source_name, line_no)?;
                if alpha == 0.0 || alpha == 1.0 {
                    return Err(err("significance level must lie strictly inside (0, 1)".into()));
                }
                params.frames.alpha = alpha;
            }
            "p_pos" | "p_neg" => {
                let arg = ArgToken::parse(key).map_err(|e| err(e.to_string()))?;
                let p = threshold(value, source_name, line_no)?;
                let map = if kind == "p_pos" {
                    &mut params.args.p_pos
                } else {
                    &mut params.args.p_neg
                };
                map.insert(arg, p);
            }
            "p_frame" => {
                let frame = Frame::parse(key).map_err(|e| err(e.to_string()))?;
                let p = threshold(value, source_name, line_no)?;
                params.frames.p_f.insert(frame, p);
            }
            "pair_counts" => {
                let (a, b) = key.split_once(',').ok_or_else(|| err(format!("bad pair {key:?}")))?;
                let a = ArgToken::parse(a).map_err(|e| err(e.to_string()))?;
                let b = ArgToken::parse(b).map_err(|e| err(e.to_string()))?;
                if a >= b {
                    return Err(err(format!("pair {key:?} is not in canonical order")));
                }
                let counts: Vec<u32> = value
                    .split(',')
                    .map(|c| c.parse().map_err(|_| err(format!("bad count {c:?}"))))
                    .collect::<Result<_>>()?;
                let by_relation: [u32; 5] = counts
                    .try_into()
                    .map_err(|_| err("expected five comma-separated counts".into()))?;
                params.matrix.pairs.insert((a, b), PairStats { by_relation });
            }
            "matrix_rule" => {
                let rule_key = rule_key(key).ok_or_else(|| err(format!("bad rule key {key:?}")))?;
                let rule: RuleParams = value.parse().map_err(|e: ValexError| err(e.to_string()))?;
                params.matrix.rules.insert(rule_key, rule);
            }
            other => return Err(err(format!("unknown parameter kind {other:?}"))),
        }
    }
    Ok(params)
}

pub fn write_params(params: &LearnedParams, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "t_arg\t{GLOBAL_KEY}\t{}", params.args.t)?;
    for (a, p) in &params.args.p_pos {
        writeln!(out, "p_pos\t{a}\t{p}")?;
    }
    for (a, p) in &params.args.p_neg {
        writeln!(out, "p_neg\t{a}\t{p}")?;
    }
    writeln!(out, "alpha\t{GLOBAL_KEY}\t{}", params.frames.alpha)?;
    for (f, p) in &params.frames.p_f {
        writeln!(out, "p_frame\t{f}\t{p}")?;
    }
    for ((a, b), stats) in &params.matrix.pairs {
        let counts: Vec<String> = stats.by_relation.iter().map(|c| c.to_string()).collect();
        writeln!(out, "pair_counts\t{a},{b}\t{}", counts.join(","))?;
    }
    for (s, r) in rule_keys() {
        if let Some(rule) = params.matrix.rules.get(&(s, r)) {
            writeln!(out, "matrix_rule\t{}=>{}\t{rule}", s.name(), r.name())?;
        }
    }
    Ok(())
}

pub fn params_to_string(params: &LearnedParams) -> String {
    let mut buf = Vec::new();
    write_params(params, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("parameters render as UTF-8")
}
