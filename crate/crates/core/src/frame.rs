//! Argument tokens and valence frames.
//!
//! An [`ArgToken`] is an opaque argument-type identifier such as `np(nom)`,
//! `na+np(loc)` or `sie`. A [`Frame`] is a duplicate-free set of tokens kept
//! in canonical (byte-wise) order, so that two frames listing the same
//! arguments in a different order compare equal.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, ValexError};

/// Normalized argument-type identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArgToken(String);

/// A set of argument tokens (possible or required arguments).
pub type ArgSet = BTreeSet<ArgToken>;

/// A set of frames, e.g. all valence frames of one verb.
pub type FrameSet = BTreeSet<Frame>;

impl ArgToken {
    /// Normalizes and validates a surface form.
    ///
    /// Whitespace is dropped and colon-delimited parser notation is rewritten,
    /// so `:prepnp:na:acc:` becomes `na+np(acc)` and `:np:nom:` becomes
    /// `np(nom)`.
    pub fn parse(raw: &str) -> Result<ArgToken> {
        let compact: String = raw.split_whitespace().collect();
        let text = rewrite_colon_notation(&compact).unwrap_or(compact);
        if text.is_empty() {
            return Err(ValexError::data("empty argument token"));
        }
        if let Some(bad) = text.chars().find(|c| matches!(c, ',' | '|')) {
            return Err(ValexError::data(format!(
                "argument token {text:?} contains reserved character {bad:?}"
            )));
        }
        Ok(ArgToken(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn rewrite_colon_notation(text: &str) -> Option<String> {
    let inner = text.strip_prefix(':')?.strip_suffix(':')?;
    let parts: Vec<&str> = inner.split(':').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return None;
    }
    match parts.as_slice() {
        [kind] => Some(kind.to_string()),
        [kind, case] => Some(format!("{kind}({case})")),
        [kind, prep, case] if kind.starts_with("prep") && kind.len() > 4 => {
            Some(format!("{prep}+{}({case})", &kind[4..]))
        }
        _ => None,
    }
}

impl fmt::Display for ArgToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ArgToken {
    type Err = ValexError;

    fn from_str(s: &str) -> Result<Self> {
        ArgToken::parse(s)
    }
}

/// A valence frame: a canonically sorted, duplicate-free list of arguments.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Frame {
    args: Vec<ArgToken>,
}

impl Frame {
    /// The frame with no arguments.
    pub fn empty() -> Frame {
        Frame::default()
    }

    /// Builds a frame, rejecting repeated argument types.
    pub fn new(args: impl IntoIterator<Item = ArgToken>) -> Result<Frame> {
        let mut args: Vec<ArgToken> = args.into_iter().collect();
        args.sort();
        if let Some(w) = args.windows(2).find(|w| w[0] == w[1]) {
            return Err(ValexError::data(format!(
                "argument {} repeated in frame",
                w[0]
            )));
        }
        Ok(Frame { args })
    }

    /// Builds a frame from a set, which cannot contain duplicates.
    pub fn from_set(args: &ArgSet) -> Frame {
        Frame {
            args: args.iter().cloned().collect(),
        }
    }

    /// Parses a comma-joined argument list; the empty string is the empty frame.
    pub fn parse(text: &str) -> Result<Frame> {
        if text.trim().is_empty() {
            return Ok(Frame::empty());
        }
        let args = text
            .split(',')
            .map(ArgToken::parse)
            .collect::<Result<Vec<_>>>()?;
        Frame::new(args)
    }

    pub fn args(&self) -> &[ArgToken] {
        &self.args
    }

    pub fn len(&self) -> usize {
        self.args.len()
    }

    pub fn is_empty(&self) -> bool {
        self.args.is_empty()
    }

    pub fn contains(&self, arg: &ArgToken) -> bool {
        self.args.binary_search(arg).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ArgToken> {
        self.args.iter()
    }

    pub fn to_set(&self) -> ArgSet {
        self.args.iter().cloned().collect()
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(arg.as_str())?;
        }
        Ok(())
    }
}

impl FromStr for Frame {
    type Err = ValexError;

    fn from_str(s: &str) -> Result<Self> {
        Frame::parse(s)
    }
}

#[cfg(test)]
pub(crate) fn tok(s: &str) -> ArgToken {
    ArgToken::parse(s).unwrap()
}

#[cfg(test)]
pub(crate) fn frame(s: &str) -> Frame {
    Frame::parse(s).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalizes_whitespace_and_colon_notation() {
        assert_eq!(tok("  np (nom) ").as_str(), "np(nom)");
        assert_eq!(tok(":np:acc:").as_str(), "np(acc)");
        assert_eq!(tok(":prepnp:na:loc:").as_str(), "na+np(loc)");
        assert_eq!(tok("ZE").as_str(), "ZE");
        assert_eq!(tok("sie").as_str(), "sie");
    }

    #[test]
    fn rejects_reserved_characters() {
        assert!(ArgToken::parse("").is_err());
        assert!(ArgToken::parse("   ").is_err());
        assert!(ArgToken::parse("a,b").is_err());
        assert!(ArgToken::parse("a|b").is_err());
    }

    #[test]
    fn frames_are_order_insensitive() {
        assert_eq!(frame("np(nom),np(acc)"), frame("np(acc), np(nom)"));
        assert_eq!(frame("np(nom),np(acc)").to_string(), "np(acc),np(nom)");
        assert_eq!(frame("na+np(loc),np(nom),sie").len(), 3);
    }

    #[test]
    fn repeated_argument_is_rejected() {
        assert!(Frame::parse("np(nom),np(nom)").is_err());
    }

    #[test]
    fn empty_frame_round_trips() {
        let f = Frame::parse("").unwrap();
        assert!(f.is_empty());
        assert_eq!(f.to_string(), "");
    }

    proptest! {
        #[test]
        fn token_print_parse_round_trip(s in "[a-zA-Z0-9()+_.:-]{1,12}") {
            if let Ok(t) = ArgToken::parse(&s) {
                prop_assert_eq!(ArgToken::parse(&t.to_string()).unwrap(), t);
            }
        }

        #[test]
        fn frame_print_parse_round_trip(set in proptest::collection::btree_set("[a-z]{1,4}", 0..6)) {
            let f = Frame::new(set.iter().map(|s| tok(s))).unwrap();
            prop_assert_eq!(Frame::parse(&f.to_string()).unwrap(), f);
        }
    }
}
