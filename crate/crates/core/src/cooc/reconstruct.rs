//! Reconstruction of the maximal frame set consistent with an [`EntryTriple`].

use std::collections::HashSet;

use super::{EntryTriple, Relation};
use crate::error::{Result, ValexError};
use crate::frame::{Frame, FrameSet};

/// Largest possible-argument set the exhaustive search accepts.
pub const BRUTEFORCE_MAX_ARGS: usize = 20;

/// Enumerates every subset of the possible arguments and keeps those that
/// contain the required ones and satisfy every matrix cell.
pub fn reconstruct_bruteforce(triple: &EntryTriple) -> Result<FrameSet> {
    let order = triple.matrix().order();
    let n = order.len();
    if n > BRUTEFORCE_MAX_ARGS {
        return Err(ValexError::data(format!(
            "{n} possible arguments exceed the exhaustive limit of {BRUTEFORCE_MAX_ARGS}; use DP"
        )));
    }
    let required_mask: u32 = order
        .iter()
        .enumerate()
        .filter(|(_, a)| triple.required().contains(*a))
        .fold(0, |m, (i, _)| m | 1 << i);

    let mut out = FrameSet::new();
    for mask in 0u32..(1u32 << n) {
        if mask & required_mask != required_mask {
            continue;
        }
        let member = |i: usize| mask >> i & 1 == 1;
        let consistent = (0..n).all(|i| {
            (0..n).all(|j| triple.matrix().at(i, j).admits(member(i), member(j)))
        });
        if consistent {
            out.insert(Frame::new((0..n).filter(|&i| member(i)).map(|i| order[i].clone()))?);
        }
    }
    Ok(out)
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Bits {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn with(&self, i: usize) -> Bits {
        let mut b = self.clone();
        b.0[i / 64] |= 1 << (i % 64);
        b
    }
}

/// Builds the reconstruction argument by argument.
///
/// After step `n` the state list holds the included subsets of the first `n`
/// arguments that can still be extended to a member of the result; the
/// excluded part of each state is the complement within that prefix. Each
/// argument pair is checked exactly once, when its later member is placed.
pub fn reconstruct_dp(triple: &EntryTriple) -> Result<FrameSet> {
    let matrix = triple.matrix();
    let order = matrix.order();
    let n = order.len();

    let mut states = vec![Bits::new(n)];
    for cur in 0..n {
        let optional = !triple.required().contains(&order[cur]);
        let mut next = Vec::with_capacity(states.len() * 2);
        let mut seen = HashSet::with_capacity(states.len() * 2);
        for included in &states {
            let rel = |prev: usize| matrix.at(cur, prev);

            // `cur` joins the frame: no exclusion with members, and no
            // excluded argument may be forced by it.
            let can_include = (0..cur).all(|prev| {
                let r = rel(prev);
                if included.get(prev) {
                    r != Relation::Excl
                } else {
                    !matches!(r, Relation::Cooc | Relation::Impl)
                }
            });
            if can_include {
                let state = included.with(cur);
                if seen.insert(state.clone()) {
                    next.push(state);
                }
            }

            // `cur` stays out: it must be optional and no member may force it.
            let can_exclude = optional
                && (0..cur)
                    .filter(|&prev| included.get(prev))
                    .all(|prev| !matches!(rel(prev), Relation::Cooc | Relation::ImplBy));
            if can_exclude && seen.insert(included.clone()) {
                next.push(included.clone());
            }
        }
        states = next;
    }

    states
        .iter()
        .map(|bits| Frame::new((0..n).filter(|&i| bits.get(i)).map(|i| order[i].clone())))
        .collect()
}
