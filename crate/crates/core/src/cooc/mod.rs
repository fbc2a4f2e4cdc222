//! Co-occurrence matrix algebra over frame sets.
//!
//! A verb's frame set `F` is summarized by the triple `(L, E, M)`: the
//! possible arguments (union of frames), the required arguments
//! (intersection of frames) and a matrix assigning every pair of possible
//! arguments one of five [`Relation`]s. [`reconstruct_dp`] goes back from
//! the triple to the maximal frame set consistent with it.

mod reconstruct;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, ValexError};
use crate::frame::{ArgSet, ArgToken, Frame, FrameSet};

pub use reconstruct::{reconstruct_bruteforce, reconstruct_dp, BRUTEFORCE_MAX_ARGS};

/// Pairwise relation between two arguments of one verb.
///
/// The declaration order doubles as the fixed tie-break order used when
/// picking a majority relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    /// The supports are disjoint.
    Excl,
    /// The supports are equal.
    Cooc,
    /// The support of `a` is strictly contained in the support of `b`.
    Impl,
    /// The support of `b` is strictly contained in the support of `a`.
    ImplBy,
    /// None of the above.
    Indep,
}

impl Relation {
    pub const ALL: [Relation; 5] = [
        Relation::Excl,
        Relation::Cooc,
        Relation::Impl,
        Relation::ImplBy,
        Relation::Indep,
    ];

    pub fn converse(self) -> Relation {
        match self {
            Relation::Impl => Relation::ImplBy,
            Relation::ImplBy => Relation::Impl,
            other => other,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Relation::Excl => "EXCL",
            Relation::Cooc => "COOC",
            Relation::Impl => "IMPL",
            Relation::ImplBy => "IMPLBY",
            Relation::Indep => "INDEP",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Excl => "×",
            Relation::Cooc => "↔",
            Relation::Impl => "→",
            Relation::ImplBy => "←",
            Relation::Indep => "⊥",
        }
    }

    /// Whether a frame with the given memberships of `a` and `b` respects `a R b`.
    pub fn admits(self, a_in: bool, b_in: bool) -> bool {
        match self {
            Relation::Excl => !(a_in && b_in),
            Relation::Cooc => a_in == b_in,
            Relation::Impl => !a_in || b_in,
            Relation::ImplBy => !b_in || a_in,
            Relation::Indep => true,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relation {
    type Err = ValexError;

    fn from_str(s: &str) -> Result<Self> {
        Relation::ALL
            .into_iter()
            .find(|r| r.name() == s || r.symbol() == s)
            .ok_or_else(|| ValexError::data(format!("unknown relation {s:?}")))
    }
}

/// Square relation table over an enumerated argument list.
///
/// Invariants: diagonal cells are [`Relation::Cooc`] and
/// `cell(b, a) == cell(a, b).converse()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoocMatrix {
    order: Vec<ArgToken>,
    cells: Vec<Relation>,
}

impl CoocMatrix {
    /// Builds a matrix over `order`, filling the upper triangle from `cell`
    /// and mirroring it.
    pub fn from_upper(
        order: Vec<ArgToken>,
        mut cell: impl FnMut(usize, usize) -> Relation,
    ) -> CoocMatrix {
        let n = order.len();
        let mut cells = vec![Relation::Cooc; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let r = cell(i, j);
                cells[i * n + j] = r;
                cells[j * n + i] = r.converse();
            }
        }
        CoocMatrix { order, cells }
    }

    /// Builds a matrix from a full row-major table, validating the invariants.
    pub fn from_cells(order: Vec<ArgToken>, cells: Vec<Relation>) -> Result<CoocMatrix> {
        let n = order.len();
        if cells.len() != n * n {
            return Err(ValexError::data(format!(
                "matrix over {n} arguments needs {} cells, got {}",
                n * n,
                cells.len()
            )));
        }
        if order.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ValexError::data("matrix order must be sorted and distinct"));
        }
        for i in 0..n {
            if cells[i * n + i] != Relation::Cooc {
                return Err(ValexError::data(format!(
                    "diagonal cell for {} is not COOC",
                    order[i]
                )));
            }
            for j in 0..n {
                if cells[j * n + i] != cells[i * n + j].converse() {
                    return Err(ValexError::data(format!(
                        "cells ({}, {}) and ({}, {}) are not converse",
                        order[i], order[j], order[j], order[i]
                    )));
                }
            }
        }
        Ok(CoocMatrix { order, cells })
    }

    pub fn order(&self) -> &[ArgToken] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn position(&self, arg: &ArgToken) -> Option<usize> {
        self.order.binary_search(arg).ok()
    }

    pub fn at(&self, i: usize, j: usize) -> Relation {
        self.cells[i * self.order.len() + j]
    }

    pub fn get(&self, a: &ArgToken, b: &ArgToken) -> Option<Relation> {
        Some(self.at(self.position(a)?, self.position(b)?))
    }

    /// Sets cell `(i, j)` and its mirror; diagonal cells are left untouched.
    pub fn set_pair(&mut self, i: usize, j: usize, relation: Relation) {
        if i == j {
            return;
        }
        let n = self.order.len();
        self.cells[i * n + j] = relation;
        self.cells[j * n + i] = relation.converse();
    }

    pub fn possible(&self) -> ArgSet {
        self.order.iter().cloned().collect()
    }
}

impl fmt::Display for CoocMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.order {
            write!(f, "\t{a}")?;
        }
        writeln!(f)?;
        for (i, a) in self.order.iter().enumerate() {
            write!(f, "{a}")?;
            for j in 0..self.order.len() {
                write!(f, "\t{}", self.at(i, j).symbol())?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Possible arguments, required arguments and the matrix over the possible ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryTriple {
    possible: ArgSet,
    required: ArgSet,
    matrix: CoocMatrix,
}

impl EntryTriple {
    pub fn new(possible: ArgSet, required: ArgSet, matrix: CoocMatrix) -> Result<EntryTriple> {
        if !required.is_subset(&possible) {
            return Err(ValexError::data("required arguments are not all possible"));
        }
        if !matrix.order().iter().eq(possible.iter()) {
            return Err(ValexError::data(
                "matrix order does not enumerate the possible arguments",
            ));
        }
        Ok(EntryTriple {
            possible,
            required,
            matrix,
        })
    }

    /// Derives the triple `(L(F), E(F), M(F))` of a frame set.
    pub fn from_frames(frames: &FrameSet) -> Result<EntryTriple> {
        let (possible, required) = arg_sets(frames)?;
        let matrix = cooc_matrix(frames)?;
        Ok(EntryTriple {
            possible,
            required,
            matrix,
        })
    }

    pub fn possible(&self) -> &ArgSet {
        &self.possible
    }

    pub fn required(&self) -> &ArgSet {
        &self.required
    }

    pub fn matrix(&self) -> &CoocMatrix {
        &self.matrix
    }

    pub fn with_matrix(mut self, matrix: CoocMatrix) -> Result<EntryTriple> {
        if matrix.order() != self.matrix.order() {
            return Err(ValexError::data("replacement matrix has a different order"));
        }
        self.matrix = matrix;
        Ok(self)
    }
}

/// Union and intersection of a nonempty frame family.
pub fn arg_sets(frames: &FrameSet) -> Result<(ArgSet, ArgSet)> {
    let mut iter = frames.iter();
    let first = iter
        .next()
        .ok_or_else(|| ValexError::data("undefined required set: empty frame family"))?;
    let mut possible = first.to_set();
    let mut required = first.to_set();
    for f in iter {
        possible.extend(f.iter().cloned());
        required.retain(|a| f.contains(a));
    }
    Ok((possible, required))
}

/// Frames-containing-argument bitmask, indexed by frame position.
#[derive(Clone, PartialEq, Eq)]
struct Support(Vec<u64>);

impl Support {
    fn of(frames: &[&Frame], arg: &ArgToken) -> Support {
        let mut words = vec![0u64; frames.len().div_ceil(64)];
        for (k, f) in frames.iter().enumerate() {
            if f.contains(arg) {
                words[k / 64] |= 1 << (k % 64);
            }
        }
        Support(words)
    }

    fn relation_to(&self, other: &Support) -> Relation {
        let inter: Vec<u64> = self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect();
        if inter.iter().all(|&w| w == 0) {
            Relation::Excl
        } else if self == other {
            Relation::Cooc
        } else if inter == self.0 {
            Relation::Impl
        } else if inter == other.0 {
            Relation::ImplBy
        } else {
            Relation::Indep
        }
    }
}

/// The relation between `a` and `b` induced by `frames`.
pub fn relation_of(frames: &FrameSet, a: &ArgToken, b: &ArgToken) -> Result<Relation> {
    let list: Vec<&Frame> = frames.iter().collect();
    let sa = Support::of(&list, a);
    let sb = Support::of(&list, b);
    for (arg, s) in [(a, &sa), (b, &sb)] {
        if s.0.iter().all(|&w| w == 0) {
            return Err(ValexError::data(format!(
                "argument {arg} is not possible for this frame set"
            )));
        }
    }
    Ok(sa.relation_to(&sb))
}

/// The co-occurrence matrix of a nonempty frame family over its possible arguments.
pub fn cooc_matrix(frames: &FrameSet) -> Result<CoocMatrix> {
    let (possible, _) = arg_sets(frames)?;
    let list: Vec<&Frame> = frames.iter().collect();
    let supports: Vec<Support> = possible.iter().map(|a| Support::of(&list, a)).collect();
    let order: Vec<ArgToken> = possible.into_iter().collect();
    Ok(CoocMatrix::from_upper(order, |i, j| {
        supports[i].relation_to(&supports[j])
    }))
}

/// Whether `frame` respects the matrix cell for `(a, b)`.
pub fn phi(frame: &Frame, matrix: &CoocMatrix, a: &ArgToken, b: &ArgToken) -> Result<bool> {
    let relation = matrix.get(a, b).ok_or_else(|| {
        ValexError::data(format!("pair ({a}, {b}) is not covered by the matrix"))
    })?;
    Ok(relation.admits(frame.contains(a), frame.contains(b)))
}

/// Observed agreement between two matrix collections over shared verbs and
/// shared argument pairs (diagonal and both orders included).
pub fn agreement_score(
    first: &BTreeMap<String, CoocMatrix>,
    second: &BTreeMap<String, CoocMatrix>,
) -> Result<f64> {
    let (agree, total) = agreement_counts(first, second);
    if total == 0 {
        return Err(ValexError::data("no comparable triples"));
    }
    Ok(agree as f64 / total as f64)
}

/// `(agreeing, comparable)` triple counts behind [`agreement_score`].
pub fn agreement_counts(
    first: &BTreeMap<String, CoocMatrix>,
    second: &BTreeMap<String, CoocMatrix>,
) -> (usize, usize) {
    let mut agree = 0;
    let mut total = 0;
    for (verb, m1) in first {
        let Some(m2) = second.get(verb) else { continue };
        let shared: Vec<(usize, usize)> = m1
            .order()
            .iter()
            .enumerate()
            .filter_map(|(i, a)| m2.position(a).map(|j| (i, j)))
            .collect();
        for &(i1, i2) in &shared {
            for &(j1, j2) in &shared {
                total += 1;
                if m1.at(i1, j1) == m2.at(i2, j2) {
                    agree += 1;
                }
            }
        }
    }
    (agree, total)
}

#[cfg(test)]
pub(crate) fn przylapac() -> FrameSet {
    use crate::frame::frame;
    [
        frame("np(nom),np(acc)"),
        frame("np(nom),np(acc),na+np(loc)"),
        frame("np(nom),sie,na+np(loc)"),
    ]
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{frame, tok};
    use proptest::prelude::*;

    fn set(items: &[&str]) -> ArgSet {
        items.iter().map(|s| tok(s)).collect()
    }

    fn frames(items: &[&str]) -> FrameSet {
        items.iter().map(|s| frame(s)).collect()
    }

    #[test]
    fn arg_sets_of_przylapac() {
        let (l, e) = arg_sets(&przylapac()).unwrap();
        assert_eq!(l, set(&["np(nom)", "np(acc)", "sie", "na+np(loc)"]));
        assert_eq!(e, set(&["np(nom)"]));
    }

    #[test]
    fn arg_sets_trivial_cases() {
        assert_eq!(arg_sets(&frames(&["a"])).unwrap(), (set(&["a"]), set(&["a"])));
        assert_eq!(arg_sets(&frames(&[""])).unwrap(), (set(&[]), set(&[])));
        let err = arg_sets(&FrameSet::new()).unwrap_err();
        assert!(err.to_string().contains("undefined required set"));
    }

    #[test]
    fn relations_of_przylapac() {
        let f = przylapac();
        let r = |a: &str, b: &str| relation_of(&f, &tok(a), &tok(b)).unwrap();
        assert_eq!(r("np(acc)", "sie"), Relation::Excl);
        assert_eq!(r("sie", "na+np(loc)"), Relation::Impl);
        assert_eq!(r("np(acc)", "np(acc)"), Relation::Cooc);
        assert!(relation_of(&f, &tok("np(dat)"), &tok("sie")).is_err());
    }

    #[test]
    fn przylapac_matrix_matches_display() {
        use Relation::*;
        let m = cooc_matrix(&przylapac()).unwrap();
        let rows = [
            ("np(nom)", [Cooc, ImplBy, ImplBy, ImplBy]),
            ("np(acc)", [Impl, Cooc, Excl, Indep]),
            ("sie", [Impl, Excl, Cooc, Impl]),
            ("na+np(loc)", [Impl, Indep, ImplBy, Cooc]),
        ];
        let cols = ["np(nom)", "np(acc)", "sie", "na+np(loc)"];
        for (a, row) in rows {
            for (b, expected) in cols.iter().zip(row) {
                assert_eq!(m.get(&tok(a), &tok(b)), Some(expected), "cell ({a}, {b})");
            }
        }
    }

    #[test]
    fn small_matrices() {
        let m = cooc_matrix(&frames(&["a,b"])).unwrap();
        assert!((0..2).all(|i| (0..2).all(|j| m.at(i, j) == Relation::Cooc)));
        let m = cooc_matrix(&frames(&["a", "b"])).unwrap();
        assert_eq!(m.get(&tok("a"), &tok("b")), Some(Relation::Excl));
    }

    #[test]
    fn phi_cases() {
        let order = vec![tok("a"), tok("b")];
        let with = |r: Relation| CoocMatrix::from_upper(order.clone(), |_, _| r);
        let (a, b) = (tok("a"), tok("b"));
        assert!(phi(&frame("a,b"), &with(Relation::Indep), &a, &b).unwrap());
        assert!(!phi(&frame("a,b"), &with(Relation::Excl), &a, &b).unwrap());
        assert!(!phi(&frame("a"), &with(Relation::Impl), &a, &b).unwrap());
        assert!(phi(&frame("b"), &with(Relation::Impl), &a, &b).unwrap());
        assert!(!phi(&frame("b"), &with(Relation::ImplBy), &a, &b).unwrap());
        assert!(!phi(&frame("a"), &with(Relation::Cooc), &a, &b).unwrap());
        assert!(phi(&frame("a"), &with(Relation::Cooc), &tok("x"), &b).is_err());
    }

    #[test]
    fn from_cells_checks_invariants() {
        use Relation::*;
        let order = vec![tok("a"), tok("b")];
        assert!(CoocMatrix::from_cells(order.clone(), vec![Cooc, Impl, ImplBy, Cooc]).is_ok());
        assert!(CoocMatrix::from_cells(order.clone(), vec![Cooc, Impl, Impl, Cooc]).is_err());
        assert!(CoocMatrix::from_cells(order.clone(), vec![Excl, Excl, Excl, Cooc]).is_err());
        assert!(CoocMatrix::from_cells(order, vec![Cooc]).is_err());
    }

    #[test]
    fn relation_names_parse() {
        for r in Relation::ALL {
            assert_eq!(r.name().parse::<Relation>().unwrap(), r);
            assert_eq!(r.symbol().parse::<Relation>().unwrap(), r);
            assert_eq!(r.converse().converse(), r);
        }
    }

    fn collection(entries: &[(&str, &[&str])]) -> BTreeMap<String, CoocMatrix> {
        entries
            .iter()
            .map(|(v, fs)| (v.to_string(), cooc_matrix(&frames(fs)).unwrap()))
            .collect()
    }

    #[test]
    fn agreement_examples() {
        let x = collection(&[("v", &["a,b", "a"]), ("w", &["a", "b"])]);
        assert_eq!(agreement_score(&x, &x).unwrap(), 1.0);

        // a ← b versus a × b on the single shared verb.
        let one = collection(&[("v", &["a,b", "a"])]);
        let two = collection(&[("v", &["a", "b"])]);
        assert_eq!(agreement_score(&one, &two).unwrap(), 0.5);

        let other = collection(&[("u", &["a"])]);
        assert!(agreement_score(&x, &other).is_err());
    }

    fn arb_frames() -> impl Strategy<Value = FrameSet> {
        let names = ["a", "b", "c", "d", "e", "f"];
        proptest::collection::btree_set(0u8..64, 1..8).prop_map(move |masks| {
            masks
                .into_iter()
                .map(|m| {
                    Frame::new((0..6).filter(|i| m >> i & 1 == 1).map(|i| tok(names[i]))).unwrap()
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn derived_matrix_invariants(f in arb_frames()) {
            let m = cooc_matrix(&f).unwrap();
            let rebuilt = CoocMatrix::from_cells(
                m.order().to_vec(),
                (0..m.len()).flat_map(|i| (0..m.len()).map(move |j| (i, j))).map(|(i, j)| m.at(i, j)).collect(),
            );
            prop_assert!(rebuilt.is_ok());
            let (l, e) = arg_sets(&f).unwrap();
            prop_assert!(e.is_subset(&l));
            prop_assert!(m.order().iter().eq(l.iter()));
        }

        #[test]
        fn agreement_is_symmetric(f in arb_frames(), g in arb_frames()) {
            let x: BTreeMap<String, CoocMatrix> = [("v".to_string(), cooc_matrix(&f).unwrap())].into();
            let y: BTreeMap<String, CoocMatrix> = [("v".to_string(), cooc_matrix(&g).unwrap())].into();
            let xy = agreement_score(&x, &y);
            let yx = agreement_score(&y, &x);
            match (xy, yx) {
                (Ok(p), Ok(q)) => prop_assert_eq!(p, q),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "asymmetric error"),
            }
        }
    }
}
