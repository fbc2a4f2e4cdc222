//! Binomial hypothesis test frame filter.
//!
//! Frame `f` is kept for verb `v` when seeing it `c(v,f)` or more times out
//! of `c(v)` is improbable (tail probability at most `alpha`) under a learned
//! per-frame noise rate `p_f`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::grid::{learn_threshold, GridLearnerResult};
use crate::error::{Result, ValexError};
use crate::frame::{Frame, FrameSet};
use crate::lexicon::{FrameCounts, Lexicon};

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// `P[X >= k]` for `X ~ Binomial(n, p)`.
pub fn binomial_tail(k: u64, n: u64, p: f64) -> Result<f64> {
    if k > n {
        return Err(ValexError::numeric(format!("tail start {k} exceeds {n} trials")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(ValexError::numeric(format!("probability {p} outside [0, 1]")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    // Sum whichever side has fewer terms.
    if n - k < k {
        Ok(sum_pmf(n, p, k, n).min(1.0))
    } else {
        Ok((1.0 - sum_pmf(n, p, 0, k - 1)).max(0.0))
    }
}

/// `sum_{m=from}^{to} C(n,m) p^m (1-p)^(n-m)` with log-space terms.
fn sum_pmf(n: u64, p: f64, from: u64, to: u64) -> f64 {
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut ln_choose = ln_binomial(n, from);
    let mut total = 0.0;
    for m in from..=to {
        if m > from {
            ln_choose += ((n - m + 1) as f64 / m as f64).ln();
        }
        total += (ln_choose + m as f64 * ln_p + (n - m) as f64 * ln_q).exp();
    }
    total
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// Whether the test keeps a frame observed `c_vf` times among `c_v`.
pub fn bht_retains(c_vf: u64, c_v: u64, p: f64, alpha: f64) -> bool {
    match binomial_tail(c_vf.min(c_v), c_v, p) {
        Ok(tail) => tail <= alpha,
        Err(_) => false,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameThresholds {
    pub p_f: BTreeMap<Frame, f64>,
    pub alpha: f64,
}

impl Default for FrameThresholds {
    fn default() -> Self {
        FrameThresholds {
            p_f: BTreeMap::new(),
            alpha: DEFAULT_ALPHA,
        }
    }
}

/// Counts rounded to whole clauses, as the test needs integral trials.
fn integral_counts(entry: &FrameCounts) -> (BTreeMap<&Frame, u64>, u64) {
    let counts: BTreeMap<&Frame, u64> = entry.iter().map(|(f, c)| (f, c.round() as u64)).collect();
    let total = counts.values().sum();
    (counts, total)
}

/// Frames of one entry that pass the test. Frames without a learned `p_f`
/// are rejected.
pub fn bht_filter(entry: &FrameCounts, thresholds: &FrameThresholds) -> FrameSet {
    let (counts, c_v) = integral_counts(entry);
    counts
        .into_iter()
        .filter(|(f, c_vf)| match thresholds.p_f.get(*f) {
            Some(&p) => bht_retains(*c_vf, c_v, p, thresholds.alpha),
            None => false,
        })
        .map(|(f, _)| f.clone())
        .collect()
}

/// Retention as a function of `p` for fixed counts: true on `[0, p*]`.
///
/// The boundary is bracketed once by bisection; only grid points inside the
/// final bracket are evaluated exactly.
struct RetentionCut {
    c_vf: u64,
    c_v: u64,
    alpha: f64,
    lo: f64,
    hi: f64,
}

impl RetentionCut {
    fn new(c_vf: u64, c_v: u64, alpha: f64) -> RetentionCut {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        if c_vf == 0 {
            // Tail is 1 for every p.
            return RetentionCut { c_vf, c_v, alpha, lo: -1.0, hi: -1.0 };
        }
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if bht_retains(c_vf, c_v, mid, alpha) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        RetentionCut { c_vf, c_v, alpha, lo, hi }
    }

    fn retains(&self, p: f64) -> bool {
        if p <= self.lo {
            true
        } else if p >= self.hi {
            false
        } else {
            bht_retains(self.c_vf, self.c_v, p, self.alpha)
        }
    }
}

/// Learned `p_f` values with learner diagnostics.
#[derive(Clone, Debug)]
pub struct FrameLearning {
    pub thresholds: FrameThresholds,
    pub results: BTreeMap<Frame, GridLearnerResult>,
}

/// Learns `p_f` for every frame seen in either dictionary by minimizing the
/// number of misclassified shared verbs.
pub fn learn_frame_thresholds(
    prelim: &Lexicon,
    training: &Lexicon,
    alpha: f64,
) -> Result<FrameLearning> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ValexError::numeric(format!("significance level {alpha} outside (0, 1)")));
    }
    let shared: Vec<(&String, &FrameCounts)> = prelim
        .entries()
        .filter(|(v, _)| training.contains_verb(v))
        .collect();
    if shared.is_empty() {
        return Err(ValexError::data(
            "the preliminary and training dictionaries share no verbs",
        ));
    }
    let mut frames: FrameSet = training
        .entries()
        .flat_map(|(_, e)| e.keys().cloned())
        .collect();
    frames.extend(prelim.entries().flat_map(|(_, e)| e.keys().cloned()));

    let verb_counts: Vec<(BTreeMap<&Frame, u64>, u64, FrameSet)> = shared
        .iter()
        .map(|(v, e)| {
            let (counts, total) = integral_counts(e);
            (counts, total, training.frames(v))
        })
        .collect();

    let results: Vec<(Frame, GridLearnerResult)> = frames
        .into_par_iter()
        .map(|f| {
            // Verbs that never show f are rejected for any p.
            let mut fixed_errors = 0u64;
            let mut cuts = Vec::new();
            for (counts, c_v, gold) in &verb_counts {
                let c_vf = counts.get(&f).copied().unwrap_or(0);
                let target = gold.contains(&f);
                if c_vf == 0 {
                    fixed_errors += target as u64;
                } else {
                    cuts.push((RetentionCut::new(c_vf, *c_v, alpha), target));
                }
            }
            let result = learn_threshold(|p| {
                fixed_errors
                    + cuts
                        .iter()
                        .filter(|(cut, target)| cut.retains(p) != *target)
                        .count() as u64
            });
            (f, result)
        })
        .collect();

    let mut out = FrameLearning {
        thresholds: FrameThresholds {
            p_f: BTreeMap::new(),
            alpha,
        },
        results: BTreeMap::new(),
    };
    for (f, r) in results {
        out.thresholds.p_f.insert(f.clone(), r.threshold);
        out.results.insert(f, r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::frame;
    use proptest::prelude::*;

    #[test]
    fn tail_edge_cases() {
        assert_eq!(binomial_tail(0, 5, 0.3).unwrap(), 1.0);
        assert!((binomial_tail(3, 3, 0.5).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(binomial_tail(1, 4, 0.0).unwrap(), 0.0);
        assert_eq!(binomial_tail(4, 4, 1.0).unwrap(), 1.0);
        assert!(binomial_tail(5, 4, 0.5).is_err());
        assert!(binomial_tail(1, 4, 1.5).is_err());
        assert!(binomial_tail(1, 4, f64::NAN).is_err());
    }

    /// Exact tail for `p = num / den`.
    fn exact_tail(k: u64, n: u64, num: i64, den: i64) -> f64 {
        use num::{BigInt, BigRational, One, ToPrimitive, Zero};
        let p = BigRational::new(BigInt::from(num), BigInt::from(den));
        let q = BigRational::one() - &p;
        let mut choose = BigInt::one();
        let mut total = BigRational::zero();
        for m in 0..=n {
            if m > 0 {
                choose = choose * BigInt::from(n - m + 1) / BigInt::from(m);
            }
            if m >= k {
                let term = num::pow(p.clone(), m as usize) * num::pow(q.clone(), (n - m) as usize);
                total += BigRational::from_integer(choose.clone()) * term;
            }
        }
        total.to_f64().unwrap()
    }

    #[test]
    fn tail_reference_values() {
        let t = binomial_tail(2, 10, 0.1).unwrap();
        assert!((t - 0.263_901_070_9).abs() < 1e-12, "{t}");
        assert!((t - exact_tail(2, 10, 1, 10)).abs() < 1e-12);
        let t = binomial_tail(4, 20, 0.05).unwrap();
        assert!((t - exact_tail(4, 20, 5, 100)).abs() < 1e-12, "{t}");
        assert!((t - 0.015_901_526).abs() < 1e-9, "{t}");
    }

    #[test]
    fn tail_matches_exact_rationals_on_a_grid() {
        for n in [1u64, 2, 7, 13, 30] {
            for k in 0..=n {
                for step in 0..=100 {
                    let exact = exact_tail(k, n, step, 100);
                    let t = binomial_tail(k, n, step as f64 / 100.0).unwrap();
                    assert!((t - exact).abs() < 1e-12, "k={k} n={n} p={step}/100: {t} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn large_trials_stay_finite() {
        let t = binomial_tail(30, 5000, 0.001).unwrap();
        assert!(t > 0.0 && t < 1e-6, "{t}");
        let t = binomial_tail(2, 5000, 0.001).unwrap();
        assert!(t > 0.9, "{t}");
    }

    #[test]
    fn filter_examples() {
        let th = |p: f64| FrameThresholds {
            p_f: [(frame("a"), p), (frame("b"), p)].into(),
            alpha: 0.05,
        };
        let entry: FrameCounts = [(frame("a"), 4.0), (frame("b"), 16.0)].into();
        assert!(bht_filter(&entry, &th(0.05)).contains(&frame("a")));
        assert!(bht_filter(&entry, &th(0.0)).contains(&frame("a")));
        assert!(!bht_filter(&entry, &th(0.5)).contains(&frame("a")));
        let unknown: FrameCounts = [(frame("c"), 20.0)].into();
        assert!(bht_filter(&unknown, &th(0.0)).is_empty());
        assert!(!bht_retains(0, 20, 0.0, 0.05));
    }

    #[test]
    fn learned_threshold_separates_noise() {
        let mut prelim = Lexicon::new();
        let mut training = Lexicon::new();
        for i in 0..12 {
            let v = format!("v{i:02}");
            let selects = i % 3 != 0;
            prelim.add(&v, frame("n"), 80.0);
            prelim.add(&v, frame("a,n"), if selects { 20.0 } else { 1.0 });
            training.add(&v, frame("n"), 1.0);
            if selects {
                training.add(&v, frame("a,n"), 1.0);
            }
        }
        let learned = learn_frame_thresholds(&prelim, &training, 0.05).unwrap();
        assert_eq!(learned.results[&frame("a,n")].min_error, 0);
        let kept = bht_filter(prelim.entry("v01").unwrap(), &learned.thresholds);
        assert!(kept.contains(&frame("a,n")));
        let kept = bht_filter(prelim.entry("v00").unwrap(), &learned.thresholds);
        assert!(!kept.contains(&frame("a,n")));
        assert!(learn_frame_thresholds(&prelim, &training, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn tail_is_monotone_in_k(n in 1u64..60, p in 0.0f64..=1.0) {
            let mut prev = 1.0;
            for k in 0..=n {
                let t = binomial_tail(k, n, p).unwrap();
                prop_assert!(t <= prev + 1e-12);
                prop_assert!((0.0..=1.0).contains(&t));
                prev = t;
            }
        }

        #[test]
        fn retention_is_monotone_in_count(n in 1u64..80, p in 0.0f64..=1.0) {
            let mut was_kept = false;
            for k in 0..=n {
                let kept = bht_retains(k, n, p, 0.05);
                prop_assert!(kept || !was_kept);
                was_kept = kept;
            }
        }

        #[test]
        fn cut_agrees_with_direct_test(k in 1u64..30, extra in 0u64..30, p in 0.0f64..=1.0) {
            let n = k + extra;
            let cut = RetentionCut::new(k, n, 0.05);
            prop_assert_eq!(cut.retains(p), bht_retains(k, n, p, 0.05));
        }
    }
}
