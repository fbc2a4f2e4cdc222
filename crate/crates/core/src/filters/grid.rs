//! Discrete threshold search with progressive grid refinement.

/// Finest resolution the learner refines to.
pub const GRID_CAP: u64 = 100_000;

/// Number of tied minimizers that ends the refinement.
pub const MIN_DEGENERATION: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridLearnerResult {
    /// Chosen threshold, `numerator / resolution`.
    pub threshold: f64,
    pub numerator: u64,
    /// Final grid resolution `N`.
    pub resolution: u64,
    /// Number of grid points attaining the minimal error at `N`.
    pub degeneration: usize,
    pub min_error: u64,
    /// Set when refinement stopped at [`GRID_CAP`] with too few minimizers.
    pub capped: bool,
}

/// Minimizes `error` over `{n / N : n = 0..=N}` for `N = 10, 100, ...`,
/// refining while fewer than ten points tie at the minimum, and returns the
/// median minimizer (the lower middle one for even counts).
pub fn learn_threshold(error: impl FnMut(f64) -> u64) -> GridLearnerResult {
    learn_threshold_capped(error, GRID_CAP)
}

pub fn learn_threshold_capped(mut error: impl FnMut(f64) -> u64, cap: u64) -> GridLearnerResult {
    let mut resolution = 10;
    loop {
        let mut best = u64::MAX;
        let mut minimizers: Vec<u64> = Vec::new();
        for n in 0..=resolution {
            let e = error(n as f64 / resolution as f64);
            if e < best {
                best = e;
                minimizers.clear();
            }
            if e == best {
                minimizers.push(n);
            }
        }
        let degeneration = minimizers.len();
        let capped = degeneration < MIN_DEGENERATION && resolution >= cap;
        if degeneration >= MIN_DEGENERATION || capped {
            let numerator = minimizers[(degeneration - 1) / 2];
            return GridLearnerResult {
                threshold: numerator as f64 / resolution as f64,
                numerator,
                resolution,
                degeneration,
                min_error: best,
                capped,
            };
        }
        resolution *= 10;
    }
}
