//! Execution strategy for the data-parallel kernels.
//!
//! Every batch kernel in the crate maps an index range or a slice through a
//! pure closure and reduces the results sequentially, so the output does not
//! depend on the strategy. With the `parallel` feature disabled only
//! [`Strategy::Sequential`] exists.

/// How a batch of independent evaluations is scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Strategy {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Strategy::Parallel;

        #[cfg(not(feature = "parallel"))]
        return Strategy::Sequential;
    }
}

impl Strategy {
    /// All strategies compiled into this build.
    pub fn available() -> &'static [Strategy] {
        #[cfg(feature = "parallel")]
        return &[Strategy::Sequential, Strategy::Parallel];

        #[cfg(not(feature = "parallel"))]
        return &[Strategy::Sequential];
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Sequential => "sequential",
            #[cfg(feature = "parallel")]
            Strategy::Parallel => "parallel",
        }
    }

    /// Evaluates `f(0), …, f(n-1)`, preserving index order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            Strategy::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Strategy::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
        }
    }

    /// Maps a slice, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Strategy::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Strategy::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
        }
    }
}

/// Maximum of a slice of nonnegative reals, 0 for an empty slice.
pub(crate) fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}
