//! Percolated uniform temporal trees: samplers, per-tree statistics, exact
//! formulas, the associated binary-tree branching random walk, and a
//! reproducible Monte Carlo experiment harness.
//!
//! A percolated uniform temporal tree with parameters `(n, p)` is obtained
//! from the infinite rooted `n`-ary tree by labelling every edge with an
//! independent Uniform[0,1] variate and keeping exactly the vertices whose
//! root path has strictly decreasing labels, all at most `p`. The crate
//! samples these trees three independent ways (their agreement is itself a
//! test), computes size / height / profile / degree statistics, evaluates
//! the matching closed forms and series bounds, and ties everything together
//! with seeded, worker-count-independent experiments.

pub mod analytic;
pub mod brw;
pub mod harness;
pub mod numeric;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod tree;

pub use rng::SeedSpec;
pub use sampler::{RejectionSample, SampleError};
pub use tree::{SampleBudget, TemporalTree, TreeDocument, TreeParams};
