//! The binary-tree branching random walk behind the size limit law:
//! generation values Q_i (Exp(1) steps, optionally scaled by 1 ± ε), the
//! martingale statistic X_L = Σ e^{−Q_i}, the distributional recursion
//! X_L = U (X_{L−1} + X'_{L−1}), and the moment sequence of the limit.
//!
//! Values are stored n-free: steps are Exp(1) scaled by (1 ± ε) and never
//! divided by n, so nothing here depends on the tree branching factor.

use crate::numeric::CompensatedSum;
use crate::rng::{SeedSpec, StreamRng};
use serde::Serialize;
use thiserror::Error;

/// Memory for a generation is 2^L values.
pub const MAX_GENERATION: u32 = 24;
/// The recursion sampler costs 2^L work; it exists for small-L equivalence
/// tests only.
pub const MAX_RECURSION_GENERATION: u32 = 30;

#[derive(Debug, Error)]
pub enum BrwError {
    #[error("generation {level} too large (limit {max})")]
    GenerationTooLarge { level: u32, max: u32 },
}

/// Which ε-perturbation the step scale carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EpsSign {
    None,
    Plus,
    Minus,
}

impl EpsSign {
    fn scale(self, eps: f64) -> f64 {
        match self {
            EpsSign::None => 1.0,
            EpsSign::Plus => 1.0 + eps,
            EpsSign::Minus => 1.0 - eps,
        }
    }
}

/// Values of one generation of the walk.
#[derive(Debug, Clone, PartialEq)]
pub struct BrwGeneration {
    pub level: u32,
    pub eps: f64,
    pub sign: EpsSign,
    /// 2^level values, all positive.
    pub values: Vec<f64>,
}

/// Simulate generation `level` of the walk on the infinite binary tree:
/// generation 0 is a single value Exp(1)·s and every vertex spawns two
/// children, each adding an independent Exp(1)·s, with s = 1, 1+ε or 1−ε.
///
/// Vertices live in heap order (children of index h are 2h+1 and 2h+2) and
/// each vertex's step comes from its own substream, so the result is a pure
/// function of `(seed, level, eps, sign)` no matter how the generations are
/// filled in.
pub fn sample_generation(
    level: u32,
    eps: f64,
    sign: EpsSign,
    seed: SeedSpec,
) -> Result<BrwGeneration, BrwError> {
    if level > MAX_GENERATION {
        return Err(BrwError::GenerationTooLarge {
            level,
            max: MAX_GENERATION,
        });
    }
    assert!(eps >= 0.0, "eps must be nonnegative");
    assert!(
        sign != EpsSign::Minus || eps < 1.0,
        "minus sign requires eps < 1"
    );
    let scale = sign.scale(eps);
    let step = |heap_index: u64| StreamRng::for_node(&seed, heap_index).exp1() * scale;
    let mut current = vec![step(0)];
    for generation in 1..=level {
        let offset = (1u64 << generation) - 1;
        let mut next = Vec::with_capacity(1 << generation);
        for (i, &value) in current.iter().enumerate() {
            next.push(value + step(offset + 2 * i as u64));
            next.push(value + step(offset + 2 * i as u64 + 1));
        }
        current = next;
    }
    Ok(BrwGeneration {
        level,
        eps,
        sign,
        values: current,
    })
}

/// X_L = Σ_i e^{−Q_i}, compensated summation.
pub fn martingale_statistic(generation: &BrwGeneration) -> f64 {
    let mut sum = CompensatedSum::new();
    for &q in &generation.values {
        sum.add((-q).exp());
    }
    sum.value()
}

/// Largest term over the statistic: max_i e^{−Q_i} / X_L.
pub fn max_term_ratio(generation: &BrwGeneration) -> f64 {
    let max = generation
        .values
        .iter()
        .fold(f64::NEG_INFINITY, |m, &q| m.max(-q));
    max.exp() / martingale_statistic(generation)
}

/// Sample X_L by the distributional recursion X_0 = Uniform(0,1),
/// X_L = U (X_{L−1} + X'_{L−1}). Costs 2^L; used as the equivalence oracle
/// at small L.
pub fn sample_limit_recursive(level: u32, seed: SeedSpec) -> Result<f64, BrwError> {
    if level > MAX_RECURSION_GENERATION {
        return Err(BrwError::GenerationTooLarge {
            level,
            max: MAX_RECURSION_GENERATION,
        });
    }
    fn recurse(seed: &SeedSpec, heap_index: u64, level: u32) -> f64 {
        let u = StreamRng::for_node(seed, heap_index).uniform_open01();
        if level == 0 {
            u
        } else {
            u * (recurse(seed, 2 * heap_index + 1, level - 1)
                + recurse(seed, 2 * heap_index + 2, level - 1))
        }
    }
    Ok(recurse(&seed, 0, level))
}

/// Moments of the martingale limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSequence {
    /// a[k] is the k-th moment; a[0] = 1, a[1] = 1/2.
    pub a: Vec<f64>,
}

/// Solve a_k = (1/(k+1)) Σ_{i=0}^{k} C(k,i) a_i a_{k−i} with a_0 = 1,
/// a_1 = 1/2, rearranged so the a_k on the right-hand side is absorbed:
/// (k−1) a_k = Σ_{i=1}^{k−1} C(k,i) a_i a_{k−i}. Binomials are exact.
pub fn moment_sequence(k_max: usize) -> MomentSequence {
    assert!(k_max <= 20, "moments beyond k = 20 exceed the f64 regime");
    let mut a = vec![0.0f64; k_max + 1];
    a[0] = 1.0;
    if k_max >= 1 {
        a[1] = 0.5;
    }
    // Pascal rows stay exact in f64 up to C(20, 10)
    let mut binomial = vec![vec![1.0f64]];
    for k in 1..=k_max {
        let prev = &binomial[k - 1];
        let mut row = vec![1.0; k + 1];
        for i in 1..k {
            row[i] = prev[i - 1] + prev[i];
        }
        binomial.push(row);
    }
    for k in 2..=k_max {
        let mut sum = 0.0;
        for i in 1..k {
            sum += binomial[k][i] * a[i] * a[k - i];
        }
        a[k] = sum / (k as f64 - 1.0);
    }
    MomentSequence { a }
}
