//! Three interchangeable samplers for the percolated uniform temporal tree,
//! plus the trimmed variant. Their distributional agreement is itself a
//! test, so each follows a genuinely different construction:
//!
//! * `sample_tree_recursive` — lazy top-down recursion: a node with label ℓ
//!   gets Binomial(n, ℓ) children (inverse-CDF from one uniform) with labels
//!   iid Uniform(0, ℓ), sorted descending.
//! * `sample_tree_spacings` — the uniform-spacings construction: child
//!   labels are the parent label minus partial sums of normalized
//!   exponential spacings, keeping the nonnegative prefix.
//! * `sample_tree_rejection` — the definition taken literally: materialize
//!   the full n-ary tree to a depth cap with iid Uniform(0,1) labels and
//!   delete every vertex whose root path is not strictly decreasing below p.
//!
//! All samplers are pure functions of `(params, seed, budget)`.

use crate::numeric::exp_series_tail_bound;
use crate::rng::{child_node_key, SeedSpec, StreamRng, ROOT_NODE_KEY};
use crate::tree::{InvalidParams, SampleBudget, TemporalTree, TreeParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error(transparent)]
    InvalidParams(#[from] InvalidParams),
    #[error("node budget exceeded: sampling passed {node_cap} nodes (e^np = {expected_size:.3e}); raise node_cap or shrink n·p")]
    BudgetExceeded { node_cap: u64, expected_size: f64 },
    #[error("the rejection sampler requires budget.depth_cap to be set")]
    DepthCapMissing,
}

/// Output of the rejection sampler: the surviving tree plus a rigorous
/// bound on P(any vertex deeper than the cap survives).
#[derive(Debug, Clone)]
pub struct RejectionSample {
    pub tree: TemporalTree,
    pub truncation_bound: f64,
}

/// Lazy Binomial/Uniform recursion. Distributed as the percolated uniform
/// temporal tree; validated against the rejection oracle in tests.
pub fn sample_tree_recursive(
    params: TreeParams,
    seed: SeedSpec,
    budget: SampleBudget,
) -> Result<TemporalTree, SampleError> {
    sample_top_down(params, params.n, seed, budget)
}

/// Same law restricted to each vertex's `trim` highest-labelled children.
/// With `trim == n` this is byte-identical to `sample_tree_recursive` for
/// the same seed, and for smaller `trim` the result is pathwise a subtree
/// of the untrimmed sample.
pub fn sample_trimmed_tree(
    params: TreeParams,
    trim: u32,
    seed: SeedSpec,
    budget: SampleBudget,
) -> Result<TemporalTree, SampleError> {
    if trim < 1 || trim > params.n {
        return Err(InvalidParams(format!(
            "trim K = {trim} must satisfy 1 <= K <= n = {}",
            params.n
        ))
        .into());
    }
    sample_top_down(params, trim, seed, budget)
}

fn sample_top_down(
    params: TreeParams,
    trim: u32,
    seed: SeedSpec,
    budget: SampleBudget,
) -> Result<TemporalTree, SampleError> {
    params.validate()?;
    budget.validate()?;
    let mut builder = TemporalTree::builder(params);
    let mut keys: Vec<u64> = vec![ROOT_NODE_KEY];
    let mut next = 0u32;
    let mut children: Vec<(f64, u64)> = Vec::with_capacity(params.n as usize);
    while (next as usize) < builder.len() {
        let label = builder.label(next);
        let key = keys[next as usize];
        let mut rng = StreamRng::for_node(&seed, key);
        let count = binomial_inverse(params.n, label, rng.uniform_open01());
        children.clear();
        for j in 0..count {
            children.push((label * rng.uniform_open01(), child_node_key(key, j as u64)));
        }
        // descending labels; stable sort breaks (measure-zero) ties by draw order
        children.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        children.truncate(trim as usize);
        if builder.len() + children.len() > budget.node_cap as usize {
            return Err(SampleError::BudgetExceeded {
                node_cap: budget.node_cap,
                expected_size: params.expected_size(),
            });
        }
        builder.push_children(next, &children);
        keys.extend(children.iter().map(|&(_, k)| k));
        next += 1;
    }
    Ok(builder.finish())
}

/// Uniform-spacings construction, anchored at the parent label: child j of
/// a node with label ℓ gets ℓ − (S_1 + … + S_j) where the S_i are the
/// spacings of n uniforms, represented as normalized Exponential(1)
/// variates. Candidates are automatically descending; the nonnegative
/// prefix is kept.
pub fn sample_tree_spacings(
    params: TreeParams,
    seed: SeedSpec,
    budget: SampleBudget,
) -> Result<TemporalTree, SampleError> {
    params.validate()?;
    budget.validate()?;
    let n = params.n as usize;
    let mut builder = TemporalTree::builder(params);
    let mut keys: Vec<u64> = vec![ROOT_NODE_KEY];
    let mut next = 0u32;
    let mut exps: Vec<f64> = vec![0.0; n + 1];
    let mut children: Vec<(f64, u64)> = Vec::with_capacity(n);
    while (next as usize) < builder.len() {
        let label = builder.label(next);
        let key = keys[next as usize];
        let mut rng = StreamRng::for_node(&seed, key);
        let mut total = 0.0f64;
        for e in exps.iter_mut() {
            *e = rng.exp1();
            total += *e;
        }
        children.clear();
        let mut partial = 0.0f64;
        for (j, &e) in exps[..n].iter().enumerate() {
            partial += e;
            let child_label = label - partial / total;
            if child_label < 0.0 {
                break;
            }
            children.push((child_label, child_node_key(key, j as u64)));
        }
        if builder.len() + children.len() > budget.node_cap as usize {
            return Err(SampleError::BudgetExceeded {
                node_cap: budget.node_cap,
                expected_size: params.expected_size(),
            });
        }
        builder.push_children(next, &children);
        keys.extend(children.iter().map(|&(_, k)| k));
        next += 1;
    }
    Ok(builder.finish())
}

/// The definition, taken literally: every slot of the full n-ary tree down
/// to `depth_cap` receives an iid Uniform(0,1) label (drawn in fixed
/// breadth-first slot order from one substream), then every vertex whose
/// root path is not strictly decreasing below p is deleted.
///
/// Cost is Σ_{d≤D} n^d regardless of survival, so this is an oracle for
/// small n and depth, not a production sampler.
pub fn sample_tree_rejection(
    params: TreeParams,
    seed: SeedSpec,
    budget: SampleBudget,
) -> Result<RejectionSample, SampleError> {
    params.validate()?;
    budget.validate()?;
    let depth_cap = budget.depth_cap.ok_or(SampleError::DepthCapMissing)?;
    let n = params.n as u128;
    let mut slots: u128 = 1;
    let mut level_size: u128 = 1;
    for _ in 0..depth_cap {
        level_size = level_size.saturating_mul(n);
        slots = slots.saturating_add(level_size);
    }
    if slots > budget.node_cap as u128 {
        return Err(SampleError::BudgetExceeded {
            node_cap: budget.node_cap,
            expected_size: params.expected_size(),
        });
    }

    struct Survivor {
        slot: u64,
        label: f64,
        arena_id: u32,
    }

    let mut rng = StreamRng::for_node(&seed, ROOT_NODE_KEY);
    let mut builder = TemporalTree::builder(params);
    let mut survivors = vec![Survivor {
        slot: 0,
        label: params.p,
        arena_id: 0,
    }];
    let nn = params.n as u64;
    let mut level_slots = 1u64;
    for _depth in 0..depth_cap {
        level_slots *= nn;
        let mut kept: Vec<Survivor> = Vec::new();
        let mut parent_idx = 0usize;
        // children of the current parent, in slot order: (slot offset, label)
        let mut pending: Vec<(u64, f64)> = Vec::new();
        let mut flush =
            |parent: &Survivor, pending: &mut Vec<(u64, f64)>, kept: &mut Vec<Survivor>| {
                if pending.is_empty() {
                    return;
                }
                let mut by_label: Vec<(f64, u64)> =
                    pending.iter().map(|&(slot, label)| (label, slot)).collect();
                by_label.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
                let first = builder.push_children(
                    parent.arena_id,
                    &by_label.iter().map(|&(l, _)| (l, 0u64)).collect::<Vec<_>>(),
                );
                // survivor list stays in slot order for the next level's walk
                for &(slot, label) in pending.iter() {
                    let rank = by_label
                        .iter()
                        .position(|&(_, s)| s == slot)
                        .expect("child present");
                    kept.push(Survivor {
                        slot,
                        label,
                        arena_id: first + rank as u32,
                    });
                }
                pending.clear();
            };
        for slot in 0..level_slots {
            let label = rng.uniform_open01();
            let parent_slot = slot / nn;
            while parent_idx < survivors.len() && survivors[parent_idx].slot < parent_slot {
                flush(&survivors[parent_idx], &mut pending, &mut kept);
                parent_idx += 1;
            }
            if parent_idx < survivors.len()
                && survivors[parent_idx].slot == parent_slot
                && label < survivors[parent_idx].label
            {
                pending.push((slot, label));
            }
        }
        if parent_idx < survivors.len() {
            flush(&survivors[parent_idx], &mut pending, &mut kept);
        }
        if kept.is_empty() {
            break;
        }
        survivors = kept;
    }
    Ok(RejectionSample {
        tree: builder.finish(),
        truncation_bound: exp_series_tail_bound(params.n as f64 * params.p, depth_cap as u64),
    })
}

/// Inverse-CDF Binomial(n, p) from a single uniform. Symmetry keeps the
/// working probability at most 1/2 so the PMF recurrence starts from a
/// representable q^n whenever the tree is remotely sampleable.
fn binomial_inverse(n: u32, p: f64, u: f64) -> u32 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    if p > 0.5 {
        return n - binomial_inverse_core(n, 1.0 - p, 1.0 - u);
    }
    binomial_inverse_core(n, p, u)
}

fn binomial_inverse_core(n: u32, p: f64, u: f64) -> u32 {
    let q = 1.0 - p;
    let mut pmf = (n as f64 * q.ln()).exp();
    let mut cdf = pmf;
    let ratio = p / q;
    for k in 0..n {
        if u <= cdf {
            return k;
        }
        pmf *= ((n - k) as f64 / (k + 1) as f64) * ratio;
        cdf += pmf;
    }
    n
}
