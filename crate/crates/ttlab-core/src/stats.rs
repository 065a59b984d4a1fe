//! Per-tree functionals: size, height, generation profile, out-degree
//! histogram, ranked root-subtree masses, and the depth of a uniformly
//! chosen vertex. All pure (the uniform-vertex pick is pure given its
//! seed), all safe to run concurrently over shared trees.

use crate::rng::{SeedSpec, StreamRng};
use crate::tree::TemporalTree;
use serde::Serialize;

/// Vertex counts per depth; `counts[k]` is the number of vertices in
/// generation k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenerationProfile {
    pub counts: Vec<u64>,
}

impl GenerationProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{k},{c}\n"));
        }
        out
    }
}

/// `counts[k]` is the number of vertices with exactly k children, k = 0..n.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeHistogram {
    pub counts: Vec<u64>,
}

impl DegreeHistogram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{k},{c}\n"));
        }
        out
    }
}

/// Normalized subtree sizes of the top-m ranked root children, zero-padded
/// when the root has fewer than m children.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootMassVector {
    pub masses: Vec<f64>,
}

/// Node count.
pub fn size(tree: &TemporalTree) -> u64 {
    tree.len() as u64
}

/// Maximum depth.
pub fn height(tree: &TemporalTree) -> u32 {
    tree.node_ids().map(|v| tree.depth(v)).max().unwrap_or(0)
}

pub fn generation_profile(tree: &TemporalTree) -> GenerationProfile {
    let mut counts = vec![0u64; height(tree) as usize + 1];
    for v in tree.node_ids() {
        counts[tree.depth(v) as usize] += 1;
    }
    GenerationProfile { counts }
}

pub fn outdegree_histogram(tree: &TemporalTree) -> DegreeHistogram {
    let mut counts = vec![0u64; tree.params().n as usize + 1];
    for v in tree.node_ids() {
        counts[tree.children(v).len()] += 1;
    }
    DegreeHistogram { counts }
}

/// Subtree size below every node. Parents precede children in the arena,
/// so one reverse pass suffices.
fn subtree_sizes(tree: &TemporalTree) -> Vec<u64> {
    let mut sizes = vec![1u64; tree.len()];
    for v in tree.node_ids().rev() {
        if let Some(parent) = tree.parent(v) {
            sizes[parent as usize] += sizes[v as usize];
        }
    }
    sizes
}

/// Subtree sizes of the m highest-ranked root children divided by e^{np}.
pub fn root_subtree_masses(tree: &TemporalTree, m: usize) -> RootMassVector {
    assert!(m >= 1, "root_subtree_masses: m must be at least 1");
    let sizes = subtree_sizes(tree);
    let scale = tree.params().expected_size();
    let mut masses: Vec<f64> = tree
        .children(0)
        .take(m)
        .map(|c| sizes[c as usize] as f64 / scale)
        .collect();
    masses.resize(m, 0.0);
    RootMassVector { masses }
}

/// Depth of one vertex chosen uniformly among all nodes.
pub fn depth_of_uniform_vertex(tree: &TemporalTree, seed: SeedSpec) -> u32 {
    let mut rng = StreamRng::for_node(&seed, 0);
    let pick = rng.uniform_index(tree.len() as u64);
    tree.depth(pick as u32)
}
