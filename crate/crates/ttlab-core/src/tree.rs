//! Tree data model: parameters, sampled trees, budgets, the JSON document
//! schema and its invariant checker.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sentinel parent id of the root inside the arena.
const NO_PARENT: u32 = u32::MAX;

/// The pair (n, p): branching factor of the underlying n-ary tree and the
/// percolation level, which is also the root label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub n: u32,
    pub p: f64,
}

impl TreeParams {
    pub fn new(n: u32, p: f64) -> Self {
        Self { n, p }
    }

    pub fn validate(&self) -> Result<(), InvalidParams> {
        if self.n < 1 {
            return Err(InvalidParams("n must be at least 1".into()));
        }
        if !self.p.is_finite() || !(0.0..=1.0).contains(&self.p) {
            return Err(InvalidParams(format!("p must lie in [0, 1], got {}", self.p)));
        }
        Ok(())
    }

    /// e^{np}, the expected tree size; useful for budget sanity checks.
    pub fn expected_size(&self) -> f64 {
        (self.n as f64 * self.p).exp()
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("invalid parameters: {0}")]
pub struct InvalidParams(pub String);

/// Resource limits for one sampling call.
///
/// `node_cap` is an abort threshold, never a silent truncation: exceeding it
/// is an error, because truncating would bias every downstream statistic.
/// `depth_cap` is consumed by the rejection sampler only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub node_cap: u64,
    pub depth_cap: Option<u32>,
}

impl Default for SampleBudget {
    fn default() -> Self {
        Self {
            node_cap: 1 << 27,
            depth_cap: None,
        }
    }
}

impl SampleBudget {
    pub fn with_node_cap(node_cap: u64) -> Self {
        Self {
            node_cap,
            ..Self::default()
        }
    }

    pub fn with_depth_cap(depth_cap: u32) -> Self {
        Self {
            depth_cap: Some(depth_cap),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), InvalidParams> {
        if self.node_cap < 1 {
            return Err(InvalidParams("node_cap must be at least 1".into()));
        }
        if self.node_cap > (u32::MAX - 1) as u64 {
            return Err(InvalidParams(format!(
                "node_cap {} exceeds the 32-bit node id space",
                self.node_cap
            )));
        }
        Ok(())
    }
}

/// A sampled temporal tree.
///
/// Nodes live in one flat arena in breadth-first order: node 0 is the root
/// (label exactly `p`, depth 0), each node's children occupy a contiguous id
/// range and are stored in strictly decreasing label order, so the position
/// of a child inside its parent's range is its rank (1 = largest label).
/// Immutable after construction; share freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalTree {
    params: TreeParams,
    labels: Vec<f64>,
    parents: Vec<u32>,
    depths: Vec<u32>,
    first_child: Vec<u32>,
    child_count: Vec<u32>,
}

impl TemporalTree {
    pub(crate) fn builder(params: TreeParams) -> TreeBuilder {
        TreeBuilder {
            tree: TemporalTree {
                params,
                labels: vec![params.p],
                parents: vec![NO_PARENT],
                depths: vec![0],
                first_child: vec![0],
                child_count: vec![0],
            },
        }
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    /// Number of nodes, at least 1.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, v: u32) -> f64 {
        self.labels[v as usize]
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        let p = self.parents[v as usize];
        (p != NO_PARENT).then_some(p)
    }

    pub fn depth(&self, v: u32) -> u32 {
        self.depths[v as usize]
    }

    /// Children of `v` in strictly decreasing label order.
    pub fn children(&self, v: u32) -> std::ops::Range<u32> {
        let first = self.first_child[v as usize];
        first..first + self.child_count[v as usize]
    }

    pub fn node_ids(&self) -> std::ops::Range<u32> {
        0..self.len() as u32
    }

    /// Convert to the JSON document form.
    pub fn to_document(&self) -> TreeDocument {
        let nodes = self
            .node_ids()
            .map(|v| NodeDocument {
                id: v,
                parent: self.parent(v),
                label: self.label(v),
                children: self.children(v).collect(),
            })
            .collect();
        TreeDocument {
            n: self.params.n,
            p: self.params.p,
            nodes,
        }
    }

    /// Rebuild an arena tree from a validated document. Node ids are
    /// normalized to breadth-first order.
    pub fn from_document(doc: &TreeDocument) -> Result<Self, ValidationError> {
        doc.validate()?;
        let params = TreeParams::new(doc.n, doc.p);
        let mut builder = Self::builder(params);
        // BFS over document ids, mapping to fresh arena ids.
        let mut queue = std::collections::VecDeque::from([(0u32, 0u32)]);
        while let Some((doc_id, arena_id)) = queue.pop_front() {
            let doc_node = &doc.nodes[doc_id as usize];
            let children: Vec<(f64, u64)> = doc_node
                .children
                .iter()
                .map(|&c| (doc.nodes[c as usize].label, 0u64))
                .collect();
            let first = builder.push_children(arena_id, &children);
            for (offset, &c) in doc_node.children.iter().enumerate() {
                queue.push_back((c, first + offset as u32));
            }
        }
        Ok(builder.finish())
    }
}

/// Incremental breadth-first construction used by the samplers.
pub(crate) struct TreeBuilder {
    tree: TemporalTree,
}

impl TreeBuilder {
    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn label(&self, v: u32) -> f64 {
        self.tree.label(v)
    }

    /// Append children of `parent`, already in decreasing label order.
    /// The second tuple slot carries the child's RNG key (opaque here).
    /// Returns the id of the first appended child.
    pub fn push_children(&mut self, parent: u32, children: &[(f64, u64)]) -> u32 {
        let first = self.tree.len() as u32;
        let t = &mut self.tree;
        t.first_child[parent as usize] = first;
        t.child_count[parent as usize] = children.len() as u32;
        let depth = t.depths[parent as usize] + 1;
        for &(label, _) in children {
            t.labels.push(label);
            t.parents.push(parent);
            t.depths.push(depth);
            t.first_child.push(0);
            t.child_count.push(0);
        }
        first
    }

    pub fn finish(self) -> TemporalTree {
        self.tree
    }
}

/// One node of the on-disk JSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDocument {
    pub id: u32,
    pub parent: Option<u32>,
    pub label: f64,
    pub children: Vec<u32>,
}

/// On-disk tree document:
/// `{"n":…, "p":…, "nodes":[{"id":…, "parent":…|null, "label":…, "children":[…]}…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub n: u32,
    pub p: f64,
    pub nodes: Vec<NodeDocument>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("invalid tree: {0}")]
pub struct ValidationError(pub String);

impl TreeDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Check every structural invariant; the message of the first violation
    /// is returned.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let err = |msg: String| Err(ValidationError(msg));
        if self.nodes.is_empty() {
            return err("missing root".into());
        }
        TreeParams::new(self.n, self.p)
            .validate()
            .map_err(|e| ValidationError(e.0))?;
        let len = self.nodes.len();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id as usize != i {
                return err(format!("node at position {i} has id {}", node.id));
            }
        }
        let root = &self.nodes[0];
        if root.parent.is_some() {
            return err("root has a parent".into());
        }
        if root.label != self.p {
            return err(format!(
                "root label {} differs from p {}",
                root.label, self.p
            ));
        }
        let mut seen_as_child = vec![false; len];
        for node in &self.nodes {
            if node.children.len() > self.n as usize {
                return err(format!(
                    "node {} has {} children, more than n = {}",
                    node.id,
                    node.children.len(),
                    self.n
                ));
            }
            let mut prev_label = f64::INFINITY;
            for &c in &node.children {
                if c as usize >= len {
                    return err(format!("node {} lists unknown child {c}", node.id));
                }
                let child = &self.nodes[c as usize];
                if child.parent != Some(node.id) {
                    return err(format!(
                        "child {c} of node {} does not point back to it",
                        node.id
                    ));
                }
                if seen_as_child[c as usize] {
                    return err(format!("node {c} is listed as a child twice"));
                }
                seen_as_child[c as usize] = true;
                if !child.label.is_finite() || child.label < 0.0 {
                    return err(format!("node {c} has label {} outside [0, p]", child.label));
                }
                if child.label >= node.label {
                    return err(format!(
                        "non-decreasing edge: node {c} label {} is not below parent label {}",
                        child.label, node.label
                    ));
                }
                if child.label >= prev_label {
                    return err(format!(
                        "children of node {} are not in decreasing label order",
                        node.id
                    ));
                }
                prev_label = child.label;
            }
        }
        for node in self.nodes.iter().skip(1) {
            if node.parent.is_none() {
                return err(format!("node {} has no parent", node.id));
            }
            if !seen_as_child[node.id as usize] {
                return err(format!(
                    "node {} is not listed among its parent's children",
                    node.id
                ));
            }
        }
        // Parent pointers all verified against child lists and every
        // non-root is some node's child exactly once, so the structure is a
        // tree rooted at 0 as long as everything is reachable.
        let mut reached = vec![false; len];
        reached[0] = true;
        let mut stack = vec![0u32];
        let mut count = 1usize;
        while let Some(v) = stack.pop() {
            for &c in &self.nodes[v as usize].children {
                if !reached[c as usize] {
                    reached[c as usize] = true;
                    count += 1;
                    stack.push(c);
                }
            }
        }
        if count != len {
            return err("unreachable node".into());
        }
        Ok(())
    }
}
