//! The k-large-prime witness machinery: culled tree-like hypergraphs grown
//! from a class stream, the recursive chi event that certifies a singleton
//! is spanned within an m-ball, and the pseudosmooth counts Z and Y.

use crate::gf2::{Eliminator, ExponentVector, InsertOutcome};
use crate::process::ExponentClass;
use crate::KBound;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::hash::Hash;

pub trait Vertex: Copy + Ord + Hash + Debug {}
impl<T: Copy + Ord + Hash + Debug> Vertex for T {}

/// Rooted hypergraph with marks. `levels` records the sweep level at which
/// each vertex first appeared (the root at level 0).
#[derive(Debug, Clone)]
pub struct MarkedHypergraph<V: Vertex> {
    pub root: V,
    pub hyperedges: Vec<Vec<V>>,
    pub marks: BTreeSet<V>,
    pub levels: BTreeMap<V, u32>,
}

impl<V: Vertex> MarkedHypergraph<V> {
    pub fn support(&self) -> BTreeSet<V> {
        let mut s: BTreeSet<V> = self.hyperedges.iter().flatten().copied().collect();
        s.insert(self.root);
        s
    }
}

/// Parameters of the witness construction.
#[derive(Debug, Clone, Copy)]
pub struct ChiParams {
    /// Neighborhood radius (number of sweep levels).
    pub m: u32,
    /// Cardinality cap on admitted classes.
    pub k: KBound,
    /// Large primes live in (y, M y); carried for context only.
    pub m_ratio: f64,
}

/// Grow the culled hypergraph rooted at `root` from the first `j_len` classes.
///
/// Level by level, the stream is swept in order; a class S with
/// 2 <= |S| <= k is admitted iff it meets the current support in exactly one
/// vertex and that vertex joined at the previous level. Collisions are thus
/// settled first-come. Marks are the singleton classes seen among the first
/// `j_len` entries, intersected with the final support.
pub fn build_g(
    stream: &[ExponentClass],
    root: u64,
    params: &ChiParams,
    j_len: usize,
) -> MarkedHypergraph<u64> {
    let j_len = j_len.min(stream.len());
    let mut support: BTreeSet<u64> = BTreeSet::new();
    support.insert(root);
    let mut levels: BTreeMap<u64, u32> = BTreeMap::new();
    levels.insert(root, 0);
    let mut edges: Vec<Vec<u64>> = Vec::new();
    let mut frontier: BTreeSet<u64> = support.clone(); // T_{level-1}
    for level in 1..=params.m {
        let mut new_frontier: BTreeSet<u64> = BTreeSet::new();
        for class in stream.iter().take(j_len) {
            let Some(s) = class.as_set() else { continue };
            if s.len() < 2 || !params.k.admits(s.len()) {
                continue;
            }
            let mut touch = s.iter().filter(|p| support.contains(p));
            let (hit, extra) = (touch.next(), touch.next());
            let Some(&hit) = hit else { continue };
            if extra.is_some() || !frontier.contains(&hit) {
                continue;
            }
            for &p in s {
                if p != hit {
                    support.insert(p);
                    levels.insert(p, level);
                    new_frontier.insert(p);
                }
            }
            edges.push(s.to_vec());
        }
        frontier = new_frontier;
    }
    let marks = stream
        .iter()
        .take(j_len)
        .filter_map(|c| match c.as_set() {
            Some([q]) => Some(*q),
            _ => None,
        })
        .filter(|q| support.contains(q))
        .collect();
    MarkedHypergraph { root, hyperedges: edges, marks, levels }
}

/// The unique tree structure of a tree-like hypergraph.
#[derive(Debug, Clone)]
pub struct HyperTree<V: Vertex> {
    pub depth: BTreeMap<V, u32>,
    /// Edge indices grouped by the parent vertex of each edge.
    pub children_edges: BTreeMap<V, Vec<usize>>,
}

/// Check the parent/child decomposition: every hyperedge must consist of one
/// already-placed vertex (its parent) plus fresh vertices, every vertex being
/// introduced by exactly one edge, and everything reachable from the root.
/// Returns the decomposition tree when it exists.
pub fn is_tree_like<V: Vertex>(g: &MarkedHypergraph<V>) -> Option<HyperTree<V>> {
    let mut depth: BTreeMap<V, u32> = BTreeMap::new();
    depth.insert(g.root, 0);
    let mut children_edges: BTreeMap<V, Vec<usize>> = BTreeMap::new();
    let n_edges = g.hyperedges.len();
    let mut placed = vec![false; n_edges];
    let mut placed_count = 0;
    loop {
        let mut progressed = false;
        for (idx, edge) in g.hyperedges.iter().enumerate() {
            if placed[idx] {
                continue;
            }
            if edge.len() < 2 {
                return None; // singletons live in the mark set, not here
            }
            let known: Vec<&V> = edge.iter().filter(|v| depth.contains_key(v)).collect();
            match known.len() {
                0 => continue,
                1 => {
                    let parent = *known[0];
                    let d = depth[&parent];
                    for &v in edge {
                        if v != parent {
                            depth.insert(v, d + 1);
                        }
                    }
                    children_edges.entry(parent).or_default().push(idx);
                    placed[idx] = true;
                    placed_count += 1;
                    progressed = true;
                }
                // two known vertices would close a cycle or reuse a child
                _ => return None,
            }
        }
        if !progressed {
            break;
        }
    }
    if placed_count != n_edges {
        return None; // some edge is not reachable from the root
    }
    Some(HyperTree { depth, children_edges })
}

/// The recursive witness event at `q`: false when the graph is not
/// tree-like; otherwise chi(q) holds iff q is marked (the singleton case) or
/// some child edge of q has chi on all of its children.
pub fn chi<V: Vertex>(g: &MarkedHypergraph<V>, q: V) -> bool {
    let Some(tree) = is_tree_like(g) else { return false };
    if !tree.depth.contains_key(&q) {
        return false;
    }
    chi_with_tree(g, &tree, q)
}

fn chi_with_tree<V: Vertex>(g: &MarkedHypergraph<V>, tree: &HyperTree<V>, q: V) -> bool {
    if g.marks.contains(&q) {
        return true;
    }
    let Some(edges) = tree.children_edges.get(&q) else { return false };
    edges.iter().any(|&idx| {
        g.hyperedges[idx]
            .iter()
            .filter(|&&v| v != q)
            .all(|&v| chi_with_tree(g, tree, v))
    })
}

/// Count of pseudosmooths: stream positions j whose class has chi holding for
/// every member, with the witness graphs built on the prefix of length j - 1.
/// The empty class always counts; Delta entries never do.
pub fn count_pseudosmooths(stream: &[ExponentClass], params: &ChiParams) -> u64 {
    count_pseudosmooths_detailed(stream, params).z
}

/// Byproducts of the Z sweep, for reporting.
#[derive(Debug, Clone, Copy, Default, serde::Serialize, serde::Deserialize)]
pub struct PseudoCounts {
    pub z: u64,
    /// Number of (position, prime) chi evaluations performed.
    pub chi_evaluations: u64,
    /// How many of those built a non-tree-like graph (chi then fails).
    pub non_tree_like: u64,
}

pub fn count_pseudosmooths_detailed(stream: &[ExponentClass], params: &ChiParams) -> PseudoCounts {
    let mut counts = PseudoCounts::default();
    for (j, class) in stream.iter().enumerate() {
        let Some(s) = class.as_set() else { continue };
        let all = s.iter().all(|&p| {
            let g = build_g(&stream[..j], p, params, j);
            counts.chi_evaluations += 1;
            match is_tree_like(&g) {
                None => {
                    counts.non_tree_like += 1;
                    false
                }
                Some(_) => chi(&g, p),
            }
        });
        if all {
            counts.z += 1;
        }
    }
    counts
}

/// Count of singleton hits in `interval` (1-based, inclusive): positions j
/// with a singleton class {p} whose chi holds on the prefix of length j - 1.
pub fn count_singleton_hits(
    stream: &[ExponentClass],
    params: &ChiParams,
    interval: (usize, usize),
) -> u64 {
    let (j1, j2) = interval;
    let mut y = 0;
    for j in j1.max(1)..=j2.min(stream.len()) {
        if let ExponentClass::Large(s) = &stream[j - 1] {
            if let [p] = s.as_slice() {
                let g = build_g(&stream[..j - 1], *p, params, j - 1);
                if chi(&g, *p) {
                    y += 1;
                }
            }
        }
    }
    y
}

/// Rank deficiency of the class-vector matrix (Delta entries skipped), the
/// quantity bounding Z from above.
pub fn class_rank_deficiency(stream: &[ExponentClass]) -> u64 {
    let mut elim = Eliminator::new(vec![]);
    let mut deficiency = 0;
    for (j, class) in stream.iter().enumerate() {
        let Some(s) = class.as_set() else { continue };
        let v = ExponentVector::new(s.to_vec());
        if let InsertOutcome::Dependent(_) = elim.insert(&v, j as u64).unwrap() {
            deficiency += 1;
        }
    }
    deficiency
}
