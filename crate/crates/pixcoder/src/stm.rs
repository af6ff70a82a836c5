//! Simple Tree Matching similarity between ordered labeled trees.
//!
//! The match count is the maximum number of nodes that can be paired between
//! two trees without cross-layer matching, without label replacement, and
//! with child order preserved. If two subtree roots differ the whole pair
//! scores zero, which prunes the search. The pairwise table costs O(n^2)
//! overall.

use crate::dsl::DslTree;

/// A tree flattened into postorder arrays so repeated matching avoids
/// pointer chasing and re-allocation.
pub struct FlatTree {
    labels: Vec<String>,
    /// Child indices per node, in order.
    children: Vec<Vec<usize>>,
    root: usize,
}

impl FlatTree {
    pub fn from_tree(tree: &DslTree) -> Self {
        let mut flat = FlatTree {
            labels: Vec::with_capacity(tree.node_count()),
            children: Vec::with_capacity(tree.node_count()),
            root: 0,
        };
        flat.root = flat.push(tree);
        flat
    }

    fn push(&mut self, node: &DslTree) -> usize {
        let child_ids: Vec<usize> = node.children().iter().map(|c| self.push(c)).collect();
        self.labels.push(node.label().to_string());
        self.children.push(child_ids);
        self.labels.len() - 1
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Maximum matched-node count between two trees.
pub fn stm(t1: &DslTree, t2: &DslTree) -> usize {
    stm_flat(&FlatTree::from_tree(t1), &FlatTree::from_tree(t2))
}

/// [`stm`] over pre-flattened trees.
pub fn stm_flat(a: &FlatTree, b: &FlatTree) -> usize {
    // table[i][j] = match count of subtree i of `a` vs subtree j of `b`.
    // Postorder ids put children before parents, so one forward sweep works.
    let mut table = vec![0u32; a.len() * b.len()];
    let mut seq = Vec::new();
    for i in 0..a.len() {
        for j in 0..b.len() {
            if a.labels[i] != b.labels[j] {
                continue;
            }
            let xs = &a.children[i];
            let ys = &b.children[j];
            // Ordered sequence matching over the children:
            // m[p][q] = max(m[p-1][q], m[p][q-1], m[p-1][q-1] + table[x_p][y_q]).
            let w = ys.len() + 1;
            seq.clear();
            seq.resize((xs.len() + 1) * w, 0u32);
            for (p, &x) in xs.iter().enumerate() {
                for (q, &y) in ys.iter().enumerate() {
                    let pair = seq[p * w + q] + table[x * b.len() + y];
                    let skip_x = seq[p * w + q + 1];
                    let skip_y = seq[(p + 1) * w + q];
                    seq[(p + 1) * w + q + 1] = pair.max(skip_x).max(skip_y);
                }
            }
            table[i * b.len() + j] = 1 + seq[xs.len() * w + ys.len()];
        }
    }
    table[a.root * b.len() + b.root] as usize
}

/// Similarity in [0, 1]: matched nodes over the mean node count.
pub fn similarity(t1: &DslTree, t2: &DslTree) -> f64 {
    let matched = stm(t1, t2) as f64;
    let mean_size = (t1.node_count() + t2.node_count()) as f64 / 2.0;
    matched / mean_size
}

/// Reference matcher: exhaustively enumerates every order-preserving,
/// level-respecting child pairing instead of running the DP recurrence.
/// Exponential; intended for trees of at most ~8 nodes in tests.
pub fn brute_force_stm(t1: &DslTree, t2: &DslTree) -> usize {
    if t1.label() != t2.label() {
        return 0;
    }
    let xs = t1.children();
    let ys = t2.children();
    let k_max = xs.len().min(ys.len());
    let mut best = 0usize;
    for k in 0..=k_max {
        for xs_pick in combinations(xs.len(), k) {
            for ys_pick in combinations(ys.len(), k) {
                let score: usize = xs_pick
                    .iter()
                    .zip(&ys_pick)
                    .map(|(&xi, &yi)| brute_force_stm(&xs[xi], &ys[yi]))
                    .sum();
                best = best.max(score);
            }
        }
    }
    1 + best
}

/// All strictly increasing index tuples of length `k` drawn from `0..n`.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn go(n: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            go(n, k, i + 1, current, out);
            current.pop();
        }
    }
    go(n, k, 0, &mut current, &mut out);
    out
}
