use serde::{Deserialize, Serialize};

use super::RegressionTree;

/// One member of the cost-complexity sequence. The subtree is optimal for
/// complexity parameters in `[alpha, next alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneStep {
    pub alpha: f64,
    pub leaves: usize,
    pub sse: f64,
    /// Internal nodes of the full tree turned into leaves, ascending.
    pub collapsed: Vec<usize>,
}

struct Branch {
    sse: f64,
    leaves: usize,
}

/// Branch SSE and leaf count of every node under the current collapse mask.
/// Children always have larger ids than their parent.
fn branches(tree: &RegressionTree, collapsed: &[bool]) -> Vec<Branch> {
    let mut out: Vec<Branch> = tree.nodes.iter().map(|n| Branch { sse: n.sse, leaves: 1 }).collect();
    for id in (0..tree.nodes.len()).rev() {
        if collapsed[id] {
            continue;
        }
        if let Some(s) = &tree.nodes[id].split {
            out[id] = Branch { sse: out[s.left].sse + out[s.right].sse, leaves: out[s.left].leaves + out[s.right].leaves };
        }
    }
    out
}

/// Internal nodes still present in the current subtree.
fn live_internal(tree: &RegressionTree, collapsed: &[bool]) -> Vec<usize> {
    let mut live = Vec::new();
    let mut stack = vec![0];
    while let Some(id) = stack.pop() {
        if collapsed[id] {
            continue;
        }
        if let Some(s) = &tree.nodes[id].split {
            live.push(id);
            stack.push(s.right);
            stack.push(s.left);
        }
    }
    live
}

fn snapshot(tree: &RegressionTree, collapsed: &[bool], alpha: f64) -> PruneStep {
    let b = branches(tree, collapsed);
    PruneStep {
        alpha,
        leaves: b[0].leaves,
        sse: b[0].sse,
        collapsed: (0..tree.nodes.len()).filter(|&i| collapsed[i] && tree.nodes[i].split.is_some()).collect(),
    }
}

/// Weakest-link pruning. The first step (alpha = 0) is the smallest subtree
/// with the training error of the full tree; the last is the root alone.
/// Subtrees are nested and alphas strictly increase.
pub fn prune_sequence(tree: &RegressionTree) -> Vec<PruneStep> {
    let mut collapsed = vec![false; tree.nodes.len()];
    let tol = 1e-10 * tree.nodes[0].sse.max(f64::MIN_POSITIVE);
    let link_strength = |id: usize, b: &[Branch]| (tree.nodes[id].sse - b[id].sse) / (b[id].leaves - 1) as f64;

    // Remove splits that do not lower the training error.
    loop {
        let b = branches(tree, &collapsed);
        let weak: Vec<usize> =
            live_internal(tree, &collapsed).into_iter().filter(|&id| link_strength(id, &b) <= tol).collect();
        if weak.is_empty() {
            break;
        }
        for id in weak {
            collapsed[id] = true;
        }
    }
    let mut steps = vec![snapshot(tree, &collapsed, 0.0)];

    loop {
        let live = live_internal(tree, &collapsed);
        if live.is_empty() {
            break;
        }
        let b = branches(tree, &collapsed);
        let alpha = live.iter().map(|&id| link_strength(id, &b)).fold(f64::INFINITY, f64::min);
        for &id in &live {
            if link_strength(id, &b) <= alpha + tol {
                collapsed[id] = true;
            }
        }
        steps.push(snapshot(tree, &collapsed, alpha));
    }
    steps
}
