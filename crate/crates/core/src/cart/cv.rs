use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{grow, prune_sequence, GrowParams, PruneStep, RegressionTree, Table};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvParams {
    pub folds: usize,
    pub seed: u64,
}

impl Default for CvParams {
    fn default() -> Self {
        Self { folds: 10, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub alpha: f64,
    pub leaves: usize,
    pub train_sse: f64,
    /// Cross-validated mean squared prediction error.
    pub cv_error: f64,
    /// Standard error of `cv_error`.
    pub cv_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    /// Selected subtree of the full tree, with the complexity table attached.
    pub tree: RegressionTree,
    pub alpha: f64,
    /// Index of the selected row in `tree.complexity`.
    pub chosen: usize,
    pub folds: usize,
    pub seed: u64,
    /// Fold index of every row.
    pub fold_of: Vec<usize>,
}

/// Held-out row and its squared error under each probe alpha.
type HeldOut = (usize, Vec<f64>);

/// Seeded shuffle, then round-robin fold labels.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0; n];
    for (pos, &row) in perm.iter().enumerate() {
        fold_of[row] = pos % folds;
    }
    fold_of
}

/// Subtree of a pruning sequence in force at complexity `alpha`.
fn step_at(steps: &[PruneStep], alpha: f64) -> &PruneStep {
    steps.iter().rev().find(|s| s.alpha <= alpha).unwrap_or(&steps[0])
}

/// Grows the full tree, evaluates every member of its pruning sequence by
/// k-fold cross-validation (fold trees pruned at the geometric midpoints of
/// consecutive alphas) and keeps the smallest subtree within one standard
/// error of the minimum.
pub fn cross_validate(table: &Table, params: GrowParams, cv: CvParams) -> Result<CvResult> {
    let n = table.n_rows();
    if cv.folds < 2 || cv.folds > n {
        return Err(Error::InvalidArgument(format!("fold count {} must lie in [2, {n}]", cv.folds)));
    }
    let full = grow(table, params)?;
    let steps = prune_sequence(&full);
    let probes: Vec<f64> = (0..steps.len())
        .map(|k| if k + 1 < steps.len() { (steps[k].alpha * steps[k + 1].alpha).sqrt() } else { f64::INFINITY })
        .collect();

    let fold_of = fold_assignment(n, cv.folds, cv.seed);
    // errors[k][row]: squared held-out error of row under probe k.
    let per_fold: Vec<Result<Vec<HeldOut>>> = (0..cv.folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != f).collect();
            let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == f).collect();
            let tree = grow(&table.subset(&train), params)?;
            let fold_steps = prune_sequence(&tree);
            let subtrees: Vec<RegressionTree> =
                probes.iter().map(|&a| tree.collapse(&step_at(&fold_steps, a).collapsed)).collect();
            test.iter()
                .map(|&row| {
                    let errs = subtrees
                        .iter()
                        .map(|t| t.predict(table.row(row)).map(|p| (p - table.y()[row]).powi(2)))
                        .collect::<Result<Vec<f64>>>()?;
                    Ok((row, errs))
                })
                .collect()
        })
        .collect();

    let mut errors = vec![vec![0.0; n]; steps.len()];
    for fold in per_fold {
        for (row, errs) in fold? {
            for (k, e) in errs.into_iter().enumerate() {
                errors[k][row] = e;
            }
        }
    }

    let complexity: Vec<ComplexityRow> = steps
        .iter()
        .zip(&errors)
        .map(|(s, e)| {
            let mean = e.iter().sum::<f64>() / n as f64;
            let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            ComplexityRow { alpha: s.alpha, leaves: s.leaves, train_sse: s.sse, cv_error: mean, cv_se: (var / n as f64).sqrt() }
        })
        .collect();

    let best = (0..complexity.len())
        .min_by(|&a, &b| complexity[a].cv_error.total_cmp(&complexity[b].cv_error).then(b.cmp(&a)))
        .expect("pruning sequence is never empty");
    let limit = complexity[best].cv_error + complexity[best].cv_se;
    let chosen = (0..complexity.len()).rev().find(|&k| complexity[k].cv_error <= limit).unwrap_or(best);

    let mut tree = full.collapse(&steps[chosen].collapsed);
    tree.complexity = complexity;
    Ok(CvResult { tree, alpha: steps[chosen].alpha, chosen, folds: cv.folds, seed: cv.seed, fold_of })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_balanced_and_seeded() {
        let a = fold_assignment(23, 5, 9);
        assert_eq!(a, fold_assignment(23, 5, 9));
        for f in 0..5 {
            let size = a.iter().filter(|&&x| x == f).count();
            assert!(size == 4 || size == 5);
        }
    }

    #[test]
    fn rejects_fold_count_outside_range() {
        let t = crate::cart::tests::toy();
        assert!(cross_validate(&t, GrowParams::with_minsplit(2), CvParams { folds: 5, seed: 0 }).is_err());
        assert!(cross_validate(&t, GrowParams::with_minsplit(2), CvParams { folds: 1, seed: 0 }).is_err());
    }
}
