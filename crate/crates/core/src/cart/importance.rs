use serde::{Deserialize, Serialize};

use super::{FeatureKind, RegressionTree, SplitRule, Table};
use crate::error::{Error, Result};

/// Surrogates considered per split when scoring importance.
pub const MAX_SURROGATES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surrogate {
    pub rule: SplitRule,
    /// The rule's left side maps to the primary's right side.
    pub reversed: bool,
    /// Fraction of rows sent the same way as the primary split.
    pub agreement: f64,
    /// Agreement in excess of the majority-direction rule, rescaled to [0, 1].
    pub adj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableImportance {
    pub var: usize,
    pub name: String,
    pub score: f64,
    pub percent: f64,
}

/// Best surrogate split per non-primary variable on `rows`, keeping at most
/// `max` with positive `adj`, ordered by agreement then variable index.
pub fn surrogates(table: &Table, rows: &[usize], primary: &SplitRule, max: usize) -> Vec<Surrogate> {
    let n = rows.len();
    if n == 0 {
        return Vec::new();
    }
    let dir: Vec<bool> = rows.iter().map(|&r| primary.goes_left(table.value(r, primary.var()))).collect();
    let n_left = dir.iter().filter(|&&d| d).count();
    let majority = n_left.max(n - n_left) as f64 / n as f64;
    if majority >= 1.0 {
        return Vec::new();
    }

    let mut found: Vec<Surrogate> = (0..table.n_features())
        .filter(|&v| v != primary.var())
        .filter_map(|v| {
            let (rule, reversed, agree) = match table.kinds()[v] {
                FeatureKind::Numeric => numeric_surrogate(table, rows, &dir, v)?,
                FeatureKind::Categorical => categorical_surrogate(table, rows, &dir, v)?,
            };
            let agreement = agree as f64 / n as f64;
            let adj = (agreement - majority) / (1.0 - majority);
            (adj > 0.0).then_some(Surrogate { rule, reversed, agreement, adj })
        })
        .collect();
    found.sort_by(|a, b| b.agreement.total_cmp(&a.agreement).then(a.rule.var().cmp(&b.rule.var())));
    found.truncate(max);
    found
}

fn numeric_surrogate(table: &Table, rows: &[usize], dir: &[bool], var: usize) -> Option<(SplitRule, bool, usize)> {
    let mut order: Vec<(f64, bool)> = rows.iter().zip(dir).map(|(&r, &d)| (table.value(r, var), d)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total_left = dir.iter().filter(|&&d| d).count();
    let n = order.len();
    let mut best: Option<(SplitRule, bool, usize)> = None;
    let mut left_below = 0;
    for i in 0..n.saturating_sub(1) {
        if order[i].1 {
            left_below += 1;
        }
        let (lo, hi) = (order[i].0, order[i + 1].0);
        if lo >= hi {
            continue;
        }
        let below = i + 1;
        // "< t goes left": primary-left rows below plus primary-right rows above.
        let straight = left_below + (n - below) - (total_left - left_below);
        let reversed = n - straight;
        let threshold = lo + (hi - lo) / 2.0;
        for (rev, agree) in [(false, straight), (true, reversed)] {
            if best.as_ref().is_none_or(|b| agree > b.2) {
                best = Some((SplitRule::Numeric { var, threshold }, rev, agree));
            }
        }
    }
    best
}

fn categorical_surrogate(table: &Table, rows: &[usize], dir: &[bool], var: usize) -> Option<(SplitRule, bool, usize)> {
    let mut tally: Vec<(i64, usize, usize)> = Vec::new();
    for (&r, &d) in rows.iter().zip(dir) {
        let code = table.value(r, var) as i64;
        let pos = match tally.iter().position(|t| t.0 == code) {
            Some(p) => p,
            None => {
                tally.push((code, 0, 0));
                tally.len() - 1
            }
        };
        if d {
            tally[pos].1 += 1;
        } else {
            tally[pos].2 += 1;
        }
    }
    tally.sort_by_key(|t| t.0);
    let left: Vec<i64> = tally.iter().filter(|t| t.1 >= t.2).map(|t| t.0).collect();
    if left.is_empty() || left.len() == tally.len() {
        return None;
    }
    let agree = tally.iter().map(|t| t.1.max(t.2)).sum();
    Some((SplitRule::Categorical { var, left }, false, agree))
}

/// Sum over splits of the SSE reduction credited to the primary variable,
/// plus `adj` times that reduction for each surrogate variable.
pub fn variable_importance(tree: &RegressionTree, table: &Table) -> Result<Vec<VariableImportance>> {
    if table.n_features() != tree.names.len() {
        return Err(Error::LengthMismatch { left: table.n_features(), right: tree.names.len() });
    }
    let mut node_rows: Vec<Vec<usize>> = vec![Vec::new(); tree.nodes.len()];
    node_rows[0] = (0..table.n_rows()).collect();
    let mut score = vec![0.0; tree.names.len()];
    // Pre-order guarantees a parent is visited before its children.
    for id in 0..tree.nodes.len() {
        let Some(split) = &tree.nodes[id].split else { continue };
        let rows = std::mem::take(&mut node_rows[id]);
        score[split.rule.var()] += split.improvement;
        for s in surrogates(table, &rows, &split.rule, MAX_SURROGATES) {
            score[s.rule.var()] += s.adj * split.improvement;
        }
        for r in rows {
            let v = table.value(r, split.rule.var());
            if v.is_nan() {
                return Err(Error::MissingValue(tree.names[split.rule.var()].clone()));
            }
            let child = if split.rule.goes_left(v) { split.left } else { split.right };
            node_rows[child].push(r);
        }
    }
    let total: f64 = score.iter().sum();
    let mut out: Vec<VariableImportance> = score
        .iter()
        .enumerate()
        .map(|(var, &s)| VariableImportance {
            var,
            name: tree.names[var].clone(),
            score: s,
            percent: if total > 0.0 { 100.0 * s / total } else { 0.0 },
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.var.cmp(&b.var)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cart::{grow, GrowParams};

    fn paired() -> Table {
        // x1 drives y, x2 is a noisy copy of x1, x3 is unrelated.
        let rows = (0..8)
            .map(|i| {
                let x1 = i as f64;
                let x2 = if i == 3 { 10.0 } else { x1 * 2.0 };
                vec![x1, x2, ((i * 5) % 8) as f64]
            })
            .collect();
        let y = (0..8).map(|i| if i < 4 { 1.0 } else { 5.0 }).collect();
        Table::new(vec!["x1".into(), "x2".into(), "x3".into()], vec![FeatureKind::Numeric; 3], rows, y).unwrap()
    }

    #[test]
    fn surrogate_tracks_correlated_variable() {
        let t = paired();
        let primary = SplitRule::Numeric { var: 0, threshold: 3.5 };
        let s = surrogates(&t, &(0..8).collect::<Vec<_>>(), &primary, 5);
        assert_eq!(s[0].rule.var(), 1);
        assert!((s[0].agreement - 7.0 / 8.0).abs() < 1e-12);
        assert!((s[0].adj - 0.75).abs() < 1e-12);
    }

    #[test]
    fn importance_percentages_sum_to_100() {
        let t = paired();
        let tree = grow(&t, GrowParams::with_minsplit(2)).unwrap();
        let imp = variable_importance(&tree, &t).unwrap();
        assert_eq!(imp[0].name, "x1");
        let total: f64 = imp.iter().map(|v| v.percent).sum();
        assert!((total - 100.0).abs() < 1e-9);
    }

    #[test]
    fn root_only_tree_scores_zero() {
        let t = paired();
        let tree = grow(&t, GrowParams::with_minsplit(20)).unwrap();
        assert!(variable_importance(&tree, &t).unwrap().iter().all(|v| v.score == 0.0 && v.percent == 0.0));
    }
}
