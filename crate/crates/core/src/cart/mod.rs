//! CART regression trees: MSE splitting, weakest-link cost-complexity pruning,
//! cross-validated subtree selection and surrogate-based variable importance.

mod cv;
mod importance;
mod prune;
mod split;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cv::{cross_validate, ComplexityRow, CvParams, CvResult};
pub use importance::{surrogates, variable_importance, Surrogate, VariableImportance};
pub use prune::{prune_sequence, PruneStep};
pub use split::{best_split, SplitCandidate};

/// Categorical features may have at most this many levels (exhaustive subset search).
pub const MAX_LEVELS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    /// Integer-coded levels.
    Categorical,
}

/// Feature matrix plus response, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    names: Vec<String>,
    kinds: Vec<FeatureKind>,
    rows: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl Table {
    pub fn new(names: Vec<String>, kinds: Vec<FeatureKind>, rows: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if names.len() != kinds.len() {
            return Err(Error::LengthMismatch { left: names.len(), right: kinds.len() });
        }
        if rows.len() != y.len() {
            return Err(Error::LengthMismatch { left: rows.len(), right: y.len() });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != names.len() {
                return Err(Error::Schema(format!(
                    "row {i} has {} values, expected {}",
                    row.len(),
                    names.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Schema(format!("row {i}: non-finite value for `{}`", names[j])));
            }
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        for (j, kind) in kinds.iter().enumerate() {
            if *kind != FeatureKind::Categorical {
                continue;
            }
            let mut levels: Vec<i64> = Vec::new();
            for row in &rows {
                let v = row[j];
                if v.fract() != 0.0 {
                    return Err(Error::Schema(format!("categorical `{}` has non-integer code {v}", names[j])));
                }
                let code = v as i64;
                if !levels.contains(&code) {
                    levels.push(code);
                }
            }
            if levels.len() > MAX_LEVELS {
                return Err(Error::Schema(format!(
                    "categorical `{}` has {} levels, at most {MAX_LEVELS} supported",
                    names[j],
                    levels.len()
                )));
            }
        }
        Ok(Self { names, kinds, rows, y })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn value(&self, row: usize, var: usize) -> f64 {
        self.rows[row][var]
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Table restricted to `rows`, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Table {
        Table {
            names: self.names.clone(),
            kinds: self.kinds.clone(),
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
            y: rows.iter().map(|&i| self.y[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SplitRule {
    /// Left iff `value < threshold`.
    Numeric { var: usize, threshold: f64 },
    /// Left iff the level code is in `left`.
    Categorical { var: usize, left: Vec<i64> },
}

impl SplitRule {
    pub fn var(&self) -> usize {
        match self {
            SplitRule::Numeric { var, .. } | SplitRule::Categorical { var, .. } => *var,
        }
    }

    pub fn goes_left(&self, value: f64) -> bool {
        match self {
            SplitRule::Numeric { threshold, .. } => value < *threshold,
            SplitRule::Categorical { left, .. } => left.contains(&(value as i64)),
        }
    }

    pub fn describe(&self, names: &[String]) -> String {
        match self {
            SplitRule::Numeric { var, threshold } => format!("{} < {}", names[*var], fmt_threshold(*threshold)),
            SplitRule::Categorical { var, left } => {
                let levels: Vec<String> = left.iter().map(|l| l.to_string()).collect();
                format!("{} in {{{}}}", names[*var], levels.join(","))
            }
        }
    }
}

fn fmt_threshold(t: f64) -> String {
    let s = format!("{t:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub rule: SplitRule,
    /// Reduction in the sum of squared deviations achieved by the split.
    pub improvement: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub count: usize,
    pub mean: f64,
    /// Sum of squared deviations from `mean`.
    pub sse: f64,
    pub depth: usize,
    pub split: Option<Split>,
}

impl Node {
    pub fn mse(&self) -> f64 {
        self.sse / self.count as f64
    }

    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowParams {
    pub minsplit: usize,
    pub minbucket: usize,
    pub max_depth: usize,
}

impl GrowParams {
    /// `minsplit = max(5, ceil(0.1 n))`, `minbucket = max(1, floor(minsplit / 3))`.
    pub fn for_rows(n: usize) -> Self {
        let minsplit = 5.max(n.div_ceil(10));
        Self::with_minsplit(minsplit)
    }

    pub fn with_minsplit(minsplit: usize) -> Self {
        Self { minsplit, minbucket: (minsplit / 3).max(1), max_depth: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub names: Vec<String>,
    pub kinds: Vec<FeatureKind>,
    /// Pre-order arena; node 0 is the root and children follow their parent.
    pub nodes: Vec<Node>,
    pub params: GrowParams,
    /// Filled in by cross-validation.
    pub complexity: Vec<ComplexityRow>,
}

fn mean_sse(y: &[f64], rows: &[usize]) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|&i| y[i]).sum::<f64>() / n;
    let sse = rows.iter().map(|&i| (y[i] - mean).powi(2)).sum();
    (mean, sse)
}

pub fn grow(table: &Table, params: GrowParams) -> Result<RegressionTree> {
    if table.n_rows() == 0 {
        return Err(Error::InvalidArgument("cannot grow a tree on an empty table".into()));
    }
    if params.minbucket == 0 || params.minsplit < 2 * params.minbucket {
        return Err(Error::InvalidArgument(format!(
            "need minbucket >= 1 and minsplit >= 2 * minbucket (got {} / {})",
            params.minsplit, params.minbucket
        )));
    }
    let mut nodes = Vec::new();
    let all: Vec<usize> = (0..table.n_rows()).collect();
    build(table, params, all, 0, &mut nodes);
    Ok(RegressionTree {
        names: table.names().to_vec(),
        kinds: table.kinds().to_vec(),
        nodes,
        params,
        complexity: Vec::new(),
    })
}

fn build(table: &Table, params: GrowParams, rows: Vec<usize>, depth: usize, nodes: &mut Vec<Node>) -> usize {
    let (mean, sse) = mean_sse(table.y(), &rows);
    let id = nodes.len();
    nodes.push(Node { count: rows.len(), mean, sse, depth, split: None });
    if rows.len() < params.minsplit || depth >= params.max_depth {
        return id;
    }
    let Some(best) = best_split(table, &rows, params.minbucket) else {
        return id;
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&r| best.rule.goes_left(table.value(r, best.rule.var())));
    let left = build(table, params, left_rows, depth + 1, nodes);
    let right = build(table, params, right_rows, depth + 1, nodes);
    nodes[id].split = Some(Split { rule: best.rule, improvement: best.improvement, left, right });
    id
}

impl RegressionTree {
    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf()).collect()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Training sum of squared errors: the leaf deviations.
    pub fn training_sse(&self) -> f64 {
        self.nodes.iter().filter(|n| n.is_leaf()).map(|n| n.sse).sum()
    }

    /// Distinct variables used by primary splits.
    pub fn variables_used(&self) -> Vec<usize> {
        let mut vars: Vec<usize> = self.nodes.iter().filter_map(|n| n.split.as_ref().map(|s| s.rule.var())).collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// Leaf reached by `x`; `NaN` on a routed variable is an error.
    pub fn leaf_for(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.names.len() {
            return Err(Error::LengthMismatch { left: x.len(), right: self.names.len() });
        }
        let mut id = 0;
        while let Some(split) = &self.nodes[id].split {
            let var = split.rule.var();
            let v = x[var];
            if v.is_nan() {
                return Err(Error::MissingValue(self.names[var].clone()));
            }
            id = if split.rule.goes_left(v) { split.left } else { split.right };
        }
        Ok(id)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.nodes[self.leaf_for(x)?].mean)
    }

    pub fn predict_table(&self, table: &Table) -> Result<Vec<f64>> {
        (0..table.n_rows()).map(|i| self.predict(table.row(i))).collect()
    }

    /// Parent of every node (`None` for the root).
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parents = vec![None; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(s) = &n.split {
                parents[s.left] = Some(i);
                parents[s.right] = Some(i);
            }
        }
        parents
    }

    /// Subtree obtained by turning every node in `collapsed` into a leaf,
    /// re-indexed in pre-order.
    pub fn collapse(&self, collapsed: &[usize]) -> RegressionTree {
        let mut nodes = Vec::new();
        self.copy_node(0, collapsed, &mut nodes);
        RegressionTree {
            names: self.names.clone(),
            kinds: self.kinds.clone(),
            nodes,
            params: self.params,
            complexity: Vec::new(),
        }
    }

    fn copy_node(&self, id: usize, collapsed: &[usize], out: &mut Vec<Node>) -> usize {
        let node = &self.nodes[id];
        let new_id = out.len();
        out.push(Node { split: None, ..node.clone() });
        if collapsed.contains(&id) {
            return new_id;
        }
        if let Some(split) = &node.split {
            let left = self.copy_node(split.left, collapsed, out);
            let right = self.copy_node(split.right, collapsed, out);
            out[new_id].split = Some(Split { left, right, ..split.clone() });
        }
        new_id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy() -> Table {
        Table::new(
            vec!["x".into()],
            vec![FeatureKind::Numeric],
            vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            vec![0.0, 0.0, 10.0, 10.0],
        )
        .unwrap()
    }

    #[test]
    fn single_row_is_a_leaf() {
        let t = Table::new(vec!["x".into()], vec![FeatureKind::Numeric], vec![vec![1.0]], vec![0.3]).unwrap();
        let tree = grow(&t, GrowParams::with_minsplit(2)).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.predict(&[5.0]).unwrap(), 0.3);
    }

    #[test]
    fn separable_toy_grows_depth_one() {
        let tree = grow(&toy(), GrowParams { minsplit: 2, minbucket: 1, max_depth: 30 }).unwrap();
        assert_eq!(tree.nodes.len(), 3);
        assert_eq!(tree.training_sse(), 0.0);
        assert_eq!(tree.root().split.as_ref().unwrap().rule, SplitRule::Numeric { var: 0, threshold: 2.5 });
        assert_eq!(tree.predict(&[1.0]).unwrap(), 0.0);
        assert_eq!(tree.predict(&[3.7]).unwrap(), 10.0);
    }

    #[test]
    fn minsplit_gate() {
        let tree = grow(&toy(), GrowParams::with_minsplit(5)).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        assert!((tree.predict(&[0.0]).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params_and_empty_table() {
        assert!(grow(&toy(), GrowParams { minsplit: 3, minbucket: 2, max_depth: 30 }).is_err());
        let empty = Table::new(vec!["x".into()], vec![FeatureKind::Numeric], vec![], vec![]).unwrap();
        assert!(grow(&empty, GrowParams::with_minsplit(5)).is_err());
    }

    #[test]
    fn missing_value_on_routed_variable() {
        let tree = grow(&toy(), GrowParams { minsplit: 2, minbucket: 1, max_depth: 30 }).unwrap();
        assert!(matches!(tree.predict(&[f64::NAN]), Err(Error::MissingValue(_))));
    }

    #[test]
    fn default_params_follow_row_count() {
        assert_eq!(GrowParams::for_rows(50).minsplit, 5);
        assert_eq!(GrowParams::for_rows(50).minbucket, 1);
        assert_eq!(GrowParams::for_rows(120).minsplit, 12);
        assert_eq!(GrowParams::for_rows(120).minbucket, 4);
    }

    #[test]
    fn categorical_codes_must_be_integers() {
        let bad = Table::new(vec!["c".into()], vec![FeatureKind::Categorical], vec![vec![0.5]], vec![1.0]);
        assert!(bad.is_err());
    }
}
