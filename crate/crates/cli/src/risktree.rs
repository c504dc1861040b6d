//! `risktree`: cross-validated regression tree on a CFR table.

use std::path::{Path, PathBuf};

use epiforecast::cart::{
    cross_validate, grow, variable_importance, ComplexityRow, CvParams, GrowParams, RegressionTree, SplitRule,
    VariableImportance,
};
use epiforecast::cfr::CfrDataset;
use epiforecast::metrics::MetricReport;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::forecast::stem;
use crate::svg::tree_diagram;

#[derive(Debug, Clone, Serialize)]
pub struct NodeOut {
    pub id: usize,
    pub depth: usize,
    pub count: usize,
    pub mean: f64,
    pub mse: f64,
    pub rule: Option<String>,
    pub split: Option<SplitRule>,
    pub improvement: Option<f64>,
    pub left: Option<usize>,
    pub right: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeOut {
    pub params: GrowParams,
    pub folds: usize,
    pub seed: u64,
    pub alpha: f64,
    pub chosen: usize,
    pub complexity: Vec<ComplexityRow>,
    pub variables_used: Vec<String>,
    pub nodes: Vec<NodeOut>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskReport {
    pub input: String,
    pub rows: usize,
    pub leaves: usize,
    pub root_split: Option<String>,
    pub variables_used: Vec<String>,
    /// Fit of the selected tree on the training rows; `k` is leaves - 1.
    pub training: MetricReport,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RiskRun {
    pub tree: RegressionTree,
    pub importance: Vec<VariableImportance>,
    pub report: RiskReport,
    pub files: Vec<PathBuf>,
}

fn tree_out(tree: &RegressionTree, params: GrowParams, folds: usize, seed: u64, alpha: f64, chosen: usize) -> TreeOut {
    TreeOut {
        params,
        folds,
        seed,
        alpha,
        chosen,
        complexity: tree.complexity.clone(),
        variables_used: tree.variables_used().into_iter().map(|v| tree.names[v].clone()).collect(),
        nodes: tree
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| NodeOut {
                id,
                depth: n.depth,
                count: n.count,
                mean: n.mean,
                mse: n.mse(),
                rule: n.split.as_ref().map(|s| s.rule.describe(&tree.names)),
                split: n.split.as_ref().map(|s| s.rule.clone()),
                improvement: n.split.as_ref().map(|s| s.improvement),
                left: n.split.as_ref().map(|s| s.left),
                right: n.split.as_ref().map(|s| s.right),
            })
            .collect(),
    }
}

pub fn run(input: &Path, cfg: &RunConfig) -> Result<RiskRun> {
    let data = CfrDataset::from_csv_path(input).map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
    let table = data.to_table()?;
    let n = table.n_rows();
    let params = match cfg.minsplit {
        Some(m) => GrowParams::with_minsplit(m),
        None => GrowParams::for_rows(n),
    };
    let mut notes = Vec::new();
    let folds = cfg.folds.min(n);
    if folds != cfg.folds {
        notes.push(format!("fold count reduced from {} to {folds} (table has {n} rows)", cfg.folds));
    }
    let (tree, alpha, chosen) = if folds >= 2 {
        let cv = cross_validate(&table, params, CvParams { folds, seed: cfg.seed })?;
        (cv.tree, cv.alpha, cv.chosen)
    } else {
        notes.push("too few rows for cross-validation; reporting the grown tree".into());
        (grow(&table, params)?, 0.0, 0)
    };

    let pred = tree.predict_table(&table)?;
    let training = MetricReport::compute(table.y(), &pred, tree.n_leaves() - 1)?;
    if training.r2.is_none() {
        notes.push("R2 undefined: the response is constant".into());
    }
    let importance = variable_importance(&tree, &table)?;
    let report = RiskReport {
        input: input.display().to_string(),
        rows: n,
        leaves: tree.n_leaves(),
        root_split: tree.root().split.as_ref().map(|s| s.rule.describe(&tree.names)),
        variables_used: tree.variables_used().into_iter().map(|v| tree.names[v].clone()).collect(),
        training,
        notes,
    };

    let out = &cfg.out;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let name = stem(input);
    let mut files = Vec::new();
    let mut put = |file: String, text: String| -> Result<()> {
        let path = out.join(file);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        files.push(path);
        Ok(())
    };
    let t = tree_out(&tree, params, folds, cfg.seed, alpha, chosen);
    put(format!("{name}_tree.json"), serde_json::to_string_pretty(&t)? + "\n")?;
    put(format!("{name}_tree.svg"), tree_diagram(&tree))?;
    let mut csv = String::from("rank,variable,score,percent\n");
    for (i, v) in importance.iter().enumerate() {
        csv += &format!("{},{},{:.8},{:.4}\n", i + 1, v.name, v.score, v.percent);
    }
    put(format!("{name}_importance.csv"), csv)?;
    put(format!("{name}_metrics.json"), serde_json::to_string_pretty(&report)? + "\n")?;

    Ok(RiskRun { tree, importance, report, files })
}

pub fn report(run: &RiskRun) -> String {
    let r = &run.report;
    let m = &r.training;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "undefined".into());
    let mut s = format!("{} ({} rows): {} leaves\n", r.input, r.rows, r.leaves);
    s += &format!("root split: {}\n", r.root_split.as_deref().unwrap_or("none"));
    s += &format!("variables used: {}\n", r.variables_used.join(", "));
    s += &format!("RMSE {:.4}  MAE {:.4}  R2 {}  adj R2 {}\n", m.rmse, m.mae, opt(m.r2), opt(m.adj_r2));
    s += "importance:\n";
    for v in &run.importance {
        s += &format!("  {:<18} {:>6.2}%\n", v.name, v.percent);
    }
    for note in &r.notes {
        s += &format!("note: {note}\n");
    }
    s
}
