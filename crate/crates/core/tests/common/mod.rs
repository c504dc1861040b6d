//! Reference implementations, random generators and the property suite shared
//! by the integration tests and the acceptance run.

#![allow(dead_code)]

use epiforecast::arima::{fit_arima, roots_outside_unit_circle, ArimaOrder};
use epiforecast::cart::{
    best_split, cross_validate, grow, prune_sequence, CvParams, FeatureKind, GrowParams, RegressionTree, SplitRule,
    Table,
};
use epiforecast::hybrid::{fit_hybrid_with, forecast_hybrid};
use epiforecast::metrics::{mae, rmse};
use epiforecast::series::{acf, difference, inverse_difference, pacf, Transform};
use epiforecast::stationarity::adf_test;
use epiforecast::wavelet::{imodwt, max_level, modwt};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- tables

/// Random table with `n <= 50` rows and 1 to 4 variables. Values are drawn
/// from small integer grids half of the time so that ties are common.
pub fn random_table(seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=50);
    let p = rng.random_range(1..=4);
    let coarse = rng.random_bool(0.5);
    let kinds: Vec<FeatureKind> = (0..p)
        .map(|_| if rng.random_bool(0.25) { FeatureKind::Categorical } else { FeatureKind::Numeric })
        .collect();
    let levels = rng.random_range(2..=4);
    let rows = (0..n)
        .map(|_| {
            kinds
                .iter()
                .map(|k| match k {
                    FeatureKind::Categorical => rng.random_range(0..levels) as f64 - 1.0,
                    FeatureKind::Numeric if coarse => rng.random_range(0..6) as f64,
                    FeatureKind::Numeric => rng.random_range(-10.0..10.0),
                })
                .collect()
        })
        .collect();
    let y = (0..n).map(|_| if coarse { rng.random_range(0..5) as f64 } else { rng.random_range(0.0..1.0) }).collect();
    let names = (0..p).map(|j| format!("v{j}")).collect();
    Table::new(names, kinds, rows, y).unwrap()
}

pub fn random_params(seed: u64) -> GrowParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let minbucket = rng.random_range(1..=3);
    GrowParams { minsplit: 2 * minbucket + rng.random_range(0..=3), minbucket, max_depth: 30 }
}

fn sse_of(y: &[f64], rows: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let m = rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64;
    rows.iter().map(|&r| (y[r] - m).powi(2)).sum()
}

/// Every admissible split of `rows` in canonical order (variable, then
/// threshold or level bitmask), scored by direct partitioning.
pub fn enumerate_splits(table: &Table, rows: &[usize], minbucket: usize) -> Vec<(SplitRule, f64)> {
    let parent = sse_of(table.y(), rows);
    let mut out = Vec::new();
    for var in 0..table.n_features() {
        let mut vals: Vec<f64> = rows.iter().map(|&r| table.value(r, var)).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        let rules: Vec<SplitRule> = match table.kinds()[var] {
            FeatureKind::Numeric => {
                vals.windows(2).map(|w| SplitRule::Numeric { var, threshold: w[0] + (w[1] - w[0]) / 2.0 }).collect()
            }
            FeatureKind::Categorical => {
                let k = vals.len();
                (1u32..(1 << k) - 1)
                    .filter(|m| m & (1 << (k - 1)) == 0)
                    .map(|m| SplitRule::Categorical {
                        var,
                        left: (0..k).filter(|i| m & (1 << i) != 0).map(|i| vals[i] as i64).collect(),
                    })
                    .collect()
            }
        };
        for rule in rules {
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| rule.goes_left(table.value(i, var)));
            if l.len() < minbucket || r.len() < minbucket {
                continue;
            }
            out.push((rule, parent - sse_of(table.y(), &l) - sse_of(table.y(), &r)));
        }
    }
    out
}

/// Exhaustive best split with the same tie rule as the library.
pub fn brute_best_split(table: &Table, rows: &[usize], minbucket: usize) -> Option<(SplitRule, f64)> {
    let parent = sse_of(table.y(), rows);
    let all = enumerate_splits(table, rows, minbucket.max(1));
    let top = all.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let sumsq: f64 = rows.iter().map(|&r| table.y()[r].powi(2)).sum();
    let tol = (1e-9 * parent).max(64.0 * f64::EPSILON * sumsq);
    if parent <= 0.0 || top <= tol {
        return None;
    }
    all.into_iter().find(|c| c.1 >= top - tol)
}

pub fn check_best_split(table: &Table, minbucket: usize) -> Result<(), String> {
    let rows: Vec<usize> = (0..table.n_rows()).collect();
    let ours = best_split(table, &rows, minbucket);
    let oracle = brute_best_split(table, &rows, minbucket);
    let scale = 1e-9 * sse_of(table.y(), &rows).max(1e-300);
    match (ours, oracle) {
        (None, None) => Ok(()),
        (Some(a), Some((rule, imp))) => {
            if (a.improvement - imp).abs() > scale.max(1e-12) {
                return Err(format!("improvement {} vs oracle {imp}", a.improvement));
            }
            if a.rule != rule {
                return Err(format!("rule {:?} vs oracle {rule:?}", a.rule));
            }
            Ok(())
        }
        (a, b) => Err(format!("library {a:?} vs oracle {b:?}")),
    }
}

/// `best[L]` = smallest training SSE over all pruned subtrees rooted at `id`
/// with `L` leaves (index 0 unused).
fn subtree_frontier(tree: &RegressionTree, id: usize) -> Vec<f64> {
    let node = &tree.nodes[id];
    let mut best = vec![f64::INFINITY, node.sse];
    if let Some(s) = &node.split {
        let (l, r) = (subtree_frontier(tree, s.left), subtree_frontier(tree, s.right));
        best.resize(l.len() + r.len() - 1, f64::INFINITY);
        for (i, a) in l.iter().enumerate().skip(1) {
            for (j, b) in r.iter().enumerate().skip(1) {
                best[i + j] = best[i + j].min(a + b);
            }
        }
    }
    best
}

/// Compares the weakest-link sequence with the lower convex hull of
/// `(leaves, min SSE)` over every pruned subtree.
pub fn check_pruning(tree: &RegressionTree) -> Result<(), String> {
    let seq = prune_sequence(tree);
    let best = subtree_frontier(tree, 0);
    let tol = 1e-9 * tree.nodes[0].sse.max(1e-300);

    // Lower convex hull of (L, best[L]) for L up to the smallest subtree
    // reaching the minimum SSE; collinear points are dropped because the
    // weakest link removes tied links together.
    let min_sse = best.iter().copied().fold(f64::INFINITY, f64::min);
    let start = (1..best.len()).find(|&l| best[l] <= min_sse + tol).unwrap();
    let mut hull: Vec<usize> = Vec::new();
    for c in (1..=start).filter(|&l| best[l].is_finite()) {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let on_line = best[a] + (best[c] - best[a]) * (b - a) as f64 / (c - a) as f64;
            if best[b] >= on_line - tol {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(c);
    }
    hull.reverse();
    let mut verts = vec![(hull[0], 0.0)];
    for w in hull.windows(2) {
        verts.push((w[1], (best[w[1]] - best[w[0]]) / (w[0] - w[1]) as f64));
    }
    if verts.len() != seq.len() {
        return Err(format!("sequence has {} steps, oracle {}: {verts:?} vs {seq:?}", seq.len(), verts.len()));
    }
    for (k, (step, (leaves, alpha))) in seq.iter().zip(&verts).enumerate() {
        if step.leaves != *leaves || (step.alpha - alpha).abs() > tol || (step.sse - best[*leaves]).abs() > tol {
            return Err(format!("step {k}: ({}, {}, {}) vs oracle ({leaves}, {alpha}, {})", step.leaves, step.alpha, step.sse, best[*leaves]));
        }
        if k > 0 && step.alpha <= seq[k - 1].alpha {
            return Err(format!("alpha not increasing at step {k}"));
        }
    }
    check_nested(tree)
}

fn descendants(tree: &RegressionTree, id: usize, out: &mut Vec<usize>) {
    out.push(id);
    if let Some(s) = &tree.nodes[id].split {
        descendants(tree, s.left, out);
        descendants(tree, s.right, out);
    }
}

/// Nodes present in each step form a decreasing chain; training SSE rises
/// as leaves fall.
pub fn check_nested(tree: &RegressionTree) -> Result<(), String> {
    let seq = prune_sequence(tree);
    let present = |collapsed: &[usize]| {
        let mut gone = Vec::new();
        for &c in collapsed {
            let mut d = Vec::new();
            descendants(tree, c, &mut d);
            gone.extend(d.into_iter().skip(1));
        }
        (0..tree.nodes.len()).filter(|i| !gone.contains(i)).collect::<Vec<_>>()
    };
    for w in seq.windows(2) {
        let (a, b) = (present(&w[0].collapsed), present(&w[1].collapsed));
        if !b.iter().all(|i| a.contains(i)) || b.len() >= a.len() {
            return Err("pruning sequence is not strictly nested".into());
        }
        if w[1].sse < w[0].sse - 1e-12 || w[1].leaves >= w[0].leaves {
            return Err("training SSE fell or size grew along the sequence".into());
        }
    }
    let last = seq.last().unwrap();
    if last.leaves != 1 {
        return Err("sequence does not end at the root".into());
    }
    Ok(())
}

/// Structural invariants of a grown tree.
pub fn check_grown(tree: &RegressionTree, params: GrowParams) -> Result<(), String> {
    for n in &tree.nodes {
        if n.count < params.minbucket && tree.nodes.len() > 1 {
            return Err(format!("node with {} rows below minbucket", n.count));
        }
        if let Some(s) = &n.split {
            let (l, r) = (&tree.nodes[s.left], &tree.nodes[s.right]);
            if n.count < params.minsplit {
                return Err("split on a node smaller than minsplit".into());
            }
            if l.count + r.count != n.count {
                return Err("child counts do not sum to parent".into());
            }
            if (l.sse + r.sse).partial_cmp(&n.sse) != Some(std::cmp::Ordering::Less) {
                return Err(format!("split does not reduce SSE: {} + {} vs {}", l.sse, r.sse, n.sse));
            }
        }
    }
    Ok(())
}

/// Moving one numeric input within the gap between thresholds used on it
/// leaves the prediction unchanged.
pub fn check_piecewise_constant(tree: &RegressionTree, table: &Table, rng: &mut ChaCha8Rng) -> Result<(), String> {
    for row in 0..table.n_rows() {
        let x = table.row(row).to_vec();
        let base = tree.predict(&x).map_err(|e| e.to_string())?;
        for var in 0..x.len() {
            if table.kinds()[var] != FeatureKind::Numeric {
                continue;
            }
            let cuts: Vec<f64> = tree
                .nodes
                .iter()
                .filter_map(|n| match n.split.as_ref().map(|s| &s.rule) {
                    Some(SplitRule::Numeric { var: v, threshold }) if *v == var => Some(*threshold),
                    _ => None,
                })
                .collect();
            let lo = cuts.iter().copied().filter(|&c| c <= x[var]).fold(f64::NEG_INFINITY, f64::max);
            let hi = cuts.iter().copied().filter(|&c| c > x[var]).fold(f64::INFINITY, f64::min);
            let (a, b) = (lo.max(x[var] - 100.0), hi.min(x[var] + 100.0));
            let mut moved = x.clone();
            moved[var] = rng.random_range(a..b).max(lo);
            if moved[var] < lo || moved[var] >= hi {
                continue;
            }
            if tree.predict(&moved).map_err(|e| e.to_string())? != base {
                return Err(format!("prediction changed moving v{var} from {} to {}", x[var], moved[var]));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- suite

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn lift(r: Result<(), String>) -> Result<(), TestCaseError> {
    r.map_err(TestCaseError::fail)
}

fn series(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, min..=max)
}

pub struct Property {
    pub name: &'static str,
    pub cases: u32,
    pub run: fn(&mut TestRunner) -> Result<(), String>,
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

pub const PROPERTIES: [Property; 13] = [
    Property {
        name: "difference and inverse_difference round-trip",
        cases: 100,
        run: |r| {
            report(r.run(&(series(3, 60), 0usize..=2), |(x, d)| {
                let anchors = x[..d].to_vec();
                let back = inverse_difference(&difference(&x, d).unwrap(), &anchors, d).unwrap();
                let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                ensure(back.len() == x.len() && err <= 1e-9 * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max)), || {
                    format!("round-trip error {err}")
                })
            }))
        },
    },
    Property {
        name: "transform round-trip and non-negative inverse",
        cases: 100,
        run: |r| {
            let strat = (prop::collection::vec(0.0f64..1e6, 1..50), prop::collection::vec(-50.0f64..50.0, 1..20), -1.0f64..1.0);
            report(r.run(&strat, |(y, z, lambda)| {
                for t in [Transform::Log1p, Transform::BoxCox { lambda }] {
                    let back = t.inverse(&t.forward(&y).unwrap());
                    for (a, b) in y.iter().zip(&back) {
                        ensure((a - b).abs() <= 1e-10 * (1.0 + a), || format!("{t:?}: {a} -> {b}"))?;
                    }
                    ensure(t.inverse(&z).iter().all(|v| *v >= 0.0), || format!("{t:?}: negative inverse"))?;
                }
                Ok(())
            }))
        },
    },
    Property {
        name: "acf within [-1, 1] and pacf(1) = acf(1)",
        cases: 100,
        run: |r| {
            report(r.run(&series(3, 80), |x| {
                let lags = (x.len() - 1).min(10);
                let a = acf(&x, lags).unwrap();
                let p = pacf(&x, lags).unwrap();
                ensure(a.iter().all(|v| (-1.0 - 1e-12..=1.0 + 1e-12).contains(v)), || format!("acf {a:?}"))?;
                ensure((a[1] - p[1]).abs() <= 1e-12, || format!("pacf(1) {} vs acf(1) {}", p[1], a[1]))
            }))
        },
    },
    Property {
        name: "ADF statistic invariant under shift",
        cases: 60,
        run: |r| {
            report(r.run(&(series(20, 120), -1e4f64..1e4), |(x, c)| {
                let a = adf_test(&x).unwrap().statistic;
                let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
                let b = adf_test(&shifted).unwrap().statistic;
                ensure((a - b).abs() <= 1e-6 * (1.0 + a.abs()) || (a.is_infinite() && a == b), || format!("{a} vs {b}"))
            }))
        },
    },
    Property {
        name: "ARIMA fit identities, invertibility and non-negative forecasts",
        cases: 40,
        run: |r| {
            let strat = (prop::collection::vec(0.0f64..500.0, 25..60), 0usize..=2, 0usize..=1, 0usize..=2);
            report(r.run(&strat, |(y, p, d, q)| {
                let order = ArimaOrder::new(p, d, q).unwrap();
                let Ok(fit) = fit_arima(&y, order, Transform::Log1p) else { return Ok(()) };
                let k = fit.n_params() as f64;
                ensure(fit.aic == -2.0 * fit.loglik + 2.0 * k, || "AIC identity".into())?;
                ensure(fit.bic == -2.0 * fit.loglik + k * (fit.n_eff as f64).ln(), || "BIC identity".into())?;
                ensure(roots_outside_unit_circle(&fit.phi) && roots_outside_unit_circle(&fit.theta), || "roots".into())?;
                // Independent residual recursion on the model scale.
                let w = fit.model_series();
                let start = w.len() - fit.n_eff;
                let mut e = vec![0.0; w.len()];
                for t in start..w.len() {
                    let mut v = w[t] - fit.intercept;
                    for (i, ph) in fit.phi.iter().enumerate() {
                        v -= ph * w[t - i - 1];
                    }
                    for (j, th) in fit.theta.iter().enumerate() {
                        if t > j {
                            v += th * e[t - j - 1];
                        }
                    }
                    e[t] = v;
                }
                let err = e.iter().zip(&fit.residuals).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                ensure(err <= 1e-9, || format!("residual recursion mismatch {err}"))?;
                let fitted = fit.model_fitted();
                ensure(w.iter().zip(&fitted).zip(&fit.residuals).all(|((w, f), e)| f + e == *w || (f + e - w).abs() <= 1e-12 * w.abs().max(1.0)), || "fitted + residual".into())?;
                let f1 = fit.forecast(8).unwrap();
                ensure(f1 == fit.forecast(8).unwrap(), || "forecast not deterministic".into())?;
                ensure(f1.iter().all(|v| *v >= 0.0), || "negative forecast".into())
            }))
        },
    },
    Property {
        name: "MODWT perfect reconstruction",
        cases: 100,
        run: |r| {
            report(r.run(&series(8, 512).prop_flat_map(|x| {
                let jmax = max_level(x.len());
                (Just(x), 1..=jmax)
            }), |(x, j)| {
                let back = imodwt(&modwt(&x, j).unwrap());
                let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                ensure(err <= 1e-8, || format!("max error {err}"))
            }))
        },
    },
    Property {
        name: "MODWT shift covariance",
        cases: 60,
        run: |r| {
            report(r.run(&(series(8, 256), 0usize..256), |(x, s)| {
                let n = x.len();
                let s = s % n;
                let j = max_level(n).min(4);
                let shifted: Vec<f64> = (0..n).map(|t| x[(t + n - s) % n]).collect();
                let (a, b) = (modwt(&x, j).unwrap(), modwt(&shifted, j).unwrap());
                for (ca, cb) in a.details.iter().chain([&a.smooth]).zip(b.details.iter().chain([&b.smooth])) {
                    for t in 0..n {
                        ensure((cb[t] - ca[(t + n - s) % n]).abs() <= 1e-8, || format!("shift {s} at t={t}"))?;
                    }
                }
                Ok(())
            }))
        },
    },
    Property {
        name: "mae <= rmse, both permutation invariant",
        cases: 100,
        run: |r| {
            let strat = prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..60).prop_flat_map(|pairs| {
                let n = pairs.len();
                (Just(pairs), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
            });
            report(r.run(&strat, |(pairs, perm)| {
                let (a, p): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
                let (r1, m1) = (rmse(&a, &p).unwrap(), mae(&a, &p).unwrap());
                ensure(m1 <= r1 * (1.0 + 1e-12), || format!("mae {m1} > rmse {r1}"))?;
                let a2: Vec<f64> = perm.iter().map(|&i| a[i]).collect();
                let p2: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
                ensure((rmse(&a2, &p2).unwrap() - r1).abs() <= 1e-9 * (1.0 + r1), || "rmse changed".into())?;
                ensure((mae(&a2, &p2).unwrap() - m1).abs() <= 1e-9 * (1.0 + m1), || "mae changed".into())
            }))
        },
    },
    Property {
        name: "best_split matches exhaustive enumeration",
        cases: 100,
        run: |r| {
            report(r.run(&(any::<u64>(), 1usize..=3), |(seed, minbucket)| lift(check_best_split(&random_table(seed), minbucket))))
        },
    },
    Property {
        name: "pruning sequence is the nested lower envelope",
        cases: 100,
        run: |r| {
            report(r.run(&any::<u64>(), |seed| {
                let tree = grow(&random_table(seed), random_params(seed)).unwrap();
                lift(check_pruning(&tree))
            }))
        },
    },
    Property {
        name: "grown trees: splits reduce SSE, counts add up, predict piecewise constant",
        cases: 100,
        run: |r| {
            report(r.run(&any::<u64>(), |seed| {
                let table = random_table(seed);
                let params = random_params(seed);
                let tree = grow(&table, params).unwrap();
                lift(check_grown(&tree, params))?;
                lift(check_piecewise_constant(&tree, &table, &mut ChaCha8Rng::seed_from_u64(seed)))
            }))
        },
    },
    Property {
        name: "cross-validated tree belongs to the pruning sequence",
        cases: 50,
        run: |r| {
            report(r.run(&any::<u64>(), |seed| {
                let table = random_table(seed);
                if table.n_rows() < 4 {
                    return Ok(());
                }
                let params = random_params(seed);
                let full = grow(&table, params).unwrap();
                let cv = cross_validate(&table, params, CvParams { folds: 4, seed }).unwrap();
                let step = &prune_sequence(&full)[cv.chosen];
                let mut member = full.collapse(&step.collapsed);
                member.complexity = cv.tree.complexity.clone();
                ensure(member == cv.tree, || "selected tree is not a sequence member".into())
            }))
        },
    },
    Property {
        name: "hybrid forecasts non-negative and additive",
        cases: 20,
        run: |r| {
            let strat = (prop::collection::vec(0.0f64..2000.0, 20..50), 0usize..=1, 0usize..=1);
            report(r.run(&strat, |(y, p, q)| {
                let Ok(fit) = fit_hybrid_with(&y, Some(ArimaOrder::new(p, 1, q).unwrap()), Transform::Log1p) else {
                    return Ok(());
                };
                let f = forecast_hybrid(&fit, 10).unwrap();
                ensure(f.hybrid.iter().chain(&f.arima).all(|v| *v >= 0.0), || "negative forecast".into())?;
                for i in 0..10 {
                    ensure(f.combined[i] == f.arima[i] + f.wbf_residual[i], || format!("additivity at {i}"))?;
                }
                for (t, yt) in y.iter().enumerate() {
                    ensure(fit.residuals[t] == yt - fit.base_fitted[t], || format!("bookkeeping at {t}"))?;
                }
                Ok(())
            }))
        },
    },
];

/// Runs every property; returns `(name, cases, outcome)`.
pub fn run_properties() -> Vec<(&'static str, u32, Result<(), String>)> {
    PROPERTIES.iter().map(|p| (p.name, p.cases, (p.run)(&mut runner(p.cases)))).collect()
}

pub fn run_property(name: &str) -> Result<(), String> {
    let p = PROPERTIES.iter().find(|p| p.name == name).expect("known property");
    (p.run)(&mut runner(p.cases))
}
