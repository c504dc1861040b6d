//! Split search and pruning checked against exhaustive enumeration.

mod common;

use epiforecast::cart::{grow, prune_sequence, variable_importance, FeatureKind, GrowParams, Table};

#[test]
fn two_hundred_random_tables_match_enumeration() {
    for seed in 0..200u64 {
        let table = common::random_table(seed);
        let params = common::random_params(seed);
        common::check_best_split(&table, params.minbucket).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let tree = grow(&table, params).unwrap();
        common::check_pruning(&tree).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}

#[test]
fn ten_row_sequence_is_the_envelope() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
    let y = [1.0, 1.2, 0.9, 5.0, 5.3, 4.8, 9.0, 9.1, 2.0, 2.2];
    let rows = x.iter().map(|v| vec![*v]).collect();
    let t = Table::new(vec!["x".into()], vec![FeatureKind::Numeric], rows, y.to_vec()).unwrap();
    let tree = grow(&t, GrowParams::with_minsplit(2)).unwrap();
    common::check_pruning(&tree).unwrap();
    let steps = prune_sequence(&tree);
    assert!(steps.windows(2).all(|w| w[0].alpha <= w[1].alpha));
    assert_eq!(steps.last().unwrap().leaves, 1);
}

#[test]
fn single_split_owns_all_importance() {
    let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64]).collect();
    let y: Vec<f64> = (0..12).map(|i| if i < 6 { 1.0 } else { 3.0 }).collect();
    let t = Table::new(vec!["x".into()], vec![FeatureKind::Numeric], rows, y).unwrap();
    let tree = grow(&t, GrowParams::with_minsplit(2)).unwrap();
    assert_eq!(tree.n_leaves(), 2);
    let imp = variable_importance(&tree, &t).unwrap();
    assert_eq!(imp.len(), 1);
    assert!((imp[0].percent - 100.0).abs() < 1e-12);
}

#[test]
fn root_only_tree_predicts_global_mean() {
    let rows: Vec<Vec<f64>> = (0..3).map(|i| vec![i as f64]).collect();
    let t = Table::new(vec!["x".into()], vec![FeatureKind::Numeric], rows, vec![1.0, 2.0, 6.0]).unwrap();
    let tree = grow(&t, GrowParams::with_minsplit(5)).unwrap();
    assert_eq!(tree.n_leaves(), 1);
    assert_eq!(tree.predict(&[10.0]).unwrap(), 3.0);
}
