mod common;

use fracnet_core::forest::{
    fit_forest, fit_tree, permutation_importance, r2_score, train_test_split, Dataset, ForestParams,
    MaxFeatures, SplitMode, TreeParams,
};
use fracnet_core::seed;
use proptest::prelude::*;

fn purity_params(n_estimators: usize, seed: u64) -> ForestParams {
    ForestParams {
        n_estimators,
        max_depth: None,
        max_features: MaxFeatures::All,
        min_samples_leaf: 1,
        min_samples_split: 2,
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_matches_exhaustive_cart(n in 2usize..=30, p in 1usize..=3, s in any::<u64>()) {
        let d = common::synthetic(n, p - 1, s);
        // Replace the target so that the noise columns matter too.
        let y: Vec<f64> = (0..n).map(|r| (0..p).map(|f| d.value(r, f) * (f + 1) as f64).sum::<f64>().sin()).collect();
        let d = Dataset::new(d.names.clone(), d.columns.clone(), y, None).unwrap();
        let rows: Vec<usize> = (0..n).collect();
        let t = fit_tree(&d, &rows, &TreeParams::default(), &mut seed::rng(s));
        prop_assert!(common::cart_discrepancy(&t, &d, &rows) < 1e-9);
    }

    #[test]
    fn duplicated_rows_keep_thresholds(n in 3usize..=40, s in any::<u64>()) {
        // One feature: with several, two-row nodes tie exactly across
        // features and roundoff picks the winner.
        let d = common::synthetic(n, 0, s);
        let y: Vec<f64> = d.columns[0].iter().map(|v| (7.0 * v).sin()).collect();
        let d = Dataset::new(d.names.clone(), d.columns.clone(), y, None).unwrap();
        let rows: Vec<usize> = (0..n).collect();
        let twice: Vec<usize> = rows.iter().chain(&rows).copied().collect();
        let p = TreeParams::default();
        let a = fit_tree(&d, &rows, &p, &mut seed::rng(s));
        let b = fit_tree(&d, &twice, &p, &mut seed::rng(s));
        prop_assert_eq!(a.feature, b.feature);
        prop_assert_eq!(a.threshold, b.threshold);
    }
}

#[test]
fn synthetic_identity_is_learned() {
    let d = common::synthetic(2000, 5, 42);
    let (tr, te) = train_test_split(&d, 2.0 / 3.0, SplitMode::Row, 42);
    let (train, test) = (d.subset(&tr), d.subset(&te));
    let m = fit_forest(&train, &purity_params(100, 1)).unwrap();
    let r2 = r2_score(&test.target, &m.predict(&test).unwrap()).unwrap();
    assert!(r2 >= 0.95, "test R² {r2}");
    let imp = permutation_importance(&m, &train, 5, 2).unwrap();
    for f in 1..6 {
        assert!(imp.mean[0] > 10.0 * imp.mean[f].abs(), "{:?}", imp.mean);
    }
}

#[test]
fn more_trees_do_not_hurt() {
    let mut d = common::synthetic(600, 3, 7);
    let mut rng = seed::rng(8);
    use rand::Rng;
    for y in d.target.iter_mut() {
        *y += 0.1 * (rng.random::<f64>() - 0.5);
    }
    let d = Dataset::new(d.names.clone(), d.columns.clone(), d.target.clone(), None).unwrap();
    let (tr, te) = train_test_split(&d, 2.0 / 3.0, SplitMode::Row, 1);
    let (train, test) = (d.subset(&tr), d.subset(&te));
    let score = |k| {
        let m = fit_forest(&train, &purity_params(k, 3)).unwrap();
        r2_score(&test.target, &m.predict(&test).unwrap()).unwrap()
    };
    let (few, many) = (score(10), score(200));
    assert!(many >= few, "10 trees {few}, 200 trees {many}");
}

#[test]
fn importance_ranks_survive_log_transform() {
    let d = common::synthetic(400, 3, 9);
    // Strictly positive columns so that the logarithm is defined.
    let shifted: Vec<Vec<f64>> = d.columns.iter().map(|c| c.iter().map(|v| v + 0.5).collect()).collect();
    let y: Vec<f64> = (0..400).map(|r| shifted[0][r] + 0.3 * shifted[1][r]).collect();
    let a = Dataset::new(d.names.clone(), shifted.clone(), y.clone(), None).unwrap();
    let b = a.with_column(1, shifted[1].iter().map(|v| v.ln()).collect());
    let p = purity_params(30, 4);
    let ia = permutation_importance(&fit_forest(&a, &p).unwrap(), &a, 5, 6).unwrap();
    let ib = permutation_importance(&fit_forest(&b, &p).unwrap(), &b, 5, 6).unwrap();
    assert_eq!(ia.ranking(), ib.ranking());
}

#[test]
fn oob_coverage_at_fifty_trees() {
    let d = common::synthetic(1000, 1, 10);
    let m = fit_forest(&d, &purity_params(50, 5)).unwrap();
    assert!(m.oob_predictions(&d).unwrap().iter().all(|p| p.is_some()));
}
