use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::data::{kfold, Dataset};
use super::ensemble::{csv_io, fit_forest, ForestParams};
use super::tree::MaxFeatures;
use super::{r2_score, ForestError};

/// Cartesian hyperparameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub n_estimators: Vec<usize>,
    pub max_depth: Vec<Option<usize>>,
    pub max_features: Vec<MaxFeatures>,
    pub min_samples_leaf: Vec<usize>,
    pub min_samples_split: Vec<usize>,
}

impl ParamGrid {
    /// A grid holding exactly `p`.
    pub fn single(p: &ForestParams) -> ParamGrid {
        ParamGrid {
            n_estimators: vec![p.n_estimators],
            max_depth: vec![p.max_depth],
            max_features: vec![p.max_features],
            min_samples_leaf: vec![p.min_samples_leaf],
            min_samples_split: vec![p.min_samples_split],
        }
    }

    pub fn points(&self, seed: u64) -> Vec<ForestParams> {
        let mut out = Vec::new();
        for &n_estimators in &self.n_estimators {
            for &max_depth in &self.max_depth {
                for &max_features in &self.max_features {
                    for &min_samples_leaf in &self.min_samples_leaf {
                        for &min_samples_split in &self.min_samples_split {
                            out.push(ForestParams {
                                n_estimators,
                                max_depth,
                                max_features,
                                min_samples_leaf,
                                min_samples_split,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub params: ForestParams,
    /// Validation R² of each usable fold.
    pub fold_scores: Vec<f64>,
    pub mean_r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: ForestParams,
    pub best_score: f64,
    pub table: Vec<CvRow>,
}

impl GridResult {
    pub fn write_csv(&self, path: &Path) -> Result<(), ForestError> {
        let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
        w.write_record([
            "n_estimators",
            "max_depth",
            "max_features",
            "min_samples_leaf",
            "min_samples_split",
            "mean_r2",
            "folds",
        ])
        .map_err(csv_io)?;
        for row in &self.table {
            let p = &row.params;
            w.write_record([
                p.n_estimators.to_string(),
                p.max_depth.map_or("none".into(), |d| d.to_string()),
                p.max_features.to_string(),
                p.min_samples_leaf.to_string(),
                p.min_samples_split.to_string(),
                row.mean_r2.to_string(),
                row.fold_scores.len().to_string(),
            ])
            .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Orders candidates: higher score first, then fewer trees, then shallower.
fn better(a: &CvRow, b: &CvRow) -> bool {
    let depth = |p: &ForestParams| p.max_depth.unwrap_or(usize::MAX);
    match a.mean_r2.total_cmp(&b.mean_r2) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => (a.params.n_estimators, depth(&a.params)) < (b.params.n_estimators, depth(&b.params)),
    }
}

/// Exhaustive k-fold cross-validated search maximizing mean validation R².
pub fn grid_search(
    data: &Dataset,
    grid: &ParamGrid,
    folds: usize,
    group_aware: bool,
    seed: u64,
) -> Result<GridResult, ForestError> {
    if folds < 2 {
        return Err(ForestError::Params("grid search needs at least 2 folds".into()));
    }
    let points = grid.points(seed);
    if points.is_empty() {
        return Err(ForestError::Params("empty grid".into()));
    }
    let parts = kfold(data, folds, group_aware, seed);
    let splits: Vec<(Dataset, Dataset)> = parts
        .iter()
        .enumerate()
        .filter_map(|(i, valid)| {
            let y: Vec<f64> = valid.iter().map(|&r| data.target[r]).collect();
            if valid.len() < 2 || y.iter().all(|&v| v == y[0]) {
                log::warn!("fold {i} has no target variance and is skipped");
                return None;
            }
            let train: Vec<usize> = parts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, f)| f.iter().copied())
                .collect();
            Some((data.subset(&train), data.subset(valid)))
        })
        .collect();
    if splits.is_empty() {
        return Err(ForestError::UndefinedR2);
    }
    let mut table = Vec::with_capacity(points.len());
    for params in points {
        let mut fold_scores = Vec::with_capacity(splits.len());
        for (train, valid) in &splits {
            let model = fit_forest(train, &params)?;
            fold_scores.push(r2_score(&valid.target, &model.predict(valid)?)?);
        }
        let mean_r2 = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
        log::debug!("grid point {params:?}: mean R² {mean_r2:.4}");
        table.push(CvRow {
            params,
            fold_scores,
            mean_r2,
        });
    }
    let best = table
        .iter()
        .fold(&table[0], |acc, row| if better(row, acc) { row } else { acc });
    Ok(GridResult {
        best: best.params,
        best_score: best.mean_r2,
        table,
    })
}
