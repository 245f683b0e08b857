use std::path::Path;

use rand::Rng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::data::Dataset;
use super::tree::{fit_tree, MaxFeatures, Tree, TreeParams};
use super::{r2_score, ForestError};
use crate::{par, seed};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Forest hyperparameters. Bootstrap sampling is always on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl ForestParams {
    /// Library defaults used as the untuned reference model.
    pub fn base(seed: u64) -> ForestParams {
        ForestParams {
            n_estimators: 10,
            max_depth: None,
            max_features: MaxFeatures::All,
            min_samples_leaf: 2,
            min_samples_split: 1,
            seed,
        }
    }

    /// Tuned configuration found by the full grid search.
    pub fn optimized(seed: u64) -> ForestParams {
        ForestParams {
            n_estimators: 1000,
            max_depth: Some(30),
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 2,
            min_samples_split: 2,
            seed,
        }
    }

    /// Checks the invariants; `min_samples_split < 2` is raised to 2.
    pub fn validated(&self) -> Result<ForestParams, ForestError> {
        if self.n_estimators == 0 {
            return Err(ForestError::Params("n_estimators must be at least 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(ForestError::Params("min_samples_leaf must be at least 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(ForestError::Params("max_depth must be at least 1".into()));
        }
        let mut p = *self;
        if p.min_samples_split < 2 {
            log::warn!("min_samples_split = {} raised to 2", p.min_samples_split);
            p.min_samples_split = 2;
        }
        Ok(p)
    }

    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            max_features: self.max_features,
            min_samples_leaf: self.min_samples_leaf,
            min_samples_split: self.min_samples_split,
        }
    }
}

/// Fitted forest. Bootstrap samples are not stored; they are redrawn from
/// the per-tree seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub names: Vec<String>,
    pub params: ForestParams,
    pub n_train: usize,
    pub trees: Vec<Tree>,
}

fn tree_rng(params: &ForestParams, t: usize) -> ChaCha8Rng {
    seed::rng(seed::derive(params.seed, seed::stream::TREE, t as u64))
}

fn draw_bootstrap(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Fits `params.n_estimators` trees, each on its own bootstrap resample.
pub fn fit_forest(data: &Dataset, params: &ForestParams) -> Result<ForestModel, ForestError> {
    let params = params.validated()?;
    let n = data.n_rows();
    if n == 0 || data.n_features() == 0 {
        return Err(ForestError::Empty);
    }
    let tp = params.tree_params();
    let trees = par::map_range(params.n_estimators, |t| {
        let mut rng = tree_rng(&params, t);
        let rows = draw_bootstrap(&mut rng, n);
        fit_tree(data, &rows, &tp, &mut rng)
    });
    Ok(ForestModel {
        format_version: MODEL_FORMAT_VERSION,
        names: data.names.clone(),
        params,
        n_train: n,
        trees,
    })
}

/// Per-feature permutation importance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub names: Vec<String>,
    pub baseline_oob: f64,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Positive part of `mean`, normalised to sum to one.
    pub share: Vec<f64>,
}

impl Importance {
    /// Feature indices from most to least important.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.mean.len()).collect();
        idx.sort_by(|&a, &b| self.mean[b].total_cmp(&self.mean[a]).then(a.cmp(&b)));
        idx
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), ForestError> {
        let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
        w.write_record(["rank", "feature", "importance", "std", "share"]).map_err(csv_io)?;
        for (rank, i) in self.ranking().into_iter().enumerate() {
            w.write_record([
                (rank + 1).to_string(),
                self.names[i].clone(),
                self.mean[i].to_string(),
                self.std[i].to_string(),
                self.share[i].to_string(),
            ])
            .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_io(e: csv::Error) -> ForestError {
    ForestError::Io(std::io::Error::other(e))
}

impl ForestModel {
    fn check_schema(&self, data: &Dataset) -> Result<(), ForestError> {
        if data.names != self.names {
            return Err(ForestError::Schema(format!(
                "expected columns {:?}, got {:?}",
                self.names, data.names
            )));
        }
        Ok(())
    }

    fn check_training(&self, data: &Dataset) -> Result<(), ForestError> {
        self.check_schema(data)?;
        if data.n_rows() != self.n_train {
            return Err(ForestError::Schema(format!(
                "{} rows, model was trained on {}",
                data.n_rows(),
                self.n_train
            )));
        }
        Ok(())
    }

    /// Bootstrap sample of tree `t` (with repeats).
    pub fn bootstrap_rows(&self, t: usize) -> Vec<usize> {
        draw_bootstrap(&mut tree_rng(&self.params, t), self.n_train)
    }

    /// Training rows absent from tree `t`'s bootstrap sample.
    pub fn oob_rows(&self, t: usize) -> Vec<usize> {
        let mut in_bag = vec![false; self.n_train];
        for r in self.bootstrap_rows(t) {
            in_bag[r] = true;
        }
        (0..self.n_train).filter(|&r| !in_bag[r]).collect()
    }

    /// Mean of the trees' predictions for every row.
    pub fn predict(&self, data: &Dataset) -> Result<Vec<f64>, ForestError> {
        self.check_schema(data)?;
        let k = self.trees.len() as f64;
        Ok(par::map_range(data.n_rows(), |r| {
            self.trees.iter().map(|t| t.predict_row(data, r)).sum::<f64>() / k
        }))
    }

    /// Out-of-bag prediction per training row; `None` for rows that are in
    /// bag for every tree.
    pub fn oob_predictions(&self, data: &Dataset) -> Result<Vec<Option<f64>>, ForestError> {
        self.check_training(data)?;
        let oob = self.oob_sets();
        let base = self.per_tree_oob(data, &oob, None);
        let pred = self.aggregate(&oob, &base);
        let missing = pred.iter().filter(|p| p.is_none()).count();
        if missing > 0 {
            log::warn!("{missing} row(s) are in bag for every tree and have no OOB prediction");
        }
        Ok(pred)
    }

    /// R² of the out-of-bag predictions over rows that have one.
    pub fn oob_score(&self, data: &Dataset) -> Result<f64, ForestError> {
        let pred = self.oob_predictions(data)?;
        oob_r2(data, &pred)
    }

    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("model serialises");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> Result<String, ForestError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<ForestModel, ForestError> {
        #[derive(Deserialize)]
        struct Header {
            format_version: u32,
        }
        let h: Header = serde_json::from_str(s)?;
        if h.format_version != MODEL_FORMAT_VERSION {
            return Err(ForestError::Version(h.format_version));
        }
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), ForestError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<ForestModel, ForestError> {
        ForestModel::from_json(&std::fs::read_to_string(path)?)
    }

    fn oob_sets(&self) -> Vec<Vec<usize>> {
        par::map_range(self.trees.len(), |t| self.oob_rows(t))
    }

    /// Predictions of tree `t` on its OOB rows, optionally with one column
    /// replaced.
    fn tree_oob(&self, t: usize, data: &Dataset, oob: &[usize], replaced: Option<(usize, &[f64])>) -> Vec<f64> {
        let tree = &self.trees[t];
        oob.iter()
            .map(|&r| {
                let leaf = tree.leaf_for(|f| match replaced {
                    Some((g, col)) if g == f => col[r],
                    _ => data.value(r, f),
                });
                tree.value[leaf]
            })
            .collect()
    }

    fn per_tree_oob(&self, data: &Dataset, oob: &[Vec<usize>], replaced: Option<(usize, &[f64])>) -> Vec<Vec<f64>> {
        par::map_range(self.trees.len(), |t| self.tree_oob(t, data, &oob[t], replaced))
    }

    fn aggregate(&self, oob: &[Vec<usize>], per_tree: &[Vec<f64>]) -> Vec<Option<f64>> {
        let mut sum = vec![0.0; self.n_train];
        let mut count = vec![0usize; self.n_train];
        for (rows, preds) in oob.iter().zip(per_tree) {
            for (&r, &p) in rows.iter().zip(preds) {
                sum[r] += p;
                count[r] += 1;
            }
        }
        sum.iter()
            .zip(&count)
            .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
            .collect()
    }
}

fn oob_r2(data: &Dataset, pred: &[Option<f64>]) -> Result<f64, ForestError> {
    let (y, yhat): (Vec<f64>, Vec<f64>) = pred
        .iter()
        .enumerate()
        .filter_map(|(r, p)| p.map(|p| (data.target[r], p)))
        .unzip();
    if y.is_empty() {
        return Err(ForestError::NoOob);
    }
    r2_score(&y, &yhat)
}

/// Drop in OOB score when each feature column is shuffled, averaged over
/// `repeats` seeded permutations.
pub fn permutation_importance(
    model: &ForestModel,
    data: &Dataset,
    repeats: usize,
    seed: u64,
) -> Result<Importance, ForestError> {
    model.check_training(data)?;
    let repeats = repeats.max(1);
    let oob = model.oob_sets();
    let base = model.per_tree_oob(data, &oob, None);
    let baseline = oob_r2(data, &model.aggregate(&oob, &base))?;
    let p = data.n_features();
    let mut mean = vec![0.0; p];
    let mut std = vec![0.0; p];
    for f in 0..p {
        let uses: Vec<bool> = model
            .trees
            .iter()
            .map(|t| t.feature.contains(&(f as i64)))
            .collect();
        let mut drops = Vec::with_capacity(repeats);
        for rep in 0..repeats {
            let mut order: Vec<usize> = (0..data.n_rows()).collect();
            order.shuffle(&mut seed::rng(seed::derive(
                seed,
                seed::stream::PERMUTE,
                ((f as u64) << 32) | rep as u64,
            )));
            let col: Vec<f64> = order.iter().map(|&r| data.value(r, f)).collect();
            // Trees that never split on f keep their baseline predictions.
            let mixed = par::map_range(model.trees.len(), |t| {
                if uses[t] {
                    model.tree_oob(t, data, &oob[t], Some((f, &col)))
                } else {
                    base[t].clone()
                }
            });
            let score = oob_r2(data, &model.aggregate(&oob, &mixed))?;
            drops.push(baseline - score);
        }
        let m = drops.iter().sum::<f64>() / repeats as f64;
        mean[f] = m;
        std[f] = (drops.iter().map(|d| (d - m).powi(2)).sum::<f64>() / repeats as f64).sqrt();
    }
    let pos: f64 = mean.iter().map(|m| m.max(0.0)).sum();
    let share = mean
        .iter()
        .map(|m| if pos > 0.0 { m.max(0.0) / pos } else { 0.0 })
        .collect();
    Ok(Importance {
        names: data.names.clone(),
        baseline_oob: baseline,
        mean,
        std,
        share,
    })
}
