use rand::seq::SliceRandom;

use super::ForestError;
use crate::seed;

/// Column-major numeric design matrix with a target and a group key.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    /// Rows sharing a key (e.g. one network) are kept together by
    /// group-aware splits.
    pub groups: Vec<u64>,
}

impl Dataset {
    pub fn new(
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        target: Vec<f64>,
        groups: Option<Vec<u64>>,
    ) -> Result<Dataset, ForestError> {
        let n = target.len();
        if names.len() != columns.len() {
            return Err(ForestError::Schema(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if let Some(c) = columns.iter().position(|c| c.len() != n) {
            return Err(ForestError::Schema(format!("column {} has wrong length", names[c])));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&target) || columns.iter().any(|c| !finite(c)) {
            return Err(ForestError::NonFinite);
        }
        let groups = groups.unwrap_or_else(|| (0..n as u64).collect());
        if groups.len() != n {
            return Err(ForestError::Schema("group key length".into()));
        }
        Ok(Dataset {
            names,
            columns,
            target,
            groups,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.columns[feature][row]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[row]).collect()
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
            target: rows.iter().map(|&r| self.target[r]).collect(),
            groups: rows.iter().map(|&r| self.groups[r]).collect(),
        }
    }

    /// Keeps the named features, in the given order.
    pub fn select(&self, features: &[&str]) -> Result<Dataset, ForestError> {
        let mut names = Vec::new();
        let mut columns = Vec::new();
        for f in features {
            let i = self
                .names
                .iter()
                .position(|n| n == f)
                .ok_or_else(|| ForestError::Schema(format!("unknown feature {f}")))?;
            names.push(self.names[i].clone());
            columns.push(self.columns[i].clone());
        }
        Ok(Dataset {
            names,
            columns,
            target: self.target.clone(),
            groups: self.groups.clone(),
        })
    }

    /// Copy with one column replaced.
    pub fn with_column(&self, feature: usize, values: Vec<f64>) -> Dataset {
        let mut d = self.clone();
        d.columns[feature] = values;
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SplitMode {
    /// Rows are assigned independently.
    Row,
    /// Whole groups go to one side.
    Group,
}

/// Shuffled train/test partition with `train_fraction` of rows (or groups)
/// in the training set. Both index lists are sorted.
pub fn train_test_split(
    data: &Dataset,
    train_fraction: f64,
    mode: SplitMode,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut rng = seed::rng(seed::derive(seed, seed::stream::SPLIT, 0));
    let (mut train, mut test) = match mode {
        SplitMode::Row => {
            let mut rows: Vec<usize> = (0..data.n_rows()).collect();
            rows.shuffle(&mut rng);
            let cut = (train_fraction * rows.len() as f64).round() as usize;
            (rows[..cut].to_vec(), rows[cut..].to_vec())
        }
        SplitMode::Group => {
            let mut keys: Vec<u64> = data.groups.clone();
            keys.sort_unstable();
            keys.dedup();
            keys.shuffle(&mut rng);
            let cut = (train_fraction * keys.len() as f64).round() as usize;
            let train_keys: std::collections::HashSet<u64> = keys[..cut].iter().copied().collect();
            (0..data.n_rows()).partition(|&r| train_keys.contains(&data.groups[r]))
        }
    };
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// `k` disjoint validation folds covering all rows.
pub fn kfold(data: &Dataset, k: usize, group_aware: bool, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = seed::rng(seed::derive(seed, seed::stream::FOLDS, 0));
    let mut folds = vec![Vec::new(); k];
    if group_aware {
        let mut keys: Vec<u64> = data.groups.clone();
        keys.sort_unstable();
        keys.dedup();
        keys.shuffle(&mut rng);
        let fold_of: std::collections::HashMap<u64, usize> =
            keys.iter().enumerate().map(|(i, &g)| (g, i % k)).collect();
        for r in 0..data.n_rows() {
            folds[fold_of[&data.groups[r]]].push(r);
        }
    } else {
        let mut rows: Vec<usize> = (0..data.n_rows()).collect();
        rows.shuffle(&mut rng);
        for (i, r) in rows.into_iter().enumerate() {
            folds[i % k].push(r);
        }
        folds.iter_mut().for_each(|f| f.sort_unstable());
    }
    folds
}
