use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{feature_set, StudyConfig};
use super::table::{FeatureTable, TARGET};
use super::PipelineError;
use crate::forest::{
    self, correlation_matrix, fit_forest, grid_search, permutation_importance, r2_score, CorrelationMatrix,
    Dataset, ForestError, ForestParams, GridResult, Importance,
};

/// Scores of one fitted model (a Table-2 row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub name: String,
    pub features: Vec<String>,
    pub params: ForestParams,
    pub train_r2: f64,
    pub test_r2: f64,
    pub oob_score: f64,
    pub importance: Importance,
    pub fit_seconds: f64,
}

/// All-feature model restricted to one rate constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub rate_constant: f64,
    pub train_r2: f64,
    pub test_r2: f64,
    pub oob_score: f64,
    /// (actual, predicted)
    pub train_points: Vec<(f64, f64)>,
    pub test_points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config_hash: String,
    pub seed: u64,
    pub dataset_rows: usize,
    pub n_networks: usize,
    pub models: Vec<ModelScore>,
    pub per_rate: Vec<RateModel>,
    pub correlation: Option<CorrelationMatrix>,
    pub grid: Option<GridResult>,
    /// (model, reason) for models that could not be fitted.
    pub skipped: Vec<(String, String)>,
    /// (stage, seconds)
    pub timings: Vec<(String, f64)>,
}

impl StudyReport {
    pub fn model(&self, name: &str) -> Option<&ModelScore> {
        self.models.iter().find(|m| m.name == name)
    }
}

struct Fitted {
    train_r2: f64,
    test_r2: f64,
    oob: f64,
    train_points: Vec<(f64, f64)>,
    test_points: Vec<(f64, f64)>,
    importance: Option<Importance>,
}

fn fit_and_score(
    data: &Dataset,
    train: &[usize],
    test: &[usize],
    params: &ForestParams,
    importance_repeats: Option<usize>,
) -> Result<Fitted, ForestError> {
    let (tr, te) = (data.subset(train), data.subset(test));
    let model = fit_forest(&tr, params)?;
    let ptr = model.predict(&tr)?;
    let pte = model.predict(&te)?;
    let importance = match importance_repeats {
        Some(r) => Some(permutation_importance(&model, &tr, r, params.seed)?),
        None => None,
    };
    Ok(Fitted {
        train_r2: r2_score(&tr.target, &ptr)?,
        test_r2: r2_score(&te.target, &pte)?,
        oob: model.oob_score(&tr)?,
        train_points: tr.target.iter().copied().zip(ptr).collect(),
        test_points: te.target.iter().copied().zip(pte).collect(),
        importance,
    })
}

/// Fits base and optimized RF-1/2/3 on all rates and one all-feature model
/// per rate constant.
pub fn train_models(table: &FeatureTable, cfg: &StudyConfig) -> Result<StudyReport, PipelineError> {
    if table.is_empty() {
        return Err(PipelineError::Data("empty dataset".into()));
    }
    let mut timings = Vec::new();
    let mut skipped = Vec::new();
    let seed = cfg.seed;
    let mut networks: Vec<u64> = table.network_id.clone();
    networks.sort_unstable();
    networks.dedup();

    let full = table.dataset(&feature_set(3), TARGET)?;
    let (train, test) = forest::train_test_split(&full, cfg.train_fraction, cfg.split_mode, seed);

    let mut optimized = cfg.optimized;
    let mut grid = None;
    if cfg.grid_search {
        let t = Instant::now();
        let g = grid_search(
            &full.subset(&train),
            &cfg.grid,
            cfg.cv_folds,
            cfg.split_mode == forest::SplitMode::Group,
            seed,
        )?;
        optimized = g.best;
        log::info!("grid search best {:?} (CV R² {:.4})", g.best, g.best_score);
        grid = Some(g);
        timings.push(("grid_search".to_string(), t.elapsed().as_secs_f64()));
    }

    let mut models = Vec::new();
    for (label, params) in [("Base", cfg.base), ("Optimized", optimized)] {
        for level in 1..=3 {
            let name = format!("{label} RF-{level}");
            let features = feature_set(level);
            let data = table.dataset(&features, TARGET)?;
            let t = Instant::now();
            match fit_and_score(&data, &train, &test, &params, Some(cfg.importance_repeats)) {
                Ok(f) => {
                    let secs = t.elapsed().as_secs_f64();
                    log::info!(
                        "{name}: train {:.4} test {:.4} oob {:.4} ({secs:.1} s)",
                        f.train_r2,
                        f.test_r2,
                        f.oob
                    );
                    models.push(ModelScore {
                        name: name.clone(),
                        features: features.iter().map(|s| s.to_string()).collect(),
                        params: params.validated()?,
                        train_r2: f.train_r2,
                        test_r2: f.test_r2,
                        oob_score: f.oob,
                        importance: f.importance.expect("importance requested"),
                        fit_seconds: secs,
                    });
                    timings.push((name, secs));
                }
                Err(e) => {
                    log::warn!("{name} skipped: {e}");
                    skipped.push((name, e.to_string()));
                }
            }
        }
    }

    let mut per_rate = Vec::new();
    for k in table.rate_constants() {
        let name = format!("k={k:e}");
        let sub = table.filter(|r| table.columns[0][r] == k);
        let data = sub.dataset(&feature_set(3), TARGET)?;
        let (tr, te) = forest::train_test_split(&data, cfg.train_fraction, cfg.split_mode, seed);
        let t = Instant::now();
        match fit_and_score(&data, &tr, &te, &optimized, None) {
            Ok(f) => {
                log::info!("{name}: train {:.4} test {:.4} oob {:.4}", f.train_r2, f.test_r2, f.oob);
                per_rate.push(RateModel {
                    rate_constant: k,
                    train_r2: f.train_r2,
                    test_r2: f.test_r2,
                    oob_score: f.oob,
                    train_points: f.train_points,
                    test_points: f.test_points,
                });
                timings.push((name, t.elapsed().as_secs_f64()));
            }
            Err(e) => {
                log::warn!("{name} skipped: {e}");
                skipped.push((name, e.to_string()));
            }
        }
    }

    let correlation = match correlation_matrix(&full) {
        Ok(c) => Some(c),
        Err(e) => {
            skipped.push(("correlation".into(), e.to_string()));
            None
        }
    };

    Ok(StudyReport {
        config_hash: cfg.config_hash(),
        seed,
        dataset_rows: table.len(),
        n_networks: networks.len(),
        models,
        per_rate,
        correlation,
        grid,
        skipped,
        timings,
    })
}
