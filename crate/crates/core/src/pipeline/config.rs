use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::dfn::GenerationParams;
use crate::forest::{ForestParams, MaxFeatures, ParamGrid, SplitMode};
use crate::reactive::{ChemistryConstants, PermeabilityLaw, SimControls};

/// Rate constants of the study, mol/(m²·s).
pub const STUDY_RATE_CONSTANTS: [f64; 4] = [1e-9, 1e-10, 1e-11, 1e-12];

pub const TOPOLOGICAL: [&str; 5] = [
    "degree",
    "degree_centrality",
    "distance_to_backbone",
    "betweenness_centrality",
    "current_flow",
];
pub const GEOMETRIC: [&str; 4] = ["surface_area", "total_volume", "projected_volume", "intersection_area"];
pub const HYDROLOGICAL: [&str; 4] = [
    "volumetric_flow_rate",
    "peclet",
    "damkohler_advective",
    "damkohler_diffusive",
];

/// Feature columns of one of the three nested models.
pub fn feature_set(level: usize) -> Vec<&'static str> {
    let mut f = vec!["rate_constant"];
    f.extend(TOPOLOGICAL);
    if level >= 2 {
        f.extend(GEOMETRIC);
    }
    if level >= 3 {
        f.extend(HYDROLOGICAL);
    }
    f
}

/// Everything a study run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub generation: GenerationParams,
    pub n_networks: usize,
    /// Generation attempts allowed per accepted network.
    pub max_attempts_per_network: usize,
    pub seed: u64,
    pub chem: ChemistryConstants,
    pub law: PermeabilityLaw,
    pub rate_constants: Vec<f64>,
    pub controls: SimControls,
    pub base: ForestParams,
    pub optimized: ForestParams,
    pub grid_search: bool,
    pub grid: ParamGrid,
    pub cv_folds: usize,
    pub importance_repeats: usize,
    pub split_mode: SplitMode,
    pub train_fraction: f64,
    pub write_flow_dump: bool,
    pub write_graph: bool,
    pub out_dir: PathBuf,
    /// 0 lets the thread pool decide.
    pub workers: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig::desk()
    }
}

impl StudyConfig {
    /// Desk-scale study: 40 networks at reduced intensity, all four rates.
    pub fn desk() -> StudyConfig {
        let seed = 1;
        StudyConfig {
            generation: GenerationParams {
                target_p32: 0.85,
                ..Default::default()
            },
            n_networks: 40,
            max_attempts_per_network: 20,
            seed,
            chem: ChemistryConstants::default(),
            law: PermeabilityLaw::default(),
            rate_constants: STUDY_RATE_CONSTANTS.to_vec(),
            controls: SimControls::default(),
            base: ForestParams::base(seed),
            optimized: ForestParams {
                n_estimators: 200,
                ..ForestParams::optimized(seed)
            },
            grid_search: false,
            grid: ParamGrid {
                n_estimators: vec![10, 50, 200],
                max_depth: vec![None, Some(30)],
                max_features: vec![MaxFeatures::All, MaxFeatures::Sqrt, MaxFeatures::Log2],
                min_samples_leaf: vec![2, 5],
                min_samples_split: vec![2],
            },
            cv_folds: 3,
            importance_repeats: 5,
            split_mode: SplitMode::Row,
            train_fraction: 2.0 / 3.0,
            write_flow_dump: true,
            write_graph: true,
            out_dir: PathBuf::from("fracnet-out"),
            workers: 0,
        }
    }

    /// Full-scale settings: P32 = 3.25, 800 networks, 1000 trees.
    pub fn full() -> StudyConfig {
        let mut c = StudyConfig::desk();
        c.generation.target_p32 = 3.25;
        c.n_networks = 800;
        c.optimized.n_estimators = 1000;
        c
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        self.generation
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.n_networks == 0 {
            return bad("n_networks must be at least 1");
        }
        if self.rate_constants.is_empty() {
            return bad("rate_constants must not be empty");
        }
        if self.rate_constants.iter().any(|&k| !(k >= 0.0 && k.is_finite())) {
            return bad("rate constants must be finite and non-negative");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train_fraction must lie in (0, 1)");
        }
        if self.cv_folds < 2 {
            return bad("cv_folds must be at least 2");
        }
        if self.max_attempts_per_network == 0 {
            return bad("max_attempts_per_network must be at least 1");
        }
        for p in [&self.base, &self.optimized] {
            p.validated().map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Reads a flat `key = value` file on top of the desk defaults.
    pub fn from_file(path: &Path) -> Result<StudyConfig, PipelineError> {
        let text = std::fs::read_to_string(path)?;
        StudyConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<StudyConfig, PipelineError> {
        let mut kv = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| PipelineError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut c = match kv.remove("preset").as_deref() {
            None | Some("desk") => StudyConfig::desk(),
            Some("full") => StudyConfig::full(),
            Some(p) => return Err(PipelineError::Config(format!("unknown preset '{p}'"))),
        };
        for (k, v) in &kv {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    /// Sets one key. Forest keys are prefixed `base_` or `opt_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), PipelineError> {
        let err = |what: &str| PipelineError::Config(format!("{key}: {what} '{value}'"));
        let num = || value.parse::<f64>().map_err(|_| err("not a number"));
        let int = || value.parse::<usize>().map_err(|_| err("not a count"));
        let boolean = || match value {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(err("not a boolean")),
        };
        let depth = |s: &str| -> Result<Option<usize>, PipelineError> {
            match s {
                "none" | "None" => Ok(None),
                _ => s.parse().map(Some).map_err(|_| err("not a depth")),
            }
        };
        let list = || value.split(',').map(str::trim).filter(|s| !s.is_empty());
        if let Some(rest) = key.strip_prefix("base_").or_else(|| key.strip_prefix("opt_")) {
            let p = if key.starts_with("base_") { &mut self.base } else { &mut self.optimized };
            match rest {
                "n_estimators" => p.n_estimators = int()?,
                "max_depth" => p.max_depth = depth(value)?,
                "max_features" => p.max_features = value.parse().map_err(|_| err("bad max_features"))?,
                "min_samples_leaf" => p.min_samples_leaf = int()?,
                "min_samples_split" => p.min_samples_split = int()?,
                _ => return Err(err("unknown key")),
            }
            return Ok(());
        }
        if let Some(rest) = key.strip_prefix("grid_") {
            let ints = || list().map(|s| s.parse().map_err(|_| err("not a count"))).collect::<Result<Vec<usize>, _>>();
            match rest {
                "n_estimators" => self.grid.n_estimators = ints()?,
                "max_depth" => self.grid.max_depth = list().map(depth).collect::<Result<_, _>>()?,
                "max_features" => {
                    self.grid.max_features = list()
                        .map(|s| s.parse().map_err(|_| err("bad max_features")))
                        .collect::<Result<_, _>>()?
                }
                "min_samples_leaf" => self.grid.min_samples_leaf = ints()?,
                "min_samples_split" => self.grid.min_samples_split = ints()?,
                "search" => self.grid_search = boolean()?,
                _ => return Err(err("unknown key")),
            }
            return Ok(());
        }
        match key {
            "side_length" => self.generation.side_length = num()?,
            "radius" => self.generation.radius = num()?,
            "target_p32" => self.generation.target_p32 = num()?,
            "aperture" => self.generation.aperture = num()?,
            "margin" => self.generation.margin = num()?,
            "vertex_count" => self.generation.vertex_count = int()?,
            "max_fractures" => self.generation.max_fractures = int()?,
            "n_networks" => self.n_networks = int()?,
            "max_attempts_per_network" => self.max_attempts_per_network = int()?,
            "seed" => {
                self.seed = value.parse().map_err(|_| err("not a seed"))?;
                self.base.seed = self.seed;
                self.optimized.seed = self.seed;
            }
            "k_eq" => self.chem.k_eq = num()?,
            "specific_surface_area" => self.chem.specific_surface_area = num()?,
            "quartz_density" => self.chem.quartz_density = num()?,
            "molar_volume" => self.chem.molar_volume = num()?,
            "diffusion" => self.chem.diffusion = num()?,
            "inflow_silica" => self.chem.inflow_silica = num()?,
            "perm_a" => self.law.exponent = num()?,
            "perm_phi_c" => self.law.critical_porosity = num()?,
            "perm_f_min" => self.law.f_min = num()?,
            "area_n" => self.law.n = num()?,
            "n_prime" => self.law.n_prime = num()?,
            "rate_constants" | "rate_constant" => {
                self.rate_constants = list()
                    .map(|s| s.parse().map_err(|_| err("not a number")))
                    .collect::<Result<_, _>>()?
            }
            "horizon_years" => self.controls.horizon_years = num()?,
            "qss_tol" => self.controls.qss_tol = num()?,
            "qss_window" => self.controls.qss_window = int()?,
            "max_loss" => self.controls.max_loss = num()?,
            "initial_dt_years" => self.controls.initial_dt_years = num()?,
            "max_dt_years" => self.controls.max_dt_years = num()?,
            "min_dt_seconds" => self.controls.min_dt_seconds = num()?,
            "flow_refresh" => self.controls.flow_refresh = num()?,
            "cv_folds" => self.cv_folds = int()?,
            "importance_repeats" => self.importance_repeats = int()?,
            "split_mode" => {
                self.split_mode = match value {
                    "row" | "fracture" => SplitMode::Row,
                    "group" | "network" => SplitMode::Group,
                    _ => return Err(err("expected row or group")),
                }
            }
            "train_fraction" => self.train_fraction = num()?,
            "write_flow_dump" => self.write_flow_dump = boolean()?,
            "write_graph" => self.write_graph = boolean()?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "workers" => self.workers = int()?,
            _ => return Err(err("unknown key")),
        }
        Ok(())
    }

    /// Applies `FRACNET_OUT` and `FRACNET_WORKERS` if set.
    pub fn apply_env(&mut self) -> Result<(), PipelineError> {
        if let Ok(v) = std::env::var("FRACNET_OUT") {
            self.set("out_dir", &v)?;
        }
        if let Ok(v) = std::env::var("FRACNET_WORKERS") {
            self.set("workers", &v)?;
        }
        Ok(())
    }

    /// Hash of every setting that influences the simulated dataset.
    pub fn simulation_hash(&self) -> String {
        let key = serde_json::json!({
            "generation": self.generation,
            "n_networks": self.n_networks,
            "max_attempts_per_network": self.max_attempts_per_network,
            "seed": self.seed,
            "chem": self.chem,
            "law": self.law,
            "rate_constants": self.rate_constants,
            "controls": self.controls,
        });
        sha256_hex(key.to_string().as_bytes())
    }

    /// Hash of the whole configuration except output location and workers.
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        c.workers = 0;
        sha256_hex(serde_json::to_string(&c).expect("config serialises").as_bytes())
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let c = StudyConfig::parse(
            "# comment\n n_networks = 3\nrate_constants = 1e-9, 1e-12\nopt_max_depth = none\nsplit_mode = group\nseed=9\n",
        )
        .unwrap();
        assert_eq!(c.n_networks, 3);
        assert_eq!(c.rate_constants, vec![1e-9, 1e-12]);
        assert_eq!(c.optimized.max_depth, None);
        assert_eq!(c.optimized.seed, 9);
        assert_eq!(c.split_mode, SplitMode::Group);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(StudyConfig::parse("bogus = 1").is_err());
        assert!(StudyConfig::parse("n_networks = 0").is_err());
        assert!(StudyConfig::parse("rate_constants = ").is_err());
        assert!(StudyConfig::parse("radius").is_err());
    }

    #[test]
    fn feature_sets_are_nested() {
        let (a, b, c) = (feature_set(1), feature_set(2), feature_set(3));
        assert!(a.iter().all(|f| b.contains(f)));
        assert!(b.iter().all(|f| c.contains(f)));
        assert_eq!(c.len(), 14);
    }

    #[test]
    fn hashes_ignore_output_location() {
        let a = StudyConfig::desk();
        let mut b = a.clone();
        b.out_dir = "elsewhere".into();
        b.workers = 3;
        assert_eq!(a.config_hash(), b.config_hash());
        b.optimized.n_estimators += 1;
        assert_eq!(a.simulation_hash(), b.simulation_hash());
        assert_ne!(a.config_hash(), b.config_hash());
    }
}
