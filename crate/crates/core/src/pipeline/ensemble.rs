use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::StudyConfig;
use super::table::{FeatureTable, DATASET_COLUMNS, DATASET_SCHEMA_VERSION};
use super::PipelineError;
use crate::dfn::{self, geometric_features, FractureNetwork, GeometricFeatures};
use crate::graph::{self, BackbonePartition, TopologicalFeatures};
use crate::pipe::{self, FlowSolution, PipeModel, WATER_VISCOSITY};
use crate::reactive::{self, SECONDS_PER_YEAR};
use crate::{par, seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub id: u64,
    pub seed: u64,
    pub n_fractures: usize,
    pub p32_generated: f64,
    pub n_primary: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    simulation_hash: String,
    schema_version: u32,
    networks: Vec<NetworkRecord>,
    skipped_seeds: Vec<(u64, String)>,
}

/// Provenance and diagnostics of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMeta {
    pub simulation_hash: String,
    pub network_id: u64,
    pub network_seed: u64,
    pub rate_constant: f64,
    pub steps: usize,
    pub flow_solves: usize,
    pub final_time_years: f64,
    pub quasi_steady: bool,
    pub ledger: reactive::MassLedger,
    pub ledger_relative_error: f64,
    pub remaining_total: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimFailure {
    pub network_id: u64,
    pub rate_constant: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub simulation_hash: String,
    pub schema_version: u32,
    pub networks: Vec<NetworkRecord>,
    pub skipped_seeds: Vec<(u64, String)>,
    pub simulations: usize,
    pub reused: usize,
    pub failures: Vec<SimFailure>,
    pub metas: Vec<SimMeta>,
    pub dataset_rows: usize,
    pub dataset_path: PathBuf,
    pub elapsed_s: f64,
}

/// Rate-independent features of one network plus its initial flow field.
pub struct NetworkFeatures {
    pub topological: Vec<TopologicalFeatures>,
    pub geometric: Vec<GeometricFeatures>,
    pub backbone: BackbonePartition,
    pub graph: graph::NetworkGraph,
    pub pipes: PipeModel,
    pub total_rate: f64,
    pub flow: FlowSolution,
}

pub fn compute_network_features(net: &FractureNetwork) -> Result<NetworkFeatures, PipelineError> {
    let g = graph::to_graph(net)?;
    let (topological, backbone) = graph::topological_features(&g)?;
    let pipes = pipe::build_pipe_model(net, WATER_VISCOSITY);
    let total_rate = pipe::network_rate(net);
    let flow = pipe::solve_flow(&pipes, total_rate)?;
    Ok(NetworkFeatures {
        topological,
        geometric: geometric_features(net),
        backbone,
        graph: g,
        pipes,
        total_rate,
        flow,
    })
}

fn network_dir(out: &Path, id: u64) -> PathBuf {
    out.join("networks").join(format!("net_{id:04}"))
}

fn sim_dir(out: &Path, id: u64, k_index: usize) -> PathBuf {
    out.join("sims").join(format!("net_{id:04}_k{k_index}"))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Option<T> {
    serde_json::from_str(&std::fs::read_to_string(path).ok()?).ok()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// Generates (or reloads) the accepted networks. Seeds whose network does
/// not percolate are skipped and recorded.
pub fn generate_networks(
    cfg: &StudyConfig,
) -> Result<(Vec<NetworkRecord>, Vec<FractureNetwork>, Vec<(u64, String)>), PipelineError> {
    cfg.validate()?;
    let out = &cfg.out_dir;
    let hash = cfg.simulation_hash();
    let manifest_path = out.join("manifest.json");
    if let Some(m) = read_json::<Manifest>(&manifest_path) {
        if m.simulation_hash == hash {
            let nets: Option<Vec<FractureNetwork>> = m
                .networks
                .iter()
                .map(|r| dfn::read_network(&network_dir(out, r.id).join("network.json")).ok())
                .collect();
            if let Some(nets) = nets {
                log::info!("reusing {} networks from {}", nets.len(), manifest_path.display());
                return Ok((m.networks, nets, m.skipped_seeds));
            }
        }
    }
    std::fs::create_dir_all(out.join("networks"))?;
    let max_attempts = cfg.n_networks * cfg.max_attempts_per_network;
    let mut records = Vec::new();
    let mut nets = Vec::new();
    let mut skipped = Vec::new();
    let mut attempt = 0;
    while nets.len() < cfg.n_networks {
        if attempt >= max_attempts {
            if nets.is_empty() {
                return Err(PipelineError::NoNetworks(max_attempts));
            }
            log::warn!("only {} of {} networks generated", nets.len(), cfg.n_networks);
            break;
        }
        // Generate a batch in parallel; accept in attempt order.
        let batch = (cfg.n_networks - nets.len()).min(max_attempts - attempt);
        let results = par::map_range(batch, |i| {
            let s = seed::derive(cfg.seed, seed::stream::NETWORK, (attempt + i) as u64);
            (s, dfn::generate_network(&cfg.generation, s))
        });
        attempt += batch;
        for (s, r) in results {
            if nets.len() == cfg.n_networks {
                break;
            }
            match r {
                Ok(net) => {
                    let id = records.len() as u64;
                    let n_primary = match compute_network_features(&net) {
                        Ok(f) => f.backbone.primary.len(),
                        Err(e) => {
                            log::warn!("seed {s}: features failed ({e}); skipped");
                            skipped.push((s, e.to_string()));
                            continue;
                        }
                    };
                    let dir = network_dir(out, id);
                    std::fs::create_dir_all(&dir)?;
                    dfn::write_network(&net, &dir.join("network.json"))?;
                    records.push(NetworkRecord {
                        id,
                        seed: s,
                        n_fractures: net.len(),
                        p32_generated: net.p32_generated,
                        n_primary,
                    });
                    nets.push(net);
                }
                Err(e) if e.is_disconnected() => {
                    log::info!("seed {s}: {e}; skipped");
                    skipped.push((s, e.to_string()));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    write_json(
        &manifest_path,
        &Manifest {
            simulation_hash: hash,
            schema_version: DATASET_SCHEMA_VERSION,
            networks: records.clone(),
            skipped_seeds: skipped.clone(),
        },
    )?;
    Ok((records, nets, skipped))
}

/// Writes the per-network feature tables (all rate constants) and graph
/// dumps without running any simulation.
pub fn write_feature_tables(cfg: &StudyConfig) -> Result<Vec<NetworkRecord>, PipelineError> {
    let (records, nets, _) = generate_networks(cfg)?;
    for (rec, net) in records.iter().zip(&nets) {
        let nf = compute_network_features(net)?;
        let dir = network_dir(&cfg.out_dir, rec.id);
        if cfg.write_graph {
            nf.graph.write_edge_list(&dir.join("graph.txt"))?;
        }
        let mut t = FeatureTable::new();
        for &k in &cfg.rate_constants {
            for (i, v) in feature_rows(net, &nf, k, cfg).into_iter().enumerate() {
                t.push(rec.id, i, &v);
            }
        }
        t.write_csv(&dir.join("features.csv"))?;
    }
    Ok(records)
}

/// Feature values of every fracture for rate `k`; volume and target slots
/// are left at zero.
fn feature_rows(net: &FractureNetwork, nf: &NetworkFeatures, k: f64, cfg: &StudyConfig) -> Vec<Vec<f64>> {
    let hydro = pipe::hydro_features(&nf.flow.fracture_q, net, k, &cfg.chem);
    (0..net.len())
        .map(|i| {
            let t = &nf.topological[i];
            let g = &nf.geometric[i];
            let h = &hydro[i];
            let mut v = vec![
                k,
                t.degree as f64,
                t.degree_centrality,
                t.distance_to_backbone as f64,
                t.betweenness_centrality,
                t.current_flow,
                g.surface_area,
                g.total_volume,
                g.projected_volume,
                g.intersection_area,
                h.volumetric_flow_rate,
                h.peclet,
                h.damkohler_advective,
                h.damkohler_diffusive,
            ];
            v.resize(DATASET_COLUMNS.len(), 0.0);
            v
        })
        .collect()
}

struct SimOutput {
    initial: Vec<f64>,
    final_volume: Vec<f64>,
    remaining: Vec<f64>,
    meta: SimMeta,
    reused: bool,
}

fn read_result(path: &Path) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut rd = csv::Reader::from_path(path).ok()?;
    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rd.records() {
        let rec = rec.ok()?;
        a.push(rec.get(1)?.parse().ok()?);
        b.push(rec.get(2)?.parse().ok()?);
        c.push(rec.get(3)?.parse().ok()?);
    }
    Some((a, b, c))
}

fn simulate_one(
    cfg: &StudyConfig,
    hash: &str,
    rec: &NetworkRecord,
    net: &FractureNetwork,
    nf: &NetworkFeatures,
    k_index: usize,
) -> Result<SimOutput, String> {
    let k = cfg.rate_constants[k_index];
    let dir = sim_dir(&cfg.out_dir, rec.id, k_index);
    if let Some(meta) = read_json::<SimMeta>(&dir.join("meta.json")) {
        if meta.simulation_hash == hash {
            if let Some((initial, final_volume, remaining)) = read_result(&dir.join("result.csv")) {
                if initial.len() == net.len() {
                    return Ok(SimOutput {
                        initial,
                        final_volume,
                        remaining,
                        meta,
                        reused: true,
                    });
                }
            }
        }
    }
    let t0 = Instant::now();
    let state = reactive::init_state(net, nf.pipes.clone(), k, nf.total_rate, cfg.chem, cfg.law)
        .map_err(|e| e.to_string())?;
    let (state, result) = reactive::run_to_quasi_steady(state, &cfg.controls).map_err(|e| e.to_string())?;
    let v0: f64 = result.initial_volume.iter().sum();
    let v1: f64 = result.final_volume.iter().sum();
    let meta = SimMeta {
        simulation_hash: hash.to_string(),
        network_id: rec.id,
        network_seed: rec.seed,
        rate_constant: k,
        steps: result.steps,
        flow_solves: state.flow_solves,
        final_time_years: result.final_time / SECONDS_PER_YEAR,
        quasi_steady: result.quasi_steady,
        ledger: result.ledger,
        ledger_relative_error: result.ledger.relative_error(),
        remaining_total: v1 / v0,
        elapsed_s: t0.elapsed().as_secs_f64(),
    };
    let io = |e: &dyn std::fmt::Display| format!("writing artifacts: {e}");
    std::fs::create_dir_all(&dir).map_err(|e| io(&e))?;
    reactive::write_result_csv(&dir.join("result.csv"), &result).map_err(|e| io(&e))?;
    reactive::write_history_csv(&dir.join("history.csv"), &result.history).map_err(|e| io(&e))?;
    if cfg.write_flow_dump {
        let hydro = pipe::hydro_features(&nf.flow.fracture_q, net, k, &cfg.chem);
        pipe::write_flow_dump(&dir.join("flow.csv"), &hydro, &nf.flow).map_err(|e| io(&e))?;
    }
    // meta.json last: its presence marks a complete artifact set.
    write_json(&dir.join("meta.json"), &meta).map_err(|e| io(&e))?;
    log::info!(
        "net {} k={k:e}: {} steps, {:.3e} yr, remaining {:.4}, ledger {:.1e}, {:.1} s",
        rec.id,
        meta.steps,
        meta.final_time_years,
        meta.remaining_total,
        meta.ledger_relative_error,
        meta.elapsed_s
    );
    Ok(SimOutput {
        initial: result.initial_volume,
        final_volume: result.final_volume,
        remaining: result.remaining_fraction,
        meta,
        reused: false,
    })
}

/// Generates the ensemble, runs every (network, rate) simulation and writes
/// `dataset.csv`. Failed simulations are listed in the summary and leave
/// no rows.
pub fn run_ensemble(cfg: &StudyConfig) -> Result<EnsembleSummary, PipelineError> {
    let t0 = Instant::now();
    let (records, nets, skipped) = generate_networks(cfg)?;
    let hash = cfg.simulation_hash();
    let features: Vec<Result<NetworkFeatures, String>> = par::map_slice(&nets, |n| {
        compute_network_features(n).map_err(|e| e.to_string())
    });
    if cfg.write_graph {
        for (rec, nf) in records.iter().zip(&features) {
            if let Ok(nf) = nf {
                nf.graph.write_edge_list(&network_dir(&cfg.out_dir, rec.id).join("graph.txt"))?;
            }
        }
    }
    let jobs: Vec<(usize, usize)> = (0..nets.len())
        .flat_map(|n| (0..cfg.rate_constants.len()).map(move |k| (n, k)))
        .collect();
    let outputs = par::map_slice(&jobs, |&(n, k)| match &features[n] {
        Ok(nf) => simulate_one(cfg, &hash, &records[n], &nets[n], nf, k),
        Err(e) => Err(format!("network features: {e}")),
    });

    let mut table = FeatureTable::new();
    let mut failures = Vec::new();
    let mut metas = Vec::new();
    let mut reused = 0;
    for (&(n, k), out) in jobs.iter().zip(outputs) {
        let rate = cfg.rate_constants[k];
        match out {
            Ok(o) => {
                let nf = features[n].as_ref().expect("features exist for a finished job");
                let rows = feature_rows(&nets[n], nf, rate, cfg);
                let last = DATASET_COLUMNS.len();
                for (i, mut v) in rows.into_iter().enumerate() {
                    v[last - 3] = o.initial[i];
                    v[last - 2] = o.final_volume[i];
                    v[last - 1] = o.remaining[i];
                    table.push(records[n].id, i, &v);
                }
                reused += o.reused as usize;
                metas.push(o.meta);
            }
            Err(reason) => {
                log::error!("net {} k={rate:e}: {reason}", records[n].id);
                failures.push(SimFailure {
                    network_id: records[n].id,
                    rate_constant: rate,
                    reason,
                });
            }
        }
    }
    let dataset_path = cfg.out_dir.join("dataset.csv");
    table.write_csv(&dataset_path)?;
    let summary = EnsembleSummary {
        simulation_hash: hash,
        schema_version: DATASET_SCHEMA_VERSION,
        networks: records,
        skipped_seeds: skipped,
        simulations: jobs.len(),
        reused,
        failures,
        metas,
        dataset_rows: table.len(),
        dataset_path,
        elapsed_s: t0.elapsed().as_secs_f64(),
    };
    write_json(&cfg.out_dir.join("ensemble_summary.json"), &summary)?;
    Ok(summary)
}
