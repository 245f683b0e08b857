use std::path::Path;

use super::PipelineError;
use crate::forest::Dataset;

pub const DATASET_SCHEMA_VERSION: u32 = 1;

pub const TARGET: &str = "remaining_fraction";

/// Numeric columns of the dataset CSV after `network_id` and `fracture_id`.
pub const DATASET_COLUMNS: [&str; 17] = [
    "rate_constant",
    "degree",
    "degree_centrality",
    "distance_to_backbone",
    "betweenness_centrality",
    "current_flow",
    "surface_area",
    "total_volume",
    "projected_volume",
    "intersection_area",
    "volumetric_flow_rate",
    "peclet",
    "damkohler_advective",
    "damkohler_diffusive",
    "initial_quartz_volume",
    "final_quartz_volume",
    TARGET,
];

/// One row per (network, rate constant, fracture).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub network_id: Vec<u64>,
    pub fracture_id: Vec<usize>,
    /// Indexed like [`DATASET_COLUMNS`].
    pub columns: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn new() -> FeatureTable {
        FeatureTable {
            network_id: Vec::new(),
            fracture_id: Vec::new(),
            columns: vec![Vec::new(); DATASET_COLUMNS.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.network_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.network_id.is_empty()
    }

    pub fn push(&mut self, network_id: u64, fracture_id: usize, values: &[f64]) {
        assert_eq!(values.len(), DATASET_COLUMNS.len());
        self.network_id.push(network_id);
        self.fracture_id.push(fracture_id);
        for (c, &v) in self.columns.iter_mut().zip(values) {
            c.push(v);
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        DATASET_COLUMNS
            .iter()
            .position(|c| *c == name)
            .map(|i| self.columns[i].as_slice())
    }

    /// Rows satisfying `keep`.
    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> FeatureTable {
        let rows: Vec<usize> = (0..self.len()).filter(|&r| keep(r)).collect();
        FeatureTable {
            network_id: rows.iter().map(|&r| self.network_id[r]).collect(),
            fracture_id: rows.iter().map(|&r| self.fracture_id[r]).collect(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
        }
    }

    /// Distinct rate constants in order of first appearance.
    pub fn rate_constants(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &k in self.column("rate_constant").unwrap_or(&[]) {
            if !out.contains(&k) {
                out.push(k);
            }
        }
        out
    }

    /// Learning table with the given features, grouped by network.
    pub fn dataset(&self, features: &[&str], target: &str) -> Result<Dataset, PipelineError> {
        let get = |name: &str| {
            self.column(name)
                .map(|c| c.to_vec())
                .ok_or_else(|| PipelineError::Data(format!("unknown column {name}")))
        };
        let columns = features.iter().map(|f| get(f)).collect::<Result<Vec<_>, _>>()?;
        let names = features.iter().map(|f| f.to_string()).collect();
        Ok(Dataset::new(names, columns, get(target)?, Some(self.network_id.clone()))?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), PipelineError> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["network_id", "fracture_id"];
        header.extend(DATASET_COLUMNS);
        w.write_record(&header)?;
        let mut rec = Vec::with_capacity(header.len());
        for r in 0..self.len() {
            rec.clear();
            rec.push(self.network_id[r].to_string());
            rec.push(self.fracture_id[r].to_string());
            rec.extend(self.columns.iter().map(|c| c[r].to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<FeatureTable, PipelineError> {
        let mut rd = csv::Reader::from_path(path)?;
        let header = rd.headers()?.clone();
        let mut expect = vec!["network_id", "fracture_id"];
        expect.extend(DATASET_COLUMNS);
        if header.iter().collect::<Vec<_>>() != expect {
            return Err(PipelineError::Data(format!(
                "{}: header does not match schema version {DATASET_SCHEMA_VERSION}",
                path.display()
            )));
        }
        let mut t = FeatureTable::new();
        let mut values: Vec<f64> = vec![0.0; DATASET_COLUMNS.len()];
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| PipelineError::Data(format!("row {}: bad {what}", line + 1));
            let net = rec[0].parse().map_err(|_| bad("network_id"))?;
            let frac = rec[1].parse().map_err(|_| bad("fracture_id"))?;
            for (i, v) in values.iter_mut().enumerate() {
                *v = rec[i + 2].parse().map_err(|_| bad(DATASET_COLUMNS[i]))?;
                if !v.is_finite() {
                    return Err(bad(DATASET_COLUMNS[i]));
                }
            }
            t.push(net, frac, &values);
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut t = FeatureTable::new();
        for r in 0..5 {
            let v: Vec<f64> = (0..DATASET_COLUMNS.len()).map(|c| (r * 31 + c) as f64 / 7.0).collect();
            t.push(r as u64 / 2, r, &v);
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        t.write_csv(&p).unwrap();
        assert_eq!(FeatureTable::read_csv(&p).unwrap(), t);
        let d = t.dataset(&["peclet", "degree"], TARGET).unwrap();
        assert_eq!(d.names, vec!["peclet", "degree"]);
        assert_eq!(d.groups, vec![0, 0, 1, 1, 2]);
        assert_eq!(t.filter(|r| r % 2 == 0).len(), 3);
    }
}
