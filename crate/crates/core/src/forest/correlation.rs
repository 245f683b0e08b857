use std::path::Path;

use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::ensemble::csv_io;
use super::ForestError;

/// Pearson correlations between feature columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Columns with zero variance; their off-diagonal entries are 0.
    pub constant: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.values[i][j])
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), ForestError> {
        let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
        let mut header = vec![String::new()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(csv_io)?;
        for (name, row) in self.names.iter().zip(&self.values) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn correlation_matrix(data: &Dataset) -> Result<CorrelationMatrix, ForestError> {
    let n = data.n_rows();
    if n < 3 {
        return Err(ForestError::Params("correlation needs at least 3 rows".into()));
    }
    let centred: Vec<(Vec<f64>, f64)> = data
        .columns
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / n as f64;
            let d: Vec<f64> = c.iter().map(|v| v - mean).collect();
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            (d, norm)
        })
        .collect();
    let constant: Vec<bool> = data
        .columns
        .iter()
        .map(|c| c.iter().all(|&v| v == c[0]))
        .collect();
    for (i, &c) in constant.iter().enumerate() {
        if c {
            log::warn!("feature {} is constant; its correlations are reported as 0", data.names[i]);
        }
    }
    let p = data.n_features();
    let mut values = vec![vec![0.0; p]; p];
    for i in 0..p {
        values[i][i] = 1.0;
        for j in i + 1..p {
            let r = if constant[i] || constant[j] {
                0.0
            } else {
                let (a, na) = &centred[i];
                let (b, nb) = &centred[j];
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                (dot / (na * nb)).clamp(-1.0, 1.0)
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        names: data.names.clone(),
        values,
        constant,
    })
}
