use std::path::Path;

use super::{HistoryRow, SimulationResult};

/// Writes `fracture_id,V_o,V_final,remaining_fraction`.
pub fn write_result_csv(path: &Path, result: &SimulationResult) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["fracture_id", "V_o", "V_final", "remaining_fraction"])?;
    for i in 0..result.initial_volume.len() {
        w.write_record([
            i.to_string(),
            result.initial_volume[i].to_string(),
            result.final_volume[i].to_string(),
            result.remaining_fraction[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `time_s,outflow_c_mol_per_L,total_quartz_m3`.
pub fn write_history_csv(path: &Path, history: &[HistoryRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["time_s", "outflow_c_mol_per_L", "total_quartz_m3"])?;
    for h in history {
        w.write_record([h.time_s.to_string(), h.outflow_c.to_string(), h.total_quartz.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
