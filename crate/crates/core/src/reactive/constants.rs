use serde::{Deserialize, Serialize};

/// Litres per cubic metre; concentrations are given in mol/L and used in mol/m³.
pub const LITRES_PER_M3: f64 = 1000.0;
pub const SECONDS_PER_YEAR: f64 = 3.1536e7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChemistryConstants {
    /// Quartz solubility, mol/L.
    pub k_eq: f64,
    /// m²/g.
    pub specific_surface_area: f64,
    /// kg/m³.
    pub quartz_density: f64,
    /// m³/mol.
    pub molar_volume: f64,
    /// m²/s.
    pub diffusion: f64,
    /// mol/L.
    pub inflow_silica: f64,
}

impl Default for ChemistryConstants {
    fn default() -> Self {
        ChemistryConstants {
            k_eq: 10f64.powf(-3.9993),
            specific_surface_area: 0.0225,
            quartz_density: 2650.0,
            molar_volume: 22.6880e-6,
            diffusion: 1e-12,
            inflow_silica: 1e-20,
        }
    }
}

impl ChemistryConstants {
    /// Solubility in mol/m³.
    pub fn k_eq_si(&self) -> f64 {
        self.k_eq * LITRES_PER_M3
    }

    pub fn inflow_si(&self) -> f64 {
        self.inflow_silica * LITRES_PER_M3
    }

    /// Reactive area per unit quartz volume, m²/m³.
    pub fn area_per_volume(&self) -> f64 {
        self.specific_surface_area * 1000.0 * self.quartz_density
    }

    /// Surface rate constant in mol/(m²·s) as a velocity, m/s.
    pub fn rate_velocity(&self, k: f64) -> f64 {
        k * self.molar_volume
    }
}
