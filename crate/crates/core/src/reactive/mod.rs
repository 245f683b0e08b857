//! Quartz dissolution on the pipe network.
//!
//! Every fracture is one well-mixed cell holding quartz and pore fluid.
//! Between geometry updates the aqueous silica field is the solution of a
//! linear advection–diffusion–reaction balance; dissolution then removes
//! quartz, which opens porosity, raises permeability and, once the change
//! is large enough, redistributes flow.
//!
//! Transport is solved for the undersaturation `u = K_eq - c` rather than
//! for `c`. A network in equilibrium then has `u = 0` identically, and the
//! TST source `k A (1 - c/K_eq)` is simply `(k A / K_eq) u`.

pub mod constants;
mod io;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dfn::FractureNetwork;
use crate::pipe::{self, FlowSolution, PipeError, PipeModel};

pub use constants::{ChemistryConstants, LITRES_PER_M3, SECONDS_PER_YEAR};
pub use io::{write_history_csv, write_result_csv};

/// Porosity of a fresh fracture (80% of its volume is quartz).
pub const INITIAL_POROSITY: f64 = 0.2;

#[derive(Debug, Error)]
pub enum ReactiveError {
    #[error("stiff step: dt fell below {min_dt} s at t = {time} s")]
    Stiff { time: f64, min_dt: f64 },
    #[error("flow: {0}")]
    Flow(#[from] PipeError),
    #[error("singular transport system")]
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermeabilityLaw {
    pub exponent: f64,
    pub critical_porosity: f64,
    pub f_min: f64,
    /// Exponent on `V / V_o` in the surface-area law.
    pub n: f64,
    /// Exponent on the mineral-fraction ratio in the surface-area law.
    pub n_prime: f64,
}

impl Default for PermeabilityLaw {
    fn default() -> Self {
        PermeabilityLaw {
            exponent: 3.0,
            critical_porosity: 0.01,
            f_min: 1e-6,
            n: 2.0 / 3.0,
            n_prime: 0.0,
        }
    }
}

impl PermeabilityLaw {
    /// Permeability multiplier `k / k_0`.
    pub fn factor(&self, phi: f64, phi0: f64) -> f64 {
        if phi <= self.critical_porosity {
            self.f_min
        } else {
            ((phi - self.critical_porosity) / (phi0 - self.critical_porosity)).powf(self.exponent)
        }
    }

    pub fn area(&self, a0: f64, v: f64, v0: f64, phi: f64, phi0: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let mut a = a0 * (v / v0).powf(self.n);
        if self.n_prime != 0.0 {
            a *= ((1.0 - phi) / (1.0 - phi0)).powf(self.n_prime);
        }
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactiveCell {
    /// Fracture volume (quartz plus pore space), m³.
    pub total_volume: f64,
    pub quartz_volume: f64,
    pub initial_quartz_volume: f64,
    pub quartz_area: f64,
    pub initial_area: f64,
    pub porosity: f64,
    pub initial_porosity: f64,
    pub mineral_fraction: f64,
    pub permeability_factor: f64,
    /// Aqueous silica, mol/m³.
    pub concentration: f64,
}

impl ReactiveCell {
    pub fn fluid_volume(&self) -> f64 {
        self.porosity * self.total_volume
    }

    pub fn remaining_fraction(&self) -> f64 {
        if self.initial_quartz_volume > 0.0 {
            self.quartz_volume / self.initial_quartz_volume
        } else {
            1.0
        }
    }

    /// First-order TST coefficient `k A / K_eq`, m³/s.
    fn exchange(&self, k: f64, chem: &ChemistryConstants) -> f64 {
        if self.quartz_volume > 0.0 {
            k * self.quartz_area / chem.k_eq_si()
        } else {
            0.0
        }
    }
}

/// Dissolution rate per unit fluid volume, mol/(m³·s), for silica `c` in mol/m³.
pub fn dissolution_rate(cell: &ReactiveCell, c: f64, k: f64, chem: &ChemistryConstants) -> f64 {
    if cell.quartz_volume <= 0.0 {
        return 0.0;
    }
    let r = k * cell.quartz_area / cell.fluid_volume() * (1.0 - c / chem.k_eq_si());
    r.max(0.0)
}

/// Removes `dissolved_moles` of quartz and updates area, porosity and
/// permeability. Returns the updated cell and the moles that could not be
/// taken because the cell ran out of quartz.
pub fn update_geometry_chemistry(
    cell: &ReactiveCell,
    dissolved_moles: f64,
    chem: &ChemistryConstants,
    law: &PermeabilityLaw,
) -> (ReactiveCell, f64) {
    if dissolved_moles <= 0.0 {
        return (*cell, 0.0);
    }
    let mut out = *cell;
    let available = cell.quartz_volume / chem.molar_volume;
    let clamped = if dissolved_moles >= available * (1.0 - 1e-12) {
        out.quartz_volume = 0.0;
        dissolved_moles - available
    } else {
        out.quartz_volume = cell.quartz_volume - dissolved_moles * chem.molar_volume;
        0.0
    };
    out.mineral_fraction = out.quartz_volume / out.total_volume;
    out.porosity = 1.0 - out.mineral_fraction;
    out.quartz_area = law.area(
        out.initial_area,
        out.quartz_volume,
        out.initial_quartz_volume,
        out.porosity,
        out.initial_porosity,
    );
    out.permeability_factor = law.factor(out.porosity, out.initial_porosity);
    (out, clamped)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimControls {
    pub horizon_years: f64,
    /// Accepted steps compared by the quasi-steady test.
    pub qss_window: usize,
    pub qss_tol: f64,
    /// Largest share of a cell's initial quartz removed in one step.
    pub max_loss: f64,
    pub initial_dt_years: f64,
    pub max_dt_years: f64,
    pub min_dt_seconds: f64,
    /// Relative permeability change that triggers a new flow solve.
    pub flow_refresh: f64,
}

impl Default for SimControls {
    fn default() -> Self {
        SimControls {
            horizon_years: 1e7,
            qss_window: 10,
            qss_tol: 1e-4,
            max_loss: 0.05,
            initial_dt_years: 1.0,
            max_dt_years: 1e4,
            min_dt_seconds: 1.0,
            flow_refresh: 0.01,
        }
    }
}

/// Cumulative silica budget, mol.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MassLedger {
    /// From the change in quartz volume.
    pub quartz_removed: f64,
    /// Increase of the dissolved inventory in the pore fluid.
    pub fluid_gain: f64,
    pub exported: f64,
    pub imported: f64,
    /// Worst single-step relative imbalance.
    pub max_step_error: f64,
}

impl MassLedger {
    pub fn imbalance(&self) -> f64 {
        self.quartz_removed - (self.fluid_gain + self.exported - self.imported)
    }

    pub fn relative_error(&self) -> f64 {
        let scale = self
            .quartz_removed
            .abs()
            .max(self.exported.abs())
            .max(self.imported.abs())
            .max(self.fluid_gain.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.imbalance().abs() / scale
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReactiveState {
    pub cells: Vec<ReactiveCell>,
    /// Seconds since the start.
    pub time: f64,
    pub rate_constant: f64,
    pub chem: ChemistryConstants,
    pub law: PermeabilityLaw,
    pub model: PipeModel,
    pub total_rate: f64,
    pub flow: FlowSolution,
    /// Permeability multipliers used by the current flow solution.
    flow_factors: Vec<f64>,
    pub ledger: MassLedger,
    pub flow_solves: usize,
}

impl ReactiveState {
    pub fn total_quartz(&self) -> f64 {
        self.cells.iter().map(|c| c.quartz_volume).sum()
    }

    pub fn factors(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.permeability_factor).collect()
    }

    fn refresh_flow(&mut self, tol: f64) -> Result<(), ReactiveError> {
        let f = self.factors();
        let changed = f
            .iter()
            .zip(&self.flow_factors)
            .any(|(a, b)| (a / b - 1.0).abs() > tol);
        if changed {
            self.flow = pipe::solve_flow_with(&self.model, &f, self.total_rate)?;
            self.flow_factors = f;
            self.flow_solves += 1;
        }
        Ok(())
    }
}

/// Fresh state: 80% quartz by volume, pore fluid at equilibrium.
pub fn init_state(
    network: &FractureNetwork,
    model: PipeModel,
    rate_constant: f64,
    total_rate: f64,
    chem: ChemistryConstants,
    law: PermeabilityLaw,
) -> Result<ReactiveState, ReactiveError> {
    let cells: Vec<ReactiveCell> = network
        .fractures
        .iter()
        .map(|f| {
            let v0 = (1.0 - INITIAL_POROSITY) * f.total_volume;
            let a0 = chem.area_per_volume() * v0;
            ReactiveCell {
                total_volume: f.total_volume,
                quartz_volume: v0,
                initial_quartz_volume: v0,
                quartz_area: a0,
                initial_area: a0,
                porosity: INITIAL_POROSITY,
                initial_porosity: INITIAL_POROSITY,
                mineral_fraction: 1.0 - INITIAL_POROSITY,
                permeability_factor: law.factor(INITIAL_POROSITY, INITIAL_POROSITY),
                concentration: chem.k_eq_si(),
            }
        })
        .collect();
    let flow_factors: Vec<f64> = cells.iter().map(|c| c.permeability_factor).collect();
    let flow = pipe::solve_flow_with(&model, &flow_factors, total_rate)?;
    Ok(ReactiveState {
        cells,
        time: 0.0,
        rate_constant,
        chem,
        law,
        model,
        total_rate,
        flow,
        flow_factors,
        ledger: MassLedger::default(),
        flow_solves: 1,
    })
}

/// Silica field and fluxes from one transport solve.
#[derive(Debug, Clone)]
pub struct Transport {
    /// mol/m³ per cell.
    pub concentration: Vec<f64>,
    /// Dissolution per cell, mol/s.
    pub source: Vec<f64>,
    /// Advective export through the outlet, mol/s.
    pub export_rate: f64,
    /// Advective plus diffusive import through the inlet, mol/s.
    pub import_rate: f64,
    /// Flow leaving through the outlet, m³/s.
    pub outflow: f64,
}

impl Transport {
    /// Flow-weighted outflow concentration, mol/m³.
    pub fn outflow_concentration(&self) -> f64 {
        if self.outflow > 0.0 {
            self.export_rate / self.outflow
        } else {
            0.0
        }
    }
}

/// Solves the linear silica balance.
///
/// `dt = None` gives the steady field. With `Some(dt)` the pore-fluid
/// inventory enters as a backward-Euler storage term. Cells listed in
/// `fixed` dissolve at the given rate (mol/s) instead of the TST rate.
fn transport(
    state: &ReactiveState,
    dt: Option<f64>,
    lambda: &[f64],
    fixed: &[Option<f64>],
) -> Result<Transport, ReactiveError> {
    let n = state.cells.len();
    let pm = &state.model;
    let chem = &state.chem;
    let k_eq = chem.k_eq_si();
    let u_in = k_eq - chem.inflow_si();
    let (inlet, outlet) = (pm.inlet(), pm.outlet());

    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let mut outlet_q = vec![0.0; n];
    let mut inlet_links: Vec<(usize, f64, f64)> = Vec::new();
    for (p, &q) in pm.pipes.iter().zip(&state.flow.pipe_flows) {
        let b = [p.a, p.b]
            .iter()
            .filter(|&&i| i < n)
            .map(|&i| pm.apertures[i])
            .fold(f64::INFINITY, f64::min);
        let diff = chem.diffusion * p.width * b / p.length();
        if p.a == inlet || p.b == inlet {
            // Inflow from the reservoir plus diffusive exchange with it.
            let i = if p.a == inlet { p.b } else { p.a };
            let q_in = if p.a == inlet { q } else { -q }.max(0.0);
            m[(i, i)] += diff;
            rhs[i] += (q_in + diff) * u_in;
            inlet_links.push((i, q_in, diff));
            continue;
        }
        // Orient so that flow runs from `up` to `down`.
        let (up, down, q) = if q >= 0.0 { (p.a, p.b, q) } else { (p.b, p.a, -q) };
        m[(up, up)] += q;
        if down == outlet {
            outlet_q[up] += q;
            continue;
        }
        m[(down, up)] -= q;
        m[(p.a, p.a)] += diff;
        m[(p.b, p.b)] += diff;
        m[(p.a, p.b)] -= diff;
        m[(p.b, p.a)] -= diff;
    }
    for i in 0..n {
        match fixed[i] {
            Some(s) => rhs[i] -= s,
            None => m[(i, i)] += lambda[i],
        }
        if let Some(dt) = dt {
            let w = state.cells[i].fluid_volume() / dt;
            m[(i, i)] += w;
            rhs[i] += w * (k_eq - state.cells[i].concentration);
        }
    }
    let u = m.lu().solve(&rhs).ok_or(ReactiveError::Singular)?;
    let concentration: Vec<f64> = (0..n).map(|i| (k_eq - u[i]).max(0.0)).collect();
    let source: Vec<f64> = (0..n)
        .map(|i| match fixed[i] {
            Some(s) => s,
            None => lambda[i] * u[i].max(0.0),
        })
        .collect();
    let export_rate = (0..n).map(|i| outlet_q[i] * (k_eq - u[i])).sum();
    let c_in = chem.inflow_si();
    let import_rate = inlet_links
        .iter()
        .map(|&(i, q, diff)| q * c_in + diff * (c_in - (k_eq - u[i])))
        .sum();
    Ok(Transport {
        concentration,
        source,
        export_rate,
        import_rate,
        outflow: outlet_q.iter().sum(),
    })
}

/// Steady silica concentration in every cell, mol/m³.
pub fn solve_transport(state: &ReactiveState) -> Result<Vec<f64>, ReactiveError> {
    let lambda = exchange(state, &state.cells);
    Ok(transport(state, None, &lambda, &vec![None; state.cells.len()])?.concentration)
}

fn exchange(state: &ReactiveState, cells: &[ReactiveCell]) -> Vec<f64> {
    cells.iter().map(|c| c.exchange(state.rate_constant, &state.chem)).collect()
}

/// Outcome of one accepted step.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub dt: f64,
    /// Largest share of initial quartz removed from any cell.
    pub max_loss: f64,
    pub outflow_concentration: f64,
    pub dissolved: f64,
    pub depleted_cells: usize,
}

struct Trial {
    transport: Transport,
    moles: Vec<f64>,
    max_loss: f64,
    depleted: usize,
}

/// Midpoint step: a predictor solve estimates the quartz lost over `dt`,
/// and the corrector uses the surface area halfway through that loss.
fn trial(state: &ReactiveState, dt: f64) -> Result<Trial, ReactiveError> {
    let n = state.cells.len();
    let vm = state.chem.molar_volume;
    let free = vec![None; n];
    let predictor = transport(state, Some(dt), &exchange(state, &state.cells), &free)?;
    let mid: Vec<ReactiveCell> = state
        .cells
        .iter()
        .zip(&predictor.source)
        .map(|(c, s)| {
            let (m, _) = update_geometry_chemistry(c, 0.5 * s * dt, &state.chem, &state.law);
            // A cell emptied by the predictor keeps reacting until it is gone.
            if m.quartz_volume > 0.0 { m } else { *c }
        })
        .collect();
    let lambda = exchange(state, &mid);
    let mut fixed: Vec<Option<f64>> = free;
    loop {
        let t = transport(state, Some(dt), &lambda, &fixed)?;
        let mut grew = false;
        for i in 0..n {
            let available = state.cells[i].quartz_volume / vm;
            if fixed[i].is_none() && t.source[i] * dt > available {
                fixed[i] = Some(available / dt);
                grew = true;
            }
        }
        if !grew {
            let moles: Vec<f64> = t.source.iter().map(|s| s * dt).collect();
            let max_loss = moles
                .iter()
                .zip(&state.cells)
                .map(|(m, c)| if c.initial_quartz_volume > 0.0 { m * vm / c.initial_quartz_volume } else { 0.0 })
                .fold(0.0, f64::max);
            let depleted = fixed.iter().filter(|f| f.is_some()).count();
            return Ok(Trial {
                transport: t,
                moles,
                max_loss,
                depleted,
            });
        }
    }
}

fn commit(state: &mut ReactiveState, dt: f64, tr: Trial, refresh: f64) -> Result<StepReport, ReactiveError> {
    let vm = state.chem.molar_volume;
    let mut removed = 0.0;
    let mut gain = 0.0;
    for (i, cell) in state.cells.iter_mut().enumerate() {
        let c_new = tr.transport.concentration[i];
        gain += cell.fluid_volume() * (c_new - cell.concentration);
        let (mut next, _) = update_geometry_chemistry(cell, tr.moles[i], &state.chem, &state.law);
        removed += (cell.quartz_volume - next.quartz_volume) / vm;
        next.concentration = c_new;
        *cell = next;
    }
    let exported = tr.transport.export_rate * dt;
    let imported = tr.transport.import_rate * dt;
    let step = MassLedger {
        quartz_removed: removed,
        fluid_gain: gain,
        exported,
        imported,
        max_step_error: 0.0,
    };
    // Imbalances at the roundoff level of the throughput are not errors.
    let floor = 1e-9 * state.total_rate * state.chem.k_eq_si() * dt;
    let err = if step.imbalance().abs() <= floor { 0.0 } else { step.relative_error() };
    let l = &mut state.ledger;
    l.quartz_removed += removed;
    l.fluid_gain += gain;
    l.exported += exported;
    l.imported += imported;
    l.max_step_error = l.max_step_error.max(err);
    state.time += dt;
    state.refresh_flow(refresh)?;
    Ok(StepReport {
        dt,
        max_loss: tr.max_loss,
        outflow_concentration: tr.transport.outflow_concentration(),
        dissolved: removed,
        depleted_cells: tr.depleted,
    })
}

/// Advances by exactly `dt` seconds.
///
/// Cells that would dissolve more quartz than they hold are depleted at a
/// fixed rate instead, and the silica field is re-solved with that rate.
pub fn step(state: &mut ReactiveState, dt: f64) -> Result<StepReport, ReactiveError> {
    let tr = trial(state, dt)?;
    commit(state, dt, tr, SimControls::default().flow_refresh)
}

/// Takes one step of at most `dt`, shrinking it until no cell loses more
/// than `controls.max_loss` of its initial quartz.
pub fn advance(
    state: &mut ReactiveState,
    dt: f64,
    controls: &SimControls,
) -> Result<StepReport, ReactiveError> {
    let mut dt = dt;
    loop {
        if dt < controls.min_dt_seconds {
            return Err(ReactiveError::Stiff {
                time: state.time,
                min_dt: controls.min_dt_seconds,
            });
        }
        let tr = trial(state, dt)?;
        if tr.max_loss <= controls.max_loss * (1.0 + 1e-9) {
            return commit(state, dt, tr, controls.flow_refresh);
        }
        dt *= (0.9 * controls.max_loss / tr.max_loss).clamp(0.01, 0.5);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub time_s: f64,
    /// mol/L.
    pub outflow_c: f64,
    /// m³.
    pub total_quartz: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub initial_volume: Vec<f64>,
    pub final_volume: Vec<f64>,
    pub remaining_fraction: Vec<f64>,
    pub history: Vec<HistoryRow>,
    pub ledger: MassLedger,
    pub steps: usize,
    pub final_time: f64,
    pub quasi_steady: bool,
}

fn window_settled(history: &[HistoryRow], window: usize, tol: f64) -> bool {
    if history.len() <= window {
        return false;
    }
    let w = &history[history.len() - window - 1..];
    let rel_span = |xs: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = xs.collect();
        let hi = v.iter().cloned().fold(f64::MIN, f64::max);
        let lo = v.iter().cloned().fold(f64::MAX, f64::min);
        if hi <= 0.0 {
            0.0
        } else {
            (hi - lo) / hi
        }
    };
    rel_span(&mut w.iter().map(|h| h.outflow_c)) < tol
        && rel_span(&mut w.iter().map(|h| h.total_quartz)) < tol
}

/// Steps until the horizon or until both the outflow silica and the total
/// quartz change by less than `qss_tol` over `qss_window` accepted steps.
pub fn run_to_quasi_steady(
    mut state: ReactiveState,
    controls: &SimControls,
) -> Result<(ReactiveState, SimulationResult), ReactiveError> {
    let horizon = controls.horizon_years * SECONDS_PER_YEAR;
    let max_dt = controls.max_dt_years * SECONDS_PER_YEAR;
    let mut dt = controls.initial_dt_years * SECONDS_PER_YEAR;
    let mut history = vec![HistoryRow {
        time_s: 0.0,
        outflow_c: state.chem.k_eq,
        total_quartz: state.total_quartz(),
    }];
    let mut steps = 0;
    let mut quasi_steady = false;
    while state.time < horizon * (1.0 - 1e-12) {
        let want = dt.min(max_dt).min(horizon - state.time);
        let rep = advance(&mut state, want, controls)?;
        steps += 1;
        history.push(HistoryRow {
            time_s: state.time,
            outflow_c: rep.outflow_concentration / LITRES_PER_M3,
            total_quartz: state.total_quartz(),
        });
        if window_settled(&history, controls.qss_window, controls.qss_tol) {
            quasi_steady = true;
            break;
        }
        dt = rep.dt * 2.0;
    }
    let result = SimulationResult {
        initial_volume: state.cells.iter().map(|c| c.initial_quartz_volume).collect(),
        final_volume: state.cells.iter().map(|c| c.quartz_volume).collect(),
        remaining_fraction: state.cells.iter().map(|c| c.remaining_fraction()).collect(),
        history,
        ledger: state.ledger,
        steps,
        final_time: state.time,
        quasi_steady,
    };
    Ok((state, result))
}
