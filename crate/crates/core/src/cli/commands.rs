//! Command bodies. Each returns its tables; the caller writes files.

use std::f64::consts::TAU;

use super::config::RunConfig;
use super::output::{fmt_f64, Cell, CsvTable};
use crate::closed_form::{e1_analytic, e1_locked, effective_params, static_energy, static_max};
use crate::model::Drive;
use crate::propagate::{charge_scan, EvolveSettings, Protocol};
use crate::selfcheck::{self, CheckOutcome, SelfcheckOptions};
use crate::spectrum::{ground_state, hp_polarization};
use crate::sweep::{grid_amp_freq, sweep_atoms, sweep_lambda, GridSpec, SurfaceMode};
use crate::Result;

pub const TRACE_T: GridSpec = GridSpec {
    lo: 0.5,
    hi: 30.0,
    points: 400,
};
pub const SCAN_T: GridSpec = GridSpec {
    lo: 0.5,
    hi: 50.0,
    points: 400,
};
pub const SURFACE_A: GridSpec = GridSpec {
    lo: 0.05,
    hi: 2.0,
    points: 80,
};
pub const SURFACE_OMEGA: GridSpec = GridSpec {
    lo: 0.05,
    hi: 1.5,
    points: 120,
};
pub const LAMBDA_RANGE: GridSpec = GridSpec {
    lo: -2.0,
    hi: 2.0,
    points: 81,
};

pub fn default_n_list() -> Vec<usize> {
    (1..=15).map(|i| 20 * i).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub table: CsvTable,
    /// Extra tables written next to the main file as `<stem>_<suffix>.csv`.
    pub extra: Vec<(&'static str, CsvTable)>,
    /// Configuration with every default filled in.
    pub resolved: RunConfig,
    pub metadata: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

impl CommandOutput {
    fn new(table: CsvTable, resolved: RunConfig) -> Self {
        Self {
            table,
            extra: Vec::new(),
            resolved,
            metadata: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

fn workers(cfg: &RunConfig) -> usize {
    cfg.workers.unwrap_or(1).max(1)
}

fn resolve(cfg: &RunConfig, default_n: usize) -> Result<RunConfig> {
    let p = cfg.params(default_n)?;
    let mut r = cfg.clone();
    r.delta = Some(p.delta);
    r.amp = Some(p.amp);
    r.omega = Some(p.omega);
    r.lambda = Some(p.lambda());
    r.n = Some(p.n_atoms);
    r.drive = Some(p.drive);
    r.protocol = Some(cfg.protocol.unwrap_or(Protocol::PeriodLocked));
    r.workers = Some(workers(cfg));
    Ok(r)
}

/// Stored energy per atom over charging time, with the single-atom
/// closed forms alongside.
pub fn trace(cfg: &RunConfig) -> Result<CommandOutput> {
    let mut r = resolve(cfg, 1)?;
    let params = r.params(1)?;
    let protocol = r.protocol.unwrap();
    let grid = *r.t_range.get_or_insert(TRACE_T);
    grid.validate()?;
    let times = grid.values();
    let settings = EvolveSettings::for_atoms(params.n_atoms);
    let tr = charge_scan(&params, &times, protocol, &settings, workers(&r))?;
    let numeric = tr.energies_per_atom();
    let single = params.n_atoms == 1;
    let mut warnings = Vec::new();
    let fixed_eff = match (single, params.drive, protocol) {
        (true, Drive::Harmonic, Protocol::FixedFrequency) => {
            match effective_params(params.amp, params.omega, 1, params.delta) {
                Ok(e) => Some(e),
                Err(e) => {
                    warnings.push(format!("closed form unavailable: {e}"));
                    None
                }
            }
        }
        _ => None,
    };
    let mut table = CsvTable::new(&["T", "E_numeric", "E_analytic", "E_static"]);
    let mut missing = 0;
    for (t, e) in times.iter().zip(&numeric) {
        let analytic = match (single, params.drive, protocol) {
            (true, Drive::Harmonic, Protocol::PeriodLocked) => {
                e1_locked(params.amp, TAU / t, 1, params.delta).unwrap_or(f64::NAN)
            }
            (true, Drive::Harmonic, Protocol::FixedFrequency) => {
                fixed_eff.map_or(f64::NAN, |eff| e1_analytic(*t, &eff, params.delta))
            }
            _ => f64::NAN,
        };
        if analytic.is_nan() {
            missing += 1;
        }
        let stat = if single {
            static_energy(*t, params.amp, params.delta)
        } else {
            f64::NAN
        };
        table.push(&[Cell::F(*t), Cell::F(*e), Cell::F(analytic), Cell::F(stat)]);
    }
    if single && params.drive == Drive::Harmonic && missing > 0 {
        warnings.push(format!("{missing} rows without a closed-form value"));
    }
    let mut out = CommandOutput::new(table, r);
    if single {
        out.metadata
            .push(("static_max".into(), fmt_f64(static_max(params.amp, params.delta))));
    }
    out.metadata
        .push(("norm_drift_max".into(), format!("{:.3e}", tr.norm_drift)));
    out.metadata
        .push(("rk4_substeps_max".into(), tr.substeps.to_string()));
    out.metadata
        .push(("energy_reference".into(), format!("{:?}", tr.reference)));
    out.warnings = warnings;
    Ok(out)
}

/// Period-locked stored energy over the amplitude–frequency plane.
pub fn surface(cfg: &RunConfig) -> Result<CommandOutput> {
    let mut r = resolve(cfg, 1)?;
    let mode = *r.mode.get_or_insert(SurfaceMode::AnalyticLocked);
    let a = *r.a_range.get_or_insert(SURFACE_A);
    let w = *r.omega_range.get_or_insert(SURFACE_OMEGA);
    let n = r.n.unwrap();
    let s = grid_amp_freq(a, w, n, mode, &EvolveSettings::for_atoms(n), workers(&r))?;
    let mut table = CsvTable::new(&["A", "omega", "E_max"]);
    for (ia, amp) in s.amps.iter().enumerate() {
        for (iw, omega) in s.omegas.iter().enumerate() {
            let v = s.value(ia, iw).unwrap_or(f64::NAN);
            table.push(&[Cell::F(*amp), Cell::F(*omega), Cell::F(v)]);
        }
    }
    let mut ridge = CsvTable::new(&["A", "omega_ridge"]);
    for (amp, w) in s.amps.iter().zip(&s.ridge_omega) {
        ridge.push(&[Cell::F(*amp), Cell::F(w.unwrap_or(f64::NAN))]);
    }
    let mut out = CommandOutput::new(table, r);
    out.extra.push(("ridge", ridge));
    out.metadata.push(("missing_cells".into(), s.missing.to_string()));
    if s.missing > 0 {
        out.warnings
            .push(format!("{} cells without a closed-form solution", s.missing));
    }
    Ok(out)
}

pub fn sweep_n(cfg: &RunConfig) -> Result<CommandOutput> {
    let mut r = resolve(cfg, 1)?;
    let grid = *r.t_range.get_or_insert(SCAN_T);
    let n_list = r.n_list.get_or_insert_with(default_n_list).clone();
    let base = r.params(1)?;
    let sweep = sweep_atoms(&base, &n_list, grid, r.protocol.unwrap(), None, workers(&r))?;
    let mut table = CsvTable::new(&["N", "E_max_per_atom", "T_max", "omega_max"]);
    for (i, &n) in n_list.iter().enumerate() {
        table.push(&[
            Cell::I(n),
            Cell::F(sweep.scan.e_max[i]),
            Cell::F(sweep.scan.t_max[i]),
            Cell::F(sweep.scan.omega_max[i]),
        ]);
    }
    let mut out = CommandOutput::new(table, r);
    out.warnings = no_peak_warnings(&sweep.scan.axis, &sweep.scan.interior, "N");
    out.metadata = sweep.scan.metadata;
    Ok(out)
}

pub fn sweep_lambda_cmd(cfg: &RunConfig) -> Result<CommandOutput> {
    let mut r = resolve(cfg, 140)?;
    let grid = *r.t_range.get_or_insert(SCAN_T);
    let lambdas = r.lambda_range.get_or_insert(LAMBDA_RANGE).values();
    let base = r.params(140)?;
    let settings = EvolveSettings::for_atoms(base.n_atoms);
    let scan = sweep_lambda(&base, &lambdas, grid, r.protocol.unwrap(), &settings, workers(&r))?;
    let mut table = CsvTable::new(&["lambda", "E_max_per_atom", "T_max"]);
    for i in 0..scan.axis.len() {
        table.push(&[
            Cell::F(scan.axis[i]),
            Cell::F(scan.e_max[i]),
            Cell::F(scan.t_max[i]),
        ]);
    }
    let mut out = CommandOutput::new(table, r);
    out.warnings = no_peak_warnings(&scan.axis, &scan.interior, "lambda");
    out.metadata = scan.metadata;
    Ok(out)
}

fn no_peak_warnings(axis: &[f64], interior: &[bool], name: &str) -> Vec<String> {
    axis.iter()
        .zip(interior)
        .filter(|(_, ok)| !**ok)
        .map(|(x, _)| format!("{name} = {x}: no interior peak, global maximum reported"))
        .collect()
}

pub fn ground(cfg: &RunConfig) -> Result<CommandOutput> {
    let mut r = resolve(cfg, 200)?;
    let lambdas = r.lambda_range.get_or_insert(LAMBDA_RANGE).values();
    let base = r.params(200)?;
    let half = base.n_atoms as f64 / 2.0;
    let mut table = CsvTable::new(&[
        "lambda",
        "sz_per_spin_N",
        "sz_per_spin_inf",
        "e0_per_halfN",
        "e1_per_halfN",
        "gap",
    ]);
    for lambda in lambdas {
        let gs = ground_state(&base.with_lambda(lambda))?;
        table.push(&[
            Cell::F(lambda),
            Cell::F(gs.sz_per_spin),
            Cell::F(hp_polarization(lambda).sz_per_spin_inf),
            Cell::F(gs.e0 / half),
            Cell::F(gs.e1 / half),
            Cell::F(gs.gap),
        ]);
    }
    Ok(CommandOutput::new(table, r))
}

pub fn selfcheck(quick: bool, perturb_bessel: f64) -> Vec<CheckOutcome> {
    selfcheck::run(SelfcheckOptions {
        quick,
        perturb_bessel,
    })
}
