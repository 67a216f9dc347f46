//! Time evolution `i ∂ψ/∂t = H(t) ψ` with classical fixed-step RK4.
//!
//! No renormalization is ever applied; the final norm drift `|‖ψ‖² − 1|` is
//! the accuracy gauge. When it exceeds the budget the step is halved and the
//! evolution restarted, up to `max_refinements` times.
//!
//! The step grid is deterministic: a macro step of `period / steps_per_cycle`
//! (shrunk so that it divides `t_final`), subdivided into `2^r` RK4 substeps.
//! The starting level `r` is the smallest one whose a-priori drift estimate,
//! built from a Gershgorin bound on `‖H‖`, fits the budget.

use rayon::prelude::*;

use crate::model::{drive_coefficient, BatteryParams, EnergyReference, HamiltonianTerms};
use crate::spin_algebra::{check_dim, StateVector};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// One evolution at the configured `ω`, sampled along the way.
    FixedFrequency,
    /// Independent evolution for every charging time `T` with `ω = 2π/T`.
    PeriodLocked,
}

impl Protocol {
    pub fn as_str(&self) -> &'static str {
        match self {
            Protocol::FixedFrequency => "fixed",
            Protocol::PeriodLocked => "locked",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" | "fixed_frequency" => Ok(Protocol::FixedFrequency),
            "locked" | "period_locked" => Ok(Protocol::PeriodLocked),
            other => Err(Error::Invalid(format!("unknown protocol `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveSettings {
    /// Macro steps per drive period (per `2π/Δ` when undriven).
    pub steps_per_cycle: usize,
    pub norm_drift_budget: f64,
    /// Halvings allowed beyond the a-priori starting level.
    pub max_refinements: u32,
}

impl Default for EvolveSettings {
    fn default() -> Self {
        Self {
            steps_per_cycle: 256,
            norm_drift_budget: 1e-8,
            max_refinements: 6,
        }
    }
}

impl EvolveSettings {
    /// 256 macro steps per cycle up to 200 atoms, 512 above.
    pub fn for_atoms(n_atoms: usize) -> Self {
        Self {
            steps_per_cycle: if n_atoms <= 200 { 256 } else { 512 },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_cycle < 16 {
            return Err(Error::Invalid(format!(
                "steps_per_cycle must be at least 16, got {}",
                self.steps_per_cycle
            )));
        }
        if !(self.norm_drift_budget > 0.0) {
            return Err(Error::Invalid("norm drift budget must be positive".into()));
        }
        Ok(())
    }
}

/// Time- or period-indexed stored energies.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceResult {
    /// Sample times (fixed frequency) or charging periods (period locked).
    pub times: Vec<f64>,
    /// Stored energy against the free term `Δ Sz`.
    pub energies_free: Vec<f64>,
    /// Stored energy against the interacting `H₀ᴵ`.
    pub energies_internal: Vec<f64>,
    /// Reference used by [`TraceResult::energies`].
    pub reference: EnergyReference,
    /// Largest final `|‖ψ‖² − 1|` among the evolutions behind this trace.
    pub norm_drift: f64,
    /// State at the last sample.
    pub final_state: StateVector,
    pub protocol: Protocol,
    /// Total RK4 substeps per macro step that were finally accepted (largest
    /// over the evolutions behind this trace).
    pub substeps: usize,
}

impl TraceResult {
    pub fn energies(&self) -> &[f64] {
        stored_energy_trace(self, self.reference)
    }

    /// Energies divided by `N`.
    pub fn energies_per_atom(&self) -> Vec<f64> {
        let n = self.final_state.basis().n_atoms() as f64;
        self.energies().iter().map(|e| e / n).collect()
    }
}

/// `E(t) = ⟨H_ref⟩(t) − ⟨H_ref⟩(0)` for the requested reference.
pub fn stored_energy_trace(trace: &TraceResult, reference: EnergyReference) -> &[f64] {
    match reference {
        EnergyReference::Free => &trace.energies_free,
        EnergyReference::Internal => &trace.energies_internal,
    }
}

/// Evolve `|N/2, −N/2⟩` to `t_final`, sampling at every macro step.
pub fn evolve(params: &BatteryParams, t_final: f64, settings: &EvolveSettings) -> Result<TraceResult> {
    let terms = HamiltonianTerms::new(params)?;
    let psi0 = StateVector::ground(*terms.basis());
    evolve_state_with(&terms, params, psi0, t_final, settings)
}

/// Evolve an arbitrary initial state; drift is measured relative to its norm.
pub fn evolve_state(
    params: &BatteryParams,
    psi0: StateVector,
    t_final: f64,
    settings: &EvolveSettings,
) -> Result<TraceResult> {
    let terms = HamiltonianTerms::new(params)?;
    check_dim(terms.basis().dim(), psi0.amplitudes().len())?;
    evolve_state_with(&terms, params, psi0, t_final, settings)
}

fn evolve_state_with(
    terms: &HamiltonianTerms,
    params: &BatteryParams,
    psi0: StateVector,
    t_final: f64,
    settings: &EvolveSettings,
) -> Result<TraceResult> {
    settings.validate()?;
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::Invalid(format!("t_final must be positive, got {t_final}")));
    }
    let macro_h = params.period() / settings.steps_per_cycle as f64;
    let n_macro = (t_final / macro_h).ceil().max(1.0) as usize;
    let times: Vec<f64> = (0..=n_macro)
        .map(|i| t_final * i as f64 / n_macro as f64)
        .collect();
    integrate_sampled(terms, params, psi0, &times, settings, Protocol::FixedFrequency)
}

/// Run RK4 over consecutive sample times with the refinement loop.
fn integrate_sampled(
    terms: &HamiltonianTerms,
    params: &BatteryParams,
    psi0: StateVector,
    times: &[f64],
    settings: &EvolveSettings,
    protocol: Protocol,
) -> Result<TraceResult> {
    let norm0 = psi0.norm_sqr();
    if norm0 == 0.0 {
        return Err(Error::Degenerate("zero initial state".into()));
    }
    let reference = EnergyReference::for_params(params);
    if params.drive == crate::Drive::Off || params.amp == 0.0 {
        let run = run_diagonal(terms, &psi0, times, norm0);
        return Ok(TraceResult {
            times: times.to_vec(),
            energies_free: run.energies_free,
            energies_internal: run.energies_internal,
            reference,
            norm_drift: run.drift,
            final_state: run.state,
            protocol,
            substeps: 0,
        });
    }
    let t_final = *times.last().expect("non-empty sample grid");
    let macro_h = params.period() / settings.steps_per_cycle as f64;
    let rho = spectral_bound(terms, params);
    let start = starting_level(rho, macro_h, t_final, settings.norm_drift_budget);

    let mut last_drift = f64::INFINITY;
    for level in start..=start + settings.max_refinements {
        let h_max = macro_h / (1u64 << level) as f64;
        match run_grid(
            terms,
            params,
            &psi0,
            times,
            h_max,
            norm0,
            settings.norm_drift_budget,
        ) {
            Ok(run) => {
                return Ok(TraceResult {
                    times: times.to_vec(),
                    energies_free: run.energies_free,
                    energies_internal: run.energies_internal,
                    reference,
                    norm_drift: run.drift,
                    final_state: run.state,
                    protocol,
                    substeps: run.substeps,
                });
            }
            Err(drift) => last_drift = drift,
        }
    }
    Err(Error::Accuracy {
        drift: last_drift,
        budget: settings.norm_drift_budget,
        refinements: settings.max_refinements,
    })
}

/// Gershgorin bound on `max_t ‖H(t)‖`.
fn spectral_bound(terms: &HamiltonianTerms, params: &BatteryParams) -> f64 {
    let d = terms.diag_internal();
    let c = terms.diag_center();
    let b = terms.drive_band();
    let a = match params.drive {
        crate::Drive::Off => 0.0,
        _ => params.amp.abs(),
    };
    (0..d.len())
        .map(|k| {
            let lo = if k > 0 { b[k - 1] } else { 0.0 };
            let hi = if k < b.len() { b[k] } else { 0.0 };
            (d[k] - c).abs() + a * (lo + hi)
        })
        .fold(0.0, f64::max)
}

/// Smallest halving level whose estimated drift fits the budget.
///
/// RK4 applied to an oscillation of frequency `ρ` loses `(hρ)⁶/72` of the
/// norm per step. The bound `ρ` overestimates the frequencies a charged
/// state actually occupies, so it is scaled by one half before use.
fn starting_level(rho: f64, h0: f64, t_final: f64, budget: f64) -> u32 {
    let rho_eff = 0.5 * rho;
    let mut level = 0;
    while level < 40 {
        let h = h0 / (1u64 << level) as f64;
        let z = h * rho_eff;
        let estimate = (t_final / h) * z.powi(6) / 72.0;
        if z < 2.0 && estimate <= 0.25 * budget {
            break;
        }
        level += 1;
    }
    level
}

struct GridRun {
    state: StateVector,
    energies_free: Vec<f64>,
    energies_internal: Vec<f64>,
    drift: f64,
    substeps: usize,
}

/// Integrate across the sample grid with substeps no longer than `h_max`.
/// Stops early, returning the drift reached, once it leaves the budget.
fn run_grid(
    terms: &HamiltonianTerms,
    params: &BatteryParams,
    psi0: &StateVector,
    times: &[f64],
    h_max: f64,
    norm0: f64,
    budget: f64,
) -> std::result::Result<GridRun, f64> {
    let diag_free = terms.diag_free();
    let diag_int = terms.diag_internal();

    let mut psi = psi0.amplitudes().to_vec();
    let e0_free = mean_diag(&psi, diag_free);
    let e0_int = mean_diag(&psi, diag_int);
    let mut stepper = Rk4::new(psi.len(), terms.diag_center());
    let mut energies_free = Vec::with_capacity(times.len());
    let mut energies_internal = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut substeps = 0;
    let mut drift = 0.0;
    for &ts in times {
        let span = ts - t;
        if span > 0.0 {
            let n = (span / h_max).ceil().max(1.0) as usize;
            substeps = substeps.max(n);
            let h = span / n as f64;
            for i in 0..n {
                stepper.step(terms, params, t + i as f64 * h, h, &mut psi);
            }
            t = ts;
            drift = (psi.iter().map(|z| z.norm_sqr()).sum::<f64>() / norm0 - 1.0).abs();
            if !(drift <= budget) {
                return Err(if drift.is_nan() { f64::INFINITY } else { drift });
            }
        }
        if ts == 0.0 {
            energies_free.push(0.0);
            energies_internal.push(0.0);
        } else {
            energies_free.push(mean_diag(&psi, diag_free) - e0_free);
            energies_internal.push(mean_diag(&psi, diag_int) - e0_int);
        }
    }
    let state = StateVector::from_amplitudes(*terms.basis(), psi).expect("dimension preserved");
    Ok(GridRun {
        state,
        energies_free,
        energies_internal,
        drift,
        substeps,
    })
}

/// Undriven evolution is diagonal: exact phases, no stepping.
fn run_diagonal(terms: &HamiltonianTerms, psi0: &StateVector, times: &[f64], norm0: f64) -> GridRun {
    let d = terms.diag_internal();
    let (diag_free, diag_int) = (terms.diag_free(), terms.diag_internal());
    let amps = psi0.amplitudes();
    let e0_free = mean_diag(amps, diag_free);
    let e0_int = mean_diag(amps, diag_int);
    let mut psi = amps.to_vec();
    let mut energies_free = Vec::with_capacity(times.len());
    let mut energies_internal = Vec::with_capacity(times.len());
    for &t in times {
        for (p, (a, e)) in psi.iter_mut().zip(amps.iter().zip(d)) {
            *p = a * C64::from_polar(1.0, -e * t);
        }
        energies_free.push(mean_diag(&psi, diag_free) - e0_free);
        energies_internal.push(mean_diag(&psi, diag_int) - e0_int);
    }
    let drift = (psi.iter().map(|z| z.norm_sqr()).sum::<f64>() / norm0 - 1.0).abs();
    GridRun {
        state: StateVector::from_amplitudes(*terms.basis(), psi).expect("dimension preserved"),
        energies_free,
        energies_internal,
        drift,
        substeps: 0,
    }
}

fn mean_diag(psi: &[C64], diag: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, d) in psi.iter().zip(diag) {
        let p = a.norm_sqr();
        num += p * d;
        den += p;
    }
    num / den
}

/// Scratch buffers for one RK4 integration.
///
/// The diagonal is shifted by a constant, which only changes the global phase
/// and shrinks the spectral radius the step size has to resolve.
pub(crate) struct Rk4 {
    shift: f64,
    k: Vec<C64>,
    acc: Vec<C64>,
    stage: Vec<C64>,
}

#[inline]
fn times_minus_i(z: C64) -> C64 {
    C64::new(z.im, -z.re)
}

impl Rk4 {
    pub(crate) fn new(dim: usize, shift: f64) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self {
            shift,
            k: vec![zero; dim],
            acc: vec![zero; dim],
            stage: vec![zero; dim],
        }
    }

    /// One classical RK4 step of `ψ' = −i H(t) ψ`.
    pub(crate) fn step(
        &mut self,
        terms: &HamiltonianTerms,
        params: &BatteryParams,
        t: f64,
        h: f64,
        psi: &mut [C64],
    ) {
        let c0 = drive_coefficient(params, t);
        let c_mid = drive_coefficient(params, t + 0.5 * h);
        let c1 = drive_coefficient(params, t + h);

        // k1
        terms.apply_into(c0, self.shift, psi, &mut self.k);
        for ((acc, st), (k, p)) in self
            .acc
            .iter_mut()
            .zip(self.stage.iter_mut())
            .zip(self.k.iter().zip(psi.iter()))
        {
            let k = times_minus_i(*k);
            *acc = k;
            *st = p + k * (0.5 * h);
        }
        // k2
        terms.apply_into(c_mid, self.shift, &self.stage, &mut self.k);
        for ((acc, st), (k, p)) in self
            .acc
            .iter_mut()
            .zip(self.stage.iter_mut())
            .zip(self.k.iter().zip(psi.iter()))
        {
            let k = times_minus_i(*k);
            *acc += k * 2.0;
            *st = p + k * (0.5 * h);
        }
        // k3
        terms.apply_into(c_mid, self.shift, &self.stage, &mut self.k);
        for ((acc, st), (k, p)) in self
            .acc
            .iter_mut()
            .zip(self.stage.iter_mut())
            .zip(self.k.iter().zip(psi.iter()))
        {
            let k = times_minus_i(*k);
            *acc += k * 2.0;
            *st = p + k * h;
        }
        // k4
        terms.apply_into(c1, self.shift, &self.stage, &mut self.k);
        let w = h / 6.0;
        for ((p, acc), k) in psi.iter_mut().zip(&self.acc).zip(&self.k) {
            *p += (acc + times_minus_i(*k)) * w;
        }
    }
}

/// Stored energy over a grid of charging times.
///
/// Fixed frequency: one evolution at `params.omega` sampled at the grid.
/// Period locked: an independent evolution for every `T` with `ω = 2π/T`,
/// recording `E(T)`; the points run on a pool of `workers` threads and are
/// written back by index, so the result does not depend on scheduling.
pub fn charge_scan(
    params: &BatteryParams,
    t_grid: &[f64],
    protocol: Protocol,
    settings: &EvolveSettings,
    workers: usize,
) -> Result<TraceResult> {
    if t_grid.is_empty() {
        return Err(Error::TooFewPoints { need: 1, got: 0 });
    }
    if t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(
            "charging-time grid must be positive and strictly increasing".into(),
        ));
    }
    settings.validate()?;
    match protocol {
        Protocol::FixedFrequency => {
            let terms = HamiltonianTerms::new(params)?;
            let psi0 = StateVector::ground(*terms.basis());
            integrate_sampled(&terms, params, psi0, t_grid, settings, protocol)
        }
        Protocol::PeriodLocked => {
            let points: Vec<Result<TraceResult>> = run_indexed(workers, t_grid.len(), |i| {
                let t = t_grid[i];
                let mut p = *params;
                if p.drive == crate::Drive::Harmonic {
                    p.omega = std::f64::consts::TAU / t;
                }
                evolve(&p, t, settings)
            })?;
            let mut e_free = Vec::with_capacity(t_grid.len());
            let mut e_int = Vec::with_capacity(t_grid.len());
            let mut drift: f64 = 0.0;
            let mut substeps = 0;
            let mut last = None;
            for point in points {
                let tr = point?;
                e_free.push(*tr.energies_free.last().unwrap());
                e_int.push(*tr.energies_internal.last().unwrap());
                drift = drift.max(tr.norm_drift);
                substeps = substeps.max(tr.substeps);
                last = Some(tr.final_state);
            }
            Ok(TraceResult {
                times: t_grid.to_vec(),
                energies_free: e_free,
                energies_internal: e_int,
                reference: EnergyReference::for_params(params),
                norm_drift: drift,
                final_state: last.expect("non-empty grid"),
                protocol,
                substeps,
            })
        }
    }
}

/// Evaluate `f(0..n)` on a bounded pool; output order follows the index.
pub fn run_indexed<T, F>(workers: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let workers = workers.max(1);
    if workers == 1 {
        return Ok((0..n).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Invalid(format!("worker pool: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Drive;
    use approx::assert_abs_diff_eq;

    #[test]
    fn undriven_battery_stores_nothing() {
        for lambda in [-1.5, 0.0, 0.8] {
            let p = BatteryParams::harmonic(6, 0.0, 1.0)
                .with_lambda(lambda)
                .with_drive(Drive::Off);
            let tr = evolve(&p, 10.0, &EvolveSettings::default()).unwrap();
            assert!(tr.energies().iter().all(|&e| e.abs() < 1e-12));
            assert!(tr.norm_drift < 1e-12);
        }
    }

    #[test]
    fn drift_shrinks_at_fourth_order() {
        // Per-step norm loss ~ h⁶, so over a fixed span the drift scales as h⁵.
        let p = BatteryParams::harmonic(20, 1.0, 1.0).with_lambda(0.5);
        let terms = HamiltonianTerms::new(&p).unwrap();
        let psi0 = StateVector::ground(*terms.basis());
        let times = [0.0, 3.0];
        let drift = |h: f64| run_grid(&terms, &p, &psi0, &times, h, 1.0, 1.0).unwrap().drift;
        let ratio = drift(0.02) / drift(0.01);
        assert!((ratio / 32.0 - 1.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn first_sample_is_zero() {
        let p = BatteryParams::harmonic(3, 1.0, 1.3).with_lambda(0.4);
        let tr = evolve(&p, 2.0, &EvolveSettings::default()).unwrap();
        assert_eq!(tr.energies()[0], 0.0);
        assert_eq!(tr.times[0], 0.0);
        assert_abs_diff_eq!(*tr.times.last().unwrap(), 2.0);
    }

    #[test]
    fn static_single_atom_rabi() {
        let p = BatteryParams::static_drive(1, 1.0);
        let t = std::f64::consts::PI / std::f64::consts::SQRT_2;
        let tr = evolve(&p, t, &EvolveSettings::default()).unwrap();
        assert_abs_diff_eq!(*tr.energies().last().unwrap(), 0.5, epsilon = 1e-7);
    }

    #[test]
    fn fixed_scan_with_zero_amplitude() {
        let p = BatteryParams::harmonic(4, 0.0, 1.0);
        let grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.5).collect();
        let tr = charge_scan(&p, &grid, Protocol::FixedFrequency, &EvolveSettings::default(), 1).unwrap();
        assert!(tr.energies().iter().all(|&e| e == 0.0));
    }

    #[test]
    fn rejects_bad_grids() {
        let p = BatteryParams::harmonic(1, 1.0, 1.0);
        let s = EvolveSettings::default();
        assert!(charge_scan(&p, &[1.0, 1.0], Protocol::PeriodLocked, &s, 1).is_err());
        assert!(charge_scan(&p, &[0.0, 1.0], Protocol::PeriodLocked, &s, 1).is_err());
        assert!(evolve(&p, 0.0, &s).is_err());
        let bad = EvolveSettings {
            steps_per_cycle: 8,
            ..s
        };
        assert!(evolve(&p, 1.0, &bad).is_err());
    }

    #[test]
    fn refinement_exhaustion_reports_drift() {
        let p = BatteryParams::harmonic(2, 1.0, 1.0);
        let s = EvolveSettings {
            norm_drift_budget: 1e-30,
            max_refinements: 0,
            ..EvolveSettings::default()
        };
        match evolve(&p, 5.0, &s) {
            Err(Error::Accuracy { drift, .. }) => assert!(drift > 1e-30),
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn references_agree_without_coupling() {
        let p = BatteryParams::harmonic(5, 0.8, 0.9);
        let tr = evolve(&p, 6.0, &EvolveSettings::default()).unwrap();
        assert_eq!(tr.energies_free, tr.energies_internal);
    }

    #[test]
    fn pool_preserves_order() {
        let v = run_indexed(3, 50, |i| i * i).unwrap();
        assert_eq!(v, (0..50).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn protocol_names() {
        assert_eq!("locked".parse::<Protocol>().unwrap(), Protocol::PeriodLocked);
        assert_eq!("fixed".parse::<Protocol>().unwrap(), Protocol::FixedFrequency);
        assert!("other".parse::<Protocol>().is_err());
    }
}
