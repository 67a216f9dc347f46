//! Optimum location and parameter sweeps.
//!
//! `(T_max, E_max)` is the first interior local maximum of the stored
//! energy as a function of charging time, refined by a three-point parabola.
//! The global maximum is kept alongside for diagnostics.

use std::f64::consts::TAU;

use crate::closed_form;
use crate::model::{BatteryParams, Drive};
use crate::propagate::{charge_scan, run_indexed, EvolveSettings, Protocol, TraceResult};
use crate::{Error, Result};

/// Evenly spaced grid `lo..=hi` with `points` entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        Self { lo, hi, points }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::Invalid(format!("bad grid {self}")));
        }
        if self.points > 1 && self.hi <= self.lo {
            return Err(Error::Invalid(format!(
                "grid upper end must exceed lower end: {self}"
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.hi
                } else {
                    self.lo + i as f64 * step
                }
            })
            .collect()
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.points)
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Invalid(format!("expected lo:hi:points, got `{s}`")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("bad number `{p}` in `{s}`")))
        };
        let points = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Invalid(format!("bad point count in `{s}`")))?;
        let g = GridSpec::new(num(parts[0])?, num(parts[1])?, points);
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakResult {
    pub t_max: f64,
    pub e_max: f64,
    /// Grid index of the peak sample.
    pub index: usize,
    /// False when no interior local maximum exists and the global maximum
    /// was returned instead.
    pub interior: bool,
    pub global_t: f64,
    pub global_e: f64,
}

/// Local maxima below this fraction of the global maximum are treated as
/// numerical ripple and skipped.
pub const PEAK_FLOOR: f64 = 0.1;

/// First `k` with `e[k−1] < e[k] ≥ e[k+1]` and `e[k] ≥ PEAK_FLOOR·max e`,
/// parabola-refined.
pub fn find_first_peak(t: &[f64], e: &[f64]) -> Result<PeakResult> {
    if t.len() < 5 {
        return Err(Error::TooFewPoints {
            need: 5,
            got: t.len(),
        });
    }
    if t.len() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            got: e.len(),
        });
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(
            "peak search grid must be strictly increasing".into(),
        ));
    }
    let (gi, _) = e.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
    );
    let (global_t, global_e) = (t[gi], e[gi]);

    let floor = PEAK_FLOOR * global_e;
    let k = (1..e.len() - 1).find(|&k| e[k - 1] < e[k] && e[k] >= e[k + 1] && e[k] > 0.0 && e[k] >= floor);
    let Some(k) = k else {
        return Ok(PeakResult {
            t_max: global_t,
            e_max: global_e,
            index: gi,
            interior: false,
            global_t,
            global_e,
        });
    };
    let (t_max, e_max) = if e[k] == e[k + 1] {
        (t[k], e[k])
    } else {
        parabola_vertex([t[k - 1], t[k], t[k + 1]], [e[k - 1], e[k], e[k + 1]])
    };
    Ok(PeakResult {
        t_max,
        e_max,
        index: k,
        interior: true,
        global_t,
        global_e,
    })
}

/// Vertex of the parabola through three points, clamped to their span.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (a, b) = (x[1] - x[0], x[1] - x[2]);
    let (fa, fb) = (y[1] - y[2], y[1] - y[0]);
    let den = a * fa - b * fb;
    if den == 0.0 {
        return (x[1], y[1]);
    }
    let xv = (x[1] - 0.5 * (a * a * fa - b * b * fb) / den).clamp(x[0], x[2]);
    // Lagrange form evaluated at the vertex.
    let l0 = (xv - x[1]) * (xv - x[2]) / ((x[0] - x[1]) * (x[0] - x[2]));
    let l1 = (xv - x[0]) * (xv - x[2]) / ((x[1] - x[0]) * (x[1] - x[2]));
    let l2 = (xv - x[0]) * (xv - x[1]) / ((x[2] - x[0]) * (x[2] - x[1]));
    let yv = l0 * y[0] + l1 * y[1] + l2 * y[2];
    (xv, yv.max(y[1]))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(loglog_fit(x, y)?.0)
}

/// `(slope, rms residual)` of the log-log fit.
fn loglog_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewPoints {
            need: 2,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("log-log fit needs strictly positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all x values coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rms = (lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok((slope, rms))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub rms_residual: f64,
    /// Smallest-`x` points excluded by the drop rule.
    pub dropped: usize,
}

/// Log-log fit that drops the smallest `x` (up to three times, keeping at
/// least four points) while each drop at least halves the rms residual.
pub fn loglog_slope_trimmed(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    let (mut slope, mut rms) = loglog_fit(x, y)?;
    let mut dropped = 0;
    while dropped < 3 && x.len() - dropped > 4 {
        let (s, r) = loglog_fit(&x[dropped + 1..], &y[dropped + 1..])?;
        if r < 0.5 * rms {
            dropped += 1;
            slope = s;
            rms = r;
        } else {
            break;
        }
    }
    Ok(SlopeFit {
        slope,
        rms_residual: rms,
        dropped,
    })
}

/// One stored-energy curve over charging time and its optimum.
#[derive(Debug, Clone)]
pub struct PeriodScan {
    pub trace: TraceResult,
    /// `E(T)/N` in units of `Δ`.
    pub e_per_atom: Vec<f64>,
    pub peak: PeakResult,
}

pub fn scan_period(
    params: &BatteryParams,
    t_grid: GridSpec,
    protocol: Protocol,
    settings: &EvolveSettings,
    workers: usize,
) -> Result<PeriodScan> {
    t_grid.validate()?;
    let times = t_grid.values();
    let trace = charge_scan(params, &times, protocol, settings, workers)?;
    let e_per_atom = trace.energies_per_atom();
    let peak = find_first_peak(&times, &e_per_atom)?;
    Ok(PeriodScan {
        trace,
        e_per_atom,
        peak,
    })
}

/// Optima of a family of period scans.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub axis_name: String,
    pub axis: Vec<f64>,
    /// First-peak energy per atom, units of `NΔ`.
    pub e_max: Vec<f64>,
    pub t_max: Vec<f64>,
    /// `2π/t_max`.
    pub omega_max: Vec<f64>,
    pub global_e_max: Vec<f64>,
    pub global_t_max: Vec<f64>,
    pub interior: Vec<bool>,
    /// Parameter snapshot, protocol and grid.
    pub metadata: Vec<(String, String)>,
}

impl ScanResult {
    fn new(axis_name: &str, base: &BatteryParams, protocol: Protocol, t_grid: GridSpec) -> Self {
        let metadata = vec![
            ("delta".into(), base.delta.to_string()),
            ("amp".into(), base.amp.to_string()),
            ("omega".into(), base.omega.to_string()),
            ("lambda".into(), base.lambda().to_string()),
            ("n_atoms".into(), base.n_atoms.to_string()),
            ("drive".into(), base.drive.as_str().into()),
            ("protocol".into(), protocol.as_str().into()),
            ("t_range".into(), t_grid.to_string()),
            (
                "peak_rule".into(),
                "first interior local maximum, parabolic refinement".into(),
            ),
        ];
        Self {
            axis_name: axis_name.into(),
            axis: Vec::new(),
            e_max: Vec::new(),
            t_max: Vec::new(),
            omega_max: Vec::new(),
            global_e_max: Vec::new(),
            global_t_max: Vec::new(),
            interior: Vec::new(),
            metadata,
        }
    }

    fn push(&mut self, x: f64, peak: &PeakResult) {
        self.axis.push(x);
        self.e_max.push(peak.e_max);
        self.t_max.push(peak.t_max);
        self.omega_max.push(TAU / peak.t_max);
        self.global_e_max.push(peak.global_e);
        self.global_t_max.push(peak.global_t);
        self.interior.push(peak.interior);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomSweep {
    pub scan: ScanResult,
    /// Fit of `ln E_max` (total, not per atom) against `ln N`.
    pub slope: SlopeFit,
    /// Fit of `ln(E_max/N)` against `ln N`.
    pub slope_per_atom: SlopeFit,
}

/// First-peak optimum for each atom number; `base.g` carries `λ`.
pub fn sweep_atoms(
    base: &BatteryParams,
    n_list: &[usize],
    t_grid: GridSpec,
    protocol: Protocol,
    settings: Option<EvolveSettings>,
    workers: usize,
) -> Result<AtomSweep> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("atom numbers must be strictly ascending".into()));
    }
    let mut scan = ScanResult::new("N", base, protocol, t_grid);
    for &n in n_list {
        let params = BatteryParams { n_atoms: n, ..*base };
        let s = settings.unwrap_or_else(|| EvolveSettings::for_atoms(n));
        let row = scan_period(&params, t_grid, protocol, &s, workers)?;
        scan.push(n as f64, &row.peak);
    }
    let total: Vec<f64> = scan.axis.iter().zip(&scan.e_max).map(|(n, e)| n * e).collect();
    let slope = loglog_slope_trimmed(&scan.axis, &total)?;
    let slope_per_atom = loglog_slope_trimmed(&scan.axis, &scan.e_max)?;
    scan.metadata
        .push(("loglog_slope".into(), format!("{:.17e}", slope.slope)));
    scan.metadata
        .push(("loglog_slope_dropped".into(), slope.dropped.to_string()));
    scan.metadata.push((
        "loglog_slope_per_atom".into(),
        format!("{:.17e}", slope_per_atom.slope),
    ));
    scan.metadata.push((
        "slope_rule".into(),
        "drop smallest N while rms residual halves, max 3".into(),
    ));
    Ok(AtomSweep {
        scan,
        slope,
        slope_per_atom,
    })
}

/// First-peak optimum for each coupling `λ`.
pub fn sweep_lambda(
    base: &BatteryParams,
    lambdas: &[f64],
    t_grid: GridSpec,
    protocol: Protocol,
    settings: &EvolveSettings,
    workers: usize,
) -> Result<ScanResult> {
    let mut scan = ScanResult::new("lambda", base, protocol, t_grid);
    for &lambda in lambdas {
        let params = base.with_lambda(lambda);
        let row = scan_period(&params, t_grid, protocol, settings, workers)?;
        scan.push(lambda, &row.peak);
    }
    Ok(scan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceMode {
    /// Closed form at `t = 2π/ω` (single atom).
    AnalyticLocked,
    /// Period-locked numerical evolution per cell.
    Numeric,
}

impl std::str::FromStr for SurfaceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" | "analytic_locked" => Ok(SurfaceMode::AnalyticLocked),
            "numeric" => Ok(SurfaceMode::Numeric),
            other => Err(Error::Invalid(format!("unknown surface mode `{other}`"))),
        }
    }
}

/// Stored energy over the amplitude–frequency plane and its ridge.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub amps: Vec<f64>,
    pub omegas: Vec<f64>,
    /// Row-major by amplitude; `None` marks a failed closed-form cell.
    pub values: Vec<Option<f64>>,
    /// `ω_max(A)`: argmax over the grid for each amplitude.
    pub ridge_omega: Vec<Option<f64>>,
    pub ridge_value: Vec<Option<f64>>,
    pub missing: usize,
}

impl Surface {
    pub fn value(&self, ia: usize, iw: usize) -> Option<f64> {
        self.values[ia * self.omegas.len() + iw]
    }
}

pub fn grid_amp_freq(
    a_grid: GridSpec,
    omega_grid: GridSpec,
    n_atoms: usize,
    mode: SurfaceMode,
    settings: &EvolveSettings,
    workers: usize,
) -> Result<Surface> {
    a_grid.validate()?;
    omega_grid.validate()?;
    if mode == SurfaceMode::AnalyticLocked && n_atoms != 1 {
        return Err(Error::Invalid(
            "the analytic surface is defined for a single atom".into(),
        ));
    }
    if omega_grid.lo <= 0.0 || a_grid.lo < 0.0 {
        return Err(Error::Invalid("surface needs omega > 0 and A >= 0".into()));
    }
    let amps = a_grid.values();
    let omegas = omega_grid.values();
    let n_w = omegas.len();
    let cells: Vec<Result<Option<f64>>> = run_indexed(workers, amps.len() * n_w, |i| {
        let (amp, omega) = (amps[i / n_w], omegas[i % n_w]);
        match mode {
            SurfaceMode::AnalyticLocked => Ok(closed_form::e1_locked(amp, omega, 1, 1.0).ok()),
            SurfaceMode::Numeric => {
                let p = BatteryParams {
                    drive: Drive::Harmonic,
                    ..BatteryParams::harmonic(n_atoms, amp, omega)
                };
                let t = TAU / omega;
                let tr = crate::propagate::evolve(&p, t, settings)?;
                Ok(Some(
                    tr.energies().last().copied().unwrap_or(0.0) / n_atoms as f64,
                ))
            }
        }
    })?;
    let values = cells.into_iter().collect::<Result<Vec<_>>>()?;
    let missing = values.iter().filter(|v| v.is_none()).count();
    let mut ridge_omega = Vec::with_capacity(amps.len());
    let mut ridge_value = Vec::with_capacity(amps.len());
    for row in values.chunks(n_w) {
        let best = row
            .iter()
            .enumerate()
            .filter_map(|(j, v)| v.map(|v| (j, v)))
            .fold(None, |acc: Option<(usize, f64)>, (j, v)| match acc {
                Some((_, bv)) if bv >= v => acc,
                _ => Some((j, v)),
            });
        ridge_omega.push(best.map(|(j, _)| omegas[j]));
        ridge_value.push(best.map(|(_, v)| v));
    }
    Ok(Surface {
        amps,
        omegas,
        values,
        ridge_omega,
        ridge_value,
        missing,
    })
}

/// Indices `i` where `|ω(i+1) − ω(i)|` exceeds `factor` times the median
/// adjacent change of the ridge.
pub fn ridge_jumps(surface: &Surface, factor: f64) -> Vec<usize> {
    let diffs: Vec<(usize, f64)> = surface
        .ridge_omega
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| match (w[0], w[1]) {
            (Some(a), Some(b)) => Some((i, (b - a).abs())),
            _ => None,
        })
        .collect();
    if diffs.is_empty() {
        return Vec::new();
    }
    let mut sorted: Vec<f64> = diffs.iter().map(|d| d.1).collect();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    };
    diffs
        .into_iter()
        .filter(|&(_, d)| d > factor * median)
        .map(|(i, _)| i)
        .collect()
}
