//! Spectrum of the interacting internal Hamiltonian and its mean-field limit.
//!
//! `H₀ᴵ` commutes with `Sz`, so its eigenvalues are the diagonal entries
//! `E(m)` in closed form; no diagonalization is needed.

use crate::model::{internal_energy, BatteryParams};
use crate::spin_algebra::{DickeBasis, Parity};
use crate::Result;

/// Critical attractive coupling `λc = g_c/Δ`.
pub const LAMBDA_C: f64 = -1.0;

/// `E(m)` for every `m`, ascending.
pub fn diagonal_spectrum(params: &BatteryParams) -> Result<Vec<f64>> {
    params.validate()?;
    let basis = DickeBasis::new(params.n_atoms)?;
    Ok(basis
        .m_values()
        .map(|m| internal_energy(params.delta, params.g, params.n_atoms, m))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateInfo {
    /// Minimizing `m`.
    pub m0: f64,
    pub e0: f64,
    /// Second-smallest level over all `m ≠ m0`, regardless of parity.
    pub e1: f64,
    pub gap: f64,
    /// `m0 / (N/2)`.
    pub sz_per_spin: f64,
    /// Parity of `N/2 − m0`.
    pub parity0: Parity,
    /// Another `m` reaches exactly `e0`; the smaller `m` was kept.
    pub tie: bool,
}

pub fn ground_state(params: &BatteryParams) -> Result<GroundStateInfo> {
    let levels = diagonal_spectrum(params)?;
    let basis = DickeBasis::new(params.n_atoms)?;
    let mut k0 = 0;
    for (k, &e) in levels.iter().enumerate() {
        if e < levels[k0] {
            k0 = k;
        }
    }
    let e0 = levels[k0];
    let mut e1 = f64::INFINITY;
    let mut tie = false;
    for (k, &e) in levels.iter().enumerate() {
        if k == k0 {
            continue;
        }
        if e == e0 {
            tie = true;
        }
        e1 = e1.min(e);
    }
    let m0 = basis.m(k0);
    Ok(GroundStateInfo {
        m0,
        e0,
        e1,
        gap: e1 - e0,
        sz_per_spin: m0 / basis.spin(),
        parity0: basis.parity(k0),
        tie,
    })
}

/// Thermodynamic-limit polarization from the shifted Holstein–Primakoff boson.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldResult {
    pub lambda: f64,
    /// `β²/N = (λ + 1)/(2λ)` in the broken phase `λ < λc`; `None` otherwise
    /// (including `λ = 0`, where it is undefined).
    pub beta_sq_per_atom: Option<f64>,
    /// `⟨Sz⟩/(N/2)` as `N → ∞`.
    pub sz_per_spin_inf: f64,
    pub lambda_c: f64,
}

impl MeanFieldResult {
    /// `β² = N(g + Δ)/(2g)` for `N` atoms.
    pub fn beta_sq(&self, n_atoms: usize) -> Option<f64> {
        self.beta_sq_per_atom.map(|b| b * n_atoms as f64)
    }
}

/// Polarized branch `−1` for `λ ≥ −1`, `1/λ` below.
pub fn hp_polarization(lambda: f64) -> MeanFieldResult {
    let broken = lambda < LAMBDA_C;
    MeanFieldResult {
        lambda,
        beta_sq_per_atom: broken.then(|| (lambda + 1.0) / (2.0 * lambda)),
        sz_per_spin_inf: if broken { 1.0 / lambda } else { -1.0 },
        lambda_c: LAMBDA_C,
    }
}
