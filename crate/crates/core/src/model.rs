//! Battery Hamiltonians.
//!
//! `H(t) = H₀ᴵ + c(t)·Sx` with the interacting internal energy
//! `H₀ᴵ = Δ Sz + (g/N)(S² − Sz² − N/2)`, diagonal in `m`. The drive
//! coefficient `c(t)` is `A cos ωt` (harmonic), `A` (static) or `0`.

use crate::spin_algebra::{build_ops, check_dim, CollectiveOps, DickeBasis, StateVector};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Drive {
    Harmonic,
    Static,
    Off,
}

impl Drive {
    pub fn as_str(&self) -> &'static str {
        match self {
            Drive::Harmonic => "harmonic",
            Drive::Static => "static",
            Drive::Off => "off",
        }
    }
}

impl std::str::FromStr for Drive {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "harmonic" => Ok(Drive::Harmonic),
            "static" => Ok(Drive::Static),
            "off" => Ok(Drive::Off),
            other => Err(Error::Invalid(format!("unknown drive `{other}`"))),
        }
    }
}

/// Physical configuration of a battery and its charger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryParams {
    /// Level splitting `Δ`.
    pub delta: f64,
    /// Drive amplitude `A`.
    pub amp: f64,
    /// Drive angular frequency `ω` (ignored unless harmonic).
    pub omega: f64,
    /// Atom–atom coupling `g`; the dimensionless `λ = g/Δ` is derived.
    pub g: f64,
    pub n_atoms: usize,
    pub drive: Drive,
}

impl BatteryParams {
    /// Harmonically driven battery with `Δ = 1` and no interactions.
    pub fn harmonic(n_atoms: usize, amp: f64, omega: f64) -> Self {
        Self {
            delta: 1.0,
            amp,
            omega,
            g: 0.0,
            n_atoms,
            drive: Drive::Harmonic,
        }
    }

    /// Static charger `A·Sx` with `Δ = 1`.
    pub fn static_drive(n_atoms: usize, amp: f64) -> Self {
        Self {
            drive: Drive::Static,
            ..Self::harmonic(n_atoms, amp, 1.0)
        }
    }

    /// Sets `g = λ·Δ`.
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.g = lambda * self.delta;
        self
    }

    pub fn with_drive(mut self, drive: Drive) -> Self {
        self.drive = drive;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.g / self.delta
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Invalid(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.n_atoms == 0 {
            return Err(Error::Invalid("n_atoms must be at least 1".into()));
        }
        if !self.amp.is_finite() || !self.g.is_finite() {
            return Err(Error::Invalid("amp and g must be finite".into()));
        }
        if self.drive == Drive::Harmonic && !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::Invalid(format!(
                "harmonic drive needs omega > 0, got {}",
                self.omega
            )));
        }
        Ok(())
    }

    /// Drive period `2π/ω`, or `2π/Δ` when the drive is not harmonic.
    pub fn period(&self) -> f64 {
        match self.drive {
            Drive::Harmonic => std::f64::consts::TAU / self.omega,
            _ => std::f64::consts::TAU / self.delta,
        }
    }
}

/// Time-dependent factor multiplying `Sx`.
pub fn drive_coefficient(params: &BatteryParams, t: f64) -> f64 {
    match params.drive {
        Drive::Harmonic => params.amp * (params.omega * t).cos(),
        Drive::Static => params.amp,
        Drive::Off => 0.0,
    }
}

/// Which internal Hamiltonian defines the stored energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyReference {
    /// `H₀ = Δ Sz`.
    Free,
    /// `H₀ᴵ`, including the atom–atom term.
    Internal,
}

impl EnergyReference {
    /// Free reference for `g = 0`, internal otherwise.
    pub fn for_params(params: &BatteryParams) -> Self {
        if params.g == 0.0 {
            EnergyReference::Free
        } else {
            EnergyReference::Internal
        }
    }
}

/// `E_int(m) = Δm + (g/N)(S(S+1) − m² − N/2)`.
pub fn internal_energy(delta: f64, g: f64, n_atoms: usize, m: f64) -> f64 {
    let n = n_atoms as f64;
    let s = n / 2.0;
    delta * m + (g / n) * (s * (s + 1.0) - m * m - n / 2.0)
}

/// Precomputed diagonals and the drive band for one parameter set.
#[derive(Debug, Clone)]
pub struct HamiltonianTerms {
    ops: CollectiveOps,
    diag_free: Vec<f64>,
    diag_internal: Vec<f64>,
}

impl HamiltonianTerms {
    pub fn new(params: &BatteryParams) -> Result<Self> {
        params.validate()?;
        let basis = DickeBasis::new(params.n_atoms)?;
        let ops = build_ops(basis);
        let diag_free = ops.sz_diag().iter().map(|m| params.delta * m).collect();
        let diag_internal = if params.g == 0.0 {
            // Identical to the free term; skip the arithmetic so equality is exact.
            ops.sz_diag().iter().map(|m| params.delta * m).collect()
        } else {
            ops.sz_diag()
                .iter()
                .map(|&m| internal_energy(params.delta, params.g, params.n_atoms, m))
                .collect()
        };
        Ok(Self {
            ops,
            diag_free,
            diag_internal,
        })
    }

    pub fn ops(&self) -> &CollectiveOps {
        &self.ops
    }

    pub fn basis(&self) -> &DickeBasis {
        self.ops.basis()
    }

    pub fn diag_free(&self) -> &[f64] {
        &self.diag_free
    }

    pub fn diag_internal(&self) -> &[f64] {
        &self.diag_internal
    }

    /// The drive couples through `Sx`; the time dependence is a scalar factor.
    pub fn drive_band(&self) -> &[f64] {
        self.ops.sx_band()
    }

    pub fn diag(&self, reference: EnergyReference) -> &[f64] {
        match reference {
            EnergyReference::Free => &self.diag_free,
            EnergyReference::Internal => &self.diag_internal,
        }
    }

    /// Midpoint of the diagonal's range.
    pub(crate) fn diag_center(&self) -> f64 {
        let (lo, hi) = self
            .diag_internal
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| {
                (lo.min(d), hi.max(d))
            });
        0.5 * (lo + hi)
    }

    /// `out = (diag_internal − shift + c·Sx)·psi` in one banded pass.
    #[inline]
    pub(crate) fn apply_into(&self, coeff: f64, shift: f64, psi: &[C64], out: &mut [C64]) {
        let d = &self.diag_internal;
        let b = self.ops.sx_band();
        let dim = psi.len();
        if dim == 1 {
            out[0] = psi[0] * (d[0] - shift);
            return;
        }
        out[0] = psi[0] * (d[0] - shift) + psi[1] * (coeff * b[0]);
        for k in 1..dim - 1 {
            out[k] = psi[k] * (d[k] - shift) + (psi[k - 1] * b[k - 1] + psi[k + 1] * b[k]) * coeff;
        }
        out[dim - 1] = psi[dim - 1] * (d[dim - 1] - shift) + psi[dim - 2] * (coeff * b[dim - 2]);
    }
}

/// `H(t)·ψ`.
///
/// The diagonal is `diag_internal`, which equals `diag_free` when `g = 0`.
pub fn apply_hamiltonian(
    terms: &HamiltonianTerms,
    params: &BatteryParams,
    t: f64,
    psi: &StateVector,
) -> Result<StateVector> {
    check_dim(terms.basis().dim(), psi.amplitudes().len())?;
    let mut out = vec![C64::new(0.0, 0.0); psi.amplitudes().len()];
    terms.apply_into(drive_coefficient(params, t), 0.0, psi.amplitudes(), &mut out);
    StateVector::from_amplitudes(*terms.basis(), out)
}

/// `⟨ψ|H_ref|ψ⟩ / ⟨ψ|ψ⟩` for the chosen diagonal reference.
pub fn internal_energy_of_state(
    terms: &HamiltonianTerms,
    psi: &StateVector,
    reference: EnergyReference,
) -> Result<f64> {
    terms
        .ops()
        .expectation(crate::Observable::Diagonal(terms.diag(reference)), psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    #[test]
    fn drive_coefficients() {
        let p = BatteryParams::harmonic(1, 1.0, TAU);
        assert_eq!(drive_coefficient(&p, 0.0), 1.0);
        assert_abs_diff_eq!(drive_coefficient(&p, 0.25), 0.0, epsilon = 1e-15);
        let s = BatteryParams::static_drive(3, 0.7);
        assert_eq!(drive_coefficient(&s, 0.0), 0.7);
        assert_eq!(drive_coefficient(&s, 12.3), 0.7);
        assert_eq!(drive_coefficient(&p.with_drive(Drive::Off), 0.3), 0.0);
    }

    #[test]
    fn validation() {
        assert!(BatteryParams::harmonic(1, 1.0, 0.0).validate().is_err());
        assert!(BatteryParams::static_drive(1, 1.0)
            .with_drive(Drive::Static)
            .validate()
            .is_ok());
        let mut p = BatteryParams::harmonic(2, 1.0, 1.0);
        p.delta = 0.0;
        assert!(p.validate().is_err());
        p.delta = 1.0;
        p.n_atoms = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn lambda_is_derived() {
        let mut p = BatteryParams::harmonic(4, 1.0, 1.0);
        p.delta = 2.0;
        let p = p.with_lambda(-0.6);
        assert_eq!(p.g, -1.2);
        assert_eq!(p.lambda(), -0.6);
    }

    #[test]
    fn free_diagonal_action() {
        let p = BatteryParams::harmonic(4, 0.0, 1.0);
        let terms = HamiltonianTerms::new(&p).unwrap();
        let b = *terms.basis();
        for k in 0..b.dim() {
            let psi = StateVector::basis_state(b, b.m(k)).unwrap();
            let h = apply_hamiltonian(&terms, &p, 0.3, &psi).unwrap();
            assert_eq!(h.amplitudes()[k], C64::new(b.m(k), 0.0));
        }
    }

    #[test]
    fn single_atom_matrix() {
        let p = BatteryParams::harmonic(1, 1.0, 1.0);
        let terms = HamiltonianTerms::new(&p).unwrap();
        let g = StateVector::ground(*terms.basis());
        let h = apply_hamiltonian(&terms, &p, 0.0, &g).unwrap();
        assert_eq!(h.amplitudes(), &[C64::new(-0.5, 0.0), C64::new(0.5, 0.0)]);
    }

    #[test]
    fn interaction_vanishes_on_all_ground() {
        for lambda in [-2.0, -1.2, 0.0, 0.5, 1.7] {
            for n in [1, 2, 7, 200] {
                let p = BatteryParams::harmonic(n, 0.0, 1.0).with_lambda(lambda);
                let terms = HamiltonianTerms::new(&p).unwrap();
                let g = StateVector::ground(*terms.basis());
                let h = apply_hamiltonian(&terms, &p, 0.0, &g).unwrap();
                assert_abs_diff_eq!(h.amplitudes()[0].re, -(n as f64) / 2.0, epsilon = 1e-12);
                let e = internal_energy_of_state(&terms, &g, EnergyReference::Internal).unwrap();
                assert_abs_diff_eq!(e, -(n as f64) / 2.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn internal_energy_values() {
        let p = BatteryParams::harmonic(200, 1.0, 1.0).with_lambda(-1.2);
        let terms = HamiltonianTerms::new(&p).unwrap();
        let psi = StateVector::basis_state(*terms.basis(), -83.0).unwrap();
        let e = internal_energy_of_state(&terms, &psi, EnergyReference::Internal).unwrap();
        // -83 - 0.006 * (10100 - 6889 - 100)
        assert_abs_diff_eq!(e, -101.666, epsilon = 1e-9);

        let top = StateVector::basis_state(*terms.basis(), 100.0).unwrap();
        let e = internal_energy_of_state(&terms, &top, EnergyReference::Free).unwrap();
        assert_eq!(e, 100.0);
    }

    #[test]
    fn zero_coupling_diagonals_coincide() {
        let p = BatteryParams::harmonic(9, 1.0, 1.0);
        let terms = HamiltonianTerms::new(&p).unwrap();
        assert_eq!(terms.diag_free(), terms.diag_internal());
    }

    #[test]
    fn internal_energy_is_quadratic() {
        // Constant second difference -2g/N.
        let (g, n) = (0.8, 30);
        let e: Vec<f64> = (0..=n)
            .map(|k| internal_energy(1.0, g, n, k as f64 - n as f64 / 2.0))
            .collect();
        for w in e.windows(3) {
            assert_abs_diff_eq!(w[0] - 2.0 * w[1] + w[2], -2.0 * g / n as f64, epsilon = 1e-12);
        }
    }
}
