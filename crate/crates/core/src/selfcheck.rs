//! Fast invariant suite behind the `selfcheck` command.

use std::f64::consts::PI;

use crate::closed_form::{bessel_j, solve_xi, xi_residual, BESSEL_MAX_ARG};
use crate::model::{apply_hamiltonian, internal_energy, BatteryParams, HamiltonianTerms};
use crate::propagate::{evolve, EvolveSettings};
use crate::spin_algebra::{build_ops, DickeBasis, Observable, StateVector};
use crate::{Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SelfcheckOptions {
    /// Smaller sizes and grids.
    pub quick: bool,
    /// Added to every production Bessel value before comparison.
    pub perturb_bessel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error.
    pub worst: f64,
    pub tolerance: f64,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<22} worst {:.3e} (tolerance {:.0e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance
        )
    }
}

fn outcome(name: &'static str, worst: Result<f64>, tolerance: f64) -> CheckOutcome {
    let worst = worst.unwrap_or(f64::INFINITY);
    CheckOutcome {
        name,
        passed: worst <= tolerance,
        worst,
        tolerance,
    }
}

pub fn run(opts: SelfcheckOptions) -> Vec<CheckOutcome> {
    let sizes: &[usize] = if opts.quick {
        &[1, 2, 7, 40]
    } else {
        &[1, 2, 7, 40, 200, 600]
    };
    vec![
        outcome("su2-commutators", commutator_residual(sizes), 1e-12),
        outcome("bessel-oracle", bessel_error(opts), 1e-12),
        outcome("norm-drift", norm_drift(opts.quick), 1e-8),
        outcome("xi-residual", xi_residual_max(opts.quick), 1e-10),
        outcome("g-term-vanishing", g_term_residual(sizes), 1e-12),
    ]
}

/// `‖[Sa, Sb]ψ − i Sc ψ‖ / max(1, S(S+1))` over basis vectors, cyclic triples.
pub fn commutator_residual(sizes: &[usize]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &n in sizes {
        let basis = DickeBasis::new(n)?;
        let ops = build_ops(basis);
        let dim = basis.dim();
        let scale = ops.s_squared().max(1.0);
        let triples = [
            (Observable::Sx, Observable::Sy, Observable::Sz),
            (Observable::Sy, Observable::Sz, Observable::Sx),
            (Observable::Sz, Observable::Sx, Observable::Sy),
        ];
        let zero = vec![C64::new(0.0, 0.0); dim];
        let (mut t1, mut t2, mut ab, mut ba, mut c) = (
            zero.clone(),
            zero.clone(),
            zero.clone(),
            zero.clone(),
            zero.clone(),
        );
        for k in 0..dim {
            let mut e = zero.clone();
            e[k] = C64::new(1.0, 0.0);
            for &(a, b, cc) in &triples {
                ops.apply(b, &e, &mut t1)?;
                ops.apply(a, &t1, &mut ab)?;
                ops.apply(a, &e, &mut t2)?;
                ops.apply(b, &t2, &mut ba)?;
                ops.apply(cc, &e, &mut c)?;
                let r: f64 = (0..dim)
                    .map(|j| (ab[j] - ba[j] - C64::i() * c[j]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(r / scale);
            }
        }
    }
    Ok(worst)
}

/// `J_n(x) = (1/2π)∮ cos(nτ − x sin τ) dτ` by the trapezoid rule, which is
/// spectrally accurate for this periodic integrand.
pub fn bessel_quadrature(order: u32, x: f64) -> f64 {
    const NODES: usize = 256;
    let h = 2.0 * PI / NODES as f64;
    (0..NODES)
        .map(|j| {
            let tau = j as f64 * h;
            (order as f64 * tau - x * tau.sin()).cos()
        })
        .sum::<f64>()
        / NODES as f64
}

fn bessel_error(opts: SelfcheckOptions) -> Result<f64> {
    let points = if opts.quick { 301 } else { 3001 };
    let mut worst: f64 = 0.0;
    for order in [0, 1] {
        for i in 0..points {
            let x = -BESSEL_MAX_ARG + 2.0 * BESSEL_MAX_ARG * i as f64 / (points - 1) as f64;
            let got = bessel_j(order, x)? + opts.perturb_bessel;
            worst = worst.max((got - bessel_quadrature(order, x)).abs());
        }
    }
    Ok(worst)
}

fn norm_drift(quick: bool) -> Result<f64> {
    let cases: &[(usize, f64)] = if quick {
        &[(1, 1.0), (20, 0.5)]
    } else {
        &[(1, 1.0), (20, 0.5), (100, -1.2), (200, 1.2)]
    };
    let mut worst: f64 = 0.0;
    for &(n, lambda) in cases {
        let p = BatteryParams::harmonic(n, 1.0, 1.0).with_lambda(lambda);
        let tr = evolve(&p, 10.0, &EvolveSettings::for_atoms(n))?;
        worst = worst.max(tr.norm_drift);
    }
    Ok(worst)
}

fn xi_residual_max(quick: bool) -> Result<f64> {
    let steps = if quick { 6 } else { 20 };
    let mut worst: f64 = 0.0;
    for i in 0..steps {
        for j in 0..steps {
            let amp = 0.05 + 1.45 * i as f64 / (steps - 1) as f64;
            let omega = 0.3 + 1.2 * j as f64 / (steps - 1) as f64;
            let Ok(xi) = solve_xi(amp, omega, 1, 1.0) else {
                continue;
            };
            worst = worst.max(xi_residual(xi, amp, omega, 1, 1.0)?.abs());
        }
    }
    Ok(worst)
}

/// `H₀ᴵ|N/2, −N/2⟩ = −ΔN/2 |N/2, −N/2⟩` for any coupling.
fn g_term_residual(sizes: &[usize]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &n in sizes {
        for lambda in [-2.0, -1.2, -0.5, 0.5, 1.2, 3.0] {
            let p = BatteryParams::harmonic(n, 0.0, 1.0).with_lambda(lambda);
            let expect = -(n as f64) / 2.0;
            worst = worst.max((internal_energy(1.0, p.g, n, expect) - expect).abs());
            let terms = HamiltonianTerms::new(&p)?;
            let psi = StateVector::ground(*terms.basis());
            let h_psi = apply_hamiltonian(&terms, &p, 0.0, &psi)?;
            let r: f64 = h_psi
                .amplitudes()
                .iter()
                .zip(psi.amplitudes())
                .map(|(a, b)| (a - b * expect).norm())
                .fold(0.0, f64::max);
            worst = worst.max(r);
        }
    }
    Ok(worst)
}
