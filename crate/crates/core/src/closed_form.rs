//! Rotating-frame approximation for the harmonically driven battery.
//!
//! After the transformation `U = exp[i (A ξ/(ω√N)) sin(ωt) Sx]` and dropping
//! harmonics of order two and above, the counter-rotating coefficient
//! vanishes when `A(1 − ξ/√N) = 2Δ J₁(Aξ/(ω√N))`. The resulting
//! time-independent Hamiltonian `Δ̃ Sz + 2Ã Sx` has
//!
//! - `Δ̃ = Δ J₀(Aξ̄/(ω√N)) − ω`,
//! - `Ã = (A/2)(1 − ξ̄/√N)`,
//! - `Ω_R = √(Δ̃² + 4Ã²)`, `tan 2θ = 2Ã/Δ̃`.
//!
//! The single-atom formulas are only claimed for `N = 1`.

use std::f64::consts::{PI, TAU};

use crate::{Error, Result, C64};

/// Series is used up to this argument, Miller recurrence beyond.
const SERIES_LIMIT: f64 = 5.0;
/// Largest accepted `|x|`.
pub const BESSEL_MAX_ARG: f64 = 30.0;
/// Subintervals scanned for a sign change before bisection.
const SCAN_INTERVALS: usize = 64;

/// Bessel function of the first kind, orders 0 and 1.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    if order > 1 {
        return Err(Error::Domain(format!("Bessel order {order} not supported")));
    }
    if !x.is_finite() || x.abs() > BESSEL_MAX_ARG {
        return Err(Error::Domain(format!(
            "Bessel argument {x} outside |x| <= {BESSEL_MAX_ARG}"
        )));
    }
    let ax = x.abs();
    let value = if ax <= SERIES_LIMIT {
        bessel_series(order, ax)
    } else {
        bessel_miller(order, ax)
    };
    // J₁ is odd, J₀ even.
    Ok(if order == 1 && x < 0.0 { -value } else { value })
}

pub fn bessel_j0(x: f64) -> Result<f64> {
    bessel_j(0, x)
}

pub fn bessel_j1(x: f64) -> Result<f64> {
    bessel_j(1, x)
}

/// `Σ_k (−1)^k (x/2)^{2k+n} / (k! (k+n)!)`, stopped once a term falls below
/// `1e−16` of the partial sum.
fn bessel_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let n = order as f64;
    let mut term = if order == 0 { 1.0 } else { half };
    let mut sum = term;
    let mut k = 0.0;
    while k < 200.0 {
        k += 1.0;
        term *= -q / (k * (k + n));
        sum += term;
        if term.abs() <= 1e-16 * sum.abs() || term == 0.0 {
            break;
        }
    }
    sum
}

/// Backward recurrence normalized with `J₀ + 2Σ J₂ₖ = 1`.
fn bessel_miller(order: u32, x: f64) -> f64 {
    let start = 2 * ((x as usize + 40) / 2);
    let two_over_x = 2.0 / x;
    let (mut j_next, mut j_cur) = (0.0_f64, 1e-30_f64);
    let mut norm = 0.0;
    let mut j0 = 0.0;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        let j_prev = k as f64 * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{k-1}
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j_cur;
        }
        if k - 1 == 1 {
            j1 = j_cur;
        }
        if k - 1 == 0 {
            j0 = j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += j0;
    if order == 0 {
        j0 / norm
    } else {
        j1 / norm
    }
}

fn check_drive(amp: f64, omega: f64, n_atoms: usize, delta: f64) -> Result<()> {
    if !(amp >= 0.0 && amp.is_finite()) {
        return Err(Error::Invalid(format!("amplitude must be >= 0, got {amp}")));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Invalid(format!("omega must be > 0, got {omega}")));
    }
    if n_atoms == 0 {
        return Err(Error::Invalid("n_atoms must be at least 1".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::Invalid(format!("delta must be > 0, got {delta}")));
    }
    Ok(())
}

/// Residual of the counter-rotating cancellation condition at `ξ`.
pub fn xi_residual(xi: f64, amp: f64, omega: f64, n_atoms: usize, delta: f64) -> Result<f64> {
    let sqrt_n = (n_atoms as f64).sqrt();
    Ok(amp * (1.0 - xi / sqrt_n) - 2.0 * delta * bessel_j1(amp * xi / (omega * sqrt_n))?)
}

/// Self-consistent `ξ̄ ∈ [0, 1]`, the smallest root found by a 64-interval
/// scan followed by bisection to `1e−12`. `A = 0` gives `0`.
pub fn solve_xi(amp: f64, omega: f64, n_atoms: usize, delta: f64) -> Result<f64> {
    check_drive(amp, omega, n_atoms, delta)?;
    if amp == 0.0 {
        return Ok(0.0);
    }
    let f = |xi: f64| xi_residual(xi, amp, omega, n_atoms, delta);
    let f_lo = f(0.0)?;
    let mut lo = 0.0;
    let mut f_a = f_lo;
    for i in 1..=SCAN_INTERVALS {
        let hi = i as f64 / SCAN_INTERVALS as f64;
        let f_b = f(hi)?;
        if f_b == 0.0 {
            return Ok(hi);
        }
        if f_a.signum() != f_b.signum() {
            return bisect(f, lo, hi, f_a, 1e-12);
        }
        lo = hi;
        f_a = f_b;
    }
    Err(Error::RootNotBracketed {
        lo: 0.0,
        hi: 1.0,
        f_lo,
        f_hi: f_a,
    })
}

fn bisect(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut f_lo: f64, tol: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Rotating-frame quantities for one drive setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub amp: f64,
    pub omega: f64,
    pub n_atoms: usize,
    pub delta: f64,
    pub xi_bar: f64,
    /// `Δ̃`.
    pub delta_eff: f64,
    /// `Ã`.
    pub a_eff: f64,
    /// `Ω_R`.
    pub rabi: f64,
    /// Dressed-state angle, `θ ∈ (0, π/2)` for `Ã > 0`.
    pub theta: f64,
    /// Upper dressed eigenvalue `Ω_R/2`.
    pub eps_plus: f64,
}

pub fn effective_params(amp: f64, omega: f64, n_atoms: usize, delta: f64) -> Result<EffectiveParams> {
    let xi_bar = solve_xi(amp, omega, n_atoms, delta)?;
    let sqrt_n = (n_atoms as f64).sqrt();
    let delta_eff = delta * bessel_j0(amp * xi_bar / (omega * sqrt_n))? - omega;
    let a_eff = 0.5 * amp * (1.0 - xi_bar / sqrt_n);
    let rabi = delta_eff.hypot(2.0 * a_eff);
    Ok(EffectiveParams {
        amp,
        omega,
        n_atoms,
        delta,
        xi_bar,
        delta_eff,
        a_eff,
        rabi,
        theta: 0.5 * (2.0 * a_eff).atan2(delta_eff),
        eps_plus: 0.5 * rabi,
    })
}

/// Stored energy of one atom after time `t` in the rotating-frame solution,
/// `Δ·(2Ã²/Ω_R²)(1 − cos Ω_R t)`.
pub fn e1_analytic(t: f64, eff: &EffectiveParams, delta: f64) -> f64 {
    if eff.rabi == 0.0 {
        return 0.0;
    }
    let r = eff.a_eff / eff.rabi;
    delta * 2.0 * r * r * (1.0 - (eff.rabi * t).cos())
}

/// Amplitudes `(c_e, c_g)` of the single-atom state at time `t`.
pub fn amplitudes(t: f64, eff: &EffectiveParams) -> (C64, C64) {
    let (s, c) = (eff.eps_plus * t).sin_cos();
    if eff.rabi == 0.0 {
        return (C64::new(0.0, 0.0), C64::new(c, s));
    }
    let ce = C64::new(0.0, -2.0 * eff.a_eff / eff.rabi * s);
    let cg = C64::new(c, eff.delta_eff / eff.rabi * s);
    (ce, cg)
}

/// Period-locked single-atom energy: the formula evaluated at `t = 2π/ω`.
pub fn e1_locked(amp: f64, omega: f64, n_atoms: usize, delta: f64) -> Result<f64> {
    let eff = effective_params(amp, omega, n_atoms, delta)?;
    Ok(e1_analytic(TAU / omega, &eff, delta))
}

/// Unconstrained maximum of the single-atom energy and its optimal times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeOptimum {
    /// `Δ·4Ã²/(Δ̃² + 4Ã²)`.
    pub e_max: f64,
    pub rabi: f64,
}

impl ChargeOptimum {
    /// `nπ/Ω_R` for odd `n`.
    pub fn t_opt(&self, n: u32) -> Result<f64> {
        if n.is_multiple_of(2) {
            return Err(Error::Invalid(format!("optimal times need odd n, got {n}")));
        }
        Ok(n as f64 * PI / self.rabi)
    }

    /// `2Ω_R/n`, the drive frequency whose period is `t_opt(n)`.
    pub fn omega_opt(&self, n: u32) -> Result<f64> {
        Ok(TAU / self.t_opt(n)?)
    }
}

pub fn e1_max(eff: &EffectiveParams, delta: f64) -> Result<ChargeOptimum> {
    if eff.rabi == 0.0 {
        return Err(Error::Degenerate("Rabi frequency is zero".into()));
    }
    let four_a2 = 4.0 * eff.a_eff * eff.a_eff;
    Ok(ChargeOptimum {
        e_max: delta * four_a2 / (eff.delta_eff * eff.delta_eff + four_a2),
        rabi: eff.rabi,
    })
}

/// Drive frequency with `Δ̃ = 0`, searched on `(0.05Δ, Δ]`.
pub fn solve_fullcharge_omega(amp: f64, delta: f64, n_atoms: usize) -> Result<f64> {
    solve_fullcharge_omega_in(amp, delta, n_atoms, 0.05 * delta)
}

/// As [`solve_fullcharge_omega`] with an explicit lower end. The root
/// closest to `Δ` is returned (continuous with `A → 0`).
pub fn solve_fullcharge_omega_in(amp: f64, delta: f64, n_atoms: usize, omega_lo: f64) -> Result<f64> {
    check_drive(amp, delta, n_atoms, delta)?;
    if !(omega_lo > 0.0 && omega_lo < delta) {
        return Err(Error::Invalid(format!(
            "omega_lo must be in (0, delta), got {omega_lo}"
        )));
    }
    if amp == 0.0 {
        return Ok(delta);
    }
    // f(ω) = ω − Δ J₀(Aξ̄(ω)/(ω√N)) = −Δ̃(ω)
    let f = |omega: f64| -> Result<f64> { Ok(-effective_params(amp, omega, n_atoms, delta)?.delta_eff) };
    let f_hi = f(delta)?;
    if f_hi == 0.0 {
        return Ok(delta);
    }
    let step = (delta - omega_lo) / SCAN_INTERVALS as f64;
    let mut hi = delta;
    let mut f_b = f_hi;
    for i in 1..=SCAN_INTERVALS {
        let lo = delta - i as f64 * step;
        let f_a = match f(lo) {
            Ok(v) => v,
            Err(_) => break,
        };
        if f_a == 0.0 {
            return Ok(lo);
        }
        if f_a.signum() != f_b.signum() {
            let root = bisect(f, lo, hi, f_a, 0.0)?;
            return Ok(root);
        }
        hi = lo;
        f_b = f_a;
    }
    Err(Error::RootNotBracketed {
        lo: omega_lo,
        hi: delta,
        f_lo: f_b,
        f_hi,
    })
}

/// Static charger: `Δ·½ A²/(Δ²+A²) [1 − cos(√(Δ²+A²) t)]`.
pub fn static_energy(t: f64, amp: f64, delta: f64) -> f64 {
    let w2 = delta * delta + amp * amp;
    0.5 * delta * amp * amp / w2 * (1.0 - (w2.sqrt() * t).cos())
}

/// `Δ·A²/(Δ²+A²)`, strictly below `Δ` for finite `A`.
pub fn static_max(amp: f64, delta: f64) -> f64 {
    delta * amp * amp / (delta * delta + amp * amp)
}
