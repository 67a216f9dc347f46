//! Single-atom battery under a harmonic drive: numerical stored energy
//! against the rotating-frame closed form, period-locked (`ω = 2π/T`).
//!
//! cargo run --release --example single_atom_trace -- 1.0

use std::f64::consts::TAU;

use dicke_battery::closed_form::e1_locked;
use dicke_battery::propagate::{charge_scan, EvolveSettings, Protocol};
use dicke_battery::sweep::{find_first_peak, GridSpec};
use dicke_battery::BatteryParams;

fn main() -> dicke_battery::Result<()> {
    let amp: f64 = std::env::args()
        .nth(1)
        .map_or(1.0, |a| a.parse().expect("amplitude"));
    let params = BatteryParams::harmonic(1, amp, 1.0);
    let times = GridSpec::new(0.5, 30.0, 400).values();

    let trace = charge_scan(
        &params,
        &times,
        Protocol::PeriodLocked,
        &EvolveSettings::default(),
        1,
    )?;
    let numeric = trace.energies();

    println!("{:>8} {:>10} {:>10}", "T", "numeric", "analytic");
    let mut worst: f64 = 0.0;
    for (i, (t, e)) in times.iter().zip(numeric).enumerate() {
        let a = e1_locked(amp, TAU / t, 1, 1.0).unwrap_or(f64::NAN);
        if a.is_finite() {
            worst = worst.max((e - a).abs());
        }
        if i % 20 == 0 {
            println!("{t:8.3} {e:10.6} {a:10.6}");
        }
    }
    let peak = find_first_peak(&times, numeric)?;
    println!("first peak: E = {:.4} at T = {:.3}", peak.e_max, peak.t_max);
    println!("largest numeric/analytic gap: {worst:.4}");
    println!("norm drift: {:.2e}", trace.norm_drift);
    Ok(())
}
