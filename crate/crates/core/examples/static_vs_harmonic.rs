//! A static field can store at most `A²/(Δ² + A²)`; a resonant harmonic
//! drive charges the atom almost completely.

use std::f64::consts::PI;

use dicke_battery::closed_form::{static_energy, static_max};
use dicke_battery::propagate::{charge_scan, EvolveSettings, Protocol};
use dicke_battery::sweep::{scan_period, GridSpec};
use dicke_battery::BatteryParams;

fn main() -> dicke_battery::Result<()> {
    let settings = EvolveSettings::default();

    for amp in [0.5, 1.0, 2.0] {
        let p = BatteryParams::static_drive(1, amp);
        let times = GridSpec::new(0.05, 10.0, 200).values();
        let tr = charge_scan(&p, &times, Protocol::FixedFrequency, &settings, 1)?;
        let err = times
            .iter()
            .zip(tr.energies())
            .map(|(t, e)| (e - static_energy(*t, amp, 1.0)).abs())
            .fold(0.0, f64::max);
        let best = tr.energies().iter().copied().fold(0.0, f64::max);
        println!(
            "static A={amp}: max stored {best:.6} (bound {:.6}), max error {err:.1e}",
            static_max(amp, 1.0)
        );
    }
    let t = PI / 2f64.sqrt();
    println!("static A=1 at T=pi/sqrt2: {:.6}", static_energy(t, 1.0, 1.0));

    let harmonic = BatteryParams::harmonic(1, 1.0, 1.0);
    let scan = scan_period(
        &harmonic,
        GridSpec::new(0.5, 30.0, 400),
        Protocol::PeriodLocked,
        &settings,
        1,
    )?;
    println!(
        "harmonic A=1: first peak {:.4} at T = {:.3}",
        scan.peak.e_max, scan.peak.t_max
    );
    Ok(())
}
