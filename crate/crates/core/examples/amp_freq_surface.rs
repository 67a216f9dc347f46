//! Period-locked stored energy over the amplitude–frequency plane and the
//! ridge of optimal frequencies, including its jump near `A ≈ 1.2`.

use dicke_battery::propagate::EvolveSettings;
use dicke_battery::sweep::{grid_amp_freq, ridge_jumps, GridSpec, SurfaceMode};

fn main() -> dicke_battery::Result<()> {
    let s = grid_amp_freq(
        GridSpec::new(0.05, 2.0, 80),
        GridSpec::new(0.05, 1.5, 120),
        1,
        SurfaceMode::AnalyticLocked,
        &EvolveSettings::default(),
        1,
    )?;
    println!(
        "{} of {} cells without a closed-form value",
        s.missing,
        s.values.len()
    );
    println!("{:>7} {:>9} {:>9}", "A", "omega_max", "E");
    for (i, amp) in s.amps.iter().enumerate().step_by(4) {
        match (s.ridge_omega[i], s.ridge_value[i]) {
            (Some(w), Some(e)) => println!("{amp:7.3} {w:9.4} {e:9.4}"),
            _ => println!("{amp:7.3}         -         -"),
        }
    }
    for i in ridge_jumps(&s, 5.0) {
        println!(
            "jump between A = {:.3} and {:.3}: omega {:.3} -> {:.3}",
            s.amps[i],
            s.amps[i + 1],
            s.ridge_omega[i].unwrap(),
            s.ridge_omega[i + 1].unwrap()
        );
    }
    Ok(())
}
