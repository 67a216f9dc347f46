//! Ground-state polarization of the interacting battery across the
//! attractive critical point `λc = −1`, finite `N` against mean field.

use dicke_battery::spectrum::{ground_state, hp_polarization};
use dicke_battery::sweep::GridSpec;
use dicke_battery::BatteryParams;

fn main() -> dicke_battery::Result<()> {
    let n = 200;
    let base = BatteryParams::harmonic(n, 0.0, 1.0);
    println!(
        "{:>7} {:>9} {:>9} {:>10} {:>9}",
        "lambda", "Sz/(N/2)", "mean", "gap", "parity"
    );
    for lambda in GridSpec::new(-2.0, 0.5, 26).values() {
        let gs = ground_state(&base.with_lambda(lambda))?;
        let mf = hp_polarization(lambda);
        println!(
            "{lambda:7.2} {:9.4} {:9.4} {:10.5} {:>9?}",
            gs.sz_per_spin, mf.sz_per_spin_inf, gs.gap, gs.parity0
        );
    }
    Ok(())
}
