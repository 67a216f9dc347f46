//! First-peak optimum against atom number for a repulsive coupling, with the
//! log-log slope of the total stored energy.
//!
//! cargo run --release --example atom_scaling -- 0.5

use dicke_battery::propagate::Protocol;
use dicke_battery::sweep::{sweep_atoms, GridSpec};
use dicke_battery::BatteryParams;

fn main() -> dicke_battery::Result<()> {
    let lambda: f64 = std::env::args()
        .nth(1)
        .map_or(0.5, |a| a.parse().expect("lambda"));
    let base = BatteryParams::harmonic(1, 1.0, 1.0).with_lambda(lambda);
    let n_list = [10, 20, 40, 60, 80];
    let sweep = sweep_atoms(
        &base,
        &n_list,
        GridSpec::new(3.0, 10.0, 71),
        Protocol::PeriodLocked,
        None,
        1,
    )?;
    let s = &sweep.scan;
    println!("{:>5} {:>10} {:>8} {:>9}", "N", "E_max/N", "T_max", "omega");
    for i in 0..s.axis.len() {
        println!(
            "{:5} {:10.5} {:8.4} {:9.5}",
            s.axis[i], s.e_max[i], s.t_max[i], s.omega_max[i]
        );
    }
    println!(
        "log-log slope of E_max: {:.4} ({} smallest N dropped)",
        sweep.slope.slope, sweep.slope.dropped
    );
    Ok(())
}
