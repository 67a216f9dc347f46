//! Optimal stored energy and charging time against the coupling strength:
//! repulsion speeds charging up, strong attraction degrades it.

use dicke_battery::propagate::{EvolveSettings, Protocol};
use dicke_battery::sweep::{sweep_lambda, GridSpec};
use dicke_battery::BatteryParams;

fn main() -> dicke_battery::Result<()> {
    let base = BatteryParams::harmonic(40, 1.0, 1.0);
    let lambdas = GridSpec::new(-2.0, 2.0, 17).values();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let scan = sweep_lambda(
        &base,
        &lambdas,
        GridSpec::new(2.0, 12.0, 101),
        Protocol::PeriodLocked,
        &EvolveSettings::default(),
        workers,
    )?;
    println!("{:>7} {:>10} {:>8}", "lambda", "E_max/N", "T_max");
    for i in 0..scan.axis.len() {
        println!(
            "{:7.2} {:10.5} {:8.4}",
            scan.axis[i], scan.e_max[i], scan.t_max[i]
        );
    }
    Ok(())
}
