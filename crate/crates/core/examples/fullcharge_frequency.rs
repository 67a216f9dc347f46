//! Frequency at which the effective detuning vanishes, where the
//! rotating-frame battery reaches full charge, and the matching charging
//! times `T = nπ/Ω_R`.

use dicke_battery::closed_form::{e1_max, effective_params, solve_fullcharge_omega};

fn main() -> dicke_battery::Result<()> {
    println!(
        "{:>5} {:>10} {:>8} {:>10} {:>10} {:>8}",
        "A", "omega", "xi", "Rabi", "T(n=1)", "E_max"
    );
    for amp in [0.1, 0.2, 0.5, 0.8, 1.0, 1.2] {
        let omega = solve_fullcharge_omega(amp, 1.0, 1)?;
        let eff = effective_params(amp, omega, 1, 1.0)?;
        let opt = e1_max(&eff, 1.0)?;
        println!(
            "{amp:5.2} {omega:10.6} {:8.5} {:10.6} {:10.5} {:8.5}",
            eff.xi_bar,
            eff.rabi,
            opt.t_opt(1)?,
            opt.e_max
        );
    }
    Ok(())
}
