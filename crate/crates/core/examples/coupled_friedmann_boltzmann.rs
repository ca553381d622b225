//! Couples the expansion to the kinetic matter: R is integrated from the
//! Friedmann equation with rho and P taken from the evolving distribution.
//!
//!     cargo run --release --example coupled_friedmann_boltzmann -- [epsilon] [T]

use flrw_boltzmann::config::SimConfig;
use flrw_boltzmann::solver::Simulation;
use flrw_boltzmann::spacetime::sandwich_bounds;

fn main() -> flrw_boltzmann::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut config = SimConfig::demo();
    config.scale_factor = "coupled".into();
    config.grid.n = 8;
    config.grid.extent = 7.0;
    config.initial.epsilon = args.next().map_or(0.1, |s| s.parse().expect("epsilon"));
    config.horizon = args.next().map_or(2.0, |s| s.parse().expect("T"));
    config.output.interval = 0.2;

    let sim = Simulation::from_config(&config)?;
    let summary = sim.run().map_err(|f| f.error)?;
    let rho0 = summary.records[0].rho;
    println!("rho0 = {rho0:.4e}");
    println!("{:>5} {:>10} {:>10} {:>10} {:>11} {:>11} {:>11}", "t", "lower", "R", "upper", "rho", "P", "continuity");
    for r in &summary.records {
        let (lo, hi) = sandwich_bounds(config.lambda, rho0, r.t);
        let ec = r.energy_conditions();
        println!(
            "{:>5.2} {lo:>10.5} {:>10.5} {hi:>10.5} {:>11.4e} {:>11.4e} {:>11.2e}{}",
            r.t,
            r.scale,
            r.rho,
            r.pressure,
            r.continuity_residual,
            if ec.wec && ec.dec { "" } else { "  energy condition violated" }
        );
    }
    println!("sandwich violations: {} of {} steps", summary.sandwich_violations, summary.steps);
    Ok(())
}
