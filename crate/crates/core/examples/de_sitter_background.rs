//! Integrates the Friedmann equation in vacuum and with perfect fluids and
//! checks the scale factor against its exponential sandwich.
//!
//!     cargo run --example de_sitter_background

use std::f64::consts::E;

use flrw_boltzmann::spacetime::{friedmann_step, sandwich_bounds, FriedmannState};

fn main() -> flrw_boltzmann::Result<()> {
    let lambda = 3.0;
    let mut state = FriedmannState::vacuum();
    for _ in 0..100 {
        state = friedmann_step(&state, lambda, 0.01, None)?;
    }
    println!("vacuum, Lambda = 3: R(1) = {:.15}, |R(1) - e| = {:.1e}", state.scale, (state.scale - E).abs());

    for (name, w) in [("dust", 0.0), ("radiation", 1.0 / 3.0)] {
        let rho0 = 0.2;
        let mut s = FriedmannState::initial(rho0, w * rho0);
        println!("{name}, rho0 = {rho0}:");
        println!("  {:>4} {:>12} {:>12} {:>12} {:>12}", "t", "lower", "R", "upper", "rho");
        for step in 1..=200 {
            s = friedmann_step(&s, lambda, 0.01, None)?;
            if step % 40 == 0 {
                let (lo, hi) = sandwich_bounds(lambda, rho0, s.t);
                println!("  {:>4.1} {lo:>12.6} {:>12.6} {hi:>12.6} {:>12.3e}", s.t, s.scale, s.rho);
            }
        }
    }
    Ok(())
}
