//! Evaluates the weighted Sobolev-type norms of a Gaussian for several weights,
//! derivative orders and scale factors.
//!
//!     cargo run --release --example weighted_norms -- [n]

use flrw_boltzmann::collision::DistributionGrid;
use flrw_boltzmann::diagnostics::{decay_envelope, weighted_norm, NormSpec};

fn main() -> flrw_boltzmann::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(32, |s| s.parse().expect("n"));
    let f = DistributionGrid::from_fn(6.0, n, |p| (-p.norm_sq()).exp())?;
    println!("f = exp(-|p_*|^2) on [-6, 6]^3, n = {n}");
    println!("{:>3} {:>3} {:>14} {:>14} {:>14}", "k", "N", "R = 1", "R = e", "R = e^2");
    for k in 0..=2 {
        for order in 0..=2 {
            let row: Vec<String> = (0..3)
                .map(|u| format!("{:>14.6e}", weighted_norm(&f, NormSpec { k, order }, (u as f64).exp())))
                .collect();
            println!("{k:>3} {order:>3} {}", row.join(" "));
        }
    }
    println!("decay envelope max f <p>^4 e^(p0/2) at R = 1: {:.6e}", decay_envelope(&f, 1.0, 4));
    Ok(())
}
