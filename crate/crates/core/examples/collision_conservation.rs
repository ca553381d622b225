//! Number and energy balance of the discrete collision operator on a Gaussian
//! as the lattice and sphere rule are refined.
//!
//!     cargo run --release --example collision_conservation -- [n ...]

use flrw_boltzmann::collision::{CollisionOperator, DistributionGrid, SphereQuadrature};

fn main() -> flrw_boltzmann::Result<()> {
    let sizes: Vec<usize> = std::env::args().skip(1).map(|s| s.parse().expect("n")).collect();
    let sizes = if sizes.is_empty() { vec![8, 12, 16] } else { sizes };
    println!("{:>4} {:>8} {:>12} {:>12} {:>10} {:>8}", "n", "sphere", "number", "energy", "leakage", "secs");
    for n in sizes {
        let (polar, azimuth) = if n >= 24 { (8, 16) } else { (4, 8) };
        let f = DistributionGrid::from_fn(6.0, n, |p| 1e-3 * (-p.norm_sq()).exp())?;
        let start = std::time::Instant::now();
        let terms = CollisionOperator::new(SphereQuadrature::product(polar, azimuth)?).evaluate(&f, 1.0);
        let balance = terms.moment_balance(&f, 1.0);
        println!(
            "{n:>4} {:>8} {:>12.3e} {:>12.3e} {:>10.4} {:>8.2}",
            format!("{polar}x{azimuth}"),
            balance.number,
            balance.energy,
            terms.leakage,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
