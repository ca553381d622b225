//! Compares the lattice quadrature of the gain and loss terms with an
//! independent Monte Carlo estimate at random lattice points.
//!
//!     cargo run --release --example quadrature_vs_monte_carlo -- [n] [points] [samples]

use flrw_boltzmann::collision::{compare_with_quadrature, CollisionOperator, DistributionGrid, SphereQuadrature};

fn main() -> flrw_boltzmann::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(12);
    let points = args.next().unwrap_or(10);
    let samples = args.next().unwrap_or(20_000);

    let f = DistributionGrid::from_fn(6.0, n, |p| 1e-3 * (-p.norm_sq()).exp())?;
    let operator = CollisionOperator::new(SphereQuadrature::product(8, 16)?);
    let rows = compare_with_quadrature(&f, &operator, 1.0, points, samples, 7)?;
    println!("{:>22} {:>11} {:>11} {:>7} {:>11} {:>11} {:>7}", "p_*", "gain", "gain MC", "z", "loss", "loss MC", "z");
    for r in &rows {
        println!(
            "{:>22} {:>11.4e} {:>11.4e} {:>7.2} {:>11.4e} {:>11.4e} {:>7.2}",
            format!("{:.2?}", r.p.0),
            r.gain,
            r.mc.gain,
            r.z_gain(),
            r.loss,
            r.mc.loss,
            r.z_loss()
        );
    }
    let within = rows.iter().filter(|r| r.within(3.0)).count();
    println!("{within} of {} points within 3 standard errors", rows.len());
    Ok(())
}
