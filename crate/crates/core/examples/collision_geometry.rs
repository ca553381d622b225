//! Resolves a few binary collisions and prints the invariants, scattering angle
//! and identity residuals.
//!
//!     cargo run --example collision_geometry

use flrw_boltzmann::kinematics::{post_collision_covariant, CollisionGeometry, CovariantMomentum};

fn main() -> flrw_boltzmann::Result<()> {
    let scale = 2.0;
    let cases = [
        ("head-on", [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        ("glancing", [3.0, 0.5, 0.0], [2.5, 0.0, 0.1], [0.6, 0.8, 0.0]),
        ("fast on slow", [40.0, -5.0, 2.0], [0.1, 0.0, 0.0], [0.0, 0.0, 1.0]),
        ("identical", [0.7, 0.7, 0.7], [0.7, 0.7, 0.7], [1.0, 0.0, 0.0]),
    ];
    println!("R = {scale}");
    for (name, p, q, omega) in cases {
        let (p, q) = (CovariantMomentum(p), CovariantMomentum(q));
        let geometry = CollisionGeometry::resolve(p.to_orthonormal(scale), q.to_orthonormal(scale), omega)?;
        let angle = match geometry.scattering_angle() {
            Ok(theta) => format!("{theta:.6}"),
            Err(_) => "undefined".into(),
        };
        let (p_out, q_out) = post_collision_covariant(&p, &q, &omega, scale)?;
        println!("{name}:");
        println!("  h = {:.6}, s = {:.6}, theta = {angle}", geometry.h, geometry.s);
        println!("  p_*' = {:.6?}", p_out.0);
        println!("  q_*' = {:.6?}", q_out.0);
        println!("  max identity residual {:.2e}", geometry.defects().max_abs());
    }
    Ok(())
}
