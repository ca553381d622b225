//! Runs the randomized kinematic audits and the weighted-integral check.
//!
//!     cargo run --release --example kinematic_audits -- [samples] [seed]

use flrw_boltzmann::diagnostics::{
    audit_jacobian_determinants, audit_jacobian_growth, audit_kinematics, audit_lemma42, audit_lemma43,
};

fn main() -> flrw_boltzmann::Result<()> {
    let mut args = std::env::args().skip(1);
    let samples: usize = args.next().map_or(100_000, |s| s.parse().expect("samples"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));

    let k = audit_kinematics(samples, seed)?;
    println!(
        "identities over {samples} pairs: |s-4-h^2|/s {:.1e}, conservation {:.1e}, mass shell {:.1e}, bound violations {}",
        k.identity, k.conservation, k.mass_shell, k.bound_violations
    );

    let w = audit_lemma43(samples, seed)?;
    println!(
        "weight transfer: max (1+|p|^2)/((1+|p'|^2)(1+|q'|^2)) = {:.4} at p = {:.3?}, q = {:.3?}, R = {:.3}",
        w.max_ratio, w.worst_p, w.worst_q, w.worst_scale
    );

    let d = audit_jacobian_determinants(1000, seed)?;
    println!(
        "collision map: max relative determinant error {:.1e}, {} of 1000 orientation preserving",
        d.max_relative_error, d.orientation_preserving
    );

    let g = audit_jacobian_growth(31)?;
    println!("derivative growth along {} rays: max ratio {:.4}", g.scans.len(), g.max_ratio);

    for m in [0, 2, 4] {
        let values: Vec<String> =
            (0..4).map(|u| format!("{:.10}", audit_lemma42((u as f64).exp(), m).unwrap())).collect();
        println!("m = {m}: weighted integral at R = 1, e, e^2, e^3: {}", values.join(", "));
    }
    Ok(())
}
