//! Command-line front end: `simulate`, `audit`, `collide` and `oracle`.
//!
//! Exit codes: 0 success, 1 configuration or argument error, 2 step
//! failure, 3 audit failure. `THREADS` sets the worker count.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::collision::{compare_with_quadrature, CollisionOperator};
use crate::config::SimConfig;
use crate::diagnostics::{self, audit_lemma42};
use crate::error::{Error, Result};
use crate::kinematics::{post_collision_covariant, CollisionGeometry, CovariantMomentum, Vec3};
use crate::solver::{initial_data, save_checkpoint, Simulation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_STEP: i32 = 2;
pub const EXIT_AUDIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "flrw-boltzmann", version, about = "Israel-particle Boltzmann solver on an FLRW background")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation; writes the CSV and a final checkpoint.
    Simulate { config: PathBuf },
    /// Run property audits and print one PASS/FAIL line each.
    Audit {
        #[arg(value_enum, default_value_t = AuditKind::All)]
        which: AuditKind,
        /// Samples for the kinematics and Lemma 4.3 audits.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Configurations for the collision-map determinant audit.
        #[arg(long, default_value_t = 1000)]
        jacobian_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Resolve one collision of covariant momenta and print it as JSON.
    Collide {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        omega: Vec<f64>,
        /// Scale factor R.
        #[arg(long = "R", default_value_t = 1.0)]
        scale: f64,
    },
    /// Compare quadrature and Monte Carlo collision terms of the initial data; CSV on stdout.
    Oracle {
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Defaults to the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AuditKind {
    Kinematics,
    Lemma42,
    Lemma43,
    Jacobian,
    All,
}

/// Parses `args` (including the program name), configures the thread pool
/// from `THREADS` and dispatches. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Simulate { config } => simulate(&config, &mut out),
        Command::Audit { which, samples, jacobian_samples, seed } => {
            audit(which, samples, jacobian_samples, seed, &mut out)
        }
        Command::Collide { p, q, omega, scale } => collide(&p, &q, &omega, scale, &mut out),
        Command::Oracle { config, points, samples, seed } => oracle(&config, points, samples, seed, &mut out),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("THREADS must be a positive integer, got {raw:?}")))?;
    // a pool that is already initialised (repeated calls in one process) is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn write_records(path: &Path, config: &SimConfig, records: &[diagnostics::DiagnosticsRecord]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    diagnostics::write_csv(&mut out, &config.norms, records)?;
    out.flush()?;
    Ok(())
}

/// `simulate`: exit 0 on success, 1 on configuration or output errors, 2 on a step failure.
pub fn simulate(config_path: &Path, out: &mut impl Write) -> i32 {
    let prepared = SimConfig::load(config_path).and_then(|c| Simulation::from_config(&c).map(|s| (c, s)));
    let (config, sim) = match prepared {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let started = std::time::Instant::now();
    match sim.run() {
        Ok(summary) => {
            let written = write_records(&config.output.path, &config, &summary.records)
                .and_then(|_| save_checkpoint(&config.checkpoint_path(), &summary.final_state));
            if let Err(e) = written {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
            let _ = writeln!(
                out,
                "completed {} steps to t = {} (R = {:.6e}) in {:.1} s; {} records -> {}, checkpoint -> {}",
                summary.steps,
                summary.final_state.t,
                summary.final_state.scale(),
                started.elapsed().as_secs_f64(),
                summary.records.len(),
                config.output.path.display(),
                config.checkpoint_path().display()
            );
            EXIT_OK
        }
        Err(failure) => {
            let dump = config.output.path.with_extension("failed.ckpt");
            eprintln!("error: {}", failure.error);
            let _ = write_records(&config.output.path, &config, &failure.records);
            match save_checkpoint(&dump, &failure.last_state) {
                Ok(()) => eprintln!(
                    "last valid state (t = {}, R = {:e}) written to {}",
                    failure.last_state.t,
                    failure.last_state.scale(),
                    dump.display()
                ),
                Err(e) => eprintln!("could not write {}: {e}", dump.display()),
            }
            EXIT_STEP
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Runs the selected audits; exit 0 iff all pass, 3 otherwise.
pub fn audit(which: AuditKind, samples: usize, jacobian_samples: usize, seed: u64, out: &mut impl Write) -> i32 {
    match audit_lines(which, samples, jacobian_samples, seed) {
        Ok((lines, all_ok)) => {
            for line in lines {
                let _ = writeln!(out, "{line}");
            }
            if all_ok {
                EXIT_OK
            } else {
                EXIT_AUDIT
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn audit_lines(which: AuditKind, samples: usize, jacobian_samples: usize, seed: u64) -> Result<(Vec<String>, bool)> {
    let wants = |k: AuditKind| which == k || which == AuditKind::All;
    let mut lines = Vec::new();
    let mut all_ok = true;
    if wants(AuditKind::Kinematics) {
        let a = diagnostics::audit_kinematics(samples, seed)?;
        all_ok &= a.passed();
        lines.push(format!(
            "{} kinematics: {} pairs, max |s-4-h^2|/s = {:.3e}, conservation = {:.3e}, mass shell = {:.3e}, \
             |Omega.Omega-1| = {:.3e}, |n.Omega| = {:.3e}, bound violations = {}",
            verdict(a.passed()),
            a.samples,
            a.identity,
            a.conservation,
            a.mass_shell,
            a.omega_norm,
            a.omega_orthogonality,
            a.bound_violations
        ));
    }
    if wants(AuditKind::Lemma42) {
        let mut worst = 0.0f64;
        for m in [0, 2, 4] {
            let values = [0.0, 1.0, 2.0, 3.0].map(|u: f64| audit_lemma42(u.exp(), m));
            let values = values.into_iter().collect::<Result<Vec<_>>>()?;
            let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            worst = worst.max(hi / lo - 1.0);
            lines.push(format!(
                "  lemma42 m = {m}: ratio at R = 1, e, e^2, e^3: {:.10e} {:.10e} {:.10e} {:.10e}",
                values[0], values[1], values[2], values[3]
            ));
        }
        let ok = worst <= 0.01;
        all_ok &= ok;
        lines.push(format!("{} lemma42: max relative spread over R = {worst:.3e} (bound 1e-2)", verdict(ok)));
    }
    if wants(AuditKind::Lemma43) {
        let a = diagnostics::audit_lemma43(samples, seed)?;
        all_ok &= a.passed();
        lines.push(format!(
            "{} lemma43: {} collisions, max ratio = {:.6} (bound 17) at p = {:?}, q = {:?}, R = {:.4}",
            verdict(a.passed()),
            a.samples,
            a.max_ratio,
            a.worst_p,
            a.worst_q,
            a.worst_scale
        ));
    }
    if wants(AuditKind::Jacobian) {
        let d = diagnostics::audit_jacobian_determinants(jacobian_samples, seed)?;
        all_ok &= d.passed();
        lines.push(format!(
            "{} jacobian determinant: {} configurations, max rel error = {:.3e}, orientation-preserving = {}",
            verdict(d.passed()),
            d.samples,
            d.max_relative_error,
            d.orientation_preserving
        ));
        let g = diagnostics::audit_jacobian_growth(31)?;
        all_ok &= g.passed();
        if let Some(scan) = g.scans.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio)) {
            lines.push(format!("  |p_*| vs sup-norm (worst ray, q = {:?}, omega = {:?}):", scan.q, scan.omega));
            for (r, norm) in scan.magnitudes.iter().zip(&scan.norms).step_by(5) {
                lines.push(format!("    {r:>10.3e} {norm:.6}"));
            }
        }
        lines.push(format!(
            "{} jacobian growth: {} rays, max norm / norm at |p_*| = 1 = {:.4} (bound 2)",
            verdict(g.passed()),
            g.scans.len(),
            g.max_ratio
        ));
    }
    Ok((lines, all_ok))
}

fn vec3(v: &[f64], name: &str) -> Result<Vec3> {
    <[f64; 3]>::try_from(v).map_err(|_| Error::Config(format!("--{name} needs three comma-separated numbers")))
}

/// Prints the resolved collision as JSON; exit 1 on malformed input.
pub fn collide(p: &[f64], q: &[f64], omega: &[f64], scale: f64, out: &mut impl Write) -> i32 {
    match collide_json(p, q, omega, scale) {
        Ok(value) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json"));
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn collide_json(p: &[f64], q: &[f64], omega: &[f64], scale: f64) -> Result<serde_json::Value> {
    let p = CovariantMomentum(vec3(p, "p")?);
    let q = CovariantMomentum(vec3(q, "q")?);
    let omega = vec3(omega, "omega")?;
    crate::kinematics::mass_shell_energy(&p, scale)?;
    let geometry = CollisionGeometry::resolve(p.to_orthonormal(scale), q.to_orthonormal(scale), omega)?;
    let (p_prime, q_prime) = post_collision_covariant(&p, &q, &omega, scale)?;
    let theta = geometry.scattering_angle().ok();
    let defects = geometry.defects();
    Ok(json!({
        "R": scale,
        "p_star": p.0,
        "q_star": q.0,
        "omega": omega,
        "h": geometry.h,
        "s": geometry.s,
        "theta": theta,
        "angle_undefined": theta.is_none(),
        "Omega": geometry.big_omega.0,
        "p_hat": geometry.p_hat.0,
        "q_hat": geometry.q_hat.0,
        "p_prime": geometry.p_prime.0,
        "q_prime": geometry.q_prime.0,
        "p_star_prime": p_prime.0,
        "q_star_prime": q_prime.0,
        "defects": defects,
        "max_defect": defects.max_abs(),
    }))
}

/// Writes the quadrature-versus-Monte-Carlo table for the config's initial data at `R = 1`.
pub fn oracle(config_path: &Path, points: usize, samples: usize, seed: Option<u64>, out: &mut impl Write) -> i32 {
    let rows = SimConfig::load(config_path).and_then(|config| {
        let f = initial_data(
            &config.initial.kind,
            config.initial.epsilon,
            &config.initial.params,
            config.grid.extent,
            config.grid.n,
        )?;
        let operator = CollisionOperator::new(config.quadrature()?);
        compare_with_quadrature(&f, &operator, 1.0, points, samples, seed.unwrap_or(config.seed))
    });
    let rows = match rows {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut text = String::from("index,p1,p2,p3,gain,gain_mc,stderr_gain,z_gain,loss,loss_mc,stderr_loss,z_loss\n");
    for r in &rows {
        let values = [
            r.p.0[0],
            r.p.0[1],
            r.p.0[2],
            r.gain,
            r.mc.gain,
            r.mc.stderr_gain,
            r.z_gain(),
            r.loss,
            r.mc.loss,
            r.mc.stderr_loss,
            r.z_loss(),
        ];
        let fields: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
        text += &format!("{},{}\n", r.index, fields.join(","));
    }
    let within = rows.iter().filter(|r| r.within(3.0)).count();
    let _ = out.write_all(text.as_bytes());
    eprintln!("{within} of {} points within 3 standard errors", rows.len());
    EXIT_OK
}
