//! Runs a short simulation, checkpoints it, reads the file back and resumes one
//! more step from the restored state.
//!
//!     cargo run --release --example checkpoint_roundtrip

use flrw_boltzmann::config::SimConfig;
use flrw_boltzmann::solver::{load_checkpoint, save_checkpoint, SimState, Simulation};
use flrw_boltzmann::spacetime::FriedmannState;

fn main() -> flrw_boltzmann::Result<()> {
    let mut config = SimConfig::demo();
    config.grid.n = 8;
    config.grid.extent = 7.0;
    config.horizon = 0.3;
    let sim = Simulation::from_config(&config)?;
    let state = sim.run().map_err(|f| f.error)?.final_state;

    let path = std::env::temp_dir().join("flrw_boltzmann_example.ckpt");
    save_checkpoint(&path, &state)?;
    let restored = load_checkpoint(&path)?;
    println!(
        "{}: {} bytes, t = {}, R = {}, n = {}, identical values: {}",
        path.display(),
        std::fs::metadata(&path)?.len(),
        restored.t,
        restored.scale,
        restored.f.points_per_axis(),
        restored.f == state.f
    );

    let mut resumed = SimState::initial(restored.f);
    resumed.t = restored.t;
    resumed.background = FriedmannState { t: restored.t, scale: restored.scale, ..state.background };
    let (next, report) = sim.stepper.picard_step(&resumed, config.dt)?;
    println!("resumed to t = {:.2}, R = {:.6} in {} sweeps", next.t, next.scale(), report.sweeps);
    std::fs::remove_file(&path)?;
    Ok(())
}
