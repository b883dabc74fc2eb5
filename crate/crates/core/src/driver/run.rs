//! Run orchestration: stepping, frame output and failure dumps.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{error, info};

use super::config::SimConfig;
use super::sim::Simulation;
use crate::diagnostics::{kinetic_energy, max_abs, vorticity, write_vorticity_image, SolidTrace};
use crate::error::{Result, SimError};
use crate::grid::dump::GridDump;
use crate::grid::MacGrid;

/// What a finished run produced.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub steps: u64,
    pub frames: usize,
    pub time: f64,
    pub trace: SolidTrace,
    pub trace_path: PathBuf,
}

fn write_dump(grid: &MacGrid, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = BufWriter::new(f);
    GridDump::from_grid(grid)
        .write_to(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| SimError::io(path, e))
}

fn write_text(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let f = File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = BufWriter::new(f);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| SimError::io(path, e))
}

/// Appends the trace row for the current state and writes the frame files.
fn record_frame(sim: &Simulation, trace: &mut SolidTrace, frame: usize, dir: &Path) -> Result<()> {
    let omega = vorticity(&sim.grid);
    trace.push(
        sim.time,
        sim.solid_center(),
        kinetic_energy(&sim.grid),
        sim.grid.max_divergence(),
        max_abs(&omega),
    );
    let out = &sim.config.output;
    if out.images {
        write_vorticity_image(&sim.grid, out.vorticity_limit, &dir.join(format!("vorticity_{frame:05}.pgm")))?;
    }
    if out.dump_grids {
        write_dump(&sim.grid, &dir.join(format!("grid_{frame:05}.macg")))?;
    }
    Ok(())
}

/// Runs `config.output.frames` frames of `config.output.frame_stride` steps
/// each, plus the initial state, writing everything under
/// `config.output.directory`.
pub fn run(config: SimConfig) -> Result<RunSummary> {
    let dir = config.output.directory.clone();
    fs::create_dir_all(&dir).map_err(|e| SimError::io(&dir, e))?;
    let frames = config.output.frames;
    let stride = config.output.frame_stride;
    let mut sim = Simulation::new(config)?;
    info!(
        "{} on {}x{} with {} particles, method {}",
        sim.config.scenario.name(),
        sim.grid.layout.nx,
        sim.grid.layout.ny,
        sim.particles.len(),
        sim.method.name()
    );
    let mut trace = SolidTrace::default();
    record_frame(&sim, &mut trace, 0, &dir)?;
    let trace_path = dir.join("trace.csv");
    let mut outcome = Ok(());
    'frames: for frame in 1..=frames {
        for _ in 0..stride {
            if let Err(e) = sim.step() {
                error!("step {} failed: {e}", sim.steps + 1);
                let dump = dir.join("failure.macg");
                if let Err(de) = write_dump(&sim.grid, &dump) {
                    error!("could not write failure dump: {de}");
                }
                outcome = Err(e);
                break 'frames;
            }
        }
        record_frame(&sim, &mut trace, frame, &dir)?;
        info!("frame {frame}/{frames} t={:.4} steps={}", sim.time, sim.steps);
    }
    write_text(&trace_path, |w| trace.write_csv(w))?;
    if !sim.probe_series.is_empty() {
        write_text(&dir.join("probe.csv"), |w| {
            writeln!(w, "t,v")?;
            for (t, v) in &sim.probe_series {
                writeln!(w, "{t},{v}")?;
            }
            Ok(())
        })?;
    }
    outcome?;
    Ok(RunSummary {
        steps: sim.steps,
        frames: trace.rows.len(),
        time: sim.time,
        trace,
        trace_path,
    })
}
