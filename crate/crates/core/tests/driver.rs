mod support;

use flowmap_fsi::diagnostics::read_trace;
use flowmap_fsi::driver::scenario::QuiescentScene;
use flowmap_fsi::driver::{run, Method, ScenarioConfig, SimConfig, Simulation};
use flowmap_fsi::SimError;
use support::{small_config, state_after};

fn small(name: &str) -> SimConfig {
    small_config(name, if name == "sediment" { 40 } else { 8 })
}

#[test]
fn identical_seeds_reproduce_bit_for_bit() {
    for name in ["leapfrog", "karman", "sediment"] {
        let a = state_after(small(name), 4);
        let b = state_after(small(name), 4);
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let serial = state_after(small("karman"), 3);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let threaded = pool.install(|| state_after(small("karman"), 3));
    assert_eq!(serial, threaded);
}

#[test]
fn frame_count_follows_stride() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SimConfig::for_scenario(ScenarioConfig::Quiescent(QuiescentScene {
        periodic: true,
        velocity: [0.0, 0.0],
    }));
    cfg.domain.nx = Some(8);
    cfg.flowmap.particles_per_cell = 4;
    cfg.output.directory = dir.path().to_path_buf();
    cfg.output.frames = 10;
    cfg.output.frame_stride = 10;
    cfg.output.dump_grids = true;
    let summary = run(cfg.clone()).unwrap();
    assert_eq!(summary.steps, 100);
    assert_eq!(summary.frames, 11);
    assert_eq!(read_trace(&summary.trace_path).unwrap().len(), 11);
    assert!(dir.path().join("grid_00010.macg").exists());
    assert!(dir.path().join("vorticity_00010.pgm").exists());

    cfg.output.frames = 0;
    let summary = run(cfg).unwrap();
    assert_eq!(summary.steps, 0);
    assert_eq!(summary.frames, 1);
}

#[test]
fn every_method_keeps_a_quiescent_box_at_rest() {
    for method in [Method::Pfm, Method::ApicMidpoint, Method::EulerSl] {
        let mut cfg = small("quiescent");
        cfg.method = method;
        let mut sim = Simulation::new(cfg).unwrap();
        for _ in 0..5 {
            sim.step().unwrap();
        }
        assert!(sim.grid.velocity.max_abs() < 1e-12, "{}", method.name());
    }
}

#[test]
fn incompatible_method_and_backend_is_a_config_error() {
    let mut cfg = small("sediment");
    cfg.method = Method::EulerSl;
    assert!(matches!(Simulation::new(cfg), Err(SimError::Config { .. })));
    let mut cfg = small("karman");
    cfg.method = Method::DirectHfmc;
    assert!(matches!(Simulation::new(cfg), Err(SimError::Config { .. })));
}

#[test]
fn open_channel_stays_divergence_free() {
    let mut sim = Simulation::new(small("karman")).unwrap();
    for _ in 0..10 {
        let report = sim.step().unwrap();
        assert!(report.max_divergence < 1e-4, "{}", report.max_divergence);
    }
}
