//! Property bodies shared by the property suite and the acceptance run.

#![allow(dead_code)]

use flowmap_fsi::driver::{ScenarioConfig, SimConfig, Simulation};
use flowmap_fsi::grid::dump::GridDump;
use flowmap_fsi::grid::{
    g2p_velocity_and_gradient, make_stencil, solve_projection, Boundaries, EdgeMode, FaceField, GridLayout,
    MacGrid, P2gAccumulator, ParticleSample, ProjectionSettings, Staggering,
};
use flowmap_fsi::ibm::{delta_h, interpolate_point, spread_force, IbmMesh};
use flowmap_fsi::{Mat2, Vec2};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type Check = Result<(), TestCaseError>;

pub fn layout_for(kind: u8, n: usize) -> GridLayout {
    let b = match kind % 3 {
        0 => Boundaries::walls(),
        1 => Boundaries::periodic(),
        _ => Boundaries::channel(0.3),
    };
    GridLayout::new(n, n, 1.0 / n as f64, b)
}

/// Deterministic fill in [-1, 1); the properties do not depend on the distribution.
pub fn random_field(layout: &GridLayout, seed: u64) -> FaceField {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let mut f = FaceField::zeros(layout);
    f.u.iter_mut().for_each(|x| *x = next());
    f.v.iter_mut().for_each(|x| *x = next());
    f.sync_periodic(layout);
    f
}

pub fn partition_of_unity(x: f64, y: f64, periodic: bool) -> Check {
    let layout = if periodic {
        GridLayout::new(8, 8, 0.125, Boundaries::periodic())
    } else {
        GridLayout::new(16, 16, 1.0 / 16.0, Boundaries::walls())
    };
    let p = if periodic {
        Vec2::new(x, y)
    } else {
        Vec2::new(0.3 + 0.4 * x, 0.3 + 0.4 * y)
    };
    for stag in [Staggering::Cells, Staggering::XFaces, Staggering::YFaces] {
        let s = make_stencil(&layout, stag, p);
        let mut sum = 0.0;
        let mut grad = Vec2::zeros();
        s.for_each(&layout, stag, EdgeMode::Drop, |a, b, _| {
            sum += s.weight(a, b);
            grad += s.gradient(a, b);
        });
        prop_assert!((sum - 1.0).abs() < 1e-13, "weights sum to {sum}");
        prop_assert!(grad.norm() < 1e-10, "gradients sum to {grad:?}");
    }
    Ok(())
}

pub fn projection_idempotent(kind: u8, seed: u64, heavy: f64) -> Check {
    let layout = layout_for(kind, 12);
    let mut grid = MacGrid::new(layout, 1.0);
    grid.velocity = random_field(&layout, seed);
    // A heavier block in the middle exercises the variable-density operator.
    for j in 4..8 {
        for i in 4..8 {
            grid.density.u[layout.u_index(i, j)] = heavy;
            grid.density.v[layout.v_index(i, j)] = heavy;
        }
    }
    let settings = ProjectionSettings {
        relative_tolerance: 1e-12,
        ..Default::default()
    };
    solve_projection(&mut grid, 0.01, &settings).unwrap();
    let once = grid.velocity.clone();
    let scale = once.max_abs().max(1.0) / layout.dx;
    prop_assert!(grid.max_divergence() < 1e-9 * scale);
    grid.pressure.iter_mut().for_each(|p| *p = 0.0);
    solve_projection(&mut grid, 0.01, &settings).unwrap();
    for (a, b) in once.u.iter().chain(&once.v).zip(grid.velocity.u.iter().chain(&grid.velocity.v)) {
        prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
    Ok(())
}

pub fn affine_reproduction(u0: Vec2, g: Mat2, jitter: f64) -> Check {
    let layout = GridLayout::new(16, 16, 1.0 / 16.0, Boundaries::periodic());
    let origin = Vec2::new(0.5, 0.5);
    let field = |x: Vec2| u0 + g * (x - origin);
    let mut acc = P2gAccumulator::new(&layout);
    for j in 3..13 {
        for i in 3..13 {
            for k in 0..4 {
                let off = Vec2::new(0.25 + 0.5 * (k % 2) as f64, 0.25 + 0.5 * (k / 2) as f64);
                let x = (Vec2::new(i as f64, j as f64) + off + 0.1 * jitter * Vec2::new(1.0, -1.0)) * layout.dx;
                acc.add(
                    &layout,
                    &ParticleSample {
                        position: x,
                        velocity: field(x),
                        gradient: g,
                        mass: 1.0,
                        volume: 1.0,
                    },
                );
            }
        }
    }
    let mut grid = MacGrid::new(layout, 1.0);
    acc.write_velocity(&layout, &mut grid.velocity, &mut grid.active_u, &mut grid.active_v);
    for j in 6..10 {
        for i in 6..10 {
            let x = layout.node_position(Staggering::Cells, i, j);
            let (u, grad) = g2p_velocity_and_gradient(&layout, &grid.velocity, x);
            prop_assert!((u - field(x)).norm() < 1e-10);
            prop_assert!((grad - g).abs().max() < 1e-8);
        }
    }
    Ok(())
}

/// Largest 1D first moment of the cosine kernel over all shifts, in units of h.
pub fn cosine_first_moment_bound() -> f64 {
    let phi = |r: f64| {
        if r.abs() <= 2.0 {
            0.25 * (1.0 + (std::f64::consts::FRAC_PI_2 * r).cos())
        } else {
            0.0
        }
    };
    (0..=1000)
        .map(|k| {
            let r = k as f64 / 1000.0;
            (-3..=4).map(|j| (j as f64 - r) * phi(j as f64 - r)).sum::<f64>().abs()
        })
        .fold(0.0, f64::max)
}

pub fn delta_moments(x: f64, y: f64) -> Check {
    let layout = GridLayout::new(32, 32, 1.0 / 32.0, Boundaries::walls());
    let h = layout.dx;
    let p = Vec2::new(x, y);
    let mut m0 = 0.0;
    let mut m1 = Vec2::zeros();
    for j in 0..32 {
        for i in 0..32 {
            let node = layout.node_position(Staggering::Cells, i, j);
            let w = delta_h(node - p, h) * h * h;
            m0 += w;
            m1 += w * (node - p);
        }
    }
    prop_assert!((m0 - 1.0).abs() < 1e-3, "zeroth moment {m0}");
    let bound = 1.01 * cosine_first_moment_bound() * h;
    prop_assert!(m1.x.abs() <= bound && m1.y.abs() <= bound, "first moment {m1:?}");
    Ok(())
}

pub fn spread_adjoint(x: f64, y: f64, f: Vec2, seed: u64) -> Check {
    let layout = GridLayout::new(16, 16, 1.0 / 16.0, Boundaries::walls());
    let u = random_field(&layout, seed);
    let spread = spread_force(&layout, &[Vec2::new(x, y)], &[f]).unwrap();
    let area = layout.dx * layout.dx;
    let grid_side: f64 = spread.u.iter().zip(&u.u).map(|(a, b)| a * b).sum::<f64>() * area
        + spread.v.iter().zip(&u.v).map(|(a, b)| a * b).sum::<f64>() * area;
    let point_side = interpolate_point(&layout, &u, Vec2::new(x, y)).unwrap().dot(&f);
    prop_assert!((grid_side - point_side).abs() <= 1e-10 * point_side.abs().max(1.0));
    Ok(())
}

pub fn xpbd_pin(tilt: f64, steps: usize) -> Check {
    let mut mesh = IbmMesh::strip(Vec2::new(0.2, 0.5), Vec2::new(1.0, tilt), 0.4, 10, 0.1, 0.01, 0.0);
    let anchor = mesh.positions[0];
    for _ in 0..steps {
        mesh.xpbd_substep(1e-3, 50, Vec2::new(0.0, -9.8));
    }
    prop_assert_eq!(mesh.positions[0], anchor);
    prop_assert_eq!(mesh.velocities[0], Vec2::zeros());
    prop_assert!(mesh.max_edge_strain() < 1e-2);
    Ok(())
}

pub fn xpbd_rest(angle: f64, stretch: f64) -> Check {
    let mut mesh = IbmMesh::parse("v 0.5 0.5\nv 0.6 0.5\ne 0 1\n", 1.0, 1.0, 0.0).unwrap();
    let dir = Vec2::new(angle.cos(), angle.sin());
    mesh.positions[1] = mesh.positions[0] + 0.1 * (1.0 + stretch) * dir;
    mesh.xpbd_substep(1e-3, 50, Vec2::zeros());
    prop_assert!(mesh.max_edge_strain() < 1e-6);
    Ok(())
}

pub fn dump_round_trip(kind: u8, seed: u64, n: usize) -> Check {
    let layout = layout_for(kind, n);
    let mut grid = MacGrid::new(layout, 1.0);
    grid.velocity = random_field(&layout, seed);
    grid.pressure
        .iter_mut()
        .enumerate()
        .for_each(|(k, p)| *p = (k as f64 + seed as f64).sin() / 3.0);
    let dump = GridDump::from_grid(&grid);
    let mut bytes = Vec::new();
    dump.write_to(&mut bytes).unwrap();
    let back = GridDump::read_from(&mut bytes.as_slice()).unwrap();
    prop_assert!(back.matches_layout(&layout));
    prop_assert_eq!(back.velocity(), grid.velocity);
    prop_assert_eq!(back.pressure, grid.pressure);
    Ok(())
}

/// Small configuration of a catalog scene: `ny` cells across, four particles per cell.
pub fn small_config(name: &str, ny: usize) -> SimConfig {
    let mut cfg = SimConfig::for_scenario(ScenarioConfig::by_name(name).unwrap());
    cfg.domain.ny = Some(ny);
    cfg.flowmap.particles_per_cell = 4;
    cfg.output.images = false;
    cfg
}

/// Grid velocity and particle positions after `steps` steps.
pub fn state_after(cfg: SimConfig, steps: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut sim = Simulation::new(cfg).unwrap();
    for _ in 0..steps {
        sim.step().unwrap();
    }
    let xs = sim.particles.iter().flat_map(|p| [p.x.x, p.x.y]).collect();
    (sim.grid.velocity.u, sim.grid.velocity.v, xs)
}
