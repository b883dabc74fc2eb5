//! Fluid particles carrying flow-map state, RK4 trajectory and Jacobian
//! integration, and uniform jittered reseeding.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::grid::{
    g2p_velocity, g2p_velocity_and_gradient, sample_linear, FaceField, GridLayout, ParticleSample,
    Staggering,
};
use crate::math::{mix_seed, Mat2, Vec2};

#[derive(Clone, Debug, PartialEq)]
pub struct FluidParticle {
    pub x: Vec2,
    /// Impulse at the start of the current flow-map window.
    pub impulse: Vec2,
    /// Forward Jacobian (initial frame to current).
    pub forward: Mat2,
    /// Backward Jacobian (current frame to initial).
    pub backward: Mat2,
    /// Path integral of pressure and kinetic-energy gradients.
    pub pressure_buffer: Vec2,
    /// Path integral of external and coupling forces.
    pub force_buffer: Vec2,
    pub density: f64,
    pub mass: f64,
    pub volume: f64,
    /// Velocity transferred to the grid on the last step.
    pub velocity: Vec2,
    /// Affine gradient transferred alongside `velocity`.
    pub affine: Mat2,
    pub narrowband: bool,
    /// Set when the map folded or an RK4 stage left the domain; the particle
    /// is skipped by P2G until the next reinitialization.
    pub excluded: bool,
    pub steps_since_reinit: usize,
}

impl FluidParticle {
    pub fn new(x: Vec2, impulse: Vec2, density: f64, volume: f64) -> Self {
        FluidParticle {
            x,
            impulse,
            forward: Mat2::identity(),
            backward: Mat2::identity(),
            pressure_buffer: Vec2::zeros(),
            force_buffer: Vec2::zeros(),
            density,
            mass: density * volume,
            volume,
            velocity: impulse,
            affine: Mat2::zeros(),
            narrowband: false,
            excluded: false,
            steps_since_reinit: 0,
        }
    }

    /// Resets the flow-map window at the current position.
    pub fn reset_map(&mut self, impulse: Vec2) {
        self.impulse = impulse;
        self.velocity = impulse;
        self.forward = Mat2::identity();
        self.backward = Mat2::identity();
        self.pressure_buffer = Vec2::zeros();
        self.force_buffer = Vec2::zeros();
        self.excluded = false;
        self.steps_since_reinit = 0;
    }

    pub fn sample(&self) -> ParticleSample {
        ParticleSample {
            position: self.x,
            velocity: self.velocity,
            gradient: self.affine,
            mass: self.mass,
            volume: self.volume,
        }
    }

    /// `max |F T - I|` entry.
    pub fn map_drift(&self) -> f64 {
        crate::math::max_abs(&(self.forward * self.backward - Mat2::identity()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowMapConfig {
    pub n_reinit: usize,
    pub n_reinit_narrowband: usize,
    pub particles_per_cell: usize,
    pub cfl: f64,
}

impl Default for FlowMapConfig {
    fn default() -> Self {
        FlowMapConfig {
            n_reinit: 20,
            n_reinit_narrowband: 2,
            particles_per_cell: 16,
            cfl: 0.5,
        }
    }
}

impl FlowMapConfig {
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.n_reinit < 1 {
            return Err(("n_reinit", "must be at least 1".into()));
        }
        if self.n_reinit_narrowband < 1 {
            return Err(("n_reinit_narrowband", "must be at least 1".into()));
        }
        if self.particles_per_cell < 4 {
            return Err(("particles_per_cell", "must be at least 4".into()));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(("cfl", format!("must lie in (0, 1], got {}", self.cfl)));
        }
        Ok(())
    }
}

/// Result of marching one particle through a step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarchResult {
    pub x: Vec2,
    pub forward: Mat2,
    pub backward: Mat2,
    /// Some RK4 stage (or the final position) left a non-periodic domain.
    pub escaped: bool,
}

/// Co-integrates position, `dF/dt = G F` and `dT/dt = -T G` with classical
/// RK4, sampling velocity and gradient `G` at each stage position.
pub fn rk4_march(
    layout: &GridLayout,
    x: Vec2,
    forward: Mat2,
    backward: Mat2,
    dt: f64,
    sample: impl Fn(Vec2) -> (Vec2, Mat2),
) -> MarchResult {
    let mut escaped = false;
    let mut eval = |p: Vec2, f: &Mat2, t: &Mat2| {
        let (q, clamped) = layout.confine(p);
        escaped |= clamped;
        let (v, g) = sample(q);
        (v, g * f, -(t * g))
    };
    let (k1x, k1f, k1t) = eval(x, &forward, &backward);
    let (k2x, k2f, k2t) = eval(
        x + 0.5 * dt * k1x,
        &(forward + 0.5 * dt * k1f),
        &(backward + 0.5 * dt * k1t),
    );
    let (k3x, k3f, k3t) = eval(
        x + 0.5 * dt * k2x,
        &(forward + 0.5 * dt * k2f),
        &(backward + 0.5 * dt * k2t),
    );
    let (k4x, k4f, k4t) = eval(x + dt * k3x, &(forward + dt * k3f), &(backward + dt * k3t));
    let s = dt / 6.0;
    let xn = x + s * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    let (xn, clamped) = layout.confine(xn);
    MarchResult {
        x: xn,
        forward: forward + s * (k1f + 2.0 * k2f + 2.0 * k3f + k4f),
        backward: backward + s * (k1t + 2.0 * k2t + 2.0 * k3t + k4t),
        escaped: escaped || clamped,
    }
}

/// RK4 position update through a grid velocity field. Returns the new
/// position and whether a stage had to be clamped.
pub fn rk4_advect(layout: &GridLayout, field: &FaceField, x: Vec2, dt: f64) -> (Vec2, bool) {
    let r = rk4_march(layout, x, Mat2::identity(), Mat2::identity(), dt, |p| {
        (g2p_velocity(layout, field, p), Mat2::zeros())
    });
    (r.x, r.escaped)
}

/// Advances `F` and `T` by one RK4 step of a constant gradient.
pub fn evolve_jacobians(forward: Mat2, backward: Mat2, grad: Mat2, dt: f64) -> (Mat2, Mat2) {
    let dummy = GridLayout::new(2, 2, 1.0, crate::grid::Boundaries::periodic());
    let r = rk4_march(&dummy, Vec2::zeros(), forward, backward, dt, |_| {
        (Vec2::zeros(), grad)
    });
    (r.forward, r.backward)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MarchReport {
    /// Particles newly excluded because their map folded.
    pub folded: usize,
    /// Particles removed because a stage left a non-periodic domain.
    pub escaped: usize,
}

/// Marches every particle through `u_mid`, updating position and Jacobians.
/// Particles whose map folds are excluded until reinit; particles that leave
/// the domain are dropped (cells they vacate are refilled by the caller).
pub fn march_particles(
    layout: &GridLayout,
    particles: &mut Vec<FluidParticle>,
    u_mid: &FaceField,
    dt: f64,
) -> MarchReport {
    let escaped: Vec<bool> = particles
        .par_iter_mut()
        .map(|p| {
            let r = rk4_march(layout, p.x, p.forward, p.backward, dt, |q| {
                g2p_velocity_and_gradient(layout, u_mid, q)
            });
            p.x = r.x;
            p.forward = r.forward;
            p.backward = r.backward;
            p.steps_since_reinit += 1;
            r.escaped
        })
        .collect();
    let mut report = MarchReport::default();
    let mut k = 0;
    particles.retain(|_p| {
        let keep = !escaped[k];
        k += 1;
        if !keep {
            report.escaped += 1;
        }
        keep
    });
    for p in particles.iter_mut() {
        if !p.excluded && p.forward.determinant() <= 0.0 {
            p.excluded = true;
            report.folded += 1;
        }
    }
    report
}

/// Per-cell particle counts.
pub fn cell_counts(layout: &GridLayout, particles: &[FluidParticle]) -> Vec<usize> {
    let mut counts = vec![0usize; layout.cell_count()];
    for p in particles {
        let (i, j) = layout.cell_of(p.x);
        counts[layout.cell_index(i, j)] += 1;
    }
    counts
}

/// Seeds a fresh flow-map window into every empty cell not rejected by
/// `blocked`. Returns the number of particles added.
#[allow(clippy::too_many_arguments)]
pub fn refill_empty_cells(
    layout: &GridLayout,
    particles: &mut Vec<FluidParticle>,
    velocity: &FaceField,
    config: &FlowMapConfig,
    density: f64,
    seed: u64,
    frame: u64,
    blocked: &(dyn Fn(usize) -> bool + Sync),
) -> usize {
    let counts = cell_counts(layout, particles);
    let before = particles.len();
    let volume = layout.dx * layout.dx / config.particles_per_cell as f64;
    for c in 0..layout.cell_count() {
        if counts[c] > 0 || blocked(c) {
            continue;
        }
        let (i, j) = (c % layout.nx, c / layout.nx);
        for x in seed_cell(layout, i, j, config.particles_per_cell, seed ^ 0x5eed, frame) {
            let (v, g) = g2p_velocity_and_gradient(layout, velocity, x);
            let mut p = FluidParticle::new(x, v, density, volume);
            p.affine = g;
            particles.push(p);
        }
    }
    particles.len() - before
}

/// Splits `n` into the most square `a x b` sub-cell grid.
fn subcell_grid(n: usize) -> (usize, usize) {
    let mut a = (n as f64).sqrt().floor() as usize;
    while a > 1 && n % a != 0 {
        a -= 1;
    }
    (n / a.max(1), a.max(1))
}

/// Jittered positions for one cell, one per sub-cell, deterministic in
/// `(seed, frame, cell)`.
pub fn seed_cell(
    layout: &GridLayout,
    i: usize,
    j: usize,
    per_cell: usize,
    seed: u64,
    frame: u64,
) -> Vec<Vec2> {
    let (sx, sy) = subcell_grid(per_cell);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, frame, layout.cell_index(i, j) as u64));
    let h = layout.dx;
    let mut out = Vec::with_capacity(per_cell);
    for b in 0..sy {
        for a in 0..sx {
            let jx: f64 = rng.gen();
            let jy: f64 = rng.gen();
            out.push(Vec2::new(
                (i as f64 + (a as f64 + jx) / sx as f64) * h,
                (j as f64 + (b as f64 + jy) / sy as f64) * h,
            ));
        }
    }
    out
}

/// Reseeds the fluid uniformly, skipping cells for which `blocked` is true.
/// Impulse and transferred velocity are sampled from `velocity`.
#[allow(clippy::too_many_arguments)]
pub fn reinitialize_fluid(
    layout: &GridLayout,
    velocity: &FaceField,
    config: &FlowMapConfig,
    density: f64,
    seed: u64,
    frame: u64,
    blocked: &(dyn Fn(usize) -> bool + Sync),
) -> Vec<FluidParticle> {
    let ppc = config.particles_per_cell;
    let volume = layout.dx * layout.dx / ppc as f64;
    (0..layout.cell_count())
        .into_par_iter()
        .flat_map_iter(|c| {
            let (i, j) = (c % layout.nx, c / layout.nx);
            let pts = if blocked(c) {
                Vec::new()
            } else {
                seed_cell(layout, i, j, ppc, seed, frame)
            };
            pts.into_iter().map(|x| {
                let (v, g) = g2p_velocity_and_gradient(layout, velocity, x);
                let mut p = FluidParticle::new(x, v, density, volume);
                p.affine = g;
                p
            })
        })
        .collect()
}

/// Semi-Lagrangian transport of `source` through `vel` over `dt` with an RK4
/// backtrace and bilinear sampling.
pub fn semi_lagrangian(layout: &GridLayout, source: &FaceField, vel: &FaceField, dt: f64) -> FaceField {
    let mut out = source.clone();
    for stag in [Staggering::XFaces, Staggering::YFaces] {
        let (ni, nj) = layout.dims(stag);
        let src = source.component(stag);
        let vals: Vec<f64> = (0..ni * nj)
            .into_par_iter()
            .map(|k| {
                let x = layout.node_position(stag, k % ni, k / ni);
                let (back, _) = rk4_advect(layout, vel, x, -dt);
                sample_linear(layout, stag, src, back)
            })
            .collect();
        out.component_mut(stag).copy_from_slice(&vals);
    }
    out.sync_periodic(layout);
    out
}

/// Debug dump: `x, y, |m|, det F` per particle.
pub fn write_particle_csv(particles: &[FluidParticle], w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "x,y,impulse,det_f")?;
    for p in particles {
        writeln!(
            w,
            "{},{},{},{}",
            p.x.x,
            p.x.y,
            p.impulse.norm(),
            p.forward.determinant()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundaries;

    fn expm(a: Mat2) -> Mat2 {
        // scaling and squaring with a long Taylor series
        let s = 10;
        let b = a / f64::powi(2.0, s);
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1..20 {
            term = term * b / k as f64;
            sum += term;
        }
        for _ in 0..s {
            sum = sum * sum;
        }
        sum
    }

    #[test]
    fn constant_gradient_matches_matrix_exponential() {
        let a = Mat2::new(0.4, -1.3, 0.9, -0.4);
        let f0 = Mat2::new(1.1, 0.2, -0.1, 0.95);
        let t0 = f0.try_inverse().unwrap();
        for dt in [0.1, 0.05] {
            let (f, t) = evolve_jacobians(f0, t0, a, dt);
            let ef = (f - expm(a * dt) * f0).norm();
            let et = (t - t0 * expm(-a * dt)).norm();
            assert!(ef < dt.powi(5), "{ef}");
            assert!(et < dt.powi(5), "{et}");
        }
    }

    #[test]
    fn constant_field_translates_exactly() {
        let layout = GridLayout::new(16, 16, 1.0 / 16.0, Boundaries::periodic());
        let field = FaceField::filled(&layout, 0.3, -0.2);
        let (x, esc) = rk4_advect(&layout, &field, Vec2::new(0.5, 0.5), 0.1);
        assert!(!esc);
        assert!((x - Vec2::new(0.53, 0.48)).norm() < 1e-14);
    }

    #[test]
    fn reseeding_is_deterministic_and_counts_match() {
        let layout = GridLayout::new(4, 4, 0.25, Boundaries::periodic());
        let field = FaceField::zeros(&layout);
        let cfg = FlowMapConfig::default();
        let a = reinitialize_fluid(&layout, &field, &cfg, 1.0, 7, 3, &|_| false);
        let b = reinitialize_fluid(&layout, &field, &cfg, 1.0, 7, 3, &|_| false);
        assert_eq!(a.len(), 256);
        assert_eq!(a, b);
        let c = reinitialize_fluid(&layout, &field, &cfg, 1.0, 7, 3, &|c| c == 5);
        assert_eq!(c.len(), 240);
        assert!(c.iter().all(|p| layout.cell_of(p.x) != (1, 1)));
    }

    #[test]
    fn subcell_grid_factors() {
        assert_eq!(subcell_grid(16), (4, 4));
        assert_eq!(subcell_grid(4), (2, 2));
        assert_eq!(subcell_grid(8), (4, 2));
        assert_eq!(subcell_grid(5), (5, 1));
    }
}
