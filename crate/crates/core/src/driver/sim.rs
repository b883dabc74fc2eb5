//! The time integration loop: midpoint estimate, flow-map march, impulse
//! conversion, coupling, projection and buffer updates.

use log::{debug, warn};
use rayon::prelude::*;

use super::config::{Backend, Method, SimConfig};
use super::scenario::{Scene, SceneSolid};
use crate::error::{Result, SimError};
use crate::flowmap::{
    march_particles, refill_empty_cells, reinitialize_fluid, rk4_advect, semi_lagrangian, FlowMapConfig,
    FluidParticle,
};
use crate::grid::{
    g2p_gradient, g2p_velocity, g2p_velocity_and_gradient, sample_velocity_linear, solve_projection, FaceField,
    GridLayout, MacGrid, P2gAccumulator, ParticleSample, ProjectionSettings,
};
use crate::ibm::{
    advance_solid, coupling_force, interpolate_to_solid, spread_force, CouplingBalance, IbmMesh, SolidModel,
};
use crate::impulse::{
    convert_particles, update_buffers, viscosity_force, BufferInputs, BufferIntegrand, KineticSource,
};
use crate::math::Vec2;
use crate::mpm::{cull_fluid_in_solid, resample_narrowband, run_substeps, solid_dt_and_substeps, MpmSolid};

/// Counters and measurements of one step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    pub projection_iterations: usize,
    pub midpoint_iterations: usize,
    pub substeps: usize,
    pub inverted: usize,
    pub under_resolved: usize,
    pub folded: usize,
    pub escaped: usize,
    pub culled: usize,
    pub refilled: usize,
    pub coupling: Option<CouplingBalance>,
    pub max_divergence: f64,
}

/// Full simulation state.
pub struct Simulation {
    pub config: SimConfig,
    pub method: Method,
    pub backend: Backend,
    pub grid: MacGrid,
    /// Bulk fluid particles.
    pub particles: Vec<FluidParticle>,
    /// Fluid particles resampled around MPM solid surfaces.
    pub narrowband: Vec<FluidParticle>,
    pub solid: SceneSolid,
    pub fluid_density: f64,
    pub gravity: Vec2,
    pub viscosity: f64,
    pub buoyancy: Vec2,
    pub probe: Option<Vec2>,
    pub reference_speed: f64,
    pub reference_length: f64,
    pub time: f64,
    pub steps: u64,
    /// `(t, cross-stream velocity)` at the probe after every step.
    pub probe_series: Vec<(f64, f64)>,
    pub last: StepReport,
    flowmap: FlowMapConfig,
    projection: ProjectionSettings,
    mid_pressure: Vec<f64>,
    history: Option<Vec<Vec<BufferIntegrand>>>,
}

/// What the midpoint estimate leaves behind.
struct Midpoint {
    velocity: FaceField,
    iterations: usize,
}

fn uses_buffers(method: Method) -> bool {
    method == Method::Pfm
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let scene: Scene = config.scenario.build(&config)?;
        let layout = scene.layout;
        let mut grid = MacGrid::new(layout, scene.fluid_density);
        grid.velocity = scene.velocity;
        grid.velocity.apply_velocity_bc(&layout);
        let projection = config.projection_settings();
        if grid.velocity.max_abs() > 0.0 {
            solve_projection(&mut grid, 1.0, &projection)?;
            grid.pressure.iter_mut().for_each(|p| *p = 0.0);
        }
        let method = config.method;
        let backend = config.backend();
        let mut sim = Simulation {
            flowmap: config.flowmap_config(),
            projection,
            method,
            backend,
            grid,
            particles: Vec::new(),
            narrowband: Vec::new(),
            solid: scene.solid,
            fluid_density: scene.fluid_density,
            gravity: scene.gravity,
            viscosity: scene.viscosity,
            buoyancy: scene.buoyancy,
            probe: scene.probe,
            reference_speed: scene.reference_speed,
            reference_length: scene.reference_length,
            time: 0.0,
            steps: 0,
            probe_series: Vec::new(),
            last: StepReport::default(),
            mid_pressure: vec![0.0; layout.cell_count()],
            history: None,
            config,
        };
        if method.uses_particles() {
            sim.reseed();
            if let SceneSolid::Mpm(solid) = &sim.solid {
                let occ = solid.occupancy(&layout);
                sim.narrowband = resample_narrowband(
                    &layout,
                    &solid.surface,
                    &occ,
                    &sim.grid.velocity,
                    sim.fluid_density,
                    sim.particle_volume(),
                );
            }
        }
        Ok(sim)
    }

    pub fn layout(&self) -> GridLayout {
        self.grid.layout
    }

    fn particle_volume(&self) -> f64 {
        let dx = self.grid.layout.dx;
        dx * dx / self.flowmap.particles_per_cell as f64
    }

    fn occupancy(&self) -> Option<Vec<bool>> {
        match &self.solid {
            SceneSolid::Mpm(s) => Some(s.occupancy(&self.grid.layout)),
            _ => None,
        }
    }

    fn reseed(&mut self) {
        let layout = self.grid.layout;
        let occ = self.occupancy();
        let blocked = |c: usize| occ.as_ref().map_or(false, |o| o[c]);
        self.particles = reinitialize_fluid(
            &layout,
            &self.grid.velocity,
            &self.flowmap,
            self.fluid_density,
            self.config.seed,
            self.steps,
            &blocked,
        );
        self.restart_history();
    }

    fn restart_history(&mut self) {
        if let Some(h) = self.history.as_mut() {
            h.clear();
            h.resize(self.particles.len(), Vec::new());
        }
    }

    /// Starts logging every buffer integrand; see [`Simulation::buffer_history`].
    pub fn enable_history(&mut self) {
        self.history = Some(vec![Vec::new(); self.particles.len()]);
    }

    /// Logged integrands indexed `[particle][step]`. Refilled particles start
    /// an empty log; culling, escapes and reinitialization restart all logs.
    pub fn buffer_history(&self) -> Option<&[Vec<BufferIntegrand>]> {
        self.history.as_deref()
    }

    pub fn mpm_solid(&self) -> Option<&MpmSolid> {
        match &self.solid {
            SceneSolid::Mpm(s) => Some(s),
            _ => None,
        }
    }

    pub fn ibm_mesh(&self) -> Option<&IbmMesh> {
        match &self.solid {
            SceneSolid::Ibm { mesh, .. } => Some(mesh),
            _ => None,
        }
    }

    /// Mass-weighted solid center, if the scene has a movable solid.
    pub fn solid_center(&self) -> Option<Vec2> {
        match &self.solid {
            SceneSolid::Mpm(s) if !s.is_empty() => Some(s.center_of_mass()),
            SceneSolid::Ibm { mesh, .. } => {
                let free: Vec<usize> = (0..mesh.len()).filter(|&k| !mesh.pinned[k]).collect();
                if free.is_empty() {
                    return None;
                }
                let m: f64 = free.iter().map(|&k| mesh.masses[k]).sum();
                Some(free.iter().map(|&k| mesh.positions[k] * mesh.masses[k]).sum::<Vec2>() / m)
            }
            _ => None,
        }
    }

    fn solid_speed(&self) -> f64 {
        match &self.solid {
            SceneSolid::Mpm(s) => s.max_speed(),
            SceneSolid::Ibm { mesh, .. } => mesh.velocities.iter().map(|v| v.norm()).fold(0.0, f64::max),
            SceneSolid::None => 0.0,
        }
    }

    /// `cfl * dx / max speed`, clamped to the configured range.
    pub fn compute_dt(&self) -> f64 {
        if let Some(dt) = self.config.time.fixed_dt {
            return dt;
        }
        compute_dt(
            self.grid.velocity.max_abs().max(self.solid_speed()),
            self.grid.layout.dx,
            self.flowmap.cfl,
            self.config.time.velocity_floor,
            self.config.time.dt_min,
            self.config.time.dt_max,
        )
    }

    fn project(&mut self, dt: f64) -> Result<usize> {
        let r = solve_projection(&mut self.grid, dt, &self.projection)?;
        Ok(r.iterations)
    }

    /// Projects `velocity` with step `dt` using the midpoint pressure slot.
    fn project_field(&mut self, velocity: FaceField, dt: f64) -> Result<(FaceField, usize)> {
        let saved = std::mem::replace(&mut self.grid.velocity, velocity);
        std::mem::swap(&mut self.grid.pressure, &mut self.mid_pressure);
        let res = self.project(dt);
        std::mem::swap(&mut self.grid.pressure, &mut self.mid_pressure);
        let out = std::mem::replace(&mut self.grid.velocity, saved);
        res.map(|it| (out, it))
    }

    /// Couples an immersed structure with `velocity` over `duration`:
    /// returns the spread force density and its bookkeeping.
    fn ibm_couple(
        layout: &GridLayout,
        velocity: &FaceField,
        mesh: &mut IbmMesh,
        model: SolidModel,
        duration: f64,
        dt_solid: f64,
        gravity: Vec2,
        rho: f64,
    ) -> Result<(FaceField, CouplingBalance)> {
        let points = mesh.positions.clone();
        let before = interpolate_to_solid(layout, velocity, &points)?;
        mesh.velocities.clone_from(&before);
        advance_solid(mesh, model, duration, dt_solid, gravity)?;
        let f = coupling_force(&before, &mesh.velocities, duration, rho);
        let point: Vec<Vec2> = f.iter().zip(&mesh.spread_volume).map(|(f, v)| f * *v).collect();
        let spread = spread_force(layout, &points, &point)?;
        let balance = CouplingBalance::new(layout, &spread, &point);
        Ok((spread, balance))
    }

    /// Adds `dt * force / rho_face` to `velocity`; returns the acceleration.
    fn add_force_density(&self, velocity: &mut FaceField, force: &FaceField, dt: f64) -> FaceField {
        let mut acc = force.clone();
        for (a, r) in acc.u.iter_mut().zip(&self.grid.density.u) {
            *a /= r;
        }
        for (a, r) in acc.v.iter_mut().zip(&self.grid.density.v) {
            *a /= r;
        }
        velocity.axpy(dt, &acc);
        acc
    }

    /// Grid-only half (or full) step used by the midpoint estimate of the
    /// fluid-only and immersed-boundary backends and by the Eulerian method.
    fn eulerian_predict(
        &mut self,
        source: &FaceField,
        transport: &FaceField,
        dt: f64,
        couple: bool,
        commit_solid: bool,
    ) -> Result<(FaceField, Option<(FaceField, CouplingBalance)>)> {
        let layout = self.grid.layout;
        let mut u = semi_lagrangian(&layout, source, transport, dt);
        let g = self.gravity + self.buoyancy;
        u.u.iter_mut().for_each(|x| *x += dt * g.x);
        u.v.iter_mut().for_each(|x| *x += dt * g.y);
        if self.viscosity > 0.0 {
            let visc = viscosity_force(&layout, source, self.viscosity);
            u.axpy(dt, &visc);
        }
        u.apply_velocity_bc(&layout);
        let mut coupled = None;
        if couple {
            if let SceneSolid::Ibm { mesh, model } = &mut self.solid {
                let dt_solid = self.config.solid.dt_solid;
                let model = match *model {
                    SolidModel::Xpbd { .. } => SolidModel::Xpbd {
                        iterations: self.config.solid.xpbd_iterations,
                    },
                    m => m,
                };
                let res = if commit_solid {
                    Self::ibm_couple(&layout, &u, mesh, model, dt, dt_solid, self.gravity, self.fluid_density)?
                } else {
                    let mut scratch = mesh.clone();
                    Self::ibm_couple(&layout, &u, &mut scratch, model, dt, dt_solid, self.gravity, self.fluid_density)?
                };
                self.add_force_density(&mut u, &res.0, dt);
                coupled = Some(res);
            }
        }
        Ok((u, coupled))
    }

    /// Particle samples of the bulk fluid for a P2G; excluded particles skipped.
    fn fluid_samples(particles: &[FluidParticle]) -> impl Iterator<Item = ParticleSample> + '_ {
        particles.iter().filter(|p| !p.excluded).map(|p| p.sample())
    }

    fn midpoint_mpm(&mut self, u_b: &FaceField, dt: f64, half: usize, dt_s: f64) -> Result<Midpoint> {
        let layout = self.grid.layout;
        let mut u_sub = u_b.clone();
        let SceneSolid::Mpm(solid) = &mut self.solid else {
            unreachable!("mpm midpoint without solid")
        };
        let r = run_substeps(&layout, solid, &mut self.narrowband, &mut u_sub, dt_s, half, self.time);
        self.last.substeps += r.substeps;
        self.last.inverted += r.inverted;
        let half_dt = 0.5 * dt;
        let buoy = self.buoyancy;
        let samples: Vec<ParticleSample> = self
            .particles
            .par_iter()
            .filter(|p| !p.excluded)
            .map(|p| {
                let (v, g) = g2p_velocity_and_gradient(&layout, u_b, p.x);
                let (x, _) = rk4_advect(&layout, u_b, p.x, half_dt);
                ParticleSample {
                    position: x,
                    velocity: v + half_dt * buoy,
                    gradient: g,
                    mass: p.mass,
                    volume: p.volume,
                }
            })
            .collect();
        let mut acc = P2gAccumulator::new(&layout);
        for s in &samples {
            acc.add(&layout, s);
        }
        for p in &self.narrowband {
            acc.add(&layout, &p.sample());
        }
        let SceneSolid::Mpm(solid) = &self.solid else { unreachable!() };
        for s in solid.samples() {
            acc.add(&layout, &s);
        }
        acc.add_uniform_impulse(half_dt * self.gravity);
        let mut u = u_b.clone();
        let mut au = vec![false; u.u.len()];
        let mut av = vec![false; u.v.len()];
        acc.write_velocity(&layout, &mut u, &mut au, &mut av);
        acc.write_density(&layout, &mut self.grid.density, self.fluid_density);
        let (velocity, iterations) = self.project_field(u, half_dt)?;
        Ok(Midpoint { velocity, iterations })
    }

    fn midpoint(&mut self, u_b: &FaceField, dt: f64, mpm_plan: Option<(usize, f64)>) -> Result<Midpoint> {
        match (self.backend, mpm_plan) {
            (Backend::Mpm, Some((k, dt_s))) => self.midpoint_mpm(u_b, dt, k / 2, dt_s),
            _ => {
                let (u, _) = self.eulerian_predict(u_b, u_b, 0.5 * dt, true, false)?;
                let (velocity, iterations) = self.project_field(u, 0.5 * dt)?;
                Ok(Midpoint { velocity, iterations })
            }
        }
    }

    /// Advances the state by one step.
    pub fn step(&mut self) -> Result<&StepReport> {
        self.last = StepReport::default();
        let layout = self.grid.layout;
        if self.method.uses_particles() {
            self.prepare_particles();
        }
        let dt = self.compute_dt();
        self.last.dt = dt;
        let mpm_plan = match &self.solid {
            SceneSolid::Mpm(solid) if self.backend == Backend::Mpm => {
                let mats: Vec<_> = solid.bodies.iter().map(|b| b.material).collect();
                let (_, k) = solid_dt_and_substeps(
                    &mats,
                    layout.dx,
                    dt,
                    solid.max_speed().max(self.grid.velocity.max_abs()),
                    &self.config.substep_settings(),
                );
                Some((k, dt / k as f64))
            }
            _ => None,
        };

        let u_b = self.grid.velocity.clone();
        let mid = self.midpoint(&u_b, dt, mpm_plan)?;
        self.last.midpoint_iterations = mid.iterations;
        let u_mid = mid.velocity;

        if self.method == Method::EulerSl {
            self.euler_step(&u_b, &u_mid, dt)?;
        } else {
            self.particle_step(&u_b, &u_mid, dt, mpm_plan)?;
        }

        if !self.grid.velocity.is_finite() || self.grid.pressure.iter().any(|p| !p.is_finite()) {
            return Err(SimError::NonFinite {
                what: format!("grid state at step {}", self.steps + 1),
            });
        }
        self.time += dt;
        self.steps += 1;
        self.last.max_divergence = self.grid.max_divergence();
        if let Some(p) = self.probe {
            let v = sample_velocity_linear(&layout, &self.grid.velocity, p);
            self.probe_series.push((self.time, v.y));
        }
        debug!(
            "step {} t={:.4} dt={:.3e} cg={}/{} sub={} div={:.2e}",
            self.steps,
            self.time,
            dt,
            self.last.midpoint_iterations,
            self.last.projection_iterations,
            self.last.substeps,
            self.last.max_divergence
        );
        Ok(&self.last)
    }

    /// Reinitialization, narrowband resampling, culling and refilling.
    fn prepare_particles(&mut self) {
        let layout = self.grid.layout;
        if self.steps > 0 && self.steps % self.flowmap.n_reinit as u64 == 0 {
            self.reseed();
        }
        if self.method == Method::ApicMidpoint {
            let u = &self.grid.velocity;
            self.particles.par_iter_mut().for_each(|p| {
                let (v, g) = g2p_velocity_and_gradient(&layout, u, p.x);
                p.reset_map(v);
                p.affine = g;
            });
        }
        let occ = self.occupancy();
        if let (Some(occ), SceneSolid::Mpm(solid)) = (&occ, &self.solid) {
            if self.steps % self.flowmap.n_reinit_narrowband as u64 == 0 {
                self.narrowband = resample_narrowband(
                    &layout,
                    &solid.surface,
                    occ,
                    &self.grid.velocity,
                    self.fluid_density,
                    self.particle_volume(),
                );
            }
            self.last.culled = cull_fluid_in_solid(&layout, &mut self.particles, occ);
        }
        let blocked = |c: usize| occ.as_ref().map_or(false, |o| o[c]);
        self.last.refilled = refill_empty_cells(
            &layout,
            &mut self.particles,
            &self.grid.velocity,
            &self.flowmap,
            self.fluid_density,
            self.config.seed,
            self.steps,
            &blocked,
        );
        if self.last.culled > 0 && self.history.is_some() {
            warn!("particles culled; buffer history restarted");
            self.restart_history();
        } else if let Some(h) = self.history.as_mut() {
            h.resize(self.particles.len(), Vec::new());
        }
    }

    fn euler_step(&mut self, u_b: &FaceField, u_mid: &FaceField, dt: f64) -> Result<()> {
        let (u, coupled) = self.eulerian_predict(u_b, u_mid, dt, true, true)?;
        self.grid.velocity = u;
        self.last.coupling = coupled.map(|c| c.1);
        self.last.projection_iterations = self.project(dt)?;
        Ok(())
    }

    fn particle_step(
        &mut self,
        u_b: &FaceField,
        u_mid: &FaceField,
        dt: f64,
        mpm_plan: Option<(usize, f64)>,
    ) -> Result<()> {
        let layout = self.grid.layout;
        let march = march_particles(&layout, &mut self.particles, u_mid, dt);
        self.last.folded = march.folded;
        self.last.escaped = march.escaped;
        if march.escaped > 0 {
            self.restart_history();
        }

        if let (Some((k, dt_s)), SceneSolid::Mpm(solid)) = (mpm_plan, &mut self.solid) {
            let half = k / 2;
            let mut u_sub = u_mid.clone();
            let r = run_substeps(
                &layout,
                solid,
                &mut self.narrowband,
                &mut u_sub,
                dt_s,
                k - half,
                self.time + half as f64 * dt_s,
            );
            self.last.substeps += r.substeps;
            self.last.inverted += r.inverted;
            solid.gather(&layout, &u_sub);
        }

        // impulse (or velocity) to divergent velocity
        let ke_field = match self.config.kinetic_source {
            KineticSource::Midpoint => u_mid,
            KineticSource::Start => u_b,
        };
        let buoy = self.buoyancy;
        for set in [&mut self.particles, &mut self.narrowband] {
            match self.method {
                Method::Pfm => convert_particles(&layout, set, ke_field, Some(u_mid), dt),
                Method::ApicMidpoint => set.par_iter_mut().for_each(|p| {
                    p.velocity = p.impulse;
                    p.affine = g2p_gradient(&layout, u_mid, p.x);
                }),
                Method::DirectHfmc => set.par_iter_mut().for_each(|p| {
                    p.velocity = p.backward.transpose() * p.impulse;
                    p.affine = g2p_gradient(&layout, u_mid, p.x);
                }),
                Method::EulerSl => unreachable!(),
            }
            if buoy != Vec2::zeros() {
                set.par_iter_mut().for_each(|p| p.velocity += dt * buoy);
            }
        }

        let mut acc = P2gAccumulator::new(&layout);
        for s in Self::fluid_samples(&self.particles).chain(Self::fluid_samples(&self.narrowband)) {
            acc.add(&layout, &s);
        }
        if let SceneSolid::Mpm(solid) = &self.solid {
            for s in solid.samples() {
                acc.add(&layout, &s);
            }
        }
        acc.add_uniform_impulse(dt * self.gravity);
        self.grid.velocity = u_b.clone();
        let report = acc.write_velocity(
            &layout,
            &mut self.grid.velocity,
            &mut self.grid.active_u,
            &mut self.grid.active_v,
        );
        self.last.under_resolved = report.under_resolved;
        acc.write_density(&layout, &mut self.grid.density, self.fluid_density);

        let mut force_field: Option<FaceField> = None;
        if self.viscosity > 0.0 {
            let m = self.impulse_grid(u_b);
            let visc = viscosity_force(&layout, &m, self.viscosity);
            self.grid.velocity.axpy(dt, &visc);
            force_field = Some(visc);
        }
        self.grid.velocity.apply_velocity_bc(&layout);

        if let SceneSolid::Ibm { mesh, model } = &mut self.solid {
            let model = match *model {
                SolidModel::Xpbd { .. } => SolidModel::Xpbd {
                    iterations: self.config.solid.xpbd_iterations,
                },
                m => m,
            };
            let (spread, balance) = Self::ibm_couple(
                &layout,
                &self.grid.velocity,
                mesh,
                model,
                dt,
                self.config.solid.dt_solid,
                self.gravity,
                self.fluid_density,
            )?;
            let mut u = std::mem::replace(&mut self.grid.velocity, FaceField::zeros(&layout));
            let accel = self.add_force_density(&mut u, &spread, dt);
            self.grid.velocity = u;
            match &mut force_field {
                Some(f) => f.axpy(1.0, &accel),
                None => force_field = Some(accel),
            }
            self.last.coupling = Some(balance);
        }

        self.last.projection_iterations = self.project(dt)?;

        if uses_buffers(self.method) {
            let inputs = BufferInputs {
                layout: &layout,
                velocity: &self.grid.velocity,
                pressure: &self.grid.pressure,
                uniform_force: self.gravity + self.buoyancy,
                force_field: force_field.as_ref(),
                dt,
            };
            let mut log = self.history.as_ref().map(|_| Vec::new());
            update_buffers(&inputs, &mut self.particles, log.as_mut());
            update_buffers(&inputs, &mut self.narrowband, None);
            if let (Some(h), Some(step)) = (self.history.as_mut(), log) {
                for (particle, entry) in h.iter_mut().zip(step) {
                    particle.push(entry);
                }
            }
        }
        Ok(())
    }

    /// Grid transfer of the particles' current impulse, for the viscous term.
    fn impulse_grid(&self, fallback: &FaceField) -> FaceField {
        let layout = self.grid.layout;
        let mut acc = P2gAccumulator::new(&layout);
        let method = self.method;
        for p in self.particles.iter().chain(&self.narrowband).filter(|p| !p.excluded) {
            let m = match method {
                Method::ApicMidpoint => p.impulse,
                _ => p.backward.transpose() * p.impulse,
            };
            acc.add(
                &layout,
                &ParticleSample {
                    position: p.x,
                    velocity: m,
                    gradient: p.affine,
                    mass: p.mass,
                    volume: p.volume,
                },
            );
        }
        let mut out = fallback.clone();
        let mut au = vec![false; out.u.len()];
        let mut av = vec![false; out.v.len()];
        acc.write_velocity(&layout, &mut out, &mut au, &mut av);
        out
    }

    /// Cross-stream velocity at the probe, sampled from the current grid.
    pub fn probe_velocity(&self) -> Option<Vec2> {
        self.probe
            .map(|p| g2p_velocity(&self.grid.layout, &self.grid.velocity, p))
    }
}

/// `cfl * dx / max(speed, floor)` clamped to `[dt_min, dt_max]`.
pub fn compute_dt(max_speed: f64, dx: f64, cfl: f64, floor: f64, dt_min: f64, dt_max: f64) -> f64 {
    (cfl * dx / max_speed.max(floor)).clamp(dt_min, dt_max)
}
