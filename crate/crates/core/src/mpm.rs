//! Material point elastic solids sharing the fluid grid: fixed-corotated
//! stress, active-strain actuation, substepping, and the narrowband fluid
//! particles that keep the fluid/solid interface resolved.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flowmap::{rk4_march, FluidParticle};
use crate::grid::{
    g2p_velocity_and_gradient, FaceField, GridLayout, P2gAccumulator, ParticleSample,
};
use crate::math::{mix_seed, Mat2, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub youngs: f64,
    pub poisson: f64,
    pub density: f64,
}

impl Material {
    /// `(mu, lambda)`.
    pub fn lame(&self) -> (f64, f64) {
        let e = self.youngs;
        let nu = self.poisson;
        (e / (2.0 * (1.0 + nu)), e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)))
    }

    pub fn sound_speed(&self) -> f64 {
        (self.youngs / self.density).sqrt()
    }
}

/// Rotation factor of the 2D polar decomposition `F = R S`.
pub fn polar_rotation(f: &Mat2) -> Mat2 {
    let a = f[(0, 0)] + f[(1, 1)];
    let b = f[(1, 0)] - f[(0, 1)];
    let n = (a * a + b * b).sqrt();
    if n == 0.0 {
        return Mat2::identity();
    }
    let (c, s) = (a / n, b / n);
    Mat2::new(c, -s, s, c)
}

/// Fixed-corotated first Piola stress `2 mu (F - R) + lambda (J - 1) cof(F)`.
/// The flag is set when `det F <= 0`; the formula stays finite there.
pub fn elastic_stress(f: &Mat2, material: &Material) -> (Mat2, bool) {
    let (mu, lambda) = material.lame();
    let r = polar_rotation(f);
    let j = f.determinant();
    let cof = Mat2::new(f[(1, 1)], -f[(1, 0)], -f[(0, 1)], f[(0, 0)]);
    (2.0 * mu * (f - r) + lambda * (j - 1.0) * cof, j <= 0.0)
}

/// Fixed-corotated energy density, used by tests as an oracle.
pub fn elastic_energy(f: &Mat2, material: &Material) -> f64 {
    let (mu, lambda) = material.lame();
    let r = polar_rotation(f);
    let j = f.determinant();
    mu * (f - r).norm_squared() + 0.5 * lambda * (j - 1.0) * (j - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActuationMode {
    /// Signed sine: one side contracts, then the other side stretches.
    Swimmer,
    /// Rectified sine: the two sides contract alternately.
    Fish,
}

/// Material axis that carries the principal contraction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractionAxis {
    /// Across the body; the profile varies through the thickness and bends it.
    #[default]
    Cross,
    /// Along the body; the profile varies along its length.
    Long,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveStrainSchedule {
    pub alpha: f64,
    pub period: f64,
    pub mode: ActuationMode,
    pub axis: ContractionAxis,
    /// Material extent along the contraction axis.
    pub thickness: f64,
    /// Decay length; defaults to a third of the thickness.
    pub decay: Option<f64>,
    /// Active interval on the long axis, as fractions of its length.
    pub activation_range: (f64, f64),
}

impl ActiveStrainSchedule {
    pub fn decay_length(&self) -> f64 {
        self.decay.unwrap_or(self.thickness / 3.0)
    }

    /// Principal stretch at time `t` for material coordinate `y` along the
    /// contraction axis (0 at the lower surface, `thickness` at the upper).
    pub fn stretch(&self, t: f64, y: f64) -> f64 {
        let phase = t.rem_euclid(self.period);
        let mut s = (2.0 * PI * phase / self.period).sin();
        if self.mode == ActuationMode::Fish {
            s = s.abs();
        }
        let d0 = self.decay_length();
        let profile = if phase <= 0.5 * self.period {
            (-(self.thickness - y) / d0).exp()
        } else {
            (-y / d0).exp()
        };
        1.0 - self.alpha * s * profile
    }

    pub fn is_active(&self, long_fraction: f64) -> bool {
        long_fraction >= self.activation_range.0 && long_fraction <= self.activation_range.1
    }
}

/// `F_e = F_total F_a^{-1}` with `F_a = diag(1/lambda, lambda)` in the
/// material frame (long axis first, contraction axis second).
pub fn apply_active_strain(f_total: &Mat2, stretch: f64) -> Mat2 {
    let fa_inv = Mat2::new(stretch, 0.0, 0.0, 1.0 / stretch);
    f_total * fa_inv
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MpmSolidParticle {
    pub x: Vec2,
    pub v: Vec2,
    /// Affine velocity matrix.
    pub affine: Mat2,
    /// Deformation gradient advected by the grid (before actuation).
    pub deformation: Mat2,
    pub mass: f64,
    pub volume: f64,
    /// Rest position in body coordinates: long axis, then contraction axis.
    pub rest: Vec2,
    pub body: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceSample {
    pub x: Vec2,
    pub normal: Vec2,
    pub offset: f64,
    pub backward: Mat2,
    pub body: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolidBody {
    pub material: Material,
    pub schedule: Option<ActiveStrainSchedule>,
    /// Length of the long axis, used to place the activation range.
    pub length: f64,
}

/// Primitive solid shapes, axis aligned at rest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Disk { center: [f64; 2], radius: f64 },
    Box { center: [f64; 2], size: [f64; 2] },
    /// A rectangle with semicircular ends; `size` is the full extent.
    Capsule { center: [f64; 2], size: [f64; 2] },
}

impl Shape {
    fn center(&self) -> Vec2 {
        match *self {
            Shape::Disk { center, .. } | Shape::Box { center, .. } | Shape::Capsule { center, .. } => {
                Vec2::new(center[0], center[1])
            }
        }
    }

    fn half_extent(&self) -> Vec2 {
        match *self {
            Shape::Disk { radius, .. } => Vec2::new(radius, radius),
            Shape::Box { size, .. } | Shape::Capsule { size, .. } => Vec2::new(0.5 * size[0], 0.5 * size[1]),
        }
    }

    pub fn contains(&self, x: Vec2) -> bool {
        let d = x - self.center();
        let h = self.half_extent();
        match *self {
            Shape::Disk { radius, .. } => d.norm() <= radius,
            Shape::Box { .. } => d.x.abs() <= h.x && d.y.abs() <= h.y,
            Shape::Capsule { .. } => {
                let r = h.y.min(h.x);
                let core = (h.x - r).max(0.0);
                let px = (d.x.abs() - core).max(0.0);
                (px * px + d.y * d.y).sqrt() <= r
            }
        }
    }

    /// Boundary points spaced roughly `spacing` apart with outward normals.
    pub fn boundary(&self, spacing: f64) -> Vec<(Vec2, Vec2)> {
        let c = self.center();
        let h = self.half_extent();
        let mut out = Vec::new();
        let arc = |center: Vec2, r: f64, a0: f64, a1: f64, out: &mut Vec<(Vec2, Vec2)>| {
            let n = ((r * (a1 - a0)).abs() / spacing).ceil().max(1.0) as usize;
            for k in 0..n {
                let a = a0 + (a1 - a0) * (k as f64 + 0.5) / n as f64;
                let nrm = Vec2::new(a.cos(), a.sin());
                out.push((center + r * nrm, nrm));
            }
        };
        let segment = |p0: Vec2, p1: Vec2, nrm: Vec2, out: &mut Vec<(Vec2, Vec2)>| {
            let len = (p1 - p0).norm();
            let n = (len / spacing).ceil().max(1.0) as usize;
            for k in 0..n {
                out.push((p0 + (p1 - p0) * ((k as f64 + 0.5) / n as f64), nrm));
            }
        };
        match *self {
            Shape::Disk { radius, .. } => arc(c, radius, 0.0, 2.0 * PI, &mut out),
            Shape::Box { .. } => {
                let (x0, x1, y0, y1) = (c.x - h.x, c.x + h.x, c.y - h.y, c.y + h.y);
                segment(Vec2::new(x0, y0), Vec2::new(x1, y0), Vec2::new(0.0, -1.0), &mut out);
                segment(Vec2::new(x1, y0), Vec2::new(x1, y1), Vec2::new(1.0, 0.0), &mut out);
                segment(Vec2::new(x1, y1), Vec2::new(x0, y1), Vec2::new(0.0, 1.0), &mut out);
                segment(Vec2::new(x0, y1), Vec2::new(x0, y0), Vec2::new(-1.0, 0.0), &mut out);
            }
            Shape::Capsule { .. } => {
                let r = h.y.min(h.x);
                let core = (h.x - r).max(0.0);
                let (xl, xr) = (c.x - core, c.x + core);
                if core > 0.0 {
                    segment(Vec2::new(xl, c.y - r), Vec2::new(xr, c.y - r), Vec2::new(0.0, -1.0), &mut out);
                    segment(Vec2::new(xr, c.y + r), Vec2::new(xl, c.y + r), Vec2::new(0.0, 1.0), &mut out);
                }
                arc(Vec2::new(xr, c.y), r, -0.5 * PI, 0.5 * PI, &mut out);
                arc(Vec2::new(xl, c.y), r, 0.5 * PI, 1.5 * PI, &mut out);
            }
        }
        out
    }
}

/// All MPM solids of a scene.
#[derive(Clone, Debug, Default)]
pub struct MpmSolid {
    pub bodies: Vec<SolidBody>,
    pub particles: Vec<MpmSolidParticle>,
    pub surface: Vec<SurfaceSample>,
}

/// Counters from a run of substeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SubstepReport {
    pub substeps: usize,
    pub inverted: usize,
    pub clamped: usize,
}

impl MpmSolid {
    /// Samples `shape` with particles on a lattice of spacing `dx / 2` and
    /// surface samples every `dx / 2` of arc length, offsets drawn from a
    /// generator seeded by `seed`.
    pub fn add_body(
        &mut self,
        layout: &GridLayout,
        shape: Shape,
        material: Material,
        schedule: Option<ActiveStrainSchedule>,
        seed: u64,
    ) {
        let body = self.bodies.len();
        let h = 0.5 * layout.dx;
        let c = shape.center();
        let ext = shape.half_extent();
        let lo = c - ext;
        let nx = (2.0 * ext.x / h).ceil() as usize + 1;
        let ny = (2.0 * ext.y / h).ceil() as usize + 1;
        let vol = h * h;
        for b in 0..ny {
            for a in 0..nx {
                let x = Vec2::new(
                    (((lo.x / h).floor() + a as f64) + 0.5) * h,
                    (((lo.y / h).floor() + b as f64) + 0.5) * h,
                );
                if !shape.contains(x) {
                    continue;
                }
                self.particles.push(MpmSolidParticle {
                    x,
                    v: Vec2::zeros(),
                    affine: Mat2::zeros(),
                    deformation: Mat2::identity(),
                    mass: material.density * vol,
                    volume: vol,
                    rest: x - lo,
                    body,
                });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x50_11d, body as u64));
        for (x, n) in shape.boundary(h) {
            // offset in (0, 1.5 dx]
            let u: f64 = rng.gen();
            self.surface.push(SurfaceSample {
                x,
                normal: n,
                offset: 1.5 * layout.dx * (1.0 - u),
                backward: Mat2::identity(),
                body,
            });
        }
        self.bodies.push(SolidBody {
            material,
            schedule,
            length: 2.0 * ext.x,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn max_speed(&self) -> f64 {
        self.particles.iter().map(|p| p.v.norm()).fold(0.0, f64::max)
    }

    pub fn center_of_mass(&self) -> Vec2 {
        let m: f64 = self.particles.iter().map(|p| p.mass).sum();
        self.particles.iter().map(|p| p.x * p.mass).sum::<Vec2>() / m
    }

    pub fn momentum(&self) -> Vec2 {
        self.particles.iter().map(|p| p.v * p.mass).sum()
    }

    /// Marks cells that contain at least one solid particle.
    pub fn occupancy(&self, layout: &GridLayout) -> Vec<bool> {
        let mut occ = vec![false; layout.cell_count()];
        for p in &self.particles {
            let (i, j) = layout.cell_of(p.x);
            occ[layout.cell_index(i, j)] = true;
        }
        occ
    }

    /// Stress-ready deformation of particle `p` at time `t`.
    pub fn elastic_deformation(&self, p: &MpmSolidParticle, t: f64) -> Mat2 {
        match self.bodies[p.body].schedule {
            Some(s) if s.is_active(p.rest.x / self.bodies[p.body].length) => match s.axis {
                ContractionAxis::Cross => apply_active_strain(&p.deformation, s.stretch(t, p.rest.y)),
                ContractionAxis::Long => apply_active_strain(&p.deformation, 1.0 / s.stretch(t, p.rest.x)),
            },
            _ => p.deformation,
        }
    }

    /// Samples for a synchronization P2G (velocity and affine matrix only).
    pub fn samples(&self) -> Vec<ParticleSample> {
        self.particles
            .iter()
            .map(|p| ParticleSample {
                position: p.x,
                velocity: p.v,
                gradient: p.affine,
                mass: p.mass,
                volume: p.volume,
            })
            .collect()
    }

    /// Sets solid velocities and affine matrices from a grid field.
    pub fn gather(&mut self, layout: &GridLayout, field: &FaceField) {
        self.particles.par_iter_mut().for_each(|p| {
            let (v, g) = g2p_velocity_and_gradient(layout, field, p.x);
            p.v = v;
            p.affine = g;
        });
    }
}

/// Removes fluid particles lying in solid-occupied cells.
pub fn cull_fluid_in_solid(layout: &GridLayout, particles: &mut Vec<FluidParticle>, occupancy: &[bool]) -> usize {
    let before = particles.len();
    particles.retain(|p| {
        let (i, j) = layout.cell_of(p.x);
        !occupancy[layout.cell_index(i, j)]
    });
    before - particles.len()
}

/// Builds narrowband particles offset from the surface samples along their
/// transported normals, dropping any that land in a solid cell or outside.
pub fn resample_narrowband(
    layout: &GridLayout,
    surface: &[SurfaceSample],
    occupancy: &[bool],
    velocity: &FaceField,
    density: f64,
    volume: f64,
) -> Vec<FluidParticle> {
    surface
        .iter()
        .filter_map(|s| {
            let x = s.x + s.backward.transpose() * s.normal * s.offset;
            if !layout.contains(x) {
                return None;
            }
            let (i, j) = layout.cell_of(x);
            if occupancy[layout.cell_index(i, j)] {
                return None;
            }
            let (v, g) = g2p_velocity_and_gradient(layout, velocity, x);
            let mut p = FluidParticle::new(x, v, density, volume);
            p.affine = g;
            p.narrowband = true;
            Some(p)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubstepSettings {
    pub sound_cfl: f64,
    pub velocity_cfl: f64,
}

impl Default for SubstepSettings {
    fn default() -> Self {
        SubstepSettings {
            sound_cfl: 0.3,
            velocity_cfl: 0.5,
        }
    }
}

/// `(dt_s, k)`: the solid step and an even substep count covering `dt`.
pub fn solid_dt_and_substeps(
    materials: &[Material],
    dx: f64,
    dt: f64,
    max_speed: f64,
    settings: &SubstepSettings,
) -> (f64, usize) {
    let mut dt_s = f64::INFINITY;
    for m in materials {
        dt_s = dt_s.min(settings.sound_cfl * dx / m.sound_speed());
    }
    if max_speed > 0.0 {
        dt_s = dt_s.min(settings.velocity_cfl * dx / max_speed);
    }
    if !dt_s.is_finite() {
        return (0.5 * dt, 2);
    }
    let mut k = (dt / dt_s).ceil().max(2.0) as usize;
    if k % 2 == 1 {
        k += 1;
    }
    (dt_s, k)
}

/// One MPM cycle on the narrowband/solid subset: gather from `u_sub`,
/// advance positions and deformation, scatter momentum and stress impulses
/// back into `u_sub`.
pub fn mpm_substep(
    layout: &GridLayout,
    solid: &mut MpmSolid,
    narrowband: &mut [FluidParticle],
    u_sub: &mut FaceField,
    dt: f64,
    time: f64,
) -> SubstepReport {
    let mut report = SubstepReport {
        substeps: 1,
        ..Default::default()
    };
    let field = &*u_sub;
    let clamped: usize = solid
        .particles
        .par_iter_mut()
        .map(|p| {
            let (v, c) = g2p_velocity_and_gradient(layout, field, p.x);
            p.v = v;
            p.affine = c;
            p.deformation = (Mat2::identity() + dt * c) * p.deformation;
            let (x, was_clamped) = layout.confine(p.x + dt * v);
            p.x = x;
            usize::from(was_clamped)
        })
        .sum();
    report.clamped += clamped;
    narrowband.par_iter_mut().for_each(|p| {
        let r = rk4_march(layout, p.x, p.forward, p.backward, dt, |q| {
            g2p_velocity_and_gradient(layout, field, q)
        });
        p.x = r.x;
        p.forward = r.forward;
        p.backward = r.backward;
        let (v, g) = g2p_velocity_and_gradient(layout, field, p.x);
        p.velocity = v;
        p.affine = g;
    });
    solid.surface.par_iter_mut().for_each(|s| {
        let r = rk4_march(layout, s.x, Mat2::identity(), s.backward, dt, |q| {
            g2p_velocity_and_gradient(layout, field, q)
        });
        s.x = r.x;
        s.backward = r.backward;
    });

    let mut acc = P2gAccumulator::new(layout);
    for p in narrowband.iter() {
        acc.add(layout, &p.sample());
    }
    for p in &solid.particles {
        acc.add(
            layout,
            &ParticleSample {
                position: p.x,
                velocity: p.v,
                gradient: p.affine,
                mass: p.mass,
                volume: p.volume,
            },
        );
        let fe = solid.elastic_deformation(p, time + dt);
        let (stress, inverted) = elastic_stress(&fe, &solid.bodies[p.body].material);
        if inverted {
            report.inverted += 1;
        }
        let kirchhoff = p.volume * stress * fe.transpose();
        acc.add_stress_impulse(layout, p.x, &kirchhoff, dt);
    }
    let mut au = vec![false; u_sub.u.len()];
    let mut av = vec![false; u_sub.v.len()];
    acc.write_velocity(layout, u_sub, &mut au, &mut av);
    u_sub.apply_velocity_bc(layout);
    report
}

/// Runs `count` substeps of length `dt_s` starting at `time`.
pub fn run_substeps(
    layout: &GridLayout,
    solid: &mut MpmSolid,
    narrowband: &mut [FluidParticle],
    u_sub: &mut FaceField,
    dt_s: f64,
    count: usize,
    time: f64,
) -> SubstepReport {
    let mut total = SubstepReport::default();
    for k in 0..count {
        let r = mpm_substep(layout, solid, narrowband, u_sub, dt_s, time + k as f64 * dt_s);
        total.substeps += r.substeps;
        total.inverted += r.inverted;
        total.clamped += r.clamped;
    }
    total
}
