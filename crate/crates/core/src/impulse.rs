//! Impulse transport along flow maps, the pressure and force path-integral
//! buffers, and conversion back to a (divergent) particle velocity.

use rayon::prelude::*;

use crate::flowmap::FluidParticle;
use crate::grid::{
    g2p_cell_gradient, g2p_velocity, g2p_velocity_and_gradient, EdgeMode, FaceField, GridLayout,
    Staggering,
};
use crate::math::{Mat2, Vec2};

/// `m_c = T^T m_a`.
#[inline]
pub fn map_impulse(impulse: Vec2, backward: &Mat2) -> Vec2 {
    backward.transpose() * impulse
}

/// `grad(|u|^2 / 2) = G^T u` for velocity `u` with gradient `G`.
#[inline]
pub fn grad_half_speed_sq(u: Vec2, grad: &Mat2) -> Vec2 {
    grad.transpose() * u
}

/// `u* = m_c - T^T (pressure_buffer - force_buffer) + dt (grad_ke + force)`.
#[inline]
pub fn impulse_to_velocity(
    m_c: Vec2,
    pressure_buffer: Vec2,
    force_buffer: Vec2,
    backward: &Mat2,
    grad_ke: Vec2,
    force: Vec2,
    dt: f64,
) -> Vec2 {
    m_c - backward.transpose() * (pressure_buffer - force_buffer) + dt * (grad_ke + force)
}

/// `buffer + F^T dt (grad_p / rho - grad_ke)`.
#[inline]
pub fn update_pressure_buffer(
    buffer: Vec2,
    forward: &Mat2,
    grad_p: Vec2,
    grad_ke: Vec2,
    density: f64,
    dt: f64,
) -> Vec2 {
    buffer + forward.transpose() * (dt * (grad_p / density - grad_ke))
}

/// `buffer + F^T dt f`.
#[inline]
pub fn update_force_buffer(buffer: Vec2, forward: &Mat2, force: Vec2, dt: f64) -> Vec2 {
    buffer + forward.transpose() * (dt * force)
}

/// Which velocity feeds the kinetic-energy gradient term of the conversion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KineticSource {
    /// Midpoint velocity of the current step.
    #[default]
    Midpoint,
    /// Velocity at the start of the step.
    Start,
}

/// Transports every particle's impulse with its backward map and converts it
/// into the velocity transferred to the grid. `ke_field` supplies the
/// kinetic-energy gradient; the APIC gradient at the new position comes from
/// `affine_field`, or from `ke_field` when that is `None`.
pub fn convert_particles(
    layout: &GridLayout,
    particles: &mut [FluidParticle],
    ke_field: &FaceField,
    affine_field: Option<&FaceField>,
    dt: f64,
) {
    particles.par_iter_mut().for_each(|p| {
        let m_c = map_impulse(p.impulse, &p.backward);
        let (u, g) = g2p_velocity_and_gradient(layout, ke_field, p.x);
        let ke = grad_half_speed_sq(u, &g);
        p.velocity = impulse_to_velocity(
            m_c,
            p.pressure_buffer,
            p.force_buffer,
            &p.backward,
            ke,
            Vec2::zeros(),
            dt,
        );
        p.affine = match affine_field {
            Some(field) => crate::grid::g2p_gradient(layout, field, p.x),
            None => g,
        };
    });
}

/// Per-particle integrands of one buffer update, for history replay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BufferIntegrand {
    pub forward: Mat2,
    /// `grad_p / rho - grad_ke`.
    pub pressure: Vec2,
    pub force: Vec2,
    pub dt: f64,
}

/// Everything the buffer update needs from the post-projection state.
pub struct BufferInputs<'a> {
    pub layout: &'a GridLayout,
    pub velocity: &'a FaceField,
    pub pressure: &'a [f64],
    /// Uniform acceleration (gravity, buoyancy).
    pub uniform_force: Vec2,
    /// Spatially varying acceleration on faces (viscosity, coupling).
    pub force_field: Option<&'a FaceField>,
    pub dt: f64,
}

/// Accumulates this step's pressure and force integrands into the buffers.
/// When `log` is given, the integrands are appended in particle order.
pub fn update_buffers(
    inputs: &BufferInputs<'_>,
    particles: &mut [FluidParticle],
    log: Option<&mut Vec<BufferIntegrand>>,
) {
    let integrands: Vec<BufferIntegrand> = particles
        .par_iter_mut()
        .map(|p| {
            let (u, g) = g2p_velocity_and_gradient(inputs.layout, inputs.velocity, p.x);
            let grad_p = g2p_cell_gradient(inputs.layout, inputs.pressure, p.x);
            let ke = grad_half_speed_sq(u, &g);
            let mut f = inputs.uniform_force;
            if let Some(field) = inputs.force_field {
                f += g2p_velocity(inputs.layout, field, p.x);
            }
            p.pressure_buffer =
                update_pressure_buffer(p.pressure_buffer, &p.forward, grad_p, ke, p.density, inputs.dt);
            p.force_buffer = update_force_buffer(p.force_buffer, &p.forward, f, inputs.dt);
            BufferIntegrand {
                forward: p.forward,
                pressure: grad_p / p.density - ke,
                force: f,
                dt: inputs.dt,
            }
        })
        .collect();
    if let Some(log) = log {
        log.extend(integrands);
    }
}

/// Re-sums logged integrands from scratch: returns `(pressure, force)`
/// buffers for one particle's history.
pub fn replay_buffers(history: &[BufferIntegrand]) -> (Vec2, Vec2) {
    let mut lam = Vec2::zeros();
    let mut ups = Vec2::zeros();
    for h in history {
        lam += h.forward.transpose() * (h.dt * h.pressure);
        ups += h.forward.transpose() * (h.dt * h.force);
    }
    (lam, ups)
}

/// `nu * Laplacian(m)` on faces with a 5-point stencil. Prescribed boundary
/// faces get zero; out-of-range neighbours mirror the face itself.
pub fn viscosity_force(layout: &GridLayout, impulse: &FaceField, nu: f64) -> FaceField {
    let mut out = FaceField::zeros(layout);
    if nu == 0.0 {
        return out;
    }
    let inv = nu / (layout.dx * layout.dx);
    for stag in [Staggering::XFaces, Staggering::YFaces] {
        let (ni, nj) = layout.dims(stag);
        let src = impulse.component(stag);
        let dst = out.component_mut(stag);
        for j in 0..nj {
            for i in 0..ni {
                let on_boundary = match stag {
                    Staggering::XFaces => layout.x_face_boundary(i).is_some(),
                    _ => layout.y_face_boundary(j).is_some(),
                };
                if on_boundary {
                    continue;
                }
                let at = |a: isize, b: isize| {
                    src[layout
                        .resolve(stag, a, b, EdgeMode::Clamp)
                        .expect("clamped index")]
                };
                let (ii, jj) = (i as isize, j as isize);
                let c = src[i + j * ni];
                dst[i + j * ni] =
                    inv * (at(ii + 1, jj) + at(ii - 1, jj) + at(ii, jj + 1) + at(ii, jj - 1) - 4.0 * c);
            }
        }
    }
    out.sync_periodic(layout);
    out
}
