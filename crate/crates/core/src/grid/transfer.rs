//! Particle-to-grid and grid-to-particle transfers.

use super::kernel::make_stencil;
use super::{EdgeMode, FaceField, GridLayout, MacGrid, Staggering};
use crate::math::{Mat2, Vec2};

/// What a particle contributes to the grid.
#[derive(Clone, Copy, Debug)]
pub struct ParticleSample {
    pub position: Vec2,
    pub velocity: Vec2,
    /// Affine velocity gradient used to extrapolate to nodes.
    pub gradient: Mat2,
    pub mass: f64,
    pub volume: f64,
}

/// Counters produced while writing a P2G result onto the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct P2gReport {
    /// Faces that received no mass although both adjacent cells are covered
    /// by particles.
    pub under_resolved: usize,
    pub inactive_faces: usize,
}

/// Running sums of a particle-to-grid scatter.
#[derive(Clone, Debug)]
pub struct P2gAccumulator {
    pub momentum: FaceField,
    pub mass: FaceField,
    pub cell_mass: Vec<f64>,
    pub cell_volume: Vec<f64>,
}

impl P2gAccumulator {
    pub fn new(layout: &GridLayout) -> Self {
        P2gAccumulator {
            momentum: FaceField::zeros(layout),
            mass: FaceField::zeros(layout),
            cell_mass: vec![0.0; layout.cell_count()],
            cell_volume: vec![0.0; layout.cell_count()],
        }
    }

    pub fn add(&mut self, layout: &GridLayout, p: &ParticleSample) {
        for (stag, comp) in [(Staggering::XFaces, 0usize), (Staggering::YFaces, 1usize)] {
            let s = make_stencil(layout, stag, p.position);
            let vel = p.velocity[comp];
            let grad_row = Vec2::new(p.gradient[(comp, 0)], p.gradient[(comp, 1)]);
            let (mom, mass) = match stag {
                Staggering::XFaces => (&mut self.momentum.u, &mut self.mass.u),
                _ => (&mut self.momentum.v, &mut self.mass.v),
            };
            s.for_each(layout, stag, EdgeMode::Drop, |a, b, idx| {
                let w = s.weight(a, b) * p.mass;
                let off = s.node_offset(layout, stag, p.position, a, b);
                mom[idx] += w * (vel + grad_row.dot(&off));
                mass[idx] += w;
            });
        }
        let s = make_stencil(layout, Staggering::Cells, p.position);
        s.for_each(layout, Staggering::Cells, EdgeMode::Drop, |a, b, idx| {
            let w = s.weight(a, b);
            self.cell_mass[idx] += w * p.mass;
            self.cell_volume[idx] += w * p.volume;
        });
    }

    /// Adds the internal-force impulse `-dt * stress * grad w` of one particle,
    /// where `stress` is the volume-scaled first Piola stress times `F^T`.
    pub fn add_stress_impulse(&mut self, layout: &GridLayout, x: Vec2, stress: &Mat2, dt: f64) {
        for (stag, comp) in [(Staggering::XFaces, 0usize), (Staggering::YFaces, 1usize)] {
            let s = make_stencil(layout, stag, x);
            let row = Vec2::new(stress[(comp, 0)], stress[(comp, 1)]);
            let mom = self.momentum.component_mut(stag);
            s.for_each(layout, stag, EdgeMode::Drop, |a, b, idx| {
                mom[idx] -= dt * row.dot(&s.gradient(a, b));
            });
        }
    }

    /// Adds a uniform impulse per unit mass (e.g. gravity) to every face with mass.
    pub fn add_uniform_impulse(&mut self, dv: Vec2) {
        for (m, mom) in self.mass.u.iter().zip(self.momentum.u.iter_mut()) {
            *mom += m * dv.x;
        }
        for (m, mom) in self.mass.v.iter().zip(self.momentum.v.iter_mut()) {
            *mom += m * dv.y;
        }
    }

    /// Divides momentum by mass. Faces without mass keep their value in `out`.
    pub fn write_velocity(
        &self,
        layout: &GridLayout,
        out: &mut FaceField,
        active_u: &mut [bool],
        active_v: &mut [bool],
    ) -> P2gReport {
        let mut report = P2gReport::default();
        let covered = |i: isize, j: isize| -> bool {
            match layout.resolve(Staggering::Cells, i, j, EdgeMode::Drop) {
                Some(c) => self.cell_volume[c] > 0.0,
                None => true,
            }
        };
        for j in 0..layout.ny {
            for i in 0..=layout.nx {
                let k = layout.u_index(i, j);
                let m = self.mass.u[k];
                active_u[k] = m > 0.0;
                if m > 0.0 {
                    out.u[k] = self.momentum.u[k] / m;
                } else {
                    report.inactive_faces += 1;
                    if covered(i as isize - 1, j as isize) && covered(i as isize, j as isize) {
                        report.under_resolved += 1;
                    }
                }
            }
        }
        for j in 0..=layout.ny {
            for i in 0..layout.nx {
                let k = layout.v_index(i, j);
                let m = self.mass.v[k];
                active_v[k] = m > 0.0;
                if m > 0.0 {
                    out.v[k] = self.momentum.v[k] / m;
                } else {
                    report.inactive_faces += 1;
                    if covered(i as isize, j as isize - 1) && covered(i as isize, j as isize) {
                        report.under_resolved += 1;
                    }
                }
            }
        }
        if layout.boundaries.periodic_x() {
            for j in 0..layout.ny {
                active_u[layout.u_index(layout.nx, j)] = active_u[layout.u_index(0, j)];
            }
        }
        if layout.boundaries.periodic_y() {
            for i in 0..layout.nx {
                active_v[layout.v_index(i, layout.ny)] = active_v[layout.v_index(i, 0)];
            }
        }
        out.sync_periodic(layout);
        report
    }

    /// Cell densities from mass and volume sums; `ambient` where uncovered.
    pub fn cell_density(&self, ambient: f64) -> Vec<f64> {
        self.cell_mass
            .iter()
            .zip(&self.cell_volume)
            .map(|(&m, &v)| if v > 0.0 { m / v } else { ambient })
            .collect()
    }

    /// Writes face densities as the mean of the adjacent cell densities.
    pub fn write_density(&self, layout: &GridLayout, out: &mut FaceField, ambient: f64) {
        let rho = self.cell_density(ambient);
        face_density_from_cells(layout, &rho, out);
    }
}

pub fn face_density_from_cells(layout: &GridLayout, rho: &[f64], out: &mut FaceField) {
    let cell = |i: isize, j: isize| {
        layout
            .resolve(Staggering::Cells, i, j, EdgeMode::Drop)
            .map(|c| rho[c])
    };
    let mean = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => 0.5 * (a + b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => unreachable!("face without adjacent cells"),
    };
    for j in 0..layout.ny {
        for i in 0..=layout.nx {
            let (ii, jj) = (i as isize, j as isize);
            out.u[layout.u_index(i, j)] = mean(cell(ii - 1, jj), cell(ii, jj));
        }
    }
    for j in 0..=layout.ny {
        for i in 0..layout.nx {
            let (ii, jj) = (i as isize, j as isize);
            out.v[layout.v_index(i, j)] = mean(cell(ii, jj - 1), cell(ii, jj));
        }
    }
}

/// Full P2G onto a grid: velocity, active flags and density.
pub fn p2g(grid: &mut MacGrid, samples: &[ParticleSample], ambient_density: f64) -> P2gReport {
    let layout = grid.layout;
    let mut acc = P2gAccumulator::new(&layout);
    for p in samples {
        acc.add(&layout, p);
    }
    acc.write_density(&layout, &mut grid.density, ambient_density);
    acc.write_velocity(&layout, &mut grid.velocity, &mut grid.active_u, &mut grid.active_v)
}

/// Quadratic-kernel interpolation of face velocities at `x`.
#[inline]
pub fn g2p_velocity(layout: &GridLayout, field: &FaceField, x: Vec2) -> Vec2 {
    let mut out = Vec2::zeros();
    for (stag, comp) in [(Staggering::XFaces, 0usize), (Staggering::YFaces, 1usize)] {
        let s = make_stencil(layout, stag, x);
        let data = field.component(stag);
        let mut acc = 0.0;
        s.for_each(layout, stag, EdgeMode::Clamp, |a, b, idx| {
            acc += s.weight(a, b) * data[idx];
        });
        out[comp] = acc;
    }
    out
}

/// Velocity gradient `G[(r, c)] = d u_r / d x_c` at `x`.
#[inline]
pub fn g2p_gradient(layout: &GridLayout, field: &FaceField, x: Vec2) -> Mat2 {
    g2p_velocity_and_gradient(layout, field, x).1
}

#[inline]
pub fn g2p_velocity_and_gradient(layout: &GridLayout, field: &FaceField, x: Vec2) -> (Vec2, Mat2) {
    let mut vel = Vec2::zeros();
    let mut grad = Mat2::zeros();
    for (stag, comp) in [(Staggering::XFaces, 0usize), (Staggering::YFaces, 1usize)] {
        let s = make_stencil(layout, stag, x);
        let data = field.component(stag);
        let mut val = 0.0;
        let mut g = Vec2::zeros();
        s.for_each(layout, stag, EdgeMode::Clamp, |a, b, idx| {
            val += s.weight(a, b) * data[idx];
            g += s.gradient(a, b) * data[idx];
        });
        vel[comp] = val;
        grad[(comp, 0)] = g.x;
        grad[(comp, 1)] = g.y;
    }
    (vel, grad)
}

/// Kernel-weighted gradient of a cell-centered scalar at `x`.
#[inline]
pub fn g2p_cell_gradient(layout: &GridLayout, cells: &[f64], x: Vec2) -> Vec2 {
    let s = make_stencil(layout, Staggering::Cells, x);
    let mut g = Vec2::zeros();
    s.for_each(layout, Staggering::Cells, EdgeMode::Clamp, |a, b, idx| {
        g += s.gradient(a, b) * cells[idx];
    });
    g
}

/// Kernel-weighted value of a cell-centered scalar at `x`.
pub fn g2p_cell_value(layout: &GridLayout, cells: &[f64], x: Vec2) -> f64 {
    let s = make_stencil(layout, Staggering::Cells, x);
    let mut v = 0.0;
    s.for_each(layout, Staggering::Cells, EdgeMode::Clamp, |a, b, idx| {
        v += s.weight(a, b) * cells[idx];
    });
    v
}

/// Bilinear interpolation of one staggered array at `x` (clamped at edges).
pub fn sample_linear(layout: &GridLayout, stag: Staggering, data: &[f64], x: Vec2) -> f64 {
    let (ox, oy) = stag.offset();
    let fx = x.x / layout.dx - ox;
    let fy = x.y / layout.dx - oy;
    let i0 = fx.floor();
    let j0 = fy.floor();
    let tx = fx - i0;
    let ty = fy - j0;
    let (i0, j0) = (i0 as isize, j0 as isize);
    let at = |i: isize, j: isize| {
        data[layout
            .resolve(stag, i, j, EdgeMode::Clamp)
            .expect("clamp always resolves")]
    };
    let a = at(i0, j0) * (1.0 - tx) + at(i0 + 1, j0) * tx;
    let b = at(i0, j0 + 1) * (1.0 - tx) + at(i0 + 1, j0 + 1) * tx;
    a * (1.0 - ty) + b * ty
}

/// Bilinear interpolation of both face components.
pub fn sample_velocity_linear(layout: &GridLayout, field: &FaceField, x: Vec2) -> Vec2 {
    Vec2::new(
        sample_linear(layout, Staggering::XFaces, &field.u, x),
        sample_linear(layout, Staggering::YFaces, &field.v, x),
    )
}
