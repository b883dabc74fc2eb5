//! Variable-density pressure projection solved with MIC(0)-preconditioned CG.

use super::{divergence_of, BoundaryKind, FaceField, GridLayout, MacGrid};
use crate::error::{Result, SimError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionSettings {
    /// Residual target relative to the initial right-hand side (max norm).
    pub relative_tolerance: f64,
    /// Floor on the residual target, relative to `max speed / dx`.
    pub absolute_tolerance: f64,
    pub max_iterations: usize,
    pub mic_tau: f64,
    pub mic_sigma: f64,
}

impl Default for ProjectionSettings {
    fn default() -> Self {
        ProjectionSettings {
            relative_tolerance: 1e-6,
            absolute_tolerance: 1e-12,
            max_iterations: 1000,
            mic_tau: 0.97,
            mic_sigma: 0.25,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ProjectionReport {
    pub iterations: usize,
    pub residual: f64,
    pub initial_residual: f64,
}

/// Five-point operator: `(A p)_c = diag_c p_c - sum_n a_cn p_n`.
struct PoissonSystem {
    nx: usize,
    ny: usize,
    periodic_x: bool,
    periodic_y: bool,
    diag: Vec<f64>,
    /// Coupling to the +x neighbour (wrapping if periodic).
    ax: Vec<f64>,
    /// Coupling to the +y neighbour.
    ay: Vec<f64>,
    /// True when no Dirichlet boundary pins the pressure level.
    singular: bool,
}

impl PoissonSystem {
    fn build(layout: &GridLayout, density: &FaceField, dt: f64) -> Self {
        let (nx, ny) = (layout.nx, layout.ny);
        let scale = dt / (layout.dx * layout.dx);
        let mut diag = vec![0.0; nx * ny];
        let mut ax = vec![0.0; nx * ny];
        let mut ay = vec![0.0; nx * ny];
        let mut singular = true;
        let px = layout.boundaries.periodic_x();
        let py = layout.boundaries.periodic_y();
        for j in 0..ny {
            for i in 0..nx {
                let c = i + j * nx;
                // +x face of this cell
                if i + 1 < nx || px {
                    let a = scale / density.u[layout.u_index(i + 1, j)];
                    ax[c] = a;
                    diag[c] += a;
                    let n = (i + 1) % nx + j * nx;
                    diag[n] += a;
                } else if layout.x_face_boundary(nx) == Some(BoundaryKind::Outflow) {
                    diag[c] += scale / density.u[layout.u_index(nx, j)];
                    singular = false;
                }
                if i == 0 && layout.x_face_boundary(0) == Some(BoundaryKind::Outflow) {
                    diag[c] += scale / density.u[layout.u_index(0, j)];
                    singular = false;
                }
                if j + 1 < ny || py {
                    let a = scale / density.v[layout.v_index(i, j + 1)];
                    ay[c] = a;
                    diag[c] += a;
                    let n = i + ((j + 1) % ny) * nx;
                    diag[n] += a;
                } else if layout.y_face_boundary(ny) == Some(BoundaryKind::Outflow) {
                    diag[c] += scale / density.v[layout.v_index(i, ny)];
                    singular = false;
                }
                if j == 0 && layout.y_face_boundary(0) == Some(BoundaryKind::Outflow) {
                    diag[c] += scale / density.v[layout.v_index(i, 0)];
                    singular = false;
                }
            }
        }
        PoissonSystem {
            nx,
            ny,
            periodic_x: px,
            periodic_y: py,
            diag,
            ax,
            ay,
            singular,
        }
    }

    fn apply(&self, p: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        for j in 0..ny {
            for i in 0..nx {
                let c = i + j * nx;
                let mut s = self.diag[c] * p[c];
                if i + 1 < nx || self.periodic_x {
                    s -= self.ax[c] * p[(i + 1) % nx + j * nx];
                }
                if i > 0 {
                    s -= self.ax[c - 1] * p[c - 1];
                } else if self.periodic_x {
                    s -= self.ax[nx - 1 + j * nx] * p[nx - 1 + j * nx];
                }
                if j + 1 < ny || self.periodic_y {
                    s -= self.ay[c] * p[i + ((j + 1) % ny) * nx];
                }
                if j > 0 {
                    s -= self.ay[c - nx] * p[c - nx];
                } else if self.periodic_y {
                    s -= self.ay[i + (ny - 1) * nx] * p[i + (ny - 1) * nx];
                }
                out[c] = s;
            }
        }
    }
}

/// Modified incomplete Cholesky factor of the operator with wrap-around
/// links dropped.
struct MicPreconditioner {
    nx: usize,
    ny: usize,
    inv: Vec<f64>,
    ax: Vec<f64>,
    ay: Vec<f64>,
    scratch: Vec<f64>,
}

impl MicPreconditioner {
    fn build(sys: &PoissonSystem, tau: f64, sigma: f64) -> Self {
        let (nx, ny) = (sys.nx, sys.ny);
        let mut ax = sys.ax.clone();
        let mut ay = sys.ay.clone();
        for j in 0..ny {
            ax[nx - 1 + j * nx] = 0.0;
        }
        for i in 0..nx {
            ay[i + (ny - 1) * nx] = 0.0;
        }
        let mut inv = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let c = i + j * nx;
                let d = sys.diag[c];
                if d <= 0.0 {
                    continue;
                }
                let mut e = d;
                if i > 0 {
                    let l = c - 1;
                    let t = ax[l] * inv[l];
                    e -= t * t + tau * ax[l] * ay[l] * inv[l] * inv[l];
                }
                if j > 0 {
                    let b = c - nx;
                    let t = ay[b] * inv[b];
                    e -= t * t + tau * ay[b] * ax[b] * inv[b] * inv[b];
                }
                if e < sigma * d {
                    e = d;
                }
                inv[c] = 1.0 / e.sqrt();
            }
        }
        MicPreconditioner {
            nx,
            ny,
            inv,
            ax,
            ay,
            scratch: vec![0.0; nx * ny],
        }
    }

    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        let q = &mut self.scratch;
        for j in 0..ny {
            for i in 0..nx {
                let c = i + j * nx;
                let mut t = r[c];
                if i > 0 {
                    t += self.ax[c - 1] * self.inv[c - 1] * q[c - 1];
                }
                if j > 0 {
                    t += self.ay[c - nx] * self.inv[c - nx] * q[c - nx];
                }
                q[c] = t * self.inv[c];
            }
        }
        for j in (0..ny).rev() {
            for i in (0..nx).rev() {
                let c = i + j * nx;
                let mut t = q[c];
                if i + 1 < nx {
                    t += self.ax[c] * self.inv[c] * z[c + 1];
                }
                if j + 1 < ny {
                    t += self.ay[c] * self.inv[c] * z[c + nx];
                }
                z[c] = t * self.inv[c];
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn remove_mean(a: &mut [f64]) {
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    a.iter_mut().for_each(|x| *x -= mean);
}

/// Makes `grid.velocity` discretely divergence-free using the face densities
/// in `grid.density`. The previous `grid.pressure` is used as initial guess
/// and overwritten with the solved pressure.
pub fn solve_projection(
    grid: &mut MacGrid,
    dt: f64,
    settings: &ProjectionSettings,
) -> Result<ProjectionReport> {
    let layout = grid.layout;
    grid.velocity.apply_velocity_bc(&layout);
    let sys = PoissonSystem::build(&layout, &grid.density, dt);
    let n = layout.cell_count();
    let mut b = vec![0.0; n];
    for j in 0..layout.ny {
        for i in 0..layout.nx {
            b[layout.cell_index(i, j)] = -divergence_of(&layout, &grid.velocity, i, j);
        }
    }
    if sys.singular {
        remove_mean(&mut b);
    }
    let target = (settings.relative_tolerance * max_norm(&b))
        .max(settings.absolute_tolerance * grid.velocity.max_abs() / layout.dx);

    let p = &mut grid.pressure;
    if p.iter().any(|x| !x.is_finite()) {
        p.iter_mut().for_each(|x| *x = 0.0);
    }
    let mut r = vec![0.0; n];
    sys.apply(p, &mut r);
    for k in 0..n {
        r[k] = b[k] - r[k];
    }
    if sys.singular {
        remove_mean(&mut r);
    }
    let initial = max_norm(&r);
    let mut report = ProjectionReport {
        iterations: 0,
        residual: initial,
        initial_residual: initial,
    };
    if initial > target {
        let mut pre = MicPreconditioner::build(&sys, settings.mic_tau, settings.mic_sigma);
        let mut z = vec![0.0; n];
        pre.apply(&r, &mut z);
        if sys.singular {
            remove_mean(&mut z);
        }
        let mut s = z.clone();
        let mut sigma = dot(&z, &r);
        let mut converged = false;
        for it in 1..=settings.max_iterations {
            sys.apply(&s, &mut z);
            let denom = dot(&z, &s);
            if denom.abs() < f64::MIN_POSITIVE {
                report.iterations = it;
                break;
            }
            let alpha = sigma / denom;
            for k in 0..n {
                p[k] += alpha * s[k];
                r[k] -= alpha * z[k];
            }
            report.iterations = it;
            report.residual = max_norm(&r);
            if !report.residual.is_finite() {
                break;
            }
            if report.residual <= target {
                converged = true;
                break;
            }
            pre.apply(&r, &mut z);
            if sys.singular {
                remove_mean(&mut z);
            }
            let sigma_new = dot(&z, &r);
            let beta = sigma_new / sigma;
            for k in 0..n {
                s[k] = z[k] + beta * s[k];
            }
            sigma = sigma_new;
        }
        if !converged && report.residual > target {
            return Err(SimError::SolverDiverged {
                iterations: report.iterations,
                residual: report.residual,
                target,
            });
        }
    }
    if sys.singular {
        remove_mean(p);
    }
    subtract_pressure_gradient(&layout, &grid.density, &grid.pressure, dt, &mut grid.velocity);
    Ok(report)
}

/// `u -= dt / (rho dx) * grad p` on every face whose velocity is not prescribed.
pub fn subtract_pressure_gradient(
    layout: &GridLayout,
    density: &FaceField,
    p: &[f64],
    dt: f64,
    vel: &mut FaceField,
) {
    let (nx, ny) = (layout.nx, layout.ny);
    let k = dt / layout.dx;
    let px = layout.boundaries.periodic_x();
    let py = layout.boundaries.periodic_y();
    for j in 0..ny {
        for i in 0..=nx {
            let f = layout.u_index(i, j);
            let left = if i > 0 {
                Some(p[layout.cell_index(i - 1, j)])
            } else if px {
                Some(p[layout.cell_index(nx - 1, j)])
            } else {
                None
            };
            let right = if i < nx {
                Some(p[layout.cell_index(i, j)])
            } else {
                None
            };
            let dp = match (left, right) {
                (Some(l), Some(r)) => r - l,
                (None, Some(r)) if layout.x_face_boundary(0) == Some(BoundaryKind::Outflow) => r,
                (Some(l), None) if layout.x_face_boundary(nx) == Some(BoundaryKind::Outflow) => -l,
                _ => continue,
            };
            vel.u[f] -= k * dp / density.u[f];
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            let f = layout.v_index(i, j);
            let below = if j > 0 {
                Some(p[layout.cell_index(i, j - 1)])
            } else if py {
                Some(p[layout.cell_index(i, ny - 1)])
            } else {
                None
            };
            let above = if j < ny {
                Some(p[layout.cell_index(i, j)])
            } else {
                None
            };
            let dp = match (below, above) {
                (Some(b), Some(a)) => a - b,
                (None, Some(a)) if layout.y_face_boundary(0) == Some(BoundaryKind::Outflow) => a,
                (Some(b), None) if layout.y_face_boundary(ny) == Some(BoundaryKind::Outflow) => -b,
                _ => continue,
            };
            vel.v[f] -= k * dp / density.v[f];
        }
    }
    vel.sync_periodic(layout);
}
