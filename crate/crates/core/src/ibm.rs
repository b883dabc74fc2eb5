//! Immersed-boundary coupling: a smoothed delta kernel for force spreading and
//! velocity interpolation, plus Lagrangian thin structures advanced with
//! XPBD constraints or explicit mass-spring dynamics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::grid::{EdgeMode, FaceField, GridLayout, Staggering};
use crate::math::Vec2;

/// `(1 + cos(pi r / 2)) / 4` on `|r| <= 2`.
#[inline]
pub fn delta_phi(r: f64) -> f64 {
    if r.abs() <= 2.0 {
        0.25 * (1.0 + (0.5 * PI * r).cos())
    } else {
        0.0
    }
}

/// Tensor-product delta of width `h`: `phi(x/h) phi(y/h) / h^2`.
#[inline]
pub fn delta_h(offset: Vec2, h: f64) -> f64 {
    delta_phi(offset.x / h) * delta_phi(offset.y / h) / (h * h)
}

/// Visits the 4x4 nodes of `stag` within kernel support of `x`, passing the
/// storage index and `delta_h(node - x) * dx^2`.
fn for_each_support(layout: &GridLayout, stag: Staggering, x: Vec2, mut f: impl FnMut(usize, f64)) {
    let (ox, oy) = stag.offset();
    let h = layout.dx;
    let fx = x.x / h - ox;
    let fy = x.y / h - oy;
    let bi = fx.floor() as isize;
    let bj = fy.floor() as isize;
    let mut wx = [0.0; 4];
    let mut wy = [0.0; 4];
    for k in 0..4 {
        wx[k] = delta_phi((bi - 1 + k as isize) as f64 - fx);
        wy[k] = delta_phi((bj - 1 + k as isize) as f64 - fy);
    }
    for b in 0..4 {
        for a in 0..4 {
            let w = wx[a] * wy[b];
            if w == 0.0 {
                continue;
            }
            if let Some(idx) = layout.resolve(stag, bi - 1 + a as isize, bj - 1 + b as isize, EdgeMode::Drop) {
                f(idx, w);
            }
        }
    }
}

fn check_inside(layout: &GridLayout, x: Vec2) -> Result<()> {
    if layout.contains(x) && x.x.is_finite() && x.y.is_finite() {
        Ok(())
    } else {
        Err(SimError::OutOfDomain { x: x.x, y: x.y })
    }
}

/// Spreads point forces onto faces: `f(x_i) = sum_k F_k delta_h(x_i - X_k)`,
/// a force density per unit area.
pub fn spread_force(layout: &GridLayout, points: &[Vec2], forces: &[Vec2]) -> Result<FaceField> {
    let mut out = FaceField::zeros(layout);
    let inv_area = 1.0 / (layout.dx * layout.dx);
    for (x, f) in points.iter().zip(forces) {
        check_inside(layout, *x)?;
        for_each_support(layout, Staggering::XFaces, *x, |idx, w| out.u[idx] += w * inv_area * f.x);
        for_each_support(layout, Staggering::YFaces, *x, |idx, w| out.v[idx] += w * inv_area * f.y);
    }
    out.sync_periodic(layout);
    Ok(out)
}

/// `u(X) = sum_i u_i delta_h(x_i - X) dx^2`.
pub fn interpolate_point(layout: &GridLayout, field: &FaceField, x: Vec2) -> Result<Vec2> {
    check_inside(layout, x)?;
    let mut u = Vec2::zeros();
    for_each_support(layout, Staggering::XFaces, x, |idx, w| u.x += w * field.u[idx]);
    for_each_support(layout, Staggering::YFaces, x, |idx, w| u.y += w * field.v[idx]);
    Ok(u)
}

pub fn interpolate_to_solid(layout: &GridLayout, field: &FaceField, points: &[Vec2]) -> Result<Vec<Vec2>> {
    points
        .iter()
        .map(|x| interpolate_point(layout, field, *x))
        .collect()
}

/// Per-vertex coupling force density `rho (u_after - u_before) / dt`.
pub fn coupling_force(u_before: &[Vec2], u_after: &[Vec2], dt: f64, rho: f64) -> Vec<Vec2> {
    u_before
        .iter()
        .zip(u_after)
        .map(|(b, a)| rho * (a - b) / dt)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub rest: f64,
    pub compliance: f64,
}

/// Angle constraint on the turn between edges `(i, j)` and `(j, k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bend {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub rest_angle: f64,
    pub compliance: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IbmMesh {
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
    pub masses: Vec<f64>,
    /// Fluid volume each vertex represents when spreading.
    pub spread_volume: Vec<f64>,
    pub pinned: Vec<bool>,
    pub edges: Vec<Edge>,
    pub bends: Vec<Bend>,
}

fn signed_turn(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let e1 = b - a;
    let e2 = c - b;
    (e1.x * e2.y - e1.y * e2.x).atan2(e1.dot(&e2))
}

fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

fn perp(e: Vec2) -> Vec2 {
    Vec2::new(-e.y, e.x)
}

impl IbmMesh {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    fn push_vertex(&mut self, x: Vec2, mass: f64, volume: f64, pinned: bool) {
        self.positions.push(x);
        self.velocities.push(Vec2::zeros());
        self.masses.push(mass);
        self.spread_volume.push(volume);
        self.pinned.push(pinned);
    }

    /// Appends `other`, shifting its constraint indices.
    pub fn merge(&mut self, other: IbmMesh) {
        let off = self.len();
        self.positions.extend(other.positions);
        self.velocities.extend(other.velocities);
        self.masses.extend(other.masses);
        self.spread_volume.extend(other.spread_volume);
        self.pinned.extend(other.pinned);
        self.edges.extend(other.edges.into_iter().map(|e| Edge {
            i: e.i + off,
            j: e.j + off,
            ..e
        }));
        self.bends.extend(other.bends.into_iter().map(|b| Bend {
            i: b.i + off,
            j: b.j + off,
            k: b.k + off,
            ..b
        }));
    }

    pub fn add_edge(&mut self, i: usize, j: usize, compliance: f64) {
        let rest = (self.positions[i] - self.positions[j]).norm();
        self.edges.push(Edge {
            i,
            j,
            rest,
            compliance,
        });
    }

    pub fn add_bend(&mut self, i: usize, j: usize, k: usize, compliance: f64) {
        let rest_angle = signed_turn(self.positions[i], self.positions[j], self.positions[k]);
        self.bends.push(Bend {
            i,
            j,
            k,
            rest_angle,
            compliance,
        });
    }

    /// A straight chain of `segments` edges from `anchor` along `direction`,
    /// pinned at the anchor. Masses come from `line_density`; spreading
    /// volume is `spacing * thickness`.
    pub fn strip(
        anchor: Vec2,
        direction: Vec2,
        length: f64,
        segments: usize,
        line_density: f64,
        thickness: f64,
        bend_compliance: f64,
    ) -> Self {
        let mut mesh = IbmMesh::default();
        let ds = length / segments as f64;
        let dir = direction.normalize();
        for k in 0..=segments {
            let share = if k == 0 || k == segments { 0.5 } else { 1.0 };
            mesh.push_vertex(anchor + dir * (ds * k as f64), line_density * ds * share, ds * thickness, k == 0);
        }
        for k in 0..segments {
            mesh.add_edge(k, k + 1, 0.0);
        }
        for k in 1..segments {
            mesh.add_bend(k - 1, k, k + 1, bend_compliance);
        }
        mesh
    }

    /// An open arc of radius `radius` around `center` spanning
    /// `[start, end]` radians, both end points pinned.
    pub fn arc(
        center: Vec2,
        radius: f64,
        start: f64,
        end: f64,
        segments: usize,
        line_density: f64,
        thickness: f64,
        bend_compliance: f64,
    ) -> Self {
        let mut mesh = IbmMesh::default();
        let ds = radius * (end - start).abs() / segments as f64;
        for k in 0..=segments {
            let a = start + (end - start) * k as f64 / segments as f64;
            let x = center + radius * Vec2::new(a.cos(), a.sin());
            mesh.push_vertex(x, line_density * ds, ds * thickness, k == 0 || k == segments);
        }
        for k in 0..segments {
            mesh.add_edge(k, k + 1, 0.0);
        }
        for k in 1..segments {
            mesh.add_bend(k - 1, k, k + 1, bend_compliance);
        }
        mesh
    }

    /// A pinned filled disk sampled on a lattice of spacing `spacing`.
    pub fn pinned_disk(center: Vec2, radius: f64, spacing: f64) -> Self {
        let mut mesh = IbmMesh::default();
        let n = (radius / spacing).ceil() as isize;
        for b in -n..=n {
            for a in -n..=n {
                let off = Vec2::new(a as f64 * spacing, b as f64 * spacing);
                if off.norm() <= radius {
                    mesh.push_vertex(center + off, 1.0, spacing * spacing, true);
                }
            }
        }
        mesh
    }

    /// Parses `v x y`, `e i j` and `p i` lines. `#` starts a comment.
    pub fn parse(text: &str, vertex_mass: f64, spread_volume: f64, edge_compliance: f64) -> Result<Self> {
        let mut mesh = IbmMesh::default();
        let mut pending_edges = Vec::new();
        let mut pins = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = n + 1;
            let bad = |message: String| SimError::MeshParse {
                line: lineno,
                message,
            };
            let mut it = line.split_whitespace();
            let tag = it.next().unwrap_or("");
            let fields: Vec<&str> = it.collect();
            match tag {
                "v" => {
                    if fields.len() != 2 {
                        return Err(bad(format!("vertex needs 2 coordinates, got {}", fields.len())));
                    }
                    let x: f64 = fields[0].parse().map_err(|e| bad(format!("{e}")))?;
                    let y: f64 = fields[1].parse().map_err(|e| bad(format!("{e}")))?;
                    mesh.push_vertex(Vec2::new(x, y), vertex_mass, spread_volume, false);
                }
                "e" | "p" => {
                    let want = if tag == "e" { 2 } else { 1 };
                    if fields.len() != want {
                        return Err(bad(format!("'{tag}' needs {want} indices")));
                    }
                    let idx: Vec<usize> = fields
                        .iter()
                        .map(|f| f.parse::<usize>().map_err(|e| bad(format!("{e}"))))
                        .collect::<Result<_>>()?;
                    if tag == "e" {
                        pending_edges.push((lineno, idx[0], idx[1]));
                    } else {
                        pins.push((lineno, idx[0]));
                    }
                }
                other => return Err(bad(format!("unknown record '{other}'"))),
            }
        }
        let nv = mesh.len();
        for (line, i, j) in pending_edges {
            if i >= nv || j >= nv || i == j {
                return Err(SimError::MeshParse {
                    line,
                    message: format!("invalid edge {i}-{j} for {nv} vertices"),
                });
            }
            if (mesh.positions[i] - mesh.positions[j]).norm() == 0.0 {
                return Err(SimError::MeshParse {
                    line,
                    message: "edge has zero rest length".into(),
                });
            }
            mesh.add_edge(i, j, edge_compliance);
        }
        for (line, i) in pins {
            if i >= nv {
                return Err(SimError::MeshParse {
                    line,
                    message: format!("pin index {i} out of range"),
                });
            }
            mesh.pinned[i] = true;
        }
        Ok(mesh)
    }

    fn inverse_mass(&self, i: usize) -> f64 {
        if self.pinned[i] || self.masses[i] <= 0.0 {
            0.0
        } else {
            1.0 / self.masses[i]
        }
    }

    /// Largest absolute edge-length violation relative to rest length.
    pub fn max_edge_strain(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| ((self.positions[e.i] - self.positions[e.j]).norm() - e.rest).abs() / e.rest)
            .fold(0.0, f64::max)
    }

    pub fn total_momentum(&self) -> Vec2 {
        self.velocities
            .iter()
            .zip(&self.masses)
            .map(|(v, m)| v * *m)
            .sum()
    }

    pub fn center_of_mass(&self) -> Vec2 {
        let m: f64 = self.masses.iter().sum();
        self.positions
            .iter()
            .zip(&self.masses)
            .map(|(x, w)| x * *w)
            .sum::<Vec2>()
            / m
    }

    /// One XPBD substep: predict, project constraints Gauss-Seidel in a
    /// fixed order, derive velocities from the position change.
    pub fn xpbd_substep(&mut self, dt: f64, iterations: usize, gravity: Vec2) {
        let old = self.positions.clone();
        for k in 0..self.len() {
            if self.pinned[k] {
                self.velocities[k] = Vec2::zeros();
                continue;
            }
            self.velocities[k] += dt * gravity;
            self.positions[k] += dt * self.velocities[k];
        }
        let mut lambda_e = vec![0.0; self.edges.len()];
        let mut lambda_b = vec![0.0; self.bends.len()];
        for _ in 0..iterations {
            for (c, e) in self.edges.iter().enumerate() {
                let (wi, wj) = (self.inverse_mass(e.i), self.inverse_mass(e.j));
                if wi + wj == 0.0 {
                    continue;
                }
                let d = self.positions[e.i] - self.positions[e.j];
                let len = d.norm();
                if len == 0.0 {
                    continue;
                }
                let n = d / len;
                let alpha = e.compliance / (dt * dt);
                let dl = (-(len - e.rest) - alpha * lambda_e[c]) / (wi + wj + alpha);
                lambda_e[c] += dl;
                self.positions[e.i] += wi * dl * n;
                self.positions[e.j] -= wj * dl * n;
            }
            for (c, b) in self.bends.iter().enumerate() {
                let (xi, xj, xk) = (self.positions[b.i], self.positions[b.j], self.positions[b.k]);
                let e1 = xj - xi;
                let e2 = xk - xj;
                let (l1, l2) = (e1.norm_squared(), e2.norm_squared());
                if l1 == 0.0 || l2 == 0.0 {
                    continue;
                }
                let gi = perp(e1) / l1;
                let gk = perp(e2) / l2;
                let gj = -gi - gk;
                let w = [self.inverse_mass(b.i), self.inverse_mass(b.j), self.inverse_mass(b.k)];
                let denom_w = w[0] * gi.norm_squared() + w[1] * gj.norm_squared() + w[2] * gk.norm_squared();
                let alpha = b.compliance / (dt * dt);
                if denom_w + alpha == 0.0 {
                    continue;
                }
                let cval = wrap_angle(signed_turn(xi, xj, xk) - b.rest_angle);
                let dl = (-cval - alpha * lambda_b[c]) / (denom_w + alpha);
                lambda_b[c] += dl;
                self.positions[b.i] += w[0] * dl * gi;
                self.positions[b.j] += w[1] * dl * gj;
                self.positions[b.k] += w[2] * dl * gk;
            }
        }
        for k in 0..self.len() {
            self.velocities[k] = if self.pinned[k] {
                Vec2::zeros()
            } else {
                (self.positions[k] - old[k]) / dt
            };
        }
    }

    /// Largest stable substep for explicit springs of stiffness `k`.
    pub fn mass_spring_stable_dt(&self, stiffness: f64) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let w = self.inverse_mass(e.i) + self.inverse_mass(e.j);
                if w == 0.0 || stiffness == 0.0 {
                    f64::INFINITY
                } else {
                    2.0 / (stiffness * w).sqrt()
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// One symplectic Euler substep of Hookean edge springs.
    pub fn mass_spring_substep(&mut self, dt: f64, stiffness: f64, gravity: Vec2) -> Result<()> {
        let limit = self.mass_spring_stable_dt(stiffness);
        if dt >= limit {
            return Err(SimError::UnstableSubstep {
                dt,
                suggested_dt: 0.5 * limit,
            });
        }
        let mut force = vec![Vec2::zeros(); self.len()];
        for e in &self.edges {
            let d = self.positions[e.j] - self.positions[e.i];
            let len = d.norm();
            if len == 0.0 {
                continue;
            }
            let f = stiffness * (len - e.rest) * d / len;
            force[e.i] += f;
            force[e.j] -= f;
        }
        for k in 0..self.len() {
            if self.pinned[k] {
                self.velocities[k] = Vec2::zeros();
                continue;
            }
            self.velocities[k] += dt * (force[k] / self.masses[k] + gravity);
            self.positions[k] += dt * self.velocities[k];
        }
        Ok(())
    }
}

/// How the Lagrangian structure advances between couplings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SolidModel {
    Xpbd { iterations: usize },
    MassSpring { stiffness: f64 },
    /// Vertices never move (e.g. a fixed obstacle).
    Fixed,
}

/// Advances the mesh over `duration` in substeps no longer than `dt_solid`.
pub fn advance_solid(
    mesh: &mut IbmMesh,
    model: SolidModel,
    duration: f64,
    dt_solid: f64,
    gravity: Vec2,
) -> Result<()> {
    if duration <= 0.0 {
        return Ok(());
    }
    let n = (duration / dt_solid).ceil().max(1.0) as usize;
    let h = duration / n as f64;
    for _ in 0..n {
        match model {
            SolidModel::Xpbd { iterations } => mesh.xpbd_substep(h, iterations, gravity),
            SolidModel::MassSpring { stiffness } => mesh.mass_spring_substep(h, stiffness, gravity)?,
            SolidModel::Fixed => {
                mesh.velocities.iter_mut().for_each(|v| *v = Vec2::zeros());
            }
        }
    }
    Ok(())
}

/// Momentum bookkeeping of one coupling: the force spread to the grid and
/// the reaction taken by the structure.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CouplingBalance {
    /// Integral of the spread force density over all faces.
    pub spread_total: Vec2,
    /// Sum of vertex point forces before spreading.
    pub vertex_total: Vec2,
    /// Momentum change of the structure from the coupling, per unit time.
    pub solid_reaction: Vec2,
}

impl CouplingBalance {
    pub fn new(layout: &GridLayout, spread: &FaceField, vertex_forces: &[Vec2]) -> Self {
        let area = layout.dx * layout.dx;
        let mut total = Vec2::zeros();
        let (px, py) = (layout.boundaries.periodic_x(), layout.boundaries.periodic_y());
        for j in 0..layout.ny {
            for i in 0..=layout.nx {
                if px && i == layout.nx {
                    continue;
                }
                total.x += spread.u[layout.u_index(i, j)] * area;
            }
        }
        for j in 0..=layout.ny {
            for i in 0..layout.nx {
                if py && j == layout.ny {
                    continue;
                }
                total.y += spread.v[layout.v_index(i, j)] * area;
            }
        }
        let vertex_total: Vec2 = vertex_forces.iter().sum();
        CouplingBalance {
            spread_total: total,
            vertex_total,
            solid_reaction: -vertex_total,
        }
    }

    /// `|spread + reaction| / |spread|`, zero when nothing was spread.
    pub fn relative_error(&self) -> f64 {
        let mag = self.spread_total.norm().max(self.vertex_total.norm());
        if mag == 0.0 {
            0.0
        } else {
            (self.spread_total + self.solid_reaction).norm() / mag
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundaries;

    #[test]
    fn phi_values_and_integral() {
        assert_eq!(delta_phi(0.0), 0.5);
        assert!(delta_phi(2.0).abs() < 1e-16);
        assert_eq!(delta_phi(2.5), 0.0);
        let h = 1e-4;
        let n = (4.0 / h) as usize;
        let mut s = 0.0;
        for k in 0..=n {
            let r = -2.0 + k as f64 * h;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            s += w * delta_phi(r) * h;
        }
        assert!((s - 1.0).abs() < 1e-8);
    }

    #[test]
    fn unit_force_spreads_to_unit_total() {
        let layout = GridLayout::new(32, 32, 1.0 / 32.0, Boundaries::walls());
        let x = vec![Vec2::new(0.413, 0.577)];
        let f = spread_force(&layout, &x, &[Vec2::new(1.0, 0.0)]).unwrap();
        let total: f64 = f.u.iter().sum::<f64>() * layout.dx * layout.dx;
        assert!((total - 1.0).abs() < 1e-3);
        let b = CouplingBalance::new(&layout, &f, &[Vec2::new(1.0, 0.0)]);
        assert!(b.relative_error() < 1e-3);
    }

    #[test]
    fn opposite_forces_cancel() {
        let layout = GridLayout::new(16, 16, 1.0 / 16.0, Boundaries::walls());
        let x = vec![Vec2::new(0.5, 0.5); 2];
        let f = spread_force(&layout, &x, &[Vec2::new(1.0, 2.0), Vec2::new(-1.0, -2.0)]).unwrap();
        assert!(f.max_abs() < 1e-12);
    }

    #[test]
    fn out_of_domain_vertex_is_rejected() {
        let layout = GridLayout::new(8, 8, 0.125, Boundaries::walls());
        let err = spread_force(&layout, &[Vec2::new(1.5, 0.5)], &[Vec2::new(1.0, 0.0)]);
        assert!(matches!(err, Err(SimError::OutOfDomain { .. })));
    }

    #[test]
    fn coupling_force_direct_formula() {
        let f = coupling_force(&[Vec2::zeros()], &[Vec2::new(1.0, 0.0)], 0.1, 1.0);
        assert!((f[0] - Vec2::new(10.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn stretched_edge_is_restored() {
        let mut mesh = IbmMesh::default();
        mesh.push_vertex(Vec2::new(0.0, 0.0), 1.0, 1.0, false);
        mesh.push_vertex(Vec2::new(1.0, 0.0), 1.0, 1.0, false);
        mesh.add_edge(0, 1, 0.0);
        mesh.positions[1].x = 1.1;
        mesh.xpbd_substep(1e-3, 50, Vec2::zeros());
        assert!(mesh.max_edge_strain() < 1e-6);
    }

    #[test]
    fn pinned_vertex_stays_put() {
        let mut mesh = IbmMesh::strip(Vec2::new(0.2, 0.5), Vec2::new(1.0, 0.0), 0.3, 12, 1.0, 0.01, 1e-4);
        let anchor = mesh.positions[0];
        for _ in 0..20 {
            mesh.xpbd_substep(5e-4, 50, Vec2::new(0.0, -9.8));
        }
        assert_eq!(mesh.positions[0], anchor);
        assert!(mesh.positions[12].y < 0.5);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let mesh = IbmMesh::parse("v 0 0\nv 1 0 # tip\ne 0 1\np 0\n", 1.0, 0.1, 0.0).unwrap();
        assert_eq!(mesh.len(), 2);
        assert_eq!(mesh.edges.len(), 1);
        assert!(mesh.pinned[0] && !mesh.pinned[1]);
        match IbmMesh::parse("v 0 0\nv 1\n", 1.0, 0.1, 0.0) {
            Err(SimError::MeshParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(IbmMesh::parse("v 0 0\ne 0 3\n", 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn unstable_spring_step_is_reported() {
        let mut mesh = IbmMesh::strip(Vec2::zeros(), Vec2::new(1.0, 0.0), 1.0, 1, 2.0, 1.0, 0.0);
        // masses 1 (pinned) and 1: limit 2 / sqrt(k)
        let err = mesh.mass_spring_substep(0.5, 100.0, Vec2::zeros());
        match err {
            Err(SimError::UnstableSubstep { suggested_dt, .. }) => assert!(suggested_dt < 0.2),
            other => panic!("{other:?}"),
        }
    }
}
