//! Staggered MAC grid: storage, interpolation kernels, particle/grid transfers
//! and the variable-density pressure projection.
//!
//! Layout conventions: the domain is `[0, nx*dx] x [0, ny*dx]`. X-face
//! velocities live at `(i*dx, (j+1/2)*dx)` with extents `(nx+1) x ny`, y-face
//! velocities at `((i+1/2)*dx, j*dx)` with extents `nx x (ny+1)`, pressure at
//! cell centers. All arrays are row-major with `i` fastest.

pub mod dump;
pub mod kernel;
pub mod projection;
pub mod transfer;

use serde::{Deserialize, Serialize};

use crate::math::Vec2;

pub use kernel::{make_stencil, quadratic_weight, KernelStencil};
pub use projection::{
    solve_projection, subtract_pressure_gradient, ProjectionReport, ProjectionSettings,
};
pub use transfer::{
    face_density_from_cells, g2p_cell_gradient, g2p_cell_value, g2p_gradient, g2p_velocity,
    g2p_velocity_and_gradient, p2g, sample_linear, sample_velocity_linear, P2gAccumulator,
    P2gReport, ParticleSample,
};

/// Boundary treatment of one side of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Zero normal velocity, homogeneous Neumann pressure.
    Wall,
    /// Prescribed face-normal velocity (global axis sign convention).
    Inflow { velocity: f64 },
    /// Zero-pressure Dirichlet; the face velocity is solved for.
    Outflow,
    /// Wraps to the opposite side. Must be paired.
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Boundaries {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
    pub bottom: BoundaryKind,
    pub top: BoundaryKind,
}

impl Boundaries {
    pub fn walls() -> Self {
        Boundaries {
            left: BoundaryKind::Wall,
            right: BoundaryKind::Wall,
            bottom: BoundaryKind::Wall,
            top: BoundaryKind::Wall,
        }
    }

    pub fn periodic() -> Self {
        Boundaries {
            left: BoundaryKind::Periodic,
            right: BoundaryKind::Periodic,
            bottom: BoundaryKind::Periodic,
            top: BoundaryKind::Periodic,
        }
    }

    /// Inflow on the left, outflow on the right, walls top and bottom.
    pub fn channel(inflow: f64) -> Self {
        Boundaries {
            left: BoundaryKind::Inflow { velocity: inflow },
            right: BoundaryKind::Outflow,
            bottom: BoundaryKind::Wall,
            top: BoundaryKind::Wall,
        }
    }

    pub fn periodic_x(&self) -> bool {
        self.left == BoundaryKind::Periodic
    }

    pub fn periodic_y(&self) -> bool {
        self.bottom == BoundaryKind::Periodic
    }

    pub fn validate(&self) -> Result<(), String> {
        let pair_ok = |a: BoundaryKind, b: BoundaryKind| {
            (a == BoundaryKind::Periodic) == (b == BoundaryKind::Periodic)
        };
        if !pair_ok(self.left, self.right) {
            return Err("left/right periodic boundaries must be paired".into());
        }
        if !pair_ok(self.bottom, self.top) {
            return Err("bottom/top periodic boundaries must be paired".into());
        }
        Ok(())
    }
}

/// Which staggered array a stencil or sample addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Staggering {
    XFaces,
    YFaces,
    Cells,
}

impl Staggering {
    /// Sample location of node `(0, 0)` in cell units.
    pub fn offset(self) -> (f64, f64) {
        match self {
            Staggering::XFaces => (0.0, 0.5),
            Staggering::YFaces => (0.5, 0.0),
            Staggering::Cells => (0.5, 0.5),
        }
    }
}

/// Out-of-range stencil node policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeMode {
    /// Skip nodes outside the array (scatter operations).
    Drop,
    /// Snap to the nearest valid node (gather operations).
    Clamp,
}

/// Grid geometry and boundary tags, shared by every field on the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridLayout {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub boundaries: Boundaries,
}

impl GridLayout {
    pub fn new(nx: usize, ny: usize, dx: f64, boundaries: Boundaries) -> Self {
        assert!(nx >= 2 && ny >= 2, "grid needs at least 2x2 cells");
        assert!(dx > 0.0);
        GridLayout {
            nx,
            ny,
            dx,
            boundaries,
        }
    }

    pub fn width(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn height(&self) -> f64 {
        self.ny as f64 * self.dx
    }

    pub fn dims(&self, stag: Staggering) -> (usize, usize) {
        match stag {
            Staggering::XFaces => (self.nx + 1, self.ny),
            Staggering::YFaces => (self.nx, self.ny + 1),
            Staggering::Cells => (self.nx, self.ny),
        }
    }

    pub fn len(&self, stag: Staggering) -> usize {
        let (a, b) = self.dims(stag);
        a * b
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i + j * self.nx
    }

    #[inline]
    pub fn u_index(&self, i: usize, j: usize) -> usize {
        i + j * (self.nx + 1)
    }

    #[inline]
    pub fn v_index(&self, i: usize, j: usize) -> usize {
        i + j * self.nx
    }

    pub fn node_position(&self, stag: Staggering, i: usize, j: usize) -> Vec2 {
        let (ox, oy) = stag.offset();
        Vec2::new((i as f64 + ox) * self.dx, (j as f64 + oy) * self.dx)
    }

    /// Maps a possibly out-of-range node index to a storage index.
    #[inline]
    pub fn resolve(&self, stag: Staggering, i: isize, j: isize, mode: EdgeMode) -> Option<usize> {
        let (ni, nj) = self.dims(stag);
        let ii = resolve_axis(i, ni, self.nx, self.boundaries.periodic_x(), mode)?;
        let jj = resolve_axis(j, nj, self.ny, self.boundaries.periodic_y(), mode)?;
        Some(ii + jj * ni)
    }

    /// True if `x` lies inside the closed domain rectangle (with a tiny slack).
    pub fn contains(&self, x: Vec2) -> bool {
        let eps = 1e-9 * self.dx;
        x.x >= -eps && x.y >= -eps && x.x <= self.width() + eps && x.y <= self.height() + eps
    }

    /// Wraps periodic axes and clamps the others into the domain. Returns the
    /// mapped position and whether a non-periodic clamp was needed.
    pub fn confine(&self, x: Vec2) -> (Vec2, bool) {
        let mut out = x;
        let mut clamped = false;
        let (w, h) = (self.width(), self.height());
        if self.boundaries.periodic_x() {
            out.x = out.x.rem_euclid(w);
        } else if out.x < 0.0 || out.x > w {
            out.x = out.x.clamp(0.0, w);
            clamped = true;
        }
        if self.boundaries.periodic_y() {
            out.y = out.y.rem_euclid(h);
        } else if out.y < 0.0 || out.y > h {
            out.y = out.y.clamp(0.0, h);
            clamped = true;
        }
        (out, clamped)
    }

    /// Cell containing `x`, after confinement.
    pub fn cell_of(&self, x: Vec2) -> (usize, usize) {
        let (p, _) = self.confine(x);
        let i = ((p.x / self.dx).floor() as isize).clamp(0, self.nx as isize - 1) as usize;
        let j = ((p.y / self.dx).floor() as isize).clamp(0, self.ny as isize - 1) as usize;
        (i, j)
    }

    /// Boundary tag owning an x-face, if it lies on the domain edge.
    pub fn x_face_boundary(&self, i: usize) -> Option<BoundaryKind> {
        if self.boundaries.periodic_x() {
            return None;
        }
        if i == 0 {
            Some(self.boundaries.left)
        } else if i == self.nx {
            Some(self.boundaries.right)
        } else {
            None
        }
    }

    pub fn y_face_boundary(&self, j: usize) -> Option<BoundaryKind> {
        if self.boundaries.periodic_y() {
            return None;
        }
        if j == 0 {
            Some(self.boundaries.bottom)
        } else if j == self.ny {
            Some(self.boundaries.top)
        } else {
            None
        }
    }
}

#[inline]
fn resolve_axis(i: isize, n: usize, cells: usize, periodic: bool, mode: EdgeMode) -> Option<usize> {
    if periodic {
        return Some(i.rem_euclid(cells as isize) as usize);
    }
    if i >= 0 && (i as usize) < n {
        return Some(i as usize);
    }
    match mode {
        EdgeMode::Drop => None,
        EdgeMode::Clamp => Some(i.clamp(0, n as isize - 1) as usize),
    }
}

/// A pair of face-normal arrays (one per axis).
#[derive(Clone, Debug, PartialEq)]
pub struct FaceField {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FaceField {
    pub fn zeros(layout: &GridLayout) -> Self {
        Self::filled(layout, 0.0, 0.0)
    }

    pub fn filled(layout: &GridLayout, u: f64, v: f64) -> Self {
        FaceField {
            u: vec![u; layout.len(Staggering::XFaces)],
            v: vec![v; layout.len(Staggering::YFaces)],
        }
    }

    /// Samples a continuous field at every face center.
    pub fn from_fn(layout: &GridLayout, f: impl Fn(Vec2) -> Vec2) -> Self {
        let mut out = Self::zeros(layout);
        for j in 0..layout.ny {
            for i in 0..=layout.nx {
                let x = layout.node_position(Staggering::XFaces, i, j);
                out.u[layout.u_index(i, j)] = f(x).x;
            }
        }
        for j in 0..=layout.ny {
            for i in 0..layout.nx {
                let x = layout.node_position(Staggering::YFaces, i, j);
                out.v[layout.v_index(i, j)] = f(x).y;
            }
        }
        out
    }

    pub fn component(&self, stag: Staggering) -> &[f64] {
        match stag {
            Staggering::XFaces => &self.u,
            Staggering::YFaces => &self.v,
            Staggering::Cells => panic!("face field has no cell component"),
        }
    }

    pub fn component_mut(&mut self, stag: Staggering) -> &mut [f64] {
        match stag {
            Staggering::XFaces => &mut self.u,
            Staggering::YFaces => &mut self.v,
            Staggering::Cells => panic!("face field has no cell component"),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(self.v.iter())
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }

    pub fn fill(&mut self, value: f64) {
        self.u.iter_mut().for_each(|x| *x = value);
        self.v.iter_mut().for_each(|x| *x = value);
    }

    pub fn axpy(&mut self, a: f64, other: &FaceField) {
        self.u.iter_mut().zip(&other.u).for_each(|(x, y)| *x += a * y);
        self.v.iter_mut().zip(&other.v).for_each(|(x, y)| *x += a * y);
    }

    /// Copies the last face of periodic axes from the first so the duplicate
    /// storage never diverges.
    pub fn sync_periodic(&mut self, layout: &GridLayout) {
        if layout.boundaries.periodic_x() {
            for j in 0..layout.ny {
                self.u[layout.u_index(layout.nx, j)] = self.u[layout.u_index(0, j)];
            }
        }
        if layout.boundaries.periodic_y() {
            for i in 0..layout.nx {
                self.v[layout.v_index(i, layout.ny)] = self.v[layout.v_index(i, 0)];
            }
        }
    }

    /// Imposes wall and inflow normal velocities on boundary faces.
    pub fn apply_velocity_bc(&mut self, layout: &GridLayout) {
        for j in 0..layout.ny {
            for i in [0, layout.nx] {
                match layout.x_face_boundary(i) {
                    Some(BoundaryKind::Wall) => self.u[layout.u_index(i, j)] = 0.0,
                    Some(BoundaryKind::Inflow { velocity }) => {
                        self.u[layout.u_index(i, j)] = velocity
                    }
                    _ => {}
                }
            }
        }
        for i in 0..layout.nx {
            for j in [0, layout.ny] {
                match layout.y_face_boundary(j) {
                    Some(BoundaryKind::Wall) => self.v[layout.v_index(i, j)] = 0.0,
                    Some(BoundaryKind::Inflow { velocity }) => {
                        self.v[layout.v_index(i, j)] = velocity
                    }
                    _ => {}
                }
            }
        }
        self.sync_periodic(layout);
    }
}

/// The MAC grid state: face velocities, face densities and cell pressure.
#[derive(Clone, Debug)]
pub struct MacGrid {
    pub layout: GridLayout,
    pub velocity: FaceField,
    pub density: FaceField,
    pub pressure: Vec<f64>,
    pub active_u: Vec<bool>,
    pub active_v: Vec<bool>,
}

impl MacGrid {
    pub fn new(layout: GridLayout, ambient_density: f64) -> Self {
        MacGrid {
            velocity: FaceField::zeros(&layout),
            density: FaceField::filled(&layout, ambient_density, ambient_density),
            pressure: vec![0.0; layout.cell_count()],
            active_u: vec![true; layout.len(Staggering::XFaces)],
            active_v: vec![true; layout.len(Staggering::YFaces)],
            layout,
        }
    }

    pub fn dx(&self) -> f64 {
        self.layout.dx
    }

    /// Net outward flux per unit area of cell `(i, j)`.
    pub fn divergence(&self, i: usize, j: usize) -> f64 {
        divergence_of(&self.layout, &self.velocity, i, j)
    }

    pub fn max_divergence(&self) -> f64 {
        let mut m = 0.0_f64;
        for j in 0..self.layout.ny {
            for i in 0..self.layout.nx {
                m = m.max(self.divergence(i, j).abs());
            }
        }
        m
    }

    /// Divergence normalised by `max face speed / dx`; zero for a still field.
    pub fn relative_divergence(&self) -> f64 {
        let speed = self.velocity.max_abs();
        if speed == 0.0 {
            return 0.0;
        }
        self.max_divergence() * self.layout.dx / speed
    }
}

pub fn divergence_of(layout: &GridLayout, field: &FaceField, i: usize, j: usize) -> f64 {
    let ur = field.u[layout.u_index(i + 1, j)];
    let ul = field.u[layout.u_index(i, j)];
    let vt = field.v[layout.v_index(i, j + 1)];
    let vb = field.v[layout.v_index(i, j)];
    (ur - ul + vt - vb) / layout.dx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extents_follow_staggering() {
        let l = GridLayout::new(5, 3, 0.1, Boundaries::walls());
        assert_eq!(l.dims(Staggering::XFaces), (6, 3));
        assert_eq!(l.dims(Staggering::YFaces), (5, 4));
        let g = MacGrid::new(l, 1.0);
        assert_eq!(g.velocity.u.len(), 18);
        assert_eq!(g.velocity.v.len(), 20);
        assert_eq!(g.pressure.len(), 15);
    }

    #[test]
    fn periodic_resolution_wraps_faces_onto_canonical_index() {
        let l = GridLayout::new(4, 4, 1.0, Boundaries::periodic());
        assert_eq!(l.resolve(Staggering::XFaces, 4, 0, EdgeMode::Drop), Some(0));
        assert_eq!(l.resolve(Staggering::XFaces, -1, 0, EdgeMode::Drop), Some(3));
        let w = GridLayout::new(4, 4, 1.0, Boundaries::walls());
        assert_eq!(w.resolve(Staggering::XFaces, 4, 0, EdgeMode::Drop), Some(4));
        assert_eq!(w.resolve(Staggering::XFaces, 5, 0, EdgeMode::Drop), None);
        assert_eq!(w.resolve(Staggering::XFaces, 5, 0, EdgeMode::Clamp), Some(4));
    }

    #[test]
    fn boundary_pairs_are_validated() {
        let mut b = Boundaries::walls();
        assert!(b.validate().is_ok());
        b.left = BoundaryKind::Periodic;
        assert!(b.validate().is_err());
    }

    #[test]
    fn velocity_bc_sets_walls_and_inflow() {
        let l = GridLayout::new(4, 4, 0.25, Boundaries::channel(0.5));
        let mut f = FaceField::filled(&l, 1.0, 1.0);
        f.apply_velocity_bc(&l);
        assert_eq!(f.u[l.u_index(0, 2)], 0.5);
        assert_eq!(f.u[l.u_index(4, 2)], 1.0);
        assert_eq!(f.v[l.v_index(2, 0)], 0.0);
        assert_eq!(f.v[l.v_index(2, 4)], 0.0);
    }

    #[test]
    fn confine_wraps_and_clamps() {
        let l = GridLayout::new(4, 4, 0.25, Boundaries::channel(0.5));
        let (p, clamped) = l.confine(Vec2::new(1.2, 0.5));
        assert!(clamped);
        assert_eq!(p.x, 1.0);
        let lp = GridLayout::new(4, 4, 0.25, Boundaries::periodic());
        let (p, clamped) = lp.confine(Vec2::new(1.25, -0.25));
        assert!(!clamped);
        assert!((p.x - 0.25).abs() < 1e-15 && (p.y - 0.75).abs() < 1e-15);
    }
}
