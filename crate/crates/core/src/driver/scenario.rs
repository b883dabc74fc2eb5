//! Built-in scene catalog. Each scene fully determines the grid, boundary
//! conditions, initial velocity, forces and solids.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::config::{Backend, SimConfig};
use crate::error::{Result, SimError};
use crate::grid::{Boundaries, BoundaryKind, FaceField, GridLayout};
use crate::ibm::{IbmMesh, SolidModel};
use crate::math::Vec2;
use crate::mpm::{ActiveStrainSchedule, ActuationMode, ContractionAxis, Material, MpmSolid, Shape};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioConfig {
    Quiescent(QuiescentScene),
    TaylorGreen(TaylorGreenScene),
    Leapfrog(LeapfrogScene),
    Karman(KarmanScene),
    Sediment(SedimentScene),
    MultiCylinder(MultiCylinderScene),
    Swimmer(SwimmerScene),
    Fish2d(Fish2dScene),
    Flag2d(Flag2dScene),
    FallingSphereAblation(FallingSphereScene),
}

/// Fluid at rest in a unit box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuiescentScene {
    pub periodic: bool,
    pub velocity: [f64; 2],
}

impl Default for QuiescentScene {
    fn default() -> Self {
        QuiescentScene {
            periodic: false,
            velocity: [0.0, 0.0],
        }
    }
}

/// Periodic Taylor-Green vortex array in a unit box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaylorGreenScene {
    pub amplitude: f64,
    /// Vortex cells per box side.
    pub wavenumber: usize,
    pub viscosity: f64,
}

impl Default for TaylorGreenScene {
    fn default() -> Self {
        TaylorGreenScene {
            amplitude: 1.0,
            wavenumber: 1,
            viscosity: 0.0,
        }
    }
}

/// Two coaxial counter-rotating vortex pairs in a periodic box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeapfrogScene {
    pub circulation: f64,
    pub core_radius: f64,
    /// Half distance between the two vortices of one pair.
    pub half_width: f64,
    /// x positions of the two pairs.
    pub pair_x: [f64; 2],
}

impl Default for LeapfrogScene {
    fn default() -> Self {
        LeapfrogScene {
            circulation: 0.5,
            core_radius: 0.03,
            half_width: 0.12,
            pair_x: [0.25, 0.37],
        }
    }
}

/// Flow past a fixed cylinder in a channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KarmanScene {
    pub radius: f64,
    pub center: [f64; 2],
    pub inflow: f64,
    pub viscosity: f64,
    /// Amplitude of the initial cross-stream bump, relative to the inflow.
    pub perturbation: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for KarmanScene {
    fn default() -> Self {
        KarmanScene {
            radius: 0.05,
            center: [0.5, 0.5],
            inflow: 0.16,
            viscosity: 4e-5,
            perturbation: 0.1,
            width: 2.0,
            height: 1.0,
        }
    }
}

/// Elastic disk falling through a long channel under gravity along +x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SedimentScene {
    pub radius: f64,
    pub center: [f64; 2],
    pub density_ratio: f64,
    pub gravity: f64,
    pub viscosity: f64,
    pub youngs: f64,
    pub poisson: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for SedimentScene {
    fn default() -> Self {
        SedimentScene {
            radius: 0.03,
            center: [0.16, 0.5],
            density_ratio: 15.0,
            gravity: 3.0,
            viscosity: 8e-5,
            youngs: 5e3,
            poisson: 0.3,
            width: 6.0,
            height: 1.0,
        }
    }
}

/// A row of disks sinking side by side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiCylinderScene {
    pub radius: f64,
    /// Center-to-center spacing in radii.
    pub spacing: f64,
    pub count: usize,
    pub height_start: f64,
    pub density_ratio: f64,
    pub gravity: f64,
    pub viscosity: f64,
    pub youngs: f64,
    pub poisson: f64,
}

impl Default for MultiCylinderScene {
    fn default() -> Self {
        MultiCylinderScene {
            radius: 0.02,
            spacing: 3.0,
            count: 3,
            height_start: 0.8,
            density_ratio: 30.0,
            gravity: 9.8,
            viscosity: 6e-4,
            youngs: 5e3,
            poisson: 0.3,
        }
    }
}

/// Neutrally buoyant elastic strip driven by signed active strain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwimmerScene {
    pub length: f64,
    pub thickness: f64,
    pub center: [f64; 2],
    pub alpha: f64,
    pub period: f64,
    pub viscosity: f64,
    pub activation: [f64; 2],
    /// Material axis of the principal contraction.
    pub contraction_axis: ContractionAxis,
    pub density_ratio: f64,
    pub youngs: f64,
    pub poisson: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for SwimmerScene {
    fn default() -> Self {
        SwimmerScene {
            length: 0.3,
            thickness: 0.04,
            center: [1.0, 0.5],
            alpha: 0.3,
            period: 2.0,
            viscosity: 8e-6,
            activation: [0.3, 0.7],
            contraction_axis: ContractionAxis::Cross,
            density_ratio: 1.0,
            youngs: 2e3,
            poisson: 0.3,
            width: 2.0,
            height: 1.0,
        }
    }
}

/// Thin fish-like body with tail-side actuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fish2dScene {
    pub length: f64,
    pub thickness: f64,
    pub center: [f64; 2],
    pub alpha: f64,
    pub period: f64,
    pub viscosity: f64,
    pub activation: [f64; 2],
    /// Material axis of the principal contraction.
    pub contraction_axis: ContractionAxis,
    pub density_ratio: f64,
    pub youngs: f64,
    pub poisson: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for Fish2dScene {
    fn default() -> Self {
        Fish2dScene {
            length: 0.25,
            thickness: 0.01,
            center: [3.0, 0.5],
            alpha: 0.25,
            period: 2.0,
            viscosity: 8e-6,
            activation: [0.6, 0.9],
            contraction_axis: ContractionAxis::Cross,
            density_ratio: 1.0,
            youngs: 2e3,
            poisson: 0.3,
            width: 4.0,
            height: 1.0,
        }
    }
}

/// Flexible strip trailing a fixed pole in a channel flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flag2dScene {
    pub inflow: f64,
    pub viscosity: f64,
    pub pole_center: [f64; 2],
    pub pole_radius: f64,
    pub flag_length: f64,
    pub segments: usize,
    /// Mass per unit length of the strip.
    pub line_density: f64,
    pub model: SolidModel,
    pub bend_compliance: f64,
    pub perturbation: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for Flag2dScene {
    fn default() -> Self {
        Flag2dScene {
            inflow: 0.16,
            viscosity: 0.0,
            pole_center: [0.4, 0.5],
            pole_radius: 0.03,
            flag_length: 0.4,
            segments: 40,
            line_density: 0.1,
            model: SolidModel::MassSpring { stiffness: 500.0 },
            bend_compliance: 1e-4,
            perturbation: 0.1,
            width: 2.0,
            height: 1.0,
        }
    }
}

/// Disk dropped in a tall box, used to compare coupling variants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FallingSphereScene {
    pub radius: f64,
    pub center: [f64; 2],
    pub density_ratio: f64,
    pub gravity: f64,
    pub viscosity: f64,
    pub youngs: f64,
    pub poisson: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for FallingSphereScene {
    fn default() -> Self {
        FallingSphereScene {
            radius: 0.03,
            center: [0.5, 2.7],
            density_ratio: 15.0,
            gravity: 3.0,
            viscosity: 8e-5,
            youngs: 5e3,
            poisson: 0.3,
            width: 1.0,
            height: 3.0,
        }
    }
}

/// Solids of a built scene.
#[derive(Clone, Debug)]
pub enum SceneSolid {
    None,
    Mpm(MpmSolid),
    Ibm { mesh: IbmMesh, model: SolidModel },
}

/// Everything needed to start a simulation.
#[derive(Clone, Debug)]
pub struct Scene {
    pub layout: GridLayout,
    pub fluid_density: f64,
    /// Initial velocity, projected by the caller.
    pub velocity: FaceField,
    pub gravity: Vec2,
    pub viscosity: f64,
    pub buoyancy: Vec2,
    pub solid: SceneSolid,
    /// Point where the cross-stream velocity is recorded.
    pub probe: Option<Vec2>,
    pub reference_speed: f64,
    pub reference_length: f64,
}

/// Names and one-line descriptions of the catalog.
pub const CATALOG: &[(&str, &str)] = &[
    ("quiescent", "fluid at rest in a unit box (walls or periodic)"),
    ("taylor_green", "periodic Taylor-Green vortex array"),
    ("leapfrog", "two coaxial vortex pairs in a periodic box"),
    ("karman", "channel flow past a fixed cylinder (immersed boundary)"),
    ("sediment", "elastic disk settling along a long channel (material points)"),
    ("multi_cylinder", "row of heavy disks sinking side by side (material points)"),
    ("swimmer", "actively contracting strip, signed schedule (material points)"),
    ("fish2d", "thin actuated body, unsigned schedule (material points)"),
    ("flag2d", "flexible strip behind a pole in channel flow (immersed boundary)"),
    ("falling_sphere_ablation", "disk dropped in a 1x3 box for coupling comparisons (material points)"),
];

fn pair(a: [f64; 2]) -> Vec2 {
    Vec2::new(a[0], a[1])
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::config(format!("scenario.{field}"), "must be positive"))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::config(format!("scenario.{field}"), "must be non-negative"))
    }
}

fn check_material(youngs: f64, poisson: f64, ratio: f64) -> Result<()> {
    positive("youngs", youngs)?;
    positive("density_ratio", ratio)?;
    if !(0.0..0.5).contains(&poisson) {
        return Err(SimError::config("scenario.poisson", "must lie in [0, 0.5)"));
    }
    Ok(())
}

fn check_schedule(alpha: f64, period: f64, activation: [f64; 2]) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(SimError::config("scenario.alpha", "must lie in [0, 1)"));
    }
    positive("period", period)?;
    if !(0.0 <= activation[0] && activation[0] < activation[1] && activation[1] <= 1.0) {
        return Err(SimError::config("scenario.activation", "must be an increasing range within [0, 1]"));
    }
    Ok(())
}

/// Lamb-Oseen vortex velocity with circulation `gamma` and core `a`.
fn lamb_oseen(x: Vec2, c: Vec2, gamma: f64, a: f64) -> Vec2 {
    let d = x - c;
    let r2 = d.norm_squared();
    if r2 == 0.0 {
        return Vec2::zeros();
    }
    let k = gamma / (TAU * r2) * (1.0 - (-r2 / (a * a)).exp());
    Vec2::new(-k * d.y, k * d.x)
}

fn gaussian_bump(x: Vec2, c: Vec2, width: f64) -> f64 {
    (-(x - c).norm_squared() / (width * width)).exp()
}

impl ScenarioConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioConfig::Quiescent(_) => "quiescent",
            ScenarioConfig::TaylorGreen(_) => "taylor_green",
            ScenarioConfig::Leapfrog(_) => "leapfrog",
            ScenarioConfig::Karman(_) => "karman",
            ScenarioConfig::Sediment(_) => "sediment",
            ScenarioConfig::MultiCylinder(_) => "multi_cylinder",
            ScenarioConfig::Swimmer(_) => "swimmer",
            ScenarioConfig::Fish2d(_) => "fish2d",
            ScenarioConfig::Flag2d(_) => "flag2d",
            ScenarioConfig::FallingSphereAblation(_) => "falling_sphere_ablation",
        }
    }

    /// The scene with default parameters, by catalog name.
    pub fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "quiescent" => ScenarioConfig::Quiescent(Default::default()),
            "taylor_green" => ScenarioConfig::TaylorGreen(Default::default()),
            "leapfrog" => ScenarioConfig::Leapfrog(Default::default()),
            "karman" => ScenarioConfig::Karman(Default::default()),
            "sediment" => ScenarioConfig::Sediment(Default::default()),
            "multi_cylinder" => ScenarioConfig::MultiCylinder(Default::default()),
            "swimmer" => ScenarioConfig::Swimmer(Default::default()),
            "fish2d" => ScenarioConfig::Fish2d(Default::default()),
            "flag2d" => ScenarioConfig::Flag2d(Default::default()),
            "falling_sphere_ablation" => ScenarioConfig::FallingSphereAblation(Default::default()),
            _ => return None,
        })
    }

    pub fn default_backend(&self) -> Backend {
        match self {
            ScenarioConfig::Quiescent(_) | ScenarioConfig::TaylorGreen(_) | ScenarioConfig::Leapfrog(_) => {
                Backend::None
            }
            ScenarioConfig::Karman(_) | ScenarioConfig::Flag2d(_) => Backend::Ibm,
            _ => Backend::Mpm,
        }
    }

    /// Default `(nx, ny)` and physical `(width, height)`.
    pub fn default_domain(&self) -> ((usize, usize), (f64, f64)) {
        match self {
            ScenarioConfig::Quiescent(_) => ((32, 32), (1.0, 1.0)),
            ScenarioConfig::TaylorGreen(_) => ((64, 64), (1.0, 1.0)),
            ScenarioConfig::Leapfrog(_) => ((128, 128), (1.0, 1.0)),
            ScenarioConfig::Karman(s) => ((256, 128), (s.width, s.height)),
            ScenarioConfig::Sediment(s) => ((384, 64), (s.width, s.height)),
            ScenarioConfig::MultiCylinder(_) => ((256, 256), (1.0, 1.0)),
            ScenarioConfig::Swimmer(s) => ((192, 96), (s.width, s.height)),
            ScenarioConfig::Fish2d(s) => ((512, 128), (s.width, s.height)),
            ScenarioConfig::Flag2d(s) => ((256, 128), (s.width, s.height)),
            ScenarioConfig::FallingSphereAblation(s) => ((128, 384), (s.width, s.height)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScenarioConfig::Quiescent(_) => Ok(()),
            ScenarioConfig::TaylorGreen(s) => {
                if s.wavenumber == 0 {
                    return Err(SimError::config("scenario.wavenumber", "must be at least 1"));
                }
                non_negative("viscosity", s.viscosity)
            }
            ScenarioConfig::Leapfrog(s) => {
                positive("core_radius", s.core_radius)?;
                positive("half_width", s.half_width)
            }
            ScenarioConfig::Karman(s) => {
                positive("radius", s.radius)?;
                positive("inflow", s.inflow)?;
                non_negative("viscosity", s.viscosity)?;
                positive("width", s.width)?;
                positive("height", s.height)
            }
            ScenarioConfig::Sediment(s) => {
                positive("radius", s.radius)?;
                non_negative("viscosity", s.viscosity)?;
                positive("width", s.width)?;
                positive("height", s.height)?;
                check_material(s.youngs, s.poisson, s.density_ratio)
            }
            ScenarioConfig::MultiCylinder(s) => {
                positive("radius", s.radius)?;
                if s.count == 0 {
                    return Err(SimError::config("scenario.count", "must be at least 1"));
                }
                if s.spacing < 2.0 {
                    return Err(SimError::config("scenario.spacing", "disks would overlap (spacing < 2 radii)"));
                }
                non_negative("viscosity", s.viscosity)?;
                check_material(s.youngs, s.poisson, s.density_ratio)
            }
            ScenarioConfig::Swimmer(s) => {
                positive("length", s.length)?;
                positive("thickness", s.thickness)?;
                non_negative("viscosity", s.viscosity)?;
                check_schedule(s.alpha, s.period, s.activation)?;
                check_material(s.youngs, s.poisson, s.density_ratio)
            }
            ScenarioConfig::Fish2d(s) => {
                positive("length", s.length)?;
                positive("thickness", s.thickness)?;
                non_negative("viscosity", s.viscosity)?;
                check_schedule(s.alpha, s.period, s.activation)?;
                check_material(s.youngs, s.poisson, s.density_ratio)
            }
            ScenarioConfig::Flag2d(s) => {
                positive("inflow", s.inflow)?;
                positive("flag_length", s.flag_length)?;
                positive("line_density", s.line_density)?;
                if s.segments < 2 {
                    return Err(SimError::config("scenario.segments", "must be at least 2"));
                }
                non_negative("viscosity", s.viscosity)
            }
            ScenarioConfig::FallingSphereAblation(s) => {
                positive("radius", s.radius)?;
                non_negative("viscosity", s.viscosity)?;
                check_material(s.youngs, s.poisson, s.density_ratio)
            }
        }
    }

    /// Builds the scene at the resolution requested by `config`.
    pub fn build(&self, config: &SimConfig) -> Result<Scene> {
        let ((nx0, ny0), (w, h)) = self.default_domain();
        let (nx, ny) = match (config.domain.nx, config.domain.ny) {
            (Some(nx), Some(ny)) => (nx, ny),
            (Some(nx), None) => (nx, ((nx as f64 * h / w).round() as usize).max(1)),
            (None, Some(ny)) => (((ny as f64 * w / h).round() as usize).max(1), ny),
            (None, None) => (nx0, ny0),
        };
        if nx < 4 || ny < 4 {
            return Err(SimError::config("domain", "at least 4 cells per axis are required"));
        }
        let dx = h / ny as f64;
        let seed = config.seed;
        let mut scene = match self {
            ScenarioConfig::Quiescent(s) => {
                let b = if s.periodic { Boundaries::periodic() } else { Boundaries::walls() };
                let layout = GridLayout::new(nx, ny, dx, b);
                let mut velocity = FaceField::filled(&layout, s.velocity[0], s.velocity[1]);
                velocity.apply_velocity_bc(&layout);
                fluid_scene(layout, velocity)
            }
            ScenarioConfig::TaylorGreen(s) => {
                let layout = GridLayout::new(nx, ny, dx, Boundaries::periodic());
                let k = TAU * s.wavenumber as f64 / w;
                let a = s.amplitude;
                let velocity = FaceField::from_fn(&layout, |x| {
                    Vec2::new(
                        a * (k * x.x).sin() * (k * x.y).cos(),
                        -a * (k * x.x).cos() * (k * x.y).sin(),
                    )
                });
                let mut sc = fluid_scene(layout, velocity);
                sc.viscosity = s.viscosity;
                sc.reference_speed = a;
                sc.reference_length = 1.0 / k;
                sc
            }
            ScenarioConfig::Leapfrog(s) => {
                let layout = GridLayout::new(nx, ny, dx, Boundaries::periodic());
                let mut cores = Vec::new();
                for px in s.pair_x {
                    cores.push((Vec2::new(px, 0.5 * h + s.half_width), s.circulation));
                    cores.push((Vec2::new(px, 0.5 * h - s.half_width), -s.circulation));
                }
                let velocity = FaceField::from_fn(&layout, |x| {
                    let mut u = Vec2::zeros();
                    for (c, g) in &cores {
                        for ox in -1..=1 {
                            for oy in -1..=1 {
                                let img = c + Vec2::new(ox as f64 * w, oy as f64 * h);
                                u += lamb_oseen(x, img, *g, s.core_radius);
                            }
                        }
                    }
                    u
                });
                let mut sc = fluid_scene(layout, velocity);
                sc.reference_speed = s.circulation / (4.0 * PI * s.half_width);
                sc.reference_length = 2.0 * s.half_width;
                sc
            }
            ScenarioConfig::Karman(s) => {
                let layout = GridLayout::new(nx, ny, dx, Boundaries::channel(s.inflow));
                let c = pair(s.center);
                let bump = c + Vec2::new(3.0 * s.radius, 0.5 * s.radius);
                let mut velocity = FaceField::from_fn(&layout, |x| {
                    Vec2::new(s.inflow, s.perturbation * s.inflow * gaussian_bump(x, bump, 2.0 * s.radius))
                });
                velocity.apply_velocity_bc(&layout);
                let mesh = IbmMesh::pinned_disk(c, s.radius, dx);
                let mut sc = fluid_scene(layout, velocity);
                sc.viscosity = s.viscosity;
                sc.solid = SceneSolid::Ibm {
                    mesh,
                    model: SolidModel::Fixed,
                };
                sc.probe = Some(c + Vec2::new(6.0 * s.radius, 0.0));
                sc.reference_speed = s.inflow;
                sc.reference_length = 2.0 * s.radius;
                sc
            }
            ScenarioConfig::Sediment(s) => {
                let layout = GridLayout::new(nx, ny, dx, Boundaries::walls());
                let mut solid = MpmSolid::default();
                solid.add_body(
                    &layout,
                    Shape::Disk {
                        center: s.center,
                        radius: s.radius,
                    },
                    Material {
                        youngs: s.youngs,
                        poisson: s.poisson,
                        density: s.density_ratio,
                    },
                    None,
                    seed,
                );
                let mut sc = fluid_scene(layout, FaceField::zeros(&layout));
                sc.gravity = Vec2::new(s.gravity, 0.0);
                sc.viscosity = s.viscosity;
                sc.solid = SceneSolid::Mpm(solid);
                sc.reference_length = 2.0 * s.radius;
                sc
            }
            ScenarioConfig::MultiCylinder(s) => {
                let layout = GridLayout::new(nx, ny, dx, Boundaries::walls());
                let mut solid = MpmSolid::default();
                let pitch = s.spacing * s.radius;
                let x0 = 0.5 * w - 0.5 * pitch * (s.count as f64 - 1.0);
                for k in 0..s.count {
                    solid.add_body(
                        &layout,
                        Shape::Disk {
                            center: [x0 + pitch * k as f64, s.height_start * h],
                            radius: s.radius,
                        },
                        Material {
                            youngs: s.youngs,
                            poisson: s.poisson,
                            density: s.density_ratio,
                        },
                        None,
                        seed,
                    );
                }
                let mut sc = fluid_scene(layout, FaceField::zeros(&layout));
                sc.gravity = Vec2::new(0.0, -s.gravity);
                sc.viscosity = s.viscosity;
                sc.solid = SceneSolid::Mpm(solid);
                sc.reference_length = 2.0 * s.radius;
                sc
            }
            ScenarioConfig::Swimmer(s) => actuated_scene(
                nx,
                ny,
                dx,
                seed,
                Actuated {
                    length: s.length,
                    thickness: s.thickness,
                    center: s.center,
                    alpha: s.alpha,
                    period: s.period,
                    viscosity: s.viscosity,
                    activation: s.activation,
                    density_ratio: s.density_ratio,
                    youngs: s.youngs,
                    poisson: s.poisson,
                    mode: ActuationMode::Swimmer,
                    axis: s.contraction_axis,
                },
            ),
            ScenarioConfig::Fish2d(s) => actuated_scene(
                nx,
                ny,
                dx,
                seed,
                Actuated {
                    length: s.length,
                    thickness: s.thickness,
                    center: s.center,
                    alpha: s.alpha,
                    period: s.period,
                    viscosity: s.viscosity,
                    activation: s.activation,
                    density_ratio: s.density_ratio,
                    youngs: s.youngs,
                    poisson: s.poisson,
                    mode: ActuationMode::Fish,
                    axis: s.contraction_axis,
                },
            ),
            ScenarioConfig::Flag2d(s) => {
                let layout = GridLayout::new(nx, ny, dx, Boundaries::channel(s.inflow));
                let pole = pair(s.pole_center);
                let anchor = pole + Vec2::new(s.pole_radius, 0.0);
                let mut mesh = IbmMesh::strip(
                    anchor,
                    Vec2::new(1.0, 0.0),
                    s.flag_length,
                    s.segments,
                    s.line_density,
                    dx,
                    s.bend_compliance,
                );
                let mut disk = IbmMesh::pinned_disk(pole, s.pole_radius, dx);
                // drop pole lattice points that coincide with the strip anchor
                let keep: Vec<bool> = disk.positions.iter().map(|p| (p - anchor).norm() > 0.5 * dx).collect();
                let mut k = 0;
                disk.positions.retain(|_| {
                    k += 1;
                    keep[k - 1]
                });
                let n = disk.positions.len();
                disk.velocities.truncate(n);
                disk.masses.truncate(n);
                disk.spread_volume.truncate(n);
                disk.pinned.truncate(n);
                mesh.merge(disk);
                let bump = anchor + Vec2::new(0.5 * s.flag_length, 0.0);
                let mut velocity = FaceField::from_fn(&layout, |x| {
                    Vec2::new(
                        s.inflow,
                        s.perturbation * s.inflow * gaussian_bump(x, bump, 2.0 * s.pole_radius),
                    )
                });
                velocity.apply_velocity_bc(&layout);
                let mut sc = fluid_scene(layout, velocity);
                sc.viscosity = s.viscosity;
                sc.solid = SceneSolid::Ibm { mesh, model: s.model };
                sc.probe = Some(anchor + Vec2::new(s.flag_length + 0.1, 0.0));
                sc.reference_speed = s.inflow;
                sc.reference_length = s.flag_length;
                sc
            }
            ScenarioConfig::FallingSphereAblation(s) => {
                let layout = GridLayout::new(nx, ny, dx, Boundaries::walls());
                let mut solid = MpmSolid::default();
                solid.add_body(
                    &layout,
                    Shape::Disk {
                        center: s.center,
                        radius: s.radius,
                    },
                    Material {
                        youngs: s.youngs,
                        poisson: s.poisson,
                        density: s.density_ratio,
                    },
                    None,
                    seed,
                );
                let mut sc = fluid_scene(layout, FaceField::zeros(&layout));
                sc.gravity = Vec2::new(0.0, -s.gravity);
                sc.viscosity = s.viscosity;
                sc.solid = SceneSolid::Mpm(solid);
                sc.reference_length = 2.0 * s.radius;
                sc
            }
        };
        if let Some(g) = config.forces.gravity {
            scene.gravity = pair(g);
        }
        if let Some(nu) = config.forces.viscosity {
            scene.viscosity = nu;
        }
        if let Some(b) = config.forces.buoyancy {
            scene.buoyancy = pair(b);
        }
        if let SceneSolid::Ibm { mesh, .. } = &scene.solid {
            for p in &mesh.positions {
                if !scene.layout.contains(*p) {
                    return Err(SimError::config("scenario", "immersed structure lies outside the domain"));
                }
            }
        }
        if let SceneSolid::Mpm(solid) = &scene.solid {
            if solid.particles.is_empty() {
                return Err(SimError::config("scenario", "solid is smaller than the particle spacing"));
            }
            if solid.particles.iter().any(|p| !scene.layout.contains(p.x)) {
                return Err(SimError::config("scenario", "solid lies outside the domain"));
            }
        }
        Ok(scene)
    }
}

fn fluid_scene(layout: GridLayout, velocity: FaceField) -> Scene {
    Scene {
        layout,
        fluid_density: 1.0,
        velocity,
        gravity: Vec2::zeros(),
        viscosity: 0.0,
        buoyancy: Vec2::zeros(),
        solid: SceneSolid::None,
        probe: None,
        reference_speed: 1.0,
        reference_length: 1.0,
    }
}

struct Actuated {
    length: f64,
    thickness: f64,
    center: [f64; 2],
    alpha: f64,
    period: f64,
    viscosity: f64,
    activation: [f64; 2],
    density_ratio: f64,
    youngs: f64,
    poisson: f64,
    mode: ActuationMode,
    axis: ContractionAxis,
}

fn actuated_scene(nx: usize, ny: usize, dx: f64, seed: u64, a: Actuated) -> Scene {
    let layout = GridLayout::new(nx, ny, dx, Boundaries::walls());
    let mut solid = MpmSolid::default();
    solid.add_body(
        &layout,
        Shape::Capsule {
            center: a.center,
            size: [a.length, a.thickness],
        },
        Material {
            youngs: a.youngs,
            poisson: a.poisson,
            density: a.density_ratio,
        },
        Some(ActiveStrainSchedule {
            alpha: a.alpha,
            period: a.period,
            mode: a.mode,
            axis: a.axis,
            thickness: match a.axis {
                ContractionAxis::Cross => a.thickness,
                ContractionAxis::Long => a.length,
            },
            decay: None,
            activation_range: (a.activation[0], a.activation[1]),
        }),
        seed,
    );
    let mut sc = fluid_scene(layout, FaceField::zeros(&layout));
    sc.viscosity = a.viscosity;
    sc.solid = SceneSolid::Mpm(solid);
    sc.reference_length = a.length;
    sc
}

/// The side of the domain a boundary kind belongs to, for reporting.
pub fn describe_boundaries(b: &Boundaries) -> String {
    let name = |k: &BoundaryKind| match k {
        BoundaryKind::Wall => "wall".to_string(),
        BoundaryKind::Inflow { velocity } => format!("inflow({velocity})"),
        BoundaryKind::Outflow => "outflow".to_string(),
        BoundaryKind::Periodic => "periodic".to_string(),
    };
    format!(
        "left={} right={} bottom={} top={}",
        name(&b.left),
        name(&b.right),
        name(&b.bottom),
        name(&b.top)
    )
}
