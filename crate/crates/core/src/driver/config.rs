//! Declarative run configuration (TOML) and its validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::scenario::ScenarioConfig;
use crate::error::{Result, SimError};
use crate::flowmap::FlowMapConfig;
use crate::grid::ProjectionSettings;
use crate::impulse::KineticSource;
use crate::mpm::SubstepSettings;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Impulse flow maps with pressure and force buffers.
    #[default]
    Pfm,
    /// Affine particle transfer of velocity with midpoint advection.
    ApicMidpoint,
    /// Grid-only semi-Lagrangian advection.
    EulerSl,
    /// Fluid impulse and solid velocity transferred jointly, no conversion.
    DirectHfmc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pfm => "pfm",
            Method::ApicMidpoint => "apic_midpoint",
            Method::EulerSl => "euler_sl",
            Method::DirectHfmc => "direct_hfmc",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Method::Pfm, Method::ApicMidpoint, Method::EulerSl, Method::DirectHfmc]
            .into_iter()
            .find(|m| m.name() == s)
    }

    pub fn uses_particles(self) -> bool {
        self != Method::EulerSl
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    None,
    Mpm,
    Ibm,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    /// Cell counts; a single value keeps the scene's aspect ratio.
    pub nx: Option<usize>,
    pub ny: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowMapSection {
    pub cfl: f64,
    pub n_reinit: usize,
    pub n_reinit_narrowband: usize,
    pub particles_per_cell: usize,
}

impl Default for FlowMapSection {
    fn default() -> Self {
        let d = FlowMapConfig::default();
        FlowMapSection {
            cfl: d.cfl,
            n_reinit: d.n_reinit,
            n_reinit_narrowband: d.n_reinit_narrowband,
            particles_per_cell: d.particles_per_cell,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    /// Overrides the CFL-driven step when set.
    pub fixed_dt: Option<f64>,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Speed floor for the CFL estimate.
    pub velocity_floor: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection {
            fixed_dt: None,
            dt_min: 1e-5,
            dt_max: 1.0 / 24.0,
            velocity_floor: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcesSection {
    pub gravity: Option<[f64; 2]>,
    pub viscosity: Option<f64>,
    /// Uniform acceleration applied to fluid particles only.
    pub buoyancy: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionSection {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ProjectionSection {
    fn default() -> Self {
        let d = ProjectionSettings::default();
        ProjectionSection {
            tolerance: d.relative_tolerance,
            max_iterations: d.max_iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolidSection {
    pub sound_cfl: f64,
    pub velocity_cfl: f64,
    /// Substep length for immersed structures.
    pub dt_solid: f64,
    pub xpbd_iterations: usize,
}

impl Default for SolidSection {
    fn default() -> Self {
        let d = SubstepSettings::default();
        SolidSection {
            sound_cfl: d.sound_cfl,
            velocity_cfl: d.velocity_cfl,
            dt_solid: 5e-4,
            xpbd_iterations: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub frames: usize,
    pub frame_stride: usize,
    pub dump_grids: bool,
    pub images: bool,
    pub vorticity_limit: f64,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: PathBuf::from("output"),
            frames: 10,
            frame_stride: 10,
            dump_grids: false,
            images: true,
            vorticity_limit: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub method: Method,
    /// Inferred from the scenario when absent.
    #[serde(default)]
    pub backend: Option<Backend>,
    #[serde(default)]
    pub kinetic_source: KineticSource,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default)]
    pub flowmap: FlowMapSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub forces: ForcesSection,
    #[serde(default)]
    pub projection: ProjectionSection,
    #[serde(default)]
    pub solid: SolidSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl SimConfig {
    /// Default configuration for a scenario.
    pub fn for_scenario(scenario: ScenarioConfig) -> Self {
        SimConfig {
            seed: 0,
            method: Method::Pfm,
            backend: None,
            kinetic_source: KineticSource::Midpoint,
            scenario,
            domain: DomainSection::default(),
            flowmap: FlowMapSection::default(),
            time: TimeSection::default(),
            forces: ForcesSection::default(),
            projection: ProjectionSection::default(),
            solid: SolidSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let cfg: SimConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.message().to_string();
            SimError::Config {
                field: if path == "." { "<root>".into() } else { path },
                message: msg,
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn flowmap_config(&self) -> FlowMapConfig {
        FlowMapConfig {
            n_reinit: self.flowmap.n_reinit,
            n_reinit_narrowband: self.flowmap.n_reinit_narrowband,
            particles_per_cell: self.flowmap.particles_per_cell,
            cfl: self.flowmap.cfl,
        }
    }

    pub fn projection_settings(&self) -> ProjectionSettings {
        ProjectionSettings {
            relative_tolerance: self.projection.tolerance,
            max_iterations: self.projection.max_iterations,
            ..Default::default()
        }
    }

    pub fn substep_settings(&self) -> SubstepSettings {
        SubstepSettings {
            sound_cfl: self.solid.sound_cfl,
            velocity_cfl: self.solid.velocity_cfl,
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend.unwrap_or_else(|| self.scenario.default_backend())
    }

    pub fn validate(&self) -> Result<()> {
        self.flowmap_config()
            .validate()
            .map_err(|(f, m)| SimError::config(format!("flowmap.{f}"), m))?;
        if let Some(dt) = self.time.fixed_dt {
            if !(dt > 0.0) {
                return Err(SimError::config("time.fixed_dt", "must be positive"));
            }
        }
        if !(self.time.dt_min > 0.0 && self.time.dt_min <= self.time.dt_max) {
            return Err(SimError::config("time.dt_min", "must be positive and not exceed time.dt_max"));
        }
        if !(self.projection.tolerance > 0.0) {
            return Err(SimError::config("projection.tolerance", "must be positive"));
        }
        if self.projection.max_iterations == 0 {
            return Err(SimError::config("projection.max_iterations", "must be at least 1"));
        }
        if self.output.frame_stride == 0 {
            return Err(SimError::config("output.frame_stride", "must be at least 1"));
        }
        if !(self.solid.dt_solid > 0.0) {
            return Err(SimError::config("solid.dt_solid", "must be positive"));
        }
        if let Some(nu) = self.forces.viscosity {
            if nu < 0.0 {
                return Err(SimError::config("forces.viscosity", "must be non-negative"));
            }
        }
        let backend = self.backend();
        let scene_backend = self.scenario.default_backend();
        if scene_backend != Backend::None && backend != scene_backend {
            return Err(SimError::config(
                "backend",
                format!("scenario '{}' needs the {:?} backend", self.scenario.name(), scene_backend),
            ));
        }
        match (self.method, backend) {
            (Method::DirectHfmc, b) if b != Backend::Mpm => Err(SimError::config(
                "method",
                "direct_hfmc is only defined for the mpm backend",
            )),
            (Method::EulerSl, Backend::Mpm) => Err(SimError::config(
                "method",
                "euler_sl has no particles to carry MPM coupling; use none or ibm scenes",
            )),
            _ => self.scenario.validate(),
        }
    }
}
