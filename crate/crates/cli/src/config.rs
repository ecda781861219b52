//! On-disk run configuration.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "grid": { "counts": [24, 16, 16], "spatial_intervals": 64 },
//!   "model": { "nu": -0.5, "kappa": 66.67 },
//!   "boundary": {
//!     "delta": [1.0, 0.0, 0.0],
//!     "wall_temperature": [1.0, 1.0],
//!     "regime": "inflow_dominant",
//!     "left":  { "type": "maxwellian", "temperature": 1.0, "flux": 0.5 },
//!     "right": { "file": "right.json" }
//!   }
//! }
//! ```
//!
//! Unknown keys are rejected everywhere. Boundary data are either inline
//! [`InflowData`] objects or `{"file": path}` references, resolved relative
//! to the configuration file. A referenced file holds one `InflowData`
//! object with an optional `"side": "left" | "right"` that must match the
//! slot it is used in.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use esbgk_core::grid::{PhaseGrid, QuadratureRule, SpatialGrid, VelocityGrid};
use esbgk_core::{BoundarySpec, InflowData, InitialGuess, Problem, Regime, SolverConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub grid: GridConfig,
    pub model: ModelConfig,
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Half-width of the velocity box; defaults to `8 √T_max` over all
    /// temperatures in the boundary section.
    #[serde(default)]
    pub cutoff: Option<f64>,
    #[serde(default = "default_counts")]
    pub counts: [usize; 3],
    #[serde(default)]
    pub rule: QuadratureRule,
    #[serde(default = "default_intervals")]
    pub spatial_intervals: usize,
}

fn default_counts() -> [usize; 3] {
    [24, 16, 16]
}

fn default_intervals() -> usize {
    64
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            cutoff: None,
            counts: default_counts(),
            rule: QuadratureRule::default(),
            spatial_intervals: default_intervals(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub nu: f64,
    /// Knudsen number; `τ = κ (1 − ν)`.
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub delta: [f64; 3],
    pub wall_temperature: [f64; 2],
    pub regime: Regime,
    pub left: InflowSource,
    pub right: InflowSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InflowSource {
    File {
        file: PathBuf,
    },
    Inline(InflowData),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GuessKind {
    #[default]
    Fitted,
    WallBlend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub initial_guess: GuessKind,
    #[serde(default)]
    pub strict: bool,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    500
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            tol: default_tol(),
            max_iter: default_max_iter(),
            initial_guess: GuessKind::Fitted,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Relative to the configuration file; the current directory when absent.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub dump_field: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    20_240_601
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: default_seed() }
    }
}

/// A configuration together with the directory its relative paths refer to.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read configuration {}", path.display()))?;
        let config = parse(&text).with_context(|| format!("invalid configuration {}", path.display()))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedConfig { config, base_dir })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        match &self.config.output.dir {
            Some(d) => self.resolve(d),
            None => PathBuf::from("."),
        }
    }

    /// Inline or file-backed inflow data for one wall.
    pub fn inflow(&self, source: &InflowSource, side: &str) -> Result<InflowData> {
        match source {
            InflowSource::Inline(d) => Ok(d.clone()),
            InflowSource::File { file } => {
                let path = self.resolve(file);
                let text = fs::read_to_string(&path)
                    .with_context(|| format!("cannot read boundary data {}", path.display()))?;
                parse_boundary_file(&text, side)
                    .with_context(|| format!("invalid boundary data {}", path.display()))
            }
        }
    }

    /// Grids, boundary specification and solver settings.
    pub fn problem(&self) -> Result<Problem> {
        let c = &self.config;
        let left = self.inflow(&c.boundary.left, "left")?;
        let right = self.inflow(&c.boundary.right, "right")?;
        let cutoff = match c.grid.cutoff {
            Some(v) => v,
            None => {
                let mut t_max = c.boundary.wall_temperature[0].max(c.boundary.wall_temperature[1]);
                for d in [&left, &right] {
                    if let InflowData::Maxwellian { temperature, .. } = d {
                        t_max = t_max.max(*temperature);
                    }
                }
                VelocityGrid::default_cutoff(t_max)
            }
        };
        let velocity = VelocityGrid::new(cutoff, c.grid.counts, c.grid.rule)?;
        let space = SpatialGrid::uniform(c.grid.spatial_intervals)?;
        let grid = PhaseGrid::new(velocity, space);
        let spec = BoundarySpec::from_inflow(
            &grid.velocity,
            c.boundary.delta,
            c.boundary.wall_temperature,
            &left,
            &right,
            c.boundary.regime,
        )?;
        let config = SolverConfig {
            nu: c.model.nu,
            kappa: c.model.kappa,
            tol: c.solver.tol,
            max_iter: c.solver.max_iter,
            initial_guess: match c.solver.initial_guess {
                GuessKind::Fitted => InitialGuess::Fitted,
                GuessKind::WallBlend => InitialGuess::WallBlend,
            },
            strict: c.solver.strict,
        };
        config.validate()?;
        Ok(Problem { grid, spec, config })
    }
}

pub fn parse(text: &str) -> Result<RunConfig> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => bail!("unsupported schema_version {v}; this build reads version {SCHEMA_VERSION}"),
        None => bail!("missing integer key schema_version"),
    }
    Ok(serde_json::from_value(value)?)
}

fn parse_boundary_file(text: &str, side: &str) -> Result<InflowData> {
    let mut value: serde_json::Value = serde_json::from_str(text)?;
    if let Some(obj) = value.as_object_mut() {
        if let Some(s) = obj.remove("side") {
            if s.as_str() != Some(side) {
                bail!("boundary file declares side {s} but is used for the {side} wall");
            }
        }
    }
    Ok(serde_json::from_value(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "model": { "nu": 0.0, "kappa": 50 },
        "boundary": {
            "delta": [1, 0, 0],
            "wall_temperature": [1, 1],
            "regime": "inflow_dominant",
            "left": { "type": "maxwellian", "temperature": 1.0 },
            "right": { "type": "maxwellian", "temperature": 1.0 }
        }
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.grid.counts, [24, 16, 16]);
        assert_eq!(c.grid.spatial_intervals, 64);
        assert_eq!(c.solver.tol, 1e-10);
        assert!(matches!(c.boundary.left, InflowSource::Inline(InflowData::Maxwellian { .. })));
    }

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        let extra = MINIMAL.replace("\"kappa\": 50", "\"kappa\": 50, \"tau\": 3");
        assert!(parse(&extra).is_err());
        let old = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert!(format!("{:#}", parse(&old).unwrap_err()).contains("schema_version"));
        let bad_inline = MINIMAL.replace("\"temperature\": 1.0 }", "\"temperature\": 1.0, \"colour\": 1 }");
        assert!(parse(&bad_inline).is_err());
    }

    #[test]
    fn boundary_file_side_is_checked() {
        let text = r#"{ "type": "maxwellian", "temperature": 2.0, "side": "right" }"#;
        assert!(parse_boundary_file(text, "right").is_ok());
        assert!(parse_boundary_file(text, "left").is_err());
    }

    #[test]
    fn default_cutoff_follows_hottest_temperature() {
        let text = MINIMAL.replacen("\"temperature\": 1.0", "\"temperature\": 4.0", 1);
        let loaded = LoadedConfig { config: parse(&text).unwrap(), base_dir: PathBuf::new() };
        let p = loaded.problem().unwrap();
        assert!((p.grid.velocity.cutoff() - 16.0).abs() < 1e-12);
    }
}
