//! Scenario files: one TOML document with `[device]`, `[boundary]`,
//! `[solver]` and `[output]` tables.
//!
//! ```toml
//! name = "biased-1d"
//! seed = 7
//!
//! [device]
//! geometry = { kind = "interval", length = 1.0, cells = 64 }
//! contacts = [{ side = "left" }, { side = "right" }]
//! lambda = 0.3
//! final_time = 1.0
//! doping = { kind = "constant", value = 0.5 }
//!
//! [device.initial]
//! n = "boundary"
//! p = "boundary"
//! d = { kind = "constant", value = 0.5 }
//! perturbation = 0.1
//!
//! [boundary]
//! mode = "bias"
//! density = 0.5
//! voltage = 5.0
//!
//! [solver]
//! dt = 0.01
//!
//! [output]
//! directory = "biased-1d"
//! dump_times = [0.5, 1.0]
//! ```

use crate::device::{
    validate_initial_data, BoundaryData, ContactSpec, DeviceMesh, Geometry, InitialDataError, MeshSpec,
    ModelParameters, Profile, Side, SystemState,
};
use crate::solver::SolverConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Number of constant-voltage stages a ramp is split into.
pub const RAMP_STAGES: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read `{path}`: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("`{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error(transparent)]
    Initial(#[from] InitialDataError),
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

/// A profile given inline or as a two-column CSV file `x,value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileInput {
    File { path: PathBuf },
    Inline(Profile),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKeyword {
    /// Use the interior extension of the boundary data.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldInput {
    Keyword(FieldKeyword),
    Profile(ProfileInput),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default = "boundary_field")]
    pub n: FieldInput,
    #[serde(default = "boundary_field")]
    pub p: FieldInput,
    pub d: FieldInput,
    /// Relative amplitude of a seeded uniform perturbation of `n` and `p`.
    #[serde(default)]
    pub perturbation: f64,
}

fn boundary_field() -> FieldInput {
    FieldInput::Keyword(FieldKeyword::Boundary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    pub geometry: Geometry,
    pub contacts: Vec<ContactSpec>,
    pub lambda: f64,
    pub final_time: f64,
    pub doping: ProfileInput,
    pub initial: InitialSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// `V̄ = 0`: thermal equilibrium when `n̄`, `p̄` are constant.
    Equilibrium,
    /// `V̄` linear in `x`, 0 on the left contact and `voltage` on the right.
    Bias,
    /// Bias raised to `voltage` over `ramp_time` in constant stages.
    Ramp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub mode: BoundaryMode,
    /// Constant `n̄ = p̄` unless `n_bar` / `p_bar` are given.
    #[serde(default = "half")]
    pub density: f64,
    pub n_bar: Option<ProfileInput>,
    pub p_bar: Option<ProfileInput>,
    #[serde(default)]
    pub voltage: f64,
    pub ramp_time: Option<f64>,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Relative paths are taken from `MEMTRANS_OUTPUT_ROOT` when set, else
    /// from the working directory.
    pub directory: PathBuf,
    #[serde(default)]
    pub dump_times: Vec<f64>,
    #[serde(default = "ten")]
    pub ceiling_factor: f64,
}

fn ten() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub device: DeviceSection,
    pub boundary: BoundarySection,
    #[serde(default)]
    pub solver: SolverConfig,
    pub output: OutputSection,
}

/// Command-line overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub cells: Option<usize>,
    pub final_time: Option<f64>,
}

/// Constant boundary data over `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub end: f64,
    pub voltage: f64,
    pub bc: BoundaryData,
}

/// A fully resolved scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub mesh: DeviceMesh,
    pub params: ModelParameters,
    pub stages: Vec<Stage>,
    pub initial: SystemState,
    pub solver: SolverConfig,
    pub output: OutputSection,
    pub source: ScenarioFile,
}

impl ScenarioFile {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(dt) = o.dt {
            let s = &mut self.solver;
            s.dt = dt;
            s.dt_min = s.dt_min.min(dt);
            s.dt_max = s.dt_max.max(dt);
        }
        if let Some(t) = o.final_time {
            self.device.final_time = t;
        }
        if let Some(cells) = o.cells {
            match &mut self.device.geometry {
                Geometry::Interval { cells: c, .. } => *c = cells,
                Geometry::Rectangle { nx, ny, .. } => {
                    // keep the aspect ratio of the grid
                    let ratio = *ny as f64 / *nx as f64;
                    *nx = cells;
                    *ny = ((cells as f64 * ratio).round() as usize).max(1);
                }
            }
        }
        Ok(())
    }
}

fn read_profile(input: &ProfileInput, base: &Path, field: &str) -> Result<Profile, ConfigError> {
    let profile = match input {
        ProfileInput::Inline(p) => p.clone(),
        ProfileInput::File { path } => {
            let path = base.join(path);
            let mut reader = csv::ReaderBuilder::new()
                .comment(Some(b'#'))
                .trim(csv::Trim::All)
                .from_path(&path)
                .map_err(|e| invalid(field, format!("cannot read `{}`: {e}", path.display())))?;
            let mut x = Vec::new();
            let mut values = Vec::new();
            for row in reader.deserialize::<(f64, f64)>() {
                let (a, b) = row.map_err(|e| invalid(field, format!("`{}`: {e}", path.display())))?;
                x.push(a);
                values.push(b);
            }
            Profile::Tabulated { x, values }
        }
    };
    profile
        .validate(field)
        .map_err(|e| invalid(field, e.to_string()))?;
    Ok(profile)
}

fn has_side(contacts: &[ContactSpec], side: Side) -> bool {
    contacts.iter().any(|c| c.side == side)
}

impl Scenario {
    /// Reads and resolves a scenario file; relative data paths are taken
    /// from the file's directory.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut file = ScenarioFile::from_toml(&text)?;
        file.apply(overrides)?;
        Self::resolve(file, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn resolve(file: ScenarioFile, base: &Path) -> Result<Self, ConfigError> {
        let dev = &file.device;
        let mesh = DeviceMesh::build(&MeshSpec {
            geometry: dev.geometry.clone(),
            contacts: dev.contacts.clone(),
        })
        .map_err(|e| invalid("device.contacts", e.to_string()))?;
        if !(dev.final_time.is_finite() && dev.final_time >= 0.0) {
            return Err(invalid("device.final_time", "must be finite and non-negative"));
        }
        let doping = read_profile(&dev.doping, base, "device.doping")
            .map_err(|e| invalid("device.doping", format!("{e} (assumption A2: A must be bounded)")))?;
        let params = ModelParameters::new(dev.lambda, &doping, &mesh, dev.final_time)
            .map_err(|e| invalid("device.lambda", e.to_string()))?;

        let b = &file.boundary;
        let n_bar = match &b.n_bar {
            Some(p) => read_profile(p, base, "boundary.n_bar")?,
            None => Profile::constant(b.density),
        };
        let p_bar = match &b.p_bar {
            Some(p) => read_profile(p, base, "boundary.p_bar")?,
            None => Profile::constant(b.density),
        };
        let width = mesh.extent()[0];
        if b.mode != BoundaryMode::Equilibrium {
            if !b.voltage.is_finite() {
                return Err(invalid("boundary.voltage", "must be finite"));
            }
            if !(has_side(&dev.contacts, Side::Left) && has_side(&dev.contacts, Side::Right)) {
                return Err(invalid(
                    "boundary.mode",
                    "bias and ramp apply the voltage between a left and a right contact; both must exist",
                ));
            }
        }
        let make = |voltage: f64| {
            let v_bar = Profile::Linear {
                value: 0.0,
                gradient: [voltage / width, 0.0],
            };
            BoundaryData::new(n_bar.clone(), p_bar.clone(), v_bar, &mesh).map_err(|e| {
                let field = if e.to_string().contains("p_bar") {
                    "boundary.p_bar"
                } else {
                    "boundary.n_bar"
                };
                invalid(field, e.to_string())
            })
        };
        let end = dev.final_time;
        let stages = match b.mode {
            BoundaryMode::Equilibrium => vec![Stage {
                end,
                voltage: 0.0,
                bc: make(0.0)?,
            }],
            BoundaryMode::Bias => vec![Stage {
                end,
                voltage: b.voltage,
                bc: make(b.voltage)?,
            }],
            BoundaryMode::Ramp => {
                let ramp = b
                    .ramp_time
                    .ok_or_else(|| invalid("boundary.ramp_time", "required in ramp mode"))?;
                if !(ramp.is_finite() && ramp > 0.0) {
                    return Err(invalid("boundary.ramp_time", "must be finite and positive"));
                }
                let mut stages = Vec::new();
                for i in 0..RAMP_STAGES {
                    let stage_end = ramp * (i + 1) as f64 / RAMP_STAGES as f64;
                    let voltage = b.voltage * (i + 1) as f64 / RAMP_STAGES as f64;
                    stages.push(Stage {
                        end: stage_end.min(end),
                        voltage,
                        bc: make(voltage)?,
                    });
                    if stage_end >= end {
                        break;
                    }
                }
                if ramp < end {
                    stages.push(Stage {
                        end,
                        voltage: b.voltage,
                        bc: make(b.voltage)?,
                    });
                }
                stages
            }
        };

        let solver = file.solver.clone();
        solver.validate().map_err(|e| match e {
            crate::solver::SolverError::InvalidConfig { field, reason } => invalid(&format!("solver.{field}"), reason),
            other => invalid("solver", other.to_string()),
        })?;

        let init = &dev.initial;
        if !(init.perturbation.is_finite() && (0.0..1.0).contains(&init.perturbation)) {
            return Err(invalid("device.initial.perturbation", "must lie in [0, 1)"));
        }
        let bc0 = &stages[0].bc;
        let field = |input: &FieldInput, name: &str, ext: &[f64]| -> Result<Vec<f64>, ConfigError> {
            match input {
                FieldInput::Keyword(FieldKeyword::Boundary) => Ok(ext.to_vec()),
                FieldInput::Profile(p) => {
                    let p = read_profile(p, base, name)?;
                    Ok(mesh.cells().iter().map(|c| p.eval(c.centroid)).collect())
                }
            }
        };
        let mut n0 = field(&init.n, "device.initial.n", &bc0.cells().n)?;
        let mut p0 = field(&init.p, "device.initial.p", &bc0.cells().p)?;
        if matches!(init.d, FieldInput::Keyword(_)) {
            return Err(invalid("device.initial.d", "vacancies have no boundary data; give a profile"));
        }
        let d0 = field(&init.d, "device.initial.d", &[])?;
        if init.perturbation > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(file.seed);
            for x in n0.iter_mut().chain(p0.iter_mut()) {
                *x *= 1.0 + init.perturbation * (2.0 * rng.gen::<f64>() - 1.0);
            }
        }
        let initial = validate_initial_data(&n0, &p0, &d0, &mesh, bc0, &params, solver.saturation_eps)?;

        for (i, &t) in file.output.dump_times.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(invalid(&format!("output.dump_times[{i}]"), "must be finite and non-negative"));
            }
        }
        if !(file.output.ceiling_factor.is_finite() && file.output.ceiling_factor >= 1.0) {
            return Err(invalid("output.ceiling_factor", "must be finite and at least 1"));
        }
        Ok(Self {
            name: file.name.clone(),
            seed: file.seed,
            mesh,
            params,
            stages,
            initial,
            solver,
            output: file.output.clone(),
            source: file,
        })
    }

    /// Output directory, under `MEMTRANS_OUTPUT_ROOT` when that is set and
    /// the configured directory is relative.
    pub fn output_dir(&self) -> PathBuf {
        let dir = &self.output.directory;
        match std::env::var_os("MEMTRANS_OUTPUT_ROOT") {
            Some(root) if dir.is_relative() => PathBuf::from(root).join(dir),
            _ => dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "t"
[device]
geometry = { kind = "interval", length = 1.0, cells = 8 }
contacts = [{ side = "left" }, { side = "right" }]
lambda = 0.3
final_time = 1.0
doping = { kind = "constant", value = 0.5 }
[device.initial]
d = { kind = "constant", value = 0.5 }
[boundary]
mode = "equilibrium"
[output]
directory = "out"
"#;

    fn resolve(text: &str) -> Result<Scenario, ConfigError> {
        Scenario::resolve(ScenarioFile::from_toml(text)?, Path::new("."))
    }

    #[test]
    fn minimal_equilibrium_scenario() {
        let s = resolve(BASE).unwrap();
        assert_eq!(s.mesh.num_cells(), 8);
        assert_eq!(s.stages.len(), 1);
        assert_eq!(s.initial.n, vec![0.5; 8]);
        assert_eq!(s.solver, SolverConfig::default());
    }

    #[test]
    fn vacancy_mean_of_one_cites_a4() {
        let text = BASE.replace("d = { kind = \"constant\", value = 0.5 }", "d = { kind = \"constant\", value = 1.0 }");
        let err = resolve(&text).unwrap_err().to_string();
        assert!(err.contains("A4"), "{err}");
    }

    #[test]
    fn missing_contacts_cite_a1() {
        let text = BASE.replace("contacts = [{ side = \"left\" }, { side = \"right\" }]", "contacts = []");
        let err = resolve(&text).unwrap_err().to_string();
        assert!(err.contains("device.contacts") && err.contains("A1"), "{err}");
    }

    #[test]
    fn nonpositive_density_cites_a3() {
        let text = BASE.replace("mode = \"equilibrium\"", "mode = \"equilibrium\"\ndensity = 0.0");
        let err = resolve(&text).unwrap_err().to_string();
        assert!(err.contains("boundary.n_bar") && err.contains("A3"), "{err}");
    }

    #[test]
    fn unknown_solver_field_is_rejected() {
        let text = format!("{BASE}\n[solver]\nbogus = 1\n");
        assert!(matches!(resolve(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn ramp_is_split_into_stages() {
        let text = BASE.replace("mode = \"equilibrium\"", "mode = \"ramp\"\nvoltage = 2.0\nramp_time = 0.5");
        let s = resolve(&text).unwrap();
        assert_eq!(s.stages.len(), RAMP_STAGES + 1);
        assert_eq!(s.stages[RAMP_STAGES - 1].end, 0.5);
        assert_eq!(s.stages.last().unwrap().voltage, 2.0);
        assert!((s.stages[0].voltage - 0.1).abs() < 1e-15);
    }

    #[test]
    fn perturbation_is_seeded() {
        let text = BASE.replace("[boundary]", "perturbation = 0.2\n[boundary]");
        let a = resolve(&text).unwrap();
        let b = resolve(&text).unwrap();
        assert_eq!(a.initial, b.initial);
        assert!(a.initial.n.iter().any(|&x| x != 0.5));
        let mut file = ScenarioFile::from_toml(&text).unwrap();
        file.apply(&Overrides {
            seed: Some(99),
            ..Overrides::default()
        })
        .unwrap();
        let c = Scenario::resolve(file, Path::new(".")).unwrap();
        assert_ne!(a.initial.n, c.initial.n);
    }

    #[test]
    fn overrides() {
        let mut file = ScenarioFile::from_toml(BASE).unwrap();
        file.apply(&Overrides {
            dt: Some(0.5),
            cells: Some(20),
            final_time: Some(2.0),
            seed: None,
        })
        .unwrap();
        let s = Scenario::resolve(file, Path::new(".")).unwrap();
        assert_eq!(s.mesh.num_cells(), 20);
        assert_eq!(s.solver.dt, 0.5);
        assert_eq!(s.solver.dt_max, 0.5);
        assert_eq!(s.params.final_time, 2.0);
    }
}
