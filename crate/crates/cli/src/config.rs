//! Run configuration: JSON schema, defaults and conversion into library types.
//!
//! Every struct rejects unknown keys. Numeric invariants are checked by the
//! library types the values end up in, before any computation starts.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use fracthermistor::continuation::ContinuationConfig;
use fracthermistor::fracops::FracOrder;
use fracthermistor::model::{
    Conductivity, ConductivityTable, DenominatorPlacement, GrowthConstants, HypothesisConstants, ProblemSpec,
};
use fracthermistor::picard::PicardOptions;
use fracthermistor::Error;
use serde::Deserialize;

/// Overrides the directory relative output paths are resolved against.
pub const OUTPUT_DIR_ENV: &str = "FRACTHERM_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Local,
    Global,
    Validate,
    Converge,
    Gronwall,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Local => "local",
            Mode::Global => "global",
            Mode::Validate => "validate",
            Mode::Converge => "converge",
            Mode::Gronwall => "gronwall",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_mode")]
    pub mode: Mode,
    pub problem: ProblemSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub continuation: ContinuationSection,
    #[serde(default)]
    pub validate: ValidateSection,
    #[serde(default)]
    pub converge: ConvergeSection,
    #[serde(default)]
    pub outputs: OutputsSection,
}

fn default_mode() -> Mode {
    Mode::Local
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub alpha: f64,
    pub lambda: f64,
    pub u0: f64,
    #[serde(alias = "horizon_T")]
    pub horizon: f64,
    /// Defaults to 1 under the inner placement.
    pub delta: Option<f64>,
    #[serde(default)]
    pub placement: Placement,
    pub conductivity: ConductivitySection,
    pub constants: ConstantsSection,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    #[default]
    Inner,
    Outer,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConductivitySection {
    Constant {
        value: f64,
    },
    BoundedOscillatory {
        base: f64,
        amplitude: f64,
    },
    QuadraticTime {
        scale: f64,
        #[serde(default)]
        amplitude: f64,
    },
    AffineGrowth {
        floor: f64,
        slope: f64,
        cap: f64,
    },
    /// CSV table; a relative path is taken relative to the config file.
    Table {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    pub c1: f64,
    pub c2: f64,
    #[serde(alias = "L")]
    pub lipschitz: f64,
    #[serde(alias = "M")]
    pub m: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub c5: Option<f64>,
}

fn default_omega() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub b: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Intervals of the uniform local grid.
    pub grid_points: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            b: 1.0,
            tol: 1e-10,
            max_iter: 200,
            grid_points: 512,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuationSection {
    /// Defaults to `solver.b`.
    pub step_b: Option<f64>,
    pub blowup_threshold: Option<f64>,
    pub max_segments: Option<usize>,
    pub grid_density: Option<f64>,
    pub min_intervals: Option<usize>,
    pub max_intervals: Option<usize>,
    pub grading: Option<f64>,
    pub max_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    H1,
    H2,
    H3,
    Growth,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSection {
    /// Defaults to `[0, horizon]`.
    pub s_range: Option<[f64; 2]>,
    /// Defaults to `[u0 − b, u0 + b]`.
    pub u_range: Option<[f64; 2]>,
    pub samples: usize,
    pub checks: Vec<Check>,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self {
            s_range: None,
            u_range: None,
            samples: 32,
            checks: vec![Check::H1, Check::H2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Caputo derivative of t² against `2t^{2−γ}/Γ(3−γ)`.
    CaputoPower,
    /// RL integral of 1 against `t^γ/Γ(1+γ)`.
    RlConstant,
    /// RL integral of t² against `2t^{2+γ}/Γ(3+γ)`.
    RlPower,
    /// Local solve against a finer reference solve.
    Solve,
    /// Differential residual of the local solve.
    Residual,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeSection {
    pub target: Target,
    pub ladder: Vec<usize>,
    /// Operator order γ for the operator targets.
    pub order: f64,
    /// Intervals of the reference solve; defaults to 4× the finest rung.
    pub reference_points: Option<usize>,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        Self {
            target: Target::Solve,
            ladder: vec![128, 256, 512, 1024],
            order: 0.5,
            reference_points: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    /// Base for relative paths; defaults to the config file's directory.
    pub directory: Option<PathBuf>,
    pub trajectory_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    /// Convergence table of the converge mode.
    pub table_path: Option<PathBuf>,
    /// `t,v,w,majorant` columns of a Gronwall certificate.
    pub majorant_path: Option<PathBuf>,
}

/// Where each requested output goes, after resolution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutputPaths {
    pub trajectory: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub majorant: Option<PathBuf>,
}

/// A parsed and validated configuration.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub mode: Mode,
    pub spec: ProblemSpec<f64>,
    pub b: f64,
    pub grid_points: usize,
    pub picard: PicardOptions<f64>,
    pub continuation: ContinuationConfig<f64>,
    pub validate: ValidateSection,
    pub converge: ConvergeSection,
    pub outputs: OutputPaths,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow!("schema violation at {path}: {}", e.into_inner())
        })
    }

    /// Builds and validates the library inputs. `base` resolves relative
    /// table paths; `output_dir` overrides the output directory.
    pub fn load(self, base: &Path, output_dir: Option<&Path>) -> Result<Loaded> {
        let spec = self.problem.to_spec(base)?;
        spec.validate().map_err(|e| scoped("problem", e))?;

        let s = &self.solver;
        if !(s.b > 0.0) || !s.b.is_finite() {
            bail!("invalid solver.b: {} must be positive", s.b);
        }
        if s.grid_points < 2 {
            bail!("invalid solver.grid_points: {} must be at least 2", s.grid_points);
        }
        let picard = PicardOptions {
            tol: s.tol,
            max_iter: s.max_iter,
        };
        picard.validate().map_err(|e| scoped("solver", e))?;

        let c = &self.continuation;
        let defaults = ContinuationConfig::for_problem(&spec);
        let continuation = ContinuationConfig {
            step_b: c.step_b.unwrap_or(s.b),
            blowup_threshold: c.blowup_threshold.unwrap_or(defaults.blowup_threshold),
            max_segments: c.max_segments.unwrap_or(defaults.max_segments),
            grid_density: c.grid_density.unwrap_or(defaults.grid_density),
            min_intervals: c.min_intervals.unwrap_or(defaults.min_intervals),
            max_intervals: c.max_intervals.unwrap_or(defaults.max_intervals),
            grading: c.grading.unwrap_or(defaults.grading),
            max_step: c.max_step.unwrap_or(defaults.max_step),
        };
        continuation.validate().map_err(|e| scoped("continuation", e))?;

        let v = &self.validate;
        if v.samples < 2 {
            bail!("invalid validate.samples: {} must be at least 2", v.samples);
        }
        for (name, range) in [("s_range", v.s_range), ("u_range", v.u_range)] {
            if let Some([lo, hi]) = range {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    bail!("invalid validate.{name}: [{lo}, {hi}] is not a finite nonempty interval");
                }
            }
        }
        if matches!(v.s_range, Some([lo, _]) if lo < 0.0) {
            bail!("invalid validate.s_range: time must be nonnegative");
        }

        let cv = &self.converge;
        if cv.ladder.len() < 3 {
            bail!(
                "invalid converge.ladder: needs at least 3 entries, found {}",
                cv.ladder.len()
            );
        }
        if cv.ladder.windows(2).any(|w| w[1] <= w[0]) || cv.ladder[0] < 2 {
            bail!("invalid converge.ladder: entries must be increasing and at least 2");
        }
        FracOrder::new(cv.order).map_err(|e| scoped("converge", e))?;
        if let Some(r) = cv.reference_points {
            if let Some(n) = cv.ladder.iter().find(|&&n| !r.is_multiple_of(n)) {
                bail!("invalid converge.reference_points: {r} is not a multiple of the rung {n}");
            }
        }

        let outputs = self.outputs.resolve(base, output_dir)?;
        Ok(Loaded {
            mode: self.mode,
            spec,
            b: s.b,
            grid_points: s.grid_points,
            picard,
            continuation,
            validate: self.validate,
            converge: self.converge,
            outputs,
        })
    }
}

impl ProblemSection {
    fn to_spec(&self, base: &Path) -> Result<ProblemSpec<f64>> {
        let alpha = FracOrder::new(self.alpha).map_err(|_| {
            anyhow!(
                "invalid problem.alpha: {} is outside (0, 0.5): the Caputo order 2*alpha must lie in (0, 1)",
                self.alpha
            )
        })?;
        let conductivity = match &self.conductivity {
            ConductivitySection::Constant { value } => Conductivity::Constant { value: *value },
            ConductivitySection::BoundedOscillatory { base, amplitude } => Conductivity::BoundedOscillatory {
                base: *base,
                amplitude: *amplitude,
            },
            ConductivitySection::QuadraticTime { scale, amplitude } => Conductivity::QuadraticTime {
                scale: *scale,
                amplitude: *amplitude,
            },
            ConductivitySection::AffineGrowth { floor, slope, cap } => Conductivity::AffineGrowth {
                floor: *floor,
                slope: *slope,
                cap: *cap,
            },
            ConductivitySection::Table { path } => {
                if path.as_os_str().is_empty() {
                    bail!("invalid problem.conductivity.path: must not be empty");
                }
                let path = base.join(path);
                let table = ConductivityTable::from_path(&path)
                    .map_err(|e| anyhow!(e).context(format!("problem.conductivity.path: {}", path.display())))?;
                Conductivity::Table(table)
            }
        };
        let k = &self.constants;
        let growth = match (k.c3, k.c4, k.c5) {
            (None, None, None) => None,
            (Some(c3), Some(c4), Some(c5)) => Some(GrowthConstants { c3, c4, c5 }),
            _ => bail!("invalid problem.constants: c3, c4 and c5 must be given together"),
        };
        let placement = match self.placement {
            Placement::Inner => DenominatorPlacement::Inner,
            Placement::Outer => DenominatorPlacement::Outer,
        };
        let delta = self
            .delta
            .unwrap_or_else(|| ProblemSpec::default_delta(&conductivity, self.u0, placement));
        Ok(ProblemSpec {
            alpha,
            lambda: self.lambda,
            u0: self.u0,
            conductivity,
            constants: HypothesisConstants {
                c1: k.c1,
                c2: k.c2,
                lipschitz: k.lipschitz,
                growth_m: k.m,
                omega: k.omega,
                growth,
            },
            delta,
            horizon: self.horizon,
            placement,
        })
    }
}

impl OutputsSection {
    fn resolve(&self, base: &Path, override_dir: Option<&Path>) -> Result<OutputPaths> {
        let dir = match (override_dir, &self.directory) {
            (Some(dir), _) => dir.to_path_buf(),
            (None, Some(dir)) => base.join(dir),
            (None, None) => base.to_path_buf(),
        };
        let one = |name: &str, path: &Option<PathBuf>| -> Result<Option<PathBuf>> {
            match path {
                Some(p) if p.as_os_str().is_empty() => bail!("invalid outputs.{name}: must not be empty"),
                Some(p) => Ok(Some(dir.join(p))),
                None => Ok(None),
            }
        };
        Ok(OutputPaths {
            trajectory: one("trajectory_path", &self.trajectory_path)?,
            report: one("report_path", &self.report_path)?,
            table: one("table_path", &self.table_path)?,
            majorant: one("majorant_path", &self.majorant_path)?,
        })
    }
}

/// Prefixes a library validation error with its config section.
fn scoped(section: &str, e: Error) -> anyhow::Error {
    match e {
        Error::InvalidParameter { field, message } => anyhow!("invalid {section}.{field}: {message}"),
        other => anyhow!(other).context(section.to_string()),
    }
}
