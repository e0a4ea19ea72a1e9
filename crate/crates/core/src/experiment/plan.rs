use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::GridSpec;
use crate::setups::{CvInput, Matching, SetupConfig, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sweep,
    Wigner,
    Validate,
    Single,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Sweep => "sweep",
            Command::Wigner => "wigner",
            Command::Validate => "validate",
            Command::Single => "single",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Strengths `start, start + step, …` up to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for TGrid {
    fn default() -> Self {
        Self { start: 0.0, stop: 1.5, step: 0.05 }
    }
}

impl TGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("t grid needs finite bounds and a positive step, got {self:?}")));
        }
        if self.stop < self.start {
            return Err(Error::Config(format!("t grid stops at {} before its start {}", self.stop, self.start)));
        }
        Ok(())
    }

    /// Grid points, each rounded to 12 significant digits so that
    /// accumulated steps print as typed.
    pub fn points(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| super::round12(self.start + k as f64 * self.step)).collect())
    }
}

/// Parameters of the steered Wigner function set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WignerPlan {
    pub t: f64,
    /// Loss fraction of the lossy third-order process.
    pub loss: f64,
    pub input: CvInput,
    pub grid: GridSpec,
}

impl Default for WignerPlan {
    fn default() -> Self {
        Self {
            t: 0.7,
            loss: 0.15,
            input: CvInput::Thermal { nbar: 1.0 },
            grid: GridSpec::default(),
        }
    }
}

/// Everything a command needs; read from a TOML file with dotted keys and
/// `key=value` overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    /// Command the plan was written for; checked against the one invoked.
    pub command: Option<Command>,
    pub setup: SetupConfig,
    pub grid: TGrid,
    pub variants: Vec<Variant>,
    pub inputs: Vec<CvInput>,
    pub wigner: WignerPlan,
    pub out: PathBuf,
    pub format: Format,
}

/// The figure setup: auto matching with cutoffs that hold the strongest
/// couplings of the default grid.
fn figure_setup() -> SetupConfig {
    let mut setup = SetupConfig { matching: Matching::Auto, ..SetupConfig::default() };
    setup.dims.u = 50;
    setup.dims.u_prime = 100;
    setup
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            command: None,
            setup: figure_setup(),
            grid: TGrid::default(),
            variants: vec![Variant::U2Photon, Variant::U3Photon],
            inputs: vec![CvInput::Coherent { beta: 1.0 }, CvInput::Thermal { nbar: 1.0 }, CvInput::Prc { beta: 1.0 }],
            wigner: WignerPlan::default(),
            out: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

impl ExperimentPlan {
    /// Reads a plan; entries missing from `text` keep the values of
    /// [`ExperimentPlan::default`], also inside partially given tables.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let user: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut table = toml::Table::try_from(ExperimentPlan::default()).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut table, user);
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let plan: ExperimentPlan = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read plan {}: {e}", path.display())))?;
        Self::from_toml(&text, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        self.setup.validate()?;
        self.grid.validate()?;
        if self.variants.is_empty() || self.inputs.is_empty() {
            return Err(Error::Config("a plan needs at least one variant and one input".into()));
        }
        if !(0.0..=1.0).contains(&self.wigner.loss) {
            return Err(Error::Config(format!("loss fraction {} outside [0, 1]", self.wigner.loss)));
        }
        Ok(())
    }

    /// Fails when the plan names a different command than the one invoked.
    pub fn check_command(&self, invoked: Command) -> Result<()> {
        match self.command {
            Some(c) if c != invoked => Err(Error::Config(format!("plan written for `{c}`, invoked as `{invoked}`"))),
            _ => Ok(()),
        }
    }

    /// Canonical JSON echo written into every output file.
    pub fn echo(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// `a.b.c=value`, where `value` is read as a TOML value and falls back to a
/// bare string.
fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{item}` is not of the form key=value")))?;
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed override key `{key}`")));
    }
    let (last, parents) = path.split_last().expect("split yields at least one segment");
    let mut node = table;
    for p in parents {
        let entry = node.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}` descends into the non-table `{p}`")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}
