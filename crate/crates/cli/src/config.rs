//! Run configuration: a TOML document with fixed sections.
//!
//! See `docs/config.md` for the schema. Every unknown key is rejected and
//! every value is validated against the core types before a run starts.

use std::fmt;

use serde::{Deserialize, Serialize};

use peakon_core::functionals::{ExteriorFrame, ScaleParams, DEFAULT_T_OFFSET};
use peakon_core::initial::{
    gaussian_bumps, peakon_train, random_band_limited, random_nonnegative_bumps, shock_peakon,
    Bump, PeakonSpec, ShockPeakonSpec,
};
use peakon_core::integrator::{SnapshotPolicy, StepSize, DEFAULT_CFL_SAFETY};
use peakon_core::{make_grid, BFamilyParams, Field, Form, Grid, SimConfig, State};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub time: TimeSection,
    pub initial: InitialData,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scale: Vec<ScaleSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exterior: Vec<ExteriorSection>,
    #[serde(default, skip_serializing_if = "OutputSection::is_default")]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormName {
    U,
    M,
}

impl From<FormName> for Form {
    fn from(f: FormName) -> Form {
        match f {
            FormName::U => Form::UForm,
            FormName::M => Form::MForm,
        }
    }
}

fn default_form() -> FormName {
    FormName::U
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub b: f64,
    #[serde(default = "default_form")]
    pub form: FormName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub length: f64,
    pub n: usize,
}

fn default_cfl() -> f64 {
    DEFAULT_CFL_SAFETY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    pub cadence: f64,
    /// Fixed step; absent means CFL-controlled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breaking_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub amplitude: f64,
    pub center: f64,
    pub sigma: f64,
}

fn default_target() -> FormName {
    FormName::U
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Zero,
    Peakon {
        amplitudes: Vec<f64>,
        centers: Vec<f64>,
        #[serde(default)]
        width: f64,
    },
    /// Sum of Gaussians, read as `u` or as `m` per `field`.
    Gaussian {
        bumps: Vec<BumpSpec>,
        #[serde(default = "default_target")]
        field: FormName,
    },
    Random {
        max_mode: usize,
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Nonnegative Gaussian momentum.
    RandomBumps {
        count: usize,
        #[serde(default)]
        seed: u64,
    },
    Shock {
        k: f64,
        #[serde(default)]
        t: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    Mq,
    Itanh,
    Epsi,
    Window,
}

fn default_q() -> f64 {
    2.0
}

fn default_offset() -> f64 {
    DEFAULT_T_OFFSET
}

pub fn all_functionals() -> Vec<FunctionalKind> {
    vec![
        FunctionalKind::Mq,
        FunctionalKind::Itanh,
        FunctionalKind::Epsi,
        FunctionalKind::Window,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleSection {
    pub c: f64,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_offset")]
    pub t_offset: f64,
    #[serde(default = "all_functionals")]
    pub functionals: Vec<FunctionalKind>,
}

impl ScaleSection {
    pub fn params(&self) -> peakon_core::Result<ScaleParams> {
        ScaleParams::new(self.c, self.q, self.t_offset)
    }
}

fn default_t0() -> f64 {
    3.0
}

fn default_p() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExteriorSection {
    /// Frame speed; absent means `2 sup|u₀| + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Frame width; absent means `10 σ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default)]
    pub shifted: bool,
    /// Exponent of the exterior `W^{1,p}(σt, ∞)` norm column.
    #[serde(default = "default_p")]
    pub p: f64,
}

impl ExteriorSection {
    /// The frame, resolving defaults against the initial profile.
    pub fn frame(&self, u0: &Field) -> peakon_core::Result<ExteriorFrame> {
        let sigma = self.sigma.unwrap_or(2.0 * u0.max_abs() + 1.0);
        ExteriorFrame::new(sigma, self.l.unwrap_or(10.0 * sigma), self.t0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

impl OutputSection {
    fn is_default(&self) -> bool {
        self.dir.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
}

/// A parse or validation failure, located at a key when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}: {k}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "{k}: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Where a validated value lives: table header, occurrence among `[[...]]`, key.
struct KeyPath<'a> {
    table: &'a str,
    index: usize,
    key: &'a str,
}

impl KeyPath<'_> {
    fn dotted(&self, array: bool) -> String {
        if array {
            format!("{}[{}].{}", self.table, self.index, self.key)
        } else {
            format!("{}.{}", self.table, self.key)
        }
    }
}

/// 1-based line of `key` inside the `index`-th `[table]` or `[[table]]`.
fn locate(text: &str, path: &KeyPath) -> Option<usize> {
    let mut seen: Option<usize> = None;
    let mut inside = false;
    let mut header_line = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            let name = line.trim_matches(|c| c == '[' || c == ']').trim();
            inside = false;
            if name == path.table {
                let k = seen.map_or(0, |s| s + 1);
                seen = Some(k);
                if k == path.index {
                    inside = true;
                    header_line = Some(i + 1);
                }
            }
            continue;
        }
        if inside {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == path.key {
                    return Some(i + 1);
                }
            }
        }
    }
    header_line
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError {
        key: None,
        line: e.span().map(|s| line_of_offset(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    cfg.validate()
        .map_err(|(path, array, message)| ConfigError {
            key: Some(path.dotted(array)),
            line: locate(text, &path),
            message,
        })?;
    Ok(cfg)
}

/// Renders a configuration that [`parse_config`] reads back unchanged.
pub fn render(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("run configurations are always representable in TOML")
}

type Invalid<'a> = (KeyPath<'a>, bool, String);

fn core_message(e: peakon_core::Error) -> String {
    match e {
        peakon_core::Error::Config(m) | peakon_core::Error::Domain(m) => m,
        other => other.to_string(),
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), Invalid<'static>> {
        let at = |table: &'static str, key: &'static str, msg: String| {
            Err((
                KeyPath {
                    table,
                    index: 0,
                    key,
                },
                false,
                msg,
            ))
        };
        if let Err(e) = BFamilyParams::new(self.model.b, self.model.form.into()) {
            return at("model", "b", core_message(e));
        }
        if let Err(e) = make_grid(self.grid.length, self.grid.n) {
            let key = if self.grid.length > 0.0 {
                "n"
            } else {
                "length"
            };
            return at("grid", key, core_message(e));
        }
        if let Err(e) = self.sim_config().validate() {
            return at("time", "t_end", core_message(e));
        }
        if self.time.snapshot_times.is_some() && self.time.snapshot_stride.is_some() {
            return at(
                "time",
                "snapshot_stride",
                "give snapshot_times or snapshot_stride, not both".into(),
            );
        }
        if let Err(e) = self.initial_field() {
            return at("initial", "kind", core_message(e));
        }
        for (index, s) in self.scale.iter().enumerate() {
            if let Err(e) = s.params() {
                let msg = core_message(e);
                let key = if msg.starts_with("q ") {
                    "q"
                } else if msg.starts_with("t_offset") {
                    "t_offset"
                } else {
                    "c"
                };
                return Err((
                    KeyPath {
                        table: "scale",
                        index,
                        key,
                    },
                    true,
                    msg,
                ));
            }
        }
        if !self.exterior.is_empty() {
            let u0 = self.initial_u().map_err(|e| {
                (
                    KeyPath {
                        table: "initial",
                        index: 0,
                        key: "kind",
                    },
                    false,
                    core_message(e),
                )
            })?;
            for (index, x) in self.exterior.iter().enumerate() {
                if let Err(e) = x.frame(&u0) {
                    let msg = core_message(e);
                    let key = if msg.starts_with("t0") {
                        "t0"
                    } else if msg.starts_with("L") {
                        "l"
                    } else {
                        "sigma"
                    };
                    return Err((
                        KeyPath {
                            table: "exterior",
                            index,
                            key,
                        },
                        true,
                        msg,
                    ));
                }
                if !(x.p >= 1.0) {
                    return Err((
                        KeyPath {
                            table: "exterior",
                            index,
                            key: "p",
                        },
                        true,
                        format!("p must be at least 1, got {}", x.p),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        make_grid(self.grid.length, self.grid.n).expect("validated grid")
    }

    pub fn params(&self) -> BFamilyParams {
        BFamilyParams::new(self.model.b, self.model.form.into()).expect("validated parameters")
    }

    pub fn sim_config(&self) -> SimConfig {
        let params = BFamilyParams {
            b: self.model.b,
            form: self.model.form.into(),
        };
        let mut sc = SimConfig::new(params, self.time.t_end, self.time.cadence);
        sc.dt = self.time.dt.map_or(StepSize::Auto, StepSize::Fixed);
        sc.cfl_safety = self.time.cfl_safety;
        sc.breaking_threshold = self.time.breaking_threshold;
        sc.snapshots = match (&self.time.snapshot_times, self.time.snapshot_stride) {
            (Some(ts), _) => SnapshotPolicy::AtTimes(ts.clone()),
            (None, Some(k)) => SnapshotPolicy::Stride(k),
            // eleven evenly spaced profiles for the waterfall plot
            (None, None) => SnapshotPolicy::AtTimes(
                (0..=10)
                    .map(|i| self.time.t_end * i as f64 / 10.0)
                    .collect(),
            ),
        };
        sc
    }

    /// The configured profile, as `u` or `m` depending on its kind.
    fn initial_field(&self) -> peakon_core::Result<(Field, FormName)> {
        let g = make_grid(self.grid.length, self.grid.n)?;
        Ok(match &self.initial {
            InitialData::Zero => (Field::zeros(g), FormName::U),
            InitialData::Peakon {
                amplitudes,
                centers,
                width,
            } => {
                let spec = PeakonSpec::new(amplitudes.clone(), centers.clone(), *width)?;
                (peakon_train(&spec, &g)?, FormName::U)
            }
            InitialData::Gaussian { bumps, field } => {
                let bs: Vec<Bump> = bumps
                    .iter()
                    .map(|b| Bump {
                        amplitude: b.amplitude,
                        center: b.center,
                        sigma: b.sigma,
                    })
                    .collect();
                (gaussian_bumps(&bs, &g)?, *field)
            }
            InitialData::Random {
                max_mode,
                amplitude,
                seed,
            } => (
                random_band_limited(&g, *max_mode, *amplitude, *seed)?,
                FormName::U,
            ),
            InitialData::RandomBumps { count, seed } => {
                (random_nonnegative_bumps(&g, *count, *seed)?, FormName::M)
            }
            InitialData::Shock { k, t } => (
                shock_peakon(&ShockPeakonSpec::new(*k, *t)?, &g)?,
                FormName::U,
            ),
        })
    }

    pub fn initial_state(&self) -> peakon_core::Result<State> {
        let form = self.model.form.into();
        match self.initial_field()? {
            (f, FormName::U) => State::from_u(f, form),
            (f, FormName::M) => State::from_m(f, form),
        }
    }

    pub fn initial_u(&self) -> peakon_core::Result<Field> {
        self.initial_state()?.u()
    }

    /// Clock offset of the first scale section, or the default.
    pub fn t_offset(&self) -> f64 {
        self.scale.first().map_or(DEFAULT_T_OFFSET, |s| s.t_offset)
    }
}
