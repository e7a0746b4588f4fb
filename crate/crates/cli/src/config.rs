//! Experiment configs: a TOML file with `kind`, optional `seed`, an
//! `[output]` table and a `[parameters]` table whose keys depend on the kind.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fermion_pair::ising::IsingRun;
use fermion_pair::tomography::{ChannelId, DescentOptions, NoiseMode};

use crate::error::CliError;

/// Environment variable naming the directory relative output paths resolve against.
pub const OUTPUT_DIR_ENV: &str = "FPR_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Swap,
    Cphase,
    InfidelityScan,
    Ising,
    IsingDetuningScan,
    Tomography,
    TomographyOptimize,
    ComplexityEval,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Swap,
        Kind::Cphase,
        Kind::InfidelityScan,
        Kind::Ising,
        Kind::IsingDetuningScan,
        Kind::Tomography,
        Kind::TomographyOptimize,
        Kind::ComplexityEval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Swap => "swap",
            Kind::Cphase => "cphase",
            Kind::InfidelityScan => "infidelity-scan",
            Kind::Ising => "ising",
            Kind::IsingDetuningScan => "ising-detuning-scan",
            Kind::Tomography => "tomography",
            Kind::TomographyOptimize => "tomography-optimize",
            Kind::ComplexityEval => "complexity-eval",
        }
    }

    /// Whether the kind draws random numbers and therefore needs a seed.
    pub fn stochastic(self) -> bool {
        matches!(self, Kind::Ising | Kind::IsingDetuningScan | Kind::Tomography | Kind::TomographyOptimize)
    }

    pub fn parse(name: &str) -> Result<Kind, CliError> {
        Kind::ALL.into_iter().find(|k| k.name() == name).ok_or_else(|| CliError::UnknownKind {
            kind: name.to_string(),
            suggestion: nearest(name),
        })
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn nearest(name: &str) -> Option<String> {
    Kind::ALL
        .iter()
        .map(|k| (strsim::damerau_levenshtein(name, k.name()), k.name()))
        .filter(|&(d, k)| d <= (k.len() / 2).max(3))
        .min()
        .map(|(_, k)| k.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    path: PathBuf,
    format: Option<Format>,
}

/// `T` or `[T, ...]`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

impl<T: Serialize> Serialize for OneOrMany<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            OneOrMany::One(x) => [x].serialize(s),
            OneOrMany::Many(v) => v.serialize(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwapParams {
    pub j: f64,
    pub m: u32,
}

impl Default for SwapParams {
    fn default() -> Self {
        Self { j: 1.0, m: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CphaseParams {
    pub e_r: f64,
    pub u0: f64,
    pub j0: f64,
    pub target_phase: f64,
    pub eta: f64,
    pub adiabatic: bool,
    pub steps: usize,
    pub calibration_iterations: usize,
    pub trace_input: String,
}

impl Default for CphaseParams {
    fn default() -> Self {
        Self {
            e_r: 600.0,
            u0: 30.0,
            j0: 1.0,
            target_phase: PI,
            eta: 0.3,
            adiabatic: true,
            steps: 4000,
            calibration_iterations: 0,
            trace_input: "01".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanParams {
    pub u0_over_j0: Vec<f64>,
    pub e_r_over_u0: Vec<f64>,
    pub adiabatic: OneOrMany<bool>,
    pub target_phase: f64,
    pub eta: f64,
    pub steps: usize,
    pub calibration_iterations: usize,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self {
            u0_over_j0: vec![15.0, 20.0, 25.0, 30.0, 40.0, 50.0],
            e_r_over_u0: vec![10.0, 20.0],
            adiabatic: OneOrMany::Many(vec![true, false]),
            target_phase: PI,
            eta: 0.3,
            steps: 4000,
            calibration_iterations: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsingParams {
    pub e_r: f64,
    pub u0: f64,
    pub u1: f64,
    pub j0: f64,
    pub delta: f64,
    pub ramp_time: f64,
    pub hold_time: f64,
    pub ramp_steps: usize,
    pub period_steps: usize,
    pub sample_every: usize,
    pub restarts: usize,
}

impl Default for IsingParams {
    fn default() -> Self {
        let r = IsingRun::reference();
        Self {
            e_r: r.e_r,
            u0: r.u0,
            u1: r.u1,
            j0: r.j0,
            delta: r.delta,
            ramp_time: r.ramp_time,
            hold_time: r.hold_time,
            ramp_steps: r.ramp_steps,
            period_steps: r.period_steps,
            sample_every: r.sample_every,
            restarts: 5,
        }
    }
}

impl IsingParams {
    pub fn run(&self) -> IsingRun {
        IsingRun {
            e_r: self.e_r,
            u0: self.u0,
            u1: self.u1,
            j0: self.j0,
            delta: self.delta,
            ramp_time: self.ramp_time,
            hold_time: self.hold_time,
            ramp_steps: self.ramp_steps,
            period_steps: self.period_steps,
            sample_every: self.sample_every,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetuningParams {
    pub e_r: f64,
    pub u0: f64,
    pub u1: f64,
    pub j0: f64,
    pub deltas: Vec<f64>,
    pub ramp_time: f64,
    pub hold_time: f64,
    pub ramp_steps: usize,
    pub period_steps: usize,
    pub sample_every: usize,
    pub restarts: usize,
}

impl Default for DetuningParams {
    fn default() -> Self {
        let i = IsingParams::default();
        Self {
            e_r: i.e_r,
            u0: i.u0,
            u1: i.u1,
            j0: i.j0,
            deltas: vec![-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3],
            ramp_time: i.ramp_time,
            hold_time: i.hold_time,
            ramp_steps: i.ramp_steps,
            period_steps: i.period_steps,
            sample_every: i.sample_every,
            restarts: i.restarts,
        }
    }
}

impl DetuningParams {
    pub fn base(&self) -> IsingParams {
        IsingParams {
            e_r: self.e_r,
            u0: self.u0,
            u1: self.u1,
            j0: self.j0,
            delta: 0.0,
            ramp_time: self.ramp_time,
            hold_time: self.hold_time,
            ramp_steps: self.ramp_steps,
            period_steps: self.period_steps,
            sample_every: self.sample_every,
            restarts: self.restarts,
        }
    }
}

/// Noise model of a tomography run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseChoice {
    None,
    Unbiased,
    Biased,
}

impl NoiseChoice {
    pub fn mode(self) -> Option<NoiseMode> {
        match self {
            NoiseChoice::None => None,
            NoiseChoice::Unbiased => Some(NoiseMode::Unbiased),
            NoiseChoice::Biased => Some(NoiseMode::Biased),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomographyParams {
    pub channel: ChannelId,
    pub left_set: String,
    pub right_set: String,
    pub shots_per_setting: Vec<u64>,
    pub noise: NoiseChoice,
    pub sigma: Vec<f64>,
    pub infinite_samples: bool,
}

impl Default for TomographyParams {
    fn default() -> Self {
        Self {
            channel: ChannelId::Cz,
            left_set: REFERENCE_SET.into(),
            right_set: REFERENCE_SET.into(),
            shots_per_setting: vec![100, 1000, 10000, 100000],
            noise: NoiseChoice::None,
            sigma: vec![],
            infinite_samples: false,
        }
    }
}

/// Name standing for the bundled 12 + 9 rotation sets.
pub const REFERENCE_SET: &str = "reference";

/// Loss minimized by `tomography-optimize`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossChoice {
    UpperBound,
    Complexity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeParams {
    pub left_sizes: Vec<usize>,
    pub right_sizes: Vec<usize>,
    pub loss: LossChoice,
    pub channel: ChannelId,
    pub step: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub fd_step: f64,
}

impl Default for OptimizeParams {
    fn default() -> Self {
        let d = DescentOptions::default();
        Self {
            left_sizes: vec![12],
            right_sizes: vec![9],
            loss: LossChoice::UpperBound,
            channel: ChannelId::Cz,
            step: d.step,
            iterations: d.iterations,
            restarts: d.restarts,
            fd_step: d.fd_step,
        }
    }
}

impl OptimizeParams {
    pub fn descent(&self) -> DescentOptions {
        DescentOptions { step: self.step, iterations: self.iterations, restarts: self.restarts, fd_step: self.fd_step }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComplexityParams {
    pub left_set: String,
    pub right_set: String,
    pub channels: Vec<ChannelId>,
}

impl Default for ComplexityParams {
    fn default() -> Self {
        Self { left_set: REFERENCE_SET.into(), right_set: REFERENCE_SET.into(), channels: vec![ChannelId::Identity, ChannelId::Cz] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Parameters {
    Swap(SwapParams),
    Cphase(CphaseParams),
    InfidelityScan(ScanParams),
    Ising(IsingParams),
    IsingDetuningScan(DetuningParams),
    Tomography(TomographyParams),
    TomographyOptimize(OptimizeParams),
    ComplexityEval(ComplexityParams),
}

impl Parameters {
    #[cfg(test)]
    pub fn defaults(kind: Kind) -> Parameters {
        match kind {
            Kind::Swap => Parameters::Swap(Default::default()),
            Kind::Cphase => Parameters::Cphase(Default::default()),
            Kind::InfidelityScan => Parameters::InfidelityScan(Default::default()),
            Kind::Ising => Parameters::Ising(Default::default()),
            Kind::IsingDetuningScan => Parameters::IsingDetuningScan(Default::default()),
            Kind::Tomography => Parameters::Tomography(Default::default()),
            Kind::TomographyOptimize => Parameters::TomographyOptimize(Default::default()),
            Kind::ComplexityEval => Parameters::ComplexityEval(Default::default()),
        }
    }

    fn parse(kind: Kind, table: toml::Table) -> Result<Parameters, CliError> {
        fn de<T: DeserializeOwned>(t: toml::Table) -> Result<T, CliError> {
            toml::Value::Table(t).try_into().map_err(|e: toml::de::Error| CliError::Schema(format!("[parameters]: {}", e.message())))
        }
        Ok(match kind {
            Kind::Swap => Parameters::Swap(de(table)?),
            Kind::Cphase => Parameters::Cphase(de(table)?),
            Kind::InfidelityScan => Parameters::InfidelityScan(de(table)?),
            Kind::Ising => Parameters::Ising(de(table)?),
            Kind::IsingDetuningScan => Parameters::IsingDetuningScan(de(table)?),
            Kind::Tomography => Parameters::Tomography(de(table)?),
            Kind::TomographyOptimize => Parameters::TomographyOptimize(de(table)?),
            Kind::ComplexityEval => Parameters::ComplexityEval(de(table)?),
        })
    }

    /// Parameters with defaults filled in, as a JSON object.
    pub fn to_json(&self) -> serde_json::Value {
        let v = match self {
            Parameters::Swap(p) => serde_json::to_value(p),
            Parameters::Cphase(p) => serde_json::to_value(p),
            Parameters::InfidelityScan(p) => serde_json::to_value(p),
            Parameters::Ising(p) => serde_json::to_value(p),
            Parameters::IsingDetuningScan(p) => serde_json::to_value(p),
            Parameters::Tomography(p) => serde_json::to_value(p),
            Parameters::TomographyOptimize(p) => serde_json::to_value(p),
            Parameters::ComplexityEval(p) => serde_json::to_value(p),
        };
        v.expect("parameters serialize")
    }
}

/// A parsed and validated experiment config.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: Option<u64>,
    pub output: PathBuf,
    pub format: Format,
    pub parameters: Parameters,
    /// Hex SHA-256 of the canonical JSON form of the config file.
    pub hash: String,
    /// Directory of the config file; relative set paths resolve against it.
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Syntax(e.to_string()))?;
        let hash = hex(&Sha256::digest(serde_json::to_vec(&table).expect("toml table serializes")));

        for key in table.keys() {
            if !["kind", "seed", "output", "parameters"].contains(&key.as_str()) {
                return Err(CliError::Schema(format!("unknown top-level key `{key}`")));
            }
        }
        let kind = match table.remove("kind") {
            Some(toml::Value::String(s)) => Kind::parse(&s)?,
            Some(_) => return Err(CliError::Schema("`kind` must be a string".into())),
            None => return Err(CliError::Schema("missing `kind`".into())),
        };
        let seed = match table.remove("seed") {
            Some(toml::Value::Integer(s)) if s >= 0 => Some(s as u64),
            Some(_) => return Err(CliError::Schema("`seed` must be a non-negative integer".into())),
            None => None,
        };
        if kind.stochastic() && seed.is_none() {
            return Err(CliError::Schema(format!("`{kind}` is stochastic and needs a `seed`")));
        }
        let output: OutputSection = match table.remove("output") {
            Some(v) => v.try_into().map_err(|e: toml::de::Error| CliError::Schema(format!("[output]: {}", e.message())))?,
            None => return Err(CliError::Schema("missing [output] table".into())),
        };
        let format = match (output.format, output.path.extension().and_then(|e| e.to_str())) {
            (Some(f), _) => f,
            (None, Some("csv")) => Format::Csv,
            (None, Some("json")) => Format::Json,
            _ => return Err(CliError::Schema("[output]: give `format` or a .csv/.json path".into())),
        };
        let params = match table.remove("parameters") {
            Some(toml::Value::Table(t)) => t,
            Some(_) => return Err(CliError::Schema("`parameters` must be a table".into())),
            None => toml::Table::new(),
        };
        let parameters = Parameters::parse(kind, params)?;
        let config = Self { kind, seed, output: output.path, format, parameters, hash, base_dir: base_dir.to_path_buf() };
        config.validate()?;
        Ok(config)
    }

    /// Output path, resolved against the output directory variable when relative.
    pub fn output_path(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if self.output.is_relative() => Path::new(&dir).join(&self.output),
            _ => self.output.clone(),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Schema(m));
        let positive = |name: &str, x: f64| if x > 0.0 && x.is_finite() { Ok(()) } else { fail(format!("`{name}` must be positive, got {x}")) };
        let nonempty = |name: &str, n: usize| if n > 0 { Ok(()) } else { fail(format!("`{name}` must not be empty")) };
        match &self.parameters {
            Parameters::Swap(p) => positive("j", p.j.abs())?,
            Parameters::Cphase(p) => {
                positive("e_r", p.e_r)?;
                positive("u0", p.u0)?;
                positive("j0", p.j0)?;
                positive("steps", p.steps as f64)?;
                if !["00", "01", "10", "11"].contains(&p.trace_input.as_str()) {
                    return fail(format!("`trace_input` must be one of 00, 01, 10, 11, got {}", p.trace_input));
                }
            }
            Parameters::InfidelityScan(p) => {
                nonempty("u0_over_j0", p.u0_over_j0.len())?;
                nonempty("e_r_over_u0", p.e_r_over_u0.len())?;
                nonempty("adiabatic", p.adiabatic.to_vec().len())?;
                for &r in p.u0_over_j0.iter().chain(&p.e_r_over_u0) {
                    positive("ratio", r)?;
                }
            }
            Parameters::Ising(p) => validate_ising(p)?,
            Parameters::IsingDetuningScan(p) => {
                nonempty("deltas", p.deltas.len())?;
                validate_ising(&p.base())?;
            }
            Parameters::Tomography(p) => {
                nonempty("shots_per_setting", p.shots_per_setting.len())?;
                if p.shots_per_setting.contains(&0) {
                    return fail("`shots_per_setting` entries must be positive".into());
                }
                match p.noise {
                    NoiseChoice::None if p.sigma.iter().any(|&s| s != 0.0) => {
                        return fail("`sigma` given but `noise` is none".into());
                    }
                    NoiseChoice::None => {}
                    _ => {
                        nonempty("sigma", p.sigma.len())?;
                        for &s in &p.sigma {
                            if !(s >= 0.0 && s.is_finite()) {
                                return fail(format!("`sigma` entries must be non-negative, got {s}"));
                            }
                        }
                    }
                }
            }
            Parameters::TomographyOptimize(p) => {
                nonempty("left_sizes", p.left_sizes.len())?;
                nonempty("right_sizes", p.right_sizes.len())?;
                if p.left_sizes.iter().chain(&p.right_sizes).any(|&n| n == 0) {
                    return fail("set sizes must be positive".into());
                }
                positive("step", p.step)?;
                positive("fd_step", p.fd_step)?;
                positive("restarts", p.restarts as f64)?;
            }
            Parameters::ComplexityEval(p) => nonempty("channels", p.channels.len())?,
        }
        Ok(())
    }
}

fn validate_ising(p: &IsingParams) -> Result<(), CliError> {
    let ok = p.e_r > 0.0 && p.u0 != 0.0 && p.ramp_time > 0.0 && p.hold_time >= 0.0;
    let steps = p.ramp_steps > 0 && p.period_steps > 0 && p.sample_every > 0 && p.restarts > 0;
    if !ok {
        return Err(CliError::Schema("need e_r > 0, u0 != 0, ramp_time > 0 and hold_time >= 0".into()));
    }
    if !steps {
        return Err(CliError::Schema("step counts, sample_every and restarts must be positive".into()));
    }
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
