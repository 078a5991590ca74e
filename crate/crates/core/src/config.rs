//! Run parameters: model coefficients, noise covariance rule, discretization.
//!
//! Configuration files are flat key-value documents written in TOML syntax
//! with dotted keys (`model.R = 4096`). Any real-valued entry may also be
//! given as a string power expression such as `"2^-12"` or `"5*2^-23"`.
//! Command-line overrides use the same keys (`--set model.nu=3`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable that replaces `run.seed` when set.
pub const SEED_ENV: &str = "SCGLE_SEED";

/// Relative tolerance on `T / dt` being an integer.
const STEP_COUNT_TOL: f64 = 1e-9;

/// Physical coefficients of `du = [(1+iν)Δu + Ru − (1+iμ)|u|²u]dt + σ dW`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Linear gain `R`.
    pub r: f64,
    /// Nonlinear dispersion `μ`.
    pub mu: f64,
    /// Linear dispersion `ν`.
    pub nu: f64,
    /// Noise amplitude `σ`.
    pub sigma: f64,
    /// Final time `T`.
    pub t_final: f64,
}

impl ModelParams {
    /// `|ν| ≤ √3`, the dispersion range covered by the convergence theory.
    pub fn nu_in_theory_range(&self) -> bool {
        self.nu.abs() <= 3f64.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::validation("model.R", format!("must be finite and > 0, got {}", self.r)));
        }
        if !self.mu.is_finite() {
            return Err(Error::validation("model.mu", "must be finite"));
        }
        if !self.nu.is_finite() {
            return Err(Error::validation("model.nu", "must be finite"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::validation("model.sigma", format!("must be finite and >= 0, got {}", self.sigma)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::validation("model.T", format!("must be finite and > 0, got {}", self.t_final)));
        }
        Ok(())
    }
}

impl Default for ModelParams {
    /// The stable setting `μ = ν = 1` with `R = 2¹²`, `σ = 2⁶`, `T = 2⁻¹²`.
    fn default() -> Self {
        ModelParams {
            r: 4096.0,
            mu: 1.0,
            nu: 1.0,
            sigma: 64.0,
            t_final: 2f64.powi(-12),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// `q_0 = 1`, `q_k = |k|^(−1−2ε)`: trace-class noise with `r = 0`.
    Regular,
    /// `q_k = 1` for every mode (`r = −1/2`).
    White,
    /// Per-mode table supplied by the user.
    Custom,
}

/// Covariance rule of the complex Q-Wiener process, one variance per Fourier mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Spatial regularity index `r` of the noise.
    pub r: f64,
    pub epsilon: f64,
    pub custom_qk: Option<BTreeMap<i64, f64>>,
}

impl NoiseSpec {
    pub const DEFAULT_EPSILON: f64 = 5e-4;

    pub fn regular() -> Self {
        NoiseSpec {
            kind: NoiseKind::Regular,
            r: 0.0,
            epsilon: Self::DEFAULT_EPSILON,
            custom_qk: None,
        }
    }

    pub fn white() -> Self {
        NoiseSpec {
            kind: NoiseKind::White,
            r: -0.5,
            epsilon: Self::DEFAULT_EPSILON,
            custom_qk: None,
        }
    }

    pub fn custom(table: BTreeMap<i64, f64>, r: f64) -> Self {
        NoiseSpec {
            kind: NoiseKind::Custom,
            r,
            epsilon: Self::DEFAULT_EPSILON,
            custom_qk: Some(table),
        }
    }

    /// Variance weight `q_k` of mode `k`.
    pub fn qk_value(&self, k: i64) -> Result<f64> {
        match self.kind {
            NoiseKind::Regular => {
                if k == 0 {
                    Ok(1.0)
                } else {
                    Ok((k.unsigned_abs() as f64).powf(-1.0 - 2.0 * self.epsilon))
                }
            }
            NoiseKind::White => Ok(1.0),
            NoiseKind::Custom => self
                .custom_qk
                .as_ref()
                .and_then(|t| t.get(&k).copied())
                .ok_or(Error::MissingMode(k)),
        }
    }

    /// Noise regularity is inside the range the convergence theorem covers (`r ≥ 0`).
    pub fn in_theory_range(&self) -> bool {
        self.r >= 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.5) {
            return Err(Error::validation("noise.epsilon", format!("must lie in (0, 3/2), got {}", self.epsilon)));
        }
        match self.kind {
            NoiseKind::Regular if self.r != 0.0 => {
                Err(Error::validation("noise.r", format!("regular noise has r = 0, got {}", self.r)))
            }
            NoiseKind::White if self.r != -0.5 => {
                Err(Error::validation("noise.r", format!("white noise has r = -0.5, got {}", self.r)))
            }
            NoiseKind::Custom => {
                let table = self
                    .custom_qk
                    .as_ref()
                    .filter(|t| !t.is_empty())
                    .ok_or_else(|| Error::validation("noise.q", "custom noise needs at least one noise.q.<k> entry"))?;
                for (k, q) in table {
                    if !(*q > 0.0 && q.is_finite()) {
                        return Err(Error::validation(&format!("noise.q.{k}"), format!("must be finite and > 0, got {q}")));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::regular()
    }
}

/// Time integrator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Exact splitting: pointwise flow map, semigroup, exactly sampled stochastic convolution.
    Esm,
    /// Splitting with a semigroup-propagated Brownian increment.
    ExpSm,
    /// Tamed accelerated exponential Euler.
    Tam,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Esm => "esm",
            Method::ExpSm => "expsm",
            Method::Tam => "tam",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "esm" => Ok(Method::Esm),
            "expsm" => Ok(Method::ExpSm),
            "tam" => Ok(Method::Tam),
            other => Err(Error::Parse(format!("unknown method `{other}` (expected esm, expsm or tam)"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

/// Initial datum `u₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition {
    Zero,
    /// `u₀ = amplitude · e^{i2πkx}`.
    PlaneWave { mode: i64, amplitude: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelParams,
    pub noise: NoiseSpec,
    /// Number of retained Fourier modes.
    pub n: usize,
    pub dt: f64,
    pub seed: u64,
    pub method: Method,
    pub record_every: usize,
    pub init: InitialCondition,
    /// Evaluate pointwise nonlinearities on a 2x zero-padded grid.
    pub dealias: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelParams::default(),
            noise: NoiseSpec::default(),
            n: 64,
            dt: 2f64.powi(-12),
            seed: 1,
            method: Method::Esm,
            record_every: 1,
            init: InitialCondition::Zero,
            dealias: false,
        }
    }
}

impl RunConfig {
    /// Number of time steps `M = T / dt`.
    pub fn steps(&self) -> usize {
        (self.model.t_final / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.noise.validate()?;
        if self.n == 0 {
            return Err(Error::validation("run.N", "must be a positive integer"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::validation("run.dt", format!("must be finite and > 0, got {}", self.dt)));
        }
        if self.dt >= 1.0 {
            return Err(Error::validation("run.dt", format!("must be < 1, got {}", self.dt)));
        }
        let ratio = self.model.t_final / self.dt;
        let m = ratio.round();
        if m < 1.0 || (ratio - m).abs() > STEP_COUNT_TOL * ratio {
            return Err(Error::validation(
                "run.dt",
                format!("T / dt = {ratio} is not an integer step count (relative tolerance {STEP_COUNT_TOL:e})"),
            ));
        }
        if self.record_every == 0 {
            return Err(Error::validation("run.record_every", "must be a positive integer"));
        }
        if let InitialCondition::PlaneWave { amplitude, .. } = self.init {
            if !amplitude.is_finite() {
                return Err(Error::validation("init.amplitude", "must be finite"));
            }
        }
        Ok(())
    }

    /// Canonical flat key-value rendering. Parsing it back yields an equal config.
    pub fn to_document(&self) -> String {
        let mut kv: BTreeMap<&str, String> = BTreeMap::new();
        kv.insert("model.R", fmt_real(self.model.r));
        kv.insert("model.mu", fmt_real(self.model.mu));
        kv.insert("model.nu", fmt_real(self.model.nu));
        kv.insert("model.sigma", fmt_real(self.model.sigma));
        kv.insert("model.T", fmt_real(self.model.t_final));
        let kind = match self.noise.kind {
            NoiseKind::Regular => "regular",
            NoiseKind::White => "white",
            NoiseKind::Custom => "custom",
        };
        kv.insert("noise.kind", format!("\"{kind}\""));
        kv.insert("noise.r", fmt_real(self.noise.r));
        kv.insert("noise.epsilon", fmt_real(self.noise.epsilon));
        kv.insert("run.N", self.n.to_string());
        kv.insert("run.dt", fmt_real(self.dt));
        kv.insert("run.seed", self.seed.to_string());
        kv.insert("run.method", format!("\"{}\"", self.method));
        kv.insert("run.record_every", self.record_every.to_string());
        kv.insert("run.dealias", self.dealias.to_string());
        match self.init {
            InitialCondition::Zero => {
                kv.insert("init.kind", "\"zero\"".into());
            }
            InitialCondition::PlaneWave { mode, amplitude } => {
                kv.insert("init.kind", "\"plane_wave\"".into());
                kv.insert("init.mode", mode.to_string());
                kv.insert("init.amplitude", fmt_real(amplitude));
            }
        }
        let mut out = String::new();
        for (k, v) in &kv {
            let _ = writeln!(out, "{k} = {v}");
        }
        // Custom modes may be negative, which is not a bare TOML key.
        if let Some(table) = &self.noise.custom_qk {
            for (k, q) in table {
                let _ = writeln!(out, "\"noise.q.{k}\" = {}", fmt_real(*q));
            }
        }
        out
    }
}

fn fmt_real(x: f64) -> String {
    // Debug formatting is the shortest string that round-trips.
    let s = format!("{x:?}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

/// A scalar entry from a config document or override.
#[derive(Clone, Debug, PartialEq)]
enum Entry {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Entry {
    fn from_toml(key: &str, v: &toml::Value) -> Result<Entry> {
        match v {
            toml::Value::Float(f) => Ok(Entry::Real(*f)),
            toml::Value::Integer(i) => Ok(Entry::Int(*i)),
            toml::Value::Boolean(b) => Ok(Entry::Bool(*b)),
            toml::Value::String(s) => Ok(Entry::Text(s.clone())),
            other => Err(Error::Parse(format!("`{key}`: unsupported value {other}"))),
        }
    }

    fn real(&self, key: &str) -> Result<f64> {
        match self {
            Entry::Real(x) => Ok(*x),
            Entry::Int(i) => Ok(*i as f64),
            Entry::Text(s) => parse_real(s).ok_or_else(|| Error::Parse(format!("`{key}`: `{s}` is not a real number"))),
            Entry::Bool(_) => Err(Error::Parse(format!("`{key}`: expected a real number"))),
        }
    }

    fn int(&self, key: &str) -> Result<i64> {
        match self {
            Entry::Int(i) => Ok(*i),
            Entry::Real(x) if x.fract() == 0.0 && x.abs() < 9.0e15 => Ok(*x as i64),
            Entry::Text(s) => s
                .trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("`{key}`: `{s}` is not an integer"))),
            _ => Err(Error::Parse(format!("`{key}`: expected an integer"))),
        }
    }

    fn uint(&self, key: &str) -> Result<u64> {
        match self {
            Entry::Text(s) => s
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("`{key}`: `{s}` is not a non-negative integer"))),
            other => {
                let i = other.int(key)?;
                u64::try_from(i).map_err(|_| Error::Parse(format!("`{key}`: must be non-negative, got {i}")))
            }
        }
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self {
            Entry::Bool(b) => Ok(*b),
            Entry::Text(s) => match s.trim() {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Error::Parse(format!("`{key}`: `{s}` is not a boolean"))),
            },
            _ => Err(Error::Parse(format!("`{key}`: expected a boolean"))),
        }
    }

    fn text(&self, key: &str) -> Result<String> {
        match self {
            Entry::Text(s) => Ok(s.trim().to_string()),
            _ => Err(Error::Parse(format!("`{key}`: expected a string"))),
        }
    }
}

/// Parses a real literal or a power expression `a^b`, `c*a^b`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return Some(x);
    }
    let (coef, rest) = match s.split_once('*') {
        Some((c, r)) => (c.trim().parse::<f64>().ok()?, r.trim()),
        None => (1.0, s),
    };
    let (base, exp) = rest.split_once('^')?;
    let base = base.trim().parse::<f64>().ok()?;
    let exp = exp.trim().trim_start_matches('(').trim_end_matches(')');
    let exp = exp.parse::<f64>().ok()?;
    Some(coef * base.powf(exp))
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Entry>) -> Result<()> {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out)?,
            other => {
                out.insert(key.clone(), Entry::from_toml(&key, other)?);
            }
        }
    }
    Ok(())
}

fn parse_document(text: &str) -> Result<BTreeMap<String, Entry>> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    let mut out = BTreeMap::new();
    flatten("", &table, &mut out)?;
    Ok(out)
}

fn parse_override(pair: &str) -> Result<(String, Entry)> {
    let (key, value) = pair
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("override `{pair}` is not of the form key=value")))?;
    let key = key.trim().to_string();
    let value = value.trim();
    let entry = if let Ok(i) = value.parse::<i64>() {
        Entry::Int(i)
    } else if let Ok(x) = value.parse::<f64>() {
        Entry::Real(x)
    } else if value == "true" || value == "false" {
        Entry::Bool(value == "true")
    } else {
        Entry::Text(value.trim_matches('"').to_string())
    };
    Ok((key, entry))
}

/// Builds a validated config from the built-in defaults, a config document and
/// `key=value` overrides (later wins).
pub fn config_from_str(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut entries = parse_document(text)?;
    for pair in overrides {
        let (k, v) = parse_override(pair)?;
        entries.insert(k, v);
    }
    build(entries)
}

/// Reads a config document from `path` and applies `overrides`.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    config_from_str(&text, overrides)
}

/// Replaces the seed with the value of `SCGLE_SEED`, when present.
pub fn apply_seed_env(cfg: &mut RunConfig) -> Result<()> {
    if let Ok(raw) = std::env::var(SEED_ENV) {
        cfg.seed = raw
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{SEED_ENV}=`{raw}` is not a u64")))?;
    }
    Ok(())
}

fn build(entries: BTreeMap<String, Entry>) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut noise_r: Option<f64> = None;
    let mut custom: BTreeMap<i64, f64> = BTreeMap::new();
    let mut init_kind: Option<String> = None;
    let mut init_mode = 1i64;
    let mut init_amp = 1.0f64;

    for (key, e) in &entries {
        let k = key.as_str();
        match k {
            "model.R" => cfg.model.r = e.real(k)?,
            "model.mu" => cfg.model.mu = e.real(k)?,
            "model.nu" => cfg.model.nu = e.real(k)?,
            "model.sigma" => cfg.model.sigma = e.real(k)?,
            "model.T" => cfg.model.t_final = e.real(k)?,
            "noise.kind" => {
                cfg.noise.kind = match e.text(k)?.to_ascii_lowercase().as_str() {
                    "regular" => NoiseKind::Regular,
                    "white" => NoiseKind::White,
                    "custom" => NoiseKind::Custom,
                    other => return Err(Error::Parse(format!("`noise.kind`: unknown kind `{other}`"))),
                }
            }
            "noise.r" => noise_r = Some(e.real(k)?),
            "noise.epsilon" => cfg.noise.epsilon = e.real(k)?,
            "run.N" => {
                let n = e.int(k)?;
                cfg.n = usize::try_from(n).map_err(|_| Error::validation("run.N", format!("must be positive, got {n}")))?;
            }
            "run.dt" => cfg.dt = e.real(k)?,
            "run.seed" => cfg.seed = e.uint(k)?,
            "run.method" => cfg.method = e.text(k)?.parse()?,
            "run.record_every" => {
                let r = e.int(k)?;
                cfg.record_every = usize::try_from(r)
                    .map_err(|_| Error::validation("run.record_every", format!("must be positive, got {r}")))?;
            }
            "run.dealias" => cfg.dealias = e.flag(k)?,
            "init.kind" => init_kind = Some(e.text(k)?.to_ascii_lowercase()),
            "init.mode" => init_mode = e.int(k)?,
            "init.amplitude" => init_amp = e.real(k)?,
            _ => {
                if let Some(mode) = k.strip_prefix("noise.q.") {
                    let mode: i64 = mode
                        .parse()
                        .map_err(|_| Error::Parse(format!("`{k}`: mode index is not an integer")))?;
                    custom.insert(mode, e.real(k)?);
                } else {
                    return Err(Error::Parse(format!("unknown key `{k}`")));
                }
            }
        }
    }

    cfg.noise.r = match (noise_r, cfg.noise.kind) {
        (Some(r), _) => r,
        (None, NoiseKind::White) => -0.5,
        (None, _) => 0.0,
    };
    if !custom.is_empty() {
        cfg.noise.custom_qk = Some(custom);
    }
    cfg.init = match init_kind.as_deref() {
        None | Some("zero") => InitialCondition::Zero,
        Some("plane_wave") => InitialCondition::PlaneWave {
            mode: init_mode,
            amplitude: init_amp,
        },
        Some(other) => return Err(Error::Parse(format!("`init.kind`: unknown kind `{other}`"))),
    };
    cfg.validate()?;
    Ok(cfg)
}
