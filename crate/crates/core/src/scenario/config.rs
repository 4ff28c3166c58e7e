//! Flat TOML scenario files with `[chain]`, `[bath]` and `[run]` sections.
//!
//! Physical values may be plain numbers in the unit named by the key suffix
//! or strings carrying an explicit unit, e.g. `radius_m = "10 um"` or
//! `temperature_GHz = "300 MHz"`.

use num_complex::Complex64;
use toml::{Table, Value};

use crate::bath::{BathSpec, CouplingMode};
use crate::dynamics::TimeGrid;
use crate::spin_chain::{heisenberg_scale, Basis, ChainSpec};
use crate::{Error, Result};

/// Chain energy scales in GHz.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub n_sites: usize,
    /// `(l_max − l_min)·J/h` in GHz.
    pub heisenberg_ghz: f64,
    /// `2B/h` in GHz.
    pub splitting_ghz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathConfig {
    pub temperature_ghz: f64,
    pub radius_m: f64,
    pub current_a: f64,
    pub density_kg_m3: f64,
    pub speed_m_s: f64,
    pub spacing_over_r: f64,
    pub cutoff_rad_ns: Option<f64>,
    pub longitudinal_speed_m_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub label: Option<String>,
    /// `None` picks `n_efold` e-foldings of the slowest mode.
    pub t_max_ns: Option<f64>,
    pub dt_ns: Option<f64>,
    pub output_stride: Option<usize>,
    pub samples: Option<usize>,
    pub time_grid: TimeGrid,
    pub n_efold: f64,
    pub coupling_mode: CouplingMode,
    pub initial_state: Vec<Complex64>,
    pub initial_basis: Basis,
    pub resonance_tol: f64,
    /// Tracked coherences, 1-based labels. `None` tracks every pair that
    /// shares a resonance class with an initially nonzero coherence.
    pub track: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub chain: ChainConfig,
    pub bath: BathConfig,
    pub run: RunConfig,
}

pub const DEFAULT_N_EFOLD: f64 = 20.0;
pub const DEFAULT_SPACING_OVER_R: f64 = 4.0;

impl ScenarioConfig {
    pub fn chain_spec(&self) -> Result<ChainSpec> {
        ChainSpec::from_ghz(self.chain.n_sites, self.chain.heisenberg_ghz, self.chain.splitting_ghz)
    }

    pub fn bath_spec(&self) -> Result<BathSpec> {
        let b = &self.bath;
        let mut spec = BathSpec::new(
            b.density_kg_m3,
            b.speed_m_s,
            b.temperature_ghz,
            b.radius_m,
            b.current_a,
            b.spacing_over_r * b.radius_m,
        )?;
        spec.cutoff = b.cutoff_rad_ns;
        spec.longitudinal_speed = b.longitudinal_speed_m_s;
        Ok(spec)
    }

    pub fn label(&self) -> &str {
        self.run.label.as_deref().unwrap_or("scenario")
    }

    /// Re-run every check `parse_config` performs.
    pub fn validate(&self) -> Result<()> {
        let c = &self.chain;
        if heisenberg_scale(c.n_sites).is_none() {
            return Err(Error::config("chain.n_sites", format!("{} not in 2..=4", c.n_sites)));
        }
        positive("chain.heisenberg_GHz", c.heisenberg_ghz)?;
        non_negative("chain.splitting_GHz", c.splitting_ghz)?;
        let b = &self.bath;
        positive("bath.temperature_GHz", b.temperature_ghz)?;
        positive("bath.radius_m", b.radius_m)?;
        positive("bath.current_A", b.current_a)?;
        positive("bath.density_kg_m3", b.density_kg_m3)?;
        positive("bath.speed_m_s", b.speed_m_s)?;
        positive("bath.spacing_over_R", b.spacing_over_r)?;
        if let Some(v) = b.cutoff_rad_ns {
            positive("bath.cutoff_rad_ns", v)?;
        }
        if let Some(v) = b.longitudinal_speed_m_s {
            positive("bath.longitudinal_speed_m_s", v)?;
        }
        let r = &self.run;
        if let Some(v) = r.t_max_ns {
            positive("run.t_max_ns", v)?;
        }
        if let Some(v) = r.dt_ns {
            positive("run.dt_ns", v)?;
        }
        if r.output_stride == Some(0) {
            return Err(Error::config("run.output_stride", "must be >= 1"));
        }
        if r.samples == Some(0) {
            return Err(Error::config("run.samples", "must be >= 1"));
        }
        positive("run.n_efold", r.n_efold)?;
        positive("run.resonance_tol", r.resonance_tol)?;
        let dim = 1usize << c.n_sites;
        if r.initial_state.len() != dim {
            return Err(Error::config(
                "run.initial_state",
                format!("expected {dim} amplitudes, got {}", r.initial_state.len()),
            ));
        }
        let norm: f64 = r.initial_state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::config("run.initial_state", format!("norm is {norm}, expected 1")));
        }
        if let Some(pairs) = &r.track {
            for &(a, d) in pairs {
                if a == 0 || d == 0 || a > dim || d > dim || a == d {
                    return Err(Error::config(
                        "run.track",
                        format!("invalid pair [{a}, {d}] for {dim} states"),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be > 0, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be >= 0, got {v}")))
    }
}

#[derive(Clone, Copy)]
enum Dimension {
    /// Base GHz, unit Hz.
    Frequency,
    /// Base m.
    Length,
    /// Base A.
    Current,
    /// Base kg/m³.
    Density,
    /// Base m/s.
    Speed,
    /// Base ns, unit s.
    Time,
    Plain,
}

fn prefix_factor(p: &str) -> Option<f64> {
    Some(match p {
        "" => 1.0,
        "p" => 1e-12,
        "n" => 1e-9,
        "u" | "µ" | "μ" => 1e-6,
        "m" => 1e-3,
        "k" => 1e3,
        "M" => 1e6,
        "G" => 1e9,
        _ => return None,
    })
}

fn with_unit(key: &str, text: &str, dim: Dimension) -> Result<f64> {
    let bad = || Error::config(key, format!("cannot read quantity `{text}`"));
    let t = text.trim();
    let split = t
        .find(|ch: char| ch.is_alphabetic() || ch == 'µ' || ch == 'μ')
        .ok_or_else(bad)?;
    let number: f64 = t[..split].trim().parse().map_err(|_| bad())?;
    let unit = t[split..].trim();
    let strip = |base: &str| unit.strip_suffix(base).and_then(prefix_factor);
    let si = match dim {
        Dimension::Frequency => strip("Hz").map(|f| f * 1e-9),
        Dimension::Length => strip("m"),
        Dimension::Current => strip("A"),
        Dimension::Speed => strip("m/s"),
        Dimension::Time => strip("s").map(|f| f * 1e9),
        Dimension::Density => match unit {
            "kg/m3" | "kg/m^3" => Some(1.0),
            "g/cm3" | "g/cm^3" => Some(1e3),
            _ => None,
        },
        Dimension::Plain => None,
    };
    si.map(|f| number * f)
        .ok_or_else(|| Error::config(key, format!("unit `{unit}` not valid here")))
}

fn number(key: &str, v: &Value, dim: Dimension) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        Value::String(s) => with_unit(key, s, dim),
        _ => Err(Error::config(key, "expected a number")),
    }
}

fn integer(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(Error::config(key, "expected a non-negative integer")),
    }
}

fn string<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::config(key, "expected a string"))
}

struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
    allowed: &'static [&'static str],
}

impl<'a> Section<'a> {
    fn new(root: &'a Table, name: &'static str, allowed: &'static [&'static str]) -> Result<Self> {
        let table = match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => return Err(Error::config(name, "expected a section")),
        };
        if let Some(t) = table {
            for key in t.keys() {
                if !allowed.contains(&key.as_str()) {
                    return Err(Error::config(format!("{name}.{key}"), "unknown key"));
                }
            }
        }
        Ok(Section { name, table, allowed })
    }

    fn key(&self, k: &str) -> String {
        debug_assert!(self.allowed.contains(&k));
        format!("{}.{}", self.name, k)
    }

    fn get(&self, k: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(k))
    }

    fn require(&self, k: &str) -> Result<&'a Value> {
        self.get(k)
            .ok_or_else(|| Error::config(self.key(k), "missing required key"))
    }

    fn number(&self, k: &str, dim: Dimension) -> Result<f64> {
        number(&self.key(k), self.require(k)?, dim)
    }

    fn opt_number(&self, k: &str, dim: Dimension) -> Result<Option<f64>> {
        self.get(k).map(|v| number(&self.key(k), v, dim)).transpose()
    }
}

const CHAIN_KEYS: &[&str] = &["n_sites", "heisenberg_GHz", "splitting_GHz"];
const BATH_KEYS: &[&str] = &[
    "temperature_GHz",
    "radius_m",
    "current_A",
    "density_kg_m3",
    "speed_m_s",
    "spacing_over_R",
    "cutoff_rad_ns",
    "longitudinal_speed_m_s",
];
const RUN_KEYS: &[&str] = &[
    "label",
    "t_max_ns",
    "dt_ns",
    "output_stride",
    "samples",
    "time_grid",
    "n_efold",
    "coupling_mode",
    "initial_state",
    "initial_basis",
    "resonance_tol",
    "track",
];

/// Parse and validate a scenario file.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    parse_config_verbose(text).map(|(c, _)| c)
}

/// Parse a scenario file, also returning non-fatal warnings (such as a
/// renormalized initial state).
pub fn parse_config_verbose(text: &str) -> Result<(ScenarioConfig, Vec<String>)> {
    let root: Table = toml::from_str(text).map_err(|e| Error::config("<file>", e.to_string()))?;
    for key in root.keys() {
        if !matches!(key.as_str(), "chain" | "bath" | "run") {
            return Err(Error::config(key.clone(), "unknown section"));
        }
    }
    let chain = Section::new(&root, "chain", CHAIN_KEYS)?;
    let bath = Section::new(&root, "bath", BATH_KEYS)?;
    let run = Section::new(&root, "run", RUN_KEYS)?;
    let mut warnings = Vec::new();

    let chain_cfg = ChainConfig {
        n_sites: integer(&chain.key("n_sites"), chain.require("n_sites")?)?,
        heisenberg_ghz: chain.number("heisenberg_GHz", Dimension::Frequency)?,
        splitting_ghz: chain.number("splitting_GHz", Dimension::Frequency)?,
    };
    let bath_cfg = BathConfig {
        temperature_ghz: bath.number("temperature_GHz", Dimension::Frequency)?,
        radius_m: bath.number("radius_m", Dimension::Length)?,
        current_a: bath.number("current_A", Dimension::Current)?,
        density_kg_m3: bath.number("density_kg_m3", Dimension::Density)?,
        speed_m_s: bath.number("speed_m_s", Dimension::Speed)?,
        spacing_over_r: bath
            .opt_number("spacing_over_R", Dimension::Plain)?
            .unwrap_or(DEFAULT_SPACING_OVER_R),
        cutoff_rad_ns: bath.opt_number("cutoff_rad_ns", Dimension::Plain)?,
        longitudinal_speed_m_s: bath.opt_number("longitudinal_speed_m_s", Dimension::Speed)?,
    };

    let coupling_mode = match run.get("coupling_mode") {
        None => CouplingMode::Auto,
        Some(v) => {
            let s = string(&run.key("coupling_mode"), v)?;
            CouplingMode::parse(s).ok_or_else(|| {
                Error::config(
                    run.key("coupling_mode"),
                    format!("`{s}` is not one of auto, independent, collective"),
                )
            })?
        }
    };
    let time_grid = match run.get("time_grid") {
        None => TimeGrid::Linear,
        Some(v) => {
            let s = string(&run.key("time_grid"), v)?;
            TimeGrid::parse(s).ok_or_else(|| {
                Error::config(run.key("time_grid"), format!("`{s}` is not one of linear, log"))
            })?
        }
    };
    let initial_basis = match run.get("initial_basis") {
        None => Basis::Computational,
        Some(v) => match string(&run.key("initial_basis"), v)? {
            "computational" => Basis::Computational,
            "eigen" => Basis::Eigen,
            other => {
                return Err(Error::config(
                    run.key("initial_basis"),
                    format!("`{other}` is not one of computational, eigen"),
                ))
            }
        },
    };
    let state_key = run.key("initial_state");
    let mut initial_state = amplitudes(&state_key, run.require("initial_state")?)?;
    let norm = initial_state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        if (norm - 1.0).abs() < 1e-6 && norm > 0.0 {
            initial_state.iter_mut().for_each(|a| *a /= norm);
            warnings.push(format!("{state_key}: norm {norm:.9} renormalized to 1"));
        } else {
            return Err(Error::config(state_key, format!("norm is {norm}, expected 1")));
        }
    }
    let track = match run.get("track") {
        None => None,
        Some(v) => Some(pairs(&run.key("track"), v)?),
    };
    let output_stride = run
        .get("output_stride")
        .map(|v| integer(&run.key("output_stride"), v))
        .transpose()?;
    let samples = run
        .get("samples")
        .map(|v| integer(&run.key("samples"), v))
        .transpose()?;
    let label = run
        .get("label")
        .map(|v| string(&run.key("label"), v).map(str::to_owned))
        .transpose()?;

    let run_cfg = RunConfig {
        label,
        t_max_ns: run.opt_number("t_max_ns", Dimension::Time)?,
        dt_ns: run.opt_number("dt_ns", Dimension::Time)?,
        output_stride,
        samples,
        time_grid,
        n_efold: run.opt_number("n_efold", Dimension::Plain)?.unwrap_or(DEFAULT_N_EFOLD),
        coupling_mode,
        initial_state,
        initial_basis,
        resonance_tol: run
            .opt_number("resonance_tol", Dimension::Plain)?
            .unwrap_or(crate::redfield::DEFAULT_RESONANCE_TOL),
        track,
    };
    let cfg = ScenarioConfig {
        chain: chain_cfg,
        bath: bath_cfg,
        run: run_cfg,
    };
    cfg.validate()?;
    Ok((cfg, warnings))
}

fn amplitudes(key: &str, v: &Value) -> Result<Vec<Complex64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::config(key, "expected an array of amplitudes"))?;
    arr.iter()
        .map(|item| match item {
            Value::Array(pair) if pair.len() == 2 => Ok(Complex64::new(
                number(key, &pair[0], Dimension::Plain)?,
                number(key, &pair[1], Dimension::Plain)?,
            )),
            other => number(key, other, Dimension::Plain).map(|x| Complex64::new(x, 0.0)),
        })
        .collect()
}

fn pairs(key: &str, v: &Value) -> Result<Vec<(usize, usize)>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::config(key, "expected an array of [a, b] pairs"))?;
    arr.iter()
        .map(|item| match item.as_array() {
            Some(p) if p.len() == 2 => Ok((integer(key, &p[0])?, integer(key, &p[1])?)),
            _ => Err(Error::config(key, "expected an array of [a, b] pairs")),
        })
        .collect()
}

fn float(x: f64) -> String {
    // Debug output is the shortest round-trip representation; make sure it
    // stays a TOML float.
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

/// Serialize a config so that `parse_config(&emit(c)) == c`.
pub fn emit(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let c = &cfg.chain;
    out.push_str("[chain]\n");
    out.push_str(&format!("n_sites = {}\n", c.n_sites));
    out.push_str(&format!("heisenberg_GHz = {}\n", float(c.heisenberg_ghz)));
    out.push_str(&format!("splitting_GHz = {}\n", float(c.splitting_ghz)));

    let b = &cfg.bath;
    out.push_str("\n[bath]\n");
    out.push_str(&format!("temperature_GHz = {}\n", float(b.temperature_ghz)));
    out.push_str(&format!("radius_m = {}\n", float(b.radius_m)));
    out.push_str(&format!("current_A = {}\n", float(b.current_a)));
    out.push_str(&format!("density_kg_m3 = {}\n", float(b.density_kg_m3)));
    out.push_str(&format!("speed_m_s = {}\n", float(b.speed_m_s)));
    out.push_str(&format!("spacing_over_R = {}\n", float(b.spacing_over_r)));
    if let Some(v) = b.cutoff_rad_ns {
        out.push_str(&format!("cutoff_rad_ns = {}\n", float(v)));
    }
    if let Some(v) = b.longitudinal_speed_m_s {
        out.push_str(&format!("longitudinal_speed_m_s = {}\n", float(v)));
    }

    let r = &cfg.run;
    out.push_str("\n[run]\n");
    if let Some(l) = &r.label {
        out.push_str(&format!("label = {}\n", Value::String(l.clone())));
    }
    if let Some(v) = r.t_max_ns {
        out.push_str(&format!("t_max_ns = {}\n", float(v)));
    }
    if let Some(v) = r.dt_ns {
        out.push_str(&format!("dt_ns = {}\n", float(v)));
    }
    if let Some(v) = r.output_stride {
        out.push_str(&format!("output_stride = {v}\n"));
    }
    if let Some(v) = r.samples {
        out.push_str(&format!("samples = {v}\n"));
    }
    if r.time_grid != TimeGrid::Linear {
        out.push_str(&format!("time_grid = \"{}\"\n", r.time_grid.name()));
    }
    out.push_str(&format!("n_efold = {}\n", float(r.n_efold)));
    out.push_str(&format!("coupling_mode = \"{}\"\n", r.coupling_mode.name()));
    out.push_str(&format!("initial_basis = \"{}\"\n", r.initial_basis.name()));
    let real = r.initial_state.iter().all(|a| a.im == 0.0);
    let amps: Vec<String> = r
        .initial_state
        .iter()
        .map(|a| {
            if real {
                float(a.re)
            } else {
                format!("[{}, {}]", float(a.re), float(a.im))
            }
        })
        .collect();
    out.push_str(&format!("initial_state = [{}]\n", amps.join(", ")));
    out.push_str(&format!("resonance_tol = {}\n", float(r.resonance_tol)));
    if let Some(t) = &r.track {
        let items: Vec<String> = t.iter().map(|(a, d)| format!("[{a}, {d}]")).collect();
        out.push_str(&format!("track = [{}]\n", items.join(", ")));
    }
    out
}
