//! Run configuration: a flat TOML file merged with command-line overrides,
//! then resolved against a named preset.
//!
//! Recognised keys (all optional, flags of the same name win):
//!
//! ```toml
//! case = "J"                 # preset name, see `abcd_core::presets::NAMES`
//! abcd = "0, 1/6, 0, 1/6"    # must match the case's family when both are set
//! origin = -75.0
//! length = 150.0
//! cells = 8192               # power of two
//! dx = 0.015625              # alternative to `cells`
//! t_final = 80.0
//! theta = 0.5
//! dt = "adaptive"            # "adaptive", "dx", "dx2", or a number
//! cfl_safety = 1.0
//! dt_cap = 0.001
//! rusanov = "adaptive"       # "off", "adaptive" or "fixed"
//! alpha = 0.1
//! tau1 = 1.0
//! tau2 = 1.0
//! half_separation = 67.0
//! quadrature = 5
//! blowup_threshold = 1000.0
//! ladder = "640:5120"        # "from:to" doubling, or "640,1280,2560"
//! snapshots = 50
//! every_step = false
//! output_dir = "output"
//! samples = 200
//! sizes = "8,64,1024"
//! seed = 2024
//! ```

use std::path::{Path, PathBuf};

use abcd_core::exact::CellAverageConfig;
use abcd_core::presets::{self, Preset};
use abcd_core::scheme::{AbcdParams, DtPolicy, RusanovConfig, SchemeConfig, Stepper};
use abcd_core::{Grid, TravelingWaveSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable that overrides the default output directory.
pub const OUTPUT_ENV: &str = "ABCD_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "output";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtSetting {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: Option<String>,
    pub abcd: Option<String>,
    pub origin: Option<f64>,
    pub length: Option<f64>,
    pub cells: Option<usize>,
    pub dx: Option<f64>,
    pub t_final: Option<f64>,
    pub theta: Option<f64>,
    pub dt: Option<DtSetting>,
    pub cfl_safety: Option<f64>,
    pub dt_cap: Option<f64>,
    pub rusanov: Option<String>,
    pub alpha: Option<f64>,
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    pub half_separation: Option<f64>,
    pub quadrature: Option<usize>,
    pub blowup_threshold: Option<f64>,
    pub ladder: Option<String>,
    pub snapshots: Option<usize>,
    pub every_step: Option<bool>,
    pub output_dir: Option<String>,
    pub samples: Option<usize>,
    pub sizes: Option<String>,
    pub seed: Option<u64>,
}

macro_rules! take_over {
    ($base:ident, $over:ident; $($field:ident),*) => {
        $( if $over.$field.is_some() { $base.$field = $over.$field; } )*
    };
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {}", e.message())))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// `self` with every field that `over` sets replaced.
    pub fn merged(mut self, over: RunConfig) -> Self {
        take_over!(self, over;
            case, abcd, origin, length, cells, dx, t_final, theta, dt, cfl_safety, dt_cap,
            rusanov, alpha, tau1, tau2, half_separation, quadrature, blowup_threshold, ladder,
            snapshots, every_step, output_dir, samples, sizes, seed);
        self
    }

    pub fn output_dir(&self) -> PathBuf {
        if let Some(d) = &self.output_dir {
            return PathBuf::from(d);
        }
        match std::env::var(OUTPUT_ENV) {
            Ok(d) if !d.is_empty() => PathBuf::from(d),
            _ => PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }
}

/// Parses a decimal or a fraction `p/q`.
pub fn parse_number(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let bad = || CliError::Config(format!("'{s}' is not a number"));
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            p / q
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

pub fn parse_abcd(s: &str) -> Result<AbcdParams, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::Config(format!(
            "--abcd expects four comma-separated values a,b,c,d, got '{s}'"
        )));
    }
    let v = parts.iter().map(|p| parse_number(p)).collect::<Result<Vec<_>, _>>()?;
    let params = AbcdParams::new(v[0], v[1], v[2], v[3])?;
    params.require_supported()?;
    Ok(params)
}

/// `"640:5120"` (doubling) or `"640,1280,2560"`.
pub fn parse_ladder(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Config(format!("ladder '{s}' must be 'from:to' or a comma-separated list of cell counts"));
    let cells: Vec<usize> = if let Some((a, b)) = s.split_once(':') {
        let (mut a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a == 0 || b < a {
            return Err(bad());
        }
        let mut v = Vec::new();
        while a <= b {
            v.push(a);
            a *= 2;
        }
        v
    } else {
        s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    abcd_core::experiments::check_ladder(&cells)?;
    Ok(cells)
}

pub fn parse_sizes(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .ok()
                .filter(|n| *n >= 4)
                .ok_or_else(|| CliError::Config(format!("size '{p}' must be an integer >= 4")))
        })
        .collect()
}

/// A configuration resolved against its preset and validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub preset: Preset,
    pub params: AbcdParams,
    pub grid: Grid,
    pub spec: TravelingWaveSpec,
    pub scheme: SchemeConfig,
    pub t_final: f64,
    pub quadrature: CellAverageConfig,
    pub snapshots: usize,
    pub every_step: bool,
}

pub fn lookup_case(name: &str) -> Result<Preset, CliError> {
    presets::lookup(name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown case '{name}'; expected one of: {}",
            presets::NAMES.join(", ")
        ))
    })
}

fn dt_policy(cfg: &RunConfig, base: DtPolicy, dx: f64) -> Result<DtPolicy, CliError> {
    let safety = cfg.cfl_safety;
    let cap = cfg.dt_cap;
    let adaptive = |s: Option<f64>, c: Option<f64>| {
        let (s0, c0) = match base {
            DtPolicy::AdaptiveCfl { safety, cap } => (safety, cap),
            DtPolicy::Fixed(_) => (1.0, None),
        };
        DtPolicy::AdaptiveCfl {
            safety: s.unwrap_or(s0),
            cap: c.or(c0),
        }
    };
    let policy = match &cfg.dt {
        None => match base {
            DtPolicy::Fixed(_) if safety.is_none() && cap.is_none() => base,
            DtPolicy::Fixed(_) => adaptive(safety, cap),
            DtPolicy::AdaptiveCfl { .. } => adaptive(safety, cap),
        },
        Some(DtSetting::Number(v)) => DtPolicy::Fixed(*v),
        Some(DtSetting::Text(t)) => match t.trim().to_ascii_lowercase().as_str() {
            "adaptive" => adaptive(safety, cap),
            "dx2" => DtPolicy::Fixed(dx * dx),
            "dx" => DtPolicy::Fixed(dx),
            other => DtPolicy::Fixed(parse_number(other).map_err(|_| {
                CliError::Config(format!("--dt must be 'adaptive', 'dx', 'dx2' or a number, got '{t}'"))
            })?),
        },
    };
    Ok(policy)
}

fn rusanov(cfg: &RunConfig, base: RusanovConfig) -> Result<RusanovConfig, CliError> {
    let mode = match &cfg.rusanov {
        Some(m) => m.trim().to_ascii_lowercase(),
        None => match base {
            RusanovConfig::Off => "off".into(),
            RusanovConfig::Fixed { .. } => "fixed".into(),
            RusanovConfig::Adaptive { .. } => "adaptive".into(),
        },
    };
    Ok(match mode.as_str() {
        "off" => RusanovConfig::Off,
        "adaptive" => {
            let a0 = match base {
                RusanovConfig::Adaptive { alpha } => alpha,
                _ => abcd_core::scheme::DEFAULT_ALPHA,
            };
            RusanovConfig::Adaptive {
                alpha: cfg.alpha.unwrap_or(a0),
            }
        }
        "fixed" => {
            let (t1, t2) = match base {
                RusanovConfig::Fixed { tau1, tau2 } => (Some(tau1), Some(tau2)),
                _ => (None, None),
            };
            match (cfg.tau1.or(t1), cfg.tau2.or(t2)) {
                (Some(tau1), Some(tau2)) => RusanovConfig::Fixed { tau1, tau2 },
                _ => {
                    return Err(CliError::Config(
                        "--rusanov fixed needs both --tau1 and --tau2".into(),
                    ))
                }
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "--rusanov must be 'off', 'adaptive' or 'fixed', got '{other}'"
            )))
        }
    })
}

/// Validates `cfg` and fills every unset field from the case preset
/// (`default_case` when the configuration names none).
pub fn resolve(cfg: &RunConfig, default_case: &str) -> Result<Resolved, CliError> {
    let explicit = cfg.abcd.as_deref().map(parse_abcd).transpose()?;
    let preset = lookup_case(cfg.case.as_deref().unwrap_or(default_case))?;
    let params = preset.params();
    if let Some(p) = explicit {
        TravelingWaveSpec::for_params(preset.family, &p, 0.0)?;
    }

    let origin = cfg.origin.unwrap_or(preset.origin);
    let length = cfg.length.unwrap_or(preset.length);
    let grid = match (cfg.cells, cfg.dx) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either --J or --dx, not both".into())),
        (Some(n), None) => {
            if !n.is_power_of_two() {
                return Err(CliError::Config(format!(
                    "--J must be a power of two, got {n}; try {} or {}",
                    n.next_power_of_two() / 2,
                    n.next_power_of_two()
                )));
            }
            Grid::with_origin(origin, length, n)?
        }
        (None, Some(dx)) => Grid::from_cell_width(origin, length, dx)?,
        (None, None) => Grid::from_cell_width(origin, length, preset.dx)?,
    };

    let mut scheme = preset.scheme;
    if let Some(th) = cfg.theta {
        scheme.theta = th;
    }
    scheme.dt_policy = dt_policy(cfg, preset.scheme.dt_policy, grid.dx())?;
    scheme.rusanov = rusanov(cfg, preset.scheme.rusanov)?;
    if let Some(b) = cfg.blowup_threshold {
        scheme.blowup_threshold = b;
    }
    Stepper::new(params, scheme, grid)?;

    let mut preset = preset;
    preset.origin = origin;
    preset.length = length;
    preset.dx = grid.dx();
    if let Some(h) = cfg.half_separation {
        preset.half_separation = Some(h);
    }
    if let Some(t) = cfg.t_final {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Config(format!("--T must be non-negative, got {t}")));
        }
        preset.t_final = t;
    }
    preset.scheme = scheme;
    let quadrature = CellAverageConfig::new(cfg.quadrature.unwrap_or(CellAverageConfig::default().points()))?;
    let spec = preset.spec();
    Ok(Resolved {
        preset,
        params,
        grid,
        spec,
        scheme,
        t_final: preset.t_final,
        quadrature,
        snapshots: cfg.snapshots.unwrap_or(abcd_core::experiments::DEFAULT_SNAPSHOTS),
        every_step: cfg.every_step.unwrap_or(false),
    })
}
