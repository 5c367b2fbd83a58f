//! Named run setups: family, domain, mesh, time stepping and final time.
//!
//! | name         | family | domain       | dx      | dt                 | theta | T   |
//! |--------------|--------|--------------|---------|--------------------|-------|-----|
//! | `A`..`D`     | A..D   | [0, 40]      | 1/16    | dx / \|u\|         | 1/2   | 2   |
//! | `E`          | E      | [0, 40]      | 1/16    | dx / tau           | 1/2   | 2   |
//! | `F`          | F      | [0, 40]      | 1/16    | dx / tau           | 1     | 2   |
//! | `longtime-B` | B      | [0, 122]     | 0.01    | 1e-3               | 1/2   | 34  |
//! | `longtime-C` | C      | [0, 400]     | 0.05    | 1e-3               | 1/2   | 100 |
//! | `longtime-F` | F      | [0, 40]      | 0.005   | dx / tau           | 1     | 20  |
//! | `G`          | G      | [-14, 14]    | 0.02    | 1e-4               | 1/2   | 6   |
//! | `H`          | H      | [-40, 40]    | 0.01    | min(1e-3, dx/tau)  | 1     | 8   |
//! | `I`          | I      | [-14, 14]    | 0.01    | 1e-3               | 1/2   | 12  |
//! | `I-long`     | I      | [-200, 200]  | 0.01    | 1e-3               | 1/2   | 150 |
//! | `J`          | J      | [-75, 75]    | 0.5/32  | 2e-3               | 1/2   | 80  |
//! | `linear`     | C      | [0, 40]      | 1/32    | 1e-3               | 1/2   | 2   |
//!
//! `tau = |u|_inf + alpha` is the adaptive Rusanov coefficient of the
//! `bd = 0` families, with `alpha = 0.1` except `alpha = 1e-3` for
//! `longtime-F`. Single waves start in the middle of the domain and
//! colliding pairs are placed symmetrically about it.

use alloc::vec::Vec;

use crate::error::Result;
use crate::exact::{Family, TravelingWaveSpec};
use crate::grid::Grid;
use crate::scheme::{AbcdParams, DtPolicy, RusanovConfig, SchemeConfig, DEFAULT_ALPHA, DEFAULT_BLOWUP_THRESHOLD};

/// Cell counts of the default convergence ladder on `[0, 40]` (`dx = 1/16 .. 1/128`).
pub const CONVERGENCE_CELLS: [usize; 4] = [640, 1280, 2560, 5120];
/// The full ladder, down to `dx = 1/256`.
pub const EXTENDED_CONVERGENCE_CELLS: [usize; 5] = [640, 1280, 2560, 5120, 10240];
/// Rusanov margin of the long single-wave run, close to `tau = |u|_inf`.
pub const LONGTIME_ALPHA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub family: Family,
    pub origin: f64,
    pub length: f64,
    pub dx: f64,
    pub t_final: f64,
    pub scheme: SchemeConfig,
    /// Overrides the family's default distance from the centre to each crest.
    pub half_separation: Option<f64>,
}

pub const NAMES: [&str; 15] = [
    "A",
    "B",
    "C",
    "D",
    "E",
    "F",
    "longtime-B",
    "longtime-C",
    "longtime-F",
    "G",
    "H",
    "I",
    "I-long",
    "J",
    "linear",
];

fn config(theta: f64, dt: DtPolicy, rusanov: RusanovConfig) -> SchemeConfig {
    SchemeConfig {
        theta,
        dt_policy: dt,
        rusanov,
        blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
    }
}

fn family_default(family: Family) -> SchemeConfig {
    let params = family.params();
    if params.regime() == crate::scheme::Regime::BothPositive {
        config(0.5, DtPolicy::adaptive(), RusanovConfig::Off)
    } else if params.is_free_theta_case() {
        config(0.5, DtPolicy::adaptive(), RusanovConfig::Adaptive { alpha: DEFAULT_ALPHA })
    } else {
        config(1.0, DtPolicy::adaptive(), RusanovConfig::Adaptive { alpha: DEFAULT_ALPHA })
    }
}

fn make(
    name: &'static str,
    family: Family,
    origin: f64,
    length: f64,
    dx: f64,
    t_final: f64,
    scheme: SchemeConfig,
) -> Preset {
    Preset {
        name,
        family,
        origin,
        length,
        dx,
        t_final,
        scheme,
        half_separation: None,
    }
}

/// Looks a preset up by name, ignoring ASCII case.
pub fn lookup(name: &str) -> Option<Preset> {
    let key = NAMES.iter().copied().find(|n| n.eq_ignore_ascii_case(name))?;
    let fixed = |dt| DtPolicy::Fixed(dt);
    let p = match key {
        "A" | "B" | "C" | "D" | "E" | "F" => {
            let family = Family::parse(key)?;
            make(key, family, 0.0, 40.0, 1.0 / 16.0, 2.0, family_default(family))
        }
        "longtime-B" => make(key, Family::B, 0.0, 122.0, 0.01, 34.0, config(0.5, fixed(1e-3), RusanovConfig::Off)),
        "longtime-C" => make(key, Family::C, 0.0, 400.0, 0.05, 100.0, config(0.5, fixed(1e-3), RusanovConfig::Off)),
        "longtime-F" => make(
            key,
            Family::F,
            0.0,
            40.0,
            0.005,
            20.0,
            config(1.0, DtPolicy::adaptive(), RusanovConfig::Adaptive { alpha: LONGTIME_ALPHA }),
        ),
        "G" => make(key, Family::G, -14.0, 28.0, 0.02, 6.0, config(0.5, fixed(1e-4), RusanovConfig::Off)),
        "H" => make(
            key,
            Family::H,
            -40.0,
            80.0,
            0.01,
            8.0,
            config(
                1.0,
                DtPolicy::AdaptiveCfl { safety: 1.0, cap: Some(1e-3) },
                RusanovConfig::Adaptive { alpha: DEFAULT_ALPHA },
            ),
        ),
        "I" => make(key, Family::I, -14.0, 28.0, 0.01, 12.0, config(0.5, fixed(1e-3), RusanovConfig::Off)),
        "I-long" => Preset {
            half_separation: Some(50.0),
            ..make(key, Family::I, -200.0, 400.0, 0.01, 150.0, config(0.5, fixed(1e-3), RusanovConfig::Off))
        },
        "J" => make(key, Family::J, -75.0, 150.0, 0.5 / 32.0, 80.0, config(0.5, fixed(2e-3), RusanovConfig::Off)),
        "linear" => make(
            key,
            Family::LinearInit,
            0.0,
            40.0,
            1.0 / 32.0,
            2.0,
            config(0.5, fixed(1e-3), RusanovConfig::Off),
        ),
        _ => return None,
    };
    Some(p)
}

/// Every preset in [`NAMES`] order.
pub fn all() -> Vec<Preset> {
    NAMES.iter().filter_map(|n| lookup(n)).collect()
}

impl Preset {
    pub fn grid(&self) -> Result<Grid> {
        Grid::from_cell_width(self.origin, self.length, self.dx)
    }

    pub fn params(&self) -> AbcdParams {
        self.family.params()
    }

    /// The wave data, centred on the middle of the domain.
    pub fn spec(&self) -> TravelingWaveSpec {
        let spec = TravelingWaveSpec::new(self.family, self.origin + 0.5 * self.length);
        match self.half_separation {
            Some(h) => spec.with_half_separation(h),
            None => spec,
        }
    }

    /// Cell count for this preset's domain at cell width `dx`.
    pub fn cells_for(&self, dx: f64) -> Result<usize> {
        Ok(Grid::from_cell_width(self.origin, self.length, dx)?.cells())
    }
}
