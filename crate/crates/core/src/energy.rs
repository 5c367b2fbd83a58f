//! Discrete energy functionals.
//!
//! `|.|` is the weighted l2 norm and `L = D+D-`.
//!
//! ```text
//! General            |e|^2 + (b-c)|D+e|^2 + b(-c)|Le|^2 + |f|^2 + (d-a)|D+f|^2 + d(-a)|Lf|^2
//! ImplicitBdPos      (-c)d |(I-bL)e|^2 + (-a)b |(I-dL)f|^2
//! ANegOnly           |e|^2 + |f|^2 + (-a)|D+f|^2                    a<0, b=c=d=0
//! ClassicalBoussinesq|e|^2 + |f|^2 + d|D+f|^2                       a=b=c=0, d>0
//! ANegDPos           d|e|^2 + (-a)|(I-dL)f|^2                       a<0, b=c=0, d>0
//! ANegCNegDPos       (-a)|e|^2 + (-cd)|D+e|^2 + (-a)|(I-dL)f|^2     a<0, b=0, c<0, d>0
//! BPosOnly           |e|^2 + b|D+e|^2 + |f|^2                       a=c=d=0, b>0
//! ANegBPos           |e|^2 + b|D+e|^2 + |f|^2 + (-a)|D+f|^2         a<0, b>0, c=d=0
//! ANegBPosCNeg       (-c)|(I-bL)e|^2 + |f|^2 + (-a)b|D+f|^2         a<0, b>0, c<0, d=0
//! ```

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::scheme::{AbcdParams, Regime, SimState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyKind {
    General,
    ImplicitBdPos,
    ANegOnly,
    ClassicalBoussinesq,
    ANegDPos,
    ANegCNegDPos,
    BPosOnly,
    ANegBPos,
    ANegBPosCNeg,
}

impl EnergyKind {
    pub const ALL: [EnergyKind; 9] = [
        EnergyKind::General,
        EnergyKind::ImplicitBdPos,
        EnergyKind::ANegOnly,
        EnergyKind::ClassicalBoussinesq,
        EnergyKind::ANegDPos,
        EnergyKind::ANegCNegDPos,
        EnergyKind::BPosOnly,
        EnergyKind::ANegBPos,
        EnergyKind::ANegBPosCNeg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnergyKind::General => "general",
            EnergyKind::ImplicitBdPos => "implicit-bd-pos",
            EnergyKind::ANegOnly => "a-neg",
            EnergyKind::ClassicalBoussinesq => "classical-boussinesq",
            EnergyKind::ANegDPos => "a-neg-d-pos",
            EnergyKind::ANegCNegDPos => "a-neg-c-neg-d-pos",
            EnergyKind::BPosOnly => "b-pos",
            EnergyKind::ANegBPos => "a-neg-b-pos",
            EnergyKind::ANegBPosCNeg => "a-neg-b-pos-c-neg",
        }
    }

    /// The case-specific functional for the sign pattern of `params`;
    /// `General` when `b, d > 0`. `None` for the excluded tuples.
    pub fn select(params: &AbcdParams) -> Option<EnergyKind> {
        if params.regime() == Regime::Excluded {
            return None;
        }
        if params.regime() == Regime::BothPositive {
            return Some(EnergyKind::General);
        }
        EnergyKind::ALL[2..].iter().copied().find(|k| k.is_compatible(params))
    }

    /// Whether the sign pattern of `params` makes the functional definite.
    pub fn is_compatible(self, params: &AbcdParams) -> bool {
        let (a, b, c, d) = params.as_tuple();
        let (an, az) = (a < 0.0, a == 0.0);
        let (cn, cz) = (c < 0.0, c == 0.0);
        let (bp, bz) = (b > 0.0, b == 0.0);
        let (dp, dz) = (d > 0.0, d == 0.0);
        match self {
            EnergyKind::General => params.regime() != Regime::Excluded,
            EnergyKind::ImplicitBdPos => an && cn && bp && dp,
            EnergyKind::ANegOnly => an && bz && cz && dz,
            EnergyKind::ClassicalBoussinesq => az && bz && cz && dp,
            EnergyKind::ANegDPos => an && bz && cz && dp,
            EnergyKind::ANegCNegDPos => an && bz && cn && dp,
            EnergyKind::BPosOnly => az && cz && dz && bp,
            EnergyKind::ANegBPos => an && bp && cz && dz,
            EnergyKind::ANegBPosCNeg => an && bp && cn && dz,
        }
    }
}

fn id_minus(v: &GridFunction, k: f64) -> Result<GridFunction> {
    v.lin_comb(1.0, &v.laplacian(), -k)
}

/// `E(e, f)` for `kind`.
pub fn energy(kind: EnergyKind, params: &AbcdParams, e: &GridFunction, f: &GridFunction) -> Result<f64> {
    if !kind.is_compatible(params) {
        return Err(Error::IncompatibleEnergyKind(kind.name()));
    }
    if !e.grid().same_as(f.grid()) {
        return Err(Error::GridMismatch);
    }
    let (a, b, c, d) = params.as_tuple();
    let n = |v: &GridFunction| v.norm_sq();
    let dp = |v: &GridFunction| v.d_plus().norm_sq();
    let lap = |v: &GridFunction| v.laplacian().norm_sq();
    let value = match kind {
        EnergyKind::General => {
            n(e) + (b - c) * dp(e) + b * (-c) * lap(e) + n(f) + (d - a) * dp(f) + d * (-a) * lap(f)
        }
        EnergyKind::ImplicitBdPos => (-c) * d * n(&id_minus(e, b)?) + (-a) * b * n(&id_minus(f, d)?),
        EnergyKind::ANegOnly => n(e) + n(f) + (-a) * dp(f),
        EnergyKind::ClassicalBoussinesq => n(e) + n(f) + d * dp(f),
        EnergyKind::ANegDPos => d * n(e) + (-a) * n(&id_minus(f, d)?),
        EnergyKind::ANegCNegDPos => (-a) * n(e) + (-c * d) * dp(e) + (-a) * n(&id_minus(f, d)?),
        EnergyKind::BPosOnly => n(e) + b * dp(e) + n(f),
        EnergyKind::ANegBPos => n(e) + b * dp(e) + n(f) + (-a) * dp(f),
        EnergyKind::ANegBPosCNeg => (-c) * n(&id_minus(e, b)?) + n(f) + (-a) * b * dp(f),
    };
    Ok(value)
}

/// `sqrt(E(eta_num - eta_ref, u_num - u_ref))`.
pub fn energy_error(kind: EnergyKind, params: &AbcdParams, numeric: &SimState, reference: &SimState) -> Result<f64> {
    let tol = 1e-9 * numeric.t.abs().max(1.0);
    if (numeric.t - reference.t).abs() > tol {
        return Err(Error::TimeMismatch(numeric.t, reference.t));
    }
    let e = numeric.eta.sub(&reference.eta)?;
    let f = numeric.u.sub(&reference.u)?;
    Ok(libm::sqrt(energy(kind, params, &e, &f)?))
}
