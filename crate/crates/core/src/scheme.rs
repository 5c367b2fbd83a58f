//! Time steppers.
//!
//! Both schemes share one update. With `L = D+D-`, `nu1 = (1 - sgn b) tau1`
//! and `nu2 = (1 - sgn d) tau2`:
//!
//! ```text
//! (I - bL)(eta1 - eta0)/dt + (I + aL) D((1-th) u0 + th u1)   + D(eta0 u0)   = nu1 dx/2 L eta0
//! (I - dL)(u1 - u0)/dt     + (I + cL) D((1-th) eta0 + th eta1) + D(u0^2)/2  = nu2 dx/2 L u0
//! ```
//!
//! For `b, d > 0` the viscosity vanishes identically and `th` is 1/2 or 1.
//! When `bd = 0` the scheme is fully implicit (`th = 1`) except in the two
//! configurations `a = b = c = 0 < d` and `a = c = d = 0 < b`, where any
//! `th` in `[0, 1]` is accepted. Nonlinear terms are always explicit. The
//! implicit pair is handed to [`SpectralSolver::solve_coupled`].

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::spectral::{CoupledSystemSpec, SpectralSolver};

/// The five parameter tuples for which no scheme is provided.
pub const EXCLUDED_CASES: &str = "{a=b=0, d>0, c<0}, {a=b=c=d=0}, {a=d=0, b>0, c<0}, \
                                  {a=b=d=0, c<0}, {b=d=0, c<0, a<0}";

/// `1`, `0` or `-1`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `b > 0` and `d > 0`.
    BothPositive,
    /// `bd = 0`, not excluded.
    MixedOrZero,
    Excluded,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::BothPositive => "b>0, d>0",
            Regime::MixedOrZero => "bd=0",
            Regime::Excluded => "excluded",
        }
    }
}

/// Dispersion coefficients with their regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcdParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    regime: Regime,
}

impl AbcdParams {
    /// Classifies `(a, b, c, d)`; fails only outside `a, c <= 0 <= b, d`.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        for v in [a, b, c, d] {
            if !v.is_finite() {
                return Err(Error::InadmissibleParams("coefficients must be finite"));
            }
        }
        if a > 0.0 {
            return Err(Error::InadmissibleParams("a must be <= 0"));
        }
        if c > 0.0 {
            return Err(Error::InadmissibleParams("c must be <= 0"));
        }
        if b < 0.0 {
            return Err(Error::InadmissibleParams("b must be >= 0"));
        }
        if d < 0.0 {
            return Err(Error::InadmissibleParams("d must be >= 0"));
        }
        let regime = if is_excluded(a, b, c, d) {
            Regime::Excluded
        } else if b > 0.0 && d > 0.0 {
            Regime::BothPositive
        } else {
            Regime::MixedOrZero
        };
        Ok(Self { a, b, c, d, regime })
    }

    /// Like [`Self::new`] but also rejects the excluded tuples.
    pub fn supported(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let p = Self::new(a, b, c, d)?;
        p.require_supported()?;
        Ok(p)
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn require_supported(&self) -> Result<()> {
        if self.regime == Regime::Excluded {
            Err(Error::ExcludedParams {
                a: self.a,
                b: self.b,
                c: self.c,
                d: self.d,
            })
        } else {
            Ok(())
        }
    }

    /// `a = b = c = 0 < d` or `a = c = d = 0 < b`: the configurations that
    /// admit a general theta in the `bd = 0` scheme.
    pub fn is_free_theta_case(&self) -> bool {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        (a == 0.0 && b == 0.0 && c == 0.0 && d > 0.0) || (a == 0.0 && c == 0.0 && d == 0.0 && b > 0.0)
    }

    pub fn as_tuple(&self) -> (f64, f64, f64, f64) {
        (self.a, self.b, self.c, self.d)
    }
}

fn is_excluded(a: f64, b: f64, c: f64, d: f64) -> bool {
    (a == 0.0 && b == 0.0 && d > 0.0 && c < 0.0)
        || (a == 0.0 && b == 0.0 && c == 0.0 && d == 0.0)
        || (a == 0.0 && d == 0.0 && b > 0.0 && c < 0.0)
        || (a == 0.0 && b == 0.0 && d == 0.0 && c < 0.0)
        || (b == 0.0 && d == 0.0 && c < 0.0 && a < 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    Fixed(f64),
    /// `dt = safety * dx / |u|_inf`, never above `cap` (when set) and clipped
    /// further so the viscous CFL bound holds.
    AdaptiveCfl { safety: f64, cap: Option<f64> },
}

impl DtPolicy {
    pub fn adaptive() -> Self {
        DtPolicy::AdaptiveCfl { safety: 1.0, cap: None }
    }
}

/// Rusanov viscosity coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RusanovConfig {
    Off,
    Fixed { tau1: f64, tau2: f64 },
    /// `tau1 = tau2 = |u^n|_inf + alpha`, refreshed every step.
    Adaptive { alpha: f64 },
}

/// Default margin of the adaptive Rusanov coefficient.
pub const DEFAULT_ALPHA: f64 = 0.1;
/// Default `|eta|_inf` above which a run counts as blown up.
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub theta: f64,
    pub dt_policy: DtPolicy,
    pub rusanov: RusanovConfig,
    pub blowup_threshold: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            theta: 1.0,
            dt_policy: DtPolicy::adaptive(),
            rusanov: RusanovConfig::Adaptive { alpha: DEFAULT_ALPHA },
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        }
    }
}

impl SchemeConfig {
    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_dt(mut self, policy: DtPolicy) -> Self {
        self.dt_policy = policy;
        self
    }

    pub fn with_rusanov(mut self, rusanov: RusanovConfig) -> Self {
        self.rusanov = rusanov;
        self
    }

    fn validate(&self, params: &AbcdParams) -> Result<()> {
        let th = self.theta;
        if !(0.0..=1.0).contains(&th) {
            return Err(Error::InvalidTheta(th));
        }
        match params.regime() {
            Regime::BothPositive if th != 0.5 && th != 1.0 => return Err(Error::InvalidTheta(th)),
            Regime::MixedOrZero if th != 1.0 && !params.is_free_theta_case() => {
                return Err(Error::InvalidTheta(th))
            }
            _ => {}
        }
        match self.dt_policy {
            DtPolicy::Fixed(dt) if !(dt.is_finite() && dt > 0.0) => {
                return Err(Error::InvalidConfig("fixed time step must be positive"))
            }
            DtPolicy::AdaptiveCfl { safety, cap } => {
                if !(safety.is_finite() && safety > 0.0) {
                    return Err(Error::InvalidConfig("CFL safety factor must be positive"));
                }
                if let Some(c) = cap {
                    if !(c.is_finite() && c > 0.0) {
                        return Err(Error::InvalidConfig("time step cap must be positive"));
                    }
                }
            }
            _ => {}
        }
        match self.rusanov {
            RusanovConfig::Fixed { tau1, tau2 } if !(tau1 > 0.0 && tau2 > 0.0) => {
                return Err(Error::InvalidConfig("fixed Rusanov coefficients must be positive"))
            }
            RusanovConfig::Adaptive { alpha } if !(alpha.is_finite() && alpha > 0.0) => {
                return Err(Error::InvalidConfig("Rusanov margin alpha must be positive"))
            }
            _ => {}
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::InvalidConfig("blow-up threshold must be positive"));
        }
        Ok(())
    }
}

/// Time, fields and step counter of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub eta: GridFunction,
    pub u: GridFunction,
    pub step_index: u64,
}

impl SimState {
    pub fn new(t: f64, eta: GridFunction, u: GridFunction) -> Result<Self> {
        if !eta.grid().same_as(u.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            t,
            eta,
            u,
            step_index: 0,
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            t: 0.0,
            eta: GridFunction::zeros(grid),
            u: GridFunction::zeros(grid),
            step_index: 0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.eta.grid()
    }
}

#[derive(Debug, Clone, Copy)]
enum Terms {
    Full,
    Linear,
}

/// A configured scheme bound to one grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: AbcdParams,
    cfg: SchemeConfig,
    solver: SpectralSolver,
}

impl Stepper {
    pub fn new(params: AbcdParams, cfg: SchemeConfig, grid: Grid) -> Result<Self> {
        params.require_supported()?;
        cfg.validate(&params)?;
        Ok(Self {
            params,
            cfg,
            solver: SpectralSolver::new(grid),
        })
    }

    pub fn params(&self) -> &AbcdParams {
        &self.params
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid {
        self.solver.grid()
    }

    /// `(tau1, tau2)` for the step leaving `state`.
    pub fn rusanov_coefficients(&self, state: &SimState) -> (f64, f64) {
        match self.cfg.rusanov {
            RusanovConfig::Off => (0.0, 0.0),
            RusanovConfig::Fixed { tau1, tau2 } => (tau1, tau2),
            RusanovConfig::Adaptive { alpha } => {
                let t = state.u.linf_norm() + alpha;
                (t, t)
            }
        }
    }

    /// `((1 - sgn b) tau1, (1 - sgn d) tau2)`.
    pub fn viscosity(&self, state: &SimState) -> (f64, f64) {
        let (t1, t2) = self.rusanov_coefficients(state);
        ((1.0 - sgn(self.params.b)) * t1, (1.0 - sgn(self.params.d)) * t2)
    }

    /// Step size leaving `state`, never beyond `remaining`.
    pub fn compute_dt(&self, state: &SimState, remaining: f64) -> f64 {
        let dx = self.grid().dx();
        let dt = match self.cfg.dt_policy {
            DtPolicy::Fixed(dt) => dt,
            DtPolicy::AdaptiveCfl { safety, cap } => {
                let umax = state.u.linf_norm();
                let mut dt = if umax > 0.0 {
                    safety * dx / umax
                } else {
                    cap.unwrap_or(safety * dx)
                };
                if let Some(c) = cap {
                    dt = dt.min(c);
                }
                let (n1, n2) = self.viscosity(state);
                let nu = n1.max(n2);
                if nu > 0.0 {
                    dt = dt.min(safety.min(1.0) * dx / nu);
                }
                dt
            }
        };
        if remaining <= dt * (1.0 + 1e-9) {
            remaining
        } else {
            dt
        }
    }

    /// One step of whichever scheme the regime selects.
    pub fn step(&self, state: &SimState, dt: f64) -> Result<SimState> {
        match self.params.regime() {
            Regime::BothPositive => self.step_theta(state, dt),
            _ => self.step_bd_zero(state, dt),
        }
    }

    /// The theta-scheme for `b, d > 0`.
    pub fn step_theta(&self, state: &SimState, dt: f64) -> Result<SimState> {
        self.expect_regime(Regime::BothPositive)?;
        self.advance(state, dt, Terms::Full, (0.0, 0.0))
    }

    /// The viscous scheme for `bd = 0`; checks the CFL bound first.
    pub fn step_bd_zero(&self, state: &SimState, dt: f64) -> Result<SimState> {
        self.expect_regime(Regime::MixedOrZero)?;
        let nu = self.viscosity(state);
        let lhs = nu.0.max(nu.1) * dt;
        let dx = self.grid().dx();
        if lhs > dx * (1.0 + 1e-12) {
            return Err(Error::CflViolation { lhs, dx });
        }
        self.advance(state, dt, Terms::Full, nu)
    }

    /// The linear part only: no products, no viscosity.
    pub fn step_linear(&self, state: &SimState, dt: f64) -> Result<SimState> {
        self.advance(state, dt, Terms::Linear, (0.0, 0.0))
    }

    fn expect_regime(&self, expected: Regime) -> Result<()> {
        let found = self.params.regime();
        if found == expected {
            Ok(())
        } else {
            Err(Error::RegimeMismatch {
                expected: expected.name(),
                found: found.name(),
            })
        }
    }

    fn advance(&self, state: &SimState, dt: f64, terms: Terms, nu: (f64, f64)) -> Result<SimState> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidConfig("time step must be positive and finite"));
        }
        let AbcdParams { a, b, c, d, .. } = self.params;
        let th = self.cfg.theta;
        let dx = self.grid().dx();
        let eta = &state.eta;
        let u = &state.u;
        let le = eta.laplacian();
        let lu = u.laplacian();
        let explicit = dt * (1.0 - th);

        let mut rhs_e = eta.lin_comb(1.0, &le, -b + dt * 0.5 * nu.0 * dx)?;
        let mut rhs_u = u.lin_comb(1.0, &lu, -d + dt * 0.5 * nu.1 * dx)?;
        if explicit != 0.0 {
            rhs_e.axpy(-explicit, &u.lin_comb(1.0, &lu, a)?.d_center())?;
            rhs_u.axpy(-explicit, &eta.lin_comb(1.0, &le, c)?.d_center())?;
        }
        if let Terms::Full = terms {
            rhs_e.axpy(-dt, &eta.pointwise_mul(u)?.d_center())?;
            rhs_u.axpy(-0.5 * dt, &u.square().d_center())?;
        }

        let spec = CoupledSystemSpec { a, b, c, d, theta: th, dt };
        let (eta1, u1) = self.solver.solve_coupled(&spec, &rhs_e, &rhs_u)?;
        Ok(SimState {
            t: state.t + dt,
            eta: eta1,
            u: u1,
            step_index: state.step_index + 1,
        })
    }

    /// Residuals of both scheme equations, divided by `dt`, when `s0` and `s1`
    /// are inserted as consecutive time levels.
    pub fn defect(&self, s0: &SimState, s1: &SimState, dt: f64) -> Result<(GridFunction, GridFunction)> {
        let AbcdParams { a, b, c, d, .. } = self.params;
        let th = self.cfg.theta;
        let dx = self.grid().dx();
        let nu = self.viscosity(s0);
        let de = s1.eta.sub(&s0.eta)?;
        let du = s1.u.sub(&s0.u)?;
        let flux = |v0: &GridFunction, v1: &GridFunction, k: f64| -> Result<GridFunction> {
            let w0 = v0.lin_comb(1.0, &v0.laplacian(), k)?;
            let w1 = v1.lin_comb(1.0, &v1.laplacian(), k)?;
            Ok(w0.lin_comb(1.0 - th, &w1, th)?.d_center())
        };
        let mut eps_e = de.lin_comb(1.0 / dt, &de.laplacian(), -b / dt)?;
        eps_e = eps_e.add(&flux(&s0.u, &s1.u, a)?)?;
        eps_e = eps_e.add(&s0.eta.pointwise_mul(&s0.u)?.d_center())?;
        eps_e.axpy(-0.5 * nu.0 * dx, &s0.eta.laplacian())?;
        let mut eps_u = du.lin_comb(1.0 / dt, &du.laplacian(), -d / dt)?;
        eps_u = eps_u.add(&flux(&s0.eta, &s1.eta, c)?)?;
        eps_u.axpy(0.5, &s0.u.square().d_center())?;
        eps_u.axpy(-0.5 * nu.1 * dx, &s0.u.laplacian())?;
        Ok((eps_e, eps_u))
    }

    /// Non-finite values or `|eta|_inf` above the threshold.
    pub fn check_blowup(&self, state: &SimState) -> Result<()> {
        if !(state.eta.is_finite() && state.u.is_finite()) {
            return Err(Error::BlowUp {
                t: state.t,
                quantity: "non-finite value",
                value: f64::NAN,
            });
        }
        let m = state.eta.linf_norm();
        if m > self.cfg.blowup_threshold {
            return Err(Error::BlowUp {
                t: state.t,
                quantity: "|eta|_inf",
                value: m,
            });
        }
        Ok(())
    }

    /// Marches to `t_end`, calling `observe` after every step (including a
    /// step that blows up, before the error is returned).
    pub fn march(
        &self,
        mut state: SimState,
        t_end: f64,
        mut observe: impl FnMut(&SimState),
    ) -> Result<SimState> {
        self.march_with(&mut state, t_end, |s| {
            observe(s);
            true
        })?;
        Ok(state)
    }

    /// Like [`Self::march`] but updates `state` in place and stops early
    /// once `observe` returns `false`.
    pub fn march_with(
        &self,
        state: &mut SimState,
        t_end: f64,
        mut observe: impl FnMut(&SimState) -> bool,
    ) -> Result<()> {
        while state.t < t_end {
            let remaining = t_end - state.t;
            let dt = self.compute_dt(state, remaining);
            let last = dt == remaining;
            let mut next = self.step(state, dt)?;
            if last {
                next.t = t_end;
            }
            *state = next;
            let go_on = observe(state);
            self.check_blowup(state)?;
            if !go_on {
                break;
            }
        }
        Ok(())
    }

    /// Linear counterpart of [`Self::march`] with a fixed step.
    pub fn march_linear(
        &self,
        mut state: SimState,
        dt: f64,
        steps: u64,
        mut observe: impl FnMut(&SimState),
    ) -> Result<SimState> {
        for _ in 0..steps {
            state = self.step_linear(&state, dt)?;
            observe(&state);
        }
        Ok(state)
    }
}

/// One theta-scheme step without a stored [`Stepper`].
pub fn step_theta(state: &SimState, params: AbcdParams, cfg: SchemeConfig, dt: f64) -> Result<SimState> {
    Stepper::new(params, cfg, *state.grid())?.step_theta(state, dt)
}

/// One viscous `bd = 0` step without a stored [`Stepper`].
pub fn step_bd_zero(state: &SimState, params: AbcdParams, cfg: SchemeConfig, dt: f64) -> Result<SimState> {
    Stepper::new(params, cfg, *state.grid())?.step_bd_zero(state, dt)
}

/// One linear step without a stored [`Stepper`].
pub fn step_linear(state: &SimState, params: AbcdParams, theta: f64, dt: f64) -> Result<SimState> {
    let cfg = SchemeConfig::default().with_theta(theta).with_rusanov(RusanovConfig::Off);
    Stepper::new(params, cfg, *state.grid())?.step_linear(state, dt)
}
