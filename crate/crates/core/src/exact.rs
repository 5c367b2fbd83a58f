//! Closed-form traveling waves and their finite-volume cell averages.
//!
//! Single-wave families `A`..`F` travel from a centre `x0` (the middle of
//! the domain by default). The collision families `G`..`J` superpose a
//! right-moving and a left-moving member placed symmetrically about the
//! centre so that they meet in the middle. `J` is given by its initial data
//! only, so its members do not translate. `LinearInit` is the `C` profile,
//! scaled, used as initial data for the linear test.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::scheme::{AbcdParams, SimState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    LinearInit,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::A,
        Family::B,
        Family::C,
        Family::D,
        Family::E,
        Family::F,
        Family::G,
        Family::H,
        Family::I,
        Family::J,
        Family::LinearInit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::E => "E",
            Family::F => "F",
            Family::G => "G",
            Family::H => "H",
            Family::I => "I",
            Family::J => "J",
            Family::LinearInit => "linear",
        }
    }

    /// The `(a, b, c, d)` the family solves.
    pub fn abcd(self) -> (f64, f64, f64, f64) {
        match self {
            Family::A | Family::B | Family::G | Family::J => (0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0),
            Family::C | Family::I | Family::LinearInit => (-7.0 / 30.0, 7.0 / 15.0, -2.0 / 5.0, 1.0 / 2.0),
            Family::D => (0.0, 1.0 / 3.0, -1.0 / 3.0, 1.0 / 3.0),
            Family::E => (0.0, 0.0, 0.0, 1.0 / 6.0),
            Family::F => (-1.0 / 6.0, 0.0, 0.0, 1.0 / 2.0),
            Family::H => (0.0, 3.0 / 5.0, 0.0, 0.0),
        }
    }

    fn abcd_label(self) -> &'static str {
        match self {
            Family::A | Family::B | Family::G | Family::J => "(0, 1/6, 0, 1/6)",
            Family::C | Family::I | Family::LinearInit => "(-7/30, 7/15, -2/5, 1/2)",
            Family::D => "(0, 1/3, -1/3, 1/3)",
            Family::E => "(0, 0, 0, 1/6)",
            Family::F => "(-1/6, 0, 0, 1/2)",
            Family::H => "(0, 3/5, 0, 0)",
        }
    }

    pub fn params(self) -> AbcdParams {
        let (a, b, c, d) = self.abcd();
        AbcdParams::new(a, b, c, d).expect("family coefficients are admissible")
    }

    pub fn is_collision(self) -> bool {
        matches!(self, Family::G | Family::H | Family::I | Family::J)
    }

    /// `(C_s, rho)` defaults of the constant-depth families.
    fn default_shape(self) -> (f64, f64) {
        match self {
            Family::B => (2.0, 1.1),
            Family::D => (3.0, 2.0),
            Family::E => (1.0, 2.0),
            _ => (0.0, 0.0),
        }
    }

    fn default_half_separation(self) -> f64 {
        match self {
            Family::G | Family::I => 7.0,
            Family::H => 5.0,
            Family::J => 67.0,
            _ => 0.0,
        }
    }

    pub fn parse(name: &str) -> Option<Family> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(name))
    }
}

/// One translating profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub start: f64,
    pub velocity: f64,
    /// `+1` for the right-moving member of a pair, `-1` for the left-moving one.
    pub direction: f64,
}

/// A traveling-wave family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TravelingWaveSpec {
    pub family: Family,
    /// Initial crest of a single wave, midpoint of a colliding pair.
    pub center: f64,
    /// Distance from `center` to each crest of a colliding pair.
    pub half_separation: f64,
    pub cs: f64,
    pub rho: f64,
    /// Overall scale of `LinearInit`.
    pub amplitude: f64,
    /// Keep only the member of a pair moving in this direction.
    pub solo: Option<f64>,
}

#[inline]
fn sech2(x: f64) -> f64 {
    let s = 1.0 / libm::cosh(x);
    s * s
}

impl TravelingWaveSpec {
    pub fn new(family: Family, center: f64) -> Self {
        let (cs, rho) = family.default_shape();
        Self {
            family,
            center,
            half_separation: family.default_half_separation(),
            cs,
            rho,
            amplitude: 1.0,
            solo: None,
        }
    }

    /// Centred on the middle of `grid`.
    pub fn centered(family: Family, grid: &Grid) -> Self {
        Self::new(family, grid.midpoint())
    }

    /// Checks that `params` are the family's coefficients.
    pub fn for_params(family: Family, params: &AbcdParams, center: f64) -> Result<Self> {
        let (a, b, c, d) = family.abcd();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12;
        if close(params.a, a) && close(params.b, b) && close(params.c, c) && close(params.d, d) {
            Ok(Self::new(family, center))
        } else {
            Err(Error::FamilyParamsMismatch {
                family: family.name(),
                expected: family.abcd_label(),
            })
        }
    }

    pub fn with_shape(mut self, cs: f64, rho: f64) -> Self {
        self.cs = cs;
        self.rho = rho;
        self
    }

    pub fn with_half_separation(mut self, h: f64) -> Self {
        self.half_separation = h;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// The same pair with only the member moving in `direction` (`+1` or `-1`).
    pub fn solo(mut self, direction: f64) -> Self {
        self.solo = Some(direction);
        self
    }

    pub fn params(&self) -> AbcdParams {
        self.family.params()
    }

    /// Speed of a right-moving member (the sign is carried by the member).
    fn speed(&self) -> f64 {
        match self.family {
            Family::A | Family::G => 2.5,
            Family::B | Family::D | Family::E => self.cs,
            Family::C | Family::I | Family::LinearInit => 5.0 * libm::sqrt(2.0) / 6.0,
            Family::F => -1.0 / libm::sqrt(15.0),
            Family::H => libm::sqrt(10.0) / 2.0,
            Family::J => 0.0,
        }
    }

    /// The translating members.
    pub fn members(&self) -> Vec<Member> {
        let c = self.speed();
        if self.family.is_collision() {
            let h = self.half_separation;
            let mut pair = alloc::vec![
                Member { start: self.center - h, velocity: c, direction: 1.0 },
                Member { start: self.center + h, velocity: -c, direction: -1.0 },
            ];
            if let Some(dir) = self.solo {
                pair.retain(|m| m.direction == dir);
            }
            pair
        } else {
            alloc::vec![Member { start: self.center, velocity: c, direction: 1.0 }]
        }
    }

    /// Exact crest position of a single wave at time `t`.
    pub fn crest_position(&self, t: f64) -> f64 {
        self.center + self.speed() * t
    }

    /// `(eta, u)` of one member at offset `xi` from its crest.
    fn profile(&self, xi: f64, dir: f64) -> (f64, f64) {
        match self.family {
            Family::A | Family::G => {
                let s = sech2(3.0 / libm::sqrt(10.0) * xi);
                (7.5 * s - 11.25 * s * s, dir * 7.5 * s)
            }
            Family::B | Family::E => {
                let (cs, rho) = (self.cs, self.rho);
                let s = sech2(0.5 * libm::sqrt(rho) * xi);
                (-1.0, cs * (1.0 - rho / 6.0) + 0.5 * cs * rho * s)
            }
            Family::D => {
                let (cs, rho) = (self.cs, self.rho);
                let s = sech2(0.5 * libm::sqrt(rho) * xi);
                (-1.0, (1.0 - rho / 3.0) * cs + cs * rho * s)
            }
            Family::C | Family::I | Family::LinearInit => {
                let s = sech2(0.5 * libm::sqrt(5.0 / 7.0) * xi);
                let k = if self.family == Family::LinearInit { self.amplitude } else { 1.0 };
                (k * 0.375 * s, k * dir * s / (2.0 * libm::sqrt(2.0)))
            }
            Family::F => {
                let s = sech2(0.5 * libm::sqrt(7.0) * xi);
                (-1.75 * s, -3.5 * libm::sqrt(0.6) * s)
            }
            Family::H => {
                let s = sech2(0.5 * xi);
                (7.5 * s - 11.25 * s * s, dir * 1.5 * libm::sqrt(10.0) * s)
            }
            Family::J => {
                let s = sech2(0.5 * libm::sqrt(1.2) * xi);
                (0.5 * s, dir * (0.5 * s - s * s / 16.0))
            }
        }
    }

    /// Pointwise exact values on the whole line.
    pub fn eval(&self, t: f64, x: f64) -> (f64, f64) {
        self.eval_with(t, x, None)
    }

    /// Pointwise values on a periodic domain of length `period`; each
    /// member's offset is wrapped into `[-period/2, period/2)`.
    pub fn eval_periodic(&self, t: f64, x: f64, period: f64) -> (f64, f64) {
        self.eval_with(t, x, Some(period))
    }

    fn eval_with(&self, t: f64, x: f64, period: Option<f64>) -> (f64, f64) {
        let mut eta = 0.0;
        let mut u = 0.0;
        for m in self.members() {
            let mut xi = x - (m.start + m.velocity * t);
            if let Some(p) = period {
                xi = wrap(xi, p);
            }
            let (e, v) = self.profile(xi, m.direction);
            eta += e;
            u += v;
        }
        (eta, u)
    }
}

fn wrap(offset: f64, period: f64) -> f64 {
    let half = 0.5 * period;
    let mut r = libm::fmod(offset + half, period);
    if r < 0.0 {
        r += period;
    }
    r - half
}

/// Gauss-Legendre points per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellAverageConfig {
    points: usize,
}

impl Default for CellAverageConfig {
    fn default() -> Self {
        Self { points: 5 }
    }
}

impl CellAverageConfig {
    pub fn new(points: usize) -> Result<Self> {
        if points < 3 {
            return Err(Error::InvalidConfig("at least 3 quadrature points per cell are required"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> usize {
        self.points
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let pi = core::f64::consts::PI;
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, refined by Newton on P_n
        let mut x = libm::cos(pi * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cell averages of the exact solution at time `t` (periodic evaluation).
pub fn reference_state(spec: &TravelingWaveSpec, grid: &Grid, t: f64, cfg: &CellAverageConfig) -> SimState {
    let (nodes, weights) = gauss_legendre(cfg.points());
    let n = grid.cells();
    let dx = grid.dx();
    let period = grid.length();
    let mut eta = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    for j in 0..n {
        let left = grid.cell_left(j);
        let mut se = 0.0;
        let mut su = 0.0;
        for (xq, wq) in nodes.iter().zip(&weights) {
            let x = left + 0.5 * dx * (1.0 + xq);
            let (e, v) = spec.eval_periodic(t, x, period);
            se += 0.5 * wq * e;
            su += 0.5 * wq * v;
        }
        eta.push(se);
        u.push(su);
    }
    SimState {
        t,
        eta: GridFunction::new(*grid, eta).expect("one value per cell"),
        u: GridFunction::new(*grid, u).expect("one value per cell"),
        step_index: 0,
    }
}

/// Cell averages at `t = 0`.
pub fn cell_average_initial(spec: &TravelingWaveSpec, grid: &Grid, cfg: &CellAverageConfig) -> SimState {
    reference_state(spec, grid, 0.0, cfg)
}

/// Space-time averages over each cell and `[t0, t1]`, labelled with time `t0`.
pub fn space_time_average(
    spec: &TravelingWaveSpec,
    grid: &Grid,
    t0: f64,
    t1: f64,
    cfg: &CellAverageConfig,
) -> SimState {
    let (nodes, weights) = gauss_legendre(cfg.points());
    let mut acc = SimState::zeros(*grid);
    acc.t = t0;
    for (tq, wq) in nodes.iter().zip(&weights) {
        let t = t0 + 0.5 * (t1 - t0) * (1.0 + tq);
        let s = reference_state(spec, grid, t, cfg);
        acc.eta.axpy(0.5 * wq, &s.eta).expect("same grid");
        acc.u.axpy(0.5 * wq, &s.u).expect("same grid");
    }
    acc
}

/// Superposed colliding pair at `t = 0`.
pub fn collision_initial(spec: &TravelingWaveSpec, grid: &Grid, cfg: &CellAverageConfig) -> Result<SimState> {
    if !spec.family.is_collision() {
        return Err(Error::InvalidExperiment("collision data needs one of the families G, H, I, J"));
    }
    Ok(cell_average_initial(spec, grid, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::Fft;
    use num_complex::Complex64;

    fn spec(f: Family) -> TravelingWaveSpec {
        TravelingWaveSpec::new(f, 20.0)
    }

    #[test]
    fn quadrature_rules_are_exact_on_polynomials() {
        for n in 3..=9 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let num: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((num - exact).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
        assert!(CellAverageConfig::new(2).is_err());
    }

    #[test]
    fn crest_values() {
        let (e, u) = spec(Family::A).eval(0.8, 20.0 + 2.5 * 0.8);
        assert!((u - 7.5).abs() < 1e-14);
        assert!((e + 3.75).abs() < 1e-14);
        for x in [-3.0, 0.0, 17.5] {
            assert_eq!(spec(Family::B).eval(1.3, x).0, -1.0);
        }
    }

    #[test]
    fn cosh_form_of_case_a_agrees() {
        let s = spec(Family::A);
        for x in [12.0, 18.3, 20.0, 21.1, 26.0] {
            let xi = x - 20.0;
            let y = 3.0 / libm::sqrt(10.0) * xi;
            let sech = 1.0 / libm::cosh(y);
            let cosh_form = 3.75 * (-2.0 + libm::cosh(3.0 * libm::sqrt(0.4) * xi)) * sech.powi(4);
            assert!((s.eval(0.0, x).0 - cosh_form).abs() < 1e-13);
        }
    }

    #[test]
    fn params_mismatch_is_rejected() {
        let bbm = AbcdParams::new(0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0).unwrap();
        assert!(TravelingWaveSpec::for_params(Family::A, &bbm, 20.0).is_ok());
        assert!(matches!(
            TravelingWaveSpec::for_params(Family::E, &bbm, 20.0),
            Err(Error::FamilyParamsMismatch { family: "E", .. })
        ));
    }

    #[test]
    fn constant_profile_averages_exactly() {
        let g = Grid::new(40.0, 64).unwrap();
        let s = cell_average_initial(&spec(Family::B), &g, &CellAverageConfig::default());
        assert!(s.eta.values().iter().all(|v| *v == -1.0));
    }

    /// Composite Boole rule on `points` equispaced nodes (`points - 1` divisible by 4).
    fn composite_boole(f: impl Fn(f64) -> f64, a: f64, b: f64, points: usize) -> f64 {
        let m = points - 1;
        assert_eq!(m % 4, 0);
        let h = (b - a) / m as f64;
        let mut acc = 0.0;
        for blk in (0..m).step_by(4) {
            let x0 = a + blk as f64 * h;
            acc += 7.0 * f(x0) + 32.0 * f(x0 + h) + 12.0 * f(x0 + 2.0 * h) + 32.0 * f(x0 + 3.0 * h) + 7.0 * f(x0 + 4.0 * h);
        }
        acc * 2.0 * h / 45.0 / (b - a)
    }

    #[test]
    fn crest_cell_matches_composite_oracle() {
        let cfg = CellAverageConfig::default();
        let g = Grid::new(40.0, 640).unwrap();
        for (fam, t) in [(Family::E, 0.0), (Family::F, 2.0)] {
            let sp = TravelingWaveSpec::centered(fam, &g);
            let st = reference_state(&sp, &g, t, &cfg);
            let crest = sp.crest_position(t);
            let j = ((crest - g.origin()) / g.dx()) as usize;
            let left = g.cell_left(j);
            let oracle_u = composite_boole(|x| sp.eval(t, x).1, left, left + g.dx(), 21);
            let oracle_e = composite_boole(|x| sp.eval(t, x).0, left, left + g.dx(), 21);
            assert!((st.u.values()[j] - oracle_u).abs() <= 1e-12 * oracle_u.abs());
            assert!((st.eta.values()[j] - oracle_e).abs() <= 1e-12 * oracle_e.abs());
        }
    }

    #[test]
    fn reference_translates_with_the_wave() {
        let cfg = CellAverageConfig::default();
        let g = Grid::new(40.0, 320).unwrap();
        let sp = TravelingWaveSpec::centered(Family::A, &g);
        let t = 1.37;
        let moved = reference_state(&sp, &g, t, &cfg);
        let shifted_grid = Grid::with_origin(-2.5 * t, 40.0, 320).unwrap();
        let base = reference_state(&sp, &shifted_grid, 0.0, &cfg);
        for (x, y) in moved.u.values().iter().zip(base.u.values()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(cell_average_initial(&sp, &g, &cfg), reference_state(&sp, &g, 0.0, &cfg));
    }

    #[test]
    fn space_time_average_differs_at_first_order() {
        let cfg = CellAverageConfig::default();
        let g = Grid::new(40.0, 320).unwrap();
        let sp = TravelingWaveSpec::centered(Family::C, &g);
        let t = 1.0;
        let base = reference_state(&sp, &g, t, &cfg);
        let diff = |dt: f64| {
            let avg = space_time_average(&sp, &g, t, t + dt, &cfg);
            avg.u.sub(&base.u).unwrap().l2_norm()
        };
        let r = diff(0.02) / diff(0.01);
        assert!((r - 2.0).abs() < 0.05, "ratio {r}");
    }

    #[test]
    fn collision_data_symmetry_and_crests() {
        let cfg = CellAverageConfig::default();
        let g = Grid::with_origin(-14.0, 28.0, 1400).unwrap();
        let sp = TravelingWaveSpec::new(Family::G, 0.0);
        let s = collision_initial(&sp, &g, &cfg).unwrap();
        let n = g.cells();
        for j in 0..n / 2 {
            let (a, b) = (s.eta.values()[j], s.eta.values()[n - 1 - j]);
            assert!((a - b).abs() < 1e-12);
            let (a, b) = (s.u.values()[j], s.u.values()[n - 1 - j]);
            assert!((a + b).abs() < 1e-12);
        }
        assert!((sp.eval(0.0, 7.0).0 + 3.75).abs() < 1e-9);
        let j = TravelingWaveSpec::new(Family::J, 0.0);
        assert!((j.eval(0.0, 67.0).1.abs() - (0.5 - 1.0 / 16.0)).abs() < 1e-12);
        assert!(collision_initial(&spec(Family::A), &g, &cfg).is_err());
    }

    /// Spectral derivative of a periodic sample.
    fn spectral_derivative(v: &[f64], length: f64, order: u32) -> Vec<f64> {
        let n = v.len();
        let plan = Fft::new(n);
        let mut z: Vec<Complex64> = v.iter().map(|x| Complex64::new(*x, 0.0)).collect();
        plan.forward(&mut z);
        for (k, zk) in z.iter_mut().enumerate() {
            let kk = if 2 * k < n { k as f64 } else if 2 * k == n { 0.0 } else { k as f64 - n as f64 };
            let ik = Complex64::new(0.0, 2.0 * core::f64::consts::PI * kk / length);
            // modes above n/8 carry only roundoff, which the third derivative would amplify
            if kk.abs() > (n / 8) as f64 {
                *zk = Complex64::new(0.0, 0.0);
            } else {
                *zk *= ik.powu(order);
            }
        }
        plan.inverse(&mut z);
        z.iter().map(|c| c.re).collect()
    }

    #[test]
    fn families_solve_the_continuous_system() {
        let n = 1 << 14;
        // wide enough that the periodic seam sits deep in the tails
        let length = 80.0;
        for fam in [Family::A, Family::B, Family::C, Family::D, Family::E, Family::F] {
            let sp = TravelingWaveSpec::new(fam, 40.0);
            let (a, b, c, d) = fam.abcd();
            let speed = sp.speed();
            let xs: Vec<f64> = (0..n).map(|j| j as f64 * length / n as f64).collect();
            let eta: Vec<f64> = xs.iter().map(|x| sp.eval(0.0, *x).0).collect();
            let u: Vec<f64> = xs.iter().map(|x| sp.eval(0.0, *x).1).collect();
            let der = |v: &[f64], k| spectral_derivative(v, length, k);
            let (ex, exxx) = (der(&eta, 1), der(&eta, 3));
            let (ux, uxxx) = (der(&u, 1), der(&u, 3));
            let eu: Vec<f64> = eta.iter().zip(&u).map(|(p, q)| p * q).collect();
            let uu: Vec<f64> = u.iter().map(|q| 0.5 * q * q).collect();
            let (eux, uux) = (der(&eu, 1), der(&uu, 1));
            let mut r1: f64 = 0.0;
            let mut r2: f64 = 0.0;
            for j in 0..n {
                // eta_t = -speed eta_x for a profile traveling at `speed`
                let et = -speed * ex[j];
                let etxx = -speed * exxx[j];
                let ut = -speed * ux[j];
                let utxx = -speed * uxxx[j];
                r1 = r1.max((et - b * etxx + ux[j] + a * uxxx[j] + eux[j]).abs());
                r2 = r2.max((ut - d * utxx + ex[j] + c * exxx[j] + uux[j]).abs());
            }
            assert!(r1 < 1e-6 && r2 < 1e-6, "family {}: residuals {r1:e} {r2:e}", fam.name());
        }
    }
}
