//! Drivers for the numerical studies: convergence ladders, linear energy
//! conservation, consistency defects, long-time fidelity of single waves
//! and head-on collisions.
//!
//! Everything here is sequential and deterministic. Independent pieces
//! (ladder rows, the collided run and its two solo runs) are exposed
//! separately so a caller can run them concurrently and assemble the
//! result with [`assemble_report`] or [`assemble_collision`].

use alloc::vec::Vec;

use crate::energy::{energy, energy_error, EnergyKind};
use crate::error::{Error, Result};
use crate::exact::{cell_average_initial, reference_state, CellAverageConfig, TravelingWaveSpec};
use crate::grid::{Grid, GridFunction};
use crate::presets::Preset;
use crate::scheme::{AbcdParams, DtPolicy, RusanovConfig, SchemeConfig, SimState, Stepper, DEFAULT_BLOWUP_THRESHOLD};

// ---------------------------------------------------------------------------
// convergence

/// Time-step rule of a convergence ladder, resolved per row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LadderDt {
    /// `dt = dx / |u|_inf`, limited by the viscous CFL bound.
    Adaptive,
    /// `dt = dx`.
    Dx,
    /// `dt = dx^2`.
    DxSquared,
    Fixed(f64),
}

impl LadderDt {
    pub fn policy(self, dx: f64) -> DtPolicy {
        match self {
            LadderDt::Adaptive => DtPolicy::adaptive(),
            LadderDt::Dx => DtPolicy::Fixed(dx),
            LadderDt::DxSquared => DtPolicy::Fixed(dx * dx),
            LadderDt::Fixed(dt) => DtPolicy::Fixed(dt),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LadderDt::Adaptive => "adaptive",
            LadderDt::Dx => "dx",
            LadderDt::DxSquared => "dx^2",
            LadderDt::Fixed(_) => "fixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceSetup {
    pub spec: TravelingWaveSpec,
    pub origin: f64,
    pub length: f64,
    pub t_final: f64,
    pub theta: f64,
    pub rusanov: RusanovConfig,
    pub dt: LadderDt,
    pub energy: EnergyKind,
    pub quadrature: CellAverageConfig,
}

impl ConvergenceSetup {
    pub fn from_preset(p: &Preset) -> Self {
        Self {
            spec: p.spec(),
            origin: p.origin,
            length: p.length,
            t_final: p.t_final,
            theta: p.scheme.theta,
            rusanov: p.scheme.rusanov,
            dt: LadderDt::Adaptive,
            energy: EnergyKind::General,
            quadrature: CellAverageConfig::default(),
        }
    }

    pub fn grid(&self, cells: usize) -> Result<Grid> {
        Grid::with_origin(self.origin, self.length, cells)
    }

    pub fn scheme(&self, grid: &Grid) -> SchemeConfig {
        SchemeConfig {
            theta: self.theta,
            dt_policy: self.dt.policy(grid.dx()),
            rusanov: self.rusanov,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowOutcome {
    /// Square root of the energy of the error at the final time.
    Error(f64),
    BlowUp { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub dx: f64,
    pub outcome: RowOutcome,
    /// `log2(error_coarser / error_this)`; absent on the first row, next to a
    /// blow-up and when either error is zero.
    pub rate: Option<f64>,
    pub steps: u64,
}

impl ConvergenceRow {
    pub fn error(&self) -> Option<f64> {
        match self.outcome {
            RowOutcome::Error(e) => Some(e),
            RowOutcome::BlowUp { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub setup: ConvergenceSetup,
    pub params: AbcdParams,
    /// Ordered by decreasing `dx`.
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rate).collect()
    }
}

/// A ladder must be non-empty, increasing, and double at every step.
pub fn check_ladder(cells: &[usize]) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::InvalidExperiment("empty ladder"));
    }
    if cells.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::InvalidExperiment("ladder cell counts must double at every step"));
    }
    Ok(())
}

/// One resolution: cell-average start, march to `T`, energy error against
/// the exact cell averages at `T`. A blow-up is recorded, not raised.
pub fn run_convergence_row(setup: &ConvergenceSetup, cells: usize) -> Result<ConvergenceRow> {
    let grid = setup.grid(cells)?;
    let params = setup.spec.params();
    let stepper = Stepper::new(params, setup.scheme(&grid), grid)?;
    let mut state = cell_average_initial(&setup.spec, &grid, &setup.quadrature);
    let outcome = match stepper.march_with(&mut state, setup.t_final, |_| true) {
        Ok(()) => {
            let reference = reference_state(&setup.spec, &grid, setup.t_final, &setup.quadrature);
            RowOutcome::Error(energy_error(setup.energy, &params, &state, &reference)?)
        }
        Err(Error::BlowUp { t, .. }) => RowOutcome::BlowUp { t },
        Err(e) => return Err(e),
    };
    Ok(ConvergenceRow {
        cells,
        dx: grid.dx(),
        outcome,
        rate: None,
        steps: state.step_index,
    })
}

/// Orders rows by resolution, checks the halving invariant and fills in rates.
pub fn assemble_report(setup: &ConvergenceSetup, mut rows: Vec<ConvergenceRow>) -> Result<ConvergenceReport> {
    rows.sort_by_key(|r| r.cells);
    let cells: Vec<usize> = rows.iter().map(|r| r.cells).collect();
    check_ladder(&cells)?;
    for i in 0..rows.len() {
        rows[i].rate = None;
        if i > 0 {
            if let (Some(prev), Some(this)) = (rows[i - 1].error(), rows[i].error()) {
                if prev > 0.0 && this > 0.0 {
                    rows[i].rate = Some(libm::log2(prev / this));
                }
            }
        }
    }
    Ok(ConvergenceReport {
        setup: *setup,
        params: setup.spec.params(),
        rows,
    })
}

pub fn run_convergence(setup: &ConvergenceSetup, cells: &[usize]) -> Result<ConvergenceReport> {
    check_ladder(cells)?;
    let rows = cells
        .iter()
        .map(|&n| run_convergence_row(setup, n))
        .collect::<Result<Vec<_>>>()?;
    assemble_report(setup, rows)
}

// ---------------------------------------------------------------------------
// linear energy

/// Largest `|E(n) - E(0)| / E(0)` of the general energy of `(eta, u)` along
/// the linear scheme with fixed step `dt`; zero data gives zero.
pub fn run_linear_conservation(
    params: AbcdParams,
    theta: f64,
    initial: &SimState,
    dt: f64,
    t_final: f64,
) -> Result<f64> {
    let cfg = SchemeConfig {
        theta,
        dt_policy: DtPolicy::Fixed(dt),
        rusanov: RusanovConfig::Off,
        blowup_threshold: f64::INFINITY,
    };
    let stepper = Stepper::new(params, cfg, *initial.grid())?;
    let e0 = energy(EnergyKind::General, &params, &initial.eta, &initial.u)?;
    let steps = libm::round(t_final / dt) as u64;
    let mut drift: f64 = 0.0;
    let mut failure = None;
    stepper.march_linear(initial.clone(), dt, steps, |s| {
        match energy(EnergyKind::General, &params, &s.eta, &s.u) {
            Ok(e) if e0 > 0.0 => drift = drift.max((e - e0).abs() / e0),
            Ok(_) => {}
            Err(err) => failure = Some(err),
        }
    })?;
    match failure {
        Some(err) => Err(err),
        None => Ok(drift),
    }
}

// ---------------------------------------------------------------------------
// consistency

/// `l2` norms of the scheme defects when the exact cell averages at `t = 0`
/// and `t = dt` are inserted as two consecutive time levels.
pub fn consistency_residual(
    spec: &TravelingWaveSpec,
    grid: &Grid,
    scheme: SchemeConfig,
    dt: f64,
    quadrature: &CellAverageConfig,
) -> Result<(f64, f64)> {
    let stepper = Stepper::new(spec.params(), scheme, *grid)?;
    let s0 = reference_state(spec, grid, 0.0, quadrature);
    let s1 = reference_state(spec, grid, dt, quadrature);
    let (e1, e2) = stepper.defect(&s0, &s1, dt)?;
    Ok((e1.l2_norm(), e2.l2_norm()))
}

// ---------------------------------------------------------------------------
// crest tracking

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crest {
    pub position: f64,
    /// Signed field value at the crest.
    pub amplitude: f64,
}

/// Extremum of `polarity * v` refined by a parabola through the extremal
/// cell and its two neighbours. With `window = Some((start, width))` only
/// cells whose centre lies in `[start, start + width)` (periodically) are
/// candidates.
pub fn locate_crest(v: &GridFunction, polarity: f64, window: Option<(f64, f64)>) -> Option<Crest> {
    let grid = v.grid();
    let vals = v.values();
    let period = grid.length();
    let mut best: Option<(usize, f64)> = None;
    for (j, &x) in vals.iter().enumerate() {
        if let Some((start, width)) = window {
            let d = grid.cell_center(j) - start;
            let rel = d - period * libm::floor(d / period);
            if rel >= width {
                continue;
            }
        }
        let s = polarity * x;
        if !s.is_finite() {
            return None;
        }
        if best.map_or(true, |(_, b)| s > b) {
            best = Some((j, s));
        }
    }
    let (i, _) = best?;
    let (a, b, c) = (v.at(i as isize - 1), vals[i], v.at(i as isize + 1));
    let curv = polarity * (a - 2.0 * b + c);
    let mut s = if curv < 0.0 { 0.5 * (a - c) / (a - 2.0 * b + c) } else { 0.0 };
    s = s.clamp(-0.5, 0.5);
    Some(Crest {
        position: grid.cell_center(i) + s * grid.dx(),
        amplitude: b - 0.25 * (a - c) * s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub t: f64,
    pub position: f64,
    pub amplitude: f64,
}

/// Crest history of one wave. Positions are unwrapped, so they move
/// continuously even when the wave crosses the periodic seam.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WaveTrack {
    pub points: Vec<TrackPoint>,
}

impl WaveTrack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, crest: Crest, period: f64) {
        let mut x = crest.position;
        if let Some(last) = self.points.last() {
            x += period * libm::round((last.position - x) / period);
        }
        self.points.push(TrackPoint {
            t,
            position: x,
            amplitude: crest.amplitude,
        });
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Option<&TrackPoint> {
        self.points.first()
    }

    pub fn last(&self) -> Option<&TrackPoint> {
        self.points.last()
    }

    /// Mean velocity between the first and last points.
    pub fn mean_velocity(&self) -> Option<f64> {
        let (a, b) = (self.first()?, self.last()?);
        if b.t > a.t {
            Some((b.position - a.position) / (b.t - a.t))
        } else {
            None
        }
    }

    /// Least-squares slope of position against time.
    pub fn velocity_fit(&self) -> Option<f64> {
        let n = self.points.len();
        if n < 2 {
            return None;
        }
        let nf = n as f64;
        let mt = self.points.iter().map(|p| p.t).sum::<f64>() / nf;
        let mx = self.points.iter().map(|p| p.position).sum::<f64>() / nf;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for p in &self.points {
            sxy += (p.t - mt) * (p.position - mx);
            sxx += (p.t - mt) * (p.t - mt);
        }
        if sxx > 0.0 {
            Some(sxy / sxx)
        } else {
            None
        }
    }

    fn between(&self, t0: f64, t1: f64) -> impl Iterator<Item = &TrackPoint> {
        self.points.iter().filter(move |p| p.t >= t0 && p.t <= t1)
    }

    /// Largest `|amplitude|` with `t` in `[t0, t1]`.
    pub fn max_amplitude_between(&self, t0: f64, t1: f64) -> Option<f64> {
        self.between(t0, t1).map(|p| p.amplitude.abs()).reduce(f64::max)
    }

    /// Mean `|amplitude|` with `t` in `[t0, t1]`.
    pub fn mean_amplitude_between(&self, t0: f64, t1: f64) -> Option<f64> {
        let (n, s) = self
            .between(t0, t1)
            .fold((0usize, 0.0), |(n, s), p| (n + 1, s + p.amplitude.abs()));
        if n > 0 {
            Some(s / n as f64)
        } else {
            None
        }
    }
}

// ---------------------------------------------------------------------------
// shared marching with snapshots

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUpInfo {
    pub t: f64,
    pub quantity: &'static str,
    pub value: f64,
}

struct Marched {
    state: SimState,
    snapshots: Vec<SimState>,
    blow_up: Option<BlowUpInfo>,
}

/// Marches to `t_final`, calling `record` on the initial state and on every
/// finite state. `snapshots` evenly spaced states are kept, plus the initial
/// one; a blown-up state is kept as the last snapshot.
fn drive(
    stepper: &Stepper,
    mut state: SimState,
    t_final: f64,
    snapshots: usize,
    mut record: impl FnMut(&SimState),
) -> Result<Marched> {
    let mut snaps = Vec::new();
    let mut next = 0usize;
    let take = |s: &SimState, snaps: &mut Vec<SimState>, next: &mut usize| {
        if snapshots == 0 {
            return;
        }
        let due = t_final * *next as f64 / snapshots as f64;
        if s.t >= due - 1e-9 * t_final.max(1.0) {
            snaps.push(s.clone());
            while *next <= snapshots && t_final * *next as f64 / snapshots as f64 <= s.t + 1e-9 * t_final.max(1.0) {
                *next += 1;
            }
        }
    };
    record(&state);
    take(&state, &mut snaps, &mut next);
    let res = stepper.march_with(&mut state, t_final, |s| {
        if s.eta.is_finite() && s.u.is_finite() {
            record(s);
        }
        take(s, &mut snaps, &mut next);
        true
    });
    let blow_up = match res {
        Ok(()) => None,
        Err(Error::BlowUp { t, quantity, value }) => {
            if snaps.last().map_or(true, |s| s.t != state.t) {
                snaps.push(state.clone());
            }
            Some(BlowUpInfo { t, quantity, value })
        }
        Err(e) => return Err(e),
    };
    Ok(Marched {
        state,
        snapshots: snaps,
        blow_up,
    })
}

// ---------------------------------------------------------------------------
// collisions

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionSetup {
    pub spec: TravelingWaveSpec,
    pub grid: Grid,
    pub scheme: SchemeConfig,
    pub t_final: f64,
    pub quadrature: CellAverageConfig,
    pub snapshots: usize,
}

/// Default number of evenly spaced snapshots per run.
pub const DEFAULT_SNAPSHOTS: usize = 50;

impl CollisionSetup {
    pub fn from_preset(p: &Preset) -> Result<Self> {
        if !p.family.is_collision() {
            return Err(Error::InvalidExperiment("collision runs need one of the families G, H, I, J"));
        }
        Ok(Self {
            spec: p.spec(),
            grid: p.grid()?,
            scheme: p.scheme,
            t_final: p.t_final,
            quadrature: CellAverageConfig::default(),
            snapshots: DEFAULT_SNAPSHOTS,
        })
    }
}

/// A run with crest tracks. A pair is tracked in the two half-domains on
/// either side of the pair's centre (`tracks[0]` below it, `tracks[1]`
/// above); a solo run has one global track.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedRun {
    pub tracks: Vec<WaveTrack>,
    /// `(t, max eta)` after every step, starting at `t = 0`.
    pub peak: Vec<(f64, f64)>,
    pub snapshots: Vec<SimState>,
    pub final_state: SimState,
    pub blow_up: Option<BlowUpInfo>,
}

/// Marches `spec` (the setup's pair or one member of it) and tracks crests.
pub fn run_tracked(setup: &CollisionSetup, spec: &TravelingWaveSpec) -> Result<TrackedRun> {
    let grid = setup.grid;
    let stepper = Stepper::new(spec.params(), setup.scheme, grid)?;
    let init = cell_average_initial(spec, &grid, &setup.quadrature);
    let pair = spec.members().len() == 2;
    let period = grid.length();
    let half = 0.5 * period;
    let mut tracks = alloc::vec![WaveTrack::new(); if pair { 2 } else { 1 }];
    let mut peak = Vec::new();
    let m = drive(&stepper, init, setup.t_final, setup.snapshots, |s| {
        peak.push((s.t, s.eta.values().iter().copied().fold(f64::NEG_INFINITY, f64::max)));
        if pair {
            let lo = locate_crest(&s.eta, 1.0, Some((spec.center - half, half)));
            let hi = locate_crest(&s.eta, 1.0, Some((spec.center, half)));
            if let (Some(lo), Some(hi)) = (lo, hi) {
                tracks[0].push(s.t, lo, period);
                tracks[1].push(s.t, hi, period);
            }
        } else if let Some(c) = locate_crest(&s.eta, 1.0, None) {
            tracks[0].push(s.t, c, period);
        }
    })?;
    Ok(TrackedRun {
        tracks,
        peak,
        snapshots: m.snapshots,
        final_state: m.state,
        blow_up: m.blow_up,
    })
}

/// Scalar diagnostics of a collision; per-wave arrays are ordered
/// (right-moving, left-moving).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionSummary {
    /// Time of the largest `max eta`; absent when that is the first or last sample.
    pub collision_time: Option<f64>,
    pub peak_amplitude: f64,
    /// Largest crest amplitude over `[0.5, 0.8] * collision_time`.
    pub pre_amplitudes: [Option<f64>; 2],
    /// Mean crest amplitude over the last tenth of the time after the collision.
    pub post_amplitudes: [Option<f64>; 2],
    /// `peak / (sum of pre-collision amplitudes) - 1`.
    pub peak_excess: Option<f64>,
    /// Final crest position minus that of the solo run.
    pub phase_shifts: [Option<f64>; 2],
    /// Relative difference of the mean velocities against the solo runs.
    pub velocity_errors: [Option<f64>; 2],
    pub blow_up: Option<BlowUpInfo>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionOutcome {
    pub summary: CollisionSummary,
    /// Right-moving and left-moving crest tracks.
    pub tracks: [WaveTrack; 2],
    pub run: TrackedRun,
}

fn collision_index(peak: &[(f64, f64)]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &(_, p)) in peak.iter().enumerate() {
        if best.map_or(true, |(_, b)| p > b) {
            best = Some((i, p));
        }
    }
    let (i, _) = best?;
    if i == 0 || i + 1 == peak.len() {
        None
    } else {
        Some(i)
    }
}

/// Combines the collided pair run with optional solo runs of the
/// right-moving and left-moving members.
pub fn assemble_collision(
    setup: &CollisionSetup,
    run: TrackedRun,
    solo_right: Option<&TrackedRun>,
    solo_left: Option<&TrackedRun>,
) -> CollisionOutcome {
    let ci = collision_index(&run.peak);
    let tc = ci.map(|i| run.peak[i].0);
    let peak_amplitude = run.peak.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);

    // before the collision the right-moving crest lies below the centre
    let mut tracks = [WaveTrack::new(), WaveTrack::new()];
    if run.tracks.len() == 2 {
        for w in 0..2 {
            for (below, above) in run.tracks[0].points.iter().zip(&run.tracks[1].points) {
                let before = tc.map_or(true, |t| below.t <= t);
                let p = match (w, before) {
                    (0, true) | (1, false) => below,
                    _ => above,
                };
                let crest = Crest {
                    position: p.position,
                    amplitude: p.amplitude,
                };
                tracks[w].push(p.t, crest, setup.grid.length());
            }
        }
    }

    let end = run.final_state.t;
    let completed = run.blow_up.is_none();
    let mut pre = [None, None];
    let mut post = [None, None];
    let mut shifts = [None, None];
    let mut vel = [None, None];
    let solos = [solo_right, solo_left];
    for w in 0..2 {
        if let Some(t) = tc {
            pre[w] = tracks[w].max_amplitude_between(0.5 * t, 0.8 * t);
            if completed {
                post[w] = tracks[w].mean_amplitude_between(t + 0.9 * (end - t), end);
            }
        }
        if let Some(s) = solos[w] {
            if completed && s.blow_up.is_none() {
                if let (Some(a), Some(b)) = (tracks[w].last(), s.tracks[0].last()) {
                    shifts[w] = Some(a.position - b.position);
                }
                if let (Some(va), Some(vb)) = (tracks[w].mean_velocity(), s.tracks[0].mean_velocity()) {
                    if vb != 0.0 {
                        vel[w] = Some((va - vb).abs() / vb.abs());
                    }
                }
            }
        }
    }
    let peak_excess = match pre {
        [Some(a), Some(b)] if a + b > 0.0 => Some(peak_amplitude / (a + b) - 1.0),
        _ => None,
    };
    CollisionOutcome {
        summary: CollisionSummary {
            collision_time: tc,
            peak_amplitude,
            pre_amplitudes: pre,
            post_amplitudes: post,
            peak_excess,
            phase_shifts: shifts,
            velocity_errors: vel,
            blow_up: run.blow_up,
        },
        tracks,
        run,
    }
}

/// The collided run and both solo runs, one after the other.
pub fn run_collision(setup: &CollisionSetup) -> Result<CollisionOutcome> {
    let run = run_tracked(setup, &setup.spec)?;
    let right = run_tracked(setup, &setup.spec.solo(1.0))?;
    let left = run_tracked(setup, &setup.spec.solo(-1.0))?;
    Ok(assemble_collision(setup, run, Some(&right), Some(&left)))
}

// ---------------------------------------------------------------------------
// long-time single waves

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongtimeSetup {
    pub spec: TravelingWaveSpec,
    pub grid: Grid,
    pub scheme: SchemeConfig,
    pub t_final: f64,
    pub quadrature: CellAverageConfig,
    pub snapshots: usize,
    /// Cells farther than this from the crest form the dispersive tail.
    pub tail_gap: f64,
}

impl LongtimeSetup {
    pub fn from_preset(p: &Preset) -> Result<Self> {
        if p.family.is_collision() {
            return Err(Error::InvalidExperiment("long-time runs need a single-wave family"));
        }
        Ok(Self {
            spec: p.spec(),
            grid: p.grid()?,
            scheme: p.scheme,
            t_final: p.t_final,
            quadrature: CellAverageConfig::default(),
            snapshots: DEFAULT_SNAPSHOTS,
            tail_gap: (0.25 * p.length).min(20.0),
        })
    }
}

/// Crest errors relative to the exact wave, both measured with
/// [`locate_crest`] (the exact crest on its cell averages at the same time).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrestErrors {
    pub position: f64,
    pub exact_position: f64,
    pub amplitude: f64,
    pub exact_amplitude: f64,
    pub position_error: f64,
    pub amplitude_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LongtimeReport {
    /// Absent when the exact `eta` is constant.
    pub eta_track: Option<WaveTrack>,
    pub u_track: WaveTrack,
    pub eta: Option<CrestErrors>,
    pub u: Option<CrestErrors>,
    /// Largest deviation from the exact cell averages away from the crest.
    pub tail_amplitude: Option<f64>,
    pub snapshots: Vec<SimState>,
    pub final_state: SimState,
    pub blow_up: Option<BlowUpInfo>,
}

/// Sign of the crest relative to the far field, or `None` for a flat field.
fn polarity(v: &GridFunction, center: f64) -> Option<f64> {
    let g = v.grid();
    let j = libm::floor((center - g.origin()) / g.dx()) as isize;
    let far = j + g.cells() as isize / 2;
    let d = v.at(j) - v.at(far);
    if d.abs() <= 1e-12 * (v.at(j).abs() + v.at(far).abs()).max(1e-300) {
        None
    } else {
        Some(d.signum())
    }
}

fn crest_errors(track: &WaveTrack, exact: Crest, period: f64) -> Option<CrestErrors> {
    let p = track.last()?;
    // unwrap the exact crest next to the tracked one
    let mut x = exact.position;
    x += period * libm::round((p.position - x) / period);
    let rel = |a: f64, b: f64| if b != 0.0 { (a - b).abs() / b.abs() } else { (a - b).abs() };
    Some(CrestErrors {
        position: p.position,
        exact_position: x,
        amplitude: p.amplitude.abs(),
        exact_amplitude: exact.amplitude.abs(),
        position_error: rel(p.position, x),
        amplitude_error: rel(p.amplitude.abs(), exact.amplitude.abs()),
    })
}

pub fn run_longtime(setup: &LongtimeSetup) -> Result<LongtimeReport> {
    let grid = setup.grid;
    let spec = setup.spec;
    let stepper = Stepper::new(spec.params(), setup.scheme, grid)?;
    let init = cell_average_initial(&spec, &grid, &setup.quadrature);
    let pol_eta = polarity(&init.eta, spec.center);
    let pol_u = polarity(&init.u, spec.center).unwrap_or(1.0);
    let period = grid.length();
    let mut eta_track = pol_eta.map(|_| WaveTrack::new());
    let mut u_track = WaveTrack::new();
    let m = drive(&stepper, init, setup.t_final, setup.snapshots, |s| {
        if let (Some(tr), Some(p)) = (eta_track.as_mut(), pol_eta) {
            if let Some(c) = locate_crest(&s.eta, p, None) {
                tr.push(s.t, c, period);
            }
        }
        if let Some(c) = locate_crest(&s.u, pol_u, None) {
            u_track.push(s.t, c, period);
        }
    })?;

    let t_end = m.state.t;
    let reference = reference_state(&spec, &grid, t_end, &setup.quadrature);
    let eta_err = match (&eta_track, pol_eta) {
        (Some(tr), Some(p)) => locate_crest(&reference.eta, p, None)
            .and_then(|c| crest_errors(tr, c, period)),
        _ => None,
    };
    let u_err = locate_crest(&reference.u, pol_u, None).and_then(|c| crest_errors(&u_track, c, period));

    let tail_amplitude = if m.blow_up.is_none() {
        let (field, exact, track) = match &eta_track {
            Some(tr) => (&m.state.eta, &reference.eta, tr),
            None => (&m.state.u, &reference.u, &u_track),
        };
        track.last().and_then(|p| {
            let mut worst: Option<f64> = None;
            for j in 0..grid.cells() {
                let off = grid.wrap_offset(grid.cell_center(j) - p.position);
                if off.abs() > setup.tail_gap {
                    let d = (field.values()[j] - exact.values()[j]).abs();
                    worst = Some(worst.map_or(d, |w| w.max(d)));
                }
            }
            worst
        })
    } else {
        None
    };

    Ok(LongtimeReport {
        eta_track,
        u_track,
        eta: eta_err,
        u: u_err,
        tail_amplitude,
        snapshots: m.snapshots,
        final_state: m.state,
        blow_up: m.blow_up,
    })
}
