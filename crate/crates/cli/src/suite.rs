//! Randomised run of the discrete calculus identities and inequalities.

use abcd_core::identities::{all_identities, all_inequalities, IDENTITY_NAMES, INEQUALITY_NAMES};
use abcd_core::{Grid, GridFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

/// Relative tolerance of every identity.
pub const IDENTITY_TOL: f64 = 1e-12;
pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_SIZES: [usize; 3] = [8, 64, 1024];
pub const DEFAULT_SEED: u64 = 2024;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteLine {
    pub name: &'static str,
    /// Worst relative residual for an identity, worst `lhs - rhs` for an inequality.
    pub worst: f64,
    pub failures: usize,
    pub checks: usize,
}

impl SuiteLine {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub identities: Vec<SuiteLine>,
    pub inequalities: Vec<SuiteLine>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.identities.iter().chain(&self.inequalities).all(SuiteLine::passed)
    }

    pub fn lines(&self) -> impl Iterator<Item = &SuiteLine> {
        self.identities.iter().chain(&self.inequalities)
    }
}

fn line(name: &'static str) -> SuiteLine {
    SuiteLine {
        name,
        worst: f64::NEG_INFINITY,
        failures: 0,
        checks: 0,
    }
}

/// `samples` random field pairs on every size, with random domain length,
/// amplitude and time step.
pub fn identity_suite(samples: usize, sizes: &[usize], seed: u64) -> Result<SuiteReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<SuiteLine> = IDENTITY_NAMES.iter().map(|n| line(n)).collect();
    let mut ineqs: Vec<SuiteLine> = INEQUALITY_NAMES.iter().map(|n| line(n)).collect();
    for &n in sizes {
        for _ in 0..samples {
            let length = rng.gen_range(1.0..50.0);
            let grid = Grid::new(length, n)?;
            let amp_v: f64 = 10f64.powf(rng.gen_range(-2.0..2.0));
            let amp_w: f64 = 10f64.powf(rng.gen_range(-2.0..2.0));
            let v = GridFunction::new(grid, (0..n).map(|_| amp_v * rng.gen_range(-1.0..1.0)).collect())?;
            let w = GridFunction::new(grid, (0..n).map(|_| amp_w * rng.gen_range(-1.0..1.0)).collect())?;
            let dt = 10f64.powf(rng.gen_range(-5.0..1.0));
            for (l, c) in ids.iter_mut().zip(all_identities(&v, &w)?) {
                l.checks += 1;
                l.worst = l.worst.max(c.residual());
                if !c.holds(IDENTITY_TOL) {
                    l.failures += 1;
                }
            }
            for (l, c) in ineqs.iter_mut().zip(all_inequalities(&v, &w, dt)?) {
                l.checks += 1;
                l.worst = l.worst.max(c.lhs - c.rhs);
                if !c.holds() {
                    l.failures += 1;
                }
            }
        }
    }
    Ok(SuiteReport {
        identities: ids,
        inequalities: ineqs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverReport {
    pub systems: usize,
    /// Worst relative difference of the Fourier solution from the dense LU solution.
    pub worst_helmholtz: f64,
    pub worst_coupled: f64,
}

fn rel_diff(x: &[f64], y: &[f64]) -> f64 {
    let num = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den = y.iter().map(|b| b * b).sum::<f64>().sqrt().max(1e-300);
    num / den
}

/// `systems` random Helmholtz and coupled solves on grids of at most
/// `max_cells` cells, each compared with a dense LU solve of the assembled matrix.
pub fn solver_suite(systems: usize, max_cells: usize, seed: u64) -> Result<SolverReport, CliError> {
    use abcd_core::spectral::dense::{coupled_block, id_plus_lap, lu_solve};
    use abcd_core::{CoupledSystemSpec, SpectralSolver};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SolverReport {
        systems,
        worst_helmholtz: 0.0,
        worst_coupled: 0.0,
    };
    let singular = || CliError::Config("dense oracle matrix is singular".into());
    for _ in 0..systems {
        let n = rng.gen_range(4..=max_cells.max(4));
        let grid = Grid::new(rng.gen_range(1.0..30.0), n)?;
        let solver = SpectralSolver::new(grid);
        let field = |rng: &mut ChaCha8Rng| GridFunction::new(grid, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let r1 = field(&mut rng)?;
        let r2 = field(&mut rng)?;

        let kappa = rng.gen_range(0.0..2.0);
        let x = solver.solve_helmholtz(kappa, &r1)?;
        let x_ref = lu_solve(&id_plus_lap(n, grid.dx(), -kappa), r1.values()).ok_or_else(singular)?;
        rep.worst_helmholtz = rep.worst_helmholtz.max(rel_diff(x.values(), &x_ref));

        let (a, b, c, d) = (
            -rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
            -rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
        );
        let theta = rng.gen_range(0.0..=1.0);
        let dt = 10f64.powf(rng.gen_range(-4.0..0.0));
        let spec = CoupledSystemSpec::new(a, b, c, d, theta, dt)?;
        let (e, u) = solver.solve_coupled(&spec, &r1, &r2)?;
        let m = coupled_block(n, grid.dx(), a, b, c, d, theta * dt);
        let mut rhs = r1.values().to_vec();
        rhs.extend_from_slice(r2.values());
        let y_ref = lu_solve(&m, &rhs).ok_or_else(singular)?;
        let mut y = e.into_values();
        y.extend(u.into_values());
        rep.worst_coupled = rep.worst_coupled.max(rel_diff(&y, &y_ref));
    }
    Ok(rep)
}
