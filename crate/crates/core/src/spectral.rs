//! Fourier diagonalisation of the implicit periodic operators.
//!
//! On a periodic grid `-D+D-` has symbol `mu_k = (4/dx^2) sin^2(pi k/J)` and
//! `D` has symbol `i sigma_k` with `sigma_k = sin(2 pi k/J)/dx`. The scalar
//! operator `I - kappa D+D-` and the coupled block
//!
//! ```text
//! [ I - b L           g (I + a L) D ] [eta]
//! [ g (I + c L) D     I - d L       ] [ u ]      (L = D+D-, g = theta dt)
//! ```
//!
//! therefore reduce to a division, respectively a 2x2 solve, per mode. Two
//! real fields are transformed together as `eta + i u`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::grid::{Grid, GridFunction};

/// Smallest admissible determinant of a per-mode 2x2 block.
pub const SINGULAR_DET: f64 = 1e-14;

/// Fourier symbols of `-D+D-` and of `D / i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSymbols {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl ModeSymbols {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.cells();
        let dx = grid.dx();
        let mut mu = Vec::with_capacity(n);
        let mut sigma = Vec::with_capacity(n);
        for k in 0..n {
            let s = libm::sin(PI * k as f64 / n as f64);
            mu.push(4.0 / (dx * dx) * s * s);
            // sin(2 pi k / n) evaluated on the symmetric index keeps sigma_{n-k} = -sigma_k exact
            let ks = if 2 * k > n { k as f64 - n as f64 } else { k as f64 };
            let sg = if 2 * k == n { 0.0 } else { libm::sin(2.0 * PI * ks / n as f64) / dx };
            sigma.push(sg);
        }
        Self { mu, sigma }
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }
}

/// Coefficients of the implicit block of one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledSystemSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub theta: f64,
    pub dt: f64,
}

impl CoupledSystemSpec {
    pub fn new(a: f64, b: f64, c: f64, d: f64, theta: f64, dt: f64) -> Result<Self> {
        if !(a <= 0.0 && c <= 0.0 && b >= 0.0 && d >= 0.0) {
            return Err(Error::InadmissibleParams("implicit block needs a, c <= 0 and b, d >= 0"));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidTheta(theta));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidConfig("time step must be positive and finite"));
        }
        Ok(Self { a, b, c, d, theta, dt })
    }

    fn coupling(&self) -> f64 {
        self.theta * self.dt
    }

    /// Determinant of the block at symbols `(mu, sigma)`.
    pub fn determinant(&self, mu: f64, sigma: f64) -> f64 {
        let g = self.coupling();
        (1.0 + self.b * mu) * (1.0 + self.d * mu)
            + g * g * (1.0 - self.a * mu) * (1.0 - self.c * mu) * sigma * sigma
    }
}

/// Cached transform plan and symbols for one grid.
#[derive(Debug, Clone)]
pub struct SpectralSolver {
    grid: Grid,
    fft: Fft,
    symbols: ModeSymbols,
}

impl SpectralSolver {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            fft: Fft::new(grid.cells()),
            symbols: ModeSymbols::new(&grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn symbols(&self) -> &ModeSymbols {
        &self.symbols
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        if self.grid.same_as(f.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Spectra of two real fields from a single complex transform.
    pub fn forward_pair(&self, eta: &[f64], u: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = eta.len();
        let mut z: Vec<Complex64> = eta.iter().zip(u).map(|(e, v)| Complex64::new(*e, *v)).collect();
        self.fft.forward(&mut z);
        let mut eh = Vec::with_capacity(n);
        let mut uh = Vec::with_capacity(n);
        for k in 0..n {
            let zk = z[k];
            let zm = z[(n - k) % n].conj();
            eh.push((zk + zm) * 0.5);
            // (zk - zm) / (2i)
            let dlt = (zk - zm) * 0.5;
            uh.push(Complex64::new(dlt.im, -dlt.re));
        }
        (eh, uh)
    }

    /// Inverse of [`Self::forward_pair`] for Hermitian spectra.
    pub fn inverse_pair(&self, eh: &[Complex64], uh: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let mut z: Vec<Complex64> = eh
            .iter()
            .zip(uh)
            .map(|(e, v)| e + Complex64::new(-v.im, v.re))
            .collect();
        self.fft.inverse(&mut z);
        (z.iter().map(|c| c.re).collect(), z.iter().map(|c| c.im).collect())
    }

    /// Solves `(I - kappa D+D-) x = rhs`.
    pub fn solve_helmholtz(&self, kappa: f64, rhs: &GridFunction) -> Result<GridFunction> {
        if !(kappa >= 0.0) {
            return Err(Error::NegativeKappa(kappa));
        }
        self.check(rhs)?;
        if kappa == 0.0 {
            return Ok(rhs.clone());
        }
        let mut z: Vec<Complex64> = rhs.values().iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.fft.forward(&mut z);
        for (zk, mu) in z.iter_mut().zip(&self.symbols.mu) {
            *zk /= 1.0 + kappa * mu;
        }
        self.fft.inverse(&mut z);
        GridFunction::new(self.grid, z.iter().map(|c| c.re).collect())
    }

    /// Solves the coupled implicit block for `(eta, u)`.
    pub fn solve_coupled(
        &self,
        spec: &CoupledSystemSpec,
        rhs_eta: &GridFunction,
        rhs_u: &GridFunction,
    ) -> Result<(GridFunction, GridFunction)> {
        self.check(rhs_eta)?;
        self.check(rhs_u)?;
        let (mut eh, mut uh) = self.forward_pair(rhs_eta.values(), rhs_u.values());
        let g = spec.coupling();
        for k in 0..eh.len() {
            let mu = self.symbols.mu[k];
            let sg = self.symbols.sigma[k];
            let det = spec.determinant(mu, sg);
            if !(libm::fabs(det) >= SINGULAR_DET) {
                return Err(Error::SingularMode { mode: k, det });
            }
            let p = 1.0 + spec.b * mu;
            let s = 1.0 + spec.d * mu;
            // off-diagonal entries are purely imaginary: i * q and i * r
            let q = g * (1.0 - spec.a * mu) * sg;
            let r = g * (1.0 - spec.c * mu) * sg;
            let re = eh[k];
            let ru = uh[k];
            let iq_ru = Complex64::new(-q * ru.im, q * ru.re);
            let ir_re = Complex64::new(-r * re.im, r * re.re);
            eh[k] = (re * s - iq_ru) / det;
            uh[k] = (ru * p - ir_re) / det;
        }
        let (e, u) = self.inverse_pair(&eh, &uh);
        Ok((GridFunction::new(self.grid, e)?, GridFunction::new(self.grid, u)?))
    }
}

/// Applies the coupled block with grid stencils; the forward map of
/// [`SpectralSolver::solve_coupled`].
pub fn apply_coupled(
    spec: &CoupledSystemSpec,
    eta: &GridFunction,
    u: &GridFunction,
) -> Result<(GridFunction, GridFunction)> {
    let g = spec.coupling();
    let le = eta.laplacian();
    let lu = u.laplacian();
    let row_e = eta
        .lin_comb(1.0, &le, -spec.b)?
        .lin_comb(1.0, &u.lin_comb(1.0, &lu, spec.a)?.d_center(), g)?;
    let row_u = u
        .lin_comb(1.0, &lu, -spec.d)?
        .lin_comb(1.0, &eta.lin_comb(1.0, &le, spec.c)?.d_center(), g)?;
    Ok((row_e, row_u))
}

/// Dense matrices assembled entry by entry, with a pivoted LU solve. Used to
/// cross-check the Fourier solver on small grids.
pub mod dense {
    use alloc::vec;
    use alloc::vec::Vec;

    /// Row-major square matrix.
    #[derive(Debug, Clone, PartialEq)]
    pub struct Matrix {
        pub n: usize,
        pub data: Vec<f64>,
    }

    impl Matrix {
        pub fn zeros(n: usize) -> Self {
            Self { n, data: vec![0.0; n * n] }
        }

        pub fn identity(n: usize) -> Self {
            let mut m = Self::zeros(n);
            for i in 0..n {
                m.set(i, i, 1.0);
            }
            m
        }

        #[inline]
        pub fn get(&self, i: usize, j: usize) -> f64 {
            self.data[i * self.n + j]
        }

        #[inline]
        pub fn set(&mut self, i: usize, j: usize, v: f64) {
            self.data[i * self.n + j] = v;
        }

        pub fn mul(&self, other: &Matrix) -> Matrix {
            let n = self.n;
            let mut out = Matrix::zeros(n);
            for i in 0..n {
                for k in 0..n {
                    let a = self.get(i, k);
                    if a == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        out.data[i * n + j] += a * other.get(k, j);
                    }
                }
            }
            out
        }

        pub fn lin_comb(&self, alpha: f64, other: &Matrix, beta: f64) -> Matrix {
            Matrix {
                n: self.n,
                data: self.data.iter().zip(&other.data).map(|(x, y)| alpha * x + beta * y).collect(),
            }
        }

        pub fn scale(&self, s: f64) -> Matrix {
            Matrix {
                n: self.n,
                data: self.data.iter().map(|x| s * x).collect(),
            }
        }

        pub fn apply(&self, x: &[f64]) -> Vec<f64> {
            (0..self.n)
                .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
                .collect()
        }

        /// Two-by-two block matrix `[p q; r s]`.
        pub fn block(p: &Matrix, q: &Matrix, r: &Matrix, s: &Matrix) -> Matrix {
            let n = p.n;
            let mut out = Matrix::zeros(2 * n);
            for i in 0..n {
                for j in 0..n {
                    out.set(i, j, p.get(i, j));
                    out.set(i, j + n, q.get(i, j));
                    out.set(i + n, j, r.get(i, j));
                    out.set(i + n, j + n, s.get(i, j));
                }
            }
            out
        }
    }

    /// Cyclic second difference on `n` cells of width `dx`.
    pub fn laplacian(n: usize, dx: f64) -> Matrix {
        let mut m = Matrix::zeros(n);
        let w = 1.0 / (dx * dx);
        for j in 0..n {
            m.set(j, j, -2.0 * w);
            m.set(j, (j + 1) % n, w);
            m.set(j, (j + n - 1) % n, w);
        }
        m
    }

    /// Cyclic centred difference.
    pub fn center(n: usize, dx: f64) -> Matrix {
        let mut m = Matrix::zeros(n);
        let w = 0.5 / dx;
        for j in 0..n {
            m.set(j, (j + 1) % n, w);
            m.set(j, (j + n - 1) % n, -w);
        }
        m
    }

    /// Cyclic forward difference.
    pub fn forward(n: usize, dx: f64) -> Matrix {
        let mut m = Matrix::zeros(n);
        for j in 0..n {
            m.set(j, j, -1.0 / dx);
            m.set(j, (j + 1) % n, 1.0 / dx);
        }
        m
    }

    /// `I + alpha L` on the cyclic grid.
    pub fn id_plus_lap(n: usize, dx: f64, alpha: f64) -> Matrix {
        Matrix::identity(n).lin_comb(1.0, &laplacian(n, dx), alpha)
    }

    /// Gaussian elimination with partial pivoting; `None` if singular.
    pub fn lu_solve(m: &Matrix, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = m.n;
        let mut a = m.data.clone();
        let mut x = rhs.to_vec();
        for col in 0..n {
            let mut piv = col;
            for row in col + 1..n {
                if a[row * n + col].abs() > a[piv * n + col].abs() {
                    piv = row;
                }
            }
            if a[piv * n + col] == 0.0 {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                x.swap(col, piv);
            }
            let d = a[col * n + col];
            for row in col + 1..n {
                let f = a[row * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[row * n + j] -= f * a[col * n + j];
                }
                x[row] -= f * x[col];
            }
        }
        for col in (0..n).rev() {
            let mut s = x[col];
            for j in col + 1..n {
                s -= a[col * n + j] * x[j];
            }
            x[col] = s / a[col * n + col];
        }
        Some(x)
    }

    /// The coupled implicit block as a `2n x 2n` matrix.
    pub fn coupled_block(n: usize, dx: f64, a: f64, b: f64, c: f64, d: f64, g: f64) -> Matrix {
        let dc = center(n, dx);
        let p = id_plus_lap(n, dx, -b);
        let s = id_plus_lap(n, dx, -d);
        let q = id_plus_lap(n, dx, a).mul(&dc).scale(g);
        let r = id_plus_lap(n, dx, c).mul(&dc).scale(g);
        Matrix::block(&p, &q, &r, &s)
    }
}

#[cfg(test)]
mod tests {
    use super::dense::*;
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, rng: &mut ChaCha8Rng) -> GridFunction {
        GridFunction::new(grid, (0..grid.cells()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    fn rel_err(x: &[f64], y: &[f64]) -> f64 {
        let num = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let den = y.iter().map(|b| b * b).sum::<f64>().sqrt().max(1e-300);
        num / den
    }

    #[test]
    fn symbols_have_conjugate_symmetry() {
        for n in [4, 7, 16, 33] {
            let s = ModeSymbols::new(&Grid::new(3.0, n).unwrap());
            assert_eq!(s.mu()[0], 0.0);
            assert_eq!(s.sigma()[0], 0.0);
            for k in 1..n {
                assert!(s.mu()[k] >= 0.0);
                assert!((s.mu()[n - k] - s.mu()[k]).abs() <= 1e-12 * s.mu()[k]);
                assert_eq!(s.sigma()[n - k], -s.sigma()[k]);
            }
        }
    }

    #[test]
    fn helmholtz_trivial_cases() {
        let g = Grid::new(5.0, 12).unwrap();
        let solver = SpectralSolver::new(g);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = random_field(g, &mut rng);
        assert_eq!(solver.solve_helmholtz(0.0, &r).unwrap(), r);
        let c = GridFunction::constant(g, 2.75);
        let x = solver.solve_helmholtz(3.0, &c).unwrap();
        for v in x.values() {
            assert!((v - 2.75).abs() < 1e-14);
        }
        assert_eq!(solver.solve_helmholtz(-1.0, &c), Err(Error::NegativeKappa(-1.0)));
    }

    #[test]
    fn helmholtz_matches_dense_lu() {
        let n = 16;
        let g = Grid::new(2.0, n).unwrap();
        let solver = SpectralSolver::new(g);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = random_field(g, &mut rng);
        let m = id_plus_lap(n, g.dx(), -1.0 / 6.0);
        let x_ref = lu_solve(&m, r.values()).unwrap();
        let x = solver.solve_helmholtz(1.0 / 6.0, &r).unwrap();
        assert!(rel_err(x.values(), &x_ref) < 1e-10);
    }

    #[test]
    fn coupled_matches_dense_lu() {
        let n = 16;
        let g = Grid::new(4.0, n).unwrap();
        let solver = SpectralSolver::new(g);
        let spec = CoupledSystemSpec::new(0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0, 0.5, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let re = random_field(g, &mut rng);
        let ru = random_field(g, &mut rng);
        let m = coupled_block(n, g.dx(), 0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0, 0.005);
        let mut rhs = re.values().to_vec();
        rhs.extend_from_slice(ru.values());
        let x_ref = lu_solve(&m, &rhs).unwrap();
        let (e, u) = solver.solve_coupled(&spec, &re, &ru).unwrap();
        let mut x = e.values().to_vec();
        x.extend_from_slice(u.values());
        assert!(rel_err(&x, &x_ref) < 1e-10);
    }

    #[test]
    fn coupled_with_zero_theta_is_two_helmholtz_solves() {
        let g = Grid::new(6.0, 20).unwrap();
        let solver = SpectralSolver::new(g);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let re = random_field(g, &mut rng);
        let ru = random_field(g, &mut rng);
        let spec = CoupledSystemSpec::new(-0.2, 0.4, -0.3, 0.5, 0.0, 0.1).unwrap();
        let (e, u) = solver.solve_coupled(&spec, &re, &ru).unwrap();
        let he = solver.solve_helmholtz(0.4, &re).unwrap();
        let hu = solver.solve_helmholtz(0.5, &ru).unwrap();
        assert!(rel_err(e.values(), he.values()) < 1e-13);
        assert!(rel_err(u.values(), hu.values()) < 1e-13);
    }

    #[test]
    fn homogeneous_system_gives_zero() {
        let g = Grid::new(6.0, 10).unwrap();
        let solver = SpectralSolver::new(g);
        let spec = CoupledSystemSpec::new(-0.2, 0.4, -0.3, 0.5, 1.0, 0.1).unwrap();
        let z = GridFunction::zeros(g);
        let (e, u) = solver.solve_coupled(&spec, &z, &z).unwrap();
        assert_eq!(e.linf_norm(), 0.0);
        assert_eq!(u.linf_norm(), 0.0);
    }

    #[test]
    fn inadmissible_block_is_rejected() {
        assert!(CoupledSystemSpec::new(0.1, 0.0, 0.0, 0.0, 1.0, 0.1).is_err());
        assert!(CoupledSystemSpec::new(0.0, 0.0, 0.0, 0.0, 1.5, 0.1).is_err());
        assert!(CoupledSystemSpec::new(0.0, 0.0, 0.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn singular_determinant_is_reported() {
        // bypass the constructor to reach a block that is singular at some mode
        let g = Grid::new(1.0, 8).unwrap();
        let solver = SpectralSolver::new(g);
        let mu1 = solver.symbols().mu()[4];
        let spec = CoupledSystemSpec { a: 0.0, b: -1.0 / mu1, c: 0.0, d: 0.0, theta: 1.0, dt: 0.1 };
        let z = GridFunction::constant(g, 1.0);
        assert!(matches!(solver.solve_coupled(&spec, &z, &z), Err(Error::SingularMode { mode: 4, .. })));
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let solver = SpectralSolver::new(Grid::new(1.0, 8).unwrap());
        let other = GridFunction::zeros(Grid::new(2.0, 8).unwrap());
        assert_eq!(solver.solve_helmholtz(1.0, &other), Err(Error::GridMismatch));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn solve_then_apply_is_identity(
            seed in any::<u64>(),
            n in 4usize..48,
            a in -1.0f64..=0.0, b in 0.0f64..1.0, c in -1.0f64..=0.0, d in 0.0f64..1.0,
            theta in 0.0f64..=1.0, dt in 1e-4f64..0.5, len in 0.5f64..40.0,
        ) {
            let g = Grid::new(len, n).unwrap();
            let solver = SpectralSolver::new(g);
            let spec = CoupledSystemSpec::new(a, b, c, d, theta, dt).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let re = random_field(g, &mut rng);
            let ru = random_field(g, &mut rng);
            let (e, u) = solver.solve_coupled(&spec, &re, &ru).unwrap();
            let (ae, au) = apply_coupled(&spec, &e, &u).unwrap();
            let mut lhs = ae.into_values();
            lhs.extend(au.into_values());
            let mut rhs = re.values().to_vec();
            rhs.extend_from_slice(ru.values());
            prop_assert!(rel_err(&lhs, &rhs) < 1e-10);
            prop_assert!((e.mean() - re.mean()).abs() <= 1e-12);
            prop_assert!((u.mean() - ru.mean()).abs() <= 1e-12);
        }
    }
}
