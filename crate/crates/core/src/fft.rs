//! Complex discrete Fourier transform of arbitrary length.
//!
//! Lengths whose prime factors are all small use a recursive mixed-radix
//! Cooley-Tukey transform; any other length goes through Bluestein's chirp-z
//! reformulation on a padded power-of-two buffer.
//! [`dft_naive`] is the O(n^2) definition, kept for cross-checks.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Largest prime factor handled by the direct mixed-radix path.
const MAX_RADIX: usize = 64;

fn factorize(mut n: usize) -> Vec<usize> {
    let mut f = Vec::new();
    // radix 4 first: fewer passes for powers of two
    while n % 4 == 0 {
        f.push(4);
        n /= 4;
    }
    let mut p = 2;
    while n > 1 {
        while n % p == 0 {
            f.push(p);
            n /= p;
        }
        p += 1;
        if p * p > n && n > 1 {
            f.push(n);
            break;
        }
    }
    f
}

/// Recursive decimation-in-time Cooley-Tukey over the factors of `n`.
#[derive(Debug, Clone)]
struct MixedRadix {
    n: usize,
    factors: Vec<usize>,
    // exp(-2 pi i k / n)
    roots: Vec<Complex64>,
}

impl MixedRadix {
    fn new(n: usize) -> Self {
        let roots = (0..n)
            .map(|k| {
                let ang = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(libm::cos(ang), libm::sin(ang))
            })
            .collect();
        Self {
            n,
            factors: factorize(n),
            roots,
        }
    }

    fn supports(n: usize) -> bool {
        factorize(n).iter().all(|p| *p <= MAX_RADIX)
    }

    fn forward(&self, data: &mut [Complex64]) {
        if self.n == 1 {
            return;
        }
        let input = data.to_vec();
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.factors.iter().copied().max().unwrap_or(1)];
        self.rec(&input, 1, data, &self.factors, 1, &mut scratch);
    }

    fn rec(
        &self,
        input: &[Complex64],
        stride: usize,
        out: &mut [Complex64],
        factors: &[usize],
        root_stride: usize,
        scratch: &mut [Complex64],
    ) {
        let n = out.len();
        if n == 1 {
            out[0] = input[0];
            return;
        }
        let p = factors[0];
        let m = n / p;
        for q in 0..p {
            self.rec(
                &input[q * stride..],
                stride * p,
                &mut out[q * m..(q + 1) * m],
                &factors[1..],
                root_stride * p,
                scratch,
            );
        }
        let big = self.n;
        // twiddle step between entries of one butterfly: W_p = roots[m * root_stride]
        let wp = m * root_stride;
        for k in 0..m {
            for q in 0..p {
                let tw = self.roots[(q * k * root_stride) % big];
                scratch[q] = out[q * m + k] * tw;
            }
            match p {
                2 => {
                    let (a, b) = (scratch[0], scratch[1]);
                    out[k] = a + b;
                    out[k + m] = a - b;
                }
                4 => {
                    let (a, b, c, d) = (scratch[0], scratch[1], scratch[2], scratch[3]);
                    let s0 = a + c;
                    let s1 = a - c;
                    let s2 = b + d;
                    let s3 = b - d;
                    // -i * s3
                    let ms3 = Complex64::new(s3.im, -s3.re);
                    out[k] = s0 + s2;
                    out[k + m] = s1 + ms3;
                    out[k + 2 * m] = s0 - s2;
                    out[k + 3 * m] = s1 - ms3;
                }
                _ => {
                    for s in 0..p {
                        let mut acc = scratch[0];
                        for q in 1..p {
                            acc += scratch[q] * self.roots[(q * s * wp) % big];
                        }
                        out[k + s * m] = acc;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    // exp(-i pi k^2 / n)
    chirp: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
    inner: MixedRadix,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let two_n = 2 * n as u128;
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                // reduce k^2 modulo 2n first so the angle stays accurate for large k
                let r = (k as u128 * k as u128) % two_n;
                let ang = -PI * r as f64 / n as f64;
                Complex64::new(libm::cos(ang), libm::sin(ang))
            })
            .collect();
        let inner = MixedRadix::new(m);
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.forward(&mut kernel);
        Self {
            chirp,
            kernel_hat: kernel,
            inner,
        }
    }

    fn forward(&self, data: &mut [Complex64]) {
        let n = self.chirp.len();
        let m = self.inner.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..n {
            buf[k] = data[k] * self.chirp[k];
        }
        self.inner.forward(&mut buf);
        for (b, h) in buf.iter_mut().zip(&self.kernel_hat) {
            *b = (*b * h).conj();
        }
        // inverse via conjugation: ifft(x) = conj(fft(conj(x))) / m
        self.inner.forward(&mut buf);
        let scale = 1.0 / m as f64;
        for k in 0..n {
            data[k] = buf[k].conj() * scale * self.chirp[k];
        }
    }
}

#[derive(Debug, Clone)]
enum Plan {
    Direct(MixedRadix),
    Bluestein(Bluestein),
}

/// A reusable transform plan for one length.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    plan: Plan,
}

impl Fft {
    /// Plans a transform of length `n >= 1`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "transform length must be positive");
        let plan = if MixedRadix::supports(n) {
            Plan::Direct(MixedRadix::new(n))
        } else {
            Plan::Bluestein(Bluestein::new(n))
        };
        Self { n, plan }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In place `X_k = sum_j x_j exp(-2 pi i j k / n)`.
    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.n);
        match &self.plan {
            Plan::Direct(p) => p.forward(data),
            Plan::Bluestein(p) => p.forward(data),
        }
    }

    /// In place inverse, normalised so that `inverse(forward(x)) == x`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        for z in data.iter_mut() {
            *z = z.conj();
        }
        self.forward(data);
        let scale = 1.0 / self.n as f64;
        for z in data.iter_mut() {
            *z = z.conj() * scale;
        }
    }
}

/// Direct evaluation of the DFT (unnormalised forward, `1/n` inverse).
pub fn dft_naive(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, x) in input.iter().enumerate() {
            let r = (j * k) % n;
            let ang = sign * 2.0 * PI * r as f64 / n as f64;
            acc += x * Complex64::new(libm::cos(ang), libm::sin(ang));
        }
        if inverse {
            acc /= n as f64;
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn matches_naive_dft_for_many_lengths() {
        for n in [1, 2, 3, 4, 5, 7, 8, 12, 16, 30, 64, 67, 100, 127, 134, 140, 256, 1400] {
            let x = random_signal(n, n as u64);
            let mut y = x.clone();
            Fft::new(n).forward(&mut y);
            let reference = dft_naive(&x, false);
            let scale = (n as f64).sqrt();
            assert!(max_err(&y, &reference) < 1e-12 * scale.max(1.0), "n = {n}");
        }
    }

    #[test]
    fn round_trip_is_identity() {
        for n in [16, 1400, 1024, 9600, 12200, 4099] {
            let x = random_signal(n, 7);
            let mut y = x.clone();
            let plan = Fft::new(n);
            plan.forward(&mut y);
            plan.inverse(&mut y);
            assert!(max_err(&x, &y) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn single_mode_lands_in_one_bin() {
        let n = 48;
        let k0 = 5;
        let x: Vec<Complex64> = (0..n)
            .map(|j| {
                let ang = 2.0 * PI * (j * k0) as f64 / n as f64;
                Complex64::new(libm::cos(ang), libm::sin(ang))
            })
            .collect();
        let mut y = x;
        Fft::new(n).forward(&mut y);
        for (k, z) in y.iter().enumerate() {
            let expect = if k == k0 { n as f64 } else { 0.0 };
            assert!((z.re - expect).abs() < 1e-11 && z.im.abs() < 1e-11);
        }
    }
}
