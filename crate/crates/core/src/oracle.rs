//! Independent evaluations of the Gaussian characteristic function, used to
//! cross-check the closed form: direct quadrature of the density and
//! Monte-Carlo averaging over sampled frequency pairs.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::spectrum::{GaussianSpectrum, JointSpectrum};

pub const DEFAULT_QUADRATURE_POINTS: usize = 512;
/// Half-width of the quadrature box in marginal standard deviations.
pub const DEFAULT_HALF_WIDTH: f64 = 8.0;
pub const VERIFY_KS: [f64; 4] = [0.0, -0.5, -0.9, -1.0];

/// Discretized density: frequency nodes and normalized weights.
#[derive(Debug, Clone)]
pub struct Quadrature {
    omega_a: Vec<f64>,
    omega_b: Vec<f64>,
    /// Row-major `omega_a × omega_b` weights, or one weight per node pair
    /// `(omega_a[i], omega_b[i])` when the density lives on a line.
    weights: Vec<f64>,
    line: bool,
}

impl Quadrature {
    /// `n×n` grid of density values on `μ ± half_width·σ`. For `|k| = 1` the
    /// density lives on a line and an `n`-point grid along it is used.
    pub fn gaussian(spec: &GaussianSpectrum, n: usize, half_width: f64) -> Self {
        let (mu_a, mu_b) = spec.mean_frequencies();
        let (sa, sb) = (spec.c11().sqrt(), spec.c22().sqrt());
        let k = spec.k();
        let z: Vec<f64> = (0..n)
            .map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64)
            .collect();
        let line = k.abs() == 1.0;
        let (omega_a, omega_b, mut weights): (Vec<f64>, Vec<f64>, Vec<f64>) = if line {
            (
                z.iter().map(|z| mu_a + sa * z).collect(),
                z.iter().map(|z| mu_b + k * sb * z).collect(),
                z.iter().map(|z| (-0.5 * z * z).exp()).collect(),
            )
        } else {
            let det = 1.0 - k * k;
            let w = z
                .iter()
                .flat_map(|za| z.iter().map(move |zb| (-0.5 * (za * za - 2.0 * k * za * zb + zb * zb) / det).exp()))
                .collect();
            (z.iter().map(|z| mu_a + sa * z).collect(), z.iter().map(|z| mu_b + sb * z).collect(), w)
        };
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { omega_a, omega_b, weights, line }
    }

    pub fn characteristic(&self, u: f64, v: f64) -> Complex64 {
        let ea: Vec<Complex64> = self.omega_a.iter().map(|w| Complex64::from_polar(1.0, -u * w)).collect();
        let eb: Vec<Complex64> = self.omega_b.iter().map(|w| Complex64::from_polar(1.0, -v * w)).collect();
        if self.line {
            return ea.iter().zip(&eb).zip(&self.weights).map(|((a, b), w)| a * b * w).sum();
        }
        let m = eb.len();
        ea.iter()
            .enumerate()
            .map(|(i, a)| {
                let row = &self.weights[i * m..(i + 1) * m];
                a * row.iter().zip(&eb).map(|(w, b)| b * w).sum::<Complex64>()
            })
            .sum()
    }
}

pub fn quadrature_characteristic(
    spec: &GaussianSpectrum,
    u: f64,
    v: f64,
    n: usize,
    half_width: f64,
) -> Complex64 {
    Quadrature::gaussian(spec, n, half_width).characteristic(u, v)
}

/// Sample means of `e^{−i(uω_a+vω_b)}` for every `(us[i], vs[j])`, row-major.
/// Chunk sums are combined in a fixed order, so the result does not depend
/// on the thread count.
pub fn monte_carlo_grid(samples: &[(f64, f64)], us: &[f64], vs: &[f64]) -> Vec<Complex64> {
    let zero = || vec![Complex64::new(0.0, 0.0); us.len() * vs.len()];
    let sum = samples
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = zero();
            let mut ea = vec![Complex64::new(0.0, 0.0); us.len()];
            let mut eb = vec![Complex64::new(0.0, 0.0); vs.len()];
            for &(wa, wb) in chunk {
                ea.iter_mut().zip(us).for_each(|(e, u)| *e = Complex64::from_polar(1.0, -u * wa));
                eb.iter_mut().zip(vs).for_each(|(e, v)| *e = Complex64::from_polar(1.0, -v * wb));
                for (i, a) in ea.iter().enumerate() {
                    for (j, b) in eb.iter().enumerate() {
                        acc[i * vs.len() + j] += a * b;
                    }
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(zero(), |mut x, y| {
            x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
            x
        });
    sum.into_iter().map(|z| z / samples.len() as f64).collect()
}

pub fn monte_carlo_characteristic(samples: &[(f64, f64)], u: f64, v: f64) -> Complex64 {
    monte_carlo_grid(samples, &[u], &[v])[0]
}

/// Points `−1/σ ..= 1/σ` for each argument, where the characteristic
/// function is still of order one.
pub fn uv_axes(spec: &GaussianSpectrum, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (ua, ub) = (1.0 / spec.c11().sqrt(), 1.0 / spec.c22().sqrt());
    let at = |i: usize, m: f64| -m + 2.0 * m * i as f64 / (n - 1) as f64;
    ((0..n).map(|i| at(i, ua)).collect(), (0..n).map(|i| at(i, ub)).collect())
}

/// Row-major `n×n` grid built from [`uv_axes`].
pub fn uv_grid(spec: &GaussianSpectrum, n: usize) -> Vec<(f64, f64)> {
    let (us, vs) = uv_axes(spec, n);
    us.iter().flat_map(|&u| vs.iter().map(move |&v| (u, v))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow {
    pub k: f64,
    /// Largest `|closed − quadrature| / |closed|` over the grid.
    pub quadrature_rel: f64,
    /// Largest per-component `|closed − mc|` over the grid.
    pub mc_abs: f64,
    /// `5/√N`.
    pub mc_bound: f64,
}

impl OracleRow {
    pub fn passes(&self, quadrature_tol: f64) -> bool {
        self.quadrature_rel <= quadrature_tol && self.mc_abs <= self.mc_bound
    }
}

/// Closed form against both oracles on a 10×10 grid for each `k`.
pub fn verify(base: &GaussianSpectrum, ks: &[f64], samples: usize, seed: u64) -> Vec<OracleRow> {
    ks.iter()
        .enumerate()
        .map(|(idx, &k)| {
            let spec = base.with_k(k).expect("k in range");
            let (us, vs) = uv_axes(&spec, 10);
            let draws = spec.sample(crate::tomography::derive_seed(seed, idx as u64), samples);
            let mc = monte_carlo_grid(&draws, &us, &vs);
            let quad = Quadrature::gaussian(&spec, DEFAULT_QUADRATURE_POINTS, DEFAULT_HALF_WIDTH);
            let mut row = OracleRow {
                k,
                quadrature_rel: 0.0,
                mc_abs: 0.0,
                mc_bound: 5.0 / (samples as f64).sqrt(),
            };
            for (idx, (u, v)) in uv_grid(&spec, 10).into_iter().enumerate() {
                let exact = spec.characteristic(u, v);
                let q = quad.characteristic(u, v);
                row.quadrature_rel = row.quadrature_rel.max((exact - q).norm() / exact.norm());
                row.mc_abs = row.mc_abs.max((exact.re - mc[idx].re).abs()).max((exact.im - mc[idx].im).abs());
            }
            row
        })
        .collect()
}
