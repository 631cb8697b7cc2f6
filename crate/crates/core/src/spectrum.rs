//! Joint two-photon frequency distributions `|g(ω_a, ω_b)|²` and their
//! characteristic functions.
//!
//! Units: angular frequency in rad/fs, time-like arguments in fs, lengths in nm.

use std::f64::consts::{LN_2, PI};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use crate::error::{Error, Result};

/// Speed of light in nm/fs.
pub const SPEED_OF_LIGHT: f64 = 299.792458;

/// Anything that can report `∫|g|² e^{−i(uω_a + vω_b)} dω_a dω_b`.
pub trait JointSpectrum: Sync {
    fn characteristic(&self, u: f64, v: f64) -> Complex64;

    /// `(⟨ω_a⟩, ⟨ω_b⟩)` in rad/fs.
    fn mean_frequencies(&self) -> (f64, f64);
}

/// Bivariate Gaussian frequency distribution with both marginal means at `ω0/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpectrum {
    omega0: f64,
    c11: f64,
    c22: f64,
    k: f64,
}

impl GaussianSpectrum {
    /// `k = ±1` is allowed: nothing here inverts the covariance matrix.
    pub fn new(omega0: f64, c11: f64, c22: f64, k: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidSpectrum(format!("omega0 = {omega0} must be positive")));
        }
        if !(c11.is_finite() && c11 > 0.0 && c22.is_finite() && c22 > 0.0) {
            return Err(Error::InvalidSpectrum(format!(
                "variances must be positive (c11 = {c11}, c22 = {c22})"
            )));
        }
        if !(-1.0..=1.0).contains(&k) {
            return Err(Error::InvalidSpectrum(format!("correlation k = {k} outside [-1, 1]")));
        }
        Ok(Self { omega0, c11, c22, k })
    }

    /// Equal marginal widths `σ` for both photons.
    pub fn symmetric(omega0: f64, sigma: f64, k: f64) -> Result<Self> {
        Self::new(omega0, sigma * sigma, sigma * sigma, k)
    }

    /// Pump frequency from the pump wavelength; marginal width from a Gaussian
    /// filter of the given FWHM.
    pub fn from_physical(p: &PhysicalParams, k: f64) -> Result<Self> {
        p.validate()?;
        let sigma = p.marginal_sigma();
        Self::symmetric(p.omega0(), sigma, k)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn c11(&self) -> f64 {
        self.c11
    }

    pub fn c22(&self) -> f64 {
        self.c22
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(self.omega0, self.c11, self.c22, k)
    }

    /// Draws `n` frequency pairs from a ChaCha8 stream keyed by `seed`.
    pub fn sample(&self, seed: u64, n: usize) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| Distribution::sample(self, &mut rng)).collect()
    }
}

impl JointSpectrum for GaussianSpectrum {
    fn characteristic(&self, u: f64, v: f64) -> Complex64 {
        let a = self.c11.sqrt() * u;
        let b = self.c22.sqrt() * v;
        let q = (a * a + 2.0 * self.k * a * b + b * b).max(0.0);
        let phase = -0.5 * self.omega0 * (u + v);
        Complex64::from_polar((-0.5 * q).exp(), phase)
    }

    fn mean_frequencies(&self) -> (f64, f64) {
        (self.omega0 / 2.0, self.omega0 / 2.0)
    }
}

impl Distribution<(f64, f64)> for GaussianSpectrum {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let mu = self.omega0 / 2.0;
        let sa = self.c11.sqrt();
        let sb = self.c22.sqrt();
        let z1: f64 = rng.sample(StandardNormal);
        let wa = mu + sa * z1;
        if self.k.abs() == 1.0 {
            // Degenerate: ω_b is a deterministic function of ω_a.
            let ratio = (self.c22 / self.c11).sqrt();
            let wb = mu + self.k * ratio * (wa - mu);
            return (wa, wb);
        }
        let z2: f64 = rng.sample(StandardNormal);
        let wb = mu + sb * (self.k * z1 + (1.0 - self.k * self.k).sqrt() * z2);
        (wa, wb)
    }
}

/// Source and filter parameters in laboratory units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub pump_wavelength_nm: f64,
    pub filter_fwhm_nm: f64,
    pub filter_center_nm: f64,
    pub delta_n: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            pump_wavelength_nm: 404.0,
            filter_fwhm_nm: 3.0,
            filter_center_nm: 808.0,
            delta_n: 0.00889,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("pump_wavelength_nm", self.pump_wavelength_nm),
            ("filter_fwhm_nm", self.filter_fwhm_nm),
            ("filter_center_nm", self.filter_center_nm),
            ("delta_n", self.delta_n),
        ];
        for (key, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(key, format!("must be positive, got {value}")));
            }
        }
        Ok(())
    }

    pub fn omega0(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.pump_wavelength_nm
    }

    /// Filter FWHM converted to angular frequency, `2πcΔλ/λ²`.
    pub fn fwhm_omega(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT * self.filter_fwhm_nm
            / (self.filter_center_nm * self.filter_center_nm)
    }

    pub fn marginal_sigma(&self) -> f64 {
        self.fwhm_omega() / (2.0 * (2.0 * LN_2).sqrt())
    }
}

/// Joint distribution given as point masses on a rectangular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSpectrum {
    omega_a: Vec<f64>,
    omega_b: Vec<f64>,
    /// Row-major, `weights[i * omega_b.len() + j]` sits at `(omega_a[i], omega_b[j])`.
    weights: Vec<f64>,
}

pub const WEIGHT_SUM_TOL: f64 = 1e-9;

impl TabulatedSpectrum {
    pub fn new(omega_a: Vec<f64>, omega_b: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let spec = Self::checked_shape(omega_a, omega_b, weights)?;
        let total: f64 = spec.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidSpectrum(format!("weights sum to {total}, expected 1")));
        }
        Ok(spec)
    }

    /// Divides the weights by their sum before validating.
    pub fn normalized(omega_a: Vec<f64>, omega_b: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let mut spec = Self::checked_shape(omega_a, omega_b, weights)?;
        let total: f64 = spec.weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidSpectrum(format!("weight total {total} is not positive")));
        }
        spec.weights.iter_mut().for_each(|w| *w /= total);
        Ok(spec)
    }

    fn checked_shape(omega_a: Vec<f64>, omega_b: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if omega_a.is_empty() || omega_b.is_empty() {
            return Err(Error::InvalidSpectrum("empty frequency grid".into()));
        }
        if weights.len() != omega_a.len() * omega_b.len() {
            return Err(Error::InvalidSpectrum(format!(
                "weights have {} entries, grid is {}×{}",
                weights.len(),
                omega_a.len(),
                omega_b.len()
            )));
        }
        for (name, grid) in [("omega_a", &omega_a), ("omega_b", &omega_b)] {
            if grid.iter().any(|w| !w.is_finite()) || grid.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::InvalidSpectrum(format!(
                    "{name} grid must be finite and strictly increasing"
                )));
            }
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidSpectrum("weights must be finite and non-negative".into()));
        }
        Ok(Self { omega_a, omega_b, weights })
    }

    /// Reads a long-format CSV with header `omega_a,omega_b,weight`.
    ///
    /// Every distinct `omega_a` / `omega_b` value becomes a grid line; cells
    /// absent from the file get zero weight. Weights are then divided by their
    /// total, so unnormalized spectra (e.g. raw counts) load unchanged.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            omega_a: f64,
            omega_b: f64,
            weight: f64,
        }

        let path = path.as_ref();
        let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(csv_err)?;
        let rows: Vec<Row> = reader
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_err)?;

        let grid = |f: fn(&Row) -> f64| {
            let mut g: Vec<f64> = rows.iter().map(f).collect();
            g.sort_by(|a, b| a.total_cmp(b));
            g.dedup();
            g
        };
        let omega_a = grid(|r| r.omega_a);
        let omega_b = grid(|r| r.omega_b);
        let mut weights = vec![0.0; omega_a.len() * omega_b.len()];
        for r in &rows {
            let i = omega_a.partition_point(|&w| w < r.omega_a);
            let j = omega_b.partition_point(|&w| w < r.omega_b);
            weights[i * omega_b.len() + j] += r.weight;
        }
        Self::normalized(omega_a, omega_b, weights)
    }

    pub fn omega_a(&self) -> &[f64] {
        &self.omega_a
    }

    pub fn omega_b(&self) -> &[f64] {
        &self.omega_b
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl JointSpectrum for TabulatedSpectrum {
    fn characteristic(&self, u: f64, v: f64) -> Complex64 {
        let phase_b: Vec<Complex64> = self
            .omega_b
            .iter()
            .map(|&w| Complex64::from_polar(1.0, -v * w))
            .collect();
        let nb = self.omega_b.len();
        self.omega_a
            .iter()
            .zip(self.weights.chunks_exact(nb))
            .map(|(&wa, row)| {
                let inner: Complex64 = row
                    .iter()
                    .zip(&phase_b)
                    .map(|(&w, &p)| p * w)
                    .sum();
                Complex64::from_polar(1.0, -u * wa) * inner
            })
            .sum()
    }

    fn mean_frequencies(&self) -> (f64, f64) {
        let nb = self.omega_b.len();
        let mut ma = 0.0;
        let mut mb = 0.0;
        for (i, row) in self.weights.chunks_exact(nb).enumerate() {
            for (j, &w) in row.iter().enumerate() {
                ma += w * self.omega_a[i];
                mb += w * self.omega_b[j];
            }
        }
        (ma, mb)
    }
}
