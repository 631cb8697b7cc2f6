//! Finite-count Pauli tomography of Bob's qubit and Monte-Carlo error bars.
//!
//! Reconstruction is linear inversion: `r_i = (n₊ − n₋)/(n₊ + n₋)`,
//! `ρ = (I + r·σ)/2`, with `r` scaled back onto the Bloch sphere when
//! statistical noise pushes it outside.
//!
//! Resample `i` of a run keyed by `seed` draws from `derive_seed(seed, i)`, so
//! resamples are independent of evaluation order and can run in parallel.

use std::fmt;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{fidelity, Density2};

/// Minimum resample count for an error bar.
pub const MIN_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliBasis {
    X,
    Y,
    Z,
}

impl PauliBasis {
    pub const ALL: [PauliBasis; 3] = [PauliBasis::X, PauliBasis::Y, PauliBasis::Z];

    fn index(self) -> usize {
        match self {
            PauliBasis::X => 0,
            PauliBasis::Y => 1,
            PauliBasis::Z => 2,
        }
    }

    /// `tr(ρ Π₊)` for the +1 eigenprojector of this Pauli.
    pub fn p_plus(self, rho: &Density2) -> f64 {
        ((1.0 + rho.bloch()[self.index()]) / 2.0).clamp(0.0, 1.0)
    }
}

impl fmt::Display for PauliBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub basis: PauliBasis,
    pub n_plus: u64,
    pub n_minus: u64,
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.n_plus + self.n_minus
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographyResult {
    pub rho_hat: Density2,
    pub bloch: [f64; 3],
    /// Filled in by [`mc_error_bar`]-style resampling when requested.
    pub stderr_fidelity: Option<f64>,
}

/// SplitMix64 of `base` advanced by `counter` steps.
pub fn derive_seed(base: u64, counter: u64) -> u64 {
    let mut z = base.wrapping_add(counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Binomial counts for the three Pauli settings, `shots` detections each.
pub fn simulate_counts(rho: &Density2, shots: u64, seed: u64) -> Result<[CountRecord; 3]> {
    if shots == 0 {
        return Err(Error::InvalidCounts("shots per basis must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = [CountRecord { basis: PauliBasis::X, n_plus: 0, n_minus: 0 }; 3];
    for (rec, basis) in out.iter_mut().zip(PauliBasis::ALL) {
        let p = basis.p_plus(rho);
        let n_plus = Binomial::new(shots, p)
            .map_err(|e| Error::InvalidCounts(e.to_string()))?
            .sample(&mut rng);
        *rec = CountRecord { basis, n_plus, n_minus: shots - n_plus };
    }
    Ok(out)
}

/// Linear inversion from `+1` outcome frequencies in X, Y, Z order.
pub fn reconstruct_frequencies(p_plus: [f64; 3]) -> Result<TomographyResult> {
    let mut r = p_plus.map(|p| 2.0 * p - 1.0);
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1.0 {
        r.iter_mut().for_each(|x| *x /= norm);
    }
    let rho_hat = Density2::from_bloch(r)?;
    Ok(TomographyResult { rho_hat, bloch: r, stderr_fidelity: None })
}

pub fn reconstruct(counts: &[CountRecord; 3]) -> Result<TomographyResult> {
    let mut freq = [f64::NAN; 3];
    for rec in counts {
        if rec.total() == 0 {
            return Err(Error::InvalidCounts(format!("no counts in basis {}", rec.basis)));
        }
        freq[rec.basis.index()] = rec.n_plus as f64 / rec.total() as f64;
    }
    if freq.iter().any(|f| f.is_nan()) {
        return Err(Error::InvalidCounts("each of X, Y, Z must appear once".into()));
    }
    reconstruct_frequencies(freq)
}

/// Fidelities of `rho_in` with `n_resamples` independently reconstructed
/// copies of `rho_out`.
pub fn mc_fidelities(
    rho_in: &Density2,
    rho_out: &Density2,
    shots: u64,
    n_resamples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..n_resamples as u64)
        .into_par_iter()
        .map(|i| {
            let counts = simulate_counts(rho_out, shots, derive_seed(seed, i))?;
            Ok(fidelity(rho_in, &reconstruct(&counts)?.rho_hat))
        })
        .collect()
}

/// Standard deviation of the reconstructed fidelity over resamples.
pub fn mc_error_bar(
    rho_in: &Density2,
    rho_out: &Density2,
    shots: u64,
    n_resamples: usize,
    seed: u64,
) -> Result<f64> {
    if n_resamples < MIN_RESAMPLES {
        return Err(Error::config(
            "resamples",
            format!("need at least {MIN_RESAMPLES}, got {n_resamples}"),
        ));
    }
    let f = mc_fidelities(rho_in, rho_out, shots, n_resamples, seed)?;
    Ok(std_dev(&f))
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    var.sqrt()
}

pub fn write_counts_csv(records: &[CountRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    for r in records {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn read_counts_csv(path: impl AsRef<Path>) -> Result<Vec<CountRecord>> {
    let path = path.as_ref();
    let err = |source| Error::Csv { path: path.to_path_buf(), source };
    csv::Reader::from_path(path)
        .map_err(err)?
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn definite_state_gives_all_plus() {
        let counts = simulate_counts(&Density2::basis(0), 1000, 3).unwrap();
        assert_eq!(counts[2], CountRecord { basis: PauliBasis::Z, n_plus: 1000, n_minus: 0 });
    }

    #[test]
    fn zero_shots_rejected() {
        assert!(simulate_counts(&Density2::basis(0), 0, 3).is_err());
    }

    #[test]
    fn maximally_mixed_is_balanced() {
        let shots = 1_000_000;
        let tol = 5.0 * (0.25 / shots as f64).sqrt();
        for rec in simulate_counts(&Density2::maximally_mixed(), shots, 99).unwrap() {
            assert!((rec.n_plus as f64 / shots as f64 - 0.5).abs() < tol, "{rec:?}");
        }
    }

    #[test]
    fn exact_ratios_invert_exactly() {
        let rho = Density2::from_bloch([0.25, -0.5, 0.125]).unwrap();
        let counts = [
            CountRecord { basis: PauliBasis::X, n_plus: 6250, n_minus: 3750 },
            CountRecord { basis: PauliBasis::Y, n_plus: 2500, n_minus: 7500 },
            CountRecord { basis: PauliBasis::Z, n_plus: 5625, n_minus: 4375 },
        ];
        let res = reconstruct(&counts).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!((res.rho_hat.get(i, j) - rho.get(i, j)).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn unphysical_counts_project_to_sphere() {
        let counts = PauliBasis::ALL.map(|basis| CountRecord { basis, n_plus: 50, n_minus: 0 });
        let res = reconstruct(&counts).unwrap();
        let s = 1.0 / 3f64.sqrt();
        for x in res.bloch {
            assert_abs_diff_eq!(x, s, epsilon = 1e-15);
        }
    }

    #[test]
    fn empty_basis_rejected() {
        let mut counts = PauliBasis::ALL.map(|basis| CountRecord { basis, n_plus: 5, n_minus: 5 });
        counts[1].n_plus = 0;
        counts[1].n_minus = 0;
        assert!(matches!(reconstruct(&counts), Err(Error::InvalidCounts(_))));
    }

    #[test]
    fn error_bar_requires_enough_resamples() {
        let rho = Density2::maximally_mixed();
        assert!(mc_error_bar(&rho, &rho, 100, 99, 1).is_err());
        let e = mc_error_bar(&rho, &rho, 100, 100, 1).unwrap();
        assert!(e >= 0.0);
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let mut seeds: Vec<u64> = (0..10_000).map(|i| derive_seed(7, i)).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 10_000);
    }

    #[test]
    fn counts_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.csv");
        let counts = simulate_counts(&Density2::from_bloch([0.1, 0.2, 0.3]).unwrap(), 500, 4).unwrap();
        write_counts_csv(&counts, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("basis,n_plus,n_minus\nX,"));
        assert_eq!(read_counts_csv(&path).unwrap(), counts.to_vec());
    }
}
