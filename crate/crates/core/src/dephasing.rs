//! Decoherence functions and the dephasing channels they drive.
//!
//! Environment kets are never materialized: under pure dephasing the reduced
//! polarization dynamics depends only on environment overlaps, and each
//! overlap is the spectrum's characteristic function at the accumulated
//! phase arguments. Only the birefringence `Δn = n_V − n_H` enters; the common
//! index contributes an unobservable global phase.

use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{Density2, Density4};
use crate::spectrum::{JointSpectrum, SPEED_OF_LIGHT};

/// Wavelength unit of the optical-path-difference axis, in nm.
pub const AXIS_UNIT_NM: f64 = 808.0;

pub const KAPPA_TOL: f64 = 1e-9;

/// Complex coherence multiplier, `|κ| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceValue(Complex64);

impl DecoherenceValue {
    pub const ONE: DecoherenceValue = DecoherenceValue(Complex64::new(1.0, 0.0));

    pub fn new(kappa: Complex64) -> Result<Self> {
        let magnitude = kappa.norm();
        if !(magnitude <= 1.0 + KAPPA_TOL) {
            return Err(Error::KappaOutOfRange { magnitude });
        }
        Ok(Self(kappa))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn magnitude(&self) -> f64 {
        self.0.norm()
    }

    pub fn phase(&self) -> f64 {
        self.0.arg()
    }
}

impl Mul for DecoherenceValue {
    type Output = DecoherenceValue;

    fn mul(self, rhs: Self) -> Self {
        DecoherenceValue(self.0 * rhs.0)
    }
}

/// Birefringences and interaction times of both sides of the protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSchedule {
    pub delta_n_a: f64,
    pub delta_n_b: f64,
    /// fs
    pub t_a: f64,
    /// fs
    pub t_b: f64,
}

impl NoiseSchedule {
    pub fn new(delta_n_a: f64, delta_n_b: f64, t_a: f64, t_b: f64) -> Result<Self> {
        if !(delta_n_a.is_finite() && delta_n_b.is_finite()) {
            return Err(Error::InvalidSchedule("birefringence must be finite".into()));
        }
        for (name, t) in [("t_a", t_a), ("t_b", t_b)] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::InvalidSchedule(format!("{name} = {t} must be finite and >= 0")));
            }
        }
        Ok(Self { delta_n_a, delta_n_b, t_a, t_b })
    }

    /// Bob's birefringence is `sign · Δn_a`.
    pub fn conditional(delta_n_a: f64, sign: i8, t_a: f64, t_b: f64) -> Result<Self> {
        Self::new(delta_n_a, f64::from(sign) * delta_n_a, t_a, t_b)
    }

    /// Decoherence function Bob's qubit sees after both interactions, valid
    /// when `delta_n_b` follows the correction table for the outcome.
    pub fn nonlocal_kappa(&self, spectrum: &dyn JointSpectrum) -> Result<DecoherenceValue> {
        nonlocal_decoherence(spectrum, self.delta_n_b, self.t_a, self.t_b)
    }
}

/// Optical path difference expressed in units of [`AXIS_UNIT_NM`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PathLengthAxis(f64);

impl PathLengthAxis {
    pub fn new(units: f64) -> Result<Self> {
        if !(units.is_finite() && units >= 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "path difference {units} must be finite and >= 0"
            )));
        }
        Ok(Self(units))
    }

    pub fn units(&self) -> f64 {
        self.0
    }

    /// Interaction time that accumulates this path difference, see
    /// [`path_axis_to_time`].
    pub fn to_time(&self, delta_n: f64) -> Result<f64> {
        path_axis_to_time(*self, delta_n)
    }
}

/// The axis value times λ0 is the accumulated optical path difference
/// `|Δn|·c·t`, so `t = x·λ0 / (|Δn|·c)`. The resulting dephasing phase
/// `ω·Δn·t` is independent of `Δn`.
pub fn path_axis_to_time(x: PathLengthAxis, delta_n: f64) -> Result<f64> {
    if delta_n == 0.0 || !delta_n.is_finite() {
        return Err(Error::InvalidSchedule(format!(
            "cannot convert path difference with delta_n = {delta_n}"
        )));
    }
    Ok(x.0 * AXIS_UNIT_NM / (delta_n.abs() * SPEED_OF_LIGHT))
}

pub fn time_to_path_axis(t: f64, delta_n: f64) -> Result<PathLengthAxis> {
    PathLengthAxis::new(t * delta_n.abs() * SPEED_OF_LIGHT / AXIS_UNIT_NM)
}

/// `κ(t) = ∫|g|² e^{−iΔn ω_a t}`: one photon dephased, the other idle.
pub fn local_decoherence(
    spectrum: &dyn JointSpectrum,
    delta_n: f64,
    t: f64,
) -> Result<DecoherenceValue> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidSchedule(format!("t = {t} must be finite and >= 0")));
    }
    DecoherenceValue::new(spectrum.characteristic(delta_n * t, 0.0))
}

/// `κ(t_a, t_b) = ∫|g|² e^{−iΔn_b(ω_a t_a + ω_b t_b)}`.
pub fn nonlocal_decoherence(
    spectrum: &dyn JointSpectrum,
    delta_n_b: f64,
    t_a: f64,
    t_b: f64,
) -> Result<DecoherenceValue> {
    NoiseSchedule::new(delta_n_b, delta_n_b, t_a, t_b)?;
    DecoherenceValue::new(spectrum.characteristic(delta_n_b * t_a, delta_n_b * t_b))
}

/// Local dephasing of the first polarization qubit: every element whose
/// first-qubit polarization differs between row and column picks up `κ`
/// (`|H·⟩⟨V·|`) or `κ*` (`|V·⟩⟨H·|`). On `|Φ⁺⟩` this scales exactly the
/// HH–VV coherence.
pub fn dephase_pair(rho: &Density4, kappa: DecoherenceValue) -> Density4 {
    let mut m = *rho.matrix();
    let k = kappa.value();
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            match (i / 2, j / 2) {
                (0, 1) => *cell *= k,
                (1, 0) => *cell *= k.conj(),
                _ => {}
            }
        }
    }
    Density4::from_matrix_unchecked(m)
}

/// Scales the H–V coherence of a single polarization qubit by `κ`.
pub fn dephase_single(rho: &Density2, kappa: DecoherenceValue) -> Density2 {
    let mut m = *rho.matrix();
    m[0][1] *= kappa.value();
    m[1][0] *= kappa.value().conj();
    Density2::new(m).expect("dephasing with |κ| <= 1 keeps the state valid")
}
