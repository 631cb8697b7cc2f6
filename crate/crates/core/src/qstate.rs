//! One- and two-qubit states and the figures of merit used throughout the crate.
//!
//! Basis conventions are fixed: path qubit `{|0⟩, |1⟩}`, polarization
//! `{|H⟩, |V⟩}` (index 0 = H), two-qubit ordering `{HH, HV, VH, VV}`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density operator.
pub const PSD_TOL: f64 = -1e-10;
pub const UNITARY_TOL: f64 = 1e-12;
pub const NORM_TOL: f64 = 1e-12;

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn sigma_x() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn sigma_y() -> Mat2 {
    [[ZERO, -I], [I, ZERO]]
}

pub fn sigma_z() -> Mat2 {
    [[ONE, ZERO], [ZERO, -ONE]]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn adjoint(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

pub fn scale(a: &Mat2, s: Complex64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub fn det(a: &Mat2) -> Complex64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn max_abs_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut m = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

/// A normalized single-qubit ket `α|0⟩ + β|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit {
    alpha: Complex64,
    beta: Complex64,
}

impl PureQubit {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !(norm - 1.0).abs().le(&NORM_TOL) {
            return Err(Error::InvalidState(format!(
                "pure state norm |α|²+|β|² = {norm}, expected 1"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Rescales arbitrary non-zero amplitudes onto the unit sphere.
    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidState("zero or non-finite amplitudes".into()));
        }
        Ok(Self {
            alpha: alpha / n,
            beta: beta / n,
        })
    }

    /// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self {
            alpha: Complex64::new((theta / 2.0).cos(), 0.0),
            beta: Complex64::from_polar((theta / 2.0).sin(), phi),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.alpha, self.beta]
    }

    pub fn projector(&self) -> Density2 {
        let a = self.amplitudes();
        let mut m = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i] * a[j].conj();
            }
        }
        Density2 { m }
    }
}

/// Single-qubit density operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Density2 {
    m: Mat2,
}

impl Density2 {
    /// Validates Hermiticity, unit trace and positivity; states inside the
    /// tolerances are accepted as-is.
    pub fn new(m: Mat2) -> Result<Self> {
        for row in &m {
            for z in row {
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::InvalidState("non-finite matrix element".into()));
                }
            }
        }
        let herm = max_abs_diff(&m, &adjoint(&m));
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = m[0][0] + m[1][1];
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let rho = Self { m };
        let [lo, _] = rho.eigenvalues();
        if lo < PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {lo:.3e}"
            )));
        }
        Ok(rho)
    }

    /// `(I + r·σ)/2`; requires `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let [x, y, z] = r;
        Self::new([
            [Complex64::new((1.0 + z) / 2.0, 0.0), Complex64::new(x, -y) / 2.0],
            [Complex64::new(x, y) / 2.0, Complex64::new((1.0 - z) / 2.0, 0.0)],
        ])
    }

    pub fn maximally_mixed() -> Self {
        Self {
            m: [[ONE / 2.0, ZERO], [ZERO, ONE / 2.0]],
        }
    }

    /// Computational basis projector `|i⟩⟨i|`.
    pub fn basis(i: usize) -> Self {
        let mut m = [[ZERO; 2]; 2];
        m[i][i] = ONE;
        Self { m }
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j]
    }

    pub fn bloch(&self) -> [f64; 3] {
        let c = self.m[1][0];
        [2.0 * c.re, 2.0 * c.im, (self.m[0][0] - self.m[1][1]).re]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(&self.m)
    }

    pub fn det(&self) -> f64 {
        det(&self.m).re
    }
}

impl fmt::Display for Density2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.m {
            writeln!(
                f,
                "[{:+.12}{:+.12}i  {:+.12}{:+.12}i]",
                row[0].re, row[0].im, row[1].re, row[1].im
            )?;
        }
        Ok(())
    }
}

/// Eigenvalues of a 2×2 Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &Mat2) -> [f64; 2] {
    let mean = (m[0][0].re + m[1][1].re) / 2.0;
    let half_gap = (m[0][0].re - m[1][1].re) / 2.0;
    let r = half_gap.hypot(m[0][1].norm());
    [mean - r, mean + r]
}

/// Two-qubit density operator in the `{HH, HV, VH, VV}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Density4 {
    m: Mat4,
}

impl Density4 {
    pub fn new(m: Mat4) -> Result<Self> {
        let mut herm = 0.0f64;
        let mut tr = ZERO;
        for i in 0..4 {
            tr += m[i][i];
            for j in 0..4 {
                if !(m[i][j].re.is_finite() && m[i][j].im.is_finite()) {
                    return Err(Error::InvalidState("non-finite matrix element".into()));
                }
                herm = herm.max((m[i][j] - m[j][i].conj()).norm());
            }
        }
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let rho = Self { m };
        let lo = rho.eigenvalues()[0];
        if lo < PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {lo:.3e}"
            )));
        }
        Ok(rho)
    }

    pub fn from_pure(psi: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("ket norm {norm}, expected 1")));
        }
        let mut m = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = psi[i] * psi[j].conj();
            }
        }
        Ok(Self { m })
    }

    /// Projector onto a polarization Bell state, e.g. `|Φ⁺⟩ = (|HH⟩+|VV⟩)/√2`.
    pub fn bell(outcome: BellOutcome) -> Self {
        Self::from_pure(outcome.ket()).expect("Bell kets are normalized")
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j]
    }

    pub(crate) fn from_matrix_unchecked(m: Mat4) -> Self {
        Self { m }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut ev: Vec<f64> = eigh4(&self.m).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        [ev[0], ev[1], ev[2], ev[3]]
    }

    /// Polarization state of the second qubit after tracing out the first.
    pub fn partial_trace_first(&self) -> Density2 {
        let mut m = [[ZERO; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[i][j] + self.m[2 + i][2 + j];
            }
        }
        Density2 { m }
    }
}

fn to_na(m: &Mat4) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| m[i][j])
}

fn eigh4(m: &Mat4) -> SymmetricEigen<Complex64, nalgebra::U4> {
    SymmetricEigen::new(to_na(m))
}

/// Outcome of the path–polarization Bell measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BellOutcome::PhiPlus => "phi_plus",
            BellOutcome::PhiMinus => "phi_minus",
            BellOutcome::PsiPlus => "psi_plus",
            BellOutcome::PsiMinus => "psi_minus",
        }
    }

    /// Ket in the two-qubit product basis `{0H, 0V, 1H, 1V}` (equivalently
    /// `{HH, HV, VH, VV}`).
    pub fn ket(self) -> [Complex64; 4] {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            BellOutcome::PhiPlus => [h, ZERO, ZERO, h],
            BellOutcome::PhiMinus => [h, ZERO, ZERO, -h],
            BellOutcome::PsiPlus => [ZERO, h, h, ZERO],
            BellOutcome::PsiMinus => [ZERO, h, -h, ZERO],
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BellOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "phi_plus" | "phi+" => Ok(BellOutcome::PhiPlus),
            "phi_minus" | "phi_" => Ok(BellOutcome::PhiMinus),
            "psi_plus" | "psi+" => Ok(BellOutcome::PsiPlus),
            "psi_minus" | "psi_" => Ok(BellOutcome::PsiMinus),
            other => Err(Error::config(
                "outcome",
                format!("unknown Bell outcome `{other}` (expected phi_plus, phi_minus, psi_plus or psi_minus)"),
            )),
        }
    }
}

/// Determinants this small are round-off on a pure state. Left in, their
/// square root would show up in the fidelity at the 1e-8 level.
const PURE_DET_TOL: f64 = 1e-15;

fn snap_det(d: f64) -> f64 {
    if d < PURE_DET_TOL {
        0.0
    } else {
        d
    }
}

/// Uhlmann fidelity `(tr √(√a b √a))²`, evaluated with the 2×2 closed form
/// `tr(ab) + 2√(det a · det b)`.
pub fn fidelity(a: &Density2, b: &Density2) -> f64 {
    let mut tr = ZERO;
    for i in 0..2 {
        for k in 0..2 {
            tr += a.m[i][k] * b.m[k][i];
        }
    }
    let dets = snap_det(a.det()) * snap_det(b.det());
    (tr.re + 2.0 * dets.sqrt()).clamp(0.0, 1.0)
}

/// `½ tr|a − b|`.
pub fn trace_distance(a: &Density2, b: &Density2) -> f64 {
    let mut d = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            d[i][j] = a.m[i][j] - b.m[i][j];
        }
    }
    let [l0, l1] = hermitian_eigenvalues(&d);
    (0.5 * (l0.abs() + l1.abs())).clamp(0.0, 1.0)
}

pub fn trace_distance4(a: &Density4, b: &Density4) -> f64 {
    let mut d = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            d[i][j] = a.m[i][j] - b.m[i][j];
        }
    }
    let ev = eigh4(&d).eigenvalues;
    (0.5 * ev.iter().map(|l| l.abs()).sum::<f64>()).clamp(0.0, 1.0)
}

/// `tr(ρ²)`.
pub fn purity(rho: &Density2) -> f64 {
    let m = &rho.m;
    m[0][0].norm_sqr() + m[1][1].norm_sqr() + 2.0 * m[0][1].norm_sqr()
}

/// Returns `u ρ u†` after checking `u†u = I`.
pub fn apply_unitary(u: &Mat2, rho: &Density2) -> Result<Density2> {
    let deviation = max_abs_diff(&mat_mul(&adjoint(u), u), &identity());
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(Density2 {
        m: mat_mul(&mat_mul(u, &rho.m), &adjoint(u)),
    })
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &Density4) -> f64 {
    // ρ̃ = (σy⊗σy) ρ* (σy⊗σy); in the HH,HV,VH,VV basis σy⊗σy is the
    // anti-diagonal with signs (-1, +1, +1, -1).
    let flip = [(3usize, -1.0), (2, 1.0), (1, 1.0), (0, -1.0)];
    let m = &rho.m;
    let tilde = Matrix4::from_fn(|i, j| {
        let (ii, si) = flip[i];
        let (jj, sj) = flip[j];
        m[ii][jj].conj() * (si * sj)
    });
    let eig = eigh4(m);
    let sqrt_vals = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = eig.eigenvectors;
    let sqrt_rho = &v * Matrix4::from_diagonal(&sqrt_vals.map(|x| Complex64::new(x, 0.0))) * v.adjoint();
    let r = &sqrt_rho * tilde * &sqrt_rho;
    // Symmetrize to remove round-off before the Hermitian solver.
    let r = (r + r.adjoint()) * Complex64::new(0.5, 0.0);
    let mut lambdas: Vec<f64> = SymmetricEigen::new(r)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0)
}
