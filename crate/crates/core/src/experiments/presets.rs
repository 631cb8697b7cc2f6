//! The four tomographed path-qubit input states used in the laboratory runs.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{purity, Density2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputPreset {
    pub name: &'static str,
    pub rho: Density2,
    /// Purity quoted alongside the tomography result.
    pub reported_purity: f64,
}

pub const PRESET_NAMES: [&str; 4] = ["rho_plus", "rho_1", "rho_2", "rho_i"];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Hermitian matrix from its printed upper triangle.
fn printed(d0: f64, off: Complex64, d1: f64) -> [[Complex64; 2]; 2] {
    [[c(d0, 0.0), off], [off.conj(), c(d1, 0.0)]]
}

/// The printed `ρ₊` has trace 0.9999 and a slightly negative eigenvalue, so it
/// is trace-normalized and its Bloch vector shrunk radially to the quoted
/// purity. Every entry stays within rounding of the printed digits.
fn rho_plus() -> Density2 {
    let m = printed(0.5507, c(0.4871, 0.1007), 0.4492);
    let tr = m[0][0].re + m[1][1].re;
    let r = [2.0 * m[1][0].re / tr, 2.0 * m[1][0].im / tr, (m[0][0].re - m[1][1].re) / tr];
    let target = (2.0 * 0.999955 - 1.0f64).sqrt();
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    Density2::from_bloch(r.map(|x| x * target / norm)).expect("shrunk Bloch vector is physical")
}

pub fn preset(name: &str) -> Result<InputPreset> {
    let (name, rho, reported_purity) = match name {
        "rho_plus" => ("rho_plus", rho_plus(), 0.999955),
        "rho_1" => (
            "rho_1",
            Density2::new(printed(0.9794, c(0.0151, -0.0321), 0.0206))?,
            0.962166,
        ),
        "rho_2" => (
            "rho_2",
            Density2::new(printed(0.0255, c(0.01304, 0.0932), 0.9745))?,
            0.968013,
        ),
        "rho_i" => (
            "rho_i",
            Density2::new(printed(0.6060, c(0.02178, -0.4827), 0.3940))?,
            0.989419,
        ),
        other => {
            return Err(Error::config(
                "inputs",
                format!("unknown input preset `{other}` (expected one of {})", PRESET_NAMES.join(", ")),
            ))
        }
    };
    debug_assert!((purity(&rho) - reported_purity).abs() < 1e-5);
    Ok(InputPreset { name, rho, reported_purity })
}

pub fn all_presets() -> Vec<InputPreset> {
    PRESET_NAMES.iter().map(|n| preset(n).expect("built-in preset")).collect()
}
