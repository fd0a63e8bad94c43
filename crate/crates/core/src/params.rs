//! System parameters of the waveguide-coupled Jaynes-Cummings model.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::C64;

/// Relative tolerance for treating the cavity as resonant with the atom.
///
/// Well below any detuning of physical interest but wide enough to absorb
/// rounding in parameters that were computed rather than typed in.
pub const RESONANCE_TOL: f64 = 1e-12;

/// Physical parameters of the local system and its waveguide coupling.
///
/// All quantities share one dimensionless unit system because the waveguide
/// group velocity is fixed to 1. The serialized field for the atomic
/// transition frequency is spelled `Omega`, mirroring the CLI flag; the
/// cavity frequency is lowercase `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Cavity mode frequency.
    pub omega: f64,
    /// Atomic transition frequency.
    #[serde(rename = "Omega")]
    pub omega_atom: f64,
    /// Atom-cavity coupling rate, `>= 0`.
    pub g: f64,
    /// Cavity-waveguide coupling (decay) rate, `>= 0`.
    pub kappa: f64,
}

impl SystemParams {
    /// Validates and builds a parameter set.
    ///
    /// Requires finite `omega` and `omega_atom`, and finite `g >= 0`,
    /// `kappa >= 0`.
    pub fn new(omega: f64, omega_atom: f64, g: f64, kappa: f64) -> Result<Self> {
        let params = SystemParams {
            omega,
            omega_atom,
            g,
            kappa,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks the field invariants, for parameter sets built literally.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("omega", self.omega),
            ("Omega", self.omega_atom),
            ("g", self.g),
            ("kappa", self.kappa),
        ] {
            if !value.is_finite() {
                return Err(CoreError::InvalidArgument(format!(
                    "{name} must be finite, got {value}"
                )));
            }
        }
        if self.g < 0.0 {
            return Err(CoreError::InvalidArgument(format!(
                "g must be >= 0, got {}",
                self.g
            )));
        }
        if self.kappa < 0.0 {
            return Err(CoreError::InvalidArgument(format!(
                "kappa must be >= 0, got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    /// Complex cavity frequency `omega - i kappa / 2`, the lossy-cavity pole
    /// entering every sector matrix.
    pub fn complex_cavity_freq(&self) -> C64 {
        C64::new(self.omega, -self.kappa / 2.0)
    }

    /// Whether the cavity is resonant with the atom within [`RESONANCE_TOL`].
    pub fn is_resonant(&self) -> bool {
        let scale = self.omega.abs().max(self.omega_atom.abs()).max(1.0);
        (self.omega - self.omega_atom).abs() <= RESONANCE_TOL * scale
    }

    /// Errors with a domain message unless the cavity is resonant with the
    /// atom, as required by the resonant closed forms.
    pub fn require_resonant(&self, what: &str) -> Result<()> {
        if self.is_resonant() {
            Ok(())
        } else {
            Err(CoreError::Domain(format!(
                "{what} requires resonance omega = Omega, got omega = {}, Omega = {}",
                self.omega, self.omega_atom
            )))
        }
    }
}
