//! Excitation sectors of the non-Hermitian effective Hamiltonian.
//!
//! The effective Hamiltonian commutes with the total excitation number, so it
//! splits into 2x2 blocks. In the ordered basis
//! `{|n photons, atom ground>, |n-1 photons, atom excited>}` the block for
//! `n >= 1` excitations reads
//!
//! ```text
//! [ n*(omega - i*kappa/2)          sqrt(n)*g                  ]
//! [ sqrt(n)*g                      (n-1)*(omega - i*kappa/2) + Omega ]
//! ```
//!
//! Its eigenvalue pair coalesces, together with the eigenvectors, at the
//! exceptional point `omega = Omega`, `kappa = 4*sqrt(n)*g`. The matrix is
//! complex symmetric, so left (row) eigenvectors are plain transposes of the
//! right ones and all left-right pairings below are bilinear, without complex
//! conjugation.

use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::params::SystemParams;
use crate::C64;

/// Complex eigenvalue of an excitation sector. The real part is a frequency;
/// the imaginary part is a decay and is `<= 0` for physical poles.
pub type ComplexEnergy = C64;

/// Default relative tolerance for detecting eigenvalue coalescence.
///
/// Well above the double-precision noise of the closed-form eigenvalues and
/// far below any physical gap in the parameter regimes of interest.
pub const EP_TOLERANCE: f64 = 1e-9;

/// One excitation sector: matrix, eigenvalues, biorthogonal eigenvectors.
///
/// Index 0 of the eigenvector arrays is the `+` branch, index 1 the `-`
/// branch. Right eigenvectors have unit Euclidean norm; left eigenvectors are
/// scaled so that the bilinear pairing `sum_i left[i] * right[i]` equals 1 on
/// the same branch and 0 across branches. At the exceptional point the matrix
/// is defective, the bilinear self-pairing vanishes, and the left vectors are
/// left at unit scale instead; `is_ep` marks that case.
#[derive(Debug, Clone)]
pub struct ExcitationSector {
    /// Excitation number, `>= 1`.
    pub n: u32,
    /// The 2x2 sector block of the effective Hamiltonian.
    pub h_matrix: [[C64; 2]; 2],
    /// Eigenvalue on the `+` branch (principal square root).
    pub e_plus: ComplexEnergy,
    /// Eigenvalue on the `-` branch.
    pub e_minus: ComplexEnergy,
    /// Unit-norm right eigenvectors, `[plus, minus]`.
    pub right_vecs: [[C64; 2]; 2],
    /// Row eigenvectors scaled for biorthonormality, `[plus, minus]`.
    pub left_vecs: [[C64; 2]; 2],
    /// Whether the eigenvalue pair coalesced within `ep_tolerance`.
    pub is_ep: bool,
    /// Relative tolerance used for coalescence detection.
    pub ep_tolerance: f64,
    /// Scale the tolerance is relative to: `max(|e_plus|, |e_minus|, kappa)`.
    pub ep_scale: f64,
}

impl ExcitationSector {
    /// Eigenvalue gap `e_plus - e_minus` (zero when coalesced).
    pub fn gap(&self) -> C64 {
        self.e_plus - self.e_minus
    }

    /// Whether the sector is too close to coalescence for its spectral
    /// decomposition to be used (gap below `100 * ep_tolerance * ep_scale`).
    ///
    /// Operations built on the eigenvector decomposition refuse sectors in
    /// this zone; the closed-form and confluent formulas cover it exactly.
    pub fn in_exclusion_zone(&self) -> bool {
        self.gap().norm() < 100.0 * self.ep_tolerance * self.ep_scale
    }

    /// Errors with a degenerate-spectrum message if the sector is inside the
    /// exclusion zone around the exceptional point.
    pub fn require_spectral(&self, what: &str) -> Result<()> {
        if self.in_exclusion_zone() {
            Err(CoreError::DegenerateSpectrum(format!(
                "{what}: sector n = {} is within the exceptional-point exclusion zone \
                 (gap {:.3e}, threshold {:.3e}); use the closed-form path instead",
                self.n,
                self.gap().norm(),
                100.0 * self.ep_tolerance * self.ep_scale
            )))
        } else {
            Ok(())
        }
    }
}

/// Closed-form eigenvalue pair of the sector, with coalescence snapping.
///
/// Returns `(e_plus, e_minus, is_ep, scale)`. When the pair lies within the
/// detection tolerance the `+/-` square root is pure rounding noise, so both
/// eigenvalues are reported as the common center; this is what makes the
/// coalesced pair exactly degenerate at exceptional points whose `kappa`
/// value is not exactly representable.
/// Discriminant under the square root of the eigenvalue pair for sector `n`.
///
/// On exact resonance the square of the purely imaginary detuning carries a
/// negative-zero imaginary part, which would flip the principal root to the
/// wrong side of the branch cut; normalize it to plus zero so a negative
/// real discriminant yields a root on the positive imaginary axis.
fn sector_discriminant(params: &SystemParams, n: u32) -> C64 {
    let wc = params.complex_cavity_freq();
    let atom = C64::new(params.omega_atom, 0.0);
    let mut disc = ((wc - atom) / 2.0).powi(2) + f64::from(n) * params.g * params.g;
    if disc.im == 0.0 {
        disc.im = 0.0;
    }
    disc
}

fn closed_eigenpair(params: &SystemParams, n: u32, tol: f64) -> (C64, C64, bool, f64) {
    let nf = f64::from(n);
    let wc = params.complex_cavity_freq();
    let atom = C64::new(params.omega_atom, 0.0);
    let center = ((2.0 * nf - 1.0) * wc + atom) / 2.0;
    let root = sector_discriminant(params, n).sqrt();
    let e_plus = center + root;
    let e_minus = center - root;
    let scale = e_plus
        .norm()
        .max(e_minus.norm())
        .max(params.kappa)
        .max(f64::MIN_POSITIVE);
    if (e_plus - e_minus).norm() < tol * scale {
        (center, center, true, scale)
    } else {
        (e_plus, e_minus, false, scale)
    }
}

/// Right eigenvector of the complex-symmetric 2x2 matrix for eigenvalue `e`,
/// at unit Euclidean norm.
///
/// Both null-space candidates `(b, e - a)` and `(e - d, b)` are formed and
/// the larger one is kept, which stays stable when one component underflows.
/// For a scalar matrix (both candidates vanish) the basis vector keyed by
/// `branch` is returned.
fn right_eigenvector(m: &[[C64; 2]; 2], e: C64, branch: usize) -> [C64; 2] {
    let cand_a = [m[0][1], e - m[0][0]];
    let cand_b = [e - m[1][1], m[0][1]];
    let norm_a = cand_a[0].norm_sqr() + cand_a[1].norm_sqr();
    let norm_b = cand_b[0].norm_sqr() + cand_b[1].norm_sqr();
    let best = if norm_a >= norm_b { cand_a } else { cand_b };
    let norm = (best[0].norm_sqr() + best[1].norm_sqr()).sqrt();
    if norm == 0.0 {
        let mut unit = [C64::new(0.0, 0.0); 2];
        unit[branch] = C64::new(1.0, 0.0);
        return unit;
    }
    [best[0] / norm, best[1] / norm]
}

/// Builds the `n`-excitation sector with the default coalescence tolerance.
pub fn build_sector(params: &SystemParams, n: u32) -> Result<ExcitationSector> {
    params.validate()?;
    if n < 1 {
        return Err(CoreError::InvalidArgument(
            "excitation number n must be >= 1".into(),
        ));
    }
    let nf = f64::from(n);
    let wc = params.complex_cavity_freq();
    let atom = C64::new(params.omega_atom, 0.0);
    let coupling = C64::new(nf.sqrt() * params.g, 0.0);
    let h_matrix = [
        [nf * wc, coupling],
        [coupling, (nf - 1.0) * wc + atom],
    ];
    let (e_plus, e_minus, is_ep, ep_scale) = closed_eigenpair(params, n, EP_TOLERANCE);

    let mut right_vecs = [[C64::new(0.0, 0.0); 2]; 2];
    let mut left_vecs = [[C64::new(0.0, 0.0); 2]; 2];
    for (branch, &e) in [e_plus, e_minus].iter().enumerate() {
        let v = right_eigenvector(&h_matrix, e, branch);
        // Bilinear self-pairing of a complex-symmetric eigenvector; vanishes
        // exactly at the exceptional point where left and right collapse.
        let pairing = v[0] * v[0] + v[1] * v[1];
        let left = if is_ep || pairing.norm() < 1e-300 {
            v
        } else {
            [v[0] / pairing, v[1] / pairing]
        };
        right_vecs[branch] = v;
        left_vecs[branch] = left;
    }

    Ok(ExcitationSector {
        n,
        h_matrix,
        e_plus,
        e_minus,
        right_vecs,
        left_vecs,
        is_ep,
        ep_tolerance: EP_TOLERANCE,
        ep_scale,
    })
}

/// Waveguide coupling rate at which the `n`-excitation eigenvalues coalesce,
/// `4 * sqrt(n) * g`. Defined only on resonance and for `g > 0`.
pub fn exceptional_point_kappa(params: &SystemParams, n: u32) -> Result<f64> {
    params.validate()?;
    if n < 1 {
        return Err(CoreError::InvalidArgument(
            "excitation number n must be >= 1".into(),
        ));
    }
    params.require_resonant("exceptional point")?;
    if params.g <= 0.0 {
        return Err(CoreError::Domain(
            "exceptional point requires g > 0; the sectors are never defective without coupling"
                .into(),
        ));
    }
    Ok(4.0 * f64::from(n).sqrt() * params.g)
}

/// Eigenvalue difference `E_{n,+} - E_{n,-} = 2 * sqrt(((omega - i*kappa/2
/// - Omega)/2)^2 + n g^2)` with the principal square root, without the
/// coalescence snapping applied by [`build_sector`].
///
/// Useful as a smooth coalescence measure: it vanishes at the exceptional
/// point, is real for a Hermitian gap and purely imaginary when the decay
/// splitting dominates.
pub fn discriminant_gap(params: &SystemParams, n: u32) -> Result<ComplexEnergy> {
    params.validate()?;
    if n < 1 {
        return Err(CoreError::InvalidArgument(
            "excitation number n must be >= 1".into(),
        ));
    }
    Ok(2.0 * sector_discriminant(params, n).sqrt())
}

/// One row of a spectrum sweep: the eigenvalue pair at a parameter point,
/// with branch labels carried continuously along the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub n: u32,
    pub omega: f64,
    pub kappa: f64,
    pub e_plus: ComplexEnergy,
    pub e_minus: ComplexEnergy,
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(CoreError::InvalidArgument(format!("{name} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(CoreError::InvalidArgument(format!(
            "{name} grid contains a non-finite value"
        )));
    }
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(CoreError::InvalidArgument(format!(
            "{name} grid must be strictly monotone"
        )));
    }
    Ok(())
}

/// Sweeps the sector eigenvalues over a kappa grid, optionally crossed with
/// an omega grid, for each excitation number in `n_list`.
///
/// Rows are ordered by `n`, then omega, then kappa. Within each `(n, omega)`
/// slice, branch labels are paired greedily with the previous kappa point so
/// that each labeled branch is continuous along the sweep; the first point
/// uses the principal-branch convention of [`build_sector`]. Slices are
/// computed in parallel with deterministic output ordering.
pub fn sweep_spectrum(
    params_base: &SystemParams,
    n_list: &[u32],
    omega_grid: Option<&[f64]>,
    kappa_grid: &[f64],
) -> Result<Vec<SpectrumRow>> {
    params_base.validate()?;
    if n_list.is_empty() {
        return Err(CoreError::InvalidArgument("n list is empty".into()));
    }
    if let Some(&bad) = n_list.iter().find(|&&n| n < 1) {
        return Err(CoreError::InvalidArgument(format!(
            "excitation numbers must be >= 1, got {bad}"
        )));
    }
    check_grid("kappa", kappa_grid)?;
    if let Some(grid) = omega_grid {
        check_grid("omega", grid)?;
    }
    if kappa_grid.iter().any(|&k| k < 0.0) {
        return Err(CoreError::InvalidArgument(
            "kappa grid contains a negative value".into(),
        ));
    }

    let omegas: Vec<f64> = match omega_grid {
        Some(grid) => grid.to_vec(),
        None => vec![params_base.omega],
    };
    let slices: Vec<(u32, f64)> = n_list
        .iter()
        .flat_map(|&n| omegas.iter().map(move |&omega| (n, omega)))
        .collect();

    let rows: Vec<Vec<SpectrumRow>> = slices
        .par_iter()
        .map(|&(n, omega)| {
            let mut slice = Vec::with_capacity(kappa_grid.len());
            let mut prev: Option<(C64, C64)> = None;
            for &kappa in kappa_grid {
                let params = SystemParams {
                    omega,
                    kappa,
                    ..*params_base
                };
                let (mut e_plus, mut e_minus, _, _) =
                    closed_eigenpair(&params, n, EP_TOLERANCE);
                if let Some((prev_plus, prev_minus)) = prev {
                    let keep = (e_plus - prev_plus).norm() + (e_minus - prev_minus).norm();
                    let swap = (e_minus - prev_plus).norm() + (e_plus - prev_minus).norm();
                    if swap < keep {
                        std::mem::swap(&mut e_plus, &mut e_minus);
                    }
                }
                prev = Some((e_plus, e_minus));
                slice.push(SpectrumRow {
                    n,
                    omega,
                    kappa,
                    e_plus,
                    e_minus,
                });
            }
            slice
        })
        .collect();

    Ok(rows.into_iter().flatten().collect())
}
