//! Photon scattering amplitudes off the waveguide-coupled system.
//!
//! The single-photon transmission and the connected two-photon S matrix are
//! implemented twice on purpose: once as rational closed forms in the system
//! parameters, and once as spectral decompositions over the biorthogonal
//! eigensystems of the one- and two-excitation sectors. The two routes are
//! algebraically equal away from exceptional points, and tests hold them to
//! each other.
//!
//! All two-photon amplitudes are densities with the total-frequency delta
//! function factored out, so `p2 = k1 + k2 - p1` is implied throughout.

use std::f64::consts::PI;

use crate::error::{CoreError, Result};
use crate::params::SystemParams;
use crate::sector::build_sector;
use crate::C64;

/// Connected two-photon S-matrix value at one outgoing/incoming frequency
/// tuple, with the inputs echoed alongside the amplitude.
#[derive(Debug, Clone, Copy)]
pub struct TwoPhotonSMatrixEval {
    /// Connected amplitude with the delta function factored out.
    pub amplitude: C64,
    pub p1: f64,
    pub p2: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Photon creation/annihilation matrix elements between excitation sectors,
/// taken in the biorthogonal bases, plus the sector eigenvalues they pair
/// with in spectral sums. Branch index 0 is `+`, 1 is `-`.
#[derive(Debug, Clone, Copy)]
pub struct SpectralAmplitudes {
    /// `<0| a |lambda>_1`: vacuum reached from the one-excitation sector.
    pub vac_a_one: [C64; 2],
    /// `_1<lambda-bar| a-dagger |0>`: one-excitation row states from vacuum.
    pub one_adag_vac: [C64; 2],
    /// `_1<nu-bar| a |lambda>_2`, indexed `[nu][lambda]`.
    pub one_a_two: [[C64; 2]; 2],
    /// `_2<lambda-bar| a-dagger |mu>_1`, indexed `[lambda][mu]`.
    pub two_adag_one: [[C64; 2]; 2],
    /// One-excitation eigenvalues `[plus, minus]`.
    pub e_one: [C64; 2],
    /// Two-excitation eigenvalues `[plus, minus]`.
    pub e_two: [C64; 2],
}

fn require_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(CoreError::InvalidArgument(format!(
            "{name} must be finite, got {value}"
        )))
    }
}

/// Denominator shared by the transmission and the auxiliary amplitudes:
/// `(k - omega + i*kappa/2)(k - Omega) - g^2`.
fn response_denominator(params: &SystemParams, k: f64) -> C64 {
    let detune_cavity = C64::new(k - params.omega, params.kappa / 2.0);
    let detune_atom = C64::new(k - params.omega_atom, 0.0);
    detune_cavity * detune_atom - params.g * params.g
}

/// Single-photon transmission coefficient.
///
/// The numerator is the complex conjugate of the denominator for real
/// inputs, so the modulus is one: a single photon is always fully
/// transmitted, only its phase is shifted.
pub fn transmission(params: &SystemParams, k: f64) -> Result<C64> {
    params.validate()?;
    require_finite("k", k)?;
    let numerator =
        C64::new(k - params.omega, -params.kappa / 2.0) * (k - params.omega_atom)
            - params.g * params.g;
    let denominator = response_denominator(params, k);
    debug_assert!(
        denominator.norm() > 0.0,
        "transmission denominator vanished; requires g > 0 or k != Omega"
    );
    Ok(numerator / denominator)
}

/// Auxiliary amplitudes `(s_c, s_a)` of the connected S matrix: the cavity
/// and atom channel responses at frequency `k`.
pub fn s_aux(params: &SystemParams, k: f64) -> Result<(C64, C64)> {
    params.validate()?;
    require_finite("k", k)?;
    let denominator = response_denominator(params, k);
    debug_assert!(denominator.norm() > 0.0);
    let sqrt_kappa = params.kappa.sqrt();
    let s_c = sqrt_kappa * (k - params.omega_atom) / denominator;
    let s_a = sqrt_kappa * params.g / denominator;
    Ok((s_c, s_a))
}

/// Frequency-entangling vertex `F(k1, k2)` of the connected S matrix: the
/// two-excitation response that feeds the outgoing-photon pole factors.
pub(crate) fn f_vertex(params: &SystemParams, k1: f64, k2: f64) -> Result<C64> {
    let (s_c1, s_a1) = s_aux(params, k1)?;
    let (s_c2, s_a2) = s_aux(params, k2)?;
    let two = build_sector(params, 2)?;
    let k_total = C64::new(k1 + k2, 0.0);
    let bracket = 2.0 * params.g * (s_c1 + s_c2)
        + C64::new(k1 + k2 - 2.0 * params.omega, params.kappa) * (s_a1 + s_a2);
    let prefactor = C64::new(0.0, params.kappa.sqrt() * params.g / PI);
    Ok(prefactor * bracket / ((k_total - two.e_plus) * (k_total - two.e_minus)))
}

/// Connected part of the two-photon S matrix at outgoing `p1` (and the
/// conservation partner `p2 = k1 + k2 - p1`) for incoming `(k1, k2)`.
///
/// A closed rational form: the vertex `F(k1, k2)` divided by the four
/// outgoing single-excitation pole factors. Valid at exceptional points,
/// where the coalesced pole simply appears squared.
pub fn connected_s2(params: &SystemParams, p1: f64, k1: f64, k2: f64) -> Result<TwoPhotonSMatrixEval> {
    params.validate()?;
    require_finite("p1", p1)?;
    require_finite("k1", k1)?;
    require_finite("k2", k2)?;
    let p2 = k1 + k2 - p1;
    let one = build_sector(params, 1)?;
    debug_assert!(one.e_plus.im <= 0.0 && one.e_minus.im <= 0.0);
    let vertex = f_vertex(params, k1, k2)?;
    let poles = (p1 - one.e_plus) * (p1 - one.e_minus) * (p2 - one.e_plus) * (p2 - one.e_minus);
    let amplitude = params.kappa * params.g * params.g * vertex / poles;
    Ok(TwoPhotonSMatrixEval {
        amplitude,
        p1,
        p2,
        k1,
        k2,
    })
}

/// Photon matrix elements between the vacuum, one-, and two-excitation
/// sectors in their biorthogonal bases.
///
/// In the sector bases, the annihilator maps `|2 photons, ground>` to
/// `sqrt(2) |1 photon, ground>` and `|1 photon, excited>` to
/// `|0 photons, excited>`, so cross-sector elements contract the left and
/// right eigenvectors through `diag(sqrt(2), 1)`.
pub fn spectral_amplitudes(params: &SystemParams) -> Result<SpectralAmplitudes> {
    let one = build_sector(params, 1)?;
    one.require_spectral("spectral amplitudes")?;
    let two = build_sector(params, 2)?;
    two.require_spectral("spectral amplitudes")?;

    let sqrt2 = 2.0_f64.sqrt();
    let mut one_a_two = [[C64::new(0.0, 0.0); 2]; 2];
    let mut two_adag_one = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            one_a_two[i][j] = sqrt2 * one.left_vecs[i][0] * two.right_vecs[j][0]
                + one.left_vecs[i][1] * two.right_vecs[j][1];
            two_adag_one[i][j] = sqrt2 * two.left_vecs[i][0] * one.right_vecs[j][0]
                + two.left_vecs[i][1] * one.right_vecs[j][1];
        }
    }
    Ok(SpectralAmplitudes {
        vac_a_one: [one.right_vecs[0][0], one.right_vecs[1][0]],
        one_adag_vac: [one.left_vecs[0][0], one.left_vecs[1][0]],
        one_a_two,
        two_adag_one,
        e_one: [one.e_plus, one.e_minus],
        e_two: [two.e_plus, two.e_minus],
    })
}

/// Single-photon scattering correction `G(k)` in spectral form: the photon
/// emission/reabsorption loop through the one-excitation eigenstates,
/// satisfying `1 + G(k) = transmission(k)`.
pub fn spectral_g(params: &SystemParams, k: f64) -> Result<C64> {
    params.validate()?;
    require_finite("k", k)?;
    let one = build_sector(params, 1)?;
    one.require_spectral("spectral_g (the closed-form transmission covers coalesced sectors)")?;
    let mut type_sum = C64::new(0.0, 0.0);
    for (branch, &e) in [one.e_plus, one.e_minus].iter().enumerate() {
        type_sum += one.right_vecs[branch][0] * one.left_vecs[branch][0] / (k - e);
    }
    Ok(C64::new(0.0, -params.kappa) * type_sum)
}

/// Spectral kernel of the connected two-photon S matrix at outgoing `p1`,
/// incoming `k1`, and conserved total `k_total`.
///
/// The middle bracket carries a simple real pole at `p1 = k1` whose
/// principal value is left to the caller: pass the evaluation points through
/// the principal-value quadrature in `numerics` when integrating across it.
/// The symmetrized sum of four kernel values over `(p1, p2) x (k1, k2)`
/// equals the closed-form connected amplitude.
pub fn spectral_g2_kernel(params: &SystemParams, p1: f64, k1: f64, k_total: f64) -> Result<C64> {
    params.validate()?;
    require_finite("p1", p1)?;
    require_finite("k1", k1)?;
    require_finite("k_total", k_total)?;
    if p1 == k1 {
        return Err(CoreError::PrincipalValuePoint(
            "two-photon spectral kernel evaluated exactly at p1 = k1; integrate across the pole \
             with a principal-value quadrature"
                .into(),
        ));
    }
    let amps = spectral_amplitudes(params)?;
    let mut total = C64::new(0.0, 0.0);
    for nu in 0..2 {
        let outgoing = amps.vac_a_one[nu] / (k_total - p1 - amps.e_one[nu]);
        for mu in 0..2 {
            let direct = amps.one_adag_vac[nu] * amps.vac_a_one[mu] / (k1 - p1);
            let mut ladder = C64::new(0.0, 0.0);
            for lambda in 0..2 {
                ladder += amps.one_a_two[nu][lambda] * amps.two_adag_one[lambda][mu]
                    / (k_total - amps.e_two[lambda]);
            }
            total += outgoing * (direct + ladder) * amps.one_adag_vac[mu] / (k1 - amps.e_one[mu]);
        }
    }
    // kappa^2 / (2*pi*i) = -i * kappa^2 / (2*pi).
    Ok(C64::new(0.0, -params.kappa * params.kappa / (2.0 * PI)) * total)
}

/// Connected two-photon amplitude reassembled from the spectral kernel: the
/// four-term symmetrization over outgoing and incoming frequencies.
pub fn spectral_s2_amplitude(params: &SystemParams, p1: f64, k1: f64, k2: f64) -> Result<C64> {
    let p2 = k1 + k2 - p1;
    let k_total = k1 + k2;
    Ok(spectral_g2_kernel(params, p1, k1, k_total)?
        + spectral_g2_kernel(params, p2, k1, k_total)?
        + spectral_g2_kernel(params, p1, k2, k_total)?
        + spectral_g2_kernel(params, p2, k2, k_total)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(omega: f64, omega_atom: f64, g: f64, kappa: f64) -> SystemParams {
        SystemParams::new(omega, omega_atom, g, kappa).unwrap()
    }

    #[test]
    fn transmission_is_unity_on_joint_resonance() {
        let p = params(1.0, 1.0, 0.07, 0.3);
        let t = transmission(&p, 1.0).unwrap();
        assert!((t - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn bare_cavity_resonance_flips_the_phase() {
        let p = params(1.0, 1.3, 0.0, 0.4);
        let t = transmission(&p, 1.0).unwrap();
        assert!((t - C64::new(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn transmission_modulus_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = params(
                rng.gen_range(0.5..1.5),
                rng.gen_range(0.5..1.5),
                rng.gen_range(0.0..0.3),
                rng.gen_range(0.01..1.0),
            );
            let k = rng.gen_range(-2.0..4.0);
            let t = transmission(&p, k).unwrap();
            assert!((t.norm() - 1.0).abs() < 1e-13, "|t| = {} at k = {k}", t.norm());
        }
    }

    #[test]
    fn aux_amplitudes_at_atomic_resonance() {
        let p = params(1.0, 1.0, 0.05, 0.2);
        let (s_c, s_a) = s_aux(&p, 1.0).unwrap();
        assert!(s_c.norm() < 1e-15);
        let expected = -p.kappa.sqrt() / p.g;
        assert!((s_a - expected).norm() < 1e-12);
    }

    #[test]
    fn aux_ratio_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let p = params(1.0, 0.9, 0.12, 0.35);
        for _ in 0..100 {
            let k = rng.gen_range(-1.0..3.0);
            let (s_c, s_a) = s_aux(&p, k).unwrap();
            let lhs = s_a * (k - p.omega_atom);
            let rhs = p.g * s_c;
            let scale = lhs.norm().max(rhs.norm()).max(1e-30);
            assert!((lhs - rhs).norm() < 1e-13 * scale);
        }
    }

    #[test]
    fn atom_channel_closes_without_coupling() {
        let p = params(1.0, 1.2, 0.0, 0.3);
        let (_, s_a) = s_aux(&p, 0.7).unwrap();
        assert_eq!(s_a, C64::new(0.0, 0.0));
    }

    #[test]
    fn connected_amplitude_is_exchange_symmetric() {
        let p = params(1.0, 0.95, 0.09, 0.3);
        let (k1, k2, p1) = (1.04, 0.93, 1.11);
        let base = connected_s2(&p, p1, k1, k2).unwrap();
        let p_swap = connected_s2(&p, k1 + k2 - p1, k1, k2).unwrap();
        let k_swap = connected_s2(&p, p1, k2, k1).unwrap();
        let scale = base.amplitude.norm();
        assert!((base.amplitude - p_swap.amplitude).norm() < 1e-13 * scale);
        assert!((base.amplitude - k_swap.amplitude).norm() < 1e-13 * scale);
        assert_eq!(base.p2, k1 + k2 - p1);
    }

    #[test]
    fn connected_amplitude_vanishes_without_coupling() {
        let p = params(1.0, 1.2, 0.0, 0.3);
        let eval = connected_s2(&p, 1.1, 1.0, 0.9).unwrap();
        assert_eq!(eval.amplitude, C64::new(0.0, 0.0));
    }

    #[test]
    fn spectral_g_reconstructs_transmission() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let p = params(
                1.0,
                rng.gen_range(0.9..1.1),
                rng.gen_range(0.05..0.2),
                rng.gen_range(0.05..0.25),
            );
            let one = build_sector(&p, 1).unwrap();
            if one.in_exclusion_zone() {
                continue;
            }
            let k = rng.gen_range(0.0..2.0);
            let lhs = C64::new(1.0, 0.0) + spectral_g(&p, k).unwrap();
            let rhs = transmission(&p, k).unwrap();
            assert!((lhs - rhs).norm() < 1e-10, "mismatch at k = {k}");
        }
    }

    #[test]
    fn spectral_g_reduces_to_bare_cavity_pole() {
        let p = params(1.0, 1.4, 0.0, 0.3);
        let k = 1.2;
        let g_val = spectral_g(&p, k).unwrap();
        let expected = C64::new(0.0, -p.kappa) / C64::new(k - p.omega, p.kappa / 2.0);
        assert!((g_val - expected).norm() < 1e-14);
    }

    #[test]
    fn spectral_g_rejects_coalesced_sector() {
        let p = params(1.0, 1.0, 0.025, 0.1);
        assert!(matches!(
            spectral_g(&p, 1.0),
            Err(CoreError::DegenerateSpectrum(_))
        ));
    }

    #[test]
    fn spectral_g_decays_at_large_detuning() {
        let p = params(1.0, 1.0, 0.1, 0.3);
        assert!(spectral_g(&p, 1e6).unwrap().norm() < 1e-5);
        assert!(spectral_g(&p, -1e6).unwrap().norm() < 1e-5);
    }

    #[test]
    fn kernel_rejects_the_principal_value_point() {
        let p = params(1.0, 1.0, 0.08, 0.25);
        assert!(matches!(
            spectral_g2_kernel(&p, 1.03, 1.03, 2.0),
            Err(CoreError::PrincipalValuePoint(_))
        ));
    }

    #[test]
    fn kernel_decays_at_large_outgoing_frequency() {
        // The ladder part falls off only first order in the outgoing
        // frequency, so check the 1/P1 scaling rather than a fixed bound.
        let p = params(1.0, 1.0, 0.08, 0.25);
        let far = spectral_g2_kernel(&p, 1e5, 1.02, 2.0).unwrap();
        let farther = spectral_g2_kernel(&p, 2e5, 1.02, 2.0).unwrap();
        assert!(far.norm() < 1e-4);
        let ratio = far.norm() / farther.norm();
        assert!((ratio - 2.0).abs() < 0.01, "ratio = {ratio}");
    }

    #[test]
    fn symmetrized_kernel_sum_matches_connected_amplitude() {
        let p = params(1.0, 1.0, 0.08, 0.25);
        let (k1, k2) = (1.03, 0.95);
        for p1 in [1.07, 0.9, 1.21, 0.78] {
            let spectral = spectral_s2_amplitude(&p, p1, k1, k2).unwrap();
            let closed = connected_s2(&p, p1, k1, k2).unwrap().amplitude;
            let scale = closed.norm();
            assert!(
                (spectral - closed).norm() < 1e-8 * scale,
                "p1 = {p1}: spectral {spectral} vs closed {closed}"
            );
        }
    }

    #[test]
    fn symmetrized_kernel_sum_vanishes_without_coupling() {
        let p = params(1.0, 1.4, 0.0, 0.3);
        let total = spectral_s2_amplitude(&p, 1.1, 1.0, 0.9).unwrap();
        assert!(total.norm() < 1e-10, "residual {}", total.norm());
    }

    #[test]
    fn matrix_element_products_are_normalization_invariant() {
        // Rescaling a right eigenvector by c and its left partner by 1/c
        // leaves every paired product in the spectral sums unchanged; the
        // pairings used by spectral_g are exactly such products.
        let p = params(1.0, 1.02, 0.09, 0.2);
        let one = build_sector(&p, 1).unwrap();
        let c = C64::new(0.3, -1.7);
        for branch in 0..2 {
            let scaled_right = [one.right_vecs[branch][0] * c, one.right_vecs[branch][1] * c];
            let scaled_left = [one.left_vecs[branch][0] / c, one.left_vecs[branch][1] / c];
            let original = one.right_vecs[branch][0] * one.left_vecs[branch][0];
            let rescaled = scaled_right[0] * scaled_left[0];
            assert!((original - rescaled).norm() < 1e-15 * original.norm().max(1e-30));
        }
    }
}
