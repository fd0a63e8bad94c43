//! N-photon slowest-decay bound-state envelopes.
//!
//! At large photon separations the N-photon bound state is governed by
//! single-excitation poles alone and factorizes into a chain: one
//! two-photon decay bracket across the widest-separated neighbor pair,
//! then one single-photon decay bracket per remaining neighbor gap. The
//! ordering step functions in the underlying expression single out the
//! descending arrangement of coordinates, so the coordinate symmetrization
//! collapses to a sort; the frequency symmetrization stays an explicit
//! factorial-size sum.
//!
//! On resonance with all photons at the joint frequency the chain becomes
//! the real product `f(d_1) * g(d_2) * ... * g(d_{N-1})` of neighbor-gap
//! envelopes, which is the form the exceptional-point tightness claims are
//! made for.

use crate::boundstate::f_tau;
use crate::error::{CoreError, Result};
use crate::params::SystemParams;
use crate::scattering::spectral_amplitudes;
use crate::sector::build_sector;
use crate::C64;

/// Cap for the resonant product envelope (single factorial collapse).
pub const MAX_PHOTONS_RESONANT: usize = 8;
/// Cap for the general envelope (explicit factorial frequency sum).
pub const MAX_PHOTONS_GENERAL: usize = 6;

const SEAM_SNAP: f64 = 1e-9;
const SEAM_PROBE: f64 = 1e-6;

/// One evaluation of an N-photon envelope.
#[derive(Debug, Clone)]
pub struct NPhotonEnvelope {
    /// Photon count.
    pub n: u32,
    /// Coordinates as supplied (the value is symmetric under permuting
    /// them).
    pub coordinates: Vec<f64>,
    pub value: C64,
    /// Whether the evaluation used the resonant all-equal-frequency form.
    pub resonant: bool,
}

fn critical_g(g: f64, t: f64) -> f64 {
    t * (-g * t).exp()
}

fn underdamped_g(g: f64, kappa: f64, t: f64) -> f64 {
    let s = (g * g - (kappa / 4.0) * (kappa / 4.0)).sqrt();
    (s * t).sin() / s * (-kappa * t / 4.0).exp()
}

fn overdamped_g(g: f64, kappa: f64, t: f64) -> f64 {
    let a = kappa / 4.0;
    let b = (a * a - g * g).sqrt();
    (((b - a) * t).exp() - (-(a + b) * t).exp()) / (2.0 * b)
}

/// Resonant single-photon gap envelope `g(tau)`: the companion of `f` with
/// `g(0) = 0`, `g'(0) = 1`, solving the same damped oscillator equation.
pub fn g_tau(params: &SystemParams, tau: f64) -> Result<f64> {
    params.validate()?;
    params.require_resonant("resonant envelope g")?;
    if !tau.is_finite() {
        return Err(CoreError::InvalidArgument("tau must be finite".into()));
    }
    let (g, kappa) = (params.g, params.kappa);
    let t = tau.abs();
    let seam = (kappa - 4.0 * g).abs();
    if seam <= SEAM_SNAP * g {
        return Ok(critical_g(g, t));
    }
    debug_assert!(
        seam > SEAM_PROBE * g || {
            let probe = 1.0 / g;
            let exact = if kappa < 4.0 * g {
                underdamped_g(g, kappa, probe)
            } else {
                overdamped_g(g, kappa, probe)
            };
            (exact - critical_g(g, probe)).abs() < 1e-4 * critical_g(g, probe)
        },
        "branch disagreement near the kappa = 4g seam"
    );
    if kappa < 4.0 * g {
        Ok(underdamped_g(g, kappa, t))
    } else {
        Ok(overdamped_g(g, kappa, t))
    }
}

/// Residue weight of an emitted photon at complex pole energy `e`:
/// `-i * kappa * (e - Omega)`.
fn emission_weight(params: &SystemParams, e: C64) -> C64 {
    C64::new(0.0, -params.kappa) * (e - params.omega_atom)
}

fn check_separation(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(CoreError::InvalidArgument(format!(
            "separation must be finite and non-negative, got {x}"
        )));
    }
    Ok(())
}

/// Single-photon decay bracket `F_k(x)`: the two-pole residue combination
/// propagating one photon across a neighbor gap `x`, weighted against the
/// next incoming frequency `k_next`.
///
/// On resonance it reduces to `kappa * g(x) * e^{-i omega x}`.
pub fn aux_single_decay(params: &SystemParams, k_next: f64, x: f64) -> Result<C64> {
    params.validate()?;
    if !k_next.is_finite() {
        return Err(CoreError::InvalidArgument("k_next must be finite".into()));
    }
    check_separation(x)?;
    let one = build_sector(params, 1)?;
    one.require_spectral("single-photon decay bracket (the resonant g envelope covers coalescence)")?;
    let pole_term = |e: C64| {
        emission_weight(params, e) * (C64::new(0.0, -x) * e).exp() / (k_next - e)
    };
    Ok((pole_term(one.e_plus) - pole_term(one.e_minus)) / one.gap())
}

/// Two-photon decay bracket `F_{k1,k2}(x)`: the two-excitation residue
/// chain propagating the widest neighbor pair across gap `x`.
///
/// Only the complex single-excitation poles of the outgoing leg contribute
/// to the decaying part; the kernel's real principal-value pole belongs to
/// the delocalized background, not to the bound state. On resonance the
/// bracket reduces to `4 kappa^2 / (kappa^2 + 4 g^2) * f(x) * e^{-i omega x}`.
pub fn aux_two_decay(params: &SystemParams, k_r1: f64, k_r2: f64, x: f64) -> Result<C64> {
    params.validate()?;
    for (name, value) in [("k_r1", k_r1), ("k_r2", k_r2)] {
        if !value.is_finite() {
            return Err(CoreError::InvalidArgument(format!(
                "{name} must be finite, got {value}"
            )));
        }
    }
    check_separation(x)?;
    let amps = spectral_amplitudes(params)?;
    let k_total = k_r1 + k_r2;
    let mut total = C64::new(0.0, 0.0);
    for nu in 0..2 {
        // Outgoing pole of the spectral kernel at p1 = k_total - E_{1,nu};
        // the remaining factors are evaluated there.
        let p1 = k_total - amps.e_one[nu];
        let mut chain = C64::new(0.0, 0.0);
        for mu in 0..2 {
            let direct = amps.one_adag_vac[nu] * amps.vac_a_one[mu] / (k_r1 - p1);
            let mut ladder = C64::new(0.0, 0.0);
            for lambda in 0..2 {
                ladder += amps.one_a_two[nu][lambda] * amps.two_adag_one[lambda][mu]
                    / (k_total - amps.e_two[lambda]);
            }
            chain += (direct + ladder) * amps.one_adag_vac[mu] / (k_r1 - amps.e_one[mu]);
        }
        total += amps.vac_a_one[nu] * chain * (C64::new(0.0, -x) * amps.e_one[nu]).exp();
    }
    Ok(params.kappa * params.kappa * total)
}

fn check_coords(coords: &[f64]) -> Result<()> {
    if coords.iter().any(|x| !x.is_finite()) {
        return Err(CoreError::InvalidArgument(
            "coordinates must be finite".into(),
        ));
    }
    Ok(())
}

fn sorted_descending(coords: &[f64]) -> Vec<f64> {
    let mut sorted = coords.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sorted
}

/// Resonant N-photon envelope: the neighbor-gap product
/// `f(d_1) * g(d_2) * ... * g(d_{N-1})` on descending-sorted coordinates.
///
/// Coincident coordinates are handled by the sorted evaluation itself,
/// which equals the symmetric limit of the two orderings because both gap
/// envelopes are continuous at zero separation.
pub fn envelope_resonant(params: &SystemParams, coords: &[f64]) -> Result<NPhotonEnvelope> {
    params.validate()?;
    params.require_resonant("resonant envelope")?;
    check_coords(coords)?;
    let n = coords.len();
    if n < 2 {
        return Err(CoreError::InvalidArgument(
            "envelope needs at least two photons".into(),
        ));
    }
    if n > MAX_PHOTONS_RESONANT {
        return Err(CoreError::ComplexityLimit(format!(
            "resonant envelope capped at {MAX_PHOTONS_RESONANT} photons, got {n}"
        )));
    }
    let sorted = sorted_descending(coords);
    let mut value = f_tau(params, sorted[0] - sorted[1])?;
    for j in 1..n - 1 {
        value *= g_tau(params, sorted[j] - sorted[j + 1])?;
    }
    Ok(NPhotonEnvelope {
        n: n as u32,
        coordinates: coords.to_vec(),
        value: C64::new(value, 0.0),
        resonant: true,
    })
}

fn for_each_permutation<F: FnMut(&[usize])>(n: usize, visit: &mut F) {
    fn recurse<F: FnMut(&[usize])>(idx: &mut [usize], start: usize, visit: &mut F) {
        if start == idx.len() {
            visit(idx);
            return;
        }
        for i in start..idx.len() {
            idx.swap(start, i);
            recurse(idx, start + 1, visit);
            idx.swap(start, i);
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    recurse(&mut idx, 0, visit);
}

/// General N-photon slowest-decay envelope at arbitrary real incoming
/// frequencies: the frequency symmetrization of the decay-bracket chain
/// with its connecting phase factors.
///
/// The center-of-mass phase `e^{i (K/N) sum(x)}` (with `K` the total
/// frequency) is factored out of the returned value, making it invariant
/// under a common translation of all coordinates. With all frequencies
/// equal and resonant, the value reduces to the resonant product envelope
/// times a constant.
pub fn envelope_general(
    params: &SystemParams,
    k_list: &[f64],
    coords: &[f64],
) -> Result<NPhotonEnvelope> {
    params.validate()?;
    check_coords(coords)?;
    check_coords(k_list)?;
    let n = coords.len();
    if k_list.len() != n {
        return Err(CoreError::InvalidArgument(format!(
            "frequency list has {} entries for {n} coordinates",
            k_list.len()
        )));
    }
    if n < 2 {
        return Err(CoreError::InvalidArgument(
            "envelope needs at least two photons".into(),
        ));
    }
    if n > MAX_PHOTONS_GENERAL {
        return Err(CoreError::ComplexityLimit(format!(
            "general envelope capped at {MAX_PHOTONS_GENERAL} photons, got {n}"
        )));
    }

    let sorted = sorted_descending(coords);
    let gaps: Vec<f64> = (0..n - 1).map(|j| sorted[j] - sorted[j + 1]).collect();

    // Memoized brackets: every ordered frequency pair across the first gap,
    // every frequency across each later gap.
    let mut pair_table = vec![vec![C64::new(0.0, 0.0); n]; n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                pair_table[a][b] = aux_two_decay(params, k_list[a], k_list[b], gaps[0])?;
            }
        }
    }
    let mut single_table = vec![vec![C64::new(0.0, 0.0); n.saturating_sub(2)]; n];
    for c in 0..n {
        for j in 1..n - 1 {
            single_table[c][j - 1] = aux_single_decay(params, k_list[c], gaps[j])?;
        }
    }

    let mean_k = k_list.iter().sum::<f64>() / n as f64;
    let mut total = C64::new(0.0, 0.0);
    for_each_permutation(n, &mut |perm| {
        let mut term = pair_table[perm[0]][perm[1]];
        let mut exponent = (k_list[perm[0]] + k_list[perm[1]] - mean_k) * sorted[0]
            - mean_k * sorted[n - 1];
        for j in 1..n - 1 {
            term *= single_table[perm[j + 1]][j - 1];
            exponent += (k_list[perm[j + 1]] - mean_k) * sorted[j];
        }
        total += term * C64::new(0.0, exponent).exp();
    });

    let factorial: f64 = (1..=n).map(|i| i as f64).product();
    let norm = factorial.sqrt() / (2.0 * std::f64::consts::PI).powf(n as f64 / 2.0);
    let resonant = params.is_resonant()
        && k_list
            .iter()
            .all(|&k| (k - params.omega).abs() <= 1e-12 * params.omega.abs().max(1.0));
    Ok(NPhotonEnvelope {
        n: n as u32,
        coordinates: coords.to_vec(),
        value: norm * total,
        resonant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundstate::generic_bound_profile;
    use crate::numerics::{fit_exp_rate, local_maxima};
    use std::f64::consts::PI;

    fn params(omega: f64, omega_atom: f64, g: f64, kappa: f64) -> SystemParams {
        SystemParams::new(omega, omega_atom, g, kappa).unwrap()
    }

    #[test]
    fn gap_envelope_vanishes_at_zero_in_every_regime() {
        for kappa in [0.1, 0.4, 0.9] {
            let p = params(1.0, 1.0, 0.1, kappa);
            assert_eq!(g_tau(&p, 0.0).unwrap(), 0.0, "kappa = {kappa}");
        }
    }

    #[test]
    fn critical_gap_envelope_at_one_lifetime() {
        let p = params(1.0, 1.0, 0.1, 0.4);
        let expected = 10.0 / std::f64::consts::E;
        assert!((g_tau(&p, 10.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn gap_envelope_is_even_and_continuous_across_the_seam() {
        let g = 0.1;
        for tau in [0.5, 3.0, 12.0] {
            let below = g_tau(&params(1.0, 1.0, g, 4.0 * g * (1.0 - 1e-6)), tau).unwrap();
            let at = g_tau(&params(1.0, 1.0, g, 4.0 * g), tau).unwrap();
            let above = g_tau(&params(1.0, 1.0, g, 4.0 * g * (1.0 + 1e-6)), tau).unwrap();
            assert!((below - at).abs() < 1e-4);
            assert!((above - at).abs() < 1e-4);
        }
        let p = params(1.0, 1.0, 0.2, 0.3);
        assert_eq!(g_tau(&p, 4.0).unwrap(), g_tau(&p, -4.0).unwrap());
    }

    #[test]
    fn emission_weight_matches_pole_detuning() {
        let p = params(1.0, 0.95, 0.1, 0.3);
        let one = build_sector(&p, 1).unwrap();
        for e in [one.e_plus, one.e_minus] {
            let expected = C64::new(0.0, -p.kappa) * (e - p.omega_atom);
            assert_eq!(emission_weight(&p, e), expected);
        }
    }

    #[test]
    fn single_bracket_is_proportional_to_gap_envelope_on_resonance() {
        let p = params(1.0, 1.0, 0.1, 0.2);
        // The two pole terms cancel at zero separation up to roundoff.
        assert!(aux_single_decay(&p, 1.0, 0.0).unwrap().norm() < 1e-12 * p.kappa);
        let mut ratios = Vec::new();
        for i in 1..=40 {
            let x = 0.5 * f64::from(i);
            let bracket = aux_single_decay(&p, 1.0, x).unwrap();
            let dressed = bracket * (C64::new(0.0, p.omega * x)).exp();
            ratios.push(dressed / g_tau(&p, x).unwrap());
        }
        for ratio in &ratios {
            assert!((ratio - C64::new(p.kappa, 0.0)).norm() < 1e-10 * p.kappa);
        }
    }

    #[test]
    fn single_bracket_tail_decays_at_the_slowest_pole_rate() {
        let p = params(1.0, 1.05, 0.06, 0.6);
        let one = build_sector(&p, 1).unwrap();
        let expected = (-one.e_plus.im).min(-one.e_minus.im);
        let xs: Vec<f64> = (0..=60).map(|i| 40.0 + 6.0 * f64::from(i)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| aux_single_decay(&p, 1.02, x).unwrap().norm())
            .collect();
        let fit = fit_exp_rate(&xs, &ys).unwrap();
        assert!(
            (fit.rate - expected).abs() < 0.02 * expected,
            "rate {} vs {expected}",
            fit.rate
        );
    }

    #[test]
    fn brackets_reject_coalesced_sectors_and_negative_separations() {
        let at_ep = params(1.0, 1.0, 0.025, 0.1);
        assert!(matches!(
            aux_single_decay(&at_ep, 1.0, 2.0),
            Err(CoreError::DegenerateSpectrum(_))
        ));
        let p = params(1.0, 1.0, 0.1, 0.2);
        assert!(matches!(
            aux_single_decay(&p, 1.0, -1.0),
            Err(CoreError::InvalidArgument(_))
        ));
        assert!(matches!(
            aux_two_decay(&p, 1.0, 1.0, -0.5),
            Err(CoreError::InvalidArgument(_))
        ));
    }

    #[test]
    fn pair_bracket_is_proportional_to_f_envelope_on_resonance() {
        let p = params(1.0, 1.0, 0.1, 0.2);
        let expected = 4.0 * p.kappa * p.kappa / (p.kappa * p.kappa + 4.0 * p.g * p.g);
        assert!(aux_two_decay(&p, 1.0, 1.0, 0.0).unwrap().norm().is_finite());
        for i in 0..=30 {
            let x = 0.7 * f64::from(i);
            let bracket = aux_two_decay(&p, 1.0, 1.0, x).unwrap();
            let dressed = bracket * (C64::new(0.0, p.omega * x)).exp();
            let ratio = dressed / f_tau(&p, x).unwrap();
            assert!(
                (ratio - C64::new(expected, 0.0)).norm() < 1e-8 * expected,
                "x = {x}: ratio = {ratio}"
            );
        }
    }

    #[test]
    fn pair_bracket_tail_decays_at_the_slowest_pole_rate() {
        let p = params(1.0, 1.05, 0.06, 0.6);
        let one = build_sector(&p, 1).unwrap();
        let expected = (-one.e_plus.im).min(-one.e_minus.im);
        let xs: Vec<f64> = (0..=60).map(|i| 40.0 + 6.0 * f64::from(i)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| aux_two_decay(&p, 1.02, 0.98, x).unwrap().norm())
            .collect();
        let fit = fit_exp_rate(&xs, &ys).unwrap();
        assert!(
            (fit.rate - expected).abs() < 0.02 * expected,
            "rate {} vs {expected}",
            fit.rate
        );
    }

    #[test]
    fn two_photon_resonant_envelope_is_the_f_envelope() {
        let p = params(1.0, 1.0, 0.1, 0.3);
        let envelope = envelope_resonant(&p, &[4.0, 1.0]).unwrap();
        assert_eq!(envelope.value, C64::new(f_tau(&p, 3.0).unwrap(), 0.0));
        assert!(envelope.resonant);
    }

    #[test]
    fn three_photon_resonant_envelope_factorizes_on_sorted_coordinates() {
        let p = params(1.0, 1.0, 0.1, 0.3);
        let (x1, x2, x3) = (5.0, 1.5, -2.0);
        let expected = f_tau(&p, x1 - x2).unwrap() * g_tau(&p, x2 - x3).unwrap();
        for coords in [
            [x1, x2, x3],
            [x3, x1, x2],
            [x2, x3, x1],
        ] {
            let envelope = envelope_resonant(&p, &coords).unwrap();
            assert!(
                (envelope.value - C64::new(expected, 0.0)).norm() < 1e-14 * expected.abs(),
                "coords {coords:?}"
            );
        }
    }

    #[test]
    fn coincident_coordinates_take_the_symmetric_limit() {
        let p = params(1.0, 1.0, 0.1, 0.3);
        let tied = envelope_resonant(&p, &[2.0, 2.0, -1.0]).unwrap();
        let expected = f_tau(&p, 0.0).unwrap() * g_tau(&p, 3.0).unwrap();
        assert!((tied.value - C64::new(expected, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn envelope_caps_and_domain_errors() {
        let p = params(1.0, 1.0, 0.1, 0.3);
        assert!(matches!(
            envelope_resonant(&p, &[0.0; 9]),
            Err(CoreError::ComplexityLimit(_))
        ));
        assert!(matches!(
            envelope_resonant(&p, &[0.0]),
            Err(CoreError::InvalidArgument(_))
        ));
        let detuned = params(1.0, 1.1, 0.1, 0.3);
        assert!(matches!(
            envelope_resonant(&detuned, &[1.0, 0.0]),
            Err(CoreError::Domain(_))
        ));
        assert!(matches!(
            envelope_general(&p, &[1.0; 7], &[0.0; 7]),
            Err(CoreError::ComplexityLimit(_))
        ));
        assert!(matches!(
            envelope_general(&p, &[1.0; 2], &[0.0; 3]),
            Err(CoreError::InvalidArgument(_))
        ));
    }

    #[test]
    fn general_two_photon_envelope_matches_the_bound_profile() {
        let p = params(1.0, 0.97, 0.08, 0.3);
        let (k1, k2) = (1.04, 0.92);
        for tau in [0.8, 3.5, 9.0] {
            let envelope = envelope_general(&p, &[k1, k2], &[tau, 0.0]).unwrap();
            let profile = generic_bound_profile(&p, k1, k2, &[tau]).unwrap();
            let expected = -2.0 * profile.amplitude[0];
            assert!(
                (envelope.value - expected).norm() < 1e-10 * expected.norm(),
                "tau = {tau}: {} vs {expected}",
                envelope.value
            );
            assert!(!envelope.resonant);
        }
    }

    #[test]
    fn general_envelope_reduces_to_the_resonant_product() {
        let p = params(1.0, 1.0, 0.1, 0.2);
        let k_list = [1.0, 1.0, 1.0];
        let c_f = 4.0 * p.kappa * p.kappa / (p.kappa * p.kappa + 4.0 * p.g * p.g);
        let expected_ratio = 6.0_f64.sqrt() * 6.0 * c_f * p.kappa / (2.0 * PI).powf(1.5);
        for coords in [[6.0, 2.0, -1.0], [3.0, 0.5, -4.0], [10.0, 3.0, 2.0]] {
            let general = envelope_general(&p, &k_list, &coords).unwrap();
            let resonant = envelope_resonant(&p, &coords).unwrap();
            let ratio = general.value / resonant.value;
            assert!(
                (ratio - C64::new(expected_ratio, 0.0)).norm() < 1e-8 * expected_ratio,
                "coords {coords:?}: ratio = {ratio}"
            );
            assert!(general.resonant);
        }
    }

    #[test]
    fn general_envelope_is_symmetric_in_coordinates_and_frequencies() {
        let p = params(1.0, 0.98, 0.09, 0.35);
        let k_list = [1.05, 0.96, 1.01];
        let coords = [4.0, 1.0, -2.5];
        let base = envelope_general(&p, &k_list, &coords).unwrap();
        let coord_shuffled = envelope_general(&p, &k_list, &[1.0, -2.5, 4.0]).unwrap();
        assert!((base.value - coord_shuffled.value).norm() < 1e-12 * base.value.norm());
        let k_shuffled = envelope_general(&p, &[0.96, 1.01, 1.05], &coords).unwrap();
        assert!((base.value - k_shuffled.value).norm() < 1e-12 * base.value.norm());
    }

    #[test]
    fn growing_one_gap_decays_at_the_envelope_rate() {
        // Underdamped resonant chain: the grown gap's envelope oscillates
        // under a e^{-kappa t / 4} ceiling, so fit the peaks.
        let g = 0.1;
        let p = params(1.0, 1.0, g, 2.0 * g);
        let d1 = 1.0 / g;
        let d2s: Vec<f64> = (0..2000).map(|i| 30.0 + 0.25 * f64::from(i)).collect();
        let values: Vec<f64> = d2s
            .iter()
            .map(|&d2| {
                envelope_resonant(&p, &[d1 + d2, d2, 0.0])
                    .unwrap()
                    .value
                    .norm()
            })
            .collect();
        let peaks = local_maxima(&values);
        let xs: Vec<f64> = peaks.iter().map(|&i| d2s[i]).collect();
        let ys: Vec<f64> = peaks.iter().map(|&i| values[i]).collect();
        let fit = fit_exp_rate(&xs, &ys).unwrap();
        let expected = p.kappa / 4.0;
        assert!(
            (fit.rate - expected).abs() < 0.05 * expected,
            "rate {} vs {expected}",
            fit.rate
        );
    }
}
