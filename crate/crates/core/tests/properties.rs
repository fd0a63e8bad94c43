//! Cross-module invariants over randomized parameters.
//!
//! These complement the unit tests: instead of pinned example values they
//! assert structural identities (trace/determinant consistency, unitarity,
//! spectral-versus-closed-form equality, symmetrization shortcuts) across
//! wide parameter ranges, with degenerate corners filtered out explicitly.

use proptest::prelude::*;
use wjc_core::boundstate::{f_tau, generic_bound_profile};
use wjc_core::correlation::g2_resonant;
use wjc_core::nphoton::{envelope_general, envelope_resonant, g_tau};
use wjc_core::scattering::{connected_s2, spectral_g, spectral_s2_amplitude, transmission};
use wjc_core::sector::{build_sector, discriminant_gap};
use wjc_core::{SystemParams, C64};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn any_params() -> impl Strategy<Value = SystemParams> {
    (0.5..2.0f64, 0.5..2.0f64, 0.01..0.3f64, 0.01..1.0f64)
        .prop_map(|(omega, omega_atom, g, kappa)| {
            SystemParams::new(omega, omega_atom, g, kappa).unwrap()
        })
}

fn resonant_params() -> impl Strategy<Value = SystemParams> {
    (0.5..2.0f64, 0.01..0.3f64, 0.01..1.0f64)
        .prop_map(|(omega, g, kappa)| SystemParams::new(omega, omega, g, kappa).unwrap())
}

/// Distance from eigenvalue coalescence in sector `n`, used to filter out
/// parameter draws where biorthogonal normalization is ill-conditioned.
fn coalescence_distance(params: &SystemParams, n: u32) -> f64 {
    discriminant_gap(params, n).unwrap().norm()
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn eigenvalue_pair_matches_trace_and_determinant(
        params in any_params(),
        n in 1u32..=4,
    ) {
        let sector = build_sector(&params, n).unwrap();
        let h = sector.h_matrix;
        let trace = h[0][0] + h[1][1];
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let scale = sector.ep_scale;
        prop_assert!((sector.e_plus + sector.e_minus - trace).norm() < 1e-12 * scale);
        prop_assert!((sector.e_plus * sector.e_minus - det).norm() < 1e-12 * scale * scale);
    }

    #[test]
    fn coalescence_at_the_critical_coupling_in_every_sector(
        omega in 0.5..2.0f64,
        g in 0.01..0.3f64,
        n in 1u32..=5,
    ) {
        let kappa = 4.0 * f64::from(n).sqrt() * g;
        let params = SystemParams::new(omega, omega, g, kappa).unwrap();
        let sector = build_sector(&params, n).unwrap();
        prop_assert!(sector.gap().norm() <= 1e-7 * sector.ep_scale);
        prop_assert!(sector.in_exclusion_zone());
    }

    #[test]
    fn poles_stay_in_the_lower_half_plane(
        params in any_params(),
        n in 1u32..=3,
    ) {
        let sector = build_sector(&params, n).unwrap();
        prop_assert!(sector.e_plus.im < 0.0);
        prop_assert!(sector.e_minus.im < 0.0);
    }

    #[test]
    fn higher_sectors_are_shorter_lived_on_resonance(
        params in resonant_params(),
    ) {
        let one = build_sector(&params, 1).unwrap();
        prop_assert!(one.e_plus.im.max(one.e_minus.im) < 0.0);
        let fastest_one = one.e_plus.im.min(one.e_minus.im);
        for n in [2u32, 3] {
            let sector = build_sector(&params, n).unwrap();
            prop_assert!(sector.e_plus.im < fastest_one, "n = {n}");
            prop_assert!(sector.e_minus.im < fastest_one, "n = {n}");
        }
    }

    #[test]
    fn transmission_is_unimodular(
        params in any_params(),
        k in -5.0..5.0f64,
    ) {
        let t = transmission(&params, k).unwrap();
        prop_assert!((t.norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn spectral_resolvent_reproduces_transmission(
        params in any_params(),
        k in -3.0..3.0f64,
    ) {
        prop_assume!(coalescence_distance(&params, 1) > 1e-2);
        let t = transmission(&params, k).unwrap();
        let g_fn = spectral_g(&params, k).unwrap();
        prop_assert!((C64::new(1.0, 0.0) + g_fn - t).norm() < 1e-8);
    }

    #[test]
    fn connected_amplitude_is_exchange_symmetric(
        params in any_params(),
        p1 in 0.5..1.5f64,
        k1 in 0.5..1.5f64,
        k2 in 0.5..1.5f64,
    ) {
        let a = connected_s2(&params, p1, k1, k2).unwrap().amplitude;
        let b = connected_s2(&params, p1, k2, k1).unwrap().amplitude;
        let scale = a.norm().max(f64::MIN_POSITIVE);
        prop_assert!((a - b).norm() < 1e-13 * scale);
    }

    #[test]
    fn correlation_is_nonnegative_and_even(
        params in resonant_params(),
        tau in 0.0..40.0f64,
    ) {
        let forward = g2_resonant(&params, tau).unwrap();
        let backward = g2_resonant(&params, -tau).unwrap();
        prop_assert!(forward >= 0.0);
        prop_assert!(forward == backward);
    }

    #[test]
    fn resonant_envelopes_are_even(
        params in resonant_params(),
        tau in -20.0..20.0f64,
    ) {
        prop_assert!(f_tau(&params, tau).unwrap() == f_tau(&params, -tau).unwrap());
        prop_assert!(g_tau(&params, tau).unwrap() == g_tau(&params, -tau).unwrap());
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn symmetrized_spectral_sum_matches_connected_amplitude(
        omega in 0.7..1.3f64,
        omega_atom in 0.7..1.3f64,
        g in 0.02..0.2f64,
        kappa in 0.05..0.8f64,
        p1_off in -0.3..0.3f64,
        k1_off in -0.3..0.3f64,
        k2_off in -0.3..0.3f64,
    ) {
        let params = SystemParams::new(omega, omega_atom, g, kappa).unwrap();
        prop_assume!(coalescence_distance(&params, 1) > 1e-2);
        prop_assume!(coalescence_distance(&params, 2) > 1e-2);
        let (p1, k1, k2) = (omega + p1_off, omega + k1_off, omega + k2_off);
        let p2 = k1 + k2 - p1;
        for (a, b) in [(p1, k1), (p1, k2), (p2, k1), (p2, k2)] {
            prop_assume!((a - b).abs() > 1e-2);
        }
        let closed = connected_s2(&params, p1, k1, k2).unwrap().amplitude;
        let spectral = spectral_s2_amplitude(&params, p1, k1, k2).unwrap();
        let tol = 1e-8 * closed.norm().max(1e-10);
        prop_assert!((spectral - closed).norm() < tol);
    }

    #[test]
    fn sorted_shortcut_equals_the_ordered_symmetrization(
        params in resonant_params(),
        x1 in -10.0..10.0f64,
        gap1 in 0.01..8.0f64,
        gap2 in 0.01..8.0f64,
    ) {
        // Reference: sum over all coordinate orderings with an explicit
        // descending-order indicator, evaluating the chain on each ordering
        // directly. Exactly one ordering survives for distinct coordinates.
        let coords = [x1, x1 - gap1, x1 - gap1 - gap2];
        let mut reference = None;
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0],
        ];
        for perm in perms {
            let (a, b, c) = (coords[perm[0]], coords[perm[1]], coords[perm[2]]);
            if a >= b && b >= c {
                assert!(reference.is_none(), "orderings overlap");
                reference =
                    Some(f_tau(&params, a - b).unwrap() * g_tau(&params, b - c).unwrap());
            }
        }
        let expected = reference.unwrap();
        for shuffled in [
            [coords[0], coords[1], coords[2]],
            [coords[2], coords[0], coords[1]],
            [coords[1], coords[2], coords[0]],
        ] {
            let envelope = envelope_resonant(&params, &shuffled).unwrap();
            prop_assert!(
                (envelope.value - C64::new(expected, 0.0)).norm()
                    <= 1e-14 * expected.abs().max(f64::MIN_POSITIVE)
            );
        }
    }

    #[test]
    fn general_envelope_matches_the_two_photon_profile(
        omega in 0.8..1.2f64,
        omega_atom in 0.8..1.2f64,
        g in 0.03..0.15f64,
        kappa in 0.1..0.6f64,
        k1_off in -0.2..0.2f64,
        k2_off in -0.2..0.2f64,
        tau in 0.2..10.0f64,
    ) {
        let params = SystemParams::new(omega, omega_atom, g, kappa).unwrap();
        prop_assume!(coalescence_distance(&params, 1) > 1e-2);
        prop_assume!(coalescence_distance(&params, 2) > 1e-2);
        let (k1, k2) = (omega + k1_off, omega + k2_off);
        let envelope = envelope_general(&params, &[k1, k2], &[tau, 0.0]).unwrap();
        let profile = generic_bound_profile(&params, k1, k2, &[tau]).unwrap();
        let expected = -2.0 * profile.amplitude[0];
        let tol = 1e-8 * expected.norm().max(1e-12);
        prop_assert!((envelope.value - expected).norm() < tol);
    }
}

/// One-sided finite-difference slopes of the envelopes in kappa agree at
/// the critical seam: both piecewise branches come from one function
/// analytic in kappa, so value and first derivative must match there.
#[test]
fn envelope_kappa_derivative_is_continuous_across_the_seam() {
    for g in [0.05, 0.1, 0.3] {
        let delta = 1e-4 * g;
        for tau_units in [1.0, 5.0, 12.0] {
            let tau = tau_units / g;
            for eval in [f_tau, g_tau] {
                let at = |kappa: f64| {
                    eval(&SystemParams::new(1.0, 1.0, g, kappa).unwrap(), tau).unwrap()
                };
                let left = (at(4.0 * g) - at(4.0 * g - delta)) / delta;
                let right = (at(4.0 * g + delta) - at(4.0 * g)) / delta;
                assert!(
                    (left - right).abs() < 1e-2 * (1.0 + left.abs()),
                    "g = {g}, tau = {tau}: slopes {left} vs {right}"
                );
            }
        }
    }
}

/// The correlation's asymptote is computed, not assumed; the curve must
/// actually reach it far in the tail for damping ratios on both sides of
/// critical.
#[test]
fn correlation_tail_reaches_the_computed_asymptote() {
    for kappa in [0.3, 0.4, 0.8] {
        let params = SystemParams::new(1.0, 1.0, 0.1, kappa).unwrap();
        let far = g2_resonant(&params, 600.0).unwrap();
        let asymptote = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!(
            (far - asymptote).abs() < 1e-6,
            "kappa = {kappa}: g2(600) = {far}"
        );
    }
}
