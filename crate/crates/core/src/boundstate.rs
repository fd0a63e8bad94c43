//! Two-photon bound-state profiles.
//!
//! The connected S matrix binds the two outgoing photons into a component
//! that decays in their separation `tau = x1 - x2`. Three routes to that
//! profile live here and are held against each other by tests:
//!
//! * [`generic_bound_profile`]: residue evaluation of the frequency integral,
//!   a two-pole closed form (confluent double-pole form at coalescence),
//! * [`f_tau`]: the dimensionless resonant envelope in its three damping
//!   regimes, reached from the generic form at equal resonant inputs,
//! * [`oracle_bound_profile`]: direct adaptive quadrature of the frequency
//!   integral, sharing no pole algebra with the other two.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{CoreError, Result};
use crate::numerics::{adaptive_integrate, fit_exp_rate, QuadConfig};
use crate::params::SystemParams;
use crate::scattering::f_vertex;
use crate::sector::{build_sector, ExcitationSector};
use crate::C64;

/// Gap-to-scale ratio below which the confluent (coalesced) formulas are
/// used outright.
const SEAM_SNAP: f64 = 1e-9;
/// Gap-to-scale ratio below which a debug probe compares the two-pole and
/// confluent branches against each other before trusting the former.
const SEAM_PROBE: f64 = 1e-6;
/// Samples with modulus at or below this are treated as underflow and
/// excluded from tail fits.
const TAIL_FLOOR: f64 = 1e-280;

/// Damping character of a bound-state profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DampingRegime {
    /// Oscillatory decay: the pole gap is dominated by its real part
    /// (resonant case `kappa < 4g`).
    Underdamped,
    /// Coalesced poles: `(1 + c|tau|) e^{-gamma|tau|}` decay, the fastest
    /// approach to zero (resonant case `kappa = 4g`).
    Critical,
    /// Two distinct real decay rates, the slower one taking over at large
    /// separation (resonant case `kappa > 4g`).
    Overdamped,
}

/// Sampled bound-state wavefunction over a separation grid.
///
/// The center-of-mass factor `e^{i * center_phase_freq * x_c}` is carried
/// symbolically: `amplitude` holds the profile at `x_c = 0` and the field is
/// the frequency to reattach for nonzero center-of-mass position.
#[derive(Debug, Clone)]
pub struct BoundStateProfile {
    /// Ascending separation values `tau = x1 - x2`.
    pub tau_grid: Vec<f64>,
    /// Complex amplitude per grid point; an even function of `tau`.
    pub amplitude: Vec<C64>,
    pub regime: DampingRegime,
    /// Frequency of the factored-out center-of-mass phase (`k1 + k2`).
    pub center_phase_freq: f64,
}

fn check_tau_grid(tau_grid: &[f64]) -> Result<()> {
    if tau_grid.is_empty() {
        return Err(CoreError::InvalidArgument("tau grid is empty".into()));
    }
    if tau_grid.iter().any(|t| !t.is_finite()) {
        return Err(CoreError::InvalidArgument(
            "tau grid contains a non-finite value".into(),
        ));
    }
    if tau_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::InvalidArgument(
            "tau grid must be strictly ascending".into(),
        ));
    }
    Ok(())
}

fn classify_regime(sector: &ExcitationSector) -> DampingRegime {
    if sector.is_ep {
        DampingRegime::Critical
    } else {
        let gap = sector.gap();
        if gap.re.abs() >= gap.im.abs() {
            DampingRegime::Underdamped
        } else {
            DampingRegime::Overdamped
        }
    }
}

/// Default separation grid: 512 points spanning twelve e-foldings of the
/// slowest resonant decay mode `min(kappa/4, g)`.
pub fn default_tau_grid(params: &SystemParams) -> Vec<f64> {
    let mut slowest = f64::INFINITY;
    for rate in [params.kappa / 4.0, params.g] {
        if rate > 0.0 {
            slowest = slowest.min(rate);
        }
    }
    let span = if slowest.is_finite() { 12.0 / slowest } else { 12.0 };
    (0..512).map(|i| span * f64::from(i) / 511.0).collect()
}

fn critical_f(g: f64, t: f64) -> f64 {
    (1.0 + g * t) * (-g * t).exp()
}

fn underdamped_f(g: f64, kappa: f64, t: f64) -> f64 {
    let s = (g * g - (kappa / 4.0) * (kappa / 4.0)).sqrt();
    ((s * t).cos() + kappa / (4.0 * s) * (s * t).sin()) * (-kappa * t / 4.0).exp()
}

fn overdamped_f(g: f64, kappa: f64, t: f64) -> f64 {
    // cosh/sinh recombined into the two decaying exponentials so that large
    // separations never overflow before the damping factor is applied.
    let a = kappa / 4.0;
    let b = (a * a - g * g).sqrt();
    let slow_weight = 0.5 * (1.0 + a / b);
    let fast_weight = 0.5 * (1.0 - a / b);
    slow_weight * ((b - a) * t).exp() + fast_weight * (-(a + b) * t).exp()
}

/// Resonant bound-state envelope `f(tau)`: the solution of
/// `f'' + (kappa/2) f' + g^2 f = 0` with `f(0) = 1`, `f'(0) = 0`, in its
/// underdamped, critical, and overdamped closed forms.
///
/// The critical branch is taken for `|kappa - 4g| <= 1e-9 * g`; in the band
/// up to `1e-6 * g` the exact branch is still used, with a debug probe
/// checking it against the critical form at `tau = 1/g` to guard the
/// cancellation-prone region.
pub fn f_tau(params: &SystemParams, tau: f64) -> Result<f64> {
    params.validate()?;
    params.require_resonant("resonant envelope f (use generic_bound_profile off resonance)")?;
    if !tau.is_finite() {
        return Err(CoreError::InvalidArgument("tau must be finite".into()));
    }
    let (g, kappa) = (params.g, params.kappa);
    let t = tau.abs();
    let seam = (kappa - 4.0 * g).abs();
    if seam <= SEAM_SNAP * g {
        return Ok(critical_f(g, t));
    }
    debug_assert!(
        seam > SEAM_PROBE * g || {
            let probe = 1.0 / g;
            let exact = if kappa < 4.0 * g {
                underdamped_f(g, kappa, probe)
            } else {
                overdamped_f(g, kappa, probe)
            };
            (exact - critical_f(g, probe)).abs() < 1e-6
        },
        "branch disagreement near the kappa = 4g seam"
    );
    if kappa < 4.0 * g {
        Ok(underdamped_f(g, kappa, t))
    } else {
        Ok(overdamped_f(g, kappa, t))
    }
}

struct ProfileCore {
    scaled_vertex: C64,
    e_plus: C64,
    e_minus: C64,
    e_total: f64,
    coalesced: bool,
}

impl ProfileCore {
    fn new(params: &SystemParams, k1: f64, k2: f64) -> Result<Self> {
        for (name, value) in [("k1", k1), ("k2", k2)] {
            if !value.is_finite() {
                return Err(CoreError::InvalidArgument(format!(
                    "{name} must be finite, got {value}"
                )));
            }
        }
        let one = build_sector(params, 1)?;
        let scaled_vertex = if params.g == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            params.kappa * params.g * params.g * f_vertex(params, k1, k2)?
        };
        Ok(ProfileCore {
            scaled_vertex,
            e_plus: one.e_plus,
            e_minus: one.e_minus,
            e_total: k1 + k2,
            coalesced: one.is_ep,
        })
    }

    fn sector(&self, params: &SystemParams) -> ExcitationSector {
        build_sector(params, 1).expect("params validated by construction")
    }

    /// Residue form of the separation profile: the frequency integral closed
    /// in the upper half-plane picks up one pole per single-excitation
    /// branch (a double pole when coalesced).
    fn two_pole_amplitude(&self, tau: f64) -> C64 {
        if self.scaled_vertex == C64::new(0.0, 0.0) {
            return C64::new(0.0, 0.0);
        }
        let t = tau.abs();
        let e = self.e_total;
        let half_phase = (C64::new(0.0, 0.5 * e * t)).exp();
        let prefactor = C64::new(0.0, -1.0 / 2.0_f64.sqrt()) * self.scaled_vertex * half_phase;
        if self.coalesced {
            let e1 = self.e_plus;
            let shortfall = e - 2.0 * e1;
            let decay = (C64::new(0.0, -t) * e1).exp();
            return prefactor * decay * (2.0 - C64::new(0.0, t) * shortfall)
                / (shortfall * shortfall * shortfall);
        }
        let gap = self.e_plus - self.e_minus;
        let trace_shortfall = e - self.e_plus - self.e_minus;
        let plus_term = (C64::new(0.0, -t) * self.e_plus).exp() / (e - 2.0 * self.e_plus);
        let minus_term = (C64::new(0.0, -t) * self.e_minus).exp() / (e - 2.0 * self.e_minus);
        prefactor * (plus_term - minus_term) / (gap * trace_shortfall)
    }

    fn confluent_amplitude(&self, tau: f64) -> C64 {
        let t = tau.abs();
        let e = self.e_total;
        let e1 = (self.e_plus + self.e_minus) / 2.0;
        let half_phase = (C64::new(0.0, 0.5 * e * t)).exp();
        let prefactor = C64::new(0.0, -1.0 / 2.0_f64.sqrt()) * self.scaled_vertex * half_phase;
        let shortfall = e - 2.0 * e1;
        let decay = (C64::new(0.0, -t) * e1).exp();
        prefactor * decay * (2.0 - C64::new(0.0, t) * shortfall)
            / (shortfall * shortfall * shortfall)
    }
}

/// Bound-state separation profile by residue calculus: two simple poles off
/// coalescence, the confluent double-pole form at it.
///
/// The normalization follows the frequency-integral convention directly, so
/// the resonant case reproduces the closed-form envelope with its
/// `-4 kappa^2 / (sqrt(2) pi (kappa^2 + 4 g^2))` prefactor and no fitted
/// constants.
pub fn generic_bound_profile(
    params: &SystemParams,
    k1: f64,
    k2: f64,
    tau_grid: &[f64],
) -> Result<BoundStateProfile> {
    params.validate()?;
    check_tau_grid(tau_grid)?;
    if params.kappa == 0.0 && params.g > 0.0 {
        return Err(CoreError::Domain(
            "bound-state profile requires kappa > 0; without waveguide decay the \
             frequency integral is singular"
                .into(),
        ));
    }
    let core = ProfileCore::new(params, k1, k2)?;
    let sector = core.sector(params);

    // Between the snap and probe thresholds the two-pole form is still used,
    // but a debug probe checks it against the confluent form once per call.
    if !core.coalesced && params.g > 0.0 {
        let gap_ratio = sector.gap().norm() / (sector.ep_scale * SEAM_PROBE);
        debug_assert!(
            gap_ratio >= 1.0 || {
                let probe = 1.0 / params.g;
                let two_pole = core.two_pole_amplitude(probe);
                let confluent = core.confluent_amplitude(probe);
                (two_pole - confluent).norm() <= 1e-3 * confluent.norm().max(1e-30)
            },
            "two-pole and confluent branches disagree near coalescence"
        );
    }

    let amplitude = tau_grid.iter().map(|&t| core.two_pole_amplitude(t)).collect();
    Ok(BoundStateProfile {
        tau_grid: tau_grid.to_vec(),
        amplitude,
        regime: classify_regime(&sector),
        center_phase_freq: core.e_total,
    })
}

/// Default quadrature window for [`oracle_bound_profile`]: wide enough that
/// the `1/p^4` tail of the connected amplitude truncates below the target
/// tolerance.
pub fn oracle_quad_config(params: &SystemParams, k1: f64, k2: f64) -> Result<QuadConfig> {
    params.validate()?;
    let mean_detuning = (0.5 * (k1 + k2) - params.omega).abs();
    QuadConfig::new(200.0 * params.kappa.max(params.g).max(mean_detuning) + 50.0)
}

/// Bound-state separation profile by direct adaptive quadrature of the
/// frequency integral, independent of the residue algebra.
///
/// Conservation reduces the double frequency integral to one over the
/// outgoing detuning `u`, with the symmetrized photon phases combining into
/// `cos(u tau)`; the center-of-mass phase is factored out as in
/// [`generic_bound_profile`].
pub fn oracle_bound_profile(
    params: &SystemParams,
    k1: f64,
    k2: f64,
    tau_grid: &[f64],
    quad_config: &QuadConfig,
) -> Result<BoundStateProfile> {
    params.validate()?;
    check_tau_grid(tau_grid)?;
    quad_config.validate()?;
    let core = ProfileCore::new(params, k1, k2)?;
    let sector = core.sector(params);
    let half_total = 0.5 * core.e_total;
    let scaled_vertex = core.scaled_vertex;
    let (e_plus, e_minus) = (core.e_plus, core.e_minus);

    let amplitude: Vec<C64> = tau_grid
        .par_iter()
        .map(|&tau| -> Result<C64> {
            let integrand = |u: f64| {
                let p1 = half_total + u;
                let p2 = half_total - u;
                let poles = (p1 - e_plus) * (p1 - e_minus) * (p2 - e_plus) * (p2 - e_minus);
                scaled_vertex / poles * (u * tau).cos()
            };
            let result = adaptive_integrate(integrand, quad_config)?;
            if !result.converged {
                let scale = result.value.norm().max(f64::MIN_POSITIVE);
                return Err(CoreError::QuadratureNotConverged {
                    achieved: result.err_estimate / scale,
                    requested: quad_config.rel_tol,
                });
            }
            Ok(result.value / (2.0 * 2.0_f64.sqrt() * PI))
        })
        .collect::<Result<Vec<C64>>>()?;

    Ok(BoundStateProfile {
        tau_grid: tau_grid.to_vec(),
        amplitude,
        regime: classify_regime(&sector),
        center_phase_freq: core.e_total,
    })
}

/// Decay rate of the profile tail: least-squares slope of `log|amplitude|`
/// over the last third of the grid, after dropping underflowed samples.
pub fn tail_decay_rate(profile: &BoundStateProfile) -> Result<f64> {
    let len = profile.tau_grid.len();
    let start = len - len / 3;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in start..len {
        let modulus = profile.amplitude[i].norm();
        if modulus > TAIL_FLOOR {
            xs.push(profile.tau_grid[i]);
            ys.push(modulus);
        }
    }
    if xs.len() < 20 {
        return Err(CoreError::InsufficientData(format!(
            "tail fit needs at least 20 usable points, found {}",
            xs.len()
        )));
    }
    Ok(fit_exp_rate(&xs, &ys)?.rate)
}
