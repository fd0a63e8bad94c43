//! Table serialization for sweep and profile results.
//!
//! Every writer returns the finished text so callers decide where it goes.
//! CSV uses a dot decimal separator, `\n` line endings, and 15 significant
//! digits; JSON emits arrays of records with the same field names as the
//! CSV header.

use serde::{Deserialize, Serialize};

use crate::boundstate::{BoundStateProfile, DampingRegime};
use crate::correlation::CorrelationCurve;
use crate::error::{CoreError, Result};
use crate::params::SystemParams;
use crate::sector::SpectrumRow;
use crate::C64;

/// Formats a float with 15 significant digits in scientific notation.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.14e}")
}

fn csv_line(fields: &[String]) -> String {
    fields.join(",")
}

fn to_json<T: Serialize>(records: &T) -> Result<String> {
    serde_json::to_string_pretty(records)
        .map_err(|e| CoreError::InvalidArgument(format!("serialization failed: {e}")))
}

/// One spectrum sweep record with split real and imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub n: u32,
    pub omega: f64,
    pub kappa: f64,
    #[serde(rename = "re_E_plus")]
    pub re_e_plus: f64,
    #[serde(rename = "im_E_plus")]
    pub im_e_plus: f64,
    #[serde(rename = "re_E_minus")]
    pub re_e_minus: f64,
    #[serde(rename = "im_E_minus")]
    pub im_e_minus: f64,
}

impl From<&SpectrumRow> for SpectrumRecord {
    fn from(row: &SpectrumRow) -> Self {
        SpectrumRecord {
            n: row.n,
            omega: row.omega,
            kappa: row.kappa,
            re_e_plus: row.e_plus.re,
            im_e_plus: row.e_plus.im,
            re_e_minus: row.e_minus.re,
            im_e_minus: row.e_minus.im,
        }
    }
}

pub fn spectrum_csv(rows: &[SpectrumRow]) -> String {
    let mut out = String::from("n,omega,kappa,re_E_plus,im_E_plus,re_E_minus,im_E_minus\n");
    for row in rows {
        let rec = SpectrumRecord::from(row);
        out.push_str(&csv_line(&[
            rec.n.to_string(),
            fmt_sig(rec.omega),
            fmt_sig(rec.kappa),
            fmt_sig(rec.re_e_plus),
            fmt_sig(rec.im_e_plus),
            fmt_sig(rec.re_e_minus),
            fmt_sig(rec.im_e_minus),
        ]));
        out.push('\n');
    }
    out
}

pub fn spectrum_json(rows: &[SpectrumRow]) -> Result<String> {
    let records: Vec<SpectrumRecord> = rows.iter().map(SpectrumRecord::from).collect();
    to_json(&records)
}

/// One exceptional-point record: sector, critical coupling, coalesced energy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpRecord {
    pub n: u32,
    pub kappa_ep: f64,
    #[serde(rename = "re_E")]
    pub re_e: f64,
    #[serde(rename = "im_E")]
    pub im_e: f64,
}

pub fn ep_csv(records: &[EpRecord]) -> String {
    let mut out = String::from("n,kappa_ep,re_E,im_E\n");
    for rec in records {
        out.push_str(&csv_line(&[
            rec.n.to_string(),
            fmt_sig(rec.kappa_ep),
            fmt_sig(rec.re_e),
            fmt_sig(rec.im_e),
        ]));
        out.push('\n');
    }
    out
}

pub fn ep_json(records: &[EpRecord]) -> Result<String> {
    to_json(&records)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub tau: f64,
    pub re_amp: f64,
    pub im_amp: f64,
    pub abs_amp: f64,
}

fn profile_records(profile: &BoundStateProfile) -> Vec<ProfileRecord> {
    profile
        .tau_grid
        .iter()
        .zip(&profile.amplitude)
        .map(|(&tau, amp)| ProfileRecord {
            tau,
            re_amp: amp.re,
            im_amp: amp.im,
            abs_amp: amp.norm(),
        })
        .collect()
}

pub fn profile_csv(profile: &BoundStateProfile) -> String {
    let mut out = String::from("tau,re_amp,im_amp,abs_amp\n");
    for rec in profile_records(profile) {
        out.push_str(&csv_line(&[
            fmt_sig(rec.tau),
            fmt_sig(rec.re_amp),
            fmt_sig(rec.im_amp),
            fmt_sig(rec.abs_amp),
        ]));
        out.push('\n');
    }
    out
}

pub fn profile_json(profile: &BoundStateProfile) -> Result<String> {
    to_json(&profile_records(profile))
}

/// Sidecar metadata for a profile export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileMetadata {
    pub params: SystemParams,
    pub regime: DampingRegime,
    /// Fitted tail decay rate of |amplitude|, when the tail admits a fit.
    pub tail_rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub tau: f64,
    pub g2: f64,
}

pub fn correlation_csv(curve: &CorrelationCurve) -> String {
    let mut out = String::from("tau,g2\n");
    for (&tau, &g2) in curve.tau_grid.iter().zip(&curve.g2) {
        out.push_str(&csv_line(&[fmt_sig(tau), fmt_sig(g2)]));
        out.push('\n');
    }
    out
}

pub fn correlation_json(curve: &CorrelationCurve) -> Result<String> {
    let records: Vec<CorrelationRecord> = curve
        .tau_grid
        .iter()
        .zip(&curve.g2)
        .map(|(&tau, &g2)| CorrelationRecord { tau, g2 })
        .collect();
    to_json(&records)
}

/// Sidecar metadata for a correlation export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationMetadata {
    pub params: SystemParams,
    pub asymptote: f64,
    pub approach_rate: f64,
}

/// One envelope evaluation keyed by its neighbor-gap coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeRecord {
    pub gaps: Vec<f64>,
    pub re_value: f64,
    pub im_value: f64,
    pub abs_value: f64,
}

impl EnvelopeRecord {
    pub fn new(gaps: Vec<f64>, value: C64) -> Self {
        EnvelopeRecord {
            gaps,
            re_value: value.re,
            im_value: value.im,
            abs_value: value.norm(),
        }
    }
}

pub fn envelope_csv(n_gaps: usize, records: &[EnvelopeRecord]) -> String {
    let mut header: Vec<String> = (1..=n_gaps).map(|i| format!("gap{i}")).collect();
    header.extend(["re_value", "im_value", "abs_value"].map(String::from));
    let mut out = csv_line(&header);
    out.push('\n');
    for rec in records {
        let mut fields: Vec<String> = rec.gaps.iter().map(|&g| fmt_sig(g)).collect();
        fields.push(fmt_sig(rec.re_value));
        fields.push(fmt_sig(rec.im_value));
        fields.push(fmt_sig(rec.abs_value));
        out.push_str(&csv_line(&fields));
        out.push('\n');
    }
    out
}

pub fn envelope_json(records: &[EnvelopeRecord]) -> Result<String> {
    to_json(&records)
}

/// One row of the damping-tightness sweep: fitted decay metrics per kappa
/// with the grid argmax flagged.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TightnessRecord {
    pub kappa: f64,
    pub tail_rate: f64,
    pub approach_rate: f64,
    pub is_argmax_tail: bool,
    pub is_argmax_approach: bool,
}

pub fn tightness_csv(records: &[TightnessRecord]) -> String {
    let mut out = String::from("kappa,tail_rate,approach_rate,is_argmax_tail,is_argmax_approach\n");
    for rec in records {
        out.push_str(&csv_line(&[
            fmt_sig(rec.kappa),
            fmt_sig(rec.tail_rate),
            fmt_sig(rec.approach_rate),
            u8::from(rec.is_argmax_tail).to_string(),
            u8::from(rec.is_argmax_approach).to_string(),
        ]));
        out.push('\n');
    }
    out
}

pub fn tightness_json(records: &[TightnessRecord]) -> Result<String> {
    to_json(&records)
}
