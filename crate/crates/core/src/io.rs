//! On-disk document formats and text renderers.
//!
//! Every JSON document carries a `schema_version`; measures are exchanged as
//! component lists with smooth-factor samples in increasing-`x` order, and
//! each command-line run writes a manifest that fingerprints its inputs and
//! outputs so results can be traced and reproduced.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lyapunov::{DeterminantResult, ExponentDistribution, LyapunovProfile};
use crate::measure::{Atom, ContinuousSegment, SpectralMeasure};
use crate::rmt::McReport;

/// Current on-disk schema for the documents in this module.
pub const SCHEMA_VERSION: u32 = 1;

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

fn check_schema(version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::Format(format!(
            "schema_version {version} not supported (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

/// One point component of a measure document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomDoc {
    pub x: f64,
    pub mass: f64,
}

/// One continuous component of a measure document. `values` holds the
/// smooth density factor sampled at the canonical nodes of `[a, b]`, listed
/// in increasing-`x` order; the density itself is
/// `(x − a)^alpha_left (b − x)^alpha_right · smooth(x)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SegmentDoc {
    pub a: f64,
    pub b: f64,
    pub alpha_left: f64,
    pub alpha_right: f64,
    pub values: Vec<f64>,
}

/// A spectral measure as stored on disk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureDoc {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub atoms: Vec<AtomDoc>,
    #[serde(default)]
    pub segments: Vec<SegmentDoc>,
}

impl MeasureDoc {
    /// Snapshot of an in-memory measure.
    pub fn from_measure(mu: &SpectralMeasure) -> Self {
        MeasureDoc {
            schema_version: SCHEMA_VERSION,
            label: mu.label().to_string(),
            atoms: mu
                .atoms()
                .iter()
                .map(|a| AtomDoc {
                    x: a.x,
                    mass: a.mass,
                })
                .collect(),
            segments: mu
                .segments()
                .iter()
                .map(|s| SegmentDoc {
                    a: s.a,
                    b: s.b,
                    alpha_left: s.alpha_left,
                    alpha_right: s.alpha_right,
                    values: s.values_increasing_x(),
                })
                .collect(),
        }
    }

    /// Validates and reassembles the in-memory measure.
    pub fn into_measure(self) -> Result<SpectralMeasure> {
        check_schema(self.schema_version)?;
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                x: a.x,
                mass: a.mass,
            })
            .collect();
        let segments = self
            .segments
            .into_iter()
            .map(|s| {
                ContinuousSegment::from_values_increasing_x(
                    s.a,
                    s.b,
                    s.alpha_left,
                    s.alpha_right,
                    s.values,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        SpectralMeasure::new_sub_probability(atoms, segments, &self.label)
    }
}

/// Parses a measure document from JSON text.
pub fn measure_from_json(text: &str) -> Result<SpectralMeasure> {
    let doc: MeasureDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    doc.into_measure()
}

/// Renders a measure as a pretty JSON document.
pub fn measure_to_json(mu: &SpectralMeasure) -> String {
    serde_json::to_string_pretty(&MeasureDoc::from_measure(mu)).expect("measure serialization")
}

/// Provenance block attached to computed documents.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DocMeta {
    /// Fingerprint of the source measure document.
    pub source_measure_hash: String,
    /// Named tolerances that were in force during the computation.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Version of the tool that wrote the document.
    pub version: String,
}

impl DocMeta {
    /// Meta block for a result computed from `mu` with the given tolerances.
    pub fn for_measure(mu: &SpectralMeasure, tolerances: &[(&str, f64)]) -> Self {
        DocMeta {
            source_measure_hash: hash64_hex(measure_to_json(mu).as_bytes()),
            tolerances: tolerances
                .iter()
                .map(|&(k, v)| (k.to_string(), v))
                .collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Exponent profile document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileDoc {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub profile: LyapunovProfile,
    pub meta: DocMeta,
}

/// Exponent distribution document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionDoc {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub distribution: ExponentDistribution,
    pub meta: DocMeta,
}

/// Determinant document: both evaluation routes side by side.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetDoc {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub results: Vec<DeterminantResult>,
    pub meta: DocMeta,
}

/// One solved point of the growth-threshold equation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewmanRow {
    /// Growth threshold (the equation is posed at `x > 0`).
    pub x: f64,
    /// Solved fraction `H(x)`.
    pub h: f64,
    /// Exponent distribution function evaluated at `ln x`.
    pub cdf_at_log_x: f64,
    /// `|h − cdf_at_log_x|`.
    pub abs_diff: f64,
}

/// Growth-threshold equation document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewmanDoc {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub rows: Vec<NewmanRow>,
    pub meta: DocMeta,
}

/// One file written by a command-line run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub content_hash: String,
}

/// Reproducibility record written alongside every output set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub tool_version: String,
    pub command_line: Vec<String>,
    /// Fingerprint of the effective configuration or input document.
    pub config_hash: String,
    pub outputs: Vec<OutputEntry>,
}

impl RunManifest {
    pub fn new(command_line: Vec<String>, config: &[u8]) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command_line,
            config_hash: hash64_hex(config),
            outputs: Vec::new(),
        }
    }

    /// Records one written file and its content fingerprint.
    pub fn record(&mut self, path: &str, contents: &[u8]) {
        self.outputs.push(OutputEntry {
            path: path.to_string(),
            content_hash: hash64_hex(contents),
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization")
    }
}

/// First eight bytes of the SHA-256 digest, as lowercase hex.
pub fn hash64_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn fmt_cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// CSV rendering of a profile: `t,F,f`.
pub fn profile_csv(p: &LyapunovProfile) -> String {
    let mut out = String::from("t,F,f\n");
    for i in 0..p.t_grid.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_cell(p.t_grid[i]),
            fmt_cell(p.big_f_values[i]),
            fmt_cell(p.f_values[i])
        ));
    }
    out
}

/// CSV rendering of an exponent distribution: `x,cdf`.
pub fn distribution_csv(d: &ExponentDistribution) -> String {
    let mut out = String::from("x,cdf\n");
    for i in 0..d.x_grid.len() {
        out.push_str(&format!(
            "{},{}\n",
            fmt_cell(d.x_grid[i]),
            fmt_cell(d.cdf[i])
        ));
    }
    out
}

/// CSV rendering of solved growth-threshold rows: `x,H,cdf_at_log_x,abs_diff`.
pub fn newman_csv(rows: &[NewmanRow]) -> String {
    let mut out = String::from("x,H,cdf_at_log_x,abs_diff\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_cell(r.x),
            fmt_cell(r.h),
            fmt_cell(r.cdf_at_log_x),
            fmt_cell(r.abs_diff)
        ));
    }
    out
}

/// CSV rendering of Monte Carlo exponents:
/// `index,k_over_n,empirical,analytic,abs_error`.
pub fn exponents_csv(report: &McReport) -> String {
    let mut out = String::from("index,k_over_n,empirical,analytic,abs_error\n");
    let n = report.empirical_exponents.len();
    for i in 0..n {
        let frac = (i as f64 + 0.5) / n as f64;
        let analytic = report
            .exponent_analytic
            .as_ref()
            .map_or(f64::NAN, |a| a[i]);
        let err = if analytic.is_nan() {
            f64::NAN
        } else {
            (report.empirical_exponents[i] - analytic).abs()
        };
        out.push_str(&format!(
            "{i},{},{},{},{}\n",
            fmt_cell(frac),
            fmt_cell(report.empirical_exponents[i]),
            fmt_cell(analytic),
            fmt_cell(err)
        ));
    }
    out
}
