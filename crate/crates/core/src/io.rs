//! File formats: impedance sweeps, inductance spectra, coil/plate configuration
//! and calibration references.
//!
//! All quantities are SI with the unit in the column or key name. Numbers are
//! written with 17 significant digits so a write/parse cycle is lossless.

use num_complex::Complex64;
use serde::Deserialize;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::compensation::CalibrationReference;
use crate::forward::{CoilPair, Plate};
use crate::spectrum::{SpectralSample, Spectrum, MIN_SAMPLES};
use crate::{Error, Result};

pub const SWEEP_HEADER: &str = "frequency_hz,re_z_ohm,im_z_ohm";
pub const SPECTRUM_HEADER: &str = "frequency_hz,re_dl_h,im_dl_h";

/// Relative tolerance for two sweeps to share a frequency grid.
pub const GRID_MATCH_TOL: f64 = 1e-9;

/// Impedance readings from a frequency sweep, strictly increasing in frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceSweep {
    samples: Vec<(f64, Complex64)>,
}

impl ImpedanceSweep {
    pub fn new(samples: Vec<(f64, Complex64)>) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::Format(format!("sweep needs at least {MIN_SAMPLES} samples, got {}", samples.len())));
        }
        for (i, (f, z)) in samples.iter().enumerate() {
            if !(f.is_finite() && *f > 0.0 && z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::Format(format!("sample {i}: values must be finite with positive frequency")));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::Format(format!("sample {}: frequencies must be strictly increasing", i + 1)));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(f64, Complex64)] {
        &self.samples
    }
}

/// Sweep over a plate together with the matching air sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPair {
    sample: ImpedanceSweep,
    air: ImpedanceSweep,
}

impl SweepPair {
    pub fn new(sample: ImpedanceSweep, air: ImpedanceSweep) -> Result<Self> {
        let (a, b) = (sample.samples(), air.samples());
        let common = a.len().min(b.len());
        for i in 0..common {
            let (fa, fb) = (a[i].0, b[i].0);
            if (fa - fb).abs() > GRID_MATCH_TOL * fa.abs().max(fb.abs()) {
                return Err(Error::Alignment { index: i, message: format!("frequencies {fa} Hz and {fb} Hz differ") });
            }
        }
        if a.len() != b.len() {
            return Err(Error::Alignment {
                index: common,
                message: format!("sweep lengths differ ({} vs {})", a.len(), b.len()),
            });
        }
        Ok(Self { sample, air })
    }

    pub fn sample(&self) -> &ImpedanceSweep {
        &self.sample
    }

    pub fn air(&self) -> &ImpedanceSweep {
        &self.air
    }
}

fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Shared reader for the three-column CSV formats.
fn parse_three_columns(text: &str, header: &str) -> Result<Vec<(usize, [f64; 3])>> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw).trim();
        if !seen_header {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line != header {
                return Err(Error::Format(format!("line {line_no}: expected header `{header}`, found `{line}`")));
            }
            seen_header = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse { line: line_no, message: format!("expected 3 fields, found {}", fields.len()) });
        }
        let mut values = [0.0; 3];
        for (slot, field) in values.iter_mut().zip(&fields) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse { line: line_no, message: format!("`{field}` is not a number") })?;
            if !v.is_finite() {
                return Err(Error::Parse { line: line_no, message: format!("non-finite value `{field}`") });
            }
            *slot = v;
        }
        if values[0] <= 0.0 {
            return Err(Error::Parse { line: line_no, message: "frequency must be positive".into() });
        }
        if let Some((prev_line, prev)) = rows.last() {
            let prev: &[f64; 3] = prev;
            if values[0] == prev[0] {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate frequency {} (also on line {prev_line})", values[0]),
                });
            }
            if values[0] < prev[0] {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("frequency {} below previous {}", values[0], prev[0]),
                });
            }
        }
        rows.push((line_no, values));
    }
    if !seen_header {
        return Err(Error::Format(format!("missing header `{header}`")));
    }
    Ok(rows)
}

/// Parse a `frequency_hz,re_z_ohm,im_z_ohm` sweep.
pub fn parse_sweep_csv(text: &str) -> Result<ImpedanceSweep> {
    let rows = parse_three_columns(text, SWEEP_HEADER)?;
    ImpedanceSweep::new(rows.into_iter().map(|(_, [f, re, im])| (f, Complex64::new(re, im))).collect())
}

pub fn write_sweep_csv(sweep: &ImpedanceSweep) -> String {
    let mut out = String::with_capacity(64 * (sweep.samples().len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for (f, z) in sweep.samples() {
        let _ = writeln!(out, "{},{},{}", format_f64(*f), format_f64(z.re), format_f64(z.im));
    }
    out
}

/// Parse a `frequency_hz,re_dl_h,im_dl_h` spectrum.
pub fn parse_spectrum_csv(text: &str) -> Result<Spectrum> {
    let rows = parse_three_columns(text, SPECTRUM_HEADER)?;
    Spectrum::new(
        rows.into_iter()
            .map(|(_, [f, re, im])| SpectralSample { omega: 2.0 * PI * f, delta_l: Complex64::new(re, im) })
            .collect(),
    )
}

/// Write a spectrum with optional leading `#` comment lines.
pub fn write_spectrum_csv(spectrum: &Spectrum, comments: &[String]) -> String {
    let mut out = String::with_capacity(64 * (spectrum.len() + comments.len() + 1));
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    out.push_str(SPECTRUM_HEADER);
    out.push('\n');
    for s in spectrum.samples() {
        let _ =
            writeln!(out, "{},{},{}", format_f64(s.frequency_hz()), format_f64(s.delta_l.re), format_f64(s.delta_l.im));
    }
    out
}

/// `ΔL = (Z − Z_air)/(j 2π f)` at every sample.
pub fn impedance_to_delta_l(pair: &SweepPair) -> Result<Spectrum> {
    let samples = pair
        .sample()
        .samples()
        .iter()
        .zip(pair.air().samples())
        .map(|(&(f, z), &(_, z_air))| {
            let omega = 2.0 * PI * f;
            let dz = z - z_air;
            // Division by jω written out: Re ΔL = Im ΔZ/ω, Im ΔL = −Re ΔZ/ω.
            let delta_l = Complex64::new(dz.im / omega, -dz.re / omega);
            SpectralSample { omega, delta_l }
        })
        .collect();
    Spectrum::new(samples)
}

/// Coil and/or plate parameters from one JSON object.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Config {
    pub coil: Option<CoilPair>,
    pub plate: Option<Plate>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    r1_m: Option<f64>,
    r2_m: Option<f64>,
    h_m: Option<f64>,
    g_m: Option<f64>,
    l_base_m: Option<f64>,
    n_turns: Option<i64>,
    sigma_s_per_m: Option<f64>,
    c_m: Option<f64>,
    mu_r: Option<f64>,
}

fn require<T: Copy>(key: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| Error::config(key, "missing"))
}

fn json_error(e: serde_json::Error) -> Error {
    let msg = e.to_string();
    // serde names the offending field in backticks.
    let key = msg.split('`').nth(1).map(str::to_owned).unwrap_or_else(|| "json".to_owned());
    if e.is_syntax() || e.is_eof() {
        Error::Format(format!("invalid JSON: {msg}"))
    } else {
        Error::Config { key, message: msg }
    }
}

/// Parse a configuration file. Coil keys: `r1_m`, `r2_m`, `h_m`, `g_m`,
/// `l_base_m`, `n_turns`. Plate keys: `sigma_s_per_m`, `c_m`, optional `mu_r`
/// (default 1). Either group may be absent, not both; unknown keys are rejected.
pub fn load_config(text: &str) -> Result<Config> {
    let raw: RawConfig = serde_json::from_str(text).map_err(json_error)?;
    let any_coil = raw.r1_m.is_some()
        || raw.r2_m.is_some()
        || raw.h_m.is_some()
        || raw.g_m.is_some()
        || raw.l_base_m.is_some()
        || raw.n_turns.is_some();
    let any_plate = raw.sigma_s_per_m.is_some() || raw.c_m.is_some() || raw.mu_r.is_some();

    let coil = if any_coil {
        let n = require("n_turns", raw.n_turns)?;
        let n_turns = u32::try_from(n)
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::config("n_turns", "must be a positive integer"))?;
        let coil = CoilPair {
            r1: require("r1_m", raw.r1_m)?,
            r2: require("r2_m", raw.r2_m)?,
            h: require("h_m", raw.h_m)?,
            g: require("g_m", raw.g_m)?,
            l_base: require("l_base_m", raw.l_base_m)?,
            n_turns,
        };
        coil.validate()?;
        Some(coil)
    } else {
        None
    };

    let plate = if any_plate {
        let plate = Plate {
            sigma: require("sigma_s_per_m", raw.sigma_s_per_m)?,
            c: require("c_m", raw.c_m)?,
            mu_r: raw.mu_r.unwrap_or(1.0),
        };
        plate.validate()?;
        Some(plate)
    } else {
        None
    };

    if coil.is_none() && plate.is_none() {
        return Err(Error::config("json", "no coil or plate keys present"));
    }
    Ok(Config { coil, plate })
}

pub fn coil_to_json(coil: &CoilPair) -> String {
    serde_json::to_string_pretty(coil).expect("coil serialises")
}

pub fn plate_to_json(plate: &Plate) -> String {
    serde_json::to_string_pretty(plate).expect("plate serialises")
}

pub fn read_calibration(text: &str) -> Result<CalibrationReference> {
    let reference: CalibrationReference = serde_json::from_str(text).map_err(json_error)?;
    reference.validate()?;
    Ok(reference)
}

pub fn write_calibration(reference: &CalibrationReference) -> String {
    let mut s = serde_json::to_string_pretty(reference).expect("calibration serialises");
    s.push('\n');
    s
}
