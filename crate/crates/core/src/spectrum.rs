//! Frequency sweeps of the forward model and peak extraction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::forward::{delta_l, CoilPair, GeometryForm, Plate, QuadratureSettings};
use crate::{Error, Result};

/// Minimum number of samples in a [`Spectrum`].
pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub f_min: f64,
    pub f_max: f64,
    pub points_per_decade: usize,
}

impl Default for FrequencyGrid {
    /// 100 Hz – 10 MHz at 30 points per decade.
    fn default() -> Self {
        Self { f_min: 1e2, f_max: 1e7, points_per_decade: 30 }
    }
}

impl FrequencyGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_min.is_finite() && self.f_min > 0.0) {
            return Err(Error::config("fmin", "must be positive"));
        }
        if !(self.f_max.is_finite() && self.f_max > self.f_min) {
            return Err(Error::config("fmax", "must exceed fmin"));
        }
        if self.points_per_decade < 10 {
            return Err(Error::config("ppd", "must be at least 10"));
        }
        Ok(())
    }
}

/// Geometrically spaced frequencies in Hz from `f_min` to `f_max` inclusive.
pub fn make_log_grid(grid: &FrequencyGrid) -> Result<Vec<f64>> {
    grid.validate()?;
    let decades = (grid.f_max / grid.f_min).log10();
    // Guard the ceiling against log10 round-off on exact decade spans.
    let steps = ((decades * grid.points_per_decade as f64) - 1e-9).ceil().max(1.0) as usize;
    let ratio = (grid.f_max / grid.f_min).ln() / steps as f64;
    let mut out: Vec<f64> = (0..=steps).map(|i| grid.f_min * (ratio * i as f64).exp()).collect();
    out[0] = grid.f_min;
    out[steps] = grid.f_max;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSample {
    /// rad/s
    pub omega: f64,
    /// H
    pub delta_l: Complex64,
}

impl SpectralSample {
    /// `−Im ΔL`, positive for a nonmagnetic conductor.
    pub fn salience(&self) -> f64 {
        -self.delta_l.im
    }

    pub fn frequency_hz(&self) -> f64 {
        self.omega / (2.0 * PI)
    }
}

/// Samples with strictly increasing angular frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    samples: Vec<SpectralSample>,
}

impl Spectrum {
    pub fn new(samples: Vec<SpectralSample>) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::Format(format!("spectrum needs at least {MIN_SAMPLES} samples, got {}", samples.len())));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.omega.is_finite() && s.omega > 0.0) {
                return Err(Error::Format(format!("sample {i}: angular frequency must be positive")));
            }
            if !(s.delta_l.re.is_finite() && s.delta_l.im.is_finite()) {
                return Err(Error::Format(format!("sample {i}: non-finite inductance")));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].omega <= w[0].omega) {
            return Err(Error::Format(format!("sample {}: frequencies must be strictly increasing", i + 1)));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[SpectralSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn saliences(&self) -> Vec<f64> {
        self.samples.iter().map(SpectralSample::salience).collect()
    }
}

/// Evaluate `ΔL` at every grid frequency.
pub fn simulate_spectrum(
    grid: &FrequencyGrid,
    coil: &CoilPair,
    plate: &Plate,
    extra_liftoff: f64,
    form: GeometryForm,
    settings: &QuadratureSettings,
) -> Result<Spectrum> {
    let freqs = make_log_grid(grid)?;
    let samples = freqs
        .iter()
        .map(|&f| {
            let omega = 2.0 * PI * f;
            delta_l(omega, coil, plate, extra_liftoff, form, settings)
                .map(|dl| SpectralSample { omega, delta_l: dl })
                .map_err(|e| match e {
                    Error::Config { .. } => e,
                    other => Error::AtFrequency { frequency_hz: f, source: Box::new(other) },
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakEstimate {
    /// rad/s
    pub omega_peak: f64,
    /// H, peak value of `−Im ΔL`
    pub salience: f64,
    pub index: usize,
    pub boundary_flag: bool,
}

/// Locate the maximum of `−Im ΔL`.
///
/// The discrete maximum (lowest index on ties) is refined by a parabola
/// through the three samples around it in `(ln ω, S)`. A maximum on the first
/// or last sample is returned unrefined with `boundary_flag` set.
pub fn find_peak(spectrum: &Spectrum) -> Result<PeakEstimate> {
    let s = spectrum.saliences();
    let samples = spectrum.samples();
    let index = s.iter().enumerate().fold(0, |best, (i, v)| if *v > s[best] { i } else { best });
    if s[index] <= 0.0 {
        return Err(Error::NoPeak);
    }
    if index == 0 || index == s.len() - 1 {
        return Ok(PeakEstimate { omega_peak: samples[index].omega, salience: s[index], index, boundary_flag: true });
    }

    let x0 = samples[index - 1].omega.ln();
    let x1 = samples[index].omega.ln();
    let x2 = samples[index + 1].omega.ln();
    let (y0, y1, y2) = (s[index - 1], s[index], s[index + 1]);

    // Newton form of the parabola through the three points.
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    let (x_peak, y_peak) = if curvature < 0.0 {
        // Slope at x1.
        let b = d01 + curvature * (x1 - x0);
        let xv = x1 - b / (2.0 * curvature);
        let xv = xv.clamp(x0, x2);
        let yv = y0 + d01 * (xv - x0) + curvature * (xv - x0) * (xv - x1);
        (xv, yv.max(y1))
    } else {
        (x1, y1)
    };

    Ok(PeakEstimate { omega_peak: x_peak.exp(), salience: y_peak, index, boundary_flag: false })
}
