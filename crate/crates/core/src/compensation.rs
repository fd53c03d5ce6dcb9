//! Lift-off compensation of the spectral peak and thickness inversion.
//!
//! A lift-off increase `l` above the calibration configuration attenuates the
//! peak amplitude and pulls the peak frequency down. Writing
//! `r = ln(S_meas / S_ref)` for the log amplitude ratio, the amplitude model
//! `r = −2(α0 − 2α0² l/π²) l` is a quadratic in `α0 l` whose small root gives
//! the lift-off, and the shifted spatial frequency `α0 √(π² + 4r)/π` undoes
//! the frequency shift.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::forward::{characteristic_alpha0, CoilPair, GeometryForm, Plate};
use crate::spectrum::{find_peak, Spectrum};
use crate::{Error, Result, MU0};

/// Positive log ratios up to this value are treated as noise and clamped to 0.
pub const LN_RATIO_CLAMP: f64 = 0.01;

/// Lowest admissible log ratio, where `π⁴ + 4π² r` reaches zero.
pub const LN_RATIO_MIN: f64 = -PI * PI / 4.0;

/// `α0·c` above which the thin-plate formulas are flagged.
pub const THIN_REGIME_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationSource {
    Simulated,
    Measured,
}

/// Peak frequency and amplitude at the sensor's baseline lift-off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationReference {
    #[serde(rename = "alpha0_ref_per_m")]
    pub alpha0_ref: f64,
    #[serde(rename = "s_ref_h")]
    pub s_ref: f64,
    #[serde(rename = "omega_ref_rad_s")]
    pub omega_ref: f64,
    pub coil: CoilPair,
    pub source: CalibrationSource,
}

impl CalibrationReference {
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(key, "must be positive and finite"))
            }
        };
        positive("alpha0_ref_per_m", self.alpha0_ref)?;
        positive("s_ref_h", self.s_ref)?;
        positive("omega_ref_rad_s", self.omega_ref)?;
        self.coil.validate()
    }

    /// Build a reference from a baseline spectrum.
    ///
    /// With a known reference plate, `alpha0_ref` is the spatial frequency that
    /// makes the first-order peak model reproduce the baseline peak exactly
    /// (see [`alpha0_from_peak`]). Otherwise it falls back to the envelope
    /// maximum of the coil geometry.
    pub fn from_baseline(
        spectrum: &Spectrum,
        coil: &CoilPair,
        reference_plate: Option<&Plate>,
        form: GeometryForm,
        source: CalibrationSource,
    ) -> Result<Self> {
        let peak = find_peak(spectrum)?;
        if peak.boundary_flag {
            return Err(Error::BoundaryPeak { index: peak.index });
        }
        let alpha0_ref = match reference_plate {
            Some(plate) => alpha0_from_peak(peak.omega_peak, plate.sigma, plate.c),
            None => characteristic_alpha0(coil, 0.0, form)?,
        };
        let reference = Self { alpha0_ref, s_ref: peak.salience, omega_ref: peak.omega_peak, coil: *coil, source };
        reference.validate()?;
        Ok(reference)
    }
}

/// Measured peak of `−Im ΔL`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompensationInput {
    pub omega_meas: f64,
    pub s_meas: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Closed-form thin-plate compensation.
    #[default]
    Thin,
    /// Includes the `2α0²c` term of the peak model, solved iteratively.
    Full,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thin" => Ok(Mode::Thin),
            "full" => Ok(Mode::Full),
            other => Err(Error::config("mode", format!("unknown mode `{other}` (thin|full)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Measured amplitude slightly above the reference; ratio clamped to 0.
    LnRatioClamped { raw: f64 },
    /// Plate is too thick for the thin-plate approximation.
    OutsideThinRegime { alpha0_c: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::LnRatioClamped { raw } => {
                write!(f, "ln ratio {raw:.6} above zero, clamped to 0")
            }
            Warning::OutsideThinRegime { alpha0_c } => {
                write!(f, "alpha0*c = {alpha0_c:.4} exceeds {THIN_REGIME_LIMIT}; thin-plate model is unreliable")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompensationResult {
    pub ln_ratio: f64,
    pub alpha0_l0: f64,
    /// m, above the calibration lift-off
    pub liftoff_extra: f64,
    /// rad/s
    pub omega_comp: f64,
    /// m
    pub thickness: f64,
    /// m, from the measured peak with no lift-off correction
    pub thickness_uncompensated: f64,
    pub mode: Mode,
    /// Fixed-point iterations used in [`Mode::Full`], 0 otherwise.
    pub iterations: usize,
    pub warnings: Vec<Warning>,
}

/// Clamped log ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LnRatio {
    pub value: f64,
    /// Set when a small positive ratio was clamped to 0.
    pub clamped: Option<f64>,
}

/// `ln(s_meas / s_ref)`.
pub fn log_amplitude_ratio(s_meas: f64, s_ref: f64) -> Result<LnRatio> {
    if !(s_meas.is_finite() && s_meas > 0.0 && s_ref.is_finite() && s_ref > 0.0) {
        return Err(Error::Domain(format!("amplitudes must be positive, got s_meas = {s_meas}, s_ref = {s_ref}")));
    }
    let raw = (s_meas / s_ref).ln();
    if raw > LN_RATIO_CLAMP {
        return Err(Error::CalibrationInconsistent { ln_ratio: raw, tolerance: LN_RATIO_CLAMP });
    }
    if raw > 0.0 {
        return Ok(LnRatio { value: 0.0, clamped: Some(raw) });
    }
    check_ln_ratio(raw)?;
    Ok(LnRatio { value: raw, clamped: None })
}

fn check_ln_ratio(ln_ratio: f64) -> Result<()> {
    let discriminant = PI.powi(4) + 4.0 * PI * PI * ln_ratio;
    if !ln_ratio.is_finite() || ln_ratio > 0.0 || discriminant <= 0.0 {
        return Err(Error::Domain(format!(
            "ln ratio {ln_ratio} outside [-pi^2/4, 0]; discriminant pi^4 + 4 pi^2 ln = {discriminant}"
        )));
    }
    Ok(())
}

/// `√(1 + 4r/π²)`, the factor shared by every compensation formula. Exactly
/// 1 when `r = 0`.
fn root_factor(ln_ratio: f64) -> Result<f64> {
    check_ln_ratio(ln_ratio)?;
    Ok((1.0 + 4.0 * ln_ratio / (PI * PI)).sqrt())
}

/// Small root of `4x² − 2π²x − π² r = 0`, with `x = α0·l`.
pub fn solve_alpha0_l0(ln_ratio: f64) -> Result<f64> {
    check_ln_ratio(ln_ratio)?;
    let pi2 = PI * PI;
    // (π² − √(π⁴ + 4π² r))/4 rewritten without cancellation.
    let root = (pi2 * pi2 + 4.0 * pi2 * ln_ratio).sqrt();
    Ok(-pi2 * ln_ratio / (pi2 + root))
}

/// Lift-off increase in metres.
pub fn estimate_liftoff(ln_ratio: f64, alpha0: f64) -> Result<f64> {
    if !(alpha0.is_finite() && alpha0 > 0.0) {
        return Err(Error::Domain(format!("alpha0 must be positive, got {alpha0}")));
    }
    Ok(solve_alpha0_l0(ln_ratio)? / alpha0)
}

/// Thin-plate compensated peak frequency `ω / √(1 + 4r/π²)`.
pub fn compensate_thin(omega_meas: f64, ln_ratio: f64) -> Result<f64> {
    Ok(omega_meas / root_factor(ln_ratio)?)
}

/// Output of [`compensate_full`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullCompensation {
    pub omega_comp: f64,
    pub thickness: f64,
    /// Reference spatial frequency recovered from the converged thickness.
    pub alpha0: f64,
    pub iterations: usize,
}

/// Compensation keeping the `2α0²c` term of the peak model.
///
/// The lift-off shifted spatial frequency is `αr = α0 √(1 + 4r/π²)`. The
/// thickness solves `σμ0ωc = 2αr²c + 2αr`, iterated as
/// `c ← 2αr (1 + αr c)/(σμ0ω)` from `c_seed`; the map contracts with factor
/// `≈ αr c`. The compensated frequency is then the reference peak model at
/// that thickness, written in terms of the measured quantities.
pub fn compensate_full(
    omega_meas: f64,
    ln_ratio: f64,
    sigma: f64,
    alpha0_ref: f64,
    c_seed: f64,
) -> Result<FullCompensation> {
    for (name, v) in [("omega", omega_meas), ("sigma", sigma), ("alpha0", alpha0_ref), ("c_seed", c_seed)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    let root = root_factor(ln_ratio)?;
    let alpha_r = alpha0_ref * root;
    let drive = sigma * MU0 * omega_meas;
    if drive <= 2.0 * alpha_r * alpha_r {
        return Err(Error::Numerical(format!(
            "no positive thickness: sigma*mu0*omega = {drive} <= 2 alpha_r^2 = {}",
            2.0 * alpha_r * alpha_r
        )));
    }

    let mut c = c_seed;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let next = 2.0 * alpha_r * (1.0 + alpha_r * c) / drive;
        let change = (next - c).abs() / next;
        c = next;
        if change < 1e-6 {
            break;
        }
        if iterations >= 50 {
            return Err(Error::Numerical(format!(
                "full compensation did not converge in 50 iterations (last thickness {c} m)"
            )));
        }
    }

    // Spatial frequency recovered from ω, c and r, then the reference peak.
    let s = (1.0 + 2.0 * drive * c * c).sqrt() - 1.0;
    let alpha0 = s / (2.0 * c * root);
    let omega_comp = (s * s + 2.0 * s * root) / (2.0 * sigma * MU0 * c * c * root * root);
    Ok(FullCompensation { omega_comp, thickness: c, alpha0, iterations })
}

/// Thin-plate thickness `2 α0 √(π² + 4r) / (π σ μ0 ω)`.
pub fn invert_thickness(omega_meas: f64, ln_ratio: f64, sigma: f64, alpha0_ref: f64) -> Result<f64> {
    let root = root_factor(ln_ratio)?;
    Ok(2.0 * alpha0_ref * root / (sigma * MU0 * omega_meas))
}

/// Thickness from the measured peak with no lift-off correction.
pub fn uncompensated_thickness(omega_meas: f64, sigma: f64, alpha0_ref: f64) -> f64 {
    2.0 * alpha0_ref / (sigma * MU0 * omega_meas)
}

/// First-order peak frequency `(2α0²c + 2α0)/(σ μ0 c)`.
pub fn forward_peak_model(alpha0: f64, sigma: f64, c: f64) -> f64 {
    (2.0 * alpha0 * alpha0 * c + 2.0 * alpha0) / (sigma * MU0 * c)
}

/// Inverse of [`forward_peak_model`] in `α0`: the positive root of
/// `2cα² + 2α − σμ0cω = 0`.
pub fn alpha0_from_peak(omega: f64, sigma: f64, c: f64) -> f64 {
    let x = sigma * MU0 * omega * c;
    x / (1.0 + (1.0 + 2.0 * x * c).sqrt())
}

/// Full compensation chain from a measured peak.
pub fn compensate(
    input: &CompensationInput,
    reference: &CalibrationReference,
    sigma: f64,
    mode: Mode,
) -> Result<CompensationResult> {
    reference.validate()?;
    if !(input.omega_meas.is_finite() && input.omega_meas > 0.0) {
        return Err(Error::Domain("measured peak frequency must be positive".into()));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::config("sigma", "must be positive"));
    }
    let mut warnings = Vec::new();
    let ratio = log_amplitude_ratio(input.s_meas, reference.s_ref)?;
    if let Some(raw) = ratio.clamped {
        warnings.push(Warning::LnRatioClamped { raw });
    }
    let r = ratio.value;
    let alpha0 = reference.alpha0_ref;
    let alpha0_l0 = solve_alpha0_l0(r)?;
    let liftoff_extra = alpha0_l0 / alpha0;
    let thickness_uncompensated = uncompensated_thickness(input.omega_meas, sigma, alpha0);
    let thin_thickness = invert_thickness(input.omega_meas, r, sigma, alpha0)?;

    let (omega_comp, thickness, iterations) = match mode {
        Mode::Thin => (compensate_thin(input.omega_meas, r)?, thin_thickness, 0),
        Mode::Full => {
            let full = compensate_full(input.omega_meas, r, sigma, alpha0, thin_thickness)?;
            (full.omega_comp, full.thickness, full.iterations)
        }
    };

    let alpha0_c = alpha0 * thickness;
    if alpha0_c > THIN_REGIME_LIMIT {
        warnings.push(Warning::OutsideThinRegime { alpha0_c });
    }

    Ok(CompensationResult {
        ln_ratio: r,
        alpha0_l0,
        liftoff_extra,
        omega_comp,
        thickness,
        thickness_uncompensated,
        mode,
        iterations,
        warnings,
    })
}
