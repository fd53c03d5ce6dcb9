//! Browser demo: simulated spectra, lift-off compensation and the coil
//! envelope, each returned to JavaScript as a JSON string.

use std::cell::Cell;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use liftoff_core::compensation::{CalibrationReference, Mode};
use liftoff_core::forward::{characteristic_alpha0, envelope, Plate};
use liftoff_core::scenarios::{envelope_figure, Setup};
use liftoff_core::spectrum::{find_peak, FrequencyGrid};
use liftoff_core::{Error, Result};

/// Coarser than the command-line default so a sweep stays interactive.
fn demo_setup() -> Setup {
    Setup { grid: FrequencyGrid { f_min: 1e3, f_max: 1e6, points_per_decade: 20 }, ..Setup::default() }
}

fn plate_um(thickness_um: f64) -> Result<Plate> {
    let plate = Plate::aluminium(thickness_um * 1e-6);
    plate.validate()?;
    Ok(plate)
}

fn extra_m(extra_mm: f64) -> Result<f64> {
    if !(extra_mm.is_finite() && extra_mm >= 0.0) {
        return Err(Error::config("liftoff-extra", "must be a non-negative number of millimetres"));
    }
    Ok(extra_mm * 1e-3)
}

thread_local! {
    // Calibrations are reused while the thickness slider stays put.
    static CALIBRATION: Cell<Option<(u64, CalibrationReference)>> = const { Cell::new(None) };
}

fn calibration(setup: &Setup, plate: &Plate) -> Result<CalibrationReference> {
    let key = plate.c.to_bits();
    if let Some((k, reference)) = CALIBRATION.get() {
        if k == key {
            return Ok(reference);
        }
    }
    let reference = setup.calibrate(plate)?;
    CALIBRATION.set(Some((key, reference)));
    Ok(reference)
}

pub fn spectrum_value(thickness_um: f64, extra_mm: f64) -> Result<Value> {
    let setup = demo_setup();
    let spectrum = setup.spectrum(&plate_um(thickness_um)?, extra_m(extra_mm)?)?;
    let peak = find_peak(&spectrum)?;
    let freq: Vec<f64> = spectrum.samples().iter().map(|s| s.frequency_hz()).collect();
    Ok(json!({
        "frequency_hz": freq,
        "salience_h": spectrum.saliences(),
        "peak_hz": peak.omega_peak / (2.0 * std::f64::consts::PI),
        "peak_salience_h": peak.salience,
        "boundary": peak.boundary_flag,
    }))
}

pub fn compensation_value(thickness_um: f64, extra_mm: f64, mode: &str) -> Result<Value> {
    let setup = demo_setup();
    let plate = plate_um(thickness_um)?;
    let mode: Mode = mode.parse()?;
    let reference = calibration(&setup, &plate)?;
    let (peak, result) = setup.measure(&reference, &plate, extra_m(extra_mm)?, mode)?;
    Ok(json!({
        "omega_ref": reference.omega_ref,
        "omega_meas": peak.omega_peak,
        "omega_comp": result.omega_comp,
        "ln_ratio": result.ln_ratio,
        "liftoff_extra_est_mm": result.liftoff_extra * 1e3,
        "thickness_uncomp_um": result.thickness_uncompensated * 1e6,
        "thickness_comp_um": result.thickness * 1e6,
        "warnings": result.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
    }))
}

pub fn envelope_value(extra_mm: f64) -> Result<Value> {
    let setup = demo_setup();
    let extra = extra_m(extra_mm)?;
    let (alpha0, table) = envelope_figure(&setup, 300)?;
    let alphas = table.column("alpha_per_m").unwrap_or_default();
    let peak = envelope(alpha0, &setup.coil, 0.0, setup.form);
    let shifted: Vec<f64> = alphas.iter().map(|&a| envelope(a, &setup.coil, extra, setup.form) / peak).collect();
    Ok(json!({
        "alpha0": alpha0,
        "alpha0_shifted": characteristic_alpha0(&setup.coil, extra, setup.form)?,
        "alpha_per_m": alphas,
        "envelope": table.column("envelope_normalized").unwrap_or_default(),
        "envelope_shifted": shifted,
        "sin2": table.column("sin2_surrogate").unwrap_or_default(),
    }))
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e.to_string()))
}

/// Spectrum of `−Im ΔL` for an aluminium plate.
#[wasm_bindgen]
pub fn spectrum(thickness_um: f64, extra_mm: f64) -> std::result::Result<String, JsValue> {
    to_js(spectrum_value(thickness_um, extra_mm))
}

/// Measured and compensated peak frequency and thickness; `mode` is `thin` or `full`.
#[wasm_bindgen]
pub fn compensation(thickness_um: f64, extra_mm: f64, mode: &str) -> std::result::Result<String, JsValue> {
    to_js(compensation_value(thickness_um, extra_mm, mode))
}

/// Normalised coil envelope at baseline and at the extra lift-off, with the `sin²` surrogate.
#[wasm_bindgen]
pub fn coil_envelope(extra_mm: f64) -> std::result::Result<String, JsValue> {
    to_js(envelope_value(extra_mm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_has_interior_peak() {
        let v = spectrum_value(22.0, 0.0).unwrap();
        assert_eq!(v["frequency_hz"].as_array().unwrap().len(), 61);
        assert_eq!(v["boundary"], false);
        let peak = v["peak_hz"].as_f64().unwrap();
        assert!((30e3..50e3).contains(&peak), "{peak}");
    }

    #[test]
    fn compensation_recovers_thickness() {
        let v = compensation_value(22.0, 1.5, "thin").unwrap();
        let comp = v["thickness_comp_um"].as_f64().unwrap();
        let uncomp = v["thickness_uncomp_um"].as_f64().unwrap();
        assert!((comp / 22.0 - 1.0).abs() < 0.02, "{comp}");
        assert!(uncomp > comp);
        // Second call hits the cached calibration and agrees exactly.
        assert_eq!(compensation_value(22.0, 1.5, "thin").unwrap(), v);
    }

    #[test]
    fn envelope_shifts_down() {
        let v = envelope_value(1.0).unwrap();
        assert!(v["alpha0_shifted"].as_f64().unwrap() < v["alpha0"].as_f64().unwrap());
        assert_eq!(v["envelope"].as_array().unwrap().len(), v["sin2"].as_array().unwrap().len());
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(spectrum_value(22.0, -1.0).is_err());
        assert!(spectrum_value(-5.0, 0.0).is_err());
        assert!(compensation_value(22.0, 1.0, "thick").is_err());
    }
}
