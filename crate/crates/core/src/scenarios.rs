//! End-to-end simulated runs: calibration, the thickness table and the data
//! behind the standard figures.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::compensation::{
    compensate, CalibrationReference, CalibrationSource, CompensationInput, CompensationResult, Mode,
};
use crate::forward::{characteristic_alpha0, envelope, CoilPair, GeometryForm, Plate, QuadratureSettings};
use crate::spectrum::{find_peak, simulate_spectrum, FrequencyGrid, PeakEstimate, Spectrum};
use crate::{Error, Result};

/// Everything except the plate and lift-off that a simulated run depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setup {
    pub coil: CoilPair,
    pub form: GeometryForm,
    pub grid: FrequencyGrid,
    pub settings: QuadratureSettings,
}

impl Default for Setup {
    fn default() -> Self {
        Self {
            coil: CoilPair::REFERENCE,
            form: GeometryForm::default(),
            grid: FrequencyGrid::default(),
            settings: QuadratureSettings::default(),
        }
    }
}

impl Setup {
    pub fn spectrum(&self, plate: &Plate, extra_liftoff: f64) -> Result<Spectrum> {
        simulate_spectrum(&self.grid, &self.coil, plate, extra_liftoff, self.form, &self.settings)
    }

    /// Interior peak of the simulated spectrum.
    pub fn peak(&self, plate: &Plate, extra_liftoff: f64) -> Result<PeakEstimate> {
        let peak = find_peak(&self.spectrum(plate, extra_liftoff)?)?;
        if peak.boundary_flag {
            return Err(Error::BoundaryPeak { index: peak.index });
        }
        Ok(peak)
    }

    /// Calibrate at the baseline lift-off over a plate of known thickness.
    pub fn calibrate(&self, reference_plate: &Plate) -> Result<CalibrationReference> {
        let spectrum = self.spectrum(reference_plate, 0.0)?;
        CalibrationReference::from_baseline(
            &spectrum,
            &self.coil,
            Some(reference_plate),
            self.form,
            CalibrationSource::Simulated,
        )
    }

    /// Simulate a measurement and run it through the compensation chain.
    pub fn measure(
        &self,
        reference: &CalibrationReference,
        plate: &Plate,
        extra_liftoff: f64,
        mode: Mode,
    ) -> Result<(PeakEstimate, CompensationResult)> {
        let peak = self.peak(plate, extra_liftoff)?;
        let input = CompensationInput { omega_meas: peak.omega_peak, s_meas: peak.salience };
        Ok((peak, compensate(&input, reference, plate.sigma, mode)?))
    }
}

/// Table rows use absolute lift-offs; the baseline is subtracted to get the
/// extra lift-off fed to the model.
pub const TABLE_LIFTOFFS_M: [f64; 3] = [1.5e-3, 2.0e-3, 3.5e-3];
pub const TABLE_THICKNESSES_M: [f64; 2] = [22e-6, 44e-6];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThicknessRow {
    pub liftoff_m: f64,
    pub actual_m: f64,
    pub uncompensated_m: f64,
    pub compensated_m: f64,
    pub compensated_full_m: f64,
    pub omega_meas: f64,
    pub omega_comp_thin: f64,
    pub omega_comp_full: f64,
    pub liftoff_extra_est_m: f64,
    pub full_iterations: usize,
}

/// Thickness table: every (lift-off, thickness) pair, simulated end to end
/// against a single calibration taken over the thinnest plate at baseline.
pub fn thickness_table(setup: &Setup, sigma: f64) -> Result<(CalibrationReference, Vec<ThicknessRow>)> {
    let reference_plate = Plate { sigma, c: TABLE_THICKNESSES_M[0], mu_r: 1.0 };
    let reference = setup.calibrate(&reference_plate)?;
    let mut rows = Vec::new();
    for &liftoff in &TABLE_LIFTOFFS_M {
        for &c in &TABLE_THICKNESSES_M {
            let plate = Plate { sigma, c, mu_r: 1.0 };
            let extra = liftoff - setup.coil.l_base;
            let (peak, thin) = setup.measure(&reference, &plate, extra, Mode::Thin)?;
            let full = compensate(
                &CompensationInput { omega_meas: peak.omega_peak, s_meas: peak.salience },
                &reference,
                sigma,
                Mode::Full,
            )?;
            rows.push(ThicknessRow {
                liftoff_m: liftoff,
                actual_m: c,
                uncompensated_m: thin.thickness_uncompensated,
                compensated_m: thin.thickness,
                compensated_full_m: full.thickness,
                omega_meas: peak.omega_peak,
                omega_comp_thin: thin.omega_comp,
                omega_comp_full: full.omega_comp,
                liftoff_extra_est_m: thin.liftoff_extra,
                full_iterations: full.iterations,
            });
        }
    }
    Ok((reference, rows))
}

/// Column-labelled numeric table, written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DataTable {
    fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

pub fn thickness_table_csv(rows: &[ThicknessRow]) -> DataTable {
    let mut t = DataTable::new(&[
        "liftoff_m",
        "actual_thickness_m",
        "uncompensated_thickness_m",
        "compensated_thickness_m",
        "compensated_full_thickness_m",
        "omega_meas_rad_s",
        "omega_comp_thin_rad_s",
        "omega_comp_full_rad_s",
        "liftoff_extra_est_m",
    ]);
    for r in rows {
        t.rows.push(vec![
            r.liftoff_m,
            r.actual_m,
            r.uncompensated_m,
            r.compensated_m,
            r.compensated_full_m,
            r.omega_meas,
            r.omega_comp_thin,
            r.omega_comp_full,
            r.liftoff_extra_est_m,
        ]);
    }
    t
}

/// Which figure data set to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Envelope against its `sin²` surrogate.
    Envelope,
    /// Spectra at several lift-offs.
    Spectra,
    /// Log amplitude ratio against lift-off, with the fitted model.
    AmplitudeRatio,
    /// Uncompensated and compensated peak frequency against lift-off.
    PeakFrequency,
}

impl Figure {
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "3" => Ok(Figure::Envelope),
            "4" => Ok(Figure::Spectra),
            "5" => Ok(Figure::AmplitudeRatio),
            "6" => Ok(Figure::PeakFrequency),
            other => Err(Error::config("which", format!("unknown figure `{other}` (3|4|5|6)"))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Figure::Envelope => "3",
            Figure::Spectra => "4",
            Figure::AmplitudeRatio => "5",
            Figure::PeakFrequency => "6",
        }
    }
}

/// Absolute lift-offs for the spectra figure.
pub const SPECTRA_LIFTOFFS_M: [f64; 4] = [0.5e-3, 2.0e-3, 3.5e-3, 5.0e-3];

/// Extra lift-offs for the amplitude-ratio and peak-frequency figures.
pub fn sweep_extra_liftoffs() -> Vec<f64> {
    (0..=18).map(|i| i as f64 * 0.25e-3).collect()
}

/// Normalised envelope and `sin²(απ/2α0)` over `(0, 2α0)`.
pub fn envelope_figure(setup: &Setup, points: usize) -> Result<(f64, DataTable)> {
    let alpha0 = characteristic_alpha0(&setup.coil, 0.0, setup.form)?;
    let peak = envelope(alpha0, &setup.coil, 0.0, setup.form);
    let mut t = DataTable::new(&["alpha_per_m", "envelope_normalized", "sin2_surrogate"]);
    for i in 1..points {
        let alpha = 2.0 * alpha0 * i as f64 / points as f64;
        let s = (alpha * PI / (2.0 * alpha0)).sin();
        t.rows.push(vec![alpha, envelope(alpha, &setup.coil, 0.0, setup.form) / peak, s * s]);
    }
    Ok((alpha0, t))
}

pub fn spectra_figure(setup: &Setup, plate: &Plate) -> Result<DataTable> {
    let mut t = DataTable::new(&["liftoff_m", "frequency_hz", "re_dl_h", "im_dl_h", "salience_h"]);
    for &liftoff in &SPECTRA_LIFTOFFS_M {
        let spectrum = setup.spectrum(plate, liftoff - setup.coil.l_base)?;
        for s in spectrum.samples() {
            t.rows.push(vec![liftoff, s.frequency_hz(), s.delta_l.re, s.delta_l.im, s.salience()]);
        }
    }
    Ok(t)
}

/// Log amplitude ratios and peak frequencies over a set of extra lift-offs.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftoffSweep {
    pub reference: CalibrationReference,
    pub extra_liftoffs: Vec<f64>,
    pub results: Vec<(PeakEstimate, CompensationResult, CompensationResult)>,
}

/// Run the compensation chain (thin and full) at every extra lift-off.
pub fn liftoff_sweep(setup: &Setup, plate: &Plate, extra_liftoffs: &[f64]) -> Result<LiftoffSweep> {
    let reference = setup.calibrate(plate)?;
    let mut results = Vec::with_capacity(extra_liftoffs.len());
    for &extra in extra_liftoffs {
        let (peak, thin) = setup.measure(&reference, plate, extra, Mode::Thin)?;
        let input = CompensationInput { omega_meas: peak.omega_peak, s_meas: peak.salience };
        let full = compensate(&input, &reference, plate.sigma, Mode::Full)?;
        results.push((peak, thin, full));
    }
    Ok(LiftoffSweep { reference, extra_liftoffs: extra_liftoffs.to_vec(), results })
}

/// `−2αδ + 4α²δ²/π²`.
pub fn amplitude_model(alpha0: f64, delta: f64) -> f64 {
    let x = alpha0 * delta;
    -2.0 * x + 4.0 * x * x / (PI * PI)
}

/// Least-squares fit of [`amplitude_model`] in `α0`. Returns the fitted `α0`
/// and the relative RMS residual `‖r − model‖ / ‖r‖`.
pub fn fit_amplitude_model(deltas: &[f64], ln_ratios: &[f64]) -> (f64, f64) {
    let ssr = |alpha: f64| -> f64 {
        deltas.iter().zip(ln_ratios).map(|(&d, &r)| (r - amplitude_model(alpha, d)).powi(2)).sum()
    };
    // The model is monotone in α only while αδ < π²/4; scan then refine.
    let d_max = deltas.iter().cloned().fold(0.0, f64::max);
    let hi = if d_max > 0.0 { PI * PI / (4.0 * d_max) } else { 1e4 };
    let scan: Vec<f64> = (1..=400).map(|i| hi * i as f64 / 400.0).collect();
    let best = scan.iter().enumerate().min_by(|a, b| ssr(*a.1).total_cmp(&ssr(*b.1))).map(|(i, _)| i).unwrap_or(0);
    let lo_b = if best == 0 { 0.0 } else { scan[best - 1] };
    let hi_b = scan[(best + 1).min(scan.len() - 1)];
    let alpha = crate::forward::golden_section_min(ssr, lo_b, hi_b, 1e-12);
    let norm: f64 = ln_ratios.iter().map(|r| r * r).sum();
    let rel = if norm > 0.0 { (ssr(alpha) / norm).sqrt() } else { 0.0 };
    (alpha, rel)
}

pub fn amplitude_ratio_figure(sweep: &LiftoffSweep, l_base: f64) -> (f64, f64, DataTable) {
    let deltas = &sweep.extra_liftoffs;
    let ratios: Vec<f64> = sweep.results.iter().map(|(_, thin, _)| thin.ln_ratio).collect();
    let (alpha_fit, rel_rms) = fit_amplitude_model(deltas, &ratios);
    let mut t = DataTable::new(&[
        "liftoff_m",
        "liftoff_extra_m",
        "ln_ratio",
        "model_ln_ratio_fitted",
        "model_ln_ratio_alpha0_ref",
    ]);
    for (&d, &r) in deltas.iter().zip(&ratios) {
        t.rows.push(vec![
            d + l_base,
            d,
            r,
            amplitude_model(alpha_fit, d),
            amplitude_model(sweep.reference.alpha0_ref, d),
        ]);
    }
    (alpha_fit, rel_rms, t)
}

pub fn peak_frequency_figure(sweep: &LiftoffSweep, l_base: f64) -> DataTable {
    let mut t = DataTable::new(&[
        "liftoff_m",
        "liftoff_extra_m",
        "omega_uncompensated_rad_s",
        "omega_compensated_thin_rad_s",
        "omega_compensated_full_rad_s",
        "liftoff_extra_est_m",
        "thickness_uncompensated_m",
        "thickness_compensated_m",
    ]);
    for (&d, (peak, thin, full)) in sweep.extra_liftoffs.iter().zip(&sweep.results) {
        t.rows.push(vec![
            d + l_base,
            d,
            peak.omega_peak,
            thin.omega_comp,
            full.omega_comp,
            thin.liftoff_extra,
            thin.thickness_uncompensated,
            thin.thickness,
        ]);
    }
    t
}

/// `(max − min)/mean`.
pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (max - min) / mean
}

/// Data for one figure, as named CSV tables.
pub fn figure_data(setup: &Setup, figure: Figure, plate: &Plate) -> Result<Vec<(String, DataTable)>> {
    let l_base = setup.coil.l_base;
    Ok(match figure {
        Figure::Envelope => vec![("fig3_envelope.csv".into(), envelope_figure(setup, 400)?.1)],
        Figure::Spectra => vec![("fig4_spectra.csv".into(), spectra_figure(setup, plate)?)],
        Figure::AmplitudeRatio => {
            let sweep = liftoff_sweep(setup, plate, &sweep_extra_liftoffs())?;
            vec![("fig5_ln_ratio.csv".into(), amplitude_ratio_figure(&sweep, l_base).2)]
        }
        Figure::PeakFrequency => {
            let sweep = liftoff_sweep(setup, plate, &sweep_extra_liftoffs())?;
            vec![("fig6_peak_frequency.csv".into(), peak_frequency_figure(&sweep, l_base))]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_ids() {
        for id in ["3", "4", "5", "6"] {
            assert_eq!(Figure::from_id(id).unwrap().id(), id);
        }
        assert!(matches!(Figure::from_id("7"), Err(Error::Config { .. })));
    }

    #[test]
    fn fit_recovers_exact_model() {
        let deltas: Vec<f64> = (1..=12).map(|i| i as f64 * 0.25e-3).collect();
        let ratios: Vec<f64> = deltas.iter().map(|&d| amplitude_model(131.0, d)).collect();
        let (alpha, rel) = fit_amplitude_model(&deltas, &ratios);
        assert!((alpha - 131.0).abs() < 1e-6);
        assert!(rel < 1e-9);
    }

    #[test]
    fn spread() {
        assert!((relative_spread(&[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
        assert_eq!(relative_spread(&[4.0, 4.0]), 0.0);
    }

    #[test]
    fn data_table_csv() {
        let mut t = DataTable::new(&["a", "b"]);
        t.rows.push(vec![1.0, 0.1]);
        assert_eq!(t.to_csv(), "a,b\n1.0000000000000000e0,1.0000000000000001e-1\n");
        assert_eq!(t.column("b"), Some(vec![0.1]));
        assert_eq!(t.column("c"), None);
    }

    #[test]
    fn envelope_surrogate_shares_peak() {
        let (alpha0, t) = envelope_figure(&Setup::default(), 400).unwrap();
        let env = t.column("envelope_normalized").unwrap();
        let alphas = t.column("alpha_per_m").unwrap();
        let i = env.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!((alphas[i] / alpha0 - 1.0).abs() < 0.01);
    }
}
