//! Simulated spectra through peak extraction and compensation.

use std::f64::consts::PI;

use liftoff_core::compensation::{compensate_full, compensate_thin, invert_thickness, Mode};
use liftoff_core::forward::{characteristic_alpha0, CoilPair, GeometryForm, Plate, QuadratureSettings};
use liftoff_core::scenarios::{liftoff_sweep, relative_spread, thickness_table, Setup};
use liftoff_core::spectrum::{find_peak, simulate_spectrum, FrequencyGrid};

fn plate22() -> Plate {
    Plate::aluminium(22e-6)
}

#[test]
fn spectra_ordered_by_liftoff_at_every_frequency() {
    let setup = Setup::default();
    let spectra: Vec<Vec<f64>> =
        [0.0, 1.5e-3, 3.0e-3, 4.5e-3].iter().map(|&d| setup.spectrum(&plate22(), d).unwrap().saliences()).collect();
    for pair in spectra.windows(2) {
        for (hi, lo) in pair[0].iter().zip(&pair[1]) {
            assert!(hi > lo);
        }
    }
}

#[test]
fn vanishing_conductivity_vanishing_salience() {
    let setup = Setup::default();
    let metal = setup.spectrum(&plate22(), 0.0).unwrap().saliences();
    let peak = metal.iter().cloned().fold(0.0, f64::max);
    let poor = |sigma| setup.spectrum(&Plate { sigma, c: 22e-6, mu_r: 1.0 }, 0.0).unwrap().saliences();
    let (a, b) = (poor(1e-3), poor(1e-6));
    // Linear in σ at every frequency, so it vanishes with σ.
    for (x, y) in a.iter().zip(&b) {
        assert!((y / x - 1e-3).abs() < 1e-9);
    }
    assert!(a.iter().all(|s| *s < 1e-7 * peak));
}

#[test]
fn peak_matches_dense_scan() {
    let setup = Setup::default();
    let peak = setup.peak(&plate22(), 0.0).unwrap();
    // Ten times the sampling density over the bracket around the peak.
    let f = peak.omega_peak / (2.0 * PI);
    let dense = FrequencyGrid { f_min: f / 2.0, f_max: f * 2.0, points_per_decade: 300 };
    let s = simulate_spectrum(&dense, &setup.coil, &plate22(), 0.0, setup.form, &setup.settings).unwrap();
    let best = s.samples().iter().max_by(|a, b| a.salience().total_cmp(&b.salience())).unwrap();
    assert!((peak.omega_peak / best.omega - 1.0).abs() < 0.01);
}

#[test]
fn grid_refinement_keeps_peak() {
    let coarse = Setup::default();
    let fine = Setup { grid: FrequencyGrid { points_per_decade: 60, ..coarse.grid }, ..coarse };
    let a = find_peak(&coarse.spectrum(&plate22(), 0.0).unwrap()).unwrap();
    let b = find_peak(&fine.spectrum(&plate22(), 0.0).unwrap()).unwrap();
    let step = 10f64.powf(1.0 / 30.0);
    let fa = coarse.spectrum(&plate22(), 0.0).unwrap().samples()[a.index].omega;
    let fb = fine.spectrum(&plate22(), 0.0).unwrap().samples()[b.index].omega;
    assert!((fa / fb).ln().abs() < step.ln());
}

#[test]
fn paper_form_is_rejected_at_calibration() {
    // With the summed-exponential geometry factor the envelope has no interior
    // maximum, so there is no characteristic spatial frequency.
    assert!(characteristic_alpha0(&CoilPair::REFERENCE, 0.0, GeometryForm::Paper).is_err());
}

#[test]
fn liftoff_estimate_and_immunity() {
    let setup = Setup::default();
    let extras = [0.0, 1.0e-3, 1.5e-3, 2.0e-3, 3.0e-3, 3.5e-3, 4.5e-3];
    let sweep = liftoff_sweep(&setup, &plate22(), &extras).unwrap();

    let (_, at_15, _) = &sweep.results[2];
    assert!((at_15.liftoff_extra / 1.5e-3 - 1.0).abs() < 0.2, "{}", at_15.liftoff_extra);

    // Flatness over extra lift-offs 1.0–4.5 mm.
    let pick = &sweep.results[1..];
    let unc: Vec<f64> = pick.iter().map(|r| r.0.omega_peak).collect();
    let thin: Vec<f64> = pick.iter().map(|r| r.1.omega_comp).collect();
    let full: Vec<f64> = pick.iter().map(|r| r.2.omega_comp).collect();
    assert!(relative_spread(&thin) <= relative_spread(&unc) / 3.0);
    assert!(relative_spread(&full) <= relative_spread(&unc) / 3.0);

    // Lift-off always inflates the uncompensated estimate.
    for r in pick {
        assert!(r.1.thickness_uncompensated > r.1.thickness);
        assert!(r.1.thickness_uncompensated > plate22().c);
    }
}

#[test]
fn thickness_table_details() {
    let setup = Setup::default();
    let (reference, rows) = thickness_table(&setup, plate22().sigma).unwrap();
    assert!(reference.s_ref > 0.0);
    for r in &rows {
        assert!(r.full_iterations <= 10);
    }
    // 1.5 mm absolute over the 22 μm plate; 3.5 mm over the 44 μm plate.
    assert!((rows[0].compensated_m - 22e-6).abs() < 0.44e-6);
    assert!((rows[0].uncompensated_m / 23.1e-6 - 1.0).abs() < 0.03);
    assert!((rows[5].compensated_m - 44e-6).abs() < 1.3e-6);
}

#[test]
fn full_and_thin_agree_for_thin_plates() {
    // At zero lift-off change and α0c ≤ 0.01 both compensations agree.
    let sigma = 38.2e6;
    let mu0 = liftoff_core::MU0;
    for &alpha0 in &[80.0, 120.0, 160.0] {
        let c = 0.01 / alpha0;
        let omega = (2.0 * alpha0 * alpha0 * c + 2.0 * alpha0) / (sigma * mu0 * c);
        let thin = compensate_thin(omega, 0.0).unwrap();
        let seed = invert_thickness(omega, 0.0, sigma, alpha0).unwrap();
        let full = compensate_full(omega, 0.0, sigma, alpha0, seed).unwrap();
        assert!((full.omega_comp / thin - 1.0).abs() < 0.01);
    }
}

#[test]
fn modes_agree_on_simulated_plate() {
    let setup = Setup::default();
    let reference = setup.calibrate(&plate22()).unwrap();
    let (_, thin) = setup.measure(&reference, &plate22(), 1.5e-3, Mode::Thin).unwrap();
    let (_, full) = setup.measure(&reference, &plate22(), 1.5e-3, Mode::Full).unwrap();
    assert!((thin.omega_comp / full.omega_comp - 1.0).abs() < 0.02);
    assert!(full.iterations <= 10);
}

#[test]
fn quadrature_settings_propagate() {
    let strict =
        Setup { settings: QuadratureSettings { rel_tol: 1e-11, ..QuadratureSettings::default() }, ..Setup::default() };
    let a = Setup::default().peak(&plate22(), 0.0).unwrap();
    let b = strict.peak(&plate22(), 0.0).unwrap();
    assert!((a.omega_peak / b.omega_peak - 1.0).abs() < 1e-6);
}
