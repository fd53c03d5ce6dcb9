use num_complex::Complex64;
use proptest::prelude::*;

use liftoff_core::compensation::solve_alpha0_l0;
use liftoff_core::io::{
    impedance_to_delta_l, load_config, parse_spectrum_csv, parse_sweep_csv, write_spectrum_csv, write_sweep_csv,
    ImpedanceSweep, SweepPair,
};
use liftoff_core::spectrum::{SpectralSample, Spectrum};

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Strictly increasing frequencies with arbitrary finite impedances.
fn sweep_strategy() -> impl Strategy<Value = Vec<(f64, Complex64)>> {
    prop::collection::vec((1e-3f64..10.0, -1e3f64..1e3, -1e3f64..1e3), 8..64).prop_map(|rows| {
        let mut f = 1.0;
        rows.into_iter()
            .map(|(step, re, im)| {
                f *= 1.0 + step;
                (f, Complex64::new(re, im))
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn sweep_csv_round_trip(samples in sweep_strategy()) {
        let sweep = ImpedanceSweep::new(samples.clone()).unwrap();
        let back = parse_sweep_csv(&write_sweep_csv(&sweep)).unwrap();
        for ((f, z), (g, w)) in samples.iter().zip(back.samples()) {
            prop_assert!(rel(*f, *g) <= 1e-15);
            prop_assert!(rel(z.re, w.re) <= 1e-15 && rel(z.im, w.im) <= 1e-15);
        }
    }

    #[test]
    fn spectrum_csv_round_trip(samples in sweep_strategy(), scale in -12i32..-3) {
        let s = 10f64.powi(scale);
        let spectrum = Spectrum::new(
            samples.iter().map(|(f, z)| SpectralSample { omega: 2.0 * std::f64::consts::PI * f, delta_l: z * s }).collect(),
        ).unwrap();
        let back = parse_spectrum_csv(&write_spectrum_csv(&spectrum, &["note".into()])).unwrap();
        for (a, b) in spectrum.samples().iter().zip(back.samples()) {
            prop_assert!(rel(a.omega, b.omega) <= 1e-15);
            prop_assert!(rel(a.delta_l.re, b.delta_l.re) <= 1e-15);
            prop_assert!(rel(a.delta_l.im, b.delta_l.im) <= 1e-15);
        }
    }

    #[test]
    fn liftoff_product_round_trip(x in 0.0f64..1.0) {
        let r = -2.0 * x + 4.0 * x * x / (std::f64::consts::PI * std::f64::consts::PI);
        prop_assert!((solve_alpha0_l0(r).unwrap() - x).abs() <= 1e-12);
    }

    #[test]
    fn converted_spectrum_both_forms(sample in sweep_strategy(), air_re in -10f64..10.0, air_im in -10f64..10.0) {
        let air: Vec<(f64, Complex64)> = sample.iter().map(|(f, _)| (*f, Complex64::new(air_re, air_im))).collect();
        let pair = SweepPair::new(ImpedanceSweep::new(sample.clone()).unwrap(), ImpedanceSweep::new(air).unwrap()).unwrap();
        let spectrum = impedance_to_delta_l(&pair).unwrap();
        for (s, (_, z)) in spectrum.samples().iter().zip(&sample) {
            let dz = z - Complex64::new(air_re, air_im);
            let divided = dz / Complex64::new(0.0, s.omega);
            prop_assert!((s.delta_l - divided).norm() <= 1e-15 * divided.norm().max(f64::MIN_POSITIVE));
            prop_assert_eq!(s.delta_l.im, (-dz).re / s.omega);
        }
    }
}

#[test]
fn scalar_conversion() {
    // (1 + j) Ω at ω = 1 rad/s.
    let f = 1.0 / (2.0 * std::f64::consts::PI);
    let rows: Vec<(f64, Complex64)> = (0..8).map(|i| (f * (1.0 + i as f64), Complex64::new(0.0, 0.0))).collect();
    let mut sample = rows.clone();
    sample[0].1 = Complex64::new(1.0, 1.0);
    let pair = SweepPair::new(ImpedanceSweep::new(sample).unwrap(), ImpedanceSweep::new(rows).unwrap()).unwrap();
    let s = impedance_to_delta_l(&pair).unwrap();
    let dl = s.samples()[0].delta_l;
    assert!((dl - Complex64::new(1.0, -1.0)).norm() < 1e-15);
}

#[test]
fn reference_config_files() {
    let coil = load_config(
        r#"{"r1_m": 0.0118, "r2_m": 0.012, "h_m": 0.003, "g_m": 0.001, "l_base_m": 0.0005, "n_turns": 20}"#,
    )
    .unwrap()
    .coil
    .unwrap();
    assert_eq!(coil, liftoff_core::forward::CoilPair::REFERENCE);
    let plate = load_config(r#"{"sigma_s_per_m": 38.2e6, "c_m": 22e-6}"#).unwrap().plate.unwrap();
    assert_eq!((plate.sigma, plate.c, plate.mu_r), (38.2e6, 22e-6, 1.0));
}
