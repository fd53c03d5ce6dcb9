//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

use liftoff_core::bessel::{bessel_j, Order};
use liftoff_core::compensation::{compensate_thin, solve_alpha0_l0};
use liftoff_core::forward::{delta_l, Plate, QuadratureSettings, ALUMINIUM_SIGMA};
use liftoff_core::io::{impedance_to_delta_l, parse_sweep_csv, write_sweep_csv, ImpedanceSweep, SweepPair};
use liftoff_core::scenarios::{
    fit_amplitude_model, liftoff_sweep, relative_spread, sweep_extra_liftoffs, thickness_table, Setup, ThicknessRow,
    SPECTRA_LIFTOFFS_M,
};

/// Compensated thicknesses reported for the hardware, in table row order.
const PUBLISHED_COMPENSATED_UM: [f64; 6] = [22.2, 44.3, 22.3, 44.2, 22.2, 44.4];

/// Peak-frequency spreads over the immunity lift-offs, pinned from the first
/// verified run of this implementation.
const PINNED_SPREAD_UNCOMPENSATED: f64 = 0.194_791_113_9;
const PINNED_SPREAD_COMPENSATED: f64 = 0.033_466_944_3;
const PIN_TOLERANCE: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn table_rows() -> (Vec<ThicknessRow>, f64) {
    let start = Instant::now();
    let (_, rows) = thickness_table(&Setup::default(), ALUMINIUM_SIGMA).expect("thickness table");
    (rows, start.elapsed().as_secs_f64())
}

fn thickness_accuracy(rows: &[ThicknessRow], seconds: f64) -> Outcome {
    let mut worst_actual: f64 = 0.0;
    let mut worst_published: f64 = 0.0;
    for (r, published) in rows.iter().zip(PUBLISHED_COMPENSATED_UM) {
        worst_actual = worst_actual.max((r.compensated_m / r.actual_m - 1.0).abs());
        worst_published = worst_published.max((r.compensated_m * 1e6 / published - 1.0).abs());
    }
    let values: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.compensated_m * 1e6)).collect();
    outcome(
        worst_actual <= 0.02 && worst_published <= 0.03 && seconds < 60.0,
        format!(
            "compensated [{}] um; worst vs actual {:.2}%, vs published {:.2}%; {seconds:.1} s",
            values.join(", "),
            worst_actual * 100.0,
            worst_published * 100.0
        ),
    )
}

fn overestimation(rows: &[ThicknessRow]) -> Outcome {
    let ok = rows.iter().all(|r| r.uncompensated_m > r.actual_m && r.uncompensated_m > r.compensated_m);
    let values: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.uncompensated_m * 1e6)).collect();
    outcome(ok, format!("uncompensated [{}] um", values.join(", ")))
}

fn spectra_ordering() -> Outcome {
    let setup = Setup::default();
    let plate = Plate::aluminium(22e-6);
    let peaks: Vec<_> =
        SPECTRA_LIFTOFFS_M.iter().map(|&l| setup.peak(&plate, l - setup.coil.l_base).expect("interior peak")).collect();
    let ok = peaks.windows(2).all(|w| w[1].omega_peak < w[0].omega_peak && w[1].salience < w[0].salience);
    let freqs: Vec<String> = peaks.iter().map(|p| format!("{:.0}", p.omega_peak / (2.0 * PI))).collect();
    outcome(ok, format!("peak Hz [{}]", freqs.join(", ")))
}

fn pick(extras: &[f64], wanted: &[f64]) -> Vec<usize> {
    wanted.iter().map(|w| extras.iter().position(|e| (e - w).abs() < 1e-12).expect("lift-off on sweep grid")).collect()
}

fn immunity_and_model() -> (Outcome, Outcome) {
    let setup = Setup::default();
    let plate = Plate::aluminium(22e-6);
    let extras = sweep_extra_liftoffs();
    let sweep = liftoff_sweep(&setup, &plate, &extras).expect("lift-off sweep");

    let idx = pick(&extras, &[0.5e-3, 1.0e-3, 1.5e-3, 2.5e-3, 3.0e-3, 4.0e-3]);
    let unc: Vec<f64> = idx.iter().map(|&i| sweep.results[i].0.omega_peak).collect();
    let comp: Vec<f64> = idx.iter().map(|&i| sweep.results[i].1.omega_comp).collect();
    let (su, sc) = (relative_spread(&unc), relative_spread(&comp));
    let pinned = (su / PINNED_SPREAD_UNCOMPENSATED - 1.0).abs() < PIN_TOLERANCE
        && (sc / PINNED_SPREAD_COMPENSATED - 1.0).abs() < PIN_TOLERANCE;
    let immunity = outcome(
        sc <= su / 3.0 && pinned,
        format!("spread compensated {sc:.10} vs uncompensated {su:.10} (ratio {:.3}); pinned {pinned}", sc / su),
    );

    let within: Vec<usize> = (0..extras.len()).filter(|&i| extras[i] <= 3.0e-3 + 1e-12).collect();
    let deltas: Vec<f64> = within.iter().map(|&i| extras[i]).collect();
    let ratios: Vec<f64> = within.iter().map(|&i| sweep.results[i].1.ln_ratio).collect();
    let (alpha, rel_rms) = fit_amplitude_model(&deltas, &ratios);
    let model = outcome(
        rel_rms <= 0.15,
        format!("fitted alpha0 {alpha:.2} 1/m, relative RMS residual {:.3}%", rel_rms * 100.0),
    );
    (immunity, model)
}

fn liftoff_product_round_trip() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let x = i as f64 / 999.0;
        let r = -2.0 * x + 4.0 * x * x / (PI * PI);
        worst = worst.max((solve_alpha0_l0(r).expect("in domain") - x).abs());
    }
    let pair = solve_alpha0_l0(-0.195947).expect("in domain");
    outcome(worst <= 1e-12 && (pair - 0.1).abs() < 1e-6, format!("max error {worst:.2e}; -0.195947 -> {pair:.7}"))
}

fn thin_compensation_scalar() -> Outcome {
    let w = compensate_thin(1.0e5, -0.195947).expect("in domain");
    let identity = [1.0, 2.4e5, 7.3e6].iter().all(|&x| compensate_thin(x, 0.0) == Ok(x));
    outcome((w - 1.04224e5).abs() <= 1.0 && identity, format!("{w:.2} rad/s; identity at zero {identity}"))
}

/// `J_n(x) = (1/π) ∫_0^π cos(nτ − x sin τ) dτ`; the trapezoid rule on a
/// periodic integrand converges geometrically.
fn bessel_integral(n: u32, x: f64) -> f64 {
    let m = 400;
    let h = PI / m as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let mut sum = 0.5 * (f(0.0) + f(PI));
    for i in 1..m {
        sum += f(i as f64 * h);
    }
    sum * h / PI
}

fn bessel_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = if n == 0 { 1.0 } else { half };
    let mut sum = term;
    for k in 1..100 {
        term *= -half * half / (k as f64 * (k + n) as f64);
        sum += term;
    }
    sum
}

fn special_functions() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..=5000 {
        let x = 50.0 * i as f64 / 5000.0;
        for (n, order) in [(0, Order::Zero), (1, Order::One)] {
            let v = bessel_j(order, x).expect("finite");
            worst = worst.max((v - bessel_integral(n, x)).abs());
            if x <= 8.0 {
                worst = worst.max((v - bessel_series(n, x)).abs());
            }
        }
    }
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bessel_j(Order::Zero, mid).expect("finite") > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let zero = 0.5 * (lo + hi);
    outcome(
        worst <= 1e-10 && (zero - 2.404825557695773).abs() <= 1e-10,
        format!("max error {worst:.2e} on [0, 50]; first zero {zero:.15}"),
    )
}

fn quadrature_convergence(rows: &[ThicknessRow]) -> Outcome {
    let setup = Setup::default();
    let strict = QuadratureSettings { rel_tol: 1e-12, ..QuadratureSettings::default() };
    let mut worst: f64 = 0.0;
    let mut deterministic = true;
    for r in rows {
        let plate = Plate::aluminium(r.actual_m);
        let extra = r.liftoff_m - setup.coil.l_base;
        for w in [0.5 * r.omega_meas, r.omega_meas, 2.0 * r.omega_meas] {
            let eval =
                |s: &QuadratureSettings| delta_l(w, &setup.coil, &plate, extra, setup.form, s).expect("converges");
            let a = eval(&setup.settings);
            let b = eval(&strict);
            worst = worst.max((a - b).norm() / b.norm());
            let again = eval(&setup.settings);
            deterministic &= a.re.to_bits() == again.re.to_bits() && a.im.to_bits() == again.im.to_bits();
        }
    }
    outcome(worst < 1e-8 && deterministic, format!("max relative change {worst:.2e}; deterministic {deterministic}"))
}

fn sweep_forms_and_round_trip() -> Outcome {
    let rows = prop::collection::vec((1e-3f64..5.0, -1e4f64..1e4, -1e4f64..1e4, -1e2f64..1e2, -1e2f64..1e2), 8..80);
    // Fixed seed: the same sweeps on every run.
    let mut runner = TestRunner::deterministic();
    let mut worst_form: f64 = 0.0;
    let mut worst_trip: f64 = 0.0;
    let mut samples_checked = 0usize;
    for _ in 0..256 {
        let value = rows.new_tree(&mut runner).expect("strategy").current();
        let mut f = 10.0;
        let (mut sample, mut air) = (Vec::new(), Vec::new());
        for (step, zr, zi, ar, ai) in value {
            f *= 1.0 + step;
            sample.push((f, Complex64::new(zr, zi)));
            air.push((f, Complex64::new(ar, ai)));
        }
        let sample_sweep = ImpedanceSweep::new(sample.clone()).expect("valid sweep");
        let back = parse_sweep_csv(&write_sweep_csv(&sample_sweep)).expect("parses");
        for ((f0, z0), (f1, z1)) in sample.iter().zip(back.samples()) {
            for (a, b) in [(*f0, *f1), (z0.re, z1.re), (z0.im, z1.im)] {
                if a != b {
                    worst_trip = worst_trip.max((a - b).abs() / a.abs().max(b.abs()));
                }
            }
        }
        let pair = SweepPair::new(sample_sweep, ImpedanceSweep::new(air.clone()).expect("valid")).expect("aligned");
        let spectrum = impedance_to_delta_l(&pair).expect("converts");
        for ((s, (_, z)), (_, za)) in spectrum.samples().iter().zip(&sample).zip(&air) {
            let dz = z - za;
            let divided = dz / Complex64::new(0.0, s.omega);
            let im_form = -dz.re / s.omega;
            let scale = divided.norm();
            if scale > 0.0 {
                worst_form = worst_form.max((s.delta_l - divided).norm() / scale);
                worst_form = worst_form.max((s.delta_l.im - im_form).abs() / scale);
            }
            samples_checked += 1;
        }
    }
    outcome(
        worst_form <= 1e-15 && worst_trip <= 1e-15,
        format!("{samples_checked} samples; dual-form {worst_form:.2e}, round trip {worst_trip:.2e}"),
    )
}

fn thin_full_consistency(rows: &[ThicknessRow]) -> Outcome {
    let worst = rows.iter().map(|r| (r.omega_comp_full / r.omega_comp_thin - 1.0).abs()).fold(0.0, f64::max);
    outcome(worst <= 0.02, format!("max relative difference {:.3}%", worst * 100.0))
}

fn main() -> ExitCode {
    let (rows, seconds) = table_rows();
    let (immunity, model) = immunity_and_model();
    let results = [
        ("1 thickness table accuracy", thickness_accuracy(&rows, seconds)),
        ("2 uncompensated overestimates", overestimation(&rows)),
        ("3 spectra ordered by lift-off", spectra_ordering()),
        ("4 compensated peak immunity", immunity),
        ("5 log-ratio model fit", model),
        ("6 lift-off product round trip", liftoff_product_round_trip()),
        ("7 thin compensation scalar", thin_compensation_scalar()),
        ("8 Bessel functions", special_functions()),
        ("9 quadrature convergence", quadrature_convergence(&rows)),
        ("10 sweep conversion and round trip", sweep_forms_and_round_trip()),
        ("11 thin and full agree", thin_full_consistency(&rows)),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
