//! Analytical forward model for a coaxial driver/pickup coil pair above a
//! conductive, nonmagnetic plate.
//!
//! The inductance change is a Hankel-type integral over spatial frequency
//! `alpha` (1/m):
//!
//! ```text
//! ΔL(ω) = K ∫₀^∞ P²(α)/α⁶ · A(α) · φ(α, ω) dα
//! ```
//!
//! where `K` and `P` depend on the coil cross-section, `A` on the axial
//! placement of the two coils, and `φ` is the plate reflection coefficient.
//! Everything except `φ` is frequency independent and is called the
//! *envelope* here.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::str::FromStr;

use crate::bessel::j1;
use crate::quadrature::{gauss_legendre_16, integrate_adaptive};
use crate::{Error, Result, MU0};

/// Geometry of two identical coaxial coils stacked above the plate.
///
/// The driver occupies `[l_base, l_base + h]` above the plate surface and
/// the pickup `[l_base + h + g, l_base + 2h + g]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoilPair {
    #[serde(rename = "r1_m")]
    pub r1: f64,
    #[serde(rename = "r2_m")]
    pub r2: f64,
    #[serde(rename = "h_m")]
    pub h: f64,
    #[serde(rename = "g_m")]
    pub g: f64,
    #[serde(rename = "l_base_m")]
    pub l_base: f64,
    pub n_turns: u32,
}

impl CoilPair {
    /// The two-coil probe used throughout: 11.8/12 mm radii, 3 mm high coils,
    /// 1 mm gap, 0.5 mm built-in lift-off, 20 turns each.
    pub const REFERENCE: CoilPair = CoilPair { r1: 0.0118, r2: 0.012, h: 0.003, g: 0.001, l_base: 0.0005, n_turns: 20 };

    pub fn validate(&self) -> Result<()> {
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, "must be finite"))
            }
        };
        finite("r1_m", self.r1)?;
        finite("r2_m", self.r2)?;
        finite("h_m", self.h)?;
        finite("g_m", self.g)?;
        finite("l_base_m", self.l_base)?;
        if self.r1 <= 0.0 {
            return Err(Error::config("r1_m", "must be positive"));
        }
        if self.r1 >= self.r2 {
            return Err(Error::config("r1_m", "must be smaller than r2_m"));
        }
        if self.h <= 0.0 {
            return Err(Error::config("h_m", "must be positive"));
        }
        if self.g < 0.0 {
            return Err(Error::config("g_m", "must be non-negative"));
        }
        if self.l_base < 0.0 {
            return Err(Error::config("l_base_m", "must be non-negative"));
        }
        if self.n_turns < 1 {
            return Err(Error::config("n_turns", "must be at least 1"));
        }
        Ok(())
    }

    /// Prefactor `K = π μ0 N² / (h² (r2 − r1)²)`.
    pub fn k_factor(&self) -> f64 {
        let n = f64::from(self.n_turns);
        let dr = self.r2 - self.r1;
        PI * MU0 * n * n / (self.h * self.h * dr * dr)
    }
}

/// Conductive target plate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plate {
    #[serde(rename = "sigma_s_per_m")]
    pub sigma: f64,
    #[serde(rename = "c_m")]
    pub c: f64,
    #[serde(default = "unit_mu_r")]
    pub mu_r: f64,
}

fn unit_mu_r() -> f64 {
    1.0
}

/// Conductivity of the aluminium test plates, S/m.
pub const ALUMINIUM_SIGMA: f64 = 38.2e6;

impl Plate {
    pub fn aluminium(c: f64) -> Self {
        Plate { sigma: ALUMINIUM_SIGMA, c, mu_r: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::config("sigma_s_per_m", "must be positive and finite"));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::config("c_m", "must be positive and finite"));
        }
        if !(self.mu_r.is_finite() && self.mu_r > 0.0) {
            return Err(Error::config("mu_r", "must be positive and finite"));
        }
        Ok(())
    }
}

/// Which axial factor `A(α)` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryForm {
    /// `e^{−α(2l+h+g)} (e^{−2αh} + 1)`, the commonly printed form.
    Paper,
    /// `e^{−α(2l+h+g)} (1 − e^{−αh})²`, the driver × pickup product.
    #[default]
    Product,
}

impl FromStr for GeometryForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(GeometryForm::Paper),
            "product" => Ok(GeometryForm::Product),
            other => Err(Error::config("form", format!("unknown geometry form `{other}` (paper|product)"))),
        }
    }
}

impl std::fmt::Display for GeometryForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GeometryForm::Paper => "paper",
            GeometryForm::Product => "product",
        })
    }
}

/// Controls for the adaptive spatial-frequency integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    /// Extra margin on the truncation point, as a divisor of the tail budget.
    pub alpha_max_factor: f64,
    pub max_panels: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { rel_tol: 1e-9, alpha_max_factor: 10.0, max_panels: 4096 }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-6) {
            return Err(Error::config("rel_tol", "must lie in (0, 1e-6]"));
        }
        if !(self.alpha_max_factor.is_finite() && self.alpha_max_factor >= 1.0) {
            return Err(Error::config("alpha_max_factor", "must be at least 1"));
        }
        if self.max_panels < 64 {
            return Err(Error::config("max_panels", "must be at least 64"));
        }
        Ok(())
    }
}

/// `∫_{α r1}^{α r2} x J1(x) dx`.
///
/// The interval is split into pieces no wider than 2 in `x`, each integrated
/// with a 16-point Gauss–Legendre rule.
pub fn coil_window_p(alpha: f64, r1: f64, r2: f64) -> f64 {
    let a = alpha * r1;
    let b = alpha * r2;
    let pieces = ((b - a) / 2.0).ceil().max(1.0) as usize;
    let step = (b - a) / pieces as f64;
    let rule = gauss_legendre_16();
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * step;
            rule.integrate(lo, lo + step, |x| x * j1(x))
        })
        .sum()
}

/// Axial factor `A(α)` with the lower coil face at `l_base + extra_liftoff`.
pub fn geometry_factor_a(alpha: f64, coil: &CoilPair, extra_liftoff: f64, form: GeometryForm) -> f64 {
    let lift = coil.l_base + extra_liftoff;
    let common = (-alpha * (2.0 * lift + coil.h + coil.g)).exp();
    match form {
        GeometryForm::Paper => common * ((-2.0 * alpha * coil.h).exp() + 1.0),
        GeometryForm::Product => {
            let s = -(-alpha * coil.h).exp_m1();
            common * s * s
        }
    }
}

fn expm1_complex(z: Complex64) -> Complex64 {
    let half_sin = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * z.im.cos() - 2.0 * half_sin * half_sin, z.re.exp() * z.im.sin())
}

/// Plate reflection coefficient
/// `φ = (α1² − μ²α²)(1 − e^{2α1c}) / ((α1 + μα)² e^{2α1c} − (α1 − μα)²)`
/// with `α1 = sqrt(α² + jωσμ0μ)` on the principal branch.
///
/// Evaluated after dividing through by `e^{2α1c}`, so the only exponential is
/// `e^{−2α1c}` (modulus ≤ 1). For thick plates or high frequency this tends to
/// `−(α1 − μα)/(α1 + μα)` without a separate branch.
pub fn plate_phi(alpha: f64, omega: f64, plate: &Plate) -> Complex64 {
    let mu = plate.mu_r;
    let jw = Complex64::new(0.0, omega * plate.sigma * MU0 * mu);
    let alpha1 = (Complex64::new(alpha * alpha, 0.0) + jw).sqrt();
    let mu_alpha = mu * alpha;
    let sum = alpha1 + mu_alpha;
    // α1² − μ²α², exact when μ = 1.
    let diff_sq = jw + alpha * alpha * (1.0 - mu * mu);
    let diff = diff_sq / sum;
    let em1 = expm1_complex(-2.0 * alpha1 * plate.c);
    let den = 4.0 * mu_alpha * alpha1 - diff * diff * em1;
    if den.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    diff_sq * em1 / den
}

/// Frequency-independent integrand `K P²(α)/α⁶ A(α)`, in H·m.
pub fn envelope(alpha: f64, coil: &CoilPair, extra_liftoff: f64, form: GeometryForm) -> f64 {
    let p = coil_window_p(alpha, coil.r1, coil.r2);
    let a3 = alpha * alpha * alpha;
    let ratio = p / a3;
    coil.k_factor() * ratio * ratio * geometry_factor_a(alpha, coil, extra_liftoff, form)
}

/// Search window for the envelope maximum.
pub fn alpha0_window(coil: &CoilPair) -> (f64, f64) {
    (0.01 / coil.r2, 50.0 / (coil.r2 - coil.r1))
}

/// Spatial frequency at which the envelope peaks.
///
/// Coarse logarithmic scan over [`alpha0_window`], then golden-section
/// refinement on the bracketing cells.
pub fn characteristic_alpha0(coil: &CoilPair, extra_liftoff: f64, form: GeometryForm) -> Result<f64> {
    coil.validate()?;
    let (lo, hi) = alpha0_window(coil);
    const SCAN: usize = 600;
    let ratio = (hi / lo).ln() / (SCAN - 1) as f64;
    let grid: Vec<f64> = (0..SCAN).map(|i| lo * (ratio * i as f64).exp()).collect();
    let values: Vec<f64> = grid.iter().map(|&a| envelope(a, coil, extra_liftoff, form)).collect();
    let best = values.iter().enumerate().fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
    if best == 0 || best == SCAN - 1 {
        return Err(Error::Numerical(format!(
            "envelope maximum at search boundary alpha = {} 1/m ({} form)",
            grid[best], form
        )));
    }
    let f = |a: f64| -envelope(a, coil, extra_liftoff, form);
    Ok(golden_section_min(f, grid[best - 1], grid[best + 1], 1e-10))
}

pub(crate) fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= rel_tol * (a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Upper bound on the envelope used to place the truncation point:
/// `|P| ≤ 0.582 α²(r2² − r1²)/2` and `A ≤ 2 e^{−α(2l+h+g)}`.
fn envelope_bound(alpha: f64, coil: &CoilPair, extra_liftoff: f64) -> f64 {
    const J1_MAX: f64 = 0.581_865_2;
    let c = J1_MAX * (coil.r2 * coil.r2 - coil.r1 * coil.r1) / 2.0;
    let decay = 2.0 * (coil.l_base + extra_liftoff) + coil.h + coil.g;
    coil.k_factor() * c * c / (alpha * alpha) * 2.0 * (-alpha * decay).exp()
}

/// Truncation point of the spatial-frequency integral.
///
/// The analytic tail bound `∫_T^∞ bound ≤ bound(T)/decay` must fall below
/// `rel_tol / alpha_max_factor` of the envelope's mass scale.
pub fn alpha_max(coil: &CoilPair, extra_liftoff: f64, form: GeometryForm, settings: &QuadratureSettings) -> f64 {
    let decay = 2.0 * (coil.l_base + extra_liftoff) + coil.h + coil.g;
    let (lo, _) = alpha0_window(coil);
    // Mass scale: largest α·envelope(α) on a coarse probe grid.
    let scale = (0..64)
        .map(|i| {
            let a = lo * 10f64.powf(i as f64 * 5.0 / 63.0);
            a * envelope(a, coil, extra_liftoff, form)
        })
        .fold(0.0, f64::max);
    let budget = settings.rel_tol / settings.alpha_max_factor * scale;
    let mut t = 1.0 / decay;
    while envelope_bound(t, coil, extra_liftoff) / decay > budget {
        t *= 1.05;
    }
    t
}

fn breakpoints(coil: &CoilPair, upper: f64) -> Vec<f64> {
    // Uniform panels of about a quarter J1 period plus a geometric run toward 0
    // to resolve the low-α structure of φ at low frequency.
    let mean_r = 0.5 * (coil.r1 + coil.r2);
    let spacing = 0.25 * PI / mean_r;
    let n = ((upper / spacing).ceil() as usize).clamp(8, 256);
    let first = upper / n as f64;
    let mut points = vec![0.0];
    for k in (1..=12).rev() {
        points.push(first * 0.5f64.powi(k));
    }
    points.extend((1..=n).map(|i| upper * i as f64 / n as f64));
    points
}

fn check_inputs(coil: &CoilPair, extra_liftoff: f64, settings: &QuadratureSettings) -> Result<()> {
    coil.validate()?;
    settings.validate()?;
    if !(extra_liftoff.is_finite() && extra_liftoff >= 0.0) {
        return Err(Error::config("liftoff-extra", "must be finite and non-negative"));
    }
    Ok(())
}

/// Complex inductance change `ΔL(ω)` in henries.
pub fn delta_l(
    omega: f64,
    coil: &CoilPair,
    plate: &Plate,
    extra_liftoff: f64,
    form: GeometryForm,
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    check_inputs(coil, extra_liftoff, settings)?;
    plate.validate()?;
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!("angular frequency must be positive, got {omega}")));
    }
    let upper = alpha_max(coil, extra_liftoff, form, settings);
    let points = breakpoints(coil, upper);
    let r = integrate_adaptive(
        |a| envelope(a, coil, extra_liftoff, form) * plate_phi(a, omega, plate),
        &points,
        settings.rel_tol,
        settings.max_panels,
    )?;
    Ok(r.value)
}

/// Frequency-independent magnitude `ΔL0 = K ∫ P²/α⁶ A dα` in henries.
pub fn delta_l0(coil: &CoilPair, extra_liftoff: f64, form: GeometryForm, settings: &QuadratureSettings) -> Result<f64> {
    check_inputs(coil, extra_liftoff, settings)?;
    let upper = alpha_max(coil, extra_liftoff, form, settings);
    let points = breakpoints(coil, upper);
    let r = integrate_adaptive(
        |a| Complex64::new(envelope(a, coil, extra_liftoff, form), 0.0),
        &points,
        settings.rel_tol,
        settings.max_panels,
    )?;
    Ok(r.value.re)
}
