//! Gauss–Legendre rules and a deterministic adaptive Gauss–Kronrod integrator.

use num_complex::Complex64;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule from Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 16-point rule used for the coil window integral.
pub fn gauss_legendre_16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

// Kronrod nodes and weights as published, digits beyond f64 kept.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // Largest error first; ties go to the leftmost panel so the split order is total.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        scaled = res_asc * (200.0 * scaled / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    scaled.max(floor)
}

fn kronrod15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv1 = [Complex64::new(0.0, 0.0); 7];
    let mut fv2 = [Complex64::new(0.0, 0.0); 7];

    let fc = f(center);
    let mut gauss = fc * WG[3];
    let mut kronrod = fc * WGK[7];
    let mut res_abs = fc.norm() * WGK[7];

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
        kronrod += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }

    let w = half.abs();
    Panel {
        a,
        b,
        value: kronrod * half,
        error: rescale_error(((kronrod - gauss) * half).norm(), res_abs * w, res_asc * w),
    }
}

/// Outcome of [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveResult {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

/// Adaptive 15-point Gauss–Kronrod integration of a complex integrand.
///
/// Starts from the supplied breakpoints and bisects the panel with the largest
/// error estimate until the summed estimate drops below `rel_tol * |I|`.
/// Panel values are summed in left-to-right order at every step, so the result
/// is a deterministic function of the inputs.
pub fn integrate_adaptive<F>(mut f: F, breakpoints: &[f64], rel_tol: f64, max_panels: usize) -> Result<AdaptiveResult>
where
    F: FnMut(f64) -> Complex64,
{
    if breakpoints.len() < 2 {
        return Err(Error::Numerical("need at least two breakpoints".into()));
    }
    let mut heap: BinaryHeap<Panel> = breakpoints.windows(2).map(|w| kronrod15(&mut f, w[0], w[1])).collect();

    let ordered_sum = |heap: &BinaryHeap<Panel>| {
        let mut panels: Vec<&Panel> = heap.iter().collect();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        let value = panels.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
        let error = panels.iter().fold(0.0, |acc, p| acc + p.error);
        (value, error)
    };

    let (mut value, mut error) = ordered_sum(&heap);
    let mut previous = value;
    loop {
        if error <= rel_tol * value.norm() || error == 0.0 {
            return Ok(AdaptiveResult { value, error, panels: heap.len() });
        }
        if heap.len() >= max_panels {
            return Err(Error::NotConverged { panels: heap.len(), previous: previous.norm(), last: value.norm() });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::NotConverged { panels: heap.len() + 1, previous: previous.norm(), last: value.norm() });
        }
        heap.push(kronrod15(&mut f, worst.a, mid));
        heap.push(kronrod15(&mut f, mid, worst.b));
        previous = value;
        (value, error) = ordered_sum(&heap);
    }
}
