//! Adaptive Gauss-Kronrod quadrature.
//!
//! A 7-15 point Gauss-Kronrod pair on each segment with worst-first interval
//! bisection. The integrands in this crate oscillate at scale ~1/tau and have
//! a logarithmic blow-up towards x = 0, so callers seed the driver with
//! log-spaced panels near the lower endpoint and let refinement do the rest.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::kahan::KahanSum;

// 15-point Kronrod abscissae (positive half, descending), embedding the
// 7-point Gauss rule at the odd indices.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Tuning knobs for the adaptive driver.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Absolute error target.
    pub abs_tol: f64,
    /// Relative error target (against the current value estimate).
    pub rel_tol: f64,
    /// Hard cap on integrand evaluations; exceeding it is an explicit error.
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_evals: 1_000_000,
        }
    }
}

impl QuadOptions {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error of `value`.
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// GSL-style error rescaling: sharpen the raw |K15 - G7| difference using the
/// deviation of the integrand from its mean, and floor at roundoff level.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];

    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();

    // Gauss points (odd Kronrod indices)
    for (j, &w) in WG.iter().enumerate().take(3) {
        let idx = 2 * j + 1;
        let abscissa = half * XGK[idx];
        let f1 = f(center - abscissa);
        let f2 = f(center + abscissa);
        fv1[idx] = f1;
        fv2[idx] = f2;
        res_gauss += w * (f1 + f2);
        res_kronrod += WGK[idx] * (f1 + f2);
        res_abs += WGK[idx] * (f1.abs() + f2.abs());
    }
    res_gauss += WG[3] * f_center;

    // Kronrod-only points (even indices)
    for j in 0..4.min(7) {
        let idx = 2 * j;
        if idx >= 7 {
            break;
        }
        let abscissa = half * XGK[idx];
        let f1 = f(center - abscissa);
        let f2 = f(center + abscissa);
        fv1[idx] = f1;
        fv2[idx] = f2;
        res_kronrod += WGK[idx] * (f1 + f2);
        res_abs += WGK[idx] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let raw_err = (res_kronrod - res_gauss) * half;
    Segment {
        a,
        b,
        value: res_kronrod * half,
        error: rescale_error(raw_err, res_abs * half.abs(), res_asc * half.abs()),
    }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    integrate_panels(f, &[a, b], opts)
}

/// Integrate `f` over consecutive panels `[p0, p1], [p1, p2], ...`, refining
/// adaptively across all of them under a shared evaluation budget.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    panels: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if panels.len() < 2 {
        return Err(Error::invalid("quadrature needs at least one panel"));
    }
    for w in panels.windows(2) {
        if !(w[0] < w[1]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::invalid(format!(
                "quadrature panels must be finite and strictly increasing, got [{}, {}]",
                w[0], w[1]
            )));
        }
    }

    let mut heap: BinaryHeap<Segment> = BinaryHeap::new();
    let mut evals = 0usize;
    for w in panels.windows(2) {
        heap.push(kronrod15(&f, w[0], w[1]));
        evals += 15;
    }

    let span = panels[panels.len() - 1] - panels[0];
    let min_width = span * f64::EPSILON * 8.0;

    loop {
        let mut total = KahanSum::new();
        let mut err = 0.0;
        for seg in heap.iter() {
            total.add(seg.value);
            err += seg.error;
        }
        let value = total.value();
        if !value.is_finite() {
            return Err(Error::domain(
                "integrand produced a non-finite value during quadrature",
            ));
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if err <= target {
            return Ok(QuadResult {
                value,
                error: err,
                evaluations: evals,
            });
        }
        if evals + 30 > opts.max_evals {
            return Err(Error::budget(format!(
                "quadrature used {evals} evaluations without reaching tolerance \
                 (error estimate {err:.3e}, target {target:.3e})"
            )));
        }
        let worst = heap.pop().expect("heap nonempty");
        if worst.b - worst.a < min_width {
            return Err(Error::budget(format!(
                "quadrature interval [{:.6e}, {:.6e}] at roundoff width but error \
                 estimate {:.3e} still above target {:.3e}",
                worst.a, worst.b, err, target
            )));
        }
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(kronrod15(&f, worst.a, mid));
        heap.push(kronrod15(&f, mid, worst.b));
        evals += 30;
    }
}

/// Log-spaced breakpoints from `a` to `b` (inclusive), for seeding panels
/// near an integrable singularity at the origin.
pub fn log_panels(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 2);
    let la = a.ln();
    let lb = b.ln();
    let mut out: Vec<f64> = (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect();
    out[0] = a;
    out[n - 1] = b;
    out
}

/// Linearly spaced breakpoints from `a` to `b` (inclusive).
pub fn linear_panels(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(b > a && n >= 2);
    let mut out: Vec<f64> = (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect();
    out[0] = a;
    out[n - 1] = b;
    out
}
