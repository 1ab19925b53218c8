//! Exact (quadrature-based) cumulants of the linear statistic via Campbell's
//! formula, the ladder comparison of the variance against the GOE value, and
//! decay-rate fits for the higher cumulants.
//!
//! The m-th cumulant of `S = sum H(point)` over a Poisson process with
//! intensity `nu` is `kappa_m = ∫ H(x)^m nu(x) dx`. The integrand blows up
//! logarithmically at the origin (each `H` evaluation there also costs
//! ~beta L/x terms), so the integral runs on `[delta, beta L]` and the
//! omitted head `(0, delta)` is covered by an analytic bound built from the
//! measured small-x envelope of `H`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::nu_mp_raw;
use crate::quad::{self, QuadOptions};
use crate::statistic::{self, WindowParams, DEFAULT_TERM_BUDGET};
use crate::testfn::TestFunctionSpec;

/// Default lower cutoff of the cumulant integrals.
pub const DEFAULT_DELTA: f64 = 1e-3;

/// Default quadrature absolute tolerance for cumulant integrals.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Default highest cumulant order.
pub const DEFAULT_MAX_ORDER: u32 = 6;

/// `nu(x) <= NU_LINEAR_BOUND * x` on (0, 1/2]: the ratio `nu(x)/x` increases
/// from 1/2 at the origin to ~0.5104 at x = 1/2.
const NU_LINEAR_BOUND: f64 = 0.55;

/// Safety factor applied to the measured small-x envelope constant.
const ENVELOPE_SAFETY: f64 = 2.0;

/// One Campbell moment integral: value on `[delta, beta L]`, its quadrature
/// error estimate, and the analytic bound for the omitted `(0, delta)` head.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MomentIntegral {
    pub value: f64,
    pub quad_error: f64,
    pub tail_bound: f64,
}

/// `∫_delta^{beta L} H(x)^m nu(x) dx` with adaptive quadrature at absolute
/// tolerance `tol`, plus the `(0, delta)` tail bound.
pub fn campbell_moment_integral(
    params: &WindowParams,
    m: u32,
    delta: f64,
    tol: f64,
) -> Result<MomentIntegral> {
    let c_emp = ENVELOPE_SAFETY * measured_envelope(params, delta);
    campbell_moment_integral_with_envelope(params, m, delta, tol, c_emp)
}

fn measured_envelope(params: &WindowParams, delta: f64) -> f64 {
    let x_min = (0.1 * delta).min(1e-4);
    statistic::small_x_ratio_max(params, x_min, 400)
}

fn campbell_moment_integral_with_envelope(
    params: &WindowParams,
    m: u32,
    delta: f64,
    tol: f64,
    c_emp: f64,
) -> Result<MomentIntegral> {
    if m < 1 {
        return Err(Error::invalid("cumulant order m must be >= 1"));
    }
    if !(delta > 0.0 && delta <= 1e-2) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1e-2], got {delta}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let support = params.support_max();
    if delta >= support {
        return Err(Error::invalid(format!(
            "delta = {delta} does not lie below the support end {support}"
        )));
    }
    // every quadrature node obeys x >= delta, so the per-evaluation term
    // count is bounded a priori
    if support / delta > DEFAULT_TERM_BUDGET as f64 {
        return Err(Error::budget(format!(
            "integrand at x = {delta:e} would need {:.3e} terms per evaluation",
            support / delta
        )));
    }

    // Log panels across the blow-up region, then ~unit-width panels across
    // the oscillatory bulk; adaptive refinement handles the rest.
    let mut panels = quad::log_panels(delta, 0.5_f64.min(0.5 * support), 16);
    if support > 0.5 {
        let n_bulk = ((support - 0.5).ceil() as usize).clamp(2, 256) + 1;
        panels.extend_from_slice(&quad::linear_panels(0.5, support, n_bulk)[1..]);
    }

    let opts = QuadOptions {
        abs_tol: tol,
        rel_tol: 0.0,
        max_evals: 1_000_000,
    };
    let power = m as i32;
    let result = quad::integrate_panels(
        |x| statistic::eval_h_unchecked(params, x).powi(power) * nu_mp_raw(x),
        &panels,
        &opts,
    )?;

    Ok(MomentIntegral {
        value: result.value,
        quad_error: result.error,
        tail_bound: tail_bound(params.l(), m, delta, c_emp),
    })
}

/// Analytic bound for `|∫_0^delta H^m nu dx|` from `|H| <= (C/L) log(L/x)`
/// and `nu(x) <= 0.55 x`:
///
/// `0.55 (C/L)^m ∫_0^delta x log^m(L/x) dx
///    = 0.55 (C/L)^m delta^2 m! sum_{j<=m} (2 log(L/delta))^j / j! / 2^{m+1}`.
fn tail_bound(l: f64, m: u32, delta: f64, c_emp: f64) -> f64 {
    let z = 2.0 * (l / delta).ln();
    let mut series = 0.0_f64;
    let mut term = 1.0_f64; // z^j / j!
    for j in 0..=m {
        series += term;
        term *= z / (j + 1) as f64;
    }
    let mut m_factorial = 1.0_f64;
    for j in 2..=m {
        m_factorial *= j as f64;
    }
    NU_LINEAR_BOUND
        * (c_emp / l).powi(m as i32)
        * delta
        * delta
        * m_factorial
        * series
        / 2.0_f64.powi(m as i32 + 1)
}

/// Campbell cumulants `kappa_1 .. kappa_M` of the statistic at fixed window
/// parameters, with per-order quadrature error estimates and tail bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CumulantReport {
    pub params: WindowParams,
    pub max_order: u32,
    /// `kappa[m-1]` is the m-th cumulant.
    pub kappa: Vec<f64>,
    pub quad_error: Vec<f64>,
    pub tail_bound: Vec<f64>,
    pub delta: f64,
    pub tol: f64,
}

impl CumulantReport {
    /// The m-th cumulant (1-based order).
    pub fn kappa(&self, m: u32) -> f64 {
        self.kappa[(m - 1) as usize]
    }

    /// Combined error budget for the m-th cumulant: quadrature estimate plus
    /// the omitted-head bound.
    pub fn total_error(&self, m: u32) -> f64 {
        self.quad_error[(m - 1) as usize] + self.tail_bound[(m - 1) as usize]
    }

    pub fn mean(&self) -> f64 {
        self.kappa(1)
    }

    pub fn variance(&self) -> f64 {
        self.kappa(2)
    }
}

/// Cumulants with the default lower cutoff.
pub fn cumulants(params: &WindowParams, max_order: u32, tol: f64) -> Result<CumulantReport> {
    cumulants_with_delta(params, max_order, DEFAULT_DELTA, tol)
}

pub fn cumulants_with_delta(
    params: &WindowParams,
    max_order: u32,
    delta: f64,
    tol: f64,
) -> Result<CumulantReport> {
    if max_order < 2 {
        return Err(Error::invalid("cumulant report needs max_order >= 2"));
    }
    let c_emp = ENVELOPE_SAFETY * measured_envelope(params, delta);
    let integrals: Result<Vec<MomentIntegral>> = (1..=max_order)
        .into_par_iter()
        .map(|m| campbell_moment_integral_with_envelope(params, m, delta, tol, c_emp))
        .collect();
    let integrals = integrals?;
    Ok(CumulantReport {
        params: *params,
        max_order,
        kappa: integrals.iter().map(|i| i.value).collect(),
        quad_error: integrals.iter().map(|i| i.quad_error).collect(),
        tail_bound: integrals.iter().map(|i| i.tail_bound).collect(),
        delta,
        tol,
    })
}

/// One row of the variance ladder.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VarianceRow {
    pub l: f64,
    pub kappa2: f64,
    /// `|kappa2 - goe_variance|`.
    pub goe_deviation: f64,
}

/// The quadrature variance `kappa_2(L)` along an L-ladder, against the GOE
/// target of the test function.
pub fn variance_convergence(
    fhat: TestFunctionSpec,
    tau: f64,
    ladder: &[f64],
    tol: f64,
) -> Result<Vec<VarianceRow>> {
    if ladder.is_empty() {
        return Err(Error::invalid("variance ladder must be nonempty"));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::invalid("variance ladder requires tau > 0"));
    }
    let goe = fhat.goe_variance();
    ladder
        .par_iter()
        .map(|&l| {
            let params = WindowParams::new(l, tau, fhat)?;
            let kappa2 = campbell_moment_integral(&params, 2, DEFAULT_DELTA, tol)?.value;
            Ok(VarianceRow {
                l,
                kappa2,
                goe_deviation: (kappa2 - goe).abs(),
            })
        })
        .collect()
}

/// Power-law extrapolation of a geometric ladder: models the last three rows
/// as `v(L) = a + b L^{-p}` and returns the fitted limit `a`, or `None` when
/// the differences do not contract geometrically.
pub fn richardson_extrapolate(rows: &[VarianceRow]) -> Option<f64> {
    if rows.len() < 3 {
        return None;
    }
    let v = &rows[rows.len() - 3..];
    let ratio = v[1].l / v[0].l;
    if !(ratio > 1.0) || ((v[2].l / v[1].l) - ratio).abs() > 1e-9 * ratio {
        return None;
    }
    let d1 = v[1].kappa2 - v[0].kappa2;
    let d2 = v[2].kappa2 - v[1].kappa2;
    if d2 == 0.0 || d1 / d2 <= 1.0 {
        return None;
    }
    let p = (d1 / d2).ln() / ratio.ln();
    Some(v[2].kappa2 + d2 / (ratio.powf(p) - 1.0))
}

/// Least-squares decay fit of `log |kappa_m|` against `log L`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayFit {
    pub m: u32,
    /// Slope of `log |kappa_m|` vs `log L`.
    pub slope: f64,
    /// Slope of `log (|kappa_m| / (log L)^m)` vs `log L`.
    pub slope_log_corrected: f64,
    pub intercept: f64,
    /// RMS residual of the plain fit.
    pub residual: f64,
    /// `(L, kappa_m)` pairs that entered the fit.
    pub used: Vec<(f64, f64)>,
    /// Ladder entries dropped because `|kappa_m|` fell below the combined
    /// quadrature-plus-tail error floor.
    pub dropped: Vec<f64>,
}

/// Fit the decay rate of the m-th cumulant along an L-ladder.
pub fn decay_fit(
    fhat: TestFunctionSpec,
    tau: f64,
    ladder: &[f64],
    m: u32,
    tol: f64,
) -> Result<DecayFit> {
    if m < 3 {
        return Err(Error::invalid("decay fits apply to orders m >= 3"));
    }
    if ladder.len() < 4 {
        return Err(Error::invalid(format!(
            "decay fit needs a ladder of at least 4 window widths, got {}",
            ladder.len()
        )));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::invalid("decay fit requires tau > 0"));
    }
    let integrals: Result<Vec<(f64, MomentIntegral)>> = ladder
        .par_iter()
        .map(|&l| {
            let params = WindowParams::new(l, tau, fhat)?;
            Ok((l, campbell_moment_integral(&params, m, DEFAULT_DELTA, tol)?))
        })
        .collect();

    let mut used = Vec::new();
    let mut dropped = Vec::new();
    for (l, integral) in integrals? {
        let floor = integral.quad_error + integral.tail_bound;
        if integral.value.abs() <= floor {
            dropped.push(l);
        } else {
            used.push((l, integral.value));
        }
    }
    if used.len() < 2 {
        return Err(Error::budget(format!(
            "cumulant order {m} is below the error floor on {} of {} ladder points; \
             no decay fit possible",
            dropped.len(),
            ladder.len()
        )));
    }

    let (slope, intercept, residual) = fit_line(
        &used
            .iter()
            .map(|&(l, k)| (l.ln(), k.abs().ln()))
            .collect::<Vec<_>>(),
    );
    let (slope_lc, _, _) = fit_line(
        &used
            .iter()
            .map(|&(l, k)| (l.ln(), k.abs().ln() - m as f64 * l.ln().ln()))
            .collect::<Vec<_>>(),
    );

    Ok(DecayFit {
        m,
        slope,
        slope_log_corrected: slope_lc,
        intercept,
        residual,
        used,
        dropped,
    })
}

/// Ordinary least squares for `y = intercept + slope x`; returns
/// `(slope, intercept, rms_residual)`. A constant `y` yields slope 0.
fn fit_line(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = mean_y - slope * mean_x;
    let ss: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    (slope, intercept, (ss / n).sqrt())
}
