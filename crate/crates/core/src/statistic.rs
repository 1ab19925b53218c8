//! The windowed linear statistic: the kernel `F`, the k-summed functional
//! `H`, the statistic `S` over a realization, and empirical profiles of the
//! small-x / large-x envelope bounds of `H`.
//!
//! `H(x) = (2x/L) sum_{k=1}^{K(x)} fhat(kx/L) cos(kx tau) / sinh(kx/2)` with
//! `K(x) = floor(beta L / x)` from the transform's support. The sum is exact
//! (no approximation below any threshold); a term budget guards callers that
//! probe pathologically small x, and accumulation is compensated because the
//! terms span many orders of magnitude.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::process::Realization;
use crate::special::sinh_stable;
use crate::testfn::TestFunctionSpec;

/// Default cap on the number of k-terms a single `H` evaluation may sum.
pub const DEFAULT_TERM_BUDGET: u64 = 100_000_000;

/// Parameters of the spectral window: inverse width `L`, center `tau`, and
/// the test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowParams {
    l: f64,
    tau: f64,
    fhat: TestFunctionSpec,
}

impl WindowParams {
    /// `l` must exceed 2 (the envelope bounds assume it); `tau` must be
    /// nonnegative. The Gaussian-limit pipeline additionally requires
    /// `tau > 0`, enforced where ensembles are configured.
    pub fn new(l: f64, tau: f64, fhat: TestFunctionSpec) -> Result<Self> {
        if !l.is_finite() || l <= 2.0 {
            return Err(Error::invalid(format!("L must be finite and > 2, got {l}")));
        }
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::invalid(format!(
                "tau must be finite and >= 0, got {tau}"
            )));
        }
        Ok(Self { l, tau, fhat })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn fhat(&self) -> TestFunctionSpec {
        self.fhat
    }

    /// Upper end of the support of `H`: `beta * L`.
    pub fn support_max(&self) -> f64 {
        self.fhat.beta() * self.l
    }

    fn with_tau(&self, tau: f64) -> Result<Self> {
        WindowParams::new(self.l, tau, self.fhat)
    }
}

/// The single-orbit kernel `F(x) = fhat(x/L) cos(x tau) / sinh(x/2)`.
///
/// Exactly zero for `x >= beta L`.
pub fn eval_kernel(params: &WindowParams, x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("kernel requires x > 0, got {x}")));
    }
    let fh = params.fhat.fhat_raw(x / params.l);
    if fh == 0.0 {
        return Ok(0.0);
    }
    Ok(fh * (x * params.tau).cos() / sinh_stable(0.5 * x))
}

/// `H(x)` with the default term budget.
pub fn eval_h(params: &WindowParams, x: f64) -> Result<f64> {
    eval_h_budgeted(params, x, DEFAULT_TERM_BUDGET)
}

/// `H(x)` with an explicit term budget; exceeding it is a loud error, never
/// a silent truncation.
pub fn eval_h_budgeted(params: &WindowParams, x: f64, budget: u64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("H requires x > 0, got {x}")));
    }
    let support = params.support_max();
    if x > support {
        return Ok(0.0);
    }
    let k_count = (support / x).floor();
    if k_count > budget as f64 {
        return Err(Error::budget(format!(
            "H at x = {x:e} needs {k_count:.0} terms, budget is {budget}"
        )));
    }
    Ok(eval_h_unchecked(params, x))
}

/// Core k-sum; callers must have validated `0 < x <= support` and the term
/// budget.
#[inline]
pub(crate) fn eval_h_unchecked(params: &WindowParams, x: f64) -> f64 {
    let support = params.support_max();
    if x > support {
        return 0.0;
    }
    let k_count = (support / x).floor() as u64;
    let inv_l = 1.0 / params.l;
    let tau = params.tau;
    let mut acc = KahanSum::new();
    for k in 1..=k_count {
        let kx = k as f64 * x;
        let fh = params.fhat.fhat_raw(kx * inv_l);
        if fh == 0.0 {
            continue;
        }
        acc.add(fh * (kx * tau).cos() / sinh_stable(0.5 * kx));
    }
    2.0 * x * inv_l * acc.value()
}

/// The linear statistic `S = sum_{points} H(point)` over a realization.
///
/// The realization's window must cover the full support of `H`, otherwise
/// mass would be silently truncated — that is an error, not a warning.
pub fn eval_s(params: &WindowParams, realization: &Realization) -> Result<f64> {
    let support = params.support_max();
    if realization.window_max() < support {
        return Err(Error::invalid(format!(
            "realization window {} does not cover the statistic support {}",
            realization.window_max(),
            support
        )));
    }
    let mut acc = KahanSum::new();
    for &p in realization.points() {
        acc.add(eval_h(params, p)?);
    }
    Ok(acc.value())
}

/// Which envelope regime a profile row measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRegime {
    /// `0 < x < 1/2`, envelope `log(L/x) / L`.
    SmallX,
    /// `x >= 1/2`, envelope `x exp(-x/2) / L`.
    LargeX,
}

impl std::fmt::Display for BoundRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundRegime::SmallX => write!(f, "small_x"),
            BoundRegime::LargeX => write!(f, "large_x"),
        }
    }
}

/// Maximum of the normalized ratio `L |H| / envelope` over one x-grid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundProfileRow {
    pub l: f64,
    pub tau: f64,
    pub regime: BoundRegime,
    pub max_ratio: f64,
}

/// Grid used when profiling the envelope ratios.
#[derive(Debug, Clone, Copy)]
pub struct BoundGrid {
    /// Lower end of the log-spaced small-x grid (must lie in (0, 1/2)).
    pub x_min: f64,
    pub n_small: usize,
    pub n_large: usize,
}

impl Default for BoundGrid {
    fn default() -> Self {
        Self {
            x_min: 1e-4,
            n_small: 1000,
            n_large: 1000,
        }
    }
}

/// Default tau grid for envelope profiling; the envelope claim is uniform in
/// tau, so a fixed reproducible grid is probed.
pub const DEFAULT_TAU_GRID: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];

/// Profile the two envelope ratios for every `(params, tau)` combination:
/// `r1 = max L|H|/log(L/x)` over the small-x grid and
/// `r2 = max L|H|/(x e^{-x/2})` over `[1/2, beta L]`.
pub fn bound_profile(
    ladder: &[WindowParams],
    grid: &BoundGrid,
    tau_grid: &[f64],
) -> Result<Vec<BoundProfileRow>> {
    if ladder.is_empty() {
        return Err(Error::invalid("bound profile needs at least one window"));
    }
    if tau_grid.is_empty() || tau_grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::invalid("tau grid must be nonempty with tau > 0"));
    }
    if !(grid.x_min > 0.0 && grid.x_min < 0.5) || grid.n_small < 2 || grid.n_large < 2 {
        return Err(Error::invalid(
            "bound grid needs x_min in (0, 1/2) and at least 2 points per regime",
        ));
    }

    let combos: Vec<(WindowParams, f64)> = ladder
        .iter()
        .flat_map(|p| tau_grid.iter().map(move |&t| (*p, t)))
        .collect();

    let rows: Result<Vec<Vec<BoundProfileRow>>> = combos
        .par_iter()
        .map(|(base, tau)| {
            let p = base.with_tau(*tau)?;
            let r1 = small_x_ratio_max(&p, grid.x_min, grid.n_small);
            let r2 = large_x_ratio_max(&p, grid.n_large);
            Ok(vec![
                BoundProfileRow {
                    l: p.l(),
                    tau: *tau,
                    regime: BoundRegime::SmallX,
                    max_ratio: r1,
                },
                BoundProfileRow {
                    l: p.l(),
                    tau: *tau,
                    regime: BoundRegime::LargeX,
                    max_ratio: r2,
                },
            ])
        })
        .collect();

    Ok(rows?.into_iter().flatten().collect())
}

/// `max L|H(x)| / log(L/x)` over a log-spaced grid in `[x_min, 1/2)`.
/// Also used to calibrate the measured constant in the cumulant tail bound.
pub(crate) fn small_x_ratio_max(params: &WindowParams, x_min: f64, n: usize) -> f64 {
    let l = params.l();
    let lo = x_min.ln();
    let hi = 0.5_f64.ln();
    let mut best = 0.0_f64;
    for i in 0..n {
        let x = (lo + (hi - lo) * i as f64 / n as f64).exp();
        let h = eval_h_unchecked(params, x);
        let ratio = l * h.abs() / (l / x).ln();
        best = best.max(ratio);
    }
    best
}

fn large_x_ratio_max(params: &WindowParams, n: usize) -> f64 {
    let l = params.l();
    let support = params.support_max();
    let mut best = 0.0_f64;
    for i in 0..n {
        let x = 0.5 + (support - 0.5) * i as f64 / (n - 1) as f64;
        let h = eval_h_unchecked(params, x);
        let envelope = x * (-0.5 * x).exp();
        best = best.max(l * h.abs() / envelope);
    }
    best
}
