//! Reproducible Monte Carlo ensembles of the linear statistic, unbiased
//! empirical cumulants, and normality diagnostics of the standardized sample.
//!
//! Determinism contract: the sample vector is a pure function of
//! `(params, realizations, master_seed)`. Each realization draws from its own
//! counter-derived substream and results are merged in index order, so the
//! worker count changes the wall clock and nothing else.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::campbell::CumulantReport;
use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::process::{sample_realization, IntensityTable};
use crate::rng::substream_rng;
use crate::special::normal_cdf;
use crate::statistic::{eval_s, WindowParams};

/// Hard cap on the expected number of points per realization. The expected
/// count grows like `e^{beta L} / (2 beta L)`, so this caps L ≈ 16-17 at
/// beta = 1 and keeps single realizations desk-scale.
pub const POINT_CAP: f64 = 1e6;

/// Interpolation tolerance used for the sampler's intensity table.
const TABLE_TOL: f64 = 1e-9;

/// Ensemble specification.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub params: WindowParams,
    pub realizations: usize,
    pub master_seed: u64,
    pub workers: usize,
}

/// Draw `realizations` independent values of the statistic `S`.
///
/// Realization `i` samples the process on `(0, beta L]` from the substream
/// of `(master_seed, i)`; the returned vector is identical for every worker
/// count.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<Vec<f64>> {
    if !(config.params.tau() > 0.0) {
        return Err(Error::invalid(
            "ensembles require tau > 0 (the Gaussian limit is stated for positive tau)",
        ));
    }
    if config.realizations == 0 {
        return Err(Error::invalid("ensemble needs at least one realization"));
    }
    if config.workers == 0 {
        return Err(Error::invalid("worker count must be at least 1"));
    }
    let support = config.params.support_max();
    let table = IntensityTable::build(support, TABLE_TOL)?;
    if table.total_mass() > POINT_CAP {
        return Err(Error::budget(format!(
            "expected {:.3e} points per realization exceeds the cap {POINT_CAP:e}; \
             reduce L or beta",
            table.total_mass()
        )));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::invalid(format!("could not build worker pool: {e}")))?;

    let params = config.params;
    let seed = config.master_seed;
    pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream_rng(seed, i as u64);
                let realization = sample_realization(&table, &mut rng);
                eval_s(&params, &realization)
            })
            .collect()
    })
}

/// Unbiased k-statistics `(k2, k3, k4)` of a sample.
///
/// `k2 = n m2/(n-1)`, `k3 = n^2 m3 /((n-1)(n-2))`,
/// `k4 = n^2 [(n+1) m4 - 3(n-1) m2^2] / ((n-1)(n-2)(n-3))`
/// with `m_j` the biased central moments.
pub fn k_statistics(samples: &[f64]) -> Result<(f64, f64, f64)> {
    let n = samples.len();
    if n < 5 {
        return Err(Error::invalid(format!(
            "k-statistics need at least 5 samples, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = KahanSum::sum_iter(samples.iter().copied()) / nf;
    let mut s2 = KahanSum::new();
    let mut s3 = KahanSum::new();
    let mut s4 = KahanSum::new();
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        s2.add(d2);
        s3.add(d2 * d);
        s4.add(d2 * d2);
    }
    let m2 = s2.value() / nf;
    let m3 = s3.value() / nf;
    let m4 = s4.value() / nf;
    let k2 = nf / (nf - 1.0) * m2;
    let k3 = nf * nf / ((nf - 1.0) * (nf - 2.0)) * m3;
    let k4 = nf * nf * ((nf + 1.0) * m4 - 3.0 * (nf - 1.0) * m2 * m2)
        / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0));
    Ok((k2, k3, k4))
}

/// Which variance is used to standardize the sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardizationMode {
    /// Divide by the GOE limit variance of the test function (the theorem's
    /// normalization; at finite L a variance mismatch remains visible).
    Goe,
    /// Divide by the Campbell variance `kappa_2(L)` (a finite-L diagnostic
    /// that isolates shape-Gaussianity from variance convergence).
    Campbell,
}

impl std::fmt::Display for StandardizationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StandardizationMode::Goe => write!(f, "goe"),
            StandardizationMode::Campbell => write!(f, "campbell"),
        }
    }
}

/// Normality diagnostics of an ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSummary {
    pub r: usize,
    pub mean: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    /// Exact Kolmogorov-Smirnov distance of the standardized sample against
    /// the standard normal CDF.
    pub ks_distance: f64,
    /// Max over t in [-5, 5] (101-point grid) of the distance between the
    /// empirical characteristic function and `e^{-t^2/2}`.
    pub ecf_max_dev: f64,
    pub standardization: StandardizationMode,
}

/// Standardize a sample as `(S - kappa_1)/sqrt(V)` and test it against the
/// standard normal, with `V` chosen by `mode`.
pub fn normality_report(
    samples: &[f64],
    params: &WindowParams,
    report: &CumulantReport,
    mode: StandardizationMode,
) -> Result<SampleSummary> {
    if samples.is_empty() {
        return Err(Error::invalid("normality report needs a nonempty sample"));
    }
    if report.params != *params {
        return Err(Error::invalid(
            "cumulant report was computed for different window parameters",
        ));
    }
    let center = report.kappa(1);
    let variance = match mode {
        StandardizationMode::Goe => params.fhat().goe_variance(),
        StandardizationMode::Campbell => report.kappa(2),
    };
    if !(variance > 0.0) {
        return Err(Error::invalid(format!(
            "standardization variance must be positive, got {variance}"
        )));
    }
    let scale = variance.sqrt();
    let z: Vec<f64> = samples.iter().map(|&s| (s - center) / scale).collect();

    let (k2, k3, k4) = k_statistics(samples)?;
    let mean = KahanSum::sum_iter(samples.iter().copied()) / samples.len() as f64;

    Ok(SampleSummary {
        r: samples.len(),
        mean,
        k2,
        k3,
        k4,
        ks_distance: ks_distance_standard_normal(&z),
        ecf_max_dev: ecf_deviation_grid(&z)
            .into_iter()
            .map(|(_, d)| d)
            .fold(0.0, f64::max),
        standardization: mode,
    })
}

/// Exact one-sample KS statistic against the standard normal:
/// `max_i max(i/n - Phi(z_(i)), Phi(z_(i)) - (i-1)/n)`.
pub fn ks_distance_standard_normal(z: &[f64]) -> f64 {
    let mut sorted = z.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &zi) in sorted.iter().enumerate() {
        let cdf = normal_cdf(zi);
        d = d.max((i + 1) as f64 / n - cdf).max(cdf - i as f64 / n);
    }
    d
}

/// `(t, |ecf(t) - e^{-t^2/2}|)` on the 101-point grid over [-5, 5].
pub fn ecf_deviation_grid(z: &[f64]) -> Vec<(f64, f64)> {
    let n = z.len() as f64;
    (0..101)
        .map(|j| {
            let t = -5.0 + 0.1 * j as f64;
            let mut re = KahanSum::new();
            let mut im = KahanSum::new();
            for &zi in z {
                let (s, c) = (t * zi).sin_cos();
                re.add(c);
                im.add(s);
            }
            let dre = re.value() / n - (-0.5 * t * t).exp();
            let dim = im.value() / n;
            (t, (dre * dre + dim * dim).sqrt())
        })
        .collect()
}

/// Evaluate `stat` on the full sample and estimate its standard error by
/// splitting the sample into `n_batches` consecutive batches.
pub fn batch_standard_error<F: Fn(&[f64]) -> f64>(
    samples: &[f64],
    n_batches: usize,
    stat: F,
) -> Result<(f64, f64)> {
    if n_batches < 2 || samples.len() < 2 * n_batches {
        return Err(Error::invalid(format!(
            "batch SE needs >= 2 batches and >= 2 samples per batch \
             (got {} samples, {n_batches} batches)",
            samples.len()
        )));
    }
    let batch_len = samples.len() / n_batches;
    let full = stat(&samples[..batch_len * n_batches]);
    let batch_stats: Vec<f64> = (0..n_batches)
        .map(|b| stat(&samples[b * batch_len..(b + 1) * batch_len]))
        .collect();
    let bf = n_batches as f64;
    let mean = batch_stats.iter().sum::<f64>() / bf;
    let var = batch_stats.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (bf - 1.0);
    Ok((full, (var / bf).sqrt()))
}
