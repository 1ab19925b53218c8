//! The Mirzakhani-Petri intensity and an exact sampler for the associated
//! inhomogeneous Poisson point process on a window (0, x_max].
//!
//! The intensity density is `nu(x) = 2 sinh^2(x/2) / x = (cosh x - 1)/x`; it
//! grows like `e^x / (2x)`, so there is no useful global envelope for
//! thinning. Sampling is count-then-place instead: draw the total count from
//! Poisson(total mass), then place each point by inverting the cumulative
//! intensity through a tabulated grid refined to a requested interpolation
//! tolerance, polished by a few Newton steps against the analytic cumulative.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};
use crate::special::cosh_minus_one;

/// Crossover below which the cumulative intensity uses its even power-series
/// head directly (the integrand is a 0/0 form at the origin).
pub const SMALL_X_CROSSOVER: f64 = 1e-4;

/// Intensity density of the limiting length-spectrum process.
pub fn nu_mp(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!(
            "intensity density requires x > 0, got {x}"
        )));
    }
    Ok(nu_mp_raw(x))
}

/// Density without the domain check; `x > 0` is the caller's invariant.
#[inline]
pub(crate) fn nu_mp_raw(x: f64) -> f64 {
    cosh_minus_one(x) / x
}

/// Cumulative intensity `Lambda(x) = ∫_0^x nu`, evaluated through the entire
/// even series `sum_{n>=1} x^{2n} / (2n (2n)!)`.
///
/// All terms are positive, so the evaluation is cancellation-free; for the
/// window sizes this crate works with (x <= ~40) it converges in a few dozen
/// terms to full precision.
pub fn cumulative_intensity(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    let x2 = x * x;
    let mut total = 0.0_f64;
    let mut term = x2 / 2.0; // x^{2n}/(2n)! at n = 1
    let mut n = 1u32;
    loop {
        let contrib = term / (2.0 * n as f64);
        total += contrib;
        if contrib < total * 1e-17 + 1e-300 {
            return total;
        }
        n += 1;
        term *= x2 / ((2 * n - 1) as f64 * (2 * n) as f64);
    }
}

/// Tabulated cumulative intensity on (0, x_max] with a grid refined until
/// linear interpolation of `Lambda` (and of its inverse) is accurate to a
/// requested fraction of the total mass.
#[derive(Debug, Clone)]
pub struct IntensityTable {
    x_max: f64,
    grid: Vec<f64>,
    lambda_values: Vec<f64>,
    total_mass: f64,
}

impl IntensityTable {
    /// Build a table for the window (0, x_max].
    ///
    /// `tol` is the interpolation tolerance relative to the total mass;
    /// construction fails loudly if the refinement would exceed the node
    /// budget, and cross-checks the total mass against an independent
    /// adaptive quadrature of the density (relative agreement 1e-8).
    pub fn build(x_max: f64, tol: f64) -> Result<Self> {
        if !x_max.is_finite() || x_max <= 0.0 {
            return Err(Error::invalid(format!(
                "x_max must be a positive finite real, got {x_max}"
            )));
        }
        if !(tol > 0.0 && tol < 1e-4) {
            return Err(Error::invalid(format!(
                "table tolerance must lie in (0, 1e-4), got {tol}"
            )));
        }
        if x_max > 50.0 {
            return Err(Error::invalid(format!(
                "window x_max = {x_max} implies ~e^x/(2x) ≈ {:.3e} expected points; \
                 windows beyond 50 are not supported",
                (x_max.exp() / (2.0 * x_max))
            )));
        }

        let total_mass = cumulative_intensity(x_max);

        // Independent route: adaptive quadrature of the density, with the
        // series head standing in below the crossover.
        let quad_mass = if x_max <= SMALL_X_CROSSOVER {
            small_x_head(x_max)
        } else {
            let opts = QuadOptions {
                abs_tol: 0.0,
                rel_tol: 1e-11,
                max_evals: 400_000,
            };
            let tail = quad::integrate_panels(
                nu_mp_raw,
                &quad::log_panels(SMALL_X_CROSSOVER, x_max, 24),
                &opts,
            )?;
            small_x_head(SMALL_X_CROSSOVER) + tail.value
        };
        let rel = ((quad_mass - total_mass) / total_mass).abs();
        if rel > 1e-8 {
            return Err(Error::budget(format!(
                "total mass re-integration disagrees with series evaluation: \
                 {quad_mass:.12e} vs {total_mass:.12e} (rel {rel:.3e})"
            )));
        }

        // Adaptive grid refinement: bisect until the linear chord through
        // each interval deviates from Lambda at the midpoint by at most
        // half the interpolation budget (the factor-2 safety covers the
        // worst-case position of the deviation within the interval).
        const NODE_BUDGET: usize = 1 << 18;
        let interp_budget = 0.5 * tol * total_mass;
        let mut grid = vec![0.0_f64];
        let mut lambda_values = vec![0.0_f64];
        let first = SMALL_X_CROSSOVER.min(x_max);
        let mut stack: Vec<(f64, f64, f64, f64)> = Vec::new();
        // seed panels: the series head interval, then doublings up to x_max
        let mut seeds = vec![first];
        let mut s = first;
        while s < x_max {
            s = (s * 2.0).min(x_max);
            seeds.push(s);
        }
        for w in seeds.windows(2).rev() {
            stack.push((w[0], w[1], cumulative_intensity(w[0]), cumulative_intensity(w[1])));
        }
        // the head interval [0, first] is quadratic to leading order; refine
        // it with the same criterion
        stack.push((0.0, first, 0.0, cumulative_intensity(first)));

        let mut nodes = 0usize;
        while let Some((a, b, la, lb)) = stack.pop() {
            nodes += 1;
            if nodes > NODE_BUDGET {
                return Err(Error::budget(format!(
                    "intensity table refinement exceeded {NODE_BUDGET} nodes for \
                     tol = {tol:.1e}; request a coarser tolerance"
                )));
            }
            let mid = 0.5 * (a + b);
            let lm = cumulative_intensity(mid);
            let chord = 0.5 * (la + lb);
            if (lm - chord).abs() <= interp_budget || (b - a) < 1e-12 * x_max {
                // accept [a, b]: emit b (a is already emitted)
                grid.push(b);
                lambda_values.push(lb);
            } else {
                stack.push((mid, b, lm, lb));
                stack.push((a, mid, la, lm));
            }
        }

        Ok(Self {
            x_max,
            grid,
            lambda_values,
            total_mass,
        })
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn lambda_values(&self) -> &[f64] {
        &self.lambda_values
    }

    /// Interpolated cumulative intensity at `x` (monotone piecewise-linear).
    pub fn lambda_at(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.x_max {
            return self.total_mass;
        }
        let i = self.grid.partition_point(|&g| g <= x);
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let (l0, l1) = (self.lambda_values[i - 1], self.lambda_values[i]);
        l0 + (l1 - l0) * (x - x0) / (x1 - x0)
    }

    /// Invert the cumulative intensity: the x with `Lambda(x) = mass`.
    ///
    /// Bracketing and the initial guess come from the table; a handful of
    /// Newton steps against the analytic cumulative polish the result to
    /// near machine precision.
    pub fn inverse_lambda(&self, mass: f64) -> f64 {
        if mass <= 0.0 {
            return 0.0;
        }
        if mass >= self.total_mass {
            return self.x_max;
        }
        let i = self.lambda_values.partition_point(|&l| l < mass);
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let (l0, l1) = (self.lambda_values[i - 1], self.lambda_values[i]);
        let mut x = if l1 > l0 {
            x0 + (x1 - x0) * (mass - l0) / (l1 - l0)
        } else {
            0.5 * (x0 + x1)
        };
        // Lambda is strictly increasing with Lambda' = nu; near 0 the density
        // vanishes linearly, so fall back to the quadratic head inverse there.
        if x < SMALL_X_CROSSOVER {
            x = 2.0 * mass.sqrt();
        }
        for _ in 0..8 {
            let f = cumulative_intensity(x) - mass;
            if f.abs() <= 1e-14 * self.total_mass {
                break;
            }
            let deriv = nu_mp_raw(x.max(f64::MIN_POSITIVE));
            let mut next = x - f / deriv;
            if !(next > x0 && next < x1) {
                // bisect against the bracket when Newton overshoots
                next = if f > 0.0 { 0.5 * (x0 + x) } else { 0.5 * (x + x1) };
            }
            x = next;
        }
        x.clamp(f64::MIN_POSITIVE, self.x_max)
    }
}

fn small_x_head(x: f64) -> f64 {
    // Lambda(x) = x^2/4 + x^4/96 + x^6/4320 + ... (negligible beyond x^4
    // below the crossover)
    let x2 = x * x;
    x2 / 4.0 + x2 * x2 / 96.0
}

/// One sample of the point process: a finite sorted multiset of positive
/// lengths in (0, window_max].
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    window_max: f64,
    points: Vec<f64>,
}

impl Realization {
    /// Wrap a point list, sorting it and validating positivity and the window.
    pub fn new(window_max: f64, mut points: Vec<f64>) -> Result<Self> {
        if !window_max.is_finite() || window_max <= 0.0 {
            return Err(Error::invalid(format!(
                "window_max must be positive and finite, got {window_max}"
            )));
        }
        for &p in &points {
            if !(p > 0.0) || p > window_max {
                return Err(Error::invalid(format!(
                    "realization point {p} outside (0, {window_max}]"
                )));
            }
        }
        points.sort_unstable_by(f64::total_cmp);
        Ok(Self { window_max, points })
    }

    pub fn empty(window_max: f64) -> Self {
        Self {
            window_max,
            points: Vec::new(),
        }
    }

    pub fn window_max(&self) -> f64 {
        self.window_max
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Draw one realization: `N ~ Poisson(total mass)`, then `N` points placed by
/// inverse transform, returned sorted. Empty realizations are valid samples.
pub fn sample_realization<R: Rng + ?Sized>(table: &IntensityTable, rng: &mut R) -> Realization {
    let poisson = Poisson::new(table.total_mass()).expect("total mass is positive and finite");
    let n = poisson.sample(rng) as usize;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        // u in (0, 1] keeps the placed point strictly positive
        let u = 1.0 - rng.random::<f64>();
        points.push(table.inverse_lambda(u * table.total_mass()));
    }
    points.sort_unstable_by(f64::total_cmp);
    Realization {
        window_max: table.x_max(),
        points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream_rng;

    #[test]
    fn density_domain_errors() {
        assert!(nu_mp(0.0).is_err());
        assert!(nu_mp(-1.0).is_err());
        assert!(nu_mp(f64::NAN).is_err());
    }

    #[test]
    fn density_reference_values() {
        // oracle: the identity 2 sinh^2(x/2) = cosh(x) - 1 at full precision
        assert!((nu_mp(1.0).unwrap() - 0.543_080_634_815_243_78).abs() < 1e-15);
        assert!((nu_mp(2.0).unwrap() - 1.381_097_845_541_815_7).abs() < 1e-14);
    }

    #[test]
    fn density_leading_behaviour_at_zero() {
        // nu(x)/x -> 1/2
        for &x in &[1e-2, 1e-4, 1e-6, 1e-8] {
            let r = nu_mp(x).unwrap() / x;
            assert!((r - 0.5).abs() < 1e-4 * 0.5 + x * x, "x={x}: {r}");
        }
        let r = nu_mp(1e-8).unwrap() / 1e-8;
        assert!((r - 0.5).abs() / 0.5 < 1e-12);
    }

    #[test]
    fn tiny_window_total_mass_is_quadratic() {
        let t = IntensityTable::build(1e-3, 1e-8).unwrap();
        // Lambda(1e-3) = 2.5000001041e-7 (series); leading term eps^2/4
        assert!(((t.total_mass() - 2.500_000_104_166_669e-7) / 2.5e-7).abs() < 1e-12);
    }

    #[test]
    fn table_rejects_bad_parameters() {
        assert!(IntensityTable::build(0.0, 1e-8).is_err());
        assert!(IntensityTable::build(-2.0, 1e-8).is_err());
        assert!(IntensityTable::build(5.0, 1e-3).is_err());
        assert!(IntensityTable::build(5.0, 0.0).is_err());
        assert!(IntensityTable::build(60.0, 1e-8).is_err());
    }

    #[test]
    fn lambda_additivity_against_direct_quadrature() {
        let t = IntensityTable::build(6.0, 1e-9).unwrap();
        let opts = QuadOptions::with_abs_tol(1e-12);
        for &(a, b) in &[(0.5, 1.0), (1e-3, 2.0), (3.0, 6.0), (0.1, 5.9)] {
            let direct = quad::integrate(nu_mp_raw, a, b, &opts).unwrap().value;
            let interp = t.lambda_at(b) - t.lambda_at(a);
            assert!(
                (direct - interp).abs() <= 1e-9 * t.total_mass() + 1e-12,
                "[{a},{b}]: direct {direct} vs table {interp}"
            );
        }
    }

    #[test]
    fn total_mass_matches_simpson_oracle_at_ten() {
        // independent fixed-step Simpson at step 1e-5 over [1e-5, 10], plus
        // the quadratic head below the first node
        let t = IntensityTable::build(10.0, 1e-8).unwrap();
        let a = 1e-5;
        let n = 999_999 + 1; // even panel count over [a, 10]
        let h = (10.0 - a) / n as f64;
        let f = nu_mp_raw;
        let mut sum = f(a) + f(10.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(a + i as f64 * h);
        }
        let simpson = sum * h / 3.0 + a * a / 4.0;
        let rel = ((t.total_mass() - simpson) / simpson).abs();
        assert!(rel < 1e-8, "table {} vs simpson {simpson}", t.total_mass());
    }

    #[test]
    fn inverse_round_trip() {
        let t = IntensityTable::build(8.0, 1e-8).unwrap();
        let mut rng = substream_rng(11, 0);
        for _ in 0..100_000 {
            let u: f64 = rng.random();
            let target = u * t.total_mass();
            let x = t.inverse_lambda(target);
            let back = cumulative_intensity(x);
            assert!(
                (back - target).abs() <= 1e-8 * t.total_mass(),
                "u={u}: Lambda({x}) = {back} != {target}"
            );
        }
    }

    #[test]
    fn empty_fraction_matches_poisson_zero_probability() {
        // total mass ~2: fraction of empty realizations -> e^{-2}
        let x_max = {
            // solve Lambda(x) = 2 roughly; Lambda(2.77) ≈ 2.0 — bisect properly
            let mut lo = 0.1;
            let mut hi = 5.0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if cumulative_intensity(mid) < 2.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let t = IntensityTable::build(x_max, 1e-8).unwrap();
        assert!((t.total_mass() - 2.0).abs() < 1e-6);
        let mut rng = substream_rng(7, 3);
        let draws = 40_000;
        let empties = (0..draws)
            .filter(|_| sample_realization(&t, &mut rng).is_empty())
            .count();
        let frac = empties as f64 / draws as f64;
        let expected = (-2.0_f64).exp();
        // binomial noise: sigma = sqrt(p(1-p)/n) ≈ 0.0017
        assert!(
            (frac - expected).abs() < 5.0 * 0.0017,
            "empty fraction {frac} vs {expected}"
        );
    }

    #[test]
    fn count_moments_and_support() {
        let t = IntensityTable::build(6.0, 1e-8).unwrap();
        let mass = t.total_mass();
        let draws = 10_000usize;
        let mut counts = Vec::with_capacity(draws);
        for i in 0..draws {
            let mut rng = substream_rng(20250810, i as u64);
            let r = sample_realization(&t, &mut rng);
            for &p in r.points() {
                assert!(p > 0.0 && p <= 6.0);
            }
            assert!(r.points().windows(2).all(|w| w[0] <= w[1]), "sorted");
            counts.push(r.len() as f64);
        }
        let mean = counts.iter().sum::<f64>() / draws as f64;
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (draws - 1) as f64;
        assert!(
            (mean - mass).abs() <= 4.0 * (mass / draws as f64).sqrt(),
            "mean {mean} vs mass {mass}"
        );
        let ratio = var / mean;
        assert!((0.9..=1.1).contains(&ratio), "variance/mean = {ratio}");
    }

    #[test]
    fn disjoint_interval_counts_are_uncorrelated() {
        let t = IntensityTable::build(6.0, 1e-8).unwrap();
        let draws = 10_000usize;
        let (mut sa, mut sb, mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..draws {
            let mut rng = substream_rng(99, i as u64);
            let r = sample_realization(&t, &mut rng);
            let a = r.points().iter().filter(|&&p| p <= 4.0).count() as f64;
            let b = r.points().iter().filter(|&&p| p > 4.0).count() as f64;
            sa += a;
            sb += b;
            sab += a * b;
            saa += a * a;
            sbb += b * b;
        }
        let n = draws as f64;
        let cov = sab / n - (sa / n) * (sb / n);
        let va = saa / n - (sa / n) * (sa / n);
        let vb = sbb / n - (sb / n) * (sb / n);
        let rho = cov / (va * vb).sqrt();
        assert!(rho.abs() <= 0.05, "correlation {rho}");
    }

    #[test]
    fn realization_constructor_validates() {
        assert!(Realization::new(5.0, vec![1.0, 0.0]).is_err());
        assert!(Realization::new(5.0, vec![1.0, 5.5]).is_err());
        assert!(Realization::new(-1.0, vec![]).is_err());
        let r = Realization::new(5.0, vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(r.points(), &[1.0, 2.0, 3.0]);
    }
}
