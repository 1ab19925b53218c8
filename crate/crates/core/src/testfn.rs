//! Admissible test functions, described through their Fourier transforms.
//!
//! The pipeline never evaluates the test function f itself; every formula
//! downstream consumes only the transform. A spec is the pair of a family and
//! a bandwidth `beta`: the transform is even, bounded by [0, 1] and vanishes
//! identically outside (-beta, beta).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};

/// Shape of the compactly supported Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FhatFamily {
    /// `1 - |x|/beta` inside the support. Continuous, with a closed-form
    /// GOE variance `beta^2/3` — the workhorse for acceptance checks.
    Triangular,
    /// `exp(-1/(1 - (x/beta)^2))` inside the support. Smooth with all
    /// derivatives vanishing at the support edge.
    SmoothBump,
}

impl std::fmt::Display for FhatFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FhatFamily::Triangular => write!(f, "triangular"),
            FhatFamily::SmoothBump => write!(f, "smooth_bump"),
        }
    }
}

impl std::str::FromStr for FhatFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangular" => Ok(FhatFamily::Triangular),
            "smooth_bump" => Ok(FhatFamily::SmoothBump),
            other => Err(Error::invalid(format!(
                "unknown fhat family {other:?}; expected \"triangular\" or \"smooth_bump\""
            ))),
        }
    }
}

/// An even test function given by its Fourier transform family and the
/// half-width `beta` of the transform's support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    family: FhatFamily,
    beta: f64,
}

impl TestFunctionSpec {
    pub fn new(family: FhatFamily, beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::invalid(format!(
                "beta must be a positive finite real, got {beta}"
            )));
        }
        Ok(Self { family, beta })
    }

    pub fn family(&self) -> FhatFamily {
        self.family
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Evaluate the Fourier transform at `x`.
    ///
    /// Even in `x`, exactly zero for |x| >= beta, and bounded by [0, 1].
    pub fn eval_fhat(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain(format!(
                "fhat argument must be finite, got {x}"
            )));
        }
        Ok(self.fhat_raw(x))
    }

    /// Transform evaluation without the domain check, for interior loops that
    /// construct their arguments.
    #[inline]
    pub(crate) fn fhat_raw(&self, x: f64) -> f64 {
        let u = x.abs() / self.beta;
        if u >= 1.0 {
            return 0.0;
        }
        match self.family {
            FhatFamily::Triangular => 1.0 - u,
            FhatFamily::SmoothBump => (-1.0 / (1.0 - u * u)).exp(),
        }
    }

    /// The GOE number-variance functional `2 ∫ |x| fhat(x)^2 dx`.
    ///
    /// Scales as `beta^2` under dilation for every family. The triangular
    /// family has the closed form `beta^2/3`; the smooth bump is integrated
    /// adaptively at relative tolerance 1e-10 on the rescaled unit support,
    /// which keeps the quadrature well conditioned for every `beta`.
    pub fn goe_variance(&self) -> f64 {
        match self.family {
            FhatFamily::Triangular => self.beta * self.beta / 3.0,
            FhatFamily::SmoothBump => {
                // 4 beta^2 ∫_0^1 u exp(-2/(1-u^2)) du
                let opts = QuadOptions {
                    abs_tol: 0.0,
                    rel_tol: 1e-10,
                    max_evals: 200_000,
                };
                let unit = quad::integrate(
                    |u| {
                        let w = 1.0 - u * u;
                        if w <= 0.0 {
                            0.0
                        } else {
                            u * (-2.0 / w).exp()
                        }
                    },
                    0.0,
                    1.0,
                    &opts,
                )
                .expect("smooth bump profile integral converges on the unit interval");
                4.0 * self.beta * self.beta * unit.value
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn tri(beta: f64) -> TestFunctionSpec {
        TestFunctionSpec::new(FhatFamily::Triangular, beta).unwrap()
    }

    fn bump(beta: f64) -> TestFunctionSpec {
        TestFunctionSpec::new(FhatFamily::SmoothBump, beta).unwrap()
    }

    #[test]
    fn rejects_bad_beta() {
        assert!(TestFunctionSpec::new(FhatFamily::Triangular, 0.0).is_err());
        assert!(TestFunctionSpec::new(FhatFamily::Triangular, -1.0).is_err());
        assert!(TestFunctionSpec::new(FhatFamily::Triangular, f64::NAN).is_err());
        assert!(TestFunctionSpec::new(FhatFamily::Triangular, f64::INFINITY).is_err());
    }

    #[test]
    fn rejects_non_finite_argument() {
        let s = tri(1.0);
        assert!(s.eval_fhat(f64::NAN).is_err());
        assert!(s.eval_fhat(f64::INFINITY).is_err());
        assert!(s.eval_fhat(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn pointwise_values() {
        assert_eq!(tri(1.0).eval_fhat(0.0).unwrap(), 1.0);
        assert_eq!(tri(1.0).eval_fhat(1.0).unwrap(), 0.0);
        assert_eq!(tri(2.0).eval_fhat(0.5).unwrap(), 0.75);
        let e_inv = (-1.0_f64).exp();
        assert!((bump(1.0).eval_fhat(0.0).unwrap() - e_inv).abs() < 1e-16);
    }

    #[test]
    fn evenness_support_and_bounds_hold_on_random_probes() {
        // 10^6 probes per family: even, exactly zero outside (-beta, beta),
        // and inside [0, 1].
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xF00D);
        for spec in [tri(0.7), bump(2.3)] {
            let beta = spec.beta();
            for _ in 0..1_000_000 {
                let x = (rng.random::<f64>() - 0.5) * 6.0 * beta;
                let v = spec.eval_fhat(x).unwrap();
                let v_neg = spec.eval_fhat(-x).unwrap();
                assert_eq!(v, v_neg, "evenness violated at x={x}");
                assert!((0.0..=1.0).contains(&v), "bound violated at x={x}: {v}");
                if x.abs() >= beta {
                    assert_eq!(v, 0.0, "support violated at x={x}");
                }
            }
        }
    }

    #[test]
    fn triangular_goe_variance_closed_form() {
        for &beta in &[0.25, 0.5, 1.0, 2.0, 4.0] {
            let got = tri(beta).goe_variance();
            let expected = beta * beta / 3.0;
            assert!(
                ((got - expected) / expected).abs() < 1e-9,
                "beta={beta}: got {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn triangular_goe_variance_matches_simpson_oracle() {
        // independent fixed-step Simpson evaluation of 4 ∫_0^beta x fhat(x)^2 dx
        for &beta in &[0.5, 1.0, 2.0] {
            let spec = tri(beta);
            let n = 100_000usize; // even
            let h = beta / n as f64;
            let f = |x: f64| {
                let v = spec.eval_fhat(x).unwrap();
                4.0 * x * v * v
            };
            let mut sum = f(0.0) + f(beta);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                sum += w * f(i as f64 * h);
            }
            let simpson = sum * h / 3.0;
            let got = spec.goe_variance();
            assert!(
                ((got - simpson) / simpson).abs() < 1e-9,
                "beta={beta}: closed form {got} vs simpson {simpson}"
            );
        }
    }

    #[test]
    fn goe_variance_scales_quadratically() {
        let base_tri = tri(1.0).goe_variance();
        let base_bump = bump(1.0).goe_variance();
        for &beta in &[0.25, 0.5, 2.0, 4.0] {
            let r_tri = tri(beta).goe_variance() / base_tri;
            let r_bump = bump(beta).goe_variance() / base_bump;
            assert!(((r_tri - beta * beta) / (beta * beta)).abs() < 1e-9);
            assert!(((r_bump - beta * beta) / (beta * beta)).abs() < 1e-9);
        }
    }

    #[test]
    fn smooth_bump_goe_variance_reference() {
        // frozen from a 40-digit quadrature of 4 ∫_0^1 u exp(-2/(1-u^2)) du
        let got = bump(1.0).goe_variance();
        assert!(
            (got - 0.075_068_523_640_980_905).abs() < 1e-11,
            "got {got}"
        );
    }

    #[test]
    fn vanishing_beta_limit() {
        // beta -> 0+ drives the variance to 0
        assert!(tri(1e-8).goe_variance() < 1e-16);
    }
}
