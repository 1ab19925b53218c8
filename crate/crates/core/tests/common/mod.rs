//! Shared oracles for the integration suites: deliberately simple routines,
//! independent of the adaptive machinery they check.

/// Composite Simpson rule with `n` panels (`n` must be even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2 && n % 2 == 0, "simpson needs an even panel count");
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Biased central moment of order `p`.
pub fn central_moment(xs: &[f64], p: i32) -> f64 {
    let m = mean(xs);
    xs.iter().map(|&x| (x - m).powi(p)).sum::<f64>() / xs.len() as f64
}
