//! Compensated floating-point accumulation.
//!
//! The statistic evaluator adds terms spanning many orders of magnitude
//! (the k-sum of `H` mixes values from ~1 down to ~1e-300), so plain
//! accumulation loses the small terms. We use Neumaier's variant of the
//! Kahan algorithm: it also handles the case where the incoming term is
//! larger than the running sum.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Current compensated total.
    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// Sum an iterator of values with compensation.
    pub fn sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        // 1 + 1e-16 repeated: naive summation stays at 1 + n*0, compensated
        // accumulates the small parts.
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        let expected = 1.0 + 10_000.0 * 1e-16;
        assert!((acc.value() - expected).abs() < 1e-18);
    }

    #[test]
    fn handles_terms_larger_than_sum() {
        let mut acc = KahanSum::new();
        acc.add(1e-16);
        acc.add(1.0);
        acc.add(-1.0);
        assert_eq!(acc.value(), 1e-16);
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(KahanSum::sum_iter(std::iter::empty()), 0.0);
    }
}
