//! Counting statistics.

use statrs::distribution::{Beta, ContinuousCDF};

/// Two-sided Clopper–Pearson interval for `errors` out of `trials`.
pub fn clopper_pearson(errors: u64, trials: u64, level: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let alpha = 1.0 - level;
    let (x, n) = (errors as f64, trials as f64);
    let lo = if errors == 0 { 0.0 } else { Beta::new(x, n - x + 1.0).expect("shape").inverse_cdf(alpha / 2.0) };
    let hi = if errors == trials { 1.0 } else { Beta::new(x + 1.0, n - x).expect("shape").inverse_cdf(1.0 - alpha / 2.0) };
    (lo, hi)
}

/// Order-independent sums over trials.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tally {
    pub trials: u64,
    pub errors: u64,
    pub iterations: u64,
    pub ge_iterations: u64,
    pub queries: u64,
    pub certified: u64,
}

impl Tally {
    pub fn fer(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.errors as f64 / self.trials as f64
        }
    }

    pub fn mean(&self, sum: u64) -> f64 {
        sum as f64 / self.trials.max(1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clopper_pearson_edges() {
        assert_eq!(clopper_pearson(0, 10, 0.95).0, 0.0);
        assert_eq!(clopper_pearson(10, 10, 0.95).1, 1.0);
        // Zero events: upper limit 1 - (alpha/2)^(1/n).
        let (_, hi) = clopper_pearson(0, 100, 0.95);
        assert!((hi - (1.0 - 0.025f64.powf(0.01))).abs() < 1e-9);
        let (lo, hi) = clopper_pearson(50, 100, 0.95);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((lo - 0.3983).abs() < 1e-3 && (hi - 0.6017).abs() < 1e-3);
    }
}
