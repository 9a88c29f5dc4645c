//! Summaries of standardized samples against a centred normal law.

use std::fmt::Write as _;

use statrs::function::erf::erfc;

/// Standard normal CDF, `erfc(-x / sqrt 2) / 2`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `sup_x |F_n(x) - F(x)|` for the empirical CDF of `samples`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let f = cdf(x);
        acc.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltSummary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    /// Against `N(0, target_variance)`.
    pub ks_distance: f64,
    pub target_variance: f64,
    /// All samples equal, so the comparison is against a point mass.
    pub degenerate: bool,
}

impl CltSummary {
    pub fn from_samples(samples: &[f64], target_variance: f64) -> Self {
        let n = samples.len();
        let k = n as f64;
        let mean = samples.iter().sum::<f64>() / k;
        let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k;
        let m3 = samples.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / k;
        let variance = if n > 1 { m2 * k / (k - 1.0) } else { 0.0 };
        let sd = target_variance.sqrt();
        let ks = ks_distance(samples, |x| normal_cdf(x / sd));
        let degenerate = n > 0 && samples.iter().all(|&x| x == samples[0]);
        Self {
            n,
            mean,
            variance,
            skewness: if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 },
            ks_distance: ks,
            target_variance,
            degenerate,
        }
    }

    /// `variance / target_variance - 1`.
    pub fn variance_error(&self) -> f64 {
        self.variance / self.target_variance - 1.0
    }

    pub fn footer(&self) -> String {
        format!(
            "# n={}\n# mean={}\n# variance={}\n# skewness={}\n# ks_distance={}\n# target_variance={}\n# degenerate={}\n",
            self.n, self.mean, self.variance, self.skewness, self.ks_distance, self.target_variance, self.degenerate
        )
    }
}

/// Pass thresholds for a [`CltSummary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltTolerances {
    pub mean: f64,
    pub variance: f64,
    pub ks: f64,
}

impl Default for CltTolerances {
    fn default() -> Self {
        Self {
            mean: 0.2,
            variance: 0.3,
            ks: 0.15,
        }
    }
}

impl CltTolerances {
    pub fn accepts(&self, s: &CltSummary) -> bool {
        !s.degenerate
            && s.mean.abs() <= self.mean
            && s.variance_error().abs() <= self.variance
            && s.ks_distance <= self.ks
    }
}

/// Equal-width histogram over `[min, max]`; the last bin is closed.
pub fn histogram(samples: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    if samples.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + i as f64 * width, lo + (i + 1) as f64 * width, c))
        .collect()
}

/// `ceil(sqrt n)` bins.
pub fn default_bins(n: usize) -> usize {
    (n as f64).sqrt().ceil().max(1.0) as usize
}

pub fn histogram_csv(samples: &[f64], bins: usize) -> String {
    let mut out = String::from("bin_left,bin_right,count\n");
    for (l, r, c) in histogram(samples, bins) {
        let _ = writeln!(out, "{l},{r},{c}");
    }
    out
}
