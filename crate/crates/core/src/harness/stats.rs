//! Deterministic summation, confidence intervals and the Kolmogorov–Smirnov
//! test used by the oracle suite.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Sums in a fixed binary-tree order, independent of how the slice was
/// produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Merges a sequence of partial results in a fixed binary-tree order.
pub fn pairwise_fold<T: Clone>(items: &[T], empty: &T, merge: &impl Fn(&T, &T) -> T) -> T {
    match items.len() {
        0 => empty.clone(),
        1 => items[0].clone(),
        n => {
            let mid = n / 2;
            merge(
                &pairwise_fold(&items[..mid], empty, merge),
                &pairwise_fold(&items[mid..], empty, merge),
            )
        }
    }
}

/// Running first and second moments of one scalar.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sumsq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    pub fn merge(&self, o: &Moments) -> Moments {
        Moments {
            n: self.n + o.n,
            sum: self.sum + o.sum,
            sumsq: self.sumsq + o.sumsq,
        }
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Unbiased sample variance; 0 for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sumsq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Half-width of the normal-approximation 95% interval of the mean.
    pub fn ci95(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        Z95 * (self.variance() / self.n as f64).sqrt()
    }
}

/// Moments of a pair `(x, y)` for ratio-of-means estimates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PairMoments {
    pub x: Moments,
    pub y: Moments,
    pub sum_xy: f64,
}

impl PairMoments {
    pub fn push(&mut self, x: f64, y: f64) {
        self.x.push(x);
        self.y.push(y);
        self.sum_xy += x * y;
    }

    pub fn merge(&self, o: &PairMoments) -> PairMoments {
        PairMoments {
            x: self.x.merge(&o.x),
            y: self.y.merge(&o.y),
            sum_xy: self.sum_xy + o.sum_xy,
        }
    }

    pub fn ratio(&self) -> f64 {
        self.x.mean() / self.y.mean()
    }

    /// Delta-method 95% half-width of `mean(x) / mean(y)`.
    pub fn ratio_ci95(&self) -> f64 {
        let n = self.x.n as f64;
        if n < 2.0 {
            return f64::NAN;
        }
        let (mx, my) = (self.x.mean(), self.y.mean());
        let cov = (self.sum_xy - n * mx * my) / (n - 1.0);
        let r = mx / my;
        let var = (self.x.variance() - 2.0 * r * cov + r * r * self.y.variance()) / (my * my);
        Z95 * (var.max(0.0) / n).sqrt()
    }
}

/// One-sample KS statistic `sup |F_n - F|`. Sorts `samples` in place.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of the KS statistic `d` at sample size `n`, with
/// Stephens' small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
        if term < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}
