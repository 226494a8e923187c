//! Brute-force references that share no code path with the closed forms
//! they check.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::estimation::edcg_prior;
use crate::mathkit::RngStream;
use crate::protocol::Correlation;

/// `Q1(a, b)` by two-dimensional quadrature of
/// `int_b^inf x exp(-(x - a)^2 / 2) (1/pi) int_0^pi exp(a x (cos t - 1)) dt dx`.
pub fn marcum_q1_quadrature(a: f64, b: f64) -> f64 {
    let inner_n = 256;
    let scaled_i0 = |z: f64| -> f64 {
        // trapezoid on a smooth even periodic integrand
        let h = PI / inner_n as f64;
        let mut acc = 0.5 * (1.0 + (-2.0 * z).exp());
        for j in 1..inner_n {
            acc += (z * ((j as f64 * h).cos() - 1.0)).exp();
        }
        acc / inner_n as f64
    };
    let f = |x: f64| x * (-0.5 * (x - a) * (x - a)).exp() * scaled_i0(a * x);
    let hi = a.max(b) + 40.0;
    let steps = (((hi - b) / 0.01).ceil() as usize).max(2) & !1;
    let h = (hi - b) / steps as f64;
    let mut acc = f(b) + f(hi);
    for i in 1..steps {
        let wgt = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += wgt * f(b + i as f64 * h);
    }
    acc * h / 3.0
}

/// Plug-in mutual information of BPSK over a real AWGN channel with SNR
/// `rho = A^2 / s^2`, from histograms of `samples` simulated outputs.
pub fn mi_histogram(rho: f64, samples: usize, bins: usize, rng: &mut RngStream) -> f64 {
    let amp = rho.sqrt();
    let lo = -amp - 8.0;
    let hi = amp + 8.0;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![[0u64; 2]; bins];
    for _ in 0..samples {
        let bit = rng.random::<bool>();
        let s = if bit { -amp } else { amp };
        let n: f64 = rng.sample(StandardNormal);
        let y = s + n;
        let idx = (((y - lo) / width).floor().max(0.0) as usize).min(bins - 1);
        counts[idx][usize::from(bit)] += 1;
    }
    let total = samples as f64;
    let px = [
        counts.iter().map(|c| c[0]).sum::<u64>() as f64 / total,
        counts.iter().map(|c| c[1]).sum::<u64>() as f64 / total,
    ];
    let mut mi = 0.0;
    for c in &counts {
        let py = (c[0] + c[1]) as f64 / total;
        for x in 0..2 {
            if c[x] > 0 {
                let pxy = c[x] as f64 / total;
                mi += pxy * (pxy / (px[x] * py)).log2();
            }
        }
    }
    mi
}

/// Exact log-likelihood of the matched-filter statistic given `zeta` and
/// strength `w`, with `g | zeta ~ CN(mu_g, sigma2_g)` integrated out.
/// Terms independent of `w` are dropped.
pub fn exact_log_likelihood(
    corr: &Correlation,
    zeta: f64,
    c: f64,
    m: usize,
    sigma2_n: f64,
    w: f64,
) -> f64 {
    let p = edcg_prior(zeta, c, m, w);
    let n = corr.qq;
    let s = corr.qr;
    let resid: Complex64 = s - p.mu_g * n;
    let tot = sigma2_n + p.sigma2_g * n;
    -(1.0 + p.sigma2_g * n / sigma2_n).ln()
        - (-2.0 * p.mu_g * s.re + p.mu_g * p.mu_g * n - p.sigma2_g * resid.norm_sqr() / tot)
            / sigma2_n
}

/// Maximiser of [`exact_log_likelihood`] over `w` in `[0, w_max]` on a
/// uniform grid of `points` values.
pub fn grid_mle_w(
    corr: &Correlation,
    zeta: f64,
    c: f64,
    m: usize,
    sigma2_n: f64,
    w_max: f64,
    points: usize,
) -> f64 {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..points {
        let w = w_max * i as f64 / (points - 1) as f64;
        let ll = exact_log_likelihood(corr, zeta, c, m, sigma2_n, w);
        if ll > best.0 {
            best = (ll, w);
        }
    }
    best.1
}
