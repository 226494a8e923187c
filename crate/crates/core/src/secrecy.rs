//! SINRs, binary-input mutual information, adaptive key length and the
//! secrecy-outage probability with its upper bounds.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::estimation::{edcg_eve_power, LeakageEstimate};
use crate::mathkit::{bessel_i0_scaled, erfc, gauss_hermite, marcum_q1, Quadrature};

/// Nodes of the Gauss–Hermite rule behind the mutual-information integral.
pub const MI_QUADRATURE_NODES: usize = 96;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinrPair {
    pub sinr_bob: f64,
    pub sinr_eve: f64,
    /// `sinr_bob / sinr_eve`.
    pub ratio: f64,
}

/// Average SINRs at Bob and Eve under the Gaussian interference model.
pub fn sinr_analytic(config: &SystemConfig, k: usize, w: f64) -> SinrPair {
    let c = config.c(k);
    let m = config.antennas as f64;
    let users = config.users as f64;
    let d = 1.0 + (1.0 + w * w) * c;
    let load = users - 1.0 + 1.0 / (config.p_d * config.beta[k]);
    let sinr_bob = (m * c + w * w * c + 1.0) / (d * load);
    let sinr_eve = (m * w * w * c + c + 1.0) / (d * (users - 1.0));
    SinrPair {
        sinr_bob,
        sinr_eve,
        ratio: sinr_bob / sinr_eve,
    }
}

fn mi_rule() -> &'static Quadrature {
    static RULE: OnceLock<Quadrature> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(MI_QUADRATURE_NODES).expect("valid order"))
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Mutual information in bits of equiprobable BPSK through `r = g q + n`,
/// `n ~ CN(0, noise_var)`, after phase derotation and projection onto the
/// real axis.
pub fn bi_awgn_mutual_information(gain_mag: f64, noise_var: f64) -> Result<f64> {
    if !(noise_var > 0.0) || noise_var.is_nan() {
        return Err(Error::arg(format!(
            "noise variance must be positive, got {noise_var}"
        )));
    }
    if !(gain_mag >= 0.0) {
        return Err(Error::arg(format!(
            "gain magnitude must be >= 0, got {gain_mag}"
        )));
    }
    if gain_mag == 0.0 {
        return Ok(0.0);
    }
    // real-projected SNR: amplitude |g|, noise variance noise_var / 2
    let rho = 2.0 * gain_mag * gain_mag / noise_var;
    if !rho.is_finite() {
        return Ok(1.0);
    }
    let sr = rho.sqrt();
    let loss = mi_rule().expect_standard_normal(|n| softplus(-2.0 * rho - 2.0 * sr * n)) / LN_2;
    Ok((1.0 - loss).clamp(0.0, 1.0))
}

/// Key length `floor([N_d (i_bob - i_eve) - 2a - 2 - b]^+)`.
pub fn key_length(i_bob: f64, i_eve: f64, n_d: usize, a_slack: f64, b_slack: f64) -> u64 {
    let raw = n_d as f64 * (i_bob - i_eve) - 2.0 * a_slack - 2.0 - b_slack;
    if raw > 0.0 {
        // absorb round-off such as 1000 * (0.5 - 0.4) = 99.99999999999999
        (raw + 1e-9).floor() as u64
    } else {
        0
    }
}

/// Posterior probability that `|g^e|` exceeds `(1 + delta) |g^e_hat|`
/// when `g^e ~ CN(mu, sigma2)`.
pub fn outage_probability(
    g_e_hat: Complex64,
    mu_ge_hat: Complex64,
    sigma2_ge_hat: f64,
    delta: f64,
) -> Result<f64> {
    if !(sigma2_ge_hat > 0.0) {
        return Err(Error::arg(format!(
            "posterior variance must be positive, got {sigma2_ge_hat}"
        )));
    }
    if !(delta >= 0.0) {
        return Err(Error::arg(format!("delta must be >= 0, got {delta}")));
    }
    let a = (2.0 * mu_ge_hat.norm_sqr() / sigma2_ge_hat).sqrt();
    let b = if delta.is_infinite() {
        f64::INFINITY
    } else {
        (2.0 * ((1.0 + delta) * g_e_hat).norm_sqr() / sigma2_ge_hat).sqrt()
    };
    marcum_q1(a, b)
}

/// `exp(-(b - a)^2 / 2)`, valid for `a <= b`.
pub fn outage_bound_exp(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::arg(format!(
            "bound arguments must be >= 0, got ({a}, {b})"
        )));
    }
    if a > b {
        return Err(Error::Domain(format!(
            "exponential bound needs a <= b, got ({a}, {b})"
        )));
    }
    Ok((-0.5 * (b - a) * (b - a)).exp())
}

/// `e^{-ab} I_0(ab) [exp(-(b - a)^2 / 2) + a sqrt(pi/2) erfc((b - a) / sqrt 2)]`.
pub fn outage_bound_tight(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0) || !(a.is_finite() && b.is_finite()) {
        return Err(Error::arg(format!(
            "bound arguments must be finite and >= 0, got ({a}, {b})"
        )));
    }
    let d = b - a;
    Ok(bessel_i0_scaled(a * b)
        * ((-0.5 * d * d).exp() + a * (0.5 * PI).sqrt() * erfc(d / std::f64::consts::SQRT_2)))
}

/// Large-`M` limit of the exponential bound on the average outage
/// probability, with `q^H q = N_d`.
pub fn outage_bound_asymptotic(config: &SystemConfig, k: usize, w: f64, delta: f64) -> f64 {
    let c = config.c(k);
    let m = config.antennas as f64;
    let load = config.users as f64 - 1.0 + 1.0 / (config.p_d * config.beta[k]);
    let a = 1.0 + w * w * c;
    let inner =
        w * w * c * c * load / (config.seq_len as f64 * a + load * (1.0 + (1.0 + w * w) * c));
    (-(a * m * delta * delta) / (1.0 + inner)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutageBounds {
    /// `None` where `a > b` and the exponential bound does not hold.
    pub ub_exp: Option<f64>,
    pub ub_tight: f64,
    pub ub_asymptotic: f64,
}

pub fn outage_bounds(
    a: f64,
    b: f64,
    config: &SystemConfig,
    k: usize,
    w: f64,
    delta: f64,
) -> Result<OutageBounds> {
    let ub_exp = match outage_bound_exp(a, b) {
        Ok(v) => Some(v),
        Err(Error::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(OutageBounds {
        ub_exp,
        ub_tight: outage_bound_tight(a, b)?,
        ub_asymptotic: outage_bound_asymptotic(config, k, w, delta),
    })
}

/// NMSE floor reached when Bob's own gain is known exactly.
pub fn nmse_ideal(config: &SystemConfig, k: usize, w: f64) -> f64 {
    let c = config.c(k);
    1.0 / (edcg_eve_power(config, k, w) * (1.0 + w * w * c) * config.antennas as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyOutcome {
    pub i_bob: f64,
    /// Eve's information estimated from the margin-inflated gain.
    pub i_eve_hat: f64,
    /// Eve's information at her true gain.
    pub i_eve_true: f64,
    pub s_hat: u64,
    pub p_out: f64,
    /// `|g^e| > (1 + delta) |g^e_hat|`.
    pub outage: bool,
}

/// Key length and outage figures for user `k` given the true gains and
/// Bob's leakage estimate.
pub fn key_outcome(
    config: &SystemConfig,
    k: usize,
    g: Complex64,
    g_e: Complex64,
    est: &LeakageEstimate,
) -> Result<KeyOutcome> {
    let delta = config.delta;
    let s2n = config.sigma2_n(k);
    let s2ne = config.sigma2_ne();
    let i_bob = bi_awgn_mutual_information(g.norm(), s2n)?;
    let inflated = (1.0 + delta) * est.g_e_hat.norm();
    let i_eve_hat = bi_awgn_mutual_information(inflated, s2ne)?;
    let i_eve_true = bi_awgn_mutual_information(g_e.norm(), s2ne)?;
    Ok(KeyOutcome {
        i_bob,
        i_eve_hat,
        i_eve_true,
        s_hat: key_length(
            i_bob,
            i_eve_hat,
            config.seq_len,
            config.a_slack,
            config.b_slack,
        ),
        p_out: outage_probability(est.g_e_hat, est.mu_ge_hat, est.sigma2_ge_hat, delta)?,
        outage: g_e.norm() > inflated,
    })
}
