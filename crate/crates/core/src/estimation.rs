//! Bob-side leakage estimation: attack strength, own effective gain, and the
//! eavesdropper's effective gain, with their posterior laws.

use num_complex::Complex64;

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::protocol::Correlation;

/// Lower clamp on the least-squares gain in the attack-strength estimator.
pub const GAIN_LS_FLOOR: f64 = 1e-6;

/// Which attack strength the gain estimators are evaluated at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlugIn {
    /// The closed-form estimate `w_hat` (what a real receiver can do).
    Estimated,
    /// A known strength, typically the true one.
    Known(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeakageEstimate {
    pub w_hat: f64,
    /// Strength actually plugged into the gain estimators.
    pub w_used: f64,
    pub g_hat: Complex64,
    pub g_e_hat: Complex64,
    pub mu_g: f64,
    pub sigma2_g: f64,
    pub mu_g_hat: Complex64,
    pub sigma2_g_hat: f64,
    pub mu_ge_hat: Complex64,
    pub sigma2_ge_hat: f64,
}

/// Prior law of `g` given `zeta`: `CN(mu_g, sigma2_g)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdcgPrior {
    pub mu_g: f64,
    pub sigma2_g: f64,
}

pub fn edcg_prior(zeta: f64, c: f64, m: usize, w: f64) -> EdcgPrior {
    let mf = m as f64;
    let d = 1.0 + (1.0 + w * w) * c;
    EdcgPrior {
        mu_g: c.sqrt() / d * zeta / mf.sqrt(),
        sigma2_g: (1.0 + w * w * c) / (d * mf),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BobEstimate {
    pub g_hat: Complex64,
    pub mu_g_hat: Complex64,
    pub sigma2_g_hat: f64,
    pub prior: EdcgPrior,
}

fn check_common(corr: &Correlation, zeta: f64, c: f64, m: usize) -> Result<()> {
    if !(corr.qq > 0.0) {
        return Err(Error::arg("q^H q must be positive"));
    }
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return Err(Error::arg(format!(
            "zeta must be finite and >= 0, got {zeta}"
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::arg(format!("c must be finite and > 0, got {c}")));
    }
    if m == 0 {
        return Err(Error::arg("M must be positive"));
    }
    if !(corr.qr.re.is_finite() && corr.qr.im.is_finite()) {
        return Err(Error::arg("non-finite correlation"));
    }
    Ok(())
}

/// Closed-form large-`M` maximum-likelihood estimate of the attack strength.
///
/// A least-squares gain at or below [`GAIN_LS_FLOOR`] is clamped, so a
/// vanishing received strength reads as a strong but finite attack.
pub fn estimate_attack_strength(corr: &Correlation, zeta: f64, c: f64, m: usize) -> Result<f64> {
    check_common(corr, zeta, c, m)?;
    let g_ls = (corr.qr.re / corr.qq).max(GAIN_LS_FLOOR);
    let ratio = zeta / (g_ls * (c * m as f64).sqrt());
    let w2 = ratio - (1.0 + 1.0 / c);
    // differences at rounding level are indistinguishable from zero
    if w2 <= 8.0 * f64::EPSILON * ratio {
        return Ok(0.0);
    }
    Ok(w2.sqrt())
}

pub fn estimate_edcg_bob(
    corr: &Correlation,
    zeta: f64,
    c: f64,
    m: usize,
    sigma2_n: f64,
    w: f64,
) -> Result<BobEstimate> {
    check_common(corr, zeta, c, m)?;
    if !(sigma2_n > 0.0 && sigma2_n.is_finite()) {
        return Err(Error::arg(format!(
            "sigma2_n must be positive, got {sigma2_n}"
        )));
    }
    if !(w >= 0.0 && w.is_finite()) {
        return Err(Error::arg(format!("w must be finite and >= 0, got {w}")));
    }
    let prior = edcg_prior(zeta, c, m, w);
    let ratio = sigma2_n / prior.sigma2_g;
    let g_hat = (corr.qr + ratio * prior.mu_g) / (corr.qq + ratio);
    let sigma2_g_hat = sigma2_n * prior.sigma2_g / (corr.qq * prior.sigma2_g + sigma2_n);
    Ok(BobEstimate {
        g_hat,
        mu_g_hat: g_hat,
        sigma2_g_hat,
        prior,
    })
}

/// `w c / (1 + w^2 c)`: how a deficit in Bob's gain maps to Eve's gain.
pub fn leakage_coefficient(c: f64, w: f64) -> f64 {
    w * c / (1.0 + w * w * c)
}

pub fn estimate_edcg_eve(g_hat: Complex64, zeta: f64, c: f64, m: usize, w: f64) -> Complex64 {
    let expected = zeta / (c * m as f64).sqrt();
    leakage_coefficient(c, w) * (expected - g_hat)
}

/// Posterior mean and variance of Eve's gain given Bob's observables.
pub fn posterior_eve(
    corr: &Correlation,
    zeta: f64,
    c: f64,
    m: usize,
    sigma2_n: f64,
    w: f64,
) -> Result<(Complex64, f64)> {
    let bob = estimate_edcg_bob(corr, zeta, c, m, sigma2_n, w)?;
    Ok(posterior_eve_from(&bob, zeta, c, m, w))
}

fn posterior_eve_from(bob: &BobEstimate, zeta: f64, c: f64, m: usize, w: f64) -> (Complex64, f64) {
    let coef = leakage_coefficient(c, w);
    let mu = estimate_edcg_eve(bob.mu_g_hat, zeta, c, m, w);
    let var = 1.0 / ((1.0 + w * w * c) * m as f64) + coef * coef * bob.sigma2_g_hat;
    (mu, var)
}

/// Runs the three estimation stages for one user.
pub fn estimate_leakage(
    corr: &Correlation,
    zeta: f64,
    c: f64,
    m: usize,
    sigma2_n: f64,
    plug_in: PlugIn,
) -> Result<LeakageEstimate> {
    let w_hat = estimate_attack_strength(corr, zeta, c, m)?;
    let w_used = match plug_in {
        PlugIn::Estimated => w_hat,
        PlugIn::Known(w) => w,
    };
    let bob = estimate_edcg_bob(corr, zeta, c, m, sigma2_n, w_used)?;
    let g_e_hat = estimate_edcg_eve(bob.g_hat, zeta, c, m, w_used);
    let (mu_ge_hat, sigma2_ge_hat) = posterior_eve_from(&bob, zeta, c, m, w_used);
    Ok(LeakageEstimate {
        w_hat,
        w_used,
        g_hat: bob.g_hat,
        g_e_hat,
        mu_g: bob.prior.mu_g,
        sigma2_g: bob.prior.sigma2_g,
        mu_g_hat: bob.mu_g_hat,
        sigma2_g_hat: bob.sigma2_g_hat,
        mu_ge_hat,
        sigma2_ge_hat,
    })
}

/// Closed-form MSE of Eve's gain estimate at strength `w` with `q^H q = N_d`.
pub fn analytic_mse_eve(config: &SystemConfig, k: usize, w: f64) -> f64 {
    let c = config.c(k);
    let m = config.antennas as f64;
    let load = config.users as f64 - 1.0 + 1.0 / (config.p_d * config.beta[k]);
    let a = 1.0 + w * w * c;
    let coef = w * c / a;
    let denom = config.seq_len as f64 / load + (1.0 + (1.0 + w * w) * c) / a;
    (1.0 / a + coef * coef / denom) / m
}

/// `E|g_k|^2` averaged over fading and training noise.
pub fn edcg_bob_power(config: &SystemConfig, k: usize, w: f64) -> f64 {
    let c = config.c(k);
    let m = config.antennas as f64;
    (m * c + w * w * c + 1.0) / (m * (1.0 + (1.0 + w * w) * c))
}

/// `E|g^e_k|^2` averaged over fading and training noise; the NMSE
/// normaliser.
pub fn edcg_eve_power(config: &SystemConfig, k: usize, w: f64) -> f64 {
    let c = config.c(k);
    let m = config.antennas as f64;
    (m * w * w * c + c + 1.0) / (m * (1.0 + (1.0 + w * w) * c))
}
