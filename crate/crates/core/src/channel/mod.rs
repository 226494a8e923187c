//! Fading realisations and uplink training under the pilot contamination
//! attack.
//!
//! The uplink is simulated at the level of the per-user sufficient statistic
//! `y_k = sqrt(c_k) (h_k + w_k h^e_k) + u_k`; with orthonormal pilots this is
//! distributed exactly as the pilot-correlated received matrix.
//! [`explicit_pilot_observation`] builds the full matrix with Walsh–Hadamard
//! pilots for cross-checking.

mod config;
pub mod kv;

pub use config::{
    db_to_linear, effective_attack_strength, SystemConfig, MAX_ANTENNAS, MAX_SEQ_LEN, MAX_USERS,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mathkit::{fill_cscg, RngStream};

/// Small-scale fading for one coherence block.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelState {
    /// `h[k]`: user `k`, length `M`.
    pub h: Vec<Vec<Complex64>>,
    /// `h_e[k]`: the eavesdropper attacking user `k`.
    pub h_e: Vec<Vec<Complex64>>,
}

impl ChannelState {
    pub fn antennas(&self) -> usize {
        self.h.first().map_or(0, Vec::len)
    }

    pub fn users(&self) -> usize {
        self.h.len()
    }
}

/// Per-user uplink sufficient statistics seen by the base station.
#[derive(Clone, Debug, PartialEq)]
pub struct UplinkObservation {
    pub y: Vec<Vec<Complex64>>,
    /// `zeta[k] = ||y[k]||`, the side information later sent to user `k`.
    pub zeta: Vec<f64>,
    /// `c[k] = p_u beta_k N_u`.
    pub c: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct UplinkHooks {
    pub suppress_noise: bool,
}

pub fn generate_channels(config: &SystemConfig, rng: &mut RngStream) -> Result<ChannelState> {
    config.validate()?;
    let (m, k) = (config.antennas, config.users);
    let mut draw = || {
        let mut v = vec![Complex64::new(0.0, 0.0); m];
        fill_cscg(&mut v, 1.0, rng);
        v
    };
    let h = (0..k).map(|_| draw()).collect();
    let h_e = (0..k).map(|_| draw()).collect();
    Ok(ChannelState { h, h_e })
}

pub fn uplink_observation(
    config: &SystemConfig,
    ch: &ChannelState,
    rng: &mut RngStream,
) -> Result<UplinkObservation> {
    uplink_observation_with(config, ch, rng, UplinkHooks::default())
}

pub fn uplink_observation_with(
    config: &SystemConfig,
    ch: &ChannelState,
    rng: &mut RngStream,
    hooks: UplinkHooks,
) -> Result<UplinkObservation> {
    check_shape(config, ch)?;
    let m = config.antennas;
    let mut y = Vec::with_capacity(config.users);
    let mut zeta = Vec::with_capacity(config.users);
    let mut c = Vec::with_capacity(config.users);
    for k in 0..config.users {
        let ck = config.c(k);
        let sc = ck.sqrt();
        let w = config.w(k);
        let mut yk = vec![Complex64::new(0.0, 0.0); m];
        if !hooks.suppress_noise {
            fill_cscg(&mut yk, 1.0, rng);
        }
        for ((yi, hi), hei) in yk.iter_mut().zip(&ch.h[k]).zip(&ch.h_e[k]) {
            *yi += sc * (hi + w * hei);
        }
        zeta.push(norm(&yk));
        y.push(yk);
        c.push(ck);
    }
    Ok(UplinkObservation { y, zeta, c })
}

/// Orthonormal binary training sequences: the first `K` rows of the
/// `N_u x N_u` Sylvester–Hadamard matrix scaled by `1/sqrt(N_u)`.
pub fn walsh_hadamard_pilots(users: usize, pilot_len: usize) -> Result<Vec<Vec<f64>>> {
    if !pilot_len.is_power_of_two() || pilot_len < users {
        return Err(Error::arg(format!(
            "Walsh-Hadamard pilots need N_u a power of two >= K, got N_u = {pilot_len}, K = {users}"
        )));
    }
    let s = 1.0 / (pilot_len as f64).sqrt();
    Ok((0..users)
        .map(|row| {
            (0..pilot_len)
                .map(|col| {
                    if (row & col).count_ones() % 2 == 0 {
                        s
                    } else {
                        -s
                    }
                })
                .collect()
        })
        .collect())
}

/// Builds the `M x N_u` received training matrix with explicit pilots and
/// returns the pilot-correlated statistics `y_k = Y psi_k^H`.
///
/// Diagnostic path only; `N_u` must be a power of two.
pub fn explicit_pilot_observation(
    config: &SystemConfig,
    ch: &ChannelState,
    rng: &mut RngStream,
    hooks: UplinkHooks,
) -> Result<UplinkObservation> {
    check_shape(config, ch)?;
    let (m, n_u) = (config.antennas, config.pilot_len);
    let pilots = walsh_hadamard_pilots(config.users, n_u)?;
    // column-major: received[t][i] is antenna i at pilot time t
    let mut received = vec![vec![Complex64::new(0.0, 0.0); m]; n_u];
    if !hooks.suppress_noise {
        for col in received.iter_mut() {
            fill_cscg(col, 1.0, rng);
        }
    }
    for k in 0..config.users {
        let user_amp = (config.p_u * config.beta[k] * n_u as f64).sqrt();
        let eve_amp = (config.p_e[k] * config.beta_e[k] * n_u as f64).sqrt();
        for (t, col) in received.iter_mut().enumerate() {
            let psi = pilots[k][t];
            for (i, v) in col.iter_mut().enumerate() {
                *v += psi * (user_amp * ch.h[k][i] + eve_amp * ch.h_e[k][i]);
            }
        }
    }
    let mut y = Vec::with_capacity(config.users);
    let mut zeta = Vec::with_capacity(config.users);
    let mut c = Vec::with_capacity(config.users);
    for k in 0..config.users {
        let mut yk = vec![Complex64::new(0.0, 0.0); m];
        for (t, col) in received.iter().enumerate() {
            let psi = pilots[k][t];
            for (acc, v) in yk.iter_mut().zip(col) {
                *acc += v * psi;
            }
        }
        zeta.push(norm(&yk));
        y.push(yk);
        c.push(config.c(k));
    }
    Ok(UplinkObservation { y, zeta, c })
}

fn check_shape(config: &SystemConfig, ch: &ChannelState) -> Result<()> {
    config.validate()?;
    if ch.users() != config.users
        || ch.h_e.len() != config.users
        || ch
            .h
            .iter()
            .chain(&ch.h_e)
            .any(|v| v.len() != config.antennas)
    {
        return Err(Error::arg("channel state does not match the configuration"));
    }
    Ok(())
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
