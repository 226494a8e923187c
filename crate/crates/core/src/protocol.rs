//! Alice-side processing and the downlink randomness-sharing phase.
//!
//! Effective gains follow the conjugate convention `g = a^H h / sqrt(M)` with
//! `a = y / zeta`, so that the matched filter coherently combines the
//! training direction and `g` concentrates on a positive real value.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{norm, ChannelState, SystemConfig, UplinkObservation};
use crate::error::{Error, Result};
use crate::mathkit::{fill_cscg, RngStream};

/// Unit-norm matched-filter precoder.
#[derive(Clone, Debug, PartialEq)]
pub struct Precoder {
    a: Vec<Complex64>,
}

impl Precoder {
    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// MMSE estimate of `h_k` from the sufficient statistic `y_k`, assuming
/// attack strength `w_assumed` (Alice uses 0).
pub fn mmse_channel_estimate(y: &[Complex64], c: f64, w_assumed: f64) -> Vec<Complex64> {
    let s = c.sqrt() / (1.0 + (1.0 + w_assumed * w_assumed) * c);
    y.iter().map(|v| v * s).collect()
}

pub fn mf_precoder(h_hat: &[Complex64]) -> Result<Precoder> {
    let n = norm(h_hat);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::DegenerateInput(format!(
            "cannot normalise a precoder with norm {n}"
        )));
    }
    Ok(Precoder {
        a: h_hat.iter().map(|v| v / n).collect(),
    })
}

/// Alice's production path: MMSE estimate with `w = 0`, then matched filter.
pub fn alice_precoders(obs: &UplinkObservation) -> Result<Vec<Precoder>> {
    obs.y
        .iter()
        .zip(&obs.c)
        .map(|(y, &c)| mf_precoder(&mmse_channel_estimate(y, c, 0.0)))
        .collect()
}

/// Equiprobable binary sequence, packed 64 bits per word. Bit `i` maps to
/// the BPSK symbol `1 - 2 b_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomSequence {
    len: usize,
    words: Vec<u64>,
}

impl RandomSequence {
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        Self {
            len: bits.len(),
            words,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.bit(i)).collect()
    }

    pub fn symbols(&self) -> Vec<f64> {
        (0..self.len)
            .map(|i| if self.bit(i) { -1.0 } else { 1.0 })
            .collect()
    }

    /// `q_self^T q_other`, exact for BPSK.
    pub fn correlation(&self, other: &RandomSequence) -> Result<i64> {
        if self.len != other.len {
            return Err(Error::arg("sequence lengths differ"));
        }
        let flips: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum();
        Ok(self.len as i64 - 2 * i64::from(flips))
    }
}

pub fn generate_random_sequence(n: usize, rng: &mut RngStream) -> Result<RandomSequence> {
    if n == 0 {
        return Err(Error::arg("sequence length must be positive"));
    }
    let mut words: Vec<u64> = (0..n.div_ceil(64)).map(|_| rng.random()).collect();
    if !n.is_multiple_of(64) {
        *words.last_mut().unwrap() &= (1u64 << (n % 64)) - 1;
    }
    Ok(RandomSequence { len: n, words })
}

/// `K x K` matrix of effective downlink gains; entry `(k, l)` couples the
/// beam of user `l` into receiver `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct GainMatrix {
    users: usize,
    data: Vec<Complex64>,
}

impl GainMatrix {
    pub fn users(&self) -> usize {
        self.users
    }

    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.data[k * self.users + l]
    }

    pub fn diag(&self, k: usize) -> Complex64 {
        self.get(k, k)
    }

    /// `sum_{l != k} |G[k, l]|^2`: realised interference power at receiver `k`.
    pub fn interference_power(&self, k: usize) -> f64 {
        let row = &self.data[k * self.users..(k + 1) * self.users];
        row.iter()
            .enumerate()
            .filter(|&(l, _)| l != k)
            .map(|(_, v)| v.norm_sqr())
            .sum()
    }
}

fn gain_matrix(receivers: &[Vec<Complex64>], precoders: &[Precoder]) -> GainMatrix {
    let users = receivers.len();
    let scale = 1.0 / (receivers.first().map_or(1, Vec::len) as f64).sqrt();
    let mut data = Vec::with_capacity(users * users);
    for h in receivers {
        for p in precoders {
            let dot: Complex64 = p.a.iter().zip(h).map(|(a, h)| a.conj() * h).sum();
            data.push(dot * scale);
        }
    }
    GainMatrix { users, data }
}

/// Gains at the legitimate users and at the eavesdroppers.
pub fn effective_gains(
    ch: &ChannelState,
    precoders: &[Precoder],
) -> Result<(GainMatrix, GainMatrix)> {
    let m = ch.antennas();
    if precoders.len() != ch.users() || precoders.iter().any(|p| p.len() != m) {
        return Err(Error::arg("precoders do not match the channel state"));
    }
    Ok((
        gain_matrix(&ch.h, precoders),
        gain_matrix(&ch.h_e, precoders),
    ))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DownlinkHooks {
    pub suppress_noise: bool,
    pub suppress_interference: bool,
}

#[derive(Clone, Debug)]
pub struct DownlinkFrame {
    pub bits: Vec<Vec<bool>>,
    pub q: Vec<Vec<f64>>,
    pub g: Vec<Complex64>,
    pub g_e: Vec<Complex64>,
    pub r: Vec<Vec<Complex64>>,
    pub r_e: Vec<Vec<Complex64>>,
    pub sigma2_n: Vec<f64>,
    pub sigma2_ne: f64,
}

/// Symbol-level downlink: builds every received vector at Bob and Eve.
/// Eve's observation carries interference but no thermal noise.
pub fn downlink_transmit(
    config: &SystemConfig,
    ch: &ChannelState,
    precoders: &[Precoder],
    seqs: &[RandomSequence],
    rng: &mut RngStream,
    hooks: DownlinkHooks,
) -> Result<DownlinkFrame> {
    let k_users = config.users;
    let n_d = config.seq_len;
    if ch.users() != k_users || ch.antennas() != config.antennas {
        return Err(Error::arg("channel state does not match the configuration"));
    }
    check_sequences(seqs, k_users, n_d)?;
    let (gb, ge) = effective_gains(ch, precoders)?;
    let q: Vec<Vec<f64>> = seqs.iter().map(RandomSequence::symbols).collect();
    let superpose = |g: &GainMatrix, k: usize| -> Vec<Complex64> {
        let mut out: Vec<Complex64> = q[k].iter().map(|&s| g.diag(k) * s).collect();
        if !hooks.suppress_interference {
            for (l, ql) in q.iter().enumerate().filter(|&(l, _)| l != k) {
                let gl = g.get(k, l);
                for (o, &s) in out.iter_mut().zip(ql) {
                    *o += gl * s;
                }
            }
        }
        out
    };
    let mut r = Vec::with_capacity(k_users);
    let mut r_e = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let mut rk = superpose(&gb, k);
        if !hooks.suppress_noise {
            let var = 1.0 / (config.p_d * config.beta[k] * config.antennas as f64);
            let mut z = vec![Complex64::new(0.0, 0.0); n_d];
            fill_cscg(&mut z, var, rng);
            for (o, zi) in rk.iter_mut().zip(z) {
                *o += zi;
            }
        }
        r.push(rk);
        r_e.push(superpose(&ge, k));
    }
    Ok(DownlinkFrame {
        bits: seqs.iter().map(RandomSequence::bits).collect(),
        q,
        g: (0..k_users).map(|k| gb.diag(k)).collect(),
        g_e: (0..k_users).map(|k| ge.diag(k)).collect(),
        r,
        r_e,
        sigma2_n: (0..k_users).map(|k| config.sigma2_n(k)).collect(),
        sigma2_ne: config.sigma2_ne(),
    })
}

/// Matched-filter statistic `q^H r` together with `q^H q`; everything the
/// leakage estimators need from the downlink block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correlation {
    pub qr: Complex64,
    pub qq: f64,
}

pub fn correlate(r: &[Complex64], q: &[f64]) -> Result<Correlation> {
    if r.len() != q.len() || r.is_empty() {
        return Err(Error::arg("received vector and sequence lengths differ"));
    }
    Ok(Correlation {
        qr: r.iter().zip(q).map(|(r, &q)| r * q).sum(),
        qq: q.iter().map(|q| q * q).sum(),
    })
}

/// Draws Bob's correlation statistics directly:
/// `q_k^T r_k = sum_l G[k,l] q_k^T q_l + xi_k` with
/// `xi_k ~ CN(0, N_d / (p_d beta_k M))`.
///
/// Distributionally identical to correlating the output of
/// [`downlink_transmit`] and costs `O(K^2 N_d / 64)` instead of
/// `O(K^2 N_d)`.
pub fn downlink_correlations(
    config: &SystemConfig,
    gains: &GainMatrix,
    seqs: &[RandomSequence],
    rng: &mut RngStream,
    hooks: DownlinkHooks,
) -> Result<Vec<Correlation>> {
    let k_users = config.users;
    let n_d = config.seq_len;
    if gains.users() != k_users {
        return Err(Error::arg("gain matrix does not match the configuration"));
    }
    check_sequences(seqs, k_users, n_d)?;
    let mut out = Vec::with_capacity(k_users);
    let mut xi = [Complex64::new(0.0, 0.0)];
    for k in 0..k_users {
        let mut qr = gains.diag(k) * n_d as f64;
        if !hooks.suppress_interference {
            for l in (0..k_users).filter(|&l| l != k) {
                qr += gains.get(k, l) * seqs[k].correlation(&seqs[l])? as f64;
            }
        }
        if !hooks.suppress_noise {
            let var = n_d as f64 / (config.p_d * config.beta[k] * config.antennas as f64);
            fill_cscg(&mut xi, var, rng);
            qr += xi[0];
        }
        out.push(Correlation { qr, qq: n_d as f64 });
    }
    Ok(out)
}

fn check_sequences(seqs: &[RandomSequence], users: usize, n_d: usize) -> Result<()> {
    if seqs.len() != users || seqs.iter().any(|s| s.len() != n_d) {
        return Err(Error::arg(format!(
            "expected {users} sequences of length {n_d}"
        )));
    }
    Ok(())
}
