use log::warn;

use super::kv::KeyValues;
use crate::error::{Error, Result};

/// Protocol and attack parameters for one cell.
///
/// Powers are linear ratios to unit noise; the config file gives them in dB.
/// Per-user vectors are indexed by user `k`, and eavesdropper `k` attacks
/// user `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    /// Base-station antennas `M`.
    pub antennas: usize,
    /// Legitimate users `K` (also the number of eavesdroppers).
    pub users: usize,
    /// Uplink training length `N_u`.
    pub pilot_len: usize,
    /// Downlink random sequence length `N_d`.
    pub seq_len: usize,
    pub p_u: f64,
    pub p_d: f64,
    pub beta: Vec<f64>,
    pub beta_e: Vec<f64>,
    /// Attack power of eavesdropper `k`; zero means passive.
    pub p_e: Vec<f64>,
    /// Secrecy margin.
    pub delta: f64,
    pub a_slack: f64,
    pub b_slack: f64,
    pub seed: u64,
}

/// Size limits that keep a hostile configuration from exhausting memory.
pub const MAX_USERS: usize = 1 << 16;
pub const MAX_ANTENNAS: usize = 1 << 20;
pub const MAX_SEQ_LEN: usize = 1 << 28;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl Default for SystemConfig {
    /// Evaluation setup: p_u = 10 dB, p_d = 20 dB, N_u = 100, unit
    /// large-scale gains, with M = 500, K = 10, N_d = 1000 and w^2 = -6 dB.
    fn default() -> Self {
        let users = 10;
        let mut cfg = Self {
            antennas: 500,
            users,
            pilot_len: 100,
            seq_len: 1000,
            p_u: db_to_linear(10.0),
            p_d: db_to_linear(20.0),
            beta: vec![1.0; users],
            beta_e: vec![1.0; users],
            p_e: vec![0.0; users],
            delta: 0.0,
            a_slack: 0.0,
            b_slack: 0.0,
            seed: 1,
        };
        cfg.set_attack_w2(db_to_linear(-6.0));
        cfg
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let k = self.users;
        if k < 2 {
            return Err(Error::arg(format!("need at least two users, got K = {k}")));
        }
        if k > MAX_USERS {
            return Err(Error::arg(format!("K = {k} exceeds {MAX_USERS}")));
        }
        if self.antennas == 0 || self.antennas > MAX_ANTENNAS {
            return Err(Error::arg(format!(
                "M must be in 1..={MAX_ANTENNAS}, got {}",
                self.antennas
            )));
        }
        if self.seq_len == 0 || self.seq_len > MAX_SEQ_LEN {
            return Err(Error::arg(format!(
                "N_d must be in 1..={MAX_SEQ_LEN}, got {}",
                self.seq_len
            )));
        }
        if self.pilot_len < k {
            return Err(Error::arg(format!(
                "N_u = {} is shorter than K = {k}; orthonormal pilots do not exist",
                self.pilot_len
            )));
        }
        for (name, v) in [("p_u", self.p_u), ("p_d", self.p_d)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::arg(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        for (name, vals, allow_zero) in [
            ("beta", &self.beta, false),
            ("beta_e", &self.beta_e, false),
            ("p_e", &self.p_e, true),
        ] {
            if vals.len() != k {
                return Err(Error::arg(format!(
                    "{name} has {} entries, expected {k}",
                    vals.len()
                )));
            }
            for &v in vals.iter() {
                let ok = v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
                if !ok {
                    return Err(Error::arg(format!("{name} entry {v} out of range")));
                }
            }
        }
        for (name, v) in [
            ("delta", self.delta),
            ("a_slack", self.a_slack),
            ("b_slack", self.b_slack),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::arg(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `c_k = p_u beta_k N_u`.
    pub fn c(&self, k: usize) -> f64 {
        self.p_u * self.beta[k] * self.pilot_len as f64
    }

    /// Effective attack strength `w_k = sqrt(p^e_k beta^e_k / (p_u beta_k))`.
    pub fn w(&self, k: usize) -> f64 {
        effective_attack_strength(self, k)
    }

    /// Interference-plus-noise variance at user `k`, `(K - 1 + 1/(p_d beta_k)) / M`.
    pub fn sigma2_n(&self, k: usize) -> f64 {
        (self.users as f64 - 1.0 + 1.0 / (self.p_d * self.beta[k])) / self.antennas as f64
    }

    /// Interference variance at any eavesdropper, `(K - 1) / M`.
    pub fn sigma2_ne(&self) -> f64 {
        (self.users as f64 - 1.0) / self.antennas as f64
    }

    /// Sets every eavesdropper's power so that `w_k^2 = w2` for all users.
    pub fn set_attack_w2(&mut self, w2: f64) {
        self.p_e = (0..self.users)
            .map(|k| w2 * self.p_u * self.beta[k] / self.beta_e[k])
            .collect();
    }

    /// Changes `K`, broadcasting user 0's gains and attack strength.
    pub fn set_users(&mut self, users: usize) {
        let w2 = self.w(0).powi(2);
        let (b, be) = (self.beta[0], self.beta_e[0]);
        self.users = users;
        self.beta = vec![b; users];
        self.beta_e = vec![be; users];
        self.set_attack_w2(w2);
    }

    /// Reads a flat key-value configuration. Unknown keys are rejected.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut kv = KeyValues::parse(text)?;
        let cfg = Self::take_from(&mut kv)?;
        kv.finish()?;
        Ok(cfg)
    }

    /// Consumes the system keys from `kv`, leaving any others in place.
    ///
    /// | key | meaning |
    /// |-----|---------|
    /// | `M`, `K`, `N_u`, `N_d` | dimensions |
    /// | `p_u_db`, `p_d_db` | uplink / downlink power, dB |
    /// | `beta`, `beta_e` | large-scale gains (scalar or K-list, linear) |
    /// | `p_e_db` | attack powers, dB (scalar or K-list; `-inf`/`off` = passive) |
    /// | `w2_db` | alternative to `p_e_db`: effective strength `w^2` in dB |
    /// | `delta`, `a_slack`, `b_slack`, `seed` | |
    pub fn take_from(kv: &mut KeyValues) -> Result<Self> {
        let mut cfg = Self::default();
        let mut last_line = 0;
        if let Some(e) = kv.take("M") {
            cfg.antennas = e.parse_usize("M")?;
            last_line = e.line;
        }
        let users_entry = kv.take("K");
        if let Some(e) = &users_entry {
            cfg.users = e.parse_usize("K")?;
            if cfg.users < 2 {
                return Err(Error::config(e.line, "K must be at least 2"));
            }
            if cfg.users > MAX_USERS {
                return Err(Error::config(e.line, format!("K exceeds {MAX_USERS}")));
            }
        }
        if let Some(e) = kv.take("N_u") {
            cfg.pilot_len = e.parse_usize("N_u")?;
        }
        if let Some(e) = kv.take("N_d") {
            cfg.seq_len = e.parse_usize("N_d")?;
        }
        if let Some(e) = kv.take("p_u_db") {
            cfg.p_u = db_to_linear(e.parse_f64("p_u_db")?);
        }
        if let Some(e) = kv.take("p_d_db") {
            cfg.p_d = db_to_linear(e.parse_f64("p_d_db")?);
        }
        let k = cfg.users;
        let per_user = |e: &super::kv::Entry, key: &str| -> Result<Vec<f64>> {
            let v = e.parse_list_f64(key)?;
            match v.len() {
                1 => Ok(vec![v[0]; k]),
                n if n == k => Ok(v),
                n => Err(Error::config(
                    e.line,
                    format!("`{key}` has {n} entries; expected 1 or K = {k}"),
                )),
            }
        };
        cfg.beta = match kv.take("beta") {
            Some(e) => per_user(&e, "beta")?,
            None => vec![1.0; k],
        };
        cfg.beta_e = match kv.take("beta_e") {
            Some(e) => per_user(&e, "beta_e")?,
            None => vec![1.0; k],
        };
        match (kv.take("p_e_db"), kv.take("w2_db")) {
            (Some(a), Some(b)) => {
                return Err(Error::config(
                    a.line.max(b.line),
                    "set either `p_e_db` or `w2_db`, not both",
                ))
            }
            (Some(e), None) => {
                cfg.p_e = per_user(&e, "p_e_db")?
                    .into_iter()
                    .map(db_to_linear)
                    .collect();
            }
            (None, Some(e)) => {
                let w2 = per_user(&e, "w2_db")?;
                cfg.p_e = (0..k)
                    .map(|i| db_to_linear(w2[i]) * cfg.p_u * cfg.beta[i] / cfg.beta_e[i])
                    .collect();
            }
            (None, None) => cfg.set_attack_w2(db_to_linear(-6.0)),
        }
        for (key, slot) in [
            ("delta", &mut cfg.delta),
            ("a_slack", &mut cfg.a_slack),
            ("b_slack", &mut cfg.b_slack),
        ] {
            if let Some(e) = kv.take(key) {
                *slot = e.parse_f64(key)?;
                last_line = last_line.max(e.line);
            }
        }
        if let Some(e) = kv.take("seed") {
            cfg.seed = e.parse_u64("seed")?;
        }
        cfg.validate().map_err(|err| match err {
            Error::InvalidArgument(msg) => Error::config(last_line, msg),
            other => other,
        })?;
        cfg.warn_strong_attacks();
        Ok(cfg)
    }

    pub(crate) fn warn_strong_attacks(&self) {
        for k in 0..self.users {
            let w = self.w(k);
            if w > 1.0 {
                warn!("user {k}: attack strength w = {w:.3} > 1 would be detectable by the target");
            }
        }
    }
}

/// `w_k = sqrt(p^e_k beta^e_k / (p_u beta_k))`; `0` encodes passive eavesdropping.
pub fn effective_attack_strength(config: &SystemConfig, k: usize) -> f64 {
    (config.p_e[k] * config.beta_e[k] / (config.p_u * config.beta[k])).sqrt()
}
