//! One Monte-Carlo realisation of the whole protocol.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::kv::KeyValues;
use crate::channel::{generate_channels, uplink_observation, SystemConfig};
use crate::error::{Error, Result};
use crate::estimation::{estimate_leakage, PlugIn};
use crate::mathkit::RngStream;
use crate::protocol::{
    alice_precoders, downlink_correlations, effective_gains, generate_random_sequence,
    DownlinkHooks,
};
use crate::secrecy::key_outcome;

use super::csv::{Cell, Table};

/// Attack strength used by Bob's gain estimators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PlugInMode {
    /// The closed-form estimate `w_hat`.
    #[default]
    Estimated,
    /// The configured `w_k`; isolates the plug-in loss.
    TrueW,
}

impl PlugInMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "estimated" => Some(Self::Estimated),
            "true_w" => Some(Self::TrueW),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Estimated => "estimated",
            Self::TrueW => "true_w",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserRecord {
    pub w_true: f64,
    pub w_hat: f64,
    pub w_used: f64,
    pub g_true: Complex64,
    pub g_hat: Complex64,
    pub g_e_true: Complex64,
    pub g_e_hat: Complex64,
    pub mu_ge_hat: Complex64,
    pub sigma2_g_hat: f64,
    pub sigma2_ge_hat: f64,
    pub zeta: f64,
    /// `|g_k|^2`.
    pub signal_bob: f64,
    /// Realised interference power plus noise variance at Bob.
    pub interference_bob: f64,
    pub signal_eve: f64,
    pub interference_eve: f64,
    pub sinr_emp_bob: f64,
    pub sinr_emp_eve: f64,
    pub i_bob: f64,
    pub i_eve_hat: f64,
    pub i_eve_true: f64,
    pub s_hat: u64,
    pub p_out_analytic: f64,
    pub outage_flag: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub users: Vec<UserRecord>,
}

/// Runs the protocol once with the production plug-in.
pub fn run_trial(config: &SystemConfig, trial_id: u64) -> Result<TrialRecord> {
    run_trial_with(config, trial_id, PlugInMode::Estimated)
}

pub fn run_trial_with(
    config: &SystemConfig,
    trial_id: u64,
    mode: PlugInMode,
) -> Result<TrialRecord> {
    trial_inner(config, trial_id, mode).map_err(|e| Error::Trial {
        trial: trial_id,
        source: Box::new(e),
    })
}

fn trial_inner(config: &SystemConfig, trial_id: u64, mode: PlugInMode) -> Result<TrialRecord> {
    config.validate()?;
    let mut rng = RngStream::new(config.seed, trial_id);
    let ch = generate_channels(config, &mut rng)?;
    let obs = uplink_observation(config, &ch, &mut rng)?;
    let precoders = alice_precoders(&obs)?;
    let (gb, ge) = effective_gains(&ch, &precoders)?;
    let seqs = (0..config.users)
        .map(|_| generate_random_sequence(config.seq_len, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let corr = downlink_correlations(config, &gb, &seqs, &mut rng, DownlinkHooks::default())?;
    let m = config.antennas;
    let mut users = Vec::with_capacity(config.users);
    for k in 0..config.users {
        let w_true = config.w(k);
        let plug = match mode {
            PlugInMode::Estimated => PlugIn::Estimated,
            PlugInMode::TrueW => PlugIn::Known(w_true),
        };
        let s2n = config.sigma2_n(k);
        let est = estimate_leakage(&corr[k], obs.zeta[k], obs.c[k], m, s2n, plug)?;
        let g = gb.diag(k);
        let g_e = ge.diag(k);
        let key = key_outcome(config, k, g, g_e, &est)?;
        let noise = 1.0 / (config.p_d * config.beta[k] * m as f64);
        let interference_bob = gb.interference_power(k) + noise;
        let interference_eve = ge.interference_power(k);
        users.push(UserRecord {
            w_true,
            w_hat: est.w_hat,
            w_used: est.w_used,
            g_true: g,
            g_hat: est.g_hat,
            g_e_true: g_e,
            g_e_hat: est.g_e_hat,
            mu_ge_hat: est.mu_ge_hat,
            sigma2_g_hat: est.sigma2_g_hat,
            sigma2_ge_hat: est.sigma2_ge_hat,
            zeta: obs.zeta[k],
            signal_bob: g.norm_sqr(),
            interference_bob,
            signal_eve: g_e.norm_sqr(),
            interference_eve,
            sinr_emp_bob: g.norm_sqr() / interference_bob,
            sinr_emp_eve: g_e.norm_sqr() / interference_eve,
            i_bob: key.i_bob,
            i_eve_hat: key.i_eve_hat,
            i_eve_true: key.i_eve_true,
            s_hat: key.s_hat,
            p_out_analytic: key.p_out,
            outage_flag: key.outage,
        });
    }
    Ok(TrialRecord { trial_id, users })
}

/// Evaluates `f` on trial ids `0..trials` in parallel and returns the
/// results in trial order. `workers = None` uses the global pool.
pub fn map_trials<T, F>(trials: u64, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let run = || {
        (0..trials)
            .into_par_iter()
            .map(&f)
            .collect::<Result<Vec<T>>>()
    };
    match workers {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::arg(format!("cannot start worker pool: {e}")))?
            .install(run),
        _ => run(),
    }
}

/// Settings of a raw simulation run: system keys plus `trials` (default
/// 1000) and `plug_in`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulateSpec {
    pub config: SystemConfig,
    pub trials: u64,
    pub plug_in: PlugInMode,
}

pub const DEFAULT_SIMULATE_TRIALS: u64 = 1000;

impl SimulateSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KeyValues::parse(text)?;
        let config = SystemConfig::take_from(&mut kv)?;
        let trials = match kv.take("trials") {
            Some(e) => {
                let t = e.parse_u64("trials")?;
                if t == 0 {
                    return Err(Error::config(e.line, "trials must be at least 1"));
                }
                t
            }
            None => DEFAULT_SIMULATE_TRIALS,
        };
        let plug_in = match kv.take("plug_in") {
            Some(e) => PlugInMode::parse(&e.value)
                .ok_or_else(|| Error::config(e.line, format!("unknown plug_in `{}`", e.value)))?,
            None => PlugInMode::Estimated,
        };
        kv.finish()?;
        Ok(Self {
            config,
            trials,
            plug_in,
        })
    }
}

/// Column order of [`raw_table`].
pub const RAW_COLUMNS: [&str; 23] = [
    "trial",
    "user",
    "w_true",
    "w_hat",
    "g_re",
    "g_im",
    "g_hat_re",
    "g_hat_im",
    "g_e_re",
    "g_e_im",
    "g_e_hat_re",
    "g_e_hat_im",
    "zeta",
    "sinr_emp_bob",
    "sinr_emp_eve",
    "i_bob",
    "i_eve_hat",
    "i_eve_true",
    "s_hat",
    "p_out",
    "outage",
    "sigma2_ge_hat",
    "w_used",
];

/// One row per (trial, user).
pub fn raw_table(records: &[TrialRecord]) -> Table {
    let mut t = Table::new(RAW_COLUMNS);
    for rec in records {
        for (k, u) in rec.users.iter().enumerate() {
            t.push(vec![
                Cell::from(rec.trial_id),
                Cell::from(k),
                Cell::Float(u.w_true),
                Cell::Float(u.w_hat),
                Cell::Float(u.g_true.re),
                Cell::Float(u.g_true.im),
                Cell::Float(u.g_hat.re),
                Cell::Float(u.g_hat.im),
                Cell::Float(u.g_e_true.re),
                Cell::Float(u.g_e_true.im),
                Cell::Float(u.g_e_hat.re),
                Cell::Float(u.g_e_hat.im),
                Cell::Float(u.zeta),
                Cell::Float(u.sinr_emp_bob),
                Cell::Float(u.sinr_emp_eve),
                Cell::Float(u.i_bob),
                Cell::Float(u.i_eve_hat),
                Cell::Float(u.i_eve_true),
                Cell::from(u.s_hat),
                Cell::Float(u.p_out_analytic),
                Cell::from(u.outage_flag),
                Cell::Float(u.sigma2_ge_hat),
                Cell::Float(u.w_used),
            ]);
        }
    }
    t
}
