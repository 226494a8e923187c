//! Parameter sweeps: per axis value, Monte-Carlo means and 95% intervals
//! next to the matching closed-form curves.
//!
//! Sweep file keys, in addition to the system keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `axis` | `M`, `K`, `N_d`, `delta` or `w2_db` |
//! | `values` | comma-separated axis values |
//! | `trials` | trials per point (default 10000) |
//! | `metrics` | comma-separated subset of `nmse,sinr,outage,key_rate,w_hat` |
//! | `plug_in` | `estimated` (default) or `true_w` |

use crate::channel::kv::KeyValues;
use crate::channel::{db_to_linear, SystemConfig, MAX_USERS};
use crate::error::{Error, Result};
use crate::estimation::{analytic_mse_eve, edcg_eve_power};
use crate::secrecy::{nmse_ideal, outage_bound_asymptotic, sinr_analytic};

use super::csv::{Cell, Table};
use super::stats::{pairwise_fold, Moments, PairMoments};
use super::trial::{map_trials, run_trial_with, PlugInMode, TrialRecord};

pub const DEFAULT_SWEEP_TRIALS: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Antennas,
    Users,
    SeqLen,
    Delta,
    W2Db,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "M" => Self::Antennas,
            "K" => Self::Users,
            "N_d" => Self::SeqLen,
            "delta" => Self::Delta,
            "w2_db" => Self::W2Db,
            other => {
                return Err(Error::arg(format!(
                    "unknown sweep axis `{other}`; expected M, K, N_d, delta or w2_db"
                )))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Antennas => "M",
            Self::Users => "K",
            Self::SeqLen => "N_d",
            Self::Delta => "delta",
            Self::W2Db => "w2_db",
        }
    }

    /// `base` with the axis set to `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut cfg = base.clone();
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::arg(format!(
                    "{} needs a positive integer, got {v}",
                    self.name()
                )))
            }
        };
        match self {
            Self::Antennas => cfg.antennas = count(value)?,
            Self::Users => {
                // checked before set_users allocates per-user vectors
                let k = count(value)?;
                if k > MAX_USERS || k > cfg.pilot_len {
                    return Err(Error::arg(format!(
                        "K = {k} needs N_u >= K and K <= {MAX_USERS} (N_u = {})",
                        cfg.pilot_len
                    )));
                }
                cfg.set_users(k);
            }
            Self::SeqLen => cfg.seq_len = count(value)?,
            Self::Delta => cfg.delta = value,
            Self::W2Db => cfg.set_attack_w2(db_to_linear(value)),
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Nmse,
    Sinr,
    Outage,
    KeyRate,
    WHat,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Nmse,
        Metric::Sinr,
        Metric::Outage,
        Metric::KeyRate,
        Metric::WHat,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "nmse" => Self::Nmse,
            "sinr" => Self::Sinr,
            "outage" => Self::Outage,
            "key_rate" => Self::KeyRate,
            "w_hat" => Self::WHat,
            other => return Err(Error::arg(format!("unknown metric `{other}`"))),
        })
    }

    /// Output columns contributed by this metric, in order.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Self::Nmse => &[
                "nmse",
                "nmse_ci",
                "nmse_analytic",
                "nmse_ideal",
                "mse_eve",
                "mse_eve_ci",
                "mse_eve_analytic",
            ],
            Self::Sinr => &[
                "sinr_bob",
                "sinr_bob_ci",
                "sinr_bob_analytic",
                "sinr_eve",
                "sinr_eve_ci",
                "sinr_eve_analytic",
            ],
            Self::Outage => &[
                "p_out_avg",
                "p_out_avg_ci",
                "outage_freq",
                "outage_freq_ci",
                "p_out_asymptotic_bound",
            ],
            Self::KeyRate => &["rs", "rs_ci", "rs_known_ge", "rs_known_ge_ci", "key_len"],
            Self::WHat => &["w_true", "w_hat_mean", "w_hat_ci"],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: SystemConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub trials: u64,
    pub metrics: Vec<Metric>,
    pub plug_in: PlugInMode,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KeyValues::parse(text)?;
        let base = SystemConfig::take_from(&mut kv)?;
        let axis_e = kv
            .take("axis")
            .ok_or_else(|| Error::config(0, "missing `axis`"))?;
        let axis = SweepAxis::parse(&axis_e.value)
            .map_err(|e| Error::config(axis_e.line, e.to_string()))?;
        let values_e = kv
            .take("values")
            .ok_or_else(|| Error::config(0, "missing `values`"))?;
        let values = values_e.parse_list_f64("values")?;
        let trials = match kv.take("trials") {
            Some(e) => e.parse_u64("trials")?,
            None => DEFAULT_SWEEP_TRIALS,
        };
        let metrics = match kv.take("metrics") {
            Some(e) => e
                .value
                .split(',')
                .map(|s| {
                    Metric::parse(s.trim()).map_err(|err| Error::config(e.line, err.to_string()))
                })
                .collect::<Result<Vec<_>>>()?,
            None => Metric::ALL.to_vec(),
        };
        let plug_in = match kv.take("plug_in") {
            Some(e) => PlugInMode::parse(&e.value)
                .ok_or_else(|| Error::config(e.line, format!("unknown plug_in `{}`", e.value)))?,
            None => PlugInMode::Estimated,
        };
        kv.finish()?;
        let spec = Self {
            base,
            axis,
            values,
            trials,
            metrics,
            plug_in,
        };
        spec.validate().map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::config(values_e.line, msg),
            other => other,
        })?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::arg("sweep needs at least one value"));
        }
        if self.trials == 0 {
            return Err(Error::arg("trials must be at least 1"));
        }
        if self.metrics.is_empty() {
            return Err(Error::arg("no metrics selected"));
        }
        for &v in &self.values {
            self.axis.apply(&self.base, v)?;
        }
        Ok(())
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = ["axis", "value", "trials", "samples"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for m in &self.metrics {
            cols.extend(m.columns().iter().map(|s| s.to_string()));
        }
        cols
    }
}

/// Sufficient statistics of one sweep point, pooled over users and trials.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointStats {
    pub trials: u64,
    /// `|g^e_hat - g^e|^2 / E|g^e|^2`.
    pub nse_eve: Moments,
    pub se_eve: Moments,
    pub se_bob: Moments,
    pub post_var_bob: Moments,
    pub sinr_bob: PairMoments,
    pub sinr_eve: PairMoments,
    pub p_out: Moments,
    pub outage: Moments,
    pub rs: Moments,
    pub rs_known_ge: Moments,
    pub key_len: Moments,
    pub w_hat: Moments,
}

impl PointStats {
    pub fn from_trial(config: &SystemConfig, rec: &TrialRecord) -> Self {
        let mut s = PointStats {
            trials: 1,
            ..Default::default()
        };
        for (k, u) in rec.users.iter().enumerate() {
            let se = (u.g_e_hat - u.g_e_true).norm_sqr();
            s.nse_eve.push(se / edcg_eve_power(config, k, u.w_true));
            s.se_eve.push(se);
            s.se_bob.push((u.g_hat - u.g_true).norm_sqr());
            s.post_var_bob.push(u.sigma2_g_hat);
            s.sinr_bob.push(u.signal_bob, u.interference_bob);
            s.sinr_eve.push(u.signal_eve, u.interference_eve);
            s.p_out.push(u.p_out_analytic);
            s.outage.push(if u.outage_flag { 1.0 } else { 0.0 });
            s.rs.push((u.i_bob - u.i_eve_hat).max(0.0));
            s.rs_known_ge.push((u.i_bob - u.i_eve_true).max(0.0));
            s.key_len.push(u.s_hat as f64);
            s.w_hat.push(u.w_hat);
        }
        s
    }

    pub fn merge(&self, o: &Self) -> Self {
        Self {
            trials: self.trials + o.trials,
            nse_eve: self.nse_eve.merge(&o.nse_eve),
            se_eve: self.se_eve.merge(&o.se_eve),
            se_bob: self.se_bob.merge(&o.se_bob),
            post_var_bob: self.post_var_bob.merge(&o.post_var_bob),
            sinr_bob: self.sinr_bob.merge(&o.sinr_bob),
            sinr_eve: self.sinr_eve.merge(&o.sinr_eve),
            p_out: self.p_out.merge(&o.p_out),
            outage: self.outage.merge(&o.outage),
            rs: self.rs.merge(&o.rs),
            rs_known_ge: self.rs_known_ge.merge(&o.rs_known_ge),
            key_len: self.key_len.merge(&o.key_len),
            w_hat: self.w_hat.merge(&o.w_hat),
        }
    }

    pub fn samples(&self) -> u64 {
        self.nse_eve.n
    }
}

/// Runs `trials` trials at `config` and folds them in trial order.
pub fn run_point(
    config: &SystemConfig,
    trials: u64,
    mode: PlugInMode,
    workers: Option<usize>,
) -> Result<PointStats> {
    let parts = map_trials(trials, workers, |t| {
        run_trial_with(config, t, mode).map(|rec| PointStats::from_trial(config, &rec))
    })?;
    Ok(pairwise_fold(
        &parts,
        &PointStats::default(),
        &PointStats::merge,
    ))
}

fn metric_cells(metric: Metric, cfg: &SystemConfig, s: &PointStats) -> Vec<Cell> {
    let w = cfg.w(0);
    let cells: Vec<f64> = match metric {
        Metric::Nmse => {
            let mse = analytic_mse_eve(cfg, 0, w);
            vec![
                s.nse_eve.mean(),
                s.nse_eve.ci95(),
                mse / edcg_eve_power(cfg, 0, w),
                nmse_ideal(cfg, 0, w),
                s.se_eve.mean(),
                s.se_eve.ci95(),
                mse,
            ]
        }
        Metric::Sinr => {
            let a = sinr_analytic(cfg, 0, w);
            vec![
                s.sinr_bob.ratio(),
                s.sinr_bob.ratio_ci95(),
                a.sinr_bob,
                s.sinr_eve.ratio(),
                s.sinr_eve.ratio_ci95(),
                a.sinr_eve,
            ]
        }
        Metric::Outage => vec![
            s.p_out.mean(),
            s.p_out.ci95(),
            s.outage.mean(),
            s.outage.ci95(),
            outage_bound_asymptotic(cfg, 0, w, cfg.delta),
        ],
        Metric::KeyRate => vec![
            s.rs.mean(),
            s.rs.ci95(),
            s.rs_known_ge.mean(),
            s.rs_known_ge.ci95(),
            s.key_len.mean(),
        ],
        Metric::WHat => vec![w, s.w_hat.mean(), s.w_hat.ci95()],
    };
    cells.into_iter().map(Cell::Float).collect()
}

/// One row per axis value, columns as listed by [`SweepSpec::columns`].
/// The table is identical for any worker count.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<Table> {
    spec.validate()?;
    let mut table = Table::new(spec.columns());
    for &v in &spec.values {
        let cfg = spec.axis.apply(&spec.base, v)?;
        log::info!("sweep {} = {v}: {} trials", spec.axis.name(), spec.trials);
        let stats = run_point(&cfg, spec.trials, spec.plug_in, workers)?;
        let mut row = vec![
            Cell::from(spec.axis.name()),
            Cell::Float(v),
            Cell::from(stats.trials),
            Cell::from(stats.samples()),
        ];
        for &m in &spec.metrics {
            row.extend(metric_cells(m, &cfg, &stats));
        }
        table.push(row);
    }
    Ok(table)
}
