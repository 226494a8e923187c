//! Oracle suite: every closed form checked against an independent
//! brute-force or Monte-Carlo reference.
//!
//! Verify file keys, in addition to the system keys: `trials`,
//! `mi_samples`, and `tol.<check>` to override a tolerance.

use std::collections::BTreeMap;

use rand::Rng;

use crate::channel::kv::KeyValues;
use crate::channel::{generate_channels, uplink_observation, SystemConfig};
use crate::error::{Error, Result};
use crate::estimation::{analytic_mse_eve, edcg_prior};
use crate::mathkit::{marcum_q1, normal_cdf, RngStream};
use crate::protocol::{alice_precoders, effective_gains};
use crate::secrecy::{
    bi_awgn_mutual_information, outage_bound_exp, outage_bound_tight, sinr_analytic,
};

use super::csv::{Cell, Table};
use super::oracles::{grid_mle_w, marcum_q1_quadrature, mi_histogram};
use super::stats::{ks_pvalue, ks_statistic, Moments, Z95};
use super::sweep::run_point;
use super::trial::{map_trials, run_trial_with, PlugInMode};

/// How a check compares its value with the reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    /// `value <= tolerance`, where value is already an error measure.
    ErrorAtMost,
    /// `value >= tolerance` (p-values, coverage fractions).
    AtLeast,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new([
            "check",
            "value",
            "tolerance",
            "comparison",
            "passed",
            "detail",
        ]);
        for c in &self.checks {
            let cmp = match c.comparison {
                Comparison::ErrorAtMost => "error_at_most",
                Comparison::AtLeast => "at_least",
            };
            t.push(vec![
                Cell::from(c.name.as_str()),
                Cell::Float(c.value),
                Cell::Float(c.tolerance),
                Cell::from(cmp),
                Cell::from(c.passed),
                Cell::from(c.detail.as_str()),
            ]);
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Monte-Carlo trials for the statistical checks.
    pub trials: u64,
    pub mi_samples: usize,
    pub workers: Option<usize>,
    pub tolerances: BTreeMap<String, f64>,
    /// Multiplies the closed-form MSE before comparison. Test fixture for
    /// mutation sensitivity; 1 in normal use.
    pub mse_constant_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            trials: 2000,
            mi_samples: 1_000_000,
            workers: None,
            tolerances: BTreeMap::new(),
            mse_constant_scale: 1.0,
        }
    }
}

/// Default tolerance per check name.
pub const DEFAULT_TOLERANCES: [(&str, f64); 12] = [
    ("marcum_quadrature", 1e-8),
    ("mi_histogram", 2e-3),
    ("mse_eve", 0.03),
    ("posterior_var_bob", 0.05),
    ("sinr_bob", 0.01),
    ("sinr_eve", 0.01),
    ("ks_projection", 0.01),
    ("ks_uplink", 0.01),
    ("mle_grid", 0.05),
    ("w_hat_bias", 0.05),
    ("outage_calibration", 1.0),
    ("bound_dominance", 0.95),
];

impl VerifyOptions {
    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            DEFAULT_TOLERANCES
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, t)| *t)
                .expect("every check has a default tolerance")
        })
    }
}

/// Reads a system configuration plus `trials`, `mi_samples` and `tol.*`.
pub fn parse_verify_file(text: &str) -> Result<(SystemConfig, VerifyOptions)> {
    let mut kv = KeyValues::parse(text)?;
    let cfg = SystemConfig::take_from(&mut kv)?;
    let mut opts = VerifyOptions::default();
    if let Some(e) = kv.take("trials") {
        opts.trials = e.parse_u64("trials")?;
        if opts.trials == 0 {
            return Err(Error::config(e.line, "trials must be at least 1"));
        }
    }
    if let Some(e) = kv.take("mi_samples") {
        opts.mi_samples = e.parse_usize("mi_samples")?;
        if opts.mi_samples == 0 {
            return Err(Error::config(e.line, "mi_samples must be at least 1"));
        }
    }
    for (name, e) in kv.take_prefixed("tol.") {
        if !DEFAULT_TOLERANCES.iter().any(|(n, _)| *n == name) {
            return Err(Error::config(e.line, format!("unknown check `{name}`")));
        }
        let v = e.parse_f64(&format!("tol.{name}"))?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::config(e.line, "tolerance must be finite and >= 0"));
        }
        opts.tolerances.insert(name, v);
    }
    kv.finish()?;
    Ok((cfg, opts))
}

struct Suite<'a> {
    opts: &'a VerifyOptions,
    report: Report,
}

impl Suite<'_> {
    fn record(&mut self, name: &str, cmp: Comparison, outcome: Result<(f64, String)>) {
        let tolerance = self.opts.tolerance(name);
        let check = match outcome {
            Ok((value, detail)) => {
                let passed = match cmp {
                    Comparison::ErrorAtMost => value <= tolerance,
                    Comparison::AtLeast => value >= tolerance,
                };
                Check {
                    name: name.into(),
                    value,
                    tolerance,
                    comparison: cmp,
                    passed,
                    detail,
                }
            }
            Err(e) => Check {
                name: name.into(),
                value: f64::NAN,
                tolerance,
                comparison: cmp,
                passed: false,
                detail: format!("error: {e}"),
            },
        };
        log::info!(
            "{} {}: {:.3e} (tol {:.3e}) {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.value,
            check.tolerance,
            check.detail
        );
        self.report.checks.push(check);
    }
}

/// Runs every oracle check at `config`. Failures are report entries, never
/// errors.
pub fn verify_oracles(config: &SystemConfig, opts: &VerifyOptions) -> Report {
    let mut s = Suite {
        opts,
        report: Report::default(),
    };
    use Comparison::*;
    s.record("marcum_quadrature", ErrorAtMost, check_marcum());
    s.record(
        "mi_histogram",
        ErrorAtMost,
        check_mi(config.seed, opts.mi_samples),
    );
    s.record("bound_dominance", AtLeast, check_bounds());
    let true_w = run_point(config, opts.trials, PlugInMode::TrueW, opts.workers);
    let estimated = run_point(config, opts.trials, PlugInMode::Estimated, opts.workers);
    let w = config.w(0);
    s.record(
        "mse_eve",
        ErrorAtMost,
        true_w.as_ref().map_err(clone_err).map(|p| {
            let want = analytic_mse_eve(config, 0, w) * opts.mse_constant_scale;
            let got = p.se_eve.mean();
            (
                (got / want - 1.0).abs(),
                format!("empirical {got:.6e} vs closed form {want:.6e}"),
            )
        }),
    );
    s.record(
        "posterior_var_bob",
        ErrorAtMost,
        true_w.as_ref().map_err(clone_err).map(|p| {
            let got = p.se_bob.mean();
            let want = p.post_var_bob.mean();
            (
                (got / want - 1.0).abs(),
                format!("E|g_hat - g|^2 {got:.6e} vs posterior {want:.6e}"),
            )
        }),
    );
    let sinr = sinr_analytic(config, 0, w);
    s.record(
        "sinr_bob",
        ErrorAtMost,
        true_w.as_ref().map_err(clone_err).map(|p| {
            let got = p.sinr_bob.ratio();
            (
                (got / sinr.sinr_bob - 1.0).abs(),
                format!("{got:.6e} vs {:.6e}", sinr.sinr_bob),
            )
        }),
    );
    s.record(
        "sinr_eve",
        ErrorAtMost,
        true_w.as_ref().map_err(clone_err).map(|p| {
            let got = p.sinr_eve.ratio();
            (
                (got / sinr.sinr_eve - 1.0).abs(),
                format!("{got:.6e} vs {:.6e}", sinr.sinr_eve),
            )
        }),
    );
    s.record(
        "outage_calibration",
        ErrorAtMost,
        true_w.as_ref().map_err(clone_err).map(|p| {
            let freq = p.outage.mean();
            let pbar = p.p_out.mean();
            let se = (pbar * (1.0 - pbar) / p.outage.n as f64).sqrt().max(1e-12);
            let z = (freq - pbar).abs() / se;
            // value in units of the 95% half-width
            (
                z / Z95,
                format!("frequency {freq:.5} vs mean P_out {pbar:.5}"),
            )
        }),
    );
    s.record(
        "w_hat_bias",
        ErrorAtMost,
        estimated.as_ref().map_err(clone_err).and_then(|p| {
            if w == 0.0 {
                return Err(Error::arg("bias relative to w needs an active attack"));
            }
            let m = p.w_hat.mean();
            Ok((
                (m / w - 1.0).abs(),
                format!("mean w_hat {m:.5} vs w {w:.5}"),
            ))
        }),
    );
    s.record("ks_projection", AtLeast, check_ks_projection(config));
    s.record("ks_uplink", AtLeast, check_ks_uplink(config));
    s.record("mle_grid", ErrorAtMost, check_mle_grid(config, opts));
    s.report
}

fn clone_err(e: &Error) -> Error {
    Error::arg(e.to_string())
}

fn check_marcum() -> Result<(f64, String)> {
    let pts = [0.0, 0.5, 1.5, 3.0, 6.0];
    let mut worst: f64 = 0.0;
    for &a in &pts {
        for &b in &pts[1..] {
            let d = (marcum_q1(a, b)? - marcum_q1_quadrature(a, b)).abs();
            worst = worst.max(d);
        }
    }
    Ok((worst, "max |Q1 - 2-D quadrature| on a 5x4 grid".into()))
}

/// Real-projected SNRs at which the MI is checked.
pub const MI_CHECK_SNRS: [f64; 5] = [0.1, 0.5, 1.0, 3.0, 10.0];

fn check_mi(seed: u64, samples: usize) -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for (i, &rho) in MI_CHECK_SNRS.iter().enumerate() {
        let mut rng = RngStream::new(seed, 1 << 40 | i as u64);
        let hist = mi_histogram(rho, samples, 400, &mut rng);
        let quad = bi_awgn_mutual_information((0.5 * rho).sqrt(), 1.0)?;
        worst = worst.max((hist - quad).abs());
    }
    Ok((
        worst,
        format!("max |quadrature - histogram| at {samples} samples"),
    ))
}

fn check_bounds() -> Result<(f64, String)> {
    let n = 100;
    let mut violations = 0;
    let mut tighter = 0;
    let mut total = 0;
    for i in 0..n {
        for j in i..n {
            let a = 12.0 * i as f64 / (n - 1) as f64;
            let b = 12.0 * j as f64 / (n - 1) as f64;
            let q = marcum_q1(a, b)?;
            let e = outage_bound_exp(a, b)?;
            let t = outage_bound_tight(a, b)?;
            total += 1;
            if e < q || t < q {
                violations += 1;
            }
            if t <= e {
                tighter += 1;
            }
        }
    }
    if violations > 0 {
        return Err(Error::arg(format!(
            "{violations} grid points where a bound is below Q1"
        )));
    }
    let frac = tighter as f64 / total as f64;
    Ok((
        frac,
        format!("no violations; tight bound below exponential on {tighter}/{total}"),
    ))
}

/// Samples of `Re` and `Im` of `sqrt(M) G[k, l]`, `k != l`, one per trial.
fn projection_samples(config: &SystemConfig, trials: u64) -> Result<Vec<f64>> {
    let parts = map_trials(trials, None, |t| {
        let mut rng = RngStream::new(config.seed, 1 << 41 | t);
        let ch = generate_channels(config, &mut rng)?;
        let obs = uplink_observation(config, &ch, &mut rng)?;
        let pre = alice_precoders(&obs)?;
        let (gb, _) = effective_gains(&ch, &pre)?;
        let v = gb.get(0, 1) * (config.antennas as f64).sqrt();
        Ok([v.re, v.im])
    })?;
    Ok(parts.into_iter().flatten().collect())
}

fn check_ks_projection(config: &SystemConfig) -> Result<(f64, String)> {
    let mut cfg = config.clone();
    cfg.set_users(2);
    let mut xs = projection_samples(&cfg, 5000)?;
    let sd = 0.5f64.sqrt();
    let d = ks_statistic(&mut xs, |x| normal_cdf(x / sd));
    let p = ks_pvalue(d, xs.len());
    Ok((p, format!("KS D = {d:.4} on {} samples", xs.len())))
}

fn check_ks_uplink(config: &SystemConfig) -> Result<(f64, String)> {
    let mut cfg = config.clone();
    cfg.antennas = 1;
    cfg.set_users(2);
    let w = cfg.w(0);
    let var = 1.0 + (1.0 + w * w) * cfg.c(0);
    let mut xs = map_trials(10_000, None, |t| {
        let mut rng = RngStream::new(cfg.seed, 1 << 42 | t);
        let ch = generate_channels(&cfg, &mut rng)?;
        let obs = uplink_observation(&cfg, &ch, &mut rng)?;
        Ok(obs.y[0][0].re)
    })?;
    let sd = (var / 2.0).sqrt();
    let d = ks_statistic(&mut xs, |x| normal_cdf(x / sd));
    Ok((
        ks_pvalue(d, xs.len()),
        format!("KS D = {d:.4} on 10000 samples"),
    ))
}

fn check_mle_grid(config: &SystemConfig, opts: &VerifyOptions) -> Result<(f64, String)> {
    let w = config.w(0);
    if w == 0.0 {
        return Err(Error::arg("grid MLE check needs an active attack"));
    }
    let mut cfg = config.clone();
    cfg.antennas = 4096;
    let trials = (opts.trials / 10).max(20);
    let recs = map_trials(trials, opts.workers, |t| {
        run_trial_with(&cfg, t, PlugInMode::Estimated)
    })?;
    let mut diff = Moments::default();
    let mut rng = RngStream::new(cfg.seed, 1 << 43);
    for rec in &recs {
        // one user per trial keeps the grid search cheap
        let k = rng.random_range(0..cfg.users);
        let u = &rec.users[k];
        let corr = reconstruct_correlation(&cfg, k, u);
        let g = grid_mle_w(
            &corr,
            u.zeta,
            cfg.c(k),
            cfg.antennas,
            cfg.sigma2_n(k),
            4.0 * w,
            4001,
        );
        diff.push((u.w_hat - g).abs());
    }
    let rel = diff.mean() / w;
    Ok((
        rel,
        format!(
            "mean |closed form - grid MLE| / w over {} users at M = 4096",
            diff.n
        ),
    ))
}

/// Recovers `q^H r` from the MMSE estimate, which is an invertible affine
/// map of it.
fn reconstruct_correlation(
    cfg: &SystemConfig,
    k: usize,
    u: &super::trial::UserRecord,
) -> crate::protocol::Correlation {
    let p = edcg_prior(u.zeta, cfg.c(k), cfg.antennas, u.w_used);
    let ratio = cfg.sigma2_n(k) / p.sigma2_g;
    let n = cfg.seq_len as f64;
    crate::protocol::Correlation {
        qr: u.g_hat * (n + ratio) - ratio * p.mu_g,
        qq: n,
    }
}
