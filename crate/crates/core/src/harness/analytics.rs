//! Closed-form curves for overlay against the Monte-Carlo sweeps.

use crate::channel::kv::KeyValues;
use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::estimation::{analytic_mse_eve, edcg_eve_power};
use crate::secrecy::{
    nmse_ideal, outage_bound_asymptotic, outage_bound_exp, outage_bound_tight, sinr_analytic,
};

use super::csv::{Cell, Table};
use super::sweep::SweepAxis;

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticGrid {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

pub const ANALYTIC_COLUMNS: [&str; 13] = [
    "axis",
    "value",
    "w",
    "sinr_bob",
    "sinr_eve",
    "sinr_ratio",
    "mse_eve",
    "nmse",
    "nmse_ideal",
    "p_out_asymptotic_bound",
    "p_out_ub_exp_limit",
    "p_out_ub_tight_limit",
    "edcg_eve_power",
];

/// Reads a system configuration plus `axis` and `values` keys.
pub fn parse_analytic_file(text: &str) -> Result<(SystemConfig, AnalyticGrid)> {
    let mut kv = KeyValues::parse(text)?;
    let cfg = SystemConfig::take_from(&mut kv)?;
    let axis_e = kv
        .take("axis")
        .ok_or_else(|| Error::config(0, "missing `axis`"))?;
    let axis =
        SweepAxis::parse(&axis_e.value).map_err(|e| Error::config(axis_e.line, e.to_string()))?;
    let values_e = kv
        .take("values")
        .ok_or_else(|| Error::config(0, "missing `values`"))?;
    let values = values_e.parse_list_f64("values")?;
    kv.finish()?;
    let grid = AnalyticGrid { axis, values };
    for &v in &grid.values {
        axis.apply(&cfg, v)
            .map_err(|e| Error::config(values_e.line, e.to_string()))?;
    }
    if grid.values.is_empty() {
        return Err(Error::config(values_e.line, "no values"));
    }
    Ok((cfg, grid))
}

/// Large-`M` posterior of Eve's gain for user `k`: `|mu|^2 -> w^2 c / d`,
/// `sigma^2` = closed-form MSE.
fn limiting_marcum_args(cfg: &SystemConfig, k: usize, w: f64) -> (f64, f64) {
    let c = cfg.c(k);
    let d = 1.0 + (1.0 + w * w) * c;
    let mu2 = w * w * c / d;
    let a = (2.0 * mu2 / analytic_mse_eve(cfg, k, w)).sqrt();
    (a, (1.0 + cfg.delta) * a)
}

/// One row per grid value; quantities for user 0 at the configured attack.
pub fn emit_analytics(config: &SystemConfig, grid: &AnalyticGrid) -> Result<Table> {
    let mut t = Table::new(ANALYTIC_COLUMNS);
    for &v in &grid.values {
        let cfg = grid.axis.apply(config, v)?;
        let w = cfg.w(0);
        let s = sinr_analytic(&cfg, 0, w);
        let mse = analytic_mse_eve(&cfg, 0, w);
        let pe = edcg_eve_power(&cfg, 0, w);
        let (a, b) = limiting_marcum_args(&cfg, 0, w);
        let row = vec![
            Cell::from(grid.axis.name()),
            Cell::Float(v),
            Cell::Float(w),
            Cell::Float(s.sinr_bob),
            Cell::Float(s.sinr_eve),
            Cell::Float(s.ratio),
            Cell::Float(mse),
            Cell::Float(mse / pe),
            Cell::Float(nmse_ideal(&cfg, 0, w)),
            Cell::Float(outage_bound_asymptotic(&cfg, 0, w, cfg.delta)),
            Cell::Float(outage_bound_exp(a, b)?),
            Cell::Float(outage_bound_tight(a, b)?.min(1.0)),
            Cell::Float(pe),
        ];
        t.push(row);
    }
    Ok(t)
}
