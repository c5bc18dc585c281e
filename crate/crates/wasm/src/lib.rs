//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! Each export is a thin wrapper over a plain function returning
//! `Result<_, String>`, so the logic is testable off the browser.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use rnfs::apstats::{bad_fraction_report_near, Verdict};
use rnfs::params::dickman_rho;
use rnfs::pipeline::{factor, parse_biguint, FactorConfig};

/// Largest input the page will factor; bigger runs stall the tab.
pub const MAX_DEMO_BITS: u64 = 40;

#[derive(Serialize)]
struct ModulusRow {
    r: u64,
    phi_r: u64,
    psi_r: u64,
    max_dev: f64,
    verdict: Verdict,
}

#[derive(Serialize)]
struct CensusSummary {
    psi: u64,
    good: usize,
    bad: usize,
    indeterminate: usize,
    good_fraction: f64,
    partition_identity_holds: bool,
    points: Vec<u64>,
    moduli: Vec<ModulusRow>,
}

pub fn rho_value(u: f64) -> Result<f64, String> {
    dickman_rho(u).map_err(|e| e.to_string())
}

pub fn census_json(
    r_min: u32,
    r_max: u32,
    smooth: u32,
    x_lo: u32,
    x_hi: u32,
    y: u32,
    eps: f64,
) -> Result<String, String> {
    let rep =
        bad_fraction_report_near(r_min.into(), r_max.into(), smooth.into(), x_lo.into(), x_hi.into(), y.into(), eps)
            .map_err(|e| e.to_string())?;
    let summary = CensusSummary {
        psi: rep.psi,
        good: rep.good,
        bad: rep.bad,
        indeterminate: rep.indeterminate,
        good_fraction: rep.good_fraction,
        partition_identity_holds: rep.partition_identity_holds,
        points: rep.moduli.first().map(|m| m.xs.clone()).unwrap_or_default(),
        moduli: rep
            .moduli
            .iter()
            .map(|m| ModulusRow { r: m.r, phi_r: m.phi_r, psi_r: m.psi_r, max_dev: m.max_dev, verdict: m.verdict })
            .collect(),
    };
    serde_json::to_string(&summary).map_err(|e| e.to_string())
}

pub fn factor_json(n: &str, seed: u32) -> Result<String, String> {
    let n = parse_biguint(n).map_err(|e| e.to_string())?;
    if n.bits() > MAX_DEMO_BITS {
        return Err(format!("the demo accepts at most {MAX_DEMO_BITS}-bit inputs"));
    }
    let cfg = FactorConfig { seed: seed.into(), workers: 1, ..Default::default() };
    let report = factor(&n, &cfg).map_err(|e| e.to_string())?;
    serde_json::to_string_pretty(&report).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn rho(u: f64) -> Result<f64, JsError> {
    rho_value(u).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = apCensus)]
pub fn ap_census(
    r_min: u32,
    r_max: u32,
    smooth: u32,
    x_lo: u32,
    x_hi: u32,
    y: u32,
    eps: f64,
) -> Result<String, JsError> {
    census_json(r_min, r_max, smooth, x_lo, x_hi, y, eps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = factorReport)]
pub fn factor_report(n: &str, seed: u32) -> Result<String, JsError> {
    factor_json(n, seed).map_err(|e| JsError::new(&e))
}
