//! The central-value sweep: `max_χ |L(1/2, f, χ)|` over a range of moduli and
//! a log-log fit of the maxima against `Q`.

use crate::cache::CoeffCache;
use crate::config::{CharacterPolicy, SweepConfig};
use crate::error::CliError;
use crate::util::{fmt_f64, fricke, load_form};
use halfint::amplifier::fit_loglog;
use halfint::arith::is_prime;
use halfint::chars::enumerate_characters;
use halfint::lfunc::{central_prefactor, default_split, TwistContext};
use halfint::qexp::QExpansion;
use num_complex::Complex64;
use num_integer::Integer;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

pub const SCAN_HEADER: [&str; 8] = [
    "Q",
    "chi_index",
    "re",
    "im",
    "abs",
    "truncation_error",
    "status",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub q: u64,
    /// Position in the enumeration of all characters modulo `Q`; `None` when
    /// the whole modulus failed.
    pub chi_index: Option<usize>,
    pub value: Option<Complex64>,
    pub truncation_error: f64,
    pub status: String,
}

impl ScanRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub form: String,
    pub level: u64,
    pub budget: u64,
    pub seed: u64,
    pub moduli: usize,
    pub points: usize,
    pub failures: usize,
    /// `(Q, max_χ |L(1/2, f, χ)|)` over moduli with at least one good point.
    pub maxima: Vec<(u64, f64)>,
    pub fitted_exponent: Option<f64>,
    pub fitted_constant: Option<f64>,
    pub convexity_exponent: f64,
    pub subconvex_exponent: f64,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub rows: Vec<ScanRow>,
    pub summary: ScanSummary,
}

pub fn moduli(config: &SweepConfig) -> Vec<u64> {
    if config.q_min > config.q_max {
        return Vec::new();
    }
    (config.q_min.max(1)..=config.q_max)
        .filter(|&q| !config.primes_only || is_prime(q))
        .collect()
}

fn selected_characters(config: &SweepConfig, q: u64, primitive: Vec<usize>) -> Vec<usize> {
    match config.characters {
        CharacterPolicy::All => primitive,
        CharacterPolicy::Sample if primitive.len() <= config.sample_size => primitive,
        CharacterPolicy::Sample => {
            let mut rng =
                ChaCha8Rng::seed_from_u64(config.seed ^ q.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let mut picked: Vec<usize> = sample(&mut rng, primitive.len(), config.sample_size)
                .into_iter()
                .map(|i| primitive[i])
                .collect();
            picked.sort_unstable();
            picked
        }
    }
}

fn failed(q: u64, chi_index: Option<usize>, status: String) -> ScanRow {
    ScanRow {
        q,
        chi_index,
        value: None,
        truncation_error: f64::NAN,
        status,
    }
}

fn scan_modulus(f: &QExpansion, eps: Complex64, q: u64, config: &SweepConfig) -> Vec<ScanRow> {
    let g = q.gcd(&f.level());
    if g > 1 {
        return vec![failed(q, None, format!("gcd(Q,N)={g}"))];
    }
    let chars = enumerate_characters(q);
    let primitive: Vec<usize> = chars
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_primitive())
        .map(|(i, _)| i)
        .collect();
    let picked = selected_characters(config, q, primitive);
    if picked.is_empty() {
        return Vec::new();
    }
    let s = Complex64::new(0.5, 0.0);
    let ctx = match TwistContext::new(f, s, q, default_split(f, q), eps) {
        Ok(c) => c,
        Err(e) => return vec![failed(q, None, e.to_string())],
    };
    let pre = match central_prefactor(f, q) {
        Ok(p) => p,
        Err(e) => return vec![failed(q, None, e.to_string())],
    };
    picked
        .into_iter()
        .map(|i| match ctx.evaluate(&chars[i]) {
            Ok(r) => {
                let value = r.value / pre;
                let err = r.truncation_error / pre.norm();
                let status = if err <= config.tolerances.lvalue_rel * value.norm().max(1e-300) {
                    "ok".to_string()
                } else {
                    "precision".to_string()
                };
                ScanRow {
                    q,
                    chi_index: Some(i),
                    value: Some(value),
                    truncation_error: err,
                    status,
                }
            }
            Err(e) => failed(q, Some(i), e.to_string()),
        })
        .collect()
}

pub fn cmd_scan(config: &SweepConfig, cache: Option<&CoeffCache>) -> Result<ScanOutput, CliError> {
    config.validate()?;
    let spec = config.spec()?;
    let level = spec.level();
    let qs = moduli(config);
    let budget = config.effective_budget(level);
    let mut summary = ScanSummary {
        form: spec.to_string(),
        level,
        budget,
        seed: config.seed,
        moduli: qs.len(),
        points: 0,
        failures: 0,
        maxima: Vec::new(),
        fitted_exponent: None,
        fitted_constant: None,
        convexity_exponent: 0.5,
        subconvex_exponent: config.subconvex_exponent(),
        theta: config.theta,
    };
    if qs.is_empty() {
        return Ok(ScanOutput {
            rows: Vec::new(),
            summary,
        });
    }
    let f = load_form(&spec, budget, cache)?;
    let eps = fricke(&f)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(CliError::usage)?;
    let per_q: Vec<Vec<ScanRow>> = pool.install(|| {
        qs.par_iter()
            .map(|&q| scan_modulus(&f, eps, q, config))
            .collect()
    });
    let rows: Vec<ScanRow> = per_q.into_iter().flatten().collect();
    summary.points = rows.len();
    summary.failures = rows.iter().filter(|r| !r.ok()).count();
    for &q in &qs {
        let best = rows
            .iter()
            .filter(|r| r.q == q && r.ok())
            .filter_map(|r| r.value.map(|v| v.norm()))
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
        if let Some(b) = best {
            summary.maxima.push((q, b));
        }
    }
    let pts: Vec<(f64, f64)> = summary
        .maxima
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(q, m)| (q as f64, m))
        .collect();
    if let Ok(fit) = fit_loglog(&pts) {
        summary.fitted_exponent = Some(fit.slope);
        summary.fitted_constant = Some(fit.constant);
    }
    Ok(ScanOutput { rows, summary })
}

pub fn write_scan_csv(rows: &[ScanRow], seed: u64, out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCAN_HEADER)?;
    for r in rows {
        let (re, im, abs) = match r.value {
            Some(v) => (fmt_f64(v.re), fmt_f64(v.im), fmt_f64(v.norm())),
            None => (String::new(), String::new(), String::new()),
        };
        w.write_record([
            r.q.to_string(),
            r.chi_index.map(|i| i.to_string()).unwrap_or_default(),
            re,
            im,
            abs,
            fmt_f64(r.truncation_error),
            r.status.clone(),
            seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
