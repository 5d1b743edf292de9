//! Thin wrappers over the library operations, each producing one CSV table.

use crate::cache::CoeffCache;
use crate::error::CliError;
use crate::util::{fmt_f64, fricke, load_form};
use crate::verify::direct_additive;
use halfint::amplifier::{amplification_inequality_check, SmoothCutoff};
use halfint::chars::{enumerate_characters, DirichletCharacter};
use halfint::geom::{poisson_power_integral, DiscCenterFrame};
use halfint::lfunc::{chi_prime, completed_l_additive, completed_l_multiplicative, default_split};
use halfint::qexp::{normalized_terms, EtaQuotientSpec, QExpansion};
use halfint::selberg::{
    forward_single_step, forward_three_step, kernel_pairing_check, localizer, localizer_h,
};
use halfint::shifted::z_q_bruteforce;
use halfint::special::{log_gamma, m_function, m_function_delta_zero, MFunctionParams, MMethod};
use num_complex::Complex64;
use std::f64::consts::PI;

type C = Complex64;

/// A CSV table held in memory; rendering is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn c2(z: C) -> [String; 2] {
    [fmt_f64(z.re), fmt_f64(z.im)]
}

pub fn cmd_coeffs(
    spec: &EtaQuotientSpec,
    m: u64,
    cache: Option<&CoeffCache>,
) -> Result<Table, CliError> {
    let f = load_form(spec, m, cache)?;
    let mut t = Table::new(&["n", "re", "im", "normalized_re", "normalized_im"]);
    let norm = normalized_terms(&f);
    for (&(n, a), &(_, an)) in f.terms().iter().zip(&norm) {
        let [re, im] = c2(a);
        let [nre, nim] = c2(an);
        t.rows.push(vec![n.to_string(), re, im, nre, nim]);
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Twist {
    /// `e(un/Q)`.
    Additive(i64),
    /// The character at this position in the enumeration modulo `Q`.
    Character(usize),
}

/// Coefficients needed for the split sums at `s` and modulus `q`, or for the
/// direct series when it is also requested.
pub fn lvalue_budget(level: u64, q: u64, s: C, direct: bool) -> u64 {
    let a = s.norm() + 1.0;
    let afe = ((60.0 + 2.0 * a) * (level as f64).sqrt() * q as f64 / (2.0 * PI)).ceil() as u64;
    if direct {
        afe.max(100_000)
    } else {
        afe
    }
}

fn character(q: u64, idx: usize) -> Result<DirichletCharacter, CliError> {
    let chars = enumerate_characters(q);
    let chi = chars
        .get(idx)
        .cloned()
        .ok_or_else(|| CliError::Usage(format!("character index {idx} out of range for Q={q}")))?;
    if !chi.is_primitive() {
        return Err(CliError::Usage(format!(
            "character {idx} mod {q} is not primitive"
        )));
    }
    Ok(chi)
}

/// `(√N Q)^s (2π)^{−a} Γ(a)`, `a = s + (k−1)/2`.
fn gamma_factor(f: &QExpansion, q: u64, s: C) -> Result<C, CliError> {
    let a = s + (f.weight() - 1.0) / 2.0;
    let lg = log_gamma(a).map_err(CliError::precision)?;
    let big = (f.level() as f64).sqrt() * q as f64;
    Ok(C::new(big, 0.0).powc(s) * (lg - a * (2.0 * PI).ln()).exp())
}

pub fn cmd_lvalue(
    spec: &EtaQuotientSpec,
    s: C,
    q: u64,
    twist: Twist,
    budget: Option<u64>,
    cache: Option<&CoeffCache>,
) -> Result<Table, CliError> {
    if q == 0 {
        return Err(CliError::Usage("Q must be positive".into()));
    }
    let direct_ok = s.re >= 2.0;
    let m = budget.unwrap_or_else(|| lvalue_budget(spec.level(), q, s, direct_ok));
    let f = load_form(spec, m, cache)?;
    let eps = fricke(&f)?;
    let (kind, label, res, direct) = match twist {
        Twist::Additive(u) => {
            let r = completed_l_additive(&f, s, u, q, default_split(&f, q), eps)
                .map_err(CliError::precision)?;
            let d = if direct_ok {
                Some(direct_additive(&f, s, u, q).map_err(CliError::Precision)?)
            } else {
                None
            };
            ("additive", u.to_string(), r, d)
        }
        Twist::Character(idx) => {
            let chi = character(q, idx)?;
            let r = completed_l_multiplicative(&f, s, &chi, eps).map_err(CliError::precision)?;
            let d = direct_ok.then(|| {
                let series: C = normalized_terms(&f)
                    .iter()
                    .filter(|t| t.0 > 0)
                    .map(|&(n, a)| a * chi.eval(n as i64) * (-s * (n as f64).ln()).exp())
                    .sum();
                series
            });
            let d = match d {
                Some(series) => Some(series * gamma_factor(&f, q, s)?),
                None => None,
            };
            ("character", idx.to_string(), r, d)
        }
    };
    let gf = gamma_factor(&f, q, s)?;
    let mut t = Table::new(&[
        "kind",
        "Q",
        "twist",
        "s_re",
        "s_im",
        "completed_re",
        "completed_im",
        "L_re",
        "L_im",
        "truncation_error",
        "direct_re",
        "direct_im",
        "direct_rel_diff",
    ]);
    let mut row = vec![kind.to_string(), q.to_string(), label];
    row.extend(c2(s));
    row.extend(c2(res.value));
    row.extend(c2(res.value / gf));
    row.push(fmt_f64(res.truncation_error));
    match direct {
        Some(d) => {
            row.extend(c2(d));
            row.push(fmt_f64((res.value - d).norm() / d.norm().max(1e-300)));
        }
        None => row.extend([String::new(), String::new(), String::new()]),
    }
    t.rows.push(row);
    Ok(t)
}

pub fn cmd_amplify(
    spec: &EtaQuotientSpec,
    q: u64,
    chi_index: usize,
    x: f64,
    l: f64,
    cache: Option<&CoeffCache>,
) -> Result<Table, CliError> {
    if !(x > 0.0 && l >= 2.0) {
        return Err(CliError::Usage("need X > 0 and L ≥ 2".into()));
    }
    if q.is_multiple_of(2) {
        return Err(CliError::Usage("Q must be odd".into()));
    }
    let f = load_form(spec, (2.0 * x).ceil() as u64 + 1, cache)?;
    let chi = character(q, chi_index)?;
    let r = amplification_inequality_check(&f, &chi, &chi_prime(&chi), SmoothCutoff, x, l)
        .map_err(CliError::usage)?;
    let mut t = Table::new(&[
        "Q",
        "chi_index",
        "X",
        "L",
        "S",
        "rhs_re",
        "rhs_im",
        "slack",
        "single_term",
        "scale",
        "holds",
    ]);
    let mut row = vec![q.to_string(), chi_index.to_string(), fmt_f64(x), fmt_f64(l)];
    row.push(fmt_f64(r.s));
    row.extend(c2(r.rhs));
    row.extend([
        fmt_f64(r.slack),
        fmt_f64(r.single_term),
        fmt_f64(r.scale),
        r.holds(1e-9).to_string(),
    ]);
    t.rows.push(row);
    Ok(t)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_shifted(
    spec: &EtaQuotientSpec,
    s: C,
    w: C,
    q: u64,
    l1: u64,
    l2: u64,
    m2_max: u64,
    h_max: u64,
    cache: Option<&CoeffCache>,
) -> Result<Table, CliError> {
    if l1 == 0 || l2 == 0 || q == 0 {
        return Err(CliError::Usage("ℓ₁, ℓ₂ and Q must be positive".into()));
    }
    let m = (l2 * m2_max + h_max * q) / l1 + 1;
    let f = load_form(spec, m, cache)?;
    let z = z_q_bruteforce(&f, s, w, q, l1, l2, m2_max, h_max).map_err(CliError::usage)?;
    let mut t = Table::new(&[
        "amplifier_re",
        "amplifier_im",
        "oldform_re",
        "oldform_im",
        "ratio",
        "tail",
    ]);
    let mut row = Vec::new();
    row.extend(c2(z.amplifier_form));
    row.extend(c2(z.oldform_form));
    row.extend([fmt_f64(z.ratio), fmt_f64(z.tail)]);
    t.rows.push(row);
    Ok(t)
}

/// Localizer transform table on `points` values of `t ∈ [0, 2T]`.
pub fn cmd_selberg(t_param: f64, points: usize) -> Result<Table, CliError> {
    let pair = localizer(t_param).map_err(CliError::usage)?;
    let ts: Vec<f64> = (0..points)
        .map(|j| 2.0 * t_param * j as f64 / (points.max(2) - 1) as f64)
        .collect();
    let three = forward_three_step(|u| pair.k(u), pair.r_max, &ts);
    let one = forward_single_step(|u| pair.k(u), pair.r_max, &ts);
    let mut t = Table::new(&["t", "h_closed", "h_three_step", "h_single_step"]);
    for ((&x, a), b) in ts.iter().zip(&three).zip(&one) {
        t.rows.push(vec![
            fmt_f64(x),
            fmt_f64(localizer_h(t_param, x)),
            fmt_f64(*a),
            fmt_f64(*b),
        ]);
    }
    Ok(t)
}

/// Measured localizer pairing `⟨|f|² y^k, k_T(u(·, z′))⟩` against its bound.
pub fn cmd_selberg_pairing(
    spec: &EtaQuotientSpec,
    ts: &[f64],
    z_prime: C,
    m: u64,
    cache: Option<&CoeffCache>,
) -> Result<Table, CliError> {
    let f = load_form(spec, m, cache)?;
    let frame = DiscCenterFrame::new(z_prime).map_err(CliError::usage)?;
    let mut t = Table::new(&["T", "value_re", "value_im", "bound", "m1", "m2", "holds"]);
    for &tp in ts {
        let r = kernel_pairing_check(&f, &f, tp, &frame, 24).map_err(CliError::precision)?;
        let mut row = vec![fmt_f64(tp)];
        row.extend(c2(r.value));
        row.extend([
            fmt_f64(r.bound),
            fmt_f64(r.m1),
            fmt_f64(r.m2),
            r.holds().to_string(),
        ]);
        t.rows.push(row);
    }
    Ok(t)
}

pub fn cmd_geom_check(ks: &[f64], hs: &[i64], rhos: &[f64]) -> Result<Table, CliError> {
    let mut t = Table::new(&["k", "h", "rho", "quadrature", "closed_form", "abs_diff"]);
    for &k in ks {
        for &h in hs {
            for &rho in rhos {
                if !(0.0..1.0).contains(&rho) || k <= 0.0 {
                    return Err(CliError::Usage(format!(
                        "need k > 0, 0 ≤ ρ < 1 (k={k}, ρ={rho})"
                    )));
                }
                let p = poisson_power_integral(k, h, rho).map_err(CliError::precision)?;
                t.rows.push(vec![
                    fmt_f64(k),
                    h.to_string(),
                    fmt_f64(rho),
                    fmt_f64(p.quadrature),
                    fmt_f64(p.closed_form),
                    fmt_f64((p.quadrature - p.closed_form).abs()),
                ]);
            }
        }
    }
    Ok(t)
}

pub fn cmd_mfun(s: C, t_order: C, delta: f64) -> Result<Table, CliError> {
    if !(0.0..1.0).contains(&delta) {
        return Err(CliError::Usage("δ must lie in [0, 1)".into()));
    }
    let mut t = Table::new(&["method", "re", "im"]);
    let p = MFunctionParams {
        s,
        t: t_order,
        delta,
    };
    let methods = [
        ("quadrature", MMethod::Quadrature),
        ("hypergeometric_far", MMethod::HypergeometricFar),
        ("hypergeometric_near", MMethod::HypergeometricNear),
    ];
    for (name, m) in methods {
        let integral_converges = delta > 0.0 && s.re > t_order.im.abs() + 0.5;
        if m == MMethod::Quadrature && !integral_converges {
            continue;
        }
        let v = m_function(p, m).map_err(CliError::precision)?;
        let mut row = vec![name.to_string()];
        row.extend(c2(v));
        t.rows.push(row);
    }
    if s.re < 1.0 {
        let lim = m_function_delta_zero(s, t_order).map_err(CliError::precision)?;
        let mut row = vec!["delta_zero_limit".to_string()];
        row.extend(c2(lim));
        t.rows.push(row);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> EtaQuotientSpec {
        s.parse().unwrap()
    }

    #[test]
    fn coeff_table_for_eta8_cubed() {
        let t = cmd_coeffs(&spec("eta(8z)^3"), 30, None).unwrap();
        let get = |n: &str| t.rows.iter().find(|r| r[0] == n).map(|r| r[1].clone());
        assert_eq!(get("1").as_deref(), Some("1.0"));
        assert_eq!(get("9").as_deref(), Some("-3.0"));
        assert_eq!(get("25").as_deref(), Some("5.0"));
        assert_eq!(get("2"), None);
        assert_eq!(t.rows.len(), 3);
    }

    #[test]
    fn lvalue_at_three_matches_direct_series() {
        let t = cmd_lvalue(
            &spec("8^3"),
            C::new(3.0, 0.0),
            1,
            Twist::Additive(0),
            None,
            None,
        )
        .unwrap();
        let d: f64 = t.rows[0][12].parse().unwrap();
        assert!(d < 1e-8, "{d}");
        let t = cmd_lvalue(
            &spec("8^3"),
            C::new(3.0, 0.0),
            7,
            Twist::Character(1),
            None,
            None,
        )
        .unwrap();
        let d: f64 = t.rows[0][12].parse().unwrap();
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn lvalue_rejects_imprimitive_characters() {
        let r = cmd_lvalue(
            &spec("8^3"),
            C::new(0.5, 0.0),
            7,
            Twist::Character(0),
            None,
            None,
        );
        assert!(matches!(r, Err(CliError::Usage(_))));
    }

    #[test]
    fn mfun_rows() {
        let t = cmd_mfun(C::new(2.0, 0.0), C::new(1.0, 0.0), 0.1).unwrap();
        assert_eq!(t.rows.len(), 3);
        let vals: Vec<C> = t.rows[..3]
            .iter()
            .map(|r| C::new(r[1].parse().unwrap(), r[2].parse().unwrap()))
            .collect();
        assert!((vals[0] - vals[1]).norm() < 1e-6 * vals[0].norm());
        assert!(cmd_mfun(C::new(2.0, 0.0), C::new(1.0, 0.0), 1.5).is_err());
        let near = cmd_mfun(C::new(0.25, 0.0), C::new(1.0, 0.0), 1e-4).unwrap();
        assert_eq!(near.rows.len(), 3);
        let v = |r: &Vec<String>| C::new(r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((v(&near.rows[1]) - v(&near.rows[2])).norm() < 1e-2 * v(&near.rows[2]).norm());
    }

    #[test]
    fn geom_rows_agree() {
        let t = cmd_geom_check(&[1.5], &[0, 3], &[0.5]).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r[5].parse::<f64>().unwrap() < 1e-8));
        assert!(cmd_geom_check(&[1.5], &[0], &[1.0]).is_err());
    }

    #[test]
    fn table_csv_is_plain() {
        let mut t = Table::new(&["a", "b"]);
        t.rows.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n1,\"x,y\"\n");
    }
}
