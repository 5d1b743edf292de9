//! Truncated q-expansions of concrete test forms (eta quotients and the
//! Jacobi theta series), point evaluation with tail certificates, sup norms,
//! and numerical extraction of the nebentypus and the Fricke eigenvalue.

use crate::arith::{cocycle_j, factorize, kronecker, IntegerMatrix2x2};
use num_complex::Complex64;
use num_integer::Integer;
use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum QexpError {
    #[error("leading q-power {num}/{den} is not an integer")]
    NonIntegralLeadingPower { num: i64, den: i64 },
    #[error("negative leading q-power {0}")]
    PoleAtInfinity(i64),
    #[error("eta quotient has non-positive weight {0}/2")]
    NonPositiveWeight(i64),
    #[error("integer overflow while expanding coefficient {0}")]
    Overflow(u64),
    #[error("tail bound {tail:e} exceeds tolerance {tol:e} at Im z = {im}")]
    PrecisionFailure { tail: f64, tol: f64, im: f64 },
    #[error("invalid eta quotient spec: {0}")]
    InvalidSpec(String),
    #[error("nebentypus of this form is unknown")]
    UnknownNebentypus,
    #[error("cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `Π η(m z)^e` as a list of `(m, e)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EtaQuotientSpec {
    pub factors: Vec<(u64, i64)>,
}

impl EtaQuotientSpec {
    pub fn new(factors: Vec<(u64, i64)>) -> Self {
        let mut merged: Vec<(u64, i64)> = Vec::new();
        let mut f = factors;
        f.sort();
        for (m, e) in f {
            match merged.last_mut() {
                Some(last) if last.0 == m => last.1 += e,
                _ => merged.push((m, e)),
            }
        }
        merged.retain(|&(_, e)| e != 0);
        Self { factors: merged }
    }

    pub fn two_k(&self) -> i64 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    /// Leading q-power as the fraction `Σ m e / 24`.
    pub fn leading_power(&self) -> (i64, i64) {
        let num: i64 = self.factors.iter().map(|&(m, e)| m as i64 * e).sum();
        let g = num.gcd(&24).max(1);
        (num / g, 24 / g)
    }

    /// Least `N` with `m | N` for all factors, `24 | Σ (N/m) e`, and `4 | N` in
    /// half-integral weight.
    pub fn level(&self) -> u64 {
        let l = self.factors.iter().fold(1u64, |acc, &(m, _)| acc.lcm(&m));
        (1..)
            .map(|t| l * t)
            .find(|&n| {
                let s: i64 = self.factors.iter().map(|&(m, e)| (n / m) as i64 * e).sum();
                s.rem_euclid(24) == 0 && (self.two_k() % 2 == 0 || n % 4 == 0)
            })
            .unwrap()
    }
}

impl fmt::Display for EtaQuotientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(m, e)| format!("{m}^{e}"))
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl FromStr for EtaQuotientSpec {
    type Err = QexpError;

    /// Parses `"8^3"`, `"1^2*22^1"`, `"eta(8z)^3"`, `"eta(z)^2*eta(22z)"`, or
    /// `"1"` for the empty product. Factors may also be separated by spaces.
    fn from_str(s: &str) -> Result<Self, QexpError> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Self::default());
        }
        let bad = || QexpError::InvalidSpec(s.to_string());
        let factors = s
            .split(|c: char| c == '*' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .map(|part| {
                let (m, e) = match part.strip_prefix("eta(") {
                    Some(rest) => {
                        let (inner, tail) = rest.split_once(')').ok_or_else(bad)?;
                        let m = inner.strip_suffix('z').ok_or_else(bad)?;
                        let m = if m.is_empty() { "1" } else { m };
                        let e = match tail {
                            "" => "1",
                            t => t.strip_prefix('^').ok_or_else(bad)?,
                        };
                        (m, e)
                    }
                    None => part.split_once('^').unwrap_or((part, "1")),
                };
                let m: u64 = m.parse().map_err(|_| bad())?;
                let e: i64 = e.parse().map_err(|_| bad())?;
                if m == 0 {
                    return Err(bad());
                }
                Ok((m, e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(factors))
    }
}

/// Sparse truncated expansion `f(z) = Σ_{n ≤ M} a(n) e(nz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QExpansion {
    two_k: u32,
    level: u64,
    nebentypus: Option<i64>,
    truncation: u64,
    terms: Vec<(u64, Complex64)>,
    eta: Option<(EtaQuotientSpec, Complex64)>,
}

impl QExpansion {
    /// Builds an expansion from explicit `(n, a(n))` pairs with `n ≤ truncation`.
    pub fn from_terms(
        two_k: u32,
        level: u64,
        truncation: u64,
        terms: Vec<(u64, Complex64)>,
    ) -> Self {
        let mut terms: Vec<_> = terms
            .into_iter()
            .filter(|&(n, a)| n <= truncation && a != Complex64::new(0.0, 0.0))
            .collect();
        terms.sort_by_key(|t| t.0);
        Self {
            two_k,
            level,
            nebentypus: None,
            truncation,
            terms,
            eta: None,
        }
    }

    pub fn with_nebentypus(mut self, d: i64) -> Self {
        self.nebentypus = Some(d);
        self
    }

    pub fn two_k(&self) -> u32 {
        self.two_k
    }

    pub fn weight(&self) -> f64 {
        self.two_k as f64 / 2.0
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    /// Discriminant `D` of the nebentypus `d ↦ (D/d)`, when known.
    pub fn nebentypus(&self) -> Option<i64> {
        self.nebentypus
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    /// Nonzero coefficients in increasing order of `n`.
    pub fn terms(&self) -> &[(u64, Complex64)] {
        &self.terms
    }

    pub fn eta_spec(&self) -> Option<&EtaQuotientSpec> {
        self.eta.as_ref().map(|(s, _)| s)
    }

    pub fn coeff(&self, n: u64) -> Complex64 {
        match self.terms.binary_search_by_key(&n, |t| t.0) {
            Ok(i) => self.terms[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.1 *= c;
        }
        out.terms.retain(|t| t.1 != Complex64::new(0.0, 0.0));
        if let Some((_, s)) = &mut out.eta {
            *s *= c;
        }
        out
    }

    /// Coefficient-wise sum; the result keeps no eta-quotient structure.
    pub fn add(&self, other: &Self) -> Self {
        let m = self.truncation.min(other.truncation);
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(u64, Complex64)> = Vec::new();
        for (n, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == n => last.1 += a,
                _ => merged.push((n, a)),
            }
        }
        let mut out = Self::from_terms(self.two_k, self.level.lcm(&other.level), m, merged);
        out.nebentypus = (self.nebentypus == other.nebentypus)
            .then_some(self.nebentypus)
            .flatten();
        out
    }

    /// The same form truncated at `m ≤ M`.
    pub fn truncated(&self, m: u64) -> Self {
        let mut out = self.clone();
        out.truncation = m.min(self.truncation);
        out.terms.retain(|t| t.0 <= out.truncation);
        out
    }

    /// Envelope `|a(n)| ≤ A n^p` fitted to the known coefficients, with
    /// `p = max(k, 1)` and a safety factor of 2.
    fn envelope(&self) -> (f64, f64) {
        let p = self.weight().max(1.0);
        let a = self
            .terms
            .iter()
            .map(|&(n, c)| c.norm() / (n.max(1) as f64).powf(p))
            .fold(0.0, f64::max);
        (2.0 * a, p)
    }

    /// Upper bound for `Σ_{n > M} |a(n)| e^{−2πny}` from the coefficient envelope.
    pub fn tail_bound(&self, y: f64) -> f64 {
        let (a, p) = self.envelope();
        if a == 0.0 {
            return 0.0;
        }
        let m1 = (self.truncation + 1) as f64;
        let r = (-2.0 * PI * y).exp();
        let rho = r * (1.0 + 1.0 / m1).powf(p);
        if rho >= 1.0 {
            return f64::INFINITY;
        }
        a * (p * m1.ln() + m1 * r.ln()).exp() / (1.0 - rho)
    }

    /// `Σ a(n) e(nz)` and its tail bound.
    pub fn evaluate_with_bound(&self, z: Complex64) -> (Complex64, f64) {
        let w = Complex64::new(0.0, 2.0 * PI) * z;
        let v = self
            .terms
            .iter()
            .map(|&(n, a)| a * (w * n as f64).exp())
            .sum();
        (v, self.tail_bound(z.im))
    }
}

/// The Jacobi theta series `Θ(z) = Σ_{n ∈ ℤ} e(n²z)`, weight 1/2 and level 4.
pub fn theta_series(m: u64) -> QExpansion {
    let mut terms = vec![(0, Complex64::new(1.0, 0.0))];
    let mut n = 1u64;
    while n * n <= m {
        terms.push((n * n, Complex64::new(2.0, 0.0)));
        n += 1;
    }
    QExpansion::from_terms(1, 4, m, terms).with_nebentypus(1)
}

fn integral_leading_power(spec: &EtaQuotientSpec) -> Result<u64, QexpError> {
    let (num, den) = spec.leading_power();
    if den != 1 {
        return Err(QexpError::NonIntegralLeadingPower { num, den });
    }
    if num < 0 {
        return Err(QexpError::PoleAtInfinity(num));
    }
    Ok(num as u64)
}

/// Generalized pentagonal exponents `j(3j−1)/2` with signs `(−1)^j`, `j ≠ 0`.
fn pentagonal(limit: u64) -> Vec<(u64, i128)> {
    let mut out = Vec::new();
    for j in 1i64.. {
        let p1 = (j * (3 * j - 1) / 2) as u64;
        if p1 > limit {
            break;
        }
        let s = if j % 2 == 0 { 1 } else { -1 };
        out.push((p1, s));
        let p2 = (j * (3 * j + 1) / 2) as u64;
        if p2 <= limit {
            out.push((p2, s));
        }
    }
    out
}

/// Exact expansion by repeated multiplication and division by `Π(1 − q^{mn})`.
fn expand_by_convolution(
    spec: &EtaQuotientSpec,
    m_trunc: u64,
) -> Result<Vec<(u64, i128)>, QexpError> {
    let lead = integral_leading_power(spec)?;
    if m_trunc < lead {
        return Ok(Vec::new());
    }
    let g = spec
        .factors
        .iter()
        .fold(0u64, |acc, &(m, _)| acc.gcd(&m))
        .max(1);
    let len = ((m_trunc - lead) / g) as usize;
    let pent_for = |m: u64| -> Vec<(usize, i128)> {
        let step = (m / g) as usize;
        pentagonal((len / step) as u64)
            .into_iter()
            .map(|(p, s)| (p as usize * step, s))
            .collect()
    };
    let overflow = |n: usize| QexpError::Overflow(lead + n as u64 * g);

    // Positive powers as sparse products, densest factor first so the late
    // multiplications are by the sparse factors.
    let mut positive: Vec<u64> = spec
        .factors
        .iter()
        .filter(|f| f.1 > 0)
        .flat_map(|&(m, e)| std::iter::repeat_n(m, e as usize))
        .collect();
    positive.sort_unstable();
    let mut c = vec![0i128; len + 1];
    c[0] = 1;
    let mut support = vec![0usize];
    for m in positive {
        let pent = pent_for(m);
        let mut next = vec![0i128; len + 1];
        for &i in &support {
            let a = c[i];
            for &(p, s) in std::iter::once(&(0, 1))
                .chain(&pent)
                .take_while(|&&(p, _)| i + p <= len)
            {
                let t = a.checked_mul(s).ok_or_else(|| overflow(i + p))?;
                next[i + p] = next[i + p].checked_add(t).ok_or_else(|| overflow(i + p))?;
            }
        }
        c = next;
        support = (0..=len).filter(|&n| c[n] != 0).collect();
    }
    for &(m, e) in spec.factors.iter().filter(|f| f.1 < 0) {
        let pent = pent_for(m);
        for _ in 0..e.unsigned_abs() {
            for n in 1..=len {
                let mut acc = c[n];
                for &(p, s) in pent.iter().take_while(|&&(p, _)| p <= n) {
                    acc = acc.checked_sub(s * c[n - p]).ok_or_else(|| overflow(n))?;
                }
                c[n] = acc;
            }
        }
    }
    Ok(c.into_iter()
        .enumerate()
        .filter(|&(_, v)| v != 0)
        .map(|(j, v)| (lead + j as u64 * g, v))
        .collect())
}

/// Sparse closed forms for `η(mz)` (Euler) and `η(mz)³` (Jacobi).
fn expand_closed_form(spec: &EtaQuotientSpec, m_trunc: u64) -> Option<Vec<(u64, i128)>> {
    let [(m, e)] = spec.factors[..] else {
        return None;
    };
    let mut out = Vec::new();
    match e {
        1 if m % 24 == 0 => {
            for n in 1u64.. {
                let exp = m / 24 * n * n;
                if exp > m_trunc {
                    break;
                }
                let s = kronecker(12, n as i64);
                if s != 0 {
                    out.push((exp, s as i128));
                }
            }
        }
        3 if m % 8 == 0 => {
            for n in (1u64..).step_by(2) {
                let exp = m / 8 * n * n;
                if exp > m_trunc {
                    break;
                }
                let s = if n % 4 == 1 { 1 } else { -1 };
                out.push((exp, s * n as i128));
            }
        }
        _ => return None,
    }
    Some(out)
}

fn expand_raw(spec: &EtaQuotientSpec, m_trunc: u64) -> Result<QExpansion, QexpError> {
    let two_k = spec.two_k();
    if two_k <= 0 && !spec.factors.is_empty() {
        return Err(QexpError::NonPositiveWeight(two_k));
    }
    let exact = match expand_closed_form(spec, m_trunc) {
        Some(v) => v,
        None => expand_by_convolution(spec, m_trunc)?,
    };
    let terms = exact
        .into_iter()
        .map(|(n, v)| (n, Complex64::new(v as f64, 0.0)))
        .collect();
    let level = spec.level();
    let mut f = QExpansion::from_terms(two_k.max(0) as u32, level, m_trunc, terms);
    f.eta = Some((spec.clone(), Complex64::new(1.0, 0.0)));
    Ok(f)
}

/// Expands `Π η(m z)^e` to `q^M` in exact integer arithmetic.
///
/// The level follows the usual eta-quotient criteria. The nebentypus is found
/// by [`nebentypus_probe`] when the level is small enough to probe cheaply.
pub fn expand_eta_quotient(spec: &EtaQuotientSpec, m_trunc: u64) -> Result<QExpansion, QexpError> {
    let mut f = expand_raw(spec, m_trunc)?;
    if spec.factors.is_empty() {
        f.level = 1;
        f.nebentypus = Some(1);
        return Ok(f);
    }
    if f.level % 4 == 0 && f.level <= 20_000 {
        let need = 8 * f.level;
        let probe_form = if m_trunc >= need {
            f.clone()
        } else {
            expand_raw(spec, need)?
        };
        f.nebentypus = nebentypus_probe(&probe_form)?;
    }
    Ok(f)
}

/// `A(n) = a(n) n^{−(k−1)/2}`, densely indexed by `n = 0..=M` with `A(0) = 0`.
pub fn normalized_coeffs(f: &QExpansion) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); f.truncation as usize + 1];
    for (n, a) in normalized_terms(f) {
        out[n as usize] = a;
    }
    out
}

/// Nonzero `(n, A(n))` for `n ≥ 1`.
pub fn normalized_terms(f: &QExpansion) -> Vec<(u64, Complex64)> {
    let e = (f.weight() - 1.0) / 2.0;
    f.terms
        .iter()
        .filter(|t| t.0 > 0)
        .map(|&(n, a)| (n, a / (n as f64).powf(e)))
        .collect()
}

/// `f(z)`, failing if the certified tail exceeds `tol`.
pub fn evaluate(f: &QExpansion, z: Complex64, tol: f64) -> Result<Complex64, QexpError> {
    let (v, tail) = f.evaluate_with_bound(z);
    if tail > tol {
        return Err(QexpError::PrecisionFailure {
            tail,
            tol,
            im: z.im,
        });
    }
    Ok(v)
}

/// Maps `τ` into the standard fundamental domain of `SL₂(ℤ)`.
fn reduce_to_fundamental(mut tau: Complex64) -> Complex64 {
    for _ in 0..10_000 {
        tau.re -= tau.re.round();
        if tau.norm_sqr() < 1.0 - 1e-13 {
            tau = -1.0 / tau;
        } else {
            break;
        }
    }
    tau
}

/// `log(|η(τ)|² (Im τ)^{1/2})`, an `SL₂(ℤ)`-invariant function.
fn log_eta_invariant(tau: Complex64) -> f64 {
    let t = reduce_to_fundamental(tau);
    let w = Complex64::new(0.0, 2.0 * PI) * t;
    let mut s = Complex64::new(1.0, 0.0);
    for (p, sign) in pentagonal(200) {
        let term = (w * p as f64).exp();
        s += term * sign as f64;
        if term.norm() < 1e-18 {
            break;
        }
    }
    2.0 * ((w / 24.0).exp() * s).norm().ln() + 0.5 * t.im.ln()
}

/// Representatives `γ` of `Γ₀(N)\SL₂(ℤ)`, one per point of `P¹(ℤ/N)`.
pub fn coset_representatives(n: u64) -> Vec<IntegerMatrix2x2> {
    // P¹ over each prime power, combined by CRT.
    let mut rows: Vec<(u64, u64, u64)> = vec![(0, 1, 1)];
    for (p, e) in factorize(n) {
        let pe = p.pow(e);
        let mut local = Vec::new();
        for d in 0..pe {
            local.push((1, d));
        }
        for c in 0..pe / p {
            local.push((p * c, 1));
        }
        let mut next = Vec::new();
        for &(c0, d0, m0) in &rows {
            for &(c1, d1) in &local {
                let crt = |x0: u64, x1: u64| -> u64 {
                    let inv =
                        crate::arith::mod_inverse((m0 % pe) as i64, pe as i64).unwrap() as u64;
                    let t = ((x1 + pe - x0 % pe) % pe) * inv % pe;
                    x0 + m0 * t
                };
                next.push((crt(c0, c1), crt(d0, d1), m0 * pe));
            }
        }
        rows = next;
    }
    rows.into_iter()
        .map(|(c, d, _)| {
            let (c, d) = (c as i64, d as i64);
            let c = if c == 0 { n as i64 } else { c };
            let d = (0..)
                .map(|t| d + t * n as i64)
                .find(|&d| d.gcd(&c) == 1)
                .unwrap();
            IntegerMatrix2x2::from_bottom_row(c, d).unwrap()
        })
        .collect()
}

/// Result of a sup-norm search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNormEstimate {
    pub value: f64,
    pub argmax: Complex64,
    /// Spacing of the base grid on the `SL₂(ℤ)` fundamental domain.
    pub grid_step: f64,
    pub evaluations: usize,
}

/// Estimate of `sup_ℍ |f(z)| y^{k/2}`.
///
/// Eta quotients are handled exactly through the invariant `|η|² y^{1/2}`,
/// searching the images of a grid on the `SL₂(ℤ)` fundamental domain under
/// coset representatives of `Γ₀(N)`, then refining locally. Other forms are
/// scanned on `0 ≤ x ≤ 1` down to the height where the expansion is accurate,
/// which yields a lower estimate.
pub fn sup_norm_estimate(f: &QExpansion) -> SupNormEstimate {
    if f.is_zero() {
        return SupNormEstimate {
            value: 0.0,
            argmax: Complex64::new(0.0, 1.0),
            grid_step: 0.0,
            evaluations: 0,
        };
    }
    match &f.eta {
        Some((spec, scale)) => sup_norm_eta(spec, *scale, f.level),
        None => sup_norm_strip(f),
    }
}

fn log_weighted_eta(spec: &EtaQuotientSpec, log_scale: f64, z: Complex64) -> f64 {
    spec.factors.iter().fold(log_scale, |acc, &(m, e)| {
        acc + e as f64 * (0.5 * log_eta_invariant(z * m as f64) - 0.25 * (m as f64).ln())
    })
}

fn sup_norm_eta(spec: &EtaQuotientSpec, scale: Complex64, level: u64) -> SupNormEstimate {
    let log_scale = scale.norm().ln();
    let nx = 24;
    let ny = 60;
    let y_max = (2.0 * level as f64).max(4.0);
    let reps = coset_representatives(level);
    let mut evaluations = 0;
    let mut candidates: Vec<(f64, Complex64)> = Vec::new();
    for g in &reps {
        let mut best = (f64::NEG_INFINITY, Complex64::new(0.0, 1.0));
        for ix in 0..=nx {
            let x = -0.5 + ix as f64 / nx as f64;
            let y0 = (1.0 - x * x).sqrt();
            for iy in 0..ny {
                let y = y0 * (y_max / y0).powf(iy as f64 / (ny - 1) as f64);
                let w = g.act(Complex64::new(x, y));
                let v = log_weighted_eta(spec, log_scale, w);
                evaluations += 1;
                if v > best.0 {
                    best = (v, w);
                }
            }
        }
        candidates.push(best);
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    candidates.truncate(6);
    let mut best = candidates[0];
    for &(v0, w0) in &candidates {
        let (mut v, mut w) = (v0, w0);
        let mut h = 0.05;
        while h > 1e-7 {
            let mut improved = false;
            for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
                let cand = Complex64::new(w.re + dx * h * w.im, w.im * (dy * h).exp());
                let cv = log_weighted_eta(spec, log_scale, cand);
                evaluations += 1;
                if cv > v {
                    v = cv;
                    w = cand;
                    improved = true;
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        if v > best.0 {
            best = (v, w);
        }
    }
    SupNormEstimate {
        value: best.0.exp(),
        argmax: best.1,
        grid_step: 1.0 / nx as f64,
        evaluations,
    }
}

fn sup_norm_strip(f: &QExpansion) -> SupNormEstimate {
    let k = f.weight();
    let mut y_lo = 0.05;
    while f.tail_bound(y_lo) > 1e-10 {
        y_lo *= 1.25;
    }
    let (nx, ny) = (64, 64);
    let mut best = (0.0, Complex64::new(0.0, 1.0));
    let mut evaluations = 0;
    for ix in 0..nx {
        let x = ix as f64 / nx as f64;
        for iy in 0..ny {
            let y = y_lo * (40.0f64).powf(iy as f64 / (ny - 1) as f64);
            let z = Complex64::new(x, y);
            let v = f.evaluate_with_bound(z).0.norm() * y.powf(k / 2.0);
            evaluations += 1;
            if v > best.0 {
                best = (v, z);
            }
        }
    }
    SupNormEstimate {
        value: best.0,
        argmax: best.1,
        grid_step: 1.0 / nx as f64,
        evaluations,
    }
}

fn squarefree_candidates(level: u64) -> Vec<i64> {
    let primes: Vec<u64> = factorize(level).into_iter().map(|(p, _)| p).collect();
    let mut out = Vec::new();
    for mask in 0..(1u32 << primes.len()) {
        let d: u64 = (0..primes.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| primes[i])
            .product();
        out.push(d as i64);
        out.push(-(d as i64));
    }
    out.sort_by_key(|d| (d.abs(), -d.signum()));
    out
}

/// Numerically identifies `D` with `f(γz) = (D/d) j(γ,z)^{2k} f(z)` on `Γ₀(N)`.
///
/// Uses `γ = [[a, b], [N, d]]` at `z = −d/N + i/N`, where `Im z = Im γz = 1/N`,
/// so `f` needs about `8N` coefficients. Returns `None` if no quadratic
/// character built from the primes of `N` fits.
pub fn nebentypus_probe(f: &QExpansion) -> Result<Option<i64>, QexpError> {
    let n = f.level as i64;
    if n % 4 != 0 {
        return Ok(None);
    }
    let mut observed = Vec::new();
    for d in crate::arith::primes_up_to(400)
        .into_iter()
        .map(|p| p as i64)
    {
        if n.gcd(&d) != 1 {
            continue;
        }
        let g = IntegerMatrix2x2::from_bottom_row(n, d).unwrap();
        let z = Complex64::new(-d as f64 / n as f64, 1.0 / n as f64);
        let fz = evaluate(f, z, 1e-9)?;
        let fgz = evaluate(f, g.act(z), 1e-9)?;
        let j = cocycle_j(&g, z).expect("γ in Γ₀(N) with 4 | N");
        let ratio = fgz / (j.powi(f.two_k as i32) * fz);
        observed.push((d, ratio));
        if observed.len() >= 24 {
            break;
        }
    }
    Ok(squarefree_candidates(f.level).into_iter().find(|&cand| {
        observed
            .iter()
            .all(|&(d, r)| (r - kronecker(cand, d) as f64).norm() < 1e-6)
    }))
}

/// Empirical eigenvalue of `W̃_N f(z) = i^{−k} N^{k/2} (Nz)^{−k} f(−1/(Nz))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrickeEigenvalue {
    pub value: Complex64,
    /// Spread of the ratio `W̃_N f / f` over the sample points.
    pub residual: f64,
}

/// Extracts the Fricke eigenvalue from `W̃_N f / f` at several points away
/// from the fixed point `i/√N`, where the ratio carries no information.
pub fn fricke_eigenvalue(f: &QExpansion) -> Result<FrickeEigenvalue, QexpError> {
    let n = f.level as f64;
    let k = f.weight();
    let rt = n.sqrt();
    let pts = [
        Complex64::new(0.0, 1.3 / rt),
        Complex64::new(0.0, 1.7 / rt),
        Complex64::new(0.11 / rt, 1.2 / rt),
        Complex64::new(-0.23 / rt, 1.45 / rt),
    ];
    let mut ratios = Vec::new();
    for z in pts {
        let nz = z * n;
        let w = -1.0 / nz;
        let lhs = Complex64::from_polar(1.0, -PI * k / 2.0)
            * n.powf(k / 2.0)
            * nz.powf(-k)
            * evaluate(f, w, 1e-12)?;
        ratios.push(lhs / evaluate(f, z, 1e-12)?);
    }
    let mean = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
    let residual = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max);
    Ok(FrickeEigenvalue {
        value: mean,
        residual,
    })
}

/// Writes the nonzero coefficients as CSV with a commented metadata header.
/// Floats use the shortest representation that parses back bit-exactly.
pub fn write_cache(path: &Path, f: &QExpansion) -> Result<(), QexpError> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        let spec = f
            .eta_spec()
            .map(|s| s.to_string())
            .unwrap_or_else(|| "-".into());
        let neb = f
            .nebentypus
            .map(|d| d.to_string())
            .unwrap_or_else(|| "-".into());
        writeln!(
            w,
            "# two_k={} level={} truncation={} nebentypus={} spec={}",
            f.two_k, f.level, f.truncation, neb, spec
        )?;
        writeln!(w, "n,re,im")?;
        for &(n, a) in &f.terms {
            writeln!(w, "{n},{},{}", a.re, a.im)?;
        }
        w.flush()?;
    }
    std::fs::rename(tmp, path)?;
    Ok(())
}

pub fn read_cache(path: &Path) -> Result<QExpansion, QexpError> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut lines = file.lines();
    let bad = |m: &str| QexpError::Cache(m.to_string());
    let header = lines.next().ok_or_else(|| bad("empty file"))??;
    let mut meta = std::collections::HashMap::new();
    for kv in header.trim_start_matches('#').split_whitespace() {
        if let Some((k, v)) = kv.split_once('=') {
            meta.insert(k.to_string(), v.to_string());
        }
    }
    let get = |k: &str| {
        meta.get(k)
            .cloned()
            .ok_or_else(|| bad(&format!("missing {k}")))
    };
    let two_k: u32 = get("two_k")?.parse().map_err(|_| bad("two_k"))?;
    let level: u64 = get("level")?.parse().map_err(|_| bad("level"))?;
    let truncation: u64 = get("truncation")?.parse().map_err(|_| bad("truncation"))?;
    let neb = get("nebentypus")?;
    let spec = get("spec")?;
    if lines.next().transpose()?.as_deref() != Some("n,re,im") {
        return Err(bad("missing column header"));
    }
    let mut terms = Vec::new();
    for line in lines {
        let line = line?;
        let mut it = line.split(',');
        let mut next = || it.next().ok_or_else(|| bad("short row"));
        let n: u64 = next()?.parse().map_err(|_| bad("n"))?;
        let re: f64 = next()?.parse().map_err(|_| bad("re"))?;
        let im: f64 = next()?.parse().map_err(|_| bad("im"))?;
        terms.push((n, Complex64::new(re, im)));
    }
    let mut f = QExpansion::from_terms(two_k, level, truncation, terms);
    if neb != "-" {
        f.nebentypus = Some(neb.parse().map_err(|_| bad("nebentypus"))?);
    }
    if spec != "-" {
        f.eta = Some((spec.parse()?, Complex64::new(1.0, 0.0)));
    }
    Ok(f)
}
