//! Shifted convolution Dirichlet series and the double Dirichlet series
//! `Z_Q(s, w)` inside their regions of absolute convergence, together with the
//! Eisenstein coefficients `ρ_a` that enter the continuous spectrum.

use crate::arith::{factorize, ramanujan_restricted};
use crate::qexp::{normalized_terms, QExpansion};
use crate::quad::adaptive;
use crate::special::{log_gamma, rgamma, zeta, SpecialError};
use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;

type C = Complex64;

#[derive(Debug, thiserror::Error)]
pub enum ShiftedError {
    #[error("shift h must be positive")]
    ZeroShift,
    #[error("{what} = {value} is outside the region of absolute convergence")]
    Convergence { what: &'static str, value: f64 },
    #[error("tail bound {tail:.3e} exceeds tolerance {tol:.3e}")]
    Tail { tail: f64, tol: f64 },
    #[error("forms have different weights")]
    WeightMismatch,
    #[error("gamma factor within {dist:.1e} of a pole")]
    NearPole { dist: f64 },
    #[error("level {0} is not 4 times an odd squarefree number")]
    UnsupportedLevel(u64),
    #[error("cusp parameter {w} does not divide {n}")]
    NotDivisor { w: u64, n: u64 },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Parameters shared by the series in this module. `s′ = s − 1/2 + w + (k−1)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedSeriesParams {
    pub s: C,
    pub w: C,
    pub h: u64,
    pub delta: f64,
    pub q: u64,
    pub l1: u64,
    pub l2: u64,
    pub tol: f64,
    pub s_prime: C,
}

impl ShiftedSeriesParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        s: C,
        w: C,
        h: u64,
        delta: f64,
        q: u64,
        l1: u64,
        l2: u64,
        weight: f64,
        tol: f64,
    ) -> Result<Self, ShiftedError> {
        if h == 0 {
            return Err(ShiftedError::ZeroShift);
        }
        if s.re <= 1.0 {
            return Err(ShiftedError::Convergence {
                what: "Re s",
                value: s.re,
            });
        }
        if w.re <= 1.0 {
            return Err(ShiftedError::Convergence {
                what: "Re w",
                value: w.re,
            });
        }
        let s_prime = s - 0.5 + w + (weight - 1.0) / 2.0;
        Ok(Self {
            s,
            w,
            h,
            delta,
            q,
            l1,
            l2,
            tol,
            s_prime,
        })
    }
}

/// A truncated series value with a bound for what was left out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: C,
    pub tail: f64,
}

/// `max |a(n)| / n^{(k−1)/2 + 1/4}` over the computed range: the constant in
/// the coefficient bound used by the tail estimates.
pub fn coefficient_envelope(f: &QExpansion) -> f64 {
    let e = (f.weight() - 1.0) / 2.0 + 0.25;
    f.terms()
        .iter()
        .filter(|t| t.0 > 0)
        .map(|&(n, a)| a.norm() / (n as f64).powf(e))
        .fold(0.0, f64::max)
}

fn lookup(f: &QExpansion) -> HashMap<u64, C> {
    f.terms().iter().cloned().collect()
}

/// `D(s; h) = Σ_n a(n+h) b̄(n) / n^{s+k−1}`.
pub fn d_series(
    f: &QExpansion,
    g: &QExpansion,
    s: C,
    h: u64,
    tol: f64,
) -> Result<SeriesValue, ShiftedError> {
    d_series_delta(f, g, s, h, 0.0, tol)
}

/// `D(s; h; δ) = Σ_n a(n+h) b̄(n) / (n + hδ/2)^{s+k−1}`.
pub fn d_series_delta(
    f: &QExpansion,
    g: &QExpansion,
    s: C,
    h: u64,
    delta: f64,
    tol: f64,
) -> Result<SeriesValue, ShiftedError> {
    if h == 0 {
        return Err(ShiftedError::ZeroShift);
    }
    if f.two_k() != g.two_k() {
        return Err(ShiftedError::WeightMismatch);
    }
    if s.re <= 1.0 {
        return Err(ShiftedError::Convergence {
            what: "Re s",
            value: s.re,
        });
    }
    let k = f.weight();
    let fa = lookup(f);
    let top = f.truncation().saturating_sub(h).min(g.truncation());
    let expo = s + k - 1.0;
    let shift = h as f64 * delta / 2.0;
    let mut value = C::new(0.0, 0.0);
    for &(n, b) in g.terms() {
        if n == 0 || n > top {
            continue;
        }
        if let Some(&a) = fa.get(&(n + h)) {
            value += a * b.conj() * (-expo * (n as f64 + shift).ln()).exp();
        }
    }
    let e = (k - 1.0) / 2.0 + 0.25;
    let tail = if s.re > 1.5 && top > 0 {
        let m = top as f64;
        coefficient_envelope(f)
            * coefficient_envelope(g)
            * (1.0 + h as f64 / m).powf(e)
            * m.powf(1.5 - s.re)
            / (s.re - 1.5)
    } else {
        f64::INFINITY
    };
    if tail > tol {
        return Err(ShiftedError::Tail { tail, tol });
    }
    Ok(SeriesValue { value, tail })
}

/// One term of `Z_Q`: `x = ℓ₂m₂`, `y = hQ`, `c = A(m₁)Ā(m₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZqTerm {
    pub x: u64,
    pub y: u64,
    pub c: C,
}

/// All solutions of `ℓ₁m₁ = ℓ₂m₂ + hQ`, `h > 0`, with `m₁, m₂` in the support
/// of the normalized coefficients `coeffs`.
pub fn zq_terms(coeffs: &[(u64, C)], q: u64, l1: u64, l2: u64) -> Vec<ZqTerm> {
    let mut out = Vec::new();
    for &(m2, a2) in coeffs {
        for &(m1, a1) in coeffs {
            let (left, right) = (m1 * l1, m2 * l2);
            if left > right && (left - right) % q == 0 {
                out.push(ZqTerm {
                    x: right,
                    y: left - right,
                    c: a1 * a2.conj(),
                });
            }
        }
    }
    out
}

/// `Σ c (1 + y/x)^{(k−1)/2} x^{−s} y^{−w−(k−1)/2}` over the given terms.
pub fn zq_from_terms(terms: &[ZqTerm], weight: f64, s: C, w: C) -> C {
    let kappa = (weight - 1.0) / 2.0;
    terms
        .iter()
        .map(|t| {
            let (x, y) = (t.x as f64, t.y as f64);
            t.c * ((1.0 + y / x).ln() * kappa - s * x.ln() - (w + kappa) * y.ln()).exp()
        })
        .sum()
}

/// `Z_Q` in both normalizations on the same truncated range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZqValue {
    /// Summed over `ℓ₁m₁ = ℓ₂m₂ + hQ` with normalized coefficients.
    pub amplifier_form: C,
    /// `Σ_h Σ_n F(n+hQ) Ḡ(n) n^{−s−k+1} (hQ)^{−w−(k−1)/2}` with `F = f(ℓ₁·)`, `G = f(ℓ₂·)`.
    pub oldform_form: C,
    /// `(ℓ₁ℓ₂)^{(k−1)/2}`, the ratio `amplifier_form / oldform_form`.
    pub ratio: f64,
    /// Bound for terms with `m₂ > m2_max` or `h > h_max`.
    pub tail: f64,
}

/// Truncated `Z_Q(s, w)` summed over `m₂ ≤ m2_max`, `h ≤ h_max`.
#[allow(clippy::too_many_arguments)]
pub fn z_q_bruteforce(
    f: &QExpansion,
    s: C,
    w: C,
    q: u64,
    l1: u64,
    l2: u64,
    m2_max: u64,
    h_max: u64,
) -> Result<ZqValue, ShiftedError> {
    let k = f.weight();
    let kappa = (k - 1.0) / 2.0;
    if s.re <= 1.5 {
        return Err(ShiftedError::Convergence {
            what: "Re s",
            value: s.re,
        });
    }
    if w.re <= 1.25 + (-kappa).max(0.0) {
        return Err(ShiftedError::Convergence {
            what: "Re w",
            value: w.re,
        });
    }
    let need = (l2 * m2_max + h_max * q) / l1;
    if need > f.truncation() {
        return Err(ShiftedError::Tail {
            tail: f64::INFINITY,
            tol: 0.0,
        });
    }
    let coeffs = normalized_terms(f);
    let a: HashMap<u64, C> = coeffs.iter().cloned().collect();
    let mut amp = C::new(0.0, 0.0);
    for &(m2, a2) in coeffs.iter().filter(|t| t.0 <= m2_max) {
        for h in 1..=h_max {
            let left = l2 * m2 + h * q;
            if !left.is_multiple_of(l1) {
                continue;
            }
            if let Some(&a1) = a.get(&(left / l1)) {
                let (x, y) = ((l2 * m2) as f64, (h * q) as f64);
                amp += a1
                    * a2.conj()
                    * ((1.0 + y / x).ln() * kappa - s * x.ln() - (w + kappa) * y.ln()).exp();
            }
        }
    }
    // oldforms F(n) = a(n/ℓ₁), G(n) = a(n/ℓ₂), enumerated on n
    let raw = lookup(f);
    let big_f = |n: u64| {
        if n.is_multiple_of(l1) {
            raw.get(&(n / l1)).copied()
        } else {
            None
        }
    };
    let mut old = C::new(0.0, 0.0);
    for n in (l2..=l2 * m2_max).step_by(l2 as usize) {
        let Some(&gn) = raw.get(&(n / l2)) else {
            continue;
        };
        for h in 1..=h_max {
            if let Some(fa) = big_f(n + h * q) {
                old += fa
                    * gn.conj()
                    * (-(s + k - 1.0) * (n as f64).ln() - (w + kappa) * ((h * q) as f64).ln())
                        .exp();
            }
        }
    }
    let c2 = coefficient_envelope(f).powi(2);
    let (sa, sb) = (s.re - 1.5, w.re - 0.25 + kappa - kappa.max(0.0) - 1.0);
    let pa = 0.5 - s.re;
    let pb = 0.25 - w.re - kappa + kappa.max(0.0);
    let a_full = (l2 as f64).powf(pa) * (1.0 + 1.0 / sa);
    let a_tail = (l2 as f64).powf(pa) * (m2_max as f64).powf(-sa) / sa;
    let b_full = (q as f64).powf(pb) * (1.0 + 1.0 / sb);
    let b_tail = (q as f64).powf(pb) * (h_max as f64).powf(-sb) / sb;
    let tail = 2f64.powf(1.0 + kappa.max(0.0)) * c2 * (a_tail * b_full + a_full * b_tail);
    Ok(ZqValue {
        amplifier_form: amp,
        oldform_form: old,
        ratio: ((l1 * l2) as f64).powf(kappa),
        tail,
    })
}

/// `G(s, u) = (1/2)(4π)^k Γ(s+u−1)Γ(s−u)Γ(1−s) / (Γ(u)Γ(1−u)Γ(s+k−1))`.
pub fn gamma_factor_g(s: C, u: C, weight: f64) -> Result<C, ShiftedError> {
    let near = |z: C| {
        if z.re > 0.5 {
            f64::INFINITY
        } else {
            (z - z.re.round()).norm()
        }
    };
    let dist = [s + u - 1.0, s - u, 1.0 - s]
        .iter()
        .map(|&z| near(z))
        .fold(f64::INFINITY, f64::min);
    if dist < 1e-6 {
        return Err(ShiftedError::NearPole { dist });
    }
    let num = log_gamma(s + u - 1.0)? + log_gamma(s - u)? + log_gamma(1.0 - s)?;
    Ok(0.5
        * (4.0 * PI).powf(weight)
        * num.exp()
        * rgamma(u)
        * rgamma(1.0 - u)
        * rgamma(s + weight - 1.0))
}

fn check_level(level: u64, w: u64) -> Result<(), ShiftedError> {
    let odd = level / 4;
    if !level.is_multiple_of(4)
        || odd.is_multiple_of(2)
        || factorize(odd).iter().any(|&(_, e)| e > 1)
    {
        return Err(ShiftedError::UnsupportedLevel(level));
    }
    if w == 0 || !level.is_multiple_of(w) {
        return Err(ShiftedError::NotDivisor { w, n: level });
    }
    Ok(())
}

/// `ρ_a(s, m) = (wN)^{−s} Σ_{c ≤ c_max, (c, N/w) = 1} c^{−2s} Σ_{d mod cw}^* e(−md/(cw))`
/// for the cusp `a = 1/w`.
pub fn eisenstein_rho(
    level: u64,
    w: u64,
    s: C,
    m: i64,
    c_max: u64,
) -> Result<SeriesValue, ShiftedError> {
    check_level(level, w)?;
    let mm = level / w;
    let value: C = (1..=c_max)
        .into_par_iter()
        .filter(|c| c.gcd(&mm) == 1)
        .map(|c| ramanujan_restricted(c, w, m) as f64 * (-2.0 * s * (c as f64).ln()).exp())
        .sum::<C>()
        * (-s * ((w * level) as f64).ln()).exp();
    let sig = s.re;
    let scale = ((w * level) as f64).powf(-sig);
    let tail = if m == 0 {
        if sig > 1.0 {
            scale * w as f64 * (c_max as f64).powf(2.0 - 2.0 * sig) / (2.0 * sig - 2.0)
        } else {
            f64::INFINITY
        }
    } else if sig > 0.5 {
        scale * m.unsigned_abs() as f64 * (c_max as f64).powf(1.0 - 2.0 * sig) / (2.0 * sig - 1.0)
    } else {
        f64::INFINITY
    };
    Ok(SeriesValue { value, tail })
}

/// Constant-term coefficient
/// `ρ_a(s) = φ(w)(wN)^{−s} Π_{p | N}(1 − p^{−2s})^{−1} Π_{p | N/w}(1 − p^{1−2s})`.
pub fn eisenstein_rho_constant(level: u64, w: u64, s: C) -> Result<C, ShiftedError> {
    check_level(level, w)?;
    let mut r =
        C::new(crate::arith::euler_phi(w) as f64, 0.0) * (-s * ((w * level) as f64).ln()).exp();
    for (p, _) in factorize(level) {
        r /= 1.0 - (-2.0 * s * (p as f64).ln()).exp();
    }
    for (p, _) in factorize(level / w) {
        r *= 1.0 - ((1.0 - 2.0 * s) * (p as f64).ln()).exp();
    }
    Ok(r)
}

/// `ζ(2s) ρ_a(s, m)` in closed form, `m ≠ 0`: the `c`-sum factors into a finite
/// sum over primes of `w` not dividing `N/w`, fixed Ramanujan sums at primes
/// dividing both, and `σ_{1−2s}` of the part of `m` prime to `N`.
fn zeta_times_rho(level: u64, w: u64, s: C, m: i64) -> C {
    let m = m.unsigned_abs();
    let mm = level / w;
    let pw = |p: u64, z: C| (z * (p as f64).ln()).exp();
    let mut r = (-s * ((w * level) as f64).ln()).exp();
    let fw = factorize(w);
    for &(p, e) in &fw {
        if mm.is_multiple_of(p) {
            r *= ramanujan_restricted(1, p.pow(e), m as i64) as f64;
        } else {
            let mut acc = C::new(0.0, 0.0);
            let mut j = 0u32;
            loop {
                let cs = ramanujan_restricted(1, p.pow(e + j), m as i64);
                if cs == 0 {
                    break;
                }
                acc += cs as f64 * pw(p, -2.0 * s * j as f64);
                j += 1;
            }
            r *= acc;
        }
    }
    for (p, _) in factorize(level) {
        r /= 1.0 - pw(p, -2.0 * s);
    }
    let mut rest = m;
    for (p, _) in factorize(level) {
        while rest.is_multiple_of(p) {
            rest /= p;
        }
    }
    for (p, v) in factorize(rest) {
        r *= (0..=v)
            .map(|j| pw(p, (1.0 - 2.0 * s) * j as f64))
            .sum::<C>();
    }
    r
}

/// `ρ_a(s, m)` in closed form (`m = 0` through `ρ_a(s) ζ(2s−1)/ζ(2s)`).
pub fn eisenstein_rho_closed(level: u64, w: u64, s: C, m: i64) -> Result<C, ShiftedError> {
    check_level(level, w)?;
    if m == 0 {
        return Ok(eisenstein_rho_constant(level, w, s)? * zeta(2.0 * s - 1.0)? / zeta(2.0 * s)?);
    }
    Ok(zeta_times_rho(level, w, s, m) / zeta(2.0 * s)?)
}

/// `ζ_{Q,a}(s, u) = ζ(2−2u) Σ_{h ≤ h_max} ρ_a(1−u, −hQ) (hQ)^{−(s+u−1/2)}`.
/// The factor `ζ(2−2u)` cancels against the `1/ζ(2−2u)` of the closed form of
/// `ρ_a`, so the terms are finite Euler products.
pub fn zeta_q_a(
    level: u64,
    w: u64,
    s: C,
    u: C,
    q: u64,
    h_max: u64,
) -> Result<SeriesValue, ShiftedError> {
    check_level(level, w)?;
    let e = s + u - 0.5;
    let value: C = (1..=h_max)
        .into_par_iter()
        .map(|h| {
            zeta_times_rho(level, w, 1.0 - u, -((h * q) as i64))
                * (-e * ((h * q) as f64).ln()).exp()
        })
        .sum();
    // |σ_z(n)| ≤ d(n) n^{max(Re z, 0)} ≤ 2√n n^{max(Re z, 0)}, with the cusp factors bounded by w
    let growth = 0.5 + (2.0 * u.re - 1.0).max(0.0);
    let local = (w as f64)
        * factorize(level)
            .iter()
            .map(|&(p, _)| 1.0 / (1.0 - (p as f64).powf(2.0 * u.re - 2.0)).abs())
            .product::<f64>();
    let expo = e.re - growth;
    let tail = if expo > 1.0 {
        2.0 * local
            * ((w * level) as f64).powf(u.re - 1.0)
            * (q as f64).powf(-expo)
            * (h_max as f64).powf(1.0 - expo)
            / (expo - 1.0)
    } else {
        f64::INFINITY
    };
    Ok(SeriesValue { value, tail })
}

/// Vertical line `Re u = abscissa`, truncated at `|Im u| ≤ height`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinContour {
    pub abscissa: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleMellinReport {
    /// `(2πi)^{−1} ∫ Z_Q(s+w−u, u−(k−1)/2) Γ(w+(k−1)/2−u)Γ(u)/Γ(w+(k−1)/2) du`.
    pub contour: C,
    /// The same integral with `w + k/2` in place of `w + (k−1)/2`.
    pub contour_half_shift: C,
    /// `Σ A(m₁)Ā(m₂)(ℓ₂m₂)^{−s}(ℓ₁m₁)^{−w}` over `ℓ₁m₁ = ℓ₂m₂ + hQ`.
    pub direct: C,
    pub discrepancy: f64,
    pub discrepancy_half_shift: f64,
}

/// Checks the collapse of the `u`-integral in the Mellin representation of the
/// shifted sum, for the finite coefficient set `coeffs` (normalized `A(m)`).
#[allow(clippy::too_many_arguments)]
pub fn triple_mellin_inner_check(
    coeffs: &[(u64, C)],
    weight: f64,
    s: C,
    w: C,
    q: u64,
    l1: u64,
    l2: u64,
    contour: MellinContour,
) -> Result<TripleMellinReport, ShiftedError> {
    let kappa = (weight - 1.0) / 2.0;
    let g = contour.abscissa;
    if g <= 0.0 || g >= (w + kappa).re || g - kappa <= 1.0 || (s + w).re - g <= 1.0 {
        return Err(ShiftedError::Convergence {
            what: "contour abscissa",
            value: g,
        });
    }
    let terms = zq_terms(coeffs, q, l1, l2);
    let direct: C = terms
        .iter()
        .map(|t| t.c * (-s * (t.x as f64).ln() - w * ((t.x + t.y) as f64).ln()).exp())
        .sum();
    let integral = |z: C| -> Result<C, ShiftedError> {
        let lgz = log_gamma(z)?;
        let r = adaptive(
            |v| {
                let u = C::new(g, v);
                let zq = zq_from_terms(&terms, weight, s + w - u, u - kappa);
                match (log_gamma(u), log_gamma(z - u)) {
                    (Ok(a), Ok(b)) => zq * (a + b - lgz).exp(),
                    _ => C::new(0.0, 0.0),
                }
            },
            -contour.height,
            contour.height,
            1e-16,
            1e-12,
        );
        Ok(r.value / (2.0 * PI))
    };
    let contour_value = integral(w + kappa)?;
    let half = integral(w + weight / 2.0)?;
    let scale = direct.norm().max(1e-300);
    Ok(TripleMellinReport {
        contour: contour_value,
        contour_half_shift: half,
        direct,
        discrepancy: (contour_value - direct).norm() / scale,
        discrepancy_half_shift: (half - direct).norm() / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qexp::{expand_eta_quotient, EtaQuotientSpec};

    fn eta(s: &str, m: u64) -> QExpansion {
        expand_eta_quotient(&s.parse::<EtaQuotientSpec>().unwrap(), m).unwrap()
    }

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn d_series_basics() {
        let f = eta("8^3", 200_000);
        let zero = f.scaled(c(0.0, 0.0));
        assert_eq!(
            d_series(&f, &zero, c(3.0, 0.0), 8, 1e-6).unwrap().value,
            c(0.0, 0.0)
        );
        assert!(matches!(
            d_series(&f, &f, c(3.0, 0.0), 0, 1e-6),
            Err(ShiftedError::ZeroShift)
        ));
        assert!(matches!(
            d_series(&f, &f, c(1.0, 0.0), 8, 1e-6),
            Err(ShiftedError::Convergence { .. })
        ));
        let d0 = d_series(&f, &f, c(3.0, 0.5), 8, 1e-6).unwrap();
        let dd = d_series_delta(&f, &f, c(3.0, 0.5), 8, 0.0, 1e-6).unwrap();
        assert_eq!(d0, dd);
        // a(9) a(1) is the first term: 9 = 1 + 8 with a(n²) = ±n
        assert!((d0.value - f.coeff(9) * f.coeff(1)).norm() < 0.1 * d0.value.norm());
        for h in [1u64, 10, 100, 1000] {
            assert!(d_series_delta(&f, &f, c(3.0, 0.0), h, 0.1, 1e-4)
                .unwrap()
                .value
                .is_finite());
        }
    }

    #[test]
    fn d_series_delta_converges_linearly() {
        let f = eta("8^3", 200_000);
        let s = c(3.0, 0.0);
        let d = d_series(&f, &f, s, 8, 1e-6).unwrap().value;
        let err = |dl: f64| (d_series_delta(&f, &f, s, 8, dl, 1e-6).unwrap().value - d).norm();
        let errs: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&dl| err(dl)).collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]));
        // err/δ settles to the derivative once hδ/2 is small against the first n
        let slopes: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .zip(&errs[1..])
            .map(|(dl, e)| e / dl)
            .collect();
        assert!(
            (slopes[1] / slopes[2] - 1.0).abs() < 0.01 && (slopes[0] / slopes[2] - 1.0).abs() < 0.1,
            "{slopes:?}"
        );
    }

    #[test]
    fn d_series_of_oldforms_is_a_constrained_sum() {
        let f0 = eta("8^3", 60_000);
        // 3·9 = 5·1 + 22
        let (l1, l2, h) = (3u64, 5u64, 22u64);
        let old = |l: u64| {
            let terms: Vec<(u64, C)> = f0.terms().iter().map(|&(n, a)| (n * l, a)).collect();
            QExpansion::from_terms(f0.two_k(), f0.level() * l, f0.truncation() * l, terms)
        };
        let (f, g) = (old(l1), old(l2));
        let k = f0.weight();
        let s = c(3.5, 1.0);
        let d = d_series(&f, &g, s, h, 1e-3).unwrap().value;
        let mut direct = c(0.0, 0.0);
        for &(m2, b) in f0.terms() {
            let left = m2 * l2 + h;
            if left % l1 == 0 && left / l1 <= f0.truncation() && m2 * l2 <= f.truncation() - h {
                direct += f0.coeff(left / l1)
                    * b.conj()
                    * (-(s + k - 1.0) * ((m2 * l2) as f64).ln()).exp();
            }
        }
        assert!((d - direct).norm() < 1e-12 * direct.norm().max(1e-300));
        assert!(direct.norm() > 0.0);
    }

    #[test]
    fn z_q_normalizations_agree() {
        for spec in ["8^3", "1^2*22^1"] {
            let f = eta(spec, 20_000);
            for (l1, l2) in [(1u64, 1u64), (3, 5)] {
                let z =
                    z_q_bruteforce(&f, c(2.5, 0.3), c(2.2, -0.4), 11, l1, l2, 2000, 1000).unwrap();
                let lhs = z.amplifier_form;
                let rhs = z.oldform_form * z.ratio;
                assert!(
                    (lhs - rhs).norm() < 1e-10 * lhs.norm().max(1e-300),
                    "{spec} {l1} {l2}"
                );
                // the inverse ratio is what one would get with the opposite sign in the exponent
                if l1 * l2 > 1 && lhs.norm() > 0.0 {
                    assert!((lhs - z.oldform_form / z.ratio).norm() > 1e-3 * lhs.norm());
                }
            }
        }
        let toy = QExpansion::from_terms(3, 64, 100, vec![(1, c(1.0, 0.0))]);
        assert_eq!(
            z_q_bruteforce(&toy, c(2.5, 0.0), c(2.0, 0.0), 11, 1, 1, 10, 5)
                .unwrap()
                .amplifier_form,
            c(0.0, 0.0)
        );
    }

    #[test]
    fn z_q_tail_dominates_doubling_change() {
        let f = eta("8^3", 100_000);
        let (s, w) = (c(2.5, 0.0), c(2.0, 0.0));
        let a = z_q_bruteforce(&f, s, w, 11, 1, 1, 500, 200).unwrap();
        let b = z_q_bruteforce(&f, s, w, 11, 1, 1, 1000, 400).unwrap();
        assert!((a.amplifier_form - b.amplifier_form).norm() <= a.tail);
    }

    #[test]
    fn z_q_matches_sum_of_d_series() {
        let f = eta("8^3", 200_000);
        let (s, w, q, k) = (c(3.0, 0.0), c(2.5, 0.0), 11u64, 1.5);
        // Z_Q with ℓ₁ = ℓ₂ = 1 over m₂ ≤ M, h ≤ H equals Σ_h D(s + (k−1)/2... ) term by term
        let z = z_q_bruteforce(&f, s, w, q, 1, 1, 50_000, 100).unwrap();
        let mut acc = c(0.0, 0.0);
        for h in 1..=100u64 {
            let hq = h * q;
            let mut dh = c(0.0, 0.0);
            for &(n, b) in f.terms().iter().filter(|t| t.0 <= 50_000) {
                let a = f.coeff(n + hq);
                dh += a * b.conj() * (-(s + k - 1.0) * (n as f64).ln()).exp();
            }
            acc += dh * (-(w + (k - 1.0) / 2.0) * (hq as f64).ln()).exp();
        }
        assert!((z.oldform_form - acc).norm() < 1e-12 * acc.norm());
    }

    /// Lanczos (g = 7, n = 9) gamma, independent of the Stirling-based `log_gamma`.
    fn lanczos(z: C) -> C {
        const G: f64 = 7.0;
        const P: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        if z.re < 0.5 {
            return PI / ((PI * z).sin() * lanczos(1.0 - z));
        }
        let z = z - 1.0;
        let mut x = c(P[0], 0.0);
        for (i, &p) in P.iter().enumerate().skip(1) {
            x += p / (z + i as f64);
        }
        let t = z + G + 0.5;
        (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
    }

    #[test]
    fn gamma_factor() {
        let k = 1.5;
        let (s, u) = (c(2.3, 0.0), c(0.7, 0.0));
        let a = gamma_factor_g(s, u, k).unwrap();
        let b = gamma_factor_g(s, 1.0 - u, k).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm());
        let oracle =
            0.5 * (4.0 * PI).powf(k) * lanczos(s + u - 1.0) * lanczos(s - u) * lanczos(1.0 - s)
                / (lanczos(u) * lanczos(1.0 - u) * lanczos(s + k - 1.0));
        assert!((a - oracle).norm() < 1e-12 * a.norm());
        let (s, u) = (c(2.0, 0.7), c(0.5, 2.0));
        let oracle =
            0.5 * (4.0 * PI).powf(k) * lanczos(s + u - 1.0) * lanczos(s - u) * lanczos(1.0 - s)
                / (lanczos(u) * lanczos(1.0 - u) * lanczos(s + k - 1.0));
        assert!((gamma_factor_g(s, u, k).unwrap() - oracle).norm() < 1e-11 * oracle.norm());
        assert!(matches!(
            gamma_factor_g(c(1.0 + 1e-8, 0.0), c(0.5, 0.0), k),
            Err(ShiftedError::NearPole { .. })
        ));
        assert!(matches!(
            gamma_factor_g(c(2.0, 0.0), c(0.5, 0.0), k),
            Err(ShiftedError::NearPole { .. })
        ));
    }

    #[test]
    fn eisenstein_coefficients() {
        assert!(matches!(
            eisenstein_rho(64, 1, c(2.0, 0.0), 1, 10),
            Err(ShiftedError::UnsupportedLevel(64))
        ));
        assert!(matches!(
            eisenstein_rho(12, 5, c(2.0, 0.0), 1, 10),
            Err(ShiftedError::NotDivisor { .. })
        ));
        for level in [4u64, 12, 60] {
            for w in crate::arith::divisors(level) {
                let s = c(1.3, 0.4);
                for m in [1i64, 6, 12, 45] {
                    let a = eisenstein_rho(level, w, s, m, 1000).unwrap();
                    let b = eisenstein_rho(level, w, s, m, 2000).unwrap();
                    assert!((a.value - b.value).norm() <= a.tail);
                    assert_eq!(
                        a.value,
                        eisenstein_rho(level, w, s, -m, 1000).unwrap().value
                    );
                    let closed = eisenstein_rho_closed(level, w, s, m).unwrap();
                    assert!(
                        (b.value - closed).norm() <= b.tail + 1e-13,
                        "{level} {w} {m}"
                    );
                }
                // constant term: truncated c-sum against the product formula times ζ(2s−1)/ζ(2s)
                let s = c(2.5, 0.3);
                let t = eisenstein_rho(level, w, s, 0, 20_000).unwrap();
                let closed = eisenstein_rho_closed(level, w, s, 0).unwrap();
                assert!((t.value - closed).norm() <= t.tail + 1e-13);
            }
        }
        let a = eisenstein_rho(4, 4, c(2.0, 0.0), 1, 1000).unwrap();
        let b = eisenstein_rho(4, 4, c(2.0, 0.0), 1, 2000).unwrap();
        assert!((a.value - b.value).norm() < 1e-8);
    }

    #[test]
    fn zeta_q_a_truncation_and_thinning() {
        let (s, u) = (c(2.0, 0.0), c(0.5, 2.0));
        for (level, w) in [(12u64, 3u64), (60, 1), (4, 4)] {
            let a = zeta_q_a(level, w, s, u, 7, 4000).unwrap();
            let b = zeta_q_a(level, w, s, u, 7, 8000).unwrap();
            assert!((a.value - b.value).norm() < 1e-6 && (a.value - b.value).norm() <= a.tail);
            // the multiples of 2Q form a sub-series: ζ_{2Q}(s,u) with h ≤ H equals the even-h part of ζ_Q
            let even: C = (1..=1000u64)
                .map(|h| {
                    zeta_times_rho(level, w, 1.0 - u, -((2 * h * 7) as i64))
                        * (-(s + u - 0.5) * ((2 * h * 7) as f64).ln()).exp()
                })
                .sum();
            let thin = zeta_q_a(level, w, s, u, 14, 1000).unwrap();
            assert!((thin.value - even).norm() < 1e-14 * even.norm().max(1.0));
            // large Q: the series equals its first term up to the stated tail
            let first = zeta_q_a(level, w, s, u, 100_003, 1).unwrap();
            let full = zeta_q_a(level, w, s, u, 100_003, 200).unwrap();
            assert!((full.value - first.value).norm() <= first.tail);
        }
        // ζ(2−2u) ρ_a(1−u, m) agrees with the product of the c-sum and ζ away from the critical line
        let uu = c(0.2, 0.7);
        let lhs = zeta_times_rho(12, 3, 1.0 - uu, -21);
        let rhs = zeta(2.0 - 2.0 * uu).unwrap()
            * eisenstein_rho(12, 3, 1.0 - uu, -21, 200_000).unwrap().value;
        assert!((lhs - rhs).norm() < 1e-4 * lhs.norm());
    }

    #[test]
    fn params() {
        let p = ShiftedSeriesParams::new(c(2.0, 0.0), c(2.0, 0.0), 3, 0.0, 11, 1, 1, 1.5, 1e-8)
            .unwrap();
        assert_eq!(p.s_prime, c(3.75, 0.0));
        assert!(
            ShiftedSeriesParams::new(c(1.0, 0.0), c(2.0, 0.0), 3, 0.0, 11, 1, 1, 1.5, 1e-8)
                .is_err()
        );
        assert!(
            ShiftedSeriesParams::new(c(2.0, 0.0), c(2.0, 0.0), 0, 0.0, 11, 1, 1, 1.5, 1e-8)
                .is_err()
        );
    }

    #[test]
    fn triple_mellin_toy() {
        // A(1) = A(12) = 1: the only solution with Q = 11 is 12 = 1 + 11
        let coeffs = vec![(1u64, c(1.0, 0.0)), (12, c(1.0, 0.0))];
        let (s, w) = (c(2.5, 0.0), c(2.5, 0.0));
        let r = triple_mellin_inner_check(
            &coeffs,
            1.5,
            s,
            w,
            11,
            1,
            1,
            MellinContour {
                abscissa: 2.0,
                height: 40.0,
            },
        )
        .unwrap();
        assert!((r.direct - c(12f64.powf(-2.5), 0.0)).norm() < 1e-15);
        assert!(r.discrepancy < 1e-6, "{}", r.discrepancy);
        assert!(r.discrepancy_half_shift > 1e-3);
        assert!(triple_mellin_inner_check(
            &coeffs,
            1.5,
            s,
            w,
            11,
            1,
            1,
            MellinContour {
                abscissa: 1.0,
                height: 40.0
            }
        )
        .is_err());
    }

    #[test]
    fn triple_mellin_truncated_form_refines() {
        let f = eta("8^3", 200);
        let coeffs = normalized_terms(&f);
        let (s, w) = (c(2.5, 0.0), c(2.5, 0.0));
        let d: Vec<f64> = [4.0, 8.0, 16.0, 32.0]
            .iter()
            .map(|&height| {
                triple_mellin_inner_check(
                    &coeffs,
                    1.5,
                    s,
                    w,
                    11,
                    1,
                    1,
                    MellinContour {
                        abscissa: 2.0,
                        height,
                    },
                )
                .unwrap()
                .discrepancy
            })
            .collect();
        // strictly decreasing until the roundoff floor is reached
        assert!(d.windows(2).all(|p| p[1] < p[0] || p[1] < 1e-13), "{d:?}");
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
        assert!(d[3] < 1e-4, "{d:?}");
    }
}
