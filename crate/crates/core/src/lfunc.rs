//! Completed L-functions of additive and multiplicative twists, computed by
//! splitting the Mellin integral at `y0` and reflecting the lower half through
//! the Fricke involution.

use crate::amplifier::SmoothCutoff;
use crate::arith::{eps_d, kronecker, mod_inverse};
use crate::chars::{gauss_sum, DirichletCharacter};
use crate::qexp::{normalized_terms, QExpansion};
use crate::special::{log_gamma, upper_incomplete_gamma, SpecialError};
use num_complex::Complex64;
use num_integer::Integer;
use std::f64::consts::PI;

type C = Complex64;

#[derive(Debug, thiserror::Error)]
pub enum LError {
    #[error("gcd(Q, N) = {0} > 1 is not supported")]
    NotCoprime(u64),
    #[error("character is not primitive")]
    NotPrimitive,
    #[error("nebentypus of the form is unknown")]
    UnknownNebentypus,
    #[error("coefficients up to {need} are needed but only {have} are known")]
    Truncation { need: u64, have: u64 },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// A completed L-value together with its numerical provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistedLResult {
    pub s: C,
    pub value: C,
    pub split_point: f64,
    pub truncation_error: f64,
    pub empirical_root_number: Option<C>,
}

/// `v ∈ [0, Q)` with `N u v ≡ −1 (mod Q)`.
pub fn dual_twist(u: i64, q: u64, level: u64) -> Option<u64> {
    if q == 1 {
        return Some(0);
    }
    let nu = (level as i64 % q as i64) * u.rem_euclid(q as i64) % q as i64;
    mod_inverse(nu, q as i64).map(|inv| (q as i64 - inv) as u64 % q)
}

/// Constant `C(u)` in `L*(s, u/Q) = C(u) L*(1−s, v/Q)`:
/// `ε(f) e^{iπk} ε_Q^{−2k} (Nv/Q) χ_f(Q)` where `χ_f = (D/·)` is the nebentypus.
pub fn fe_constant(f: &QExpansion, u: i64, q: u64, eps_f: C) -> Result<C, LError> {
    let n = f.level();
    let g = q.gcd(&n);
    if g > 1 {
        return Err(LError::NotCoprime(g));
    }
    let d = f.nebentypus().ok_or(LError::UnknownNebentypus)?;
    let v = dual_twist(u, q, n).ok_or(LError::NotCoprime(q.gcd(&(u.unsigned_abs()))))?;
    let eq = eps_d(q as i64).expect("Q is odd when coprime to N");
    let phase = C::from_polar(1.0, PI * f.weight());
    let kr = kronecker((n * v) as i64, q as i64) as f64;
    let neb = kronecker(d, q as i64) as f64;
    Ok(eps_f * phase * eq.powi(-(f.two_k() as i32)) * kr * neb)
}

/// `Σ_n c(n) Γ(a, 2πny)/(2πn)^a` over the support of `f`, with the weight
/// `c(n) = a(n)·twist(n)`. Returns the sum and a bound for the omitted tail.
fn incomplete_gamma_sum(
    f: &QExpansion,
    a: C,
    y: f64,
    mut twist: impl FnMut(u64) -> C,
) -> Result<(C, f64), LError> {
    let cutoff = 50.0 + 2.0 * a.norm();
    let mut sum = C::new(0.0, 0.0);
    let mut reached = false;
    for &(n, an) in f.terms() {
        if n == 0 {
            continue;
        }
        let x = 2.0 * PI * n as f64 * y;
        if x > cutoff {
            reached = true;
            break;
        }
        let w = twist(n);
        if w == C::new(0.0, 0.0) {
            continue;
        }
        let g = upper_incomplete_gamma(a, x)?;
        sum += an * w * g * (-a * (2.0 * PI * n as f64).ln()).exp();
    }
    let m = f.truncation();
    let x_m = 2.0 * PI * m as f64 * y;
    if reached || x_m > cutoff {
        return Ok((sum, 0.0));
    }
    let tail = tail_bound(f, a.re, y);
    Ok((sum, tail))
}

/// Envelope bound on `Σ_{n > M} |a(n)| Γ(σ, 2πny)(2πn)^{−σ}`.
fn tail_bound(f: &QExpansion, sigma: f64, y: f64) -> f64 {
    let p = f.weight().max(1.0);
    let env = f
        .terms()
        .iter()
        .map(|&(n, c)| c.norm() / (n.max(1) as f64).powf(p))
        .fold(0.0, f64::max)
        * 2.0;
    let m1 = (f.truncation() + 1) as f64;
    let x = 2.0 * PI * m1 * y;
    if x <= (sigma - 1.0).max(0.0) + 1.0 {
        return f64::INFINITY;
    }
    let gam = (sigma - 1.0) * x.ln() - x + (x / (x - (sigma - 1.0).max(0.0))).ln();
    let first = env * (p * m1.ln() - sigma * (2.0 * PI * m1).ln() + gam).exp();
    let rho = (-2.0 * PI * y).exp() * (1.0 + 1.0 / m1).powf(p + sigma.abs() + (sigma - 1.0).abs());
    if rho >= 1.0 {
        f64::INFINITY
    } else {
        first / (1.0 - rho)
    }
}

fn conductor_scale(f: &QExpansion, q: u64) -> f64 {
    (f.level() as f64).sqrt() * q as f64
}

/// Default split point `y0 = 1/(√N Q)`, the symmetry point of the reflection.
pub fn default_split(f: &QExpansion, q: u64) -> f64 {
    1.0 / conductor_scale(f, q)
}

fn check_budget(tail: f64, scale: f64, f: &QExpansion, y: f64, a: C) -> Result<(), LError> {
    if tail > 1e-11 * scale.max(1e-300) {
        let need = ((50.0 + 2.0 * a.norm()) / (2.0 * PI * y)).ceil() as u64;
        return Err(LError::Truncation {
            need,
            have: f.truncation(),
        });
    }
    Ok(())
}

/// `L*(s, f, u/Q) = (√N Q)^s ∫_0^∞ f(iy + u/Q) y^{s+(k−1)/2} dy/y`.
pub fn completed_l_additive(
    f: &QExpansion,
    s: C,
    u: i64,
    q: u64,
    y0: f64,
    eps_f: C,
) -> Result<TwistedLResult, LError> {
    let cst = fe_constant(f, u, q, eps_f)?;
    let v = dual_twist(u, q, f.level()).unwrap();
    let k = f.weight();
    let a = s + (k - 1.0) / 2.0;
    let a_dual = 1.0 - s + (k - 1.0) / 2.0;
    let big = conductor_scale(f, q);
    let y1 = 1.0 / (big * big * y0);
    let qf = q as f64;
    let phase = |r: i64| {
        move |n: u64| {
            C::from_polar(
                1.0,
                2.0 * PI * ((n as i128 * r as i128).rem_euclid(q as i128)) as f64 / qf,
            )
        }
    };
    let (large, t1) = incomplete_gamma_sum(f, a, y0, phase(u))?;
    let (small, t2) = incomplete_gamma_sum(f, a_dual, y1, phase(v as i64))?;
    let pre = C::new(big, 0.0).powc(s);
    let pre_dual = C::new(big, 0.0).powc(1.0 - s);
    let value = pre * large + cst * pre_dual * small;
    let err = pre.norm() * t1 + pre_dual.norm() * t2;
    check_budget(err, value.norm(), f, y0.min(y1), a)?;
    Ok(TwistedLResult {
        s,
        value,
        split_point: y0,
        truncation_error: err,
        empirical_root_number: None,
    })
}

/// Precomputed data for all multiplicative twists modulo one `Q` at one `s`.
///
/// The large half is `Σ a(n) χ(n) Γ(a, 2πny0)/(2πn)^a`; the reflected half is
/// `Σ_u χ̄(u) C(u) S(v(u))` with the additive sums `S(v)` tabulated once.
#[derive(Debug, Clone)]
pub struct TwistContext {
    q: u64,
    s: C,
    y0: f64,
    pre: C,
    pre_dual: C,
    large_terms: Vec<(u64, C)>,
    reflected: Vec<C>,
    error: f64,
}

impl TwistContext {
    pub fn new(f: &QExpansion, s: C, q: u64, y0: f64, eps_f: C) -> Result<Self, LError> {
        let g = q.gcd(&f.level());
        if g > 1 {
            return Err(LError::NotCoprime(g));
        }
        let k = f.weight();
        let a = s + (k - 1.0) / 2.0;
        let a_dual = 1.0 - s + (k - 1.0) / 2.0;
        let big = conductor_scale(f, q);
        let y1 = 1.0 / (big * big * y0);
        let qf = q as f64;
        let cutoff = 50.0 + 2.0 * a.norm();
        let mut large_terms = Vec::new();
        for &(n, an) in f.terms() {
            if n == 0 {
                continue;
            }
            let x = 2.0 * PI * n as f64 * y0;
            if x > cutoff {
                break;
            }
            large_terms.push((
                n,
                an * upper_incomplete_gamma(a, x)? * (-a * (2.0 * PI * n as f64).ln()).exp(),
            ));
        }
        let cutoff_dual = 50.0 + 2.0 * a_dual.norm();
        let mut dual_terms = Vec::new();
        for &(n, an) in f.terms() {
            if n == 0 {
                continue;
            }
            let x = 2.0 * PI * n as f64 * y1;
            if x > cutoff_dual {
                break;
            }
            dual_terms.push((
                n,
                an * upper_incomplete_gamma(a_dual, x)?
                    * (-a_dual * (2.0 * PI * n as f64).ln()).exp(),
            ));
        }
        let roots: Vec<C> = (0..q)
            .map(|j| C::from_polar(1.0, 2.0 * PI * j as f64 / qf))
            .collect();
        let mut reflected = vec![C::new(0.0, 0.0); q as usize];
        for u in 0..q {
            if u.gcd(&q) != 1 {
                continue;
            }
            let v = dual_twist(u as i64, q, f.level()).unwrap();
            let sv: C = dual_terms
                .iter()
                .map(|&(n, w)| w * roots[(n % q * v % q) as usize])
                .sum();
            reflected[u as usize] = fe_constant(f, u as i64, q, eps_f)? * sv;
        }
        let pre = C::new(big, 0.0).powc(s);
        let pre_dual = C::new(big, 0.0).powc(1.0 - s);
        let error = pre.norm() * tail_bound_if_short(f, a, y0)
            + pre_dual.norm() * tail_bound_if_short(f, a_dual, y1);
        let scale = large_terms.iter().map(|t| t.1.norm()).sum::<f64>() * pre.norm();
        check_budget(error, scale, f, y0.min(y1), a)?;
        Ok(Self {
            q,
            s,
            y0,
            pre,
            pre_dual,
            large_terms,
            reflected,
            error,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `L*(s, f, χ) = g(1, χ̄)^{−1} Σ_u χ̄(u) L*(s, f, u/Q)` for primitive `χ`.
    pub fn evaluate(&self, chi: &DirichletCharacter) -> Result<TwistedLResult, LError> {
        if !chi.is_primitive() {
            return Err(LError::NotPrimitive);
        }
        assert_eq!(chi.modulus(), self.q);
        let large: C = self
            .large_terms
            .iter()
            .map(|&(n, w)| w * chi.eval(n as i64))
            .sum();
        let chib = chi.conj();
        let g = gauss_sum(1, &chib);
        let small: C = (0..self.q)
            .map(|u| chib.eval(u as i64) * self.reflected[u as usize])
            .sum::<C>()
            / g;
        Ok(TwistedLResult {
            s: self.s,
            value: self.pre * large + self.pre_dual * small,
            split_point: self.y0,
            truncation_error: self.error,
            empirical_root_number: None,
        })
    }
}

fn tail_bound_if_short(f: &QExpansion, a: C, y: f64) -> f64 {
    let cutoff = 50.0 + 2.0 * a.norm();
    if 2.0 * PI * f.truncation() as f64 * y > cutoff {
        0.0
    } else {
        tail_bound(f, a.re, y)
    }
}

/// `L*(s, f, χ)` for primitive `χ` modulo `Q` with `gcd(Q, N) = 1`.
pub fn completed_l_multiplicative(
    f: &QExpansion,
    s: C,
    chi: &DirichletCharacter,
    eps_f: C,
) -> Result<TwistedLResult, LError> {
    let q = chi.modulus();
    TwistContext::new(f, s, q, default_split(f, q), eps_f)?.evaluate(chi)
}

/// Predicted `ε*(f, χ) = ε(f) e^{iπk} ε_Q^{−2k} (N/Q) χ(−N) χ_f(Q)` in
/// `L*(s, f, χ) = ε* L*(1−s, f, χ, χ′)`.
pub fn root_number_star(f: &QExpansion, chi: &DirichletCharacter, eps_f: C) -> Result<C, LError> {
    let q = chi.modulus();
    let n = f.level();
    let d = f.nebentypus().ok_or(LError::UnknownNebentypus)?;
    let eq = eps_d(q as i64).expect("Q odd");
    let phase = C::from_polar(1.0, PI * f.weight());
    Ok(eps_f
        * phase
        * eq.powi(-(f.two_k() as i32))
        * kronecker(n as i64, q as i64) as f64
        * chi.eval(-(n as i64))
        * kronecker(d, q as i64) as f64)
}

/// `χ′ = χ·(·/Q)`, defined for odd `Q`.
pub fn chi_prime(chi: &DirichletCharacter) -> DirichletCharacter {
    let leg = DirichletCharacter::kronecker_mod(chi.modulus()).expect("odd modulus");
    chi.mul(&leg)
}

/// Functional equation check `L*(s, f, χ) = ε* L*(1−s, f, χ, χ′)` with
/// `χ′ = χ(·/Q)`. The right side is `g(1, χ̄)^{−1} Σ_v χ′(v) L*(1−s, v/Q)`,
/// assembled from independently computed additive twists, so `χ′` may be
/// imprimitive. Returns `L*(s, χ)` carrying the empirical `ε*` and the
/// predicted value from [`root_number_star`].
pub fn multiplicative_root_number(
    f: &QExpansion,
    s: C,
    chi: &DirichletCharacter,
    eps_f: C,
) -> Result<(TwistedLResult, C), LError> {
    let q = chi.modulus();
    let cp = chi_prime(chi);
    let mut lhs = completed_l_multiplicative(f, s, chi, eps_f)?;
    let y = 1.3 * default_split(f, q);
    let mut rhs = C::new(0.0, 0.0);
    for v in 1..q as i64 {
        let w = cp.eval(v);
        if w != C::new(0.0, 0.0) {
            rhs += w * completed_l_additive(f, 1.0 - s, v, q, y, eps_f)?.value;
        }
    }
    rhs /= gauss_sum(1, &chi.conj());
    lhs.empirical_root_number = Some(lhs.value / rhs);
    Ok((lhs, root_number_star(f, chi, eps_f)?))
}

/// Additive functional equation check: `L*(s, u/Q) / L*(1−s, v/Q)`, the two
/// sides evaluated at different split points.
pub fn additive_root_number(
    f: &QExpansion,
    s: C,
    u: i64,
    q: u64,
    eps_f: C,
) -> Result<TwistedLResult, LError> {
    let y0 = default_split(f, q);
    let v = dual_twist(u, q, f.level()).ok_or(LError::NotCoprime(q))?;
    let mut lhs = completed_l_additive(f, s, u, q, 0.8 * y0, eps_f)?;
    let rhs = completed_l_additive(f, 1.0 - s, v as i64, q, 1.3 * y0, eps_f)?;
    lhs.empirical_root_number = Some(lhs.value / rhs.value);
    Ok(lhs)
}

/// `(√N Q)^{1/2} (2π)^{−k/2} Γ(k/2)`, the factor between `L*(1/2)` and `L(1/2)`.
pub fn central_prefactor(f: &QExpansion, q: u64) -> Result<C, LError> {
    let k = f.weight();
    let lg = log_gamma(C::new(k / 2.0, 0.0))?;
    Ok(C::new(conductor_scale(f, q).sqrt(), 0.0) * (lg - (k / 2.0) * (2.0 * PI).ln()).exp())
}

/// `L(1/2, f, χ)`.
pub fn central_value(
    f: &QExpansion,
    chi: &DirichletCharacter,
    eps_f: C,
) -> Result<TwistedLResult, LError> {
    let mut r = completed_l_multiplicative(f, C::new(0.5, 0.0), chi, eps_f)?;
    let p = central_prefactor(f, chi.modulus())?;
    r.value /= p;
    r.truncation_error /= p.norm();
    Ok(r)
}

/// Weighting for [`smoothed_coeff_sum`].
#[derive(Debug, Clone, Copy)]
pub enum CoeffSumMode<'a> {
    /// `Σ A(m) χ(m) H(m/x)`.
    Character(&'a DirichletCharacter),
    /// `Σ A(m) g(m, χ′) H(m/x) / g(1, χ̄)`.
    GaussSum(&'a DirichletCharacter),
}

pub fn smoothed_coeff_sum(
    f: &QExpansion,
    mode: CoeffSumMode<'_>,
    h: SmoothCutoff,
    x: f64,
) -> Result<C, LError> {
    if 2.0 * x > f.truncation() as f64 {
        return Err(LError::Truncation {
            need: (2.0 * x).ceil() as u64,
            have: f.truncation(),
        });
    }
    let terms = normalized_terms(f);
    let in_range = terms
        .iter()
        .filter(|&&(m, _)| (m as f64) > x && (m as f64) < 2.0 * x);
    Ok(match mode {
        CoeffSumMode::Character(chi) => in_range
            .map(|&(m, a)| a * chi.eval(m as i64) * h.eval(m as f64 / x))
            .sum(),
        CoeffSumMode::GaussSum(chi) => {
            let cp = chi_prime(chi);
            let g = gauss_sum(1, &chi.conj());
            in_range
                .map(|&(m, a)| a * gauss_sum(m as i64, &cp) * h.eval(m as f64 / x))
                .sum::<C>()
                / g
        }
    })
}
