//! Complex special functions: log-gamma, incomplete gamma, ₂F₁ with its
//! linear transformations, `K_{it}`, conical Legendre functions, the Barnes
//! beta integral, the Riemann zeta function and the function `M(s, t, δ)`.

use crate::quad::{adaptive, circle_mean, gauss_legendre_on};
use num_complex::Complex64;
use std::f64::consts::PI;

type C = Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecialError {
    #[error("gamma function pole at {0}")]
    GammaPole(C),
    #[error("hypergeometric parameter c = {0} is a non-positive integer")]
    HypergeometricC(C),
    #[error("hypergeometric evaluation did not converge at z = {0}")]
    NotConverged(C),
    #[error("contour abscissa {abscissa} passes through a pole")]
    ContourOnPole { abscissa: f64 },
    #[error("contour abscissa {abscissa} is outside (0, Re z)")]
    ContourOutOfStrip { abscissa: f64 },
    #[error("s = {s} lies within {dist:e} of a pole of M")]
    NearPole { s: C, dist: f64 },
    #[error("the defining integral needs Re s > |Im t| + 1/2")]
    OutsideIntegralDomain,
    #[error("zeta has a pole at s = 1")]
    ZetaPole,
}

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn near_nonpositive_integer(z: C, tol: f64) -> bool {
    z.re < 0.5 && (z.re - z.re.round()).abs() < tol && z.im.abs() < tol
}

const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Principal branch of `log Γ(z)`.
///
/// Shifts to `Re z ≥ 10` with `log Γ(z) = log Γ(z+n) − Σ log(z+j)`, which
/// preserves the principal branch off the negative real axis, then applies
/// Stirling's series.
pub fn log_gamma(z: C) -> Result<C, SpecialError> {
    if near_nonpositive_integer(z, 0.0) || (z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()) {
        return Err(SpecialError::GammaPole(z));
    }
    let mut w = z;
    let mut acc = c(0.0);
    while w.re < 10.0 {
        acc += w.ln();
        w += 1.0;
    }
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut series = c(0.0);
    let mut p = inv;
    for coef in STIRLING {
        series += p * coef;
        p *= inv2;
    }
    Ok((w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - acc)
}

pub fn gamma(z: C) -> Result<C, SpecialError> {
    log_gamma(z).map(|l| l.exp())
}

/// `1/Γ(z)`, entire, zero at the poles of `Γ`.
pub fn rgamma(z: C) -> C {
    match log_gamma(z) {
        Ok(l) => (-l).exp(),
        Err(_) => c(0.0),
    }
}

/// `Γ(a, x) = ∫_x^∞ t^{a−1} e^{−t} dt` for `x > 0`.
///
/// For `x < max(Re a + 1, 1.5)` this is `Γ(a) − γ(a, x)` with the power series
/// of `γ`; otherwise the Legendre continued fraction, evaluated by modified
/// Lentz iteration.
pub fn upper_incomplete_gamma(a: C, x: f64) -> Result<C, SpecialError> {
    assert!(x > 0.0, "x must be positive");
    if x < (a.re + 1.0).max(1.5) {
        let mut term = 1.0 / a;
        let mut sum = term;
        for n in 1..10_000 {
            term *= x / (a + n as f64);
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        let lower = sum * (a * x.ln() - x).exp();
        return Ok(gamma(a)? - lower);
    }
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut cc = c(1.0 / tiny);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.norm() < tiny {
            d = c(tiny);
        }
        cc = b + an / cc;
        if cc.norm() < tiny {
            cc = c(tiny);
        }
        d = 1.0 / d;
        let del = d * cc;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    Ok((a * x.ln() - x).exp() * h)
}

fn hyp_series(a: C, b: C, cc: C, z: C, max_terms: usize) -> Result<C, SpecialError> {
    let mut term = c(1.0);
    let mut sum = c(1.0);
    let mut small = 0;
    for n in 0..max_terms {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((cc + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == c(0.0) {
            return Ok(sum);
        }
        if term.norm() <= 1e-17 * sum.norm() {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(SpecialError::NotConverged(z))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Transform {
    Direct,
    Pfaff,
    OneMinus,
    Inverse,
    InverseOneMinus,
    OneMinusInverse,
}

fn transform_arg(t: Transform, z: C) -> C {
    match t {
        Transform::Direct => z,
        Transform::Pfaff => z / (z - 1.0),
        Transform::OneMinus => 1.0 - z,
        Transform::Inverse => 1.0 / z,
        Transform::InverseOneMinus => 1.0 / (1.0 - z),
        Transform::OneMinusInverse => 1.0 - 1.0 / z,
    }
}

fn gratio(num: &[C], den: &[C]) -> Result<C, SpecialError> {
    let mut l = c(0.0);
    for &x in num {
        l += log_gamma(x)?;
    }
    for &x in den {
        if near_nonpositive_integer(x, 0.0) || (x.im == 0.0 && x.re <= 0.0 && x.re == x.re.round())
        {
            return Ok(c(0.0));
        }
        l -= log_gamma(x)?;
    }
    Ok(l.exp())
}

fn apply_transform(t: Transform, a: C, b: C, cc: C, z: C) -> Result<C, SpecialError> {
    let w = transform_arg(t, z);
    let s = |a, b, c| hyp_series(a, b, c, w, 100_000);
    Ok(match t {
        Transform::Direct => s(a, b, cc)?,
        Transform::Pfaff => (1.0 - z).powc(-a) * s(a, cc - b, cc)?,
        Transform::OneMinus => {
            let t1 = gratio(&[cc, cc - a - b], &[cc - a, cc - b])? * s(a, b, a + b - cc + 1.0)?;
            let t2 = gratio(&[cc, a + b - cc], &[a, b])?
                * (1.0 - z).powc(cc - a - b)
                * s(cc - a, cc - b, cc - a - b + 1.0)?;
            t1 + t2
        }
        Transform::Inverse => {
            let mz = -z;
            let t1 = gratio(&[cc, b - a], &[b, cc - a])?
                * mz.powc(-a)
                * s(a, 1.0 - cc + a, 1.0 - b + a)?;
            let t2 = gratio(&[cc, a - b], &[a, cc - b])?
                * mz.powc(-b)
                * s(b, 1.0 - cc + b, 1.0 - a + b)?;
            t1 + t2
        }
        Transform::InverseOneMinus => {
            let omz = 1.0 - z;
            let t1 =
                gratio(&[cc, b - a], &[b, cc - a])? * omz.powc(-a) * s(a, cc - b, a - b + 1.0)?;
            let t2 =
                gratio(&[cc, a - b], &[a, cc - b])? * omz.powc(-b) * s(b, cc - a, b - a + 1.0)?;
            t1 + t2
        }
        Transform::OneMinusInverse => {
            let t1 = gratio(&[cc, cc - a - b], &[cc - a, cc - b])?
                * z.powc(-a)
                * s(a, a - cc + 1.0, a + b - cc + 1.0)?;
            let t2 = gratio(&[cc, a + b - cc], &[a, b])?
                * (1.0 - z).powc(cc - a - b)
                * z.powc(a - cc)
                * s(cc - a, 1.0 - a, cc - a - b + 1.0)?;
            t1 + t2
        }
    })
}

fn near_integer(z: C, tol: f64) -> bool {
    (z.re - z.re.round()).abs() < tol && z.im.abs() < tol
}

fn degenerate(t: Transform, a: C, b: C, cc: C) -> bool {
    let tol = 1e-3;
    match t {
        Transform::Direct | Transform::Pfaff => false,
        Transform::OneMinus | Transform::OneMinusInverse => near_integer(cc - a - b, tol),
        Transform::Inverse | Transform::InverseOneMinus => near_integer(a - b, tol),
    }
}

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` on the principal branch.
///
/// Uses the power series for `|z| ≤ 0.9`, otherwise whichever of the five
/// standard linear transformations gives the smallest argument. When the
/// chosen transformation is degenerate (an integer parameter difference),
/// the series is summed directly for `|z| < 0.999`; beyond that the value is
/// the mean over a small circle in `b`, on which `₂F₁` is entire.
pub fn gauss_2f1(a: C, b: C, cc: C, z: C) -> Result<C, SpecialError> {
    if near_nonpositive_integer(cc, 1e-12) {
        return Err(SpecialError::HypergeometricC(cc));
    }
    if z == c(0.0) {
        return Ok(c(1.0));
    }
    let terminating = near_nonpositive_integer(a, 0.0) || near_nonpositive_integer(b, 0.0);
    if z.norm() <= 0.9 || terminating {
        return hyp_series(a, b, cc, z, 1_000_000);
    }
    let all = [
        Transform::Direct,
        Transform::Pfaff,
        Transform::OneMinus,
        Transform::Inverse,
        Transform::InverseOneMinus,
        Transform::OneMinusInverse,
    ];
    let best = all
        .into_iter()
        .filter(|&t| t == Transform::Direct || (z - 1.0).norm() > 0.0)
        .min_by(|&x, &y| {
            transform_arg(x, z)
                .norm()
                .total_cmp(&transform_arg(y, z).norm())
        })
        .unwrap();
    if transform_arg(best, z).norm() >= 0.95 {
        return if z.norm() < 1.0 {
            hyp_series(a, b, cc, z, 2_000_000)
        } else {
            Err(SpecialError::NotConverged(z))
        };
    }
    if degenerate(best, a, b, cc) && z.norm() < 0.999 {
        return hyp_series(a, b, cc, z, 2_000_000);
    }
    if degenerate(best, a, b, cc) {
        let mut err = None;
        let v = circle_mean(
            |bb| match apply_transform(best, a, bb, cc, z) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    c(0.0)
                }
            },
            b,
            0.05,
            24,
        );
        return match err {
            Some(e) => Err(e),
            None => Ok(v),
        };
    }
    apply_transform(best, a, b, cc, z)
}

/// `e^y K_{it}(y) = ∫_0^∞ e^{−y(cosh u − 1)} cos(tu) du`.
pub fn bessel_k_scaled(t: C, y: f64) -> C {
    let u_max = (1.0 + 50.0 / y).acosh() + 1.0;
    adaptive(
        |u| (-y * (u.cosh() - 1.0)).exp() * (t * u).cos(),
        0.0,
        u_max,
        1e-17,
        1e-14,
    )
    .value
}

/// `K_{it}(y)` for real `t` and `y > 0`, from the cosh-integral representation.
pub fn bessel_k_imaginary_order(t: f64, y: f64) -> f64 {
    assert!(y > 0.0);
    (bessel_k_scaled(c(t), y) * (-y).exp()).re
}

/// Conical function `P_{−1/2+it}(x)` for `x ≥ 1` via Laplace's integral
/// `(1/π) ∫_0^π (x + √(x²−1) cos φ)^{−1/2+it} dφ`.
pub fn legendre_p_on_axis(t: f64, x: f64) -> f64 {
    assert!(x >= 1.0);
    let r = (x * x - 1.0).sqrt();
    let nu = C::new(-0.5, t);
    let lo = 1.0 / (x + r);
    let v = adaptive(
        |phi| {
            let half = (0.5 * phi).cos();
            c(lo + 2.0 * r * half * half).powc(nu)
        },
        0.0,
        PI,
        1e-16,
        1e-14,
    );
    v.value.re / PI
}

/// Conical function `P_{−1/2+it}(cosh r)` from Mehler's integral
/// `(√2/π) ∫_0^r cos(ts) (cosh r − cosh s)^{−1/2} ds`, with `s = r(1−v²)`
/// and a fixed Gauss–Legendre rule sized to the oscillation count `t·r`.
pub fn conical_legendre(t: f64, r: f64) -> f64 {
    let r = r.abs();
    if r == 0.0 {
        return 1.0;
    }
    let n = 48 + (1.2 * t.abs() * r) as usize;
    let (xs, ws) = gauss_legendre_on(n.min(4000), 0.0, 1.0);
    let sum: f64 = xs
        .iter()
        .zip(&ws)
        .map(|(&v, &w)| {
            let s = r * (1.0 - v * v);
            // cosh r − cosh s = 2 sinh((r+s)/2) sinh((r−s)/2)
            let diff = 2.0 * (0.5 * (r + s)).sinh() * (0.5 * r * v * v).sinh();
            if diff <= 0.0 {
                return w * (t * r).cos() * 2.0 * (r / r.sinh()).sqrt();
            }
            w * (t * s).cos() * 2.0 * r * v / diff.sqrt()
        })
        .sum();
    sum * 2f64.sqrt() / PI
}

/// `(1/2πi) ∫_{(γ)} Γ(u)Γ(z−u)/Γ(z) t^{−u} du`, which equals `(1+t)^{−z}`
/// for `0 < γ < Re z`.
pub fn barnes_beta_integral(z: C, t: f64, abscissa: f64) -> Result<C, SpecialError> {
    let on_pole = (abscissa <= 0.0 && abscissa == abscissa.round()) || {
        let d = abscissa - z.re;
        d >= 0.0 && (d - d.round()).abs() < 1e-12
    };
    if on_pole {
        return Err(SpecialError::ContourOnPole { abscissa });
    }
    if abscissa <= 0.0 || abscissa > z.re {
        return Err(SpecialError::ContourOutOfStrip { abscissa });
    }
    let lgz = log_gamma(z)?;
    let lt = t.ln();
    let half_width = z.im.abs() + 30.0 + z.re.abs();
    let v = adaptive(
        |v| {
            let u = C::new(abscissa, v);
            match (log_gamma(u), log_gamma(z - u)) {
                (Ok(a), Ok(b)) => (a + b - lgz - u * lt).exp(),
                _ => c(0.0),
            }
        },
        -half_width,
        half_width,
        1e-18,
        1e-14,
    );
    Ok(v.value / (2.0 * PI))
}

const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174_611.0 / 330.0,
];

/// Riemann zeta function by Euler–Maclaurin summation.
pub fn zeta(s: C) -> Result<C, SpecialError> {
    if (s - 1.0).norm() == 0.0 {
        return Err(SpecialError::ZetaPole);
    }
    if s.re < 0.0 {
        // functional equation ζ(s) = 2^s π^{s−1} sin(πs/2) Γ(1−s) ζ(1−s)
        let one_minus = 1.0 - s;
        return Ok(c(2.0).powc(s)
            * c(PI).powc(s - 1.0)
            * (s * PI / 2.0).sin()
            * gamma(one_minus)?
            * zeta(one_minus)?);
    }
    let n = (20.0 + s.im.abs()).ceil() as usize;
    let nf = n as f64;
    let mut sum = c(0.0);
    for k in 1..n {
        sum += c(k as f64).powc(-s);
    }
    let npow = c(nf).powc(-s);
    sum += npow * 0.5 + npow * nf / (s - 1.0);
    let mut rising = s;
    let mut fact = 2.0;
    let mut pw = npow / nf;
    for (j, b) in BERNOULLI.iter().enumerate() {
        sum += rising * pw * (b / fact);
        let k = 2 * j + 2;
        rising *= (s + (k - 1) as f64) * (s + k as f64);
        fact *= ((k + 1) * (k + 2)) as f64;
        pw /= nf * nf;
    }
    Ok(sum)
}

/// Parameters of `M(s, t, δ) = ∫_0^∞ e^{(1−δ)y} K_{it}(y) y^{s−1/2} dy/y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MFunctionParams {
    pub s: C,
    pub t: C,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MMethod {
    Quadrature,
    HypergeometricFar,
    HypergeometricNear,
}

/// Distance from `s` to the nearest pole `1/2 ± it − r` of `M`.
pub fn m_pole_distance(s: C, t: C) -> f64 {
    let i = C::new(0.0, 1.0);
    [0.5 + i * t, 0.5 - i * t]
        .iter()
        .map(|&p| {
            let r = (p.re - s.re).round().max(0.0);
            (s - (p - r)).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn m_function(p: MFunctionParams, method: MMethod) -> Result<C, SpecialError> {
    let dist = m_pole_distance(p.s, p.t);
    if dist < 1e-6 {
        return Err(SpecialError::NearPole { s: p.s, dist });
    }
    match method {
        MMethod::Quadrature => m_quadrature(p),
        MMethod::HypergeometricFar => m_far(p),
        MMethod::HypergeometricNear => {
            // Both summands have poles at integers s ≥ 1 that cancel; average
            // over a circle enclosing the removable singularity instead.
            let n = p.s.re.round();
            if n >= 1.0 && (p.s - n).norm() < 0.02 {
                let mut err = None;
                let v = circle_mean(
                    |s| {
                        m_near(MFunctionParams { s, ..p }).unwrap_or_else(|e| {
                            err = Some(e);
                            c(0.0)
                        })
                    },
                    p.s,
                    0.05,
                    16,
                );
                return err.map_or(Ok(v), Err);
            }
            m_near(p)
        }
    }
}

fn m_quadrature(p: MFunctionParams) -> Result<C, SpecialError> {
    let sigma = p.s.re;
    if sigma <= p.t.im.abs() + 0.5 {
        return Err(SpecialError::OutsideIntegralDomain);
    }
    // In v = log y the integrand is e^{−δy} e^y K_{it}(y) y^{s−1/2}; it decays
    // like y^{σ−1/2−|Im t|} at 0 and like e^{−δy} y^{σ−1} at infinity.
    let low_rate = sigma - 0.5 - p.t.im.abs();
    let v_min = -(45.0 / low_rate).min(700.0);
    let mut y_max: f64 = 10.0 / p.delta;
    while p.delta * y_max - (sigma - 1.0).max(0.0) * y_max.ln() < 45.0 {
        y_max *= 1.5;
    }
    let s_half = p.s - 0.5;
    let v = adaptive(
        |v| {
            let y = v.exp();
            (-p.delta * y + s_half * v).exp() * bessel_k_scaled(p.t, y)
        },
        v_min,
        y_max.ln(),
        1e-300,
        1e-12,
    );
    Ok(v.value)
}

fn m_far(p: MFunctionParams) -> Result<C, SpecialError> {
    let i = C::new(0.0, 1.0);
    let (s, t, d) = (p.s, p.t, p.delta);
    let a = s - 0.5 + i * t;
    let pre = PI.sqrt() * c(2.0).powc(i * t) * c(d).powc(-a);
    let g = gratio(&[s - 0.5 - i * t, s - 0.5 + i * t], &[s])?;
    Ok(pre * g * gauss_2f1(a, 0.5 + i * t, s, c(1.0 - 2.0 / d))?)
}

fn m_near(p: MFunctionParams) -> Result<C, SpecialError> {
    let i = C::new(0.0, 1.0);
    let (s, t, d) = (p.s, p.t, p.delta);
    let g1 = gratio(
        &[s - 0.5 + i * t, s - 0.5 - i * t, 1.0 - s],
        &[0.5 + i * t, 0.5 - i * t],
    )?;
    let t1 = PI.sqrt()
        * c(2.0).powc(0.5 - s)
        * g1
        * gauss_2f1(s - 0.5 + i * t, s - 0.5 - i * t, s, c(d / 2.0))?;
    let t2 = (PI / 2.0).sqrt()
        * gamma(s - 1.0)?
        * c(d).powc(1.0 - s)
        * gauss_2f1(0.5 + i * t, 0.5 - i * t, 2.0 - s, c(d / 2.0))?;
    Ok(t1 + t2)
}

/// `M(s, t, 0) = √π 2^{1/2−s} Γ(s−1/2+it)Γ(s−1/2−it)Γ(1−s) / (Γ(1/2+it)Γ(1/2−it))`,
/// the `δ → 0` limit for `Re s < 1`.
pub fn m_function_delta_zero(s: C, t: C) -> Result<C, SpecialError> {
    let i = C::new(0.0, 1.0);
    let g = gratio(
        &[s - 0.5 + i * t, s - 0.5 - i * t, 1.0 - s],
        &[0.5 + i * t, 0.5 - i * t],
    )?;
    Ok(PI.sqrt() * c(2.0).powc(0.5 - s) * g)
}

/// Leading term of the residue of `M` at `s = 1/2 ± it − r`:
/// `(−1)^r √π 2^{r∓it} Γ(1/2∓it+r) Γ(±2it−r) / (r! Γ(1/2+it) Γ(1/2−it))`.
pub fn m_residue_leading(t: C, r: u32, plus: bool) -> Result<C, SpecialError> {
    let i = C::new(0.0, 1.0);
    let sg = if plus { 1.0 } else { -1.0 };
    let rf = r as f64;
    let g = gratio(
        &[0.5 - sg * i * t + rf, sg * 2.0 * i * t - rf],
        &[c(rf + 1.0), 0.5 + i * t, 0.5 - i * t],
    )?;
    let sign = if r.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * PI.sqrt() * c(2.0).powc(rf - sg * i * t) * g)
}

/// Numerical residue `(1/2πi) ∮ M ds` over a circle of radius `r` about `s0`.
pub fn m_residue_probe(s0: C, t: C, delta: f64, r: f64) -> Result<C, SpecialError> {
    let mut err = None;
    let v = circle_mean(
        |s| match m_far(MFunctionParams { s, t, delta }) {
            Ok(v) => v * (s - s0),
            Err(e) => {
                err = Some(e);
                c(0.0)
            }
        },
        s0,
        r,
        32,
    );
    err.map_or(Ok(v), Err)
}
