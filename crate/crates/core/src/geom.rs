//! Hyperbolic plane in upper half-plane and disc coordinates, and the theta
//! averages of holomorphic forms pulled back to the disc.
//!
//! The Poisson-power average
//! `(1/2π)∫ e^{ihθ} ((1−ρ²)/|1−ρe^{iθ}|²)^k dθ` has the closed form
//! `(1−ρ²)^k ρ^{|h|} Γ(k+|h|)/(Γ(k)Γ(|h|+1)) ₂F₁(k, k+|h|; |h|+1; ρ²)`.
//! The normalization `Γ(k+|h|)/(Γ(k)Γ(|h|))` is off by a factor `|h|` and is
//! rejected by the quadrature comparison in the tests.

use crate::qexp::{evaluate, QExpansion, QexpError};
use crate::quad::adaptive;
use crate::special::{gauss_2f1, log_gamma, SpecialError};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

type C = Complex64;

#[derive(Debug, thiserror::Error)]
pub enum GeomError {
    #[error("disc center must lie in the upper half plane, got {0}")]
    InvalidFrame(C),
    #[error("|ρ| = {rho} is not inside the extraction radius {radius}")]
    Conditioning { rho: f64, radius: f64 },
    #[error("theta quadrature did not converge at ρ = {rho} (error {error:.2e})")]
    Quadrature { rho: f64, error: f64 },
    #[error(transparent)]
    Qexp(#[from] QexpError),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// `|z−z′|²/(4 Im z Im z′)`; `cosh d(z, z′) = 2u + 1`.
pub fn point_pair_u(z: C, z_prime: C) -> f64 {
    (z - z_prime).norm_sqr() / (4.0 * z.im * z_prime.im)
}

pub fn hyperbolic_distance(z: C, z_prime: C) -> f64 {
    (1.0 + 2.0 * point_pair_u(z, z_prime)).acosh()
}

/// Disc coordinates centred at `z′`: `w = (z − z′)/(z − z̄′)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscCenterFrame {
    z_prime: C,
}

impl DiscCenterFrame {
    pub fn new(z_prime: C) -> Result<Self, GeomError> {
        if !(z_prime.im > 0.0) || !z_prime.re.is_finite() {
            return Err(GeomError::InvalidFrame(z_prime));
        }
        Ok(Self { z_prime })
    }

    pub fn z_prime(&self) -> C {
        self.z_prime
    }

    pub fn y_prime(&self) -> f64 {
        self.z_prime.im
    }
}

pub fn disc_map(z: C, frame: &DiscCenterFrame) -> C {
    let zp = frame.z_prime;
    (z - zp) / (z - zp.conj())
}

pub fn inverse_disc_map(w: C, frame: &DiscCenterFrame) -> C {
    let zp = frame.z_prime;
    (zp - w * zp.conj()) / (1.0 - w)
}

/// Pullback factor `(1−|w|²)/|1−w|²`, so that `Im z = y′ · factor`.
pub fn poisson_factor(w: C) -> f64 {
    (1.0 - w.norm_sqr()) / (1.0 - w).norm_sqr()
}

/// Largest relative residual of `y^s = ((1−|w|²)/|1−w|²)^s y′^s` over `grid`.
pub fn ys_transform_check(frame: &DiscCenterFrame, s: C, grid: &[C]) -> f64 {
    grid.iter()
        .map(|&w| {
            let y = inverse_disc_map(w, frame).im;
            let lhs = C::new(y, 0.0).powc(s);
            let rhs = C::new(poisson_factor(w), 0.0).powc(s) * C::new(frame.y_prime(), 0.0).powc(s);
            (lhs - rhs).norm() / lhs.norm().max(1e-300)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonPower {
    pub quadrature: f64,
    pub closed_form: f64,
}

/// Closed form of the Poisson-power average; analytic in `ρ` for `|ρ| < 1`.
pub fn poisson_power_closed(k: f64, h: i64, rho: C) -> Result<C, GeomError> {
    let h = h.unsigned_abs() as f64;
    let k_c = C::new(k, 0.0);
    let norm =
        (log_gamma(C::new(k + h, 0.0))? - log_gamma(k_c)? - log_gamma(C::new(h + 1.0, 0.0))?).exp();
    let rho2 = rho * rho;
    let f = gauss_2f1(k_c, C::new(k + h, 0.0), C::new(h + 1.0, 0.0), rho2)?;
    Ok((1.0 - rho2).powf(k) * rho.powf(h) * norm * f)
}

/// The Poisson-power average by adaptive quadrature and by its closed form.
pub fn poisson_power_integral(k: f64, h: i64, rho: f64) -> Result<PoissonPower, GeomError> {
    let num = 1.0 - rho * rho;
    // the integrand is even in θ, so only cos(hθ) contributes
    let q = adaptive(
        |t| {
            let den = 1.0 - 2.0 * rho * t.cos() + rho * rho;
            C::new((h as f64 * t).cos() * (num / den).powf(k), 0.0)
        },
        0.0,
        PI,
        1e-15,
        1e-14,
    );
    let scale = ((1.0 + rho) / (1.0 - rho)).powf(k);
    if !(q.error <= 1e-12 * scale.max(1.0)) {
        return Err(GeomError::Quadrature {
            rho,
            error: q.error,
        });
    }
    Ok(PoissonPower {
        quadrature: q.value.re / PI,
        closed_form: poisson_power_closed(k, h, C::new(rho, 0.0))?.re,
    })
}

/// Taylor coefficients of `φ(w) = f(z(w))` about the disc center, extracted
/// from `points` equispaced samples on `|w| = radius`.
#[derive(Debug, Clone)]
pub struct DiscTaylor {
    pub radius: f64,
    /// `a_n` for `0 ≤ n < points/2`.
    pub coeffs: Vec<C>,
}

pub fn disc_taylor(
    f: &QExpansion,
    frame: &DiscCenterFrame,
    radius: f64,
    points: usize,
) -> Result<DiscTaylor, GeomError> {
    assert!(radius > 0.0 && radius < 1.0 && points >= 2);
    let mut buf = (0..points)
        .map(|j| {
            let w = C::from_polar(radius, 2.0 * PI * j as f64 / points as f64);
            evaluate(f, inverse_disc_map(w, frame), 1e-15)
        })
        .collect::<Result<Vec<_>, _>>()?;
    FftPlanner::new().plan_fft_forward(points).process(&mut buf);
    let coeffs = buf
        .iter()
        .take(points / 2)
        .enumerate()
        .map(|(n, &v)| v / (points as f64 * radius.powi(n as i32)))
        .collect();
    Ok(DiscTaylor { radius, coeffs })
}

/// `B(ρ)` through the double series in the Taylor coefficients of two
/// pulled-back forms of common weight `k`.
#[derive(Debug, Clone)]
pub struct BRhoSeries {
    pub a: DiscTaylor,
    pub b: DiscTaylor,
    pub weight: f64,
}

impl BRhoSeries {
    pub fn new(
        f1: &QExpansion,
        f2: &QExpansion,
        frame: &DiscCenterFrame,
        radius: f64,
        points: usize,
    ) -> Result<Self, GeomError> {
        assert_eq!(f1.two_k(), f2.two_k(), "forms must share a weight");
        Ok(Self {
            a: disc_taylor(f1, frame, radius, points)?,
            b: disc_taylor(f2, frame, radius, points)?,
            weight: f1.weight(),
        })
    }

    /// Sum over shifts `|h| ≤ h_max` (and all available coefficients).
    pub fn eval(&self, rho: C, h_max: usize) -> Result<C, GeomError> {
        let radius = self.a.radius.min(self.b.radius);
        if rho.norm() >= radius {
            return Err(GeomError::Conditioning {
                rho: rho.norm(),
                radius,
            });
        }
        let (a, b) = (&self.a.coeffs, &self.b.coeffs);
        let len = a.len().min(b.len());
        let k = self.weight;
        let k_c = C::new(k, 0.0);
        let rho2 = rho * rho;
        let pre = (1.0 - rho2).powf(k);
        let mut total = C::new(0.0, 0.0);
        for h in 0..len.min(h_max + 1) {
            let hf = h as f64;
            let norm = (log_gamma(C::new(k + hf, 0.0))?
                - log_gamma(k_c)?
                - log_gamma(C::new(hf + 1.0, 0.0))?)
            .exp();
            let f = gauss_2f1(k_c, C::new(k + hf, 0.0), C::new(hf + 1.0, 0.0), rho2)?;
            let mut inner = C::new(0.0, 0.0);
            let mut pw = rho2.powf(hf);
            for n in 0..len - h {
                let mut t = a[n + h] * b[n].conj();
                if h > 0 {
                    t += a[n] * b[n + h].conj();
                }
                inner += t * pw;
                pw *= rho2;
            }
            total += inner * norm * f;
        }
        Ok(total * pre)
    }
}

/// `B(ρ) = (1/2π)∫ φ₁ φ̄₂ ((1−ρ²)/|1−ρe^{iθ}|²)^k dθ` for real `ρ`, by the
/// periodic trapezoid rule with doubling.
pub fn b_rho_direct(
    f1: &QExpansion,
    f2: &QExpansion,
    frame: &DiscCenterFrame,
    rho: f64,
    tol: f64,
) -> Result<C, GeomError> {
    let k = f1.weight();
    let sample = |theta: f64| -> Result<C, GeomError> {
        let w = C::from_polar(rho, theta);
        let z = inverse_disc_map(w, frame);
        let p = poisson_factor(w);
        Ok(evaluate(f1, z, 1e-15)? * evaluate(f2, z, 1e-15)?.conj() * p.powf(k))
    };
    let mut n = 64usize;
    let mut sum: C = (0..n)
        .map(|j| sample(2.0 * PI * j as f64 / n as f64))
        .sum::<Result<C, _>>()?;
    let mut prev = sum / n as f64;
    while n < 1 << 18 {
        let odd: C = (0..n)
            .map(|j| sample(2.0 * PI * (j as f64 + 0.5) / n as f64))
            .sum::<Result<C, _>>()?;
        sum += odd;
        n *= 2;
        let cur = sum / n as f64;
        if (cur - prev).norm() <= tol * cur.norm().max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(GeomError::Quadrature {
        rho,
        error: (sum / n as f64 - prev).norm(),
    })
}

/// `M₁M₂ y′^{−k} 2^{4k} (1−|ρ|²)^{−2k} |1−ρ²|^{−(2k−1)}`.
pub fn b_rho_bound(m1: f64, m2: f64, y_prime: f64, k: f64, rho: C) -> f64 {
    m1 * m2
        * y_prime.powf(-k)
        * 2f64.powf(4.0 * k)
        * (1.0 - rho.norm_sqr()).powf(-2.0 * k)
        * (1.0 - rho * rho).norm().powf(1.0 - 2.0 * k)
}

/// `max |₂F₁(k, h+k; h+1; ρ²)(1−ρ²)^{2k−1}|` over the grid.
pub fn hyp_bound_property(k: f64, hs: &[u64], rhos: &[f64]) -> Result<f64, GeomError> {
    let mut best = 0.0f64;
    for &h in hs {
        let hf = h as f64;
        for &rho in rhos {
            let x = rho * rho;
            let f = gauss_2f1(
                C::new(k, 0.0),
                C::new(hf + k, 0.0),
                C::new(hf + 1.0, 0.0),
                C::new(x, 0.0),
            )?;
            best = best.max((f * (1.0 - x).powf(2.0 * k - 1.0)).norm());
        }
    }
    Ok(best)
}
