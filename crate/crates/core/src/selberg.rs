//! The Selberg/Harish-Chandra transform between a point-pair invariant
//! `k(u)` and its spectral profile `h(t)`, the Gaussian localizer pair,
//! automorphic kernels on `Γ₀(N)` and the kernel pairing against
//! `f₁ f̄₂ y^k`.
//!
//! Normalization (the standard Abel pair):
//! `q(v) = ∫_ℝ k(v+w²) dw`, `g(r) = 2q(sinh²(r/2))`, `h(t) = ∫_ℝ g(r)e^{irt} dr`,
//! inverted by `g(ξ) = (1/2π)∫ h(t)e^{−itξ} dt` and
//! `k(u) = −(1/π)∫_u^∞ q′(v)(v−u)^{−1/2} dv`. In this normalization the
//! one-step forms are `h(t) = 4π∫_0^∞ k(u) P_{−1/2+it}(1+2u) du` and
//! `k(u) = (1/4π)∫_ℝ P_{−1/2+it}(1+2u) h(t) t tanh(πt) dt`.

use crate::arith::gamma0_index;
use crate::geom::{b_rho_direct, DiscCenterFrame, GeomError};
use crate::qexp::{sup_norm_estimate, QExpansion};
use crate::quad::{adaptive_real, gauss_legendre_on};
use crate::special::conical_legendre;
use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use std::f64::consts::PI;

type C = Complex64;

/// Distance beyond which the kernels used here are treated as zero.
pub const DEFAULT_R_MAX: f64 = 8.0;

const PANELS: usize = 64;
const PANEL_ORDER: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum SelbergError {
    #[error("T must be positive, got {0}")]
    InvalidT(f64),
    #[error("orbit tail bound {tail:.2e} exceeds tolerance {tol:.2e}")]
    Cutoff { tail: f64, tol: f64 },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Chebyshev interpolant on `[a, b]`.
#[derive(Debug, Clone)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| 0.5 * (a + b) + 0.5 * (b - a) * (PI * (j as f64 + 0.5) / n as f64).cos())
            .collect()
    }

    /// Interpolant through values at [`Chebyshev::nodes`].
    pub fn from_node_values(a: f64, b: f64, vals: &[f64]) -> Self {
        let n = vals.len();
        let coeffs = (0..n)
            .map(|m| {
                let s: f64 = vals
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (m as f64 * PI * (j as f64 + 0.5) / n as f64).cos())
                    .sum();
                s * if m == 0 { 1.0 } else { 2.0 } / n as f64
            })
            .collect();
        Self { a, b, coeffs }
    }

    pub fn fit<F: Fn(f64) -> f64 + Sync>(f: F, a: f64, b: f64, n: usize) -> Self {
        let vals: Vec<f64> = Self::nodes(a, b, n).par_iter().map(|&x| f(x)).collect();
        Self::from_node_values(a, b, &vals)
    }

    /// Value at `x`, zero outside the interval.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        let s = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * s * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        s * b1 - b2 + self.coeffs[0]
    }

    /// Sum of the absolute values of the last eight coefficients.
    pub fn tail(&self) -> f64 {
        self.coeffs.iter().rev().take(8).map(|c| c.abs()).sum()
    }
}

pub fn u_from_distance(r: f64) -> f64 {
    let s = (0.5 * r).sinh();
    s * s
}

pub fn distance_from_u(u: f64) -> f64 {
    2.0 * u.max(0.0).sqrt().asinh()
}

fn panel_nodes(a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (mut x, mut w) = (Vec::new(), Vec::new());
    let step = (b - a) / PANELS as f64;
    for p in 0..PANELS {
        let (px, pw) =
            gauss_legendre_on(PANEL_ORDER, a + p as f64 * step, a + (p + 1) as f64 * step);
        x.extend(px);
        w.extend(pw);
    }
    (x, w)
}

/// `∫_r^∞ φ(ξ) (sinh²(ξ/2) − sinh²(r/2))^{−1/2} dξ` for `φ` negligible past
/// `xi_max`, with `ξ = r + τ²` removing the endpoint singularity.
fn abel_in_distance<F: Fn(f64) -> f64>(phi: F, r: f64, xi_max: f64) -> f64 {
    if r >= xi_max {
        return 0.0;
    }
    let tau_max = (xi_max - r).sqrt();
    adaptive_real(
        |tau| {
            if tau == 0.0 {
                return 0.0;
            }
            let t2 = tau * tau;
            let den = ((r + 0.5 * t2).sinh() * (0.5 * t2).sinh()).sqrt();
            phi(r + t2) * 2.0 * tau / den
        },
        0.0,
        tau_max,
        1e-14,
        1e-12,
    )
}

/// `q(v) = ∫_ℝ k(v+w²) dw` for `k` supported in `u ≤ u_max`.
fn abel_forward<K: Fn(f64) -> f64>(k: &K, v: f64, u_max: f64) -> f64 {
    if v >= u_max {
        return 0.0;
    }
    2.0 * adaptive_real(|w| k(v + w * w), 0.0, (u_max - v).sqrt(), 1e-14, 1e-12)
}

/// Harish-Chandra transform by the Abel, change-of-variable and Fourier steps.
pub fn forward_three_step<K: Fn(f64) -> f64 + Sync>(k: K, r_max: f64, ts: &[f64]) -> Vec<f64> {
    let u_max = u_from_distance(r_max);
    let (rs, ws) = panel_nodes(0.0, r_max);
    let g: Vec<f64> = rs
        .par_iter()
        .map(|&r| 2.0 * abel_forward(&k, u_from_distance(r), u_max))
        .collect();
    ts.iter()
        .map(|&t| {
            2.0 * rs
                .iter()
                .zip(&ws)
                .zip(&g)
                .map(|((r, w), g)| w * g * (r * t).cos())
                .sum::<f64>()
        })
        .collect()
}

/// `h(t) = 4π∫_0^∞ k(u) P_{−1/2+it}(1+2u) du`, integrated in the distance
/// variable as `2π∫ k(sinh²(r/2)) P_{−1/2+it}(cosh r) sinh r dr`.
pub fn forward_single_step<K: Fn(f64) -> f64 + Sync>(k: K, r_max: f64, ts: &[f64]) -> Vec<f64> {
    let (rs, ws) = panel_nodes(0.0, r_max);
    let kw: Vec<f64> = rs
        .iter()
        .zip(&ws)
        .map(|(&r, w)| w * k(u_from_distance(r)) * r.sinh())
        .collect();
    ts.par_iter()
        .map(|&t| {
            2.0 * PI
                * rs.iter()
                    .zip(&kw)
                    .filter(|(_, w)| **w != 0.0)
                    .map(|(&r, w)| w * conical_legendre(t, r))
                    .sum::<f64>()
        })
        .collect()
}

/// `g′(ξ) = −(1/π)∫_0^∞ h(t) t sin(tξ) dt` tabulated on `[0, xi_max]`.
fn g_prime_table<H: Fn(f64) -> f64 + Sync>(h: &H, t_max: f64, xi_max: f64) -> Chebyshev {
    let (ts, ws) = panel_nodes(0.0, t_max);
    let hw: Vec<f64> = ts.iter().zip(&ws).map(|(&t, w)| w * h(t) * t).collect();
    Chebyshev::fit(
        |xi| {
            -ts.iter()
                .zip(&hw)
                .map(|(t, hw)| hw * (t * xi).sin())
                .sum::<f64>()
                / PI
        },
        0.0,
        xi_max,
        384,
    )
}

/// Inverse transform through Fourier inversion, the change of variables and
/// Abel inversion, for even `h` negligible past `t_max`.
pub fn inverse_three_step<H: Fn(f64) -> f64 + Sync>(h: H, t_max: f64, us: &[f64]) -> Vec<f64> {
    let gp = g_prime_table(&h, t_max, DEFAULT_R_MAX);
    // k(u) = −(1/π)∫ q′ dv/√(v−u) with q′(v) dv = g′(ξ)/2 dξ
    us.par_iter()
        .map(|&u| {
            -abel_in_distance(|xi| gp.eval(xi), distance_from_u(u), DEFAULT_R_MAX) / (2.0 * PI)
        })
        .collect()
}

/// Inverse transform through the Legendre integral with weight `t tanh(πt)`.
pub fn inverse_legendre<H: Fn(f64) -> f64 + Sync>(h: H, t_max: f64, us: &[f64]) -> Vec<f64> {
    let (ts, ws) = panel_nodes(0.0, t_max);
    let hw: Vec<f64> = ts
        .iter()
        .zip(&ws)
        .map(|(&t, w)| w * h(t) * t * (PI * t).tanh())
        .collect();
    us.par_iter()
        .map(|&u| {
            let r = distance_from_u(u);
            ts.iter()
                .zip(&hw)
                .map(|(&t, w)| w * conical_legendre(t, r))
                .sum::<f64>()
                / (2.0 * PI)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    FromK,
    FromH,
    AnalyticPair,
}

/// A transform pair, tabulated: `k` and `g` in the distance variable on
/// `[0, r_max]`, `h` on `[0, t_max]` and extended evenly.
#[derive(Debug, Clone)]
pub struct TransformPair {
    k: Chebyshev,
    g: Chebyshev,
    h: Chebyshev,
    pub r_max: f64,
    pub t_max: f64,
    pub provenance: Provenance,
}

impl TransformPair {
    pub fn k(&self, u: f64) -> f64 {
        self.k.eval(distance_from_u(u))
    }

    pub fn k_at_distance(&self, r: f64) -> f64 {
        self.k.eval(r.abs())
    }

    pub fn q(&self, v: f64) -> f64 {
        0.5 * self.g.eval(distance_from_u(v))
    }

    pub fn g(&self, r: f64) -> f64 {
        self.g.eval(r.abs())
    }

    pub fn h(&self, t: f64) -> f64 {
        self.h.eval(t.abs())
    }
}

const TABLE_NODES: usize = 384;

/// Tabulates the transform of `k` (a function of `u`).
pub fn pair_from_k<K: Fn(f64) -> f64 + Sync>(k: K, r_max: f64, t_max: f64) -> TransformPair {
    let u_max = u_from_distance(r_max);
    let k_tab = Chebyshev::fit(|r| k(u_from_distance(r)), 0.0, r_max, TABLE_NODES);
    let kf = |u: f64| k_tab.eval(distance_from_u(u));
    let g = Chebyshev::fit(
        |r| 2.0 * abel_forward(&kf, u_from_distance(r), u_max),
        0.0,
        r_max,
        TABLE_NODES,
    );
    let hs = forward_three_step(kf, r_max, &Chebyshev::nodes(0.0, t_max, TABLE_NODES));
    let h = Chebyshev::from_node_values(0.0, t_max, &hs);
    TransformPair {
        k: k_tab,
        g,
        h,
        r_max,
        t_max,
        provenance: Provenance::FromK,
    }
}

/// Tabulates the inverse transform of an even `h`.
pub fn pair_from_h<H: Fn(f64) -> f64 + Sync>(h: H, t_max: f64) -> TransformPair {
    let r_max = DEFAULT_R_MAX;
    let (ts, ws) = panel_nodes(0.0, t_max);
    let hw: Vec<f64> = ts.iter().zip(&ws).map(|(&t, w)| w * h(t)).collect();
    let g = Chebyshev::fit(
        |xi| {
            ts.iter()
                .zip(&hw)
                .map(|(t, hw)| hw * (t * xi).cos())
                .sum::<f64>()
                / PI
        },
        0.0,
        r_max,
        TABLE_NODES,
    );
    let gp = g_prime_table(&h, t_max, r_max);
    let k = Chebyshev::fit(
        |r| -abel_in_distance(|xi| gp.eval(xi), r, r_max) / (2.0 * PI),
        0.0,
        r_max,
        TABLE_NODES,
    );
    let h_tab = Chebyshev::fit(&h, 0.0, t_max, TABLE_NODES);
    TransformPair {
        k,
        g,
        h: h_tab,
        r_max,
        t_max,
        provenance: Provenance::FromH,
    }
}

/// `h_T(t) = e^{−(t−T)²/(4π)} + e^{−(t+T)²/(4π)}`, the exact transform of
/// [`localizer_g`].
pub fn localizer_h(t_param: f64, t: f64) -> f64 {
    (-(t - t_param).powi(2) / (4.0 * PI)).exp() + (-(t + t_param).powi(2) / (4.0 * PI)).exp()
}

/// `h_T` is negligible (below `1e−19`) past `T + 24`.
pub fn localizer_t_max(t_param: f64) -> f64 {
    t_param + 24.0
}

/// `g_T(ξ) = 2cos(ξT)e^{−πξ²}`.
pub fn localizer_g(t_param: f64, xi: f64) -> f64 {
    2.0 * (xi * t_param).cos() * (-PI * xi * xi).exp()
}

/// `k_T` at distance `r`, from `q′(sinh²(ξ/2)) sinh(ξ)/2 = −(T sin ξT + 2πξ cos ξT)e^{−πξ²}`.
pub fn localizer_k_at_distance(t_param: f64, r: f64) -> f64 {
    let f = |xi: f64| {
        (t_param * (xi * t_param).sin() + 2.0 * PI * xi * (xi * t_param).cos())
            * (-PI * xi * xi).exp()
    };
    abel_in_distance(f, r.abs(), r.abs() + 9.0) / PI
}

/// The localizer as a tabulated analytic pair, defined by its `g` side.
pub fn localizer(t_param: f64) -> Result<TransformPair, SelbergError> {
    if !(t_param > 0.0) {
        return Err(SelbergError::InvalidT(t_param));
    }
    let r_max = DEFAULT_R_MAX;
    let t_max = localizer_t_max(t_param);
    Ok(TransformPair {
        k: Chebyshev::fit(
            |r| localizer_k_at_distance(t_param, r),
            0.0,
            r_max,
            TABLE_NODES,
        ),
        g: Chebyshev::fit(|r| localizer_g(t_param, r), 0.0, r_max, TABLE_NODES),
        h: Chebyshev::fit(|t| localizer_h(t_param, t), 0.0, t_max, TABLE_NODES),
        r_max,
        t_max,
        provenance: Provenance::AnalyticPair,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    /// Heuristic bound on the omitted orbit points with `d(z, γz′) > R`.
    pub tail: f64,
    pub terms: usize,
}

/// Orbit points `γz′`, `γ ∈ Γ₀(N)/{±1}`, with `d(z, γz′) ≤ r_cut`, enumerated
/// by bottom rows `(c, d)` sorted by `(c, d)`.
pub fn orbit_points(z: C, z_prime: C, level: u64, r_cut: f64) -> Vec<(i64, i64, i64, i64, C)> {
    let n = level as i64;
    let u_cut = u_from_distance(r_cut);
    // Im γz′ ≥ y e^{−R} and |Re(z − γz′)|² ≤ 4 y Im(γz′) u
    let y = z.im;
    let bound = z_prime.im * r_cut.exp() / y;
    let mut out = Vec::new();
    let c_max = (bound.sqrt() / z_prime.im).floor() as i64;
    let mut c = 0;
    while c <= c_max {
        let d_range: Vec<i64> = if c == 0 {
            vec![1]
        } else {
            let half = bound.sqrt();
            let lo = (-(c as f64) * z_prime.re - half).floor() as i64;
            let hi = (-(c as f64) * z_prime.re + half).ceil() as i64;
            (lo..=hi).filter(|d| d.gcd(&c) == 1).collect()
        };
        for d in d_range {
            let den = C::new(c as f64, 0.0) * z_prime + d as f64;
            if den.norm_sqr() > bound {
                continue;
            }
            let (a0, b0) = if c == 0 {
                (1, 0)
            } else {
                let e = d.extended_gcd(&c);
                // a d − b c = 1 from x d + y c = 1
                (e.x, -e.y)
            };
            let w0 = (C::new(a0 as f64, 0.0) * z_prime + b0 as f64) / den;
            let reach = (4.0 * y * w0.im * u_cut).sqrt();
            let j_lo = (z.re - reach - w0.re).floor() as i64;
            let j_hi = (z.re + reach - w0.re).ceil() as i64;
            for j in j_lo..=j_hi {
                let w = w0 + j as f64;
                if crate::geom::point_pair_u(z, w) <= u_cut {
                    out.push((a0 + j * c, b0 + j * d, c, d, w));
                }
            }
        }
        c += n;
    }
    out.sort_by_key(|t| (t.2, t.3, t.0));
    out
}

/// `K(z, z′) = Σ_{γ ∈ Γ₀(N)/±1} k(u(z, γz′))` over `d(z, γz′) ≤ r_cut`.
pub fn automorphic_kernel<K: Fn(f64) -> f64>(
    z: C,
    z_prime: C,
    k: K,
    level: u64,
    r_cut: f64,
) -> KernelValue {
    let pts = orbit_points(z, z_prime, level, r_cut);
    let value = pts
        .iter()
        .map(|p| k(crate::geom::point_pair_u(z, p.4)))
        .sum();
    // orbit counting: ≤ 4π sinh²(ρ/2)·(area of a ball of radius 1)⁻¹-type growth,
    // taken as the annulus area over the fundamental-domain area times 8
    let vol = PI / 3.0 * gamma0_index(level) as f64;
    let mut tail = 0.0;
    let mut r = r_cut;
    while r < r_cut + 12.0 {
        let sup = (0..=8)
            .map(|i| k(u_from_distance(r + i as f64 * 0.125)).abs())
            .fold(0.0, f64::max);
        let area = 4.0 * PI * (u_from_distance(r + 1.0) - u_from_distance(r));
        tail += 8.0 * (area / vol + 1.0) * sup;
        r += 1.0;
    }
    KernelValue {
        value,
        tail,
        terms: pts.len(),
    }
}

/// `64 M₁M₂ T^{2k+1} e^{−πT/2} e^{(3k−1)²/(4π)} (1+k/T)`.
pub fn pairing_bound(m1: f64, m2: f64, weight: f64, t_param: f64) -> f64 {
    64.0 * m1
        * m2
        * t_param.powf(2.0 * weight + 1.0)
        * (-PI * t_param / 2.0).exp()
        * ((3.0 * weight - 1.0).powi(2) / (4.0 * PI)).exp()
        * (1.0 + weight / t_param)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingReport {
    pub t: f64,
    pub z_prime: C,
    /// `∫_ℍ f₁ f̄₂ y^k k_T(u(z, z′)) dμ(z)`.
    pub value: C,
    pub bound: f64,
    pub m1: f64,
    pub m2: f64,
}

impl PairingReport {
    pub fn holds(&self) -> bool {
        self.value.norm() <= self.bound
    }
}

/// `2π B(tanh(r/2)) y′^k sinh r` on a composite Gauss–Legendre grid in the
/// distance `r ∈ [0, r_max]`, so that pairings against several radial
/// kernels reuse one set of theta averages.
#[derive(Debug, Clone)]
pub struct DiscProfile {
    pub z_prime: C,
    nodes: Vec<(f64, f64)>,
    weighted: Vec<C>,
}

impl DiscProfile {
    pub fn new(
        f1: &QExpansion,
        f2: &QExpansion,
        frame: &DiscCenterFrame,
        r_max: f64,
        panels: usize,
    ) -> Result<Self, SelbergError> {
        let mut nodes = Vec::new();
        let step = r_max / panels as f64;
        for p in 0..panels {
            let (x, w) = gauss_legendre_on(PANEL_ORDER, p as f64 * step, (p + 1) as f64 * step);
            nodes.extend(x.into_iter().zip(w));
        }
        let yk = frame.y_prime().powf(f1.weight());
        let weighted = nodes
            .par_iter()
            .map(|&(r, w)| {
                let b = b_rho_direct(f1, f2, frame, (0.5 * r).tanh(), 1e-13)?;
                Ok(b * (2.0 * PI * yk * w * r.sinh()))
            })
            .collect::<Result<Vec<C>, GeomError>>()?;
        Ok(Self {
            z_prime: frame.z_prime(),
            nodes,
            weighted,
        })
    }

    /// `∫_ℍ f₁ f̄₂ y^k k(u(z, z′)) dμ(z)` for a kernel given in the distance variable.
    pub fn pair<K: Fn(f64) -> f64>(&self, k_at_distance: K) -> C {
        self.nodes
            .iter()
            .zip(&self.weighted)
            .map(|(&(r, _), &b)| b * k_at_distance(r))
            .sum()
    }
}

/// Radius past which the localizer kernel is below `1e−30` for `T ≤ 10`.
pub const PAIRING_R_MAX: f64 = 6.0;

fn localizer_table(t_param: f64) -> Chebyshev {
    Chebyshev::fit(
        |r| localizer_k_at_distance(t_param, r),
        0.0,
        PAIRING_R_MAX,
        TABLE_NODES,
    )
}

/// Localizer pairing at `T` from a precomputed profile, with the bound built
/// from numerical sup norms `m1`, `m2`.
pub fn pairing_report(
    profile: &DiscProfile,
    weight: f64,
    t_param: f64,
    m1: f64,
    m2: f64,
) -> Result<PairingReport, SelbergError> {
    if !(t_param > 0.0) {
        return Err(SelbergError::InvalidT(t_param));
    }
    let table = localizer_table(t_param);
    Ok(PairingReport {
        t: t_param,
        z_prime: profile.z_prime,
        value: profile.pair(|r| table.eval(r)),
        bound: pairing_bound(m1, m2, weight, t_param),
        m1,
        m2,
    })
}

/// Measures the localizer pairing at `T` and compares it with the bound
/// built from numerical sup norms.
pub fn kernel_pairing_check(
    f1: &QExpansion,
    f2: &QExpansion,
    t_param: f64,
    frame: &DiscCenterFrame,
    panels: usize,
) -> Result<PairingReport, SelbergError> {
    if !(t_param > 0.0) {
        return Err(SelbergError::InvalidT(t_param));
    }
    let (m1, m2) = (sup_norm_estimate(f1).value, sup_norm_estimate(f2).value);
    if f1.is_zero() || f2.is_zero() {
        return Ok(PairingReport {
            t: t_param,
            z_prime: frame.z_prime(),
            value: C::new(0.0, 0.0),
            bound: pairing_bound(m1, m2, f1.weight(), t_param),
            m1,
            m2,
        });
    }
    let profile = DiscProfile::new(f1, f2, frame, PAIRING_R_MAX, panels)?;
    pairing_report(&profile, f1.weight(), t_param, m1, m2)
}
