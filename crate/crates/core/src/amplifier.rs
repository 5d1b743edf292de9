//! Amplified second moment over characters modulo `Q`: the sum `S`, its
//! Parseval dual, the congruence split into diagonal and shifted sums, and
//! growth scans for the latter.

use crate::arith::{euler_phi, is_prime};
use crate::chars::{enumerate_characters, gauss_sum, gauss_sum_table, DirichletCharacter};
use crate::qexp::{normalized_terms, QExpansion};
use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use std::f64::consts::PI;

type C = Complex64;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum AmpError {
    #[error("coefficients up to {need} are needed but only {have} are known")]
    Truncation { need: u64, have: u64 },
    #[error("character moduli differ")]
    ModulusMismatch,
    #[error("χ must be primitive")]
    NotPrimitive,
    #[error("log-log fit needs at least two positive values")]
    DegenerateFit,
    #[error("function has {got} values but there are {want} characters")]
    Length { got: usize, want: usize },
}

/// Smooth bump `H(ξ) = exp(1 − 1/(1 − u²))`, `u = 2ξ − 3`, supported in `[1, 2]`
/// with `H(3/2) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SmoothCutoff;

impl SmoothCutoff {
    pub fn eval(&self, xi: f64) -> f64 {
        self.derivative(xi, 0)
    }

    /// `H^{(order)}(ξ)` for `order ≤ 2`.
    pub fn derivative(&self, xi: f64, order: u32) -> f64 {
        let u = 2.0 * xi - 3.0;
        if u.abs() >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u * u;
        let h = (1.0 - 1.0 / w).exp();
        let g1 = -2.0 * u / (w * w);
        match order {
            0 => h,
            1 => 2.0 * g1 * h,
            2 => {
                let g2 = -2.0 / (w * w) - 8.0 * u * u / (w * w * w);
                4.0 * (g2 + g1 * g1) * h
            }
            _ => panic!("derivatives above order 2 are not provided"),
        }
    }
}

/// Primes `ℓ ∈ [L, 2L]` with `gcd(ℓ, NQ) = 1`.
pub fn prime_window(l: f64, level: u64, q: u64) -> Vec<u64> {
    let lo = l.ceil().max(2.0) as u64;
    let hi = (2.0 * l).floor() as u64;
    (lo..=hi)
        .filter(|&p| is_prime(p) && !(level * q).is_multiple_of(p))
        .collect()
}

/// `(m, A(m) H(m/X))` for `X < m < 2X`.
pub fn weighted_coefficients(
    f: &QExpansion,
    h: SmoothCutoff,
    x: f64,
) -> Result<Vec<(u64, C)>, AmpError> {
    let need = (2.0 * x).ceil() as u64;
    if need > f.truncation() {
        return Err(AmpError::Truncation {
            need,
            have: f.truncation(),
        });
    }
    Ok(normalized_terms(f)
        .into_iter()
        .filter_map(|(m, a)| {
            let w = h.eval(m as f64 / x);
            (w != 0.0).then(|| (m, a * w))
        })
        .collect())
}

/// `S = Σ_ψ |Σ_ℓ ψ(ℓ) χ̄′(ℓ)|² |g(1, χ̄)^{−1} Σ_m A(m) g(m, ψ) H(m/X)|²`.
pub fn amplified_sum_direct(
    f: &QExpansion,
    chi: &DirichletCharacter,
    chi_prime: &DirichletCharacter,
    h: SmoothCutoff,
    x: f64,
    l: f64,
) -> Result<f64, AmpError> {
    let q = chi.modulus();
    if chi_prime.modulus() != q {
        return Err(AmpError::ModulusMismatch);
    }
    let b = weighted_coefficients(f, h, x)?;
    let primes = prime_window(l, f.level(), q);
    let g1 = gauss_sum(1, &chi.conj()).norm_sqr();
    Ok(enumerate_characters(q)
        .par_iter()
        .map(|psi| {
            let amp: C = primes
                .iter()
                .map(|&p| psi.eval(p as i64) * chi_prime.eval(p as i64).conj())
                .sum();
            let table = gauss_sum_table(psi);
            let inner: C = b.iter().map(|&(m, w)| w * table[(m % q) as usize]).sum();
            amp.norm_sqr() * inner.norm_sqr() / g1
        })
        .collect::<Vec<_>>()
        .iter()
        .sum())
}

/// Both sides of `Σ_ψ |F(ψ)|² = Σ_{(a,Q)=1} |F̂(a)|²` with
/// `F̂(a) = φ(Q)^{−1/2} Σ_ψ F(ψ) ψ̄(a)`; `values[i]` is `F` at the `i`-th
/// character of [`enumerate_characters`].
pub fn parseval_check(q: u64, values: &[C]) -> Result<(f64, f64), AmpError> {
    let chars = enumerate_characters(q);
    if chars.len() != values.len() {
        return Err(AmpError::Length {
            got: values.len(),
            want: chars.len(),
        });
    }
    let lhs = values.iter().map(|v| v.norm_sqr()).sum();
    let norm = (euler_phi(q) as f64).sqrt();
    let rhs = (0..q)
        .filter(|a| a.gcd(&q) == 1)
        .map(|a| {
            let hat: C = chars
                .iter()
                .zip(values)
                .map(|(psi, v)| v * psi.eval(a as i64).conj())
                .sum();
            (hat / norm).norm_sqr()
        })
        .sum();
    Ok((lhs, rhs))
}

/// Diagonal `S₁` and the two shifted sums `S₂`, `S₃` for one pair `(ℓ₁, ℓ₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSums {
    pub s1: C,
    pub s2: C,
    pub s3: C,
}

impl SplitSums {
    pub fn total(&self) -> C {
        self.s1 + self.s2 + self.s3
    }
}

/// `S₁` over `m₁ℓ₁ = m₂ℓ₂`, `S₂` over `m₁ℓ₁ = m₂ℓ₂ + hQ`, `S₃` over
/// `m₁ℓ₁ + hQ = m₂ℓ₂` (`h > 0`), each weighted by `A(m₁)Ā(m₂)H(m₁/X)H(m₂/X)`.
pub fn shifted_split_sums(
    f: &QExpansion,
    h: SmoothCutoff,
    x: f64,
    l1: u64,
    l2: u64,
    q: u64,
) -> Result<SplitSums, AmpError> {
    let b = weighted_coefficients(f, h, x)?;
    Ok(split_from_weights(&b, l1, l2, q))
}

/// Groups `m₁ℓ₁` and `m₂ℓ₂` by residue modulo `Q`; within a class the three
/// sums are the pairs with equal, smaller and larger right-hand value, which
/// prefix sums over the sorted right side give in `O(n log n)`.
fn split_from_weights(b: &[(u64, C)], l1: u64, l2: u64, q: u64) -> SplitSums {
    let keyed = |l: u64, conj: bool| {
        let mut v: Vec<(u64, u64, C)> = b
            .iter()
            .map(|&(m, w)| {
                let x = m * l;
                (x % q, x, if conj { w.conj() } else { w })
            })
            .collect();
        v.sort_unstable_by_key(|t| (t.0, t.1));
        v
    };
    let left = keyed(l1, false);
    let right = keyed(l2, true);
    let zero = C::new(0.0, 0.0);
    let mut out = [zero; 3];
    let mut i = 0;
    let mut j0 = 0;
    while i < left.len() {
        let r = left[i].0;
        let i_end = i + left[i..].partition_point(|t| t.0 == r);
        while j0 < right.len() && right[j0].0 < r {
            j0 += 1;
        }
        let j_end = j0 + right[j0..].partition_point(|t| t.0 == r);
        let class = &right[j0..j_end];
        let mut prefix = Vec::with_capacity(class.len() + 1);
        prefix.push(zero);
        for t in class {
            prefix.push(prefix[prefix.len() - 1] + t.2);
        }
        let total = prefix[class.len()];
        let mut lo = 0;
        for &(_, x, w) in &left[i..i_end] {
            while lo < class.len() && class[lo].1 < x {
                lo += 1;
            }
            let mut hi = lo;
            let mut equal = zero;
            while hi < class.len() && class[hi].1 == x {
                equal += class[hi].2;
                hi += 1;
            }
            out[0] += w * equal;
            out[1] += w * prefix[lo];
            out[2] += w * (total - prefix[hi]);
        }
        i = i_end;
        j0 = j_end;
    }
    SplitSums {
        s1: out[0],
        s2: out[1],
        s3: out[2],
    }
}

/// The unsplit sum over `m₁ℓ₁ ≡ m₂ℓ₂ (mod Q)`, evaluated through additive
/// characters as `Q^{−1} Σ_a B_{ℓ₁}(a) conj(B_{ℓ₂}(a))` with
/// `B_ℓ(a) = Σ_m A(m) H(m/X) e(amℓ/Q)`.
pub fn congruence_sum(
    f: &QExpansion,
    h: SmoothCutoff,
    x: f64,
    l1: u64,
    l2: u64,
    q: u64,
) -> Result<C, AmpError> {
    let b = weighted_coefficients(f, h, x)?;
    let roots: Vec<C> = (0..q)
        .map(|j| C::from_polar(1.0, 2.0 * PI * j as f64 / q as f64))
        .collect();
    let total: C = (0..q)
        .into_par_iter()
        .map(|a| {
            let t = |l: u64| -> C {
                b.iter()
                    .map(|&(m, w)| w * roots[((a * (m % q) % q) * (l % q) % q) as usize])
                    .sum()
            };
            t(l1) * t(l2).conj()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(total / q as f64)
}

/// Outcome of [`amplification_inequality_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub s: f64,
    /// `φ(Q) Σ χ′(ℓ₁)χ̄′(ℓ₂)(S₁+S₂+S₃)`; real up to rounding.
    pub rhs: C,
    /// The same sum with the character weights as `χ′(ℓ₂)χ̄′(ℓ₁)`.
    pub rhs_swapped: C,
    /// `rhs.re − s`.
    pub slack: f64,
    /// `#{ℓ}² |g(1, χ̄)^{−1} Σ A(m) g(m, χ′) H(m/X)|²`, the `ψ = χ′` term of `S`.
    pub single_term: f64,
    /// `(L/log L)² |g(1, χ̄)^{−1} Σ A(m) g(m, χ′) H(m/X)|`.
    pub single_term_unsquared: f64,
    pub scale: f64,
}

impl InequalityReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol * self.scale && self.single_term <= self.rhs.re + tol * self.scale
    }
}

pub fn amplification_inequality_check(
    f: &QExpansion,
    chi: &DirichletCharacter,
    chi_prime: &DirichletCharacter,
    h: SmoothCutoff,
    x: f64,
    l: f64,
) -> Result<InequalityReport, AmpError> {
    if !chi.is_primitive() {
        return Err(AmpError::NotPrimitive);
    }
    let q = chi.modulus();
    let s = amplified_sum_direct(f, chi, chi_prime, h, x, l)?;
    let b = weighted_coefficients(f, h, x)?;
    let primes = prime_window(l, f.level(), q);
    let mut rhs = C::new(0.0, 0.0);
    let mut rhs_swapped = C::new(0.0, 0.0);
    for &l1 in &primes {
        for &l2 in &primes {
            let t = split_from_weights(&b, l1, l2, q).total();
            let c1 = chi_prime.eval(l1 as i64);
            let c2 = chi_prime.eval(l2 as i64);
            rhs += c1 * c2.conj() * t;
            rhs_swapped += c2 * c1.conj() * t;
        }
    }
    let phi = euler_phi(q) as f64;
    rhs *= phi;
    rhs_swapped *= phi;
    let table = gauss_sum_table(chi_prime);
    let inner = b
        .iter()
        .map(|&(m, w)| w * table[(m % q) as usize])
        .sum::<C>()
        / gauss_sum(1, &chi.conj());
    let count = primes.len() as f64;
    Ok(InequalityReport {
        s,
        rhs,
        rhs_swapped,
        slack: rhs.re - s,
        single_term: count * count * inner.norm_sqr(),
        single_term_unsquared: (l / l.ln()).powi(2) * inner.norm(),
        scale: s.abs() + rhs.norm(),
    })
}

/// Least-squares fit `log y = slope·log x + log constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub slope: f64,
    pub constant: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn fit_loglog(points: &[(f64, f64)]) -> Result<GrowthFit, AmpError> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 || pts.len() != points.len() {
        return Err(AmpError::DegenerateFit);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(AmpError::DegenerateFit);
    }
    let slope = sxy / sxx;
    Ok(GrowthFit {
        slope,
        constant: (my - slope * mx).exp(),
        points: points.to_vec(),
    })
}

/// `S₁(ℓ₁, ℓ₂)` only: the pairs `m₁ = ℓ₂t/g`, `m₂ = ℓ₁t/g` with `g = gcd(ℓ₁, ℓ₂)`.
pub fn diagonal_sum(
    f: &QExpansion,
    h: SmoothCutoff,
    x: f64,
    l1: u64,
    l2: u64,
) -> Result<C, AmpError> {
    let b = weighted_coefficients(f, h, x)?;
    let g = l1.gcd(&l2);
    let (p1, p2) = (l1 / g, l2 / g);
    let lookup = |m: u64| b.binary_search_by_key(&m, |t| t.0).ok().map(|i| b[i].1);
    Ok(b.iter()
        .filter(|t| t.0 % p2 == 0)
        .filter_map(|&(m1, w1)| lookup(m1 / p2 * p1).map(|w2| w1 * w2.conj()))
        .sum())
}

/// Fit of `|S₁|` against `X`.
pub fn diagonal_growth_scan(
    f: &QExpansion,
    l1: u64,
    l2: u64,
    xs: &[f64],
) -> Result<GrowthFit, AmpError> {
    let h = SmoothCutoff;
    let vals: Vec<Result<(f64, f64), AmpError>> = xs
        .par_iter()
        .map(|&x| diagonal_sum(f, h, x, l1, l2).map(|s| (x, s.norm())))
        .collect();
    fit_loglog(&vals.into_iter().collect::<Result<Vec<_>, _>>()?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffDiagonalRow {
    pub x: f64,
    pub q: u64,
    pub ell: u64,
    pub sums: SplitSums,
    /// `|S₂| √Q / (X ℓ^{1.1})`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffDiagonalReport {
    pub rows: Vec<OffDiagonalRow>,
    /// X-exponent of `|S₂|` per modulus.
    pub fits: Vec<(u64, Result<GrowthFit, AmpError>)>,
    /// Ratio of the largest to the smallest per-modulus maximum of the normalized statistic.
    pub spread: f64,
}

/// Tabulates `S₂` with `ℓ₁ = ℓ₂ = ℓ` over a grid of `X` and `Q`.
pub fn offdiagonal_scaling_scan(
    f: &QExpansion,
    xs: &[f64],
    qs: &[u64],
    ell: u64,
) -> Result<OffDiagonalReport, AmpError> {
    let h = SmoothCutoff;
    let grid: Vec<(f64, u64)> = qs
        .iter()
        .flat_map(|&q| xs.iter().map(move |&x| (x, q)))
        .collect();
    let rows: Vec<OffDiagonalRow> = grid
        .par_iter()
        .map(|&(x, q)| {
            let sums = shifted_split_sums(f, h, x, ell, ell, q)?;
            let normalized = sums.s2.norm() * (q as f64).sqrt() / (x * (ell as f64).powf(1.1));
            Ok(OffDiagonalRow {
                x,
                q,
                ell,
                sums,
                normalized,
            })
        })
        .collect::<Result<_, AmpError>>()?;
    let mut fits = Vec::new();
    let mut maxima = Vec::new();
    for &q in qs {
        let sel: Vec<&OffDiagonalRow> = rows.iter().filter(|r| r.q == q).collect();
        fits.push((
            q,
            fit_loglog(
                &sel.iter()
                    .map(|r| (r.x, r.sums.s2.norm()))
                    .collect::<Vec<_>>(),
            ),
        ));
        maxima.push(sel.iter().map(|r| r.normalized).fold(0.0, f64::max));
    }
    let hi = maxima.iter().cloned().fold(0.0, f64::max);
    let lo = maxima.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(OffDiagonalReport {
        rows,
        fits,
        spread: if lo > 0.0 { hi / lo } else { f64::INFINITY },
    })
}
