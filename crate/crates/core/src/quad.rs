//! Numerical integration: adaptive Gauss–Kronrod (7/15) for smooth complex
//! integrands, tanh-sinh for integrable endpoint singularities, and
//! Gauss–Legendre rules for fixed tabulation grids.

use num_complex::Complex64;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral estimate and an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    ((k * h), ((k - g) * h).norm())
}

/// Adaptive Gauss–Kronrod on `[a, b]`, splitting the worst interval until the
/// summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    if a == b {
        return Integral {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
        };
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = BinaryHeap::from([Piece {
        a,
        b,
        value: v,
        error: e,
    }]);
    let (mut total, mut err) = (v, e);
    for _ in 0..4000 {
        if err <= abs_tol.max(rel_tol * total.norm()) {
            break;
        }
        let p = pieces.pop().unwrap();
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            pieces.push(p);
            break;
        }
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        pieces.push(Piece {
            a: p.a,
            b: m,
            value: v1,
            error: e1,
        });
        pieces.push(Piece {
            a: m,
            b: p.b,
            value: v2,
            error: e2,
        });
    }
    Integral {
        value: pieces.iter().map(|p| p.value).sum(),
        error: pieces.iter().map(|p| p.error).sum(),
    }
}

/// Subinterval ordered by its error estimate.
struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Real-valued convenience wrapper around [`adaptive`].
pub fn adaptive_real<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> f64 {
    adaptive(|x| Complex64::new(f(x), 0.0), a, b, abs_tol, rel_tol)
        .value
        .re
}

/// Tanh-sinh quadrature on `[a, b]`, suited to integrands with integrable
/// algebraic or logarithmic singularities at the endpoints. The integrand is
/// passed the point together with its distances to `a` and `b`, so that
/// singular factors can be evaluated without cancellation.
pub fn tanh_sinh<F: FnMut(f64, f64, f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Integral {
    let half = 0.5 * (b - a);
    let mut eval = |t: f64| -> Complex64 {
        let u = 0.5 * PI * t.sinh();
        let ch = u.cosh();
        let w = 0.5 * PI * t.cosh() / (ch * ch);
        // distance to the nearer endpoint, computed without cancellation
        let dist = half / (u.abs().exp() * ch);
        let (x, da, db) = if u < 0.0 {
            (a + dist, dist, b - a - dist)
        } else {
            (b - dist, b - a - dist, dist)
        };
        if dist <= 0.0 || !x.is_finite() {
            return Complex64::new(0.0, 0.0);
        }
        f(x, da, db) * (w * half)
    };
    let tmax = 4.0;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut prev = sum * h;
    let mut err = f64::INFINITY;
    for _ in 0..8 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let cur = sum * h;
        err = (cur - prev).norm();
        prev = cur;
        if err <= rel_tol * cur.norm() {
            break;
        }
    }
    Integral {
        value: prev,
        error: err,
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    (
        x.iter().map(|t| c + h * t).collect(),
        w.iter().map(|v| v * h).collect(),
    )
}

/// Mean of `f` over `n` equispaced points of the circle `|w − center| = r`.
/// Equals `f(center)` up to `O((r/R)^n)` for `f` analytic in a disc of radius `R`.
pub fn circle_mean<F: FnMut(Complex64) -> Complex64>(
    mut f: F,
    center: Complex64,
    r: f64,
    n: usize,
) -> Complex64 {
    (0..n)
        .map(|j| f(center + Complex64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / n as f64)))
        .sum::<Complex64>()
        / n as f64
}
