//! Integer machinery: Kronecker symbol, the theta multiplier, Ramanujan sums,
//! and index/volume of `Γ₀(N)`.

use num_complex::Complex64;
use num_integer::Integer;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("expected an odd integer, got {0}")]
    EvenDenominator(i64),
    #[error("matrix {0:?} is not in Γ₀(4) with odd lower-right entry")]
    NotInGamma04(IntegerMatrix2x2),
    #[error("matrix {0:?} does not have determinant 1")]
    NotUnimodular(IntegerMatrix2x2),
}

/// Integral 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntegerMatrix2x2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntegerMatrix2x2 {
    pub const IDENTITY: Self = Self {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { a, b, c, d }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn in_gamma0(&self, level: u64) -> bool {
        self.det() == 1 && self.c.rem_euclid(level as i64) == 0
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Möbius action `z ↦ (az + b)/(cz + d)`.
    pub fn act(&self, z: Complex64) -> Complex64 {
        (z * self.a as f64 + self.b as f64) / (z * self.c as f64 + self.d as f64)
    }

    /// Completes a coprime bottom row `(c, d)` to a matrix of determinant 1.
    pub fn from_bottom_row(c: i64, d: i64) -> Option<Self> {
        let g = i64::extended_gcd(&d, &c);
        if g.gcd != 1 {
            return None;
        }
        // x d + y c = 1, so a = x, b = -y.
        Some(Self {
            a: g.x,
            b: -g.y,
            c,
            d,
        })
    }
}

/// Jacobi symbol `(a/n)` for odd `n > 0`.
fn jacobi(a: i64, n: i64) -> i32 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut r = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                r = -r;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            r = -r;
        }
        a %= n;
    }
    if n == 1 {
        r
    } else {
        0
    }
}

/// Extended Kronecker symbol `(c/d)`.
///
/// For negative `d` this uses `(c/−1) = sign(c)` with `(0/−1) = 1`, which is
/// the convention under which `j(γ, z)` below is the multiplier of `Θ`.
pub fn kronecker(c: i64, d: i64) -> i32 {
    if d == 0 {
        return if c.abs() == 1 { 1 } else { 0 };
    }
    let mut sign = 1;
    let mut d = d;
    if d < 0 {
        d = -d;
        if c < 0 {
            sign = -1;
        }
    }
    let v2 = d.trailing_zeros();
    if v2 > 0 {
        if c % 2 == 0 {
            return 0;
        }
        if v2 % 2 == 1 && matches!(c.rem_euclid(8), 3 | 5) {
            sign = -sign;
        }
        d >>= v2;
    }
    sign * jacobi(c, d)
}

/// `ε_d`: 1 for `d ≡ 1 (mod 4)`, `i` for `d ≡ 3 (mod 4)`.
pub fn eps_d(d: i64) -> Result<Complex64, ArithError> {
    match d.rem_euclid(4) {
        1 => Ok(Complex64::new(1.0, 0.0)),
        3 => Ok(Complex64::new(0.0, 1.0)),
        _ => Err(ArithError::EvenDenominator(d)),
    }
}

/// Half-integral weight cocycle `j(γ, z) = ε_d⁻¹ (c/d) (cz + d)^{1/2}`, principal branch.
pub fn cocycle_j(gamma: &IntegerMatrix2x2, z: Complex64) -> Result<Complex64, ArithError> {
    if gamma.det() != 1 {
        return Err(ArithError::NotUnimodular(*gamma));
    }
    if gamma.c % 4 != 0 || gamma.d % 2 == 0 {
        return Err(ArithError::NotInGamma04(*gamma));
    }
    let eps = eps_d(gamma.d)?;
    let czd = Complex64::new(
        gamma.c as f64 * z.re + gamma.d as f64,
        gamma.c as f64 * z.im,
    );
    Ok(czd.sqrt() * kronecker(gamma.c, gamma.d) as f64 / eps)
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1 && factorize(n)[0].1 == 1
}

/// Sieve of Eratosthenes: all primes `≤ n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| p.then_some(i as u64))
        .collect()
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let g = i64::extended_gcd(&a.rem_euclid(m), &m);
    (g.gcd == 1).then(|| g.x.rem_euclid(m))
}

/// `Σ_{d mod cw, (d, cw) = 1} e(−md/(cw))`, evaluated exactly through the
/// prime-power values of the Ramanujan sum.
pub fn ramanujan_restricted(c: u64, w: u64, m: i64) -> i64 {
    let q = c * w;
    let m = m.unsigned_abs();
    let mut out = 1i64;
    for (p, e) in factorize(q) {
        let pe = p.pow(e) as i64;
        let pe1 = p.pow(e - 1) as i64;
        out *= if m.is_multiple_of(pe as u64) {
            pe - pe1
        } else if m.is_multiple_of(pe1 as u64) {
            -pe1
        } else {
            return 0;
        };
    }
    out
}

/// `[SL₂(ℤ) : Γ₀(N)] = N Π_{p | N} (1 + 1/p)`.
pub fn gamma0_index(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p + 1))
}

/// Hyperbolic volume of `Γ₀(N)\ℍ`.
pub fn volume(n: u64) -> f64 {
    PI / 3.0 * gamma0_index(n) as f64
}
