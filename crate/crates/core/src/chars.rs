//! Dirichlet characters as value tables, Gauss sums, and the Kronecker
//! characters `χ_ℓ(d) = (ℓ/d)` attached to oldforms.

use crate::arith::{factorize, kronecker};
use num_complex::Complex64;
use num_integer::Integer;
use std::f64::consts::PI;

/// Generators of `(ℤ/Qℤ)*` with their orders, lifted through CRT.
#[derive(Debug, Clone)]
struct GroupData {
    modulus: u64,
    gens: Vec<(u64, u64)>,
    /// Discrete logs `log[n][i]` for `n` coprime to the modulus; empty otherwise.
    logs: Vec<Option<Vec<u64>>>,
    exponent: u64,
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

fn primitive_root_prime_power(p: u64, e: u32) -> u64 {
    let phi_p = p - 1;
    let fac = factorize(phi_p);
    let g = (2..p)
        .find(|&g| fac.iter().all(|&(q, _)| pow_mod(g, phi_p / q, p) != 1))
        .unwrap_or(1);
    if e >= 2 && pow_mod(g, p - 1, p * p) == 1 {
        g + p
    } else {
        g
    }
}

fn crt_lift(r: u64, m: u64, q: u64) -> u64 {
    // x ≡ r (mod m), x ≡ 1 (mod q/m)
    let other = q / m;
    if other == 1 {
        return r % q;
    }
    let inv = crate::arith::mod_inverse((other % m) as i64, m as i64).unwrap() as u64;
    let t = ((r + m - 1 % m) % m) as u128 * inv as u128 % m as u128;
    ((1 + other as u128 * t) % q as u128) as u64
}

impl GroupData {
    fn new(q: u64) -> Self {
        let mut gens = Vec::new();
        for (p, e) in factorize(q) {
            let m = p.pow(e);
            if p == 2 {
                match e {
                    1 => {}
                    2 => gens.push((crt_lift(3, m, q), 2)),
                    _ => {
                        gens.push((crt_lift(m - 1, m, q), 2));
                        gens.push((crt_lift(5, m, q), m / 4));
                    }
                }
            } else {
                let g = primitive_root_prime_power(p, e);
                gens.push((crt_lift(g, m, q), m / p * (p - 1)));
            }
        }
        let mut logs = vec![None; q as usize];
        let mut digits = vec![0u64; gens.len()];
        let mut n = 1 % q;
        // Mixed-radix walk over all exponent vectors.
        loop {
            logs[n as usize] = Some(digits.clone());
            let mut i = gens.len();
            loop {
                if i == 0 {
                    let exponent = gens.iter().fold(1, |l, &(_, o)| l.lcm(&o));
                    return Self {
                        modulus: q,
                        gens,
                        logs,
                        exponent,
                    };
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < gens[i].1 {
                    n = (n as u128 * gens[i].0 as u128 % q as u128) as u64;
                    break;
                }
                digits[i] = 0;
                n = Self::rebuild(&gens, &digits, q);
            }
        }
    }

    fn rebuild(gens: &[(u64, u64)], digits: &[u64], q: u64) -> u64 {
        gens.iter().zip(digits).fold(1 % q, |acc, (&(g, _), &d)| {
            (acc as u128 * pow_mod(g, d, q) as u128 % q as u128) as u64
        })
    }

    fn index_of(&self, digits: &[u64]) -> usize {
        digits
            .iter()
            .zip(&self.gens)
            .fold(0usize, |acc, (&d, &(_, o))| acc * o as usize + d as usize)
    }

    fn digits_of(&self, mut index: usize) -> Vec<u64> {
        let mut d = vec![0u64; self.gens.len()];
        for i in (0..self.gens.len()).rev() {
            let o = self.gens[i].1 as usize;
            d[i] = (index % o) as u64;
            index /= o;
        }
        d
    }

    fn table(&self, digits: &[u64]) -> Vec<Complex64> {
        let l = self.exponent;
        let roots: Vec<Complex64> = (0..l)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / l as f64))
            .collect();
        let weights: Vec<u64> = digits
            .iter()
            .zip(&self.gens)
            .map(|(&d, &(_, o))| d * (l / o))
            .collect();
        self.logs
            .iter()
            .map(|lg| match lg {
                None => Complex64::new(0.0, 0.0),
                Some(lg) => {
                    let ph = lg
                        .iter()
                        .zip(&weights)
                        .map(|(&a, &w)| a * w % l)
                        .sum::<u64>()
                        % l;
                    roots[ph as usize]
                }
            })
            .collect()
    }
}

/// A Dirichlet character modulo `Q`, stored as a value table over residues.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    modulus: u64,
    index: usize,
    values: Vec<Complex64>,
    conductor: u64,
    primitive: bool,
}

impl DirichletCharacter {
    fn from_table(g: &GroupData, index: usize, values: Vec<Complex64>) -> Self {
        let mut chi = Self {
            modulus: g.modulus,
            index,
            values,
            conductor: g.modulus,
            primitive: true,
        };
        let c = conductor_of(&chi);
        chi.conductor = c;
        chi.primitive = c == g.modulus;
        chi
    }

    pub fn principal(q: u64) -> Self {
        let g = GroupData::new(q);
        let t = g.table(&vec![0; g.gens.len()]);
        Self::from_table(&g, 0, t)
    }

    /// Builds the character with `χ(n) = f(n)`; `None` if `f` is not a
    /// character modulo `q`.
    pub fn from_fn(q: u64, f: impl Fn(u64) -> Complex64) -> Option<Self> {
        let g = GroupData::new(q);
        let digits: Vec<u64> = g
            .gens
            .iter()
            .map(|&(gen, o)| {
                let v = f(gen);
                let k = (v.arg() / (2.0 * PI) * o as f64)
                    .round()
                    .rem_euclid(o as f64);
                k as u64
            })
            .collect();
        let table = g.table(&digits);
        let ok = (0..q).all(|n| (table[n as usize] - f(n)).norm() < 1e-9);
        ok.then(|| Self::from_table(&g, g.index_of(&digits), table))
    }

    /// The real character `n ↦ (n/Q)` for odd `Q`.
    pub fn kronecker_mod(q: u64) -> Option<Self> {
        if q.is_multiple_of(2) {
            return None;
        }
        Self::from_fn(q, |n| {
            Complex64::new(kronecker(n as i64, q as i64) as f64, 0.0)
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Position in [`enumerate_characters`] order.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    pub fn is_principal(&self) -> bool {
        self.index == 0
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn eval(&self, n: i64) -> Complex64 {
        self.values[n.rem_euclid(self.modulus as i64) as usize]
    }

    /// `χ(−1) = ±1`.
    pub fn parity(&self) -> i32 {
        if self.eval(-1).re > 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im.abs() < 1e-12)
    }

    pub fn conj(&self) -> Self {
        let g = GroupData::new(self.modulus);
        let d: Vec<u64> = g
            .digits_of(self.index)
            .iter()
            .zip(&g.gens)
            .map(|(&x, &(_, o))| (o - x) % o)
            .collect();
        Self {
            modulus: self.modulus,
            index: g.index_of(&d),
            values: self.values.iter().map(|v| v.conj()).collect(),
            conductor: self.conductor,
            primitive: self.primitive,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.modulus, other.modulus);
        let g = GroupData::new(self.modulus);
        let d: Vec<u64> = g
            .digits_of(self.index)
            .iter()
            .zip(g.digits_of(other.index))
            .zip(&g.gens)
            .map(|((&a, b), &(_, o))| (a + b) % o)
            .collect();
        let t = g.table(&d);
        Self::from_table(&g, g.index_of(&d), t)
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, o: &Self) -> bool {
        self.modulus == o.modulus && self.index == o.index
    }
}

/// All `φ(Q)` characters modulo `Q`, principal first.
pub fn enumerate_characters(q: u64) -> Vec<DirichletCharacter> {
    let g = GroupData::new(q);
    let count: u64 = g.gens.iter().map(|&(_, o)| o).product();
    (0..count as usize)
        .map(|i| {
            let t = g.table(&g.digits_of(i));
            DirichletCharacter::from_table(&g, i, t)
        })
        .collect()
}

fn conductor_of(chi: &DirichletCharacter) -> u64 {
    let q = chi.modulus;
    for d in crate::arith::divisors(q) {
        let induced = (0..q)
            .filter(|&n| n % d == 1 % d && n.gcd(&q) == 1)
            .all(|n| (chi.values[n as usize] - 1.0).norm() < 1e-9);
        if induced {
            return d;
        }
    }
    q
}

/// Least modulus inducing `χ`, and whether that is `Q` itself.
pub fn conductor_and_primitivity(chi: &DirichletCharacter) -> (u64, bool) {
    (chi.conductor, chi.primitive)
}

/// `g(n, ψ) = Σ_{u mod Q} ψ(u) e(nu/Q)` by direct summation.
pub fn gauss_sum(n: i64, psi: &DirichletCharacter) -> Complex64 {
    let q = psi.modulus as i64;
    let r = n.rem_euclid(q);
    (0..q)
        .map(|u| {
            let ph = (r * u) % q;
            psi.values[u as usize] * Complex64::from_polar(1.0, 2.0 * PI * ph as f64 / q as f64)
        })
        .sum()
}

/// All Gauss sums `g(n, ψ)` for `n = 0..Q`, via one table of roots of unity.
pub fn gauss_sum_table(psi: &DirichletCharacter) -> Vec<Complex64> {
    let q = psi.modulus as usize;
    let roots: Vec<Complex64> = (0..q)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / q as f64))
        .collect();
    (0..q)
        .map(|n| (0..q).map(|u| psi.values[u] * roots[n * u % q]).sum())
        .collect()
}

/// The nebentypus `d ↦ (ℓ/d)` acquired by the oldform `f(ℓz)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KroneckerCharacter {
    pub ell: u64,
}

impl KroneckerCharacter {
    pub fn eval(&self, d: i64) -> i32 {
        kronecker(self.ell as i64, d)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            ell: self.ell * o.ell,
        }
    }
}

/// `χ_ℓ` for squarefree `ℓ ≥ 1`.
pub fn nebentypus_ell(ell: u64) -> Option<KroneckerCharacter> {
    let squarefree = ell >= 1 && factorize(ell).iter().all(|&(_, e)| e == 1);
    squarefree.then_some(KroneckerCharacter { ell })
}
