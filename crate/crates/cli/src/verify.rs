//! Invariant suites run by `halfint verify`. Each check reports a residual
//! against a tolerance; errors inside a check become failed rows.

use crate::error::CliError;
use crate::util::fmt_f64;
use halfint::amplifier::{congruence_sum, parseval_check, shifted_split_sums, SmoothCutoff};
use halfint::arith::{cocycle_j, IntegerMatrix2x2};
use halfint::chars::{enumerate_characters, gauss_sum};
use halfint::geom::{
    b_rho_direct, hyp_bound_property, poisson_power_integral, BRhoSeries, DiscCenterFrame,
};
use halfint::lfunc::{
    additive_root_number, completed_l_additive, default_split, fe_constant,
    multiplicative_root_number,
};
use halfint::qexp::{
    evaluate, expand_eta_quotient, fricke_eigenvalue, normalized_terms, theta_series,
    EtaQuotientSpec, QExpansion,
};
use halfint::selberg::{
    forward_single_step, forward_three_step, localizer, localizer_g, localizer_h, localizer_t_max,
    pair_from_h,
};
use halfint::shifted::{triple_mellin_inner_check, z_q_bruteforce, MellinContour};
use halfint::special::{barnes_beta_integral, log_gamma, m_function, MFunctionParams, MMethod};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Lvalues,
    Special,
    Geometry,
    Selberg,
    Shifted,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Identities,
        Suite::Lvalues,
        Suite::Special,
        Suite::Geometry,
        Suite::Selberg,
        Suite::Shifted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Lvalues => "lvalues",
            Suite::Special => "special",
            Suite::Geometry => "geometry",
            Suite::Selberg => "selberg",
            Suite::Shifted => "shifted",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Suite::ALL
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

pub const VERIFY_HEADER: [&str; 6] = [
    "suite",
    "check",
    "residual",
    "tolerance",
    "status",
    "detail",
];

struct Recorder {
    suite: Suite,
    out: Vec<CheckResult>,
}

impl Recorder {
    fn check<E: fmt::Display>(&mut self, name: &str, tolerance: f64, r: Result<f64, E>) {
        let (residual, detail) = match r {
            Ok(v) if v.is_nan() => (f64::INFINITY, "NaN residual".to_string()),
            Ok(v) => (v, String::new()),
            Err(e) => (f64::INFINITY, e.to_string()),
        };
        self.out.push(CheckResult {
            suite: self.suite,
            name: name.to_string(),
            residual,
            tolerance,
            detail,
        });
    }
}

fn eta(spec: &str, m: u64) -> Result<QExpansion, String> {
    let s: EtaQuotientSpec = spec.parse().map_err(|e| format!("{e}"))?;
    expand_eta_quotient(&s, m).map_err(|e| e.to_string())
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn identities(r: &mut Recorder) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    r.check(
        "parseval",
        1e-10,
        (|| {
            let mut worst: f64 = 0.0;
            for q in [5u64, 7, 12, 36] {
                let n = enumerate_characters(q).len();
                for _ in 0..10 {
                    let v: Vec<C> = (0..n)
                        .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect();
                    let (a, b) = parseval_check(q, &v).map_err(|e| e.to_string())?;
                    worst = worst.max((a - b).abs() / a.max(1.0));
                }
            }
            Ok::<_, String>(worst)
        })(),
    );
    r.check(
        "congruence_split",
        1e-12,
        (|| {
            let f = eta("1^2*22^1", 2000)?;
            let mut worst: f64 = 0.0;
            for (l1, l2, q) in [(3u64, 5u64, 11u64), (7, 7, 13), (2, 3, 12)] {
                let s = shifted_split_sums(&f, SmoothCutoff, 250.0, l1, l2, q)
                    .map_err(|e| e.to_string())?;
                let u = congruence_sum(&f, SmoothCutoff, 250.0, l1, l2, q)
                    .map_err(|e| e.to_string())?;
                worst = worst.max((s.total() - u).norm() / u.norm().max(1.0));
            }
            Ok::<_, String>(worst)
        })(),
    );
    r.check(
        "theta_multiplier",
        1e-10,
        (|| {
            let th = theta_series(4_000_000);
            let mut worst: f64 = 0.0;
            let mut count = 0;
            while count < 10 {
                let c = 4 * rng.gen_range(-6i64..=6);
                let d = 2 * rng.gen_range(-15i64..=15) + 1;
                let Some(g) = IntegerMatrix2x2::from_bottom_row(c, d) else {
                    continue;
                };
                let z = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..1.5));
                let lhs = evaluate(&th, g.act(z), 1e-14).map_err(|e| e.to_string())?;
                let j = cocycle_j(&g, z).map_err(|e| e.to_string())?;
                let rhs = j * evaluate(&th, z, 1e-14).map_err(|e| e.to_string())?;
                worst = worst.max((lhs - rhs).norm());
                count += 1;
            }
            Ok::<_, String>(worst)
        })(),
    );
    r.check("gauss_sum_modulus", 1e-10, {
        let mut worst: f64 = 0.0;
        for q in 3..=60u64 {
            for chi in enumerate_characters(q).iter().filter(|c| c.is_primitive()) {
                worst = worst.max((gauss_sum(1, chi).norm() - (q as f64).sqrt()).abs());
            }
        }
        Ok::<_, String>(worst)
    });
}

/// `(√N Q)^s (2π)^{−a} Γ(a) Σ A(n) e(un/Q) n^{−s}` summed over the stored terms.
pub fn direct_additive(f: &QExpansion, s: C, u: i64, q: u64) -> Result<C, String> {
    let a = s + (f.weight() - 1.0) / 2.0;
    let series: C = normalized_terms(f)
        .iter()
        .filter(|t| t.0 > 0)
        .map(|&(n, an)| {
            let ph = 2.0 * PI * ((n as i128 * u as i128).rem_euclid(q as i128)) as f64 / q as f64;
            an * C::from_polar(1.0, ph) * (-s * (n as f64).ln()).exp()
        })
        .sum();
    let lg = log_gamma(a).map_err(|e| e.to_string())?;
    let big = (f.level() as f64).sqrt() * q as f64;
    Ok(C::new(big, 0.0).powc(s) * (lg - a * (2.0 * PI).ln()).exp() * series)
}

fn lvalues(r: &mut Recorder) {
    let setup = (|| {
        let f = eta("8^3", 200_000)?;
        let e = fricke_eigenvalue(&f).map_err(|e| e.to_string())?.value;
        Ok::<_, String>((f, e))
    })();
    let (f, e) = match setup {
        Ok(x) => x,
        Err(msg) => {
            r.check("setup", 0.0, Err::<f64, _>(msg));
            return;
        }
    };
    let s3 = C::new(3.0, 0.0);
    r.check(
        "direct_series_s3",
        1e-8,
        (|| {
            let mut worst: f64 = 0.0;
            for (u, q) in [(0i64, 1u64), (1, 5), (3, 7)] {
                let v = completed_l_additive(&f, s3, u, q, default_split(&f, q), e)
                    .map_err(|e| e.to_string())?;
                worst = worst.max(rel(v.value, direct_additive(&f, s3, u, q)?));
            }
            Ok::<_, String>(worst)
        })(),
    );
    r.check(
        "split_point_independence",
        1e-9,
        (|| {
            let mut worst: f64 = 0.0;
            let s = C::new(0.3, 1.7);
            for (u, q) in [(0i64, 1u64), (2, 5), (4, 11)] {
                let y0 = default_split(&f, q);
                let a =
                    completed_l_additive(&f, s, u, q, 0.5 * y0, e).map_err(|e| e.to_string())?;
                let b =
                    completed_l_additive(&f, s, u, q, 2.0 * y0, e).map_err(|e| e.to_string())?;
                worst = worst.max(rel(a.value, b.value));
            }
            Ok::<_, String>(worst)
        })(),
    );
    r.check(
        "additive_root_number",
        1e-6,
        (|| {
            let mut worst: f64 = 0.0;
            for (u, q) in [(1i64, 5u64), (3, 11)] {
                let v = additive_root_number(&f, C::new(0.3, 1.1), u, q, e)
                    .map_err(|e| e.to_string())?;
                let eps = v.empirical_root_number.unwrap_or_default();
                let want = fe_constant(&f, u, q, e).map_err(|e| e.to_string())?;
                worst = worst.max((eps.norm() - 1.0).abs()).max((eps - want).norm());
            }
            Ok::<_, String>(worst)
        })(),
    );
    r.check(
        "multiplicative_root_number",
        1e-6,
        (|| {
            let chars = enumerate_characters(7);
            let chi = chars
                .iter()
                .find(|c| c.is_primitive())
                .ok_or("no character")?;
            let (lhs, want) = multiplicative_root_number(&f, C::new(0.5, 0.4), chi, e)
                .map_err(|e| e.to_string())?;
            let eps = lhs.empirical_root_number.unwrap_or_default();
            Ok::<_, String>((eps.norm() - 1.0).abs().max((eps - want).norm()))
        })(),
    );
}

fn special(r: &mut Recorder) {
    r.check("m_function_grid", 1e-6, {
        let mut worst: f64 = 0.0;
        let mut err = None;
        for s in [C::new(2.0, 0.0), C::new(2.0, 2.0)] {
            for t in [0.0, 5.0] {
                let p = MFunctionParams {
                    s,
                    t: C::new(t, 0.0),
                    delta: 0.1,
                };
                match (
                    m_function(p, MMethod::Quadrature),
                    m_function(p, MMethod::HypergeometricFar),
                    m_function(p, MMethod::HypergeometricNear),
                ) {
                    (Ok(q), Ok(a), Ok(b)) => worst = worst.max(rel(a, q)).max(rel(b, q)),
                    (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => err = Some(e.to_string()),
                }
            }
        }
        err.map_or(Ok(worst), Err)
    });
    r.check("barnes_integral", 1e-8, {
        let mut worst: f64 = 0.0;
        let mut err = None;
        for z in [C::new(1.5, 0.0), C::new(2.5, 1.0)] {
            for t in [0.3, 2.0] {
                match barnes_beta_integral(z, t, 0.7) {
                    Ok(v) => worst = worst.max((v - C::new(1.0 + t, 0.0).powc(-z)).norm()),
                    Err(e) => err = Some(e.to_string()),
                }
            }
        }
        err.map_or(Ok(worst), Err)
    });
}

fn geometry(r: &mut Recorder) {
    r.check("poisson_power", 1e-8, {
        let mut worst: f64 = 0.0;
        let mut err = None;
        for k in [0.5, 1.5] {
            for h in [0i64, 2, -5] {
                for rho in [0.3, 0.8] {
                    match poisson_power_integral(k, h, rho) {
                        Ok(p) => worst = worst.max((p.quadrature - p.closed_form).abs()),
                        Err(e) => err = Some(e.to_string()),
                    }
                }
            }
        }
        err.map_or(Ok(worst), Err)
    });
    r.check(
        "b_rho_series_vs_direct",
        1e-6,
        (|| {
            let f = eta("8^3", 4000)?;
            let frame = DiscCenterFrame::new(C::i()).map_err(|e| e.to_string())?;
            let s = BRhoSeries::new(&f, &f, &frame, 0.8, 512).map_err(|e| e.to_string())?;
            let mut worst: f64 = 0.0;
            for rho in [0.2, 0.4] {
                let a = s.eval(C::new(rho, 0.0), 255).map_err(|e| e.to_string())?;
                let b = b_rho_direct(&f, &f, &frame, rho, 1e-12).map_err(|e| e.to_string())?;
                worst = worst.max(rel(a, b));
            }
            Ok::<_, String>(worst)
        })(),
    );
    // max of (1−ρ²)^k F(k, h+k; h+1; ρ²) must stay below 2^k; residual is the excess
    r.check(
        "hypergeometric_bound",
        0.0,
        hyp_bound_property(1.5, &(0..=100).collect::<Vec<_>>(), &[0.5, 0.9, 0.99])
            .map(|m| (m - 2f64.powf(1.5)).max(0.0)),
    );
}

fn selberg(r: &mut Recorder) {
    let t = 2.0;
    let grid: Vec<f64> = (0..=20).map(|j| 0.2 * j as f64).collect();
    r.check("localizer_g_fourier", 1e-9, {
        let mut worst: f64 = 0.0;
        for xi in [0.0, 0.7, 1.9] {
            let q = halfint::quad::adaptive(
                |s| C::new(localizer_h(t, s) * (s * xi).cos(), 0.0),
                0.0,
                localizer_t_max(t),
                1e-17,
                1e-15,
            );
            worst = worst.max((q.value.re / PI - localizer_g(t, xi)).abs());
        }
        Ok::<_, String>(worst)
    });
    r.check("h_to_k_to_h", 1e-6, {
        let pair = pair_from_h(|s| localizer_h(t, s), localizer_t_max(t));
        let back = forward_three_step(|u| pair.k(u), pair.r_max, &grid);
        Ok::<_, String>(
            back.iter()
                .zip(&grid)
                .map(|(b, &s)| (b - localizer_h(t, s)).abs())
                .fold(0.0, f64::max),
        )
    });
    r.check(
        "single_vs_three_step",
        1e-6,
        localizer(t).map(|pair| {
            let a = forward_three_step(|u| pair.k(u), pair.r_max, &grid);
            let b = forward_single_step(|u| pair.k(u), pair.r_max, &grid);
            a.iter()
                .zip(&b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        }),
    );
}

fn shifted(r: &mut Recorder) {
    let toy = vec![(1u64, C::new(1.0, 0.0)), (12, C::new(1.0, 0.0))];
    let s = C::new(2.5, 0.0);
    r.check(
        "triple_mellin_toy",
        1e-6,
        triple_mellin_inner_check(
            &toy,
            1.5,
            s,
            s,
            11,
            1,
            1,
            MellinContour {
                abscissa: 2.0,
                height: 40.0,
            },
        )
        .map(|x| x.discrepancy),
    );
    r.check(
        "z_q_normalization",
        1e-10,
        (|| {
            let f = eta("1^2*22^1", 20_000)?;
            let z = z_q_bruteforce(
                &f,
                C::new(2.5, 0.3),
                C::new(2.2, -0.4),
                11,
                3,
                5,
                2000,
                1000,
            )
            .map_err(|e| e.to_string())?;
            Ok::<_, String>(rel(z.oldform_form * z.ratio, z.amplifier_form))
        })(),
    );
}

pub fn cmd_verify(suite: Suite) -> Vec<CheckResult> {
    let suites: Vec<Suite> = match suite {
        Suite::All => Suite::ALL.to_vec(),
        s => vec![s],
    };
    let mut out = Vec::new();
    for s in suites {
        let mut r = Recorder {
            suite: s,
            out: Vec::new(),
        };
        match s {
            Suite::Identities => identities(&mut r),
            Suite::Lvalues => lvalues(&mut r),
            Suite::Special => special(&mut r),
            Suite::Geometry => geometry(&mut r),
            Suite::Selberg => selberg(&mut r),
            Suite::Shifted => shifted(&mut r),
            Suite::All => unreachable!(),
        }
        out.extend(r.out);
    }
    out
}

pub fn write_verify_csv(results: &[CheckResult], out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VERIFY_HEADER)?;
    for c in results {
        w.write_record([
            c.suite.name().to_string(),
            c.name.clone(),
            fmt_f64(c.residual),
            fmt_f64(c.tolerance),
            if c.passed() { "pass" } else { "fail" }.to_string(),
            c.detail.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
