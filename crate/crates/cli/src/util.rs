use crate::error::CliError;
use halfint::qexp::{expand_eta_quotient, fricke_eigenvalue, EtaQuotientSpec, QExpansion};
use num_complex::Complex64;
use std::path::Path;

use crate::cache::CoeffCache;

/// Parses `"3"`, `"-0.5"`, `"2i"`, `"2+2i"`, `"0.5-1.25i"`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::Usage(format!("cannot parse complex number {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| (bytes[j] == b'+' || bytes[j] == b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(j) => (&body[..j], &body[j..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn parse_spec(s: &str) -> Result<EtaQuotientSpec, CliError> {
    s.parse::<EtaQuotientSpec>().map_err(CliError::usage)
}

/// Expansion to `m` terms through the cache when one is configured.
pub fn load_form(
    spec: &EtaQuotientSpec,
    m: u64,
    cache: Option<&CoeffCache>,
) -> Result<QExpansion, CliError> {
    match cache {
        Some(c) => Ok(c.load_or_compute(spec, m)?.0),
        None => expand_eta_quotient(spec, m).map_err(CliError::usage),
    }
}

/// Root number of `f` under the Fricke involution.
pub fn fricke(f: &QExpansion) -> Result<Complex64, CliError> {
    let e = fricke_eigenvalue(f).map_err(CliError::precision)?;
    if e.residual > 1e-8 {
        return Err(CliError::Usage(format!(
            "form is not a Fricke eigenform (residual {:e})",
            e.residual
        )));
    }
    Ok(e.value)
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
