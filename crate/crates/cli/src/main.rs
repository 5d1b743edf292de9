use clap::{Args, Parser, Subcommand};
use halfint_cli::cache::CoeffCache;
use halfint_cli::commands::{
    cmd_amplify, cmd_coeffs, cmd_geom_check, cmd_lvalue, cmd_mfun, cmd_selberg,
    cmd_selberg_pairing, cmd_shifted, Table, Twist,
};
use halfint_cli::config::{CharacterPolicy, ConfigOverrides, SweepConfig};
use halfint_cli::error::CliError;
use halfint_cli::scan::{cmd_scan, write_scan_csv};
use halfint_cli::util::{parse_complex, parse_spec, write_text};
use halfint_cli::verify::{cmd_verify, write_verify_csv, Suite};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "halfint",
    version,
    about = "Twisted L-values of half-integral weight forms"
)]
struct Cli {
    /// Directory for coefficient caches; caching is off when absent.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Write the main CSV table here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep max_χ |L(1/2, f, χ)| over moduli and fit the growth exponent.
    Scan(ScanArgs),
    /// Run an invariant suite.
    Verify {
        /// identities, lvalues, special, geometry, selberg, shifted or all
        suite: String,
    },
    /// Fourier coefficients of an eta quotient.
    Coeffs { spec: String, m: u64 },
    /// Completed L-value of an additive or multiplicative twist.
    Lvalue {
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, default_value_t = 1)]
        q: u64,
        /// Additive twist e(un/Q).
        #[arg(long, conflicts_with = "chi", allow_hyphen_values = true)]
        u: Option<i64>,
        /// Index of a primitive character modulo Q.
        #[arg(long)]
        chi: Option<usize>,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Amplified second moment against its shifted-sum bound.
    Amplify {
        spec: String,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        chi: usize,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        l: f64,
    },
    /// Truncated shifted double Dirichlet series in both normalizations.
    Shifted {
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        l1: u64,
        #[arg(long, default_value_t = 1)]
        l2: u64,
        #[arg(long, default_value_t = 2000)]
        m2_max: u64,
        #[arg(long, default_value_t = 1000)]
        h_max: u64,
    },
    /// Localizer transform table, or its kernel pairing with --pairing.
    Selberg {
        #[arg(long, value_delimiter = ',', default_value = "4")]
        t: Vec<f64>,
        #[arg(long, default_value_t = 41)]
        points: usize,
        /// Pair |f|² y^k with the localizer kernel centred at --z.
        #[arg(long)]
        pairing: Option<String>,
        #[arg(long, default_value = "i")]
        z: String,
        #[arg(long, default_value_t = 20_000)]
        m: u64,
    },
    /// Theta-integral closed form against quadrature.
    GeomCheck {
        #[arg(long, value_delimiter = ',', default_value = "1.5")]
        k: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0,1,5",
            allow_hyphen_values = true
        )]
        h: Vec<i64>,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.5,0.8")]
        rho: Vec<f64>,
    },
    /// M(s, t, δ) by each representation.
    Mfun {
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        delta: f64,
    },
}

#[derive(Args)]
struct ScanArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    form: Option<String>,
    #[arg(long)]
    q_min: Option<u64>,
    #[arg(long)]
    q_max: Option<u64>,
    /// Include composite moduli.
    #[arg(long)]
    all_moduli: bool,
    /// Sample this many primitive characters per modulus.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Write the JSON summary here instead of stderr.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn scan(
    args: ScanArgs,
    cli_out: Option<PathBuf>,
    cache: Option<&CoeffCache>,
) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(p) => SweepConfig::load(p)?,
        None => SweepConfig::default(),
    };
    config.apply(&ConfigOverrides {
        form: args.form,
        q_min: args.q_min,
        q_max: args.q_max,
        primes_only: args.all_moduli.then_some(false),
        characters: args.sample.map(|_| CharacterPolicy::Sample),
        sample_size: args.sample,
        seed: args.seed,
        budget: args.budget,
        lvalue_rel: args.tol,
        theta: args.theta,
        threads: args.threads,
    });
    let out = cmd_scan(&config, cache)?;
    let mut csv = Vec::new();
    write_scan_csv(&out.rows, config.seed, &mut csv)?;
    write_text(cli_out.as_deref(), &String::from_utf8_lossy(&csv))?;
    let summary = serde_json::to_string_pretty(&out.summary)? + "\n";
    match &args.summary {
        Some(p) => std::fs::write(p, summary)?,
        None => eprint!("{summary}"),
    }
    if out.summary.failures > 0 {
        return Err(CliError::Precision(format!(
            "{} of {} points failed",
            out.summary.failures, out.summary.points
        )));
    }
    Ok(())
}

fn emit(t: Table, out: Option<&std::path::Path>) -> Result<(), CliError> {
    write_text(out, &t.to_csv()?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cache = cli.cache_dir.map(CoeffCache::new).transpose()?;
    let cache = cache.as_ref();
    let out = cli.out.as_deref();
    match cli.command {
        Command::Scan(args) => scan(args, cli.out.clone(), cache),
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let res = cmd_verify(suite);
            let mut csv = Vec::new();
            write_verify_csv(&res, &mut csv)?;
            write_text(out, &String::from_utf8_lossy(&csv))?;
            let failed = res.iter().filter(|c| !c.passed()).count();
            if failed > 0 {
                return Err(CliError::SuiteFailure {
                    failed,
                    total: res.len(),
                });
            }
            Ok(())
        }
        Command::Coeffs { spec, m } => emit(cmd_coeffs(&parse_spec(&spec)?, m, cache)?, out),
        Command::Lvalue {
            spec,
            s,
            q,
            u,
            chi,
            budget,
        } => {
            let twist = match (u, chi) {
                (_, Some(i)) => Twist::Character(i),
                (u, None) => Twist::Additive(u.unwrap_or(0)),
            };
            let t = cmd_lvalue(
                &parse_spec(&spec)?,
                parse_complex(&s)?,
                q,
                twist,
                budget,
                cache,
            )?;
            emit(t, out)
        }
        Command::Amplify { spec, q, chi, x, l } => {
            emit(cmd_amplify(&parse_spec(&spec)?, q, chi, x, l, cache)?, out)
        }
        Command::Shifted {
            spec,
            s,
            w,
            q,
            l1,
            l2,
            m2_max,
            h_max,
        } => {
            let t = cmd_shifted(
                &parse_spec(&spec)?,
                parse_complex(&s)?,
                parse_complex(&w)?,
                q,
                l1,
                l2,
                m2_max,
                h_max,
                cache,
            )?;
            emit(t, out)
        }
        Command::Selberg {
            t,
            points,
            pairing,
            z,
            m,
        } => match pairing {
            Some(spec) => emit(
                cmd_selberg_pairing(&parse_spec(&spec)?, &t, parse_complex(&z)?, m, cache)?,
                out,
            ),
            None => {
                let [tp] = t.as_slice() else {
                    return Err(CliError::Usage(
                        "the transform table takes a single T".into(),
                    ));
                };
                emit(cmd_selberg(*tp, points)?, out)
            }
        },
        Command::GeomCheck { k, h, rho } => emit(cmd_geom_check(&k, &h, &rho)?, out),
        Command::Mfun { s, t, delta } => emit(
            cmd_mfun(parse_complex(&s)?, parse_complex(&t)?, delta)?,
            out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("halfint: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
