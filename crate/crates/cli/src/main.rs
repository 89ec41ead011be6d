//! `blab`: run Bergman-space experiments from a config file, or evaluate
//! single kernels, Berezin values and Toeplitz matrices.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};

use blab_core::experiments::{BerezinOracle, ConvergenceReport, Settings};
use blab_core::operators::matrix::{symbol_grid, toeplitz_matrix};
use blab_core::scalar::parse_complex;
use blab_core::{Complex64, DomainKind, DomainSpec, KernelModel, OperatorWord, SymbolExpr};

use crate::config::parse_config;

#[derive(Parser)]
#[command(name = "blab", version, about = "Bergman kernels, Toeplitz operators and Berezin transforms on radial domains")]
struct Cli {
    /// Digits after the decimal point in printed values.
    #[arg(long, global = true, default_value_t = 10)]
    precision: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a `key = value` config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for sampled point sets (overrides the config's `seed`).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print K(z, w). DOMAIN is `disc`, `punctured_disc`, `annulus` or a full
    /// `kind:r_inner:r_outer`; an optional RADIUS before Z sets the outer
    /// radius of a disc or the inner radius of the annulus `{r < |z| < 1}`.
    Kernel {
        domain: String,
        /// `[RADIUS] Z W`
        #[arg(num_args = 2..=3, allow_negative_numbers = true)]
        values: Vec<String>,
    },
    /// Print the Berezin transform of a word of Toeplitz operators at Z.
    Berezin {
        domain: String,
        word: String,
        #[arg(allow_negative_numbers = true)]
        z: String,
    },
    /// Print the n×n matrix of a Toeplitz operator in the normalized monomial basis.
    Toeplitz {
        domain: String,
        symbol: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
}

fn parse_domain(name: &str, radius: Option<f64>) -> Result<DomainSpec> {
    if name.contains(':') {
        if radius.is_some() {
            bail!("a radius argument cannot be combined with the full domain form `{name}`");
        }
        return Ok(name.parse()?);
    }
    let kind: DomainKind = name.parse()?;
    Ok(match kind {
        DomainKind::Disc => DomainSpec::disc(radius.unwrap_or(1.0))?,
        DomainKind::PuncturedDisc => DomainSpec::punctured_disc(radius.unwrap_or(1.0))?,
        DomainKind::Annulus => {
            let r = radius.ok_or_else(|| anyhow!("annulus needs its inner radius, e.g. `annulus 0.5 Z W`"))?;
            DomainSpec::annulus(r, 1.0)?
        }
    })
}

fn decimal(x: f64, precision: usize) -> String {
    let s = format!("{x:.precision$}");
    // avoid printing negative zero
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn complex(z: Complex64, precision: usize) -> String {
    let im = decimal(z.im, precision);
    if im.chars().all(|c| c == '0' || c == '.') {
        return decimal(z.re, precision);
    }
    let re = decimal(z.re, precision);
    match im.strip_prefix('-') {
        Some(abs) => format!("{re}-{abs}i"),
        None => format!("{re}+{im}i"),
    }
}

fn kernel(domain: &str, values: &[String], precision: usize) -> Result<()> {
    let (radius, z, w) = match values {
        [z, w] => (None, z, w),
        [r, z, w] => (Some(r.parse::<f64>().with_context(|| format!("malformed radius `{r}`"))?), z, w),
        _ => bail!("kernel takes [RADIUS] Z W"),
    };
    let d = parse_domain(domain, radius)?;
    let m = KernelModel::analytic(d, 0);
    println!("{}", complex(m.eval(parse_complex(z)?, parse_complex(w)?)?, precision));
    Ok(())
}

fn berezin(domain: &str, word: &str, z: &str, precision: usize) -> Result<()> {
    let d = parse_domain(domain, None)?;
    let word: OperatorWord = word.parse()?;
    let z = parse_complex(z)?;
    let oracle = BerezinOracle::for_word(d, &word, &Settings::default())?;
    let v = oracle
        .eval(z)?
        .ok_or_else(|| anyhow!("{z} is too close to the boundary of {d} for the truncated operator matrix"))?;
    println!("{}", complex(v, precision));
    Ok(())
}

fn toeplitz(domain: &str, symbol: &str, n: usize, precision: usize) -> Result<()> {
    let d = parse_domain(domain, None)?;
    let phi: SymbolExpr = symbol.parse()?;
    if n == 0 {
        bail!("--n must be at least 1");
    }
    let m = KernelModel::analytic(d, n);
    let g = symbol_grid(d, &phi, Default::default())?;
    let t = toeplitz_matrix(&m, &phi, &g, n)?;
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| complex(t.entries[(i, j)], precision)).collect();
        println!("{}", row.join(" "));
    }
    Ok(())
}

fn write_artifacts(report: &ConvergenceReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let csv = dir.join("report.csv");
    report.write_csv(fs::File::create(&csv).with_context(|| format!("cannot write {}", csv.display()))?)?;
    let json = serde_json::to_string_pretty(&report.summary())?;
    fs::write(dir.join("summary.json"), json + "\n").with_context(|| format!("cannot write summary in {}", dir.display()))?;
    Ok(())
}

/// Runs a config; `Ok(true)` when every verdict passes.
fn run(path: &Path, out: Option<PathBuf>, seed: Option<u64>, precision: usize) -> Result<bool> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let mut cfg = parse_config(&text).with_context(|| format!("invalid config {}", path.display()))?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(s) = seed {
        cfg.experiment.settings.seed = s;
    }
    let dir = out.unwrap_or(cfg.output);
    let report = cfg.experiment.run()?;
    write_artifacts(&report, &dir)?;
    println!("{} on {}", report.experiment, report.exhaustion);
    for v in report.verdicts() {
        let status = if v.passed { "PASS" } else { "FAIL" };
        println!("{status} {}: {} (threshold {})", v.name, decimal(v.value, precision), decimal(v.threshold, precision));
    }
    println!("wrote {} and {}", dir.join("report.csv").display(), dir.join("summary.json").display());
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let p = cli.precision;
    let outcome = match cli.command {
        Command::Run { config, out, seed } => run(&config, out, seed, p),
        Command::Kernel { domain, values } => kernel(&domain, &values, p).map(|_| true),
        Command::Berezin { domain, word, z } => berezin(&domain, &word, &z, p).map(|_| true),
        Command::Toeplitz { domain, symbol, n } => toeplitz(&domain, &symbol, n, p).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
