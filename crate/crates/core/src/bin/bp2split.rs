//! `bp2split`: basis listings, θ_k matrices and the full splitting check.
//!
//! Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 bad configuration.

use anyhow::{Context, Result};
use bp2split::monomial::PrimeContext;
use bp2split::report::{self, Format, RunConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bp2split", version, about = "Brown-Gitler splittings and Ext checks at odd primes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Tsv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// p = 5, the smallest prime the splitting theorem covers.
    Paper,
}

#[derive(Args)]
struct Common {
    /// Odd prime.
    #[arg(long, default_value_t = 3)]
    p: u32,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Write the report to DIR/<command>.<ext> instead of stdout.
    #[arg(long, env = "BP2SPLIT_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// List the monomial basis of A//E(i)_* with degree, weight and length.
    Basis {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        i: i32,
        #[arg(long, default_value_t = 40)]
        max_degree: i64,
    },
    /// θ_k: Σ^{qk}B_i(k) → M_{i+1}(pk) as a matrix, with its checks.
    Theta {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        i: i32,
    },
    /// Run every check behind the BP<2> splitting and report pass/fail.
    VerifySplitting {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 120)]
        max_degree: i64,
        #[arg(long, default_value_t = 27)]
        k_max: u64,
        #[arg(long, default_value_t = 4)]
        s_max: usize,
        #[arg(long, default_value_t = 9)]
        m_max: u64,
        #[arg(long, default_value_t = 5)]
        w_max: u64,
        /// Flip one Q_0 entry of H_*BP<2> (falsifier for the checks).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

impl Common {
    fn prime(&self) -> u32 {
        match self.preset {
            Some(Preset::Paper) => 5,
            None => self.p,
        }
    }

    fn format(&self) -> Format {
        match self.format {
            FormatArg::Json => Format::Json,
            FormatArg::Tsv => Format::Tsv,
            FormatArg::Text => Format::Text,
        }
    }

    fn setup(&self) -> Result<PrimeContext, bp2split::Error> {
        if let Some(j) = self.jobs {
            // a second initialisation only fails if a pool already exists; harmless
            let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
        }
        let ctx = PrimeContext::new(self.prime())?;
        if let Some(note) = report::prime_note(ctx.p()) {
            eprintln!("{note}");
        }
        Ok(ctx)
    }

    fn emit(&self, name: &str, body: String) -> Result<()> {
        match &self.out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                let path = dir.join(format!("{name}.{}", self.format().extension()));
                std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
                println!("wrote {}", path.display());
            }
            None => print!("{body}"),
        }
        Ok(())
    }
}

fn json(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Ok(true) when every check passed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Basis { common, i, max_degree } => {
            let ctx = common.setup()?;
            let rows = report::basis_rows(&ctx, i, max_degree)?;
            let body = match common.format() {
                Format::Json => json(&report::basis_report(&ctx, i, max_degree)?)?,
                Format::Tsv => report::basis_tsv(&rows),
                Format::Text => {
                    let mut s = format!("A//E({i})_* at p = {} through degree {max_degree}: {} monomials\n", ctx.p(), rows.len());
                    for r in &rows {
                        s.push_str(&format!("  {:<24} degree {:>4}  weight {:>4}  length {}\n", r.monomial, r.degree, r.weight, r.length));
                    }
                    s
                }
            };
            common.emit("basis", body)?;
            Ok(true)
        }
        Command::Theta { common, k, i } => {
            let ctx = common.setup()?;
            let t = report::theta_output(&ctx, i, k)?;
            let body = match common.format() {
                Format::Json => json(&t)?,
                Format::Tsv => report::theta_tsv(&t),
                Format::Text => report::theta_text(&t),
            };
            common.emit("theta", body)?;
            Ok(t.passed())
        }
        Command::VerifySplitting { common, max_degree, k_max, s_max, m_max, w_max, inject_fault } => {
            let ctx = common.setup()?;
            let cfg = RunConfig { p: ctx.p(), max_degree, k_max, s_max, m_max, w_max, inject_fault };
            let r = report::verify_splitting(&cfg)?;
            let body = match common.format() {
                Format::Json => json(&r)?,
                Format::Tsv => report::splitting_tsv(&r),
                Format::Text => report::splitting_text(&r),
            };
            common.emit("verify-splitting", body)?;
            Ok(r.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e.downcast_ref::<bp2split::Error>().is_some_and(|e| matches!(e, bp2split::Error::Config(_)));
            ExitCode::from(if config { 2 } else { 1 })
        }
    }
}
