use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ellcorr_core::algebra::parse_complex;
use ellcorr_core::briot_bouquet::{
    discover_binomial_for, fit_binomial_from_series, CORRESPONDENCE_WP_TERMS,
};
use ellcorr_core::report::{self, Format, RowOverride, SuiteConfig};
use ellcorr_core::weierstrass::{EllipticInvariants, FamilyKind, SolutionFamily, WeierstrassP};
use ellcorr_core::{c64, Complex, Error};

#[derive(Parser)]
#[command(
    name = "ellcorr",
    version,
    about = "Certify Schwarzian and Briot-Bouquet ODE identities for Weierstrass elliptic solutions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Text,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Text => Format::Text,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FitFamily {
    Wp,
    Wpprime,
    Wp2,
    Wp3,
}

impl FitFamily {
    fn kind(self) -> FamilyKind {
        match self {
            FitFamily::Wp => FamilyKind::Wp,
            FitFamily::Wpprime => FamilyKind::WpPrime,
            FitFamily::Wp2 => FamilyKind::Wp2,
            FitFamily::Wp3 => FamilyKind::Wp3,
        }
    }

    /// Same invariants as the matching canonical row.
    fn default_invariants(self) -> (f64, f64) {
        match self {
            FitFamily::Wp => (4.0, 1.0),
            FitFamily::Wpprime => (0.0, 2.0),
            FitFamily::Wp2 => (5.0, 0.0),
            FitFamily::Wp3 => (0.0, 1.0),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalFn {
    Wp,
    Wpprime,
}

#[derive(clap::Args)]
struct RowArgs {
    /// Restrict to one canonical row (1-6).
    #[arg(long)]
    row: Option<usize>,
    /// Override g2 of the selected row, e.g. "4" or "1+2i".
    #[arg(long, value_parser = complex_arg, requires = "row", allow_hyphen_values = true)]
    g2: Option<Complex>,
    /// Override g3 of the selected row.
    #[arg(long, value_parser = complex_arg, requires = "row", allow_hyphen_values = true)]
    g3: Option<Complex>,
    /// Override a of the selected row (rows 5 and 6).
    #[arg(long, value_parser = complex_arg, requires = "row", allow_hyphen_values = true)]
    a: Option<Complex>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl RowArgs {
    fn config(&self) -> SuiteConfig {
        let mut cfg = SuiteConfig {
            seed: self.seed,
            ..SuiteConfig::default()
        };
        if let Some(r) = self.row {
            cfg.rows = vec![r];
            let o = RowOverride {
                g2: self.g2,
                g3: self.g3,
                a: self.a,
            };
            if o != RowOverride::default() {
                cfg.overrides.insert(r, o);
            }
        }
        cfg
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the certification suite and print a report.
    Verify {
        #[command(flatten)]
        rows: RowArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 32)]
        samples: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        /// Values of L for the binomial theorem instances (repeatable).
        #[arg(long = "l", value_parser = complex_arg, allow_hyphen_values = true)]
        l: Vec<Complex>,
        /// Also write one file per section into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Dominant balances and Fuchs indices of the canonical rows.
    Fuchs {
        #[command(flatten)]
        rows: RowArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// Fit a binomial equation (u')^k = R(u) to an elliptic family.
    Fit {
        #[arg(long, value_enum)]
        family: FitFamily,
        #[arg(long)]
        k: u32,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        g2: Option<Complex>,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        g3: Option<Complex>,
        /// Numerator degree; searched when omitted.
        #[arg(long)]
        deg_n: Option<usize>,
        #[arg(long, default_value_t = 0, requires = "deg_n")]
        deg_d: usize,
    },
    /// Evaluate the Weierstrass function or its derivative.
    Eval {
        #[arg(value_enum)]
        function: EvalFn,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        g2: Complex,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        g3: Complex,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        z: Complex,
    },
}

fn complex_arg(s: &str) -> Result<Complex, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn fmt_c(c: Complex) -> String {
    if c.im < 0.0 {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

fn write_stdout(bytes: &[u8]) -> Result<(), Error> {
    std::io::stdout()
        .write_all(bytes)
        .map_err(|e| Error::Config(format!("writing stdout: {e}")))
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Verify {
            rows,
            tol,
            samples,
            format,
            l,
            out_dir,
        } => {
            let mut cfg = rows.config();
            cfg.tol = tol;
            cfg.samples = samples;
            cfg.format = format.into();
            if !l.is_empty() {
                cfg.l_values = l;
            }
            let rep = report::run_suite(&cfg)?;
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir)
                    .map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?;
                for (name, body) in report::csv_sections(&rep) {
                    let path = dir.join(format!("{name}.csv"));
                    std::fs::write(&path, body)
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                }
                let path = dir.join("report.json");
                std::fs::write(&path, report::emit(&rep, Format::Json))
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            }
            write_stdout(&report::emit(&rep, cfg.format))?;
            eprintln!(
                "{} in {:.3}s",
                if rep.all_pass() {
                    "all records pass"
                } else {
                    "some records FAIL"
                },
                rep.meta.wall_time_s
            );
            Ok(ExitCode::from(rep.exit_code() as u8))
        }
        Cmd::Fuchs { rows, format } => {
            let rep = report::run_fuchs(&rows.config())?;
            write_stdout(&report::emit(&rep, format.into()))?;
            Ok(ExitCode::from(rep.exit_code() as u8))
        }
        Cmd::Fit {
            family,
            k,
            g2,
            g3,
            deg_n,
            deg_d,
        } => {
            let (d2, d3) = family.default_invariants();
            let inv =
                EllipticInvariants::new(g2.unwrap_or(c64(d2, 0.0)), g3.unwrap_or(c64(d3, 0.0)));
            if inv.is_degenerate() {
                eprintln!("warning: invariants are degenerate (g2^3 = 27 g3^2)");
            }
            let fam = SolutionFamily::elliptic(family.kind(), inv)?;
            let series = fam.laurent_series(CORRESPONDENCE_WP_TERMS)?;
            let fit = match deg_n {
                Some(n) => fit_binomial_from_series(&series, k, n, deg_d),
                None => discover_binomial_for(&series, k),
            };
            match fit {
                Ok(fit) => {
                    let out = format!(
                        "family {}\ng2 {}\ng3 {}\n(u')^{} = {}\nfit residual {:e}\n",
                        fam.kind().name(),
                        fmt_c(inv.g2),
                        fmt_c(inv.g3),
                        fit.eq.k,
                        fit.eq.rhs,
                        fit.residual
                    );
                    write_stdout(out.as_bytes())?;
                    Ok(if fit.is_exact() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    })
                }
                Err(Error::NoExactFit { residual, best }) => {
                    eprintln!("no exact fit for k = {k} (best residual {residual:e}, R = {best})");
                    Ok(ExitCode::FAILURE)
                }
                Err(e) => Err(e),
            }
        }
        Cmd::Eval {
            function,
            g2,
            g3,
            z,
        } => {
            let p = WeierstrassP::new(EllipticInvariants::new(g2, g3));
            let (name, v) = match function {
                EvalFn::Wp => ("wp", p.wp(z)?),
                EvalFn::Wpprime => ("wpprime", p.wp_prime(z)?),
            };
            write_stdout(format!("{name}({}) = {}\n", fmt_c(z), fmt_c(v)).as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
