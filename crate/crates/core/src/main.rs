use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use psilab::amplification::{contour_grid, Surface};
use psilab::harness::{self, csv};
use psilab::integrators::SchemeSpec;
use psilab::Result;

#[derive(Parser)]
#[command(name = "psilab", version, about = "Low-rank integrator stability lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Contour grid of |G|² over (Y, mu)
    Analyze {
        #[arg(long)]
        scheme: SchemeSpec,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        mu_max: f64,
    },
    /// Stability boundaries in the CFL number
    Boundary {
        /// One scheme; all known families when omitted
        #[arg(long)]
        scheme: Option<SchemeSpec>,
        #[arg(long, default_value_t = harness::BOUNDARY_TOL)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a configured experiment and write its norm history
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare measured mode multipliers with the closed forms
    Verify {
        #[arg(long)]
        scheme: Option<SchemeSpec>,
        #[arg(long, default_value_t = 16)]
        n_x: usize,
        #[arg(long, default_value_t = 4)]
        n_v: usize,
    },
    /// Write the four stability-region grids
    Figures {
        #[arg(long)]
        outdir: PathBuf,
    },
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

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze {
            scheme,
            out,
            points,
            mu_max,
        } => {
            let rows = contour_grid(&Surface::from_scheme(&scheme)?, points, points, mu_max)?;
            csv::write_file(&out, |w| csv::write_contour(w, &rows))?;
        }
        Command::Boundary { scheme, tol, out } => {
            let schemes: Vec<SchemeSpec> = match scheme {
                Some(s) => vec![s],
                None => harness::boundary_expectations().into_iter().map(|(s, _)| s).collect(),
            };
            let mut rows = Vec::new();
            for s in &schemes {
                rows.push((s.to_string(), harness::boundary_for(s, tol)?));
            }
            csv::write_file(&out, |w| {
                csv::write_boundary(w, rows.iter().map(|(n, r)| (n.as_str(), r)))
            })?;
        }
        Command::Simulate { config, out } => {
            let text = std::fs::read_to_string(&config).map_err(|source| psilab::Error::Io {
                path: config.clone(),
                source,
            })?;
            let cfg = harness::parse_config(&text)?;
            let records = harness::run_simulation(&cfg)?;
            csv::write_file(&out, |w| csv::write_history(w, &records))?;
        }
        Command::Verify { scheme, n_x, n_v } => {
            let schemes = match scheme {
                Some(s) => vec![s],
                None => harness::oracle_schemes(),
            };
            let mut ok = true;
            println!("scheme,v_mode,cfl,modes,max_discrepancy,max_residual,status");
            for r in harness::run_oracle_suite(&schemes, n_x, n_v)? {
                ok &= r.passed();
                println!(
                    "{},{:?},{},{},{:.3e},{:.3e},{}",
                    r.case.scheme,
                    r.case.v_mode,
                    r.case.cfl,
                    r.modes,
                    r.max_discrepancy,
                    r.max_residual,
                    if r.passed() { "ok" } else { "FAIL" }
                );
            }
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Command::Figures { outdir } => {
            for p in harness::emit_figure_grids(&outdir)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
