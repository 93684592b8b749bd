use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use afdm::detect::{flops_model, DetectorKind};
use afdm::sim::{
    calibrate_eta, parse_detectors, parse_snr_list, run_sweep, trace_convergence, write_eta_csv,
    write_file, write_run_csv, write_trace_csv, SimConfig,
};
use afdm::Error;

#[derive(Parser)]
#[command(name = "afdm-sim", version, about = "AFDM link-level Monte Carlo simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER sweep over an SNR grid.
    Run {
        #[command(flatten)]
        scenario: Scenario,
        /// `start:step:stop` or a comma-separated list, in dB.
        #[arg(long, allow_hyphen_values = true)]
        snr_db: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-iteration MSE at one SNR.
    Trace {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, allow_hyphen_values = true)]
        snr_db: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choose η by minimizing the SFD BER over a grid.
    CalibrateEta {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value = "0.1:0.1:2.0")]
        grid: String,
        #[arg(long, default_value = "12", allow_hyphen_values = true)]
        snr_db: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Complexity of every detector from the closed-form FLOP model.
    Flops {
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        l: usize,
        /// Comma-separated iteration counts.
        #[arg(long, default_value = "1,5,10")]
        iters: String,
    },
}

#[derive(Args)]
struct Scenario {
    /// JSON file with any of the flags below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long)]
    alpha_max: Option<f64>,
    #[arg(long)]
    xi: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
    /// Comma-separated subset of mmse,mrc-dfe,sfd.
    #[arg(long)]
    detectors: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    t_error: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    integer_doppler: bool,
    /// Single unit-gain path, no delay or Doppler.
    #[arg(long)]
    awgn: bool,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

impl Scenario {
    fn build(&self, snr_db: Option<&str>) -> Result<SimConfig, Failure> {
        let mut cfg = SimConfig::default();
        if let Some(path) = &self.config {
            cfg.merge_file(path).map_err(usage)?;
        }
        macro_rules! set {
            ($($src:ident => $dst:ident),*) => {
                $(if let Some(v) = self.$src { cfg.$dst = v; })*
            };
        }
        set!(n => n, paths => paths, lmax => l_max, alpha_max => alpha_max, xi => xi_nu,
             frames => frames, eta => eta, t_error => t_error, max_iter => t_max_iter, seed => seed);
        cfg.integer_doppler |= self.integer_doppler;
        cfg.awgn |= self.awgn;
        if let Some(d) = &self.detectors {
            cfg.detectors = parse_detectors(d).map_err(usage)?;
        }
        if let Some(s) = snr_db {
            cfg.snr_db_list = parse_snr_list(s).map_err(usage)?;
        }
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), Error> {
    match out {
        Some(path) => write_file(path, |w| write(w)),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { scenario, snr_db, out } => {
            let cfg = scenario.build(snr_db.as_deref())?;
            let result = run_sweep(&cfg)?;
            emit(out.as_deref(), |w| write_run_csv(&result, w))?;
        }
        Command::Trace { scenario, snr_db, out } => {
            let cfg = scenario.build(snr_db.as_deref())?;
            let [snr] = cfg.snr_db_list[..] else {
                return Err(Failure::Usage("trace takes a single --snr-db value".into()));
            };
            let traces = trace_convergence(&cfg, snr).map_err(usage)?;
            emit(out.as_deref(), |w| write_trace_csv(snr, &traces, w))?;
        }
        Command::CalibrateEta {
            scenario,
            grid,
            snr_db,
            out,
        } => {
            let cfg = scenario.build(None)?;
            let grid = parse_snr_list(&grid).map_err(usage)?;
            let cal = calibrate_eta(&cfg, snr_db, &grid)?;
            match out {
                Some(path) => {
                    write_file(&path, |w| write_eta_csv(&cal, w))?;
                    println!("eta = {}", afdm::sim::fmt_float(cal.eta));
                }
                None => {
                    eprintln!("eta = {}", afdm::sim::fmt_float(cal.eta));
                    emit(None, |w| write_eta_csv(&cal, w))?;
                }
            }
        }
        Command::Flops { n, l, iters } => {
            let iters: Vec<usize> = iters
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| Failure::Usage(format!("invalid iteration count `{s}`"))))
                .collect::<Result<_, _>>()?;
            let mut rows = vec!["detector,n,l,iters,flops".to_string()];
            for kind in DetectorKind::ALL {
                for &it in &iters {
                    let f = flops_model(kind, n, l, it).map_err(usage)?;
                    rows.push(format!("{kind},{n},{l},{it},{f}"));
                }
            }
            println!("{}", rows.join("\n"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
