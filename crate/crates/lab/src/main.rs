use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use unsharp_core::experiments::{
    load_configs, run_check, run_scenario, CheckSuite, Report, Verdict,
};
use unsharp_core::povm::PovmJson;
use unsharp_core::sphere::{PartitionSpec, SphereGrid};
use unsharp_core::ToeplitzContext;

/// Worker count for the rayon pool; unset means one per core.
const WORKERS_ENV: &str = "LAB_WORKERS";

#[derive(Parser)]
#[command(
    name = "lab",
    about = "Noise and non-commutativity experiments for quantized partitions of unity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenarios in a config file (one object or an array).
    Run {
        config: PathBuf,
        /// Directory prepended to each scenario's output prefix.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Quantize a partition of unity at level m and write the POVM as JSON.
    Quantize {
        #[arg(long)]
        m: usize,
        /// Inline JSON, a JSON file, `tetrahedral`, `bands:<N>:<overlap>` or `caps:<N>`.
        #[arg(long)]
        partition: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a fixed check suite.
    Check {
        #[arg(long, value_parser = parse_suite)]
        suite: CheckSuite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write `<prefix>.csv` and `<prefix>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print version information.
    Version,
}

fn parse_suite(s: &str) -> Result<CheckSuite, String> {
    s.parse().map_err(|_| {
        let names: Vec<_> = CheckSuite::ALL.iter().map(|c| c.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

/// Failure modes mapped to exit codes 1 and 2.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn configure_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        usage(format!(
            "{WORKERS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn print_verdicts(scenario: &str, verdicts: &[Verdict]) {
    for v in verdicts {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} {scenario}: {}: {}", v.name, v.detail);
    }
}

fn emit(report: &Report, prefix: Option<&Path>) -> Result<bool, Failure> {
    print_verdicts(&report.scenario, &report.verdicts);
    if let Some(prefix) = prefix {
        let (csv, json) = report.write(prefix)?;
        println!("wrote {} and {}", csv.display(), json.display());
    }
    Ok(report.all_pass())
}

fn run(config: &Path, out_dir: Option<&Path>) -> Result<bool, Failure> {
    let configs = load_configs(config).map_err(usage)?;
    let mut pass = true;
    for cfg in &configs {
        let prefix = PathBuf::from(cfg.output_prefix());
        let prefix = match out_dir {
            Some(d) => d.join(prefix),
            None => prefix,
        };
        let report = run_scenario(cfg)?;
        pass &= emit(&report, Some(&prefix))?;
    }
    Ok(pass)
}

fn parse_partition(arg: &str) -> Result<PartitionSpec, Failure> {
    let arg = arg.trim();
    if arg.starts_with('{') {
        return serde_json::from_str(arg).map_err(usage);
    }
    if Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg).map_err(usage)?;
        return serde_json::from_str(&text).map_err(usage);
    }
    let parts: Vec<&str> = arg.split(':').collect();
    let bad = || usage(format!("unrecognized partition {arg:?}"));
    match parts.as_slice() {
        ["tetrahedral"] => Ok(PartitionSpec::tetrahedral()),
        ["bands", n, overlap] => Ok(PartitionSpec::bands(
            n.parse().map_err(|_| bad())?,
            overlap.parse().map_err(|_| bad())?,
        )),
        ["caps", n] => Ok(PartitionSpec::Caps {
            n: Some(n.parse().map_err(|_| bad())?),
            centers: None,
            radius: None,
            radius_factor: None,
            taper: None,
        }),
        _ => Err(bad()),
    }
}

fn quantize(m: usize, partition: &str, out: &Path) -> Result<bool, Failure> {
    let spec = parse_partition(partition)?;
    let p = spec.build().map_err(usage)?;
    p.validate(&SphereGrid::standard())?;
    let ctx = ToeplitzContext::new(m).map_err(usage)?;
    let a = ctx.quantize_partition(&p)?;
    let defect = a.normalization_defect();
    let min_eig = a
        .elements()
        .iter()
        .map(|e| e.min_eigenvalue())
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let verdicts = vec![
        Verdict::new(
            "sum A_j = id",
            defect <= 1e-10,
            format!("defect {defect:e}"),
        ),
        Verdict::new(
            "A_j >= 0",
            min_eig >= -1e-10,
            format!("min eigenvalue {min_eig:e}"),
        ),
    ];
    print_verdicts("quantize", &verdicts);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let json = serde_json::to_string(&PovmJson::from(a))?;
    std::fs::write(out, json + "\n")?;
    println!("wrote {}", out.display());
    Ok(verdicts.iter().all(|v| v.pass))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_workers().and_then(|()| match &cli.command {
        Command::Run { config, out_dir } => run(config, out_dir.as_deref()),
        Command::Quantize { m, partition, out } => quantize(*m, partition, out),
        Command::Check { suite, seed, out } => emit(&run_check(*suite, *seed)?, out.as_deref()),
        Command::Version => {
            println!("lab {}", env!("CARGO_PKG_VERSION"));
            Ok(true)
        }
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
