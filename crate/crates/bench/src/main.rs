use clap::{Parser, Subcommand};
use singctrl_bench::experiments::{cmd_cascade, cmd_control, cmd_energy_scaling, cmd_table1, BoxResult};
use singctrl_bench::verify::cmd_verify;
use singctrl_bench::ExperimentConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "singctrl", about = "Null controls of the singular beam and their wave cascade")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; falls back to $SINGCTRL_OUT, then the config value.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Concurrent per-ε runs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Extend the default sweep down to ε = 1e-6.
    #[arg(long, global = true)]
    deep: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Control norms and expansion errors per ε, with fitted rates.
    Table1,
    /// The wave controls v0, v1, v2.
    Cascade,
    /// One beam control.
    Control {
        #[arg(long)]
        eps: f64,
    },
    /// Property suites; exits nonzero if any fails.
    Verify,
    /// Beam energy under a boundary-layer load.
    EnergyScaling,
}

fn load(cli: &Cli) -> BoxResult<ExperimentConfig> {
    let mut c = match &cli.config {
        Some(path) => ExperimentConfig::parse(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = cli.out.clone().or_else(|| std::env::var_os("SINGCTRL_OUT").map(PathBuf::from)) {
        c.out = out;
    }
    if let Some(j) = cli.jobs {
        c.jobs = j;
    }
    c.deep |= cli.deep;
    c.validate()?;
    Ok(c)
}

fn execute(cli: &Cli) -> BoxResult<bool> {
    let c = load(cli)?;
    match &cli.command {
        Command::Table1 => {
            let (rows, rates) = cmd_table1(&c)?;
            for r in &rows {
                match &r.failure {
                    None => println!(
                        "eps {:e}: {} iterations, norm {:.6}, E {:.3e} {:.3e} {:.3e}",
                        r.eps, r.iterations, r.norm, r.errors[0], r.errors[1], r.errors[2]
                    ),
                    Some(why) => println!("eps {:e}: failed: {why}", r.eps),
                }
            }
            for r in &rates {
                println!("{} slope {}", r.quantity, r.slope.map_or("n/a".into(), |s| format!("{s:.3}")));
            }
            Ok(rows.iter().all(|r| r.failure.is_none()))
        }
        Command::Cascade => {
            let res = cmd_cascade(&c)?;
            for (j, l) in res.levels.iter().enumerate() {
                println!(
                    "v{j}: norm {:.6}, {} iterations, final state {:.2e}",
                    singctrl_core::signals::l2_norm(&l.control),
                    l.iterations,
                    l.final_residual
                );
            }
            Ok(true)
        }
        Command::Control { eps } => {
            let r = cmd_control(&c, *eps)?;
            println!("eps {eps:e}: {} iterations, norm of sqrt(eps) v {:.6}", r.iterations, r.norm);
            if let Some(why) = &r.failure {
                println!("warning: {why}");
            }
            Ok(r.failure.is_none())
        }
        Command::Verify => {
            let out = cmd_verify(&c);
            for s in &out {
                println!("{}", s.line());
            }
            Ok(out.iter().all(|s| s.passed))
        }
        Command::EnergyScaling => {
            let (points, exponent) = cmd_energy_scaling(&c)?;
            for (e, v) in points {
                println!("eps {e:e}: sup sqrt(E) {v:.4e}");
            }
            println!("exponent {}", exponent.map_or("n/a".into(), |s| format!("{s:.3}")));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("singctrl: {e}");
            ExitCode::from(2)
        }
    }
}
