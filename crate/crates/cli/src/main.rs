use std::fs::File;
use std::io::{BufWriter, IsTerminal};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pinn_cert_core::branching::BranchConfig;
use pinn_cert_core::certify::{
    bound_quantity, sha256_hex, verify, Certificate, CertifyConfig, ConditionSelect, Quantity,
    Tolerances,
};
use pinn_cert_core::derivative::BoundConfig;
use pinn_cert_core::linear::{InputBox, Interval};
use pinn_cert_core::network::DenseNetwork;
use pinn_cert_core::pde::{build_pde_with, PdeName, PdeOptions, SorptionLeft};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "pinn-cert",
    version,
    about = "Certified error bounds for physics-informed tanh networks"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the initial, boundary and residual conditions of a PDE.
    Certify(CertifyArgs),
    /// Bound the network output or one of its derivatives over a box.
    Bound(BoundArgs),
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    net: PathBuf,
    /// burgers | schrodinger | allen-cahn | diffusion-sorption
    #[arg(long)]
    pde: PdeName,
    /// initial | boundary | residual | all
    #[arg(long, default_value = "all")]
    condition: ConditionSelect,
    /// Number of branch splits.
    #[arg(long, default_value_t = 1000)]
    nb: usize,
    /// Monte-Carlo samples on the root box.
    #[arg(long, default_value_t = 100_000)]
    ns: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = Tolerances::default().initial)]
    tol_init: f64,
    #[arg(long, default_value_t = Tolerances::default().boundary)]
    tol_bound: f64,
    #[arg(long, default_value_t = Tolerances::default().residual)]
    tol_res: f64,
    /// Weight of every McCormick combination, in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    /// Left boundary value for diffusion-sorption.
    #[arg(long, value_enum, default_value_t = LeftValue::Zero)]
    sorption_left: LeftValue,
    /// Certificate path; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the final branches of every condition as JSON lines.
    #[arg(long)]
    dump_branches: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LeftValue {
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    net: PathBuf,
    /// Box as `l0:u0,l1:u1,...`.
    #[arg(long = "box", value_parser = parse_box)]
    region: InputBox,
    /// u | du/di | d2u/di2
    #[arg(long, default_value = "u")]
    target: String,
    /// Coordinate of the derivative.
    #[arg(long, default_value_t = 0)]
    i: usize,
    /// Output component.
    #[arg(long, default_value_t = 0)]
    output: usize,
    #[arg(long, default_value_t = 0)]
    nb: usize,
    #[arg(long, default_value_t = 10_000)]
    ns: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
}

fn parse_box(s: &str) -> Result<InputBox, String> {
    let mut iv = Vec::new();
    for part in s.split(',') {
        let (l, u) = part
            .split_once(':')
            .ok_or_else(|| format!("`{part}` is not of the form l:u"))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        iv.push(Interval {
            lo: parse(l)?,
            hi: parse(u)?,
        });
    }
    InputBox::from_intervals(&iv).map_err(|e| e.to_string())
}

fn parse_quantity(target: &str, i: usize) -> Result<Quantity, String> {
    match target {
        "u" => Ok(Quantity::Value),
        "du/di" => Ok(Quantity::First(i)),
        "d2u/di2" => Ok(Quantity::Second(i)),
        other => Err(format!(
            "unknown target `{other}` (expected u, du/di or d2u/di2)"
        )),
    }
}

type Failure = Box<dyn std::error::Error>;

fn certify(args: CertifyArgs) -> Result<bool, Failure> {
    let bytes = std::fs::read(&args.net).map_err(|e| format!("{}: {e}", args.net.display()))?;
    let net = DenseNetwork::from_json(std::str::from_utf8(&bytes)?)?;
    let opts = PdeOptions {
        sorption_left: match args.sorption_left {
            LeftValue::Zero => SorptionLeft::Zero,
            LeftValue::One => SorptionLeft::One,
        },
    };
    let pde = build_pde_with(args.pde, opts);
    let cfg = CertifyConfig {
        bound: BoundConfig::uniform(args.eta),
        tolerances: Tolerances {
            initial: args.tol_init,
            boundary: args.tol_bound,
            residual: args.tol_res,
        },
        ..CertifyConfig::new(args.nb, args.ns, args.seed)
    };
    cfg.bound.validate()?;
    let runs = verify(&net, &pde, args.condition, &cfg)?;
    for r in &runs {
        let c = &r.result;
        tracing::info!(
            tag = %c.tag,
            certified = c.certified,
            empirical = c.empirical,
            tolerance = c.tolerance,
            pass = c.pass,
            seconds = c.seconds,
            "condition"
        );
    }
    if let Some(path) = &args.dump_branches {
        let mut w =
            BufWriter::new(File::create(path).map_err(|e| format!("{}: {e}", path.display()))?);
        for r in &runs {
            r.report.write_ndjson(&mut w)?;
        }
    }
    let cert = Certificate::new(
        sha256_hex(&bytes),
        pde.name.as_str(),
        runs.into_iter().map(|r| r.result).collect(),
    );
    match &args.out {
        Some(path) => cert
            .write(path)
            .map_err(|e| format!("{}: {e}", path.display()))?,
        None => println!("{}", cert.to_json()),
    }
    Ok(cert.pass)
}

fn bound(args: BoundArgs) -> Result<(), Failure> {
    let net = DenseNetwork::load(&args.net)?;
    let q = parse_quantity(&args.target, args.i)?;
    let cfg = BoundConfig::uniform(args.eta);
    let rep = bound_quantity(
        &net,
        q,
        args.output,
        &args.region,
        &cfg,
        &BranchConfig::new(args.nb, args.ns, args.seed),
    )?;
    let out = json!({
        "target": args.target,
        "i": args.i,
        "output": args.output,
        "lo": rep.global.lo,
        "hi": rep.global.hi,
        "empirical_lo": rep.empirical.lo,
        "empirical_hi": rep.empirical.hi,
        "nb": args.nb,
        "ns": args.ns,
        "seed": args.seed,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Certify(a) => certify(a).map(|pass| if pass { 0 } else { 1 }),
        Command::Bound(a) => bound(a).map(|()| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
