//! `relumip`: robustness verification of small ReLU networks by MIP.
//!
//! Exit codes: 0 proven or success, 1 falsified (or a failed self-test),
//! 2 unknown or limit reached, 3 usage, input or solver error.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use relu_mip::bnb::{BnbConfig, MipStatus};
use relu_mip::formulation::export_lp;
use relu_mip::nn_model::{load_network, save_network, Network};
use relu_mip::oracle::suites::{identical_runs, run_all_checks, run_check, CheckOutcome};
use relu_mip::sampling;
use relu_mip::verify::{
    bench, build_instance_model, generate_instances, parse_records, summarize, Method,
    VerificationInstance, VerificationReport,
};

const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "relumip",
    version,
    about = "MIP-based robustness verification for ReLU networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one robustness query.
    Verify {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        /// Infinity-norm radius; overrides the instance file.
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        /// Seconds.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        /// Accepted for harness compatibility; the solve itself is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        cut_rounds: Option<usize>,
        /// Append the result record (one JSON line) to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the MIP for a query in LP text format.
    ExportLp {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several methods over a directory of instance files.
    Bench {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        instances: PathBuf,
        /// Comma-separated method tags.
        #[arg(long, value_delimiter = ',', value_parser = parse_method)]
        methods: Vec<Method>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[arg(long)]
        cut_rounds: Option<usize>,
    },
    /// Aggregate result records.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run the built-in randomized correctness checks.
    Selftest {
        /// Run only this check (1 to 8).
        #[arg(long)]
        check: Option<usize>,
        /// Skip the second run that compares summaries for reproducibility.
        #[arg(long)]
        no_rerun: bool,
    },
    /// Write a random network and instance files.
    Synth {
        /// Comma-separated layer widths, input first.
        #[arg(long, value_delimiter = ',', default_value = "4,8,8,2")]
        arch: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Comma-separated radii cycled over the instances.
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
        epsilons: Vec<f64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_net(path: &Path) -> Result<Network> {
    load_network(&read(path)?).with_context(|| format!("parsing network {}", path.display()))
}

fn load_instance(path: &Path) -> Result<VerificationInstance> {
    VerificationInstance::from_json(&read(path)?)
        .with_context(|| format!("parsing instance {}", path.display()))
}

fn config(time_limit: f64, cut_rounds: Option<usize>) -> BnbConfig {
    let mut c = BnbConfig {
        time_limit,
        ..BnbConfig::default()
    };
    if let Some(k) = cut_rounds {
        c.cut_rounds_per_node = k;
    }
    c
}

fn append_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    for l in lines {
        writeln!(f, "{l}")?;
    }
    Ok(())
}

fn print_report(r: &VerificationReport) {
    let s = &r.stats;
    println!("instance:   {}", r.instance);
    println!("method:     {}", r.method);
    println!("outcome:    {:?}", r.robust);
    println!("mip status: {:?}", s.status);
    println!("dual bound: {}", r.dual_bound);
    match r.objective_value {
        Some(v) => println!("incumbent:  {v}"),
        None => println!("incumbent:  none"),
    }
    if let (Some(p), Some(m)) = (&r.perturbation, r.margin) {
        println!("perturbation: {p:?}");
        println!("margin at anchor + perturbation: {m}");
    }
    println!(
        "nodes: {}  cuts: {}  root: {} -> {}  time: {:.3}s",
        s.node_count, s.cuts_added, s.root_bound_initial, s.root_bound, s.wall_time
    );
}

fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "json"));
    files.sort();
    if files.is_empty() {
        bail!("no .json instance files in {}", dir.display());
    }
    Ok(files)
}

fn print_check(c: &CheckOutcome) {
    let s = &c.summary;
    let counters: Vec<String> = s.counters.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!(
        "check {} [{}] {}: cases={} failures={} max_err={:e} {}",
        c.number,
        if c.passed { "PASS" } else { "FAIL" },
        c.title,
        s.cases,
        s.failures,
        s.max_error,
        counters.join(" ")
    );
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Verify {
            network,
            instance,
            epsilon,
            method,
            time_limit,
            seed: _,
            cut_rounds,
            out,
        } => {
            let net = load_net(&network)?;
            let mut inst = load_instance(&instance)?;
            inst.epsilon = epsilon;
            let report =
                relu_mip::verify::verify(&net, &inst, &config(time_limit, cut_rounds), method)?;
            print_report(&report);
            if let Some(path) = out {
                append_lines(&path, &[report.to_record().to_json_line()])?;
            }
            Ok(report.robust.exit_code() as u8)
        }
        Command::ExportLp {
            network,
            instance,
            method,
            epsilon,
            out,
        } => {
            let net = load_net(&network)?;
            let mut inst = load_instance(&instance)?;
            if let Some(e) = epsilon {
                inst.epsilon = e;
            }
            let model = build_instance_model(&net, &inst, method.kind())?;
            fs::write(&out, export_lp(&model))
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "wrote {} ({} columns, {} rows, {} binaries)",
                out.display(),
                model.num_vars(),
                model.constraints().len(),
                model.binary_cols().len()
            );
            Ok(0)
        }
        Command::Bench {
            network,
            instances,
            methods,
            out,
            time_limit,
            cut_rounds,
        } => {
            if methods.is_empty() {
                bail!("--methods must list at least one method");
            }
            let net = load_net(&network)?;
            let insts = instance_files(&instances)?
                .iter()
                .map(|p| load_instance(p))
                .collect::<Result<Vec<_>>>()?;
            let reports = bench(&net, &insts, &methods, &config(time_limit, cut_rounds))?;
            let records: Vec<_> = reports.iter().map(|r| r.to_record()).collect();
            let lines: Vec<String> = records.iter().map(|r| r.to_json_line()).collect();
            fs::write(&out, lines.join("\n") + "\n")
                .with_context(|| format!("writing {}", out.display()))?;
            print!("{}", summarize(&records));
            let limited = reports
                .iter()
                .any(|r| r.stats.status == MipStatus::TimeLimit);
            Ok(if limited { 2 } else { 0 })
        }
        Command::Summarize { input, json } => {
            let records = parse_records(&read(&input)?)?;
            let summary = summarize(&records);
            if json {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                print!("{summary}");
            }
            Ok(0)
        }
        Command::Selftest { check, no_rerun } => {
            let first = match check {
                Some(n) => vec![run_check(n)?],
                None => run_all_checks()?,
            };
            first.iter().for_each(print_check);
            let mut ok = first.iter().all(|c| c.passed);
            if !no_rerun {
                let second = match check {
                    Some(n) => vec![run_check(n)?],
                    None => run_all_checks()?,
                };
                let same = identical_runs(&first, &second);
                println!(
                    "reproducibility [{}] rerun summaries bitwise identical: {same}",
                    if same { "PASS" } else { "FAIL" }
                );
                ok &= same;
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Synth {
            arch,
            seed,
            count,
            epsilons,
            out_dir,
        } => {
            if arch.len() < 2 {
                bail!("--arch needs at least an input and an output width");
            }
            let mut rng = sampling::rng(seed);
            let net = sampling::random_network(&mut rng, &arch)?;
            let inst_dir = out_dir.join("instances");
            fs::create_dir_all(&inst_dir)
                .with_context(|| format!("creating {}", inst_dir.display()))?;
            fs::write(out_dir.join("network.json"), save_network(&net))?;
            let insts = generate_instances(&net, count, &epsilons, seed.wrapping_add(1))?;
            for inst in &insts {
                fs::write(inst_dir.join(format!("{}.json", inst.id)), inst.to_json())?;
            }
            println!(
                "wrote {} and {} instances under {}",
                out_dir.join("network.json").display(),
                insts.len(),
                inst_dir.display()
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
