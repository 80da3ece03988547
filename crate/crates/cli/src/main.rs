use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cmaxcut::bench::{load_corpus, run_bench, run_method, Method, SCHEMA_VERSION};
use cmaxcut::config::{Config, CONFIG_ENV};
use cmaxcut::error::Error;
use cmaxcut::forge::{gadget_from_3dm, gen_3dm_with, gen_random, has_perfect_matching, BudgetLaw, Planting, WeightLaw};
use cmaxcut::io::{format_3dm, format_instance, parse_3dm, read_instance, InstanceFile};
use cmaxcut::kernel::kernelize_multi;
use cmaxcut::lasserre::{block_independence_score, build_program_for, solve_with, BiasProfile};
use cmaxcut::pipeline::solve_multi_report;
use cmaxcut::verify::{run_suite, Suite};

/// Constrained Max-Cut toolkit: kernels, moment relaxations, rounding and exact oracles.
#[derive(Parser)]
#[command(name = "cmaxcut", version)]
struct Cli {
    /// Config file (`key = value`); overrides the environment variable of the same role.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct SolveFlags {
    /// Instance file (text or `.json`).
    file: PathBuf,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance and print the solution as JSON.
    Solve {
        #[command(flatten)]
        flags: SolveFlags,
        #[arg(long, default_value = "sdp")]
        method: Method,
    },
    /// Exact optimum by exhaustive search.
    Oracle {
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Kernelize an instance and print the reduced instance with its vertex bijection.
    Kernelize {
        file: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Generate a seeded random instance in the text format.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        parts: usize,
        /// A fixed per-part budget, or `random`.
        #[arg(long, default_value = "random")]
        budget: String,
        /// `unit` or `uniform:LO:HI`.
        #[arg(long, default_value = "unit")]
        weights: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write here instead of stdout (`.json` selects the JSON mirror).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the all-cut gadget of a 3D matching file (lines `x y z`).
    Gadget {
        /// 3D matching file; omit to generate one with `--size`.
        file: Option<PathBuf>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        extras: usize,
        /// Drop one planted triple when generating.
        #[arg(long)]
        remove_one: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the generated 3D matching description here.
        #[arg(long)]
        save_3dm: Option<PathBuf>,
    },
    /// Solve the relaxation and print biases, correlations and block-independence scores.
    InspectSdp {
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Run methods over a corpus directory and write `<out>.csv` and `<out>.json`.
    Bench {
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "sdp,pipage,greedy")]
        methods: Vec<Method>,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long, default_value = "bench")]
        out: PathBuf,
        /// Also write `<out>.timings.csv`.
        #[arg(long)]
        timings: bool,
    },
    /// Run the self-check suites.
    Verify {
        #[arg(long = "suite", value_delimiter = ',')]
        suites: Vec<Suite>,
        /// Extra instances for the kernel suite.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<Config> {
    Ok(match path {
        Some(p) if !p.as_os_str().is_empty() => Config::load(p).with_context(|| format!("config {}", p.display()))?,
        _ => Config::default(),
    })
}

fn apply(cfg: &mut Config, f: &SolveFlags) {
    if let Some(e) = f.eps {
        cfg.eps = e;
    }
    if let Some(l) = f.level {
        cfg.level = l;
    }
    if let Some(t) = f.trials {
        cfg.trials = t;
    }
    if let Some(s) = f.seed {
        cfg.seed = s;
    }
}

fn load(path: &Path) -> Result<InstanceFile> {
    let file = read_instance(path).map_err(|e| match e {
        Error::Parse { line, column, message } => {
            Error::Parse { line, column, message: format!("{}: {message}", path.display()) }
        }
        other => other,
    })?;
    Ok(file.normalized()?)
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn solve(cfg: &Config, file: &Path, method: Method) -> Result<()> {
    let inst = load(file)?;
    let started = Instant::now();
    let (sol, mut timings) = if method == Method::Sdp && inst.matroid.is_none() {
        let r = solve_multi_report(&inst.instance, &cfg.rounding_params())?;
        (r.solution, r.timings)
    } else {
        (run_method(&inst, method, cfg, cfg.seed)?, Vec::new())
    };
    timings.push(("total".into(), started.elapsed().as_secs_f64()));
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "method": method,
        "seed": cfg.seed,
        "value": sol.value,
        "set": sol.set,
        "feasible": sol.feasible,
        "trace": sol.stage_trace,
        "timings": timings.into_iter().map(|(k, v)| (k, json!(v))).collect::<serde_json::Map<_, _>>(),
    }))
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = load_config(&cli.config)?;
    match cli.cmd {
        Cmd::Solve { flags, method } => {
            apply(&mut cfg, &flags);
            solve(&cfg, &flags.file, method)?;
        }
        Cmd::Oracle { flags } => {
            apply(&mut cfg, &flags);
            solve(&cfg, &flags.file, Method::Oracle)?;
        }
        Cmd::Kernelize { file, eps } => {
            let inst = load(&file)?;
            let k = kernelize_multi(&inst.instance, eps.unwrap_or(cfg.eps))?;
            print_json(&json!({ "schema_version": SCHEMA_VERSION, "kernel": k }))?;
        }
        Cmd::Gen { n, p, parts, budget, weights, seed, out } => {
            let budget_law = match budget.as_str() {
                "random" => BudgetLaw::Random,
                k => BudgetLaw::Fixed(k.parse().with_context(|| format!("budget `{k}`"))?),
            };
            let weight_law = match weights.split(':').collect::<Vec<_>>()[..] {
                ["unit"] => WeightLaw::Unit,
                ["uniform", lo, hi] => WeightLaw::Uniform { lo: lo.parse()?, hi: hi.parse()? },
                _ => bail!(Error::Parameter(format!("weights `{weights}`: expected unit or uniform:LO:HI"))),
            };
            let file = InstanceFile::new(gen_random(n, p, &weight_law, parts, &budget_law, seed)?);
            let text = match &out {
                Some(o) if o.extension().is_some_and(|e| e == "json") => serde_json::to_string_pretty(&file)? + "\n",
                _ => format_instance(&file),
            };
            emit(&text, &out)?;
        }
        Cmd::Gadget { file, size, extras, remove_one, seed, out, save_3dm } => {
            let tdm = match (file, size) {
                (Some(f), None) => {
                    let text = std::fs::read_to_string(&f).with_context(|| format!("reading {}", f.display()))?;
                    parse_3dm(&text)?
                }
                (None, Some(q)) => {
                    let planting = if remove_one { Planting::RemoveOne } else { Planting::Planted };
                    gen_3dm_with(q, extras, planting, seed)?.0
                }
                _ => bail!(Error::Parameter("give either a 3D matching file or --size".into())),
            };
            if let Some(p) = save_3dm {
                std::fs::write(&p, format_3dm(&tdm))?;
            }
            eprintln!("perfect matching: {}", has_perfect_matching(&tdm));
            emit(&format_instance(&InstanceFile::new(gadget_from_3dm(&tdm)?)), &out)?;
        }
        Cmd::InspectSdp { flags } => {
            apply(&mut cfg, &flags);
            let inst = load(&flags.file)?;
            let kernel = kernelize_multi(&inst.instance, cfg.eps)?;
            let reduced = kernel.reduced_instance()?;
            let program = build_program_for(&reduced, &kernel.forbidden, cfg.level, &cfg.program_limits())?;
            let sol = solve_with(&program, &cfg.rounding_params().solver)?;
            let bias = BiasProfile::from_moments_clamped(&sol.moments)?;
            let scores = block_independence_score(&sol.moments, &kernel.part_map)?;
            print_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "level": cfg.level,
                "objective": sol.objective,
                "iterations": sol.iterations,
                "primal_residual": sol.primal_residual,
                "dual_residual": sol.dual_residual,
                "min_eigenvalue": sol.min_eigenvalue,
                "vertex_bijection": kernel.vertex_bijection,
                "forbidden": kernel.forbidden,
                "biases": bias.b,
                "correlations": bias.rho,
                "block_scores": scores,
            }))?;
        }
        Cmd::Bench { corpus, methods, mut seeds, out, timings } => {
            if seeds.is_empty() {
                seeds.push(cfg.seed);
            }
            let instances = load_corpus(&corpus)?;
            let report = run_bench(&instances, &methods, &seeds, &cfg);
            let (csv, json) = report.write(&out)?;
            if timings {
                std::fs::write(out.with_extension("timings.csv"), report.timings_csv())?;
            }
            for (m, a) in &report.aggregates {
                let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
                println!("{m}: {} rows, {} ok, min ratio {}, mean ratio {}", a.rows, a.ok, fmt(a.min_ratio), fmt(a.mean_ratio));
            }
            println!("wrote {} and {}", csv.display(), json.display());
        }
        Cmd::Verify { mut suites, corpus } => {
            if suites.is_empty() {
                suites = Suite::ALL.to_vec();
            }
            let instances = match corpus {
                Some(dir) => load_corpus(&dir)?,
                None => Vec::new(),
            };
            let mut ok = true;
            for s in suites {
                let r = run_suite(s, &instances, &cfg)?;
                println!("{}", r.summary());
                ok &= r.passed();
            }
            if !ok {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
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
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map_or(1, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
