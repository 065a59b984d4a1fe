//! `ttlab` — sample percolated uniform temporal trees, compute their
//! statistics, evaluate the matching closed forms, run the branching random
//! walk, and drive reproducible Monte Carlo experiments.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error. Diagnostics go to
//! stderr; data goes to stdout or `--out`.

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use ttlab_core::analytic;
use ttlab_core::brw::{self, EpsSign};
use ttlab_core::harness::{self, ExperimentConfig};
use ttlab_core::rng::SeedSpec;
use ttlab_core::sampler;
use ttlab_core::stats;
use ttlab_core::tree::{SampleBudget, TemporalTree, TreeDocument, TreeParams};

#[derive(Parser)]
#[command(
    name = "ttlab",
    version,
    about = "Percolated uniform temporal tree laboratory",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SeedArgs {
    /// Master seed; identical seeds give bit-identical runs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stream id; distinct streams under one seed are independent.
    #[arg(long, default_value_t = 0)]
    stream: u64,
}

impl SeedArgs {
    fn spec(&self) -> SeedSpec {
        SeedSpec::new(self.seed, self.stream)
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SamplerKind {
    Recursive,
    Spacings,
    Rejection,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SignArg {
    None,
    Plus,
    Minus,
}

impl From<SignArg> for EpsSign {
    fn from(value: SignArg) -> Self {
        match value {
            SignArg::None => EpsSign::None,
            SignArg::Plus => EpsSign::Plus,
            SignArg::Minus => EpsSign::Minus,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample one tree and write it as JSON.
    Sample {
        /// Branching factor of the underlying n-ary tree.
        #[arg(long)]
        n: u32,
        /// Percolation level in [0, 1]; also the root label.
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        seed: SeedArgs,
        /// Which construction to use.
        #[arg(long, value_enum, default_value_t = SamplerKind::Recursive)]
        sampler: SamplerKind,
        /// Keep only each vertex's K highest-labelled children.
        #[arg(long)]
        trim: Option<u32>,
        /// Abort threshold on total nodes.
        #[arg(long, default_value_t = 1 << 27)]
        node_cap: u64,
        /// Depth cap (required by the rejection sampler).
        #[arg(long)]
        depth_cap: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a statistic of a tree document.
    Stats {
        tree: PathBuf,
        /// Which statistic to compute.
        #[arg(long)]
        metric: Metric,
        /// Number of ranked root masses (rootmass only).
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[command(flatten)]
        seed: SeedArgs,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a closed form or truncated series.
    Theory {
        #[command(subcommand)]
        quantity: TheoryQuantity,
    },
    /// Branching random walk runs.
    Brw {
        #[command(subcommand)]
        command: BrwCommand,
    },
    /// Run a named Monte Carlo experiment and emit its JSON result.
    Experiment {
        /// One of the named experiments (see --help for the list).
        name: String,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        replicas: u64,
        #[command(flatten)]
        seed: SeedArgs,
        /// Worker threads; affects scheduling only, never the result.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Ranked root masses (root_mass).
        #[arg(long)]
        m: Option<u32>,
        /// Mixture size / degree index (cramer_check).
        #[arg(long)]
        k: Option<u32>,
        /// Lower-tail threshold x (cramer_check).
        #[arg(long)]
        x: Option<f64>,
        /// BRW generation (brw_martingale single level).
        #[arg(long)]
        l: Option<u32>,
        /// ε for band widths and BRW perturbations.
        #[arg(long)]
        eps: Option<f64>,
        /// Series truncation N (remark_identity).
        #[arg(long)]
        truncation: Option<u32>,
        /// Grid of n values, comma separated (height_scaling, cramer_check).
        #[arg(long, value_delimiter = ',')]
        n_grid: Option<Vec<u32>>,
        /// Grid of trim values K, comma separated (trimmed_height).
        #[arg(long, value_delimiter = ',')]
        k_grid: Option<Vec<u32>>,
        /// Grid of BRW generations L, comma separated (brw_martingale).
        #[arg(long, value_delimiter = ',')]
        l_grid: Option<Vec<u32>>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dump raw sample vectors as single-column CSV files with this
        /// path prefix.
        #[arg(long)]
        dump_samples: Option<PathBuf>,
    },
    /// Check every invariant of a tree document; exit 0 iff all hold.
    Validate { tree: PathBuf },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Metric {
    Size,
    Height,
    Profile,
    Degrees,
    Rootmass,
}

#[derive(Subcommand)]
enum TheoryQuantity {
    /// e^{np}.
    ExpectedSize {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
    },
    /// (np)^k / k!.
    GenerationSize {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        k: u64,
    },
    /// P(|T| = m) at n = 1, p = 1.
    SizePmfN1 {
        #[arg(long)]
        m: u64,
    },
    /// Truncated upper bound on E|T|² with a rigorous tail bound.
    SecondMoment {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 200)]
        l_max: u64,
    },
    /// Truncated out-degree series E L_{n,≥k} at p = 1.
    OutdegreeSeries {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l_max: Option<u64>,
    },
    /// 2^{-(k+1)}.
    DegreeLimit {
        #[arg(long)]
        k: u32,
    },
    /// Gamma-mixture MGF at λ.
    Mgf {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        lambda: f64,
    },
    /// Rate function I(x) with maximizer, φ(k) and the upper bound.
    RateFunction {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        x: f64,
    },
    /// Exponential(1) CDF.
    ExpCdf {
        #[arg(long)]
        x: f64,
    },
}

#[derive(Subcommand)]
enum BrwCommand {
    /// Sample one generation and emit its values.
    Generation {
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = SignArg::None)]
        sign: SignArg,
        #[command(flatten)]
        seed: SeedArgs,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-replica martingale statistics X_L as single-column CSV, plus a
    /// JSON moment summary on stderr (or stdout when data goes to a file).
    Statistic {
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = SignArg::None)]
        sign: SignArg,
        #[arg(long, default_value_t = 1000)]
        replicas: u64,
        #[command(flatten)]
        seed: SeedArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moments of the martingale limit from the exact recursion.
    Moments {
        #[arg(long, default_value_t = 12)]
        k_max: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: &Option<PathBuf>, data: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, data).with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(data.as_bytes())?;
            if !data.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn echo_config(pieces: &serde_json::Value) {
    eprintln!("config: {pieces}");
}

fn load_tree(path: &PathBuf) -> Result<(TreeDocument, TemporalTree)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = TreeDocument::from_json(&text).context("parsing tree document")?;
    let tree = TemporalTree::from_document(&doc)?;
    Ok((doc, tree))
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sample {
            n,
            p,
            seed,
            sampler,
            trim,
            node_cap,
            depth_cap,
            out,
        } => {
            let params = TreeParams::new(n, p);
            let budget = SampleBudget {
                node_cap,
                depth_cap,
            };
            echo_config(&serde_json::json!({
                "command": "sample", "n": n, "p": p,
                "seed": seed.seed, "stream": seed.stream,
                "sampler": match sampler {
                    SamplerKind::Recursive => "recursive",
                    SamplerKind::Spacings => "spacings",
                    SamplerKind::Rejection => "rejection",
                },
                "trim": trim, "node_cap": node_cap, "depth_cap": depth_cap,
            }));
            let tree = match (sampler, trim) {
                (SamplerKind::Recursive, None) => {
                    sampler::sample_tree_recursive(params, seed.spec(), budget)?
                }
                (SamplerKind::Recursive, Some(k)) => {
                    sampler::sample_trimmed_tree(params, k, seed.spec(), budget)?
                }
                (SamplerKind::Spacings, None) => {
                    sampler::sample_tree_spacings(params, seed.spec(), budget)?
                }
                (SamplerKind::Spacings, Some(_)) => {
                    bail!("--trim is only supported with the recursive sampler")
                }
                (SamplerKind::Rejection, None) => {
                    let sample = sampler::sample_tree_rejection(params, seed.spec(), budget)?;
                    eprintln!("truncation_bound: {:e}", sample.truncation_bound);
                    sample.tree
                }
                (SamplerKind::Rejection, Some(_)) => {
                    bail!("--trim is only supported with the recursive sampler")
                }
            };
            emit(&out, &tree.to_document().to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats {
            tree,
            metric,
            m,
            seed,
            format,
            out,
        } => {
            let (_, arena) = load_tree(&tree)?;
            let metric_name = match metric {
                Metric::Size => "size",
                Metric::Height => "height",
                Metric::Profile => "profile",
                Metric::Degrees => "degrees",
                Metric::Rootmass => "rootmass",
            };
            echo_config(&serde_json::json!({
                "command": "stats", "tree": tree.display().to_string(),
                "metric": metric_name, "m": m,
                "seed": seed.seed, "stream": seed.stream,
            }));
            let rendered = match metric {
                Metric::Size => {
                    serde_json::json!({"metric": "size", "value": stats::size(&arena)}).to_string()
                }
                Metric::Height => {
                    serde_json::json!({"metric": "height", "value": stats::height(&arena)})
                        .to_string()
                }
                Metric::Profile => {
                    let profile = stats::generation_profile(&arena);
                    match format {
                        OutputFormat::Csv => profile.to_csv(),
                        OutputFormat::Json => {
                            serde_json::json!({"metric": "profile", "counts": profile.counts})
                                .to_string()
                        }
                    }
                }
                Metric::Degrees => {
                    let degrees = stats::outdegree_histogram(&arena);
                    match format {
                        OutputFormat::Csv => degrees.to_csv(),
                        OutputFormat::Json => {
                            serde_json::json!({"metric": "degrees", "counts": degrees.counts})
                                .to_string()
                        }
                    }
                }
                Metric::Rootmass => {
                    let masses = stats::root_subtree_masses(&arena, m.max(1) as usize);
                    serde_json::json!({"metric": "rootmass", "m": m, "masses": masses.masses})
                        .to_string()
                }
            };
            emit(&out, &rendered)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Theory { quantity } => {
            let payload = theory(quantity)?;
            emit(&None, &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Brw { command } => run_brw(command),
        Command::Experiment {
            name,
            n,
            p,
            replicas,
            seed,
            workers,
            m,
            k,
            x,
            l,
            eps,
            truncation,
            n_grid,
            k_grid,
            l_grid,
            out,
            dump_samples,
        } => {
            let mut config = ExperimentConfig::new(&name, replicas, seed.spec());
            config.workers = workers.max(1);
            let effective_n = n.or_else(|| n_grid.as_ref().and_then(|g| g.iter().max().copied()));
            if let (Some(n), Some(p)) = (effective_n, p) {
                config.params = Some(TreeParams::new(n, p));
            }
            config.extra.m = m;
            config.extra.k = k;
            config.extra.x = x;
            config.extra.level = l;
            config.extra.eps = eps;
            config.extra.truncation = truncation;
            config.extra.n_grid = n_grid;
            config.extra.k_grid = k_grid;
            config.extra.l_grid = l_grid;
            echo_config(&serde_json::to_value(&config)?);
            let result = harness::run(&config)?;
            if let Some(prefix) = dump_samples {
                for (key, values) in &result.samples {
                    let mut csv = String::from("value\n");
                    for v in values {
                        csv.push_str(&format!("{v}\n"));
                    }
                    let path = PathBuf::from(format!("{}_{key}.csv", prefix.display()));
                    std::fs::write(&path, csv)
                        .with_context(|| format!("writing {}", path.display()))?;
                }
            }
            emit(&out, &result.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { tree } => {
            let text = std::fs::read_to_string(&tree)
                .with_context(|| format!("reading {}", tree.display()))?;
            let doc = TreeDocument::from_json(&text).context("parsing tree document")?;
            match doc.validate() {
                Ok(()) => {
                    eprintln!("ok: {} nodes, all invariants hold", doc.nodes.len());
                    Ok(ExitCode::SUCCESS)
                }
                Err(violation) => {
                    eprintln!("violation: {}", violation.0);
                    Ok(ExitCode::from(2))
                }
            }
        }
    }
}

fn quantity_json(name: &str, value: f64, tail: Option<f64>) -> String {
    serde_json::json!({
        "quantity": name,
        "value": value,
        "tail_bound": tail,
    })
    .to_string()
}

fn theory(quantity: TheoryQuantity) -> Result<String> {
    Ok(match quantity {
        TheoryQuantity::ExpectedSize { n, p } => {
            TreeParams::new(n, p).validate()?;
            quantity_json("expected_size", analytic::expected_size(n, p), None)
        }
        TheoryQuantity::GenerationSize { n, p, k } => {
            TreeParams::new(n, p).validate()?;
            quantity_json(
                "expected_generation_size",
                analytic::expected_generation_size(n, p, k),
                None,
            )
        }
        TheoryQuantity::SizePmfN1 { m } => {
            if m < 1 {
                bail!("m must be at least 1");
            }
            quantity_json("size_pmf_n1", analytic::size_pmf_n1(m), None)
        }
        TheoryQuantity::SecondMoment { n, p, l_max } => {
            TreeParams::new(n, p).validate()?;
            let series = analytic::second_moment_upper_series(n, p, l_max)?;
            quantity_json(
                "second_moment_upper_series",
                series.value,
                Some(series.tail_bound),
            )
        }
        TheoryQuantity::OutdegreeSeries { n, k, l_max } => {
            let l_max = l_max.unwrap_or(4 * n as u64 + 200);
            let series = analytic::expected_outdegree_ge_series(n, k, l_max)?;
            quantity_json(
                "expected_outdegree_ge_series",
                series.value,
                Some(series.tail_bound),
            )
        }
        TheoryQuantity::DegreeLimit { k } => {
            quantity_json("degree_limit", analytic::degree_limit(k), None)
        }
        TheoryQuantity::Mgf { k, lambda } => {
            quantity_json("mixture_mgf", analytic::mixture_mgf(k, lambda)?, None)
        }
        TheoryQuantity::RateFunction { k, x } => {
            let rate = analytic::rate_function(k, x)?;
            serde_json::json!({
                "quantity": "rate_function",
                "value": rate.value,
                "tail_bound": serde_json::Value::Null,
                "maximizer": rate.maximizer,
                "upper_bound": rate.upper_bound,
                "phi_k": rate.phi_k,
            })
            .to_string()
        }
        TheoryQuantity::ExpCdf { x } => quantity_json("exp_cdf", analytic::exp_cdf(x), None),
    })
}

fn run_brw(command: BrwCommand) -> Result<ExitCode> {
    match command {
        BrwCommand::Generation {
            l,
            eps,
            sign,
            seed,
            format,
            out,
        } => {
            if eps < 0.0 || (sign == SignArg::Minus && eps >= 1.0) {
                bail!("eps must be nonnegative, and below 1 for sign=minus");
            }
            echo_config(&serde_json::json!({
                "command": "brw generation", "l": l, "eps": eps,
                "seed": seed.seed, "stream": seed.stream,
            }));
            let generation = brw::sample_generation(l, eps, sign.into(), seed.spec())?;
            let rendered = match format {
                OutputFormat::Csv => {
                    let mut csv = String::from("value\n");
                    for v in &generation.values {
                        csv.push_str(&format!("{v}\n"));
                    }
                    csv
                }
                OutputFormat::Json => serde_json::json!({
                    "level": generation.level,
                    "eps": generation.eps,
                    "values": generation.values,
                })
                .to_string(),
            };
            emit(&out, &rendered)?;
            Ok(ExitCode::SUCCESS)
        }
        BrwCommand::Statistic {
            l,
            eps,
            sign,
            replicas,
            seed,
            out,
        } => {
            if eps < 0.0 || (sign == SignArg::Minus && eps >= 1.0) {
                bail!("eps must be nonnegative, and below 1 for sign=minus");
            }
            if replicas < 1 {
                bail!("replicas must be at least 1");
            }
            echo_config(&serde_json::json!({
                "command": "brw statistic", "l": l, "eps": eps, "replicas": replicas,
                "seed": seed.seed, "stream": seed.stream,
            }));
            let eps_sign: EpsSign = sign.into();
            let values: Vec<f64> = (0..replicas)
                .map(|r| {
                    brw::sample_generation(l, eps, eps_sign, seed.spec().replica(r))
                        .map(|g| brw::martingale_statistic(&g))
                })
                .collect::<Result<_, _>>()?;
            let mut csv = String::from("x_l\n");
            for v in &values {
                csv.push_str(&format!("{v}\n"));
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let second = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
            let summary = serde_json::json!({
                "level": l, "eps": eps, "replicas": replicas,
                "mean": mean, "second_moment": second,
            })
            .to_string();
            if out.is_some() {
                emit(&out, &csv)?;
                emit(&None, &summary)?;
            } else {
                emit(&None, &csv)?;
                eprintln!("{summary}");
            }
            Ok(ExitCode::SUCCESS)
        }
        BrwCommand::Moments { k_max } => {
            if k_max > 20 {
                bail!("k_max must be at most 20");
            }
            let moments = brw::moment_sequence(k_max);
            emit(&None, &serde_json::json!({ "a": moments.a }).to_string())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
