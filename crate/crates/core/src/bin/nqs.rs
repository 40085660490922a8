use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nqs::cli::{self, AnsatzHyper, BenchmarkConfig, RunConfig};
use nqs::config::SectorSpec;
use nqs::error::{Error, Result};
use nqs::vmc::{PretrainMode, SamplerKind};

#[derive(Parser)]
#[command(name = "nqs", version, about = "Transformer neural quantum states for molecular ground states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train on one FCIDUMP and stream JSON-lines results.
    Run {
        #[arg(long)]
        fcidump: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
        /// Write the trained parameters here.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Train on several geometries with shared settings and tabulate the errors.
    Sweep {
        /// Two or more FCIDUMP files; bond length is read from a `_<R>` stem suffix.
        #[arg(long, num_args = 1.., required = true)]
        fcidump: Vec<PathBuf>,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Time BAS and MCMC over a grid of sample counts.
    SampleBenchmark {
        #[arg(long)]
        fcidump: PathBuf,
        /// Benchmark this trained model instead of a fresh one.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Comma-separated sample counts.
        #[arg(long, default_value = "10000,100000,1000000", value_delimiter = ',')]
        grid: Vec<f64>,
        #[arg(long, default_value = "bas,mcmc", value_delimiter = ',')]
        methods: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// JSON-lines output; `-` for stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute oracle energies for every FCIDUMP in a directory.
    MakeFixtures {
        #[arg(long, default_value = "fixtures")]
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value_t = AnsatzHyper::default().n_layers)]
    layers: usize,
    #[arg(long, default_value_t = AnsatzHyper::default().d_model)]
    dmodel: usize,
    #[arg(long, default_value_t = AnsatzHyper::default().n_heads)]
    heads: usize,
    #[arg(long, default_value_t = AnsatzHyper::default().d_ff)]
    dff: usize,
    /// Comma-separated phase-network hidden widths.
    #[arg(long, value_delimiter = ',', default_values_t = AnsatzHyper::default().phase_hidden)]
    phase_hidden: Vec<usize>,
}

impl ModelArgs {
    fn hyper(&self) -> AnsatzHyper {
        AnsatzHyper {
            n_layers: self.layers,
            d_model: self.dmodel,
            n_heads: self.heads,
            d_ff: self.dff,
            phase_hidden: self.phase_hidden.clone(),
        }
    }
}

#[derive(Args, Clone)]
struct TrainArgs {
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    samples: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    lr_final: Option<f64>,
    #[arg(long)]
    phase_lr_scale: Option<f64>,
    /// bas or mcmc.
    #[arg(long, default_value = "bas")]
    sampler: String,
    /// none, cisd or fci.
    #[arg(long, default_value = "none")]
    pretrain: String,
    #[arg(long)]
    pretrain_epochs: Option<usize>,
    /// Electron counts `n_alpha,n_beta`, overriding the FCIDUMP header.
    #[arg(long)]
    sector: Option<String>,
    #[arg(long)]
    eval_every: Option<usize>,
    /// Stop once the exact energy is this close to FCI.
    #[arg(long)]
    stop_tol: Option<f64>,
    /// Consecutive exact evaluations that must satisfy a tolerance.
    #[arg(long)]
    target_window: Option<usize>,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// JSON-lines output; `-` for stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn count(v: f64, what: &str) -> Result<u64> {
    if v.is_finite() && v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(Error::Argument(format!("{what} must be a positive integer, got {v}")))
    }
}

fn parse_sector(s: &str) -> Result<SectorSpec> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::Argument(format!("--sector expects n_alpha,n_beta, got {s:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let a = parts[0].parse().map_err(|_| bad())?;
    let b = parts[1].parse().map_err(|_| bad())?;
    Ok(SectorSpec::new(a, b))
}

impl TrainArgs {
    fn config(&self, fcidump: PathBuf) -> Result<RunConfig> {
        let mut c = RunConfig::new(fcidump);
        if let Some(v) = self.iters {
            c.iters = v;
        }
        if let Some(v) = self.samples {
            c.n_samples = count(v, "--samples")?;
        }
        if let Some(v) = self.lr {
            c.lr = v;
            c.lr_final = v / 10.0;
        }
        if let Some(v) = self.lr_final {
            c.lr_final = v;
        }
        if let Some(v) = self.phase_lr_scale {
            c.phase_lr_scale = v;
        }
        if let Some(v) = self.pretrain_epochs {
            c.pretrain_epochs = v;
        }
        if let Some(v) = self.eval_every {
            c.eval_every = v;
        }
        c.seed = self.seed;
        c.ansatz = self.model.hyper();
        c.sampler = match self.sampler.as_str() {
            "bas" => SamplerKind::Bas,
            "mcmc" => SamplerKind::Mcmc,
            s => return Err(Error::Argument(format!("--sampler must be bas or mcmc, got {s:?}"))),
        };
        c.pretrain = self.pretrain.parse::<PretrainMode>()?;
        c.sector = self.sector.as_deref().map(parse_sector).transpose()?;
        c.stop_tol = self.stop_tol;
        if let Some(v) = self.target_window {
            c.target_window = v;
        }
        c.workers = self.workers;
        c.out = self.out.clone();
        Ok(c)
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { fcidump, train, checkpoint } => {
            let mut cfg = train.config(fcidump)?;
            cfg.checkpoint = checkpoint;
            let s = cli::cmd_run(&cfg)?;
            if cfg.out.as_deref() != Some(std::path::Path::new("-")) {
                println!("{}", serde_json::to_string_pretty(&s)?);
            }
        }
        Command::Sweep { fcidump, train } => {
            let cfg = train.config(fcidump.first().cloned().unwrap_or_default())?;
            let rows = cli::cmd_sweep(&cfg, &fcidump)?;
            if cfg.out.as_deref() != Some(std::path::Path::new("-")) {
                print!("{}", cli::sweep_table(&rows));
            }
        }
        Command::SampleBenchmark {
            fcidump,
            checkpoint,
            grid,
            methods,
            burn_in,
            seed,
            model,
            workers,
            out,
        } => {
            let cfg = BenchmarkConfig {
                fcidump,
                checkpoint,
                grid: grid.iter().map(|&g| count(g, "--grid")).collect::<Result<_>>()?,
                seed,
                ansatz: model.hyper(),
                burn_in,
                methods,
                out,
                workers,
            };
            let rows = cli::cmd_sample_benchmark(&cfg)?;
            if cfg.out.as_deref() != Some(std::path::Path::new("-")) {
                println!("{:<6} {:>10} {:>12} {:>8} {:>10} {:>10}", "method", "N_s", "wall_ms", "N_u", "TV", "accept");
                for r in rows {
                    println!(
                        "{:<6} {:>10} {:>12.2} {:>8} {:>10} {:>10}",
                        r.method,
                        r.n_samples,
                        r.wall_ms,
                        r.n_unique,
                        r.tv_distance.map_or("-".into(), |t| format!("{t:.4}")),
                        r.acceptance.map_or("-".into(), |a| format!("{a:.4}"))
                    );
                }
            }
        }
        Command::MakeFixtures { dir, out } => {
            let out = out.unwrap_or_else(|| dir.join("manifest.json"));
            let m = cli::cmd_make_fixtures(&dir, &out)?;
            for e in &m.entries {
                println!("{:<12} N_o={:<3} N_f={:<6} N_h={:<5} E_FCI={:.10}", e.name, e.n_orbitals, e.dimension, e.n_pauli_terms, e.e_fci);
            }
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let r = dispatch(cli.command);
    if let Err(e) = &r {
        eprintln!("error ({}): {e}", e.kind());
    }
    ExitCode::from(cli::exit_code(&r) as u8)
}
