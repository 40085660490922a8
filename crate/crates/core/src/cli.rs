//! Command implementations behind the `nqs` binary, with JSON-lines output.
//!
//! Every results stream starts with a header record that echoes the full
//! configuration; the fields listed in `nondeterministic` are wall-clock
//! measurements and excluded from reproducibility guarantees.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::ansatz::{Ansatz, AnsatzConfig, Checkpoint, RngState};
use crate::error::{Error, Result};
use crate::oracle::{fixtures, slater_condon, CiOptions, PretrainOptions, DEFAULT_ITERATIVE_CAP};
use crate::sampler::{sample_bas, sample_mcmc, McmcOptions, SampleBatch};
use crate::vmc::{exact_weights, run_vmc, AdamConfig, NeuralState, PretrainMode, Problem, SamplerKind, TrainConfig};
use crate::config::SectorSpec;

pub const SCHEMA: &str = "nqs-results";
pub const SCHEMA_VERSION: u32 = 1;
const NONDETERMINISTIC: [&str; 3] = ["wall_ms", "wall_s", "timings"];

/// Everything one `run` needs.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub fcidump: PathBuf,
    pub sector: Option<SectorSpec>,
    pub ansatz: AnsatzHyper,
    pub n_samples: u64,
    pub iters: usize,
    pub lr: f64,
    pub lr_final: f64,
    pub phase_lr_scale: f64,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub pretrain: PretrainMode,
    pub pretrain_epochs: usize,
    pub eval_every: usize,
    pub stop_tol: Option<f64>,
    /// Consecutive exact evaluations required inside a tolerance.
    pub target_window: usize,
    pub out: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    /// Rayon worker threads; 0 uses the global default.
    pub workers: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnsatzHyper {
    pub n_layers: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub d_ff: usize,
    pub phase_hidden: Vec<usize>,
}

impl Default for AnsatzHyper {
    fn default() -> Self {
        let d = AnsatzConfig::new(1);
        Self {
            n_layers: d.n_layers,
            d_model: d.d_model,
            n_heads: d.n_heads,
            d_ff: d.d_ff,
            phase_hidden: d.phase_hidden,
        }
    }
}

impl AnsatzHyper {
    pub fn config(&self, n_orbitals: usize, seed: u64) -> AnsatzConfig {
        AnsatzConfig {
            n_orbitals,
            n_layers: self.n_layers,
            d_model: self.d_model,
            n_heads: self.n_heads,
            d_ff: self.d_ff,
            phase_hidden: self.phase_hidden.clone(),
            seed,
        }
    }
}

impl RunConfig {
    pub fn new(fcidump: impl Into<PathBuf>) -> Self {
        let t = TrainConfig::default();
        Self {
            fcidump: fcidump.into(),
            sector: None,
            ansatz: AnsatzHyper::default(),
            n_samples: t.n_samples,
            iters: t.max_iters,
            lr: t.adam.lr,
            lr_final: t.adam.lr_final,
            phase_lr_scale: t.adam.phase_lr_scale,
            seed: 0,
            sampler: SamplerKind::Bas,
            pretrain: PretrainMode::None,
            pretrain_epochs: PretrainOptions::default().epochs,
            eval_every: t.eval_every,
            stop_tol: None,
            target_window: t.target_window,
            out: None,
            checkpoint: None,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.fcidump.exists() {
            return Err(Error::InputNotFound(self.fcidump.display().to_string()));
        }
        if self.n_samples == 0 || self.iters == 0 {
            return Err(Error::Argument("--samples and --iters must be positive".into()));
        }
        if !(self.lr > 0.0 && self.lr_final > 0.0 && self.phase_lr_scale > 0.0) {
            return Err(Error::Argument("learning rates must be positive".into()));
        }
        Ok(())
    }

    fn train_config(&self, reference: Option<f64>) -> TrainConfig {
        TrainConfig {
            n_samples: self.n_samples,
            max_iters: self.iters,
            adam: AdamConfig {
                lr: self.lr,
                lr_final: self.lr_final,
                decay_steps: self.iters as u64,
                phase_lr_scale: self.phase_lr_scale,
                ..AdamConfig::default()
            },
            seed: self.seed,
            sampler: self.sampler,
            eval_every: self.eval_every,
            reference_energy: reference,
            stop_tol: self.stop_tol,
            target_window: self.target_window,
            pretrain: self.pretrain,
            pretrain_options: PretrainOptions {
                epochs: self.pretrain_epochs,
                ..PretrainOptions::default()
            },
            ..TrainConfig::default()
        }
    }
}

/// Process exit status for a command outcome: 0 success, 1 input error, 2 runtime error.
pub fn exit_code(r: &Result<()>) -> i32 {
    match r {
        Ok(()) => 0,
        Err(e) => match e {
            Error::Format { .. } | Error::Argument(_) | Error::InputNotFound(_) | Error::Domain(_) | Error::Json(_) => 1,
            _ => 2,
        },
    }
}

/// JSON-lines sink: a file, stdout, or nothing.
pub struct Records {
    out: Option<Box<dyn Write + Send>>,
}

impl Records {
    pub fn open(path: Option<&Path>) -> Result<Self> {
        let out: Option<Box<dyn Write + Send>> = match path {
            Some(p) if p == Path::new("-") => Some(Box::new(std::io::stdout())),
            Some(p) => Some(Box::new(BufWriter::new(File::create(p)?))),
            None => None,
        };
        Ok(Self { out })
    }

    pub fn sink() -> Self {
        Self { out: None }
    }

    pub fn emit(&mut self, v: &Value) -> Result<()> {
        if let Some(w) = &mut self.out {
            serde_json::to_writer(&mut *w, v)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn header(&mut self, command: &str, config: impl Serialize) -> Result<()> {
        self.emit(&json!({
            "record": "header",
            "schema": SCHEMA,
            "version": SCHEMA_VERSION,
            "command": command,
            "crate_version": env!("CARGO_PKG_VERSION"),
            "nondeterministic": NONDETERMINISTIC,
            "config": config,
        }))
    }

    pub fn error(&mut self, e: &Error) -> Result<()> {
        self.emit(&json!({"record": "error", "kind": e.kind(), "message": e.to_string()}))?;
        self.emit(&json!({"record": "summary", "status": "error", "error_kind": e.kind()}))
    }

    pub fn flush(&mut self) -> Result<()> {
        if let Some(w) = &mut self.out {
            w.flush()?;
        }
        Ok(())
    }
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    pool.install(f)
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub status: &'static str,
    pub final_energy: f64,
    pub final_is_exact: bool,
    pub e_fci: Option<f64>,
    pub abs_error: Option<f64>,
    pub e_reference: f64,
    /// `(E_ref − E) / (E_ref − E_FCI)`.
    pub correlation_fraction: Option<f64>,
    pub iterations: usize,
    pub iterations_to_target: Option<usize>,
    pub stop_reason: crate::vmc::StopReason,
    pub pretrain_fidelity: Option<f64>,
    pub wall_s: f64,
}

/// Solve one problem; records go to `rec`.
fn run_inner(cfg: &RunConfig, rec: &mut Records) -> Result<RunSummary> {
    cfg.validate()?;
    let t0 = Instant::now();
    let problem = Problem::load(&cfg.fcidump, cfg.sector)?;
    let n = problem.n_orbitals();
    if cfg.pretrain == PretrainMode::Fci && problem.dimension() > DEFAULT_ITERATIVE_CAP as u128 {
        return Err(Error::Argument(format!(
            "pretrain=fci needs sector dimension ≤ {DEFAULT_ITERATIVE_CAP}, got {}",
            problem.dimension()
        )));
    }
    let e_fci = if problem.dimension() <= DEFAULT_ITERATIVE_CAP as u128 {
        Some(problem.fci()?.energy)
    } else {
        None
    };
    let reference = problem.sector.reference(n);
    let e_reference = slater_condon(reference, reference, &problem.integrals);
    let acfg = cfg.ansatz.config(n, cfg.seed);
    let tcfg = cfg.train_config(e_fci);
    let mut io_err = None;
    let res = run_vmc(&problem, &acfg, &tcfg, &mut |r| {
        let mut v = serde_json::to_value(r).expect("record serializes");
        v["record"] = json!("iteration");
        if let Err(e) = rec.emit(&v) {
            io_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = io_err {
        return Err(e);
    }
    if let Some(p) = &cfg.checkpoint {
        Checkpoint::from_ansatz(&res.ansatz, Some(RngState { seed: cfg.seed, word_pos: 0 })).save(p)?;
    }
    let abs_error = e_fci.map(|f| (res.final_energy - f).abs());
    let correlation_fraction = e_fci.and_then(|f| {
        let denom = e_reference - f;
        (denom.abs() > 1e-12).then(|| (e_reference - res.final_energy) / denom)
    });
    Ok(RunSummary {
        status: "ok",
        final_energy: res.final_energy,
        final_is_exact: res.final_is_exact,
        e_fci,
        abs_error,
        e_reference,
        correlation_fraction,
        iterations: res.trace.len(),
        iterations_to_target: res.iterations_to_target,
        stop_reason: res.stop_reason,
        pretrain_fidelity: res.pretrain.map(|p| p.final_fidelity),
        wall_s: t0.elapsed().as_secs_f64(),
    })
}

/// `cmd_run`: train on one FCIDUMP, streaming iteration records and a summary.
/// Failures are recorded in the stream before being returned.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary> {
    let mut rec = Records::open(cfg.out.as_deref())?;
    rec.header("run", cfg)?;
    let r = with_workers(cfg.workers, || run_inner(cfg, &mut rec));
    match &r {
        Ok(s) => {
            let mut v = serde_json::to_value(s)?;
            v["record"] = json!("summary");
            rec.emit(&v)?;
        }
        Err(e) => rec.error(e)?,
    }
    rec.flush()?;
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub label: String,
    pub bond_length: Option<f64>,
    pub e_vmc: Option<f64>,
    pub e_fci: Option<f64>,
    pub delta: Option<f64>,
    pub status: String,
}

/// Bond length encoded as the last `_`-separated field of the file stem, e.g. `h2_0.7414`.
pub fn bond_length_from_path(p: &Path) -> Option<f64> {
    p.file_stem()?.to_str()?.rsplit('_').next()?.parse().ok()
}

/// `cmd_sweep`: one run per geometry with shared hyperparameters.
/// A failing point becomes a flagged row and the sweep continues.
pub fn cmd_sweep(base: &RunConfig, fcidumps: &[PathBuf]) -> Result<Vec<SweepRow>> {
    if fcidumps.len() < 2 {
        return Err(Error::Argument(format!("a sweep needs at least 2 geometries, got {}", fcidumps.len())));
    }
    let mut rec = Records::open(base.out.as_deref())?;
    rec.header("sweep", json!({"base": base, "points": fcidumps}))?;
    let mut rows = Vec::new();
    for path in fcidumps {
        let mut cfg = base.clone();
        cfg.fcidump = path.clone();
        cfg.out = None;
        cfg.checkpoint = None;
        let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("?").to_string();
        let r = with_workers(cfg.workers, || run_inner(&cfg, &mut Records::sink()));
        let row = match r {
            Ok(s) => SweepRow {
                label,
                bond_length: bond_length_from_path(path),
                e_vmc: Some(s.final_energy),
                e_fci: s.e_fci,
                delta: s.e_fci.map(|f| s.final_energy - f),
                status: "ok".into(),
            },
            Err(e) => {
                log::warn!("sweep point {} failed: {e}", path.display());
                SweepRow {
                    label,
                    bond_length: bond_length_from_path(path),
                    e_vmc: None,
                    e_fci: None,
                    delta: None,
                    status: format!("error: {}", e.kind()),
                }
            }
        };
        let mut v = serde_json::to_value(&row)?;
        v["record"] = json!("point");
        rec.emit(&v)?;
        rows.push(row);
    }
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    rec.emit(&json!({"record": "summary", "status": if failed == 0 { "ok" } else { "partial" }, "points": rows.len(), "failed": failed}))?;
    rec.flush()?;
    Ok(rows)
}

/// Fixed-width text rendering of a sweep.
pub fn sweep_table(rows: &[SweepRow]) -> String {
    let f = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |x| format!("{x:.p$}"));
    let mut s = format!("{:<14} {:>8} {:>14} {:>14} {:>10}  status\n", "label", "R", "E_vmc", "E_FCI", "ΔE");
    for r in rows {
        s += &format!(
            "{:<14} {:>8} {:>14} {:>14} {:>10}  {}\n",
            r.label,
            f(r.bond_length, 4),
            f(r.e_vmc, 8),
            f(r.e_fci, 8),
            r.delta.map_or("-".into(), |d| format!("{d:.2e}")),
            r.status
        );
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkRow {
    pub method: &'static str,
    pub n_samples: u64,
    pub wall_ms: f64,
    pub n_unique: usize,
    /// Total-variation distance to the exact `|Ψ|²`, when the sector is enumerable.
    pub tv_distance: Option<f64>,
    pub acceptance: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkConfig {
    pub fcidump: PathBuf,
    pub checkpoint: Option<PathBuf>,
    pub grid: Vec<u64>,
    pub seed: u64,
    pub ansatz: AnsatzHyper,
    pub burn_in: usize,
    pub methods: Vec<String>,
    pub out: Option<PathBuf>,
    pub workers: usize,
}

fn tv_distance(batch: &SampleBatch, exact: &[(u64, f64)]) -> f64 {
    let n = batch.total() as f64;
    let mut d = 0.0;
    for &(b, p) in exact {
        let c = batch
            .entries()
            .binary_search_by_key(&b, |e| e.0.bits())
            .map_or(0, |i| batch.entries()[i].1);
        d += (c as f64 / n - p).abs();
    }
    0.5 * d
}

/// `cmd_sample_benchmark`: wall time, `N_u`, distance to exact and MCMC acceptance per `N_s`.
pub fn cmd_sample_benchmark(cfg: &BenchmarkConfig) -> Result<Vec<BenchmarkRow>> {
    let mut rec = Records::open(cfg.out.as_deref())?;
    rec.header("sample-benchmark", cfg)?;
    let r = with_workers(cfg.workers, || benchmark_inner(cfg, &mut rec));
    match &r {
        Ok(rows) => rec.emit(&json!({"record": "summary", "status": "ok", "rows": rows.len()}))?,
        Err(e) => rec.error(e)?,
    }
    rec.flush()?;
    r
}

fn benchmark_inner(cfg: &BenchmarkConfig, rec: &mut Records) -> Result<Vec<BenchmarkRow>> {
    if !cfg.fcidump.exists() {
        return Err(Error::InputNotFound(cfg.fcidump.display().to_string()));
    }
    if cfg.grid.is_empty() || cfg.grid.contains(&0) {
        return Err(Error::Argument("sample grid must be nonempty and positive".into()));
    }
    let problem = Problem::load(&cfg.fcidump, None)?;
    let ansatz = match &cfg.checkpoint {
        Some(p) => Checkpoint::load(p)?.into_ansatz()?,
        None => Ansatz::init(cfg.ansatz.config(problem.n_orbitals(), cfg.seed))?,
    };
    if ansatz.n_orbitals() != problem.n_orbitals() {
        return Err(Error::Argument("checkpoint width does not match the FCIDUMP".into()));
    }
    let sector = problem.sector;
    let exact: Option<Vec<(u64, f64)>> = if problem.dimension() <= crate::vmc::DEFAULT_EXACT_EVAL_CAP as u128 {
        let basis = problem.basis()?;
        let w = exact_weights(&NeuralState::new(&ansatz, sector), &basis)?;
        Some(basis.configs().iter().map(|x| x.bits()).zip(w).collect())
    } else {
        None
    };
    let mut rows = Vec::new();
    for &ns in &cfg.grid {
        for method in &cfg.methods {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let t = Instant::now();
            let (batch, acceptance, name) = match method.as_str() {
                "bas" => (sample_bas(&ansatz, sector, ns, &mut rng, None)?, None, "bas"),
                "mcmc" => {
                    let opts = McmcOptions {
                        burn_in: cfg.burn_in,
                        memoize: false,
                    };
                    let r = sample_mcmc(&ansatz, sector, ns, opts, &mut rng)?;
                    let a = r.acceptance_ratio();
                    (r.batch, Some(a), "mcmc")
                }
                other => return Err(Error::Argument(format!("unknown sampler {other:?}"))),
            };
            let wall_ms = t.elapsed().as_secs_f64() * 1e3;
            let row = BenchmarkRow {
                method: name,
                n_samples: ns,
                wall_ms,
                n_unique: batch.unique(),
                tv_distance: exact.as_ref().map(|e| tv_distance(&batch, e)),
                acceptance,
            };
            let mut v = serde_json::to_value(&row)?;
            v["record"] = json!("benchmark");
            rec.emit(&v)?;
            rows.push(row);
        }
    }
    Ok(rows)
}

/// `make-fixtures`: oracle manifest for every FCIDUMP in `dir`.
pub fn cmd_make_fixtures(dir: &Path, out: &Path) -> Result<fixtures::FixtureManifest> {
    let m = fixtures::build_manifest(dir, &CiOptions::default())?;
    m.save(out)?;
    Ok(m)
}

/// Convenience used by the examples: defaults tuned for a quick run.
pub fn quick_run_config(fcidump: impl Into<PathBuf>) -> RunConfig {
    RunConfig::new(fcidump)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_length_parsed_from_stem() {
        assert_eq!(bond_length_from_path(Path::new("x/h2_0.7414.fcidump")), Some(0.7414));
        assert_eq!(bond_length_from_path(Path::new("x/lih.fcidump")), None);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Ok(())), 0);
        assert_eq!(exit_code(&Err(Error::InputNotFound("x".into()))), 1);
        assert_eq!(exit_code(&Err(Error::Training("x".into()))), 2);
    }

    #[test]
    fn missing_input_is_reported() {
        let cfg = RunConfig::new("/nonexistent/file.fcidump");
        let e = cmd_run(&cfg).unwrap_err();
        assert_eq!(e.kind(), "input-not-found");
    }

    #[test]
    fn single_point_sweep_rejected() {
        let cfg = RunConfig::new("a.fcidump");
        assert!(matches!(cmd_sweep(&cfg, &[PathBuf::from("a.fcidump")]), Err(Error::Argument(_))));
    }
}
