//! Variational Monte Carlo: local energies, estimators, Adam and the training loop.

mod local;
mod optim;

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{Ansatz, AnsatzConfig};
use crate::config::SectorSpec;
use crate::error::{Error, Result};
use crate::hamiltonian::QubitHamiltonian;
use crate::hamio::MolecularIntegrals;
use crate::oracle::{self, CiOptions, OracleWavefunction, PretrainOptions, PretrainReport, SectorBasis};
use crate::sampler::{sample_bas, sample_mcmc, McmcOptions, SampleBatch};

pub use local::{
    estimate_energy, estimate_gradient, estimate_weighted, exact_energy, exact_estimate, exact_gradient, exact_weights, gradient_from_local, local_energies,
    local_energy, EnergyEstimate, LocalEnergies, NeuralState, Wavefunction, MAX_LOG_RATIO,
};
pub use optim::{optimizer_step, AdamConfig, OptimizerState};

/// Sectors up to this size get an exact variational energy during training.
pub const DEFAULT_EXACT_EVAL_CAP: usize = 20_000;

/// Integrals, their qubit Hamiltonian and the sector to solve in.
#[derive(Clone, Debug)]
pub struct Problem {
    pub integrals: MolecularIntegrals,
    pub hamiltonian: QubitHamiltonian,
    pub sector: SectorSpec,
}

impl Problem {
    pub fn new(integrals: MolecularIntegrals, sector: Option<SectorSpec>) -> Result<Self> {
        let sector = sector.unwrap_or_else(|| integrals.sector());
        sector.check_feasible(integrals.n_orbitals())?;
        let hamiltonian = QubitHamiltonian::assemble(&integrals)?;
        Ok(Self {
            integrals,
            hamiltonian,
            sector,
        })
    }

    pub fn load(path: impl AsRef<Path>, sector: Option<SectorSpec>) -> Result<Self> {
        Self::new(MolecularIntegrals::read(path)?, sector)
    }

    pub fn n_orbitals(&self) -> usize {
        self.integrals.n_orbitals()
    }

    pub fn dimension(&self) -> u128 {
        self.sector.dimension(self.n_orbitals())
    }

    pub fn basis(&self) -> Result<SectorBasis> {
        SectorBasis::enumerate(self.n_orbitals(), self.sector)
    }

    pub fn fci(&self) -> Result<OracleWavefunction> {
        oracle::fci_ground_state(&self.hamiltonian, self.n_orbitals(), self.sector, &CiOptions::default())
    }

    pub fn cisd(&self) -> Result<OracleWavefunction> {
        oracle::cisd_ground_state(&self.integrals, self.sector, &CiOptions::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Bas,
    Mcmc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PretrainMode {
    None,
    Cisd,
    Fci,
}

impl std::str::FromStr for PretrainMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "cisd" => Ok(Self::Cisd),
            "fci" => Ok(Self::Fci),
            _ => Err(Error::Argument(format!("pretrain mode must be none, cisd or fci, got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_samples: u64,
    pub max_iters: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub mcmc_burn_in: usize,
    /// Stop when the means of the two halves of this many trailing energies differ by less than `plateau_tol`.
    pub plateau_window: usize,
    pub plateau_tol: f64,
    /// Exact-energy evaluation period (iterations); 0 disables.
    pub eval_every: usize,
    pub exact_eval_cap: usize,
    /// Energy the run is judged against (usually the FCI energy).
    pub reference_energy: Option<f64>,
    pub target_tol: f64,
    /// Consecutive exact evaluations that must lie within tolerance before the
    /// target counts as reached (and before `stop_tol` stops the run).
    pub target_window: usize,
    /// Stop once the exact energy stays within this of `reference_energy`.
    pub stop_tol: Option<f64>,
    pub pretrain: PretrainMode,
    #[serde(skip)]
    pub pretrain_options: PretrainOptions,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            max_iters: 10_000,
            adam: AdamConfig::default(),
            seed: 0,
            sampler: SamplerKind::Bas,
            mcmc_burn_in: 1000,
            plateau_window: 200,
            plateau_tol: 1e-5,
            eval_every: 10,
            exact_eval_cap: DEFAULT_EXACT_EVAL_CAP,
            reference_energy: None,
            target_tol: 1.6e-3,
            target_window: 1,
            stop_tol: None,
            pretrain: PretrainMode::None,
            pretrain_options: PretrainOptions::default(),
        }
    }
}

/// One training iteration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub variance: f64,
    pub n_unique: usize,
    pub n_samples: u64,
    pub imag_residual: f64,
    /// Exact variational energy, on evaluation iterations of enumerable sectors.
    pub exact_energy: Option<f64>,
    pub lr: f64,
    pub clamped: usize,
    /// Wall time of the iteration; not covered by determinism guarantees.
    pub wall_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxIterations,
    Plateau,
    Target,
}

#[derive(Clone, Debug)]
pub struct VmcResult {
    pub ansatz: Ansatz,
    pub trace: Vec<IterationRecord>,
    /// Exact variational energy of the final state when enumerable, else the last sampled mean.
    pub final_energy: f64,
    pub final_is_exact: bool,
    /// Energy before the first update (exact when enumerable).
    pub initial_energy: f64,
    /// Iteration completing the first run of `target_window` exact evaluations within `target_tol`.
    pub iterations_to_target: Option<usize>,
    pub stop_reason: StopReason,
    pub pretrain: Option<PretrainReport>,
}

fn plateaued(trace: &[IterationRecord], window: usize, tol: f64) -> bool {
    if window < 2 || trace.len() < window {
        return false;
    }
    let w = &trace[trace.len() - window..];
    let half = window / 2;
    let a: f64 = w[..half].iter().map(|r| r.energy).sum::<f64>() / half as f64;
    let b: f64 = w[half..].iter().map(|r| r.energy).sum::<f64>() / (window - half) as f64;
    (a - b).abs() < tol
}

/// `run_vmc`: optional pretraining, then sample → estimate → gradient → Adam until a stop rule fires.
pub fn run_vmc(problem: &Problem, ansatz_cfg: &AnsatzConfig, cfg: &TrainConfig, on_record: &mut dyn FnMut(&IterationRecord)) -> Result<VmcResult> {
    if cfg.n_samples == 0 {
        return Err(Error::Argument("n_samples must be positive".into()));
    }
    if ansatz_cfg.n_orbitals != problem.n_orbitals() {
        return Err(Error::Argument(format!(
            "ansatz width {} does not match the problem's {} spin orbitals",
            ansatz_cfg.n_orbitals,
            problem.n_orbitals()
        )));
    }
    let h = &problem.hamiltonian;
    let sector = problem.sector;
    let mut ansatz = Ansatz::init(ansatz_cfg.clone())?;

    let pretrain = match cfg.pretrain {
        PretrainMode::None => None,
        mode => {
            let target = if mode == PretrainMode::Cisd { problem.cisd()? } else { problem.fci()? };
            Some(oracle::pretrain(&mut ansatz, &target, cfg.pretrain_options)?)
        }
    };

    let basis = if cfg.eval_every > 0 && problem.dimension() <= cfg.exact_eval_cap as u128 {
        Some(problem.basis()?)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut opt = OptimizerState::new(ansatz.n_params(), cfg.adam);
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut iterations_to_target = None;
    let mut stop_reason = StopReason::MaxIterations;
    let mut initial_energy = None;
    let (mut target_streak, mut stop_streak) = (0usize, 0usize);
    let window = cfg.target_window.max(1);
    let within = |e: f64, tol: f64| cfg.reference_energy.is_some_and(|r| (e - r).abs() < tol);

    for it in 0..cfg.max_iters {
        let t0 = Instant::now();
        let batch: SampleBatch = match cfg.sampler {
            SamplerKind::Bas => sample_bas(&ansatz, sector, cfg.n_samples, &mut rng, None)?,
            SamplerKind::Mcmc => {
                let opts = McmcOptions {
                    burn_in: cfg.mcmc_burn_in,
                    memoize: true,
                };
                sample_mcmc(&ansatz, sector, cfg.n_samples, opts, &mut rng)?.batch
            }
        };
        let xs = batch.configs();
        let w = batch.weights();
        let (est, le) = estimate_weighted(h, &NeuralState::new(&ansatz, sector), &xs, &w, batch.total())?;
        let exact = match &basis {
            Some(b) if it % cfg.eval_every == 0 => Some(exact_energy(h, &ansatz, b)?),
            _ => None,
        };
        if it == 0 {
            initial_energy = Some(exact.unwrap_or(est.mean));
        }
        let lr = opt.current_lr();
        let g = gradient_from_local(&ansatz, sector, &xs, &w, &le.values)?;
        optimizer_step(&mut opt, &mut ansatz, &g).map_err(|e| match e {
            Error::Training(m) => Error::Training(format!("iteration {it}: {m}")),
            other => other,
        })?;
        let rec = IterationRecord {
            iteration: it,
            energy: est.mean,
            variance: est.variance,
            n_unique: est.n_unique,
            n_samples: est.n_samples,
            imag_residual: est.imag_residual,
            exact_energy: exact,
            lr,
            clamped: est.clamped,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        };
        on_record(&rec);
        trace.push(rec);
        if let Some(e) = exact {
            target_streak = if within(e, cfg.target_tol) { target_streak + 1 } else { 0 };
            if iterations_to_target.is_none() && target_streak >= window {
                iterations_to_target = Some(it);
            }
            stop_streak = if cfg.stop_tol.is_some_and(|t| within(e, t)) { stop_streak + 1 } else { 0 };
            if stop_streak >= window {
                stop_reason = StopReason::Target;
                break;
            }
        }
        if plateaued(&trace, cfg.plateau_window, cfg.plateau_tol) {
            stop_reason = StopReason::Plateau;
            break;
        }
    }

    let (final_energy, final_is_exact) = match &basis {
        Some(b) => (exact_energy(h, &ansatz, b)?, true),
        None => (trace.last().map_or(f64::NAN, |r| r.energy), false),
    };
    if final_is_exact && iterations_to_target.is_none() && target_streak + 1 >= window && within(final_energy, cfg.target_tol) {
        iterations_to_target = Some(trace.len());
    }
    Ok(VmcResult {
        ansatz,
        trace,
        final_energy,
        final_is_exact,
        initial_energy: initial_energy.unwrap_or(f64::NAN),
        iterations_to_target,
        stop_reason,
        pretrain,
    })
}
