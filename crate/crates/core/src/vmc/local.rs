//! Local energies and the count-weighted energy and gradient estimators.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ansatz::{Ansatz, LogPsi};
use crate::config::{Configuration, SectorSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::QubitHamiltonian;
use crate::oracle::{OracleWavefunction, SectorBasis};
use crate::sampler::SampleBatch;

/// Largest `Re Δlog` exponentiated before clamping.
pub const MAX_LOG_RATIO: f64 = 30.0;

/// Anything that can report `log Ψ` for a batch of configurations.
/// `log_amp = -∞` encodes `Ψ(x) = 0`.
pub trait Wavefunction: Sync {
    fn n_orbitals(&self) -> usize;
    fn log_psi_batch(&self, xs: &[Configuration]) -> Result<Vec<LogPsi>>;
}

/// The neural ansatz restricted to one sector.
#[derive(Clone, Copy)]
pub struct NeuralState<'a> {
    pub ansatz: &'a Ansatz,
    pub sector: SectorSpec,
}

impl<'a> NeuralState<'a> {
    pub fn new(ansatz: &'a Ansatz, sector: SectorSpec) -> Self {
        Self { ansatz, sector }
    }
}

impl Wavefunction for NeuralState<'_> {
    fn n_orbitals(&self) -> usize {
        self.ansatz.n_orbitals()
    }

    fn log_psi_batch(&self, xs: &[Configuration]) -> Result<Vec<LogPsi>> {
        self.ansatz.log_psi_batch(xs, self.sector)
    }
}

/// Table-backed wavefunction: real amplitudes, phase 0 or π.
impl Wavefunction for OracleWavefunction {
    fn n_orbitals(&self) -> usize {
        self.basis.n_orbitals()
    }

    fn log_psi_batch(&self, xs: &[Configuration]) -> Result<Vec<LogPsi>> {
        Ok(xs
            .iter()
            .map(|&x| {
                let c = self.amplitude(x);
                LogPsi {
                    log_amp: c.abs().ln(),
                    phase: if c < 0.0 { std::f64::consts::PI } else { 0.0 },
                }
            })
            .collect())
    }
}

#[derive(Clone, Debug, Default)]
pub struct LocalEnergies {
    pub values: Vec<Complex64>,
    /// Number of ratios whose exponent was clamped at `MAX_LOG_RATIO`.
    pub clamped: usize,
}

/// `E_loc` for each configuration. All connected configurations across the
/// batch are evaluated in one deduplicated `log_psi` call.
pub fn local_energies(h: &QubitHamiltonian, psi: &dyn Wavefunction, xs: &[Configuration]) -> Result<LocalEnergies> {
    if psi.n_orbitals() != h.n_qubits() {
        return Err(Error::Argument(format!(
            "wavefunction width {} does not match Hamiltonian width {}",
            psi.n_orbitals(),
            h.n_qubits()
        )));
    }
    let rows: Vec<Vec<(Configuration, f64)>> = xs.par_iter().map(|&x| h.connected(x)).collect::<Result<_>>()?;
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut uniq: Vec<Configuration> = Vec::new();
    let mut slot = |x: Configuration, index: &mut HashMap<u64, usize>| {
        *index.entry(x.bits()).or_insert_with(|| {
            uniq.push(x);
            uniq.len() - 1
        })
    };
    let own: Vec<usize> = xs.iter().map(|&x| slot(x, &mut index)).collect();
    let links: Vec<Vec<(usize, f64)>> = rows
        .iter()
        .map(|row| row.iter().map(|&(y, e)| (slot(y, &mut index), e)).collect())
        .collect();
    let lp = psi.log_psi_batch(&uniq)?;

    let mut clamped = 0;
    let mut values = Vec::with_capacity(xs.len());
    for (k, x) in xs.iter().enumerate() {
        let base = lp[own[k]];
        if base.log_amp == f64::NEG_INFINITY {
            return Err(Error::Domain(format!("Ψ({x}) = 0; local energy undefined")));
        }
        let mut e = Complex64::new(0.0, 0.0);
        for &(j, elem) in &links[k] {
            let o = lp[j];
            if o.log_amp == f64::NEG_INFINITY {
                continue;
            }
            let mut re = o.log_amp - base.log_amp;
            if re > MAX_LOG_RATIO {
                re = MAX_LOG_RATIO;
                clamped += 1;
            }
            e += elem * Complex64::new(re, o.phase - base.phase).exp();
        }
        values.push(e);
    }
    Ok(LocalEnergies { values, clamped })
}

/// `local_energy` for a single configuration.
pub fn local_energy(h: &QubitHamiltonian, psi: &dyn Wavefunction, x: Configuration) -> Result<Complex64> {
    Ok(local_energies(h, psi, &[x])?.values[0])
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct EnergyEstimate {
    pub mean: f64,
    /// Weighted variance of `Re E_loc`.
    pub variance: f64,
    pub n_unique: usize,
    pub n_samples: u64,
    /// `max |Im E_loc|` over the batch.
    pub imag_residual: f64,
    /// `|Σ w Im E_loc|`.
    pub imag_mean: f64,
    pub clamped: usize,
}

/// Weighted reduction of local energies; `weights` sum to one.
pub(crate) fn reduce(values: &[Complex64], weights: &[f64]) -> (Complex64, f64) {
    let mean: Complex64 = values.iter().zip(weights).map(|(e, w)| e * w).sum();
    let var = values
        .iter()
        .zip(weights)
        .map(|(e, w)| w * (e.re - mean.re).powi(2))
        .sum::<f64>();
    (mean, var.max(0.0))
}

/// Energy estimate plus the per-configuration local energies it used.
pub fn estimate_weighted(h: &QubitHamiltonian, psi: &dyn Wavefunction, xs: &[Configuration], weights: &[f64], n_samples: u64) -> Result<(EnergyEstimate, LocalEnergies)> {
    if xs.is_empty() {
        return Err(Error::Argument("empty batch".into()));
    }
    let le = local_energies(h, psi, xs)?;
    let (mean, variance) = reduce(&le.values, weights);
    let est = EnergyEstimate {
        mean: mean.re,
        variance,
        n_unique: xs.len(),
        n_samples,
        imag_residual: le.values.iter().map(|e| e.im.abs()).fold(0.0, f64::max),
        imag_mean: mean.im.abs(),
        clamped: le.clamped,
    };
    Ok((est, le))
}

/// `estimate_energy` over a sampled batch.
pub fn estimate_energy(h: &QubitHamiltonian, psi: &dyn Wavefunction, batch: &SampleBatch) -> Result<EnergyEstimate> {
    Ok(estimate_weighted(h, psi, &batch.configs(), &batch.weights(), batch.total())?.0)
}

/// `g = 2 Re ⟨(E_loc − Ē)* ∂log Ψ⟩` for given weights and local energies.
pub fn gradient_from_local(ansatz: &Ansatz, sector: SectorSpec, xs: &[Configuration], weights: &[f64], local: &[Complex64]) -> Result<Vec<f64>> {
    let (mean, _) = reduce(local, weights);
    let amp: Vec<f64> = local.iter().zip(weights).map(|(e, w)| 2.0 * w * (e.re - mean.re)).collect();
    let phase: Vec<f64> = local.iter().zip(weights).map(|(e, w)| 2.0 * w * (e.im - mean.im)).collect();
    ansatz.backward_batch(xs, sector, &amp, &phase)
}

/// `estimate_gradient` over a sampled batch.
pub fn estimate_gradient(h: &QubitHamiltonian, ansatz: &Ansatz, sector: SectorSpec, batch: &SampleBatch) -> Result<Vec<f64>> {
    let xs = batch.configs();
    let w = batch.weights();
    let (_, le) = estimate_weighted(h, &NeuralState::new(ansatz, sector), &xs, &w, batch.total())?;
    gradient_from_local(ansatz, sector, &xs, &w, &le.values)
}

/// Exact probabilities `|Ψ(x)|² / Σ|Ψ|²` over an enumerated basis.
pub fn exact_weights(psi: &dyn Wavefunction, basis: &SectorBasis) -> Result<Vec<f64>> {
    Ok(normalized_weights(&psi.log_psi_batch(basis.configs())?))
}

/// Precomputed values with a fallback for configurations outside the table.
struct Tabulated<'a> {
    table: HashMap<u64, LogPsi>,
    inner: &'a dyn Wavefunction,
}

impl Wavefunction for Tabulated<'_> {
    fn n_orbitals(&self) -> usize {
        self.inner.n_orbitals()
    }

    fn log_psi_batch(&self, xs: &[Configuration]) -> Result<Vec<LogPsi>> {
        let miss: Vec<Configuration> = xs.iter().copied().filter(|x| !self.table.contains_key(&x.bits())).collect();
        let extra = if miss.is_empty() { Vec::new() } else { self.inner.log_psi_batch(&miss)? };
        let mut extra = extra.into_iter();
        Ok(xs
            .iter()
            .map(|x| match self.table.get(&x.bits()) {
                Some(&l) => l,
                None => extra.next().expect("one value per miss"),
            })
            .collect())
    }
}

fn normalized_weights(lp: &[LogPsi]) -> Vec<f64> {
    let top = lp.iter().map(|l| l.log_amp).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lp.iter().map(|l| (2.0 * (l.log_amp - top)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// `⟨Ψ|H|Ψ⟩/⟨Ψ|Ψ⟩` by full enumeration, with the weights and local energies.
pub fn exact_estimate(h: &QubitHamiltonian, psi: &dyn Wavefunction, basis: &SectorBasis) -> Result<(EnergyEstimate, Vec<f64>, LocalEnergies)> {
    let lp = psi.log_psi_batch(basis.configs())?;
    let w = normalized_weights(&lp);
    let table = basis.configs().iter().map(|x| x.bits()).zip(lp).collect();
    let psi = &Tabulated { table, inner: psi };
    let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
    let xs: Vec<Configuration> = keep.iter().map(|&i| basis.configs()[i]).collect();
    let ws: Vec<f64> = keep.iter().map(|&i| w[i]).collect();
    let (est, le) = estimate_weighted(h, psi, &xs, &ws, 0)?;
    let mut full = vec![Complex64::new(0.0, 0.0); w.len()];
    for (k, &i) in keep.iter().enumerate() {
        full[i] = le.values[k];
    }
    Ok((
        est,
        w,
        LocalEnergies {
            values: full,
            clamped: le.clamped,
        },
    ))
}

/// Exact variational energy of the ansatz on its sector.
pub fn exact_energy(h: &QubitHamiltonian, ansatz: &Ansatz, basis: &SectorBasis) -> Result<f64> {
    Ok(exact_estimate(h, &NeuralState::new(ansatz, basis.sector()), basis)?.0.mean)
}

/// Gradient of the exact variational energy.
pub fn exact_gradient(h: &QubitHamiltonian, ansatz: &Ansatz, basis: &SectorBasis) -> Result<(f64, Vec<f64>)> {
    let sector = basis.sector();
    let (est, w, le) = exact_estimate(h, &NeuralState::new(ansatz, sector), basis)?;
    let g = gradient_from_local(ansatz, sector, basis.configs(), &w, &le.values)?;
    Ok((est.mean, g))
}
