//! Supervised fit of the ansatz to a CI vector.
//!
//! Loss `L = −Σ |c_x|² log p(x) − λ Σ |c_x|² cos(φ(x) − arg c_x)` over the support of
//! the target, minimized with Adam.

use num_complex::Complex64;

use super::OracleWavefunction;
use crate::ansatz::Ansatz;
use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::vmc::{optimizer_step, AdamConfig, OptimizerState};

#[derive(Clone, Copy, Debug)]
pub struct PretrainOptions {
    pub epochs: usize,
    pub lr: f64,
    /// λ; zero fits amplitudes only.
    pub phase_weight: f64,
    pub log_every: usize,
}

impl Default for PretrainOptions {
    fn default() -> Self {
        Self {
            epochs: 300,
            lr: 3e-3,
            phase_weight: 1.0,
            log_every: 10,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PretrainReport {
    /// `(epoch, fidelity)` at every logged epoch, starting with epoch 0.
    pub fidelity: Vec<(usize, f64)>,
    pub final_fidelity: f64,
    pub final_loss: f64,
}

/// `|⟨target|Ψ⟩|²` over the target support.
pub fn fidelity(ansatz: &Ansatz, target: &OracleWavefunction) -> Result<f64> {
    let (xs, cs): (Vec<Configuration>, Vec<f64>) = target.support().unzip();
    let lp = ansatz.log_psi_batch(&xs, target.basis.sector())?;
    let ov: Complex64 = lp
        .iter()
        .zip(&cs)
        .map(|(l, c)| c * Complex64::from_polar(l.log_amp.exp(), l.phase))
        .sum();
    Ok(ov.norm_sqr())
}

/// `pretrain`: updates `ansatz` in place and reports the fidelity history.
pub fn pretrain(ansatz: &mut Ansatz, target: &OracleWavefunction, opts: PretrainOptions) -> Result<PretrainReport> {
    if (target.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::Argument(format!("target norm {} is not 1", target.norm())));
    }
    if target.basis.n_orbitals() != ansatz.n_orbitals() {
        return Err(Error::Argument("target and ansatz widths differ".into()));
    }
    let sector = target.basis.sector();
    let (xs, cs): (Vec<Configuration>, Vec<f64>) = target.support().unzip();
    let weights: Vec<f64> = cs.iter().map(|c| c * c).collect();
    let args: Vec<f64> = cs.iter().map(|&c| if c < 0.0 { std::f64::consts::PI } else { 0.0 }).collect();
    let mut opt = OptimizerState::new(ansatz.n_params(), AdamConfig::constant(opts.lr));
    let mut report = PretrainReport::default();
    let every = opts.log_every.max(1);
    for epoch in 0..=opts.epochs {
        let lp = ansatz.log_psi_batch(&xs, sector)?;
        if epoch % every == 0 || epoch == opts.epochs {
            let ov: Complex64 = lp
                .iter()
                .zip(&cs)
                .map(|(l, c)| c * Complex64::from_polar(l.log_amp.exp(), l.phase))
                .sum();
            report.fidelity.push((epoch, ov.norm_sqr()));
            report.final_fidelity = ov.norm_sqr();
        }
        report.final_loss = lp
            .iter()
            .zip(weights.iter().zip(&args))
            .map(|(l, (w, a))| -w * 2.0 * l.log_amp - opts.phase_weight * w * (l.phase - a).cos())
            .sum();
        if epoch == opts.epochs {
            break;
        }
        let amp_seeds: Vec<f64> = weights.iter().map(|w| -2.0 * w).collect();
        let phase_seeds: Vec<f64> = lp
            .iter()
            .zip(weights.iter().zip(&args))
            .map(|(l, (w, a))| opts.phase_weight * w * (l.phase - a).sin())
            .collect();
        let g = ansatz.backward_batch(&xs, sector, &amp_seeds, &phase_seeds)?;
        optimizer_step(&mut opt, ansatz, &g)?;
    }
    Ok(report)
}
