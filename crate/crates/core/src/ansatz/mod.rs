//! Autoregressive transformer amplitude with an MLP phase.
//!
//! `log Ψ(x) = ½ Σ_i log p(x_i | x_<i) + i φ(x)` where the conditionals come from a
//! causal decoder over `BOS, x_0, …, x_{N-2}` and are renormalized under the sector
//! mask, so `Σ_{x ∈ sector} |Ψ(x)|² = 1` by construction.

pub mod checkpoint;
pub mod layout;
mod net;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{sector_mask, Configuration, SectorSpec, TokenMask};
use crate::error::{Error, Result};

pub use checkpoint::{Checkpoint, RngState};
pub use layout::{Block, Layout, BOS};

/// Sequences per forward/backward chunk.
const CHUNK: usize = 128;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzConfig {
    pub n_orbitals: usize,
    pub n_layers: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub d_ff: usize,
    pub phase_hidden: Vec<usize>,
    pub seed: u64,
}

impl AnsatzConfig {
    /// Default architecture for `n_orbitals` spin orbitals.
    pub fn new(n_orbitals: usize) -> Self {
        Self {
            n_orbitals,
            n_layers: 2,
            d_model: 32,
            n_heads: 4,
            d_ff: 128,
            phase_hidden: vec![64, 64],
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("n_orbitals", self.n_orbitals),
            ("n_layers", self.n_layers),
            ("d_model", self.d_model),
            ("n_heads", self.n_heads),
            ("d_ff", self.d_ff),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Argument(format!("{name} must be at least 1")));
            }
        }
        if self.n_orbitals > crate::config::MAX_ORBITALS {
            return Err(Error::Argument(format!(
                "n_orbitals {} exceeds {}",
                self.n_orbitals,
                crate::config::MAX_ORBITALS
            )));
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return Err(Error::Argument(format!(
                "d_model {} is not divisible by n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if self.phase_hidden.contains(&0) {
            return Err(Error::Argument("phase hidden widths must be at least 1".into()));
        }
        Ok(())
    }
}

/// `log|Ψ(x)|` and `φ(x)` in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogPsi {
    pub log_amp: f64,
    pub phase: f64,
}

/// Network parameters plus their layout.
#[derive(Clone, Debug)]
pub struct Ansatz {
    config: AnsatzConfig,
    layout: Layout,
    params: Vec<f64>,
}

impl Ansatz {
    /// Seeded initialization: zero output head (uniform conditionals),
    /// `N(0, 1/fan_in)` linear weights, unit layer-norm gains.
    /// The phase output layer is random too: with all phases equal the
    /// phase gradient vanishes identically.
    pub fn init(config: AnsatzConfig) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        let mut p = vec![0.0; layout.total];
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut fill = |p: &mut [f64], b: &Block, std: f64| {
            let dist = Normal::new(0.0, std).expect("positive std");
            for v in &mut p[b.range()] {
                *v = dist.sample(&mut rng);
            }
        };
        fill(&mut p, &layout.tok, 1.0);
        fill(&mut p, &layout.pos, 1.0);
        for l in &layout.layers {
            for b in [&l.w_qkv, &l.w_o, &l.w_ff1, &l.w_ff2] {
                fill(&mut p, b, 1.0 / (b.rows as f64).sqrt());
            }
            for b in [&l.ln1_g, &l.ln2_g] {
                p[b.range()].fill(1.0);
            }
        }
        p[layout.lnf_g.range()].fill(1.0);
        for pl in &layout.phase {
            fill(&mut p, &pl.w, 1.0 / (pl.w.rows as f64).sqrt());
        }
        Ok(Self {
            config,
            layout,
            params: p,
        })
    }

    /// Rebuild from a stored parameter vector.
    pub fn from_params(config: AnsatzConfig, params: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        if params.len() != layout.total {
            return Err(Error::Argument(format!(
                "expected {} parameters, got {}",
                layout.total,
                params.len()
            )));
        }
        let mut a = Self {
            config,
            layout,
            params: Vec::new(),
        };
        a.set_params(params)?;
        Ok(a)
    }

    pub fn config(&self) -> &AnsatzConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn n_orbitals(&self) -> usize {
        self.config.n_orbitals
    }

    pub fn n_params(&self) -> usize {
        self.layout.total
    }

    /// Parameters of the amplitude network (everything before the phase MLP).
    pub fn amplitude_param_count(&self) -> usize {
        self.layout.amp_len
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.layout.total {
            return Err(Error::Argument("parameter length mismatch".into()));
        }
        if let Some(i) = params.iter().position(|v| !v.is_finite()) {
            return Err(Error::Training(format!("non-finite parameter at index {i}")));
        }
        self.params = params;
        Ok(())
    }

    /// In-place access for optimizers; callers keep parameters finite.
    pub(crate) fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn tokens_for(&self, x: u64, len: usize) -> impl Iterator<Item = u8> {
        std::iter::once(BOS).chain((0..len - 1).map(move |i| (x >> i & 1) as u8))
    }

    /// Unmasked next-token probabilities after each prefix (all of length `len`).
    pub fn raw_conditionals_batch(&self, prefixes: &[u64], len: usize) -> Vec<[f64; 2]> {
        if prefixes.is_empty() {
            return Vec::new();
        }
        assert!(len < self.config.n_orbitals, "prefix length {len} out of range");
        prefixes
            .par_chunks(CHUNK)
            .flat_map_iter(|chunk| {
                let mut tokens = Vec::with_capacity(chunk.len() * (len + 1));
                for &x in chunk {
                    tokens.extend(self.tokens_for(x, len + 1));
                }
                let f = net::amp_forward(&self.config, &self.layout, &self.params, tokens, chunk.len(), len + 1, false);
                net::last_logits(&f).into_iter().map(softmax2)
            })
            .collect()
    }

    /// `conditionals`: masked next-token probabilities after `prefix`.
    pub fn conditionals(&self, prefix: &[u8], mask: TokenMask) -> Result<[f64; 2]> {
        if prefix.len() >= self.config.n_orbitals {
            return Err(Error::Argument(format!(
                "prefix length {} must be below {}",
                prefix.len(),
                self.config.n_orbitals
            )));
        }
        let bits = prefix
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &t)| acc | ((t as u64 & 1) << i));
        let raw = self.raw_conditionals_batch(&[bits], prefix.len())[0];
        apply_mask(raw, mask, prefix.len())
    }

    /// Sector-masked conditionals for a batch of prefixes of equal length.
    pub fn masked_conditionals_batch(&self, prefixes: &[u64], len: usize, sector: SectorSpec) -> Result<Vec<[f64; 2]>> {
        let n = self.config.n_orbitals;
        let mut out = Vec::with_capacity(prefixes.len());
        let mut need = Vec::new();
        let mut slots = Vec::new();
        for (k, &x) in prefixes.iter().enumerate() {
            let m = sector_mask(x, len, n, sector);
            match (m.allow_zero, m.allow_one) {
                (true, true) => {
                    need.push(x);
                    slots.push(k);
                    out.push([0.0; 2]);
                }
                (true, false) => out.push([1.0, 0.0]),
                (false, true) => out.push([0.0, 1.0]),
                (false, false) => return Err(Error::Infeasible { position: len }),
            }
        }
        for (k, p) in slots.into_iter().zip(self.raw_conditionals_batch(&need, len)) {
            out[k] = p;
        }
        Ok(out)
    }

    fn check_sector(&self, x: &Configuration, sector: SectorSpec) -> Result<()> {
        if x.n_orbitals() != self.config.n_orbitals {
            return Err(Error::Argument(format!(
                "configuration width {} does not match ansatz width {}",
                x.n_orbitals(),
                self.config.n_orbitals
            )));
        }
        if !sector.contains(x) {
            return Err(Error::Domain(format!("{x} lies outside sector {sector:?}")));
        }
        Ok(())
    }

    pub fn log_psi(&self, x: Configuration, sector: SectorSpec) -> Result<LogPsi> {
        Ok(self.log_psi_batch(&[x], sector)?[0])
    }

    /// Batched `log_psi`, parallel over chunks.
    pub fn log_psi_batch(&self, xs: &[Configuration], sector: SectorSpec) -> Result<Vec<LogPsi>> {
        for x in xs {
            self.check_sector(x, sector)?;
        }
        let parts: Vec<Vec<LogPsi>> = xs
            .par_chunks(CHUNK)
            .map(|chunk| {
                let bits: Vec<u64> = chunk.iter().map(|x| x.bits()).collect();
                let (f, masks) = self.forward_full(&bits, sector, false);
                let ph = self.phase_forward(&bits);
                let la = self.log_amps(&f, &bits, &masks);
                la.into_iter()
                    .zip(ph.phase)
                    .map(|(log_amp, phase)| LogPsi { log_amp, phase })
                    .collect()
            })
            .collect();
        Ok(parts.into_iter().flatten().collect())
    }

    /// `log|Ψ|` only, skipping the phase network.
    pub fn log_amp_batch(&self, xs: &[Configuration], sector: SectorSpec) -> Result<Vec<f64>> {
        for x in xs {
            self.check_sector(x, sector)?;
        }
        let parts: Vec<Vec<f64>> = xs
            .par_chunks(CHUNK)
            .map(|chunk| {
                let bits: Vec<u64> = chunk.iter().map(|x| x.bits()).collect();
                let (f, masks) = self.forward_full(&bits, sector, false);
                self.log_amps(&f, &bits, &masks)
            })
            .collect();
        Ok(parts.into_iter().flatten().collect())
    }

    fn forward_full(&self, bits: &[u64], sector: SectorSpec, keep: bool) -> (net::AmpForward, Vec<TokenMask>) {
        let n = self.config.n_orbitals;
        let mut tokens = Vec::with_capacity(bits.len() * n);
        let mut masks = Vec::with_capacity(bits.len() * n);
        for &x in bits {
            tokens.extend(self.tokens_for(x, n));
            masks.extend((0..n).map(|i| sector_mask(x, i, n, sector)));
        }
        let f = net::amp_forward(&self.config, &self.layout, &self.params, tokens, bits.len(), n, keep);
        (f, masks)
    }

    fn phase_forward(&self, bits: &[u64]) -> net::PhaseForward {
        let n = self.config.n_orbitals;
        let input = Array2::from_shape_fn((bits.len(), n), |(b, i)| if bits[b] >> i & 1 == 1 { 1.0 } else { -1.0 });
        net::phase_forward(&self.layout, &self.params, input)
    }

    /// `½ Σ log p` per sequence; forced positions contribute zero.
    fn log_amps(&self, f: &net::AmpForward, bits: &[u64], masks: &[TokenMask]) -> Vec<f64> {
        let n = self.config.n_orbitals;
        bits.iter()
            .enumerate()
            .map(|(b, &x)| {
                let mut s = 0.0;
                for i in 0..n {
                    if masks[b * n + i].is_free() {
                        let r = b * n + i;
                        let l = [f.logits[[r, 0]], f.logits[[r, 1]]];
                        s += log_softmax2(l)[(x >> i & 1) as usize];
                    }
                }
                0.5 * s
            })
            .collect()
    }

    /// `Σ_b amp_seeds[b] ∇log|Ψ(x_b)| + phase_seeds[b] ∇φ(x_b)`, reduced in a fixed order.
    pub fn backward_batch(&self, xs: &[Configuration], sector: SectorSpec, amp_seeds: &[f64], phase_seeds: &[f64]) -> Result<Vec<f64>> {
        if amp_seeds.len() != xs.len() || phase_seeds.len() != xs.len() {
            return Err(Error::Argument("seed length mismatch".into()));
        }
        for x in xs {
            self.check_sector(x, sector)?;
        }
        let n = self.config.n_orbitals;
        let idx: Vec<usize> = (0..xs.len()).collect();
        let parts: Vec<Vec<f64>> = idx
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut grad = vec![0.0; self.layout.total];
                let bits: Vec<u64> = chunk.iter().map(|&k| xs[k].bits()).collect();
                if chunk.iter().any(|&k| amp_seeds[k] != 0.0) {
                    let (f, masks) = self.forward_full(&bits, sector, true);
                    let mut dl = Array2::<f64>::zeros((bits.len() * n, 2));
                    for (b, &k) in chunk.iter().enumerate() {
                        let s = 0.5 * amp_seeds[k];
                        for i in 0..n {
                            let r = b * n + i;
                            if !masks[r].is_free() || s == 0.0 {
                                continue;
                            }
                            let p = softmax2([f.logits[[r, 0]], f.logits[[r, 1]]]);
                            let t = (bits[b] >> i & 1) as usize;
                            dl[[r, 0]] = s * (if t == 0 { 1.0 } else { 0.0 } - p[0]);
                            dl[[r, 1]] = s * (if t == 1 { 1.0 } else { 0.0 } - p[1]);
                        }
                    }
                    net::amp_backward(&self.config, &self.layout, &self.params, &f, &dl, &mut grad);
                }
                if chunk.iter().any(|&k| phase_seeds[k] != 0.0) {
                    let pf = self.phase_forward(&bits);
                    let seeds: Vec<f64> = chunk.iter().map(|&k| phase_seeds[k]).collect();
                    net::phase_backward(&self.layout, &self.params, &pf, &seeds, &mut grad);
                }
                grad
            })
            .collect();
        let mut total = vec![0.0; self.layout.total];
        for g in parts {
            total.iter_mut().zip(&g).for_each(|(t, v)| *t += v);
        }
        Ok(total)
    }

    /// `grad_log_psi`: gradients of `log|Ψ(x)|` and of `φ(x)`.
    pub fn grad_log_psi(&self, x: Configuration, sector: SectorSpec) -> Result<(Vec<f64>, Vec<f64>)> {
        let ga = self.backward_batch(&[x], sector, &[1.0], &[0.0])?;
        let gp = self.backward_batch(&[x], sector, &[0.0], &[1.0])?;
        Ok((ga, gp))
    }
}

#[inline]
fn softmax2(l: [f64; 2]) -> [f64; 2] {
    let m = l[0].max(l[1]);
    let a = (l[0] - m).exp();
    let b = (l[1] - m).exp();
    let z = a + b;
    [a / z, b / z]
}

#[inline]
fn log_softmax2(l: [f64; 2]) -> [f64; 2] {
    let m = l[0].max(l[1]);
    let lz = m + ((l[0] - m).exp() + (l[1] - m).exp()).ln();
    [l[0] - lz, l[1] - lz]
}

fn apply_mask(p: [f64; 2], mask: TokenMask, position: usize) -> Result<[f64; 2]> {
    match (mask.allow_zero, mask.allow_one) {
        (true, true) => Ok(p),
        (true, false) => Ok([1.0, 0.0]),
        (false, true) => Ok([0.0, 1.0]),
        (false, false) => Err(Error::Infeasible { position }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::SectorBasis;

    fn small(n: usize, seed: u64) -> AnsatzConfig {
        AnsatzConfig {
            n_orbitals: n,
            n_layers: 2,
            d_model: 8,
            n_heads: 2,
            d_ff: 16,
            phase_hidden: vec![6, 5],
            seed,
        }
    }

    /// Random weights everywhere, including the head.
    fn randomized(cfg: AnsatzConfig) -> Ansatz {
        let mut a = Ansatz::init(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let d = Normal::new(0.0, 0.4).unwrap();
        let p: Vec<f64> = a.params().iter().map(|v| v + d.sample(&mut rng)).collect();
        a.set_params(p).unwrap();
        a
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = small(4, 0);
        c.n_heads = 3;
        assert!(matches!(Ansatz::init(c), Err(Error::Argument(_))));
        let mut c = small(4, 0);
        c.d_ff = 0;
        assert!(Ansatz::init(c).is_err());
    }

    #[test]
    fn deterministic_init() {
        let a = Ansatz::init(small(6, 3)).unwrap();
        let b = Ansatz::init(small(6, 3)).unwrap();
        assert_eq!(a.params(), b.params());
    }

    #[test]
    fn zero_head_is_uniform() {
        let a = Ansatz::init(small(6, 1)).unwrap();
        assert_eq!(a.conditionals(&[1, 0, 1], TokenMask::ANY).unwrap(), [0.5, 0.5]);
        let m = TokenMask {
            allow_zero: true,
            allow_one: false,
        };
        assert_eq!(a.conditionals(&[1], m).unwrap(), [1.0, 0.0]);
        let none = TokenMask {
            allow_zero: false,
            allow_one: false,
        };
        assert!(matches!(a.conditionals(&[1], none), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn normalized_over_sector() {
        let a = randomized(small(8, 5));
        let sector = SectorSpec::new(2, 1);
        let basis = SectorBasis::enumerate(8, sector).unwrap();
        let lp = a.log_psi_batch(basis.configs(), sector).unwrap();
        let s: f64 = lp.iter().map(|l| (2.0 * l.log_amp).exp()).sum();
        assert!((s - 1.0).abs() < 1e-12, "{s}");
        assert!(lp.iter().all(|l| l.log_amp <= 0.0));
    }

    #[test]
    fn stepwise_matches_batched() {
        let a = randomized(small(8, 2));
        let sector = SectorSpec::new(2, 2);
        let x: Configuration = "11010010".parse().unwrap();
        let occ = x.occupations();
        let mut s = 0.0;
        for i in 0..8 {
            let m = crate::config::prefix_mask(&occ[..i], 8, sector);
            let p = a.conditionals(&occ[..i], m).unwrap();
            s += p[occ[i] as usize].ln();
        }
        let lp = a.log_psi(x, sector).unwrap();
        assert!((0.5 * s - lp.log_amp).abs() < 1e-12);
    }

    #[test]
    fn outside_sector_is_domain_error() {
        let a = Ansatz::init(small(4, 0)).unwrap();
        let x: Configuration = "1110".parse().unwrap();
        assert!(matches!(a.log_psi(x, SectorSpec::new(1, 1)), Err(Error::Domain(_))));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let a = randomized(small(6, 7));
        let sector = SectorSpec::new(2, 1);
        let x: Configuration = "101100".parse().unwrap();
        let (ga, gp) = a.grad_log_psi(x, sector).unwrap();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for k in (0..a.n_params()).step_by(7) {
            let mut p = a.params().to_vec();
            p[k] += h;
            let mut b = a.clone();
            b.set_params(p.clone()).unwrap();
            let up = b.log_psi(x, sector).unwrap();
            p[k] -= 2.0 * h;
            b.set_params(p).unwrap();
            let dn = b.log_psi(x, sector).unwrap();
            let fa = (up.log_amp - dn.log_amp) / (2.0 * h);
            let fp = (up.phase - dn.phase) / (2.0 * h);
            worst = worst.max((fa - ga[k]).abs() / (1e-3 + fa.abs().max(ga[k].abs())));
            worst = worst.max((fp - gp[k]).abs() / (1e-3 + fp.abs().max(gp[k].abs())));
        }
        assert!(worst < 1e-5, "{worst}");
    }
}
