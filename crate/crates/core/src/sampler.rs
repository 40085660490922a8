//! Sampling configurations from `|Ψ|²`.
//!
//! Three samplers share the sector mask: single-shot autoregressive (AS),
//! batched autoregressive over unique prefixes with counts (BAS), and a
//! Metropolis–Hastings chain used as the baseline.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::ansatz::Ansatz;
use crate::config::{Configuration, SectorSpec, ALPHA_MASK};
use crate::error::{Error, Result};

/// Unique configurations with occurrence counts, sorted by bit pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    entries: Vec<(Configuration, u64)>,
    total: u64,
    requested: u64,
}

impl SampleBatch {
    /// Merge duplicates and drop zero counts.
    pub fn from_counts(items: impl IntoIterator<Item = (Configuration, u64)>) -> Self {
        let mut map: HashMap<Configuration, u64> = HashMap::new();
        for (x, c) in items {
            if c > 0 {
                *map.entry(x).or_default() += c;
            }
        }
        let mut entries: Vec<_> = map.into_iter().collect();
        entries.sort_by_key(|(x, _)| x.bits());
        let total = entries.iter().map(|e| e.1).sum();
        Self {
            entries,
            total,
            requested: total,
        }
    }

    pub fn entries(&self) -> &[(Configuration, u64)] {
        &self.entries
    }

    pub fn configs(&self) -> Vec<Configuration> {
        self.entries.iter().map(|e| e.0).collect()
    }

    /// `N_s`: sum of counts.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `N_u`: number of distinct configurations.
    pub fn unique(&self) -> usize {
        self.entries.len()
    }

    /// Sample count asked for; exceeds `total` only when pruning discarded branches.
    pub fn requested(&self) -> u64 {
        self.requested
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, x: Configuration) -> u64 {
        self.entries
            .binary_search_by_key(&x.bits(), |e| e.0.bits())
            .map_or(0, |i| self.entries[i].1)
    }

    /// Empirical frequencies `count / total`.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.entries.iter().map(|e| e.1 as f64 / n).collect()
    }
}

/// `sample_as`: one configuration drawn token by token.
pub fn sample_as(ansatz: &Ansatz, sector: SectorSpec, rng: &mut impl Rng) -> Result<Configuration> {
    let n = ansatz.n_orbitals();
    sector.check_feasible(n)?;
    let mut bits = 0u64;
    for i in 0..n {
        let p = ansatz.masked_conditionals_batch(&[bits], i, sector)?[0];
        let one = if p[1] == 1.0 {
            true
        } else if p[1] == 0.0 {
            false
        } else {
            rng.random::<f64>() < p[1]
        };
        if one {
            bits |= 1 << i;
        }
    }
    Ok(Configuration::from_raw(bits, n))
}

/// Stream key for one prefix, so splits do not depend on traversal order.
fn prefix_seed(seed: u64, bits: u64, len: usize) -> u64 {
    let mut z = seed ^ bits.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (len as u64).rotate_left(47);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `sample_bas`: `n_samples` draws generated jointly by binomial splitting of
/// counts over unique prefixes. With `prune_threshold = Some(t)`, branches whose
/// count falls below `t` are discarded after every step and the total shrinks.
pub fn sample_bas(ansatz: &Ansatz, sector: SectorSpec, n_samples: u64, rng: &mut impl Rng, prune_threshold: Option<u64>) -> Result<SampleBatch> {
    if n_samples == 0 {
        return Err(Error::Argument("n_samples must be at least 1".into()));
    }
    let n = ansatz.n_orbitals();
    sector.check_feasible(n)?;
    let seed = rng.next_u64();
    let mut level: Vec<(u64, u64)> = vec![(0, n_samples)];
    for len in 0..n {
        let prefixes: Vec<u64> = level.iter().map(|e| e.0).collect();
        let probs = ansatz.masked_conditionals_batch(&prefixes, len, sector)?;
        let mut next = Vec::with_capacity(level.len() * 2);
        for (&(bits, count), p) in level.iter().zip(&probs) {
            let ones = if p[1] == 0.0 {
                0
            } else if p[1] == 1.0 {
                count
            } else {
                let mut r = ChaCha8Rng::seed_from_u64(prefix_seed(seed, bits, len));
                Binomial::new(count, p[1])
                    .map_err(|e| Error::Internal(format!("binomial({count}, {}): {e}", p[1])))?
                    .sample(&mut r)
            };
            let zeros = count - ones;
            for (c, b) in [(zeros, bits), (ones, bits | 1 << len)] {
                if c > 0 && prune_threshold.is_none_or(|t| c >= t) {
                    next.push((b, c));
                }
            }
        }
        if next.is_empty() {
            return Err(Error::Sampling(format!(
                "every branch pruned at position {len} (threshold {prune_threshold:?})"
            )));
        }
        level = next;
    }
    let mut batch = SampleBatch::from_counts(level.into_iter().map(|(b, c)| (Configuration::from_raw(b, n), c)));
    batch.requested = n_samples;
    Ok(batch)
}

#[derive(Clone, Copy, Debug)]
pub struct McmcOptions {
    pub burn_in: usize,
    /// Cache `log|Ψ|` per visited configuration. Off by default so every step
    /// costs one network evaluation, as in a plain Metropolis sampler.
    pub memoize: bool,
}

impl Default for McmcOptions {
    fn default() -> Self {
        Self {
            burn_in: 1000,
            memoize: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct McmcResult {
    pub batch: SampleBatch,
    pub proposals: u64,
    pub accepted: u64,
}

impl McmcResult {
    /// Accepted over proposed moves; 1 when the sector admits no move.
    pub fn acceptance_ratio(&self) -> f64 {
        if self.proposals == 0 {
            1.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

fn random_subset(slots: &[usize], k: usize, rng: &mut impl Rng) -> u64 {
    rand::seq::index::sample(rng, slots.len(), k)
        .into_iter()
        .fold(0u64, |acc, i| acc | 1 << slots[i])
}

fn pick(mask: u64, rng: &mut impl Rng) -> usize {
    let k = rng.random_range(0..mask.count_ones());
    let mut m = mask;
    for _ in 0..k {
        m &= m - 1;
    }
    m.trailing_zeros() as usize
}

/// `sample_mcmc`: one Metropolis–Hastings chain with swap moves inside a spin channel.
/// Every post-burn-in state is counted.
pub fn sample_mcmc(ansatz: &Ansatz, sector: SectorSpec, n_samples: u64, opts: McmcOptions, rng: &mut impl Rng) -> Result<McmcResult> {
    if n_samples == 0 {
        return Err(Error::Argument("n_samples must be at least 1".into()));
    }
    let n = ansatz.n_orbitals();
    sector.check_feasible(n)?;
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let channels = [ALPHA_MASK & full, !ALPHA_MASK & full];
    let alpha: Vec<usize> = (0..n).step_by(2).collect();
    let beta: Vec<usize> = (1..n).step_by(2).collect();
    let mut bits = random_subset(&alpha, sector.n_alpha, rng) | random_subset(&beta, sector.n_beta, rng);
    // channels where a swap exists
    let movable: Vec<u64> = channels
        .iter()
        .zip([sector.n_alpha, sector.n_beta])
        .filter(|(c, k)| *k > 0 && (*k as u32) < c.count_ones())
        .map(|(c, _)| *c)
        .collect();

    let mut cache: HashMap<u64, f64> = HashMap::new();
    let mut log_amp = |b: u64| -> Result<f64> {
        if opts.memoize {
            if let Some(&v) = cache.get(&b) {
                return Ok(v);
            }
        }
        let v = ansatz.log_amp_batch(&[Configuration::from_raw(b, n)], sector)?[0];
        if opts.memoize {
            cache.insert(b, v);
        }
        Ok(v)
    };

    let mut cur = log_amp(bits)?;
    let mut counts: HashMap<u64, u64> = HashMap::new();
    let (mut proposals, mut accepted) = (0u64, 0u64);
    let steps = opts.burn_in as u64 + n_samples;
    for step in 0..steps {
        if !movable.is_empty() {
            let ch = movable[rng.random_range(0..movable.len())];
            let from = pick(bits & ch, rng);
            let to = pick(!bits & ch, rng);
            let cand = bits & !(1 << from) | 1 << to;
            let la = log_amp(cand)?;
            proposals += 1;
            let ratio = (2.0 * (la - cur)).exp();
            if ratio >= 1.0 || rng.random::<f64>() < ratio {
                bits = cand;
                cur = la;
                accepted += 1;
            }
        }
        if step >= opts.burn_in as u64 {
            *counts.entry(bits).or_default() += 1;
        }
    }
    Ok(McmcResult {
        batch: SampleBatch::from_counts(counts.into_iter().map(|(b, c)| (Configuration::from_raw(b, n), c))),
        proposals,
        accepted,
    })
}
