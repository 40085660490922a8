//! Exact and truncated configuration interaction over a sector basis.
//!
//! These solvers provide ground-truth energies, table wavefunctions for the
//! zero-variance checks, and targets for supervised pre-training.

pub mod eigen;
pub mod fixtures;
pub mod pretrain;
pub mod slater_condon;

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::config::{binomial, Configuration, SectorSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::QubitHamiltonian;
use crate::hamio::MolecularIntegrals;

pub use eigen::{LanczosOptions, SparseSym};
pub use pretrain::{pretrain, PretrainOptions, PretrainReport};
pub use slater_condon::slater_condon;

/// Largest dimension diagonalized densely.
pub const DEFAULT_DENSE_CAP: usize = 4000;
/// Largest dimension handled by the iterative solver.
pub const DEFAULT_ITERATIVE_CAP: usize = 100_000;

/// All configurations of one sector, in ascending bit order.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorBasis {
    n_orbitals: usize,
    sector: SectorSpec,
    configs: Vec<Configuration>,
}

fn channel_combos(n_spatial: usize, k: usize, shift: usize) -> Vec<u64> {
    // k-subsets of spatial orbitals in increasing order (Gosper's hack),
    // spread onto one spin channel
    let spread = |m: u64| {
        (0..n_spatial)
            .filter(|i| m >> i & 1 == 1)
            .fold(0u64, |acc, i| acc | 1 << (2 * i + shift))
    };
    if k == 0 {
        return vec![0];
    }
    let limit = 1u64 << n_spatial;
    let mut out = Vec::new();
    let mut m = (1u64 << k) - 1;
    while m < limit {
        out.push(spread(m));
        let c = m & m.wrapping_neg();
        let r = m + c;
        m = (((r ^ m) >> 2) / c) | r;
    }
    out
}

impl SectorBasis {
    /// `enumerate_sector`: every configuration with the sector's alpha/beta counts.
    pub fn enumerate(n_orbitals: usize, sector: SectorSpec) -> Result<Self> {
        sector.check_feasible(n_orbitals)?;
        let n_spatial = n_orbitals / 2;
        let alphas = channel_combos(n_spatial, sector.n_alpha, 0);
        let betas = channel_combos(n_spatial, sector.n_beta, 1);
        let mut bits: Vec<u64> = alphas
            .iter()
            .flat_map(|&a| betas.iter().map(move |&b| a | b))
            .collect();
        bits.sort_unstable();
        bits.dedup();
        debug_assert_eq!(bits.len() as u128, sector.dimension(n_orbitals));
        Ok(Self {
            n_orbitals,
            sector,
            configs: bits
                .into_iter()
                .map(|b| Configuration::from_raw(b, n_orbitals))
                .collect(),
        })
    }

    /// Subset of the sector within `max_order` excitations of `reference`.
    pub fn truncated(n_orbitals: usize, sector: SectorSpec, reference: Configuration, max_order: usize) -> Result<Self> {
        let full = Self::enumerate(n_orbitals, sector)?;
        let configs = full
            .configs
            .into_iter()
            .filter(|x| ((x.bits() ^ reference.bits()).count_ones() / 2) as usize <= max_order)
            .collect();
        Ok(Self {
            n_orbitals,
            sector,
            configs,
        })
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn sector(&self) -> SectorSpec {
        self.sector
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn index_of(&self, x: Configuration) -> Option<usize> {
        self.configs.binary_search_by_key(&x.bits(), |c| c.bits()).ok()
    }
}

/// Anything that lists the nonzero elements `⟨x'|H|x⟩` of a column.
pub trait SectorOperator: Sync {
    fn column(&self, x: Configuration) -> Result<Vec<(Configuration, f64)>>;
}

impl SectorOperator for QubitHamiltonian {
    fn column(&self, x: Configuration) -> Result<Vec<(Configuration, f64)>> {
        self.connected(x)
    }
}

/// Slater–Condon route: excitations enumerated directly from the integrals.
pub struct SlaterCondon<'a>(pub &'a MolecularIntegrals);

impl SectorOperator for SlaterCondon<'_> {
    fn column(&self, x: Configuration) -> Result<Vec<(Configuration, f64)>> {
        Ok(slater_condon::excitations(self.0, x))
    }
}

/// Sparse restriction of an operator to a basis; couplings leaving the basis are dropped.
pub fn sparse_matrix(op: &dyn SectorOperator, basis: &SectorBasis) -> Result<SparseSym> {
    let rows = basis
        .configs()
        .par_iter()
        .map(|&x| {
            let mut row: Vec<(usize, f64)> = op
                .column(x)?
                .into_iter()
                .filter_map(|(y, e)| basis.index_of(y).map(|i| (i, e)))
                .collect();
            row.sort_by_key(|r| r.0);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseSym::from_rows(rows))
}

/// Dense Slater–Condon matrix over a basis, evaluated pairwise.
pub fn slater_condon_dense(ints: &MolecularIntegrals, basis: &SectorBasis) -> DMatrix<f64> {
    let n = basis.len();
    let cols: Vec<Vec<f64>> = basis
        .configs()
        .par_iter()
        .map(|&xb| {
            basis
                .configs()
                .iter()
                .map(|&xa| slater_condon(xa, xb, ints))
                .collect()
        })
        .collect();
    DMatrix::from_fn(n, n, |a, b| cols[b][a])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMode {
    /// Dense below the dense cap, iterative above.
    Auto,
    Dense,
    Iterative,
}

#[derive(Clone, Copy, Debug)]
pub struct CiOptions {
    pub mode: SolverMode,
    pub dense_cap: usize,
    pub iterative_cap: usize,
    pub lanczos: LanczosOptions,
}

impl Default for CiOptions {
    fn default() -> Self {
        Self {
            mode: SolverMode::Auto,
            dense_cap: DEFAULT_DENSE_CAP,
            iterative_cap: DEFAULT_ITERATIVE_CAP,
            lanczos: LanczosOptions::default(),
        }
    }
}

/// A CI eigenvector stored over the full sector basis.
#[derive(Clone, Debug)]
pub struct OracleWavefunction {
    pub basis: SectorBasis,
    pub amplitudes: Vec<f64>,
    pub energy: f64,
}

impl OracleWavefunction {
    pub fn amplitude(&self, x: Configuration) -> f64 {
        self.basis.index_of(x).map_or(0.0, |i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// A normalized single determinant.
    pub fn determinant(basis: SectorBasis, x: Configuration, energy: f64) -> Result<Self> {
        let i = basis
            .index_of(x)
            .ok_or_else(|| Error::Argument(format!("{x} is not in the sector")))?;
        let mut amplitudes = vec![0.0; basis.len()];
        amplitudes[i] = 1.0;
        Ok(Self {
            basis,
            amplitudes,
            energy,
        })
    }

    /// Support as `(configuration, amplitude)` pairs with nonzero amplitude.
    pub fn support(&self) -> impl Iterator<Item = (Configuration, f64)> + '_ {
        self.basis
            .configs()
            .iter()
            .zip(&self.amplitudes)
            .filter(|(_, &a)| a != 0.0)
            .map(|(&x, &a)| (x, a))
    }
}

fn ground_in_basis(op: &dyn SectorOperator, basis: &SectorBasis, opts: &CiOptions) -> Result<(f64, Vec<f64>)> {
    let dim = basis.len();
    if dim == 0 {
        return Err(Error::Argument("empty basis".into()));
    }
    let dense = match opts.mode {
        SolverMode::Dense => true,
        SolverMode::Iterative => false,
        SolverMode::Auto => dim <= opts.dense_cap,
    };
    if dense && dim > opts.dense_cap {
        return Err(Error::Resource(format!("dimension {dim} exceeds dense cap {}", opts.dense_cap)));
    }
    if !dense && dim > opts.iterative_cap {
        return Err(Error::Resource(format!(
            "dimension {dim} exceeds iterative cap {}",
            opts.iterative_cap
        )));
    }
    let m = sparse_matrix(op, basis)?;
    let (e, mut v) = if dense {
        eigen::dense_ground(&m.to_dense())
    } else {
        // start from the lowest-diagonal determinant plus a small uniform tilt
        let best = m
            .diagonal()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|p| p.0)
            .unwrap_or(0);
        let mut start = vec![1e-3 / (dim as f64).sqrt(); dim];
        start[best] = 1.0;
        eigen::lanczos_ground(dim, |v, o| m.matvec(v, o), &start, opts.lanczos)?
    };
    eigen::fix_sign(&mut v);
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    Ok((e, v))
}

/// `fci_ground_state`: lowest eigenpair over the whole sector.
pub fn fci_ground_state(op: &dyn SectorOperator, n_orbitals: usize, sector: SectorSpec, opts: &CiOptions) -> Result<OracleWavefunction> {
    let dim = sector.dimension(n_orbitals);
    if dim > opts.iterative_cap.max(opts.dense_cap) as u128 {
        return Err(Error::Resource(format!("sector dimension {dim} exceeds solver caps")));
    }
    let basis = SectorBasis::enumerate(n_orbitals, sector)?;
    let (energy, amplitudes) = ground_in_basis(op, &basis, opts)?;
    Ok(OracleWavefunction {
        basis,
        amplitudes,
        energy,
    })
}

/// Lowest eigenpair within `max_order` excitations of the reference determinant,
/// reported over the full sector basis (zeros outside the truncated space).
pub fn truncated_ci(ints: &MolecularIntegrals, sector: SectorSpec, max_order: usize, opts: &CiOptions) -> Result<OracleWavefunction> {
    let n = ints.n_orbitals();
    let dim = sector.dimension(n);
    if dim > opts.iterative_cap.max(opts.dense_cap) as u128 {
        return Err(Error::Resource(format!("sector dimension {dim} exceeds solver caps")));
    }
    let full = SectorBasis::enumerate(n, sector)?;
    let reference = sector.reference(n);
    let sub = SectorBasis::truncated(n, sector, reference, max_order)?;
    let (energy, v) = ground_in_basis(&SlaterCondon(ints), &sub, opts)?;
    let mut amplitudes = vec![0.0; full.len()];
    for (x, a) in sub.configs().iter().zip(v) {
        amplitudes[full.index_of(*x).expect("subset of the sector")] = a;
    }
    Ok(OracleWavefunction {
        basis: full,
        amplitudes,
        energy,
    })
}

/// `cisd_ground_state`: reference plus all singles and doubles.
pub fn cisd_ground_state(ints: &MolecularIntegrals, sector: SectorSpec, opts: &CiOptions) -> Result<OracleWavefunction> {
    truncated_ci(ints, sector, 2, opts)
}

/// Number of configurations within `max_order` excitations of a reference (for reporting).
pub fn truncated_dimension(n_orbitals: usize, sector: SectorSpec, max_order: usize) -> u128 {
    let n_spatial = (n_orbitals / 2) as u64;
    let (na, nb) = (sector.n_alpha as u64, sector.n_beta as u64);
    let mut total = 0;
    for ka in 0..=na.min(n_spatial - na) {
        for kb in 0..=nb.min(n_spatial - nb) {
            if (ka + kb) as usize <= max_order {
                total += binomial(na, ka) * binomial(n_spatial - na, ka) * binomial(nb, kb) * binomial(n_spatial - nb, kb);
            }
        }
    }
    total
}

/// Maps configurations to dense-vector indices for repeated lookups.
pub fn index_map(basis: &SectorBasis) -> HashMap<u64, usize> {
    basis.configs().iter().enumerate().map(|(i, x)| (x.bits(), i)).collect()
}
