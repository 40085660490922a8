//! Qubit Hamiltonian: Jordan–Wigner strings merged and grouped by flip pattern.
//!
//! Every Pauli term with the same `x_mask` maps a configuration `x` to the same
//! `x ⊕ x_mask`, so the terms are stored contiguously per coupling group and a
//! connected-configuration query costs one pass over the term list with one
//! output entry per group.

pub mod fermion;
pub mod pauli;

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::{Configuration, SectorSpec};
use crate::error::{Error, Result};
use crate::hamio::MolecularIntegrals;
use crate::oracle::SectorBasis;

pub use fermion::{build_fermion_terms, FermionTerm};
pub use pauli::{apply_pauli, jordan_wigner, PauliSum, PauliTerm};

/// Merged Pauli weights below this magnitude are dropped.
pub const DEFAULT_PRUNE_EPS: f64 = 1e-12;

/// Summed group elements below this magnitude count as exact cancellation.
pub const ELEMENT_EPS: f64 = 1e-12;

/// Largest sector dimension [`QubitHamiltonian::to_dense`] will build by default.
pub const DEFAULT_DENSE_CAP: usize = 4000;

/// All terms sharing one `x_mask`.
#[derive(Clone, Debug)]
pub struct CouplingGroup {
    pub x_mask: u64,
    start: usize,
    end: usize,
}

impl CouplingGroup {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn term_indices(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

#[derive(Clone, Debug)]
pub struct QubitHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
    groups: Vec<CouplingGroup>,
    group_of_mask: HashMap<u64, usize>,
    // per-term real prefactor weight·i^phase_exp (phase_exp even) and its imaginary part
    re: Vec<f64>,
    im: Vec<f64>,
}

impl QubitHamiltonian {
    /// Build from Pauli terms: like strings are merged, tiny weights pruned, and the
    /// survivors grouped by `x_mask` (diagonal group first, then ascending mask).
    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = PauliTerm>, prune_eps: f64) -> Result<Self> {
        let mut sum = PauliSum::new();
        for t in terms {
            if n_qubits < 64 && (t.x_mask | t.z_mask) >> n_qubits != 0 {
                return Err(Error::Argument(format!("term {} exceeds {n_qubits} qubits", t.label())));
            }
            sum.add(t.x_mask, t.z_mask, t.coefficient());
        }
        let merged = sum.into_hermitian_terms(prune_eps, 1e-9)?;
        Ok(Self::grouped(n_qubits, merged))
    }

    fn grouped(n_qubits: usize, mut terms: Vec<PauliTerm>) -> Self {
        terms.sort_by(|a, b| {
            (a.x_mask, a.z_mask)
                .cmp(&(b.x_mask, b.z_mask))
        });
        let mut groups: Vec<CouplingGroup> = Vec::new();
        for (i, t) in terms.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if g.x_mask == t.x_mask => g.end = i + 1,
                _ => groups.push(CouplingGroup {
                    x_mask: t.x_mask,
                    start: i,
                    end: i + 1,
                }),
            }
        }
        let group_of_mask = groups.iter().enumerate().map(|(i, g)| (g.x_mask, i)).collect();
        let (re, im) = terms
            .iter()
            .map(|t| {
                let c = t.coefficient();
                (c.re, c.im)
            })
            .unzip();
        Self {
            n_qubits,
            terms,
            groups,
            group_of_mask,
            re,
            im,
        }
    }

    /// Compile integrals: spin expansion, Jordan–Wigner, merge, prune, group.
    pub fn assemble(ints: &MolecularIntegrals) -> Result<Self> {
        Self::assemble_with(ints, DEFAULT_PRUNE_EPS)
    }

    pub fn assemble_with(ints: &MolecularIntegrals, prune_eps: f64) -> Result<Self> {
        let n = ints.n_orbitals();
        let mut sum = PauliSum::new();
        for term in build_fermion_terms(ints) {
            sum.extend(&jordan_wigner(&term, n)?);
        }
        let terms = sum.into_hermitian_terms(prune_eps, 1e-9)?;
        Ok(Self::grouped(n, terms))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of Pauli strings, including the identity.
    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn groups(&self) -> &[CouplingGroup] {
        &self.groups
    }

    pub fn group(&self, x_mask: u64) -> Option<&CouplingGroup> {
        self.group_of_mask.get(&x_mask).map(|&i| &self.groups[i])
    }

    /// Weight of the identity string.
    pub fn constant(&self) -> f64 {
        self.group(0)
            .and_then(|g| self.terms[g.term_indices()].iter().find(|t| t.z_mask == 0))
            .map_or(0.0, |t| t.weight)
    }

    /// `connected`: all `(x', ⟨x'|H|x⟩)` with nonzero element, one per coupling group.
    pub fn connected(&self, x: Configuration) -> Result<Vec<(Configuration, f64)>> {
        let mut out = Vec::new();
        self.connected_into(x, &mut out)?;
        Ok(out)
    }

    /// Same as [`connected`](Self::connected) but appends into a reusable buffer.
    pub fn connected_into(&self, x: Configuration, out: &mut Vec<(Configuration, f64)>) -> Result<()> {
        if x.n_orbitals() != self.n_qubits {
            return Err(Error::Argument(format!(
                "configuration width {} does not match {} qubits",
                x.n_orbitals(),
                self.n_qubits
            )));
        }
        let bits = x.bits();
        for g in &self.groups {
            let mut re = 0.0;
            let mut im = 0.0;
            for k in g.start..g.end {
                let odd = (self.terms[k].z_mask & bits).count_ones() & 1;
                if odd == 1 {
                    re -= self.re[k];
                    im -= self.im[k];
                } else {
                    re += self.re[k];
                    im += self.im[k];
                }
            }
            if im.abs() > ELEMENT_EPS {
                return Err(Error::Internal(format!(
                    "imaginary matrix element {im:e} for flip mask {:#x}",
                    g.x_mask
                )));
            }
            if re.abs() > ELEMENT_EPS {
                out.push((Configuration::from_raw(bits ^ g.x_mask, self.n_qubits), re));
            }
        }
        Ok(())
    }

    /// Dense sector matrix with the default dimension cap.
    pub fn to_dense(&self, sector: SectorSpec) -> Result<(SectorBasis, DMatrix<f64>)> {
        self.to_dense_capped(sector, DEFAULT_DENSE_CAP)
    }

    pub fn to_dense_capped(&self, sector: SectorSpec, cap: usize) -> Result<(SectorBasis, DMatrix<f64>)> {
        let dim = sector.dimension(self.n_qubits);
        if dim > cap as u128 {
            return Err(Error::Resource(format!("sector dimension {dim} exceeds dense cap {cap}")));
        }
        let basis = SectorBasis::enumerate(self.n_qubits, sector)?;
        let n = basis.len();
        let mut m = DMatrix::zeros(n, n);
        let mut row = Vec::new();
        for (b, &x) in basis.configs().iter().enumerate() {
            row.clear();
            self.connected_into(x, &mut row)?;
            for &(y, e) in &row {
                let a = basis.index_of(y).ok_or_else(|| {
                    Error::Internal(format!("{x} couples to {y} outside the sector"))
                })?;
                m[(a, b)] = e;
            }
        }
        Ok((basis, m))
    }

    /// Apply `H` to a dense vector over a sector basis.
    pub fn apply_sector(&self, basis: &SectorBasis, v: &[f64], out: &mut [f64]) -> Result<()> {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut row = Vec::new();
        for (b, &x) in basis.configs().iter().enumerate() {
            if v[b] == 0.0 {
                continue;
            }
            row.clear();
            self.connected_into(x, &mut row)?;
            for &(y, e) in &row {
                if let Some(a) = basis.index_of(y) {
                    out[a] += e * v[b];
                }
            }
        }
        Ok(())
    }

    /// Diagnostic listing `weight  pauli-string`, sorted by |weight| descending.
    pub fn dump(&self) -> String {
        let mut terms = self.terms.clone();
        terms.sort_by(|a, b| {
            b.weight
                .abs()
                .total_cmp(&a.weight.abs())
                .then((a.x_mask, a.z_mask).cmp(&(b.x_mask, b.z_mask)))
        });
        let mut out = String::new();
        for t in terms {
            let _ = writeln!(out, "{:.16e}  {}", t.weight, t.label());
        }
        out
    }

    /// Complex matrix element sum for one group, used by tests that check the
    /// imaginary residual directly.
    pub fn group_element(&self, g: &CouplingGroup, x: Configuration) -> Complex64 {
        self.terms[g.term_indices()]
            .iter()
            .map(|t| t.apply(x).1)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cancellation_removes_term() {
        let h = QubitHamiltonian::from_terms(
            2,
            [PauliTerm::hermitian(0.3, 0, 1), PauliTerm::hermitian(-0.3, 0, 1), PauliTerm::identity(1.0)],
            DEFAULT_PRUNE_EPS,
        )
        .unwrap();
        assert_eq!(h.n_terms(), 1);
        assert_eq!(h.constant(), 1.0);
    }

    #[test]
    fn diagonal_only() {
        let h = QubitHamiltonian::from_terms(
            3,
            [PauliTerm::hermitian(0.5, 0, 0b001), PauliTerm::hermitian(-0.25, 0, 0b110), PauliTerm::identity(2.0)],
            DEFAULT_PRUNE_EPS,
        )
        .unwrap();
        let x: Configuration = "110".parse().unwrap();
        let c = h.connected(x).unwrap();
        // Z0 sees orbital 0 occupied; Z1 Z2 sees odd parity
        let expected = 2.0 - 0.5 + 0.25;
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].0, x);
        assert!((c[0].1 - expected).abs() < 1e-15);
    }

    #[test]
    fn identity_dense() {
        let h = QubitHamiltonian::from_terms(4, [PauliTerm::identity(-1.25)], 0.0).unwrap();
        let (basis, m) = h.to_dense(SectorSpec::new(1, 1)).unwrap();
        assert_eq!(basis.len(), 4);
        assert_eq!(m, DMatrix::identity(4, 4) * -1.25);
    }

    #[test]
    fn dense_cap() {
        let h = QubitHamiltonian::from_terms(14, [PauliTerm::identity(1.0)], 0.0).unwrap();
        assert!(matches!(h.to_dense_capped(SectorSpec::new(3, 3), 100), Err(Error::Resource(_))));
    }

    #[test]
    fn width_mismatch() {
        let h = QubitHamiltonian::from_terms(4, [PauliTerm::identity(1.0)], 0.0).unwrap();
        assert!(h.connected("10".parse().unwrap()).is_err());
    }

    #[test]
    fn dump_sorted() {
        let h = QubitHamiltonian::from_terms(
            2,
            [PauliTerm::hermitian(-0.5, 0, 1), PauliTerm::identity(0.1), PauliTerm::hermitian(0.2, 3, 3)],
            0.0,
        )
        .unwrap();
        let dump = h.dump();
        let lines: Vec<&str> = dump.lines().collect();
        assert!(lines[0].ends_with("  Z0"));
        assert!(lines[1].ends_with("  Y0 Y1"));
        assert!(lines[2].ends_with("  I"));
    }
}
