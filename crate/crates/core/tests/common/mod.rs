//! Shared helpers: fixture paths, reference data and an operator-level
//! Hamiltonian built straight from the integrals.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use nqs::hamio::MolecularIntegrals;

pub const MOLECULES: [&str; 4] = ["h2", "lih", "beh2", "h2o"];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.fcidump"))
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Energies recorded by PySCF when the fixtures were generated.
pub struct Reference {
    pub e_hf: f64,
    pub e_fci: f64,
    pub e_cisd: f64,
    pub bond_length: f64,
}

pub fn reference(name: &str) -> Reference {
    let text = std::fs::read_to_string(fixtures_dir().join("pyscf_reference.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let e = &v[name];
    Reference {
        e_hf: e["e_hf"].as_f64().unwrap(),
        e_fci: e["e_fci"].as_f64().unwrap(),
        e_cisd: e["e_cisd"].as_f64().unwrap(),
        bond_length: e["bond_length_angstrom"].as_f64().unwrap(),
    }
}

/// `a_j |x⟩`: `None` if empty, else the new bits and the sign from the occupied modes below `j`.
fn annihilate(x: u64, j: usize) -> Option<(u64, f64)> {
    if x >> j & 1 == 0 {
        return None;
    }
    let below = (x & ((1u64 << j) - 1)).count_ones();
    Some((x ^ (1 << j), if below.is_multiple_of(2) { 1.0 } else { -1.0 }))
}

fn create(x: u64, j: usize) -> Option<(u64, f64)> {
    if x >> j & 1 == 1 {
        return None;
    }
    let below = (x & ((1u64 << j) - 1)).count_ones();
    Some((x | (1 << j), if below.is_multiple_of(2) { 1.0 } else { -1.0 }))
}

/// Apply `Π ops` right to left; `true` is a creation operator.
fn apply_ops(x: u64, ops: &[(bool, usize)]) -> Option<(u64, f64)> {
    let mut s = 1.0;
    let mut y = x;
    for &(dag, j) in ops.iter().rev() {
        let (z, t) = if dag { create(y, j)? } else { annihilate(y, j)? };
        y = z;
        s *= t;
    }
    Some((y, s))
}

/// `H|x⟩` as a map of configurations to coefficients, from
/// `E_nuc + Σ h_pq a†_pσ a_qσ + ½ Σ (pq|rs) a†_pσ a†_rτ a_sτ a_qσ`
/// with spin orbital `2p + σ`.
pub fn apply_hamiltonian(ints: &MolecularIntegrals, x: u64) -> HashMap<u64, f64> {
    let n = ints.n_spatial();
    let mut out: HashMap<u64, f64> = HashMap::new();
    *out.entry(x).or_default() += ints.e_nuc();
    for p in 0..n {
        for q in 0..n {
            let h = ints.one_body(p, q).unwrap();
            if h == 0.0 {
                continue;
            }
            for sg in 0..2 {
                if let Some((y, s)) = apply_ops(x, &[(true, 2 * p + sg), (false, 2 * q + sg)]) {
                    *out.entry(y).or_default() += h * s;
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for t in 0..n {
                    let g = ints.two_body(p, q, r, t).unwrap();
                    if g == 0.0 {
                        continue;
                    }
                    for sg in 0..2 {
                        for tau in 0..2 {
                            let ops = [(true, 2 * p + sg), (true, 2 * r + tau), (false, 2 * t + tau), (false, 2 * q + sg)];
                            if let Some((y, s)) = apply_ops(x, &ops) {
                                *out.entry(y).or_default() += 0.5 * g * s;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Dense matrix `⟨y|H|x⟩` over the given configurations (bit patterns).
pub fn operator_matrix(ints: &MolecularIntegrals, basis: &[u64]) -> Vec<Vec<f64>> {
    let index: HashMap<u64, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let mut m = vec![vec![0.0; basis.len()]; basis.len()];
    for (j, &x) in basis.iter().enumerate() {
        for (y, v) in apply_hamiltonian(ints, x) {
            if let Some(&i) = index.get(&y) {
                m[i][j] += v;
            }
        }
    }
    m
}

/// All bit patterns over `2n` spin orbitals with the given alpha/beta counts (alpha on even bits).
pub fn sector_bits(n_spatial: usize, n_alpha: u32, n_beta: u32) -> Vec<u64> {
    let alpha = 0x5555_5555_5555_5555u64;
    (0u64..1 << (2 * n_spatial))
        .filter(|b| (b & alpha).count_ones() == n_alpha && (b & !alpha).count_ones() == n_beta)
        .collect()
}
