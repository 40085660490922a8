//! Second-quantized electronic Hamiltonian over interleaved spin orbitals.

use std::collections::BTreeMap;

use crate::hamio::MolecularIntegrals;

/// A normal-ordered product of ladder operators with a real coefficient.
#[derive(Clone, Debug, PartialEq)]
pub enum FermionTerm {
    /// The constant (nuclear repulsion).
    Constant(f64),
    /// `coeff * a†_p a_q`.
    OneBody { coeff: f64, p: usize, q: usize },
    /// `coeff * a†_p a†_q a_r a_s`, with `p < q` and `r > s`.
    TwoBody {
        coeff: f64,
        p: usize,
        q: usize,
        r: usize,
        s: usize,
    },
}

impl FermionTerm {
    pub fn coeff(&self) -> f64 {
        match *self {
            FermionTerm::Constant(c) => c,
            FermionTerm::OneBody { coeff, .. } | FermionTerm::TwoBody { coeff, .. } => coeff,
        }
    }

    /// Largest spin-orbital index, if any.
    pub fn max_index(&self) -> Option<usize> {
        match *self {
            FermionTerm::Constant(_) => None,
            FermionTerm::OneBody { p, q, .. } => Some(p.max(q)),
            FermionTerm::TwoBody { p, q, r, s, .. } => Some(p.max(q).max(r).max(s)),
        }
    }
}

/// Expand spatial integrals to spin-orbital ladder terms.
///
/// `H = E_nuc + Σ h(p,q) a†_pσ a_qσ + ½ Σ (pq|rs) a†_pσ a†_rτ a_sτ a_qσ`.
/// Two-body products are brought to the form `a†_i a†_j a_k a_l` with `i < j`,
/// `k > l` and equal operator strings are merged; products that vanish by Pauli
/// exclusion are dropped.
pub fn build_fermion_terms(ints: &MolecularIntegrals) -> Vec<FermionTerm> {
    let n = ints.n_spatial();
    let mut terms = Vec::new();
    terms.push(FermionTerm::Constant(ints.e_nuc()));

    for p in 0..n {
        for q in 0..n {
            let h = ints.h(p, q);
            if h == 0.0 {
                continue;
            }
            for sigma in 0..2 {
                terms.push(FermionTerm::OneBody {
                    coeff: h,
                    p: 2 * p + sigma,
                    q: 2 * q + sigma,
                });
            }
        }
    }

    let mut two: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let g = ints.g(p, q, r, s);
                    if g == 0.0 {
                        continue;
                    }
                    for sigma in 0..2 {
                        for tau in 0..2 {
                            // a†_{pσ} a†_{rτ} a_{sτ} a_{qσ}
                            let c1 = 2 * p + sigma;
                            let c2 = 2 * r + tau;
                            let a1 = 2 * s + tau;
                            let a2 = 2 * q + sigma;
                            if c1 == c2 || a1 == a2 {
                                continue;
                            }
                            let mut sign = 1.0;
                            let (i, j) = if c1 < c2 {
                                (c1, c2)
                            } else {
                                sign = -sign;
                                (c2, c1)
                            };
                            let (k, l) = if a1 > a2 {
                                (a1, a2)
                            } else {
                                sign = -sign;
                                (a2, a1)
                            };
                            *two.entry((i, j, k, l)).or_insert(0.0) += 0.5 * sign * g;
                        }
                    }
                }
            }
        }
    }
    terms.extend(
        two.into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|((p, q, r, s), coeff)| FermionTerm::TwoBody { coeff, p, q, r, s }),
    );
    terms
}
