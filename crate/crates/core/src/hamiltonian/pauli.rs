//! Pauli strings in `(x_mask, z_mask)` form and the Jordan–Wigner map.
//!
//! A term is `weight · i^phase_exp · X^x_mask · Z^z_mask`, where the Z factor
//! acts first. A `Y` on qubit `j` is `i·X_j·Z_j`, so a Hermitian Pauli string
//! with `k` Y factors has `phase_exp = k mod 4`.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::hamiltonian::fermion::FermionTerm;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTerm {
    pub weight: f64,
    pub x_mask: u64,
    pub z_mask: u64,
    pub phase_exp: u8,
}

#[inline]
pub(crate) fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl PauliTerm {
    /// The Hermitian Pauli string with the given masks; `phase_exp` counts its Y factors.
    pub fn hermitian(weight: f64, x_mask: u64, z_mask: u64) -> Self {
        Self {
            weight,
            x_mask,
            z_mask,
            phase_exp: ((x_mask & z_mask).count_ones() % 4) as u8,
        }
    }

    pub fn identity(weight: f64) -> Self {
        Self::hermitian(weight, 0, 0)
    }

    /// The complex prefactor `weight · i^phase_exp`.
    pub fn coefficient(&self) -> Complex64 {
        i_pow(self.phase_exp) * self.weight
    }

    /// `P|x⟩ = amplitude · |x ⊕ x_mask⟩`.
    #[inline]
    pub fn apply(&self, x: Configuration) -> (Configuration, Complex64) {
        let parity = (self.z_mask & x.bits()).count_ones() & 1;
        let sign = if parity == 1 { -1.0 } else { 1.0 };
        (
            Configuration::from_raw(x.bits() ^ self.x_mask, x.n_orbitals()),
            self.coefficient() * sign,
        )
    }

    /// Label such as `X0 Y1 Z3`; `I` for the identity.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        let top = 64 - (self.x_mask | self.z_mask).leading_zeros() as usize;
        for q in 0..top {
            let op = match (self.x_mask >> q & 1, self.z_mask >> q & 1) {
                (0, 0) => continue,
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            };
            parts.push(format!("{op}{q}"));
        }
        if parts.is_empty() {
            "I".to_string()
        } else {
            parts.join(" ")
        }
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}  {}", self.weight, self.label())
    }
}

/// `apply_pauli`: action of one Pauli term on a basis configuration.
pub fn apply_pauli(term: &PauliTerm, x: Configuration) -> Result<(Configuration, Complex64)> {
    let n = x.n_orbitals();
    if n < 64 && (term.x_mask | term.z_mask) >> n != 0 {
        return Err(Error::Argument(format!(
            "Pauli term {} acts outside {n} qubits",
            term.label()
        )));
    }
    Ok(term.apply(x))
}

/// A linear combination of `X^x Z^z` monomials with complex coefficients.
#[derive(Clone, Debug, Default)]
pub struct PauliSum {
    terms: HashMap<(u64, u64), Complex64>,
}

impl PauliSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scalar(c: f64) -> Self {
        let mut s = Self::new();
        s.add(0, 0, Complex64::new(c, 0.0));
        s
    }

    pub fn add(&mut self, x: u64, z: u64, c: Complex64) {
        *self.terms.entry((x, z)).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn extend(&mut self, other: &PauliSum) {
        for (&(x, z), &c) in &other.terms {
            self.add(x, z, c);
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64, Complex64)> + '_ {
        self.terms.iter().map(|(&(x, z), &c)| (x, z, c))
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        let mut out = PauliSum::new();
        for (&(xa, za), &ca) in &self.terms {
            for (&(xb, zb), &cb) in &other.terms {
                // Z^za X^xb = (-1)^{|za & xb|} X^xb Z^za
                let sign = if (za & xb).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
                out.add(xa ^ xb, za ^ zb, ca * cb * sign);
            }
        }
        out
    }

    /// Convert to Hermitian Pauli strings, dropping weights with magnitude below `prune_eps`.
    ///
    /// Fails if a monomial's coefficient is not real after removing its Y phase,
    /// which means the operator was not Hermitian.
    pub fn into_hermitian_terms(self, prune_eps: f64, herm_tol: f64) -> Result<Vec<PauliTerm>> {
        let mut out = Vec::with_capacity(self.terms.len());
        for ((x, z), c) in self.terms {
            let term = PauliTerm::hermitian(1.0, x, z);
            let w = c / i_pow(term.phase_exp);
            if w.im.abs() > herm_tol {
                return Err(Error::Internal(format!(
                    "non-Hermitian residual {:e} on {}",
                    w.im,
                    term.label()
                )));
            }
            if w.re.abs() >= prune_eps && w.re != 0.0 {
                out.push(PauliTerm { weight: w.re, ..term });
            }
        }
        Ok(out)
    }
}

fn lower_z(j: usize) -> u64 {
    if j == 0 {
        0
    } else {
        u64::MAX >> (64 - j)
    }
}

/// `a†_j = ½(X_j − iY_j) Z_{j-1}…Z_0 = ½(X_j + X_j Z_j) Z_{<j}`.
pub fn creation(j: usize) -> PauliSum {
    let mut s = PauliSum::new();
    let x = 1u64 << j;
    s.add(x, lower_z(j), Complex64::new(0.5, 0.0));
    s.add(x, lower_z(j) | x, Complex64::new(0.5, 0.0));
    s
}

/// `a_j = ½(X_j + iY_j) Z_{j-1}…Z_0 = ½(X_j − X_j Z_j) Z_{<j}`.
pub fn annihilation(j: usize) -> PauliSum {
    let mut s = PauliSum::new();
    let x = 1u64 << j;
    s.add(x, lower_z(j), Complex64::new(0.5, 0.0));
    s.add(x, lower_z(j) | x, Complex64::new(-0.5, 0.0));
    s
}

/// Jordan–Wigner image of one fermionic term on `n_qubits` qubits.
///
/// The result is the raw monomial expansion; a non-Hermitian term (say `a†_0 a_1`
/// alone) keeps its imaginary monomials, which cancel only once its conjugate
/// partner is added.
pub fn jordan_wigner(term: &FermionTerm, n_qubits: usize) -> Result<PauliSum> {
    if let Some(m) = term.max_index() {
        if m >= n_qubits {
            return Err(Error::Argument(format!(
                "spin-orbital index {m} not below {n_qubits}"
            )));
        }
    }
    Ok(match *term {
        FermionTerm::Constant(c) => PauliSum::scalar(c),
        FermionTerm::OneBody { coeff, p, q } => {
            let mut s = creation(p).mul(&annihilation(q));
            scale(&mut s, coeff);
            s
        }
        FermionTerm::TwoBody { coeff, p, q, r, s } => {
            let mut out = creation(p)
                .mul(&creation(q))
                .mul(&annihilation(r))
                .mul(&annihilation(s));
            scale(&mut out, coeff);
            out
        }
    })
}

fn scale(s: &mut PauliSum, c: f64) {
    for v in s.terms.values_mut() {
        *v *= c;
    }
}
