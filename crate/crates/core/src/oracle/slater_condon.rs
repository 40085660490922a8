//! Determinant matrix elements straight from the integrals.
//!
//! Shares nothing with the Pauli path except the bit layout of a configuration,
//! so the two constructions cross-check each other.

use crate::config::Configuration;
use crate::hamio::MolecularIntegrals;

/// Spin-orbital one-electron integral.
#[inline]
fn h_so(ints: &MolecularIntegrals, p: usize, q: usize) -> f64 {
    if p % 2 != q % 2 {
        0.0
    } else {
        ints.h(p / 2, q / 2)
    }
}

/// Physicists' `⟨pq|rs⟩ = (pr|qs)` over spin orbitals.
#[inline]
fn phys(ints: &MolecularIntegrals, p: usize, q: usize, r: usize, s: usize) -> f64 {
    if p % 2 != r % 2 || q % 2 != s % 2 {
        0.0
    } else {
        ints.g(p / 2, r / 2, q / 2, s / 2)
    }
}

/// Antisymmetrized `⟨pq||rs⟩`.
#[inline]
fn anti(ints: &MolecularIntegrals, p: usize, q: usize, r: usize, s: usize) -> f64 {
    phys(ints, p, q, r, s) - phys(ints, p, q, s, r)
}

#[inline]
fn parity_below(bits: u64, i: usize) -> f64 {
    let below = if i == 0 { 0 } else { u64::MAX >> (64 - i) };
    if (bits & below).count_ones() & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Sign of `a†_a a_i |x⟩` and the resulting bits (`i` occupied, `a` empty).
#[inline]
fn single_sign(bits: u64, i: usize, a: usize) -> (u64, f64) {
    let s1 = parity_below(bits, i);
    let b1 = bits & !(1 << i);
    let s2 = parity_below(b1, a);
    (b1 | 1 << a, s1 * s2)
}

fn occupied(bits: u64) -> impl Iterator<Item = usize> {
    let mut b = bits;
    std::iter::from_fn(move || {
        if b == 0 {
            None
        } else {
            let i = b.trailing_zeros() as usize;
            b &= b - 1;
            Some(i)
        }
    })
}

/// `⟨x|H|x⟩`.
pub fn diagonal(ints: &MolecularIntegrals, x: u64) -> f64 {
    let occ: Vec<usize> = occupied(x).collect();
    let mut e = ints.e_nuc();
    for (k, &i) in occ.iter().enumerate() {
        e += h_so(ints, i, i);
        for &j in &occ[..k] {
            e += anti(ints, i, j, i, j);
        }
    }
    e
}

/// `⟨x'|H|x⟩` where `x' = a†_a a_i x` up to sign.
fn single(ints: &MolecularIntegrals, x: u64, i: usize, a: usize) -> f64 {
    let (_, sign) = single_sign(x, i, a);
    let mut v = h_so(ints, a, i);
    for j in occupied(x) {
        if j != i {
            v += anti(ints, a, j, i, j);
        }
    }
    sign * v
}

/// `⟨x'|H|x⟩` where `x' = a†_a a†_b a_j a_i x` up to sign.
fn double(ints: &MolecularIntegrals, x: u64, i: usize, j: usize, a: usize, b: usize) -> f64 {
    // apply a_i, a_j, a†_b, a†_a in turn
    let mut bits = x;
    let mut sign = parity_below(bits, i);
    bits &= !(1 << i);
    sign *= parity_below(bits, j);
    bits &= !(1 << j);
    sign *= parity_below(bits, b);
    bits |= 1 << b;
    sign *= parity_below(bits, a);
    sign * anti(ints, a, b, i, j)
}

/// `slater_condon`: `⟨x'|H|x⟩` by excitation level; zero beyond doubles.
pub fn slater_condon(x_prime: Configuration, x: Configuration, ints: &MolecularIntegrals) -> f64 {
    element(ints, x_prime.bits(), x.bits())
}

pub(crate) fn element(ints: &MolecularIntegrals, xp: u64, x: u64) -> f64 {
    let diff = xp ^ x;
    match diff.count_ones() {
        0 => diagonal(ints, x),
        2 => {
            let i = (x & diff).trailing_zeros() as usize;
            let a = (xp & diff).trailing_zeros() as usize;
            if (x & diff).count_ones() != 1 {
                return 0.0;
            }
            single(ints, x, i, a)
        }
        4 => {
            let removed = x & diff;
            let added = xp & diff;
            if removed.count_ones() != 2 {
                return 0.0;
            }
            let mut r = occupied(removed);
            let (i, j) = (r.next().unwrap(), r.next().unwrap());
            let mut ad = occupied(added);
            let (a, b) = (ad.next().unwrap(), ad.next().unwrap());
            double(ints, x, i, j, a, b)
        }
        _ => 0.0,
    }
}

/// All determinants coupled to `x` (diagonal included) with their elements,
/// generated by enumerating spin-conserving single and double excitations.
pub fn excitations(ints: &MolecularIntegrals, x: Configuration) -> Vec<(Configuration, f64)> {
    let n = x.n_orbitals();
    let bits = x.bits();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let occ: Vec<usize> = occupied(bits).collect();
    let virt: Vec<usize> = occupied(!bits & full).collect();
    let mut out = vec![(x, diagonal(ints, bits))];
    let mk = |b: u64| Configuration::from_raw(b, n);

    for &i in &occ {
        for &a in &virt {
            if i % 2 != a % 2 {
                continue;
            }
            let v = single(ints, bits, i, a);
            if v != 0.0 {
                out.push((mk(bits & !(1 << i) | 1 << a), v));
            }
        }
    }
    for (ki, &i) in occ.iter().enumerate() {
        for &j in &occ[ki + 1..] {
            for (ka, &a) in virt.iter().enumerate() {
                for &b in &virt[ka + 1..] {
                    // conserve the number of electrons per spin channel
                    let spin_out = (i % 2) + (j % 2);
                    let spin_in = (a % 2) + (b % 2);
                    if spin_out != spin_in {
                        continue;
                    }
                    let v = double(ints, bits, i, j, a, b);
                    if v != 0.0 {
                        out.push((mk(bits & !(1 << i) & !(1 << j) | 1 << a | 1 << b), v));
                    }
                }
            }
        }
    }
    out
}
