//! Exact and CISD ground-state energies for every bundled FCIDUMP.
//!
//! cargo run --release --example fci_oracle [fixtures-dir]

use std::path::PathBuf;

use nqs::oracle::{fixtures, CiOptions};

fn main() -> nqs::error::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    println!("{:<14} {:>4} {:>6} {:>6} {:>16} {:>16} {:>16}", "name", "N_o", "N_f", "N_h", "E_ref", "E_CISD", "E_FCI");
    for path in fixtures::fcidump_files(&dir)? {
        let e = fixtures::fixture_entry(&path, &CiOptions::default())?;
        println!(
            "{:<14} {:>4} {:>6} {:>6} {:>16.10} {:>16.10} {:>16.10}",
            e.name, e.n_orbitals, e.dimension, e.n_pauli_terms, e.e_reference, e.e_cisd, e.e_fci
        );
    }
    Ok(())
}
