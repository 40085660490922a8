//! Jordan–Wigner qubit Hamiltonian: term counts, coupling groups and the
//! connected configurations of the reference determinant.
//!
//! cargo run --release --example pauli_hamiltonian -- [fixture]

use nqs::hamiltonian::QubitHamiltonian;
use nqs::hamio::MolecularIntegrals;
use nqs::oracle::slater_condon;

fn main() -> nqs::error::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "h2".into());
    let ints = MolecularIntegrals::read(format!("{}/fixtures/{name}.fcidump", env!("CARGO_MANIFEST_DIR")))?;
    let h = QubitHamiltonian::assemble(&ints)?;
    println!("{name}: {} qubits, N_h = {} Pauli strings in {} coupling groups", h.n_qubits(), h.n_terms(), h.groups().len());
    println!("identity coefficient: {:.10}", h.constant());
    if h.n_terms() <= 20 {
        for t in h.terms() {
            println!("  {t}");
        }
    }

    let x = ints.sector().reference(ints.n_orbitals());
    let row = h.connected(x)?;
    println!("reference {x} couples to {} configurations", row.len());
    let mut worst: f64 = 0.0;
    for (y, e) in &row {
        worst = worst.max((e - slater_condon(*y, x, &ints)).abs());
    }
    for (y, e) in row.iter().take(8) {
        println!("  <{y}|H|{x}> = {e:+.10}");
    }
    println!("max deviation from Slater–Condon rules: {worst:.2e}");
    Ok(())
}
