//! Supervised fit of the ansatz to the CISD wavefunction, reporting fidelity
//! and the variational energy before and after.
//!
//! cargo run --release --example pretrain_cisd -- [fixture] [epochs]

use nqs::ansatz::{Ansatz, AnsatzConfig};
use nqs::oracle::{pretrain, PretrainOptions};
use nqs::vmc::{exact_energy, Problem};

fn main() -> nqs::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().cloned().unwrap_or_else(|| "lih".into());
    let epochs: usize = args.get(1).map_or(300, |s| s.parse().expect("epochs"));
    let problem = Problem::load(format!("{}/fixtures/{name}.fcidump", env!("CARGO_MANIFEST_DIR")), None)?;
    let basis = problem.basis()?;
    let cisd = problem.cisd()?;
    let fci = problem.fci()?;

    let mut ansatz = Ansatz::init(AnsatzConfig::new(problem.n_orbitals()))?;
    let e0 = exact_energy(&problem.hamiltonian, &ansatz, &basis)?;
    let opts = PretrainOptions {
        epochs,
        ..PretrainOptions::default()
    };
    let report = pretrain(&mut ansatz, &cisd, opts)?;
    for (epoch, f) in report.fidelity.iter().step_by(5) {
        println!("epoch {epoch:>4}  fidelity {f:.6}");
    }
    let e1 = exact_energy(&problem.hamiltonian, &ansatz, &basis)?;
    println!("E_CISD = {:.8}  E_FCI = {:.8}", cisd.energy, fci.energy);
    println!("variational energy: {e0:.8} before, {e1:.8} after ({:.2e} above FCI)", e1 - fci.energy);
    println!("final fidelity {:.6}", report.final_fidelity);
    Ok(())
}
