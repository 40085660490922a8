//! Train the ansatz on one FCIDUMP and report the error against FCI.
//!
//! cargo run --release --example train_molecule -- [fixture] [iters] [samples] [seed] [lr] [sampler] [pretrain]

use nqs::ansatz::AnsatzConfig;
use nqs::vmc::{run_vmc, AdamConfig, Problem, SamplerKind, TrainConfig};

fn main() -> nqs::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let name = arg(0, "lih");
    let path = format!("{}/fixtures/{name}.fcidump", env!("CARGO_MANIFEST_DIR"));
    let problem = Problem::load(&path, None)?;
    let fci = problem.fci()?;
    let iters: usize = arg(1, "2000").parse().unwrap();
    let seed: u64 = arg(3, "0").parse().unwrap();
    let lr: f64 = arg(4, "1e-3").parse().unwrap();
    let cfg = TrainConfig {
        n_samples: arg(2, "100000").parse().unwrap(),
        max_iters: iters,
        seed,
        adam: AdamConfig {
            lr,
            lr_final: lr / 10.0,
            decay_steps: iters as u64,
            ..AdamConfig::default()
        },
        sampler: if arg(5, "bas") == "mcmc" { SamplerKind::Mcmc } else { SamplerKind::Bas },
        pretrain: arg(6, "none").parse()?,
        reference_energy: Some(fci.energy),
        stop_tol: Some(1e-3),
        ..TrainConfig::default()
    };
    let ansatz = AnsatzConfig::new(problem.n_orbitals()).with_seed(seed);
    let t0 = std::time::Instant::now();
    let res = run_vmc(&problem, &ansatz, &cfg, &mut |r| {
        if let Some(e) = r.exact_energy {
            if r.iteration % 100 == 0 {
                println!(
                    "{:>6}  E = {:.8}  exact = {:.8}  ΔE = {:.2e}  N_u = {}  {:.1} ms",
                    r.iteration,
                    r.energy,
                    e,
                    e - fci.energy,
                    r.n_unique,
                    r.wall_ms
                );
            }
        }
    })?;
    if let Some(p) = &res.pretrain {
        println!("pretrain fidelity {:.6}", p.final_fidelity);
    }
    println!(
        "{name}: E = {:.8}  E_FCI = {:.8}  ΔE = {:.2e}  iterations to 1.6e-3: {:?}  stop: {:?}  ({:.1} s)",
        res.final_energy,
        fci.energy,
        res.final_energy - fci.energy,
        res.iterations_to_target,
        res.stop_reason,
        t0.elapsed().as_secs_f64()
    );
    Ok(())
}
