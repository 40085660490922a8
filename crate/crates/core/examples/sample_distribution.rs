//! Batched autoregressive sampling against the exact |Ψ|² of a small model.
//!
//! cargo run --release --example sample_distribution -- [n_samples] [seed]

use nqs::ansatz::{Ansatz, AnsatzConfig};
use nqs::config::SectorSpec;
use nqs::oracle::SectorBasis;
use nqs::sampler::sample_bas;
use nqs::vmc::{exact_weights, NeuralState};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_chacha::ChaCha8Rng;

fn main() -> nqs::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n_samples: u64 = args.first().map_or(100_000, |s| s.parse().expect("n_samples"));
    let seed: u64 = args.get(1).map_or(7, |s| s.parse().expect("seed"));

    let sector = SectorSpec::new(2, 2);
    let mut cfg = AnsatzConfig::new(8).with_seed(seed);
    cfg.d_model = 16;
    cfg.n_heads = 2;
    let mut ansatz = Ansatz::init(cfg)?;
    // A fresh model has a zero output head, i.e. a uniform distribution; perturb it.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = ansatz.params().to_vec();
    for v in p.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v += 0.03 * z;
    }
    ansatz.set_params(p)?;

    let basis = SectorBasis::enumerate(8, sector)?;
    let exact = exact_weights(&NeuralState::new(&ansatz, sector), &basis)?;
    let batch = sample_bas(&ansatz, sector, n_samples, &mut rng, None)?;
    println!("N_s = {}  N_u = {}  sector dimension = {}", batch.total(), batch.unique(), basis.len());
    println!("{:>10} {:>10} {:>10}", "config", "exact", "sampled");
    let mut tv = 0.0;
    for (x, &w) in basis.configs().iter().zip(&exact) {
        let f = batch.count(*x) as f64 / batch.total() as f64;
        tv += (f - w).abs();
        if w > 0.03 {
            println!("{x:>10} {w:>10.4} {f:>10.4}");
        }
    }
    println!("total-variation distance: {:.4}", 0.5 * tv);
    Ok(())
}
