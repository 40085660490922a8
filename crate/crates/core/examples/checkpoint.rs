//! Save a model with its RNG position, reload it, and confirm the reloaded
//! model and stream continue identically.
//!
//! cargo run --release --example checkpoint

use nqs::ansatz::{Ansatz, AnsatzConfig, Checkpoint, RngState};
use nqs::config::SectorSpec;
use nqs::sampler::sample_bas;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> nqs::error::Result<()> {
    let sector = SectorSpec::new(2, 2);
    let ansatz = Ansatz::init(AnsatzConfig::new(12).with_seed(3))?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    sample_bas(&ansatz, sector, 1000, &mut rng, None)?;

    let path = std::env::temp_dir().join("nqs-example-checkpoint.json");
    Checkpoint::from_ansatz(&ansatz, Some(RngState::capture(11, &rng))).save(&path)?;
    let ck = Checkpoint::load(&path)?;
    let mut rng2 = ck.rng.as_ref().expect("rng state saved").restore();
    let restored = ck.into_ansatz()?;

    let a = sample_bas(&ansatz, sector, 10_000, &mut rng, None)?;
    let b = sample_bas(&restored, sector, 10_000, &mut rng2, None)?;
    println!("{} parameters written to {}", restored.n_params(), path.display());
    println!("parameters identical: {}", restored.params() == ansatz.params());
    println!("next batch identical: {}", a == b);
    std::fs::remove_file(&path)?;
    Ok(())
}
