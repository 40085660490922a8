//! H₂ potential-energy curve: one training run per bond length, compared with FCI.
//!
//! cargo run --release --example dissociation_curve

use nqs::cli::{cmd_sweep, sweep_table, RunConfig};
use nqs::oracle::fixtures::fcidump_files;

fn main() -> nqs::error::Result<()> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let points: Vec<_> = fcidump_files(&dir)?
        .into_iter()
        .filter(|p| p.file_stem().and_then(|s| s.to_str()).is_some_and(|s| s.starts_with("h2_")))
        .collect();
    let mut cfg = RunConfig::new(&points[0]);
    cfg.iters = 3000;
    cfg.n_samples = 100_000;
    cfg.stop_tol = Some(1e-4);
    let rows = cmd_sweep(&cfg, &points)?;
    print!("{}", sweep_table(&rows));
    Ok(())
}
