//! Wall time of BAS and MCMC as the number of samples grows.
//!
//! cargo run --release --example sampler_benchmark -- [fixture]

use nqs::cli::{cmd_sample_benchmark, AnsatzHyper, BenchmarkConfig};

fn main() -> nqs::error::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "h2o".into());
    let cfg = BenchmarkConfig {
        fcidump: format!("{}/fixtures/{name}.fcidump", env!("CARGO_MANIFEST_DIR")).into(),
        checkpoint: None,
        grid: vec![10_000, 100_000, 1_000_000],
        seed: 0,
        ansatz: AnsatzHyper::default(),
        burn_in: 1000,
        methods: vec!["bas".into(), "mcmc".into()],
        out: None,
        workers: 0,
    };
    println!("{:<6} {:>10} {:>12} {:>8} {:>8} {:>8}", "method", "N_s", "wall_ms", "N_u", "TV", "accept");
    for r in cmd_sample_benchmark(&cfg)? {
        println!(
            "{:<6} {:>10} {:>12.2} {:>8} {:>8} {:>8}",
            r.method,
            r.n_samples,
            r.wall_ms,
            r.n_unique,
            r.tv_distance.map_or("-".into(), |t| format!("{t:.4}")),
            r.acceptance.map_or("-".into(), |a| format!("{a:.3}"))
        );
    }
    Ok(())
}
