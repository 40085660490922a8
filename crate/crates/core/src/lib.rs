pub mod ansatz;
pub mod cli;
pub mod config;
pub mod error;
pub mod hamiltonian;
pub mod hamio;
pub mod oracle;
pub mod sampler;
pub mod vmc;
