//! Read an FCIDUMP, query a few integrals and write it back out.
//!
//! cargo run --release --example parse_fcidump -- [path]

use nqs::hamio::{parse_fcidump, MolecularIntegrals};

fn main() -> nqs::error::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| format!("{}/fixtures/lih.fcidump", env!("CARGO_MANIFEST_DIR")));
    let ints = MolecularIntegrals::read(&path)?;
    println!(
        "{path}: {} spatial orbitals, {} electrons, MS2 = {}, E_nuc = {:.10}",
        ints.n_spatial(),
        ints.n_electrons(),
        ints.ms2(),
        ints.e_nuc()
    );
    println!("sector: {:?}", ints.sector());
    println!("h(0,0) = {:.10}   h(0,1) = {:.10}", ints.one_body(0, 0)?, ints.one_body(0, 1)?);
    println!("(00|00) = {:.10}   (01|10) = {:.10}", ints.two_body(0, 0, 0, 0)?, ints.two_body(0, 1, 1, 0)?);

    // Every symmetry image of a two-electron integral is the same stored value.
    let (p, q, r, s) = (0, 0, 2.min(ints.n_spatial() - 1), 1.min(ints.n_spatial() - 1));
    let v = ints.two_body(p, q, r, s)?;
    let same = nqs::hamio::symmetry_images(p, q, r, s)
        .iter()
        .all(|&(a, b, c, d)| ints.two_body(a, b, c, d).map(|w| w == v).unwrap_or(false));
    println!("({p}{q}|{r}{s}) = {v:.10}, all 8 images equal: {same}");

    let text = ints.to_fcidump();
    let again = parse_fcidump(&text)?;
    println!("round trip identical: {}", again == ints);
    Ok(())
}
