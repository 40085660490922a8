//! Manifest of oracle energies for a set of FCIDUMP files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{cisd_ground_state, fci_ground_state, slater_condon, CiOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::QubitHamiltonian;
use crate::hamio::MolecularIntegrals;

pub const MANIFEST_FORMAT: &str = "nqs-fixture-manifest";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub name: String,
    pub file: String,
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub ms2: i64,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub dimension: u64,
    pub n_pauli_terms: usize,
    /// Energy of the lowest-filling reference determinant.
    pub e_reference: f64,
    pub e_cisd: f64,
    pub e_fci: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureManifest {
    pub format: String,
    pub version: u32,
    pub entries: Vec<FixtureEntry>,
}

impl FixtureManifest {
    pub fn get(&self, name: &str) -> Option<&FixtureEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::InputNotFound(path.display().to_string()),
            _ => Error::Io(e),
        })?;
        let m: Self = serde_json::from_str(&text)?;
        if m.format != MANIFEST_FORMAT || m.version != MANIFEST_VERSION {
            return Err(Error::Argument(format!("unsupported manifest {} v{}", m.format, m.version)));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Oracle record for one FCIDUMP file.
pub fn fixture_entry(path: &Path, opts: &CiOptions) -> Result<FixtureEntry> {
    let ints = MolecularIntegrals::read(path)?;
    let sector = ints.sector();
    let h = QubitHamiltonian::assemble(&ints)?;
    let n = ints.n_orbitals();
    let fci = fci_ground_state(&h, n, sector, opts)?;
    let cisd = cisd_ground_state(&ints, sector, opts)?;
    let reference = sector.reference(n);
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    Ok(FixtureEntry {
        name,
        file: path.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string(),
        n_orbitals: n,
        n_electrons: ints.n_electrons(),
        ms2: ints.ms2(),
        n_alpha: sector.n_alpha,
        n_beta: sector.n_beta,
        dimension: sector.dimension(n) as u64,
        n_pauli_terms: h.n_terms(),
        e_reference: slater_condon(reference, reference, &ints),
        e_cisd: cisd.energy,
        e_fci: fci.energy,
    })
}

/// Every `*.fcidump` file in `dir`, sorted by name.
pub fn fcidump_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = fs::read_dir(dir).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::InputNotFound(dir.display().to_string()),
        _ => Error::Io(e),
    })?;
    let mut files = Vec::new();
    for e in rd {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "fcidump") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Build the manifest for every FCIDUMP in `dir`.
pub fn build_manifest(dir: &Path, opts: &CiOptions) -> Result<FixtureManifest> {
    let entries = fcidump_files(dir)?
        .iter()
        .map(|p| fixture_entry(p, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(FixtureManifest {
        format: MANIFEST_FORMAT.into(),
        version: MANIFEST_VERSION,
        entries,
    })
}
