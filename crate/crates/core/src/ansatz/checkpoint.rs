//! JSON checkpoint: config, flattened parameters and optional RNG position.
//! Floats are written with shortest round-trip formatting, so reloading is exact.

use std::fs;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::{Ansatz, AnsatzConfig};
use crate::error::{Error, Result};

pub const FORMAT: &str = "nqs-checkpoint";
pub const VERSION: u32 = 1;

/// Seed and stream position of a `ChaCha8Rng`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    /// Word position as a decimal string (it is a 128-bit counter).
    #[serde(with = "u128_string")]
    pub word_pos: u128,
}

impl RngState {
    pub fn capture(seed: u64, rng: &ChaCha8Rng) -> Self {
        Self {
            seed,
            word_pos: rng.get_word_pos(),
        }
    }

    pub fn restore(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

mod u128_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config: AnsatzConfig,
    pub params: Vec<f64>,
    pub rng: Option<RngState>,
}

impl Checkpoint {
    pub fn from_ansatz(a: &Ansatz, rng: Option<RngState>) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            config: a.config().clone(),
            params: a.params().to_vec(),
            rng,
        }
    }

    pub fn into_ansatz(self) -> Result<Ansatz> {
        Ansatz::from_params(self.config, self.params)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(text)?;
        if c.format != FORMAT {
            return Err(Error::Argument(format!("not a checkpoint: format {:?}", c.format)));
        }
        if c.version != VERSION {
            return Err(Error::Argument(format!("unsupported checkpoint version {}", c.version)));
        }
        Ok(c)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::InputNotFound(path.display().to_string()),
            _ => Error::Io(e),
        })?;
        Self::from_json(&text)
    }
}
