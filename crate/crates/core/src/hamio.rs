//! FCIDUMP integral files.
//!
//! Header is a Fortran namelist (`&FCI NORB=.., NELEC=.., MS2=.., ORBSYM=.., ISYM=.., &END`
//! or terminated by `/`); each body record is `value i j k l` with 1-based
//! indices in chemists' notation `(ij|kl)`:
//!
//! * `i j k l` all nonzero: two-electron integral, expanded over the 8 index symmetries
//! * `i j 0 0`: one-electron integral `h(i, j)`
//! * `0 0 0 0`: nuclear repulsion
//!
//! Orbital energies (`i 0 0 0`) are accepted and ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::config::SectorSpec;
use crate::error::{Error, Result};

/// One- and two-electron integrals over spatial orbitals.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularIntegrals {
    n_spatial: usize,
    n_electrons: usize,
    ms2: i64,
    e_nuc: f64,
    h1: Vec<f64>,
    g2: Vec<f64>,
}

impl MolecularIntegrals {
    /// All-zero integrals for `n_spatial` orbitals.
    pub fn zeros(n_spatial: usize, n_electrons: usize, ms2: i64) -> Result<Self> {
        if n_spatial == 0 || 2 * n_spatial > crate::config::MAX_ORBITALS {
            return Err(Error::Argument(format!(
                "NORB must be in [1, {}], got {n_spatial}",
                crate::config::MAX_ORBITALS / 2
            )));
        }
        SectorSpec::from_nelec_ms2(n_electrons, ms2)?;
        if n_electrons > 2 * n_spatial {
            return Err(Error::Argument(format!(
                "NELEC={n_electrons} exceeds 2*NORB={}",
                2 * n_spatial
            )));
        }
        let n2 = n_spatial * n_spatial;
        Ok(Self {
            n_spatial,
            n_electrons,
            ms2,
            e_nuc: 0.0,
            h1: vec![0.0; n2],
            g2: vec![0.0; n2 * n2],
        })
    }

    pub fn n_spatial(&self) -> usize {
        self.n_spatial
    }

    pub fn n_orbitals(&self) -> usize {
        2 * self.n_spatial
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    pub fn ms2(&self) -> i64 {
        self.ms2
    }

    pub fn e_nuc(&self) -> f64 {
        self.e_nuc
    }

    pub fn sector(&self) -> SectorSpec {
        // validated at construction
        SectorSpec::from_nelec_ms2(self.n_electrons, self.ms2).expect("validated sector")
    }

    pub fn set_e_nuc(&mut self, e: f64) {
        self.e_nuc = e;
    }

    #[inline]
    fn idx2(&self, p: usize, q: usize) -> usize {
        p * self.n_spatial + q
    }

    #[inline]
    fn idx4(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let n = self.n_spatial;
        ((p * n + q) * n + r) * n + s
    }

    fn check(&self, idx: &[usize]) -> Result<()> {
        match idx.iter().find(|&&i| i >= self.n_spatial) {
            Some(i) => Err(Error::Argument(format!(
                "orbital index {i} out of range [0, {})",
                self.n_spatial
            ))),
            None => Ok(()),
        }
    }

    /// Set `h(p, q)` and `h(q, p)`.
    pub fn set_one_body(&mut self, p: usize, q: usize, v: f64) -> Result<()> {
        self.check(&[p, q])?;
        let (a, b) = (self.idx2(p, q), self.idx2(q, p));
        self.h1[a] = v;
        self.h1[b] = v;
        Ok(())
    }

    /// Set `(pq|rs)` together with its symmetry images.
    pub fn set_two_body(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) -> Result<()> {
        self.check(&[p, q, r, s])?;
        for (a, b, c, d) in symmetry_images(p, q, r, s) {
            let i = self.idx4(a, b, c, d);
            self.g2[i] = v;
        }
        Ok(())
    }

    /// One-electron integral `h(p, q)` in Hartree.
    pub fn one_body(&self, p: usize, q: usize) -> Result<f64> {
        self.check(&[p, q])?;
        Ok(self.h1[self.idx2(p, q)])
    }

    /// Two-electron integral `(pq|rs)` in Hartree.
    pub fn two_body(&self, p: usize, q: usize, r: usize, s: usize) -> Result<f64> {
        self.check(&[p, q, r, s])?;
        Ok(self.g2[self.idx4(p, q, r, s)])
    }

    /// Unchecked `h(p, q)` for hot loops.
    #[inline]
    pub(crate) fn h(&self, p: usize, q: usize) -> f64 {
        self.h1[self.idx2(p, q)]
    }

    /// Unchecked `(pq|rs)` for hot loops.
    #[inline]
    pub(crate) fn g(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.g2[self.idx4(p, q, r, s)]
    }

    /// Unified accessor: `(p, q, None, None)` for `h(p, q)`, all four indices for `(pq|rs)`.
    pub fn integral(&self, p: usize, q: usize, r: Option<usize>, s: Option<usize>) -> Result<f64> {
        match (r, s) {
            (None, None) => self.one_body(p, q),
            (Some(r), Some(s)) => self.two_body(p, q, r, s),
            _ => Err(Error::Argument(
                "two-electron query needs both r and s".to_string(),
            )),
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::InputNotFound(path.display().to_string()),
            _ => Error::Io(e),
        })?;
        parse_fcidump(&text)
    }

    /// Serialize as FCIDUMP text: one record per canonical index tuple with a nonzero value.
    pub fn to_fcidump(&self) -> String {
        let n = self.n_spatial;
        let mut out = String::new();
        let _ = writeln!(
            out,
            " &FCI NORB={},NELEC={},MS2={},\n &END",
            n, self.n_electrons, self.ms2
        );
        for p in 0..n {
            for q in 0..=p {
                let pq = p * (p + 1) / 2 + q;
                for r in 0..n {
                    for s in 0..=r {
                        let rs = r * (r + 1) / 2 + s;
                        if rs > pq {
                            continue;
                        }
                        let v = self.g(p, q, r, s);
                        if v != 0.0 {
                            let _ = writeln!(out, "{v:e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1);
                        }
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..=p {
                let v = self.h(p, q);
                if v != 0.0 {
                    let _ = writeln!(out, "{v:e} {} {} 0 0", p + 1, q + 1);
                }
            }
        }
        let _ = writeln!(out, "{:e} 0 0 0 0", self.e_nuc);
        out
    }
}

/// The 8 index permutations of `(pq|rs)` that leave a real two-electron integral unchanged.
pub fn symmetry_images(p: usize, q: usize, r: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

fn canonical4(p: usize, q: usize, r: usize, s: usize) -> (usize, usize, usize, usize) {
    symmetry_images(p, q, r, s).into_iter().max().unwrap()
}

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i64,
    body_start: usize,
}

fn parse_header(lines: &[&str]) -> Result<Header> {
    let first = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::format(1, "empty input"))?;
    if !lines[first].trim_start().to_ascii_uppercase().starts_with("&FCI") {
        return Err(Error::format(first + 1, "expected &FCI namelist header"));
    }
    let mut text = String::new();
    let mut end = None;
    for (i, line) in lines.iter().enumerate().skip(first) {
        let upper = line.to_ascii_uppercase();
        let trimmed = upper.trim();
        let cut = if let Some(pos) = trimmed.find("&END") {
            Some(pos)
        } else if trimmed == "/" || trimmed.ends_with('/') {
            Some(trimmed.rfind('/').unwrap())
        } else {
            None
        };
        match cut {
            Some(pos) => {
                text.push_str(&trimmed[..pos]);
                end = Some(i);
                break;
            }
            None => {
                text.push_str(trimmed);
                text.push(',');
            }
        }
    }
    let end = end.ok_or_else(|| Error::format(first + 1, "namelist header not terminated by &END or /"))?;
    let text = text.trim_start().trim_start_matches("&FCI");

    let mut fields: HashMap<String, Vec<String>> = HashMap::new();
    let mut current: Option<String> = None;
    for tok in text.split(|c: char| c == ',' || c.is_whitespace()) {
        if tok.is_empty() {
            continue;
        }
        if let Some((key, val)) = tok.split_once('=') {
            let key = key.trim().to_string();
            let entry = fields.entry(key.clone()).or_default();
            if !val.trim().is_empty() {
                entry.push(val.trim().to_string());
            }
            current = Some(key);
        } else if let Some(key) = &current {
            fields.entry(key.clone()).or_default().push(tok.to_string());
        } else {
            return Err(Error::format(first + 1, format!("unexpected header token {tok:?}")));
        }
    }

    let int_field = |name: &str| -> Result<Option<i64>> {
        match fields.get(name).and_then(|v| v.first()) {
            None => Ok(None),
            Some(v) => v
                .parse::<i64>()
                .map(Some)
                .map_err(|_| Error::format(first + 1, format!("{name} is not an integer: {v:?}"))),
        }
    };
    let norb = int_field("NORB")?.ok_or_else(|| Error::format(first + 1, "header missing NORB"))?;
    let nelec = int_field("NELEC")?.ok_or_else(|| Error::format(first + 1, "header missing NELEC"))?;
    let ms2 = int_field("MS2")?.unwrap_or(0);
    if norb < 1 || nelec < 0 {
        return Err(Error::format(first + 1, format!("invalid NORB={norb} NELEC={nelec}")));
    }
    // ORBSYM, ISYM, UHF and friends are accepted and ignored.
    Ok(Header {
        norb: norb as usize,
        nelec: nelec as usize,
        ms2,
        body_start: end + 1,
    })
}

/// Parse FCIDUMP text into an integral store.
pub fn parse_fcidump(text: &str) -> Result<MolecularIntegrals> {
    let lines: Vec<&str> = text.lines().collect();
    let header = parse_header(&lines)?;
    let mut ints = MolecularIntegrals::zeros(header.norb, header.nelec, header.ms2)
        .map_err(|e| Error::format(1, e.to_string()))?;
    let n = header.norb;

    // canonical key -> line of first definition, for duplicate detection
    let mut seen: HashMap<(usize, usize, usize, usize), (usize, f64)> = HashMap::new();

    for (i, line) in lines.iter().enumerate().skip(header.body_start) {
        let lineno = i + 1;
        let mut toks = line.split_whitespace();
        let Some(vtok) = toks.next() else { continue };
        let value = parse_float(vtok).ok_or_else(|| Error::format(lineno, format!("non-numeric value {vtok:?}")))?;
        let mut idx = [0usize; 4];
        for slot in idx.iter_mut() {
            let t = toks
                .next()
                .ok_or_else(|| Error::format(lineno, "record needs a value and four indices"))?;
            let v: i64 = t
                .parse()
                .map_err(|_| Error::format(lineno, format!("non-integer index {t:?}")))?;
            if v < 0 || v as usize > n {
                return Err(Error::format(lineno, format!("index {v} out of range [1, {n}]")));
            }
            *slot = v as usize;
        }
        if toks.next().is_some() {
            return Err(Error::format(lineno, "trailing tokens after record"));
        }
        let [p, q, r, s] = idx;
        let key = match (p, q, r, s) {
            (0, 0, 0, 0) => {
                ints.e_nuc = value;
                (0, 0, 0, 0)
            }
            (p, 0, 0, 0) => {
                // orbital energy record
                let _ = p;
                continue;
            }
            (p, q, 0, 0) if p > 0 && q > 0 => {
                ints.set_one_body(p - 1, q - 1, value)?;
                (p.max(q), p.min(q), 0, 0)
            }
            (p, q, r, s) if p > 0 && q > 0 && r > 0 && s > 0 => {
                ints.set_two_body(p - 1, q - 1, r - 1, s - 1, value)?;
                let (a, b, c, d) = canonical4(p, q, r, s);
                (a, b, c, d)
            }
            _ => {
                return Err(Error::format(
                    lineno,
                    format!("index pattern {p} {q} {r} {s} is not a valid record"),
                ))
            }
        };
        if let Some((prev, old)) = seen.insert(key, (lineno, value)) {
            // symmetry-equivalent records with the same value are common in generated files
            if (old - value).abs() > 1e-10 * old.abs().max(value.abs()).max(1.0) {
                log::warn!("FCIDUMP line {lineno} overrides the integral defined on line {prev} ({old} -> {value})");
            } else {
                log::debug!("FCIDUMP line {lineno} repeats the integral defined on line {prev}");
            }
        }
    }
    Ok(ints)
}

/// Fortran-style floats: accepts `D`/`d` exponents.
fn parse_float(tok: &str) -> Option<f64> {
    tok.parse::<f64>()
        .ok()
        .or_else(|| tok.replace(['D', 'd'], "e").parse::<f64>().ok())
        .filter(|v| v.is_finite())
}
