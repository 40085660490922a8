//! Flat parameter layout.
//!
//! All parameters live in one `Vec<f64>`; each named tensor is a row-major
//! block inside it. Amplitude-network blocks come first, phase-network blocks last.

use super::AnsatzConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Clone, Debug)]
pub struct LayerLayout {
    pub ln1_g: Block,
    pub ln1_b: Block,
    pub w_qkv: Block,
    pub b_qkv: Block,
    pub w_o: Block,
    pub b_o: Block,
    pub ln2_g: Block,
    pub ln2_b: Block,
    pub w_ff1: Block,
    pub b_ff1: Block,
    pub w_ff2: Block,
    pub b_ff2: Block,
}

#[derive(Clone, Debug)]
pub struct PhaseLayer {
    pub w: Block,
    pub b: Block,
}

#[derive(Clone, Debug)]
pub struct Layout {
    /// Token embedding `W_e`, rows: token 0, token 1, BOS.
    pub tok: Block,
    /// Position embedding `W_p`, one row per spin orbital.
    pub pos: Block,
    pub layers: Vec<LayerLayout>,
    pub lnf_g: Block,
    pub lnf_b: Block,
    /// Output projection `W_head` (`d_model × 2`).
    pub head: Block,
    pub phase: Vec<PhaseLayer>,
    pub amp_len: usize,
    pub total: usize,
}

struct Cursor(usize);

impl Cursor {
    fn take(&mut self, rows: usize, cols: usize) -> Block {
        let b = Block {
            offset: self.0,
            rows,
            cols,
        };
        self.0 += rows * cols;
        b
    }
}

pub const VOCAB: usize = 3;
pub const BOS: u8 = 2;

impl Layout {
    pub fn new(cfg: &AnsatzConfig) -> Self {
        let d = cfg.d_model;
        let mut c = Cursor(0);
        let tok = c.take(VOCAB, d);
        let pos = c.take(cfg.n_orbitals, d);
        let layers = (0..cfg.n_layers)
            .map(|_| LayerLayout {
                ln1_g: c.take(1, d),
                ln1_b: c.take(1, d),
                w_qkv: c.take(d, 3 * d),
                b_qkv: c.take(1, 3 * d),
                w_o: c.take(d, d),
                b_o: c.take(1, d),
                ln2_g: c.take(1, d),
                ln2_b: c.take(1, d),
                w_ff1: c.take(d, cfg.d_ff),
                b_ff1: c.take(1, cfg.d_ff),
                w_ff2: c.take(cfg.d_ff, d),
                b_ff2: c.take(1, d),
            })
            .collect();
        let lnf_g = c.take(1, d);
        let lnf_b = c.take(1, d);
        let head = c.take(d, 2);
        let amp_len = c.0;
        let mut widths = vec![cfg.n_orbitals];
        widths.extend(&cfg.phase_hidden);
        widths.push(1);
        let phase = widths
            .windows(2)
            .map(|w| PhaseLayer {
                w: c.take(w[0], w[1]),
                b: c.take(1, w[1]),
            })
            .collect();
        Self {
            tok,
            pos,
            layers,
            lnf_g,
            lnf_b,
            head,
            phase,
            amp_len,
            total: c.0,
        }
    }
}
