//! Batched forward and reverse passes of the amplitude decoder and phase MLP.
//!
//! Activations are `(B·L) × width` matrices, row `b·L + i` holding position `i`
//! of sequence `b`.

use ndarray::{s, Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis};

use super::layout::{Block, LayerLayout, Layout};
use super::AnsatzConfig;

const LN_EPS: f64 = 1e-5;
const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

#[inline]
pub(crate) fn mat<'a>(p: &'a [f64], b: &Block) -> ArrayView2<'a, f64> {
    ArrayView2::from_shape((b.rows, b.cols), &p[b.range()]).expect("block shape")
}

#[inline]
pub(crate) fn vec1<'a>(p: &'a [f64], b: &Block) -> ArrayView1<'a, f64> {
    ArrayView1::from(&p[b.range()])
}

#[inline]
fn mat_mut<'a>(g: &'a mut [f64], b: &Block) -> ArrayViewMut2<'a, f64> {
    ArrayViewMut2::from_shape((b.rows, b.cols), &mut g[b.range()]).expect("block shape")
}

#[inline]
fn vec_mut<'a>(g: &'a mut [f64], b: &Block) -> ArrayViewMut1<'a, f64> {
    ArrayViewMut1::from(&mut g[b.range()])
}

fn affine(x: &Array2<f64>, w: ArrayView2<f64>, b: ArrayView1<f64>) -> Array2<f64> {
    let mut y = x.dot(&w);
    y += &b;
    y
}

struct LnOut {
    y: Array2<f64>,
    xhat: Array2<f64>,
    rstd: Vec<f64>,
}

fn layer_norm(x: &Array2<f64>, g: ArrayView1<f64>, b: ArrayView1<f64>) -> LnOut {
    let d = x.ncols() as f64;
    let mut xhat = x.clone();
    let mut rstd = Vec::with_capacity(x.nrows());
    for mut row in xhat.rows_mut() {
        let mean = row.sum() / d;
        row -= mean;
        let var = row.iter().map(|v| v * v).sum::<f64>() / d;
        let r = 1.0 / (var + LN_EPS).sqrt();
        row *= r;
        rstd.push(r);
    }
    let mut y = &xhat * &g;
    y += &b;
    LnOut { y, xhat, rstd }
}

/// Returns `dx`; accumulates gain/bias gradients.
fn layer_norm_back(
    dy: &Array2<f64>,
    xhat: &Array2<f64>,
    rstd: &[f64],
    g: ArrayView1<f64>,
    mut dg: ArrayViewMut1<f64>,
    mut db: ArrayViewMut1<f64>,
) -> Array2<f64> {
    let d = dy.ncols() as f64;
    dg += &(dy * xhat).sum_axis(Axis(0));
    db += &dy.sum_axis(Axis(0));
    let mut dx = dy * &g;
    for ((mut row, xh), &r) in dx.rows_mut().into_iter().zip(xhat.rows()).zip(rstd) {
        let m1 = row.sum() / d;
        let m2 = row.iter().zip(xh).map(|(a, b)| a * b).sum::<f64>() / d;
        row.zip_mut_with(&xh, |v, &h| *v = r * (*v - m1 - h * m2));
    }
    dx
}

/// `tanh` as `1 − 2/(e^{2u} + 1)`: absolute error of a few ulps, which is all
/// GELU needs, at a fraction of the cost of `f64::tanh`.
#[inline]
fn tanh(u: f64) -> f64 {
    1.0 - 2.0 / ((2.0 * u).exp() + 1.0)
}

#[inline]
fn gelu_tanh(x: f64) -> f64 {
    tanh(GELU_C * (x + GELU_A * x * x * x))
}

#[cfg(test)]
fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + gelu_tanh(x))
}

/// Derivative of GELU at `x`, given `t = gelu_tanh(x)`.
#[inline]
fn gelu_grad(x: f64, t: f64) -> f64 {
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}

/// Causal multi-head attention. Returns the concatenated head outputs and the
/// attention weights, laid out `[b][h][i][j]` (dense `L × L` per head, upper triangle zero).
fn attention(qkv: &Array2<f64>, batch: usize, len: usize, heads: usize) -> (Array2<f64>, Vec<f64>) {
    let d = qkv.ncols() / 3;
    let dh = d / heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let mut out = Array2::<f64>::zeros((batch * len, d));
    let mut probs = vec![0.0; batch * heads * len * len];
    let q_all = qkv.as_slice().expect("standard layout");
    let stride = 3 * d;
    let mut scores = vec![0.0; len];
    for b in 0..batch {
        for h in 0..heads {
            let pbase = (b * heads + h) * len * len;
            for i in 0..len {
                let qi = &q_all[(b * len + i) * stride + h * dh..][..dh];
                let mut mx = f64::NEG_INFINITY;
                for j in 0..=i {
                    let kj = &q_all[(b * len + j) * stride + d + h * dh..][..dh];
                    let s: f64 = qi.iter().zip(kj).map(|(a, c)| a * c).sum::<f64>() * scale;
                    scores[j] = s;
                    mx = mx.max(s);
                }
                let mut z = 0.0;
                for s in scores[..=i].iter_mut() {
                    *s = (*s - mx).exp();
                    z += *s;
                }
                let mut o = out.row_mut(b * len + i);
                let o = o.as_slice_mut().expect("contiguous row");
                for j in 0..=i {
                    let p = scores[j] / z;
                    probs[pbase + i * len + j] = p;
                    let vj = &q_all[(b * len + j) * stride + 2 * d + h * dh..][..dh];
                    for (t, &v) in vj.iter().enumerate() {
                        o[h * dh + t] += p * v;
                    }
                }
            }
        }
    }
    (out, probs)
}

fn attention_back(datt: &Array2<f64>, qkv: &Array2<f64>, probs: &[f64], batch: usize, len: usize, heads: usize) -> Array2<f64> {
    let d = qkv.ncols() / 3;
    let dh = d / heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let stride = 3 * d;
    let q_all = qkv.as_slice().expect("standard layout");
    let da = datt.as_slice().expect("standard layout");
    let mut dqkv = Array2::<f64>::zeros((batch * len, 3 * d));
    let dq_all = dqkv.as_slice_mut().expect("standard layout");
    let mut dp = vec![0.0; len];
    for b in 0..batch {
        for h in 0..heads {
            let pbase = (b * heads + h) * len * len;
            for i in 0..len {
                let doi = &da[(b * len + i) * d + h * dh..][..dh];
                let mut dot_pdp = 0.0;
                for j in 0..=i {
                    let p = probs[pbase + i * len + j];
                    let vrow = (b * len + j) * stride + 2 * d + h * dh;
                    let mut acc = 0.0;
                    for t in 0..dh {
                        acc += doi[t] * q_all[vrow + t];
                        dq_all[vrow + t] += p * doi[t];
                    }
                    dp[j] = acc;
                    dot_pdp += p * acc;
                }
                let qrow = (b * len + i) * stride + h * dh;
                for j in 0..=i {
                    let p = probs[pbase + i * len + j];
                    let ds = p * (dp[j] - dot_pdp) * scale;
                    if ds == 0.0 {
                        continue;
                    }
                    let krow = (b * len + j) * stride + d + h * dh;
                    for t in 0..dh {
                        dq_all[qrow + t] += ds * q_all[krow + t];
                        dq_all[krow + t] += ds * q_all[qrow + t];
                    }
                }
            }
        }
    }
    dqkv
}

struct LayerCache {
    xhat1: Array2<f64>,
    rstd1: Vec<f64>,
    a1: Array2<f64>,
    qkv: Array2<f64>,
    probs: Vec<f64>,
    att: Array2<f64>,
    xhat2: Array2<f64>,
    rstd2: Vec<f64>,
    a2: Array2<f64>,
    f: Array2<f64>,
    t: Array2<f64>,
    gl: Array2<f64>,
}

/// Everything the reverse pass of the amplitude network needs.
pub(crate) struct AmpForward {
    pub batch: usize,
    pub len: usize,
    tokens: Vec<u8>,
    layers: Vec<LayerCache>,
    xhatf: Array2<f64>,
    rstdf: Vec<f64>,
    hf: Array2<f64>,
    /// `(B·L) × 2` logits.
    pub logits: Array2<f64>,
}

/// Run the decoder on `batch` token sequences of length `len` (row-major `tokens`).
pub(crate) fn amp_forward(cfg: &AnsatzConfig, lay: &Layout, p: &[f64], tokens: Vec<u8>, batch: usize, len: usize, keep: bool) -> AmpForward {
    let d = cfg.d_model;
    let rows = batch * len;
    let tok = mat(p, &lay.tok);
    let pos = mat(p, &lay.pos);
    let mut h = Array2::<f64>::zeros((rows, d));
    for (r, mut row) in h.rows_mut().into_iter().enumerate() {
        row.assign(&tok.row(tokens[r] as usize));
        row += &pos.row(r % len);
    }
    let mut caches = Vec::with_capacity(if keep { lay.layers.len() } else { 0 });
    for l in &lay.layers {
        let ln1 = layer_norm(&h, vec1(p, &l.ln1_g), vec1(p, &l.ln1_b));
        let qkv = affine(&ln1.y, mat(p, &l.w_qkv), vec1(p, &l.b_qkv));
        let (att, probs) = attention(&qkv, batch, len, cfg.n_heads);
        h += &affine(&att, mat(p, &l.w_o), vec1(p, &l.b_o));
        let ln2 = layer_norm(&h, vec1(p, &l.ln2_g), vec1(p, &l.ln2_b));
        let f = affine(&ln2.y, mat(p, &l.w_ff1), vec1(p, &l.b_ff1));
        let t = f.mapv(gelu_tanh);
        let mut gl = f.clone();
        gl.zip_mut_with(&t, |g, &t| *g *= 0.5 * (1.0 + t));
        h += &affine(&gl, mat(p, &l.w_ff2), vec1(p, &l.b_ff2));
        if keep {
            caches.push(LayerCache {
                xhat1: ln1.xhat,
                rstd1: ln1.rstd,
                a1: ln1.y,
                qkv,
                probs,
                att,
                xhat2: ln2.xhat,
                rstd2: ln2.rstd,
                a2: ln2.y,
                f,
                t,
                gl,
            });
        }
    }
    let lnf = layer_norm(&h, vec1(p, &lay.lnf_g), vec1(p, &lay.lnf_b));
    let logits = lnf.y.dot(&mat(p, &lay.head));
    AmpForward {
        batch,
        len,
        tokens,
        layers: caches,
        xhatf: lnf.xhat,
        rstdf: lnf.rstd,
        hf: lnf.y,
        logits,
    }
}

/// Accumulate `∂(Σ dlogits · logits)/∂θ` into `grad`.
pub(crate) fn amp_backward(cfg: &AnsatzConfig, lay: &Layout, p: &[f64], fwd: &AmpForward, dlogits: &Array2<f64>, grad: &mut [f64]) {
    let (batch, len) = (fwd.batch, fwd.len);
    {
        let mut gh = mat_mut(grad, &lay.head);
        gh += &fwd.hf.t().dot(dlogits);
    }
    let dhf = dlogits.dot(&mat(p, &lay.head).t());
    let mut dh = {
        let (dg, db) = two_vec_mut(grad, &lay.lnf_g, &lay.lnf_b);
        layer_norm_back(&dhf, &fwd.xhatf, &fwd.rstdf, vec1(p, &lay.lnf_g), dg, db)
    };
    for (l, c) in lay.layers.iter().zip(&fwd.layers).rev() {
        layer_back(cfg, l, p, c, &mut dh, grad, batch, len);
    }
    {
        let mut gt = mat_mut(grad, &lay.tok);
        for (r, row) in dh.rows().into_iter().enumerate() {
            let mut t = gt.row_mut(fwd.tokens[r] as usize);
            t += &row;
        }
    }
    let mut gp = mat_mut(grad, &lay.pos);
    for (r, row) in dh.rows().into_iter().enumerate() {
        let mut t = gp.row_mut(r % len);
        t += &row;
    }
}

fn two_vec_mut<'a>(g: &'a mut [f64], a: &Block, b: &Block) -> (ArrayViewMut1<'a, f64>, ArrayViewMut1<'a, f64>) {
    debug_assert!(a.offset + a.len() <= b.offset);
    let (lo, hi) = g.split_at_mut(b.offset);
    (
        ArrayViewMut1::from(&mut lo[a.range()]),
        ArrayViewMut1::from(&mut hi[..b.len()]),
    )
}

#[allow(clippy::too_many_arguments)]
fn layer_back(cfg: &AnsatzConfig, l: &LayerLayout, p: &[f64], c: &LayerCache, dh: &mut Array2<f64>, grad: &mut [f64], batch: usize, len: usize) {
    // feed-forward branch
    mat_mut(grad, &l.w_ff2).scaled_add(1.0, &c.gl.t().dot(&*dh));
    vec_mut(grad, &l.b_ff2).scaled_add(1.0, &dh.sum_axis(Axis(0)));
    let mut df = dh.dot(&mat(p, &l.w_ff2).t());
    ndarray::Zip::from(&mut df).and(&c.f).and(&c.t).for_each(|g, &x, &t| *g *= gelu_grad(x, t));
    mat_mut(grad, &l.w_ff1).scaled_add(1.0, &c.a2.t().dot(&df));
    vec_mut(grad, &l.b_ff1).scaled_add(1.0, &df.sum_axis(Axis(0)));
    let da2 = df.dot(&mat(p, &l.w_ff1).t());
    {
        let (dg, db) = two_vec_mut(grad, &l.ln2_g, &l.ln2_b);
        *dh += &layer_norm_back(&da2, &c.xhat2, &c.rstd2, vec1(p, &l.ln2_g), dg, db);
    }
    // attention branch
    mat_mut(grad, &l.w_o).scaled_add(1.0, &c.att.t().dot(&*dh));
    vec_mut(grad, &l.b_o).scaled_add(1.0, &dh.sum_axis(Axis(0)));
    let datt = dh.dot(&mat(p, &l.w_o).t());
    let dqkv = attention_back(&datt, &c.qkv, &c.probs, batch, len, cfg.n_heads);
    mat_mut(grad, &l.w_qkv).scaled_add(1.0, &c.a1.t().dot(&dqkv));
    vec_mut(grad, &l.b_qkv).scaled_add(1.0, &dqkv.sum_axis(Axis(0)));
    let da1 = dqkv.dot(&mat(p, &l.w_qkv).t());
    let (dg, db) = two_vec_mut(grad, &l.ln1_g, &l.ln1_b);
    *dh += &layer_norm_back(&da1, &c.xhat1, &c.rstd1, vec1(p, &l.ln1_g), dg, db);
}

pub(crate) struct PhaseForward {
    /// Layer inputs, starting with the ±1 encoding.
    acts: Vec<Array2<f64>>,
    pub phase: Vec<f64>,
}

/// Phase MLP on ±1-encoded occupations (`batch × n_orbitals`).
pub(crate) fn phase_forward(lay: &Layout, p: &[f64], input: Array2<f64>) -> PhaseForward {
    let mut acts = vec![input];
    let n = lay.phase.len();
    for (k, pl) in lay.phase.iter().enumerate() {
        let mut z = affine(acts.last().unwrap(), mat(p, &pl.w), vec1(p, &pl.b));
        if k + 1 < n {
            z.mapv_inplace(f64::tanh);
        }
        acts.push(z);
    }
    let out = acts.pop().unwrap();
    PhaseForward {
        acts,
        phase: out.column(0).to_vec(),
    }
}

pub(crate) fn phase_backward(lay: &Layout, p: &[f64], fwd: &PhaseForward, dphase: &[f64], grad: &mut [f64]) {
    let mut dz = Array2::from_shape_vec((dphase.len(), 1), dphase.to_vec()).expect("shape");
    for (k, pl) in lay.phase.iter().enumerate().rev() {
        let a = &fwd.acts[k];
        mat_mut(grad, &pl.w).scaled_add(1.0, &a.t().dot(&dz));
        vec_mut(grad, &pl.b).scaled_add(1.0, &dz.sum_axis(Axis(0)));
        if k == 0 {
            break;
        }
        let mut da = dz.dot(&mat(p, &pl.w).t());
        // a = tanh(z) for hidden layers
        da.zip_mut_with(a, |g, &y| *g *= 1.0 - y * y);
        dz = da;
    }
}

/// Logits of the last position of each sequence.
pub(crate) fn last_logits(fwd: &AmpForward) -> Vec<[f64; 2]> {
    let len = fwd.len;
    (0..fwd.batch)
        .map(|b| {
            let r = fwd.logits.slice(s![b * len + len - 1, ..]);
            [r[0], r[1]]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_tanh_matches_std() {
        for i in -4000..=4000 {
            let u = i as f64 * 0.01;
            assert!((tanh(u) - u.tanh()).abs() <= 4.0 * f64::EPSILON);
        }
        assert_eq!(tanh(1e4), 1.0);
        assert_eq!(tanh(-1e4), -1.0);
    }

    #[test]
    fn gelu_derivative() {
        for &x in &[-3.0, -0.7, 0.0, 0.4, 2.5] {
            let h = 1e-6;
            let fd = (gelu(x + h) - gelu(x - h)) / (2.0 * h);
            assert!((fd - gelu_grad(x, gelu_tanh(x))).abs() < 1e-8);
        }
    }

    #[test]
    fn layer_norm_rows_standardized() {
        let x = Array2::from_shape_fn((3, 8), |(i, j)| (i * 8 + j) as f64 * 0.3 - 2.0);
        let g = ndarray::Array1::ones(8);
        let b = ndarray::Array1::zeros(8);
        let out = layer_norm(&x, g.view(), b.view());
        for row in out.y.rows() {
            assert!(row.sum().abs() < 1e-12);
            let var = row.iter().map(|v| v * v).sum::<f64>() / 8.0;
            assert!((var - 1.0).abs() < 1e-3);
        }
    }
}
