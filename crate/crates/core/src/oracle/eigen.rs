//! Lowest eigenpair of a real symmetric sector operator.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Compressed sparse rows of a real symmetric matrix.
#[derive(Clone, Debug)]
pub struct SparseSym {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    /// Build from per-row `(col, value)` lists.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * v[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .filter(|&k| self.cols[k] == r)
                    .map(|k| self.vals[k])
                    .sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }
}

/// Lowest eigenpair by full dense diagonalization.
pub fn dense_ground(m: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let (k, &e) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty matrix");
    let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    (e, v)
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    /// Krylov subspace size per restart cycle.
    pub krylov: usize,
    pub max_restarts: usize,
    /// Convergence threshold on `‖Hv − θv‖`.
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            krylov: 60,
            max_restarts: 200,
            tol: 1e-9,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted Lanczos with full reorthogonalization, restarting from the current Ritz vector.
pub fn lanczos_ground(
    dim: usize,
    apply: impl Fn(&[f64], &mut [f64]),
    start: &[f64],
    opts: LanczosOptions,
) -> Result<(f64, Vec<f64>)> {
    if dim == 0 {
        return Err(Error::Argument("empty operator".into()));
    }
    let mut ritz: Vec<f64> = start.to_vec();
    let n0 = norm(&ritz);
    if n0 == 0.0 || !n0.is_finite() {
        return Err(Error::Argument("Lanczos start vector must be nonzero".into()));
    }
    ritz.iter_mut().for_each(|x| *x /= n0);
    let mut w = vec![0.0; dim];
    let mut theta = f64::NAN;

    for _restart in 0..opts.max_restarts {
        let m = opts.krylov.min(dim);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        basis.push(ritz.clone());
        for j in 0..m {
            apply(&basis[j], &mut w);
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            // two passes of Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = norm(&w);
            if j + 1 == m || b < 1e-14 {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let (th, y) = dense_ground(&t);
        theta = th;
        let mut v = vec![0.0; dim];
        for (c, q) in y.iter().zip(&basis) {
            v.iter_mut().zip(q).for_each(|(x, qq)| *x += c * qq);
        }
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        apply(&v, &mut w);
        let resid = w
            .iter()
            .zip(&v)
            .map(|(hv, x)| (hv - theta * x).powi(2))
            .sum::<f64>()
            .sqrt();
        ritz = v;
        if resid < opts.tol || k == dim {
            return Ok((theta, ritz));
        }
    }
    Err(Error::Internal(format!(
        "Lanczos did not converge within {} restarts (θ = {theta})",
        opts.max_restarts
    )))
}

/// Flip the sign so the largest-magnitude entry is positive.
pub fn fix_sign(v: &mut [f64]) {
    if let Some(big) = v.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())) {
        if big < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

pub fn rayleigh(m: &DMatrix<f64>, v: &[f64]) -> f64 {
    let x = DVector::from_column_slice(v);
    (x.transpose() * m * &x)[(0, 0)] / x.norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lanczos_matches_dense() {
        let n = 120;
        let mut rows = vec![Vec::new(); n];
        for i in 0..n {
            rows[i].push((i, (i as f64 * 0.37).sin() * 3.0 + i as f64 * 0.01));
            if i + 1 < n {
                rows[i].push((i + 1, 0.5));
                rows[i + 1].push((i, 0.5));
            }
            if i + 7 < n {
                rows[i].push((i + 7, -0.2));
                rows[i + 7].push((i, -0.2));
            }
        }
        let sp = SparseSym::from_rows(rows);
        let (e_dense, _) = dense_ground(&sp.to_dense());
        let start = vec![1.0; n];
        let (e_lz, v) = lanczos_ground(n, |v, o| sp.matvec(v, o), &start, LanczosOptions { krylov: 30, ..Default::default() }).unwrap();
        assert!((e_dense - e_lz).abs() < 1e-9, "{e_dense} vs {e_lz}");
        assert!((norm(&v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sign_fix() {
        let mut v = vec![0.1, -0.9, 0.3];
        fix_sign(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.3]);
    }
}
