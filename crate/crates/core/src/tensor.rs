//! Minimal dense numeric kernels: vectors as `&[f64]`, row-major matrices,
//! third-order tensors as stacks of square slices, the nonlinearities, and
//! seeded uniform initialization. Double precision throughout; the model is
//! tiny and the gradient checks need the headroom.
//!
//! Shape mismatches are programming errors and panic.

use rand::distributions::{Distribution, Uniform};
use rand::Rng;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn uniform(rng: &mut impl Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
        Matrix { rows, cols, data: init_uniform(rng, lo, hi, rows * cols) }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `out = self · x`
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        assert_eq!(out.len(), self.rows, "matvec output dimension mismatch");
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = dot(row, x);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        out
    }

    /// `out += selfᵀ · x`
    pub fn matvec_transpose_add(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.rows, "transposed matvec dimension mismatch");
        assert_eq!(out.len(), self.cols, "transposed matvec output dimension mismatch");
        for (xi, row) in x.iter().zip(self.data.chunks_exact(self.cols)) {
            if *xi != 0.0 {
                axpy(*xi, row, out);
            }
        }
    }

    /// `self += alpha · u vᵀ`
    pub fn add_outer(&mut self, alpha: f64, u: &[f64], v: &[f64]) {
        assert_eq!(u.len(), self.rows, "outer product row mismatch");
        assert_eq!(v.len(), self.cols, "outer product column mismatch");
        for (ui, row) in u.iter().zip(self.data.chunks_exact_mut(self.cols)) {
            axpy(alpha * ui, v, row);
        }
    }
}

/// A stack of square matrices; slice `i` produces output coordinate `i` of a
/// bilinear form.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    pub slices: usize,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(slices: usize, dim: usize) -> Tensor3 {
        Tensor3 { slices, dim, data: vec![0.0; slices * dim * dim] }
    }

    pub fn uniform(rng: &mut impl Rng, slices: usize, dim: usize, lo: f64, hi: f64) -> Tensor3 {
        Tensor3 { slices, dim, data: init_uniform(rng, lo, hi, slices * dim * dim) }
    }

    pub fn slice(&self, i: usize) -> &[f64] {
        let n = self.dim * self.dim;
        &self.data[i * n..(i + 1) * n]
    }

    pub fn slice_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.dim * self.dim;
        &mut self.data[i * n..(i + 1) * n]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha · x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    assert_eq!(x.len(), y.len(), "axpy dimension mismatch");
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `out_i = xlᵀ · T_i · xr`
pub fn bilinear(t: &Tensor3, xl: &[f64], xr: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; t.slices];
    bilinear_into(t, xl, xr, &mut out);
    out
}

pub fn bilinear_into(t: &Tensor3, xl: &[f64], xr: &[f64], out: &mut [f64]) {
    assert_eq!(xl.len(), t.dim, "bilinear left dimension mismatch");
    assert_eq!(xr.len(), t.dim, "bilinear right dimension mismatch");
    assert_eq!(out.len(), t.slices, "bilinear output dimension mismatch");
    let n = t.dim;
    for (i, o) in out.iter_mut().enumerate() {
        let slice = t.slice(i);
        let mut acc = 0.0;
        for (xl_j, row) in xl.iter().zip(slice.chunks_exact(n)) {
            if *xl_j != 0.0 {
                acc += xl_j * dot(row, xr);
            }
        }
        *o = acc;
    }
}

/// `out = M · [xl; xr] + bias`
pub fn affine(m: &Matrix, xl: &[f64], xr: &[f64], bias: &[f64]) -> Vec<f64> {
    assert_eq!(m.cols, xl.len() + xr.len(), "affine input dimension mismatch");
    assert_eq!(m.rows, bias.len(), "affine bias dimension mismatch");
    let mut out = bias.to_vec();
    let (l, r) = (xl.len(), xr.len());
    for (o, row) in out.iter_mut().zip(m.data.chunks_exact(m.cols)) {
        *o += dot(&row[..l], xl) + dot(&row[l..l + r], xr);
    }
    out
}

pub fn tanh_vec(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.tanh()).collect()
}

/// `max(x, 0) + 0.01 · min(x, 0)`, elementwise.
pub fn leaky_relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0) + 0.01 * v.min(0.0)).collect()
}

/// Numerically stable softmax: shifts by the maximum before exponentiating.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    assert!(!x.is_empty(), "softmax of an empty vector");
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = x.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for o in &mut out {
        *o /= sum;
    }
    out
}

/// Deterministic uniform samples in `[lo, hi]` from the given generator.
pub fn init_uniform(rng: &mut impl Rng, lo: f64, hi: f64, len: usize) -> Vec<f64> {
    let dist = Uniform::new_inclusive(lo, hi);
    (0..len).map(|_| dist.sample(rng)).collect()
}
