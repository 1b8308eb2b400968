//! Dense complex kernels shared by the state and channel code.
//!
//! Multipartite indices follow the row-major convention: the leftmost factor
//! of a layout is the most significant digit of the flat basis index.

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Eigenvalues below this contribute nothing to an entropy sum.
pub const EIG_FLOOR: f64 = 1e-12;

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub fn kron_vec(a: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

/// Real spectrum of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues (ascending) with the matching unit eigenvectors as columns.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = hermitian_part(m).symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Square root of a positive semidefinite matrix; eigenvalues at or below [`EIG_FLOOR`]
/// are treated as zero so round-off does not surface as `1e-8` square roots.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (values, vectors) = hermitian_eigen(m);
    let roots = DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| C64::new(if v > EIG_FLOOR { v.sqrt() } else { 0.0 }, 0.0)),
    );
    &vectors * DMatrix::from_diagonal(&roots) * vectors.adjoint()
}

/// Shannon entropy in bits of a spectrum, ignoring entries at or below [`EIG_FLOOR`].
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&v| v > EIG_FLOOR)
        .map(|&v| -v * v.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Row-major strides for a list of factor dimensions.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// For a reordering of tensor axes, `map[old_flat] = new_flat`.
///
/// `order[j]` is the old axis that lands at new position `j`.
pub fn axis_permutation(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = order.iter().map(|&a| dims[a]).collect();
    let new_strides = strides(&new_dims);
    // stride each old axis has in the new layout
    let mut moved = vec![0; dims.len()];
    for (j, &a) in order.iter().enumerate() {
        moved[a] = new_strides[j];
    }
    (0..total)
        .map(|flat| {
            dims.iter()
                .enumerate()
                .map(|(a, &d)| ((flat / old_strides[a]) % d) * moved[a])
                .sum()
        })
        .collect()
}

/// Index bookkeeping for splitting a multipartite space into kept and traced parts.
///
/// `index[t * kept_dim + a]` is the flat index of kept basis state `a` joined with traced
/// basis state `t`.
#[derive(Debug, Clone)]
pub struct Split {
    pub kept_dim: usize,
    pub traced_dim: usize,
    pub index: Vec<usize>,
}

impl Split {
    /// `keep` lists axis positions in ascending order.
    pub fn new(dims: &[usize], keep: &[usize]) -> Self {
        let traced: Vec<usize> = (0..dims.len()).filter(|a| !keep.contains(a)).collect();
        let order: Vec<usize> = keep.iter().chain(traced.iter()).copied().collect();
        let kept_dim: usize = keep.iter().map(|&a| dims[a]).product();
        let traced_dim: usize = traced.iter().map(|&a| dims[a]).product();
        let map = axis_permutation(dims, &order);
        // map sends old -> (a * traced_dim + t); invert into t-major layout
        let mut index = vec![0; map.len()];
        for (old, &new) in map.iter().enumerate() {
            let a = new / traced_dim;
            let t = new % traced_dim;
            index[t * kept_dim + a] = old;
        }
        Split { kept_dim, traced_dim, index }
    }

    pub fn trace_out(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let k = self.kept_dim;
        let mut out = DMatrix::zeros(k, k);
        for t in 0..self.traced_dim {
            let idx = &self.index[t * k..(t + 1) * k];
            for (b, &jb) in idx.iter().enumerate() {
                for (a, &ia) in idx.iter().enumerate() {
                    out[(a, b)] += m[(ia, jb)];
                }
            }
        }
        out
    }

    /// Reshapes a vector on the full space into a kept x traced matrix.
    pub fn reshape(&self, v: &DVector<C64>) -> DMatrix<C64> {
        let k = self.kept_dim;
        DMatrix::from_fn(k, self.traced_dim, |a, t| v[self.index[t * k + a]])
    }
}

/// Spectrum of `sum_i tr_traced |v_i><v_i|`, computed through whichever Gram matrix is smaller.
pub fn mixture_spectrum(vectors: &[DVector<C64>], split: &Split) -> Vec<f64> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let k = split.kept_dim;
    let cols = split.traced_dim * vectors.len();
    let mut w = DMatrix::<C64>::zeros(k, cols);
    for (i, v) in vectors.iter().enumerate() {
        for t in 0..split.traced_dim {
            let c = i * split.traced_dim + t;
            for a in 0..k {
                w[(a, c)] = v[split.index[t * k + a]];
            }
        }
    }
    let gram = if k <= cols { &w * w.adjoint() } else { w.adjoint() * &w };
    hermitian_eigenvalues(&gram)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
