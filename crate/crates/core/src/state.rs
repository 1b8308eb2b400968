//! Labeled multipartite quantum states.
//!
//! Every state carries a [`FactorLayout`], an ordered list of named tensor factors. The
//! computational basis is ordered lexicographically over factor indices with the leftmost
//! factor most significant, in memory and in the JSON file format alike.

use std::collections::HashSet;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Split};
use crate::C64;

pub const TOL_HERM: f64 = 1e-9;
pub const TOL_TRACE: f64 = 1e-9;
pub const TOL_NORM: f64 = 1e-9;
pub const TOL_PROB: f64 = 1e-9;
pub const TOL_PSD: f64 = 1e-9;
pub const TOL_RECON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered, uniquely labeled tensor factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorLayout {
    factors: Vec<Factor>,
}

impl FactorLayout {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<Factor> = factors
            .into_iter()
            .map(|(label, dim)| Factor { label: label.into(), dim })
            .collect();
        Self::from_factors(factors)
    }

    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &factors {
            if f.dim == 0 {
                return Err(Error::DimMismatch(format!("factor `{}` has dimension 0", f.label)));
            }
            if !seen.insert(f.label.as_str()) {
                return Err(Error::DuplicateLabel(f.label.clone()));
            }
        }
        Ok(FactorLayout { factors })
    }

    pub fn empty() -> Self {
        FactorLayout { factors: Vec::new() }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.label.as_str()).collect()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label)
            .map(|i| self.factors[i].dim)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Positions of `labels`, sorted ascending and deduplicated.
    pub fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut pos = labels
            .iter()
            .map(|l| {
                self.position(l.as_ref())
                    .ok_or_else(|| Error::UnknownLabel(l.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        pos.sort_unstable();
        pos.dedup();
        Ok(pos)
    }

    pub fn concat(&self, other: &FactorLayout) -> Result<FactorLayout> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self::from_factors(factors)
    }

    /// Positions of `labels` in the given order; every label must appear once.
    pub fn positions_in_order<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        self.permutation_for(labels)
    }

    /// Layout with factors taken at the given positions.
    pub fn reordered(&self, positions: &[usize]) -> FactorLayout {
        self.select(positions)
    }

    fn select(&self, positions: &[usize]) -> FactorLayout {
        FactorLayout {
            factors: positions.iter().map(|&i| self.factors[i].clone()).collect(),
        }
    }

    /// Axis order (old positions) realizing `new_order`.
    fn permutation_for<S: AsRef<str>>(&self, new_order: &[S]) -> Result<Vec<usize>> {
        if new_order.len() != self.factors.len() {
            return Err(Error::BadPermutation(format!(
                "expected {} labels, got {}",
                self.factors.len(),
                new_order.len()
            )));
        }
        let mut used = vec![false; self.factors.len()];
        new_order
            .iter()
            .map(|l| {
                let l = l.as_ref();
                let p = self
                    .position(l)
                    .ok_or_else(|| Error::BadPermutation(format!("unknown label `{l}`")))?;
                if std::mem::replace(&mut used[p], true) {
                    return Err(Error::BadPermutation(format!("label `{l}` repeated")));
                }
                Ok(p)
            })
            .collect()
    }
}

fn check_disjoint(a: &FactorLayout, b: &FactorLayout) -> Result<()> {
    for f in b.factors() {
        if a.contains(&f.label) {
            return Err(Error::DuplicateLabel(f.label.clone()));
        }
    }
    Ok(())
}

/// A density matrix over labeled tensor factors.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledState {
    layout: FactorLayout,
    matrix: DMatrix<C64>,
}

impl LabeledState {
    /// Validates shape, Hermiticity, trace and positivity.
    pub fn new(layout: FactorLayout, matrix: DMatrix<C64>) -> Result<Self> {
        let s = Self::from_parts(layout, matrix)?;
        s.validate()?;
        Ok(s)
    }

    /// Checks only that the matrix shape matches the layout.
    pub fn from_parts(layout: FactorLayout, matrix: DMatrix<C64>) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimMismatch(format!(
                "layout dimension {d} but matrix is {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(LabeledState { layout, matrix })
    }

    /// Diagonal state with the given probabilities on a single factor.
    pub fn diagonal(label: &str, probs: &[f64]) -> Result<Self> {
        let layout = FactorLayout::new([(label, probs.len())])?;
        let diag = DVector::from_iterator(probs.len(), probs.iter().map(|&p| C64::new(p, 0.0)));
        Self::new(layout, DMatrix::from_diagonal(&diag))
    }

    pub fn maximally_mixed(layout: FactorLayout) -> Self {
        let d = layout.dim();
        let matrix = DMatrix::identity(d, d).scale(1.0 / d as f64);
        LabeledState { layout, matrix }
    }

    pub fn layout(&self) -> &FactorLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        linalg::max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.matrix)
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_residual();
        if h > TOL_HERM {
            return Err(Error::InvalidState(format!("Hermiticity residual {h:e}")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -TOL_PSD {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn tensor(&self, other: &LabeledState) -> Result<LabeledState> {
        check_disjoint(&self.layout, &other.layout)?;
        Ok(LabeledState {
            layout: self.layout.concat(&other.layout)?,
            matrix: linalg::kron(&self.matrix, &other.matrix),
        })
    }

    /// Reduced state on `keep`, factors kept in their original order.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<LabeledState> {
        let pos = self.layout.positions(keep)?;
        if pos.len() == self.layout.len() {
            return Ok(self.clone());
        }
        let split = Split::new(&self.layout.dims(), &pos);
        Ok(LabeledState {
            layout: self.layout.select(&pos),
            matrix: split.trace_out(&self.matrix),
        })
    }

    pub fn permute_factors<S: AsRef<str>>(&self, new_order: &[S]) -> Result<LabeledState> {
        let order = self.layout.permutation_for(new_order)?;
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return Ok(self.clone());
        }
        let map = linalg::axis_permutation(&self.layout.dims(), &order);
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                out[(map[i], map[j])] = self.matrix[(i, j)];
            }
        }
        Ok(LabeledState { layout: self.layout.select(&order), matrix: out })
    }

    /// Purification on `(ref_label, original factors...)` with a full-dimension reference.
    pub fn purify(&self, ref_label: &str) -> Result<PureState> {
        if self.layout.contains(ref_label) {
            return Err(Error::DuplicateLabel(ref_label.to_string()));
        }
        let d = self.dim();
        let (values, vectors) = linalg::hermitian_eigen(&self.matrix);
        // |Phi> = sum_i sqrt(l_i) |i>_R |e_i>
        let mut psi = DVector::zeros(d * d);
        for (i, &l) in values.iter().enumerate() {
            let w = l.max(0.0).sqrt();
            if w == 0.0 {
                continue;
            }
            for a in 0..d {
                psi[i * d + a] = vectors[(a, i)] * w;
            }
        }
        let norm = psi.norm();
        psi.unscale_mut(norm);
        let layout = FactorLayout::new([(ref_label, d)])?.concat(&self.layout)?;
        PureState::new(layout, psi)
    }

    /// Largest absolute entry outside the diagonal blocks of `label`.
    pub fn classicality_residual(&self, label: &str) -> Result<f64> {
        let pos = self.layout.positions(&[label])?;
        let split = Split::new(&self.layout.dims(), &pos);
        // index[t * kx + x]
        let kx = split.kept_dim;
        let mut worst = 0.0f64;
        for t in 0..split.traced_dim {
            for s in 0..split.traced_dim {
                for x in 0..kx {
                    for y in 0..kx {
                        if x == y {
                            continue;
                        }
                        let v = self.matrix[(split.index[t * kx + x], split.index[s * kx + y])];
                        worst = worst.max(v.norm());
                    }
                }
            }
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> StateFile {
        StateFile {
            factors: self.layout.factors().to_vec(),
            re: rows(&self.matrix, |z| z.re),
            im: rows(&self.matrix, |z| z.im),
        }
    }

    pub fn from_json(file: StateFile) -> Result<Self> {
        let layout = FactorLayout::from_factors(file.factors)?;
        let matrix = matrix_from_rows(&file.re, &file.im)?;
        Self::new(layout, matrix)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_json())?)?;
        Ok(())
    }
}

/// JSON form of a density matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub factors: Vec<Factor>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

pub(crate) fn rows(m: &DMatrix<C64>, part: impl Fn(&C64) -> f64) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| part(&m[(i, j)])).collect())
        .collect()
}

pub(crate) fn matrix_from_rows(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<DMatrix<C64>> {
    let nrows = re.len();
    let ncols = re.first().map_or(0, Vec::len);
    if im.len() != nrows
        || re.iter().chain(im.iter()).any(|r| r.len() != ncols)
    {
        return Err(Error::Parse("`re` and `im` must be rectangular with equal shapes".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| C64::new(re[i][j], im[i][j])))
}

/// A unit vector over labeled tensor factors.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    layout: FactorLayout,
    vector: DVector<C64>,
}

impl PureState {
    pub fn new(layout: FactorLayout, vector: DVector<C64>) -> Result<Self> {
        if vector.len() != layout.dim() {
            return Err(Error::DimMismatch(format!(
                "layout dimension {} but vector has {} entries",
                layout.dim(),
                vector.len()
            )));
        }
        let n = vector.norm();
        if (n - 1.0).abs() > TOL_NORM {
            return Err(Error::InvalidState(format!("vector norm {n}")));
        }
        Ok(PureState { layout, vector })
    }

    /// Normalizes `vector` before construction; fails on a zero vector.
    pub fn normalized(layout: FactorLayout, vector: DVector<C64>) -> Result<Self> {
        let n = vector.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(layout, vector.unscale(n))
    }

    /// Computational basis state `|index>` on a single factor.
    pub fn basis(label: &str, dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimMismatch(format!("basis index {index} >= dimension {dim}")));
        }
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self::new(FactorLayout::new([(label, dim)])?, v)
    }

    /// Normalized state from real amplitudes on the given layout.
    pub fn from_real(layout: FactorLayout, amplitudes: &[f64]) -> Result<Self> {
        let v = DVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|&a| C64::new(a, 0.0)));
        Self::normalized(layout, v)
    }

    /// `sum_b |b>|b> / sqrt(dim)` on the two given labels.
    pub fn maximally_entangled(dim: usize, labels: (&str, &str)) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimMismatch("dimension must be positive".into()));
        }
        let layout = FactorLayout::new([(labels.0, dim), (labels.1, dim)])?;
        let mut v = DVector::zeros(dim * dim);
        let amp = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        for b in 0..dim {
            v[b * dim + b] = amp;
        }
        Self::new(layout, v)
    }

    pub fn layout(&self) -> &FactorLayout {
        &self.layout
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.vector
    }

    pub fn density(&self) -> LabeledState {
        LabeledState {
            layout: self.layout.clone(),
            matrix: &self.vector * self.vector.adjoint(),
        }
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        check_disjoint(&self.layout, &other.layout)?;
        Ok(PureState {
            layout: self.layout.concat(&other.layout)?,
            vector: linalg::kron_vec(&self.vector, &other.vector),
        })
    }

    pub fn permute_factors<S: AsRef<str>>(&self, new_order: &[S]) -> Result<PureState> {
        let order = self.layout.permutation_for(new_order)?;
        let map = linalg::axis_permutation(&self.layout.dims(), &order);
        let mut v = DVector::zeros(self.vector.len());
        for (i, &m) in map.iter().enumerate() {
            v[m] = self.vector[i];
        }
        Ok(PureState { layout: self.layout.select(&order), vector: v })
    }

    /// Renames a factor in place.
    pub fn relabel(mut self, from: &str, to: &str) -> Result<PureState> {
        if from != to && self.layout.contains(to) {
            return Err(Error::DuplicateLabel(to.to_string()));
        }
        let p = self
            .layout
            .position(from)
            .ok_or_else(|| Error::UnknownLabel(from.to_string()))?;
        self.layout.factors[p].label = to.to_string();
        Ok(self)
    }
}

/// `rho = sum_i |v_i><v_i|` for unnormalized vectors `v_i`.
///
/// Channel outputs of pure inputs have rank at most the Kraus count, so subsystem
/// spectra come from small Gram matrices instead of the full density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMixture {
    layout: FactorLayout,
    vectors: Vec<DVector<C64>>,
}

impl VectorMixture {
    pub fn new(layout: FactorLayout, vectors: Vec<DVector<C64>>) -> Result<Self> {
        let d = layout.dim();
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::DimMismatch(format!(
                "layout dimension {d} but vector has {} entries",
                v.len()
            )));
        }
        Ok(VectorMixture { layout, vectors })
    }

    pub fn layout(&self) -> &FactorLayout {
        &self.layout
    }

    pub fn vectors(&self) -> &[DVector<C64>] {
        &self.vectors
    }

    pub fn trace(&self) -> f64 {
        self.vectors.iter().map(|v| v.norm_squared()).sum()
    }

    pub fn to_dense(&self) -> LabeledState {
        let d = self.layout.dim();
        let mut m = DMatrix::zeros(d, d);
        for v in &self.vectors {
            m += v * v.adjoint();
        }
        LabeledState { layout: self.layout.clone(), matrix: m }
    }

    /// `sum_x p_x |x><x| (x) rho_x` with the classical register prepended.
    ///
    /// Every branch must share one layout.
    pub fn classical_mixture(label: &str, branches: &[(f64, VectorMixture)]) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| Error::BadDistribution("empty ensemble".into()))?;
        check_distribution(branches.iter().map(|(p, _)| *p))?;
        let n = branches.len();
        let layout = FactorLayout::new([(label, n)])?.concat(&first.1.layout)?;
        let inner = first.1.layout.dim();
        let mut vectors = Vec::new();
        for (x, (p, branch)) in branches.iter().enumerate() {
            if branch.layout != first.1.layout {
                return Err(Error::LayoutMismatch("ensemble branches differ in layout".into()));
            }
            let w = p.sqrt();
            for v in &branch.vectors {
                let mut full = DVector::zeros(n * inner);
                full.rows_mut(x * inner, inner).copy_from(&(v * C64::new(w, 0.0)));
                vectors.push(full);
            }
        }
        Ok(VectorMixture { layout, vectors })
    }

    pub fn subsystem_spectrum<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<f64>> {
        let pos = self.layout.positions(labels)?;
        let split = Split::new(&self.layout.dims(), &pos);
        Ok(linalg::mixture_spectrum(&self.vectors, &split))
    }

    /// Off-diagonal block size on `label`; zero when every vector lives in one block.
    pub fn classicality_residual(&self, label: &str) -> Result<f64> {
        let pos = self.layout.positions(&[label])?;
        let split = Split::new(&self.layout.dims(), &pos);
        let kx = split.kept_dim;
        let single_block = self.vectors.iter().all(|v| {
            let m = split.reshape(v);
            (0..kx)
                .filter(|&x| m.row(x).iter().any(|z| z.norm() > 0.0))
                .count()
                <= 1
        });
        if single_block {
            return Ok(0.0);
        }
        if self.layout.dim() > 4096 {
            return Err(Error::SizeOverflow(
                "classicality check needs a dense matrix above 4096 dimensions".into(),
            ));
        }
        self.to_dense().classicality_residual(label)
    }
}

/// JSON form of a pure state vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureStateFile {
    pub factors: Vec<Factor>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl PureState {
    pub fn to_json(&self) -> PureStateFile {
        PureStateFile {
            factors: self.layout.factors().to_vec(),
            re: self.vector.iter().map(|z| z.re).collect(),
            im: self.vector.iter().map(|z| z.im).collect(),
        }
    }

    pub fn from_json(file: PureStateFile) -> Result<Self> {
        if file.re.len() != file.im.len() {
            return Err(Error::Parse("`re` and `im` differ in length".into()));
        }
        let layout = FactorLayout::from_factors(file.factors)?;
        let v = DVector::from_iterator(
            file.re.len(),
            file.re.iter().zip(&file.im).map(|(&r, &i)| C64::new(r, i)),
        );
        Self::new(layout, v)
    }
}

impl From<&PureState> for VectorMixture {
    fn from(p: &PureState) -> Self {
        VectorMixture { layout: p.layout.clone(), vectors: vec![p.vector.clone()] }
    }
}

pub(crate) fn check_distribution(probs: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for p in probs {
        if !(p.is_finite() && p >= -TOL_PROB) {
            return Err(Error::BadDistribution(format!("probability {p}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > TOL_PROB {
        return Err(Error::BadDistribution(format!("probabilities sum to {total}")));
    }
    Ok(())
}

/// Probability-weighted list of states.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<S> {
    items: Vec<(f64, S)>,
}

impl<S> Ensemble<S> {
    pub fn new(items: Vec<(f64, S)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::BadDistribution("empty ensemble".into()));
        }
        check_distribution(items.iter().map(|(p, _)| *p))?;
        Ok(Ensemble { items })
    }

    pub fn items(&self) -> &[(f64, S)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.items.iter().map(|(p, _)| *p).collect()
    }
}

/// `sum_x p(x) |x><x| (x) sigma_x` with the classical factor first.
pub fn cq_state(ensemble: &Ensemble<LabeledState>, classical_label: &str) -> Result<LabeledState> {
    let layout0 = ensemble.items[0].1.layout.clone();
    if layout0.contains(classical_label) {
        return Err(Error::DuplicateLabel(classical_label.to_string()));
    }
    let n = ensemble.len();
    let d = layout0.dim();
    let mut m = DMatrix::zeros(n * d, n * d);
    for (x, (p, s)) in ensemble.items.iter().enumerate() {
        if s.layout != layout0 {
            return Err(Error::LayoutMismatch("ensemble states differ in layout".into()));
        }
        m.view_mut((x * d, x * d), (d, d)).copy_from(&s.matrix.scale(*p));
    }
    let layout = FactorLayout::new([(classical_label, n)])?.concat(&layout0)?;
    Ok(LabeledState { layout, matrix: m })
}

/// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
///
/// Evaluated as the squared trace norm of `sqrt(rho) sqrt(sigma)`, whose singular values
/// are first-order stable where the eigenvalue square roots of the product are not.
pub fn fidelity(rho: &LabeledState, sigma: &LabeledState) -> Result<f64> {
    if rho.layout != sigma.layout {
        return Err(Error::LayoutMismatch("fidelity needs identical layouts".into()));
    }
    let product = linalg::psd_sqrt(&rho.matrix) * linalg::psd_sqrt(&sigma.matrix);
    let t: f64 = product.singular_values().iter().sum();
    Ok((t * t).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ket(label: &str, i: usize) -> LabeledState {
        PureState::basis(label, 2, i).unwrap().density()
    }

    fn bell(a: &str, b: &str) -> PureState {
        PureState::maximally_entangled(2, (a, b)).unwrap()
    }

    #[test]
    fn layout_rejects_duplicates() {
        assert!(matches!(
            FactorLayout::new([("A", 2), ("A", 3)]),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn tensor_of_basis_projectors() {
        let s = ket("A", 0).tensor(&ket("B", 1)).unwrap();
        let expected = [0.0, 1.0, 0.0, 0.0];
        for (i, &diag) in expected.iter().enumerate() {
            for j in 0..4 {
                let want = if i == j { diag } else { 0.0 };
                assert_eq!(s.matrix()[(i, j)], C64::new(want, 0.0));
            }
        }
        assert_eq!(s.layout().labels(), vec!["A", "B"]);
    }

    #[test]
    fn tensor_with_trivial_factor() {
        let one = LabeledState::maximally_mixed(FactorLayout::new([("T", 1)]).unwrap());
        let rho = ket("A", 1);
        let s = one.tensor(&rho).unwrap();
        assert_eq!(s.layout().labels(), vec!["T", "A"]);
        assert_eq!(s.matrix(), rho.matrix());
    }

    #[test]
    fn tensor_of_maximally_mixed() {
        let a = LabeledState::maximally_mixed(FactorLayout::new([("A", 2)]).unwrap());
        let b = LabeledState::maximally_mixed(FactorLayout::new([("B", 2)]).unwrap());
        let s = a.tensor(&b).unwrap();
        assert_abs_diff_eq!(
            linalg::max_abs(&(s.matrix() - DMatrix::identity(4, 4).scale(0.25))),
            0.0
        );
    }

    #[test]
    fn tensor_rejects_shared_labels() {
        assert!(matches!(ket("A", 0).tensor(&ket("A", 1)), Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let r = bell("A", "B").density().partial_trace(&["A"]).unwrap();
        assert!(linalg::max_abs(&(r.matrix() - DMatrix::identity(2, 2).scale(0.5))) < 1e-15);
    }

    #[test]
    fn partial_trace_over_nothing_is_identity() {
        let s = bell("A", "B").density();
        assert_eq!(s.partial_trace(&["A", "B"]).unwrap(), s);
    }

    #[test]
    fn partial_trace_unknown_label() {
        assert!(matches!(
            ket("A", 0).partial_trace(&["Z"]),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn permute_swaps_basis_order() {
        let s = ket("A", 0).tensor(&ket("B", 1)).unwrap();
        let t = s.permute_factors(&["B", "A"]).unwrap();
        let want = ket("B", 1).tensor(&ket("A", 0)).unwrap();
        assert_eq!(t, want);
        assert_eq!(t.permute_factors(&["A", "B"]).unwrap(), s);
        assert_eq!(s.permute_factors(&["A", "B"]).unwrap(), s);
        assert!(matches!(s.permute_factors(&["A"]), Err(Error::BadPermutation(_))));
        assert!(matches!(s.permute_factors(&["A", "A"]), Err(Error::BadPermutation(_))));
    }

    #[test]
    fn purify_maximally_mixed_qubit() {
        let rho = LabeledState::maximally_mixed(FactorLayout::new([("A", 2)]).unwrap());
        let psi = rho.purify("R").unwrap();
        assert_eq!(psi.layout().labels(), vec!["R", "A"]);
        let back = psi.density().partial_trace(&["A"]).unwrap();
        assert!(linalg::max_abs(&(back.matrix() - rho.matrix())) < 1e-12);
        let r = psi.density().partial_trace(&["R"]).unwrap();
        assert!(linalg::max_abs(&(r.matrix() - DMatrix::identity(2, 2).scale(0.5))) < 1e-12);
    }

    #[test]
    fn purify_pure_state_is_rank_one() {
        let phi = PureState::from_real(FactorLayout::new([("A", 2)]).unwrap(), &[0.6, 0.8]).unwrap();
        let psi = phi.density().purify("R").unwrap();
        let r = psi.density().partial_trace(&["R"]).unwrap();
        let ev = r.eigenvalues();
        assert!((ev[1] - 1.0).abs() < 1e-12 && ev[0].abs() < 1e-12);
    }

    #[test]
    fn purify_rejects_existing_label() {
        assert!(ket("A", 0).purify("A").is_err());
    }

    #[test]
    fn fidelity_examples() {
        let a = ket("A", 0);
        assert_abs_diff_eq!(fidelity(&a, &a).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&a, &ket("A", 1)).unwrap(), 0.0, epsilon = 1e-12);
        let p = LabeledState::diagonal("A", &[0.5, 0.5]).unwrap();
        let q = LabeledState::diagonal("A", &[0.9, 0.1]).unwrap();
        let want = (0.45f64.sqrt() + 0.05f64.sqrt()).powi(2);
        assert_abs_diff_eq!(fidelity(&p, &q).unwrap(), want, epsilon = 1e-12);
        assert!(matches!(fidelity(&a, &ket("B", 0)), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn maximally_entangled_dims() {
        let one = PureState::maximally_entangled(1, ("A", "B")).unwrap();
        assert_eq!(one.vector().len(), 1);
        let b = bell("A", "B");
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(b.vector()[0].re, s);
        assert_abs_diff_eq!(b.vector()[3].re, s);
        assert_eq!(b.vector()[1], C64::new(0.0, 0.0));
        assert!(PureState::maximally_entangled(0, ("A", "B")).is_err());
    }

    #[test]
    fn cq_state_examples() {
        let sigma = ket("B", 1);
        let single = cq_state(&Ensemble::new(vec![(1.0, sigma.clone())]).unwrap(), "X").unwrap();
        assert_eq!(single.layout().labels(), vec!["X", "B"]);
        let x0 = PureState::basis("X", 1, 0).unwrap().density();
        assert_eq!(single, x0.tensor(&sigma).unwrap());

        let mixed = LabeledState::maximally_mixed(FactorLayout::new([("B", 2)]).unwrap());
        let two = cq_state(&Ensemble::new(vec![(0.5, mixed.clone()), (0.5, mixed.clone())]).unwrap(), "X")
            .unwrap();
        let want = LabeledState::diagonal("X", &[0.5, 0.5]).unwrap().tensor(&mixed).unwrap();
        assert!(linalg::max_abs(&(two.matrix() - want.matrix())) < 1e-15);
        assert_eq!(two.classicality_residual("X").unwrap(), 0.0);

        assert!(matches!(
            Ensemble::new(vec![(0.5, mixed.clone()), (0.6, mixed)]),
            Err(Error::BadDistribution(_))
        ));
    }

    #[test]
    fn mixture_matches_dense_spectrum() {
        let psi = bell("A", "B").tensor(&bell("C", "D")).unwrap();
        let m = VectorMixture::from(&psi);
        let dense = psi.density();
        for keep in [vec!["A"], vec!["A", "C"], vec!["B", "C", "D"]] {
            let want = dense.partial_trace(&keep).unwrap().eigenvalues();
            let got = m.subsystem_spectrum(&keep).unwrap();
            let ent = |v: &[f64]| linalg::spectrum_entropy(v);
            assert!((ent(&want) - ent(&got)).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let s = bell("A", "B").density();
        let text = serde_json::to_string(&s.to_json()).unwrap();
        let back = LabeledState::from_json(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
