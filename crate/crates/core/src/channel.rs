//! CPTP maps in Kraus form and quantum instruments.
//!
//! A channel acts on the factors named at application time and as the identity on
//! everything else. Outputs take the position of the first target factor.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::state::{matrix_from_rows, rows, Factor, FactorLayout, LabeledState, VectorMixture};
use crate::C64;

pub const TOL_CPTP: f64 = 1e-8;
/// Cap on the Hilbert dimension and on the Kraus count produced by [`KrausChannel::tensor_power`].
pub const MAX_POWER_SIZE: usize = 4096;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::BadProbability(p))
    }
}

fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

/// `max |sum K^dag K - I|`.
pub fn completeness_residual(kraus: &[DMatrix<C64>], in_dim: usize) -> f64 {
    let mut sum = DMatrix::<C64>::zeros(in_dim, in_dim);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    linalg::max_abs(&(sum - DMatrix::identity(in_dim, in_dim)))
}

fn check_shapes(kraus: &[DMatrix<C64>], din: usize, dout: usize) -> Result<()> {
    if kraus.is_empty() {
        return Err(Error::CompletenessViolation(f64::INFINITY));
    }
    for k in kraus {
        if k.nrows() != dout || k.ncols() != din {
            return Err(Error::DimMismatch(format!(
                "Kraus operator is {}x{}, expected {dout}x{din}",
                k.nrows(),
                k.ncols()
            )));
        }
    }
    Ok(())
}

/// Targets permuted to the front, and the bookkeeping to put outputs back.
struct Placement {
    front_order: Vec<String>,
    rest: FactorLayout,
    insert_at: usize,
}

fn placement<S: AsRef<str>>(
    layout: &FactorLayout,
    in_layout: &FactorLayout,
    out_layout: &FactorLayout,
    targets: &[S],
) -> Result<Placement> {
    if targets.len() != in_layout.len() {
        return Err(Error::DimMismatch(format!(
            "channel takes {} factors, {} targets given",
            in_layout.len(),
            targets.len()
        )));
    }
    let mut first = usize::MAX;
    for (t, f) in targets.iter().zip(in_layout.factors()) {
        let d = layout.dim_of(t.as_ref())?;
        if d != f.dim {
            return Err(Error::DimMismatch(format!(
                "target `{}` has dimension {d}, channel expects {}",
                t.as_ref(),
                f.dim
            )));
        }
        first = first.min(layout.position(t.as_ref()).unwrap_or(usize::MAX));
    }
    let is_target = |l: &str| targets.iter().any(|t| t.as_ref() == l);
    let rest_factors: Vec<Factor> = layout
        .factors()
        .iter()
        .filter(|f| !is_target(&f.label))
        .cloned()
        .collect();
    let insert_at = layout.factors()[..first]
        .iter()
        .filter(|f| !is_target(&f.label))
        .count();
    let rest = FactorLayout::from_factors(rest_factors)?;
    for f in out_layout.factors() {
        if rest.contains(&f.label) {
            return Err(Error::LabelCollision(f.label.clone()));
        }
    }
    let front_order = targets
        .iter()
        .map(|t| t.as_ref().to_string())
        .chain(rest.labels().into_iter().map(String::from))
        .collect();
    Ok(Placement { front_order, rest, insert_at })
}

impl Placement {
    /// Output layout with the channel outputs first, and the order that restores placement.
    fn layouts(&self, out_layout: &FactorLayout) -> Result<(FactorLayout, Vec<String>)> {
        let front = out_layout.concat(&self.rest)?;
        let rest_labels = self.rest.labels();
        let mut final_order: Vec<String> =
            rest_labels[..self.insert_at].iter().map(|s| s.to_string()).collect();
        final_order.extend(out_layout.labels().into_iter().map(String::from));
        final_order.extend(rest_labels[self.insert_at..].iter().map(|s| s.to_string()));
        Ok((front, final_order))
    }
}

/// A CPTP map `rho -> sum_i K_i rho K_i^dag`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    in_layout: FactorLayout,
    out_layout: FactorLayout,
    kraus: Vec<DMatrix<C64>>,
}

impl KrausChannel {
    /// Validates shapes and completeness within [`TOL_CPTP`].
    pub fn new(in_layout: FactorLayout, out_layout: FactorLayout, kraus: Vec<DMatrix<C64>>) -> Result<Self> {
        check_shapes(&kraus, in_layout.dim(), out_layout.dim())?;
        let r = completeness_residual(&kraus, in_layout.dim());
        if r > TOL_CPTP {
            return Err(Error::CompletenessViolation(r));
        }
        Ok(KrausChannel { in_layout, out_layout, kraus })
    }

    pub fn identity(layout: FactorLayout) -> Self {
        let d = layout.dim();
        KrausChannel {
            in_layout: layout.clone(),
            out_layout: layout,
            kraus: vec![DMatrix::identity(d, d)],
        }
    }

    pub fn in_layout(&self) -> &FactorLayout {
        &self.in_layout
    }

    pub fn out_layout(&self) -> &FactorLayout {
        &self.out_layout
    }

    pub fn kraus(&self) -> &[DMatrix<C64>] {
        &self.kraus
    }

    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(&self.kraus, self.in_layout.dim())
    }

    /// Applies the channel to the factors `targets`, listed in the order of the input layout.
    pub fn apply<S: AsRef<str>>(&self, state: &LabeledState, targets: &[S]) -> Result<LabeledState> {
        let place = placement(state.layout(), &self.in_layout, &self.out_layout, targets)?;
        let front = state.permute_factors(&place.front_order)?;
        let r = place.rest.dim();
        let id = DMatrix::<C64>::identity(r, r);
        let dout = self.out_layout.dim() * r;
        let mut out = DMatrix::zeros(dout, dout);
        for k in &self.kraus {
            let big = linalg::kron(k, &id);
            out += &big * front.matrix() * big.adjoint();
        }
        let (layout, order) = place.layouts(&self.out_layout)?;
        LabeledState::from_parts(layout, out)?.permute_factors(&order)
    }

    /// Low-rank application: every input vector fans out into one vector per Kraus operator.
    pub fn apply_vectors<S: AsRef<str>>(&self, state: &VectorMixture, targets: &[S]) -> Result<VectorMixture> {
        let place = placement(state.layout(), &self.in_layout, &self.out_layout, targets)?;
        let dims = state.layout().dims();
        let order = state.layout().positions_in_order(&place.front_order)?;
        let map = linalg::axis_permutation(&dims, &order);
        let din = self.in_layout.dim();
        let r = place.rest.dim();
        let (front_layout, final_order) = place.layouts(&self.out_layout)?;
        let final_axes = front_layout.positions_in_order(&final_order)?;
        let back = linalg::axis_permutation(&front_layout.dims(), &final_axes);
        let dout = self.out_layout.dim();
        let mut vectors = Vec::with_capacity(state.vectors().len() * self.kraus.len());
        let mut m = DMatrix::<C64>::zeros(din, r);
        for v in state.vectors() {
            for (i, &j) in map.iter().enumerate() {
                m[(j / r, j % r)] = v[i];
            }
            for k in &self.kraus {
                let out = k * &m;
                let mut w = DVector::zeros(dout * r);
                for a in 0..dout {
                    for b in 0..r {
                        w[back[a * r + b]] = out[(a, b)];
                    }
                }
                vectors.push(w);
            }
        }
        let layout = front_layout.reordered(&final_axes);
        VectorMixture::new(layout, vectors)
    }

    /// `k` relabeled copies `L.1 ... L.k` of the channel; `k = 1` returns the channel itself.
    pub fn tensor_power(&self, k: usize) -> Result<KrausChannel> {
        if k == 0 {
            return Err(Error::DimMismatch("tensor power needs k >= 1".into()));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let too_big = |base: usize| {
            (0..k).try_fold(1usize, |acc, _| acc.checked_mul(base).filter(|&v| v <= MAX_POWER_SIZE))
        };
        if too_big(self.kraus.len()).is_none()
            || too_big(self.in_layout.dim()).is_none()
            || too_big(self.out_layout.dim()).is_none()
        {
            return Err(Error::SizeOverflow(format!(
                "{k}-fold power exceeds the cap of {MAX_POWER_SIZE}"
            )));
        }
        let copies = |layout: &FactorLayout| {
            FactorLayout::new((1..=k).flat_map(|i| {
                layout
                    .factors()
                    .iter()
                    .map(move |f| (format!("{}.{i}", f.label), f.dim))
            }))
        };
        let mut kraus = self.kraus.clone();
        for _ in 1..k {
            kraus = kraus
                .iter()
                .flat_map(|a| self.kraus.iter().map(move |b| linalg::kron(a, b)))
                .collect();
        }
        Ok(KrausChannel {
            in_layout: copies(&self.in_layout)?,
            out_layout: copies(&self.out_layout)?,
            kraus,
        })
    }

    pub fn to_json(&self) -> ChannelFile {
        ChannelFile {
            in_factors: self.in_layout.factors().to_vec(),
            out_factors: self.out_layout.factors().to_vec(),
            kraus: self
                .kraus
                .iter()
                .map(|k| MatrixFile { re: rows(k, |z| z.re), im: rows(k, |z| z.im) })
                .collect(),
        }
    }

    pub fn from_json(file: ChannelFile) -> Result<Self> {
        let in_layout = FactorLayout::from_factors(file.in_factors)?;
        let out_layout = FactorLayout::from_factors(file.out_factors)?;
        let kraus = file
            .kraus
            .iter()
            .map(|m| matrix_from_rows(&m.re, &m.im))
            .collect::<Result<Vec<_>>>()?;
        Self::new(in_layout, out_layout, kraus)
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

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// JSON form of a Kraus channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub in_factors: Vec<Factor>,
    pub out_factors: Vec<Factor>,
    pub kraus: Vec<MatrixFile>,
}

/// `tau -> sum_x |x><x| (x) N_x(tau)` with trace-nonincreasing components `N_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    in_layout: FactorLayout,
    out_layout: FactorLayout,
    classical_label: String,
    components: Vec<Vec<DMatrix<C64>>>,
}

impl Instrument {
    pub fn new(
        in_layout: FactorLayout,
        out_layout: FactorLayout,
        classical_label: &str,
        components: Vec<Vec<DMatrix<C64>>>,
    ) -> Result<Self> {
        if out_layout.contains(classical_label) {
            return Err(Error::DuplicateLabel(classical_label.to_string()));
        }
        let all: Vec<DMatrix<C64>> = components.iter().flatten().cloned().collect();
        check_shapes(&all, in_layout.dim(), out_layout.dim())?;
        let r = completeness_residual(&all, in_layout.dim());
        if r > TOL_CPTP {
            return Err(Error::CompletenessViolation(r));
        }
        Ok(Instrument { in_layout, out_layout, classical_label: classical_label.to_string(), components })
    }

    /// Projective measurement in the computational basis, leaving the collapsed state behind.
    pub fn computational_measurement(layout: FactorLayout, classical_label: &str) -> Result<Self> {
        let d = layout.dim();
        let components = (0..d)
            .map(|x| {
                let mut p = DMatrix::zeros(d, d);
                p[(x, x)] = c(1.0);
                vec![p]
            })
            .collect();
        Self::new(layout.clone(), layout, classical_label, components)
    }

    pub fn components(&self) -> &[Vec<DMatrix<C64>>] {
        &self.components
    }

    pub fn classical_label(&self) -> &str {
        &self.classical_label
    }

    /// The trace-preserving channel `sum_x N_x`.
    pub fn summed(&self) -> KrausChannel {
        KrausChannel {
            in_layout: self.in_layout.clone(),
            out_layout: self.out_layout.clone(),
            kraus: self.components.iter().flatten().cloned().collect(),
        }
    }

    /// The instrument as a channel whose output carries the classical register first.
    pub fn with_record(&self) -> Result<KrausChannel> {
        let n = self.components.len();
        let out_layout = FactorLayout::new([(self.classical_label.as_str(), n)])?.concat(&self.out_layout)?;
        let mut kraus = Vec::new();
        for (x, comp) in self.components.iter().enumerate() {
            let mut e = DMatrix::zeros(n, 1);
            e[(x, 0)] = c(1.0);
            kraus.extend(comp.iter().map(|k| linalg::kron(&e, k)));
        }
        Ok(KrausChannel { in_layout: self.in_layout.clone(), out_layout, kraus })
    }

    /// Output gains the classical factor in front of the channel outputs.
    pub fn apply<S: AsRef<str>>(&self, state: &LabeledState, targets: &[S]) -> Result<LabeledState> {
        self.with_record()?.apply(state, targets)
    }
}

/// `N_p(rho) = (1-p) rho + p (X (x) X) rho (X (x) X)` from `A' (x) B'` to `C_A (x) C_B`.
pub fn collective_qubit_flip(p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    let xx = linalg::kron(&pauli_x(), &pauli_x());
    KrausChannel::new(
        FactorLayout::new([("A'", 2), ("B'", 2)])?,
        FactorLayout::new([("C_A", 2), ("C_B", 2)])?,
        vec![DMatrix::identity(4, 4).scale((1.0 - p).sqrt()), xx.scale(p.sqrt())],
    )
}

/// Single-qubit bit flip `A' -> C`.
pub fn bit_flip(p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    KrausChannel::new(
        FactorLayout::new([("A'", 2)])?,
        FactorLayout::new([("C", 2)])?,
        vec![DMatrix::identity(2, 2).scale((1.0 - p).sqrt()), pauli_x().scale(p.sqrt())],
    )
}

/// Complete dephasing in the computational basis, `A' -> C`.
pub fn complete_dephasing(dim: usize) -> Result<KrausChannel> {
    let kraus = (0..dim)
        .map(|i| {
            let mut k = DMatrix::zeros(dim, dim);
            k[(i, i)] = c(1.0);
            k
        })
        .collect();
    KrausChannel::new(
        FactorLayout::new([("A'", dim)])?,
        FactorLayout::new([("C", dim)])?,
        kraus,
    )
}

/// Identity channel on two qubits `A' (x) B' -> C_A (x) C_B`.
pub fn noiseless_two_qubit() -> Result<KrausChannel> {
    KrausChannel::new(
        FactorLayout::new([("A'", 2), ("B'", 2)])?,
        FactorLayout::new([("C_A", 2), ("C_B", 2)])?,
        vec![DMatrix::identity(4, 4)],
    )
}

/// Alice's bit arrives dephased; Bob's qubit arrives intact when it is 0 and is replaced
/// by the erasure flag `|e> = |2>` of the qutrit `C_B` when it is 1.
pub fn erasure_mac() -> Result<KrausChannel> {
    // |0><0| (x) V with V the embedding of the qubit into span{|0>, |1>}
    let mut k0 = DMatrix::zeros(6, 4);
    k0[(0, 0)] = c(1.0);
    k0[(1, 1)] = c(1.0);
    let mut kraus = vec![k0];
    // |1><1| (x) |e><b|
    for b in 0..2 {
        let mut k = DMatrix::zeros(6, 4);
        k[(3 + 2, 2 + b)] = c(1.0);
        kraus.push(k);
    }
    KrausChannel::new(
        FactorLayout::new([("A'", 2), ("B'", 2)])?,
        FactorLayout::new([("C_A", 2), ("C_B", 3)])?,
        kraus,
    )
}
