//! Von Neumann entropy and the information functionals built from it.
//!
//! All values are in bits. Functionals are generic over [`Subsystems`], so the same code
//! evaluates dense states and low-rank channel outputs.

use std::fmt;
use std::ops::{Add, Div, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, Split};
use crate::state::{FactorLayout, LabeledState, PureState, VectorMixture};

pub const TOL_ENTROPIC: f64 = 1e-7;
pub const TOL_CQ: f64 = 1e-9;

/// An information quantity in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bits(pub f64);

impl Bits {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

impl Add for Bits {
    type Output = Bits;
    fn add(self, rhs: Bits) -> Bits {
        Bits(self.0 + rhs.0)
    }
}

impl Sub for Bits {
    type Output = Bits;
    fn sub(self, rhs: Bits) -> Bits {
        Bits(self.0 - rhs.0)
    }
}

impl Neg for Bits {
    type Output = Bits;
    fn neg(self) -> Bits {
        Bits(-self.0)
    }
}

impl Div<f64> for Bits {
    type Output = Bits;
    fn div(self, rhs: f64) -> Bits {
        Bits(self.0 / rhs)
    }
}

impl From<Bits> for f64 {
    fn from(b: Bits) -> f64 {
        b.0
    }
}

/// A multipartite state whose subsystem spectra can be computed.
pub trait Subsystems {
    fn layout(&self) -> &FactorLayout;

    /// Eigenvalues of the reduced state on `labels` (a nonempty label set).
    fn spectrum(&self, labels: &[&str]) -> Result<Vec<f64>>;

    /// Size of the coherences between distinct values of the factor `label`.
    fn classicality_residual(&self, label: &str) -> Result<f64>;
}

impl Subsystems for LabeledState {
    fn layout(&self) -> &FactorLayout {
        LabeledState::layout(self)
    }

    fn spectrum(&self, labels: &[&str]) -> Result<Vec<f64>> {
        Ok(self.partial_trace(labels)?.eigenvalues())
    }

    fn classicality_residual(&self, label: &str) -> Result<f64> {
        LabeledState::classicality_residual(self, label)
    }
}

impl Subsystems for VectorMixture {
    fn layout(&self) -> &FactorLayout {
        VectorMixture::layout(self)
    }

    fn spectrum(&self, labels: &[&str]) -> Result<Vec<f64>> {
        self.subsystem_spectrum(labels)
    }

    fn classicality_residual(&self, label: &str) -> Result<f64> {
        VectorMixture::classicality_residual(self, label)
    }
}

impl Subsystems for PureState {
    fn layout(&self) -> &FactorLayout {
        PureState::layout(self)
    }

    fn spectrum(&self, labels: &[&str]) -> Result<Vec<f64>> {
        let pos = self.layout().positions(labels)?;
        let split = Split::new(&self.layout().dims(), &pos);
        Ok(linalg::mixture_spectrum(std::slice::from_ref(self.vector()), &split))
    }

    fn classicality_residual(&self, label: &str) -> Result<f64> {
        VectorMixture::from(self).classicality_residual(label)
    }
}

fn union<'a>(parts: &[&[&'a str]]) -> Result<Vec<&'a str>> {
    let mut out: Vec<&str> = Vec::new();
    for part in parts {
        for &l in part.iter() {
            if out.contains(&l) {
                return Err(Error::OverlappingSubsystems(l.to_string()));
            }
            out.push(l);
        }
    }
    Ok(out)
}

/// `H(S) = -tr rho_S log2 rho_S`; the empty subsystem has zero entropy.
pub fn entropy<S: Subsystems + ?Sized>(s: &S, subsystem: &[&str]) -> Result<Bits> {
    let labels = union(&[subsystem])?;
    for l in &labels {
        if !s.layout().contains(l) {
            return Err(Error::UnknownLabel(l.to_string()));
        }
    }
    if labels.is_empty() {
        return Ok(Bits(0.0));
    }
    Ok(Bits(linalg::spectrum_entropy(&s.spectrum(&labels)?)))
}

/// `H(p) = -p log2 p - (1-p) log2 (1-p)`, exactly zero at the endpoints.
pub fn binary_entropy(p: f64) -> Result<Bits> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbability(p));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(Bits(0.0));
    }
    Ok(Bits(-p * p.log2() - (1.0 - p) * (1.0 - p).log2()))
}

/// `I(X;B) = H(X) + H(B) - H(XB)`.
pub fn mutual_information<S: Subsystems + ?Sized>(s: &S, x: &[&str], b: &[&str]) -> Result<Bits> {
    let xb = union(&[x, b])?;
    Ok(entropy(s, x)? + entropy(s, b)? - entropy(s, &xb)?)
}

/// `I(X;B|Z) = H(XZ) + H(BZ) - H(Z) - H(XBZ)`.
pub fn conditional_mutual_information<S: Subsystems + ?Sized>(
    s: &S,
    x: &[&str],
    b: &[&str],
    z: &[&str],
) -> Result<Bits> {
    let xbz = union(&[x, b, z])?;
    let xz = union(&[x, z])?;
    let bz = union(&[b, z])?;
    Ok(entropy(s, &xz)? + entropy(s, &bz)? - entropy(s, z)? - entropy(s, &xbz)?)
}

/// `I_c(A>B) = H(B) - H(AB)`.
pub fn coherent_information<S: Subsystems + ?Sized>(s: &S, a: &[&str], b: &[&str]) -> Result<Bits> {
    let ab = union(&[a, b])?;
    Ok(entropy(s, b)? - entropy(s, &ab)?)
}

/// `I_c(A>BX) = H(BX) - H(ABX)` after checking that every factor of `x` is classical.
pub fn conditional_coherent_information<S: Subsystems + ?Sized>(
    s: &S,
    a: &[&str],
    b: &[&str],
    x: &[&str],
) -> Result<Bits> {
    let abx = union(&[a, b, x])?;
    for &label in x {
        let residual = s.classicality_residual(label)?;
        if residual > TOL_CQ {
            return Err(Error::NotClassicalConditioner { label: label.to_string(), residual });
        }
    }
    let bx = union(&[b, x])?;
    Ok(entropy(s, &bx)? - entropy(s, &abx)?)
}

fn fresh_label(taken: &[&FactorLayout], stem: &str) -> String {
    let mut label = stem.to_string();
    while taken.iter().any(|l| l.contains(&label)) {
        label.push('\'');
    }
    label
}

/// `I_c(rho, N) = H(N(rho)) - H((1 (x) N)(Phi_rho))`.
///
/// `rho`'s factors feed the channel inputs in layout order.
pub fn channel_coherent_information(rho: &LabeledState, ch: &KrausChannel) -> Result<Bits> {
    if rho.layout().dims() != ch.in_layout().dims() {
        return Err(Error::DimMismatch(format!(
            "state dims {:?} vs channel input dims {:?}",
            rho.layout().dims(),
            ch.in_layout().dims()
        )));
    }
    let reference = fresh_label(&[rho.layout(), ch.out_layout()], "R");
    let phi = rho.purify(&reference)?;
    let targets = rho.layout().labels();
    let out = ch.apply_vectors(&VectorMixture::from(&phi), &targets)?;
    let outputs = ch.out_layout().labels();
    coherent_information(&out, &[reference.as_str()], &outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel;
    use crate::state::{cq_state, Ensemble};

    fn bell(a: &str, b: &str) -> PureState {
        PureState::maximally_entangled(2, (a, b)).unwrap()
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap().0, 0.0);
        assert_eq!(binary_entropy(1.0).unwrap().0, 0.0);
        assert_eq!(binary_entropy(0.5).unwrap().0, 1.0);
        // direct evaluation of the formula at p = 0.1
        assert!((binary_entropy(0.1).unwrap().0 - 0.4689955935892812).abs() < 1e-15);
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn entropy_examples() {
        let b = bell("A", "B");
        assert!(entropy(&b.density(), &["A", "B"]).unwrap().0.abs() < 1e-12);
        assert!((entropy(&b.density(), &["A"]).unwrap().0 - 1.0).abs() < 1e-12);
        let d = LabeledState::diagonal("A", &[0.9, 0.1]).unwrap();
        assert!((entropy(&d, &["A"]).unwrap().0 - binary_entropy(0.1).unwrap().0).abs() < 1e-12);
        assert!(matches!(entropy(&d, &["Q"]), Err(Error::UnknownLabel(_))));
        let four = PureState::maximally_entangled(4, ("A", "B")).unwrap();
        assert!((entropy(&four, &["B"]).unwrap().0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let b = bell("A", "B").density();
        assert!((mutual_information(&b, &["A"], &["B"]).unwrap().0 - 2.0).abs() < 1e-12);
        let prod = LabeledState::diagonal("A", &[0.3, 0.7])
            .unwrap()
            .tensor(&LabeledState::diagonal("B", &[0.6, 0.4]).unwrap())
            .unwrap();
        assert!(mutual_information(&prod, &["A"], &["B"]).unwrap().0.abs() < 1e-12);
        assert!(matches!(
            mutual_information(&prod, &["A"], &["A", "B"]),
            Err(Error::OverlappingSubsystems(_))
        ));
    }

    #[test]
    fn conditional_mutual_information_reductions() {
        let b = bell("A", "B").density();
        let z = LabeledState::diagonal("Z", &[0.25, 0.75]).unwrap();
        let s = b.tensor(&z).unwrap();
        let cmi = conditional_mutual_information(&s, &["A"], &["B"], &["Z"]).unwrap().0;
        assert!((cmi - 2.0).abs() < 1e-12);
        let empty = conditional_mutual_information(&b, &["A"], &["B"], &[]).unwrap().0;
        assert!((empty - mutual_information(&b, &["A"], &["B"]).unwrap().0).abs() < 1e-12);
    }

    #[test]
    fn coherent_information_examples() {
        let b = bell("A", "B");
        assert!((coherent_information(&b, &["A"], &["B"]).unwrap().0 - 1.0).abs() < 1e-12);
        let prod = PureState::basis("A", 2, 0).unwrap().tensor(&PureState::basis("B", 2, 1).unwrap()).unwrap();
        assert!(coherent_information(&prod, &["A"], &["B"]).unwrap().0.abs() < 1e-12);
    }

    #[test]
    fn channel_coherent_information_examples() {
        let rho = LabeledState::diagonal("A'", &[0.7, 0.3]).unwrap();
        let id = KrausChannel::identity(FactorLayout::new([("A'", 2)]).unwrap());
        let got = channel_coherent_information(&rho, &id).unwrap().0;
        assert!((got - binary_entropy(0.3).unwrap().0).abs() < 1e-12);

        let half = LabeledState::diagonal("A'", &[0.5, 0.5]).unwrap();
        let deph = channel::complete_dephasing(2).unwrap();
        assert!(channel_coherent_information(&half, &deph).unwrap().0.abs() < 1e-12);

        let flip = channel::bit_flip(0.1).unwrap();
        let want = 1.0 - binary_entropy(0.1).unwrap().0;
        assert!((channel_coherent_information(&half, &flip).unwrap().0 - want).abs() < 1e-12);
        let wrong = LabeledState::diagonal("A'", &[0.5, 0.25, 0.25]).unwrap();
        assert!(matches!(
            channel_coherent_information(&wrong, &flip),
            Err(Error::DimMismatch(_))
        ));
    }

    #[test]
    fn conditional_coherent_information_single_branch() {
        let b = bell("A", "B").density();
        let s = cq_state(&Ensemble::new(vec![(1.0, b.clone())]).unwrap(), "X").unwrap();
        let got = conditional_coherent_information(&s, &["A"], &["B"], &["X"]).unwrap().0;
        assert!((got - coherent_information(&b, &["A"], &["B"]).unwrap().0).abs() < 1e-12);
    }

    #[test]
    fn conditional_coherent_information_rejects_quantum_conditioner() {
        let s = bell("X", "A").tensor(&bell("B", "Q")).unwrap().density();
        assert!(matches!(
            conditional_coherent_information(&s, &["A"], &["B"], &["X"]),
            Err(Error::NotClassicalConditioner { .. })
        ));
    }
}
