//! Worked examples: corner points of the collective qubit flip and the erasure channel's
//! region.

use serde::{Deserialize, Serialize};

use crate::channel::{collective_qubit_flip, erasure_mac};
use crate::error::Result;
use crate::region::{
    cq_output_state, cq_pentagon, cq_rectangle, cq_terms, qq_pentagon, qq_rectangle, BlockedMac, Bound2, PentBound2,
    Point2, RectBound2,
};
use crate::state::{Ensemble, FactorLayout, PureState};

/// `|Phi>^{AA'}` and `|Phi>^{BB'}`.
pub fn bell_inputs() -> Result<(PureState, PureState)> {
    Ok((
        PureState::maximally_entangled(2, ("A", "A'"))?,
        PureState::maximally_entangled(2, ("B", "B'"))?,
    ))
}

fn qubit(label: &str, amps: [f64; 2]) -> Result<PureState> {
    PureState::from_real(FactorLayout::new([(label, 2)])?, &amps)
}

/// Alice sends `|+>` or `|->` with equal probability.
pub fn plus_minus_ensemble(label: &str) -> Result<Ensemble<PureState>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ensemble::new(vec![(0.5, qubit(label, [s, s])?), (0.5, qubit(label, [s, -s])?)])
}

/// Alice sends `|0>` with probability `1 - p` and `|1>` with probability `p`.
pub fn computational_ensemble(label: &str, p: f64) -> Result<Ensemble<PureState>> {
    Ensemble::new(vec![(1.0 - p, qubit(label, [1.0, 0.0])?), (p, qubit(label, [0.0, 1.0])?)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqCorners {
    pub p: f64,
    pub pentagon: PentBound2,
    pub vertices: Vec<Point2>,
    pub rectangle: RectBound2,
}

/// Both qq characterizations of the collective qubit flip at Bell inputs.
pub fn flip_qq_corners(p: f64) -> Result<QqCorners> {
    let mac = BlockedMac::new(&collective_qubit_flip(p)?, 1)?.with_description(format!("qubit-flip(p={p})"));
    let (a, b) = bell_inputs()?;
    let pentagon = qq_pentagon(&mac, &a, &b)?;
    let vertices = Bound2::Pentagon(pentagon.clone()).vertices();
    Ok(QqCorners { p, pentagon, vertices, rectangle: qq_rectangle(&mac, &a, &b)? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqCorners {
    pub p: f64,
    /// Alice's `{|+>, |->}` ensemble.
    pub omega1: RectBound2,
    /// Alice's `{|0>, |1>}` ensemble.
    pub omega2: RectBound2,
    pub omega2_pentagon: PentBound2,
    /// `(I(X;BC), I_c(B>C))` of the `{|0>, |1>}` ensemble.
    pub omega2_corner: Point2,
}

/// Corner points of the cq region of the collective qubit flip, with a Bell input for Bob.
pub fn flip_cq_corners(p: f64) -> Result<CqCorners> {
    let mac = BlockedMac::new(&collective_qubit_flip(p)?, 1)?.with_description(format!("qubit-flip(p={p})"));
    let bob = PureState::maximally_entangled(2, ("B", "B'"))?;
    let plus = plus_minus_ensemble("A'")?;
    let zero = computational_ensemble("A'", 0.5)?;
    let terms = cq_terms(&cq_output_state(&mac, &zero, &bob)?)?;
    Ok(CqCorners {
        p,
        omega1: cq_rectangle(&mac, &plus, &bob)?,
        omega2: cq_rectangle(&mac, &zero, &bob)?,
        omega2_pentagon: cq_pentagon(&mac, &zero, &bob)?,
        omega2_corner: [terms.mi_x_bc, terms.ci_b_c],
    })
}

/// The erasure channel's rectangle for Alice's `{1-p, p}` ensemble and a Bell input for Bob.
pub fn erasure_rectangle(p: f64) -> Result<RectBound2> {
    let mac = BlockedMac::new(&erasure_mac()?, 1)?.with_description("erasure");
    let bob = PureState::maximally_entangled(2, ("B", "B'"))?;
    cq_rectangle(&mac, &computational_ensemble("A'", p)?, &bob)
}
