//! Capacity-region inner bounds for a two-sender channel used `k` times.
//!
//! Each evaluator builds the output state of a family of inputs and returns the rate
//! bounds per channel use:
//!
//! * [`cq_rectangle`]: `R <= I(X;C^k)/k`, `Q <= I_c(B>C^k X)/k`
//! * [`cq_pentagon`]: `R <= I(X;BC^k)/k`, `Q <= I_c(B>C^k X)/k`,
//!   `R+Q <= [I(X;C^k) + I_c(B>C^k X)]/k`
//! * [`qq_pentagon`]: `Q_a <= I_c(A>BC^k)/k`, `Q_b <= I_c(B>AC^k)/k`, `Q_a+Q_b <= I_c(AB>C^k)/k`
//! * [`qq_rectangle`]: `Q_a <= I_c(A>C^k)/k`, `Q_b <= I_c(B>C^k)/k`
//! * [`full_region_bounds`]: the six bounds on `(R_a, R_b, Q_a, Q_b)`
//!
//! Bound values keep their sign; clamping to the nonnegative quadrant happens only when
//! polygon corners are enumerated.

mod cloud;
mod geometry;

pub use cloud::{emit_region, round_sig, to_rounded_json, Format, Generator, RegionCloud, Witness};
pub use geometry::{contains, distance_outside, hausdorff, hull_2d, support, Point2, TOL_GEOM};

use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::entropic::{
    conditional_coherent_information, conditional_mutual_information, entropy, mutual_information, Bits,
    TOL_ENTROPIC,
};
use crate::error::{Error, Result};
use crate::state::{Ensemble, FactorLayout, PureState, VectorMixture};

/// A two-sender channel blocked into `k` uses.
///
/// The single-use channel has exactly two input factors, Alice's first. Copies are labeled
/// `L.1 ... L.k` when `k > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedMac {
    k: usize,
    channel: KrausChannel,
    alice_inputs: Vec<String>,
    bob_inputs: Vec<String>,
    outputs: Vec<String>,
    description: String,
}

impl BlockedMac {
    pub fn new(channel: &KrausChannel, k: usize) -> Result<Self> {
        if channel.in_layout().len() != 2 {
            return Err(Error::DimMismatch(format!(
                "a two-sender channel has two input factors, found {}",
                channel.in_layout().len()
            )));
        }
        let power = channel.tensor_power(k)?;
        let labels: Vec<String> = power.in_layout().labels().into_iter().map(String::from).collect();
        let alice_inputs = labels.iter().step_by(2).cloned().collect();
        let bob_inputs = labels.iter().skip(1).step_by(2).cloned().collect();
        let outputs = power.out_layout().labels().into_iter().map(String::from).collect();
        Ok(BlockedMac {
            k,
            channel: power,
            alice_inputs,
            bob_inputs,
            outputs,
            description: "custom".to_string(),
        })
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// The `k`-fold channel.
    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    pub fn alice_inputs(&self) -> Vec<&str> {
        self.alice_inputs.iter().map(String::as_str).collect()
    }

    pub fn bob_inputs(&self) -> Vec<&str> {
        self.bob_inputs.iter().map(String::as_str).collect()
    }

    pub fn outputs(&self) -> Vec<&str> {
        self.outputs.iter().map(String::as_str).collect()
    }

    fn dim_of(&self, labels: &[String]) -> usize {
        labels
            .iter()
            .map(|l| self.channel.in_layout().dim_of(l).unwrap_or(1))
            .product()
    }

    pub fn alice_input_dim(&self) -> usize {
        self.dim_of(&self.alice_inputs)
    }

    pub fn bob_input_dim(&self) -> usize {
        self.dim_of(&self.bob_inputs)
    }

    pub fn output_dim(&self) -> usize {
        self.channel.out_layout().dim()
    }

    fn sender_layout(&self, purifier: &str, dim: usize, inputs: &[String]) -> Result<FactorLayout> {
        let ins = self.channel.in_layout();
        FactorLayout::new(
            std::iter::once((purifier.to_string(), dim))
                .chain(inputs.iter().map(|l| (l.clone(), ins.dim_of(l).unwrap_or(1)))),
        )
    }

    /// `(purifier, A'.1, ..., A'.k)`.
    pub fn alice_layout(&self, purifier: &str, purifier_dim: usize) -> Result<FactorLayout> {
        self.sender_layout(purifier, purifier_dim, &self.alice_inputs)
    }

    /// `(purifier, B'.1, ..., B'.k)`.
    pub fn bob_layout(&self, purifier: &str, purifier_dim: usize) -> Result<FactorLayout> {
        self.sender_layout(purifier, purifier_dim, &self.bob_inputs)
    }

    /// Layout of Alice's channel inputs alone, for ensembles on `A'^k`.
    pub fn alice_input_layout(&self) -> Result<FactorLayout> {
        let ins = self.channel.in_layout();
        FactorLayout::new(self.alice_inputs.iter().map(|l| (l.clone(), ins.dim_of(l).unwrap_or(1))))
    }

    /// Checks that `state` carries every label of `inputs` at the channel's dimension and
    /// returns its remaining (purifying) labels.
    fn purifier_labels(&self, state: &FactorLayout, inputs: &[String], who: &str) -> Result<Vec<String>> {
        for l in inputs {
            let want = self.channel.in_layout().dim_of(l)?;
            let got = state
                .dim_of(l)
                .map_err(|_| Error::DimMismatch(format!("{who}'s input lacks channel factor `{l}`")))?;
            if got != want {
                return Err(Error::DimMismatch(format!(
                    "{who}'s factor `{l}` has dimension {got}, channel expects {want}"
                )));
            }
        }
        Ok(state
            .labels()
            .into_iter()
            .filter(|l| !inputs.iter().any(|i| i == l))
            .map(String::from)
            .collect())
    }

    fn run(&self, joint: &PureState) -> Result<VectorMixture> {
        let targets = self.channel.in_layout().labels();
        self.channel.apply_vectors(&VectorMixture::from(joint), &targets)
    }

    fn check_ensemble(&self, ens: &Ensemble<PureState>, inputs: &[String], who: &str) -> Result<()> {
        for (_, s) in ens.items() {
            let extra = self.purifier_labels(s.layout(), inputs, who)?;
            if !extra.is_empty() {
                return Err(Error::DimMismatch(format!(
                    "{who}'s ensemble states must live on the channel inputs only, found {extra:?}"
                )));
            }
        }
        Ok(())
    }
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn join<'a>(parts: &[&'a [String]]) -> Vec<&'a str> {
    parts.iter().flat_map(|p| p.iter().map(String::as_str)).collect()
}

/// Output `omega^{ABC^k} = N^k(Psi_1 (x) Psi_2)` with the label groups it is read through.
#[derive(Debug, Clone)]
pub struct QqState {
    pub state: VectorMixture,
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c: Vec<String>,
}

/// Output `omega^{XBC^k} = sum_x p_x |x><x| (x) N^k(phi_x (x) Psi)`.
#[derive(Debug, Clone)]
pub struct CqState {
    pub state: VectorMixture,
    pub x: String,
    pub b: Vec<String>,
    pub c: Vec<String>,
}

/// Output `omega^{XYABC^k} = sum p(x) p(y) |x><x| (x) |y><y| (x) N^k(psi_x (x) phi_y)`.
#[derive(Debug, Clone)]
pub struct FullState {
    pub state: VectorMixture,
    pub x: String,
    pub y: String,
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c: Vec<String>,
}

pub fn qq_output_state(mac: &BlockedMac, alice: &PureState, bob: &PureState) -> Result<QqState> {
    let a = mac.purifier_labels(alice.layout(), &mac.alice_inputs, "Alice")?;
    let b = mac.purifier_labels(bob.layout(), &mac.bob_inputs, "Bob")?;
    let state = mac.run(&alice.tensor(bob)?)?;
    Ok(QqState { state, a, b, c: mac.outputs.clone() })
}

fn classical_label(taken: &[&[String]], stem: &str) -> String {
    let mut label = stem.to_string();
    while taken.iter().any(|t| t.contains(&label)) {
        label.push('\'');
    }
    label
}

fn warn_cardinality(kind: &str, size: usize, limit: u128) {
    if size as u128 > limit {
        log::warn!("{kind} ensemble has {size} elements, more than the sufficient cardinality {limit}");
    }
}

fn cardinality_limit(base: usize, k: usize) -> u128 {
    (base as u128).saturating_pow(2 * k as u32)
}

pub fn cq_output_state(mac: &BlockedMac, ensemble: &Ensemble<PureState>, bob: &PureState) -> Result<CqState> {
    mac.check_ensemble(ensemble, &mac.alice_inputs, "Alice")?;
    let b = mac.purifier_labels(bob.layout(), &mac.bob_inputs, "Bob")?;
    let single = |l: &str| mac.channel.in_layout().dim_of(l).unwrap_or(1);
    let base = single(&mac.alice_inputs[0]).max(mac.output_dim_single());
    warn_cardinality("Alice's", ensemble.len(), cardinality_limit(base, mac.k));
    let branches = ensemble
        .items()
        .iter()
        .map(|(p, phi)| Ok((*p, mac.run(&phi.tensor(bob)?)?)))
        .collect::<Result<Vec<_>>>()?;
    let x = classical_label(&[&b, &mac.outputs], "X");
    let state = VectorMixture::classical_mixture(&x, &branches)?;
    Ok(CqState { state, x, b, c: mac.outputs.clone() })
}

pub fn full_output_state(
    mac: &BlockedMac,
    alice_ens: &Ensemble<PureState>,
    bob_ens: &Ensemble<PureState>,
) -> Result<FullState> {
    let mut a = None;
    for (_, psi) in alice_ens.items() {
        let labels = mac.purifier_labels(psi.layout(), &mac.alice_inputs, "Alice")?;
        if a.get_or_insert_with(|| labels.clone()) != &labels {
            return Err(Error::LayoutMismatch("Alice's ensemble states differ in layout".into()));
        }
    }
    let mut b = None;
    for (_, phi) in bob_ens.items() {
        let labels = mac.purifier_labels(phi.layout(), &mac.bob_inputs, "Bob")?;
        if b.get_or_insert_with(|| labels.clone()) != &labels {
            return Err(Error::LayoutMismatch("Bob's ensemble states differ in layout".into()));
        }
    }
    let (a, b) = (a.unwrap_or_default(), b.unwrap_or_default());
    let single = |l: &str| mac.channel.in_layout().dim_of(l).unwrap_or(1);
    let c1 = mac.output_dim_single();
    warn_cardinality("Alice's", alice_ens.len(), cardinality_limit(single(&mac.alice_inputs[0]).min(c1), mac.k));
    warn_cardinality("Bob's", bob_ens.len(), cardinality_limit(single(&mac.bob_inputs[0]).min(c1), mac.k));
    let x = classical_label(&[&a, &b, &mac.outputs], "X");
    let y = classical_label(&[&a, &b, &mac.outputs, std::slice::from_ref(&x)], "Y");
    let rows = alice_ens
        .items()
        .iter()
        .map(|(px, psi)| {
            let inner = bob_ens
                .items()
                .iter()
                .map(|(py, phi)| Ok((*py, mac.run(&psi.tensor(phi)?)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok((*px, VectorMixture::classical_mixture(&y, &inner)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let state = VectorMixture::classical_mixture(&x, &rows)?;
    Ok(FullState { state, x, y, a, b, c: mac.outputs.clone() })
}

impl BlockedMac {
    fn output_dim_single(&self) -> usize {
        let d = self.output_dim() as f64;
        d.powf(1.0 / self.k as f64).round() as usize
    }
}

/// Rectangle `0 <= x <= r_max`, `0 <= y <= q_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectBound2 {
    pub r_max: Bits,
    pub q_max: Bits,
    pub provenance: String,
}

/// Pentagon `0 <= x <= a_max`, `0 <= y <= b_max`, `x + y <= sum_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PentBound2 {
    pub a_max: Bits,
    pub b_max: Bits,
    pub sum_max: Bits,
    pub provenance: String,
}

impl PentBound2 {
    fn checked(self) -> Result<Self> {
        let slack = self.a_max.0 + self.b_max.0 - self.sum_max.0;
        if slack.is_nan() || slack < -TOL_ENTROPIC {
            return Err(Error::InvalidState(format!(
                "pentagon bounds violate a + b >= sum by {:e} ({})",
                -slack, self.provenance
            )));
        }
        Ok(self)
    }
}

/// The six bounds on `(R_a, R_b, Q_a, Q_b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SixBound4 {
    pub ra_max: Bits,
    pub rb_max: Bits,
    pub rab_max: Bits,
    pub qa_max: Bits,
    pub qb_max: Bits,
    pub qab_max: Bits,
    pub provenance: String,
}

impl SixBound4 {
    /// Vertices `(R_a, R_b, Q_a, Q_b)` of the clamped region: the product of the classical
    /// and quantum pentagons.
    pub fn corner_points(&self) -> Vec<[f64; 4]> {
        let classical = pentagon_vertices(self.ra_max.0, self.rb_max.0, self.rab_max.0);
        let quantum = pentagon_vertices(self.qa_max.0, self.qb_max.0, self.qab_max.0);
        classical
            .iter()
            .flat_map(|r| quantum.iter().map(move |q| [r[0], r[1], q[0], q[1]]))
            .collect()
    }
}

/// A 2-D bound of either shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Bound2 {
    Rectangle(RectBound2),
    Pentagon(PentBound2),
}

impl From<RectBound2> for Bound2 {
    fn from(b: RectBound2) -> Self {
        Bound2::Rectangle(b)
    }
}

impl From<PentBound2> for Bound2 {
    fn from(b: PentBound2) -> Self {
        Bound2::Pentagon(b)
    }
}

impl Bound2 {
    pub fn kind(&self) -> &'static str {
        match self {
            Bound2::Rectangle(_) => "rectangle",
            Bound2::Pentagon(_) => "pentagon",
        }
    }

    /// Raw signed bound values.
    pub fn values(&self) -> Vec<f64> {
        match self {
            Bound2::Rectangle(r) => vec![r.r_max.0, r.q_max.0],
            Bound2::Pentagon(p) => vec![p.a_max.0, p.b_max.0, p.sum_max.0],
        }
    }

    pub fn provenance(&self) -> &str {
        match self {
            Bound2::Rectangle(r) => &r.provenance,
            Bound2::Pentagon(p) => &p.provenance,
        }
    }

    /// Polygon vertices after clamping every bound at zero.
    pub fn vertices(&self) -> Vec<Point2> {
        match self {
            Bound2::Rectangle(r) => rectangle_vertices(r.r_max.0, r.q_max.0),
            Bound2::Pentagon(p) => pentagon_vertices(p.a_max.0, p.b_max.0, p.sum_max.0),
        }
    }

    /// `max` over the clamped polygon of `cos(theta) x + sin(theta) y`.
    pub fn support(&self, theta: f64) -> f64 {
        support(&self.vertices(), theta)
    }
}

fn push_unique(out: &mut Vec<Point2>, p: Point2) {
    if out.iter().all(|q| (q[0] - p[0]).hypot(q[1] - p[1]) > TOL_GEOM) {
        out.push(p);
    }
}

pub fn rectangle_vertices(r: f64, q: f64) -> Vec<Point2> {
    let (r, q) = (r.max(0.0), q.max(0.0));
    let mut out = Vec::with_capacity(4);
    for p in [[0.0, 0.0], [r, 0.0], [r, q], [0.0, q]] {
        push_unique(&mut out, p);
    }
    out
}

/// Corners of `{0 <= x <= a, 0 <= y <= b, x + y <= s}`; four when the sum constraint is slack.
pub fn pentagon_vertices(a: f64, b: f64, s: f64) -> Vec<Point2> {
    let (a, b, s) = (a.max(0.0), b.max(0.0), s.max(0.0));
    let x1 = a.min(s);
    let y1 = b.min(s - x1);
    let y2 = b.min(s);
    let x2 = a.min(s - y2);
    let mut out = Vec::with_capacity(5);
    for p in [[0.0, 0.0], [x1, 0.0], [x1, y1], [x2, y2], [0.0, y2]] {
        push_unique(&mut out, p);
    }
    out
}

fn qq_entropies(w: &QqState) -> Result<[f64; 4]> {
    let s = &w.state;
    let h = |labels: Vec<&str>| entropy(s, &labels).map(f64::from);
    Ok([
        h(refs(&w.c))?,
        h(join(&[&w.a, &w.c]))?,
        h(join(&[&w.b, &w.c]))?,
        h(join(&[&w.a, &w.b, &w.c]))?,
    ])
}

/// `(I_c(A>BC^k), I_c(B>AC^k), I_c(AB>C^k)) / k` on `N^k(Psi_1 (x) Psi_2)`.
pub fn qq_pentagon(mac: &BlockedMac, alice: &PureState, bob: &PureState) -> Result<PentBound2> {
    let w = qq_output_state(mac, alice, bob)?;
    let [h_c, h_ac, h_bc, h_abc] = qq_entropies(&w)?;
    let k = mac.k as f64;
    PentBound2 {
        a_max: Bits((h_bc - h_abc) / k),
        b_max: Bits((h_ac - h_abc) / k),
        sum_max: Bits((h_c - h_abc) / k),
        provenance: format!("qq pentagon, k={}, {}", mac.k, mac.description),
    }
    .checked()
}

/// `(I_c(A>C^k), I_c(B>C^k)) / k`, the rectangle form superseded by [`qq_pentagon`].
pub fn qq_rectangle(mac: &BlockedMac, alice: &PureState, bob: &PureState) -> Result<RectBound2> {
    let w = qq_output_state(mac, alice, bob)?;
    let s = &w.state;
    let h_c = entropy(s, &refs(&w.c))?.0;
    let h_ac = entropy(s, &join(&[&w.a, &w.c]))?.0;
    let h_bc = entropy(s, &join(&[&w.b, &w.c]))?.0;
    let k = mac.k as f64;
    Ok(RectBound2 {
        r_max: Bits((h_c - h_ac) / k),
        q_max: Bits((h_c - h_bc) / k),
        provenance: format!("qq rectangle, k={}, {}", mac.k, mac.description),
    })
}

/// The entropic terms of a cq output state.
#[derive(Debug, Clone, Copy)]
pub struct CqTerms {
    /// `I(X;C^k)`
    pub mi_x_c: f64,
    /// `I(X;BC^k)`
    pub mi_x_bc: f64,
    /// `I_c(B>C^k X)`
    pub ci_b_cx: f64,
    /// `I_c(B>C^k)`
    pub ci_b_c: f64,
}

pub fn cq_terms(w: &CqState) -> Result<CqTerms> {
    let s = &w.state;
    let x = [w.x.as_str()];
    let c = refs(&w.c);
    let bc = join(&[&w.b, &w.c]);
    Ok(CqTerms {
        mi_x_c: mutual_information(s, &x, &c)?.0,
        mi_x_bc: mutual_information(s, &x, &bc)?.0,
        ci_b_cx: conditional_coherent_information(s, &refs(&w.b), &c, &x)?.0,
        ci_b_c: (entropy(s, &c)? - entropy(s, &bc)?).0,
    })
}

/// `(I(X;C^k), I_c(B>C^k X)) / k` for an ensemble on Alice's inputs and a pure input of Bob.
pub fn cq_rectangle(mac: &BlockedMac, ensemble: &Ensemble<PureState>, bob: &PureState) -> Result<RectBound2> {
    let t = cq_terms(&cq_output_state(mac, ensemble, bob)?)?;
    let k = mac.k as f64;
    Ok(RectBound2 {
        r_max: Bits(t.mi_x_c / k),
        q_max: Bits(t.ci_b_cx / k),
        provenance: format!("cq rectangle, k={}, {}", mac.k, mac.description),
    })
}

/// `(I(X;BC^k), I_c(B>C^k X), I(X;C^k) + I_c(B>C^k X)) / k`.
///
/// Fails if the sum bound disagrees with `I(X;BC^k) + I_c(B>C^k)` beyond the entropic tolerance.
pub fn cq_pentagon(mac: &BlockedMac, ensemble: &Ensemble<PureState>, bob: &PureState) -> Result<PentBound2> {
    let t = cq_terms(&cq_output_state(mac, ensemble, bob)?)?;
    let sum = t.mi_x_c + t.ci_b_cx;
    let other = t.mi_x_bc + t.ci_b_c;
    if (sum - other).abs() > TOL_ENTROPIC {
        return Err(Error::InvalidState(format!(
            "cq sum-rate expressions disagree: {sum} vs {other}"
        )));
    }
    let k = mac.k as f64;
    PentBound2 {
        a_max: Bits(t.mi_x_bc / k),
        b_max: Bits(t.ci_b_cx / k),
        sum_max: Bits(sum / k),
        provenance: format!("cq pentagon, k={}, {}", mac.k, mac.description),
    }
    .checked()
}

/// The six bounds for ensembles of bipartite pure inputs of both senders.
pub fn full_region_bounds(
    mac: &BlockedMac,
    alice_ens: &Ensemble<PureState>,
    bob_ens: &Ensemble<PureState>,
) -> Result<SixBound4> {
    let w = full_output_state(mac, alice_ens, bob_ens)?;
    let s = &w.state;
    let (x, y) = ([w.x.as_str()], [w.y.as_str()]);
    let xy = [w.x.as_str(), w.y.as_str()];
    let c = refs(&w.c);
    let k = mac.k as f64;
    let cb = join(&[&w.c, &w.b]);
    let ca = join(&[&w.c, &w.a]);
    let ab = join(&[&w.a, &w.b]);
    Ok(SixBound4 {
        ra_max: conditional_mutual_information(s, &x, &c, &y)? / k,
        rb_max: conditional_mutual_information(s, &y, &c, &x)? / k,
        rab_max: mutual_information(s, &xy, &c)? / k,
        qa_max: conditional_coherent_information(s, &refs(&w.a), &cb, &xy)? / k,
        qb_max: conditional_coherent_information(s, &refs(&w.b), &ca, &xy)? / k,
        qab_max: conditional_coherent_information(s, &ab, &c, &xy)? / k,
        provenance: format!("six-bound region, k={}, {}", mac.k, mac.description),
    })
}
