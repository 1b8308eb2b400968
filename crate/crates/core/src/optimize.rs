//! Derivative-free maximization over input states, frontier sweeps and the blocking
//! additivity experiment.
//!
//! Pure states are parameterized by `2d` reals (real parts, then imaginary parts) decoded by
//! normalization. Ensemble probabilities are a softmax of unconstrained logits. The local
//! search is an adaptive Nelder-Mead simplex that rebuilds itself around the best vertex
//! when it collapses, and keeps going while that still improves the value.
//!
//! Randomness is split per task: restart `r` of a search seeded with `s` draws from
//! ChaCha stream `r` of seed `s`, so results do not depend on execution order and the best
//! value never decreases as restarts are added.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::entropic::Bits;
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::region::{
    cq_pentagon, cq_rectangle, distance_outside, qq_pentagon, qq_rectangle, BlockedMac, Bound2, Point2,
    RegionCloud, Witness,
};
use crate::state::{Ensemble, FactorLayout, PureState, PureStateFile};
use crate::C64;

/// Gaps below this many bits are not distinguishable from optimizer error.
pub const NOISE_FLOOR: f64 = 2e-3;

/// Largest ensemble used by cq sweeps.
pub const MAX_ENSEMBLE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Objective evaluations allowed per restart.
    pub max_iters: usize,
    /// Edge length of the initial simplex.
    pub simplex_scale: f64,
    pub seed: u64,
    /// A simplex whose values spread less than this has converged.
    pub convergence_tol: f64,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 20,
            max_iters: 4000,
            simplex_scale: 0.5,
            seed: 0,
            convergence_tol: 1e-10,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol <= 0.0 {
            return Err(Error::InvalidConfig("convergence_tol must be positive".into()));
        }
        if !(self.simplex_scale > 0.0 && self.simplex_scale.is_finite()) {
            return Err(Error::InvalidConfig("simplex_scale must be positive".into()));
        }
        Ok(())
    }
}

/// The generator for restart (or task) `stream` under `seed`.
pub fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussians(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// A Haar-random pure state on `layout`.
pub fn random_pure(layout: &FactorLayout, rng: &mut impl Rng) -> PureState {
    let d = layout.dim();
    loop {
        if let Ok(s) = decode_pure(layout, &gaussians(2 * d, rng)) {
            return s;
        }
    }
}

/// Decodes `2d` reals (real parts, then imaginary parts) into a normalized state.
pub fn decode_pure(layout: &FactorLayout, params: &[f64]) -> Result<PureState> {
    let d = layout.dim();
    if params.len() != 2 * d {
        return Err(Error::DimMismatch(format!("{} parameters for a dimension-{d} state", params.len())));
    }
    let v = DVector::from_iterator(d, (0..d).map(|i| C64::new(params[i], params[d + i])));
    PureState::normalized(layout.clone(), v)
}

/// Inverse of [`decode_pure`] up to normalization.
pub fn encode_pure(state: &PureState) -> Vec<f64> {
    let v = state.vector();
    v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect()
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Which 2-D inner bound a sweep traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Characterization {
    /// Rectangle `(I_c(A>C), I_c(B>C))` over pure inputs of both senders.
    QqRect,
    /// Pentagon `(I_c(A>BC), I_c(B>AC), I_c(AB>C))` over pure inputs of both senders.
    QqPent,
    /// Rectangle `(I(X;C), I_c(B>CX))` over an ensemble of Alice and a pure input of Bob.
    CqRect,
    /// Pentagon `(I(X;BC), I_c(B>CX), I(X;C) + I_c(B>CX))`.
    CqPent,
}

impl Characterization {
    pub fn axes(self) -> [&'static str; 2] {
        match self {
            Characterization::QqRect | Characterization::QqPent => ["qa", "qb"],
            Characterization::CqRect | Characterization::CqPent => ["ra", "qb"],
        }
    }

    pub fn is_cq(self) -> bool {
        matches!(self, Characterization::CqRect | Characterization::CqPent)
    }
}

impl std::str::FromStr for Characterization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qq-rect" => Ok(Characterization::QqRect),
            "qq-pent" => Ok(Characterization::QqPent),
            "cq-rect" => Ok(Characterization::CqRect),
            "cq-pent" => Ok(Characterization::CqPent),
            other => Err(Error::InvalidConfig(format!("unknown characterization `{other}`"))),
        }
    }
}

/// Decoded inputs of a blocked channel.
#[derive(Debug, Clone)]
pub enum Inputs {
    Qq { alice: PureState, bob: PureState },
    Cq { ensemble: Ensemble<PureState>, bob: PureState },
}

/// A parameter vector split by owner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputPoint {
    /// Pure state on `A A'^k`; empty for cq inputs.
    pub alice_params: Vec<f64>,
    /// Pure state on `B B'^k`.
    pub bob_params: Vec<f64>,
    /// Logits followed by one state on `A'^k` per element.
    pub ensemble_params: Option<Vec<f64>>,
}

/// The search space of a characterization on a blocked channel.
///
/// Purifiers `A` and `B` have the dimension of the inputs they purify.
#[derive(Debug, Clone)]
pub struct InputSpace {
    alice: FactorLayout,
    bob: FactorLayout,
    ensemble_size: Option<usize>,
}

impl InputSpace {
    pub fn new(mac: &BlockedMac, characterization: Characterization) -> Result<Self> {
        let bob = mac.bob_layout("B", mac.bob_input_dim())?;
        if characterization.is_cq() {
            let d = mac.alice_input_dim();
            Ok(InputSpace {
                alice: mac.alice_input_layout()?,
                bob,
                ensemble_size: Some(d.saturating_mul(d).min(MAX_ENSEMBLE)),
            })
        } else {
            Ok(InputSpace { alice: mac.alice_layout("A", mac.alice_input_dim())?, bob, ensemble_size: None })
        }
    }

    pub fn with_ensemble_size(mut self, n: usize) -> Result<Self> {
        if self.ensemble_size.is_none() || n == 0 {
            return Err(Error::InvalidConfig("ensemble size applies to cq spaces and must be positive".into()));
        }
        self.ensemble_size = Some(n);
        Ok(self)
    }

    pub fn alice_layout(&self) -> &FactorLayout {
        &self.alice
    }

    pub fn bob_layout(&self) -> &FactorLayout {
        &self.bob
    }

    pub fn ensemble_size(&self) -> Option<usize> {
        self.ensemble_size
    }

    fn alice_len(&self) -> usize {
        match self.ensemble_size {
            Some(n) => n * (1 + 2 * self.alice.dim()),
            None => 2 * self.alice.dim(),
        }
    }

    /// Number of real parameters.
    pub fn dim(&self) -> usize {
        self.alice_len() + 2 * self.bob.dim()
    }

    pub fn point(&self, params: &[f64]) -> Result<InputPoint> {
        if params.len() != self.dim() {
            return Err(Error::DimMismatch(format!("{} parameters, space has {}", params.len(), self.dim())));
        }
        let (a, b) = params.split_at(self.alice_len());
        Ok(match self.ensemble_size {
            Some(_) => InputPoint { alice_params: Vec::new(), bob_params: b.to_vec(), ensemble_params: Some(a.to_vec()) },
            None => InputPoint { alice_params: a.to_vec(), bob_params: b.to_vec(), ensemble_params: None },
        })
    }

    pub fn flatten(&self, point: &InputPoint) -> Vec<f64> {
        let mut out = point.ensemble_params.clone().unwrap_or_else(|| point.alice_params.clone());
        out.extend_from_slice(&point.bob_params);
        out
    }

    pub fn decode(&self, params: &[f64]) -> Result<Inputs> {
        let point = self.point(params)?;
        let bob = decode_pure(&self.bob, &point.bob_params)?;
        match (self.ensemble_size, &point.ensemble_params) {
            (Some(n), Some(e)) => {
                let (logits, states) = e.split_at(n);
                let probs = softmax(logits);
                let items = states
                    .chunks(2 * self.alice.dim())
                    .zip(probs)
                    .map(|(c, p)| Ok((p, decode_pure(&self.alice, c)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Inputs::Cq { ensemble: Ensemble::new(items)?, bob })
            }
            _ => Ok(Inputs::Qq { alice: decode_pure(&self.alice, &point.alice_params)?, bob }),
        }
    }

    pub fn random(&self, rng: &mut impl Rng) -> Vec<f64> {
        gaussians(self.dim(), rng)
    }
}

/// The bound a characterization assigns to decoded inputs.
pub fn evaluate(mac: &BlockedMac, characterization: Characterization, inputs: &Inputs) -> Result<Bound2> {
    match (characterization, inputs) {
        (Characterization::QqRect, Inputs::Qq { alice, bob }) => qq_rectangle(mac, alice, bob).map(Into::into),
        (Characterization::QqPent, Inputs::Qq { alice, bob }) => qq_pentagon(mac, alice, bob).map(Into::into),
        (Characterization::CqRect, Inputs::Cq { ensemble, bob }) => {
            cq_rectangle(mac, ensemble, bob).map(Into::into)
        }
        (Characterization::CqPent, Inputs::Cq { ensemble, bob }) => {
            cq_pentagon(mac, ensemble, bob).map(Into::into)
        }
        _ => Err(Error::InvalidConfig("inputs do not match the characterization".into())),
    }
}

/// JSON form of decoded inputs.
pub fn witness_for(inputs: &Inputs, theta: Option<f64>, value: f64) -> Witness {
    match inputs {
        Inputs::Qq { alice, bob } => Witness {
            theta,
            value,
            alice: Some(alice.to_json()),
            bob: Some(bob.to_json()),
            ensemble: None,
        },
        Inputs::Cq { ensemble, bob } => Witness {
            theta,
            value,
            alice: None,
            bob: Some(bob.to_json()),
            ensemble: Some(ensemble.items().iter().map(|(p, s)| (*p, s.to_json())).collect()),
        },
    }
}

/// Result of one local search.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub params: Vec<f64>,
    pub value: f64,
    /// Restart that produced it.
    pub restart: usize,
    pub evaluations: usize,
}

fn guarded<F: Fn(&[f64]) -> Result<f64>>(f: &F, x: &[f64]) -> f64 {
    match f(x) {
        Ok(v) if v.is_finite() => v,
        Ok(v) => {
            log::debug!("objective returned {v}; treated as -inf");
            f64::NEG_INFINITY
        }
        Err(e) => {
            log::debug!("objective failed: {e}; treated as -inf");
            f64::NEG_INFINITY
        }
    }
}

/// Maximizes `f` from `x0` with an adaptive Nelder-Mead simplex.
///
/// Returns the best point, its value and the number of evaluations. When the simplex
/// collapses it is rebuilt around the best vertex; the search stops once a rebuild no
/// longer improves the value by more than `tol` or the budget is spent.
pub fn nelder_mead<F: Fn(&[f64]) -> Result<f64>>(
    f: &F,
    x0: &[f64],
    scale: f64,
    max_evals: usize,
    tol: f64,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        -guarded(f, x)
    };
    let mut best_x = x0.to_vec();
    let mut best = eval(x0, &mut evals);
    if n == 0 {
        return (best_x, -best, evals);
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut round_start = best;
    let mut first = true;
    while evals < max_evals {
        // (re)build a simplex around the best vertex
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best_x.clone(), best));
        for i in 0..n {
            if evals >= max_evals {
                break;
            }
            let mut x = best_x.clone();
            x[i] += scale;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }
        if simplex.len() < n + 1 {
            break;
        }
        let mut centroid = vec![0.0; n];
        while evals < max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (lo, hi) = (simplex[0].1, simplex[n].1);
            let spread = if lo.is_finite() && hi.is_finite() { hi - lo } else { f64::INFINITY };
            if spread <= tol * (1.0 + lo.abs()) {
                break;
            }
            centroid.iter_mut().for_each(|c| *c = 0.0);
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect()
            };
            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = along(alpha * gamma);
                let fe = eval(&xe, &mut evals);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let outside = fr < simplex[n].1;
                let xc = if outside { along(alpha * rho) } else { along(-rho) };
                let fc = eval(&xc, &mut evals);
                if fc < fr.min(simplex[n].1) {
                    simplex[n] = (xc, fc);
                } else {
                    let x_best = simplex[0].0.clone();
                    for (x, v) in simplex.iter_mut().skip(1) {
                        for (xi, bi) in x.iter_mut().zip(&x_best) {
                            *xi = bi + sigma * (*xi - bi);
                        }
                        *v = eval(x, &mut evals);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < best {
            best = simplex[0].1;
            best_x = simplex[0].0.clone();
        }
        // NaN (an all-infinite simplex) counts as no improvement
        let improved = round_start - best > tol * (1.0 + best.abs());
        if !first && !improved {
            break;
        }
        first = false;
        round_start = best;
    }
    (best_x, -best, evals)
}

/// Best of `cfg.restarts` simplex searches of `f` over `dim` reals.
///
/// Restart `r` starts from `warm[r]` when given and from a Gaussian point of stream `r`
/// otherwise. Ties go to the lowest restart index.
pub fn maximize_scalar<F>(dim: usize, f: &F, cfg: &OptimizerConfig, warm: &[Vec<f64>]) -> Result<Optimum>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    cfg.validate()?;
    if let Some(w) = warm.iter().find(|w| w.len() != dim) {
        return Err(Error::DimMismatch(format!("warm start of length {}, expected {dim}", w.len())));
    }
    let runs = map_indexed(cfg.restarts, cfg.execution, |r| {
        let x0 = match warm.get(r) {
            Some(w) => w.clone(),
            None => gaussians(dim, &mut task_rng(cfg.seed, r as u64)),
        };
        let (params, value, evaluations) = nelder_mead(f, &x0, cfg.simplex_scale, cfg.max_iters, cfg.convergence_tol);
        Optimum { params, value, restart: r, evaluations }
    });
    let mut best: Option<Optimum> = None;
    for run in runs {
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// `count` directions spread evenly over the closed first quadrant.
pub fn direction_grid(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![std::f64::consts::FRAC_PI_4],
        n => (0..n).map(|j| j as f64 * FRAC_PI_2 / (n - 1) as f64).collect(),
    }
}

/// The optimized input of one sweep direction.
#[derive(Debug, Clone)]
pub struct DirectionResult {
    pub theta: f64,
    pub value: f64,
    pub restart: usize,
    pub params: Vec<f64>,
    pub bound: Bound2,
}

/// A frontier sweep: the accumulated cloud plus the per-direction optima it was built from.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub characterization: Characterization,
    pub space: InputSpace,
    pub cloud: RegionCloud,
    pub directions: Vec<DirectionResult>,
}

impl Sweep {
    /// Decodes the inputs found for direction `j`.
    pub fn inputs(&self, j: usize) -> Result<Inputs> {
        self.space.decode(&self.directions[j].params)
    }
}

/// Support of the bound at `params`, or an error if the inputs do not decode.
pub fn support_objective(
    mac: &BlockedMac,
    space: &InputSpace,
    characterization: Characterization,
    theta: f64,
    params: &[f64],
) -> Result<f64> {
    Ok(evaluate(mac, characterization, &space.decode(params)?)?.support(theta))
}

/// Maximizes the support function of the characterization along each direction and
/// accumulates every direction's best polygon into a cloud.
///
/// `warm(j)` supplies starting points for direction `j`. Direction `j` uses seed
/// `cfg.seed + j`, so directions are independent tasks.
pub fn sweep_frontier_with<W>(
    mac: &BlockedMac,
    characterization: Characterization,
    thetas: &[f64],
    cfg: &OptimizerConfig,
    warm: W,
) -> Result<Sweep>
where
    W: Fn(usize) -> Vec<Vec<f64>> + Sync,
{
    cfg.validate()?;
    let space = InputSpace::new(mac, characterization)?;
    let inner = OptimizerConfig { execution: Execution::Sequential, ..cfg.clone() };
    let results = map_indexed(thetas.len(), cfg.execution, |j| -> Result<DirectionResult> {
        let theta = thetas[j];
        let f = |x: &[f64]| support_objective(mac, &space, characterization, theta, x);
        let task = OptimizerConfig { seed: cfg.seed.wrapping_add(j as u64), ..inner.clone() };
        let best = maximize_scalar(space.dim(), &f, &task, &warm(j))?;
        let bound = evaluate(mac, characterization, &space.decode(&best.params)?)?;
        Ok(DirectionResult { theta, value: best.value, restart: best.restart, params: best.params, bound })
    });
    let directions = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut cloud = RegionCloud::new(mac.k(), mac.description(), characterization.axes());
    for (j, d) in directions.iter().enumerate() {
        let inputs = space.decode(&d.params)?;
        let seed = cfg.seed.wrapping_add(j as u64);
        cloud.accumulate(&d.bound, Some(seed), Some(witness_for(&inputs, Some(d.theta), d.value)));
    }
    Ok(Sweep { characterization, space, cloud, directions })
}

/// [`sweep_frontier_with`] from random starts over `direction_count` directions.
pub fn sweep_frontier(
    mac: &BlockedMac,
    characterization: Characterization,
    direction_count: usize,
    cfg: &OptimizerConfig,
) -> Result<Sweep> {
    if direction_count == 0 {
        return Err(Error::InvalidConfig("at least one sweep direction is needed".into()));
    }
    sweep_frontier_with(mac, characterization, &direction_grid(direction_count), cfg, |_| Vec::new())
}

/// Parameters of the two-copy input `psi (x) psi` for a single-copy pure input `psi` on
/// `(P, I)`, laid out as `(P.1 P.2, I.1, I.2)`.
pub fn square_pure(state: &PureState) -> Result<Vec<f64>> {
    let labels: Vec<String> = state.layout().labels().into_iter().map(String::from).collect();
    if labels.len() != 2 {
        return Err(Error::LayoutMismatch("squaring expects a purifier and one input factor".into()));
    }
    let twin = labels
        .iter()
        .try_fold(state.clone(), |s, l| s.relabel(l, &format!("{l}#2")))?;
    let order = [labels[0].clone(), format!("{}#2", labels[0]), labels[1].clone(), format!("{}#2", labels[1])];
    Ok(encode_pure(&state.tensor(&twin)?.permute_factors(&order)?))
}

/// Warm start for a two-copy qq search from single-copy qq inputs.
pub fn square_qq_inputs(inputs: &Inputs) -> Result<Vec<f64>> {
    match inputs {
        Inputs::Qq { alice, bob } => {
            let mut out = square_pure(alice)?;
            out.extend(square_pure(bob)?);
            Ok(out)
        }
        Inputs::Cq { .. } => Err(Error::InvalidConfig("only qq inputs are squared".into())),
    }
}

/// Settings of the additivity experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditivityConfig {
    pub optimizer: OptimizerConfig,
    /// Directions of each sweep.
    pub directions: usize,
}

impl Default for AdditivityConfig {
    fn default() -> Self {
        AdditivityConfig { optimizer: OptimizerConfig::default(), directions: 33 }
    }
}

/// The input pair behind the largest gap of one characterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapWitness {
    pub characterization: Characterization,
    pub k: usize,
    pub theta: f64,
    pub gap: f64,
    /// Corner of the two-copy polygon that is farthest along `theta`.
    pub corner: Point2,
    /// Distance from `corner` to the single-copy hull; at least `gap`.
    pub distance_outside: f64,
    /// The single-copy hull the gap is measured against.
    pub baseline_hull: Vec<Point2>,
    pub bound: Bound2,
    pub alice: PureStateFile,
    pub bob: PureStateFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditivityReport {
    pub channel: String,
    pub p: f64,
    pub k_values: [usize; 2],
    pub rect_gap: f64,
    pub pent_gap: f64,
    /// Whether each gap exceeds [`NOISE_FLOOR`].
    pub rect_distinguishable: bool,
    pub pent_distinguishable: bool,
    pub witnesses: Vec<GapWitness>,
    pub config: AdditivityConfig,
}

/// Single- and two-copy sweeps of one characterization and their largest support gap.
#[derive(Debug, Clone)]
pub struct GapResult {
    pub single: Sweep,
    pub double: Sweep,
    pub gap: f64,
    pub witness: GapWitness,
}

/// Runs the `k = 1` and `k = 2` sweeps of a qq characterization and measures how far the
/// two-copy hull reaches beyond the single-copy hull along the sweep directions.
///
/// Each two-copy direction is warm-started from the square of its single-copy optimum.
pub fn blocking_gap(
    channel: &KrausChannel,
    name: &str,
    characterization: Characterization,
    cfg: &AdditivityConfig,
) -> Result<GapResult> {
    if characterization.is_cq() {
        return Err(Error::InvalidConfig("the blocking gap compares qq characterizations".into()));
    }
    let thetas = direction_grid(cfg.directions.max(1));
    let one = BlockedMac::new(channel, 1)?.with_description(name);
    let two = BlockedMac::new(channel, 2)?.with_description(name);
    let single = sweep_frontier_with(&one, characterization, &thetas, &cfg.optimizer, |_| Vec::new())?;
    let warm = (0..thetas.len())
        .map(|j| Ok(vec![square_qq_inputs(&single.inputs(j)?)?]))
        .collect::<Result<Vec<_>>>()?;
    let double = sweep_frontier_with(&two, characterization, &thetas, &cfg.optimizer, |j| warm[j].clone())?;

    let mut best: Option<(f64, usize, usize)> = None;
    for (j, &theta) in thetas.iter().enumerate() {
        // the two-copy hull is spanned by the per-direction polygons
        let (src, reach) = double
            .directions
            .iter()
            .enumerate()
            .map(|(i, d)| (i, d.bound.support(theta)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let gap = reach - single.cloud.support(theta);
        if best.is_none_or(|b| gap > b.0) {
            best = Some((gap, j, src));
        }
    }
    let (gap, j, src) = best.ok_or_else(|| Error::InvalidConfig("no sweep directions".into()))?;
    let theta = thetas[j];
    let bound = double.directions[src].bound.clone();
    let corner = bound
        .vertices()
        .into_iter()
        .max_by(|a, b| {
            let s = |v: &Point2| theta.cos() * v[0] + theta.sin() * v[1];
            s(a).total_cmp(&s(b))
        })
        .unwrap_or([0.0, 0.0]);
    let (alice, bob) = match double.inputs(src)? {
        Inputs::Qq { alice, bob } => (alice.to_json(), bob.to_json()),
        Inputs::Cq { .. } => unreachable!("qq sweep"),
    };
    let witness = GapWitness {
        characterization,
        k: 2,
        theta,
        gap,
        corner,
        distance_outside: distance_outside(single.cloud.hull(), corner),
        baseline_hull: single.cloud.hull().to_vec(),
        bound,
        alice,
        bob,
    };
    Ok(GapResult { single, double, gap, witness })
}

/// Rectangle and pentagon blocking gaps of `channel_for(p)` for every `p` in `p_grid`.
pub fn additivity_experiment<F>(
    name: &str,
    channel_for: F,
    p_grid: &[f64],
    cfg: &AdditivityConfig,
) -> Result<Vec<AdditivityReport>>
where
    F: Fn(f64) -> Result<KrausChannel>,
{
    cfg.optimizer.validate()?;
    p_grid
        .iter()
        .map(|&p| {
            let channel = channel_for(p)?;
            let label = format!("{name}(p={p})");
            let rect = blocking_gap(&channel, &label, Characterization::QqRect, cfg)?;
            let pent = blocking_gap(&channel, &label, Characterization::QqPent, cfg)?;
            log::info!("p={p}: rect gap {:.3e}, pent gap {:.3e}", rect.gap, pent.gap);
            Ok(AdditivityReport {
                channel: name.to_string(),
                p,
                k_values: [1, 2],
                rect_gap: rect.gap,
                pent_gap: pent.gap,
                rect_distinguishable: rect.gap > NOISE_FLOOR,
                pent_distinguishable: pent.gap > NOISE_FLOOR,
                witnesses: vec![rect.witness, pent.witness],
                config: cfg.clone(),
            })
        })
        .collect()
}

/// Re-evaluates a gap witness on its channel, returning the two-copy bound.
pub fn reevaluate_witness(channel: &KrausChannel, witness: &GapWitness) -> Result<Bound2> {
    let mac = BlockedMac::new(channel, witness.k)?;
    let inputs = Inputs::Qq {
        alice: PureState::from_json(witness.alice.clone())?,
        bob: PureState::from_json(witness.bob.clone())?,
    };
    evaluate(&mac, witness.characterization, &inputs)
}

/// `max` over pure inputs of the sum bound `I_c(AB>C^k)/k`.
pub fn max_sum_rate(mac: &BlockedMac, cfg: &OptimizerConfig) -> Result<(Bits, Inputs)> {
    let space = InputSpace::new(mac, Characterization::QqPent)?;
    let f = |x: &[f64]| match evaluate(mac, Characterization::QqPent, &space.decode(x)?)? {
        Bound2::Pentagon(p) => Ok(p.sum_max.0),
        Bound2::Rectangle(_) => unreachable!("pentagon characterization"),
    };
    let best = maximize_scalar(space.dim(), &f, cfg, &[])?;
    Ok((Bits(best.value), space.decode(&best.params)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel;
    use crate::entropic::{binary_entropy, channel_coherent_information};
    use crate::state::LabeledState;

    fn h(p: f64) -> f64 {
        binary_entropy(p).unwrap().0
    }

    fn quick() -> OptimizerConfig {
        OptimizerConfig { restarts: 4, max_iters: 3000, ..Default::default() }
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        assert!(OptimizerConfig { restarts: 0, ..Default::default() }.validate().is_err());
        assert!(OptimizerConfig { convergence_tol: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn random_pure_is_normalized_and_haar_on_average() {
        let layout = FactorLayout::new([("Q", 2)]).unwrap();
        let mut rng = task_rng(1, 0);
        let n = 10_000;
        let mean: f64 = (0..n).map(|_| random_pure(&layout, &mut rng).vector()[0].norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.02);
        let one = FactorLayout::new([("Q", 1)]).unwrap();
        assert!((random_pure(&one, &mut rng).vector()[0].norm() - 1.0).abs() < 1e-12);
        let two = FactorLayout::new([("A", 2), ("B", 2)]).unwrap();
        let s = random_pure(&two, &mut rng).density().partial_trace(&["A"]).unwrap();
        assert!((s.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nelder_mead_finds_a_quadratic_peak() {
        let f = |x: &[f64]| Ok(-(x[0] - 1.0).powi(2) - 2.0 * (x[1] + 0.5).powi(2) + 3.0);
        let (x, v, _) = nelder_mead(&f, &[0.0, 0.0], 0.5, 2000, 1e-14);
        assert!((v - 3.0).abs() < 1e-10);
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] + 0.5).abs() < 1e-4);
    }

    #[test]
    fn constant_and_failing_objectives() {
        let cfg = quick();
        let best = maximize_scalar(3, &|_: &[f64]| Ok(0.25), &cfg, &[]).unwrap();
        assert_eq!(best.value, 0.25);
        let fails = |x: &[f64]| if x[0] > 0.0 { Err(Error::InvalidState("no".into())) } else { Ok(x[0]) };
        let best = maximize_scalar(1, &fails, &cfg, &[vec![-1.0]]).unwrap();
        assert!(best.value <= 0.0 && best.value > -1e-3);
    }

    #[test]
    fn restarts_are_nested_and_deterministic() {
        let f = |x: &[f64]| Ok((3.0 * x[0]).sin() * (2.0 * x[1]).cos() - 0.01 * x[0] * x[0]);
        let mut prev = f64::NEG_INFINITY;
        for r in 1..6 {
            let cfg = OptimizerConfig { restarts: r, max_iters: 200, ..Default::default() };
            let a = maximize_scalar(2, &f, &cfg, &[]).unwrap();
            let b = maximize_scalar(2, &f, &OptimizerConfig { execution: Execution::Sequential, ..cfg }, &[]).unwrap();
            assert_eq!(a, b);
            assert!(a.value >= prev);
            prev = a.value;
        }
    }

    #[test]
    fn single_user_bit_flip_capacity() {
        let p = 0.1;
        let ch = channel::bit_flip(p).unwrap();
        let layout = FactorLayout::new([("A", 2)]).unwrap();
        let f = |x: &[f64]| {
            let psi = decode_pure(&FactorLayout::new([("R", 2), ("A", 2)])?, x)?;
            let rho = psi.density().partial_trace(&["A"])?;
            Ok(channel_coherent_information(&LabeledState::new(layout.clone(), rho.matrix().clone())?, &ch)?.0)
        };
        let best = maximize_scalar(8, &f, &quick(), &[]).unwrap();
        assert!((best.value - (1.0 - h(p))).abs() < 1e-3);
    }

    #[test]
    fn sum_rate_of_the_flip_channel() {
        let mac = BlockedMac::new(&channel::collective_qubit_flip(0.1).unwrap(), 1).unwrap();
        let (v, _) = max_sum_rate(&mac, &quick()).unwrap();
        assert!((v.0 - (2.0 - h(0.1))).abs() < 1e-3);
    }

    #[test]
    fn input_space_round_trip() {
        let mac = BlockedMac::new(&channel::collective_qubit_flip(0.1).unwrap(), 2).unwrap();
        let qq = InputSpace::new(&mac, Characterization::QqPent).unwrap();
        assert_eq!(qq.dim(), 64);
        let cq = InputSpace::new(&mac, Characterization::CqRect).unwrap();
        assert_eq!(cq.ensemble_size(), Some(8));
        assert_eq!(cq.dim(), 8 + 8 * 8 + 32);
        let x = cq.random(&mut task_rng(0, 0));
        assert_eq!(cq.flatten(&cq.point(&x).unwrap()), x);
        assert!(matches!(cq.decode(&x).unwrap(), Inputs::Cq { .. }));
        assert!(qq.decode(&x).is_err());
    }

    #[test]
    fn squared_inputs_match_two_independent_uses() {
        let ch = channel::collective_qubit_flip(0.2).unwrap();
        let one = BlockedMac::new(&ch, 1).unwrap();
        let two = BlockedMac::new(&ch, 2).unwrap();
        let s1 = InputSpace::new(&one, Characterization::QqPent).unwrap();
        let s2 = InputSpace::new(&two, Characterization::QqPent).unwrap();
        let x = s1.random(&mut task_rng(3, 0));
        let inputs = s1.decode(&x).unwrap();
        let b1 = evaluate(&one, Characterization::QqPent, &inputs).unwrap();
        let b2 = evaluate(&two, Characterization::QqPent, &s2.decode(&square_qq_inputs(&inputs).unwrap()).unwrap()).unwrap();
        for (u, v) in b1.values().iter().zip(b2.values()) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_pentagon_sweep() {
        let mac = BlockedMac::new(&channel::noiseless_two_qubit().unwrap(), 1).unwrap();
        let sweep = sweep_frontier(&mac, Characterization::QqPent, 5, &quick()).unwrap();
        assert!(sweep.cloud.contains([1.0, 1.0], 1e-4));
        assert!((sweep.cloud.support(std::f64::consts::FRAC_PI_4) - 2f64.sqrt()).abs() < 1e-4);
        assert_eq!(sweep.cloud.generators().len(), 5);
    }

    #[test]
    fn grid_covers_the_quadrant() {
        let g = direction_grid(3);
        assert_eq!(g, vec![0.0, std::f64::consts::FRAC_PI_4, FRAC_PI_2]);
        assert!(direction_grid(0).is_empty());
    }
}
