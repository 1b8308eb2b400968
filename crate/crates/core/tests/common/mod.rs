//! Random instances and independent checks shared by the property and acceptance suites.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use qmac::channel::{collective_qubit_flip, Instrument, KrausChannel};
use qmac::entropic::{
    channel_coherent_information, conditional_coherent_information, conditional_mutual_information, entropy,
};
use qmac::region::{hull_2d, qq_pentagon, BlockedMac, Point2};
use qmac::state::{fidelity, FactorLayout, LabeledState, PureState};
use qmac::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Random density matrix of rank at most `rank` on `layout`.
pub fn random_state(layout: FactorLayout, rank: usize, rng: &mut impl Rng) -> LabeledState {
    let g = gaussian_matrix(layout.dim(), rank.max(1), rng);
    let mut rho = &g * g.adjoint();
    let t = rho.trace();
    rho.unscale_mut(t.re);
    LabeledState::new(layout, rho).expect("valid random state")
}

pub fn random_pure(layout: FactorLayout, rng: &mut impl Rng) -> PureState {
    let v = DVector::from_fn(layout.dim(), |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    PureState::normalized(layout, v).unwrap()
}

/// Isometry `d_in -> d_out` (`d_out >= d_in`) from the QR decomposition of a Gaussian matrix.
pub fn random_isometry(d_in: usize, d_out: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    assert!(d_out >= d_in);
    gaussian_matrix(d_out, d_in, rng).qr().q()
}

/// `count` Kraus operators `d_in -> d_out` cut from one random isometry.
pub fn random_kraus(d_in: usize, d_out: usize, count: usize, rng: &mut impl Rng) -> Vec<DMatrix<C64>> {
    assert!(count * d_out >= d_in, "too few Kraus operators for an isometry");
    let v = random_isometry(d_in, count * d_out, rng);
    (0..count).map(|i| v.rows(i * d_out, d_out).into_owned()).collect()
}

pub fn random_channel(input: FactorLayout, output: FactorLayout, count: usize, rng: &mut impl Rng) -> KrausChannel {
    let kraus = random_kraus(input.dim(), output.dim(), count, rng);
    KrausChannel::new(input, output, kraus).expect("random channel is CPTP")
}

fn layout(factors: &[(&str, usize)]) -> FactorLayout {
    FactorLayout::new(factors.iter().map(|&(l, d)| (l, d))).unwrap()
}

/// `|I_c(rho, N) - I_c(R>CX)|` for a random state and a random two-outcome instrument, where
/// the right side is read off the instrument's output on a purification of `rho`.
pub fn instrument_identity_residual(rng: &mut impl Rng) -> f64 {
    let (d_in, d_out) = [(2, 2), (2, 3), (3, 2), (2, 4)][rng.random_range(0..4)];
    let rho = random_state(layout(&[("A'", d_in)]), rng.random_range(1..=d_in), rng);
    let per = [rng.random_range(1..=2usize), rng.random_range(1..=2usize)];
    let kraus = random_kraus(d_in, d_out, per[0] + per[1], rng);
    let components = vec![kraus[..per[0]].to_vec(), kraus[per[0]..].to_vec()];
    let ins = Instrument::new(layout(&[("A'", d_in)]), layout(&[("C", d_out)]), "X", components).unwrap();
    let lhs = channel_coherent_information(&rho, &ins.with_record().unwrap()).unwrap().0;
    let phi = rho.purify("R").unwrap();
    let omega = ins.apply(&phi.density(), &["A'"]).unwrap();
    let rhs = conditional_coherent_information(&omega, &["R"], &["C"], &["X"]).unwrap().0;
    (lhs - rhs).abs()
}

/// `|I_c(rho, N)|` computed from the library's purification versus a purification whose
/// reference has been rotated by a random unitary and embedded in a larger space.
pub fn purification_residual(rng: &mut impl Rng) -> f64 {
    let d = rng.random_range(2..=3usize);
    let d_out = rng.random_range(2..=3usize);
    let rho = random_state(layout(&[("A'", d)]), rng.random_range(1..=d), rng);
    let ch = random_channel(layout(&[("A'", d)]), layout(&[("C", d_out)]), rng.random_range(d.div_ceil(d_out)..=3), rng);
    let lhs = channel_coherent_information(&rho, &ch).unwrap().0;

    let phi = rho.purify("R").unwrap();
    let w = random_isometry(d, d + 1, rng);
    let embed = qmac::linalg::kron(&w, &DMatrix::identity(d, d));
    let other = PureState::normalized(layout(&[("R", d + 1), ("A'", d)]), &embed * phi.vector()).unwrap();
    let out = ch.apply(&other.density(), &["A'"]).unwrap();
    let rhs = (entropy(&out, &["C"]).unwrap() - entropy(&out, &["R", "C"]).unwrap()).0;
    (lhs - rhs).abs()
}

/// `I(X;B|Z)` on a random state with `|X||B||Z| <= 16`.
pub fn ssa_value(rng: &mut impl Rng) -> f64 {
    let dims = [(2, 2, 2), (2, 2, 4), (2, 4, 2), (4, 2, 2), (2, 2, 3), (3, 2, 2), (2, 3, 2)][rng.random_range(0..7)];
    let l = layout(&[("X", dims.0), ("B", dims.1), ("Z", dims.2)]);
    let rank = rng.random_range(1..=l.dim());
    let rho = random_state(l, rank, rng);
    conditional_mutual_information(&rho, &["X"], &["B"], &["Z"]).unwrap().0
}

/// `a_max + b_max - sum_max` of the qq pentagon at random inputs of a random two-sender
/// channel (or the collective qubit flip at random `p`).
pub fn pentagon_slack(rng: &mut impl Rng) -> f64 {
    let ch = if rng.random_bool(0.5) {
        collective_qubit_flip(rng.random_range(0.0..=1.0)).unwrap()
    } else {
        let c = rng.random_range(2..=4usize);
        random_channel(layout(&[("A'", 2), ("B'", 2)]), layout(&[("C", c)]), rng.random_range(4usize.div_ceil(c)..=3), rng)
    };
    let mac = BlockedMac::new(&ch, 1).unwrap();
    let alice = random_pure(layout(&[("A", 2), ("A'", 2)]), rng);
    let bob = random_pure(layout(&[("B", 2), ("B'", 2)]), rng);
    match qq_pentagon(&mac, &alice, &bob) {
        Ok(b) => b.a_max.0 + b.b_max.0 - b.sum_max.0,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Symmetry, bounds, self-fidelity and the pure-state formula on a random pair of states.
pub fn fidelity_axioms(rng: &mut impl Rng) -> Result<(), String> {
    let d = rng.random_range(2..=4usize);
    let l = layout(&[("A", d)]);
    let rho = random_state(l.clone(), rng.random_range(1..=d), rng);
    let sigma = random_state(l.clone(), rng.random_range(1..=d), rng);
    let f = fidelity(&rho, &sigma).unwrap();
    let g = fidelity(&sigma, &rho).unwrap();
    if !(0.0..=1.0).contains(&f) {
        return Err(format!("fidelity {f} outside [0, 1]"));
    }
    if (f - g).abs() > 1e-8 {
        return Err(format!("asymmetric fidelity {f} vs {g}"));
    }
    let s = fidelity(&rho, &rho).unwrap();
    if (s - 1.0).abs() > 1e-8 {
        return Err(format!("self-fidelity {s}"));
    }
    let psi = random_pure(l, rng);
    let expected = (psi.vector().adjoint() * sigma.matrix() * psi.vector())[(0, 0)].re;
    let got = fidelity(&psi.density(), &sigma).unwrap();
    if (got - expected).abs() > 1e-8 {
        return Err(format!("pure-state fidelity {got} vs <psi|sigma|psi> = {expected}"));
    }
    Ok(())
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn in_triangle(p: Point2, a: Point2, b: Point2, c: Point2) -> bool {
    if cross(a, b, c) == 0.0 {
        // degenerate: p must be collinear and inside the bounding box
        let on_line = [cross(a, b, p), cross(b, c, p), cross(a, c, p)].iter().all(|&v| v == 0.0);
        let within = |k: usize| {
            let lo = a[k].min(b[k]).min(c[k]);
            let hi = a[k].max(b[k]).max(c[k]);
            (lo..=hi).contains(&p[k])
        };
        return on_line && within(0) && within(1);
    }
    let (x, y, z) = (cross(a, b, p), cross(b, c, p), cross(c, a, p));
    (x >= 0.0 && y >= 0.0 && z >= 0.0) || (x <= 0.0 && y <= 0.0 && z <= 0.0)
}

/// Extreme points by exhaustion: a point is a hull vertex unless it lies in a triangle (or
/// on a segment) spanned by other points. Coordinates must be exact in floating point.
pub fn brute_force_hull_vertices(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = Vec::new();
    for p in points {
        if !pts.contains(p) {
            pts.push(*p);
        }
    }
    let n = pts.len();
    let mut out = Vec::new();
    'next: for i in 0..n {
        let others: Vec<Point2> = (0..n).filter(|&j| j != i).map(|j| pts[j]).collect();
        for a in 0..others.len() {
            for b in a + 1..others.len() {
                for c in b..others.len() {
                    // c == b covers segments
                    if in_triangle(pts[i], others[a], others[b], others[c]) {
                        continue 'next;
                    }
                }
            }
        }
        out.push(pts[i]);
    }
    out
}

/// Whether `hull_2d` returns exactly the brute-force extreme points, counterclockwise from
/// the lexicographically smallest one, with every input point inside.
pub fn hull_matches_brute_force(points: &[Point2]) -> Result<(), String> {
    let hull = hull_2d(points);
    let mut expected = brute_force_hull_vertices(points);
    let mut got = hull.clone();
    let key = |a: &Point2, b: &Point2| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]));
    expected.sort_by(key);
    got.sort_by(key);
    if got != expected {
        return Err(format!("hull {hull:?} vs brute force {expected:?} for {points:?}"));
    }
    if let Some(first) = expected.first() {
        if hull[0] != *first {
            return Err(format!("hull starts at {:?}, not {first:?}", hull[0]));
        }
    }
    let n = hull.len();
    if n >= 3 {
        for i in 0..n {
            if cross(hull[i], hull[(i + 1) % n], hull[(i + 2) % n]) <= 0.0 {
                return Err(format!("hull {hull:?} is not strictly counterclockwise"));
            }
        }
    }
    if let Some(p) = points.iter().find(|p| !qmac::region::contains(&hull, **p, 1e-12)) {
        return Err(format!("{p:?} lies outside hull {hull:?}"));
    }
    Ok(())
}
