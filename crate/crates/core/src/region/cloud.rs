//! Accumulated point clouds of achievable rate pairs and their export.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::geometry::{contains, hull_2d, support, Point2, TOL_GEOM};
use super::Bound2;
use crate::error::{Error, Result};
use crate::state::PureStateFile;

/// The inputs that produced a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Sweep direction the inputs were optimized for, if any.
    pub theta: Option<f64>,
    /// Objective value reached.
    pub value: f64,
    pub alice: Option<PureStateFile>,
    pub bob: Option<PureStateFile>,
    /// `(probability, state)` pairs of Alice's ensemble.
    pub ensemble: Option<Vec<(f64, PureStateFile)>>,
}

/// One bound added to a cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    #[serde(rename = "type")]
    pub kind: String,
    /// Raw signed bound values, in the order of the bound's fields.
    pub bounds: Vec<f64>,
    pub input_seed: Option<u64>,
    pub provenance: String,
    pub witness: Option<Witness>,
}

/// Union of the corner points of many bounds at one blocklength, with its convex hull.
///
/// A fresh cloud holds only the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCloud {
    pub k: usize,
    pub channel: String,
    pub axes: [String; 2],
    points: Vec<Point2>,
    hull: Vec<Point2>,
    generators: Vec<Generator>,
}

impl RegionCloud {
    pub fn new(k: usize, channel: impl Into<String>, axes: [&str; 2]) -> Self {
        RegionCloud {
            k,
            channel: channel.into(),
            axes: axes.map(String::from),
            points: vec![[0.0, 0.0]],
            hull: vec![[0.0, 0.0]],
            generators: Vec::new(),
        }
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn hull(&self) -> &[Point2] {
        &self.hull
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    fn add_point(&mut self, p: Point2) {
        if self.points.iter().all(|q| (q[0] - p[0]).hypot(q[1] - p[1]) > TOL_GEOM) {
            self.points.push(p);
        }
    }

    /// Adds the corners of `bound` and refreshes the hull.
    pub fn accumulate(&mut self, bound: &Bound2, input_seed: Option<u64>, witness: Option<Witness>) {
        for v in bound.vertices() {
            self.add_point(v);
        }
        self.generators.push(Generator {
            kind: bound.kind().to_string(),
            bounds: bound.values(),
            input_seed,
            provenance: bound.provenance().to_string(),
            witness,
        });
        self.hull = hull_2d(&self.points);
    }

    /// Folds another cloud at the same blocklength into this one.
    pub fn merge(&mut self, other: RegionCloud) -> Result<()> {
        if other.k != self.k {
            return Err(Error::InvalidConfig(format!(
                "cannot merge clouds at k={} and k={}",
                self.k, other.k
            )));
        }
        for p in other.points {
            self.add_point(p);
        }
        self.generators.extend(other.generators);
        self.hull = hull_2d(&self.points);
        Ok(())
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        contains(&self.hull, p, tol)
    }

    pub fn support(&self, theta: f64) -> f64 {
        support(&self.hull, theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

/// Magnitudes below this are printed as zero.
pub const PRINT_ZERO: f64 = 1e-13;

/// `x` rounded to 12 significant digits, with round-off noise around zero cleared.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    if x.abs() < PRINT_ZERO {
        return 0.0;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if !n.is_i64() && !n.is_u64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serializes any value as pretty JSON with floats rounded to 12 significant digits.
pub fn to_rounded_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    Ok(serde_json::to_string_pretty(&v)?)
}

fn csv_number(x: f64) -> String {
    format!("{}", round_sig(x))
}

/// Renders a cloud as JSON or as CSV.
///
/// The CSV has one row per point; the `set` column tells cloud points from hull vertices.
pub fn emit_region(cloud: &RegionCloud, format: Format) -> Result<String> {
    match format {
        Format::Json => to_rounded_json(cloud),
        Format::Csv => {
            let mut out = format!("set,{},{}\n", cloud.axes[0], cloud.axes[1]);
            for (set, pts) in [("point", &cloud.points), ("hull", &cloud.hull)] {
                for p in pts.iter() {
                    out.push_str(&format!("{set},{},{}\n", csv_number(p[0]), csv_number(p[1])));
                }
            }
            Ok(out)
        }
    }
}
