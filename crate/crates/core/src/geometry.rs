//! Vector geometry in R^d: projections onto the base line, the fixed tangent
//! field used to orient avoidance arcs, analytic path segments and
//! closed-form clearance computations.

use std::f64::consts::PI;
use std::ops::{Add, Index, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on unit norms and orthogonality.
pub const TOL_NORM: f64 = 1e-12;

/// Allowed gap between the end of one path piece and the start of the next.
pub const TOL_JOIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn origin(dim: usize) -> Self {
        Point {
            coords: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|x| x.is_finite())
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self + k * dir`.
    pub fn offset(&self, dir: &UnitVector, k: f64) -> Point {
        Point::new(
            self.coords
                .iter()
                .zip(dir.coords())
                .map(|(x, e)| x + k * e)
                .collect(),
        )
    }

    /// `(1 - s) * self + s * other`, exact at both ends.
    pub fn lerp(&self, other: &Point, s: f64) -> Point {
        if s == 0.0 {
            return self.clone();
        }
        if s == 1.0 || self == other {
            return other.clone();
        }
        Point::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| (1.0 - s) * a + s * b)
                .collect(),
        )
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point::new(coords)
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl Add for &Point {
    type Output = Point;

    fn add(self, rhs: &Point) -> Point {
        Point::new(self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Point {
    type Output = Point;

    fn sub(self, rhs: &Point) -> Point {
        Point::new(self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &Point {
    type Output = Point;

    fn mul(self, k: f64) -> Point {
        Point::new(self.coords.iter().map(|a| a * k).collect())
    }
}

/// A vector of Euclidean norm one (within [`TOL_NORM`]).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct UnitVector(Point);

impl UnitVector {
    pub fn new(v: Point) -> Result<Self> {
        if !v.is_finite() || (v.norm() - 1.0).abs() > TOL_NORM {
            return Err(Error::InvalidInput(format!(
                "expected a unit vector, norm is {}",
                v.norm()
            )));
        }
        Ok(UnitVector(v))
    }

    /// Normalizes a nonzero vector.
    pub fn normalize(v: &Point) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
        }
        Ok(UnitVector(v * (1.0 / n)))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn coords(&self) -> &[f64] {
        self.0.coords()
    }

    pub fn as_point(&self) -> &Point {
        &self.0
    }
}

impl<'de> Deserialize<'de> for UnitVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = Point::deserialize(d)?;
        UnitVector::new(p).map_err(serde::de::Error::custom)
    }
}

/// The pairwise rotation `(x1, x2, x3, x4, ..) -> (-x2, x1, -x4, x3, ..)`.
///
/// A nowhere-vanishing tangent field on the sphere exists only in even
/// dimension; this one is linear and isometric, so `perp(e)` depends
/// continuously on `e` and is the same map on every call.
pub fn perp(e: &UnitVector) -> Result<UnitVector> {
    let d = e.dim();
    if d == 0 || d % 2 == 1 {
        return Err(Error::InvalidDimension(d));
    }
    let x = e.coords();
    let mut out = vec![0.0; d];
    for k in (0..d).step_by(2) {
        out[k] = -x[k + 1];
        out[k + 1] = x[k];
    }
    Ok(UnitVector(Point::new(out)))
}

/// Unit vector from `o1` toward `o2`.
pub fn direction(o1: &Point, o2: &Point) -> Result<UnitVector> {
    if o1.dim() != o2.dim() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    let diff = o2 - o1;
    if diff.norm() == 0.0 {
        return Err(Error::DegenerateBase);
    }
    UnitVector::normalize(&diff)
}

/// Scalar coordinate of `x` along the line spanned by `e`, i.e. `<x, e>`.
pub fn project_scalar(x: &Point, e: &UnitVector) -> f64 {
    x.dot(e.as_point())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub center: Point,
    pub radius: f64,
    pub u: UnitVector,
    pub v: UnitVector,
    pub angle_from: f64,
    pub angle_to: f64,
}

impl Arc {
    fn angle_at(&self, s: f64) -> f64 {
        if s == 1.0 {
            self.angle_to
        } else {
            self.angle_from + s * (self.angle_to - self.angle_from)
        }
    }

    fn point_at_angle(&self, theta: f64) -> Point {
        let (sin, cos) = theta.sin_cos();
        Point::new(
            self.center
                .coords()
                .iter()
                .zip(self.u.coords().iter().zip(self.v.coords()))
                .map(|(c, (u, v))| c + self.radius * (cos * u + sin * v))
                .collect(),
        )
    }
}

/// An analytic path piece parametrized over the local interval `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    /// Affine motion; `start == end` marks a constant (hold) segment.
    Line { start: Point, end: Point },
    Arc(Arc),
}

impl Segment {
    /// A nondegenerate straight segment.
    pub fn line(start: Point, end: Point) -> Result<Self> {
        if start.dim() != end.dim() {
            return Err(Error::InvalidInput("dimension mismatch".into()));
        }
        if start == end {
            return Err(Error::InvalidInput(
                "zero-length line; use Segment::constant".into(),
            ));
        }
        Ok(Segment::Line { start, end })
    }

    pub fn constant(at: Point) -> Self {
        Segment::Line {
            start: at.clone(),
            end: at,
        }
    }

    pub fn arc(
        center: Point,
        radius: f64,
        u: UnitVector,
        v: UnitVector,
        angle_from: f64,
        angle_to: f64,
    ) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!("arc radius must be positive, got {radius}")));
        }
        if center.dim() != u.dim() || u.dim() != v.dim() {
            return Err(Error::InvalidInput("dimension mismatch".into()));
        }
        if u.as_point().dot(v.as_point()).abs() > TOL_NORM {
            return Err(Error::InvalidInput("arc frame is not orthogonal".into()));
        }
        if angle_from == angle_to || !angle_from.is_finite() || !angle_to.is_finite() {
            return Err(Error::InvalidInput("arc angle range is empty".into()));
        }
        Ok(Segment::Arc(Arc {
            center,
            radius,
            u,
            v,
            angle_from,
            angle_to,
        }))
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Segment::Line { start, end } if start == end)
    }

    pub fn dim(&self) -> usize {
        match self {
            Segment::Line { start, .. } => start.dim(),
            Segment::Arc(a) => a.center.dim(),
        }
    }

    /// Evaluates at local parameter `s` in `[0, 1]`.
    pub fn at(&self, s: f64) -> Point {
        match self {
            Segment::Line { start, end } => start.lerp(end, s),
            Segment::Arc(a) => a.point_at_angle(a.angle_at(s)),
        }
    }

    /// [`Segment::at`] without allocating.
    pub fn write_at(&self, s: f64, out: &mut [f64]) {
        match self {
            Segment::Line { start, end } => {
                for ((o, a), b) in out.iter_mut().zip(start.coords()).zip(end.coords()) {
                    *o = if s == 0.0 || a == b {
                        *a
                    } else if s == 1.0 {
                        *b
                    } else {
                        (1.0 - s) * a + s * b
                    };
                }
            }
            Segment::Arc(a) => {
                let (sin, cos) = a.angle_at(s).sin_cos();
                let frame = a.u.coords().iter().zip(a.v.coords());
                for ((o, c), (u, v)) in out.iter_mut().zip(a.center.coords()).zip(frame) {
                    *o = c + a.radius * (cos * u + sin * v);
                }
            }
        }
    }

    pub fn start(&self) -> Point {
        self.at(0.0)
    }

    pub fn end(&self) -> Point {
        self.at(1.0)
    }

    /// The same geometric curve traversed backwards.
    pub fn reversed(&self) -> Segment {
        match self {
            Segment::Line { start, end } => Segment::Line {
                start: end.clone(),
                end: start.clone(),
            },
            Segment::Arc(a) => Segment::Arc(Arc {
                angle_from: a.angle_to,
                angle_to: a.angle_from,
                ..a.clone()
            }),
        }
    }

    /// Restriction to the local parameter range `[s0, s1]`, reparametrized
    /// over `[0, 1]`.
    pub fn restrict(&self, s0: f64, s1: f64) -> Segment {
        match self {
            Segment::Line { start, end } => Segment::Line {
                start: start.lerp(end, s0),
                end: start.lerp(end, s1),
            },
            Segment::Arc(a) => Segment::Arc(Arc {
                angle_from: a.angle_at(s0),
                angle_to: a.angle_at(s1),
                ..a.clone()
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub segment: Segment,
    pub t_start: f64,
    pub t_end: f64,
}

/// A continuous path over `[0, 1]` made of analytic segments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewisePath {
    pieces: Vec<Piece>,
}

impl PiecewisePath {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::InvalidInput("path has no pieces".into()));
        };
        if first.t_start != 0.0 || pieces[pieces.len() - 1].t_end != 1.0 {
            return Err(Error::InvalidInput("path domain must be exactly [0, 1]".into()));
        }
        let dim = first.segment.dim();
        for (k, p) in pieces.iter().enumerate() {
            if !(p.t_start < p.t_end) {
                return Err(Error::InvalidInput(format!(
                    "piece {k} has empty time interval [{}, {}]",
                    p.t_start, p.t_end
                )));
            }
            if p.segment.dim() != dim {
                return Err(Error::InvalidInput(format!("piece {k} has wrong dimension")));
            }
        }
        for (k, w) in pieces.windows(2).enumerate() {
            if w[0].t_end != w[1].t_start {
                return Err(Error::InvalidInput(format!(
                    "pieces {k} and {} do not abut in time",
                    k + 1
                )));
            }
            let gap = w[0].segment.end().distance(&w[1].segment.start());
            if gap > TOL_JOIN {
                return Err(Error::InvalidInput(format!(
                    "pieces {k} and {} are {gap:e} apart",
                    k + 1
                )));
            }
        }
        Ok(PiecewisePath { pieces })
    }

    pub fn constant(at: Point) -> Self {
        PiecewisePath {
            pieces: vec![Piece {
                segment: Segment::constant(at),
                t_start: 0.0,
                t_end: 1.0,
            }],
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].segment.dim()
    }

    pub fn is_constant(&self) -> bool {
        let p0 = self.pieces[0].segment.start();
        self.pieces
            .iter()
            .all(|p| p.segment.is_constant() && p.segment.start() == p0)
    }

    /// Index of the piece used to evaluate at `t`; boundary ties go to the
    /// earlier piece.
    pub fn piece_index(&self, t: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfDomain(t));
        }
        let k = self.pieces.partition_point(|p| p.t_end < t);
        Ok(k.min(self.pieces.len() - 1))
    }

    pub fn eval(&self, t: f64) -> Result<Point> {
        let piece = &self.pieces[self.piece_index(t)?];
        let s = ((t - piece.t_start) / (piece.t_end - piece.t_start)).clamp(0.0, 1.0);
        Ok(piece.segment.at(s))
    }

    /// The path traversed backwards in time.
    pub fn reversed(&self) -> PiecewisePath {
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|p| Piece {
                segment: p.segment.reversed(),
                t_start: if p.t_end == 1.0 { 0.0 } else { 1.0 - p.t_end },
                t_end: if p.t_start == 0.0 { 1.0 } else { 1.0 - p.t_start },
            })
            .collect();
        PiecewisePath { pieces }
    }
}

impl<'de> Deserialize<'de> for PiecewisePath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            pieces: Vec<Piece>,
        }
        let raw = Raw::deserialize(d)?;
        PiecewisePath::new(raw.pieces).map_err(serde::de::Error::custom)
    }
}

/// Assembles a [`PiecewisePath`] from time-windowed pieces.
///
/// Consecutive holds at the same point are merged, so a robot that waits
/// across several windows shows up as a single constant piece.
#[derive(Debug, Default)]
pub struct PathBuilder {
    pieces: Vec<Piece>,
}

impl PathBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, segment: Segment, t_start: f64, t_end: f64) {
        if let Some(last) = self.pieces.last_mut() {
            if last.segment.is_constant() && segment.is_constant() && last.segment == segment {
                last.t_end = t_end;
                return;
            }
        }
        self.pieces.push(Piece {
            segment,
            t_start,
            t_end,
        });
    }

    pub fn hold(&mut self, at: &Point, t_start: f64, t_end: f64) {
        self.push(Segment::constant(at.clone()), t_start, t_end);
    }

    /// Appends `path`, time-compressed from `[0, 1]` into `[t_start, t_end]`.
    pub fn embed(&mut self, path: &PiecewisePath, t_start: f64, t_end: f64) {
        let map = |tau: f64| {
            if tau == 0.0 {
                t_start
            } else if tau == 1.0 {
                t_end
            } else {
                t_start + (t_end - t_start) * tau
            }
        };
        for p in path.pieces() {
            self.push(p.segment.clone(), map(p.t_start), map(p.t_end));
        }
    }

    pub fn finish(self) -> Result<PiecewisePath> {
        PiecewisePath::new(self.pieces)
    }
}

/// Exact minimum distance from `p` to the points of `seg`.
pub fn min_clearance_static(p: &Point, seg: &Segment) -> f64 {
    match seg {
        Segment::Line { start, end } => {
            let dir = end - start;
            let len2 = dir.norm_squared();
            if len2 == 0.0 {
                return p.distance(start);
            }
            let s = ((p - start).dot(&dir) / len2).clamp(0.0, 1.0);
            p.distance(&start.lerp(end, s))
        }
        Segment::Arc(a) => {
            // |p - c - r(cos θ u + sin θ v)|² = |p - c|² + r² - 2r(x cos θ + y sin θ)
            let w = p - &a.center;
            let x = w.dot(a.u.as_point());
            let y = w.dot(a.v.as_point());
            let (lo, hi) = if a.angle_from <= a.angle_to {
                (a.angle_from, a.angle_to)
            } else {
                (a.angle_to, a.angle_from)
            };
            let rho = x.hypot(y);
            let best = if rho == 0.0 {
                0.0
            } else {
                let phi = y.atan2(x);
                // smallest phi + 2πk that is >= lo
                let k = ((lo - phi) / (2.0 * PI)).ceil();
                let phi_in = phi + 2.0 * PI * k;
                if phi_in <= hi {
                    rho
                } else {
                    let f = |th: f64| x * th.cos() + y * th.sin();
                    f(lo).max(f(hi))
                }
            };
            let d2 = w.norm_squared() + a.radius * a.radius - 2.0 * a.radius * best;
            d2.max(0.0).sqrt()
        }
    }
}

/// Exact minimum over `t` in `[0, 1]` of `|a(t) - b(t)|` for two points
/// moving affinely over the same interval.
pub fn min_clearance_comoving(a0: &Point, a1: &Point, b0: &Point, b1: &Point) -> f64 {
    let d0 = a0 - b0;
    let d1 = a1 - b1;
    let dd = &d1 - &d0;
    let denom = dd.norm_squared();
    let t = if denom == 0.0 {
        0.0
    } else {
        (-d0.dot(&dd) / denom).clamp(0.0, 1.0)
    };
    d0.lerp(&d1, t).norm()
}
