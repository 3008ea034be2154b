//! Independent checks of planned bundles, plus seeded scenario generation
//! for property runs.
//!
//! [`verify`] computes clearances in closed form piece by piece;
//! [`dense_sample_oracle`] recomputes the same report by brute-force
//! sampling so the two can be cross-checked.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    direction, min_clearance_comoving, min_clearance_static, project_scalar, PiecewisePath, Point,
    Segment, UnitVector,
};
use crate::planner::{plan, TrajectoryBundle};
use crate::scenario::{Scenario, DEFAULT_TOL_EQ};
use crate::strata::{classify, StratumDescriptor};

/// Largest waypoint error a passing report may carry.
pub const WAYPOINT_TOL: f64 = 1e-9;

/// Scenario generation gives up after this many rejected draws.
pub const RETRY_CAP: usize = 1000;

/// Draws whose smallest nonzero projection gap or point distance falls
/// below this fraction of the box scale are redrawn.
pub const MIN_SEPARATION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub waypoint_max_error: f64,
    pub min_robot_obstacle_clearance: f64,
    /// `None` for a single robot.
    pub min_robot_robot_clearance: Option<f64>,
    pub base_constant: bool,
    pub stratum: StratumDescriptor,
    pub pieces_by_robot: Vec<usize>,
}

impl VerificationReport {
    /// Waypoints hit, no collisions, obstacles fixed.
    pub fn passed(&self) -> bool {
        self.waypoint_max_error <= WAYPOINT_TOL
            && self.min_robot_obstacle_clearance > 0.0
            && self.min_robot_robot_clearance.is_none_or(|c| c > 0.0)
            && self.base_constant
    }

    /// Largest absolute difference between the numeric fields of two
    /// reports.
    pub fn max_difference(&self, other: &VerificationReport) -> f64 {
        let rr = match (self.min_robot_robot_clearance, other.min_robot_robot_clearance) {
            (Some(a), Some(b)) => (a - b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        (self.waypoint_max_error - other.waypoint_max_error)
            .abs()
            .max((self.min_robot_obstacle_clearance - other.min_robot_obstacle_clearance).abs())
            .max(rr)
    }
}

fn check_shapes(scenario: &Scenario, bundle: &TrajectoryBundle) -> Result<()> {
    if bundle.robot_paths.len() != scenario.n() {
        return Err(Error::ShapeMismatch(format!(
            "{} robot paths for {} robots",
            bundle.robot_paths.len(),
            scenario.n()
        )));
    }
    if bundle.obstacle_paths.len() != scenario.m() {
        return Err(Error::ShapeMismatch(format!(
            "{} obstacle paths for {} obstacles",
            bundle.obstacle_paths.len(),
            scenario.m()
        )));
    }
    let d = scenario.dim();
    if bundle
        .robot_paths
        .iter()
        .chain(&bundle.obstacle_paths)
        .any(|p| p.dim() != d)
    {
        return Err(Error::ShapeMismatch(format!("paths are not {d}-dimensional")));
    }
    Ok(())
}

fn waypoint_error(scenario: &Scenario, bundle: &TrajectoryBundle) -> Result<f64> {
    let mut worst = 0.0f64;
    for (l, &t) in scenario.schedule().iter().enumerate() {
        for (i, path) in bundle.robot_paths.iter().enumerate() {
            worst = worst.max(path.eval(t)?.distance(scenario.waypoint(l, i)));
        }
    }
    Ok(worst)
}

fn base_constant(scenario: &Scenario, bundle: &TrajectoryBundle) -> bool {
    bundle
        .obstacle_paths
        .iter()
        .zip(scenario.obstacles())
        .all(|(path, o)| path.is_constant() && path.pieces()[0].segment.start() == *o)
}

/// Sorted union of every robot path breakpoint.
fn breakpoints(bundle: &TrajectoryBundle) -> Vec<f64> {
    let mut ts: Vec<f64> = bundle
        .robot_paths
        .iter()
        .flat_map(|p| p.pieces().iter().flat_map(|pc| [pc.t_start, pc.t_end]))
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// The piece of `path` covering `[a, b]`, restricted to that interval.
fn restricted(path: &PiecewisePath, a: f64, b: f64) -> Segment {
    let pieces = path.pieces();
    let k = pieces.partition_point(|p| p.t_end <= a).min(pieces.len() - 1);
    let p = &pieces[k];
    let span = p.t_end - p.t_start;
    let s0 = ((a - p.t_start) / span).clamp(0.0, 1.0);
    let s1 = ((b - p.t_start) / span).clamp(0.0, 1.0);
    if s0 == 0.0 && s1 == 1.0 {
        p.segment.clone()
    } else {
        p.segment.restrict(s0, s1)
    }
}

fn pair_clearance(x: &Segment, y: &Segment) -> Option<f64> {
    match (x, y) {
        _ if x.is_constant() => Some(min_clearance_static(&x.start(), y)),
        _ if y.is_constant() => Some(min_clearance_static(&y.start(), x)),
        (Segment::Line { start: a0, end: a1 }, Segment::Line { start: b0, end: b1 }) => {
            Some(min_clearance_comoving(a0, a1, b0, b1))
        }
        _ => None,
    }
}

/// Closed-form verification of a planned bundle.
///
/// Robot-obstacle clearance is taken piece by piece against every obstacle.
/// Robot-robot clearance is evaluated on the common refinement of all robot
/// breakpoints: a mover against a frozen robot is a point-to-segment
/// distance, two simultaneously translating robots a quadratic in time.
pub fn verify(scenario: &Scenario, bundle: &TrajectoryBundle) -> Result<VerificationReport> {
    check_shapes(scenario, bundle)?;

    let mut robot_obstacle = f64::INFINITY;
    for path in &bundle.robot_paths {
        for piece in path.pieces() {
            for o in scenario.obstacles() {
                robot_obstacle = robot_obstacle.min(min_clearance_static(o, &piece.segment));
            }
        }
    }

    let robot_robot = if scenario.n() > 1 {
        let ts = breakpoints(bundle);
        let mut best = f64::INFINITY;
        for w in ts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let segs: Vec<Segment> = bundle.robot_paths.iter().map(|p| restricted(p, a, b)).collect();
            for i in 0..segs.len() {
                for j in i + 1..segs.len() {
                    let c = pair_clearance(&segs[i], &segs[j])
                        .ok_or(Error::NonAnalyticPair(i, j, a, b))?;
                    best = best.min(c);
                }
            }
        }
        Some(best)
    } else {
        None
    };

    Ok(VerificationReport {
        waypoint_max_error: waypoint_error(scenario, bundle)?,
        min_robot_obstacle_clearance: robot_obstacle,
        min_robot_robot_clearance: robot_robot,
        base_constant: base_constant(scenario, bundle),
        stratum: bundle.stratum.clone(),
        pieces_by_robot: bundle.robot_paths.iter().map(|p| p.pieces().len()).collect(),
    })
}

/// The same report computed by brute force: every interval of the common
/// refinement is sampled at `samples_per_piece` uniform times (endpoints
/// included) and distances are taken between sampled positions.
pub fn dense_sample_oracle(
    scenario: &Scenario,
    bundle: &TrajectoryBundle,
    samples_per_piece: usize,
) -> Result<VerificationReport> {
    if samples_per_piece < 2 {
        return Err(Error::InvalidParameters("at least two samples per piece".into()));
    }
    check_shapes(scenario, bundle)?;
    let d = scenario.dim();
    let n = scenario.n();
    let obstacles: Vec<&[f64]> = scenario.obstacles().iter().map(Point::coords).collect();
    let dist = |x: &[f64], y: &[f64]| -> f64 {
        x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    };

    let ts = breakpoints(bundle);
    let mut robot_obstacle = f64::INFINITY;
    let mut robot_robot = f64::INFINITY;
    let mut buf = vec![0.0; n * d];
    let last = (samples_per_piece - 1) as f64;
    for w in ts.windows(2) {
        let segs: Vec<Segment> = bundle
            .robot_paths
            .iter()
            .map(|p| restricted(p, w[0], w[1]))
            .collect();
        for k in 0..samples_per_piece {
            let s = if k + 1 == samples_per_piece { 1.0 } else { k as f64 / last };
            for (i, seg) in segs.iter().enumerate() {
                seg.write_at(s, &mut buf[i * d..(i + 1) * d]);
            }
            for i in 0..n {
                let x = &buf[i * d..(i + 1) * d];
                for o in &obstacles {
                    robot_obstacle = robot_obstacle.min(dist(x, o));
                }
                for j in i + 1..n {
                    robot_robot = robot_robot.min(dist(x, &buf[j * d..(j + 1) * d]));
                }
            }
        }
    }

    let mut base = true;
    for (path, o) in bundle.obstacle_paths.iter().zip(scenario.obstacles()) {
        for k in 0..samples_per_piece {
            let t = if k + 1 == samples_per_piece { 1.0 } else { k as f64 / last };
            base &= path.eval(t)? == *o;
        }
    }

    Ok(VerificationReport {
        waypoint_max_error: waypoint_error(scenario, bundle)?,
        min_robot_obstacle_clearance: robot_obstacle,
        min_robot_robot_clearance: (n > 1).then_some(robot_robot),
        base_constant: base,
        stratum: bundle.stratum.clone(),
        pieces_by_robot: bundle.robot_paths.iter().map(|p| p.pieces().len()).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Degeneracy {
    None,
    RobotRobot,
    RobotObstacle,
    ObstacleObstacle,
    Mixed,
}

impl Degeneracy {
    pub const ALL: [Degeneracy; 5] = [
        Degeneracy::None,
        Degeneracy::RobotRobot,
        Degeneracy::RobotObstacle,
        Degeneracy::ObstacleObstacle,
        Degeneracy::Mixed,
    ];
}

/// Parameters for [`random_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub seed: u64,
    pub degeneracy: Degeneracy,
    /// Half-width of the sampling box.
    pub scale: f64,
}

impl ScenarioSpec {
    pub fn new(d: usize, m: usize, n: usize, r: usize, seed: u64, degeneracy: Degeneracy) -> Self {
        ScenarioSpec {
            d,
            m,
            n,
            r,
            seed,
            degeneracy,
            scale: 10.0,
        }
    }

    fn check(&self) -> Result<()> {
        if self.d < 2 || self.d % 2 == 1 {
            return Err(Error::InvalidDimension(self.d));
        }
        if self.m < 2 || self.n < 1 || self.r < 2 {
            return Err(Error::InvalidParameters(format!(
                "need m ≥ 2, n ≥ 1, r ≥ 2 (got m={}, n={}, r={})",
                self.m, self.n, self.r
            )));
        }
        if self.degeneracy == Degeneracy::ObstacleObstacle && self.m < 3 {
            return Err(Error::InvalidParameters(
                "obstacle-obstacle degeneracy needs m >= 3".into(),
            ));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidParameters("scale must be positive".into()));
        }
        Ok(())
    }
}

fn random_point(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Point {
    Point::new((0..d).map(|_| rng.gen_range(-scale..scale)).collect())
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> UnitVector {
    loop {
        let v = Point::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return UnitVector::normalize(&v).expect("nonzero");
        }
    }
}

/// Moves `p` along `e` so that its projection becomes `q`.
fn with_projection(p: &Point, e: &UnitVector, q: f64) -> Point {
    p.offset(e, q - project_scalar(p, e))
}

/// Smallest nonzero projection gap and smallest point distance, relative
/// to the usual tolerance.
fn well_separated(s: &Scenario, scale: f64) -> bool {
    let e = s.base_direction();
    let tol = s.tol_abs();
    let min_sep = MIN_SEPARATION * scale;
    let pts: Vec<&Point> = s.obstacles().iter().chain(s.waypoints().iter().flatten()).collect();
    let mut q: Vec<f64> = pts.iter().map(|p| project_scalar(p, &e)).collect();
    q.sort_by(f64::total_cmp);
    if q.windows(2).any(|w| w[1] - w[0] > tol && w[1] - w[0] < min_sep) {
        return false;
    }
    let m = s.m();
    let n = s.n();
    // obstacles pairwise, obstacles vs robots, robots within a stage
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let same_stage = i >= m && j >= m && (i - m) / n == (j - m) / n;
            if (i < m || same_stage) && pts[i].distance(pts[j]) < min_sep {
                return false;
            }
        }
    }
    true
}

/// Deterministic seeded scenario. Degenerate modes copy projection scalars
/// between symbols exactly, then the draw is validated; rejected draws are
/// retried up to [`RETRY_CAP`] times.
pub fn random_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (d, m, n, r, scale) = (spec.d, spec.m, spec.n, spec.r, spec.scale);
    let rn = r * n;
    for _ in 0..RETRY_CAP {
        let o1 = random_point(&mut rng, d, scale);
        let o2 = random_point(&mut rng, d, scale);
        if o1.distance(&o2) < 0.2 * scale {
            continue;
        }
        let e = direction(&o1, &o2)?;
        let mut obstacles = vec![o1, o2];
        obstacles.extend((2..m).map(|_| random_point(&mut rng, d, scale)));
        let mut robots: Vec<Point> = (0..rn).map(|_| random_point(&mut rng, d, scale)).collect();

        let coincidences = |rng: &mut ChaCha8Rng, max: usize| rng.gen_range(1..=max.max(1));
        let robot_robot = |rng: &mut ChaCha8Rng, robots: &mut Vec<Point>| {
            if rn < 2 {
                return;
            }
            for _ in 0..coincidences(rng, rn / 2) {
                let a = rng.gen_range(0..rn);
                let mut b = rng.gen_range(0..rn - 1);
                if b >= a {
                    b += 1;
                }
                let q = project_scalar(&robots[a], &e);
                robots[b] = with_projection(&robots[b], &e, q);
            }
        };
        let robot_obstacle = |rng: &mut ChaCha8Rng, robots: &mut Vec<Point>, obstacles: &[Point]| {
            for _ in 0..coincidences(rng, rn.div_ceil(2)) {
                let b = rng.gen_range(0..rn);
                let q = project_scalar(&obstacles[rng.gen_range(0..m)], &e);
                robots[b] = with_projection(&robots[b], &e, q);
            }
        };
        let obstacle_obstacle = |rng: &mut ChaCha8Rng, obstacles: &mut Vec<Point>| {
            for _ in 0..coincidences(rng, m - 2) {
                let i = rng.gen_range(2..m);
                let mut j = rng.gen_range(0..m - 1);
                if j >= i {
                    j += 1;
                }
                let q = project_scalar(&obstacles[j], &e);
                obstacles[i] = with_projection(&obstacles[i], &e, q);
            }
        };
        match spec.degeneracy {
            Degeneracy::None => {}
            Degeneracy::RobotRobot => robot_robot(&mut rng, &mut robots),
            Degeneracy::RobotObstacle => robot_obstacle(&mut rng, &mut robots, &obstacles),
            Degeneracy::ObstacleObstacle => obstacle_obstacle(&mut rng, &mut obstacles),
            Degeneracy::Mixed => {
                if m >= 3 {
                    obstacle_obstacle(&mut rng, &mut obstacles);
                }
                robot_obstacle(&mut rng, &mut robots, &obstacles);
                robot_robot(&mut rng, &mut robots);
            }
        }

        let waypoints: Vec<Vec<Point>> = robots.chunks(n).map(<[Point]>::to_vec).collect();
        let Ok(scenario) = Scenario::new(obstacles, waypoints, None, DEFAULT_TOL_EQ) else {
            continue;
        };
        let Ok(stratum) = classify(&scenario) else {
            continue;
        };
        if !well_separated(&scenario, scale) {
            continue;
        }
        let intended = match spec.degeneracy {
            Degeneracy::None => stratum.t == rn,
            Degeneracy::RobotRobot | Degeneracy::RobotObstacle => stratum.t < rn,
            Degeneracy::ObstacleObstacle => stratum.s < m,
            Degeneracy::Mixed => stratum.t < rn && (m < 3 || stratum.s < m),
        };
        if intended {
            return Ok(scenario);
        }
    }
    Err(Error::GenerationFailed(RETRY_CAP))
}

/// Seeded scenario whose projection set has exactly `c` elements, i.e. a
/// configuration in the piece `W_c`.
pub fn scenario_with_class_count(
    d: usize,
    m: usize,
    n: usize,
    r: usize,
    c: usize,
    seed: u64,
) -> Result<Scenario> {
    ScenarioSpec::new(d, m, n, r, seed, Degeneracy::None).check()?;
    let rn = r * n;
    if !(2..=rn + m).contains(&c) {
        return Err(Error::InvalidParameters(format!("c = {c} outside 2..={}", rn + m)));
    }
    let scale = 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s_lo = 2.max(c.saturating_sub(rn));
    let s_hi = m.min(c);
    for _ in 0..RETRY_CAP {
        let s = rng.gen_range(s_lo..=s_hi);
        let t = c - s;
        let o1 = random_point(&mut rng, d, scale);
        let o2 = random_point(&mut rng, d, scale);
        if o1.distance(&o2) < 0.2 * scale {
            continue;
        }
        let e = direction(&o1, &o2)?;
        let mut class_values = vec![project_scalar(&o1, &e), project_scalar(&o2, &e)];
        let mut obstacles = vec![o1, o2];
        for k in 2..m {
            let p = random_point(&mut rng, d, scale);
            if k < s {
                class_values.push(project_scalar(&p, &e));
                obstacles.push(p);
            } else {
                let q = class_values[rng.gen_range(0..s)];
                obstacles.push(with_projection(&p, &e, q));
            }
        }
        let mut values = class_values.clone();
        let mut order: Vec<usize> = (0..rn).collect();
        order.shuffle(&mut rng);
        let mut robots: Vec<Point> = (0..rn).map(|_| random_point(&mut rng, d, scale)).collect();
        for (rank, &idx) in order.iter().enumerate() {
            if rank < t {
                values.push(project_scalar(&robots[idx], &e));
            } else {
                let q = values[rng.gen_range(0..values.len())];
                robots[idx] = with_projection(&robots[idx], &e, q);
            }
        }
        let waypoints: Vec<Vec<Point>> = robots.chunks(n).map(<[Point]>::to_vec).collect();
        let Ok(scenario) = Scenario::new(obstacles, waypoints, None, DEFAULT_TOL_EQ) else {
            continue;
        };
        if !well_separated(&scenario, scale) {
            continue;
        }
        if matches!(classify(&scenario), Ok(st) if st.c == c) {
            return Ok(scenario);
        }
    }
    Err(Error::GenerationFailed(RETRY_CAP))
}

/// How [`continuity_probe_with`] perturbs a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// Every point moves by `eta` in an independent random direction.
    Generic,
    /// A common translation of length `eta`, plus independent jitter of
    /// length `eta` orthogonal to the base direction for every point other
    /// than the first two obstacles. All projection ties survive.
    StratumPreserving,
}

fn perturbed(scenario: &Scenario, eta: f64, seed: u64, mode: Perturbation) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = scenario.dim();
    let e = scenario.base_direction();
    let shift = random_unit(&mut rng, d);
    let mut moved = |p: &Point, k: usize| -> Point {
        match mode {
            Perturbation::Generic => p.offset(&random_unit(&mut rng, d), eta),
            Perturbation::StratumPreserving => {
                let base = p.offset(&shift, eta);
                if k < 2 {
                    return base;
                }
                let w = random_unit(&mut rng, d);
                let w = w.as_point().offset(&e, -project_scalar(w.as_point(), &e));
                match UnitVector::normalize(&w) {
                    Ok(u) => base.offset(&u, eta),
                    Err(_) => base,
                }
            }
        }
    };
    let obstacles: Vec<Point> = scenario
        .obstacles()
        .iter()
        .enumerate()
        .map(|(k, o)| moved(o, k))
        .collect();
    let waypoints: Vec<Vec<Point>> = scenario
        .waypoints()
        .iter()
        .map(|stage| stage.iter().map(|z| moved(z, usize::MAX)).collect())
        .collect();
    Scenario::new(
        obstacles,
        waypoints,
        Some(scenario.schedule().to_vec()),
        scenario.tol_eq(),
    )
}

/// Sup over a 1001-point time grid of the largest robot displacement
/// between the plans for `scenario` and for a generic `eta`-perturbation of
/// it. Fails with `StratumEscaped` if the perturbation changes the stratum.
pub fn continuity_probe(scenario: &Scenario, eta: f64, seed: u64) -> Result<f64> {
    continuity_probe_with(scenario, eta, seed, Perturbation::Generic)
}

pub fn continuity_probe_with(
    scenario: &Scenario,
    eta: f64,
    seed: u64,
    mode: Perturbation,
) -> Result<f64> {
    let stratum = classify(scenario)?;
    let other = perturbed(scenario, eta, seed, mode).map_err(|e| Error::StratumEscaped {
        from: stratum.to_string(),
        to: e.to_string(),
    })?;
    let other_stratum = classify(&other).map_err(|e| Error::StratumEscaped {
        from: stratum.to_string(),
        to: e.to_string(),
    })?;
    if other_stratum != stratum {
        return Err(Error::StratumEscaped {
            from: stratum.to_string(),
            to: other_stratum.to_string(),
        });
    }
    let a = plan(scenario)?;
    let b = plan(&other)?;
    let mut sup = 0.0f64;
    for k in 0..=1000 {
        let t = if k == 1000 { 1.0 } else { k as f64 / 1000.0 };
        for (pa, pb) in a.robot_paths.iter().zip(&b.robot_paths) {
            sup = sup.max(pa.eval(t)?.distance(&pb.eval(t)?));
        }
    }
    Ok(sup)
}
