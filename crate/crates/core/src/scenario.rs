use crate::error::{Error, Result};
use crate::geometry::{direction, project_scalar, Point, UnitVector};

/// Default equality tolerance for projections, relative to the
/// configuration diameter.
pub const DEFAULT_TOL_EQ: f64 = 1e-9;

/// A point of the sequential configuration space: `m` obstacles, `r` stages
/// of `n` robot waypoints each, and the time schedule at which each stage
/// must be reached.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    obstacles: Vec<Point>,
    /// Indexed `[stage][robot]`.
    waypoints: Vec<Vec<Point>>,
    schedule: Vec<f64>,
    tol_eq: f64,
    diameter: f64,
}

impl Scenario {
    /// Validates and builds a scenario. `schedule` defaults to the uniform
    /// grid `(l - 1) / (r - 1)`.
    pub fn new(
        obstacles: Vec<Point>,
        waypoints: Vec<Vec<Point>>,
        schedule: Option<Vec<f64>>,
        tol_eq: f64,
    ) -> Result<Self> {
        let m = obstacles.len();
        let r = waypoints.len();
        if m < 2 {
            return Err(Error::InvalidParameters(format!("m ≥ 2 required, got {m}")));
        }
        if r < 2 {
            return Err(Error::InvalidParameters(format!("r ≥ 2 required, got {r}")));
        }
        let n = waypoints[0].len();
        if n < 1 {
            return Err(Error::InvalidParameters("n ≥ 1 required".into()));
        }
        if waypoints.iter().any(|stage| stage.len() != n) {
            return Err(Error::InvalidParameters(
                "every stage must list the same number of robots".into(),
            ));
        }
        let d = obstacles[0].dim();
        if d < 2 || d % 2 == 1 {
            return Err(Error::InvalidDimension(d));
        }
        let all = obstacles.iter().chain(waypoints.iter().flatten());
        for p in all.clone() {
            if p.dim() != d {
                return Err(Error::InvalidInput(format!(
                    "point of dimension {} in a {d}-dimensional scenario",
                    p.dim()
                )));
            }
            if !p.is_finite() {
                return Err(Error::InvalidInput("non-finite coordinate".into()));
            }
        }
        if !(tol_eq > 0.0 && tol_eq.is_finite()) {
            return Err(Error::InvalidParameters(format!("tolerance must be positive, got {tol_eq}")));
        }

        let schedule = match schedule {
            Some(s) => {
                if s.len() != r {
                    return Err(Error::InvalidParameters(format!(
                        "schedule has {} entries for {r} stages",
                        s.len()
                    )));
                }
                if s[0] != 0.0 || s[r - 1] != 1.0 {
                    return Err(Error::InvalidParameters(
                        "schedule must start at 0 and end at 1".into(),
                    ));
                }
                if s.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidParameters(
                        "schedule must be strictly increasing".into(),
                    ));
                }
                s
            }
            None => (0..r)
                .map(|l| {
                    if l == r - 1 {
                        1.0
                    } else {
                        l as f64 / (r - 1) as f64
                    }
                })
                .collect(),
        };

        let pts: Vec<&Point> = all.collect();
        let mut diameter = 0.0f64;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                diameter = diameter.max(a.distance(b));
            }
        }

        let scenario = Scenario {
            obstacles,
            waypoints,
            schedule,
            tol_eq,
            diameter,
        };
        scenario.check_total_space()?;
        Ok(scenario)
    }

    fn check_total_space(&self) -> Result<()> {
        let tol = self.tol_abs();
        let o = &self.obstacles;
        for i in 0..o.len() {
            for k in i + 1..o.len() {
                if o[i].distance(&o[k]) <= tol {
                    return Err(Error::NotInTotalSpace(format!(
                        "obstacles {} and {} coincide",
                        i + 1,
                        k + 1
                    )));
                }
            }
        }
        for (l, stage) in self.waypoints.iter().enumerate() {
            for (j, z) in stage.iter().enumerate() {
                if let Some(i) = o.iter().position(|oi| oi.distance(z) <= tol) {
                    return Err(Error::NotInTotalSpace(format!(
                        "robot {} at stage {} coincides with obstacle {}",
                        j + 1,
                        l + 1,
                        i + 1
                    )));
                }
                for (k, w) in stage.iter().enumerate().skip(j + 1) {
                    if z.distance(w) <= tol {
                        return Err(Error::NotInTotalSpace(format!(
                            "robots {} and {} coincide at stage {}",
                            j + 1,
                            k + 1,
                            l + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.obstacles[0].dim()
    }

    pub fn m(&self) -> usize {
        self.obstacles.len()
    }

    pub fn n(&self) -> usize {
        self.waypoints[0].len()
    }

    pub fn r(&self) -> usize {
        self.waypoints.len()
    }

    pub fn obstacles(&self) -> &[Point] {
        &self.obstacles
    }

    pub fn waypoints(&self) -> &[Vec<Point>] {
        &self.waypoints
    }

    /// Waypoint of robot `j` at stage `l` (both zero-based).
    pub fn waypoint(&self, l: usize, j: usize) -> &Point {
        &self.waypoints[l][j]
    }

    pub fn schedule(&self) -> &[f64] {
        &self.schedule
    }

    /// Relative equality tolerance as supplied.
    pub fn tol_eq(&self) -> f64 {
        self.tol_eq
    }

    /// Largest distance between any two points of the configuration.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Absolute tolerance: `tol_eq` scaled by the diameter.
    pub fn tol_abs(&self) -> f64 {
        self.tol_eq * self.diameter
    }

    /// Unit vector from obstacle 1 toward obstacle 2.
    pub fn base_direction(&self) -> UnitVector {
        // o1 != o2 is checked at construction
        direction(&self.obstacles[0], &self.obstacles[1]).expect("validated base")
    }

    /// Same obstacles and schedule with new waypoints.
    pub fn with_waypoints(&self, waypoints: Vec<Vec<Point>>) -> Result<Scenario> {
        Scenario::new(
            self.obstacles.clone(),
            waypoints,
            Some(self.schedule.clone()),
            self.tol_eq,
        )
    }

    pub(crate) fn obstacle_projections(&self, e: &UnitVector) -> Vec<f64> {
        self.obstacles.iter().map(|o| project_scalar(o, e)).collect()
    }

    pub(crate) fn waypoint_projections(&self, e: &UnitVector) -> Vec<Vec<f64>> {
        self.waypoints
            .iter()
            .map(|stage| stage.iter().map(|z| project_scalar(z, e)).collect())
            .collect()
    }
}
