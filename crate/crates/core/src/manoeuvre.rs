//! Single-robot obstacle avoidance: move one robot from `z` to `z'` past
//! point obstacles, going around every obstacle projection class it must
//! cross on a semicircle of radius `epsilon / 4`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{direction, perp, project_scalar, Piece, PiecewisePath, Point, Segment, UnitVector};
use crate::strata::group_values;

/// One robot, its start and goal, and the obstacles it must avoid.
///
/// `classes` is the projection-equivalence relation on obstacle indices
/// (zero-based): two obstacles share a class iff their projections onto the
/// base line agree within `tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleRobotScene {
    obstacles: Vec<Point>,
    z: Point,
    z_prime: Point,
    classes: Vec<Vec<usize>>,
    e_b: UnitVector,
    tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manoeuvre {
    pub path: PiecewisePath,
    /// Number of obstacle projection classes crossed.
    pub j: usize,
    pub epsilon: f64,
}

impl SingleRobotScene {
    /// Builds a scene, deriving the relation from the obstacle projections.
    /// `tol` is an absolute tolerance on projection differences.
    pub fn new(obstacles: Vec<Point>, z: Point, z_prime: Point, tol: f64) -> Result<Self> {
        if obstacles.len() < 2 {
            return Err(Error::NotInOmega("at least two obstacles required".into()));
        }
        let e_b = direction(&obstacles[0], &obstacles[1])
            .map_err(|e| Error::NotInOmega(e.to_string()))?;
        let labelled: Vec<(usize, f64)> = obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| (i, project_scalar(o, &e_b)))
            .collect();
        let classes = group_values(&labelled, tol)?;
        Self::with_relation(obstacles, z, z_prime, classes, tol)
    }

    /// Builds a scene with an explicit relation, checking it against the
    /// geometry.
    pub fn with_relation(
        obstacles: Vec<Point>,
        z: Point,
        z_prime: Point,
        mut classes: Vec<Vec<usize>>,
        tol: f64,
    ) -> Result<Self> {
        if obstacles.len() < 2 {
            return Err(Error::NotInOmega("at least two obstacles required".into()));
        }
        let e_b = direction(&obstacles[0], &obstacles[1])
            .map_err(|e| Error::NotInOmega(e.to_string()))?;
        for c in &mut classes {
            c.sort_unstable();
        }
        let scene = SingleRobotScene {
            obstacles,
            z,
            z_prime,
            classes,
            e_b,
            tol,
        };
        scene.validate()?;
        Ok(scene)
    }

    fn validate(&self) -> Result<()> {
        let m = self.obstacles.len();
        let dim = self.z.dim();
        if self.z_prime.dim() != dim || self.obstacles.iter().any(|o| o.dim() != dim) {
            return Err(Error::NotInOmega("dimension mismatch".into()));
        }
        let mut class_of = vec![usize::MAX; m];
        for (k, class) in self.classes.iter().enumerate() {
            for &i in class {
                if i >= m || class_of[i] != usize::MAX {
                    return Err(Error::NotInOmega("relation is not a partition of the obstacles".into()));
                }
                class_of[i] = k;
            }
        }
        if class_of.contains(&usize::MAX) {
            return Err(Error::NotInOmega("relation does not cover every obstacle".into()));
        }

        let q = self.obstacle_projections();
        for i in 0..m {
            for k in i + 1..m {
                if self.obstacles[i].distance(&self.obstacles[k]) <= self.tol {
                    return Err(Error::NotInOmega(format!("obstacles {i} and {k} coincide")));
                }
                let tied = (q[i] - q[k]).abs() <= self.tol;
                if tied != (class_of[i] == class_of[k]) {
                    return Err(Error::NotInOmega(format!(
                        "relation disagrees with projections for obstacles {i} and {k}"
                    )));
                }
            }
        }
        let qz = self.proj(&self.z);
        let qz1 = self.proj(&self.z_prime);
        for (i, o) in self.obstacles.iter().enumerate() {
            if o.distance(&self.z) <= self.tol || o.distance(&self.z_prime) <= self.tol {
                return Err(Error::NotInOmega(format!("endpoint coincides with obstacle {i}")));
            }
            if (qz - q[i]).abs() <= self.tol || (qz1 - q[i]).abs() <= self.tol {
                return Err(Error::NotInOmega(format!(
                    "endpoint projection coincides with obstacle {i}"
                )));
            }
        }
        Ok(())
    }

    pub fn obstacles(&self) -> &[Point] {
        &self.obstacles
    }

    pub fn z(&self) -> &Point {
        &self.z
    }

    pub fn z_prime(&self) -> &Point {
        &self.z_prime
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn e_b(&self) -> &UnitVector {
        &self.e_b
    }

    fn proj(&self, x: &Point) -> f64 {
        project_scalar(x, &self.e_b)
    }

    fn obstacle_projections(&self) -> Vec<f64> {
        self.obstacles.iter().map(|o| self.proj(o)).collect()
    }

    fn swapped(&self) -> SingleRobotScene {
        SingleRobotScene {
            z: self.z_prime.clone(),
            z_prime: self.z.clone(),
            ..self.clone()
        }
    }

    /// Smallest of: obstacle distances, endpoint-to-obstacle projection gaps
    /// and projection gaps between inequivalent obstacles.
    pub fn epsilon(&self) -> f64 {
        let q = self.obstacle_projections();
        let qz = self.proj(&self.z);
        let qz1 = self.proj(&self.z_prime);
        let mut class_of = vec![0; q.len()];
        for (k, class) in self.classes.iter().enumerate() {
            for &i in class {
                class_of[i] = k;
            }
        }
        let mut eps = f64::INFINITY;
        for i in 0..q.len() {
            eps = eps.min((qz - q[i]).abs()).min((qz1 - q[i]).abs());
            for k in i + 1..q.len() {
                eps = eps.min(self.obstacles[i].distance(&self.obstacles[k]));
                if class_of[i] != class_of[k] {
                    eps = eps.min((q[i] - q[k]).abs());
                }
            }
        }
        eps
    }

    /// Class representatives (smallest index per class) whose projection
    /// lies strictly between the endpoint projections, in travel order.
    pub fn crossed_classes(&self) -> Vec<usize> {
        let q = self.obstacle_projections();
        let qz = self.proj(&self.z);
        let qz1 = self.proj(&self.z_prime);
        let (lo, hi) = if qz < qz1 { (qz, qz1) } else { (qz1, qz) };
        let mut reps: Vec<usize> = self
            .classes
            .iter()
            .map(|c| c[0])
            .filter(|&i| lo < q[i] && q[i] < hi)
            .collect();
        reps.sort_by(|&a, &b| q[a].total_cmp(&q[b]));
        if qz > qz1 {
            reps.reverse();
        }
        reps
    }

    /// The avoidance path: straight segments between the crossed classes
    /// and a half turn around each class representative, in the plane
    /// spanned by the base direction and its tangent-field partner. The
    /// `2j + 1` pieces share `[0, 1]` equally.
    pub fn avoidance_path(&self) -> Result<Manoeuvre> {
        if self.proj(&self.z) > self.proj(&self.z_prime) {
            let forward = self.swapped().avoidance_path()?;
            return Ok(Manoeuvre {
                path: forward.path.reversed(),
                ..forward
            });
        }

        let eps = self.epsilon();
        let crossed = self.crossed_classes();
        let j = crossed.len();
        if j == 0 {
            let seg = Segment::line(self.z.clone(), self.z_prime.clone())
                .map_err(|e| Error::NotInOmega(e.to_string()))?;
            let path = PiecewisePath::new(vec![Piece {
                segment: seg,
                t_start: 0.0,
                t_end: 1.0,
            }])?;
            return Ok(Manoeuvre { path, j, epsilon: eps });
        }

        let radius = eps / 4.0;
        let e_perp = perp(&self.e_b)?;
        let mut segments = Vec::with_capacity(2 * j + 1);
        let mut from = self.z.clone();
        for &i in &crossed {
            let o = &self.obstacles[i];
            let before = o.offset(&self.e_b, -radius);
            let after = o.offset(&self.e_b, radius);
            segments.push(Segment::line(from, before)?);
            segments.push(Segment::arc(
                o.clone(),
                radius,
                self.e_b.clone(),
                e_perp.clone(),
                PI,
                2.0 * PI,
            )?);
            from = after;
        }
        segments.push(Segment::line(from, self.z_prime.clone())?);

        let count = segments.len();
        let bound = |k: usize| if k == count { 1.0 } else { k as f64 / count as f64 };
        let pieces = segments
            .into_iter()
            .enumerate()
            .map(|(k, segment)| Piece {
                segment,
                t_start: bound(k),
                t_end: bound(k + 1),
            })
            .collect();
        Ok(Manoeuvre {
            path: PiecewisePath::new(pieces)?,
            j,
            epsilon: eps,
        })
    }
}
