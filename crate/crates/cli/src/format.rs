//! On-disk formats: scenario and trajectory JSON, CSV sampling.

use serde::{Deserialize, Serialize};
use std::io::Write;

use seqpar_core::geometry::Piece;
use seqpar_core::{
    Error, PiecewisePath, Point, Result, Scenario, Segment, StratumDescriptor, TrajectoryBundle, UnitVector,
    DEFAULT_TOL_EQ,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub dimension: usize,
    pub obstacles: Vec<Vec<f64>>,
    /// Indexed `[stage][robot][coord]`.
    pub waypoints: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl ScenarioFile {
    /// Builds the scenario. `default_tol` applies when the file has no
    /// `tolerance` of its own.
    pub fn to_scenario(&self, default_tol: Option<f64>) -> Result<Scenario> {
        let d = self.dimension;
        if d == 0 || !d.is_multiple_of(2) {
            return Err(Error::InvalidDimension(d));
        }
        let point = |c: &Vec<f64>, what: &str| -> Result<Point> {
            if c.len() != d {
                return Err(Error::InvalidInput(format!(
                    "{what} has {} coordinates, dimension is {d}",
                    c.len()
                )));
            }
            Ok(Point::new(c.clone()))
        };
        let obstacles = self
            .obstacles
            .iter()
            .enumerate()
            .map(|(k, c)| point(c, &format!("obstacle {}", k + 1)))
            .collect::<Result<Vec<_>>>()?;
        let waypoints = self
            .waypoints
            .iter()
            .enumerate()
            .map(|(l, stage)| {
                stage
                    .iter()
                    .enumerate()
                    .map(|(i, c)| point(c, &format!("waypoint z{}.{}", l + 1, i + 1)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let tol = self.tolerance.or(default_tol).unwrap_or(DEFAULT_TOL_EQ);
        Scenario::new(obstacles, waypoints, self.schedule.clone(), tol)
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        ScenarioFile {
            dimension: s.dim(),
            obstacles: s.obstacles().iter().map(|o| o.coords().to_vec()).collect(),
            waypoints: s
                .waypoints()
                .iter()
                .map(|st| st.iter().map(|z| z.coords().to_vec()).collect())
                .collect(),
            schedule: Some(s.schedule().to_vec()),
            tolerance: Some(s.tol_eq()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SegmentRecord {
    Line {
        start: Vec<f64>,
        end: Vec<f64>,
    },
    Arc {
        center: Vec<f64>,
        radius: f64,
        u: Vec<f64>,
        v: Vec<f64>,
        angle_from: f64,
        angle_to: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceRecord {
    #[serde(flatten)]
    pub segment: SegmentRecord,
    pub t0: f64,
    pub t1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotRecord {
    pub pieces: Vec<PieceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub stratum: String,
    pub delta: Option<f64>,
    #[serde(default)]
    pub desingularized: bool,
    pub robots: Vec<RobotRecord>,
    pub obstacles: Vec<Vec<f64>>,
}

fn segment_record(seg: &Segment) -> SegmentRecord {
    match seg {
        Segment::Line { start, end } => SegmentRecord::Line {
            start: start.coords().to_vec(),
            end: end.coords().to_vec(),
        },
        Segment::Arc(a) => SegmentRecord::Arc {
            center: a.center.coords().to_vec(),
            radius: a.radius,
            u: a.u.coords().to_vec(),
            v: a.v.coords().to_vec(),
            angle_from: a.angle_from,
            angle_to: a.angle_to,
        },
    }
}

fn segment(rec: &SegmentRecord) -> Result<Segment> {
    match rec {
        SegmentRecord::Line { start, end } => {
            if start.len() != end.len() {
                return Err(Error::InvalidInput("line endpoints differ in dimension".into()));
            }
            Ok(Segment::Line {
                start: Point::new(start.clone()),
                end: Point::new(end.clone()),
            })
        }
        SegmentRecord::Arc {
            center,
            radius,
            u,
            v,
            angle_from,
            angle_to,
        } => Segment::arc(
            Point::new(center.clone()),
            *radius,
            UnitVector::new(Point::new(u.clone()))?,
            UnitVector::new(Point::new(v.clone()))?,
            *angle_from,
            *angle_to,
        ),
    }
}

impl TrajectoryFile {
    pub fn from_bundle(bundle: &TrajectoryBundle) -> Self {
        TrajectoryFile {
            stratum: bundle.stratum.to_string(),
            delta: bundle.delta,
            desingularized: bundle.desingularized,
            robots: bundle
                .robot_paths
                .iter()
                .map(|p| RobotRecord {
                    pieces: p
                        .pieces()
                        .iter()
                        .map(|pc| PieceRecord {
                            segment: segment_record(&pc.segment),
                            t0: pc.t_start,
                            t1: pc.t_end,
                        })
                        .collect(),
                })
                .collect(),
            obstacles: bundle
                .obstacle_paths
                .iter()
                .map(|p| p.pieces()[0].segment.start().coords().to_vec())
                .collect(),
        }
    }

    pub fn to_bundle(&self) -> Result<TrajectoryBundle> {
        let stratum: StratumDescriptor = self.stratum.parse()?;
        let robot_paths = self
            .robots
            .iter()
            .map(|r| {
                let pieces = r
                    .pieces
                    .iter()
                    .map(|p| {
                        Ok(Piece {
                            segment: segment(&p.segment)?,
                            t_start: p.t0,
                            t_end: p.t1,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                PiecewisePath::new(pieces)
            })
            .collect::<Result<Vec<_>>>()?;
        let obstacle_paths = self
            .obstacles
            .iter()
            .map(|c| PiecewisePath::constant(Point::new(c.clone())))
            .collect();
        Ok(TrajectoryBundle {
            robot_paths,
            obstacle_paths,
            stratum,
            desingularized: self.desingularized,
            delta: self.delta,
        })
    }
}

/// Samples every robot at `samples` uniform times in `[0, 1]` and writes
/// rows `t, robot_index, coord_0, ..`.
pub fn write_csv<W: Write>(bundle: &TrajectoryBundle, samples: usize, out: W) -> std::io::Result<()> {
    let d = bundle.robot_paths.first().map_or(0, |p| p.dim());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "robot_index".to_string()];
    header.extend((0..d).map(|k| format!("coord_{k}")));
    w.write_record(&header)?;
    let last = samples.saturating_sub(1).max(1) as f64;
    for k in 0..samples {
        let t = if k + 1 == samples { 1.0 } else { k as f64 / last };
        for (i, path) in bundle.robot_paths.iter().enumerate() {
            let x = path.eval(t).map_err(std::io::Error::other)?;
            let mut row = vec![t.to_string(), i.to_string()];
            row.extend(x.coords().iter().map(f64::to_string));
            w.write_record(&row)?;
        }
    }
    w.flush()
}
