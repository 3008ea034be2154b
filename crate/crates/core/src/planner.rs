//! The multi-robot section: on nondegenerate configurations robots take
//! turns, each running the single-robot manoeuvre while every other robot
//! is treated as a frozen obstacle. Degenerate configurations are first
//! pushed into a nondegenerate stratum along the base direction, planned
//! there, and pulled back.

use crate::error::{Error, Result};
use crate::geometry::{PathBuilder, PiecewisePath, Point, Segment};
use crate::manoeuvre::SingleRobotScene;
use crate::scenario::Scenario;
use crate::strata::{classify, StratumDescriptor};

/// Robot trajectories together with the (constant) obstacle trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBundle {
    pub robot_paths: Vec<PiecewisePath>,
    pub obstacle_paths: Vec<PiecewisePath>,
    /// Stratum of the input configuration.
    pub stratum: StratumDescriptor,
    pub desingularized: bool,
    /// `delta(C)` when the input needed desingularization.
    pub delta: Option<f64>,
}

impl TrajectoryBundle {
    /// Positions of all robots at time `t`.
    pub fn robots_at(&self, t: f64) -> Result<Vec<Point>> {
        self.robot_paths.iter().map(|p| p.eval(t)).collect()
    }
}

/// Projection data shared by [`delta`] and the desingularizing step.
struct RobotGaps {
    /// Smallest nonzero robot-robot or robot-obstacle projection gap.
    delta: Option<f64>,
    /// Smallest gap from a robot up to a strictly higher obstacle.
    up: f64,
}

fn robot_gaps(config: &Scenario) -> RobotGaps {
    let e = config.base_direction();
    let tol = config.tol_abs();
    let robots: Vec<f64> = config.waypoint_projections(&e).into_iter().flatten().collect();
    let obstacles = config.obstacle_projections(&e);
    let mut delta = f64::INFINITY;
    let mut up = f64::INFINITY;
    for (k, &a) in robots.iter().enumerate() {
        for &b in &robots[k + 1..] {
            let gap = (a - b).abs();
            if gap > tol {
                delta = delta.min(gap);
            }
        }
        for &o in &obstacles {
            let gap = (a - o).abs();
            if gap > tol {
                delta = delta.min(gap);
                if o > a {
                    up = up.min(gap);
                }
            }
        }
    }
    RobotGaps {
        delta: delta.is_finite().then_some(delta),
        up,
    }
}

/// Minimum over robot-robot and robot-obstacle pairs with distinct
/// projections of their projection gap.
pub fn delta(config: &Scenario) -> Result<f64> {
    robot_gaps(config).delta.ok_or(Error::NotApplicable)
}

/// Unit of the desingularizing shift: robot with key `k` moves by
/// `k * step / (rn)` along the base direction.
///
/// This is `delta(C)`, capped at `rn / (rn + 1)` of the smallest gap between
/// a robot and an obstacle above it, so that even the robot with the
/// largest key stops strictly short of the next obstacle projection.
pub fn mu_step(config: &Scenario) -> Result<f64> {
    let gaps = robot_gaps(config);
    let delta = gaps.delta.ok_or(Error::NotApplicable)?;
    let rn = (config.r() * config.n()) as f64;
    Ok(delta.min(rn / (rn + 1.0) * gaps.up))
}

/// Pushes every waypoint along the base direction by its key times
/// `mu_step / (rn)`, landing in the nondegenerate stratum. Returns the
/// shifted scenario and the offsets, indexed `[stage][robot]`.
pub fn desingularize(config: &Scenario) -> Result<(Scenario, Vec<Vec<f64>>)> {
    let stratum = classify(config)?;
    let (n, r) = (config.n(), config.r());
    if stratum.t == r * n {
        return Err(Error::NotNeeded);
    }
    let step = mu_step(config)?;
    let e = config.base_direction();
    let rn = (r * n) as f64;
    let offsets: Vec<Vec<f64>> = (0..r)
        .map(|l| (0..n).map(|i| (l * n + i + 1) as f64 * step / rn).collect())
        .collect();
    let waypoints = config
        .waypoints()
        .iter()
        .zip(&offsets)
        .map(|(stage, offs)| stage.iter().zip(offs).map(|(z, &k)| z.offset(&e, k)).collect())
        .collect();
    Ok((config.with_waypoints(waypoints)?, offsets))
}

/// Stage gap `l` of the core section, run inside the window `[a, b]`.
///
/// Robot `j` moves alone during the `j`-th of `n` equal slots; robots before
/// it already sit at their next waypoint, robots after it still wait at the
/// current one.
fn push_gap(config: &Scenario, l: usize, (a, b): (f64, f64), builders: &mut [PathBuilder]) -> Result<()> {
    let n = config.n();
    let tol = config.tol_abs();
    let slot = |k: usize| if k == n { b } else { a + (b - a) * k as f64 / n as f64 };
    for j in 0..n {
        let obstacles: Vec<Point> = config
            .obstacles()
            .iter()
            .chain((0..j).map(|i| config.waypoint(l + 1, i)))
            .chain((j + 1..n).map(|i| config.waypoint(l, i)))
            .cloned()
            .collect();
        let scene = SingleRobotScene::new(
            obstacles,
            config.waypoint(l, j).clone(),
            config.waypoint(l + 1, j).clone(),
            tol,
        )
        .map_err(|e| {
            Error::InternalInvariantBroken(format!(
                "sub-scene for robot {} in stage gap {} rejected: {e}",
                j + 1,
                l + 1
            ))
        })?;
        let manoeuvre = scene.avoidance_path()?;
        let (t0, t1) = (slot(j), slot(j + 1));
        for (i, builder) in builders.iter_mut().enumerate() {
            if i == j {
                builder.embed(&manoeuvre.path, t0, t1);
            } else if i < j {
                builder.hold(config.waypoint(l + 1, i), t0, t1);
            } else {
                builder.hold(config.waypoint(l, i), t0, t1);
            }
        }
    }
    Ok(())
}

fn obstacle_paths(config: &Scenario) -> Vec<PiecewisePath> {
    config
        .obstacles()
        .iter()
        .map(|o| PiecewisePath::constant(o.clone()))
        .collect()
}

/// The section over a nondegenerate stratum (all robot projections
/// pairwise distinct and distinct from every obstacle projection).
pub fn core_section(config: &Scenario) -> Result<TrajectoryBundle> {
    let stratum = classify(config)?;
    let rn = config.r() * config.n();
    if stratum.t != rn {
        return Err(Error::NotCore { t: stratum.t, rn });
    }
    let windows: Vec<(f64, f64)> = config.schedule().windows(2).map(|w| (w[0], w[1])).collect();
    let mut builders: Vec<PathBuilder> = (0..config.n()).map(|_| PathBuilder::new()).collect();
    for (l, &window) in windows.iter().enumerate() {
        push_gap(config, l, window, &mut builders)?;
    }
    Ok(TrajectoryBundle {
        robot_paths: builders.into_iter().map(PathBuilder::finish).collect::<Result<_>>()?,
        obstacle_paths: obstacle_paths(config),
        stratum,
        desingularized: false,
        delta: None,
    })
}

/// Plans trajectories through every stage of `config`.
///
/// Nondegenerate inputs go straight to [`core_section`]. Otherwise each
/// stage gap `[t_l, t_{l+1}]` is split into a lead-in quarter in which all
/// robots slide simultaneously onto the desingularized waypoints, a middle
/// half running the core section of the shifted configuration, and a
/// lead-out quarter sliding back onto the true next waypoints.
pub fn plan(config: &Scenario) -> Result<TrajectoryBundle> {
    let stratum = classify(config)?;
    let (n, r) = (config.n(), config.r());
    if stratum.t == r * n {
        return core_section(config);
    }

    let (shifted, _) = desingularize(config)?;
    let shifted_stratum = classify(&shifted)?;
    if shifted_stratum.t != r * n {
        return Err(Error::InternalInvariantBroken(format!(
            "desingularized configuration is still degenerate: {shifted_stratum}"
        )));
    }

    let schedule = config.schedule();
    let mut windows = Vec::with_capacity(r - 1);
    for w in schedule.windows(2) {
        let quarter = (w[1] - w[0]) / 4.0;
        windows.push((w[0] + quarter, w[1] - quarter));
    }

    let mut builders: Vec<PathBuilder> = (0..n).map(|_| PathBuilder::new()).collect();
    for (l, &(a, b)) in windows.iter().enumerate() {
        for (i, builder) in builders.iter_mut().enumerate() {
            let seg = Segment::line(config.waypoint(l, i).clone(), shifted.waypoint(l, i).clone())?;
            builder.push(seg, schedule[l], a);
        }
        push_gap(&shifted, l, (a, b), &mut builders)?;
        for (i, builder) in builders.iter_mut().enumerate() {
            let seg = Segment::line(
                shifted.waypoint(l + 1, i).clone(),
                config.waypoint(l + 1, i).clone(),
            )?;
            builder.push(seg, b, schedule[l + 1]);
        }
    }

    Ok(TrajectoryBundle {
        robot_paths: builders.into_iter().map(PathBuilder::finish).collect::<Result<_>>()?,
        obstacle_paths: obstacle_paths(config),
        stratum,
        desingularized: true,
        delta: Some(delta(config)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::DEFAULT_TOL_EQ;
    use crate::strata::desingularized_order;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec())
    }

    fn scenario(obs: &[&[f64]], stages: &[&[&[f64]]], schedule: Option<Vec<f64>>) -> Scenario {
        Scenario::new(
            obs.iter().map(|c| p(c)).collect(),
            stages.iter().map(|s| s.iter().map(|c| p(c)).collect()).collect(),
            schedule,
            DEFAULT_TOL_EQ,
        )
        .unwrap()
    }

    fn degenerate_example() -> Scenario {
        scenario(&[&[0.0, 0.0], &[4.0, 0.0]], &[&[&[1.0, 1.0]], &[&[1.0, 5.0]]], None)
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&degenerate_example()).unwrap(), 1.0);
        let c = scenario(&[&[0.0, 0.0], &[4.0, 0.0]], &[&[&[1.0, 1.0]], &[&[3.0, 2.0]]], None);
        assert_eq!(delta(&c).unwrap(), 1.0);
        let big = scenario(&[&[0.0, 0.0], &[40.0, 0.0]], &[&[&[10.0, 10.0]], &[&[30.0, 20.0]]], None);
        assert_eq!(delta(&big).unwrap(), 10.0);
    }

    #[test]
    fn desingularize_example() {
        let c = degenerate_example();
        let (shifted, offsets) = desingularize(&c).unwrap();
        assert_eq!(offsets, vec![vec![0.5], vec![1.0]]);
        assert!(shifted.waypoint(0, 0).distance(&p(&[1.5, 1.0])) < 1e-12);
        assert!(shifted.waypoint(1, 0).distance(&p(&[2.0, 5.0])) < 1e-12);
        let st = classify(&shifted).unwrap();
        assert_eq!(st.t, 2);
        assert_eq!(st.to_string(), "c=4;s=2;t=2;[o1][z1.1][z2.1][o2]");
        let sigma = classify(&c).unwrap().sigma;
        assert_eq!(st.sigma, desingularized_order(&sigma, 2, 1, 2));
    }

    #[test]
    fn desingularize_not_needed() {
        let c = scenario(&[&[0.0, 0.0], &[4.0, 0.0]], &[&[&[1.0, 1.0]], &[&[3.0, 2.0]]], None);
        assert_eq!(desingularize(&c).unwrap_err(), Error::NotNeeded);
    }

    #[test]
    fn mu_step_stops_short_of_obstacle_above() {
        // z2 sits exactly delta below o2; the uncapped shift would land on o2's projection
        let c = scenario(&[&[0.0, 0.0], &[4.0, 0.0]], &[&[&[3.0, 1.0]], &[&[3.0, 5.0]]], None);
        assert_eq!(delta(&c).unwrap(), 1.0);
        let step = mu_step(&c).unwrap();
        assert!((step - 2.0 / 3.0).abs() < 1e-15);
        let (shifted, _) = desingularize(&c).unwrap();
        assert_eq!(classify(&shifted).unwrap().t, 2);
    }

    #[test]
    fn core_single_robot_is_one_manoeuvre() {
        let c = scenario(&[&[0.0, 0.0], &[4.0, 0.0]], &[&[&[-1.0, 1.0]], &[&[5.0, 1.0]]], None);
        let bundle = core_section(&c).unwrap();
        let expected = SingleRobotScene::new(c.obstacles().to_vec(), p(&[-1.0, 1.0]), p(&[5.0, 1.0]), c.tol_abs())
            .unwrap()
            .avoidance_path()
            .unwrap();
        assert_eq!(bundle.robot_paths[0], expected.path);
        assert!(bundle.obstacle_paths.iter().all(PiecewisePath::is_constant));
        assert!(!bundle.desingularized);
    }

    #[test]
    fn core_robots_take_turns() {
        let c = scenario(
            &[&[0.0, 0.0], &[4.0, 0.0]],
            &[&[&[1.0, 1.0], &[2.0, 1.0]], &[&[3.0, 1.0], &[2.5, -1.0]]],
            None,
        );
        let bundle = core_section(&c).unwrap();
        let at = bundle.robots_at(0.5).unwrap();
        assert!(at[0].distance(&p(&[3.0, 1.0])) < 1e-12);
        assert!(at[1].distance(&p(&[2.0, 1.0])) < 1e-12);
        // robot 2 is frozen during the first half, robot 1 during the second
        for pc in bundle.robot_paths[1].pieces() {
            if pc.t_end <= 0.5 {
                assert!(pc.segment.is_constant());
            }
        }
        for pc in bundle.robot_paths[0].pieces() {
            if pc.t_start >= 0.5 {
                assert!(pc.segment.is_constant());
            }
        }
    }

    #[test]
    fn core_hits_interior_stage() {
        let c = scenario(
            &[&[0.0, 0.0], &[4.0, 0.0]],
            &[&[&[1.0, 1.0]], &[&[3.0, 1.0]], &[&[5.0, 2.0]]],
            Some(vec![0.0, 0.5, 1.0]),
        );
        let bundle = core_section(&c).unwrap();
        assert!(bundle.robot_paths[0].eval(0.5).unwrap().distance(&p(&[3.0, 1.0])) < 1e-12);
        assert!(bundle.robot_paths[0].eval(1.0).unwrap().distance(&p(&[5.0, 2.0])) < 1e-12);
    }

    #[test]
    fn core_rejects_degenerate_input() {
        assert_eq!(
            core_section(&degenerate_example()).unwrap_err(),
            Error::NotCore { t: 1, rn: 2 }
        );
    }

    #[test]
    fn plan_nondegenerate_matches_core() {
        let c = scenario(&[&[0.0, 0.0], &[4.0, 0.0]], &[&[&[1.0, 1.0]], &[&[3.0, 2.0]]], None);
        assert_eq!(plan(&c).unwrap(), core_section(&c).unwrap());
    }

    #[test]
    fn plan_degenerate_example_windows() {
        let c = degenerate_example();
        let bundle = plan(&c).unwrap();
        assert!(bundle.desingularized);
        assert_eq!(bundle.delta, Some(1.0));
        assert_eq!(bundle.stratum.to_string(), "c=3;s=2;t=1;[o1][z1.1,z2.1][o2]");
        let path = &bundle.robot_paths[0];
        let pieces = path.pieces();
        assert_eq!(pieces[0].segment, Segment::line(p(&[1.0, 1.0]), p(&[1.5, 1.0])).unwrap());
        assert_eq!((pieces[0].t_start, pieces[0].t_end), (0.0, 0.25));
        let last = pieces.last().unwrap();
        assert_eq!(last.segment, Segment::line(p(&[2.0, 5.0]), p(&[1.0, 5.0])).unwrap());
        assert_eq!((last.t_start, last.t_end), (0.75, 1.0));
        assert!(path.eval(0.25).unwrap().distance(&p(&[1.5, 1.0])) < 1e-12);
        assert!(path.eval(0.75).unwrap().distance(&p(&[2.0, 5.0])) < 1e-12);
        assert!(path.eval(0.0).unwrap().distance(&p(&[1.0, 1.0])) < 1e-12);
        assert!(path.eval(1.0).unwrap().distance(&p(&[1.0, 5.0])) < 1e-12);
    }

    #[test]
    fn plan_is_deterministic() {
        let c = degenerate_example();
        assert_eq!(plan(&c).unwrap(), plan(&c).unwrap());
    }
}
