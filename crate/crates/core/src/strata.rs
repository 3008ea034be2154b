//! Classification of configurations into the disjoint pieces of the
//! stratification: by number of distinct projections onto the base line
//! (`c`), by how many of those carry obstacles (`s`), and finally by the
//! full induced quasi-order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Width of the refusal band above the equality tolerance.
pub const REFUSAL_FACTOR: f64 = 10.0;

/// One of the `m + rn` formal symbols. Indices are zero-based; the text
/// form is one-based (`o1`, `z2.3` = stage 2, robot 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SymbolId {
    Obstacle(usize),
    Robot { stage: usize, index: usize },
}

impl SymbolId {
    pub fn is_obstacle(&self) -> bool {
        matches!(self, SymbolId::Obstacle(_))
    }

    /// Desingularization key `(l - 1) n + i` (one-based) for robot symbols.
    pub fn robot_key(&self, n: usize) -> Option<usize> {
        match *self {
            SymbolId::Robot { stage, index } => Some(stage * n + index + 1),
            SymbolId::Obstacle(_) => None,
        }
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolId::Obstacle(i) => write!(f, "o{}", i + 1),
            SymbolId::Robot { stage, index } => write!(f, "z{}.{}", stage + 1, index + 1),
        }
    }
}

impl FromStr for SymbolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("bad symbol '{s}'"));
        let one_based = |t: &str| -> Result<usize> {
            let v: usize = t.parse().map_err(|_| bad())?;
            v.checked_sub(1).ok_or_else(bad)
        };
        if let Some(rest) = s.strip_prefix('o') {
            Ok(SymbolId::Obstacle(one_based(rest)?))
        } else if let Some(rest) = s.strip_prefix('z') {
            let (stage, index) = rest.split_once('.').ok_or_else(bad)?;
            Ok(SymbolId::Robot {
                stage: one_based(stage)?,
                index: one_based(index)?,
            })
        } else {
            Err(bad())
        }
    }
}

/// A linear quasi-order on the symbols, stored as its ordered list of
/// equivalence classes (lowest projection first). Symbols inside a class
/// are kept sorted, which makes the representation canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuasiOrder {
    classes: Vec<Vec<SymbolId>>,
}

impl QuasiOrder {
    pub fn new(mut classes: Vec<Vec<SymbolId>>) -> Result<Self> {
        if classes.iter().any(|c| c.is_empty()) {
            return Err(Error::InvalidInput("quasi-order has an empty class".into()));
        }
        for c in &mut classes {
            c.sort();
        }
        let mut all: Vec<SymbolId> = classes.iter().flatten().copied().collect();
        all.sort();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("quasi-order classes overlap".into()));
        }
        Ok(QuasiOrder { classes })
    }

    pub fn classes(&self) -> &[Vec<SymbolId>] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Class index of `sym`, if present.
    pub fn rank(&self, sym: SymbolId) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&sym))
    }

    /// Number of classes containing at least one obstacle.
    pub fn obstacle_classes(&self) -> usize {
        self.classes
            .iter()
            .filter(|c| c.iter().any(SymbolId::is_obstacle))
            .count()
    }

    /// True when every class of `self` lies inside a class of `coarser`
    /// and the class order is compatible.
    pub fn refines(&self, coarser: &QuasiOrder) -> bool {
        let mut last = 0;
        for class in &self.classes {
            let Some(r) = coarser.rank(class[0]) else {
                return false;
            };
            if r < last || class.iter().any(|s| coarser.rank(*s) != Some(r)) {
                return false;
            }
            last = r;
        }
        true
    }
}

impl fmt::Display for QuasiOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for class in &self.classes {
            f.write_str("[")?;
            for (k, s) in class.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{s}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

/// Identifies the piece `W_c ⊃ G_{s,t} ⊃ A^σ_{s,t}` containing a
/// configuration. Serializes as its canonical string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct StratumDescriptor {
    pub c: usize,
    pub s: usize,
    pub t: usize,
    pub sigma: QuasiOrder,
}

impl StratumDescriptor {
    pub fn from_order(sigma: QuasiOrder) -> Self {
        let c = sigma.len();
        let s = sigma.obstacle_classes();
        StratumDescriptor {
            c,
            s,
            t: c - s,
            sigma,
        }
    }

    /// Checks the descriptor invariants against the problem size.
    pub fn check(&self, m: usize, n: usize, r: usize) -> Result<()> {
        let rn = r * n;
        let ok = self.c == self.s + self.t
            && (2..=m).contains(&self.s)
            && self.t <= rn
            && (2..=rn + m).contains(&self.c)
            && self.sigma.len() == self.c
            && self.sigma.obstacle_classes() == self.s
            && self.sigma.classes().iter().map(Vec::len).sum::<usize>() == m + rn;
        if ok {
            Ok(())
        } else {
            Err(Error::InternalInvariantBroken(format!(
                "stratum {self} violates its invariants for m={m}, n={n}, r={r}"
            )))
        }
    }
}

impl fmt::Display for StratumDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c={};s={};t={};{}", self.c, self.s, self.t, self.sigma)
    }
}

impl FromStr for StratumDescriptor {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidInput(format!("bad stratum string '{text}': {why}"));
        let mut parts = text.splitn(4, ';');
        let mut field = |name: &str| -> Result<usize> {
            let part = parts.next().ok_or_else(|| bad("missing field"))?;
            let value = part
                .strip_prefix(name)
                .and_then(|p| p.strip_prefix('='))
                .ok_or_else(|| bad(name))?;
            value.parse().map_err(|_| bad(name))
        };
        let c = field("c")?;
        let s = field("s")?;
        let t = field("t")?;
        let order = parts.next().ok_or_else(|| bad("missing order"))?;
        let inner = order
            .strip_prefix('[')
            .and_then(|o| o.strip_suffix(']'))
            .ok_or_else(|| bad("order must be bracketed"))?;
        let classes = inner
            .split("][")
            .map(|class| class.split(',').map(str::parse).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let desc = StratumDescriptor::from_order(QuasiOrder::new(classes)?);
        if (desc.c, desc.s, desc.t) != (c, s, t) {
            return Err(bad("counts disagree with the order"));
        }
        Ok(desc)
    }
}

impl From<StratumDescriptor> for String {
    fn from(d: StratumDescriptor) -> String {
        d.to_string()
    }
}

impl TryFrom<String> for StratumDescriptor {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Groups labelled values into tolerance classes by single-link clustering
/// on the sorted list. A gap strictly inside `(tol, REFUSAL_FACTOR * tol)`
/// is refused as ambiguous.
pub(crate) fn group_values<T: Copy + Ord>(values: &[(T, f64)], tol: f64) -> Result<Vec<Vec<T>>> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let band = REFUSAL_FACTOR * tol;
    let mut classes: Vec<Vec<T>> = Vec::new();
    let mut prev: Option<f64> = None;
    for (label, v) in sorted {
        match prev {
            Some(p) if v - p <= tol => classes.last_mut().expect("open class").push(label),
            Some(p) if v - p < band => {
                return Err(Error::NumericallyDegenerate {
                    gap: v - p,
                    tol,
                    band,
                })
            }
            _ => classes.push(vec![label]),
        }
        prev = Some(v);
    }
    Ok(classes)
}

/// Symbol projections of a scenario onto its base line.
pub fn symbol_projections(config: &Scenario) -> Vec<(SymbolId, f64)> {
    let e = config.base_direction();
    let mut out: Vec<(SymbolId, f64)> = config
        .obstacle_projections(&e)
        .into_iter()
        .enumerate()
        .map(|(i, v)| (SymbolId::Obstacle(i), v))
        .collect();
    for (stage, row) in config.waypoint_projections(&e).into_iter().enumerate() {
        for (index, v) in row.into_iter().enumerate() {
            out.push((SymbolId::Robot { stage, index }, v));
        }
    }
    out
}

/// Determines the unique stratum containing `config`.
pub fn classify(config: &Scenario) -> Result<StratumDescriptor> {
    let projections = symbol_projections(config);
    let classes = group_values(&projections, config.tol_abs())?;
    let desc = StratumDescriptor::from_order(QuasiOrder::new(classes)?);
    desc.check(config.m(), config.n(), config.r())?;
    Ok(desc)
}

/// Number of pieces `W_2, .., W_{rn+m}` in the partition, i.e. `rn + m - 1`.
pub fn stratum_piece_count(m: usize, n: usize, r: usize) -> Result<usize> {
    if m < 2 {
        return Err(Error::InvalidParameters("m ≥ 2 required".into()));
    }
    if n < 1 {
        return Err(Error::InvalidParameters("n ≥ 1 required".into()));
    }
    if r < 2 {
        return Err(Error::InvalidParameters("r ≥ 2 required".into()));
    }
    r.checked_mul(n)
        .and_then(|rn| rn.checked_add(m - 1))
        .ok_or_else(|| Error::InvalidParameters("problem size overflows".into()))
}

/// Sectional complexity realized by the partition: pieces minus one.
pub fn complexity(m: usize, n: usize, r: usize) -> Result<usize> {
    Ok(stratum_piece_count(m, n, r)? - 1)
}

/// The order reached after the desingularizing perturbation: strict
/// comparisons are kept, equivalent robots are split by their key, and a
/// robot tied with obstacles moves strictly above them. Obstacles that were
/// tied stay tied.
pub fn desingularized_order(sigma: &QuasiOrder, _m: usize, n: usize, _r: usize) -> QuasiOrder {
    let mut classes = Vec::new();
    for class in sigma.classes() {
        let obstacles: Vec<SymbolId> = class.iter().copied().filter(SymbolId::is_obstacle).collect();
        let mut robots: Vec<SymbolId> = class.iter().copied().filter(|s| !s.is_obstacle()).collect();
        robots.sort_by_key(|s| s.robot_key(n));
        if !obstacles.is_empty() {
            classes.push(obstacles);
        }
        classes.extend(robots.into_iter().map(|r| vec![r]));
    }
    QuasiOrder { classes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::scenario::DEFAULT_TOL_EQ;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec())
    }

    fn o(i: usize) -> SymbolId {
        SymbolId::Obstacle(i - 1)
    }

    fn z(stage: usize, index: usize) -> SymbolId {
        SymbolId::Robot {
            stage: stage - 1,
            index: index - 1,
        }
    }

    fn scenario(obs: &[&[f64]], stages: &[&[&[f64]]]) -> Scenario {
        Scenario::new(
            obs.iter().map(|c| p(c)).collect(),
            stages.iter().map(|s| s.iter().map(|c| p(c)).collect()).collect(),
            None,
            DEFAULT_TOL_EQ,
        )
        .unwrap()
    }

    #[test]
    fn classify_nondegenerate() {
        let c = scenario(&[&[0.0, 0.0], &[4.0, 0.0]], &[&[&[1.0, 1.0]], &[&[3.0, 2.0]]]);
        let d = classify(&c).unwrap();
        assert_eq!((d.c, d.s, d.t), (4, 2, 2));
        assert_eq!(
            d.sigma.classes(),
            &[vec![o(1)], vec![z(1, 1)], vec![z(2, 1)], vec![o(2)]]
        );
        assert_eq!(d.to_string(), "c=4;s=2;t=2;[o1][z1.1][z2.1][o2]");
    }

    #[test]
    fn classify_robot_robot_tie() {
        let c = scenario(&[&[0.0, 0.0], &[4.0, 0.0]], &[&[&[1.0, 1.0]], &[&[1.0, 5.0]]]);
        let d = classify(&c).unwrap();
        assert_eq!((d.c, d.s, d.t), (3, 2, 1));
        assert_eq!(d.sigma.classes(), &[vec![o(1)], vec![z(1, 1), z(2, 1)], vec![o(2)]]);
        assert_eq!(d.to_string(), "c=3;s=2;t=1;[o1][z1.1,z2.1][o2]");
    }

    #[test]
    fn classify_obstacle_obstacle_tie() {
        let c = scenario(
            &[&[0.0, 0.0], &[4.0, 0.0], &[0.0, 3.0]],
            &[&[&[1.0, 1.0]], &[&[3.0, 1.0]]],
        );
        let d = classify(&c).unwrap();
        assert_eq!((d.c, d.s, d.t), (4, 2, 2));
        assert_eq!(d.sigma.classes()[0], vec![o(1), o(3)]);
    }

    #[test]
    fn classify_refuses_gap_in_band() {
        // diameter is about 4.24, so the refusal band is roughly (4.2e-9, 4.2e-8)
        let c = scenario(
            &[&[0.0, 0.0], &[4.0, 0.0]],
            &[&[&[1.0, 1.0]], &[&[1.0 + 2e-8, 3.0]]],
        );
        assert!(matches!(classify(&c), Err(Error::NumericallyDegenerate { .. })));
    }

    #[test]
    fn canonical_string_round_trip() {
        for text in [
            "c=4;s=2;t=2;[o1][z1.1][z2.1][o2]",
            "c=3;s=2;t=1;[o1,z1.1][z2.1][o2]",
            "c=2;s=2;t=0;[o1,o3,z1.2][o2,z1.1,z2.1,z2.2]",
        ] {
            let d: StratumDescriptor = text.parse().unwrap();
            assert_eq!(d.to_string(), text);
        }
        assert!("c=3;s=2;t=2;[o1][z1.1][o2]".parse::<StratumDescriptor>().is_err());
        assert!("c=3;s=2;[o1][z1.1][o2]".parse::<StratumDescriptor>().is_err());
        assert!("c=2;s=2;t=0;[o1][o1]".parse::<StratumDescriptor>().is_err());
    }

    #[test]
    fn piece_counts() {
        assert_eq!(stratum_piece_count(2, 1, 2).unwrap(), 3);
        assert_eq!(complexity(2, 1, 2).unwrap(), 2);
        assert_eq!(stratum_piece_count(2, 1, 3).unwrap(), 4);
        assert_eq!(complexity(2, 1, 3).unwrap(), 3);
        assert_eq!(stratum_piece_count(3, 2, 2).unwrap(), 6);
        assert_eq!(complexity(3, 2, 2).unwrap(), 5);
        assert!(matches!(stratum_piece_count(1, 1, 2), Err(Error::InvalidParameters(_))));
        assert!(matches!(stratum_piece_count(2, 0, 2), Err(Error::InvalidParameters(_))));
        assert!(matches!(stratum_piece_count(2, 1, 1), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn desingularized_examples() {
        let sigma = QuasiOrder::new(vec![vec![o(1)], vec![z(1, 1), z(2, 1)], vec![o(2)]]).unwrap();
        let tau = desingularized_order(&sigma, 2, 1, 2);
        assert_eq!(tau.classes(), &[vec![o(1)], vec![z(1, 1)], vec![z(2, 1)], vec![o(2)]]);

        let sigma = QuasiOrder::new(vec![vec![o(1), z(1, 1)], vec![o(2)]]).unwrap();
        let tau = desingularized_order(&sigma, 2, 1, 1);
        assert_eq!(tau.classes(), &[vec![o(1)], vec![z(1, 1)], vec![o(2)]]);

        let sigma = QuasiOrder::new(vec![vec![o(1)], vec![z(2, 1)], vec![z(1, 1)], vec![o(2)]]).unwrap();
        assert_eq!(desingularized_order(&sigma, 2, 1, 2), sigma);
    }

    #[test]
    fn desingularized_key_order_across_stages() {
        // n = 2: key(z2.1) = 3 > key(z1.2) = 2
        let sigma = QuasiOrder::new(vec![
            vec![o(1), o(3), z(2, 1), z(1, 2)],
            vec![o(2)],
        ])
        .unwrap();
        let tau = desingularized_order(&sigma, 3, 2, 2);
        assert_eq!(
            tau.classes(),
            &[vec![o(1), o(3)], vec![z(1, 2)], vec![z(2, 1)], vec![o(2)]]
        );
        assert!(tau.refines(&sigma));
    }

    #[test]
    fn group_values_single_link() {
        let v = [(0usize, 0.0), (1, 1e-10), (2, 2e-10), (3, 1.0)];
        let g = group_values(&v, 1.5e-10).unwrap();
        assert_eq!(g, vec![vec![0, 1, 2], vec![3]]);
    }
}
