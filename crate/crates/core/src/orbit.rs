//! Eventually periodic orbits of sided points.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::map::{PiecewiseAffineMap, Side, SidedPoint};
use crate::rational::Rational;

/// Default step budget for cycle detection.
pub const DEFAULT_CYCLE_CAP: usize = 10_000;

/// Orbit `x_0, x_1, ...` stored as a preperiodic part of length `preperiod` followed by one
/// period; `x_{preperiod + period}` coincides with `x_preperiod`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventualOrbit {
    preperiod: usize,
    period: usize,
    points: Vec<SidedPoint>,
    atoms: Vec<usize>,
}

impl EventualOrbit {
    pub fn preperiod(&self) -> usize {
        self.preperiod
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn points(&self) -> &[SidedPoint] {
        &self.points
    }

    /// Atoms selected at each stored point (the itinerary).
    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }

    pub fn start(&self) -> &SidedPoint {
        &self.points[0]
    }

    /// Storage index of `T^k(x_0)`.
    pub fn index(&self, k: usize) -> usize {
        if k < self.preperiod {
            k
        } else {
            self.preperiod + (k - self.preperiod) % self.period
        }
    }

    pub fn point(&self, k: usize) -> &SidedPoint {
        &self.points[self.index(k)]
    }

    pub fn value(&self, k: usize) -> &Rational {
        self.point(k).x()
    }

    pub fn atom(&self, k: usize) -> usize {
        self.atoms[self.index(k)]
    }

    /// The periodic part `x_q, ..., x_{q+p-1}`.
    pub fn cycle(&self) -> &[SidedPoint] {
        &self.points[self.preperiod..]
    }
}

/// Identity of a sided point for cycle detection: the side only matters at breakpoints,
/// since elsewhere both one-sided orbits follow the same branches forever after.
pub(crate) fn canonical_key(map: &PiecewiseAffineMap, p: &SidedPoint) -> (Rational, Option<Side>) {
    let side = map.is_breakpoint(p.x()).then_some(p.side());
    (p.x().clone(), side)
}

/// Detects the preperiod and period of a sided orbit by exact comparison of canonical forms.
pub fn detect_eventual_orbit(
    map: &PiecewiseAffineMap,
    start: &SidedPoint,
    cap: usize,
) -> Result<EventualOrbit> {
    if cap == 0 {
        return Err(Error::InvalidArgument("cycle cap must be at least 1".into()));
    }
    let mut seen: HashMap<(Rational, Option<Side>), usize> = HashMap::new();
    let mut points = Vec::new();
    let mut atoms = Vec::new();
    let mut cur = start.clone();
    for i in 0..=cap {
        let key = canonical_key(map, &cur);
        if let Some(&j) = seen.get(&key) {
            return Ok(EventualOrbit {
                preperiod: j,
                period: i - j,
                points,
                atoms,
            });
        }
        seen.insert(key, i);
        let (next, atom) = map.step(&cur);
        points.push(cur);
        atoms.push(atom);
        cur = next;
    }
    Err(Error::NoCycleWithinCap { cap })
}
