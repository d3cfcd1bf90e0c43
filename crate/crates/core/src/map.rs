//! Piecewise affine maps of the unit interval with exact rational data.
//!
//! A map is given by breakpoints `0 = c_0 < c_1 < ... < c_N = 1` and, on each open
//! atom `(c_{i-1}, c_i)`, an affine branch `T(x) = s_i x + b_i`. Values at breakpoints
//! are only meaningful as one-sided limits, which is what [`SidedPoint`] encodes.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Default cap on the iterate depth for branch enumeration.
pub const DEFAULT_BRANCH_CAP: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }
}

/// A point of `[0,1]` together with the side from which it is approached.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SidedPoint {
    x: Rational,
    side: Side,
}

impl SidedPoint {
    pub fn new(x: Rational, side: Side) -> Result<Self> {
        if x.is_negative() || x > Rational::one() {
            return Err(Error::PointOutOfRange(x));
        }
        if (side == Side::Right && x.is_one()) || (side == Side::Left && x.is_zero()) {
            return Err(Error::IllegalSide {
                x,
                side: side.label(),
            });
        }
        Ok(SidedPoint { x, side })
    }

    pub fn left(x: Rational) -> Result<Self> {
        Self::new(x, Side::Left)
    }

    pub fn right(x: Rational) -> Result<Self> {
        Self::new(x, Side::Right)
    }

    /// Right limit except at `x = 1`, where only the left limit exists.
    pub fn default_at(x: Rational) -> Result<Self> {
        if x.is_one() {
            Self::left(x)
        } else {
            Self::right(x)
        }
    }

    pub fn x(&self) -> &Rational {
        &self.x
    }

    pub fn side(&self) -> Side {
        self.side
    }
}

impl fmt::Display for SidedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.side {
            Side::Left => '-',
            Side::Right => '+',
        };
        write!(f, "{}{}0", rational::to_string(&self.x), sign)
    }
}

/// Affine piece `x -> slope * x + intercept` on the interval `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineBranch {
    pub lo: Rational,
    pub hi: Rational,
    pub slope: Rational,
    pub intercept: Rational,
}

impl AffineBranch {
    pub fn apply(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.intercept
    }

    /// Image of the left end (as a right limit).
    pub fn image_lo(&self) -> Rational {
        self.apply(&self.lo)
    }

    /// Image of the right end (as a left limit).
    pub fn image_hi(&self) -> Rational {
        self.apply(&self.hi)
    }

    pub fn image_len(&self) -> Rational {
        (self.image_hi() - self.image_lo()).abs()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x < &self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseAffineMap {
    breakpoints: Vec<Rational>,
    slopes: Vec<Rational>,
    intercepts: Vec<Rational>,
    expanding: bool,
}

impl PiecewiseAffineMap {
    /// Builds a map from its breakpoints and, per atom, the one-sided images of the
    /// atom's left and right endpoints.
    pub fn new(breakpoints: Vec<Rational>, images: Vec<(Rational, Rational)>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidBreakpoints(
                "need at least the two endpoints 0 and 1".into(),
            ));
        }
        if !breakpoints[0].is_zero() || !breakpoints[breakpoints.len() - 1].is_one() {
            return Err(Error::InvalidBreakpoints(
                "first breakpoint must be 0 and last must be 1".into(),
            ));
        }
        let n = breakpoints.len() - 1;
        for i in 0..n {
            match breakpoints[i].cmp(&breakpoints[i + 1]) {
                Ordering::Less => {}
                Ordering::Equal => return Err(Error::DegenerateAtom { atom: i + 1 }),
                Ordering::Greater => {
                    return Err(Error::InvalidBreakpoints(format!(
                        "breakpoints not increasing at index {}",
                        i + 1
                    )))
                }
            }
        }
        if images.len() != n {
            return Err(Error::AtomCountMismatch {
                expected: n,
                found: images.len(),
            });
        }
        let unit = Rational::zero()..=Rational::one();
        let mut slopes = Vec::with_capacity(n);
        let mut intercepts = Vec::with_capacity(n);
        for (i, (ya, yb)) in images.into_iter().enumerate() {
            for y in [&ya, &yb] {
                if !unit.contains(y) {
                    return Err(Error::ImageOutOfRange {
                        atom: i + 1,
                        value: y.clone(),
                    });
                }
            }
            if ya == yb {
                return Err(Error::ZeroSlope { atom: i + 1 });
            }
            let (a, b) = (&breakpoints[i], &breakpoints[i + 1]);
            let slope = (&yb - &ya) / (b - a);
            let intercept = &ya - &slope * a;
            slopes.push(slope);
            intercepts.push(intercept);
        }
        let expanding = slopes.iter().all(|s| s.abs() > Rational::one());
        Ok(PiecewiseAffineMap {
            breakpoints,
            slopes,
            intercepts,
            expanding,
        })
    }

    pub fn atom_count(&self) -> usize {
        self.slopes.len()
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[Rational] {
        &self.slopes
    }

    pub fn slope(&self, atom: usize) -> &Rational {
        &self.slopes[atom]
    }

    pub fn intercept(&self, atom: usize) -> &Rational {
        &self.intercepts[atom]
    }

    pub fn is_expanding(&self) -> bool {
        self.expanding
    }

    /// First atom (0-based) with `|slope| <= 1`.
    pub fn non_expanding_atom(&self) -> Option<usize> {
        self.slopes.iter().position(|s| s.abs() <= Rational::one())
    }

    pub fn atom_bounds(&self, atom: usize) -> (&Rational, &Rational) {
        (&self.breakpoints[atom], &self.breakpoints[atom + 1])
    }

    pub fn atom_length(&self, atom: usize) -> Rational {
        &self.breakpoints[atom + 1] - &self.breakpoints[atom]
    }

    /// One-sided images `(T(c_{i-1}+0), T(c_i-0))` of atom `i`'s endpoints.
    pub fn endpoint_images(&self, atom: usize) -> (Rational, Rational) {
        let (a, b) = self.atom_bounds(atom);
        (self.branch_value(atom, a), self.branch_value(atom, b))
    }

    pub fn branch_value(&self, atom: usize, x: &Rational) -> Rational {
        &self.slopes[atom] * x + &self.intercepts[atom]
    }

    /// Index `i` with `breakpoints[i] == x`, if any.
    pub fn breakpoint_index(&self, x: &Rational) -> Option<usize> {
        self.breakpoints.binary_search(x).ok()
    }

    pub fn is_breakpoint(&self, x: &Rational) -> bool {
        self.breakpoint_index(x).is_some()
    }

    /// Atom under the half-open convention `[c_{i-1}, c_i)`, with `1` in the last atom.
    pub fn atom_containing(&self, x: &Rational) -> usize {
        let below_or_eq = self.breakpoints.partition_point(|c| c <= x);
        below_or_eq.saturating_sub(1).min(self.atom_count() - 1)
    }

    /// Atom selected by the side of a sided point.
    pub fn atom_of(&self, p: &SidedPoint) -> usize {
        match p.side {
            Side::Right => self.atom_containing(&p.x),
            Side::Left => {
                let below = self.breakpoints.partition_point(|c| c < &p.x);
                below.saturating_sub(1).min(self.atom_count() - 1)
            }
        }
    }

    pub fn eval(&self, p: &SidedPoint) -> Rational {
        self.branch_value(self.atom_of(p), &p.x)
    }

    /// Evaluation of the half-open convention at a bare point.
    pub fn eval_at(&self, x: &Rational) -> Rational {
        self.branch_value(self.atom_containing(x), x)
    }

    /// Image of a sided point, with the side flipped by orientation-reversing branches.
    pub fn step(&self, p: &SidedPoint) -> (SidedPoint, usize) {
        let atom = self.atom_of(p);
        let y = self.branch_value(atom, &p.x);
        let side = if self.slopes[atom].is_positive() {
            p.side
        } else {
            p.side.flip()
        };
        (SidedPoint { x: y, side }, atom)
    }

    /// The orbit `p, T(p), ..., T^n(p)`; each entry carries the atom used from that point.
    pub fn iterate_point(&self, p: &SidedPoint, n: usize) -> Vec<(SidedPoint, usize)> {
        let mut out = Vec::with_capacity(n + 1);
        let mut cur = p.clone();
        for _ in 0..n {
            let (next, atom) = self.step(&cur);
            out.push((cur, atom));
            cur = next;
        }
        let atom = self.atom_of(&cur);
        out.push((cur, atom));
        out
    }

    /// Whether `T(c-0) == T(c+0)` at interior breakpoint index `bp`.
    pub fn is_continuous_at(&self, bp: usize) -> bool {
        debug_assert!(bp > 0 && bp < self.breakpoints.len() - 1);
        let c = &self.breakpoints[bp];
        self.branch_value(bp - 1, c) == self.branch_value(bp, c)
    }

    pub fn is_continuous(&self) -> bool {
        (1..self.atom_count()).all(|bp| self.is_continuous_at(bp))
    }

    /// Ordered branch decomposition of `T^k` obtained by pulling back atom boundaries.
    pub fn branches_of_iterate(&self, k: usize, cap: usize) -> Result<Vec<AffineBranch>> {
        if k > cap {
            return Err(Error::DepthCapExceeded { requested: k, cap });
        }
        let mut branches: Vec<AffineBranch> = vec![AffineBranch {
            lo: Rational::zero(),
            hi: Rational::one(),
            slope: Rational::one(),
            intercept: Rational::zero(),
        }];
        for _ in 0..k {
            branches = self.refine(&branches);
        }
        Ok(branches)
    }

    /// Composes each branch of `T^k` with `T`, splitting it where its image crosses breakpoints.
    pub(crate) fn refine(&self, branches: &[AffineBranch]) -> Vec<AffineBranch> {
        let mut out = Vec::with_capacity(branches.len() * 2);
        let mut pieces = Vec::new();
        for br in branches {
            let (u, v) = (br.image_lo(), br.image_hi());
            let (ymin, ymax) = if u < v { (u, v) } else { (v, u) };
            let first = self.atom_containing(&ymin);
            pieces.clear();
            for j in first..self.atom_count() {
                let (ca, cb) = self.atom_bounds(j);
                if ca >= &ymax {
                    break;
                }
                let lo = if ca > &ymin { ca.clone() } else { ymin.clone() };
                let hi = if cb < &ymax { cb.clone() } else { ymax.clone() };
                if lo >= hi {
                    continue;
                }
                let x0 = (&lo - &br.intercept) / &br.slope;
                let x1 = (&hi - &br.intercept) / &br.slope;
                let (dlo, dhi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
                pieces.push(AffineBranch {
                    lo: dlo,
                    hi: dhi,
                    slope: &self.slopes[j] * &br.slope,
                    intercept: &self.slopes[j] * &br.intercept + &self.intercepts[j],
                });
            }
            if br.slope.is_negative() {
                pieces.reverse();
            }
            out.append(&mut pieces);
        }
        out
    }

    /// Rebuilds the per-atom endpoint images, e.g. for serialization.
    pub fn images(&self) -> Vec<(Rational, Rational)> {
        (0..self.atom_count())
            .map(|i| self.endpoint_images(i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    pub(crate) fn tent() -> PiecewiseAffineMap {
        PiecewiseAffineMap::new(
            vec![int(0), ratio(1, 4), int(1)],
            vec![(int(0), int(1)), (int(1), int(0))],
        )
        .unwrap()
    }

    fn doubling() -> PiecewiseAffineMap {
        PiecewiseAffineMap::new(
            vec![int(0), ratio(1, 2), int(1)],
            vec![(int(0), int(1)), (int(0), int(1))],
        )
        .unwrap()
    }

    #[test]
    fn tent_slopes() {
        let t = tent();
        assert_eq!(t.slopes(), &[int(4), ratio(-4, 3)]);
        assert!(t.is_expanding());
        assert!(t.is_continuous());
        assert_eq!(doubling().slopes(), &[int(2), int(2)]);
        assert!(!doubling().is_continuous());
    }

    #[test]
    fn construction_errors() {
        let bps = vec![int(0), ratio(1, 2), int(1)];
        let zero = PiecewiseAffineMap::new(bps.clone(), vec![(int(0), int(0)), (int(0), int(1))]);
        assert_eq!(zero, Err(Error::ZeroSlope { atom: 1 }));
        let out = PiecewiseAffineMap::new(bps.clone(), vec![(int(0), int(2)), (int(0), int(1))]);
        assert!(matches!(out, Err(Error::ImageOutOfRange { atom: 1, .. })));
        let degenerate = PiecewiseAffineMap::new(
            vec![int(0), ratio(1, 2), ratio(1, 2), int(1)],
            vec![(int(0), int(1)); 3],
        );
        assert_eq!(degenerate, Err(Error::DegenerateAtom { atom: 2 }));
        let not_unit = PiecewiseAffineMap::new(vec![ratio(1, 8), int(1)], vec![(int(0), int(1))]);
        assert!(matches!(not_unit, Err(Error::InvalidBreakpoints(_))));
        let count = PiecewiseAffineMap::new(bps, vec![(int(0), int(1))]);
        assert!(matches!(count, Err(Error::AtomCountMismatch { .. })));
    }

    #[test]
    fn sided_point_rules() {
        assert!(SidedPoint::right(int(1)).is_err());
        assert!(SidedPoint::left(int(0)).is_err());
        assert!(SidedPoint::right(ratio(3, 2)).is_err());
        assert!(SidedPoint::left(int(1)).is_ok());
    }

    #[test]
    fn one_sided_evaluation() {
        let t = tent();
        let q = ratio(1, 4);
        assert_eq!(t.eval(&SidedPoint::left(q.clone()).unwrap()), int(1));
        assert_eq!(t.eval(&SidedPoint::right(q).unwrap()), int(1));
        assert_eq!(t.eval(&SidedPoint::left(int(1)).unwrap()), int(0));
        let d = doubling();
        let h = ratio(1, 2);
        assert_eq!(d.eval(&SidedPoint::left(h.clone()).unwrap()), int(1));
        assert_eq!(d.eval(&SidedPoint::right(h).unwrap()), int(0));
        let x = ratio(3, 10);
        assert_eq!(
            t.eval(&SidedPoint::left(x.clone()).unwrap()),
            t.eval(&SidedPoint::right(x.clone()).unwrap())
        );
        assert_eq!(t.eval_at(&x), ratio(14, 15));
    }

    #[test]
    fn side_propagation_through_kink() {
        let t = tent();
        let orbit = t.iterate_point(&SidedPoint::left(ratio(1, 4)).unwrap(), 3);
        let got: Vec<(Rational, Side)> = orbit.iter().map(|(p, _)| (p.x.clone(), p.side)).collect();
        assert_eq!(
            got,
            vec![
                (ratio(1, 4), Side::Left),
                (int(1), Side::Left),
                (int(0), Side::Right),
                (int(0), Side::Right),
            ]
        );
        let atoms: Vec<usize> = orbit.iter().map(|(_, a)| *a).collect();
        assert_eq!(atoms, vec![0, 1, 0, 0]);
        let p = SidedPoint::right(ratio(4, 7)).unwrap();
        assert_eq!(t.iterate_point(&p, 0), vec![(p.clone(), 1)]);
        assert!(t.iterate_point(&p, 5).iter().all(|(q, _)| q.x == ratio(4, 7)));
    }

    #[test]
    fn branch_counts() {
        let t = tent();
        assert_eq!(t.branches_of_iterate(1, 25).unwrap().len(), 2);
        assert_eq!(t.branches_of_iterate(2, 25).unwrap().len(), 4);
        let three = PiecewiseAffineMap::new(
            vec![int(0), ratio(1, 3), ratio(2, 3), int(1)],
            vec![(int(0), int(1)); 3],
        )
        .unwrap();
        assert_eq!(three.branches_of_iterate(3, 25).unwrap().len(), 27);
        assert_eq!(
            t.branches_of_iterate(26, 25),
            Err(Error::DepthCapExceeded {
                requested: 26,
                cap: 25
            })
        );
    }

    #[test]
    fn first_iterate_is_the_map() {
        let t = tent();
        let b = t.branches_of_iterate(1, 25).unwrap();
        assert_eq!(b[0].slope, int(4));
        assert_eq!(b[1].slope, ratio(-4, 3));
        assert_eq!((b[1].lo.clone(), b[1].hi.clone()), (ratio(1, 4), int(1)));
    }

    #[test]
    fn branches_are_ordered_and_tile() {
        let t = tent();
        let b = t.branches_of_iterate(4, 25).unwrap();
        assert!(b[0].lo.is_zero());
        assert!(b.last().unwrap().hi.is_one());
        for w in b.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
        }
    }
}
