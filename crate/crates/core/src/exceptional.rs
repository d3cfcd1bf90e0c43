//! Exceptional values of gamma.
//!
//! Above `exp(-h_top)`, finite variation forces `phi` to be affine on every atom. A point
//! `z` inside an atom whose orbit first hits a singular breakpoint `a` (a slope kink or a
//! jump of `T`) after `n` steps obstructs this unless gamma solves an explicit polynomial
//! equation: equality of the one-sided derivatives of `phi` at `z` for a kink, or of
//! `phi(a-0)` and `phi(a+0)` for a jump. Each witness therefore rules out all but finitely
//! many gamma, and the candidates are the common roots of every witness polynomial.

use std::collections::HashSet;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{PiecewiseAffineMap, Side, SidedPoint};
use crate::orbit::{detect_eventual_orbit, EventualOrbit, DEFAULT_CYCLE_CAP};
use crate::poly::{isolate_roots, Poly, RootEnclosure};
use crate::rational::{self, Rational};

/// Default pullback depth for the witness search.
pub const DEFAULT_WITNESS_DEPTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    /// Jump of `T` at the singular point.
    Discontinuity,
    /// `T` continuous at the singular point but with different one-sided slopes.
    SlopeMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExceptionalWitness {
    pub kind: WitnessKind,
    /// Interior point of an atom (not a breakpoint).
    pub z: Rational,
    /// Smallest `n` with `T^n(z) = a`.
    pub n: usize,
    pub singular: Rational,
    /// Sided orbits of `a - 0` and `a + 0`.
    pub left_orbit: EventualOrbit,
    pub right_orbit: EventualOrbit,
}

impl Serialize for ExceptionalWitness {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExceptionalWitness", 7)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("z", &rational::to_string(&self.z))?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("singular_point", &rational::to_string(&self.singular))?;
        for (name, o) in [("left_orbit", &self.left_orbit), ("right_orbit", &self.right_orbit)] {
            st.serialize_field(name, &OrbitSummary::from(o))?;
        }
        st.end()
    }
}

#[derive(Serialize)]
struct OrbitSummary {
    preperiod: usize,
    period: usize,
    points: Vec<String>,
}

impl From<&EventualOrbit> for OrbitSummary {
    fn from(o: &EventualOrbit) -> Self {
        OrbitSummary {
            preperiod: o.preperiod(),
            period: o.period(),
            points: o.points().iter().map(|p| p.to_string()).collect(),
        }
    }
}

/// Rational function `num / den` of gamma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFunction {
    pub fn eval(&self, g: &Rational) -> Option<Rational> {
        let d = self.den.eval(g);
        (!d.is_zero()).then(|| self.num.eval(g) / d)
    }

    pub fn eval_f64(&self, g: f64) -> f64 {
        self.num.eval_f64(g) / self.den.eval_f64(g)
    }

    /// Numerator of `self - other`, with factors shared with the denominator and powers of
    /// gamma removed.
    fn difference_numerator(&self, other: &RationalFunction) -> Poly {
        let g = self.den.gcd(&other.den);
        let lcm = (&self.den * &other.den).div_rem(&g).0;
        let raw = &(&self.num * &other.den) - &(&other.num * &self.den);
        let (num, rem) = raw.div_rem(&g);
        debug_assert!(rem.is_zero());
        let common = num.gcd(&lcm);
        let num = if common.degree() > 0 {
            num.div_rem(&common).0
        } else {
            num
        };
        num.strip_x_power().0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaPolynomial {
    pub kind: WitnessKind,
    pub coefficients: Poly,
    pub degree_bound: usize,
}

impl GammaPolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.degree()
    }
}

/// Interior breakpoints where `T` jumps or kinks.
pub fn singular_points(map: &PiecewiseAffineMap) -> Vec<(Rational, WitnessKind)> {
    (1..map.atom_count())
        .filter_map(|b| {
            let a = &map.breakpoints()[b];
            if !map.is_continuous_at(b) {
                Some((a.clone(), WitnessKind::Discontinuity))
            } else if map.slope(b - 1) != map.slope(b) {
                Some((a.clone(), WitnessKind::SlopeMismatch))
            } else {
                None
            }
        })
        .collect()
}

/// Pulls each singular point back through the branch inverses, level by level, and keeps
/// the interior preimages found at the first level that has any.
pub fn find_witnesses(
    map: &PiecewiseAffineMap,
    depth_cap: usize,
) -> Result<Vec<ExceptionalWitness>> {
    let singular = singular_points(map);
    let singular_set: HashSet<&Rational> = singular.iter().map(|(a, _)| a).collect();
    let mut out = Vec::new();
    for (a, kind) in &singular {
        let mut frontier = vec![a.clone()];
        let mut visited: HashSet<Rational> = HashSet::from([a.clone()]);
        for n in 1..=depth_cap {
            let mut next = Vec::new();
            let mut found = Vec::new();
            for t in &frontier {
                for j in 0..map.atom_count() {
                    let y = (t - map.intercept(j)) / map.slope(j);
                    let (lo, hi) = map.atom_bounds(j);
                    if &y < lo || &y > hi {
                        continue;
                    }
                    if !map.is_breakpoint(&y) {
                        found.push(y);
                    } else if !singular_set.contains(&y) && visited.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            if !found.is_empty() {
                found.sort();
                found.dedup();
                let left_orbit = detect_eventual_orbit(
                    map,
                    &SidedPoint::left(a.clone())?,
                    DEFAULT_CYCLE_CAP,
                )?;
                let right_orbit = detect_eventual_orbit(
                    map,
                    &SidedPoint::right(a.clone())?,
                    DEFAULT_CYCLE_CAP,
                )?;
                for z in found {
                    out.push(ExceptionalWitness {
                        kind: *kind,
                        z,
                        n,
                        singular: a.clone(),
                        left_orbit: left_orbit.clone(),
                        right_orbit: right_orbit.clone(),
                    });
                }
                break;
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
    }
    if out.is_empty() {
        return Err(Error::NoWitnessWithinCap {
            cap: depth_cap,
            suggested: (depth_cap * 2).max(1),
        });
    }
    out.sort_by(|x, y| {
        (x.kind, &x.singular, x.n, &x.z).cmp(&(y.kind, &y.singular, y.n, &y.z))
    });
    Ok(out)
}

/// `sum_k gamma^k (T^{k+1})'(z +- 0)` as an exact rational function of gamma.
///
/// With slopes `t_j` along the sided orbit of `z` (preperiod `q`, period `p`) and partial
/// products `P_k = t_0 ... t_k`, the series is
/// `sum_{k<q} g^k P_k + (sum_{r<p} g^{q+r} P_{q+r}) / (1 - Lambda g^p)`, where `Lambda` is
/// the product of slopes over one period.
pub fn formal_derivative_series(
    map: &PiecewiseAffineMap,
    witness: &ExceptionalWitness,
    side: Side,
) -> Result<RationalFunction> {
    let start = SidedPoint::new(witness.z.clone(), side)?;
    let orbit = detect_eventual_orbit(map, &start, DEFAULT_CYCLE_CAP)?;
    Ok(derivative_series_of_orbit(map, &orbit))
}

fn derivative_series_of_orbit(map: &PiecewiseAffineMap, orbit: &EventualOrbit) -> RationalFunction {
    let q = orbit.preperiod();
    let p = orbit.period();
    let mut prod = Rational::one();
    let mut products = Vec::with_capacity(q + p);
    for k in 0..q + p {
        prod *= map.slope(orbit.atom(k));
        products.push(prod.clone());
    }
    let lambda: Rational = (q..q + p).map(|k| map.slope(orbit.atom(k))).product();
    let den = &Poly::constant(Rational::one()) - &Poly::monomial(lambda, p);
    let head = Poly::new(products[..q].to_vec());
    let mut tail = vec![Rational::zero(); q + p];
    tail[q..].clone_from_slice(&products[q..]);
    let num = &(&head * &den) + &Poly::new(tail);
    RationalFunction { num, den }
}

/// `phi(start)` as a rational function of gamma, from the start's eventually periodic orbit.
pub fn closed_form_in_gamma(orbit: &EventualOrbit) -> RationalFunction {
    let m = orbit.preperiod().max(1);
    let p = orbit.period();
    let head = Poly::new((1..m).map(|j| orbit.value(j).clone()).collect());
    let mut cyc = vec![Rational::zero(); m - 1 + p];
    for r in 0..p {
        cyc[m - 1 + r] = orbit.value(m + r).clone();
    }
    let den = &Poly::constant(Rational::one()) - &Poly::monomial(Rational::one(), p);
    RationalFunction {
        num: &(&head * &den) + &Poly::new(cyc),
        den,
    }
}

/// The polynomial whose roots are the only gamma for which the witness fails to obstruct
/// affinity.
pub fn exceptional_polynomial(
    map: &PiecewiseAffineMap,
    witness: &ExceptionalWitness,
) -> Result<GammaPolynomial> {
    let n_atoms = map.atom_count();
    let (lhs, rhs, bound) = match witness.kind {
        WitnessKind::SlopeMismatch => (
            formal_derivative_series(map, witness, Side::Left)?,
            formal_derivative_series(map, witness, Side::Right)?,
            n_atoms,
        ),
        WitnessKind::Discontinuity => (
            closed_form_in_gamma(&witness.left_orbit),
            closed_form_in_gamma(&witness.right_orbit),
            2 * n_atoms - 1,
        ),
    };
    let poly = lhs.difference_numerator(&rhs);
    let detail = || {
        format!(
            "witness z = {}, n = {}, singular point {}",
            rational::to_string(&witness.z),
            witness.n,
            rational::to_string(&witness.singular)
        )
    };
    if poly.is_zero() {
        return Err(Error::DegeneratePolynomial(detail()));
    }
    if poly.degree() > bound {
        return Err(Error::DegreeBoundExceeded {
            degree: poly.degree(),
            bound,
            detail: detail(),
        });
    }
    Ok(GammaPolynomial {
        kind: witness.kind,
        coefficients: poly,
        degree_bound: bound,
    })
}

/// Default enclosure width for isolated roots.
pub fn default_root_width() -> Rational {
    Rational::new(1.into(), 1_000_000_000_000i64.into())
}

/// Real roots of the polynomial in the open window, each enclosed to `width`.
pub fn isolate_gamma_roots(
    poly: &GammaPolynomial,
    lo: &Rational,
    hi: &Rational,
) -> Vec<RootEnclosure> {
    isolate_roots(&poly.coefficients, lo, hi, &default_root_width())
}

/// Witnesses, their polynomials and the common roots in a gamma window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceptionalAnalysis {
    pub witnesses: Vec<ExceptionalWitness>,
    pub polynomials: Vec<GammaPolynomial>,
    /// Monic gcd of all witness polynomials.
    pub common: Poly,
    #[serde(serialize_with = "window_strings")]
    pub window: (Rational, Rational),
    /// Candidates: roots of `common` inside the window.
    pub roots: Vec<RootEnclosure>,
}

fn window_strings<S: serde::Serializer>(
    w: &(Rational, Rational),
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    [rational::to_string(&w.0), rational::to_string(&w.1)].serialize(s)
}

impl ExceptionalAnalysis {
    pub fn compute(
        map: &PiecewiseAffineMap,
        window_lo: &Rational,
        depth_cap: usize,
    ) -> Result<Self> {
        let witnesses = find_witnesses(map, depth_cap)?;
        let polynomials = witnesses
            .iter()
            .map(|w| exceptional_polynomial(map, w))
            .collect::<Result<Vec<_>>>()?;
        let common = polynomials
            .iter()
            .skip(1)
            .fold(polynomials[0].coefficients.monic(), |acc, p| {
                acc.gcd(&p.coefficients)
            });
        let hi = Rational::one();
        let roots = isolate_roots(&common, window_lo, &hi, &default_root_width());
        let bound = 2 * map.atom_count() - 1;
        if roots.len() > bound {
            return Err(Error::DegreeBoundExceeded {
                degree: roots.len(),
                bound,
                detail: "more exceptional roots than allowed".into(),
            });
        }
        Ok(ExceptionalAnalysis {
            witnesses,
            polynomials,
            common,
            window: (window_lo.clone(), hi),
            roots,
        })
    }

    /// Whether gamma is a common root or lies in a root enclosure.
    pub fn is_candidate(&self, gamma: &Rational) -> bool {
        let in_window = gamma > &self.window.0 && gamma < &self.window.1;
        in_window && (self.roots.iter().any(|r| r.contains(gamma)) || self.common.eval(gamma).is_zero())
    }
}
