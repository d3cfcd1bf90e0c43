//! The sync function `phi(x) = sum_{k>=0} gamma^k T^{k+1}(x)`.
//!
//! Series evaluation follows the exact orbit and sums in `f64` with a tail bound plus a
//! rounding allowance, returning a certified lower bound `value` with
//! `value <= phi <= value + error_bound`. Eventually periodic points have exact closed forms.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{PiecewiseAffineMap, SidedPoint};
use crate::orbit::{detect_eventual_orbit, EventualOrbit};
use crate::rational::{self, Rational};

/// Contraction rate of the filter, strictly inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gamma(Rational);

impl Gamma {
    pub fn new(value: Rational) -> Result<Self> {
        if !value.is_positive() || value >= Rational::one() {
            return Err(Error::GammaOutOfRange(value));
        }
        Ok(Gamma(value))
    }

    /// Accepts `p/q`, integers or decimals, all parsed exactly.
    pub fn parse(s: &str) -> Result<Self> {
        Gamma::new(rational::parse_rational_or_decimal(s)?)
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        rational::to_f64(&self.0)
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&rational::to_string(&self.0))
    }
}

impl Serialize for Gamma {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncValue {
    pub value: f64,
    /// Zero for closed-form evaluations.
    pub error_bound: f64,
    /// The exact value, when it was obtained in closed form.
    #[serde(skip)]
    pub exact: Option<Rational>,
}

impl SyncValue {
    fn exact(r: Rational) -> Self {
        SyncValue {
            value: rational::to_f64(&r),
            error_bound: 0.0,
            exact: Some(r),
        }
    }
}

/// Compensated (Neumaier) `f64` sum with a bound on its accumulated rounding error.
struct Accumulator {
    sum: f64,
    comp: f64,
    abs_sum: f64,
    terms: usize,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            sum: 0.0,
            comp: 0.0,
            abs_sum: 0.0,
            terms: 0,
        }
    }

    fn add(&mut self, t: f64) {
        let s = self.sum + t;
        self.comp += if self.sum.abs() >= t.abs() {
            (self.sum - s) + t
        } else {
            (t - s) + self.sum
        };
        self.sum = s;
        self.abs_sum += t.abs();
        self.terms += 1;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Each term carries at most three roundings; the compensated sum adds `2 eps |sum|`
    /// and a second-order term.
    fn rounding(&self, extra_per_term: f64) -> f64 {
        let n = self.terms as f64 + 4.0;
        let eps = f64::EPSILON;
        1.01 * ((5.0 * eps + 4.0 * n * eps * eps) * self.abs_sum
            + self.terms as f64 * extra_per_term)
            + f64::MIN_POSITIVE
    }
}

fn round_up(x: f64) -> f64 {
    x * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE
}

/// Runs `f` on each of `T(p), T^2(p), ...` weighted by `gamma^k` until the geometric tail
/// `scale * gamma^n / (1 - gamma)` is at most `tol`; returns the number of terms and the tail.
fn sum_series(
    map: &PiecewiseAffineMap,
    gamma: &Gamma,
    p: &SidedPoint,
    tol: f64,
    scale: f64,
    mut f: impl FnMut(f64, &Rational),
) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 || !tol.is_finite() {
        return Err(Error::NonPositiveTolerance);
    }
    let g = gamma.value();
    let one_minus = Rational::one() - g;
    let threshold = rational::from_f64(tol / scale.max(f64::MIN_POSITIVE))? * &one_minus;
    let mut pow = Rational::one();
    let mut cur = p.clone();
    while pow > threshold {
        let (next, _) = map.step(&cur);
        f(rational::to_f64(&pow), next.x());
        cur = next;
        pow *= g;
    }
    Ok(round_up(scale * rational::to_f64(&(pow / one_minus))))
}

/// Truncated series with a certified error bound `<= tol`.
pub fn eval_sync(
    map: &PiecewiseAffineMap,
    gamma: &Gamma,
    p: &SidedPoint,
    tol: f64,
) -> Result<SyncValue> {
    let mut acc = Accumulator::new();
    // half of tol goes to the tail, the rest covers rounding
    let tail = sum_series(map, gamma, p, tol / 2.0, 1.0, |w, x| {
        acc.add(w * rational::to_f64(x))
    })?;
    let r = acc.rounding(0.0);
    Ok(SyncValue {
        value: (acc.value() - r).max(0.0),
        error_bound: tail + 2.0 * r,
        exact: None,
    })
}

/// Exact partial sum `sum_{k<n} gamma^k T^{k+1}(p)`.
pub fn sync_partial_sum(
    map: &PiecewiseAffineMap,
    gamma: &Gamma,
    p: &SidedPoint,
    n: usize,
) -> Rational {
    let mut acc = Rational::zero();
    let mut pow = Rational::one();
    let mut cur = p.clone();
    for _ in 0..n {
        let (next, _) = map.step(&cur);
        acc += &pow * next.x();
        pow *= gamma.value();
        cur = next;
    }
    acc
}

/// Exact value of `phi` at the start of an eventually periodic orbit.
///
/// With `m = max(q, 1)`, `phi = sum_{j=1}^{m-1} g^{j-1} x_j
/// + g^{m-1} (sum_{r<p} g^r x_{m+r}) / (1 - g^p)`.
pub fn sync_closed_value(gamma: &Rational, orbit: &EventualOrbit) -> Rational {
    let m = orbit.preperiod().max(1);
    let p = orbit.period();
    let mut head = Rational::zero();
    let mut pow = Rational::one();
    for j in 1..m {
        head += &pow * orbit.value(j);
        pow *= gamma;
    }
    let mut cyc = Rational::zero();
    let mut gp = Rational::one();
    for r in 0..p {
        cyc += &gp * orbit.value(m + r);
        gp *= gamma;
    }
    head + pow * cyc / (Rational::one() - gp)
}

pub fn eval_sync_closed(gamma: &Gamma, orbit: &EventualOrbit) -> SyncValue {
    SyncValue::exact(sync_closed_value(gamma.value(), orbit))
}

/// Detects the orbit of `p` and evaluates `phi` in closed form.
pub fn eval_sync_at_eventually_periodic(
    map: &PiecewiseAffineMap,
    gamma: &Gamma,
    p: &SidedPoint,
    cap: usize,
) -> Result<SyncValue> {
    let orbit = detect_eventual_orbit(map, p, cap)?;
    Ok(eval_sync_closed(gamma, &orbit))
}

/// `phi(x_1) = (x_2 + g x_3 + ... + g^{p-2} x_p + g^{p-1} x_1) / (1 - g^p)` for a cycle
/// labelled so that `x_{i+1} = T(x_i)`.
pub fn sync_at_periodic(
    map: &PiecewiseAffineMap,
    gamma: &Gamma,
    cycle: &[Rational],
) -> Result<SyncValue> {
    let p = cycle.len();
    if p == 0 {
        return Err(Error::InvalidArgument("empty cycle".into()));
    }
    for (i, x) in cycle.iter().enumerate() {
        if map.eval_at(x) != cycle[(i + 1) % p] {
            return Err(Error::CycleVerification { index: i });
        }
    }
    Ok(SyncValue::exact(periodic_value(gamma.value(), cycle)))
}

pub(crate) fn periodic_value(gamma: &Rational, cycle: &[Rational]) -> Rational {
    let p = cycle.len();
    let mut num = Rational::zero();
    let mut pow = Rational::one();
    for k in 0..p {
        num += &pow * &cycle[(k + 1) % p];
        pow *= gamma;
    }
    num / (Rational::one() - pow)
}

/// `phi(p) - T(p) - gamma * phi(T(p))` computed exactly from closed forms; zero for every
/// eventually periodic point.
pub fn functional_equation_defect(
    map: &PiecewiseAffineMap,
    gamma: &Gamma,
    p: &SidedPoint,
    cap: usize,
) -> Result<Rational> {
    let (tp, _) = map.step(p);
    let phi = sync_closed_value(gamma.value(), &detect_eventual_orbit(map, p, cap)?);
    let phi_t = sync_closed_value(gamma.value(), &detect_eventual_orbit(map, &tp, cap)?);
    Ok(phi - tp.x() - gamma.value() * phi_t)
}

/// `max |phi(x) - T(x) - gamma phi(T(x))|` over the samples, each `phi` evaluated to `tol`.
pub fn conjugacy_residual(
    map: &PiecewiseAffineMap,
    gamma: &Gamma,
    samples: &[SidedPoint],
    tol: f64,
) -> Result<f64> {
    let g = gamma.to_f64();
    let mut worst: f64 = 0.0;
    for p in samples {
        let (tp, _) = map.step(p);
        let phi = eval_sync(map, gamma, p, tol)?;
        let phi_t = eval_sync(map, gamma, &tp, tol)?;
        let r = (phi.value - rational::to_f64(tp.x()) - g * phi_t.value).abs();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Observation function `p` of a generalized filter `y -> p(x) + gamma y`.
pub trait Filter {
    fn eval(&self, x: f64) -> f64;
    /// An upper bound on `sup |p|` over `[0,1]`.
    fn sup_bound(&self) -> f64;
    /// Absolute error of one call to [`Filter::eval`].
    fn eval_error(&self) -> f64 {
        f64::EPSILON * self.sup_bound()
    }
}

/// `p(x) = x`, which recovers the plain sync function.
pub struct IdentityFilter;

impl Filter for IdentityFilter {
    fn eval(&self, x: f64) -> f64 {
        x
    }
    fn sup_bound(&self) -> f64 {
        1.0
    }
    fn eval_error(&self) -> f64 {
        0.0
    }
}

/// Closure-backed filter with a caller-supplied bound.
pub struct FnFilter<F> {
    f: F,
    bound: f64,
}

impl<F: Fn(f64) -> f64> FnFilter<F> {
    pub fn new(f: F, bound: f64) -> Self {
        FnFilter { f, bound }
    }
}

impl<F: Fn(f64) -> f64> Filter for FnFilter<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn sup_bound(&self) -> f64 {
        self.bound
    }
}

/// `sum_k gamma^k p(T^{k+1} x)` with `|value - exact| <= error_bound`.
pub fn eval_sync_filtered(
    map: &PiecewiseAffineMap,
    gamma: &Gamma,
    filter: &dyn Filter,
    p: &SidedPoint,
    tol: f64,
) -> Result<SyncValue> {
    let bound = filter.sup_bound();
    let mut acc = Accumulator::new();
    let tail = sum_series(map, gamma, p, tol / 2.0, bound.max(f64::MIN_POSITIVE), |w, x| {
        acc.add(w * filter.eval(rational::to_f64(x)))
    })?;
    let r = acc.rounding(filter.eval_error() + bound * f64::EPSILON);
    Ok(SyncValue {
        value: acc.value(),
        error_bound: tail + r,
        exact: None,
    })
}
