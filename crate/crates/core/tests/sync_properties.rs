mod common;

use common::{gamma_value, markov_map, tent};
use proptest::prelude::*;
use syncvar::orbit::{detect_eventual_orbit, DEFAULT_CYCLE_CAP};
use syncvar::rational::{self, ratio};
use syncvar::sync::{
    eval_sync, functional_equation_defect, sync_closed_value, sync_partial_sum,
};
use syncvar::{Gamma, PiecewiseAffineMap, Rational, Side, SidedPoint};

/// Rationals whose denominator is a multiple of the atom count have finite orbits under the
/// integer-slope maps of `markov_map`.
fn periodic_point(map: &PiecewiseAffineMap, num: i64, den: i64, right: bool) -> SidedPoint {
    let n = map.atom_count() as i64;
    let x = ratio(num % (den * n), den * n);
    let side = if right { Side::Right } else { Side::Left };
    SidedPoint::new(x.clone(), side).or_else(|_| SidedPoint::default_at(x)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn functional_equation_exact(
        map in markov_map(), g in gamma_value(), num in 0i64..1000, den in 1i64..40, right: bool,
    ) {
        let p = periodic_point(&map, num, den, right);
        let gamma = Gamma::new(g).unwrap();
        let defect = functional_equation_defect(&map, &gamma, &p, DEFAULT_CYCLE_CAP).unwrap();
        prop_assert_eq!(defect, Rational::from_integer(0.into()));
    }

    #[test]
    fn series_brackets_closed_form(
        map in markov_map(), g in gamma_value(), num in 0i64..1000, den in 1i64..40, right: bool,
    ) {
        let p = periodic_point(&map, num, den, right);
        let gamma = Gamma::new(g.clone()).unwrap();
        let exact = sync_closed_value(&g, &detect_eventual_orbit(&map, &p, DEFAULT_CYCLE_CAP).unwrap());
        let s = eval_sync(&map, &gamma, &p, 1e-9).unwrap();
        let e = rational::to_f64(&exact);
        prop_assert!(s.value <= e && e <= s.value + s.error_bound, "{} {} {}", s.value, e, s.error_bound);
        // tail below tol, plus the summation rounding allowance
        prop_assert!(s.error_bound <= 1e-9, "{}", s.error_bound);
        let cap = 1.0 / (1.0 - gamma.to_f64());
        prop_assert!(e >= 0.0 && e <= cap * (1.0 + 1e-15));
    }

    #[test]
    fn partial_sums_nondecreasing(g in gamma_value(), x in common::unit_rational()) {
        let t = tent();
        let gamma = Gamma::new(g).unwrap();
        let p = SidedPoint::default_at(x).unwrap();
        let sums: Vec<Rational> = (0..12).map(|n| sync_partial_sum(&t, &gamma, &p, n)).collect();
        prop_assert!(sums.windows(2).all(|w| w[0] <= w[1]));
    }
}
