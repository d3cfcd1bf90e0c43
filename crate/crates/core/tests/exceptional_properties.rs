mod common;

use common::{gamma_value, markov_map};
use proptest::prelude::*;
use syncvar::exceptional::{
    exceptional_polynomial, formal_derivative_series, isolate_gamma_roots, ExceptionalAnalysis,
    WitnessKind, DEFAULT_WITNESS_DEPTH,
};
use syncvar::orbit::{detect_eventual_orbit, DEFAULT_CYCLE_CAP};
use syncvar::rational::{self, int};
use syncvar::sync::{eval_sync, sync_closed_value};
use syncvar::{Gamma, PiecewiseAffineMap, Rational, Side, SidedPoint};

fn closed(map: &PiecewiseAffineMap, g: &Rational, x: &Rational, side: Side) -> Rational {
    let p = SidedPoint::new(x.clone(), side).unwrap();
    sync_closed_value(g, &detect_eventual_orbit(map, &p, DEFAULT_CYCLE_CAP).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn root_and_degree_bounds(map in markov_map()) {
        let n = map.atom_count();
        if let Ok(ex) = ExceptionalAnalysis::compute(&map, &int(0), DEFAULT_WITNESS_DEPTH) {
            prop_assert!(ex.roots.len() < 2 * n);
            for p in &ex.polynomials {
                let bound = match p.kind {
                    WitnessKind::SlopeMismatch => n,
                    WitnessKind::Discontinuity => 2 * n - 1,
                };
                prop_assert!(p.degree() <= bound);
            }
        }
    }

    #[test]
    fn witness_jump_is_scaled_singular_jump(map in markov_map(), g in gamma_value()) {
        let Ok(ex) = ExceptionalAnalysis::compute(&map, &int(0), DEFAULT_WITNESS_DEPTH) else {
            return Ok(());
        };
        for w in &ex.witnesses {
            let at_z = rational::abs_diff(
                &closed(&map, &g, &w.z, Side::Left),
                &closed(&map, &g, &w.z, Side::Right),
            );
            let at_a = rational::abs_diff(
                &closed(&map, &g, &w.singular, Side::Left),
                &closed(&map, &g, &w.singular, Side::Right),
            );
            prop_assert_eq!(at_z, rational::pow(&g, w.n) * at_a);
        }
    }

    #[test]
    fn slope_series_differ_off_roots(map in markov_map(), g in gamma_value()) {
        let Ok(ex) = ExceptionalAnalysis::compute(&map, &int(0), DEFAULT_WITNESS_DEPTH) else {
            return Ok(());
        };
        for w in ex.witnesses.iter().filter(|w| w.kind == WitnessKind::SlopeMismatch) {
            let poly = exceptional_polynomial(&map, w).unwrap();
            let l = formal_derivative_series(&map, w, Side::Left).unwrap().eval(&g);
            let r = formal_derivative_series(&map, w, Side::Right).unwrap().eval(&g);
            if let (Some(l), Some(r)) = (l, r) {
                prop_assert_eq!(l == r, poly.coefficients.eval(&g) == int(0));
            }
        }
    }

    #[test]
    fn jump_vanishes_at_discontinuity_roots(map in markov_map()) {
        let Ok(ex) = ExceptionalAnalysis::compute(&map, &int(0), DEFAULT_WITNESS_DEPTH) else {
            return Ok(());
        };
        let tol = 1e-10;
        for w in ex.witnesses.iter().filter(|w| w.kind == WitnessKind::Discontinuity) {
            let poly = exceptional_polynomial(&map, w).unwrap();
            for r in isolate_gamma_roots(&poly, &int(0), &int(1)) {
                let mid = (&r.lo + &r.hi) / int(2);
                let gamma = Gamma::new(mid).unwrap();
                let l = eval_sync(&map, &gamma, &SidedPoint::left(w.z.clone()).unwrap(), tol).unwrap();
                let rr = eval_sync(&map, &gamma, &SidedPoint::right(w.z.clone()).unwrap(), tol).unwrap();
                prop_assert!((l.value - rr.value).abs() <= 10.0 * tol, "{} {}", l.value, rr.value);
            }
        }
    }
}
