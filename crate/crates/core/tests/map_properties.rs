mod common;

use common::{markov_map, tent, unit_rational};
use proptest::prelude::*;
use syncvar::map::DEFAULT_BRANCH_CAP;
use syncvar::markov::validate_markov;
use syncvar::rational::{int, ratio};
use syncvar::{Error, PiecewiseAffineMap, Rational, Side, SidedPoint};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn iterate_matches_branch(map in markov_map(), x in unit_rational(), k in 0usize..6) {
        let branches = map.branches_of_iterate(k, DEFAULT_BRANCH_CAP).unwrap();
        let br = branches.iter().find(|b| b.contains(&x)).unwrap();
        let mut p = SidedPoint::right(x.clone()).unwrap();
        for _ in 0..k {
            p = map.step(&p).0;
        }
        prop_assert_eq!(p.x(), &br.apply(&x));
        if branches.iter().all(|b| b.lo != x) {
            let mut y = x.clone();
            for _ in 0..k {
                y = map.eval_at(&y);
            }
            prop_assert_eq!(y, br.apply(&x));
        }
    }

    #[test]
    fn sides_agree_off_breakpoints(map in markov_map(), x in unit_rational()) {
        prop_assume!(!map.is_breakpoint(&x));
        let l = SidedPoint::new(x.clone(), Side::Left).unwrap();
        let r = SidedPoint::new(x, Side::Right).unwrap();
        prop_assert_eq!(map.eval(&l), map.eval(&r));
    }

    #[test]
    fn branch_count_is_word_count(map in markov_map(), k in 1usize..7) {
        let m = validate_markov(&map).unwrap();
        let branches = map.branches_of_iterate(k, DEFAULT_BRANCH_CAP).unwrap();
        prop_assert_eq!(num_bigint::BigInt::from(branches.len()), m.word_count(k));
        let prev = map.branches_of_iterate(k - 1, DEFAULT_BRANCH_CAP).unwrap();
        let crossings: usize = prev
            .iter()
            .map(|b| {
                let (u, v) = (b.image_lo(), b.image_hi());
                let (lo, hi) = if u < v { (u, v) } else { (v, u) };
                (0..map.atom_count())
                    .filter(|&j| {
                        let (a, c) = map.atom_bounds(j);
                        a < &hi && c > &lo
                    })
                    .count()
            })
            .sum();
        prop_assert_eq!(crossings, branches.len());
    }

    #[test]
    fn branches_tile_the_interval(map in markov_map(), k in 0usize..5) {
        let branches = map.branches_of_iterate(k, DEFAULT_BRANCH_CAP).unwrap();
        prop_assert_eq!(&branches[0].lo, &int(0));
        prop_assert_eq!(&branches[branches.len() - 1].hi, &int(1));
        for w in branches.windows(2) {
            prop_assert_eq!(&w[0].hi, &w[1].lo);
        }
    }

    #[test]
    fn reruns_are_identical(map in markov_map(), k in 0usize..5) {
        let a = map.branches_of_iterate(k, DEFAULT_BRANCH_CAP).unwrap();
        let b = map.branches_of_iterate(k, DEFAULT_BRANCH_CAP).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn perturbed_image_is_not_markov(
        map in markov_map(),
        atom in 0usize..4,
        end in 0usize..2,
        p in prop::sample::select(vec![101i64, 103, 107, -101, -103, -107]),
    ) {
        let atom = atom % map.atom_count();
        let mut images = map.images();
        let target = if end == 0 { &mut images[atom].0 } else { &mut images[atom].1 };
        *target += ratio(1, p);
        let res = PiecewiseAffineMap::new(map.breakpoints().to_vec(), images)
            .and_then(|m| validate_markov(&m));
        prop_assert!(res.is_err());
        if let Err(e) = res {
            let is_expected = matches!(e, Error::NotMarkov { .. } | Error::ImageOutOfRange { .. });
            prop_assert!(is_expected, "{:?}", e);
        }
    }
}

#[test]
fn tent_two_step_branches() {
    let b = tent().branches_of_iterate(2, DEFAULT_BRANCH_CAP).unwrap();
    let lows: Vec<Rational> = b.iter().map(|x| x.lo.clone()).collect();
    assert_eq!(lows, vec![int(0), ratio(1, 16), ratio(1, 4), ratio(13, 16)]);
}
