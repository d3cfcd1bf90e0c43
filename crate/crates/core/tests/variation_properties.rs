mod common;

use common::{gamma_value, grid_variations, markov_map};
use proptest::prelude::*;
use syncvar::markov::validate_markov;
use syncvar::rational::{self, int, ratio};
use syncvar::variation::{
    iterate_variations, reduced_variation, variation_of_iterate, variation_upper_bound,
    Subdivision,
};
use syncvar::map::DEFAULT_BRANCH_CAP;
use syncvar::{Gamma, Rational};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn both_routes_agree_and_respect_lap_bound(map in markov_map()) {
        let m = validate_markov(&map).unwrap();
        let fast = iterate_variations(&map, &m, 5).unwrap();
        for k in 1..=5 {
            let v = variation_of_iterate(&map, k, DEFAULT_BRANCH_CAP).unwrap();
            let branches = map.branches_of_iterate(k, DEFAULT_BRANCH_CAP).unwrap();
            prop_assert_eq!(&v, &fast[k - 1], "k = {}", k);
            prop_assert!(v <= int(2 * branches.len() as i64));
            if map.is_continuous() {
                let laps: Rational = branches.iter().map(|b| b.image_len()).sum();
                prop_assert_eq!(v, laps);
            }
        }
    }

    #[test]
    fn grid_never_exceeds_exact(map in markov_map()) {
        let grid = grid_variations(&map, 2003, 4);
        for (k, g) in grid.iter().enumerate() {
            let v = rational::to_f64(&variation_of_iterate(&map, k + 1, DEFAULT_BRANCH_CAP).unwrap());
            prop_assert!(*g <= v + 1e-9, "k = {}: grid {} exact {}", k + 1, g, v);
        }
    }

    #[test]
    fn lower_bounds_monotone_and_below_upper(map in markov_map(), g in gamma_value()) {
        let m = validate_markov(&map).unwrap();
        let gamma = Gamma::new(g).unwrap();
        let lows = Subdivision::new(&map, 5).unwrap().lower_bounds(&gamma);
        prop_assert!(lows.windows(2).all(|w| w[0] <= w[1]));
        if let Some(up) = variation_upper_bound(&map, &m, &gamma, 200).unwrap().value() {
            let last = rational::to_f64(lows.last().unwrap());
            prop_assert!(last <= up, "{} > {}", last, up);
        }
    }

    #[test]
    fn reduced_variation_ignores_affine_part(
        ys in prop::collection::vec(-50i64..50, 2..12), a in -20i64..20, b in -20i64..20,
    ) {
        let xs: Vec<Rational> = (0..ys.len()).map(|i| ratio(i as i64 * i as i64 + i as i64, 7)).collect();
        let f: Vec<(Rational, Rational)> = xs.iter().cloned().zip(ys.iter().map(|&y| int(y))).collect();
        let shifted: Vec<(Rational, Rational)> = f
            .iter()
            .map(|(x, y)| (x.clone(), y + int(a) * x + int(b)))
            .collect();
        let rv = reduced_variation(&f).unwrap();
        prop_assert_eq!(&rv, &reduced_variation(&shifted).unwrap());
        let plain: Rational = f.windows(2).map(|w| rational::abs_diff(&w[1].1, &w[0].1)).sum();
        prop_assert!(rv <= plain);
        let affine: Vec<(Rational, Rational)> = xs.iter().map(|x| (x.clone(), int(a) * x)).collect();
        prop_assert_eq!(reduced_variation(&affine).unwrap(), int(0));
    }
}
