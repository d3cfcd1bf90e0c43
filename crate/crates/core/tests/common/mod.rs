#![allow(dead_code)]

use proptest::prelude::*;
use syncvar::rational::{int, ratio};
use syncvar::{PiecewiseAffineMap, Rational};

pub fn tent() -> PiecewiseAffineMap {
    PiecewiseAffineMap::new(
        vec![int(0), ratio(1, 4), int(1)],
        vec![(int(0), int(1)), (int(1), int(0))],
    )
    .unwrap()
}

pub fn doubling() -> PiecewiseAffineMap {
    PiecewiseAffineMap::new(
        vec![int(0), ratio(1, 2), int(1)],
        vec![(int(0), int(1)), (int(0), int(1))],
    )
    .unwrap()
}

/// Full branch on `[0, 2/3)`, second atom onto the first.
pub fn golden() -> PiecewiseAffineMap {
    PiecewiseAffineMap::new(
        vec![int(0), ratio(2, 3), int(1)],
        vec![(int(0), int(1)), (ratio(2, 3), int(0))],
    )
    .unwrap()
}

/// Markov maps on a uniform partition, each atom sent onto at least two atoms.
pub fn markov_map() -> impl Strategy<Value = PiecewiseAffineMap> {
    (2usize..=4).prop_flat_map(|n| {
        prop::collection::vec((0..=n, 0..=n, any::<bool>()), n).prop_filter_map(
            "image spans fewer than two atoms",
            move |choices| {
                let bps: Vec<Rational> = (0..=n).map(|i| ratio(i as i64, n as i64)).collect();
                let mut images = Vec::with_capacity(n);
                for (a, b, flip) in choices {
                    let (lo, hi) = (a.min(b), a.max(b));
                    if hi - lo < 2 {
                        return None;
                    }
                    let (u, v) = (bps[lo].clone(), bps[hi].clone());
                    images.push(if flip { (v, u) } else { (u, v) });
                }
                PiecewiseAffineMap::new(bps, images).ok()
            },
        )
    })
}

/// Rational in `[0, 1)` with a moderate denominator.
pub fn unit_rational() -> impl Strategy<Value = Rational> {
    (1i64..500).prop_flat_map(|d| (0..d).prop_map(move |n| ratio(n, d)))
}

/// Rational gamma in `(0, 1)`.
pub fn gamma_value() -> impl Strategy<Value = Rational> {
    (2i64..60).prop_flat_map(|d| (1..d).prop_map(move |n| ratio(n, d)))
}

type Q = num_rational::Ratio<i128>;

fn small(r: &Rational) -> Q {
    use num_traits::ToPrimitive;
    Q::new(r.numer().to_i128().unwrap(), r.denom().to_i128().unwrap())
}

/// Independent `i128` evaluator: each atom is `[b_i, b_{i+1})`, the last one closed.
pub struct SmallMap {
    bps: Vec<Q>,
    images: Vec<(Q, Q)>,
}

impl SmallMap {
    pub fn new(map: &PiecewiseAffineMap) -> Self {
        SmallMap {
            bps: map.breakpoints().iter().map(small).collect(),
            images: map.images().iter().map(|(a, b)| (small(a), small(b))).collect(),
        }
    }

    pub fn eval(&self, x: Q) -> Q {
        let n = self.images.len();
        let i = (0..n).find(|&i| x < self.bps[i + 1]).unwrap_or(n - 1);
        let (y0, y1) = self.images[i];
        y0 + (y1 - y0) * (x - self.bps[i]) / (self.bps[i + 1] - self.bps[i])
    }
}

/// `sum_j |T^k(x_{j+1}) - T^k(x_j)|` over `x_j = j / p`, `0 < j < p`, for `k = 1..=kmax`.
///
/// With `p` a prime not dividing any slope numerator, no grid point lands on a
/// discontinuity of an iterate. The endpoints are left out since `T^k(1)` may differ from
/// the left limit.
pub fn grid_variations(map: &PiecewiseAffineMap, p: i128, kmax: usize) -> Vec<f64> {
    let s = SmallMap::new(map);
    let mut xs: Vec<Q> = (1..p).map(|j| Q::new(j, p)).collect();
    let mut out = Vec::with_capacity(kmax);
    for _ in 0..kmax {
        for x in xs.iter_mut() {
            *x = s.eval(*x);
        }
        let v: f64 = xs
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                (*d.numer() as f64 / *d.denom() as f64).abs()
            })
            .sum();
        out.push(v);
    }
    out
}
