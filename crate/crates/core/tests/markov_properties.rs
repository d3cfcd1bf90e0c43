mod common;

use common::{markov_map, tent};
use proptest::prelude::*;
use syncvar::markov::{perron, regime_thresholds_with, topological_entropy, validate_markov};
use syncvar::rational;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perron_residual_small(map in markov_map()) {
        let m = validate_markov(&map).unwrap();
        prop_assume!(m.is_irreducible());
        let pf = perron(&m);
        prop_assert!(pf.residual <= 1e-10, "residual {}", pf.residual);
    }

    #[test]
    fn threshold_ordering(map in markov_map()) {
        let m = validate_markov(&map).unwrap();
        prop_assume!(m.is_irreducible());
        let t = regime_thresholds_with(&map, &m).unwrap();
        let log_k = rational::to_f64(&t.k).ln();
        prop_assert!(t.lyap.lo <= t.h_top.hi, "lyap {:?} h {:?}", t.lyap, t.h_top);
        prop_assert!(t.h_top.lo <= log_k + 1e-15);
        let [a, b, c] = t.gammas();
        prop_assert!(a <= b + 1e-15 && b <= c + 1e-12);
    }

    #[test]
    fn entropy_brackets_word_growth(map in markov_map()) {
        let m = validate_markov(&map).unwrap();
        prop_assume!(m.is_irreducible());
        let h = topological_entropy(&m);
        let pf = perron(&m);
        let vmin = pf.vector.iter().cloned().fold(f64::INFINITY, f64::min);
        let c: f64 = pf.vector.iter().sum::<f64>() / vmin;
        // rho^{k-1} <= n_k <= C rho^{k-1} with C = sum(v) / min(v)
        for k in [8usize, 16, 32] {
            let nk = rational::to_f64(&syncvar::Rational::from_integer(m.word_count(k)));
            let kf = k as f64;
            let rate = nk.ln() / kf;
            prop_assert!(rate <= h.hi * (kf - 1.0) / kf + c.ln() / kf + 1e-12);
            prop_assert!(rate >= h.lo * (kf - 1.0) / kf - 1e-12);
        }
    }
}

#[test]
fn tent_word_growth_converges() {
    let m = validate_markov(&tent()).unwrap();
    let h = topological_entropy(&m).value;
    let gaps: Vec<f64> = [2usize, 4, 8, 16]
        .iter()
        .map(|&k| {
            let n = rational::to_f64(&syncvar::Rational::from_integer(m.word_count(k)));
            (n.ln() / k as f64 - h).abs()
        })
        .collect();
    // tent counts are exactly 2^k, so every gap is rounding noise
    assert!(gaps.iter().all(|g| *g < 1e-12), "{gaps:?}");
    let golden = validate_markov(&common::golden()).unwrap();
    let hg = topological_entropy(&golden).value;
    let gaps: Vec<f64> = [4usize, 8, 16, 32]
        .iter()
        .map(|&k| {
            let n = rational::to_f64(&syncvar::Rational::from_integer(golden.word_count(k)));
            (n.ln() / k as f64 - hg).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}
