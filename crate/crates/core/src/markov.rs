//! Markov structure of a piecewise affine map and the three regime thresholds:
//! the Lipschitz constant `K`, the topological entropy and the Lyapunov exponent of the
//! absolutely continuous invariant measure.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, RatMatrix};
use crate::map::PiecewiseAffineMap;
use crate::rational::{self, Rational};

/// Real number with a rigorous enclosure `lo <= true value <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifiedReal {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl CertifiedReal {
    pub fn exact(value: f64) -> Self {
        CertifiedReal {
            value,
            lo: value,
            hi: value,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn error_bound(&self) -> f64 {
        (self.hi - self.value).max(self.value - self.lo)
    }

    /// Enclosure of `exp(-self)`.
    pub fn exp_neg(&self) -> CertifiedReal {
        CertifiedReal {
            value: (-self.value).exp(),
            lo: down((-self.hi).exp()),
            hi: up((-self.lo).exp()),
        }
    }
}

fn up(x: f64) -> f64 {
    x + x.abs() * 4.0 * f64::EPSILON + f64::MIN_POSITIVE
}

fn down(x: f64) -> f64 {
    x - x.abs() * 4.0 * f64::EPSILON - f64::MIN_POSITIVE
}

/// 0/1 incidence matrix: entry `(i, j)` is set iff `T(I_i)` covers `I_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionMatrix {
    entries: Vec<Vec<bool>>,
    irreducible: bool,
}

impl TransitionMatrix {
    pub fn from_rows(entries: Vec<Vec<bool>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("transition matrix must be square".into()));
        }
        if let Some(i) = entries.iter().position(|r| !r.iter().any(|&b| b)) {
            return Err(Error::InvalidArgument(format!("row {} has no transitions", i + 1)));
        }
        let irreducible = components(&entries).len() == 1;
        Ok(TransitionMatrix {
            entries,
            irreducible,
        })
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.entries
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    pub fn to_u8_rows(&self) -> Vec<Vec<u8>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|&b| b as u8).collect())
            .collect()
    }

    /// Number of admissible words of length `len` ending in each symbol (`len >= 1`).
    pub fn words_ending_in(&self, len: usize) -> Vec<BigInt> {
        let n = self.size();
        let mut w = vec![BigInt::one(); n];
        for _ in 1..len {
            let mut next = vec![BigInt::zero(); n];
            for (i, wi) in w.iter().enumerate() {
                for j in 0..n {
                    if self.entries[i][j] {
                        next[j] += wi;
                    }
                }
            }
            w = next;
        }
        w
    }

    /// Number of admissible words of length `len`; this is the branch count of `T^len`.
    pub fn word_count(&self, len: usize) -> BigInt {
        if len == 0 {
            return BigInt::one();
        }
        self.words_ending_in(len).into_iter().sum()
    }

    /// Word counts for lengths `1..=max_len`, sharing the recursion.
    pub fn word_count_table(&self, max_len: usize) -> Vec<Vec<BigInt>> {
        let n = self.size();
        let mut out = Vec::with_capacity(max_len);
        let mut w = vec![BigInt::one(); n];
        for len in 1..=max_len {
            if len > 1 {
                let mut next = vec![BigInt::zero(); n];
                for (i, wi) in w.iter().enumerate() {
                    for j in 0..n {
                        if self.entries[i][j] {
                            next[j] += wi;
                        }
                    }
                }
                w = next;
            }
            out.push(w.clone());
        }
        out
    }

    /// Exact comparison of the spectral radius with a rational `r`.
    ///
    /// The spectral radius is the maximum over the irreducible diagonal blocks. For an
    /// irreducible block `B`, `r > rho(B)` iff `rI - B` is a nonsingular M-matrix (all leading
    /// principal minors positive), and `r = rho(B)` iff `rI - B` has a one-dimensional kernel
    /// spanned by a positive vector.
    pub fn compare_spectral_radius(&self, r: &Rational) -> Ordering {
        components(&self.entries)
            .iter()
            .map(|block| self.compare_block(block, r))
            .max()
            .unwrap_or(Ordering::Less)
    }

    fn compare_block(&self, block: &[usize], r: &Rational) -> Ordering {
        if block.len() == 1 && !self.entries[block[0]][block[0]] {
            return Rational::zero().cmp(r);
        }
        let a: RatMatrix = block
            .iter()
            .map(|&i| {
                block
                    .iter()
                    .map(|&j| {
                        let d = if i == j { r.clone() } else { Rational::zero() };
                        if self.entries[i][j] {
                            d - Rational::one()
                        } else {
                            d
                        }
                    })
                    .collect()
            })
            .collect();
        if linalg::leading_minors_positive(&a) {
            return Ordering::Less;
        }
        let ns = linalg::nullspace(&a);
        if ns.len() == 1 {
            let v = &ns[0];
            if v.iter().all(|x| x.is_positive()) || v.iter().all(|x| x.is_negative()) {
                return Ordering::Equal;
            }
        }
        Ordering::Greater
    }
}

/// Strongly connected components of the digraph `i -> j` iff `entries[i][j]`.
fn components(entries: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = entries.len();
    let mut reach = entries.to_vec();
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut assigned = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &comp {
            assigned[j] = true;
        }
        out.push(comp);
    }
    out
}

/// Checks the Markov property exactly and returns the transition matrix.
pub fn validate_markov(map: &PiecewiseAffineMap) -> Result<TransitionMatrix> {
    let n = map.atom_count();
    let mut entries = vec![vec![false; n]; n];
    for (i, row) in entries.iter_mut().enumerate() {
        let (u, v) = map.endpoint_images(i);
        for y in [&u, &v] {
            if !map.is_breakpoint(y) {
                return Err(Error::NotMarkov {
                    atom: i + 1,
                    image: y.clone(),
                });
            }
        }
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        for (j, e) in row.iter_mut().enumerate() {
            let (a, b) = map.atom_bounds(j);
            *e = &lo <= a && b <= &hi;
        }
    }
    TransitionMatrix::from_rows(entries)
}

/// Perron data of a nonnegative matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Perron {
    pub radius: CertifiedReal,
    pub vector: Vec<f64>,
    /// `||Mv - rho v||_inf / ||v||_inf` for the returned vector.
    pub residual: f64,
}

/// Power iteration on `M + I` with Collatz-Wielandt bounds
/// `min_i (Mv)_i / v_i <= rho <= max_i (Mv)_i / v_i`.
pub fn perron(m: &TransitionMatrix) -> Perron {
    let n = m.size();
    let mul = |v: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).filter(|&j| m.get(i, j)).map(|j| v[j]).sum())
            .collect()
    };
    let mut v = vec![1.0; n];
    let mut best = (0.0f64, f64::INFINITY, v.clone());
    for _ in 0..100_000 {
        let mv = mul(&v);
        let ratios = mv.iter().zip(&v).map(|(a, b)| a / b);
        let lo = ratios.clone().fold(f64::INFINITY, f64::min);
        let hi = ratios.fold(0.0, f64::max);
        if hi - lo < best.1 - best.0 {
            best = (lo, hi, v.clone());
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
        let next: Vec<f64> = mv.iter().zip(&v).map(|(a, b)| a + b).collect();
        let norm = next.iter().cloned().fold(0.0, f64::max);
        v = next.into_iter().map(|x| x / norm).collect();
    }
    let (lo, hi, v) = best;
    // row sums of at most n terms: relative rounding at most n * eps
    let slack = 2.0 * n as f64 * f64::EPSILON;
    let lo = down(lo * (1.0 - slack));
    let hi = up(hi * (1.0 + slack));
    let value = 0.5 * (lo + hi);
    let mv = mul(&v);
    let vmax = v.iter().cloned().fold(0.0, f64::max);
    let residual = mv
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - value * b).abs())
        .fold(0.0, f64::max)
        / vmax;
    Perron {
        radius: CertifiedReal { value, lo, hi },
        vector: v,
        residual,
    }
}

/// `log` of the spectral radius, with a certified enclosure.
pub fn topological_entropy(m: &TransitionMatrix) -> CertifiedReal {
    let r = perron(m).radius;
    CertifiedReal {
        value: r.value.ln(),
        lo: down(r.lo.ln()),
        hi: up(r.hi.ln()),
    }
}

/// Invariant density constant on atoms, and the Lyapunov exponent it induces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Acim {
    /// Density value on each atom, normalized so the total mass is one.
    #[serde(serialize_with = "crate::serde_util::rationals")]
    pub density: Vec<Rational>,
    /// `mu(I_i)`.
    #[serde(serialize_with = "crate::serde_util::rationals")]
    pub weights: Vec<Rational>,
    pub lyap: CertifiedReal,
}

/// Solves `rho_j = sum_{i -> j} rho_i / |s_i|` exactly.
///
/// The eigenvalue is exactly one and the matrix is rational, so the density is a rational
/// vector obtained from the kernel of `A - I`.
pub fn acim_and_lyapunov(map: &PiecewiseAffineMap, m: &TransitionMatrix) -> Result<Acim> {
    if let Some(atom) = map.slopes().iter().position(|s| s.abs() <= Rational::one()) {
        return Err(Error::NotExpanding { atom: atom + 1 });
    }
    if !m.is_irreducible() {
        return Err(Error::NotTransitive);
    }
    let n = map.atom_count();
    let inv: Vec<Rational> = map.slopes().iter().map(|s| s.abs().recip()).collect();
    let a: RatMatrix = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let mut e = if m.get(i, j) {
                        inv[i].clone()
                    } else {
                        Rational::zero()
                    };
                    if i == j {
                        e -= Rational::one();
                    }
                    e
                })
                .collect()
        })
        .collect();
    let ns = linalg::nullspace(&a);
    if ns.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "invariant density is not unique (kernel dimension {})",
            ns.len()
        )));
    }
    let mut rho = ns.into_iter().next().unwrap_or_default();
    let mass: Rational = rho
        .iter()
        .enumerate()
        .map(|(i, r)| r * map.atom_length(i))
        .sum();
    for r in rho.iter_mut() {
        *r /= &mass;
    }
    if rho.iter().any(|r| !r.is_positive()) {
        return Err(Error::InvalidArgument("invariant density is not positive".into()));
    }
    let weights: Vec<Rational> = rho
        .iter()
        .enumerate()
        .map(|(i, r)| r * map.atom_length(i))
        .collect();
    let logs: Vec<f64> = map
        .slopes()
        .iter()
        .map(|s| rational::to_f64(&s.abs()).ln())
        .collect();
    let lyap: f64 = weights
        .iter()
        .zip(&logs)
        .map(|(w, l)| rational::to_f64(w) * l)
        .sum();
    let max_log = logs.iter().cloned().fold(0.0, f64::max);
    let err = 8.0 * n as f64 * f64::EPSILON * (1.0 + max_log);
    Ok(Acim {
        density: rho,
        weights,
        lyap: CertifiedReal {
            value: lyap,
            lo: lyap - err,
            hi: lyap + err,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeThresholds {
    /// Largest slope magnitude.
    #[serde(serialize_with = "crate::serde_util::rational")]
    pub k: Rational,
    pub h_top: CertifiedReal,
    pub lyap: CertifiedReal,
    #[serde(serialize_with = "crate::serde_util::rationals")]
    pub acim_weights: Vec<Rational>,
    /// `1/K`: Lipschitz regime below.
    #[serde(serialize_with = "crate::serde_util::rational")]
    pub lipschitz_gamma: Rational,
    /// `exp(-h_top)`: bounded variation below.
    pub entropy_gamma: CertifiedReal,
    /// `exp(-lyap)`.
    pub lyapunov_gamma: CertifiedReal,
}

impl RegimeThresholds {
    /// The three gamma thresholds as floats, in nondecreasing order.
    pub fn gammas(&self) -> [f64; 3] {
        [
            rational::to_f64(&self.lipschitz_gamma),
            self.entropy_gamma.value,
            self.lyapunov_gamma.value,
        ]
    }
}

/// Requires a Markov, expanding, transitive map.
pub fn regime_thresholds(map: &PiecewiseAffineMap) -> Result<RegimeThresholds> {
    let m = validate_markov(map)?;
    regime_thresholds_with(map, &m)
}

pub fn regime_thresholds_with(
    map: &PiecewiseAffineMap,
    m: &TransitionMatrix,
) -> Result<RegimeThresholds> {
    let acim = acim_and_lyapunov(map, m)?;
    let k = map
        .slopes()
        .iter()
        .map(|s| s.abs())
        .max()
        .unwrap_or_else(Rational::one);
    let h_top = topological_entropy(m);
    Ok(RegimeThresholds {
        lipschitz_gamma: k.recip(),
        k,
        entropy_gamma: h_top.exp_neg(),
        lyapunov_gamma: acim.lyap.exp_neg(),
        h_top,
        lyap: acim.lyap,
        acim_weights: acim.weights,
    })
}
