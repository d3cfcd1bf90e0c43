//! Total variation of the sync function.
//!
//! Upper bounds come from `Var phi <= sum_k gamma^k Var T^{k+1}` with `Var T^k` computed
//! exactly; lower bounds are sums over the sided endpoints of the cylinders of `T^d`; the
//! divergence certificate uses a periodic witness whose gap `|x_1 - (1-gamma) phi(x_1)|`
//! is copied into every cylinder at scale `gamma^n`.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::map::{PiecewiseAffineMap, Side, SidedPoint};
use crate::markov::{perron, TransitionMatrix};
use crate::orbit::{canonical_key, detect_eventual_orbit, DEFAULT_CYCLE_CAP};
use crate::rational::{self, Rational};
use crate::sync::{sync_at_periodic, sync_closed_value, Gamma};

pub const DEFAULT_KMAX: usize = 300;
pub const KMAX_CAP: usize = 4000;
/// Largest subdivision depth; the endpoint count grows like `exp(h_top d)`.
pub const DEPTH_CAP: usize = 22;
pub const DEFAULT_WORD_CAP: usize = 8;
pub const DEFAULT_GROWTH_TERMS: usize = 24;

fn int(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

/// Exact `Var T^k` from the ordered branches of `T^k`: lap heights plus the jumps between
/// consecutive branches.
pub fn variation_of_iterate(map: &PiecewiseAffineMap, k: usize, cap: usize) -> Result<Rational> {
    let branches = map.branches_of_iterate(k, cap)?;
    let mut total = Rational::zero();
    for (i, b) in branches.iter().enumerate() {
        total += b.image_len();
        if let Some(next) = branches.get(i + 1) {
            total += rational::abs_diff(&b.image_hi(), &next.image_lo());
        }
    }
    let bound = Rational::from_integer(BigInt::from(2 * branches.len()));
    if total > bound {
        return Err(Error::Internal(format!(
            "Var T^{k} = {} exceeds 2 n_k = {}",
            rational::to_string(&total),
            rational::to_string(&bound)
        )));
    }
    Ok(total)
}

/// `Var T^k` for `k = 1..=kmax` from the transition matrix, without enumerating branches.
///
/// Laps contribute `sum_i w_k(i) |T(I_i)|` where `w_k(i)` counts admissible words of length
/// `k` ending in `i`. Jumps of `T^k` sit at the points whose orbit first meets an interior
/// breakpoint `a` at a time `m < k`. There is one such point for `m = 0`, and for `m >= 1`
/// one per word of length `m` whose last atom covers both atoms next to `a`. Each carries
/// the jump `|T^{k-m}(a-0) - T^{k-m}(a+0)|` of the two sided orbits of `a`.
pub fn iterate_variations(
    map: &PiecewiseAffineMap,
    m: &TransitionMatrix,
    kmax: usize,
) -> Result<Vec<Rational>> {
    if kmax > KMAX_CAP {
        return Err(Error::DepthCapExceeded {
            requested: kmax,
            cap: KMAX_CAP,
        });
    }
    let n = map.atom_count();
    let words = m.word_count_table(kmax);
    let heights: Vec<Rational> = (0..n)
        .map(|i| map.slope(i).abs() * map.atom_length(i))
        .collect();
    let mut jump_terms: Vec<(Vec<BigInt>, Vec<Rational>)> = Vec::new();
    for b in 1..n {
        let a = map.breakpoints()[b].clone();
        let left = detect_eventual_orbit(map, &SidedPoint::left(a.clone())?, DEFAULT_CYCLE_CAP)?;
        let right = detect_eventual_orbit(map, &SidedPoint::right(a)?, DEFAULT_CYCLE_CAP)?;
        let jumps: Vec<Rational> = (0..=kmax)
            .map(|j| rational::abs_diff(left.value(j), right.value(j)))
            .collect();
        if jumps.iter().all(Zero::is_zero) {
            continue;
        }
        let straddles: Vec<bool> = (0..n).map(|i| m.get(i, b - 1) && m.get(i, b)).collect();
        let mut counts = vec![BigInt::one()];
        for row in words.iter().take(kmax.saturating_sub(1)) {
            counts.push(
                row.iter()
                    .zip(&straddles)
                    .filter(|(_, &s)| s)
                    .map(|(w, _)| w)
                    .sum(),
            );
        }
        jump_terms.push((counts, jumps));
    }
    Ok((1..=kmax)
        .map(|k| {
            let mut v: Rational = words[k - 1]
                .iter()
                .zip(&heights)
                .map(|(w, h)| h * int(w))
                .sum();
            for (counts, jumps) in &jump_terms {
                for (mm, c) in counts.iter().enumerate().take(k) {
                    let j = &jumps[k - mm];
                    if !j.is_zero() {
                        v += j * int(c);
                    }
                }
            }
            v
        })
        .collect())
}

fn up(x: f64) -> f64 {
    x + x.abs() * 8.0 * f64::EPSILON + f64::MIN_POSITIVE
}

#[derive(Debug, Clone, PartialEq)]
pub enum UpperBound {
    /// `value >= head + tail` where `head` is the exact partial sum up to `kmax`.
    Finite {
        value: f64,
        head: Rational,
        tail: f64,
        kmax: usize,
    },
    /// The series `sum gamma^k Var T^{k+1}` is not known to converge.
    Unavailable,
}

impl UpperBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            UpperBound::Finite { value, .. } => Some(*value),
            UpperBound::Unavailable => None,
        }
    }
}

impl Serialize for UpperBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            UpperBound::Finite { value, .. } => s.serialize_f64(rational::round_sig(*value, 15)),
            UpperBound::Unavailable => s.serialize_str("infinite"),
        }
    }
}

/// Certified upper bound on `Var phi`, available exactly when `e^{h_top} gamma < 1`.
pub fn variation_upper_bound(
    map: &PiecewiseAffineMap,
    m: &TransitionMatrix,
    gamma: &Gamma,
    kmax: usize,
) -> Result<UpperBound> {
    if m.compare_spectral_radius(&gamma.value().recip()) != Ordering::Less {
        return Ok(UpperBound::Unavailable);
    }
    let vars = iterate_variations(map, m, kmax + 1)?;
    Ok(upper_bound_from(m, gamma, &vars, kmax))
}

/// Head `sum_{k<=kmax} gamma^k vars[k]` plus a tail from `n_k <= C rho^k`, where
/// `C = sum(v) / (min(v) rho)` for a positive vector with `Mv <= rho v`.
pub(crate) fn upper_bound_from(
    m: &TransitionMatrix,
    gamma: &Gamma,
    vars: &[Rational],
    kmax: usize,
) -> UpperBound {
    if m.compare_spectral_radius(&gamma.value().recip()) != Ordering::Less || vars.len() <= kmax {
        return UpperBound::Unavailable;
    }
    let g = gamma.value();
    let mut head = Rational::zero();
    let mut pow = Rational::one();
    for v in &vars[..=kmax] {
        head += &pow * v;
        pow *= g;
    }
    let pf = perron(m);
    let vmin = pf.vector.iter().cloned().fold(f64::INFINITY, f64::min);
    let vsum: f64 = pf.vector.iter().sum();
    let q = up(up(gamma.to_f64()) * pf.radius.hi);
    if vmin.is_nan() || vmin <= 0.0 || q >= 1.0 {
        return UpperBound::Unavailable;
    }
    // powi accumulates at most one rounding per multiplication
    let qp = q.powi(kmax as i32 + 1) * (1.0 + 4.0 * (kmax as f64 + 2.0) * f64::EPSILON);
    let tail = up(2.0 * up(vsum / vmin) * qp / (1.0 - q));
    let value = up(up(rational::to_f64(&head)) + tail);
    UpperBound::Finite {
        value,
        head,
        tail,
        kmax,
    }
}

/// Sided endpoints of the cylinders of `T^d` for `d = 0..=depth`.
///
/// The forward orbits of all endpoints are merged into one functional graph, so `phi` at
/// every node follows from one closed form per cycle and `phi(p) = T(p) + gamma phi(T(p))`.
#[derive(Debug, Clone)]
pub struct Subdivision {
    points: Vec<SidedPoint>,
    next_x: Vec<Rational>,
    succ: Vec<usize>,
    cycles: Vec<Vec<usize>>,
    /// Nodes off the cycles, each after its successor.
    order: Vec<usize>,
    levels: Vec<Vec<usize>>,
}

impl Subdivision {
    pub fn new(map: &PiecewiseAffineMap, depth: usize) -> Result<Self> {
        if depth > DEPTH_CAP {
            return Err(Error::DepthCapExceeded {
                requested: depth,
                cap: DEPTH_CAP,
            });
        }
        let mut sub = Subdivision {
            points: Vec::new(),
            next_x: Vec::new(),
            succ: Vec::new(),
            cycles: Vec::new(),
            order: Vec::new(),
            levels: Vec::new(),
        };
        let mut index = HashMap::new();
        let mut branches = map.branches_of_iterate(0, 0)?;
        for d in 0..=depth {
            if d > 0 {
                branches = map.refine(&branches);
            }
            let mut level = Vec::with_capacity(2 * branches.len());
            level.push(sub.intern(map, &mut index, SidedPoint::right(Rational::zero())?)?);
            for b in &branches[1..] {
                level.push(sub.intern(map, &mut index, SidedPoint::left(b.lo.clone())?)?);
                level.push(sub.intern(map, &mut index, SidedPoint::right(b.lo.clone())?)?);
            }
            level.push(sub.intern(map, &mut index, SidedPoint::left(Rational::one())?)?);
            sub.levels.push(level);
        }
        sub.resolve_cycles();
        Ok(sub)
    }

    fn intern(
        &mut self,
        map: &PiecewiseAffineMap,
        index: &mut HashMap<(Rational, Option<Side>), usize>,
        start: SidedPoint,
    ) -> Result<usize> {
        let mut first = None;
        let mut prev: Option<usize> = None;
        let mut cur = start;
        for _ in 0..=DEFAULT_CYCLE_CAP {
            let key = canonical_key(map, &cur);
            if let Some(&id) = index.get(&key) {
                if let Some(p) = prev {
                    self.succ[p] = id;
                }
                return Ok(first.unwrap_or(id));
            }
            let id = self.points.len();
            let (next, _) = map.step(&cur);
            index.insert(key, id);
            self.next_x.push(next.x().clone());
            self.succ.push(usize::MAX);
            self.points.push(cur);
            if let Some(p) = prev {
                self.succ[p] = id;
            }
            first.get_or_insert(id);
            prev = Some(id);
            cur = next;
        }
        Err(Error::NoCycleWithinCap {
            cap: DEFAULT_CYCLE_CAP,
        })
    }

    fn resolve_cycles(&mut self) {
        let n = self.points.len();
        let mut state = vec![0u8; n];
        let mut rank = vec![0usize; n];
        for s in 0..n {
            if state[s] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut v = s;
            while state[v] == 0 {
                state[v] = 1;
                path.push(v);
                v = self.succ[v];
            }
            for &u in &path {
                state[u] = 2;
            }
            if let Some(pos) = path.iter().position(|&u| u == v) {
                self.cycles.push(path[pos..].to_vec());
                path.truncate(pos);
            }
            for &u in path.iter().rev() {
                rank[u] = rank[self.succ[u]] + 1;
            }
        }
        let mut order: Vec<usize> = (0..n).filter(|&u| rank[u] > 0).collect();
        order.sort_by_key(|&u| rank[u]);
        self.order = order;
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    /// Sided endpoints of the level-`d` cylinders, left to right.
    pub fn level_points(&self, d: usize) -> Vec<&SidedPoint> {
        self.levels[d].iter().map(|&u| &self.points[u]).collect()
    }

    /// Exact `phi` at every node.
    fn phi(&self, gamma: &Gamma) -> Vec<Rational> {
        let g = gamma.value();
        let mut phi = vec![Rational::zero(); self.points.len()];
        for cyc in &self.cycles {
            let p = cyc.len();
            let mut num = Rational::zero();
            let mut pow = Rational::one();
            for &u in cyc {
                num += &pow * &self.next_x[u];
                pow *= g;
            }
            phi[cyc[0]] = num / (Rational::one() - pow);
            for j in (1..p).rev() {
                let u = cyc[j];
                phi[u] = &self.next_x[u] + g * &phi[cyc[(j + 1) % p]];
            }
        }
        for &u in &self.order {
            phi[u] = &self.next_x[u] + g * &phi[self.succ[u]];
        }
        phi
    }

    /// `phi` at the level-`d` endpoints, in order.
    pub fn level_values(&self, gamma: &Gamma, d: usize) -> Vec<Rational> {
        let phi = self.phi(gamma);
        self.levels[d].iter().map(|&u| phi[u].clone()).collect()
    }

    fn level_sum(&self, phi: &[Rational], d: usize) -> Rational {
        self.levels[d]
            .windows(2)
            .map(|w| rational::abs_diff(&phi[w[1]], &phi[w[0]]))
            .sum()
    }

    /// Lower bounds for depths `0..=depth`.
    pub fn lower_bounds(&self, gamma: &Gamma) -> Vec<Rational> {
        let phi = self.phi(gamma);
        (0..self.levels.len())
            .map(|d| self.level_sum(&phi, d))
            .collect()
    }

    /// Lower bound at the full depth.
    pub fn lower_bound(&self, gamma: &Gamma) -> Rational {
        let phi = self.phi(gamma);
        self.level_sum(&phi, self.depth())
    }
}

/// `sum |phi(s_{i+1}) - phi(s_i)|` over the sided cylinder endpoints of `T^depth`.
pub fn variation_lower_bound(
    map: &PiecewiseAffineMap,
    gamma: &Gamma,
    depth: usize,
) -> Result<Rational> {
    Ok(Subdivision::new(map, depth)?.lower_bound(gamma))
}

/// `inf_a sum |df_i - a dx_i|` over consecutive samples, attained at a weighted median of
/// the secant slopes (weights `dx_i`).
pub fn reduced_variation(samples: &[(Rational, Rational)]) -> Result<Rational> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument(
            "reduced variation needs at least two samples".into(),
        ));
    }
    let steps: Vec<(Rational, Rational)> = samples
        .windows(2)
        .map(|w| (&w[1].1 - &w[0].1, &w[1].0 - &w[0].0))
        .collect();
    if steps.iter().any(|(_, dx)| !dx.is_positive()) {
        return Err(Error::InvalidArgument(
            "samples must be strictly increasing in x".into(),
        ));
    }
    let mut slopes: Vec<(Rational, &Rational)> =
        steps.iter().map(|(df, dx)| (df / dx, dx)).collect();
    slopes.sort_by(|a, b| a.0.cmp(&b.0));
    let total: Rational = steps.iter().map(|(_, dx)| dx).sum();
    let half = total / Rational::from_integer(2.into());
    let mut acc = Rational::zero();
    let mut a = slopes[0].0.clone();
    for (s, w) in &slopes {
        acc += *w;
        if acc >= half {
            a = s.clone();
            break;
        }
    }
    Ok(steps.iter().map(|(df, dx)| (df - &a * dx).abs()).sum())
}

/// Whether `gamma rho(M) > 1`, in which case a `phi` of bounded variation must be affine on
/// every atom.
pub fn affinity_forced(m: &TransitionMatrix, gamma: &Gamma) -> bool {
    m.compare_spectral_radius(&gamma.value().recip()) == Ordering::Greater
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DivergenceHypothesis {
    /// `T(0+0) = 0`.
    FixedAtZero,
    /// `T(1-0) = 1`.
    FixedAtOne,
    /// `T(a) = 0`, `T(0) > 0`, and `a` has preimages on both sides.
    KinkToZero {
        #[serde(serialize_with = "crate::serde_util::rational")]
        a: Rational,
    },
    /// `T(a) = 1`, `T(1) < 1`, and `a` has preimages on both sides.
    KinkToOne {
        #[serde(serialize_with = "crate::serde_util::rational")]
        a: Rational,
    },
}

fn has_full_branch(map: &PiecewiseAffineMap) -> bool {
    (0..map.atom_count()).any(|i| {
        let (u, v) = map.endpoint_images(i);
        (u.is_zero() && v.is_one()) || (u.is_one() && v.is_zero())
    })
}

/// Points of `[0,1]` sent to `y` by `T` (using the half-open atom convention).
fn preimages(map: &PiecewiseAffineMap, y: &Rational) -> Vec<Rational> {
    let mut out: Vec<Rational> = (0..map.atom_count())
        .filter_map(|j| {
            let x = (y - map.intercept(j)) / map.slope(j);
            let (lo, hi) = map.atom_bounds(j);
            (&x >= lo && &x <= hi && &map.eval_at(&x) == y).then_some(x)
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

fn kink_point(map: &PiecewiseAffineMap, target: &Rational) -> Option<Rational> {
    preimages(map, target).into_iter().find(|a| {
        if a.is_zero() || a.is_one() {
            return false;
        }
        let pre = preimages(map, a);
        pre.iter().any(|y| y < a) && pre.iter().any(|y| y > a)
    })
}

/// Mechanical check of the hypotheses under which a periodic or endpoint witness yields
/// divergence at and above the entropy threshold.
pub fn check_divergence_hypotheses(map: &PiecewiseAffineMap) -> Result<DivergenceHypothesis> {
    if !has_full_branch(map) {
        return Err(Error::HypothesesNotSatisfied("no full branch".into()));
    }
    let n = map.atom_count();
    if map.endpoint_images(0).0.is_zero() {
        return Ok(DivergenceHypothesis::FixedAtZero);
    }
    if map.endpoint_images(n - 1).1.is_one() {
        return Ok(DivergenceHypothesis::FixedAtOne);
    }
    if map.eval_at(&Rational::zero()).is_positive() {
        if let Some(a) = kink_point(map, &Rational::zero()) {
            return Ok(DivergenceHypothesis::KinkToZero { a });
        }
    }
    if map.endpoint_images(n - 1).1 < Rational::one() {
        if let Some(a) = kink_point(map, &Rational::one()) {
            return Ok(DivergenceHypothesis::KinkToOne { a });
        }
    }
    Err(Error::HypothesesNotSatisfied(
        "T(0+0) != 0, T(1-0) != 1, and no point a with T(a) in {0,1}, the endpoint condition \
         and preimages of a on both sides"
            .into(),
    ))
}

/// `(n, N_n, bound)` row of a growth table.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRow {
    pub n: usize,
    pub count: BigInt,
    pub bound: Rational,
}

impl Serialize for GrowthRow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GrowthRow", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("N_n", &self.count.to_string())?;
        st.serialize_field(
            "bound",
            &rational::round_sig(rational::to_f64(&self.bound), 15),
        )?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceCertificate {
    pub hypothesis: DivergenceHypothesis,
    /// Cycle labelled so that `x_{i+1} = T(x_i)`, starting from its minimum (its maximum
    /// under `FixedAtOne`); the single anchor point for the kink hypotheses.
    pub periodic_witness: Vec<Rational>,
    /// `|x_1 - (1-gamma) phi(x_1)|`.
    pub gap: Rational,
    /// `N_n gamma^n gap` with `N_n` the number of branches of `T^n`.
    pub growth_terms: Vec<GrowthRow>,
    /// `gap > 0` and `e^{h_top} gamma >= 1`.
    pub diverging: bool,
}

impl DivergenceCertificate {
    pub fn anchor(&self) -> &Rational {
        &self.periodic_witness[0]
    }
}

impl Serialize for DivergenceCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("DivergenceCertificate", 6)?;
        st.serialize_field("hypothesis", &self.hypothesis)?;
        let w: Vec<String> = self.periodic_witness.iter().map(rational::to_string).collect();
        st.serialize_field("periodic_witness", &w)?;
        st.serialize_field("gap", &rational::to_string(&self.gap))?;
        st.serialize_field(
            "gap_decimal",
            &rational::round_sig(rational::to_f64(&self.gap), 15),
        )?;
        st.serialize_field("growth_terms", &self.growth_terms)?;
        st.serialize_field("diverging", &self.diverging)?;
        st.end()
    }
}

/// Periodic cycle of minimal period `p >= 2` whose extreme point (minimum if `want_min`,
/// else maximum) lies in the open window, found by solving the affine fixed-point equation
/// of each cyclically admissible word of length up to `word_cap`.
pub fn find_window_cycle(
    map: &PiecewiseAffineMap,
    m: &TransitionMatrix,
    window: (&Rational, &Rational),
    want_min: bool,
    word_cap: usize,
) -> Result<Vec<Rational>> {
    let accept = |w: &[usize]| -> Option<Vec<Rational>> {
        let mut cycle = cycle_of_word(map, w)?;
        let (pos, ext) = cycle
            .iter()
            .enumerate()
            .reduce(|a, b| if (b.1 < a.1) == want_min { b } else { a })?;
        if ext > window.0 && ext < window.1 {
            cycle.rotate_left(pos);
            return Some(cycle);
        }
        None
    };
    for p in 2..=word_cap {
        let mut word = vec![0usize; p];
        if let Some(c) = search_words(map.atom_count(), m, 0, &mut word, &accept) {
            return Ok(c);
        }
    }
    Err(Error::NoCycleFound { cap: word_cap })
}

/// Depth-first enumeration of cyclically admissible words in lexicographic order.
fn search_words<F>(
    n: usize,
    m: &TransitionMatrix,
    i: usize,
    word: &mut Vec<usize>,
    accept: &F,
) -> Option<Vec<Rational>>
where
    F: Fn(&[usize]) -> Option<Vec<Rational>>,
{
    let p = word.len();
    if i == p {
        return if m.get(word[p - 1], word[0]) {
            accept(word)
        } else {
            None
        };
    }
    for a in 0..n {
        if i > 0 && !m.get(word[i - 1], a) {
            continue;
        }
        word[i] = a;
        if let Some(c) = search_words(n, m, i + 1, word, accept) {
            return Some(c);
        }
    }
    None
}

/// Orbit of the fixed point of `T_{w_{p-1}} o ... o T_{w_0}`, if it visits the open atoms
/// of the word and has minimal period `p`.
fn cycle_of_word(map: &PiecewiseAffineMap, word: &[usize]) -> Option<Vec<Rational>> {
    let (mut s, mut b) = (Rational::one(), Rational::zero());
    for &a in word {
        s = map.slope(a) * &s;
        b = map.slope(a) * &b + map.intercept(a);
    }
    if s.is_one() {
        return None;
    }
    let mut x = b / (Rational::one() - s);
    let mut cycle = Vec::with_capacity(word.len());
    for &a in word {
        let (lo, hi) = map.atom_bounds(a);
        if &x <= lo || &x >= hi {
            return None;
        }
        cycle.push(x.clone());
        x = map.branch_value(a, &x);
    }
    if x != cycle[0] {
        return None;
    }
    let mut sorted = cycle.clone();
    sorted.sort();
    sorted.dedup();
    (sorted.len() == cycle.len()).then_some(cycle)
}

/// Divergence certificate for `gamma`: hypotheses, witness, exact gap and growth terms.
pub fn divergence_certificate(
    map: &PiecewiseAffineMap,
    m: &TransitionMatrix,
    gamma: &Gamma,
    word_cap: usize,
    terms: usize,
) -> Result<DivergenceCertificate> {
    let hypothesis = check_divergence_hypotheses(map)?;
    let g = gamma.value();
    let one_minus = Rational::one() - g;
    let n = map.atom_count();
    let (witness, phi) = match &hypothesis {
        DivergenceHypothesis::FixedAtZero | DivergenceHypothesis::FixedAtOne => {
            let want_min = hypothesis == DivergenceHypothesis::FixedAtZero;
            let (lo, hi) = if want_min {
                (Rational::zero(), map.endpoint_images(0).1)
            } else {
                (map.endpoint_images(n - 1).0, Rational::one())
            };
            let cycle = find_window_cycle(map, m, (&lo, &hi), want_min, word_cap)?;
            let phi = sync_at_periodic(map, gamma, &cycle)?.exact.ok_or_else(|| {
                Error::Internal("periodic value not exact".into())
            })?;
            (cycle, phi)
        }
        DivergenceHypothesis::KinkToZero { .. } => {
            let o = detect_eventual_orbit(map, &SidedPoint::right(Rational::zero())?, DEFAULT_CYCLE_CAP)?;
            (vec![Rational::zero()], sync_closed_value(g, &o))
        }
        DivergenceHypothesis::KinkToOne { .. } => {
            let o = detect_eventual_orbit(map, &SidedPoint::left(Rational::one())?, DEFAULT_CYCLE_CAP)?;
            (vec![Rational::one()], sync_closed_value(g, &o))
        }
    };
    let gap = rational::abs_diff(&witness[0], &(&one_minus * &phi));
    let counts = m.word_count_table(terms);
    let mut growth_terms = Vec::with_capacity(terms + 1);
    let mut pow = Rational::one();
    for k in 0..=terms {
        let count: BigInt = if k == 0 {
            BigInt::one()
        } else {
            counts[k - 1].iter().sum()
        };
        growth_terms.push(GrowthRow {
            n: k,
            bound: int(&count) * &pow * &gap,
            count,
        });
        pow *= g;
    }
    let diverging =
        gap.is_positive() && m.compare_spectral_radius(&g.recip()) != Ordering::Less;
    Ok(DivergenceCertificate {
        hypothesis,
        periodic_witness: witness,
        gap,
        growth_terms,
        diverging,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::validate_markov;
    use crate::rational::{int as rint, ratio};

    fn tent() -> PiecewiseAffineMap {
        PiecewiseAffineMap::new(
            vec![rint(0), ratio(1, 4), rint(1)],
            vec![(rint(0), rint(1)), (rint(1), rint(0))],
        )
        .unwrap()
    }

    fn doubling() -> PiecewiseAffineMap {
        PiecewiseAffineMap::new(
            vec![rint(0), ratio(1, 2), rint(1)],
            vec![(rint(0), rint(1)), (rint(0), rint(1))],
        )
        .unwrap()
    }

    fn gamma(n: i64, d: i64) -> Gamma {
        Gamma::new(ratio(n, d)).unwrap()
    }

    #[test]
    fn iterate_variation_examples() {
        assert_eq!(variation_of_iterate(&tent(), 1, 25).unwrap(), rint(2));
        assert_eq!(variation_of_iterate(&tent(), 3, 25).unwrap(), rint(8));
        assert_eq!(variation_of_iterate(&doubling(), 1, 25).unwrap(), rint(3));
        assert_eq!(variation_of_iterate(&tent(), 0, 25).unwrap(), rint(1));
        assert!(variation_of_iterate(&tent(), 30, 25).is_err());
    }

    #[test]
    fn markov_route_agrees_with_branches() {
        for map in [tent(), doubling()] {
            let m = validate_markov(&map).unwrap();
            let vars = iterate_variations(&map, &m, 8).unwrap();
            for k in 1..=8 {
                assert_eq!(vars[k - 1], variation_of_iterate(&map, k, 25).unwrap(), "k={k}");
            }
        }
        let d = doubling();
        let vars = iterate_variations(&d, &validate_markov(&d).unwrap(), 5).unwrap();
        assert_eq!(vars[4], rint(63));
    }

    #[test]
    fn upper_bound_geometric() {
        let t = tent();
        let m = validate_markov(&t).unwrap();
        let ub = variation_upper_bound(&t, &m, &gamma(1, 5), 200).unwrap();
        let v = ub.value().unwrap();
        assert!(v >= 10.0 / 3.0 && v - 10.0 / 3.0 < 1e-12, "{v}");
        assert_eq!(
            variation_upper_bound(&t, &m, &gamma(1, 2), 50).unwrap(),
            UpperBound::Unavailable
        );
    }

    #[test]
    fn lower_bounds_monotone_and_below_upper() {
        let t = tent();
        let g = gamma(1, 5);
        let sub = Subdivision::new(&t, 10).unwrap();
        let lbs = sub.lower_bounds(&g);
        assert!(lbs.windows(2).all(|w| w[0] <= w[1]));
        assert!(lbs[10] <= ratio(10, 3));
        assert_eq!(sub.lower_bound(&g), lbs[10]);
    }

    #[test]
    fn depth_zero_is_two_point() {
        let t = tent();
        let g = gamma(3, 4);
        let lb = variation_lower_bound(&t, &g, 0).unwrap();
        let at = |p: SidedPoint| {
            sync_closed_value(g.value(), &detect_eventual_orbit(&t, &p, 100).unwrap())
        };
        let expect = rational::abs_diff(
            &at(SidedPoint::left(rint(1)).unwrap()),
            &at(SidedPoint::right(rint(0)).unwrap()),
        );
        assert_eq!(lb, expect);
    }

    #[test]
    fn node_values_match_closed_forms() {
        let t = doubling();
        let g = gamma(2, 3);
        let sub = Subdivision::new(&t, 4).unwrap();
        let vals = sub.level_values(&g, 4);
        for (p, v) in sub.level_points(4).into_iter().zip(vals) {
            let o = detect_eventual_orbit(&t, p, 100).unwrap();
            assert_eq!(sync_closed_value(g.value(), &o), v, "{p}");
        }
    }

    #[test]
    fn reduced_variation_examples() {
        let affine: Vec<_> = (0..5).map(|i| (ratio(i, 4), ratio(3 * i, 4) + rint(1))).collect();
        assert_eq!(reduced_variation(&affine).unwrap(), rint(0));
        let hat = vec![(rint(0), rint(0)), (ratio(1, 2), rint(1)), (rint(1), rint(0))];
        assert_eq!(reduced_variation(&hat).unwrap(), rint(2));
        let doubled: Vec<_> = hat.iter().map(|(x, y)| (x.clone(), y * rint(2))).collect();
        assert_eq!(reduced_variation(&doubled).unwrap(), rint(4));
        assert!(reduced_variation(&hat[..1]).is_err());
    }

    #[test]
    fn tent_certificate() {
        let t = tent();
        let m = validate_markov(&t).unwrap();
        for (n, d) in [(1, 2), (11, 20), (3, 4), (1, 5)] {
            let g = gamma(n, d);
            let c = divergence_certificate(&t, &m, &g, 8, 10).unwrap();
            assert_eq!(c.hypothesis, DivergenceHypothesis::FixedAtZero);
            assert_eq!(c.periodic_witness, vec![ratio(4, 19), ratio(16, 19)]);
            assert_eq!(c.gap, ratio(12, 19) / (rint(1) + g.value()));
            assert_eq!(c.diverging, n * 2 >= d);
        }
        let c = divergence_certificate(&t, &m, &gamma(1, 2), 8, 6).unwrap();
        assert!(c.growth_terms.iter().all(|r| r.bound == c.gap));
    }

    #[test]
    fn hypotheses_fail_without_full_branch() {
        // atoms [0,1/2), [1/2,1) with images [1/2,1] and [0,1/2]... slopes +-1 are not
        // expanding, so use three atoms with images covering two atoms each
        let map = PiecewiseAffineMap::new(
            vec![rint(0), ratio(1, 3), ratio(2, 3), rint(1)],
            vec![
                (ratio(1, 3), rint(1)),
                (ratio(2, 3), rint(0)),
                (rint(0), ratio(2, 3)),
            ],
        )
        .unwrap();
        assert!(matches!(
            check_divergence_hypotheses(&map),
            Err(Error::HypothesesNotSatisfied(_))
        ));
    }

    #[test]
    fn mirrored_map_uses_fixed_one() {
        // x -> 1 - T(1 - x) for the tent map
        let map = PiecewiseAffineMap::new(
            vec![rint(0), ratio(3, 4), rint(1)],
            vec![(rint(1), rint(0)), (rint(0), rint(1))],
        )
        .unwrap();
        let m = validate_markov(&map).unwrap();
        let c = divergence_certificate(&map, &m, &gamma(3, 5), 8, 4).unwrap();
        assert_eq!(c.hypothesis, DivergenceHypothesis::FixedAtOne);
        assert_eq!(c.periodic_witness[0], ratio(15, 19));
        assert!(c.gap.is_positive() && c.diverging);
    }
}
