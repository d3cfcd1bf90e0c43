//! Regime classification along the gamma axis and the combined variation report.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::One;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exceptional::{ExceptionalAnalysis, DEFAULT_WITNESS_DEPTH};
use crate::map::PiecewiseAffineMap;
use crate::markov::{regime_thresholds_with, validate_markov, RegimeThresholds, TransitionMatrix};
use crate::rational::{self, Rational};
use crate::sync::Gamma;
use crate::variation::{
    divergence_certificate, iterate_variations, upper_bound_from, variation_upper_bound,
    DivergenceCertificate, GrowthRow, Subdivision, UpperBound, DEFAULT_GROWTH_TERMS,
    DEFAULT_WORD_CAP,
};

/// Depth of the lower-bound growth table attached when no certificate is available.
pub const DEFAULT_GROWTH_DEPTH: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `K gamma < 1` and `T` continuous.
    Lipschitz,
    /// `e^{h_top} gamma < 1`.
    BoundedVariation,
    /// `e^{h_top} gamma = 1`.
    Threshold,
    /// `e^{h_top} gamma > 1` and gamma is not an exceptional root.
    InfiniteVariation,
    /// `e^{h_top} gamma > 1` and gamma lies in an exceptional root enclosure.
    ExceptionalCandidate,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Lipschitz => "lipschitz",
            Regime::BoundedVariation => "bounded-variation",
            Regime::Threshold => "threshold",
            Regime::InfiniteVariation => "infinite-variation",
            Regime::ExceptionalCandidate => "exceptional-candidate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Bounded,
    Diverging,
    ExceptionalCandidate,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::Diverging => "diverging",
            Verdict::ExceptionalCandidate => "exceptional-candidate",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub gamma: Gamma,
    pub regime: Regime,
    pub certificate: Option<DivergenceCertificate>,
    /// Why no certificate is attached, when one was sought.
    pub certificate_note: Option<String>,
    /// Certificate growth terms, or lower bounds by depth when there is no certificate.
    pub growth: Vec<GrowthRow>,
}

/// Lower bound on `Var phi` from the level-`depth` subdivision.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBound {
    pub depth: usize,
    pub value: Rational,
}

impl Serialize for LowerBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LowerBound", 2)?;
        st.serialize_field("depth", &self.depth)?;
        st.serialize_field("value", &rational::round_sig(rational::to_f64(&self.value), 15))?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationReport {
    pub gamma: Gamma,
    pub regime: Regime,
    pub verdict: Verdict,
    pub upper_bound: UpperBound,
    pub lower_bounds: Vec<LowerBound>,
    pub certificate: Option<DivergenceCertificate>,
    pub certificate_note: Option<String>,
    pub growth: Vec<GrowthRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub gamma: Gamma,
    pub regime: Regime,
    pub lower_bound: Rational,
    pub upper_bound: UpperBound,
}

/// A validated map with its transition matrix, thresholds and exceptional roots.
#[derive(Debug, Clone)]
pub struct MapAnalysis {
    map: PiecewiseAffineMap,
    matrix: TransitionMatrix,
    thresholds: RegimeThresholds,
    exceptional: ExceptionalAnalysis,
}

impl MapAnalysis {
    /// Requires a Markov, expanding, transitive map.
    pub fn new(map: PiecewiseAffineMap) -> Result<Self> {
        Self::with_witness_depth(map, DEFAULT_WITNESS_DEPTH)
    }

    pub fn with_witness_depth(map: PiecewiseAffineMap, witness_depth: usize) -> Result<Self> {
        let matrix = validate_markov(&map)?;
        let thresholds = regime_thresholds_with(&map, &matrix)?;
        let lo = rational::from_f64(thresholds.entropy_gamma.lo.max(0.0))?;
        let exceptional = ExceptionalAnalysis::compute(&map, &lo, witness_depth)?;
        Ok(MapAnalysis {
            map,
            matrix,
            thresholds,
            exceptional,
        })
    }

    pub fn map(&self) -> &PiecewiseAffineMap {
        &self.map
    }

    pub fn matrix(&self) -> &TransitionMatrix {
        &self.matrix
    }

    pub fn thresholds(&self) -> &RegimeThresholds {
        &self.thresholds
    }

    pub fn exceptional(&self) -> &ExceptionalAnalysis {
        &self.exceptional
    }

    /// Regime from exact comparisons of `K gamma` and `rho(M) gamma` with 1.
    pub fn regime(&self, gamma: &Gamma) -> Regime {
        let g = gamma.value();
        match self.matrix.compare_spectral_radius(&g.recip()) {
            Ordering::Less => {
                if &self.thresholds.k * g < Rational::one() && self.map.is_continuous() {
                    Regime::Lipschitz
                } else {
                    Regime::BoundedVariation
                }
            }
            Ordering::Equal => Regime::Threshold,
            Ordering::Greater => {
                if self.exceptional.is_candidate(g) {
                    Regime::ExceptionalCandidate
                } else {
                    Regime::InfiniteVariation
                }
            }
        }
    }

    /// Regime plus, at and above the entropy threshold, a divergence certificate or the
    /// lower-bound growth table.
    pub fn classify(&self, gamma: &Gamma) -> Result<Classification> {
        let regime = self.regime(gamma);
        let mut out = Classification {
            gamma: gamma.clone(),
            regime,
            certificate: None,
            certificate_note: None,
            growth: Vec::new(),
        };
        if matches!(regime, Regime::Lipschitz | Regime::BoundedVariation) {
            return Ok(out);
        }
        match divergence_certificate(
            &self.map,
            &self.matrix,
            gamma,
            DEFAULT_WORD_CAP,
            DEFAULT_GROWTH_TERMS,
        ) {
            Ok(c) => {
                out.growth = c.growth_terms.clone();
                out.certificate = Some(c);
            }
            Err(e @ (Error::HypothesesNotSatisfied(_) | Error::NoCycleFound { .. })) => {
                out.certificate_note = Some(e.to_string());
                let sub = Subdivision::new(&self.map, DEFAULT_GROWTH_DEPTH)?;
                out.growth = self.lower_bound_table(&sub.lower_bounds(gamma));
            }
            Err(e) => return Err(e),
        }
        Ok(out)
    }

    fn lower_bound_table(&self, bounds: &[Rational]) -> Vec<GrowthRow> {
        let counts = self.matrix.word_count_table(bounds.len());
        bounds
            .iter()
            .enumerate()
            .map(|(n, b)| GrowthRow {
                n,
                count: if n == 0 {
                    BigInt::one()
                } else {
                    counts[n - 1].iter().sum()
                },
                bound: b.clone(),
            })
            .collect()
    }

    pub fn variation_report(
        &self,
        gamma: &Gamma,
        depth: usize,
        kmax: usize,
    ) -> Result<VariationReport> {
        let sub = Subdivision::new(&self.map, depth)?;
        let lbs = sub.lower_bounds(gamma);
        let upper_bound = variation_upper_bound(&self.map, &self.matrix, gamma, kmax)?;
        check_bounds(&lbs, &upper_bound)?;
        let cls = self.classify(gamma)?;
        let verdict = match cls.regime {
            Regime::Lipschitz | Regime::BoundedVariation => Verdict::Bounded,
            Regime::InfiniteVariation => Verdict::Diverging,
            Regime::Threshold => {
                if cls.certificate.as_ref().is_some_and(|c| c.diverging) {
                    Verdict::Diverging
                } else {
                    Verdict::Inconclusive
                }
            }
            Regime::ExceptionalCandidate => Verdict::ExceptionalCandidate,
        };
        let growth = if cls.certificate.is_some() {
            cls.growth
        } else {
            self.lower_bound_table(&lbs)
        };
        Ok(VariationReport {
            gamma: gamma.clone(),
            regime: cls.regime,
            verdict,
            upper_bound,
            lower_bounds: lbs
                .into_iter()
                .enumerate()
                .map(|(depth, value)| LowerBound { depth, value })
                .collect(),
            certificate: cls.certificate,
            certificate_note: cls.certificate_note,
            growth,
        })
    }

    /// One row per gamma, sharing the subdivision and the iterate variations.
    pub fn scan(&self, gammas: &[Gamma], depth: usize, kmax: usize) -> Result<Vec<ScanRow>> {
        let sub = Subdivision::new(&self.map, depth)?;
        let vars = iterate_variations(&self.map, &self.matrix, kmax + 1)?;
        gammas
            .iter()
            .map(|g| {
                let lower_bound = sub.lower_bound(g);
                let upper_bound = upper_bound_from(&self.matrix, g, &vars, kmax);
                check_bounds(std::slice::from_ref(&lower_bound), &upper_bound)?;
                Ok(ScanRow {
                    gamma: g.clone(),
                    regime: self.regime(g),
                    lower_bound,
                    upper_bound,
                })
            })
            .collect()
    }
}

fn check_bounds(lower: &[Rational], upper: &UpperBound) -> Result<()> {
    if let Some(u) = upper.value() {
        for l in lower {
            if rational::to_f64(l) > u {
                return Err(Error::Internal(format!(
                    "lower bound {} exceeds upper bound {u}",
                    rational::to_string(l)
                )));
            }
        }
    }
    Ok(())
}

/// `classify` for a map given directly.
pub fn classify_regime(map: &PiecewiseAffineMap, gamma: &Gamma) -> Result<Classification> {
    MapAnalysis::new(map.clone())?.classify(gamma)
}

/// Gamma grid `lo, lo + step, ...` up to `hi` inclusive, all exact.
pub fn gamma_grid(lo: &Rational, hi: &Rational, step: &Rational) -> Result<Vec<Gamma>> {
    let zero = Rational::from_integer(0.into());
    if step <= &zero || lo >= hi || lo <= &zero || hi >= &Rational::one() {
        return Err(Error::InvalidArgument(
            "grid must satisfy 0 < lo < hi < 1 and step > 0".into(),
        ));
    }
    let mut out = Vec::new();
    let mut g = lo.clone();
    while &g <= hi {
        out.push(Gamma::new(g.clone())?);
        g += step;
    }
    Ok(out)
}
