//! JSON map files.
//!
//! ```json
//! {"name": "tent", "breakpoints": ["0", "1/4", "1"], "images": [["0", "1"], ["1", "0"]]}
//! ```
//!
//! The optional `expected_partition` lists, for each atom, the 1-based atoms its image
//! covers; it is checked against the computed transition matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::PiecewiseAffineMap;
use crate::markov::TransitionMatrix;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub breakpoints: Vec<String>,
    pub images: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_partition: Option<Vec<Vec<usize>>>,
}

impl MapDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Document(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn from_map(map: &PiecewiseAffineMap, name: Option<String>) -> Self {
        MapDocument {
            name,
            breakpoints: map.breakpoints().iter().map(rational::to_string).collect(),
            images: map
                .images()
                .iter()
                .map(|(a, b)| [rational::to_string(a), rational::to_string(b)])
                .collect(),
            expected_partition: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }

    /// Exact parse of every field, then map construction.
    pub fn to_map(&self) -> Result<PiecewiseAffineMap> {
        let field = |name: String, s: &str| -> Result<Rational> {
            rational::parse_rational(s).map_err(|e| Error::Document(format!("{name}: {e}")))
        };
        let breakpoints = self
            .breakpoints
            .iter()
            .enumerate()
            .map(|(i, s)| field(format!("breakpoints[{i}]"), s))
            .collect::<Result<Vec<_>>>()?;
        let images = self
            .images
            .iter()
            .enumerate()
            .map(|(i, [a, b])| {
                Ok((
                    field(format!("images[{i}][0]"), a)?,
                    field(format!("images[{i}][1]"), b)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewiseAffineMap::new(breakpoints, images)
    }

    /// Compares `expected_partition`, if present, with the transition matrix.
    pub fn check_partition(&self, m: &TransitionMatrix) -> Result<()> {
        let Some(expected) = &self.expected_partition else {
            return Ok(());
        };
        if expected.len() != m.size() {
            return Err(Error::Document(format!(
                "expected_partition has {} rows for {} atoms",
                expected.len(),
                m.size()
            )));
        }
        for (i, row) in expected.iter().enumerate() {
            let mut want = row.clone();
            want.sort_unstable();
            want.dedup();
            let got: Vec<usize> = (0..m.size()).filter(|&j| m.get(i, j)).map(|j| j + 1).collect();
            if want != got {
                return Err(Error::Document(format!(
                    "expected_partition[{i}]: atom {} covers atoms {got:?}, not {want:?}",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}
