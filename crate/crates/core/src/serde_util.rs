use serde::ser::{SerializeSeq, Serializer};

use crate::rational::{self, Rational};

pub fn rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational::to_string(r))
}

pub fn rationals<S: Serializer>(rs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(rs.len()))?;
    for r in rs {
        seq.serialize_element(&rational::to_string(r))?;
    }
    seq.end()
}
