//! Univariate polynomials with exact rational coefficients, and real root isolation by
//! Sturm sequences with rational bisection.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::rational::{self, Rational};

/// Coefficients stored lowest degree first, without trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    /// `c * x^k`.
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut v = vec![Rational::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    pub fn x() -> Self {
        Poly::monomial(Rational::one(), 1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + rational::to_f64(c))
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer((i as i64).into()))
                .collect(),
        )
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.leading().recip())
    }

    /// Quotient and remainder; panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut rem = self.coeffs.clone();
        let dd = d.degree();
        let lead = d.leading();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); rem.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    rem[k + i] -= &c * dc;
                }
            }
            q[k] = c;
        }
        rem.truncate(dd);
        (Poly::new(q), Poly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Removes the largest power of `x` dividing the polynomial; returns it with its exponent.
    pub fn strip_x_power(&self) -> (Poly, usize) {
        let k = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if self.is_zero() {
            return (Poly::zero(), 0);
        }
        (Poly::new(self.coeffs[k..].to_vec()), k)
    }

    /// The polynomial divided by its repeated factors.
    pub fn squarefree(&self) -> Poly {
        if self.degree() == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0
    }

    /// Sturm sequence `p, p', -rem(p, p'), ...`.
    pub fn sturm(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq[seq.len() - 1].is_zero() {
            let n = seq.len();
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            seq.push(-r);
        }
        seq.pop();
        seq
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rational::to_string).collect()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = rational::to_string(&c.abs());
            match k {
                0 => write!(f, "{a}")?,
                1 if c.abs().is_one() => write!(f, "g")?,
                1 => write!(f, "{a}*g")?,
                _ if c.abs().is_one() => write!(f, "g^{k}")?,
                _ => write!(f, "{a}*g^{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let zero = Rational::zero();
        Poly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + o.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

/// Rational interval certified to contain exactly one real root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootEnclosure {
    pub lo: Rational,
    pub hi: Rational,
}

impl RootEnclosure {
    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn midpoint_f64(&self) -> f64 {
        rational::to_f64(&((&self.lo + &self.hi) / Rational::from_integer(2.into())))
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

impl Serialize for RootEnclosure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [rational::to_string(&self.lo), rational::to_string(&self.hi)].serialize(s)
    }
}

fn sign_changes(seq: &[Poly], x: &Rational) -> usize {
    let mut prev = 0i8;
    let mut count = 0;
    for p in seq {
        let v = p.eval(x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if prev != 0 && s != prev {
                count += 1;
            }
            prev = s;
        }
    }
    count
}

/// Isolates the distinct real roots of `p` in the open interval `(lo, hi)`.
///
/// Each returned enclosure contains exactly one root and is at most `max_width` wide; an
/// enclosure is degenerate (`lo == hi`) when the root was hit exactly. Otherwise the
/// square-free part changes sign strictly across it.
pub fn isolate_roots(
    p: &Poly,
    lo: &Rational,
    hi: &Rational,
    max_width: &Rational,
) -> Vec<RootEnclosure> {
    if p.is_zero() || p.degree() == 0 || lo >= hi {
        return Vec::new();
    }
    let sf = p.squarefree();
    let seq = sf.sturm();
    let two = Rational::from_integer(2.into());
    let mut found = Vec::new();
    // stack of half-open intervals (a, b] with the root count known
    let count = |a: &Rational, b: &Rational| sign_changes(&seq, a) - sign_changes(&seq, b);
    let mut stack = Vec::new();
    let mut b0 = hi.clone();
    if sf.eval(hi).is_zero() {
        // exclude the right end of the open window
        let shrink = (hi - lo) / Rational::from_integer(1_000_000.into());
        let mut b = hi - &shrink;
        while count(&b, hi) > 1 {
            b = (&b + hi) / &two;
        }
        b0 = b;
    }
    // (lo, b] never counts a root at lo itself
    let n0 = count(lo, &b0);
    if n0 > 0 {
        stack.push((lo.clone(), b0, n0));
    }
    while let Some((a, b, n)) = stack.pop() {
        if n == 1 {
            found.push(refine(&sf, a, b, max_width));
            continue;
        }
        let mid = (&a + &b) / &two;
        let left = count(&a, &mid);
        if left > 0 {
            stack.push((a, mid.clone(), left));
        }
        if n > left {
            stack.push((mid, b, n - left));
        }
    }
    found.sort_by(|x, y| x.lo.cmp(&y.lo));
    found
}

/// Bisects `(a, b]`, known to hold exactly one root of the square-free `p`.
fn refine(p: &Poly, mut a: Rational, mut b: Rational, max_width: &Rational) -> RootEnclosure {
    let two = Rational::from_integer(2.into());
    if p.eval(&b).is_zero() {
        return RootEnclosure { lo: b.clone(), hi: b };
    }
    let sb = p.eval(&b).is_positive();
    while &(&b - &a) > max_width {
        let mid = (&a + &b) / &two;
        let v = p.eval(&mid);
        if v.is_zero() {
            return RootEnclosure {
                lo: mid.clone(),
                hi: mid,
            };
        }
        if v.is_positive() == sb {
            b = mid;
        } else {
            a = mid;
        }
    }
    RootEnclosure { lo: a, hi: b }
}
