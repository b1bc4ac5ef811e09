//! Continued fractions and triads of framings on a torus.
//!
//! `[q₁, ..., q_m] = q₁ - 1/(q₂ - 1/(... - 1/q_m))`. Convergents are taken
//! for the alternating terms `c_i = (-1)^(i-1) q_i`, with
//! `A_{i+1} = c_{i+1} A_i + A_{i-1}` from `A₀ = 1, A₋₁ = 0` and
//! `B₀ = 0, B₋₁ = 1`, so `[q₁, ..., q_m] = A_m / B_m`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TriadError {
    #[error("empty continued fraction")]
    Empty,
    #[error("continued fraction {0:?} has zero denominator")]
    ZeroDenominator(Vec<i64>),
    #[error("convergent identity fails at i = {0}")]
    Identity(usize),
    #[error("curves {a} and {b} intersect {got}, expected {expected}")]
    Intersection { a: Curve, b: Curve, got: BigInt, expected: i64 },
    #[error("curves do not sum to zero")]
    NonzeroSum,
    #[error("bad term list {0:?}")]
    Parse(String),
}

/// Sign of the pairwise intersections in a triad.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Convention {
    /// `a·b = b·c = c·a = -1`, as seen from the boundary torus.
    Boundary,
    /// `+1`, orientation reversed as in surgery diagrams.
    #[default]
    Diagram,
}

impl Convention {
    pub fn value(self) -> i64 {
        match self {
            Convention::Boundary => -1,
            Convention::Diagram => 1,
        }
    }
}

/// An integer homology class `p·μ + q·λ` on the torus.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Curve {
    pub p: BigInt,
    pub q: BigInt,
}

impl Curve {
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Self {
        Curve { p: p.into(), q: q.into() }
    }

    pub fn neg(&self) -> Curve {
        Curve { p: -&self.p, q: -&self.q }
    }

    pub fn add(&self, o: &Curve) -> Curve {
        Curve { p: &self.p + &o.p, q: &self.q + &o.q }
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn is_primitive(&self) -> bool {
        self.p.gcd(&self.q).is_one()
    }

    /// Same unoriented curve.
    pub fn same_framing(&self, o: &Curve) -> bool {
        self == o || *self == o.neg()
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// `u·v = u.p v.q - u.q v.p`.
pub fn intersection(u: &Curve, v: &Curve) -> BigInt {
    &u.p * &v.q - &u.q * &v.p
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction(pub Vec<i64>);

impl std::str::FromStr for ContinuedFraction {
    type Err = TriadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']');
        let terms = s
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| TriadError::Parse(s.to_owned()))?;
        Ok(ContinuedFraction(terms))
    }
}

/// `a[k] = A_{k-1}`, `b[k] = B_{k-1}` for `k = 0..=m+1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergents {
    pub a: Vec<BigInt>,
    pub b: Vec<BigInt>,
}

impl Convergents {
    pub fn from_terms(terms: &[i64]) -> Convergents {
        let mut a = vec![BigInt::zero(), BigInt::one()];
        let mut b = vec![BigInt::one(), BigInt::zero()];
        for (i, &q) in terms.iter().enumerate() {
            let c = BigInt::from(if i % 2 == 0 { q } else { -q });
            let k = a.len();
            a.push(&c * &a[k - 1] + &a[k - 2]);
            b.push(&c * &b[k - 1] + &b[k - 2]);
        }
        Convergents { a, b }
    }

    /// Number of terms `m`.
    pub fn len(&self) -> usize {
        self.a.len() - 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `A_i` for `i >= -1`.
    pub fn numerator(&self, i: i64) -> &BigInt {
        &self.a[(i + 1) as usize]
    }

    pub fn denominator(&self, i: i64) -> &BigInt {
        &self.b[(i + 1) as usize]
    }

    /// `(A_i, B_i)`.
    pub fn curve(&self, i: i64) -> Curve {
        Curve::new(self.numerator(i).clone(), self.denominator(i).clone())
    }

    /// First `i` in `1..=m` where `A_{i-1}B_i - B_{i-1}A_i != (-1)^(i-1)`.
    pub fn identity_failure(&self) -> Option<usize> {
        (1..=self.len()).find(|&i| {
            let i = i as i64;
            let lhs = self.numerator(i - 1) * self.denominator(i) - self.denominator(i - 1) * self.numerator(i);
            let rhs = BigInt::from(if (i - 1) % 2 == 0 { 1 } else { -1 });
            lhs != rhs
        })
    }
}

/// Value of a continued fraction with its convergents.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: BigRational,
    pub convergents: Convergents,
    /// Whether the nested expression avoids every intermediate `1/0`.
    pub nested_defined: bool,
}

/// The nested expression evaluated directly, `None` on an intermediate `1/0`.
pub fn eval_nested(terms: &[i64]) -> Option<BigRational> {
    let (last, rest) = terms.split_last()?;
    let mut acc = BigRational::from_integer(BigInt::from(*last));
    for &q in rest.iter().rev() {
        if acc.is_zero() {
            return None;
        }
        acc = BigRational::from_integer(BigInt::from(q)) - acc.recip();
    }
    Some(acc)
}

/// `A_m / B_m`, failing when `B_m = 0`.
pub fn eval_cf(cf: &ContinuedFraction) -> Result<Evaluation, TriadError> {
    if cf.0.is_empty() {
        return Err(TriadError::Empty);
    }
    let conv = Convergents::from_terms(&cf.0);
    if let Some(i) = conv.identity_failure() {
        return Err(TriadError::Identity(i));
    }
    let m = conv.len() as i64;
    if conv.denominator(m).is_zero() {
        return Err(TriadError::ZeroDenominator(cf.0.clone()));
    }
    let value = BigRational::new(conv.numerator(m).clone(), conv.denominator(m).clone());
    Ok(Evaluation {
        value,
        nested_defined: eval_nested(&cf.0).is_some(),
        convergents: conv,
    })
}

/// Three curves pairwise intersecting in the convention's value, summing to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FramingTriad {
    pub curves: [Curve; 3],
    pub convention: Convention,
}

impl FramingTriad {
    pub fn new(curves: [Curve; 3], convention: Convention) -> Result<Self, TriadError> {
        let t = FramingTriad { curves, convention };
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<(), TriadError> {
        let expected = self.convention.value();
        for k in 0..3 {
            let (a, b) = (&self.curves[k], &self.curves[(k + 1) % 3]);
            let got = intersection(a, b);
            if got != BigInt::from(expected) {
                return Err(TriadError::Intersection {
                    a: a.clone(),
                    b: b.clone(),
                    got,
                    expected,
                });
            }
        }
        if !self.curves[0].add(&self.curves[1]).add(&self.curves[2]).is_zero() {
            return Err(TriadError::NonzeroSum);
        }
        Ok(())
    }

    /// `(b, c, a)`.
    pub fn rotate(&self) -> FramingTriad {
        let [a, b, c] = self.curves.clone();
        FramingTriad { curves: [b, c, a], convention: self.convention }
    }

    pub fn negate(&self) -> FramingTriad {
        FramingTriad {
            curves: [self.curves[0].neg(), self.curves[1].neg(), self.curves[2].neg()],
            convention: self.convention,
        }
    }

    /// The same curves with the order reversed, which flips the convention.
    pub fn reversed(&self) -> FramingTriad {
        let [a, b, c] = self.curves.clone();
        let convention = match self.convention {
            Convention::Boundary => Convention::Diagram,
            Convention::Diagram => Convention::Boundary,
        };
        FramingTriad { curves: [a, c, b], convention }
    }

    /// Unordered unoriented framings agree.
    pub fn same_framings(&self, o: &FramingTriad) -> bool {
        self.curves.iter().all(|c| o.curves.iter().any(|d| c.same_framing(d)))
            && o.curves.iter().all(|c| self.curves.iter().any(|d| c.same_framing(d)))
    }
}

impl fmt::Display for FramingTriad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.curves[0], self.curves[1], self.curves[2])
    }
}

/// `(a, b, -a-b)`, requiring `a·b` to be the convention's value.
pub fn complete_triad(a: &Curve, b: &Curve, convention: Convention) -> Result<FramingTriad, TriadError> {
    FramingTriad::new([a.clone(), b.clone(), a.add(b).neg()], convention)
}

/// One step of the chain of appended unknots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainStep {
    pub terms: Vec<i64>,
    pub curve: Curve,
}

/// A triad built from a continued fraction by appending `p, -1, -1`.
#[derive(Clone, Debug)]
pub struct TriadFromFraction {
    pub evaluation: Evaluation,
    pub triad: FramingTriad,
    /// `(A_k, B_k)` for `k = m .. m+3`; the last is minus the first triad curve.
    pub chain: Vec<ChainStep>,
    pub even: bool,
}

/// With `m` terms, the triad is `(A_m, A_{m+1}, -A_{m+2})` for even `m` and
/// `(-A_m, A_{m+1}, A_{m+2})` for odd `m`, where the appended terms are
/// `p, -1`. A further `-1` returns to minus the first curve.
pub fn triad_from_fraction(cf: &ContinuedFraction, p: i64, convention: Convention) -> Result<TriadFromFraction, TriadError> {
    let evaluation = eval_cf(cf)?;
    let m = cf.0.len();
    let mut terms = cf.0.clone();
    terms.extend([p, -1, -1]);
    let conv = Convergents::from_terms(&terms);
    let chain: Vec<ChainStep> = (0..4)
        .map(|k| ChainStep {
            terms: terms[..m + k].to_vec(),
            curve: conv.curve((m + k) as i64),
        })
        .collect();
    let even = m.is_multiple_of(2);
    let curves = if even {
        [chain[0].curve.clone(), chain[1].curve.clone(), chain[2].curve.neg()]
    } else {
        [chain[0].curve.neg(), chain[1].curve.clone(), chain[2].curve.clone()]
    };
    let diagram = FramingTriad::new(curves, Convention::Diagram)?;
    if chain[3].curve != diagram.curves[0].neg() {
        return Err(TriadError::NonzeroSum);
    }
    let triad = match convention {
        Convention::Diagram => diagram,
        Convention::Boundary => diagram.reversed(),
    };
    Ok(TriadFromFraction {
        evaluation,
        triad,
        chain,
        even,
    })
}

/// `p/q` with a positive denominator.
pub fn format_rational(r: &BigRational) -> String {
    let (n, d) = (r.numer(), r.denom());
    if d.is_negative() {
        format!("{}/{}", -n, -d)
    } else {
        format!("{n}/{d}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf(v: &[i64]) -> ContinuedFraction {
        ContinuedFraction(v.to_vec())
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn worked_values() {
        assert_eq!(eval_cf(&cf(&[7])).unwrap().value, rat(7, 1));
        assert_eq!(eval_cf(&cf(&[1, -2])).unwrap().value, rat(3, 2));
        assert_eq!(eval_cf(&cf(&[1, -2, -1])).unwrap().value, rat(2, 1));
        let e = eval_cf(&cf(&[1, -2, -1, -1])).unwrap();
        assert_eq!(e.value, rat(1, 1));
        assert!(!e.nested_defined);
        assert_eq!(eval_cf(&cf(&[1, 0])).unwrap_err(), TriadError::ZeroDenominator(vec![1, 0]));
        assert_eq!(eval_cf(&cf(&[])).unwrap_err(), TriadError::Empty);
    }

    #[test]
    fn completion() {
        let t = complete_triad(&Curve::new(1, 0), &Curve::new(0, 1), Convention::Diagram).unwrap();
        assert_eq!(t.curves[2], Curve::new(-1, -1));
        let t = complete_triad(&Curve::new(3, 2), &Curve::new(-2, -1), Convention::Diagram).unwrap();
        assert_eq!(t.curves[2], Curve::new(-1, -1));
        assert!(complete_triad(&Curve::new(3, 2), &Curve::new(-3, -2), Convention::Diagram).is_err());
        assert!(complete_triad(&Curve::new(0, 1), &Curve::new(1, 0), Convention::Boundary).is_ok());
    }

    #[test]
    fn from_fraction() {
        let t = triad_from_fraction(&cf(&[1, -2]), -1, Convention::Diagram).unwrap();
        assert_eq!(t.triad.to_string(), "(3,2) (-2,-1) (-1,-1)");
        assert!(t.even);
        let t = triad_from_fraction(&cf(&[4]), -1, Convention::Diagram).unwrap();
        assert_eq!(t.triad.to_string(), "(-4,-1) (5,1) (-1,0)");
        assert!(!t.even);
        let b = triad_from_fraction(&cf(&[1, -2]), -1, Convention::Boundary).unwrap();
        assert!(b.triad.check().is_ok());
        assert!(b.triad.same_framings(&triad_from_fraction(&cf(&[1, -2]), -1, Convention::Diagram).unwrap().triad));
    }
}
