//! Code space `{a,b,c}^n` and assembly of hypercube complexes.
//!
//! Codes are ordered componentwise with `a < b < c`. An assembled complex
//! sums, over every increasing chain of immediate successors `I⁰ < ... < I^k`
//! inside a complete code set, the supplied map `D_{I⁰...I^k}`. A generator
//! `x` at code `I` gets degree `deg x + n - rank(I)` and filtration
//! `F(x) - weight(I)`, so a chain of `k` steps must raise vertex degree by
//! `k - 1`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::complex::{ComplexError, FilteredComplex, Generator, ValidationReport, Violation};
use crate::linalg::{Field, SparseMatrix};
use crate::reduce::{compute_pages, PageLimit, Pages, ReduceError, ReduceOptions};

#[derive(Debug, Error)]
pub enum CubeError {
    #[error("bad code {0:?}")]
    BadCode(String),
    #[error("code {code} has length {got}, expected {expected}")]
    Length { code: String, got: usize, expected: usize },
    #[error("code set is not complete: {lower} <= {missing} <= {upper} but {missing} is absent")]
    Incomplete { lower: Code, missing: Code, upper: Code },
    #[error("no vertex complex at {0}")]
    MissingVertex(Code),
    #[error("vertex {code}: {report}")]
    InvalidVertex { code: Code, report: ValidationReport },
    #[error("{0} is not an increasing chain of immediate successors")]
    BadSequence(String),
    #[error("map on {sequence}: expected shape {expected:?}, got {got:?}")]
    MapShape {
        sequence: String,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("D^2 != 0 ({} nonzero entries) between code pairs {pairs:?}", defect.nnz())]
    SquareNonzero {
        defect: SparseMatrix,
        pairs: Vec<(Code, Code)>,
    },
    #[error("assembled complex is invalid: {0}")]
    Invalid(ValidationReport),
    #[error("E1 structure: {0}")]
    E1(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    A,
    B,
    C,
}

impl Letter {
    pub fn rank(self) -> i64 {
        match self {
            Letter::A => 0,
            Letter::B => 1,
            Letter::C => 2,
        }
    }

    fn from_char(ch: char) -> Option<Letter> {
        match ch {
            'a' => Some(Letter::A),
            'b' => Some(Letter::B),
            'c' => Some(Letter::C),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
            Letter::C => 'c',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Alphabet {
    /// `{a, b}`: a position at `b` has no successor.
    Ab,
    /// `{a, b, c}` with the cyclic order `a < b < c < a`.
    #[default]
    Abc,
}

impl Alphabet {
    pub fn letters(self) -> &'static [Letter] {
        match self {
            Alphabet::Ab => &[Letter::A, Letter::B],
            Alphabet::Abc => &[Letter::A, Letter::B, Letter::C],
        }
    }

    /// One step up the cyclic order.
    pub fn next(self, l: Letter) -> Option<Letter> {
        match (self, l) {
            (_, Letter::A) => Some(Letter::B),
            (Alphabet::Ab, _) => None,
            (Alphabet::Abc, Letter::B) => Some(Letter::C),
            (Alphabet::Abc, Letter::C) => Some(Letter::A),
        }
    }
}

impl FromStr for Alphabet {
    type Err = CubeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ab" => Ok(Alphabet::Ab),
            "abc" => Ok(Alphabet::Abc),
            _ => Err(CubeError::BadCode(s.to_owned())),
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alphabet::Ab => "ab",
            Alphabet::Abc => "abc",
        })
    }
}

/// A word over `{a, b, c}`, ordered lexicographically for storage.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Code(pub Vec<Letter>);

impl Code {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn constant(n: usize, l: Letter) -> Code {
        Code(vec![l; n])
    }

    /// Sum of letter ranks (a = 0, b = 1, c = 2).
    pub fn rank(&self) -> i64 {
        self.0.iter().map(|l| l.rank()).sum()
    }

    pub fn count(&self, l: Letter) -> usize {
        self.0.iter().filter(|&&x| x == l).count()
    }

    /// Componentwise `self <= other`.
    pub fn is_below(&self, other: &Code) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Every code of length `n` over the alphabet, in lexicographic order.
    pub fn all(n: usize, alphabet: Alphabet) -> Vec<Code> {
        let mut out = vec![Code(Vec::new())];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|c| {
                    alphabet.letters().iter().map(move |&l| {
                        let mut v = c.0.clone();
                        v.push(l);
                        Code(v)
                    })
                })
                .collect();
        }
        out
    }
}

impl FromStr for Code {
    type Err = CubeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(Letter::from_char)
            .collect::<Option<Vec<_>>>()
            .map(Code)
            .ok_or_else(|| CubeError::BadCode(s.to_owned()))
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

/// Codes differing from `i` in one position by one step of the cyclic order.
pub fn immediate_successors(i: &Code, alphabet: Alphabet) -> Vec<Code> {
    (0..i.len())
        .filter_map(|k| {
            alphabet.next(i.0[k]).map(|l| {
                let mut v = i.0.clone();
                v[k] = l;
                Code(v)
            })
        })
        .collect()
}

/// Immediate successors that are also larger in the componentwise order.
fn increasing_successors(i: &Code, alphabet: Alphabet) -> impl Iterator<Item = Code> + '_ {
    immediate_successors(i, alphabet).into_iter().filter(move |j| i.is_below(j))
}

/// Every chain `i = I⁰ < I¹ < ... < I^k = j` of immediate successors.
pub fn successor_sequences(i: &Code, j: &Code, alphabet: Alphabet) -> Vec<Vec<Code>> {
    if i.len() != j.len() || !i.is_below(j) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut path = vec![i.clone()];
    fn walk(path: &mut Vec<Code>, j: &Code, alphabet: Alphabet, out: &mut Vec<Vec<Code>>) {
        let last = path.last().expect("nonempty").clone();
        if last == *j {
            out.push(path.clone());
            return;
        }
        for next in increasing_successors(&last, alphabet) {
            if next.is_below(j) {
                path.push(next);
                walk(path, j, alphabet, out);
                path.pop();
            }
        }
    }
    walk(&mut path, j, alphabet, &mut out);
    out
}

/// Whether `seq` is an increasing chain of immediate successors.
pub fn is_successor_sequence(seq: &[Code], alphabet: Alphabet) -> bool {
    !seq.is_empty() && seq.windows(2).all(|w| increasing_successors(&w[0], alphabet).any(|c| c == w[1]))
}

/// A set of equal-length codes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CodeSet(pub BTreeSet<Code>);

impl CodeSet {
    pub fn full(n: usize, alphabet: Alphabet) -> CodeSet {
        CodeSet(Code::all(n, alphabet).into_iter().collect())
    }

    pub fn contains(&self, c: &Code) -> bool {
        self.0.contains(c)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Code> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<Code> for CodeSet {
    fn from_iter<T: IntoIterator<Item = Code>>(iter: T) -> Self {
        CodeSet(iter.into_iter().collect())
    }
}

/// `I <= K <= J` with `I, J` in the set but `K` missing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletenessWitness {
    pub lower: Code,
    pub missing: Code,
    pub upper: Code,
}

/// Betweenness closure in the componentwise order. It suffices to check the
/// one-step increases of each `I` that stay below some `J`.
pub fn is_complete(s: &CodeSet) -> Result<(), CompletenessWitness> {
    for i in s.iter() {
        for j in s.iter().filter(|j| i.is_below(j) && *j != i) {
            for k in 0..i.len() {
                if i.0[k] < j.0[k] {
                    let mut v = i.0.clone();
                    v[k] = match v[k] {
                        Letter::A => Letter::B,
                        _ => Letter::C,
                    };
                    let step = Code(v);
                    if !s.contains(&step) {
                        return Err(CompletenessWitness {
                            lower: i.clone(),
                            missing: step,
                            upper: j.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Per-letter filtration weights; a code's weight is the sum over positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Weights {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { a: 0, b: 1, c: 2 }
    }
}

impl Weights {
    pub fn of(&self, code: &Code) -> i64 {
        code.0
            .iter()
            .map(|l| match l {
                Letter::A => self.a,
                Letter::B => self.b,
                Letter::C => self.c,
            })
            .sum()
    }
}

/// Vertex complexes and maps along successor sequences.
#[derive(Clone, Debug)]
pub struct CubeComplex {
    pub n: usize,
    pub alphabet: Alphabet,
    pub field: Field,
    pub vertices: BTreeMap<Code, Arc<FilteredComplex>>,
    /// `D_{I⁰...I^k}` keyed by the sequence, `k >= 1`; absent maps are zero.
    pub seq_maps: BTreeMap<Vec<Code>, SparseMatrix>,
}

fn seq_name(seq: &[Code]) -> String {
    seq.iter().map(Code::to_string).collect::<Vec<_>>().join(">")
}

/// An assembled cube with the code of each generator.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub complex: Arc<FilteredComplex>,
    pub codes: Vec<Code>,
    pub blocks: BTreeMap<Code, std::ops::Range<usize>>,
}

impl CubeComplex {
    pub fn new(n: usize, alphabet: Alphabet, field: Field) -> Self {
        CubeComplex {
            n,
            alphabet,
            field,
            vertices: BTreeMap::new(),
            seq_maps: BTreeMap::new(),
        }
    }

    fn check_code(&self, c: &Code) -> Result<(), CubeError> {
        let bad_letter = self.alphabet == Alphabet::Ab && c.0.contains(&Letter::C);
        if c.len() != self.n || bad_letter {
            return Err(CubeError::Length {
                code: c.to_string(),
                got: c.len(),
                expected: self.n,
            });
        }
        Ok(())
    }

    pub fn set_vertex(&mut self, code: Code, complex: Arc<FilteredComplex>) -> Result<(), CubeError> {
        self.check_code(&code)?;
        self.vertices.insert(code, complex);
        Ok(())
    }

    pub fn set_map(&mut self, seq: Vec<Code>, matrix: SparseMatrix) -> Result<(), CubeError> {
        for c in &seq {
            self.check_code(c)?;
        }
        if seq.len() < 2 || !is_successor_sequence(&seq, self.alphabet) {
            return Err(CubeError::BadSequence(seq_name(&seq)));
        }
        self.seq_maps.insert(seq, matrix);
        Ok(())
    }

    /// Assemble `X(S)` with the default weights.
    pub fn assemble(&self, s: &CodeSet) -> Result<Assembled, CubeError> {
        self.assemble_weighted(s, &Weights::default())
    }

    pub fn assemble_weighted(&self, s: &CodeSet, weights: &Weights) -> Result<Assembled, CubeError> {
        for c in s.iter() {
            self.check_code(c)?;
        }
        if let Err(w) = is_complete(s) {
            return Err(CubeError::Incomplete {
                lower: w.lower,
                missing: w.missing,
                upper: w.upper,
            });
        }
        let mut vertices = Vec::with_capacity(s.len());
        for c in s.iter() {
            let v = self.vertices.get(c).ok_or_else(|| CubeError::MissingVertex(c.clone()))?;
            vertices.push((c.clone(), v.clone()));
        }
        if let Some((code, report)) = vertices
            .par_iter()
            .map(|(c, v)| (c, v.validate()))
            .find_any(|(_, r)| !r.passed())
        {
            return Err(CubeError::InvalidVertex {
                code: code.clone(),
                report,
            });
        }
        let mut blocks = BTreeMap::new();
        let mut generators = Vec::new();
        let mut codes = Vec::new();
        let n = self.n as i64;
        for (c, v) in &vertices {
            let start = generators.len();
            let (dshift, fshift) = (n - c.rank(), -weights.of(c));
            for g in v.generators() {
                generators.push(Generator {
                    id: format!("{c}/{}", g.id),
                    degree: g.degree + dshift,
                    filtration: g.filtration + fshift,
                    gradings: g.gradings.clone(),
                });
                codes.push(c.clone());
            }
            blocks.insert(c.clone(), start..generators.len());
        }
        let total = generators.len();
        let mut triplets: Vec<(usize, usize, i64)> = Vec::new();
        for (c, v) in &vertices {
            let off = blocks[c].start;
            for (r, col, x) in v.differential().entries() {
                triplets.push((off + r, off + col, x as i64));
            }
        }
        for (seq, m) in &self.seq_maps {
            let (first, last) = (&seq[0], &seq[seq.len() - 1]);
            if !s.contains(first) || !s.contains(last) {
                continue;
            }
            let (src, tgt) = (&blocks[first], &blocks[last]);
            let expected = (tgt.len(), src.len());
            if m.shape() != expected {
                return Err(CubeError::MapShape {
                    sequence: seq_name(seq),
                    expected,
                    got: m.shape(),
                });
            }
            for (r, col, x) in m.entries() {
                triplets.push((tgt.start + r, src.start + col, x as i64));
            }
        }
        let d = SparseMatrix::from_triplets(self.field, total, total, triplets).map_err(ComplexError::from)?;
        let complex = FilteredComplex::new_unchecked(self.field, generators, d);
        let report = complex.validate();
        if !report.passed() {
            let square: Vec<&Violation> = report
                .violations
                .iter()
                .filter(|v| matches!(v, Violation::SquareNonzero { .. }))
                .collect();
            if square.len() == report.violations.len() {
                let defect = complex.differential().mul(complex.differential()).map_err(ComplexError::from)?;
                let pairs: BTreeSet<(Code, Code)> =
                    defect.entries().map(|(r, col, _)| (codes[col].clone(), codes[r].clone())).collect();
                return Err(CubeError::SquareNonzero {
                    defect,
                    pairs: pairs.into_iter().collect(),
                });
            }
            return Err(CubeError::Invalid(report));
        }
        Ok(Assembled {
            complex: Arc::new(complex),
            codes,
            blocks,
        })
    }

    /// Pages of `X({a,b}^n)` together with a check of the page-1 structure:
    /// per code, the survivors count the vertex homology, and `d_1` only
    /// connects immediate successors. Vertex filtrations must all be 0.
    pub fn pages(&self, opts: ReduceOptions) -> Result<(Assembled, Pages), CubeError> {
        let s = CodeSet::full(self.n, Alphabet::Ab);
        let assembled = self.assemble(&s)?;
        for (c, v) in &self.vertices {
            if s.contains(c) && v.generators().iter().any(|g| g.filtration != 0) {
                return Err(CubeError::E1(format!("vertex {c} has nonzero internal filtration")));
            }
        }
        let pages = compute_pages(&assembled.complex, PageLimit::Collapse, opts)?;
        if let Some(page1) = pages.pages.get(1) {
            let code_of = |id: &str| -> Code { id.split('/').next().unwrap_or("").parse().expect("assembled id") };
            let mut per_code: BTreeMap<Code, BTreeMap<i64, usize>> = BTreeMap::new();
            for g in page1.survivors() {
                let c = code_of(&g.id);
                let shift = self.n as i64 - c.rank();
                *per_code.entry(c).or_default().entry(g.degree - shift).or_insert(0) += 1;
            }
            for c in s.iter() {
                let expected: BTreeMap<i64, usize> =
                    self.vertices[c].homology_ranks().into_iter().filter(|&(_, v)| v > 0).collect();
                let got = per_code.remove(c).unwrap_or_default();
                if got != expected {
                    return Err(CubeError::E1(format!(
                        "page 1 at {c} has ranks {got:?}, vertex homology is {expected:?}"
                    )));
                }
            }
            for (r, col, _) in page1.dr.entries() {
                let (from, to) = (code_of(&page1.complex.generator(col).id), code_of(&page1.complex.generator(r).id));
                if !immediate_successors(&from, Alphabet::Ab).contains(&to) {
                    return Err(CubeError::E1(format!("d1 connects {from} to {to}")));
                }
            }
        }
        Ok((assembled, pages))
    }
}

/// For `S = {a,b}^(n-1) x {a,b,c}`: the subcomplex on codes ending in `c` and
/// the quotient on the rest, each checked against a direct assembly.
#[derive(Clone, Debug)]
pub struct ShortExactSequence {
    pub whole: Assembled,
    pub sub: FilteredComplex,
    pub quotient: FilteredComplex,
    pub sub_matches_assembly: bool,
    pub quotient_matches_assembly: bool,
}

pub fn last_position_sequence(cc: &CubeComplex) -> Result<ShortExactSequence, CubeError> {
    let n = cc.n;
    let s: CodeSet = Code::all(n, Alphabet::Abc)
        .into_iter()
        .filter(|c| c.0[..n.saturating_sub(1)].iter().all(|&l| l != Letter::C))
        .collect();
    let whole = cc.assemble(&s)?;
    let sub_idx: Vec<usize> = (0..whole.codes.len())
        .filter(|&k| whole.codes[k].0.last() == Some(&Letter::C))
        .collect();
    let quo_idx: Vec<usize> = (0..whole.codes.len())
        .filter(|&k| whole.codes[k].0.last() != Some(&Letter::C))
        .collect();
    let sub = whole.complex.subcomplex(&sub_idx)?;
    let quotient = whole.complex.quotient(&quo_idx)?;
    let sub_set: CodeSet = s.iter().filter(|c| c.0.last() == Some(&Letter::C)).cloned().collect();
    let quo_set = CodeSet::full(n, Alphabet::Ab);
    let sub_direct = cc.assemble(&sub_set)?;
    let quo_direct = cc.assemble(&quo_set)?;
    Ok(ShortExactSequence {
        sub_matches_assembly: *sub_direct.complex == sub,
        quotient_matches_assembly: *quo_direct.complex == quotient,
        whole,
        sub,
        quotient,
    })
}
