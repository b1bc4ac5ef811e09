//! Finitely generated, filtered, graded chain complexes over a prime field.
//!
//! The differential lowers homological degree by one and never raises the
//! filtration index. Chain maps and homotopies carry their own degree shift
//! and a filtration order; mapping cones place the source block above the
//! target block in homological degree.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{Field, LinalgError, SparseMatrix, SparseVec};

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid complex: {0}")]
    Invalid(ValidationReport),
    #[error("field mismatch: GF({0}) vs GF({1})")]
    FieldMismatch(u32, u32),
    #[error("{what}: expected a {expected:?} matrix, got {got:?}")]
    Shape {
        what: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("invalid map: {0:?}")]
    InvalidMap(Vec<MapViolation>),
    #[error("mapping cone needs a filtration-preserving map (filtration shift {0})")]
    FiltrationShift(i64),
    #[error("composite differs from dH + Hd ({} nonzero defect entries)", .0.nnz())]
    HomotopyDefect(SparseMatrix),
    #[error("generator subset is not closed under the differential: {from} -> {to}")]
    NotClosed { from: String, to: String },
    #[error("unknown generator id {0:?}")]
    UnknownGenerator(String),
}

/// One basis element of a free complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub id: String,
    pub degree: i64,
    pub filtration: i64,
    /// Extra integer gradings such as `quantum`.
    pub gradings: BTreeMap<String, i64>,
}

impl Generator {
    pub fn new(id: impl Into<String>, degree: i64, filtration: i64) -> Self {
        Generator {
            id: id.into(),
            degree,
            filtration,
            gradings: BTreeMap::new(),
        }
    }

    pub fn with_grading(mut self, name: impl Into<String>, value: i64) -> Self {
        self.gradings.insert(name.into(), value);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateId(String),
    Shape { expected: (usize, usize), got: (usize, usize) },
    FieldMismatch { complex: u32, matrix: u32 },
    /// `from` hits `to` but `to` is not one degree lower.
    Degree { from: String, to: String },
    /// `from` hits `to` in a higher filtration level.
    Filtration { from: String, to: String },
    /// Nonzero entry of the squared differential.
    SquareNonzero { from: String, to: String, coeff: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId(id) => write!(f, "duplicate generator id {id:?}"),
            Violation::Shape { expected, got } => write!(f, "differential shape {got:?}, expected {expected:?}"),
            Violation::FieldMismatch { complex, matrix } => {
                write!(f, "differential over GF({matrix}) in a complex over GF({complex})")
            }
            Violation::Degree { from, to } => write!(f, "degree violation: d({from}) hits {to}"),
            Violation::Filtration { from, to } => write!(f, "filtration violation: d({from}) hits {to}"),
            Violation::SquareNonzero { from, to, coeff } => {
                write!(f, "d^2 != 0: <d^2({from}), {to}> = {coeff}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "pass");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A free chain complex with per-generator degree and filtration. Column `j`
/// of the differential is the boundary of generator `j`.
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    field: Field,
    generators: Vec<Generator>,
    differential: SparseMatrix,
    index: HashMap<String, usize>,
}

impl PartialEq for FilteredComplex {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.generators == other.generators && self.differential == other.differential
    }
}

impl Eq for FilteredComplex {}

impl FilteredComplex {
    /// Build and validate.
    pub fn new(field: Field, generators: Vec<Generator>, differential: SparseMatrix) -> Result<Self, ComplexError> {
        let c = Self::new_unchecked(field, generators, differential);
        let report = c.validate();
        if report.passed() {
            Ok(c)
        } else {
            Err(ComplexError::Invalid(report))
        }
    }

    /// Build without checking the complex invariants; see [`FilteredComplex::validate`].
    pub fn new_unchecked(field: Field, generators: Vec<Generator>, differential: SparseMatrix) -> Self {
        let mut index = HashMap::with_capacity(generators.len());
        for (k, g) in generators.iter().enumerate() {
            index.entry(g.id.clone()).or_insert(k);
        }
        FilteredComplex {
            field,
            generators,
            differential,
            index,
        }
    }

    pub fn empty(field: Field) -> Self {
        Self::new_unchecked(field, Vec::new(), SparseMatrix::zeros(field, 0, 0))
    }

    /// Complex with zero differential.
    pub fn free(field: Field, generators: Vec<Generator>) -> Result<Self, ComplexError> {
        let n = generators.len();
        Self::new(field, generators, SparseMatrix::zeros(field, n, n))
    }

    /// Build from `(from_id, to_id, coeff)` triplets, meaning `<d from, to> = coeff`.
    pub fn from_edges<'a>(
        field: Field,
        generators: Vec<Generator>,
        edges: impl IntoIterator<Item = (&'a str, &'a str, i64)>,
    ) -> Result<Self, ComplexError> {
        let n = generators.len();
        let shell = Self::new_unchecked(field, generators, SparseMatrix::zeros(field, n, n));
        let mut triplets = Vec::new();
        for (from, to, coeff) in edges {
            let c = shell.require(from)?;
            let r = shell.require(to)?;
            triplets.push((r, c, coeff));
        }
        let d = SparseMatrix::from_triplets(field, n, n, triplets)?;
        Self::new(field, shell.generators, d)
    }

    /// Every invariant violation, each with a witnessing entry.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut seen = HashSet::new();
        for g in &self.generators {
            if !seen.insert(g.id.as_str()) {
                violations.push(Violation::DuplicateId(g.id.clone()));
            }
        }
        let n = self.generators.len();
        if self.differential.shape() != (n, n) {
            violations.push(Violation::Shape {
                expected: (n, n),
                got: self.differential.shape(),
            });
            return ValidationReport { violations };
        }
        if self.differential.field() != self.field {
            violations.push(Violation::FieldMismatch {
                complex: self.field.characteristic(),
                matrix: self.differential.field().characteristic(),
            });
            return ValidationReport { violations };
        }
        for (r, c, _) in self.differential.entries() {
            let (src, dst) = (&self.generators[c], &self.generators[r]);
            if dst.degree != src.degree - 1 {
                violations.push(Violation::Degree {
                    from: src.id.clone(),
                    to: dst.id.clone(),
                });
            }
            if dst.filtration > src.filtration {
                violations.push(Violation::Filtration {
                    from: src.id.clone(),
                    to: dst.id.clone(),
                });
            }
        }
        let sq = self.differential.mul(&self.differential).expect("square matrix");
        for (r, c, v) in sq.entries() {
            violations.push(Violation::SquareNonzero {
                from: self.generators[c].id.clone(),
                to: self.generators[r].id.clone(),
                coeff: v,
            });
        }
        ValidationReport { violations }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator(&self, k: usize) -> &Generator {
        &self.generators[k]
    }

    pub fn differential(&self) -> &SparseMatrix {
        &self.differential
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize, ComplexError> {
        self.index_of(id).ok_or_else(|| ComplexError::UnknownGenerator(id.to_owned()))
    }

    /// Indices of the generators in degree `d`, in stored order.
    pub fn indices_in_degree(&self, d: i64) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.generators[k].degree == d).collect()
    }

    pub fn degrees(&self) -> Vec<i64> {
        let mut ds: Vec<i64> = self.generators.iter().map(|g| g.degree).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    /// Smallest and largest filtration index, if nonempty.
    pub fn filtration_range(&self) -> Option<(i64, i64)> {
        let lo = self.generators.iter().map(|g| g.filtration).min()?;
        let hi = self.generators.iter().map(|g| g.filtration).max()?;
        Some((lo, hi))
    }

    /// Block of the differential from degree `d` to degree `d - 1`.
    pub fn boundary_block(&self, d: i64) -> SparseMatrix {
        let cols = self.indices_in_degree(d);
        let rows = self.indices_in_degree(d - 1);
        self.differential.select(&rows, &cols)
    }

    /// Betti numbers per degree (every degree carrying a generator is listed).
    pub fn homology_ranks(&self) -> BTreeMap<i64, usize> {
        let mut ranks_by_degree: HashMap<i64, usize> = HashMap::new();
        let degrees = self.degrees();
        for &d in &degrees {
            ranks_by_degree.insert(d, self.boundary_block(d).rank());
        }
        degrees
            .iter()
            .map(|&d| {
                let n = self.indices_in_degree(d).len();
                let out = ranks_by_degree[&d];
                let inc = ranks_by_degree.get(&(d + 1)).copied().unwrap_or(0);
                (d, n - out - inc)
            })
            .collect()
    }

    pub fn total_homology_rank(&self) -> usize {
        self.homology_ranks().values().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.generators
            .iter()
            .map(|g| if g.degree.rem_euclid(2) == 0 { 1 } else { -1 })
            .sum()
    }

    /// The dual complex: same ids, negated gradings, transposed differential.
    pub fn dualize(&self) -> FilteredComplex {
        let generators = self
            .generators
            .iter()
            .map(|g| Generator {
                id: g.id.clone(),
                degree: -g.degree,
                filtration: -g.filtration,
                gradings: g.gradings.iter().map(|(k, v)| (k.clone(), -v)).collect(),
            })
            .collect();
        FilteredComplex::new_unchecked(self.field, generators, self.differential.transpose())
    }

    /// Same complex with all homological degrees shifted by `shift`.
    pub fn shift_degree(&self, shift: i64) -> FilteredComplex {
        let mut c = self.clone();
        for g in &mut c.generators {
            g.degree += shift;
        }
        c
    }

    pub fn shift_filtration(&self, shift: i64) -> FilteredComplex {
        let mut c = self.clone();
        for g in &mut c.generators {
            g.filtration += shift;
        }
        c
    }

    /// Prefix every id with `prefix/`.
    pub fn namespaced(&self, prefix: &str) -> FilteredComplex {
        let generators = self
            .generators
            .iter()
            .map(|g| Generator {
                id: format!("{prefix}/{}", g.id),
                ..g.clone()
            })
            .collect();
        FilteredComplex::new_unchecked(self.field, generators, self.differential.clone())
    }

    /// The associated graded complex: only the filtration-preserving part of
    /// the differential is kept.
    pub fn associated_graded(&self) -> FilteredComplex {
        let gens = &self.generators;
        let d = self
            .differential
            .filter(|r, c| gens[r].filtration == gens[c].filtration);
        FilteredComplex::new_unchecked(self.field, self.generators.clone(), d)
    }

    /// Direct sum. With two or more summands ids become `k/id`; a single
    /// summand is returned unchanged.
    pub fn direct_sum(field: Field, summands: &[FilteredComplex]) -> Result<FilteredComplex, ComplexError> {
        for c in summands {
            if c.field != field {
                return Err(ComplexError::FieldMismatch(field.characteristic(), c.field.characteristic()));
            }
        }
        if summands.len() == 1 {
            return Ok(summands[0].clone());
        }
        let sizes: Vec<usize> = summands.iter().map(FilteredComplex::len).collect();
        let blocks: Vec<Vec<Option<&SparseMatrix>>> = (0..summands.len())
            .map(|i| (0..summands.len()).map(|j| (i == j).then(|| &summands[i].differential)).collect())
            .collect();
        let d = SparseMatrix::block(field, &sizes, &sizes, &blocks)?;
        let generators = summands
            .iter()
            .enumerate()
            .flat_map(|(k, c)| c.namespaced(&k.to_string()).generators)
            .collect();
        Ok(FilteredComplex::new_unchecked(field, generators, d))
    }

    /// The complex spanned by `indices`, which must be closed under the differential.
    pub fn subcomplex(&self, indices: &[usize]) -> Result<FilteredComplex, ComplexError> {
        let inside: HashSet<usize> = indices.iter().copied().collect();
        for &c in indices {
            if let Some(&(r, _)) = self.differential.column(c).iter().find(|(r, _)| !inside.contains(r)) {
                return Err(ComplexError::NotClosed {
                    from: self.generators[c].id.clone(),
                    to: self.generators[r].id.clone(),
                });
            }
        }
        Ok(self.restrict(indices))
    }

    /// The quotient by the subcomplex spanned by the complement of `indices`.
    pub fn quotient(&self, indices: &[usize]) -> Result<FilteredComplex, ComplexError> {
        let keep: HashSet<usize> = indices.iter().copied().collect();
        let complement: Vec<usize> = (0..self.len()).filter(|k| !keep.contains(k)).collect();
        self.subcomplex(&complement)?;
        Ok(self.restrict(indices))
    }

    fn restrict(&self, indices: &[usize]) -> FilteredComplex {
        let generators = indices.iter().map(|&k| self.generators[k].clone()).collect();
        FilteredComplex::new_unchecked(self.field, generators, self.differential.select(indices, indices))
    }
}

/// Sign convention of a map between complexes: `d f = f d` or `d f = -f d`.
/// The two agree over GF(2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MapConvention {
    #[default]
    Chain,
    AntiChain,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapViolation {
    Shape { expected: (usize, usize), got: (usize, usize) },
    Field,
    Degree { from: String, to: String },
    Filtration { from: String, to: String },
    /// Nonzero entries of `d f - (+/-) f d`.
    NotChainMap { defect_entries: usize },
}

/// A homogeneous map between two complexes.
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub source: Arc<FilteredComplex>,
    pub target: Arc<FilteredComplex>,
    pub matrix: SparseMatrix,
    /// Homological degree shift: `x` in degree `d` maps into degree `d + degree`.
    pub degree: i64,
    /// Maximum filtration increase.
    pub filtration_shift: i64,
    pub convention: MapConvention,
}

impl ChainMap {
    /// Degree-0, filtration-preserving chain map, validated.
    pub fn new(
        source: Arc<FilteredComplex>,
        target: Arc<FilteredComplex>,
        matrix: SparseMatrix,
    ) -> Result<Self, ComplexError> {
        Self::with_options(source, target, matrix, 0, 0, MapConvention::Chain)
    }

    pub fn with_options(
        source: Arc<FilteredComplex>,
        target: Arc<FilteredComplex>,
        matrix: SparseMatrix,
        degree: i64,
        filtration_shift: i64,
        convention: MapConvention,
    ) -> Result<Self, ComplexError> {
        let map = ChainMap {
            source,
            target,
            matrix,
            degree,
            filtration_shift,
            convention,
        };
        let violations = map.check();
        if violations.is_empty() {
            Ok(map)
        } else {
            Err(ComplexError::InvalidMap(violations))
        }
    }

    pub fn unchecked(source: Arc<FilteredComplex>, target: Arc<FilteredComplex>, matrix: SparseMatrix) -> Self {
        ChainMap {
            source,
            target,
            matrix,
            degree: 0,
            filtration_shift: 0,
            convention: MapConvention::Chain,
        }
    }

    pub fn identity(c: Arc<FilteredComplex>) -> Self {
        let m = SparseMatrix::identity(c.field(), c.len());
        ChainMap::unchecked(c.clone(), c, m)
    }

    pub fn zero(source: Arc<FilteredComplex>, target: Arc<FilteredComplex>) -> Self {
        let m = SparseMatrix::zeros(source.field(), target.len(), source.len());
        ChainMap::unchecked(source, target, m)
    }

    /// `d_target f - sign * f d_source`, where sign is +1 for chain maps and -1
    /// for anti-chain maps.
    pub fn defect(&self) -> Result<SparseMatrix, ComplexError> {
        let left = self.target.differential().mul(&self.matrix)?;
        let right = self.matrix.mul(self.source.differential())?;
        Ok(match self.convention {
            MapConvention::Chain => left.sub(&right)?,
            MapConvention::AntiChain => left.add(&right)?,
        })
    }

    pub fn check(&self) -> Vec<MapViolation> {
        check_homogeneous(
            &self.source,
            &self.target,
            &self.matrix,
            self.degree,
            self.filtration_shift,
        )
        .into_iter()
        .chain(
            self.defect()
                .ok()
                .filter(|d| !d.is_zero())
                .map(|d| MapViolation::NotChainMap { defect_entries: d.nnz() }),
        )
        .collect()
    }

    /// The filtration-preserving part of the map.
    pub fn graded_part(&self) -> SparseMatrix {
        let (s, t) = (&self.source, &self.target);
        self.matrix
            .filter(|r, c| t.generator(r).filtration == s.generator(c).filtration)
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &ChainMap) -> Result<ChainMap, ComplexError> {
        let matrix = self.matrix.mul(&first.matrix)?;
        let convention = if self.convention == first.convention {
            MapConvention::Chain
        } else {
            MapConvention::AntiChain
        };
        Ok(ChainMap {
            source: first.source.clone(),
            target: self.target.clone(),
            matrix,
            degree: self.degree + first.degree,
            filtration_shift: self.filtration_shift + first.filtration_shift,
            convention,
        })
    }
}

fn check_homogeneous(
    source: &FilteredComplex,
    target: &FilteredComplex,
    matrix: &SparseMatrix,
    degree: i64,
    filtration_shift: i64,
) -> Vec<MapViolation> {
    let mut out = Vec::new();
    if matrix.shape() != (target.len(), source.len()) {
        out.push(MapViolation::Shape {
            expected: (target.len(), source.len()),
            got: matrix.shape(),
        });
        return out;
    }
    if matrix.field() != source.field() || matrix.field() != target.field() {
        out.push(MapViolation::Field);
        return out;
    }
    for (r, c, _) in matrix.entries() {
        let (x, y) = (source.generator(c), target.generator(r));
        if y.degree != x.degree + degree {
            out.push(MapViolation::Degree {
                from: x.id.clone(),
                to: y.id.clone(),
            });
        }
        if y.filtration > x.filtration + filtration_shift {
            out.push(MapViolation::Filtration {
                from: x.id.clone(),
                to: y.id.clone(),
            });
        }
    }
    out
}

/// A map raising homological degree (by one unless stated otherwise), used
/// as a chain homotopy.
#[derive(Clone, Debug)]
pub struct Homotopy {
    pub source: Arc<FilteredComplex>,
    pub target: Arc<FilteredComplex>,
    pub matrix: SparseMatrix,
    pub degree: i64,
    /// Maximum filtration increase.
    pub order: i64,
}

impl Homotopy {
    pub fn new(
        source: Arc<FilteredComplex>,
        target: Arc<FilteredComplex>,
        matrix: SparseMatrix,
        order: i64,
    ) -> Result<Self, ComplexError> {
        let h = Homotopy {
            source,
            target,
            matrix,
            degree: 1,
            order,
        };
        let v = h.check();
        if v.is_empty() {
            Ok(h)
        } else {
            Err(ComplexError::InvalidMap(v))
        }
    }

    pub fn zero(source: Arc<FilteredComplex>, target: Arc<FilteredComplex>) -> Self {
        let matrix = SparseMatrix::zeros(source.field(), target.len(), source.len());
        Homotopy {
            source,
            target,
            matrix,
            degree: 1,
            order: 0,
        }
    }

    pub fn check(&self) -> Vec<MapViolation> {
        check_homogeneous(&self.source, &self.target, &self.matrix, self.degree, self.order)
    }

    /// `d H + H d`.
    pub fn boundary(&self) -> Result<SparseMatrix, ComplexError> {
        let a = self.target.differential().mul(&self.matrix)?;
        let b = self.matrix.mul(self.source.differential())?;
        Ok(a.add(&b)?)
    }
}

/// Mapping cone together with its short exact sequence `B -> MC(f) -> A`.
#[derive(Clone, Debug)]
pub struct Cone {
    pub complex: Arc<FilteredComplex>,
    /// `B -> MC(f)`.
    pub inclusion: ChainMap,
    /// `MC(f) -> A`, of degree `-(1 + f.degree)`.
    pub projection: ChainMap,
}

/// Mapping cone of `f: A -> B` on `A ⊕ B`, A-part first, with differential
/// `[[dA, 0], [f, dB]]`. A-part ids become `src/id` and B-part ids `tgt/id`;
/// A-part degrees are raised by `1 + f.degree`, filtrations are unchanged.
/// For a chain map (as opposed to an anti-chain map) at odd characteristic
/// the A block is `-dA`.
pub fn mapping_cone(f: &ChainMap) -> Result<Cone, ComplexError> {
    let (a, b) = (&*f.source, &*f.target);
    if a.field() != b.field() {
        return Err(ComplexError::FieldMismatch(a.field().characteristic(), b.field().characteristic()));
    }
    if f.filtration_shift != 0 {
        return Err(ComplexError::FiltrationShift(f.filtration_shift));
    }
    let violations = f.check();
    if !violations.is_empty() {
        return Err(ComplexError::InvalidMap(violations));
    }
    let field = a.field();
    let shift = 1 + f.degree;
    let da = match f.convention {
        MapConvention::Chain => a.differential().neg(),
        MapConvention::AntiChain => a.differential().clone(),
    };
    let d = SparseMatrix::block(
        field,
        &[a.len(), b.len()],
        &[a.len(), b.len()],
        &[vec![Some(&da), None], vec![Some(&f.matrix), Some(b.differential())]],
    )?;
    let generators: Vec<Generator> = a
        .generators()
        .iter()
        .map(|g| Generator {
            id: format!("src/{}", g.id),
            degree: g.degree + shift,
            ..g.clone()
        })
        .chain(b.generators().iter().map(|g| Generator {
            id: format!("tgt/{}", g.id),
            ..g.clone()
        }))
        .collect();
    let cone = Arc::new(FilteredComplex::new(field, generators, d)?);
    let (na, nb) = (a.len(), b.len());
    let incl = SparseMatrix::from_triplets(field, na + nb, nb, (0..nb).map(|k| (na + k, k, 1)))?;
    let proj = SparseMatrix::from_triplets(field, na, na + nb, (0..na).map(|k| (k, k, 1)))?;
    let inclusion = ChainMap::with_options(f.target.clone(), cone.clone(), incl, 0, 0, MapConvention::Chain)?;
    let proj_convention = match f.convention {
        MapConvention::Chain => MapConvention::AntiChain,
        MapConvention::AntiChain => MapConvention::Chain,
    };
    let projection = ChainMap::with_options(cone.clone(), f.source.clone(), proj, -shift, 0, proj_convention)?;
    Ok(Cone {
        complex: cone,
        inclusion,
        projection,
    })
}

/// Iterated mapping cone with its short exact sequence `A3 -> M -> MC(f1)`.
#[derive(Clone, Debug)]
pub struct IteratedCone {
    pub complex: Arc<FilteredComplex>,
    pub first_cone: Cone,
    /// `A3 -> M`.
    pub inclusion: ChainMap,
    /// `M -> MC(f1)`.
    pub projection: ChainMap,
}

/// Iterated cone of `A1 -f1-> A2 -f2-> A3` with `f2 f1 = dH + Hd`, on
/// `A1 ⊕ A2 ⊕ A3` with differential `[[d, 0, 0], [f1, d, 0], [-H, f2, d]]`.
/// Ids become `1/id`, `2/id`, `3/id`.
pub fn iterated_mapping_cone(f1: &ChainMap, f2: &ChainMap, h: &Homotopy) -> Result<IteratedCone, ComplexError> {
    let field = f1.source.field();
    for c in [&f1.target, &f2.source, &f2.target, &h.source, &h.target] {
        if c.field() != field {
            return Err(ComplexError::FieldMismatch(field.characteristic(), c.field().characteristic()));
        }
    }
    let (a1, a2, a3) = (&*f1.source, &*f1.target, &*f2.target);
    let expect = |what, m: &SparseMatrix, rows: usize, cols: usize| {
        if m.shape() == (rows, cols) {
            Ok(())
        } else {
            Err(ComplexError::Shape {
                what,
                expected: (rows, cols),
                got: m.shape(),
            })
        }
    };
    expect("f2", &f2.matrix, a3.len(), a2.len())?;
    expect("H", &h.matrix, a3.len(), a1.len())?;
    let composite = f2.matrix.mul(&f1.matrix)?;
    let defect = composite.sub(&h.boundary()?)?;
    if !defect.is_zero() {
        return Err(ComplexError::HomotopyDefect(defect));
    }
    let first_cone = mapping_cone(&ChainMap {
        convention: MapConvention::AntiChain,
        ..f1.clone()
    })
    .or_else(|_| mapping_cone(f1))?;
    let shift2 = 1 + f2.degree;
    let shift1 = 1 + f1.degree + shift2;
    let minus_h = h.matrix.neg();
    let (n1, n2, n3) = (a1.len(), a2.len(), a3.len());
    let d = SparseMatrix::block(
        field,
        &[n1, n2, n3],
        &[n1, n2, n3],
        &[
            vec![Some(a1.differential()), None, None],
            vec![Some(&f1.matrix), Some(a2.differential()), None],
            vec![Some(&minus_h), Some(&f2.matrix), Some(a3.differential())],
        ],
    )?;
    let relabel = |c: &FilteredComplex, tag: &str, shift: i64| -> Vec<Generator> {
        c.generators()
            .iter()
            .map(|g| Generator {
                id: format!("{tag}/{}", g.id),
                degree: g.degree + shift,
                ..g.clone()
            })
            .collect()
    };
    let generators = [relabel(a1, "1", shift1), relabel(a2, "2", shift2), relabel(a3, "3", 0)].concat();
    let complex = Arc::new(FilteredComplex::new(field, generators, d)?);
    let incl = SparseMatrix::from_triplets(field, n1 + n2 + n3, n3, (0..n3).map(|k| (n1 + n2 + k, k, 1)))?;
    let proj = SparseMatrix::from_triplets(field, n1 + n2, n1 + n2 + n3, (0..n1 + n2).map(|k| (k, k, 1)))?;
    let inclusion = ChainMap::unchecked(f2.target.clone(), complex.clone(), incl);
    let projection = ChainMap {
        degree: -shift2,
        ..ChainMap::unchecked(complex.clone(), first_cone.complex.clone(), proj)
    };
    Ok(IteratedCone {
        complex,
        first_cone,
        inclusion,
        projection,
    })
}

/// The transpose map `F*: B* -> A*` between dual complexes.
pub fn dual_map(f: &ChainMap) -> ChainMap {
    ChainMap {
        source: Arc::new(f.target.dualize()),
        target: Arc::new(f.source.dualize()),
        matrix: f.matrix.transpose(),
        degree: f.degree,
        filtration_shift: f.filtration_shift,
        convention: f.convention,
    }
}

/// Comparison of `MC(F*)` with `MC(F)*` under `src/b <-> tgt/b`, `tgt/a <-> src/a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualConeReport {
    pub differential_equal: bool,
    pub filtrations_equal: bool,
    /// `degree in MC(F*) - degree in MC(F)*`, when it is the same for every generator.
    pub degree_shift: Option<i64>,
}

pub fn dual_cone_comparison(f: &ChainMap) -> Result<DualConeReport, ComplexError> {
    let of_dual = mapping_cone(&dual_map(f))?.complex;
    let dual_of = mapping_cone(f)?.complex.dualize();
    let swap = |id: &str| -> String {
        match id.split_once('/') {
            Some(("src", rest)) => format!("tgt/{rest}"),
            Some(("tgt", rest)) => format!("src/{rest}"),
            _ => id.to_owned(),
        }
    };
    let mut perm = Vec::with_capacity(of_dual.len());
    for g in of_dual.generators() {
        perm.push(dual_of.require(&swap(&g.id))?);
    }
    let reordered = dual_of.differential().select(&perm, &perm);
    let mut shifts = perm
        .iter()
        .enumerate()
        .map(|(k, &j)| of_dual.generator(k).degree - dual_of.generator(j).degree);
    let first = shifts.next();
    let degree_shift = match first {
        Some(s) if shifts.all(|t| t == s) => Some(s),
        Some(_) => None,
        None => Some(0),
    };
    Ok(DualConeReport {
        differential_equal: perm.len() == dual_of.len() && reordered == *of_dual.differential(),
        filtrations_equal: perm
            .iter()
            .enumerate()
            .all(|(k, &j)| of_dual.generator(k).filtration == dual_of.generator(j).filtration),
        degree_shift,
    })
}

/// A basis of the cycles in degree `d`, as vectors in full coordinates.
fn cycle_basis(c: &FilteredComplex, d: i64) -> Vec<SparseVec> {
    let cols = c.indices_in_degree(d);
    let block = c.boundary_block(d);
    block
        .kernel_basis()
        .into_iter()
        .map(|v| v.into_iter().map(|(k, x)| (cols[k], x)).collect())
        .collect()
}

/// Rank of the map induced on homology in each source degree `d`
/// (`H_d(source) -> H_{d + degree}(target)`).
pub fn homology_map_ranks(f: &ChainMap) -> BTreeMap<i64, usize> {
    let (s, t) = (&*f.source, &*f.target);
    let field = s.field();
    let mut out = BTreeMap::new();
    for d in s.degrees() {
        let cycles = cycle_basis(s, d);
        let e = d + f.degree;
        let boundaries = t.boundary_block(e + 1);
        let rows = t.indices_in_degree(e);
        if rows.is_empty() {
            out.insert(d, 0);
            continue;
        }
        let z = SparseMatrix::from_columns(field, s.len(), cycles).expect("cycle indices in range");
        let image = f.matrix.mul(&z).expect("composable").select(&rows, &(0..z.cols()).collect::<Vec<_>>());
        let both = SparseMatrix::block(
            field,
            &[rows.len()],
            &[image.cols(), boundaries.cols()],
            &[vec![Some(&image), Some(&boundaries)]],
        )
        .expect("blocks share row count");
        out.insert(d, both.rank() - boundaries.rank());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiIsoReport {
    /// Per source degree: (dim H_d(source), dim H_{d+s}(target), rank of induced map).
    pub degrees: BTreeMap<i64, (usize, usize, usize)>,
    pub is_quasi_isomorphism: bool,
}

/// Quasi-isomorphism test by ranks: the induced map must have full rank
/// equal to both homology dimensions in every degree.
pub fn quasi_isomorphism(f: &ChainMap) -> QuasiIsoReport {
    let hs = f.source.homology_ranks();
    let ht = f.target.homology_ranks();
    let ranks = homology_map_ranks(f);
    let mut degrees = BTreeMap::new();
    let mut ok = true;
    let mut covered = HashSet::new();
    for (&d, &r) in &ranks {
        let a = hs.get(&d).copied().unwrap_or(0);
        let b = ht.get(&(d + f.degree)).copied().unwrap_or(0);
        covered.insert(d + f.degree);
        ok &= a == r && b == r;
        degrees.insert(d, (a, b, r));
    }
    for (&e, &b) in &ht {
        if !covered.contains(&e) && b != 0 {
            ok = false;
            degrees.insert(e - f.degree, (0, b, 0));
        }
    }
    QuasiIsoReport {
        degrees,
        is_quasi_isomorphism: ok,
    }
}
