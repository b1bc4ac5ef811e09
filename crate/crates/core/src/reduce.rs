//! Spectral-sequence pages by cancellation.
//!
//! A pair `(x_i, x_j)` with `<d x_i, x_j> = λ != 0` is cancelled by the
//! Gaussian-elimination step
//!
//! ```text
//! d'(y_k) = d x_k - (b_k / λ) d x_i   (rows i, j dropped), b_k = <d x_k, x_j>
//! ι(y_k)  = x_k - (b_k / λ) x_i
//! π(x_j)  = -Σ (a_l / λ) y_l,          d x_i = λ x_j + Σ a_l x_l
//! H(x_j)  = -x_i / λ
//! ```
//!
//! Stage `r` cancels every component that drops filtration by exactly `r`;
//! the complex left after stages `0..r` is the page `E^r` with `d_r` its
//! drop-`r` part.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::complex::{mapping_cone, ChainMap, ComplexError, FilteredComplex, Generator, MapConvention};
use crate::linalg::{axpy, Field, SparseMatrix, SparseVec};

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("<d {from}, {to}> is zero; cannot cancel")]
    ZeroPairing { from: String, to: String },
    #[error("cannot cancel ({from}, {to}): {detail}")]
    Illegal {
        from: String,
        to: String,
        /// 1: a term of d(from) sits above `to`; 2: a generator below `from` hits `to`.
        condition: u8,
        detail: String,
    },
    #[error("stage {stage} expects no components of drop < {stage}, but d({from}) hits {to} with drop {drop}")]
    ShortComponent {
        stage: i64,
        from: String,
        to: String,
        drop: i64,
    },
    #[error("stage mismatch: {0}")]
    StageMismatch(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CancelledPair {
    pub from: String,
    pub to: String,
    /// Filtration drop of the cancelled arrow.
    pub length: i64,
}

/// One homotopy equivalence `before <-> after` with its witnesses.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub before: Arc<FilteredComplex>,
    pub after: Arc<FilteredComplex>,
    /// π: before -> after.
    pub proj: SparseMatrix,
    /// ι: after -> before.
    pub incl: SparseMatrix,
    /// H on `before`, when tracked.
    pub htpy: Option<SparseMatrix>,
    pub cancelled: Vec<CancelledPair>,
}

/// Outcome of [`Reduction::check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionReport {
    pub proj_incl_identity: bool,
    /// `ι π - 1 = d H + H d`; `None` when H was not tracked.
    pub homotopy_identity: Option<bool>,
    pub proj_chain_map: bool,
    pub incl_chain_map: bool,
    /// Largest filtration increase of π, ι and H.
    pub proj_order: i64,
    pub incl_order: i64,
    pub htpy_order: Option<i64>,
    pub max_length: i64,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.proj_incl_identity
            && self.homotopy_identity != Some(false)
            && self.proj_chain_map
            && self.incl_chain_map
            && self.proj_order <= 0
            && self.incl_order <= 0
            && self.htpy_order.is_none_or(|o| o <= self.max_length.max(0))
    }
}

impl fmt::Display for ReductionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pi*iota=1: {}, iota*pi-1=dH+Hd: {}, pi chain: {}, iota chain: {}, orders (pi, iota, H): ({}, {}, {}), max length {}",
            self.proj_incl_identity,
            self.homotopy_identity.map_or("untracked".to_string(), |b| b.to_string()),
            self.proj_chain_map,
            self.incl_chain_map,
            self.proj_order,
            self.incl_order,
            self.htpy_order.map_or("-".to_string(), |o| o.to_string()),
            self.max_length
        )
    }
}

/// Largest `F(target) - F(source)` over the nonzero entries, or `i64::MIN` if none.
fn filtration_order(m: &SparseMatrix, source: &FilteredComplex, target: &FilteredComplex) -> i64 {
    m.entries()
        .map(|(r, c, _)| target.generator(r).filtration - source.generator(c).filtration)
        .max()
        .unwrap_or(i64::MIN)
}

impl Reduction {
    pub fn identity(c: Arc<FilteredComplex>) -> Reduction {
        let field = c.field();
        let n = c.len();
        Reduction {
            before: c.clone(),
            after: c,
            proj: SparseMatrix::identity(field, n),
            incl: SparseMatrix::identity(field, n),
            htpy: Some(SparseMatrix::zeros(field, n, n)),
            cancelled: Vec::new(),
        }
    }

    /// `next` after `self`: π = π₂π₁, ι = ι₁ι₂, H = H₁ + ι₁H₂π₁.
    pub fn then(&self, next: &Reduction) -> Result<Reduction, ReduceError> {
        if *self.after != *next.before {
            return Err(ReduceError::StageMismatch(
                "second reduction does not start where the first ends".into(),
            ));
        }
        let proj = next.proj.mul(&self.proj).map_err(ComplexError::from)?;
        let incl = self.incl.mul(&next.incl).map_err(ComplexError::from)?;
        let htpy = match (&self.htpy, &next.htpy) {
            (Some(h1), Some(h2)) => {
                let inner = self.incl.mul(h2).and_then(|m| m.mul(&self.proj)).map_err(ComplexError::from)?;
                Some(h1.add(&inner).map_err(ComplexError::from)?)
            }
            _ => None,
        };
        Ok(Reduction {
            before: self.before.clone(),
            after: next.after.clone(),
            proj,
            incl,
            htpy,
            cancelled: self.cancelled.iter().chain(&next.cancelled).cloned().collect(),
        })
    }

    pub fn max_length(&self) -> i64 {
        self.cancelled.iter().map(|p| p.length).max().unwrap_or(0)
    }

    /// Check every witness identity exactly.
    pub fn check(&self) -> ReductionReport {
        let (b, a) = (&*self.before, &*self.after);
        let field = b.field();
        let proj_incl_identity = self
            .proj
            .mul(&self.incl)
            .map(|m| m == SparseMatrix::identity(field, a.len()))
            .unwrap_or(false);
        let homotopy_identity = self.htpy.as_ref().map(|h| {
            let lhs = self
                .incl
                .mul(&self.proj)
                .and_then(|m| m.sub(&SparseMatrix::identity(field, b.len())));
            let rhs = b
                .differential()
                .mul(h)
                .and_then(|m| h.mul(b.differential()).and_then(|n| m.add(&n)));
            matches!((lhs, rhs), (Ok(l), Ok(r)) if l == r)
        });
        let commutes = |m: &SparseMatrix, src: &FilteredComplex, tgt: &FilteredComplex| {
            let l = tgt.differential().mul(m);
            let r = m.mul(src.differential());
            matches!((l, r), (Ok(l), Ok(r)) if l == r)
        };
        ReductionReport {
            proj_incl_identity,
            homotopy_identity,
            proj_chain_map: commutes(&self.proj, b, a),
            incl_chain_map: commutes(&self.incl, a, b),
            proj_order: filtration_order(&self.proj, b, a),
            incl_order: filtration_order(&self.incl, a, b),
            htpy_order: self.htpy.as_ref().map(|h| filtration_order(h, b, b)),
            max_length: self.max_length(),
        }
    }
}

/// Mutable elimination state over the index space of the starting complex.
struct Workspace {
    field: Field,
    start: Arc<FilteredComplex>,
    alive: Vec<bool>,
    cols: Vec<SparseVec>,
    /// For each row, the columns with a nonzero entry there.
    rows: Vec<BTreeSet<usize>>,
    /// Row `t` of the accumulated π, for alive `t`.
    proj_rows: Vec<SparseVec>,
    /// Column `t` of the accumulated ι, for alive `t`.
    incl_cols: Vec<SparseVec>,
    htpy_cols: Option<Vec<SparseVec>>,
    cancelled: Vec<CancelledPair>,
}

impl Workspace {
    fn new(c: Arc<FilteredComplex>, track_htpy: bool) -> Self {
        let n = c.len();
        let cols: Vec<SparseVec> = (0..n).map(|k| c.differential().column(k).to_vec()).collect();
        let mut rows = vec![BTreeSet::new(); n];
        for (k, col) in cols.iter().enumerate() {
            for &(r, _) in col {
                rows[r].insert(k);
            }
        }
        Workspace {
            field: c.field(),
            alive: vec![true; n],
            cols,
            rows,
            proj_rows: (0..n).map(|k| vec![(k, 1)]).collect(),
            incl_cols: (0..n).map(|k| vec![(k, 1)]).collect(),
            htpy_cols: track_htpy.then(|| vec![Vec::new(); n]),
            cancelled: Vec::new(),
            start: c,
        }
    }

    fn filtration(&self, k: usize) -> i64 {
        self.start.generator(k).filtration
    }

    fn id(&self, k: usize) -> String {
        self.start.generator(k).id.clone()
    }

    fn set_column(&mut self, k: usize, new: SparseVec) {
        for &(r, _) in &self.cols[k] {
            self.rows[r].remove(&k);
        }
        for &(r, _) in &new {
            self.rows[r].insert(k);
        }
        self.cols[k] = new;
    }

    fn coeff(&self, col: usize, row: usize) -> u32 {
        let c = &self.cols[col];
        c.binary_search_by_key(&row, |e| e.0).map_or(0, |p| c[p].1)
    }

    /// Cancel `(i, j)`; returns the columns whose boundary changed.
    fn cancel(&mut self, i: usize, j: usize) -> Result<Vec<usize>, ReduceError> {
        let field = self.field;
        let lambda = self.coeff(i, j);
        if lambda == 0 || !self.alive[i] || !self.alive[j] {
            return Err(ReduceError::ZeroPairing {
                from: self.id(i),
                to: self.id(j),
            });
        }
        let (fi, fj) = (self.filtration(i), self.filtration(j));
        if let Some(&(l, _)) = self.cols[i].iter().find(|&&(l, _)| self.filtration(l) > fj) {
            return Err(ReduceError::Illegal {
                from: self.id(i),
                to: self.id(j),
                condition: 1,
                detail: format!("d({}) has a term {} above filtration {fj}", self.id(i), self.id(l)),
            });
        }
        if let Some(&k) = self.rows[j].iter().find(|&&k| self.filtration(k) < fi) {
            return Err(ReduceError::Illegal {
                from: self.id(i),
                to: self.id(j),
                condition: 2,
                detail: format!("{} hits {} from below filtration {fi}", self.id(k), self.id(j)),
            });
        }
        let inv = field.inv(lambda);
        let di: SparseVec = self.cols[i].clone();
        let hitting: Vec<(usize, u32)> = self.rows[j]
            .iter()
            .filter(|&&k| k != i)
            .map(|&k| (k, self.coeff(k, j)))
            .collect();

        if let Some(h) = self.htpy_cols.as_mut() {
            let iota_i = self.incl_cols[i].clone();
            for &(g, c) in &self.proj_rows[j] {
                let s = field.neg(field.mul(c, inv));
                h[g] = axpy(field, &h[g], s, &iota_i);
            }
        }
        let pj = std::mem::take(&mut self.proj_rows[j]);
        for &(l, a) in di.iter().filter(|&&(l, _)| l != j) {
            let s = field.neg(field.mul(a, inv));
            self.proj_rows[l] = axpy(field, &self.proj_rows[l], s, &pj);
        }
        self.proj_rows[i].clear();
        let ii = std::mem::take(&mut self.incl_cols[i]);
        for &(k, b) in &hitting {
            let s = field.neg(field.mul(b, inv));
            self.incl_cols[k] = axpy(field, &self.incl_cols[k], s, &ii);
        }
        self.incl_cols[j].clear();

        for &(k, b) in &hitting {
            let s = field.neg(field.mul(b, inv));
            let mut col = axpy(field, &self.cols[k], s, &di);
            col.retain(|&(r, _)| r != i && r != j);
            self.set_column(k, col);
        }
        let touching_i: Vec<usize> = self.rows[i].iter().copied().collect();
        for k in touching_i {
            let mut col = self.cols[k].clone();
            col.retain(|&(r, _)| r != i);
            self.set_column(k, col);
        }
        self.set_column(i, Vec::new());
        self.set_column(j, Vec::new());
        self.alive[i] = false;
        self.alive[j] = false;
        self.cancelled.push(CancelledPair {
            from: self.id(i),
            to: self.id(j),
            length: fi - fj,
        });
        Ok(hitting.into_iter().map(|(k, _)| k).collect())
    }

    fn check_no_short(&self, len: i64) -> Result<(), ReduceError> {
        for (k, col) in self.cols.iter().enumerate() {
            for &(r, _) in col {
                let drop = self.filtration(k) - self.filtration(r);
                if drop < len {
                    return Err(ReduceError::ShortComponent {
                        stage: len,
                        from: self.id(k),
                        to: self.id(r),
                        drop,
                    });
                }
            }
        }
        Ok(())
    }

    /// Cancel every component of drop exactly `len`, scanning columns in `order`.
    fn run_stage(&mut self, len: i64, order: &[usize]) -> Result<(), ReduceError> {
        self.check_no_short(len)?;
        let mut pos = vec![usize::MAX; self.alive.len()];
        for (t, &k) in order.iter().enumerate() {
            pos[k] = t;
        }
        let mut cursor = 0;
        while cursor < order.len() {
            let c = order[cursor];
            let fc = self.filtration(c);
            let row = self.cols[c]
                .iter()
                .filter(|&&(r, _)| fc - self.filtration(r) == len)
                .min_by_key(|&&(r, _)| pos[r])
                .map(|&(r, _)| r);
            match row {
                Some(r) if self.alive[c] => {
                    let touched = self.cancel(c, r)?;
                    if let Some(m) = touched.iter().map(|&k| pos[k]).min() {
                        cursor = cursor.min(m);
                    }
                }
                _ => cursor += 1,
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<Reduction, ReduceError> {
        let n = self.alive.len();
        let field = self.field;
        let survivors: Vec<usize> = (0..n).filter(|&k| self.alive[k]).collect();
        let mut new_index = vec![usize::MAX; n];
        for (t, &k) in survivors.iter().enumerate() {
            new_index[k] = t;
        }
        let reindex = |v: &SparseVec| -> SparseVec { v.iter().map(|&(r, x)| (new_index[r], x)).collect() };
        let d = SparseMatrix::from_columns(
            field,
            survivors.len(),
            survivors.iter().map(|&k| reindex(&self.cols[k])).collect(),
        )
        .map_err(ComplexError::from)?;
        let generators: Vec<Generator> = survivors.iter().map(|&k| self.start.generator(k).clone()).collect();
        let after = Arc::new(FilteredComplex::new_unchecked(field, generators, d));
        let mut proj_triplets = Vec::new();
        for (t, &k) in survivors.iter().enumerate() {
            for &(g, x) in &self.proj_rows[k] {
                proj_triplets.push((t, g, x));
            }
        }
        let proj = SparseMatrix::from_triplets(
            field,
            survivors.len(),
            n,
            proj_triplets.into_iter().map(|(r, c, x)| (r, c, x as i64)),
        )
        .map_err(ComplexError::from)?;
        let incl = SparseMatrix::from_columns(field, n, survivors.iter().map(|&k| self.incl_cols[k].clone()).collect())
            .map_err(ComplexError::from)?;
        let htpy = match self.htpy_cols {
            Some(h) => Some(SparseMatrix::from_columns(field, n, h).map_err(ComplexError::from)?),
            None => None,
        };
        Ok(Reduction {
            before: self.start,
            after,
            proj,
            incl,
            htpy,
            cancelled: self.cancelled,
        })
    }
}

/// Cancel the single pair `(xi, xj)`.
pub fn cancel_pair(c: &Arc<FilteredComplex>, xi: &str, xj: &str) -> Result<Reduction, ReduceError> {
    let i = c.require(xi)?;
    let j = c.require(xj)?;
    let mut ws = Workspace::new(c.clone(), true);
    ws.cancel(i, j)?;
    ws.finish()
}

/// Order in which a stage scans columns for pairs to cancel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ScanOrder {
    /// Stored generator order.
    #[default]
    Stored,
    /// A seeded random permutation per stage.
    Shuffled(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReduceOptions {
    pub order: ScanOrder,
    /// Track the homotopy H (costs an outer product per cancellation).
    pub homotopy: bool,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            order: ScanOrder::Stored,
            homotopy: true,
        }
    }
}

fn stage_order(n: usize, order: ScanOrder, len: i64) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    if let ScanOrder::Shuffled(seed) = order {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (len as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        v.shuffle(&mut rng);
    }
    v
}

/// Cancel every component of filtration drop exactly `len`.
pub fn reduce_stage(c: &Arc<FilteredComplex>, len: i64, opts: ReduceOptions) -> Result<Reduction, ReduceError> {
    let mut ws = Workspace::new(c.clone(), opts.homotopy);
    ws.run_stage(len, &stage_order(c.len(), opts.order, len))?;
    ws.finish()
}

/// Run stages `0..=len` in one pass without intermediate snapshots.
pub fn reduce_through(c: &Arc<FilteredComplex>, len: i64, opts: ReduceOptions) -> Result<Reduction, ReduceError> {
    let mut ws = Workspace::new(c.clone(), opts.homotopy);
    for l in 0..=len {
        ws.run_stage(l, &stage_order(c.len(), opts.order, l))?;
    }
    ws.finish()
}

/// One page `E^r = (C_r, d_r)`.
#[derive(Clone, Debug)]
pub struct PageData {
    pub r: usize,
    pub complex: Arc<FilteredComplex>,
    /// The part of the differential dropping filtration by exactly `r`.
    pub dr: SparseMatrix,
}

impl PageData {
    pub fn survivors(&self) -> &[Generator] {
        self.complex.generators()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PageLimit {
    /// Pages `0..=r`, even past collapse.
    Upto(usize),
    /// Stop at the first page whose whole differential vanishes.
    Collapse,
}

/// Dimensions keyed by `(r, degree, filtration level)`; zero entries omitted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankTable(pub BTreeMap<(usize, i64, i64), usize>);

impl RankTable {
    pub fn get(&self, r: usize, degree: i64, level: i64) -> usize {
        self.0.get(&(r, degree, level)).copied().unwrap_or(0)
    }

    /// Total dimension of page `r`.
    pub fn total(&self, r: usize) -> usize {
        self.0.iter().filter(|(k, _)| k.0 == r).map(|(_, v)| v).sum()
    }

    pub fn max_r(&self) -> Option<usize> {
        self.0.keys().map(|k| k.0).max()
    }

    /// Only the entries of page `r`.
    pub fn page(&self, r: usize) -> BTreeMap<(i64, i64), usize> {
        self.0
            .iter()
            .filter(|(k, _)| k.0 == r)
            .map(|(k, v)| ((k.1, k.2), *v))
            .collect()
    }

    /// Same table with degree and level negated.
    pub fn negated(&self) -> RankTable {
        RankTable(self.0.iter().map(|(&(r, d, p), &v)| ((r, -d, -p), v)).collect())
    }

    /// Restricted to pages `0..=r`.
    pub fn through(&self, r: usize) -> RankTable {
        RankTable(self.0.iter().filter(|(k, _)| k.0 <= r).map(|(k, v)| (*k, *v)).collect())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("r\tdegree\tfiltration_level\trank\n");
        for (&(r, d, p), &v) in &self.0 {
            out.push_str(&format!("{r}\t{d}\t{p}\t{v}\n"));
        }
        out
    }
}

fn count_by_bidegree(gens: &[Generator]) -> BTreeMap<(i64, i64), usize> {
    let mut m = BTreeMap::new();
    for g in gens {
        *m.entry((g.degree, g.filtration)).or_insert(0) += 1;
    }
    m
}

/// Every computed page plus the stage reductions between them
/// (`stages[r]` maps page `r` to page `r + 1`).
#[derive(Clone, Debug)]
pub struct Pages {
    pub pages: Vec<PageData>,
    pub stages: Vec<Reduction>,
}

impl Pages {
    pub fn rank_table(&self) -> RankTable {
        let mut t = BTreeMap::new();
        for p in &self.pages {
            for (k, v) in count_by_bidegree(p.survivors()) {
                t.insert((p.r, k.0, k.1), v);
            }
        }
        RankTable(t)
    }

    pub fn last(&self) -> &PageData {
        self.pages.last().expect("at least page 0")
    }

    /// Index of the first page whose whole differential is zero, if reached.
    pub fn collapse_page(&self) -> Option<usize> {
        self.pages.iter().find(|p| p.complex.differential().is_zero()).map(|p| p.r)
    }

    /// Composite reduction from the input complex to page `r`.
    pub fn composite(&self, r: usize) -> Result<Reduction, ReduceError> {
        if r >= self.pages.len() {
            return Err(ReduceError::StageMismatch(format!(
                "page {r} requested, {} available",
                self.pages.len()
            )));
        }
        let mut acc = Reduction::identity(self.pages[0].complex.clone());
        if self.stages.first().is_some_and(|s| s.htpy.is_none()) {
            acc.htpy = None;
        }
        for s in &self.stages[..r] {
            acc = acc.then(s)?;
        }
        Ok(acc)
    }
}

fn page_of(r: usize, c: &Arc<FilteredComplex>) -> PageData {
    let dr = c
        .differential()
        .filter(|row, col| c.generator(col).filtration - c.generator(row).filtration == r as i64);
    PageData {
        r,
        complex: c.clone(),
        dr,
    }
}

/// Compute pages by running stages `0, 1, 2, ...`.
pub fn compute_pages(c: &Arc<FilteredComplex>, limit: PageLimit, opts: ReduceOptions) -> Result<Pages, ReduceError> {
    let report = c.validate();
    if !report.passed() {
        return Err(ComplexError::Invalid(report).into());
    }
    let mut pages = Vec::new();
    let mut stages = Vec::new();
    let mut current = c.clone();
    let mut r = 0usize;
    loop {
        pages.push(page_of(r, &current));
        let done = match limit {
            PageLimit::Upto(m) => r >= m,
            PageLimit::Collapse => current.differential().is_zero(),
        };
        if done {
            break;
        }
        let red = reduce_stage(&current, r as i64, opts)?;
        current = red.after.clone();
        stages.push(red);
        r += 1;
    }
    Ok(Pages { pages, stages })
}

/// Cycle space `Z^r_p` in degree `d`: `x` in `F_p` with `d x` in `F_{p-r}`,
/// as columns in the coordinates of the degree-`d` generators.
fn z_space(c: &FilteredComplex, d: i64, p: i64, r: i64) -> SparseMatrix {
    let here = c.indices_in_degree(d);
    let below = c.indices_in_degree(d - 1);
    let block = c.boundary_block(d);
    let cols: Vec<usize> = (0..here.len()).filter(|&k| c.generator(here[k]).filtration <= p).collect();
    let rows: Vec<usize> = (0..below.len())
        .filter(|&k| c.generator(below[k]).filtration > p - r)
        .collect();
    let kernel = block.select(&rows, &cols).kernel_basis();
    let lifted = kernel
        .into_iter()
        .map(|v| v.into_iter().map(|(k, x)| (cols[k], x)).collect())
        .collect();
    SparseMatrix::from_columns(c.field(), here.len(), lifted).expect("indices in range")
}

/// Page dimensions straight from the definition
/// `E^r_p = Z^r_p / (Z^{r-1}_{p-1} + d Z^{r-1}_{p+r-1})`, for pages `0..=r_max`.
pub fn oracle_pages(c: &FilteredComplex, r_max: usize) -> RankTable {
    let mut table = BTreeMap::new();
    let degrees = c.degrees();
    for r in 0..=r_max as i64 {
        for &d in &degrees {
            let here = c.indices_in_degree(d);
            let mut levels: Vec<i64> = here.iter().map(|&k| c.generator(k).filtration).collect();
            levels.sort_unstable();
            levels.dedup();
            let block_up = c.boundary_block(d + 1);
            for &p in &levels {
                let z = z_space(c, d, p, r);
                let lower = z_space(c, d, p - 1, r - 1);
                let up = z_space(c, d + 1, p + r - 1, r - 1);
                let boundaries = block_up.mul(&up).expect("composable");
                let denom = SparseMatrix::block(
                    c.field(),
                    &[here.len()],
                    &[lower.cols(), boundaries.cols()],
                    &[vec![Some(&lower), Some(&boundaries)]],
                )
                .expect("same row count");
                let dim = z.rank() - denom.rank();
                if dim > 0 {
                    table.insert((r as usize, d, p), dim);
                }
            }
        }
    }
    RankTable(table)
}

/// `f_r = π_D f ι_C` between the page-`r` complexes.
pub fn induced_map(f: &ChainMap, source: &Pages, target: &Pages, r: usize) -> Result<ChainMap, ReduceError> {
    if *source.pages[0].complex != *f.source || *target.pages[0].complex != *f.target {
        return Err(ReduceError::StageMismatch(
            "page data was computed from a different complex".into(),
        ));
    }
    let rs = source.composite(r)?;
    let rt = target.composite(r)?;
    let matrix = rt
        .proj
        .mul(&f.matrix)
        .and_then(|m| m.mul(&rs.incl))
        .map_err(ComplexError::from)?;
    Ok(ChainMap::with_options(
        rs.after.clone(),
        rt.after.clone(),
        matrix,
        f.degree,
        f.filtration_shift,
        f.convention,
    )?)
}

/// Rank of the filtration-preserving part of `f` per (source degree, level).
pub fn page_map_ranks(f: &ChainMap) -> BTreeMap<(i64, i64), usize> {
    let graded = f.graded_part();
    let mut out = BTreeMap::new();
    let keys: BTreeSet<(i64, i64)> = f.source.generators().iter().map(|g| (g.degree, g.filtration)).collect();
    for (d, p) in keys {
        let cols: Vec<usize> = (0..f.source.len())
            .filter(|&k| f.source.generator(k).degree == d && f.source.generator(k).filtration == p)
            .collect();
        let rows: Vec<usize> = (0..f.target.len())
            .filter(|&k| f.target.generator(k).degree == d + f.degree && f.target.generator(k).filtration == p)
            .collect();
        out.insert((d, p), graded.select(&rows, &cols).rank());
    }
    out
}

/// Per-page outcome of [`page_pairing`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PagePairing {
    pub r: usize,
    pub survivors: usize,
    /// The dual side's page differential is the transpose.
    pub transpose: bool,
    /// Rank of the survivor pairing matrix.
    pub pairing_rank: usize,
    /// Bidegree counts match under negation.
    pub bidegrees_match: bool,
}

impl PagePairing {
    pub fn perfect(&self) -> bool {
        self.transpose && self.bidegrees_match && self.pairing_rank == self.survivors
    }
}

#[derive(Clone, Debug)]
pub struct PairingReport {
    pub pages: Vec<PagePairing>,
    /// Independent page computation on the dual agrees with the negated table.
    pub dual_table_matches: bool,
}

impl PairingReport {
    pub fn perfect(&self) -> bool {
        self.dual_table_matches && self.pages.iter().all(PagePairing::perfect)
    }
}

/// Run mirrored cancellations on `c` and its dual: each cancellation of
/// `(x_i, x_j)` in `c` is matched by `(x_j*, x_i*)` in the dual.
pub fn page_pairing(c: &Arc<FilteredComplex>, limit: PageLimit) -> Result<PairingReport, ReduceError> {
    let opts = ReduceOptions {
        order: ScanOrder::Stored,
        homotopy: false,
    };
    let pages = compute_pages(c, limit, opts)?;
    let dual = Arc::new(c.dualize());
    let mut mirrored = Vec::new();
    let mut current = dual.clone();
    for (r, page) in pages.pages.iter().enumerate() {
        mirrored.push(current.clone());
        if let Some(stage) = pages.stages.get(r) {
            let mut ws = Workspace::new(current.clone(), false);
            ws.check_no_short(r as i64)?;
            for pair in &stage.cancelled {
                let i = current.require(&pair.to)?;
                let j = current.require(&pair.from)?;
                ws.cancel(i, j)?;
            }
            current = ws.finish()?.after;
        }
        debug_assert_eq!(page.r, r);
    }
    let mut out = Vec::new();
    for (page, dual_page) in pages.pages.iter().zip(&mirrored) {
        let (a, b) = (&page.complex, dual_page);
        let same_ids = a.len() == b.len() && a.generators().iter().zip(b.generators()).all(|(x, y)| x.id == y.id);
        // pairing <x, y*> in the surviving bases
        let pairing = if same_ids {
            SparseMatrix::identity(a.field(), a.len())
        } else {
            SparseMatrix::zeros(a.field(), b.len(), a.len())
        };
        let transpose = same_ids && *b.differential() == a.differential().transpose();
        let negated: BTreeMap<(i64, i64), usize> = count_by_bidegree(a.generators())
            .into_iter()
            .map(|((d, p), v)| ((-d, -p), v))
            .collect();
        out.push(PagePairing {
            r: page.r,
            survivors: a.len(),
            transpose,
            pairing_rank: pairing.rank(),
            bidegrees_match: negated == count_by_bidegree(b.generators()),
        });
    }
    let last_r = pages.last().r;
    let dual_pages = compute_pages(&dual, PageLimit::Upto(last_r), opts)?;
    Ok(PairingReport {
        pages: out,
        dual_table_matches: dual_pages.rank_table() == pages.rank_table().negated(),
    })
}

/// Page-1 comparison for a mapping cone: the page-1 table of `MC(f)` and the
/// homology table of the cone of the page-1 induced map.
#[derive(Clone, Debug)]
pub struct ConeE1Report {
    pub cone_page1: BTreeMap<(i64, i64), usize>,
    pub induced_cone: BTreeMap<(i64, i64), usize>,
}

impl ConeE1Report {
    pub fn matches(&self) -> bool {
        self.cone_page1 == self.induced_cone
    }
}

pub fn cone_e1_comparison(f: &ChainMap) -> Result<ConeE1Report, ReduceError> {
    let opts = ReduceOptions {
        order: ScanOrder::Stored,
        homotopy: false,
    };
    let cone = mapping_cone(f)?;
    let cone_pages = compute_pages(&cone.complex, PageLimit::Upto(1), opts)?;
    let src = compute_pages(&f.source, PageLimit::Upto(1), opts)?;
    let tgt = compute_pages(&f.target, PageLimit::Upto(1), opts)?;
    let f1 = induced_map(f, &src, &tgt, 1)?;
    let flat = |c: &FilteredComplex| {
        Arc::new(FilteredComplex::new_unchecked(
            c.field(),
            c.generators().to_vec(),
            SparseMatrix::zeros(c.field(), c.len(), c.len()),
        ))
    };
    let e1f = ChainMap::with_options(
        flat(&f1.source),
        flat(&f1.target),
        f1.graded_part(),
        f1.degree,
        0,
        MapConvention::Chain,
    )?;
    let induced = mapping_cone(&e1f)?;
    let induced_pages = compute_pages(&induced.complex, PageLimit::Upto(1), opts)?;
    Ok(ConeE1Report {
        cone_page1: cone_pages.rank_table().page(1),
        induced_cone: induced_pages.rank_table().page(1),
    })
}
