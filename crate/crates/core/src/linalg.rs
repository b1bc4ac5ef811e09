//! Prime-field scalars and sparse matrices.
//!
//! Matrices are stored column-sparse: column `j` is a list of `(row, value)`
//! pairs sorted by row with no zero values. Over GF(2) a bit-packed row
//! representation ([`BitMatrix`]) is available and is used for rank and
//! products of reasonably sized matrices.

use std::fmt;

use thiserror::Error;

/// Largest characteristic the engine accepts.
pub const MAX_CHARACTERISTIC: u32 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("characteristic {0} is not a prime in 2..={max}", max = MAX_CHARACTERISTIC)]
    BadCharacteristic(u32),
    #[error("dimension mismatch: {op} of {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("field mismatch: GF({0}) vs GF({1})")]
    FieldMismatch(u32, u32),
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("matrix is singular")]
    Singular,
}

/// A prime field GF(p).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    p: u32,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    pub fn new(p: u32) -> Result<Self, LinalgError> {
        if p > MAX_CHARACTERISTIC || !is_prime(p) {
            return Err(LinalgError::BadCharacteristic(p));
        }
        Ok(Field { p })
    }

    pub const fn gf2() -> Self {
        Field { p: 2 }
    }

    pub fn characteristic(self) -> u32 {
        self.p
    }

    pub fn is_gf2(self) -> bool {
        self.p == 2
    }

    /// Reduce an arbitrary integer into `0..p`.
    pub fn element(self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    /// Symmetric representative in `(-p/2, p/2]`, used when printing.
    pub fn signed(self, x: u32) -> i64 {
        let x = x as i64;
        let p = self.p as i64;
        if x > p / 2 {
            x - p
        } else {
            x
        }
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero in GF({})", self.p);
        // a^(p-2) by square-and-multiply
        let mut result = 1u32;
        let mut base = a % self.p;
        let mut e = self.p - 2;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        result
    }

    pub fn div(self, a: u32, b: u32) -> u32 {
        self.mul(a, self.inv(b))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.p)
    }
}

/// A sparse vector: `(index, value)` pairs sorted by index, no zeros.
pub type SparseVec = Vec<(usize, u32)>;

/// `a + scale * b` for sorted sparse vectors.
pub fn axpy(field: Field, a: &[(usize, u32)], scale: u32, b: &[(usize, u32)]) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(ra, va)), Some(&(rb, vb))) if ra == rb => {
                let v = field.add(va, field.mul(scale, vb));
                if v != 0 {
                    out.push((ra, v));
                }
                i += 1;
                j += 1;
            }
            (Some(&(ra, va)), Some(&(rb, _))) if ra < rb => {
                out.push((ra, va));
                i += 1;
            }
            (Some(&(ra, va)), None) => {
                out.push((ra, va));
                i += 1;
            }
            (_, Some(&(rb, vb))) => {
                let v = field.mul(scale, vb);
                if v != 0 {
                    out.push((rb, v));
                }
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Immutable column-sparse matrix over a prime field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    columns: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        SparseMatrix {
            field,
            rows,
            cols,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        SparseMatrix {
            field,
            rows: n,
            cols: n,
            columns: (0..n).map(|i| vec![(i, 1)]).collect(),
        }
    }

    /// Build from `(row, col, value)` triplets. Values are integers reduced
    /// mod p; repeated positions are summed.
    pub fn from_triplets<I>(field: Field, rows: usize, cols: usize, triplets: I) -> Result<Self, LinalgError>
    where
        I: IntoIterator<Item = (usize, usize, i64)>,
    {
        let mut columns: Vec<Vec<(usize, u32)>> = vec![Vec::new(); cols];
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(LinalgError::IndexOutOfRange { row: r, col: c, rows, cols });
            }
            let v = field.element(v);
            if v != 0 {
                columns[c].push((r, v));
            }
        }
        let columns = columns.into_iter().map(|col| normalize(field, col)).collect();
        Ok(SparseMatrix { field, rows, cols, columns })
    }

    /// Build from columns of possibly unsorted entries with values already in `0..p`.
    pub fn from_columns(field: Field, rows: usize, columns: Vec<SparseVec>) -> Result<Self, LinalgError> {
        let cols = columns.len();
        for (c, col) in columns.iter().enumerate() {
            if let Some(&(r, _)) = col.iter().find(|(r, _)| *r >= rows) {
                return Err(LinalgError::IndexOutOfRange { row: r, col: c, rows, cols });
            }
        }
        let columns = columns.into_iter().map(|col| normalize(field, col)).collect();
        Ok(SparseMatrix { field, rows, cols, columns })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn column(&self, c: usize) -> &[(usize, u32)] {
        &self.columns[c]
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        let col = &self.columns[c];
        match col.binary_search_by_key(&r, |&(row, _)| row) {
            Ok(k) => col[k].1,
            Err(_) => 0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    /// Entries in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r, c, v)))
    }

    fn check_field(&self, other: &SparseMatrix) -> Result<(), LinalgError> {
        if self.field != other.field {
            return Err(LinalgError::FieldMismatch(self.field.p, other.field.p));
        }
        Ok(())
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut columns: Vec<SparseVec> = vec![Vec::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                columns[r].push((c, v));
            }
        }
        SparseMatrix {
            field: self.field,
            rows: self.cols,
            cols: self.rows,
            columns,
        }
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &SparseMatrix) -> Result<SparseMatrix, LinalgError> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "product",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let field = self.field;
        let mut acc = vec![0u32; self.rows];
        let mut touched: Vec<usize> = Vec::new();
        let mut columns = Vec::with_capacity(other.cols);
        for bcol in &other.columns {
            for &(k, bv) in bcol {
                for &(r, av) in &self.columns[k] {
                    if acc[r] == 0 {
                        touched.push(r);
                    }
                    acc[r] = field.add(acc[r], field.mul(av, bv));
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let mut col = Vec::with_capacity(touched.len());
            for &r in &touched {
                if acc[r] != 0 {
                    col.push((r, acc[r]));
                }
                acc[r] = 0;
            }
            touched.clear();
            columns.push(col);
        }
        Ok(SparseMatrix {
            field,
            rows: self.rows,
            cols: other.cols,
            columns,
        })
    }

    pub fn add(&self, other: &SparseMatrix) -> Result<SparseMatrix, LinalgError> {
        self.combine(other, 1, "sum")
    }

    pub fn sub(&self, other: &SparseMatrix) -> Result<SparseMatrix, LinalgError> {
        self.combine(other, self.field.neg(1), "difference")
    }

    fn combine(&self, other: &SparseMatrix, scale: u32, op: &'static str) -> Result<SparseMatrix, LinalgError> {
        self.check_field(other)?;
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| axpy(self.field, a, scale, b))
            .collect();
        Ok(SparseMatrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            columns,
        })
    }

    pub fn scale(&self, s: u32) -> SparseMatrix {
        let s = s % self.field.p;
        if s == 0 {
            return SparseMatrix::zeros(self.field, self.rows, self.cols);
        }
        let columns = self
            .columns
            .iter()
            .map(|col| col.iter().map(|&(r, v)| (r, self.field.mul(s, v))).collect())
            .collect();
        SparseMatrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            columns,
        }
    }

    pub fn neg(&self) -> SparseMatrix {
        self.scale(self.field.neg(1))
    }

    /// The submatrix on the given row and column index lists (in the given order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> SparseMatrix {
        let mut row_map = vec![usize::MAX; self.rows];
        for (new, &old) in rows.iter().enumerate() {
            row_map[old] = new;
        }
        let columns = cols
            .iter()
            .map(|&c| {
                let col: SparseVec = self.columns[c]
                    .iter()
                    .filter(|(r, _)| row_map[*r] != usize::MAX)
                    .map(|&(r, v)| (row_map[r], v))
                    .collect();
                normalize(self.field, col)
            })
            .collect();
        SparseMatrix {
            field: self.field,
            rows: rows.len(),
            cols: cols.len(),
            columns,
        }
    }

    /// Keep only entries for which `keep(row, col)` holds.
    pub fn filter(&self, mut keep: impl FnMut(usize, usize) -> bool) -> SparseMatrix {
        let columns = self
            .columns
            .iter()
            .enumerate()
            .map(|(c, col)| col.iter().copied().filter(|&(r, _)| keep(r, c)).collect())
            .collect();
        SparseMatrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            columns,
        }
    }

    /// Block matrix from a grid of optional blocks (`None` is a zero block).
    /// `row_sizes`/`col_sizes` fix the block dimensions.
    pub fn block(
        field: Field,
        row_sizes: &[usize],
        col_sizes: &[usize],
        blocks: &[Vec<Option<&SparseMatrix>>],
    ) -> Result<SparseMatrix, LinalgError> {
        let rows: usize = row_sizes.iter().sum();
        let row_off: Vec<usize> = row_sizes
            .iter()
            .scan(0, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect();
        let mut columns = Vec::new();
        for (bc, &w) in col_sizes.iter().enumerate() {
            for c in 0..w {
                let mut col = Vec::new();
                for (br, &h) in row_sizes.iter().enumerate() {
                    if let Some(Some(m)) = blocks.get(br).map(|row| row[bc]) {
                        if m.field != field {
                            return Err(LinalgError::FieldMismatch(field.p, m.field.p));
                        }
                        if m.shape() != (h, w) {
                            return Err(LinalgError::DimensionMismatch {
                                op: "block",
                                left: (h, w),
                                right: m.shape(),
                            });
                        }
                        col.extend(m.columns[c].iter().map(|&(r, v)| (r + row_off[br], v)));
                    }
                }
                columns.push(col);
            }
        }
        Ok(SparseMatrix {
            field,
            rows,
            cols: columns.len(),
            columns,
        })
    }

    /// Rank over GF(p). Uses the bit-packed path for GF(2) when the dense
    /// footprint is modest.
    pub fn rank(&self) -> usize {
        if self.field.is_gf2() && (self.rows as u64) * (self.cols as u64) <= 1 << 26 {
            BitMatrix::from_sparse(self).rank()
        } else {
            self.rank_sparse()
        }
    }

    /// Rank by sparse column elimination, any characteristic.
    pub fn rank_sparse(&self) -> usize {
        let mut elim = ColumnEliminator::new(self.field, self.rows, false);
        for col in &self.columns {
            elim.insert(col.clone(), Vec::new());
        }
        elim.rank()
    }

    /// Basis of the right null space, one sparse vector (length `cols`) per element.
    pub fn kernel_basis(&self) -> Vec<SparseVec> {
        let mut elim = ColumnEliminator::new(self.field, self.rows, true);
        let mut kernel = Vec::new();
        for (j, col) in self.columns.iter().enumerate() {
            if let Some(combo) = elim.insert(col.clone(), vec![(j, 1)]) {
                kernel.push(combo);
            }
        }
        kernel
    }

    /// Kernel basis as the columns of a `cols x nullity` matrix.
    pub fn kernel_matrix(&self) -> SparseMatrix {
        let basis = self.kernel_basis();
        SparseMatrix {
            field: self.field,
            rows: self.cols,
            cols: basis.len(),
            columns: basis,
        }
    }

    /// Inverse of a square matrix by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<SparseMatrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionMismatch {
                op: "inverse",
                left: self.shape(),
                right: self.shape(),
            });
        }
        let n = self.rows;
        let f = self.field;
        // rows of [A | I] as dense vectors
        let mut a: Vec<Vec<u32>> = vec![vec![0; 2 * n]; n];
        for (r, c, v) in self.entries() {
            a[r][c] = v;
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[n + i] = 1;
        }
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r][col] != 0).ok_or(LinalgError::Singular)?;
            a.swap(col, pivot);
            let inv = f.inv(a[col][col]);
            for v in a[col].iter_mut() {
                *v = f.mul(*v, inv);
            }
            let pivot_row = a[col].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != col && row[col] != 0 {
                    let s = f.neg(row[col]);
                    for (x, &p) in row.iter_mut().zip(&pivot_row) {
                        if p != 0 {
                            *x = f.add(*x, f.mul(s, p));
                        }
                    }
                }
            }
        }
        let triplets = (0..n).flat_map(|r| {
            let row = &a[r];
            (0..n).filter(move |&c| row[n + c] != 0).map(move |c| (r, c, row[n + c] as i64))
        });
        SparseMatrix::from_triplets(f, n, n, triplets)
    }

    /// Dense row-major copy, for tests and small reports.
    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        let mut d = vec![vec![0; self.cols]; self.rows];
        for (r, c, v) in self.entries() {
            d[r][c] = v;
        }
        d
    }

    pub fn from_dense(field: Field, rows: &[Vec<i64>]) -> SparseMatrix {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let triplets = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &v)| (r, c, v)));
        SparseMatrix::from_triplets(field, nrows, ncols, triplets).expect("dense rows have consistent width")
    }
}

fn normalize(field: Field, mut col: SparseVec) -> SparseVec {
    col.sort_unstable_by_key(|&(r, _)| r);
    let mut out: SparseVec = Vec::with_capacity(col.len());
    for (r, v) in col {
        match out.last_mut() {
            Some(last) if last.0 == r => last.1 = field.add(last.1, v),
            _ => out.push((r, v % field.p)),
        }
    }
    out.retain(|&(_, v)| v != 0);
    out
}

/// Incremental column elimination. Each inserted column is reduced against
/// the stored pivots (pivot = smallest row index); columns that reduce to
/// zero report the recorded combination, which lies in the kernel.
struct ColumnEliminator {
    field: Field,
    track: bool,
    pivots: Vec<Option<(SparseVec, SparseVec)>>,
    rank: usize,
}

impl ColumnEliminator {
    fn new(field: Field, rows: usize, track: bool) -> Self {
        ColumnEliminator {
            field,
            track,
            pivots: vec![None; rows],
            rank: 0,
        }
    }

    fn insert(&mut self, mut v: SparseVec, mut combo: SparseVec) -> Option<SparseVec> {
        let f = self.field;
        while let Some(&(r, val)) = v.first() {
            match &self.pivots[r] {
                Some((pv, pc)) => {
                    // pivot columns are normalized to leading coefficient 1
                    let s = f.neg(val);
                    v = axpy(f, &v, s, pv);
                    if self.track {
                        combo = axpy(f, &combo, s, pc);
                    }
                }
                None => {
                    let inv = f.inv(val);
                    let v: SparseVec = v.iter().map(|&(r, x)| (r, f.mul(x, inv))).collect();
                    let c: SparseVec = combo.iter().map(|&(r, x)| (r, f.mul(x, inv))).collect();
                    self.pivots[r] = Some((v, c));
                    self.rank += 1;
                    return None;
                }
            }
        }
        Some(combo)
    }

    fn rank(&self) -> usize {
        self.rank
    }
}

/// Dense bit-packed GF(2) matrix, stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn from_sparse(m: &SparseMatrix) -> Self {
        assert!(m.field().is_gf2(), "bit-packed matrices are GF(2) only");
        let mut b = BitMatrix::zeros(m.rows(), m.cols());
        for (r, c, _) in m.entries() {
            b.set(r, c, true);
        }
        b
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        let triplets = (0..self.rows)
            .flat_map(|r| (0..self.cols).filter(move |&c| self.get(r, c)).map(move |c| (r, c, 1)));
        SparseMatrix::from_triplets(Field::gf2(), self.rows, self.cols, triplets).expect("indices in range")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if value {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "product",
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let dst = r * out.words;
            for k in (0..self.cols).filter(|&k| self.get(r, k)) {
                for (d, s) in out.data[dst..dst + out.words].iter_mut().zip(other.row(k)) {
                    *d ^= s;
                }
            }
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        let mut m = self.data.clone();
        let w = self.words;
        let mut rank = 0;
        for c in 0..self.cols {
            let (word, bit) = (c / 64, 1u64 << (c % 64));
            let Some(p) = (rank..self.rows).find(|&r| m[r * w + word] & bit != 0) else {
                continue;
            };
            if p != rank {
                for k in 0..w {
                    m.swap(p * w + k, rank * w + k);
                }
            }
            for r in rank + 1..self.rows {
                if m[r * w + word] & bit != 0 {
                    for k in word..w {
                        let v = m[rank * w + k];
                        m[r * w + k] ^= v;
                    }
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }
}
