//! Checker for the triangle lemma on sequences `A_i -f_i-> A_{i+1}` with
//! homotopies `H_i: f_{i+1} f_i ≃ 0`.
//!
//! With `ψ_i = -f_{i+2} H_i - H_{i+1} f_i`, if every `ψ_i` is a
//! quasi-isomorphism then `α_i = [-H_i | f_{i+1}]: MC(f_i) -> A_{i+2}` and
//! `β_i = [f_i; -H_i]: A_i -> MC(f_{i+1})` are quasi-isomorphisms and the
//! iterated cones are acyclic. Every step is checked on the matrices.

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::complex::{
    iterated_mapping_cone, mapping_cone, quasi_isomorphism, ChainMap, ComplexError, FilteredComplex, Generator,
    Homotopy, MapConvention, QuasiIsoReport,
};
use crate::linalg::{Field, SparseMatrix};
use crate::random::{random_chain_map, random_complex, random_graded_matrix, random_unitriangular, ComplexParams};
use crate::reduce::{compute_pages, induced_map, page_map_ranks, PageLimit, ReduceError, ReduceOptions, ScanOrder};

#[derive(Debug, Error)]
pub enum KeyLemmaError {
    #[error("malformed datum: {0}")]
    Shape(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("hypotheses fail: {0}")]
    Hypothesis(String),
    #[error("not filtered: {0}")]
    Unfiltered(String),
}

/// A window `A_0, ..., A_{k-1}` with maps and homotopies. When `period_shift`
/// is set the window repeats: `A_{i+k}` is `A_i` with degrees raised by the shift.
#[derive(Clone, Debug)]
pub struct TriangleDatum {
    pub complexes: Vec<Arc<FilteredComplex>>,
    /// `f_i: A_i -> A_{i+1}`.
    pub maps: Vec<SparseMatrix>,
    /// `H_i: A_i -> A_{i+2}`.
    pub homotopies: Vec<SparseMatrix>,
    pub period_shift: Option<i64>,
    /// Sign convention of the `f_i`; irrelevant over GF(2).
    pub convention: MapConvention,
}

impl TriangleDatum {
    pub fn len(&self) -> usize {
        self.complexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.complexes.is_empty()
    }

    pub fn field(&self) -> Field {
        self.complexes.first().map_or(Field::gf2(), |c| c.field())
    }

    pub fn complex(&self, i: usize) -> Option<Arc<FilteredComplex>> {
        let k = self.len();
        match self.period_shift {
            Some(s) if k > 0 => {
                let base = &self.complexes[i % k];
                let lap = (i / k) as i64;
                Some(if lap == 0 || s == 0 {
                    base.clone()
                } else {
                    Arc::new(base.shift_degree(s * lap))
                })
            }
            _ => self.complexes.get(i).cloned(),
        }
    }

    fn window_index(&self, i: usize, available: usize) -> Option<usize> {
        match self.period_shift {
            Some(_) if available > 0 => Some(i % available),
            _ => (i < available).then_some(i),
        }
    }

    pub fn map(&self, i: usize) -> Option<ChainMap> {
        let m = &self.maps[self.window_index(i, self.maps.len())?];
        Some(ChainMap {
            source: self.complex(i)?,
            target: self.complex(i + 1)?,
            matrix: m.clone(),
            degree: 0,
            filtration_shift: 0,
            convention: self.convention,
        })
    }

    pub fn homotopy(&self, i: usize) -> Option<Homotopy> {
        let m = &self.homotopies[self.window_index(i, self.homotopies.len())?];
        Some(Homotopy {
            source: self.complex(i)?,
            target: self.complex(i + 2)?,
            matrix: m.clone(),
            degree: 1,
            order: 0,
        })
    }

    /// Indices `i` at which the conclusions are checked.
    pub fn indices(&self) -> std::ops::Range<usize> {
        match self.period_shift {
            Some(_) => 0..self.len(),
            None => 0..self.len().saturating_sub(3),
        }
    }

    fn hypothesis_indices(&self) -> std::ops::Range<usize> {
        match self.period_shift {
            Some(_) => 0..self.len(),
            None => 0..self.len().saturating_sub(2),
        }
    }

    /// Composability and shape checks.
    pub fn check_shapes(&self) -> Result<(), KeyLemmaError> {
        let k = self.len();
        let (nm, nh) = match self.period_shift {
            Some(_) => (k, k),
            None => (k.saturating_sub(1), k.saturating_sub(2)),
        };
        if self.maps.len() != nm || self.homotopies.len() != nh {
            return Err(KeyLemmaError::Shape(format!(
                "{k} complexes need {nm} maps and {nh} homotopies, got {} and {}",
                self.maps.len(),
                self.homotopies.len()
            )));
        }
        let field = self.field();
        for c in &self.complexes {
            if c.field() != field {
                return Err(ComplexError::FieldMismatch(field.characteristic(), c.field().characteristic()).into());
            }
        }
        for i in 0..nm {
            let f = self.map(i).expect("in window");
            if f.matrix.shape() != (f.target.len(), f.source.len()) {
                return Err(KeyLemmaError::Shape(format!("f_{i} has shape {:?}", f.matrix.shape())));
            }
            let v = f.check();
            if !v.is_empty() {
                return Err(KeyLemmaError::Shape(format!("f_{i} is not a map of complexes: {v:?}")));
            }
        }
        for i in 0..nh {
            let h = self.homotopy(i).expect("in window");
            if h.matrix.shape() != (h.target.len(), h.source.len()) {
                return Err(KeyLemmaError::Shape(format!("H_{i} has shape {:?}", h.matrix.shape())));
            }
            let v = h.check();
            if !v.is_empty() {
                return Err(KeyLemmaError::Shape(format!("H_{i} is not homogeneous: {v:?}")));
            }
        }
        Ok(())
    }

    /// `ψ_i = -f_{i+2} H_i - H_{i+1} f_i: A_i -> A_{i+3}`, of degree 1.
    pub fn psi(&self, i: usize) -> Result<ChainMap, KeyLemmaError> {
        let missing = || KeyLemmaError::Shape(format!("psi_{i} needs data beyond the window"));
        let (f0, f2) = (self.map(i).ok_or_else(missing)?, self.map(i + 2).ok_or_else(missing)?);
        let (h0, h1) = (self.homotopy(i).ok_or_else(missing)?, self.homotopy(i + 1).ok_or_else(missing)?);
        let a = f2.matrix.mul(&h0.matrix).map_err(ComplexError::from)?;
        let b = h1.matrix.mul(&f0.matrix).map_err(ComplexError::from)?;
        let matrix = a.add(&b).map_err(ComplexError::from)?.neg();
        Ok(ChainMap {
            source: f0.source,
            target: f2.target,
            matrix,
            degree: 1,
            filtration_shift: 0,
            convention: MapConvention::Chain,
        })
    }
}

/// Which sign convention a matrix satisfies as a map of complexes, if any.
pub fn detect_convention(
    matrix: &SparseMatrix,
    source: &FilteredComplex,
    target: &FilteredComplex,
) -> Option<MapConvention> {
    let l = target.differential().mul(matrix).ok()?;
    let r = matrix.mul(source.differential()).ok()?;
    if l == r {
        Some(MapConvention::Chain)
    } else if l.add(&r).ok()?.is_zero() {
        Some(MapConvention::AntiChain)
    } else {
        None
    }
}

#[derive(Clone, Debug)]
pub struct PsiCheck {
    pub i: usize,
    pub chain_map: bool,
    pub quasi_iso: QuasiIsoReport,
}

#[derive(Clone, Debug)]
pub struct HypothesisReport {
    /// `(i, nonzero entries of f_{i+1} f_i - dH_i - H_i d)`.
    pub homotopy_defects: Vec<(usize, usize)>,
    pub psi: Vec<PsiCheck>,
}

impl HypothesisReport {
    pub fn first_holds(&self) -> bool {
        self.homotopy_defects.iter().all(|&(_, n)| n == 0)
    }

    pub fn second_holds(&self) -> bool {
        self.psi.iter().all(|p| p.chain_map && p.quasi_iso.is_quasi_isomorphism)
    }

    pub fn passed(&self) -> bool {
        self.first_holds() && self.second_holds()
    }

    pub fn summary(&self) -> String {
        let bad1: Vec<usize> = self.homotopy_defects.iter().filter(|d| d.1 > 0).map(|d| d.0).collect();
        let bad2: Vec<usize> = self
            .psi
            .iter()
            .filter(|p| !(p.chain_map && p.quasi_iso.is_quasi_isomorphism))
            .map(|p| p.i)
            .collect();
        format!("homotopy identity fails at {bad1:?}; psi not a quasi-isomorphism at {bad2:?}")
    }
}

pub fn check_hypotheses(t: &TriangleDatum) -> Result<HypothesisReport, KeyLemmaError> {
    t.check_shapes()?;
    let mut homotopy_defects = Vec::new();
    for i in t.hypothesis_indices() {
        let (f0, f1, h) = match (t.map(i), t.map(i + 1), t.homotopy(i)) {
            (Some(a), Some(b), Some(h)) => (a, b, h),
            _ => continue,
        };
        let comp = f1.matrix.mul(&f0.matrix).map_err(ComplexError::from)?;
        let defect = comp.sub(&h.boundary()?).map_err(ComplexError::from)?;
        homotopy_defects.push((i, defect.nnz()));
    }
    let mut psi = Vec::new();
    for i in t.indices() {
        let p = t.psi(i)?;
        psi.push(PsiCheck {
            i,
            chain_map: detect_convention(&p.matrix, &p.source, &p.target) == Some(MapConvention::Chain),
            quasi_iso: quasi_isomorphism(&p),
        });
    }
    Ok(HypothesisReport { homotopy_defects, psi })
}

#[derive(Clone, Debug)]
pub struct IndexReport {
    pub i: usize,
    pub alpha_convention: Option<MapConvention>,
    pub beta_convention: Option<MapConvention>,
    pub alpha_quasi_iso: QuasiIsoReport,
    pub beta_quasi_iso: QuasiIsoReport,
    /// `α_{i+1} β_i = ψ_i` exactly.
    pub alpha_beta_is_psi: bool,
    /// `f_{i+2} α_i - ψ_i π = dX + Xd`.
    pub x_identity: bool,
    /// `β_{i+1} f_i - ι ψ_i = dY + Yd`.
    pub y_identity: bool,
    /// Total homology rank of `MC(f_i, f_{i+1}, H_i)`.
    pub iterated_cone_rank: usize,
    pub cone_rank: usize,
    pub target_rank: usize,
}

impl IndexReport {
    pub fn passed(&self) -> bool {
        self.alpha_convention.is_some()
            && self.beta_convention.is_some()
            && self.alpha_quasi_iso.is_quasi_isomorphism
            && self.beta_quasi_iso.is_quasi_isomorphism
            && self.alpha_beta_is_psi
            && self.x_identity
            && self.y_identity
            && self.iterated_cone_rank == 0
    }
}

#[derive(Clone, Debug)]
pub struct KeyLemmaReport {
    pub hypotheses: HypothesisReport,
    pub indices: Vec<IndexReport>,
}

impl KeyLemmaReport {
    pub fn passed(&self) -> bool {
        self.hypotheses.passed() && self.indices.iter().all(IndexReport::passed)
    }
}

fn cone_of(f: &ChainMap) -> Result<crate::complex::Cone, KeyLemmaError> {
    Ok(mapping_cone(&ChainMap {
        convention: MapConvention::AntiChain,
        ..f.clone()
    })
    .or_else(|_| mapping_cone(f))?)
}

fn hstack(field: Field, rows: usize, parts: &[&SparseMatrix]) -> SparseMatrix {
    let sizes: Vec<usize> = parts.iter().map(|m| m.cols()).collect();
    let row: Vec<Option<&SparseMatrix>> = parts.iter().map(|m| Some(*m)).collect();
    SparseMatrix::block(field, &[rows], &sizes, &[row]).expect("same row count")
}

fn vstack(field: Field, cols: usize, parts: &[&SparseMatrix]) -> SparseMatrix {
    let sizes: Vec<usize> = parts.iter().map(|m| m.rows()).collect();
    let blocks: Vec<Vec<Option<&SparseMatrix>>> = parts.iter().map(|m| vec![Some(*m)]).collect();
    SparseMatrix::block(field, &sizes, &[cols], &blocks).expect("same column count")
}

fn is_homotopy(a: &SparseMatrix, h: &SparseMatrix, source: &FilteredComplex, target: &FilteredComplex) -> bool {
    let dh = target.differential().mul(h);
    let hd = h.mul(source.differential());
    match (dh, hd) {
        (Ok(x), Ok(y)) => x.add(&y).map(|s| s == *a).unwrap_or(false),
        _ => false,
    }
}

/// α_i, β_i, X, Y and the iterated cone at index `i`.
fn check_index(t: &TriangleDatum, i: usize) -> Result<IndexReport, KeyLemmaError> {
    let field = t.field();
    let missing = || KeyLemmaError::Shape(format!("index {i} needs data beyond the window"));
    let f = |j: usize| t.map(j).ok_or_else(missing);
    let h = |j: usize| t.homotopy(j).ok_or_else(missing);
    let (f0, f1, f2) = (f(i)?, f(i + 1)?, f(i + 2)?);
    let (h0, h1) = (h(i)?, h(i + 1)?);
    let psi = t.psi(i)?;
    let cone0 = cone_of(&f0)?;
    let cone1 = cone_of(&f1)?;
    let cone2 = cone_of(&f(i + 2)?)?;
    let (n0, n1) = (f0.source.len(), f1.source.len());

    // α_i: MC(f_i) -> A_{i+2}
    let alpha = hstack(field, f1.target.len(), &[&h0.matrix.neg(), &f1.matrix]);
    let alpha_convention = detect_convention(&alpha, &cone0.complex, &f1.target);
    let alpha_map = ChainMap {
        source: cone0.complex.clone(),
        target: f1.target.clone(),
        matrix: alpha.clone(),
        degree: 0,
        filtration_shift: 0,
        convention: alpha_convention.unwrap_or_default(),
    };
    // β_i: A_i -> MC(f_{i+1}), degree 1
    let beta = vstack(field, n0, &[&f0.matrix, &h0.matrix.neg()]);
    let beta_convention = detect_convention(&beta, &f0.source, &cone1.complex);
    let beta_map = ChainMap {
        source: f0.source.clone(),
        target: cone1.complex.clone(),
        matrix: beta,
        degree: 1,
        filtration_shift: 0,
        convention: beta_convention.unwrap_or_default(),
    };
    // α_{i+1}: MC(f_{i+1}) -> A_{i+3}
    let alpha_next = hstack(field, f2.target.len(), &[&h1.matrix.neg(), &f2.matrix]);
    let alpha_beta_is_psi = alpha_next.mul(&beta_map.matrix).map_err(ComplexError::from)? == psi.matrix;

    // X = [0 | H_{i+1}] on MC(f_i)
    let x = hstack(field, f2.target.len(), &[&SparseMatrix::zeros(field, f2.target.len(), n0), &h1.matrix]);
    let lhs_x = f2
        .matrix
        .mul(&alpha)
        .and_then(|m| psi.matrix.mul(&cone0.projection.matrix).and_then(|p| m.sub(&p)))
        .map_err(ComplexError::from)?;
    let x_identity = is_homotopy(&lhs_x, &x, &cone0.complex, &f2.target);

    // Y = [H_i; 0]: A_i -> MC(f_{i+2})
    let y = vstack(field, n0, &[&h0.matrix, &SparseMatrix::zeros(field, f2.target.len(), n0)]);
    let beta_next = vstack(field, n1, &[&f1.matrix, &h1.matrix.neg()]);
    let lhs_y = beta_next
        .mul(&f0.matrix)
        .and_then(|m| cone2.inclusion.matrix.mul(&psi.matrix).and_then(|p| m.sub(&p)))
        .map_err(ComplexError::from)?;
    let y_identity = is_homotopy(&lhs_y, &y, &f0.source, &cone2.complex);

    let iterated = iterated_mapping_cone(
        &ChainMap {
            convention: MapConvention::AntiChain,
            ..f0.clone()
        },
        &ChainMap {
            convention: MapConvention::AntiChain,
            ..f1.clone()
        },
        &h0,
    )?;
    Ok(IndexReport {
        i,
        alpha_convention,
        beta_convention,
        alpha_quasi_iso: quasi_isomorphism(&alpha_map),
        beta_quasi_iso: quasi_isomorphism(&beta_map),
        alpha_beta_is_psi,
        x_identity,
        y_identity,
        iterated_cone_rank: iterated.complex.total_homology_rank(),
        cone_rank: cone0.complex.total_homology_rank(),
        target_rank: f1.target.total_homology_rank(),
    })
}

/// Check the hypotheses, then every conclusion at every index.
pub fn verify_key_lemma(t: &TriangleDatum) -> Result<KeyLemmaReport, KeyLemmaError> {
    let hypotheses = check_hypotheses(t)?;
    if !hypotheses.passed() {
        return Err(KeyLemmaError::Hypothesis(hypotheses.summary()));
    }
    let indices = t.indices().map(|i| check_index(t, i)).collect::<Result<Vec<_>, _>>()?;
    Ok(KeyLemmaReport { hypotheses, indices })
}

#[derive(Clone, Debug)]
pub struct FilteredIndexReport {
    pub i: usize,
    /// The filtration-preserving part of ψ_i is a quasi-isomorphism of associated graded complexes.
    pub graded_psi_quasi_iso: bool,
    /// α_i induces an isomorphism of page-1 tables.
    pub alpha_page1_iso: bool,
    /// Page 1 of the iterated cone is zero.
    pub iterated_page1_empty: bool,
}

impl FilteredIndexReport {
    pub fn passed(&self) -> bool {
        self.graded_psi_quasi_iso && self.alpha_page1_iso && self.iterated_page1_empty
    }
}

#[derive(Clone, Debug)]
pub struct FilteredKeyLemmaReport {
    pub base: KeyLemmaReport,
    pub indices: Vec<FilteredIndexReport>,
}

impl FilteredKeyLemmaReport {
    pub fn passed(&self) -> bool {
        self.base.passed() && self.indices.iter().all(FilteredIndexReport::passed)
    }
}

fn graded(c: &FilteredComplex) -> Arc<FilteredComplex> {
    Arc::new(c.associated_graded())
}

pub fn verify_filtered_key_lemma(t: &TriangleDatum) -> Result<FilteredKeyLemmaReport, KeyLemmaError> {
    t.check_shapes()?;
    for i in t.hypothesis_indices() {
        if let Some(h) = t.homotopy(i) {
            if let Some(v) = h.check().first() {
                return Err(KeyLemmaError::Unfiltered(format!("H_{i}: {v:?}")));
            }
        }
    }
    let base = verify_key_lemma(t)?;
    let field = t.field();
    let opts = ReduceOptions {
        order: ScanOrder::Stored,
        homotopy: false,
    };
    let mut indices = Vec::new();
    for i in t.indices() {
        let psi = t.psi(i)?;
        let gpsi = ChainMap {
            source: graded(&psi.source),
            target: graded(&psi.target),
            matrix: psi.graded_part(),
            ..psi.clone()
        };
        let graded_psi_quasi_iso = quasi_isomorphism(&gpsi).is_quasi_isomorphism;

        let f0 = t.map(i).expect("checked");
        let f1 = t.map(i + 1).expect("checked");
        let h0 = t.homotopy(i).expect("checked");
        let cone = cone_of(&f0)?;
        let alpha_matrix = hstack(field, f1.target.len(), &[&h0.matrix.neg(), &f1.matrix]);
        let alpha = ChainMap {
            source: cone.complex.clone(),
            target: f1.target.clone(),
            convention: detect_convention(&alpha_matrix, &cone.complex, &f1.target).unwrap_or_default(),
            matrix: alpha_matrix,
            degree: 0,
            filtration_shift: 0,
        };
        let src = compute_pages(&alpha.source, PageLimit::Upto(1), opts)?;
        let tgt = compute_pages(&alpha.target, PageLimit::Upto(1), opts)?;
        let a1 = induced_map(&alpha, &src, &tgt, 1)?;
        let ranks = page_map_ranks(&a1);
        let (st, tt) = (src.rank_table().page(1), tgt.rank_table().page(1));
        let alpha_page1_iso = st.iter().all(|(k, &v)| ranks.get(k) == Some(&v))
            && tt.iter().all(|(k, &v)| st.get(k) == Some(&v))
            && st.len() == tt.len();

        let iterated = iterated_mapping_cone(
            &ChainMap {
                convention: MapConvention::AntiChain,
                ..f0
            },
            &ChainMap {
                convention: MapConvention::AntiChain,
                ..f1
            },
            &h0,
        )?;
        let it_pages = compute_pages(&iterated.complex, PageLimit::Upto(1), opts)?;
        indices.push(FilteredIndexReport {
            i,
            graded_psi_quasi_iso,
            alpha_page1_iso,
            iterated_page1_empty: it_pages.rank_table().total(1) == 0,
        });
    }
    Ok(FilteredKeyLemmaReport { base, indices })
}

/// The period-3 instance: `A_0 = F`, `A_1 = F²`, `A_2 = F`, all in degree 0
/// with zero differential; `f_0(x) = (x, 0)`, `f_1(a, b) = b`, `f_2 = 0`,
/// `H_0 = 0`, `H_1(a, b) = a`, `H_2(b) = (0, b)`; degrees rise by one per period.
/// `filtrations` gives the levels of `A_0`, `A_1` (two) and `A_2`.
pub fn period_three_instance(field: Field, h1_zero: bool, filtrations: [i64; 4]) -> TriangleDatum {
    let c = |ids: &[(&str, i64)]| {
        Arc::new(
            FilteredComplex::free(field, ids.iter().map(|&(id, f)| Generator::new(id, 0, f)).collect())
                .expect("free complex"),
        )
    };
    let a0 = c(&[("x", filtrations[0])]);
    let a1 = c(&[("a", filtrations[1]), ("b", filtrations[2])]);
    let a2 = c(&[("c", filtrations[3])]);
    let m = |rows: &[Vec<i64>]| SparseMatrix::from_dense(field, rows);
    let f0 = m(&[vec![1], vec![0]]);
    let f1 = m(&[vec![0, 1]]);
    let f2 = SparseMatrix::zeros(field, 1, 1);
    let h0 = SparseMatrix::zeros(field, 1, 1);
    let h1 = if h1_zero {
        SparseMatrix::zeros(field, 1, 2)
    } else {
        m(&[vec![1, 0]])
    };
    let h2 = m(&[vec![0], vec![1]]);
    TriangleDatum {
        complexes: vec![a0, a1, a2],
        maps: vec![f0, f1, f2],
        homotopies: vec![h0, h1, h2],
        period_shift: Some(1),
        convention: MapConvention::AntiChain,
    }
}

/// Zero complexes with zero maps, cyclic of period 3.
pub fn zero_instance(field: Field) -> TriangleDatum {
    let z = Arc::new(FilteredComplex::empty(field));
    TriangleDatum {
        complexes: vec![z.clone(), z.clone(), z],
        maps: vec![SparseMatrix::zeros(field, 0, 0); 3],
        homotopies: vec![SparseMatrix::zeros(field, 0, 0); 3],
        period_shift: Some(1),
        convention: MapConvention::AntiChain,
    }
}

/// Random GF(2) instance: the triangle `A -f-> B -> MC(f) -> A[1]` of a
/// random filtered chain map, with homotopies `H_0(a) = (a, 0)`, `H_1 = 0`,
/// `H_2(a, b) = b`, each perturbed by `dL + Ld` and then conjugated by a
/// random filtered change of basis on each of the three complexes.
pub fn random_instance<R: Rng>(rng: &mut R, params: &ComplexParams) -> TriangleDatum {
    let field = Field::gf2();
    let params = ComplexParams {
        field,
        ..params.clone()
    };
    let a = random_complex(rng, &params);
    let b = random_complex(rng, &params);
    let f = random_chain_map(rng, &a, &b, 0.4);
    let cone = mapping_cone(&f).expect("chain map");
    let (na, nb) = (a.complex.len(), b.complex.len());
    let incl = cone.inclusion.matrix.clone();
    let proj = cone.projection.matrix.clone();
    let h0 = SparseMatrix::from_triplets(field, na + nb, na, (0..na).map(|k| (k, k, 1))).expect("in range");
    let h1 = SparseMatrix::zeros(field, na, nb);
    let h2 = SparseMatrix::from_triplets(field, nb, na + nb, (0..nb).map(|k| (k, na + k, 1))).expect("in range");
    let mut t = TriangleDatum {
        complexes: vec![a.complex.clone(), b.complex.clone(), cone.complex.clone()],
        maps: vec![f.matrix.clone(), incl, proj],
        homotopies: vec![h0, h1, h2],
        period_shift: Some(1),
        convention: MapConvention::Chain,
    };
    for i in 0..3 {
        let (s, tg) = (t.complex(i).expect("cyclic"), t.complex(i + 2).expect("cyclic"));
        let l = random_graded_matrix(rng, &s, &tg, 2, 0, 0.3);
        let dl = tg.differential().mul(&l).expect("composable");
        let ld = l.mul(s.differential()).expect("composable");
        t.homotopies[i] = t.homotopies[i].add(&dl).and_then(|m| m.add(&ld)).expect("same shape");
    }
    let bases: Vec<(SparseMatrix, SparseMatrix)> =
        t.complexes.iter().map(|c| random_unitriangular(rng, c, 0.3)).collect();
    let conj = |g: &SparseMatrix, m: &SparseMatrix, g_inv: &SparseMatrix| {
        g.mul(m).and_then(|x| x.mul(g_inv)).expect("composable")
    };
    let complexes = t
        .complexes
        .iter()
        .zip(&bases)
        .map(|(c, (g, gi))| {
            Arc::new(
                FilteredComplex::new(field, c.generators().to_vec(), conj(g, c.differential(), gi))
                    .expect("conjugate complex is valid"),
            )
        })
        .collect();
    let maps = (0..3).map(|i| conj(&bases[(i + 1) % 3].0, &t.maps[i], &bases[i].1)).collect();
    let homotopies = (0..3)
        .map(|i| conj(&bases[(i + 2) % 3].0, &t.homotopies[i], &bases[i].1))
        .collect();
    TriangleDatum {
        complexes,
        maps,
        homotopies,
        period_shift: Some(1),
        convention: MapConvention::Chain,
    }
}

/// Outcome of a batch of random instances.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RandomRunStats {
    pub generated: usize,
    pub discarded: usize,
    pub passed: usize,
    pub failed: usize,
}

/// Generate instances until `count` satisfy the hypotheses; run both
/// verifiers on each. Instances failing the hypotheses are discarded.
pub fn run_random_instances<R: Rng>(rng: &mut R, params: &ComplexParams, count: usize) -> RandomRunStats {
    let mut stats = RandomRunStats::default();
    while stats.passed + stats.failed < count && stats.generated < 20 * count.max(1) {
        let t = random_instance(rng, params);
        stats.generated += 1;
        match check_hypotheses(&t) {
            Ok(h) if h.passed() => {}
            _ => {
                stats.discarded += 1;
                continue;
            }
        }
        let ok = matches!(verify_key_lemma(&t), Ok(r) if r.passed())
            && matches!(verify_filtered_key_lemma(&t), Ok(r) if r.passed());
        if ok {
            stats.passed += 1;
        } else {
            stats.failed += 1;
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn period_three_passes() {
        for p in [2, 3] {
            let field = Field::new(p).unwrap();
            let t = period_three_instance(field, false, [0; 4]);
            let h = check_hypotheses(&t).unwrap();
            assert!(h.passed(), "{}", h.summary());
            for i in 0..3 {
                let psi = t.psi(i).unwrap();
                let expect = SparseMatrix::identity(field, psi.source.len()).neg();
                assert_eq!(psi.matrix, expect);
            }
            let r = verify_key_lemma(&t).unwrap();
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.indices[0].cone_rank, 1);
            assert_eq!(r.indices[0].target_rank, 1);
            assert_eq!(r.indices[0].iterated_cone_rank, 0);
        }
    }

    #[test]
    fn period_three_mutant_fails_second_hypothesis() {
        let t = period_three_instance(Field::gf2(), true, [0; 4]);
        let h = check_hypotheses(&t).unwrap();
        assert!(h.first_holds());
        assert!(!h.second_holds());
        assert!(h.psi[0].quasi_iso.degrees.values().all(|&(_, _, r)| r == 0));
        assert!(matches!(verify_key_lemma(&t), Err(KeyLemmaError::Hypothesis(_))));
    }

    #[test]
    fn zero_instance_passes() {
        let t = zero_instance(Field::gf2());
        assert!(verify_filtered_key_lemma(&t).unwrap().passed());
    }

    #[test]
    fn filtered_period_three() {
        let t = period_three_instance(Field::gf2(), false, [0, 0, 1, 1]);
        let r = verify_filtered_key_lemma(&t).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn random_instances_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let stats = run_random_instances(&mut rng, &ComplexParams::gf2(8, 3), 10);
        assert_eq!(stats.passed, 10, "{stats:?}");
    }

    #[test]
    fn perturbed_homotopy_is_rejected_exactly_when_not_closed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rejected = 0;
        for _ in 0..20 {
            let mut t = random_instance(&mut rng, &ComplexParams::gf2(8, 3));
            let (s, tg) = (t.complex(0).unwrap(), t.complex(2).unwrap());
            let m = random_graded_matrix(&mut rng, &s, &tg, 1, 0, 0.5);
            let closed = tg
                .differential()
                .mul(&m)
                .unwrap()
                .add(&m.mul(s.differential()).unwrap())
                .unwrap()
                .is_zero();
            t.homotopies[0] = t.homotopies[0].add(&m).unwrap();
            let h = check_hypotheses(&t).unwrap();
            assert_eq!(h.first_holds(), closed);
            if !closed {
                rejected += 1;
                assert!(verify_key_lemma(&t).is_err());
            }
        }
        assert!(rejected > 0);
    }
}
