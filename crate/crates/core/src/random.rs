//! Seeded random filtered complexes and filtered chain maps.
//!
//! A random complex is built as `d = g D g⁻¹`, where `D` pairs generators
//! `x -> y` (one degree lower, filtration not higher) and leaves the rest
//! free, and `g` is a random filtered unitriangular change of basis. Random
//! chain maps are `g_B F₀ g_A⁻¹ + dK + Kd` with `F₀` respecting the pairing.

use std::ops::RangeInclusive;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::complex::{mapping_cone, ChainMap, FilteredComplex, Generator, MapConvention};
use crate::linalg::{Field, SparseMatrix};

#[derive(Clone, Debug)]
pub struct ComplexParams {
    pub field: Field,
    pub max_generators: usize,
    /// Filtration levels are drawn from `0..=filtration_span`.
    pub filtration_span: i64,
    pub degrees: RangeInclusive<i64>,
    /// Probability of each allowed off-diagonal entry in the change of basis.
    pub density: f64,
}

impl ComplexParams {
    pub fn gf2(max_generators: usize, filtration_span: i64) -> Self {
        ComplexParams {
            field: Field::gf2(),
            max_generators,
            filtration_span,
            degrees: 0..=3,
            density: 0.3,
        }
    }
}

/// A random complex together with the data it was built from.
#[derive(Clone, Debug)]
pub struct RandomComplex {
    pub complex: Arc<FilteredComplex>,
    pub canonical: Arc<FilteredComplex>,
    /// `complex.differential = basis * canonical.differential * basis_inv`.
    pub basis: SparseMatrix,
    pub basis_inv: SparseMatrix,
    /// `(x, y)` index pairs with `D x = y`.
    pub pairs: Vec<(usize, usize)>,
    pub free: Vec<usize>,
}

fn nonzero<R: Rng>(rng: &mut R, field: Field) -> i64 {
    rng.gen_range(1..field.characteristic()) as i64
}

/// Random filtered, degree-preserving unitriangular `g` and its inverse:
/// `g(x_c)` may involve `x_r` when `r` precedes `c` in (filtration, index) order
/// and the degrees agree.
pub fn random_unitriangular<R: Rng>(rng: &mut R, c: &FilteredComplex, density: f64) -> (SparseMatrix, SparseMatrix) {
    let field = c.field();
    let n = c.len();
    let key = |k: usize| (c.generator(k).filtration, k);
    let mut triplets: Vec<(usize, usize, i64)> = (0..n).map(|k| (k, k, 1)).collect();
    for col in 0..n {
        for row in 0..n {
            if key(row) < key(col) && c.generator(row).degree == c.generator(col).degree && rng.gen_bool(density) {
                triplets.push((row, col, nonzero(rng, field)));
            }
        }
    }
    let g = SparseMatrix::from_triplets(field, n, n, triplets).expect("in range");
    let inv = g.inverse().expect("unitriangular is invertible");
    (g, inv)
}

/// Random matrix `source -> target` raising degree by `degree` and filtration by at most `order`.
pub fn random_graded_matrix<R: Rng>(
    rng: &mut R,
    source: &FilteredComplex,
    target: &FilteredComplex,
    degree: i64,
    order: i64,
    density: f64,
) -> SparseMatrix {
    let field = source.field();
    let mut triplets = Vec::new();
    for (c, x) in source.generators().iter().enumerate() {
        for (r, y) in target.generators().iter().enumerate() {
            if y.degree == x.degree + degree && y.filtration <= x.filtration + order && rng.gen_bool(density) {
                triplets.push((r, c, nonzero(rng, field)));
            }
        }
    }
    SparseMatrix::from_triplets(field, target.len(), source.len(), triplets).expect("in range")
}

pub fn random_complex<R: Rng>(rng: &mut R, params: &ComplexParams) -> RandomComplex {
    let field = params.field;
    let n = rng.gen_range(0..=params.max_generators);
    let (lo, hi) = (*params.degrees.start(), *params.degrees.end());
    let span = params.filtration_span;
    let pair_count = if n >= 2 && hi > lo { rng.gen_range(0..=n / 2) } else { 0 };
    // (degree, filtration, role) with role Some(k) for the top/bottom of pair k
    let mut cells: Vec<(i64, i64, Option<(usize, bool)>)> = Vec::with_capacity(n);
    for k in 0..pair_count {
        let d = rng.gen_range(lo + 1..=hi);
        let fx = rng.gen_range(0..=span);
        let fy = rng.gen_range(0..=fx);
        cells.push((d, fx, Some((k, true))));
        cells.push((d - 1, fy, Some((k, false))));
    }
    while cells.len() < n {
        cells.push((rng.gen_range(lo..=hi), rng.gen_range(0..=span), None));
    }
    cells.shuffle(rng);
    let generators: Vec<Generator> = cells
        .iter()
        .enumerate()
        .map(|(k, &(d, f, _))| Generator::new(format!("g{k}"), d, f))
        .collect();
    let mut top = vec![0; pair_count];
    let mut bottom = vec![0; pair_count];
    let mut free = Vec::new();
    for (idx, cell) in cells.iter().enumerate() {
        match cell.2 {
            Some((k, true)) => top[k] = idx,
            Some((k, false)) => bottom[k] = idx,
            None => free.push(idx),
        }
    }
    let pairs: Vec<(usize, usize)> = top.into_iter().zip(bottom).collect();
    let d = SparseMatrix::from_triplets(field, n, n, pairs.iter().map(|&(x, y)| (y, x, 1))).expect("in range");
    let canonical = FilteredComplex::new(field, generators, d).expect("canonical complex is valid");
    let (g, g_inv) = random_unitriangular(rng, &canonical, params.density);
    let diff = g
        .mul(canonical.differential())
        .and_then(|m| m.mul(&g_inv))
        .expect("square");
    let complex = FilteredComplex::new(field, canonical.generators().to_vec(), diff).expect("conjugate is valid");
    RandomComplex {
        complex: Arc::new(complex),
        canonical: Arc::new(canonical),
        basis: g,
        basis_inv: g_inv,
        pairs,
        free,
    }
}

/// Random degree-0 filtered chain map `a -> b` (chain convention).
pub fn random_chain_map<R: Rng>(rng: &mut R, a: &RandomComplex, b: &RandomComplex, density: f64) -> ChainMap {
    let field = a.complex.field();
    let (ca, cb) = (&a.canonical, &b.canonical);
    let mut triplets = Vec::new();
    // free generators go to cycles: free generators and pair bottoms
    for &s in &a.free {
        let x = ca.generator(s);
        let targets = b.free.iter().copied().chain(b.pairs.iter().map(|p| p.1));
        for t in targets {
            let y = cb.generator(t);
            if y.degree == x.degree && y.filtration <= x.filtration && rng.gen_bool(density) {
                triplets.push((t, s, nonzero(rng, field)));
            }
        }
    }
    // pairs go to pairs with a common coefficient
    for &(sx, sy) in &a.pairs {
        for &(tx, ty) in &b.pairs {
            let ok = cb.generator(tx).degree == ca.generator(sx).degree
                && cb.generator(tx).filtration <= ca.generator(sx).filtration
                && cb.generator(ty).filtration <= ca.generator(sy).filtration;
            if ok && rng.gen_bool(density) {
                let c = nonzero(rng, field);
                triplets.push((tx, sx, c));
                triplets.push((ty, sy, c));
            }
        }
    }
    let f0 = SparseMatrix::from_triplets(field, cb.len(), ca.len(), triplets).expect("in range");
    let conj = b.basis.mul(&f0).and_then(|m| m.mul(&a.basis_inv)).expect("composable");
    let k = random_graded_matrix(rng, &a.complex, &b.complex, 1, 0, density / 2.0);
    let dk = b.complex.differential().mul(&k).expect("composable");
    let kd = k.mul(a.complex.differential()).expect("composable");
    let matrix = conj.add(&dk).and_then(|m| m.add(&kd)).expect("same shape");
    ChainMap::with_options(a.complex.clone(), b.complex.clone(), matrix, 0, 0, MapConvention::Chain)
        .expect("construction gives a filtered chain map")
}

/// Mapping cone of a random filtered chain map between two random complexes
/// of at most half the generator budget each.
pub fn random_cone_complex<R: Rng>(rng: &mut R, params: &ComplexParams) -> Arc<FilteredComplex> {
    let half = ComplexParams {
        max_generators: params.max_generators / 2,
        degrees: *params.degrees.start()..=*params.degrees.end() - 1,
        ..params.clone()
    };
    let a = random_complex(rng, &half);
    let b = random_complex(rng, &half);
    let f = random_chain_map(rng, &a, &b, 0.4);
    mapping_cone(&f).expect("chain map has a cone").complex
}
