use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specseq::complex::{mapping_cone, ChainMap, FilteredComplex, Generator, MapConvention};
use specseq::cube::{
    is_complete, last_position_sequence, successor_sequences, Alphabet, Code, CodeSet, CubeComplex, CubeError, Letter,
};
use specseq::linalg::{Field, SparseMatrix};
use specseq::random::{random_chain_map, random_complex, random_graded_matrix, ComplexParams};
use specseq::reduce::{compute_pages, PageLimit, ReduceOptions};

fn code(s: &str) -> Code {
    s.parse().unwrap()
}

/// Orders in which the positions of an all-a code can be flipped to b.
fn flip_orders(remaining: &mut Vec<usize>, out: &mut usize) {
    if remaining.is_empty() {
        *out += 1;
        return;
    }
    for k in 0..remaining.len() {
        let p = remaining.remove(k);
        flip_orders(remaining, out);
        remaining.insert(k, p);
    }
}

#[test]
fn successor_sequence_counts_are_factorial() {
    for n in 1..=6 {
        let seqs = successor_sequences(&Code::constant(n, Letter::A), &Code::constant(n, Letter::B), Alphabet::Ab);
        let mut count = 0;
        flip_orders(&mut (0..n).collect(), &mut count);
        assert_eq!(seqs.len(), count);
        assert_eq!(count, (1..=n).product::<usize>());
        let distinct: BTreeSet<_> = seqs.iter().collect();
        assert_eq!(distinct.len(), seqs.len());
        assert!(seqs.iter().all(|s| s.len() == n + 1));
    }
}

fn brute_complete(s: &CodeSet, n: usize) -> bool {
    let all = Code::all(n, Alphabet::Abc);
    s.iter().all(|i| {
        s.iter()
            .filter(|j| i.is_below(j))
            .all(|j| all.iter().filter(|k| i.is_below(k) && k.is_below(j)).all(|k| s.contains(k)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn completeness_matches_definition(mask in prop::collection::vec(any::<bool>(), 27)) {
        let all = Code::all(3, Alphabet::Abc);
        let s: CodeSet = all.into_iter().zip(mask).filter(|(_, m)| *m).map(|(c, _)| c).collect();
        let result = is_complete(&s);
        prop_assert_eq!(result.is_ok(), brute_complete(&s, 3));
        if let Err(w) = result {
            prop_assert!(s.contains(&w.lower) && s.contains(&w.upper) && !s.contains(&w.missing));
            prop_assert!(w.lower.is_below(&w.missing) && w.missing.is_below(&w.upper));
        }
    }
}

fn rename(c: &FilteredComplex, from: &str, to: &str) -> Vec<Generator> {
    c.generators()
        .iter()
        .map(|g| Generator {
            id: g.id.replacen(from, to, 1).replacen("tgt/", "b/", 1),
            ..g.clone()
        })
        .collect()
}

fn one_dimensional_cube(f: &ChainMap, b: Arc<FilteredComplex>) -> CubeComplex {
    let mut cc = CubeComplex::new(1, Alphabet::Ab, f.source.field());
    cc.set_vertex(code("a"), f.source.clone()).unwrap();
    cc.set_vertex(code("b"), b).unwrap();
    cc.set_map(vec![code("a"), code("b")], f.matrix.clone()).unwrap();
    cc
}

#[test]
fn one_dimensional_cube_is_the_mapping_cone() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in [2u32, 3] {
        let params = ComplexParams {
            field: Field::new(p).unwrap(),
            ..ComplexParams::gf2(12, 3)
        };
        for _ in 0..25 {
            let a = random_complex(&mut rng, &params);
            let b = random_complex(&mut rng, &params);
            let g = random_chain_map(&mut rng, &a, &b, 0.4);
            // the cube places its b vertex one filtration level lower
            let target = Arc::new(b.complex.shift_filtration(-1));
            let field = params.field;
            // at odd p the cube edge is an anti-chain map: g composed with (-1)^deg
            let sign = SparseMatrix::from_triplets(
                field,
                a.complex.len(),
                a.complex.len(),
                (0..a.complex.len()).map(|k| (k, k, if a.complex.generator(k).degree % 2 == 0 { 1 } else { -1 })),
            )
            .unwrap();
            let (matrix, convention) = if p == 2 {
                (g.matrix.clone(), MapConvention::Chain)
            } else {
                (g.matrix.mul(&sign).unwrap(), MapConvention::AntiChain)
            };
            let f = ChainMap::with_options(a.complex.clone(), target, matrix, 0, 0, convention).unwrap();
            let cone = mapping_cone(&f).unwrap().complex;
            let cube = one_dimensional_cube(&f, b.complex.clone()).assemble(&CodeSet::full(1, Alphabet::Ab)).unwrap();
            assert_eq!(rename(&cone, "src/", "a/"), cube.complex.generators());
            assert_eq!(cone.differential(), cube.complex.differential());
        }
    }
}

struct Square {
    cube: CubeComplex,
    diagonal: SparseMatrix,
    defect: SparseMatrix,
}

/// Vertices A at aa and ab, B at ba, D at bb, with f: A -> B, g: B -> D,
/// identity A -> A and f' = g f + dh + hd, so the square fails to commute by
/// the boundary of h.
fn seeded_square(seed: u64) -> Square {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = ComplexParams::gf2(10, 2);
    loop {
        let a = random_complex(&mut rng, &params);
        let b = random_complex(&mut rng, &params);
        let d = random_complex(&mut rng, &params);
        let f = random_chain_map(&mut rng, &a, &b, 0.5);
        let g = random_chain_map(&mut rng, &b, &d, 0.5);
        let h = random_graded_matrix(&mut rng, &a.complex, &d.complex, 1, 0, 0.5);
        let dh = d.complex.differential().mul(&h).unwrap();
        let hd = h.mul(a.complex.differential()).unwrap();
        let boundary = dh.add(&hd).unwrap();
        if boundary.is_zero() {
            continue;
        }
        let gf = g.matrix.mul(&f.matrix).unwrap();
        let f_prime = gf.add(&boundary).unwrap();
        let field = Field::gf2();
        let mut cube = CubeComplex::new(2, Alphabet::Ab, field);
        cube.set_vertex(code("aa"), a.complex.clone()).unwrap();
        cube.set_vertex(code("ab"), a.complex.clone()).unwrap();
        cube.set_vertex(code("ba"), b.complex.clone()).unwrap();
        cube.set_vertex(code("bb"), d.complex.clone()).unwrap();
        cube.set_map(vec![code("aa"), code("ba")], f.matrix.clone()).unwrap();
        cube.set_map(vec![code("ba"), code("bb")], g.matrix.clone()).unwrap();
        cube.set_map(vec![code("aa"), code("ab")], SparseMatrix::identity(field, a.complex.len())).unwrap();
        cube.set_map(vec![code("ab"), code("bb")], f_prime).unwrap();
        return Square {
            cube,
            diagonal: h,
            defect: boundary,
        };
    }
}

#[test]
fn non_commuting_square_needs_its_diagonal() {
    for seed in 0..20 {
        let Square { mut cube, diagonal, defect } = seeded_square(seed);
        let s = CodeSet::full(2, Alphabet::Ab);
        match cube.assemble(&s) {
            Err(CubeError::SquareNonzero { defect: got, pairs }) => {
                assert_eq!(pairs, vec![(code("aa"), code("bb"))]);
                assert_eq!(got.nnz(), defect.nnz());
            }
            other => panic!("expected a D^2 defect, got {other:?}"),
        }
        cube.set_map(vec![code("aa"), code("ba"), code("bb")], diagonal).unwrap();
        let assembled = cube.assemble(&s).unwrap();
        assert!(assembled.complex.validate().passed());
    }
}

#[test]
fn edge_only_square_commutes_iff_square_is_zero() {
    let field = Field::gf2();
    let point = Arc::new(FilteredComplex::free(field, vec![Generator::new("x", 0, 0)]).unwrap());
    let one = SparseMatrix::identity(field, 1);
    let zero = SparseMatrix::zeros(field, 1, 1);
    for mask in 0u8..16 {
        let mut cube = CubeComplex::new(2, Alphabet::Ab, field);
        for c in ["aa", "ab", "ba", "bb"] {
            cube.set_vertex(code(c), point.clone()).unwrap();
        }
        let edges = [("aa", "ba"), ("ba", "bb"), ("aa", "ab"), ("ab", "bb")];
        let bits: Vec<bool> = (0..4).map(|k| mask >> k & 1 == 1).collect();
        for (k, (s, t)) in edges.iter().enumerate() {
            cube.set_map(vec![code(s), code(t)], if bits[k] { one.clone() } else { zero.clone() }).unwrap();
        }
        let commutes = (bits[0] && bits[1]) == (bits[2] && bits[3]);
        assert_eq!(cube.assemble(&CodeSet::full(2, Alphabet::Ab)).is_ok(), commutes, "mask {mask}");
    }
}

#[test]
fn cone_of_identity_vanishes_by_page_two() {
    let field = Field::gf2();
    for size in 1..8 {
        // vertex filtrations must be flat for the E1 description
        let gens: Vec<Generator> = (0..size).map(|k| Generator::new(format!("g{k}"), k % 3, 0)).collect();
        let x = Arc::new(FilteredComplex::free(field, gens).unwrap());
        let mut cube = CubeComplex::new(1, Alphabet::Ab, field);
        cube.set_vertex(code("a"), x.clone()).unwrap();
        cube.set_vertex(code("b"), x.clone()).unwrap();
        cube.set_map(vec![code("a"), code("b")], SparseMatrix::identity(field, x.len())).unwrap();
        let (_, pages) = cube.pages(ReduceOptions::default()).unwrap();
        assert_eq!(pages.pages[2].complex.len(), 0);
        assert_eq!(pages.pages[1].complex.len(), 2 * x.len());
    }
}

#[test]
fn flat_random_cubes_have_vertex_homology_on_page_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let field = Field::gf2();
    let params = ComplexParams::gf2(8, 0);
    for _ in 0..30 {
        // a commuting square of random chain maps: A -> B -> D and A -> A -> D
        let a = random_complex(&mut rng, &params);
        let b = random_complex(&mut rng, &params);
        let d = random_complex(&mut rng, &params);
        let f = random_chain_map(&mut rng, &a, &b, 0.5);
        let g = random_chain_map(&mut rng, &b, &d, 0.5);
        let mut cube = CubeComplex::new(2, Alphabet::Ab, field);
        cube.set_vertex(code("aa"), a.complex.clone()).unwrap();
        cube.set_vertex(code("ab"), a.complex.clone()).unwrap();
        cube.set_vertex(code("ba"), b.complex.clone()).unwrap();
        cube.set_vertex(code("bb"), d.complex.clone()).unwrap();
        cube.set_map(vec![code("aa"), code("ba")], f.matrix.clone()).unwrap();
        cube.set_map(vec![code("ba"), code("bb")], g.matrix.clone()).unwrap();
        cube.set_map(vec![code("aa"), code("ab")], SparseMatrix::identity(field, a.complex.len())).unwrap();
        cube.set_map(vec![code("ab"), code("bb")], g.matrix.mul(&f.matrix).unwrap()).unwrap();
        // pages() checks page 1 against vertex homology and d1 support itself
        let (assembled, pages) = cube.pages(ReduceOptions::default()).unwrap();
        let direct = compute_pages(&assembled.complex, PageLimit::Collapse, ReduceOptions::default()).unwrap();
        assert_eq!(pages.rank_table(), direct.rank_table());
    }
}

#[test]
fn last_position_short_exact_sequence() {
    let field = Field::gf2();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let x = random_complex(&mut rng, &ComplexParams::gf2(8, 0)).complex;
        let id = SparseMatrix::identity(field, x.len());
        let zero = SparseMatrix::zeros(field, x.len(), x.len());
        let mut cube = CubeComplex::new(2, Alphabet::Abc, field);
        let s: Vec<Code> = Code::all(2, Alphabet::Abc).into_iter().filter(|c| c.0[0] != Letter::C).collect();
        for c in &s {
            cube.set_vertex(c.clone(), x.clone()).unwrap();
        }
        for first in ["a", "b", "c"] {
            cube.set_map(vec![code(&format!("a{first}")), code(&format!("b{first}"))], id.clone()).unwrap();
        }
        for first in ["a", "b"] {
            cube.set_map(vec![code(&format!("{first}a")), code(&format!("{first}b"))], id.clone()).unwrap();
            cube.set_map(vec![code(&format!("{first}b")), code(&format!("{first}c"))], zero.clone()).unwrap();
        }
        let ses = last_position_sequence(&cube).unwrap();
        assert!(ses.sub_matches_assembly && ses.quotient_matches_assembly);
        assert_eq!(ses.sub.len() + ses.quotient.len(), ses.whole.complex.len());
        let chi = |c: &FilteredComplex| c.euler_characteristic();
        assert_eq!(chi(&ses.whole.complex), chi(&ses.sub) + chi(&ses.quotient));
    }
}

#[test]
fn incomplete_sets_are_rejected() {
    let field = Field::gf2();
    let mut cube = CubeComplex::new(2, Alphabet::Ab, field);
    for c in ["aa", "bb"] {
        cube.set_vertex(code(c), Arc::new(FilteredComplex::empty(field))).unwrap();
    }
    let s: CodeSet = [code("aa"), code("bb")].into_iter().collect();
    assert!(matches!(cube.assemble(&s), Err(CubeError::Incomplete { .. })));
}
