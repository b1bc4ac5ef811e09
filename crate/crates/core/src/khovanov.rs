//! GF(2) Khovanov cubes from planar diagram codes.
//!
//! A crossing `X[i,j,k,l]` lists arcs counter-clockwise from the incoming
//! under-strand. The 0-smoothing (letter `a`) joins `i` with `l` and `j` with
//! `k`; the 1-smoothing (letter `b`) joins `i` with `j` and `k` with `l`.
//! Each circle carries `V = GF(2)⟨1, x⟩`; edges merge with `m` and split
//! with `Δ`. The reduced theory keeps the basepoint circle labelled `x`.
//!
//! In the assembled complex a generator at a vertex with `r` one-smoothings
//! has degree `n₋ - r` (the negated homological grading, since the engine
//! differential lowers degree), filtration `-r`, and extra grading
//! `quantum = #1 - #x + r + n₊ - 2n₋`, plus one when reduced.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::complex::{FilteredComplex, Generator};
use crate::cube::{Alphabet, Assembled, Code, CodeSet, CubeComplex, CubeError, Letter};
use crate::linalg::{Field, SparseMatrix};

pub const QUANTUM: &str = "quantum";

#[derive(Debug, Error)]
pub enum KhovanovError {
    #[error("arc {arc} occurs {count} times (expected 2)")]
    ArcCount { arc: u32, count: usize },
    #[error("arc labels must be positive")]
    ZeroArc,
    #[error("diagram is split: crossings {0} and {1} lie in different pieces")]
    Split(usize, usize),
    #[error("crossing {0} has sign {1}, expected +1 or -1")]
    BadSign(usize, i64),
    #[error("basepoint arc {0} does not occur in the diagram")]
    MissingBasepoint(u32),
    #[error("vertex code has length {got}, diagram has {expected} crossings")]
    VertexLength { got: usize, expected: usize },
    #[error("edge at crossing {0} neither merges nor splits")]
    NotMergeOrSplit(usize),
    #[error("cannot parse planar diagram: {0}")]
    Parse(String),
    #[error(transparent)]
    Cube(#[from] CubeError),
}

/// A planar diagram with optional crossing signs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PdCode {
    pub crossings: Vec<[u32; 4]>,
    pub signs: Option<Vec<i8>>,
}

impl PdCode {
    pub fn new(crossings: Vec<[u32; 4]>) -> Result<Self, KhovanovError> {
        let pd = PdCode { crossings, signs: None };
        pd.validate()?;
        Ok(pd)
    }

    pub fn with_signs(mut self, signs: Vec<i8>) -> Result<Self, KhovanovError> {
        for (k, &s) in signs.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(KhovanovError::BadSign(k, s as i64));
            }
        }
        self.signs = Some(signs);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.crossings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }

    pub fn arcs(&self) -> Vec<u32> {
        let mut a: Vec<u32> = self.crossings.iter().flatten().copied().collect();
        a.sort_unstable();
        a.dedup();
        a
    }

    /// Every arc occurs twice and the crossings form one connected piece.
    pub fn validate(&self) -> Result<(), KhovanovError> {
        let mut count: BTreeMap<u32, usize> = BTreeMap::new();
        for &a in self.crossings.iter().flatten() {
            if a == 0 {
                return Err(KhovanovError::ZeroArc);
            }
            *count.entry(a).or_default() += 1;
        }
        if let Some((&arc, &c)) = count.iter().find(|(_, &c)| c != 2) {
            return Err(KhovanovError::ArcCount { arc, count: c });
        }
        if let Some(signs) = &self.signs {
            if signs.len() != self.len() {
                return Err(KhovanovError::Parse(format!("{} signs for {} crossings", signs.len(), self.len())));
            }
        }
        let mut uf = UnionFind::new(self.len());
        let mut first: HashMap<u32, usize> = HashMap::new();
        for (c, x) in self.crossings.iter().enumerate() {
            for &a in x {
                if let Some(&d) = first.get(&a) {
                    uf.union(c, d);
                } else {
                    first.insert(a, c);
                }
            }
        }
        if let Some(c) = (1..self.len()).find(|&c| uf.find(c) != uf.find(0)) {
            return Err(KhovanovError::Split(0, c));
        }
        Ok(())
    }

    /// Signs from orienting every component along its under-strands.
    /// Components that are never an under-strand get an arbitrary direction.
    /// A crossing is positive when its 0-smoothing is the oriented one, that
    /// is when the over-strand runs from `j` to `l`.
    pub fn with_inferred_signs(mut self) -> Self {
        let mut occ: HashMap<u32, Vec<(usize, usize)>> = HashMap::new();
        for (c, x) in self.crossings.iter().enumerate() {
            for (p, &a) in x.iter().enumerate() {
                occ.entry(a).or_default().push((c, p));
            }
        }
        // entry[c][p]: whether the strand enters crossing c at position p
        let mut entry: Vec<[Option<bool>; 4]> = vec![[None; 4]; self.len()];
        let mut starts: Vec<(usize, usize)> = (0..self.len()).map(|c| (c, 0)).collect();
        starts.extend((0..self.len()).map(|c| (c, 1)));
        for (c0, p0) in starts {
            if entry[c0][p0].is_some() {
                continue;
            }
            let (mut c, mut p) = (c0, p0);
            while entry[c][p].is_none() {
                entry[c][p] = Some(true);
                let out = (p + 2) % 4;
                entry[c][out] = Some(false);
                let arc = self.crossings[c][out];
                let o = &occ[&arc];
                let next = if o[0] == (c, out) { o[1] } else { o[0] };
                (c, p) = next;
            }
        }
        let signs = entry.iter().map(|e| if e[1] == Some(true) { 1 } else { -1 }).collect();
        self.signs = Some(signs);
        self
    }

    /// `(n₊, n₋)`, or `None` without signs.
    pub fn sign_counts(&self) -> Option<(usize, usize)> {
        self.signs.as_ref().map(|s| {
            let plus = s.iter().filter(|&&x| x > 0).count();
            (plus, s.len() - plus)
        })
    }

    /// `PD[X(1,4,2,5), ...]` or `X[1,4,2,5], ...`.
    pub fn parse_text(s: &str) -> Result<Self, KhovanovError> {
        let body = s.trim();
        let body = body.strip_prefix("PD").unwrap_or(body);
        let mut crossings = Vec::new();
        let mut rest = body;
        while let Some(pos) = rest.find('X') {
            rest = &rest[pos + 1..];
            let open = rest.chars().next().ok_or_else(|| KhovanovError::Parse(s.to_owned()))?;
            let close = match open {
                '(' => ')',
                '[' => ']',
                _ => return Err(KhovanovError::Parse(s.to_owned())),
            };
            let end = rest.find(close).ok_or_else(|| KhovanovError::Parse(s.to_owned()))?;
            let nums: Vec<u32> = rest[1..end]
                .split(',')
                .map(|t| t.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| KhovanovError::Parse(rest[..=end].to_owned()))?;
            let arr: [u32; 4] = nums.try_into().map_err(|_| KhovanovError::Parse(rest[..=end].to_owned()))?;
            crossings.push(arr);
            rest = &rest[end + 1..];
        }
        PdCode::new(crossings)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Arc pairs joined at a crossing by a smoothing.
fn smoothing_pairs(x: &[u32; 4], l: Letter) -> [(u32, u32); 2] {
    let [i, j, k, m] = *x;
    match l {
        Letter::A => [(i, m), (j, k)],
        _ => [(i, j), (k, m)],
    }
}

/// Circles of a smoothing, each a sorted arc list, ordered by least arc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub vertex: Code,
    pub circles: Vec<Vec<u32>>,
}

impl Resolution {
    pub fn circle_of(&self, arc: u32) -> Option<usize> {
        self.circles.iter().position(|c| c.binary_search(&arc).is_ok())
    }
}

/// The crossingless diagram is one circle with no arcs.
pub fn resolve(pd: &PdCode, vertex: &Code) -> Result<Resolution, KhovanovError> {
    if vertex.len() != pd.len() {
        return Err(KhovanovError::VertexLength {
            got: vertex.len(),
            expected: pd.len(),
        });
    }
    if pd.is_empty() {
        return Ok(Resolution {
            vertex: vertex.clone(),
            circles: vec![Vec::new()],
        });
    }
    let arcs = pd.arcs();
    let index: HashMap<u32, usize> = arcs.iter().enumerate().map(|(k, &a)| (a, k)).collect();
    let mut uf = UnionFind::new(arcs.len());
    for (x, &l) in pd.crossings.iter().zip(&vertex.0) {
        for (u, v) in smoothing_pairs(x, l) {
            uf.union(index[&u], index[&v]);
        }
    }
    let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for (k, &a) in arcs.iter().enumerate() {
        groups.entry(uf.find(k)).or_default().push(a);
    }
    // union-find roots are least indices, so BTreeMap order is least-arc order
    Ok(Resolution {
        vertex: vertex.clone(),
        circles: groups.into_values().collect(),
    })
}

/// Labels per circle: `false = 1`, `true = x`.
type Labels = Vec<bool>;

fn label_id(l: &Labels) -> String {
    l.iter().map(|&x| if x { 'x' } else { '1' }).collect()
}

struct VertexData {
    resolution: Resolution,
    labels: Vec<Labels>,
    index: HashMap<Labels, usize>,
}

fn vertex_data(pd: &PdCode, code: &Code, basepoint: Option<u32>) -> Result<VertexData, KhovanovError> {
    let resolution = resolve(pd, code)?;
    let k = resolution.circles.len();
    let marked = match basepoint {
        Some(_) if pd.is_empty() => Some(0),
        Some(a) => Some(resolution.circle_of(a).ok_or(KhovanovError::MissingBasepoint(a))?),
        None => None,
    };
    let labels: Vec<Labels> = (0..1usize << k)
        .map(|bits| (0..k).map(|c| bits >> (k - 1 - c) & 1 == 1).collect::<Labels>())
        .filter(|l| marked.is_none_or(|m| l[m]))
        .collect();
    let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
    Ok(VertexData {
        resolution,
        labels,
        index,
    })
}

/// Images of a labelling under the edge map from `src` to `tgt`.
fn edge_image(src: &Resolution, tgt: &Resolution, l: &Labels, crossing: usize) -> Result<Vec<Labels>, KhovanovError> {
    let same: Vec<Option<usize>> = tgt.circles.iter().map(|c| src.circles.iter().position(|d| d == c)).collect();
    let new_tgt: Vec<usize> = (0..tgt.circles.len()).filter(|&t| same[t].is_none()).collect();
    let old_src: Vec<usize> = (0..src.circles.len()).filter(|&s| !same.contains(&Some(s))).collect();
    let mut base: Labels = same.iter().map(|s| s.map(|s| l[s]).unwrap_or(false)).collect();
    match (old_src.as_slice(), new_tgt.as_slice()) {
        (&[s1, s2], &[t]) => {
            // merge: 1·1 = 1, 1·x = x, x·x = 0
            let (a, b) = (l[s1], l[s2]);
            if a && b {
                return Ok(Vec::new());
            }
            base[t] = a || b;
            Ok(vec![base])
        }
        (&[s], &[t1, t2]) => {
            // split: Δ1 = 1⊗x + x⊗1, Δx = x⊗x
            if l[s] {
                base[t1] = true;
                base[t2] = true;
                Ok(vec![base])
            } else {
                let mut other = base.clone();
                base[t2] = true;
                other[t1] = true;
                Ok(vec![base, other])
            }
        }
        _ => Err(KhovanovError::NotMergeOrSplit(crossing)),
    }
}

#[derive(Clone, Debug)]
pub struct KhovanovComplex {
    pub pd: PdCode,
    pub reduced: bool,
    pub basepoint: Option<u32>,
    pub cube: CubeComplex,
    pub assembled: Assembled,
    pub resolutions: BTreeMap<Code, Resolution>,
    /// `(n₊, n₋)` used for gradings; `(0, 0)` when signs are missing.
    pub sign_counts: (usize, usize),
    pub signs_missing: bool,
}

impl KhovanovComplex {
    pub fn complex(&self) -> &Arc<FilteredComplex> {
        &self.assembled.complex
    }

    /// Homology ranks keyed by homological grading `h`.
    pub fn homology_by_h(&self) -> BTreeMap<i64, usize> {
        self.complex()
            .homology_ranks()
            .into_iter()
            .filter(|&(_, v)| v > 0)
            .map(|(d, v)| (-d, v))
            .collect()
    }

    pub fn total_rank(&self) -> usize {
        self.complex().total_homology_rank()
    }
}

/// Build the (reduced, when `basepoint` is given) GF(2) Khovanov cube.
pub fn build_complex(pd: &PdCode, basepoint: Option<u32>) -> Result<KhovanovComplex, KhovanovError> {
    pd.validate()?;
    if let Some(a) = basepoint {
        if !pd.is_empty() && !pd.arcs().contains(&a) {
            return Err(KhovanovError::MissingBasepoint(a));
        }
    }
    let n = pd.len();
    let field = Field::gf2();
    let (signs_missing, (n_plus, n_minus)) = match pd.sign_counts() {
        Some(c) => (false, c),
        None => (true, (0, 0)),
    };
    let codes = Code::all(n, Alphabet::Ab);
    let data: Vec<VertexData> = codes
        .par_iter()
        .map(|c| vertex_data(pd, c, basepoint))
        .collect::<Result<_, _>>()?;
    let mut cube = CubeComplex::new(n, Alphabet::Ab, field);
    let reduced_shift = i64::from(basepoint.is_some());
    for (code, v) in codes.iter().zip(&data) {
        let r = code.count(Letter::B) as i64;
        let generators = v
            .labels
            .iter()
            .map(|l| {
                let xs = l.iter().filter(|&&x| x).count() as i64;
                let ones = l.len() as i64 - xs;
                let q = ones - xs + r + n_plus as i64 - 2 * n_minus as i64 + reduced_shift;
                Generator::new(label_id(l), n_minus as i64 - n as i64, 0).with_grading(QUANTUM, q)
            })
            .collect();
        let vertex = FilteredComplex::free(field, generators).map_err(CubeError::from)?;
        cube.set_vertex(code.clone(), Arc::new(vertex))?;
    }
    let position: HashMap<&Code, usize> = codes.iter().enumerate().map(|(k, c)| (c, k)).collect();
    let edges: Vec<(Vec<Code>, SparseMatrix)> = codes
        .par_iter()
        .enumerate()
        .flat_map_iter(|(s, code)| {
            let data = &data;
            let position = &position;
            (0..n).filter(move |&k| code.0[k] == Letter::A).map(move |k| {
                let mut t = code.clone();
                t.0[k] = Letter::B;
                let (src, tgt) = (&data[s], &data[position[&t]]);
                let mut triplets = Vec::new();
                for (col, l) in src.labels.iter().enumerate() {
                    for img in edge_image(&src.resolution, &tgt.resolution, l, k)? {
                        triplets.push((tgt.index[&img], col, 1));
                    }
                }
                let m = SparseMatrix::from_triplets(field, tgt.labels.len(), src.labels.len(), triplets)
                    .expect("indices in range");
                Ok((vec![code.clone(), t], m))
            })
        })
        .collect::<Result<_, KhovanovError>>()?;
    for (seq, m) in edges {
        cube.set_map(seq, m)?;
    }
    let assembled = cube.assemble(&CodeSet::full(n, Alphabet::Ab))?;
    let resolutions = codes.into_iter().zip(data.into_iter().map(|d| d.resolution)).collect();
    Ok(KhovanovComplex {
        pd: pd.clone(),
        reduced: basepoint.is_some(),
        basepoint,
        cube,
        assembled,
        resolutions,
        sign_counts: (n_plus, n_minus),
        signs_missing,
    })
}

/// Number of circles when crossing `c` is smoothed by `choice[c]`, found by
/// walking the arcs rather than by union-find.
fn count_circles_by_walk(pd: &PdCode, choice: &[bool]) -> usize {
    if pd.is_empty() {
        return 1;
    }
    // at crossing c, the position joined to position p
    let partner = |c: usize, p: usize| -> usize {
        match (choice[c], p) {
            (false, 0) => 3,
            (false, 3) => 0,
            (false, 1) => 2,
            (false, _) => 1,
            (true, 0) => 1,
            (true, 1) => 0,
            (true, 2) => 3,
            (true, _) => 2,
        }
    };
    let mut ends: HashMap<u32, Vec<(usize, usize)>> = HashMap::new();
    for (c, x) in pd.crossings.iter().enumerate() {
        for (p, &a) in x.iter().enumerate() {
            ends.entry(a).or_default().push((c, p));
        }
    }
    let mut seen = vec![[false; 4]; pd.len()];
    let mut circles = 0;
    for c0 in 0..pd.len() {
        for p0 in 0..4 {
            if seen[c0][p0] {
                continue;
            }
            circles += 1;
            let (mut c, mut p) = (c0, p0);
            while !seen[c][p] {
                seen[c][p] = true;
                let q = partner(c, p);
                seen[c][q] = true;
                let arc = pd.crossings[c][q];
                let e = &ends[&arc];
                (c, p) = if e[0] == (c, q) { e[1] } else { e[0] };
            }
        }
    }
    circles
}

/// `|<D>|` at `A = ζ₈`, which is `|V(-1)| = det`. At this value the loop
/// factor `-A² - A⁻²` vanishes, so only single-circle states contribute
/// `A^(#a - #b)`. The sum lives in `Z[ζ₈]` with `ζ⁴ = -1`.
pub fn determinant_oracle(pd: &PdCode) -> Result<u64, KhovanovError> {
    pd.validate()?;
    let n = pd.len();
    let mut c = [0i64; 4];
    for bits in 0u64..1 << n {
        let choice: Vec<bool> = (0..n).map(|k| bits >> k & 1 == 1).collect();
        if count_circles_by_walk(pd, &choice) != 1 {
            continue;
        }
        let ones = bits.count_ones() as i64;
        let e = (n as i64 - 2 * ones).rem_euclid(8) as usize;
        if e < 4 {
            c[e] += 1;
        } else {
            c[e - 4] -= 1;
        }
    }
    // |z|² = Σc² + √2 (c₁c₀ + c₂c₁ + c₃c₂ - c₃c₀)
    let root2 = c[1] * c[0] + c[2] * c[1] + c[3] * c[2] - c[3] * c[0];
    let square: i64 = c.iter().map(|x| x * x).sum();
    assert_eq!(root2, 0, "bracket at ζ₈ has irrational modulus");
    let det = (square as f64).sqrt().round() as i64;
    assert_eq!(det * det, square, "bracket modulus is not an integer");
    Ok(det as u64)
}

/// Closure of a braid word on `strands` strands; `σ_i` is `i`, its inverse `-i`.
pub fn braid_closure(strands: usize, word: &[i32]) -> Result<PdCode, KhovanovError> {
    let mut label: Vec<u32> = (1..=strands as u32).collect();
    let mut next = strands as u32 + 1;
    let mut crossings = Vec::new();
    let mut signs = Vec::new();
    for &g in word {
        let i = g.unsigned_abs() as usize;
        if i == 0 || i >= strands {
            return Err(KhovanovError::Parse(format!("generator {g} on {strands} strands")));
        }
        let (a, b) = (label[i - 1], label[i]);
        let (tl, tr) = (next, next + 1);
        next += 2;
        if g > 0 {
            crossings.push([a, b, tr, tl]);
        } else {
            crossings.push([b, tr, tl, a]);
        }
        signs.push(g.signum() as i8);
        label[i - 1] = tl;
        label[i] = tr;
    }
    let close: HashMap<u32, u32> = label.iter().enumerate().map(|(p, &l)| (l, p as u32 + 1)).collect();
    for x in &mut crossings {
        for a in x.iter_mut() {
            if let Some(&b) = close.get(a) {
                *a = b;
            }
        }
    }
    PdCode::new(crossings)?.with_signs(signs)
}

/// A named diagram with its known determinant.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub pd: PdCode,
    pub determinant: u64,
    pub alternating: bool,
}

/// Small test diagrams with signs inferred from the arc orientation.
pub fn corpus() -> Vec<CorpusEntry> {
    let pd = |v: &[[u32; 4]]| PdCode::new(v.to_vec()).expect("corpus diagram is valid").with_inferred_signs();
    vec![
        CorpusEntry { name: "unknot", pd: PdCode::default(), determinant: 1, alternating: true },
        CorpusEntry { name: "hopf", pd: pd(&[[1, 3, 2, 4], [3, 1, 4, 2]]), determinant: 2, alternating: true },
        CorpusEntry { name: "3_1", pd: pd(&[[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 3]]), determinant: 3, alternating: true },
        CorpusEntry {
            name: "4_1",
            pd: pd(&[[4, 2, 5, 1], [8, 6, 1, 5], [6, 3, 7, 4], [2, 7, 3, 8]]),
            determinant: 5,
            alternating: true,
        },
        CorpusEntry {
            name: "5_1",
            pd: pd(&[[1, 6, 2, 7], [3, 8, 4, 9], [5, 10, 6, 1], [7, 2, 8, 3], [9, 4, 10, 5]]),
            determinant: 5,
            alternating: true,
        },
        CorpusEntry {
            name: "5_2",
            pd: pd(&[[1, 4, 2, 5], [3, 8, 4, 9], [5, 10, 6, 1], [9, 6, 10, 7], [7, 2, 8, 3]]),
            determinant: 7,
            alternating: true,
        },
        CorpusEntry {
            name: "6_1",
            pd: pd(&[[1, 4, 2, 5], [7, 10, 8, 11], [3, 9, 4, 8], [9, 3, 10, 2], [5, 12, 6, 1], [11, 6, 12, 7]]),
            determinant: 9,
            alternating: true,
        },
        CorpusEntry {
            name: "T(3,4)",
            pd: braid_closure(3, &[1, 2, 1, 2, 1, 2, 1, 2]).expect("braid closure"),
            determinant: 3,
            alternating: false,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trefoil() -> PdCode {
        PdCode::new(vec![[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 3]]).unwrap()
    }

    #[test]
    fn resolutions() {
        let unknot = PdCode::default();
        assert_eq!(resolve(&unknot, &Code(vec![])).unwrap().circles.len(), 1);
        assert_eq!(resolve(&trefoil(), &"aaa".parse().unwrap()).unwrap().circles.len(), 2);
        let hopf = PdCode::new(vec![[1, 3, 2, 4], [3, 1, 4, 2]]).unwrap();
        assert_eq!(resolve(&hopf, &"bb".parse().unwrap()).unwrap().circles.len(), 2);
    }

    #[test]
    fn walk_agrees_with_union_find() {
        for e in corpus() {
            for code in Code::all(e.pd.len(), Alphabet::Ab) {
                let choice: Vec<bool> = code.0.iter().map(|&l| l == Letter::B).collect();
                assert_eq!(resolve(&e.pd, &code).unwrap().circles.len(), count_circles_by_walk(&e.pd, &choice));
            }
        }
    }

    #[test]
    fn validation() {
        assert!(matches!(PdCode::new(vec![[1, 2, 3, 4]]), Err(KhovanovError::ArcCount { .. })));
        assert!(matches!(
            PdCode::new(vec![[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 3], [7, 7, 8, 8]]),
            Err(KhovanovError::Split(..))
        ));
        assert!(matches!(build_complex(&trefoil(), Some(99)), Err(KhovanovError::MissingBasepoint(99))));
        let text = PdCode::parse_text("PD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]").unwrap();
        assert_eq!(text, trefoil());
        assert_eq!(PdCode::parse_text("X[1,4,2,5], X[3,6,4,1], X[5,2,6,3]").unwrap(), trefoil());
    }

    #[test]
    fn trefoil_ranks() {
        let k = build_complex(&trefoil(), Some(1)).unwrap();
        assert_eq!(k.total_rank(), 3);
        assert!(k.signs_missing);
        assert_eq!(build_complex(&trefoil(), None).unwrap().total_rank(), 6);
        assert_eq!(determinant_oracle(&trefoil()).unwrap(), 3);
        let signs = trefoil().with_inferred_signs().signs.unwrap();
        assert_eq!(signs, vec![1, 1, 1]);
    }

    #[test]
    fn unknot() {
        assert_eq!(build_complex(&PdCode::default(), None).unwrap().total_rank(), 2);
        assert_eq!(build_complex(&PdCode::default(), Some(1)).unwrap().total_rank(), 1);
        assert_eq!(determinant_oracle(&PdCode::default()).unwrap(), 1);
    }
}
