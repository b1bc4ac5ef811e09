//! JSON documents for complexes, maps, cubes, pages, planar diagrams and
//! triangle bundles.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ChainMap, ComplexError, FilteredComplex, Generator, MapConvention};
use crate::cube::{Alphabet, Code, CubeComplex, CubeError};
use crate::keylemma::TriangleDatum;
use crate::khovanov::{KhovanovError, PdCode};
use crate::linalg::{Field, SparseMatrix};
use crate::reduce::Pages;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("field characteristic {0} is not a supported prime")]
    Field(u32),
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("{0}")]
    Structure(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Cube(#[from] CubeError),
    #[error(transparent)]
    Khovanov(#[from] KhovanovError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDoc {
    pub id: String,
    pub degree: i64,
    pub filtration: i64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub gradings: BTreeMap<String, i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    pub from: String,
    pub to: String,
    pub coeff: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub field: u32,
    pub generators: Vec<GeneratorDoc>,
    #[serde(default)]
    pub differential: Vec<EntryDoc>,
}

fn field(p: u32) -> Result<Field, FormatError> {
    Field::new(p).map_err(|_| FormatError::Field(p))
}

fn gen_doc(g: &Generator) -> GeneratorDoc {
    GeneratorDoc {
        id: g.id.clone(),
        degree: g.degree,
        filtration: g.filtration,
        gradings: g.gradings.clone(),
    }
}

fn entries_doc(m: &SparseMatrix, source: &FilteredComplex, target: &FilteredComplex) -> Vec<EntryDoc> {
    let mut out: Vec<EntryDoc> = m
        .entries()
        .map(|(r, c, v)| EntryDoc {
            from: source.generator(c).id.clone(),
            to: target.generator(r).id.clone(),
            coeff: v as i64,
        })
        .collect();
    out.sort_by_key(|e| (source.index_of(&e.from), target.index_of(&e.to)));
    out
}

fn entries_matrix(
    field: Field,
    entries: &[EntryDoc],
    source: &FilteredComplex,
    target: &FilteredComplex,
) -> Result<SparseMatrix, FormatError> {
    let mut triplets = Vec::with_capacity(entries.len());
    for e in entries {
        let c = source.index_of(&e.from).ok_or_else(|| FormatError::UnknownGenerator(e.from.clone()))?;
        let r = target.index_of(&e.to).ok_or_else(|| FormatError::UnknownGenerator(e.to.clone()))?;
        triplets.push((r, c, e.coeff));
    }
    Ok(SparseMatrix::from_triplets(field, target.len(), source.len(), triplets).map_err(ComplexError::from)?)
}

impl ComplexDoc {
    pub fn from_complex(c: &FilteredComplex) -> ComplexDoc {
        ComplexDoc {
            field: c.field().characteristic(),
            generators: c.generators().iter().map(gen_doc).collect(),
            differential: entries_doc(c.differential(), c, c),
        }
    }

    /// Parse without validation; use [`FilteredComplex::validate`] afterwards.
    pub fn to_complex_unchecked(&self) -> Result<FilteredComplex, FormatError> {
        let field = field(self.field)?;
        let generators: Vec<Generator> = self
            .generators
            .iter()
            .map(|g| Generator {
                id: g.id.clone(),
                degree: g.degree,
                filtration: g.filtration,
                gradings: g.gradings.clone(),
            })
            .collect();
        let shell = FilteredComplex::new_unchecked(field, generators.clone(), SparseMatrix::zeros(field, generators.len(), generators.len()));
        let d = entries_matrix(field, &self.differential, &shell, &shell)?;
        Ok(FilteredComplex::new_unchecked(field, generators, d))
    }

    pub fn to_complex(&self) -> Result<FilteredComplex, FormatError> {
        let c = self.to_complex_unchecked()?;
        let report = c.validate();
        if !report.passed() {
            return Err(ComplexError::Invalid(report).into());
        }
        Ok(c)
    }
}

pub fn parse_complex(json: &str) -> Result<FilteredComplex, FormatError> {
    serde_json::from_str::<ComplexDoc>(json)?.to_complex()
}

pub fn complex_to_json(c: &FilteredComplex) -> String {
    serde_json::to_string_pretty(&ComplexDoc::from_complex(c)).expect("serializable")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionDoc {
    #[default]
    Chain,
    Antichain,
}

impl From<ConventionDoc> for MapConvention {
    fn from(c: ConventionDoc) -> Self {
        match c {
            ConventionDoc::Chain => MapConvention::Chain,
            ConventionDoc::Antichain => MapConvention::AntiChain,
        }
    }
}

/// A filtered chain map between two inline complexes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub source: ComplexDoc,
    pub target: ComplexDoc,
    pub entries: Vec<EntryDoc>,
    #[serde(default)]
    pub degree: i64,
    #[serde(default)]
    pub filtration_shift: i64,
    #[serde(default)]
    pub convention: ConventionDoc,
}

impl MapDoc {
    pub fn to_map(&self) -> Result<ChainMap, FormatError> {
        let source = Arc::new(self.source.to_complex()?);
        let target = Arc::new(self.target.to_complex()?);
        if source.field() != target.field() {
            return Err(FormatError::Structure("source and target fields differ".into()));
        }
        let m = entries_matrix(source.field(), &self.entries, &source, &target)?;
        Ok(ChainMap::with_options(
            source,
            target,
            m,
            self.degree,
            self.filtration_shift,
            self.convention.into(),
        )?)
    }

    pub fn from_map(f: &ChainMap) -> MapDoc {
        MapDoc {
            source: ComplexDoc::from_complex(&f.source),
            target: ComplexDoc::from_complex(&f.target),
            entries: entries_doc(&f.matrix, &f.source, &f.target),
            degree: f.degree,
            filtration_shift: f.filtration_shift,
            convention: match f.convention {
                MapConvention::Chain => ConventionDoc::Chain,
                MapConvention::AntiChain => ConventionDoc::Antichain,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeqMapDoc {
    pub sequence: Vec<String>,
    pub entries: Vec<EntryDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeDoc {
    pub n: usize,
    pub alphabet: String,
    pub vertices: BTreeMap<String, ComplexDoc>,
    #[serde(default)]
    pub maps: Vec<SeqMapDoc>,
}

impl CubeDoc {
    pub fn to_cube(&self) -> Result<CubeComplex, FormatError> {
        let alphabet: Alphabet = self.alphabet.parse()?;
        let mut vertices: BTreeMap<Code, Arc<FilteredComplex>> = BTreeMap::new();
        let mut fields = Vec::new();
        for (code, doc) in &self.vertices {
            // vertex validation happens at assembly
            let c = doc.to_complex_unchecked()?;
            fields.push(c.field());
            vertices.insert(code.parse()?, Arc::new(c));
        }
        let field = fields.first().copied().unwrap_or(Field::gf2());
        if fields.iter().any(|&f| f != field) {
            return Err(FormatError::Structure("vertex complexes use different fields".into()));
        }
        let mut cube = CubeComplex::new(self.n, alphabet, field);
        for (code, c) in vertices {
            cube.set_vertex(code, c)?;
        }
        for m in &self.maps {
            let seq: Vec<Code> = m.sequence.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
            let (first, last) = match (seq.first(), seq.last()) {
                (Some(f), Some(l)) => (f, l),
                _ => return Err(FormatError::Structure("empty sequence".into())),
            };
            let missing = |c: &Code| FormatError::Structure(format!("map endpoint {c} has no vertex"));
            let source = cube.vertices.get(first).ok_or_else(|| missing(first))?.clone();
            let target = cube.vertices.get(last).ok_or_else(|| missing(last))?.clone();
            let matrix = entries_matrix(field, &m.entries, &source, &target)?;
            cube.set_map(seq, matrix)?;
        }
        Ok(cube)
    }

    pub fn from_cube(cube: &CubeComplex) -> CubeDoc {
        CubeDoc {
            n: cube.n,
            alphabet: cube.alphabet.to_string(),
            vertices: cube
                .vertices
                .iter()
                .map(|(c, v)| (c.to_string(), ComplexDoc::from_complex(v)))
                .collect(),
            maps: cube
                .seq_maps
                .iter()
                .map(|(seq, m)| SeqMapDoc {
                    sequence: seq.iter().map(Code::to_string).collect(),
                    entries: entries_doc(m, &cube.vertices[&seq[0]], &cube.vertices[&seq[seq.len() - 1]]),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurvivorDoc {
    pub id: String,
    pub degree: i64,
    pub filtration: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageDoc {
    pub r: usize,
    pub survivors: Vec<SurvivorDoc>,
    pub dr: Vec<EntryDoc>,
}

pub fn pages_doc(pages: &Pages) -> Vec<PageDoc> {
    pages
        .pages
        .iter()
        .map(|p| PageDoc {
            r: p.r,
            survivors: p
                .survivors()
                .iter()
                .map(|g| SurvivorDoc {
                    id: g.id.clone(),
                    degree: g.degree,
                    filtration: g.filtration,
                })
                .collect(),
            dr: entries_doc(&p.dr, &p.complex, &p.complex),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingDoc {
    pub arcs: [u32; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
}

/// A JSON crossing list, or the text form `PD[X(...), ...]`.
pub fn parse_pd(input: &str) -> Result<PdCode, FormatError> {
    let trimmed = input.trim_start();
    if !trimmed.starts_with('[') || trimmed.starts_with("[X") {
        return Ok(PdCode::parse_text(input)?);
    }
    let docs: Vec<CrossingDoc> = serde_json::from_str(input)?;
    let pd = PdCode::new(docs.iter().map(|d| d.arcs).collect())?;
    let signs: Vec<Option<i8>> = docs.iter().map(|d| d.sign).collect();
    if signs.iter().all(Option::is_some) && !signs.is_empty() {
        Ok(pd.with_signs(signs.into_iter().flatten().collect())?)
    } else if signs.iter().any(Option::is_some) {
        Err(FormatError::Structure("signs must be given for every crossing or none".into()))
    } else {
        Ok(pd)
    }
}

pub fn pd_to_json(pd: &PdCode) -> String {
    let docs: Vec<CrossingDoc> = pd
        .crossings
        .iter()
        .enumerate()
        .map(|(k, &arcs)| CrossingDoc {
            arcs,
            sign: pd.signs.as_ref().map(|s| s[k]),
        })
        .collect();
    serde_json::to_string(&docs).expect("serializable")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedComplexDoc {
    pub name: String,
    pub complex: ComplexDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedMapDoc {
    pub source: String,
    pub target: String,
    pub entries: Vec<EntryDoc>,
}

/// Complexes `A_0..A_{k-1}`, maps `A_i -> A_{i+1}` and homotopies
/// `A_i -> A_{i+2}` (indices mod `k` when cyclic).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDoc {
    pub cyclic: bool,
    #[serde(default)]
    pub period_degree_shift: i64,
    #[serde(default)]
    pub convention: ConventionDoc,
    pub complexes: Vec<NamedComplexDoc>,
    pub maps: Vec<NamedMapDoc>,
    pub homotopies: Vec<NamedMapDoc>,
}

impl BundleDoc {
    pub fn to_datum(&self) -> Result<TriangleDatum, FormatError> {
        let complexes: Vec<Arc<FilteredComplex>> = self
            .complexes
            .iter()
            .map(|c| c.complex.to_complex().map(Arc::new))
            .collect::<Result<_, _>>()?;
        let k = complexes.len();
        if k == 0 {
            return Err(FormatError::Structure("bundle has no complexes".into()));
        }
        let field = complexes[0].field();
        let names: HashMap<&str, usize> = self.complexes.iter().enumerate().map(|(i, c)| (c.name.as_str(), i)).collect();
        let resolve = |list: &[NamedMapDoc], step: usize, what: &str| -> Result<Vec<SparseMatrix>, FormatError> {
            let mut out: Vec<Option<SparseMatrix>> = vec![None; list.len()];
            for m in list {
                let s = *names.get(m.source.as_str()).ok_or_else(|| FormatError::Structure(format!("unknown complex {}", m.source)))?;
                let t = *names.get(m.target.as_str()).ok_or_else(|| FormatError::Structure(format!("unknown complex {}", m.target)))?;
                let expected = if self.cyclic { (s + step) % k } else { s + step };
                if t != expected || s >= list.len() || out[s].is_some() {
                    return Err(FormatError::Structure(format!("{what} {} -> {} is out of place", m.source, m.target)));
                }
                // across the period boundary the target is the shifted copy, with the same ids
                out[s] = Some(entries_matrix(field, &m.entries, &complexes[s], &complexes[t])?);
            }
            out.into_iter()
                .enumerate()
                .map(|(i, m)| m.ok_or_else(|| FormatError::Structure(format!("missing {what} from index {i}"))))
                .collect()
        };
        Ok(TriangleDatum {
            maps: resolve(&self.maps, 1, "map")?,
            homotopies: resolve(&self.homotopies, 2, "homotopy")?,
            complexes,
            period_shift: self.cyclic.then_some(self.period_degree_shift),
            convention: self.convention.into(),
        })
    }

    pub fn from_datum(t: &TriangleDatum) -> BundleDoc {
        let k = t.len();
        let name = |i: usize| format!("A{}", if t.period_shift.is_some() { i % k } else { i });
        let named = |list: &[SparseMatrix], step: usize| -> Vec<NamedMapDoc> {
            list.iter()
                .enumerate()
                .map(|(i, m)| {
                    let j = if t.period_shift.is_some() { (i + step) % k } else { i + step };
                    NamedMapDoc {
                        source: name(i),
                        target: name(j),
                        entries: entries_doc(m, &t.complexes[i], &t.complexes[j]),
                    }
                })
                .collect()
        };
        BundleDoc {
            cyclic: t.period_shift.is_some(),
            period_degree_shift: t.period_shift.unwrap_or(0),
            convention: match t.convention {
                MapConvention::Chain => ConventionDoc::Chain,
                MapConvention::AntiChain => ConventionDoc::Antichain,
            },
            complexes: t
                .complexes
                .iter()
                .enumerate()
                .map(|(i, c)| NamedComplexDoc {
                    name: name(i),
                    complex: ComplexDoc::from_complex(c),
                })
                .collect(),
            maps: named(&t.maps, 1),
            homotopies: named(&t.homotopies, 2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_round_trip() {
        let c = FilteredComplex::from_edges(
            Field::new(3).unwrap(),
            vec![Generator::new("x", 1, 1).with_grading("quantum", 2), Generator::new("y", 0, 0)],
            [("x", "y", 2)],
        )
        .unwrap();
        let json = complex_to_json(&c);
        assert_eq!(parse_complex(&json).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_input() {
        assert!(parse_complex(r#"{"field":2,"generators":[],"extra":1}"#).is_err());
        assert!(parse_complex(r#"{"field":4,"generators":[]}"#).is_err());
        let square = r#"{"field":2,"generators":[{"id":"x","degree":1,"filtration":0},{"id":"y","degree":0,"filtration":0}],
            "differential":[{"from":"x","to":"z","coeff":1}]}"#;
        assert!(matches!(parse_complex(square), Err(FormatError::UnknownGenerator(_))));
    }

    #[test]
    fn pd_forms() {
        let json = r#"[{"arcs":[1,4,2,5]},{"arcs":[3,6,4,1]},{"arcs":[5,2,6,3]}]"#;
        let a = parse_pd(json).unwrap();
        let b = parse_pd("PD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]").unwrap();
        assert_eq!(a, b);
        let signed = a.with_inferred_signs();
        assert_eq!(parse_pd(&pd_to_json(&signed)).unwrap(), signed);
        assert!(parse_pd(r#"[{"arcs":[1,4,2,5],"sign":1},{"arcs":[3,6,4,1]},{"arcs":[5,2,6,3]}]"#).is_err());
    }
}
