use std::path::PathBuf;
use std::process::{Command, Output};

use specseq::format::{complex_to_json, parse_complex, BundleDoc};
use specseq::keylemma::period_three_instance;
use specseq::linalg::Field;

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn specseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specseq"))
        .args(args)
        .env_remove("SPECSEQ_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, contents: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn triad_worked_example() {
    let o = specseq(&["triad", "--cf", "1,-2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("3/2"));
    assert!(out.contains("triad: (3,2) (-2,-1) (-1,-1)"), "{out}");
    assert!(out.contains("2\t-2\t3\t2"), "{out}");
}

#[test]
fn pages_of_single_arrow() {
    let o = specseq(&["pages", &data("unknot-arrow.json"), "--max-r", "collapse", "--oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("totals: E0:2 E1:2 E2:0"));
    assert!(stdout(&o).starts_with("r\tdegree\tfiltration_level\trank\n"));
}

#[test]
fn khovanov_trefoil_matches_determinant() {
    let o = specseq(&["khovanov", &data("trefoil.json"), "--reduced", "--basepoint", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for line in ["total reduced rank: 3", "det oracle: 3", "match: yes", "collapse page: 2"] {
        assert!(out.lines().any(|l| l == line), "missing {line:?} in {out}");
    }
}

#[test]
fn khovanov_text_pd_and_jobs() {
    let o = Command::new(env!("CARGO_BIN_EXE_specseq"))
        .args(["khovanov", &data("figure-eight.pd"), "--reduced"])
        .env("SPECSEQ_JOBS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("total reduced rank: 5\ndet oracle: 5\nmatch: yes"));
}

#[test]
fn invalid_complex_exits_two_with_defect() {
    let o = specseq(&["validate", &data("bad-square.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("d^2 != 0: <d^2(x), z> = 1"), "{}", stderr(&o));
}

#[test]
fn parse_and_usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let junk = write_temp(&dir, "junk.json", "{\"field\": 2, \"generators\": [], \"extra\": 1}");
    assert_eq!(specseq(&["validate", &junk]).status.code(), Some(1));
    assert_eq!(specseq(&["validate", "/nonexistent/file.json"]).status.code(), Some(1));
    assert_eq!(specseq(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(specseq(&["pages", &data("unknot-arrow.json"), "--bogus"]).status.code(), Some(1));
    assert_eq!(specseq(&["keylemma", "--random", "3"]).status.code(), Some(1));
    let help = specseq(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("khovanov"));
}

#[test]
fn non_commuting_cube_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let vertex = r#"{"field": 2, "generators": [{"id": "x", "degree": 0, "filtration": 0}], "differential": []}"#;
    let edge = |a: &str, b: &str| format!(r#"{{"sequence": ["{a}", "{b}"], "entries": [{{"from": "x", "to": "x", "coeff": 1}}]}}"#);
    let doc = format!(
        r#"{{"n": 2, "alphabet": "ab", "vertices": {{"aa": {vertex}, "ab": {vertex}, "ba": {vertex}, "bb": {vertex}}},
            "maps": [{}, {}, {}]}}"#,
        edge("aa", "ab"),
        edge("aa", "ba"),
        edge("ab", "bb")
    );
    let path = write_temp(&dir, "cube.json", &doc);
    let o = specseq(&["cube", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(aa,bb)"), "{}", stderr(&o));
    let ok = specseq(&["cube", &data("square-cube.json"), "--pages"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("collapse page: 2"));
}

#[test]
fn keylemma_bundle_and_mutant() {
    let o = specseq(&["keylemma", &data("period-three.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("0\tyes\tyes\tyes\t1\t1\t0"));
    assert!(stdout(&o).contains("conclusion: yes"));

    let dir = tempfile::tempdir().unwrap();
    let mutant = BundleDoc::from_datum(&period_three_instance(Field::gf2(), true, [0; 4]));
    let path = write_temp(&dir, "mutant.json", &serde_json::to_string(&mutant).unwrap());
    let o = specseq(&["keylemma", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("hypothesis 2 (psi_i quasi-isomorphism): no"));

    let o = specseq(&["--seed", "7", "keylemma", "--random", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn emitted_complexes_reparse_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reduced.json");
    let o = specseq(&["reduce", &data("unknot-arrow.json"), "--length", "0", "--out", &out.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let reduced = parse_complex(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(reduced.len(), 2);
    assert_eq!(complex_to_json(&reduced), std::fs::read_to_string(&out).unwrap());

    let emitted = dir.path().join("trefoil-complex.json");
    let o = specseq(&["khovanov", &data("trefoil.json"), "--emit-complex", &emitted.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&emitted).unwrap();
    let c = parse_complex(&text).unwrap();
    assert_eq!(complex_to_json(&c), text);
    let d = specseq(&["dual", &data("unknot-arrow.json")]);
    let dual = parse_complex(&stdout(&d)).unwrap();
    assert_eq!(dual.generators()[0].degree, -1);
}

#[test]
fn output_is_deterministic() {
    let args = ["khovanov", &data("figure-eight.pd"), "--reduced"];
    let a = specseq(&args);
    let b = specseq(&args);
    assert_eq!(a.stdout, b.stdout);
    let shuffled = |seed: &str| stdout(&specseq(&["--seed", seed, "pages", &data("unknot-arrow.json"), "--shuffle"]));
    assert_eq!(shuffled("3"), shuffled("3"));
}

#[test]
fn cone_page_one_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let c = r#"{"field": 2, "generators": [{"id": "x", "degree": 0, "filtration": 0}], "differential": []}"#;
    let map = format!(r#"{{"source": {c}, "target": {c}, "entries": [{{"from": "x", "to": "x", "coeff": 1}}]}}"#);
    let path = write_temp(&dir, "id.json", &map);
    let o = specseq(&["cone", &path, "--e1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("match: yes"));
    let cone = parse_complex(&stdout(&specseq(&["cone", &path]))).unwrap();
    assert_eq!(cone.total_homology_rank(), 0);
    let o = specseq(&["dual", &path, "--map"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("differential equal: yes"));
}
