use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specseq::cube::{Alphabet, CodeSet};
use specseq::format::{complex_to_json, parse_complex, parse_pd, pd_to_json, BundleDoc, CubeDoc, MapDoc};
use specseq::keylemma::{period_three_instance, random_instance, verify_key_lemma};
use specseq::khovanov::{build_complex, corpus};
use specseq::linalg::Field;
use specseq::random::{random_chain_map, random_complex, ComplexParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complex_json_round_trip(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3, 5])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = ComplexParams { field: Field::new(p).unwrap(), ..ComplexParams::gf2(14, 4) };
        let c = random_complex(&mut rng, &params).complex;
        let back = parse_complex(&complex_to_json(&c)).unwrap();
        prop_assert_eq!(back.generators(), c.generators());
        prop_assert_eq!(back.differential(), c.differential());
        prop_assert_eq!(back.field(), c.field());
    }

    #[test]
    fn map_json_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = ComplexParams::gf2(10, 3);
        let a = random_complex(&mut rng, &params);
        let b = random_complex(&mut rng, &params);
        let f = random_chain_map(&mut rng, &a, &b, 0.4);
        let doc = MapDoc::from_map(&f);
        let json = serde_json::to_string(&doc).unwrap();
        let parsed: MapDoc = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&parsed, &doc);
        prop_assert_eq!(&parsed.to_map().unwrap().matrix, &f.matrix);
    }

    #[test]
    fn bundle_round_trip_still_verifies(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_instance(&mut rng, &ComplexParams::gf2(8, 3));
        let json = serde_json::to_string(&BundleDoc::from_datum(&t)).unwrap();
        let back = serde_json::from_str::<BundleDoc>(&json).unwrap().to_datum().unwrap();
        prop_assert_eq!(&back.maps, &t.maps);
        prop_assert_eq!(&back.homotopies, &t.homotopies);
        prop_assert!(verify_key_lemma(&back).unwrap().passed());
    }
}

#[test]
fn period_three_bundle_round_trip() {
    let t = period_three_instance(Field::gf2(), false, [0; 4]);
    let doc = BundleDoc::from_datum(&t);
    let back = serde_json::from_str::<BundleDoc>(&serde_json::to_string_pretty(&doc).unwrap())
        .unwrap()
        .to_datum()
        .unwrap();
    assert_eq!(back.period_shift, t.period_shift);
    assert!(verify_key_lemma(&back).unwrap().passed());
}

#[test]
fn khovanov_cube_round_trip() {
    let trefoil = corpus().into_iter().find(|e| e.name == "3_1").unwrap();
    let pd = parse_pd(&pd_to_json(&trefoil.pd)).unwrap();
    assert_eq!(pd, trefoil.pd);
    let k = build_complex(&pd, Some(1)).unwrap();
    let doc = CubeDoc::from_cube(&k.cube);
    let cube = serde_json::from_str::<CubeDoc>(&serde_json::to_string(&doc).unwrap())
        .unwrap()
        .to_cube()
        .unwrap();
    let assembled = cube.assemble(&CodeSet::full(pd.len(), Alphabet::Ab)).unwrap();
    assert_eq!(assembled.complex.generators(), k.complex().generators());
    assert_eq!(assembled.complex.differential(), k.complex().differential());
}

#[test]
fn text_pd_matches_json() {
    let text = parse_pd("PD[X[1,5,2,4], X[3,1,4,6], X[5,3,6,2]]").unwrap();
    let json = parse_pd(r#"[{"arcs":[1,5,2,4]},{"arcs":[3,1,4,6]},{"arcs":[5,3,6,2]}]"#).unwrap();
    assert_eq!(text, json);
}

#[test]
fn malformed_input_is_rejected() {
    assert!(parse_complex("{").is_err());
    assert!(parse_complex(r#"{"field":4,"generators":[],"differential":[]}"#).is_err());
    assert!(parse_complex(r#"{"field":2,"generators":[{"id":"x","degree":0,"filtration":0}],"differential":[{"from":"x","to":"y","coeff":1}]}"#).is_err());
    // d^2 != 0
    let bad = r#"{"field":2,"generators":[
        {"id":"x","degree":2,"filtration":0},{"id":"y","degree":1,"filtration":0},{"id":"z","degree":0,"filtration":0}],
        "differential":[{"from":"x","to":"y","coeff":1},{"from":"y","to":"z","coeff":1}]}"#;
    assert!(parse_complex(bad).is_err());
}
