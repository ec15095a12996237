mod common;

use handlecalc::covering::{build_coset_graph, genus_of_cover, is_faithful};
use handlecalc::explorer::{example_cyclic_family, example_so4_family};
use handlecalc::gog::genus_from_order;
use handlecalc::io::{parse_document, InstanceDocument};

#[test]
fn fixtures_round_trip_bit_identically() {
    for (name, text, inst) in common::fixtures() {
        let again = InstanceDocument::from_instance(&inst).to_json();
        assert_eq!(text, again, "{name}");
        assert_eq!(parse_document(&again).unwrap().to_json(), again, "{name}");
    }
}

#[test]
fn fixtures_match_their_generators() {
    let dir = common::fixture_dir();
    let read = |f: &str| std::fs::read_to_string(dir.join(f)).unwrap();
    assert_eq!(read("cyclic_x3.json"), example_cyclic_family(3).unwrap().document().to_json());
    assert_eq!(read("so4_n2.json"), example_so4_family(2).unwrap().document().to_json());
}

#[test]
fn fixture_genus_agrees_with_cover() {
    for (name, _, inst) in common::fixtures() {
        let s = inst.surjection.as_ref().unwrap();
        let n = s.target().order() as u64;
        let cover = genus_of_cover(&build_coset_graph(&inst.graph, s)).unwrap();
        assert_eq!(genus_from_order(&inst.graph, n).unwrap(), cover, "{name}");
    }
}

#[test]
fn fixture_normal_subgroup_acts_trivially_on_homology() {
    for (name, _, inst) in common::fixtures() {
        let r = is_faithful(&inst.graph, inst.surjection.as_ref().unwrap(), true).unwrap();
        assert_eq!(r.image_in_h1_kernel, Some(true), "{name}");
        assert!(r.consistent(), "{name}");
        assert_eq!(r.faithful, !name.starts_with("z2"), "{name}");
    }
}
