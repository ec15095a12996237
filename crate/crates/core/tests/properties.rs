mod common;

use handlecalc::covering::{build_coset_graph, genus_of_cover};
use handlecalc::gog::{euler_characteristic, genus_from_order, reduce_to_normal_form, subdivide_edge};
use handlecalc::io::InstanceDocument;
use handlecalc::GraphOfGroups;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn text(g: &GraphOfGroups) -> String {
    InstanceDocument::from_parts(g, &BTreeMap::new(), None, &[]).to_json()
}

fn lcm_order(g: &GraphOfGroups) -> u64 {
    g.vertices().iter().fold(1, |acc, v| num_integer::lcm(acc, v.group.order() as u64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn normal_form_is_idempotent_and_keeps_genus(seed in any::<u64>()) {
        let g = common::random_cyclic_graph(&mut common::rng(seed), 4, 5);
        let nf = reduce_to_normal_form(&g);
        prop_assert!(nf.is_normal_form());
        prop_assert_eq!(text(&reduce_to_normal_form(&nf)), text(&nf));
        prop_assert_eq!(euler_characteristic(&nf), euler_characteristic(&g));
        let n = lcm_order(&g);
        prop_assert_eq!(genus_from_order(&nf, n).ok(), genus_from_order(&g, n).ok());
    }

    #[test]
    fn subdivision_keeps_chi(seed in any::<u64>()) {
        let g = common::random_cyclic_graph(&mut common::rng(seed), 4, 5);
        for e in g.edges() {
            let s = subdivide_edge(&g, e.id).unwrap();
            prop_assert_eq!(euler_characteristic(&s), euler_characteristic(&g));
            prop_assert_eq!(s.vertices().len(), g.vertices().len() + 1);
        }
    }
}

#[test]
fn genus_agrees_with_cover_on_random_admissible_instances() {
    let sample = common::admissible_sample(7, 120);
    assert_eq!(sample.len(), 120);
    for (g, s) in &sample {
        let n = s.target().order() as u64;
        assert_eq!(genus_from_order(g, n).unwrap(), genus_of_cover(&build_coset_graph(g, s)).unwrap());
    }
}
