mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::oracle::{brute_force, graphs, key, targets};
use handlecalc::homsearch::find_surjections;
use handlecalc::io::parse_group_spec;

#[test]
fn search_matches_brute_force_on_small_targets() {
    let mut total = 0;
    let mut pairs = 0;
    for (name, g) in graphs() {
        for t in targets() {
            let target = Arc::new(parse_group_spec(t).unwrap().build().unwrap());
            assert!(target.order() <= 24);
            let found = find_surjections(&g, &target, usize::MAX - 1);
            assert!(!found.truncated);
            let keys: Vec<String> = found.surjections.iter().map(key).collect();
            let set: BTreeSet<String> = keys.iter().cloned().collect();
            assert_eq!(set.len(), keys.len(), "{name} onto {t}: duplicates");
            assert_eq!(set, brute_force(&g, &target), "{name} onto {t}");
            total += set.len();
            pairs += usize::from(!set.is_empty());
        }
    }
    println!("{total} surjections over {pairs} nonempty pairs");
    assert!(pairs >= 20 && total >= 500, "{total} {pairs}");
}
