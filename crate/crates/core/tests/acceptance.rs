//! One PASS/FAIL line per acceptance criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use handlecalc::covering::{build_coset_graph, genus_of_cover, is_faithful};
use handlecalc::explorer::{example_cyclic_family, example_so4_family, search_max_order, SearchCaps, SearchClass};
use handlecalc::gog::{euler_characteristic, genus_from_order, reduce_to_normal_form, subdivide_edge};
use handlecalc::homsearch::find_surjections;
use handlecalc::io::{parse_group_spec, parse_instance, InstanceDocument};
use handlecalc::Rational;
use num_bigint::BigInt;

type Check = Result<String, String>;

fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cyclic_family() -> Check {
    for x in [3i64, 9, 15, 21] {
        let f = example_cyclic_family(x as u32).map_err(|e| e.to_string())?;
        let n = f.order() as i64;
        let chi = euler_characteristic(&f.graph);
        ensure(chi == -frac(7 * x - 3, 6 * x * (x + 1)), || format!("x = {x}: chi = {chi}"))?;
        ensure(n == x * (x + 1), || format!("x = {x}: n = {n}"))?;
        let g = genus_from_order(&f.graph, n as u64).map_err(|e| e.to_string())? as i64;
        ensure(6 * (g - 1) == 7 * x - 3, || format!("x = {x}: g = {g}"))?;
        ensure(49 * n == (6 * g - 3) * (6 * g + 4), || format!("x = {x}: n = {n}, g = {g}"))?;
    }
    Ok("x in {3,9,15,21}".into())
}

fn so4_family() -> Check {
    for n in 2i64..=8 {
        let f = example_so4_family(n as u32).map_err(|e| e.to_string())?;
        let order = f.order() as i64;
        ensure(order == 8 * n * n, || format!("n = {n}: |G| = {order}"))?;
        let e = f.graph.edges()[0].group.order() as i64;
        ensure(e == 2 * n, || format!("n = {n}: edge order {e}"))?;
        let chi = euler_characteristic(&f.graph);
        ensure(chi == -frac(2 * n - 1, 8 * n * n), || format!("n = {n}: chi = {chi}"))?;
        let g = genus_from_order(&f.graph, order as u64).map_err(|e| e.to_string())? as i64;
        ensure(g == 2 * n && order == 2 * g * g, || format!("n = {n}: g = {g}"))?;
    }
    Ok("n in 2..=8".into())
}

fn genus_agreement() -> Check {
    let mut count = 0;
    let mut pairs: Vec<_> = common::fixtures().into_iter().map(|(_, _, i)| (i.graph, i.surjection.unwrap())).collect();
    pairs.extend(common::admissible_sample(11, 100));
    for (g, s) in &pairs {
        let n = s.target().order() as u64;
        let a = genus_from_order(g, n).map_err(|e| e.to_string())?;
        let b = genus_of_cover(&build_coset_graph(g, s)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("order {n}: {a} != {b}"))?;
        count += 1;
    }
    ensure(count >= 103, || format!("only {count} instances"))?;
    Ok(format!("{count} instances"))
}

fn faithfulness() -> Check {
    for (name, _, inst) in common::fixtures() {
        let r = is_faithful(&inst.graph, inst.surjection.as_ref().unwrap(), true).map_err(|e| e.to_string())?;
        ensure(r.image_in_h1_kernel == Some(true), || format!("{name}: image outside the H1 kernel"))?;
    }
    for x in [3, 9] {
        let f = example_cyclic_family(x).map_err(|e| e.to_string())?;
        let r = is_faithful(&f.graph, &f.surjection, true).map_err(|e| e.to_string())?;
        ensure(r.faithful && r.consistent(), || format!("cyclic x = {x} not faithful"))?;
    }
    for n in [2, 3] {
        let f = example_so4_family(n).map_err(|e| e.to_string())?;
        let r = is_faithful(&f.graph, &f.surjection, true).map_err(|e| e.to_string())?;
        ensure(r.faithful && r.consistent(), || format!("so4 n = {n} not faithful"))?;
    }
    let z2 = parse_instance(r#"{"vertices":[{"id":0,"group":{"family":"cyclic","n":2}}],"edges":[]}"#)
        .map_err(|e| e.to_string())?;
    let target = Arc::new(parse_group_spec("cyclic:2").unwrap().build().unwrap());
    let s = find_surjections(&z2.graph, &target, 1).surjections.pop().ok_or("no surjection onto Z2")?;
    let r = is_faithful(&z2.graph, &s, true).map_err(|e| e.to_string())?;
    ensure(!r.faithful && r.image_in_h1_kernel == Some(true), || "single vertex Z2 judged faithful".into())?;
    Ok("fixtures, x in {3,9}, n in {2,3}, single vertex Z2".into())
}

fn search_bounds(budget: Duration) -> Check {
    let caps = SearchCaps::default();
    let mut parts = Vec::new();
    for (g, class) in [(3, SearchClass::Cyclic), (4, SearchClass::Cyclic), (5, SearchClass::Any), (6, SearchClass::Any)] {
        let t = Instant::now();
        let r = search_max_order(g, class, &caps, None).map_err(|e| e.to_string())?;
        let elapsed = t.elapsed();
        ensure(elapsed <= budget, || format!("genus {g}: {elapsed:?}"))?;
        ensure(r.violations().is_empty(), || format!("genus {g}: order above {}", r.bound))?;
        for s in r.instances.iter().filter(|s| s.single_edge()) {
            let cap = if s.target.starts_with('Z') { 6 * (g - 1) } else { 360 * (g - 1) };
            ensure(s.order <= cap, || format!("genus {g}: single edge order {} above {cap}", s.order))?;
        }
        ensure(r.instances.iter().all(|s| s.certified), || format!("genus {g}: uncertified instance"))?;
        let best = r.best_order.ok_or_else(|| format!("genus {g}: nothing found"))?;
        parts.push(format!("g={g} {class} best {best}/{} in {:.1}s", r.bound, elapsed.as_secs_f64()));
    }
    Ok(parts.join(", "))
}

fn normal_form() -> Check {
    let mut r = common::rng(5);
    let text = |g: &handlecalc::GraphOfGroups| InstanceDocument::from_parts(g, &BTreeMap::new(), None, &[]).to_json();
    for i in 0..500 {
        let g = common::random_cyclic_graph(&mut r, 4, 5);
        let nf = reduce_to_normal_form(&g);
        ensure(text(&reduce_to_normal_form(&nf)) == text(&nf), || format!("graph {i}: not idempotent"))?;
        ensure(euler_characteristic(&nf) == euler_characteristic(&g), || format!("graph {i}: chi changed"))?;
        let n = g.vertices().iter().fold(1, |a, v| num_integer::lcm(a, v.group.order() as u64));
        ensure(genus_from_order(&nf, n).ok() == genus_from_order(&g, n).ok(), || format!("graph {i}: genus changed"))?;
        for e in g.edges() {
            let s = subdivide_edge(&g, e.id).map_err(|e| e.to_string())?;
            ensure(euler_characteristic(&s) == euler_characteristic(&g), || format!("graph {i}: subdivision"))?;
        }
    }
    Ok("500 random graphs".into())
}

fn surjection_oracle() -> Check {
    let mut total = 0;
    for (name, g) in common::oracle::graphs() {
        for t in common::oracle::targets() {
            let target = Arc::new(parse_group_spec(t).map_err(|e| e.to_string())?.build().map_err(|e| e.to_string())?);
            ensure(target.order() <= 24, || format!("{t} too large"))?;
            let found = find_surjections(&g, &target, usize::MAX - 1);
            let keys: BTreeSet<String> = found.surjections.iter().map(common::oracle::key).collect();
            ensure(keys.len() == found.surjections.len(), || format!("{name} onto {t}: duplicates"))?;
            ensure(keys == common::oracle::brute_force(&g, &target), || format!("{name} onto {t}: mismatch"))?;
            total += keys.len();
        }
    }
    Ok(format!("{total} surjections onto targets of order <= 24"))
}

fn main() {
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Check>)> = vec![
        ("cyclic family", Duration::from_secs(1), Box::new(cyclic_family)),
        ("so4 family", Duration::from_secs(10), Box::new(so4_family)),
        ("genus from order equals genus of cover", Duration::from_secs(60), Box::new(genus_agreement)),
        ("faithfulness", Duration::from_secs(60), Box::new(faithfulness)),
        ("search bounds", Duration::from_secs(40 * 60), Box::new(|| search_bounds(Duration::from_secs(600)))),
        ("normal form and subdivision", Duration::from_secs(30), Box::new(normal_form)),
        ("surjections against brute force", Duration::from_secs(120), Box::new(surjection_oracle)),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = check();
        let elapsed = t.elapsed();
        let result = result.and_then(|m| if elapsed <= *budget { Ok(m) } else { Err(format!("took {elapsed:?}")) });
        match result {
            Ok(m) => println!("PASS {} {name}: {m} ({:.2}s)", i + 1, elapsed.as_secs_f64()),
            Err(m) => {
                failed += 1;
                println!("FAIL {} {name}: {m} ({:.2}s)", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
