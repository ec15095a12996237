use std::collections::HashSet;

use fixedbitset::FixedBitSet;

use super::{Family, FiniteGroup, GroupSpec};
use crate::error::{Error, Result};

pub const DEFAULT_LATTICE_CAP: usize = 1000;

/// A subgroup stored as a set of element indices of its parent group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subgroup {
    pub elements: FixedBitSet,
    pub generators: Vec<usize>,
    pub normal: bool,
}

impl Subgroup {
    pub fn order(&self) -> usize {
        self.elements.count_ones(..)
    }

    pub fn contains(&self, a: usize) -> bool {
        self.elements.contains(a)
    }

    pub fn element_list(&self) -> Vec<usize> {
        self.elements.ones().collect()
    }
}

/// All subgroups of `group` by cyclic extension, ordered by size and then by
/// element set, each tagged normal or not.
pub fn subgroup_lattice(group: &FiniteGroup, cap: usize) -> Result<Vec<Subgroup>> {
    if group.order() > cap {
        return Err(Error::ResourceLimit { order: group.order(), cap });
    }
    let n = group.order();
    // one generator per cyclic subgroup
    let mut cyclic: Vec<(usize, FixedBitSet)> = Vec::new();
    let mut seen_cyclic = HashSet::new();
    for a in 0..n {
        let c = group.generated(&[a]);
        if seen_cyclic.insert(c.clone()) {
            cyclic.push((a, c));
        }
    }
    let mut found: Vec<(FixedBitSet, Vec<usize>)> = Vec::new();
    let mut seen = HashSet::new();
    for (a, c) in &cyclic {
        if seen.insert(c.clone()) {
            found.push((c.clone(), if *a == 0 { vec![] } else { vec![*a] }));
        }
    }
    let mut head = 0;
    while head < found.len() {
        let (set, gens) = found[head].clone();
        head += 1;
        for (a, c) in &cyclic {
            if c.is_subset(&set) {
                continue;
            }
            let mut g2 = gens.clone();
            g2.push(*a);
            let joined = group.generated(&g2);
            if seen.insert(joined.clone()) {
                found.push((joined, g2));
            }
        }
    }
    let mut out: Vec<Subgroup> = found
        .into_iter()
        .map(|(elements, generators)| {
            let normal = is_normal(group, &elements);
            Subgroup { elements, generators, normal }
        })
        .collect();
    out.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.element_list().cmp(&b.element_list())));
    Ok(out)
}

pub fn is_normal(group: &FiniteGroup, set: &FixedBitSet) -> bool {
    group.generators().iter().all(|&g| set.ones().all(|h| set.contains(group.conj(g, h))))
}

/// `g H g^-1`
pub fn conjugate_set(group: &FiniteGroup, g: usize, set: &FixedBitSet) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(group.order());
    for h in set.ones() {
        out.insert(group.conj(g, h));
    }
    out
}

/// Largest subgroup of `set` that is normal in `group`.
pub fn normal_core(group: &FiniteGroup, set: &FixedBitSet) -> FixedBitSet {
    let mut core = set.clone();
    loop {
        let mut next = core.clone();
        for &g in group.generators() {
            next.intersect_with(&conjugate_set(group, g, &core));
        }
        if next == core {
            return core;
        }
        core = next;
    }
}

/// Whether two subgroups are conjugate; returns a conjugating element.
pub fn conjugating_element(group: &FiniteGroup, a: &FixedBitSet, b: &FixedBitSet) -> Option<usize> {
    if a.count_ones(..) != b.count_ones(..) {
        return None;
    }
    (0..group.order()).find(|&g| a.ones().all(|h| b.contains(group.conj(g, h))))
}

impl FiniteGroup {
    /// Quotient by a normal subgroup; cosets are numbered by their smallest
    /// element, so the identity coset is 0.
    pub fn quotient(&self, normal: &FixedBitSet) -> Result<FiniteGroup> {
        if !normal.contains(0) || !is_normal(self, normal) {
            return Err(Error::InvalidGroup("quotient by a subset that is not a normal subgroup".into()));
        }
        let n = self.order();
        let mut coset_of = vec![u32::MAX; n];
        let mut reps = Vec::new();
        for a in 0..n {
            if coset_of[a] == u32::MAX {
                let id = reps.len() as u32;
                reps.push(a);
                for h in normal.ones() {
                    coset_of[self.mul(a, h)] = id;
                }
            }
        }
        let rows: Vec<Vec<u32>> = reps
            .iter()
            .map(|&a| reps.iter().map(|&b| coset_of[self.mul(a, b)]).collect())
            .collect();
        let mut q = FiniteGroup::from_table(&rows)?;
        q.family = Family::Generic;
        q.spec = GroupSpec::Table { rows };
        Ok(q)
    }
}
