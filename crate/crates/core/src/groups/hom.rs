use std::sync::Arc;

use fixedbitset::FixedBitSet;

use super::FiniteGroup;
use crate::error::{Error, Result};

/// A homomorphism given by the images of the domain's generators, with the
/// full element map cached.
#[derive(Debug, Clone)]
pub struct GroupHom {
    domain: Arc<FiniteGroup>,
    codomain: Arc<FiniteGroup>,
    images: Vec<usize>,
    map: Vec<u32>,
}

impl GroupHom {
    /// Extends generator images to the whole domain, failing if some
    /// relation of the domain is violated.
    pub fn new(domain: Arc<FiniteGroup>, codomain: Arc<FiniteGroup>, images: Vec<usize>) -> Result<Self> {
        if images.len() != domain.generators().len() {
            return Err(Error::NotAHomomorphism(format!(
                "expected {} generator images, got {}",
                domain.generators().len(),
                images.len()
            )));
        }
        if let Some(&bad) = images.iter().find(|&&y| y >= codomain.order()) {
            return Err(Error::NotAHomomorphism(format!("image {bad} is not an element of the codomain")));
        }
        let map = extend(&domain, &codomain, domain.generators(), &images)
            .ok_or_else(|| Error::NotAHomomorphism("generator images violate a relation of the domain".into()))?;
        Ok(GroupHom { domain, codomain, images, map })
    }

    pub fn identity(group: Arc<FiniteGroup>) -> Self {
        let images = group.generators().to_vec();
        let map = (0..group.order() as u32).collect();
        GroupHom { domain: group.clone(), codomain: group, images, map }
    }

    pub fn domain(&self) -> &Arc<FiniteGroup> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FiniteGroup> {
        &self.codomain
    }

    /// Images of the domain generators.
    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, a: usize) -> usize {
        self.map[a] as usize
    }

    pub fn element_map(&self) -> &[u32] {
        &self.map
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = FixedBitSet::with_capacity(self.codomain.order());
        self.map.iter().all(|&y| !seen.put(y as usize))
    }

    pub fn is_bijective(&self) -> bool {
        self.domain.order() == self.codomain.order() && self.is_injective()
    }

    pub fn image_set(&self) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.codomain.order());
        for &y in &self.map {
            s.insert(y as usize);
        }
        s
    }

    /// Preimage of a set of codomain elements.
    pub fn preimage(&self, set: &FixedBitSet) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.domain.order());
        for (a, &y) in self.map.iter().enumerate() {
            if set.contains(y as usize) {
                s.insert(a);
            }
        }
        s
    }

    pub fn image_of(&self, set: &FixedBitSet) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.codomain.order());
        for a in set.ones() {
            s.insert(self.map[a] as usize);
        }
        s
    }

    /// `other ∘ self`
    pub fn then(&self, other: &GroupHom) -> GroupHom {
        let images = self.images.iter().map(|&y| other.apply(y)).collect();
        let map = self.map.iter().map(|&y| other.map[y as usize]).collect();
        GroupHom { domain: self.domain.clone(), codomain: other.codomain.clone(), images, map }
    }

    /// Inverse of a bijective homomorphism.
    pub fn inverse(&self) -> Option<GroupHom> {
        if !self.is_bijective() {
            return None;
        }
        let mut inv = vec![0u32; self.map.len()];
        for (a, &y) in self.map.iter().enumerate() {
            inv[y as usize] = a as u32;
        }
        let images = self.codomain.generators().iter().map(|&s| inv[s] as usize).collect();
        Some(GroupHom { domain: self.codomain.clone(), codomain: self.domain.clone(), images, map: inv })
    }
}

/// Extends `gens -> images` to the subgroup generated by `gens`. Returns the
/// element map (u32::MAX outside the subgroup) or `None` when the
/// assignment is not a homomorphism.
fn extend_partial(
    domain: &FiniteGroup,
    codomain: &FiniteGroup,
    gens: &[usize],
    images: &[usize],
) -> Option<Vec<u32>> {
    let mut map = vec![u32::MAX; domain.order()];
    map[0] = 0;
    let mut queue = vec![0usize];
    let mut head = 0;
    while head < queue.len() {
        let a = queue[head];
        head += 1;
        let fa = map[a] as usize;
        for (&s, &y) in gens.iter().zip(images) {
            let b = domain.mul(s, a);
            let fb = codomain.mul(y, fa) as u32;
            if map[b] == u32::MAX {
                map[b] = fb;
                queue.push(b);
            } else if map[b] != fb {
                return None;
            }
        }
    }
    Some(map)
}

fn extend(domain: &FiniteGroup, codomain: &FiniteGroup, gens: &[usize], images: &[usize]) -> Option<Vec<u32>> {
    let map = extend_partial(domain, codomain, gens, images)?;
    map.iter().all(|&y| y != u32::MAX).then_some(map)
}

fn injective_on_defined(map: &[u32], codomain_order: usize) -> bool {
    let mut seen = FixedBitSet::with_capacity(codomain_order);
    map.iter().filter(|&&y| y != u32::MAX).all(|&y| !seen.put(y as usize))
}

/// Backtracking over generator images in lexicographic order; `visit`
/// returns `false` to stop early.
fn search_monomorphisms(
    domain: &FiniteGroup,
    codomain: &FiniteGroup,
    visit: &mut dyn FnMut(Vec<usize>, Vec<u32>) -> bool,
) {
    search_constrained(domain, codomain, &[], visit)
}

/// As [`search_monomorphisms`], keeping only maps sending each `fixed`
/// pair's domain element to its prescribed image.
fn search_constrained(
    domain: &FiniteGroup,
    codomain: &FiniteGroup,
    fixed: &[(usize, usize)],
    visit: &mut dyn FnMut(Vec<usize>, Vec<u32>) -> bool,
) {
    let gens = domain.generators();
    if domain.order() > codomain.order() || !codomain.order().is_multiple_of(domain.order()) {
        return;
    }
    let candidates: Vec<Vec<usize>> = gens
        .iter()
        .map(|&s| {
            let o = domain.element_order(s);
            let pinned = fixed.iter().find(|&&(a, _)| a == s).map(|&(_, y)| y);
            (0..codomain.order())
                .filter(|&y| codomain.element_order(y) == o && pinned.is_none_or(|p| p == y))
                .collect()
        })
        .collect();
    let mut images = Vec::with_capacity(gens.len());
    fn rec(
        domain: &FiniteGroup,
        codomain: &FiniteGroup,
        fixed: &[(usize, usize)],
        candidates: &[Vec<usize>],
        images: &mut Vec<usize>,
        visit: &mut dyn FnMut(Vec<usize>, Vec<u32>) -> bool,
    ) -> bool {
        let gens = domain.generators();
        let level = images.len();
        if level == gens.len() {
            let map = extend(domain, codomain, gens, images).expect("complete assignment checked at last level");
            return visit(images.clone(), map);
        }
        for &y in &candidates[level] {
            images.push(y);
            let ok = match extend_partial(domain, codomain, &gens[..=level], images) {
                Some(map) => {
                    injective_on_defined(&map, codomain.order())
                        && fixed.iter().all(|&(a, y)| map[a] == u32::MAX || map[a] as usize == y)
                }
                None => false,
            };
            if ok && !rec(domain, codomain, fixed, candidates, images, visit) {
                return false;
            }
            images.pop();
        }
        true
    }
    rec(domain, codomain, fixed, &candidates, &mut images, visit);
}

/// All injective homomorphisms `domain -> codomain`, ordered
/// lexicographically by generator images.
pub fn enumerate_monomorphisms(domain: &Arc<FiniteGroup>, codomain: &Arc<FiniteGroup>) -> Vec<GroupHom> {
    let mut out = Vec::new();
    search_monomorphisms(domain, codomain, &mut |images, map| {
        out.push(GroupHom { domain: domain.clone(), codomain: codomain.clone(), images, map });
        true
    });
    out
}

/// Visits, in lexicographic order, the monomorphisms sending each `fixed`
/// domain element to its prescribed image, until `visit` returns `false`.
pub fn monomorphisms_extending(
    domain: &Arc<FiniteGroup>,
    codomain: &Arc<FiniteGroup>,
    fixed: &[(usize, usize)],
    visit: &mut dyn FnMut(GroupHom) -> bool,
) {
    search_constrained(domain, codomain, fixed, &mut |images, map| {
        visit(GroupHom { domain: domain.clone(), codomain: codomain.clone(), images, map })
    });
}

pub fn first_monomorphism(domain: &Arc<FiniteGroup>, codomain: &Arc<FiniteGroup>) -> Option<GroupHom> {
    let mut found = None;
    search_monomorphisms(domain, codomain, &mut |images, map| {
        found = Some(GroupHom { domain: domain.clone(), codomain: codomain.clone(), images, map });
        false
    });
    found
}

/// Brute-force isomorphism test with order and element-order prefilters.
pub fn is_isomorphic(a: &FiniteGroup, b: &FiniteGroup) -> bool {
    if a.order() != b.order() || a.order_histogram() != b.order_histogram() {
        return false;
    }
    let mut found = false;
    search_monomorphisms(a, b, &mut |_, _| {
        found = true;
        false
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{make_cyclic, make_dihedral};

    /// Every map on generators, checked against the full table.
    fn brute_force(domain: &FiniteGroup, codomain: &FiniteGroup) -> Vec<Vec<usize>> {
        let k = domain.generators().len();
        let n = codomain.order();
        let mut out = Vec::new();
        let mut idx = vec![0usize; k];
        loop {
            if let Some(map) = extend(domain, codomain, domain.generators(), &idx) {
                let hom = (0..domain.order())
                    .all(|a| (0..domain.order()).all(|b| map[domain.mul(a, b)] as usize == codomain.mul(map[a] as usize, map[b] as usize)));
                if hom && injective_on_defined(&map, n) {
                    out.push(idx.clone());
                }
            }
            let mut i = k;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < n {
                    break;
                }
                idx[i] = 0;
            }
        }
    }

    #[test]
    fn cyclic_into_cyclic() {
        let z12 = Arc::new(make_cyclic(12).unwrap());
        let z3 = Arc::new(make_cyclic(3).unwrap());
        let monos = enumerate_monomorphisms(&z3, &z12);
        assert_eq!(monos.iter().map(|m| m.images()[0]).collect::<Vec<_>>(), vec![4, 8]);
        let z5 = Arc::new(make_cyclic(5).unwrap());
        assert!(enumerate_monomorphisms(&z5, &z12).is_empty());
        let z6 = Arc::new(make_cyclic(6).unwrap());
        assert_eq!(enumerate_monomorphisms(&z6, &z12).len(), 2);
    }

    #[test]
    fn matches_brute_force_on_small_groups() {
        let groups: Vec<Arc<FiniteGroup>> = vec![
            Arc::new(make_cyclic(4).unwrap()),
            Arc::new(make_dihedral(2).unwrap()),
            Arc::new(make_dihedral(3).unwrap()),
            Arc::new(make_dihedral(4).unwrap()),
            Arc::new(make_cyclic(6).unwrap()),
        ];
        for a in &groups {
            for b in &groups {
                let fast: Vec<Vec<usize>> = enumerate_monomorphisms(a, b).iter().map(|m| m.images().to_vec()).collect();
                assert_eq!(fast, brute_force(a, b), "{} -> {}", a.family(), b.family());
            }
        }
    }

    #[test]
    fn rejects_bad_images() {
        let z4 = Arc::new(make_cyclic(4).unwrap());
        let z6 = Arc::new(make_cyclic(6).unwrap());
        assert!(GroupHom::new(z4.clone(), z6.clone(), vec![1]).is_err());
        assert!(GroupHom::new(z4.clone(), z6.clone(), vec![3]).is_ok());
        assert!(!GroupHom::new(z4, z6, vec![3]).unwrap().is_injective());
    }
}
