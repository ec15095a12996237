//! The two example families: cyclic groups of order `x(x+1)` and central
//! products of binary dihedral groups.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::admissibility::{MenuEntry, MenuSource, StabilizerKind, StabilizerMenu};
use crate::error::{Error, Result};
use crate::gog::{Edge, EdgeId, GraphOfGroups, Vertex, VertexId};
use crate::groups::{
    central_product_index, make_binary_dihedral, make_central_product, make_cyclic, make_cyclic_rotation,
    make_dihedral, FiniteGroup, GroupHom, Quaternion,
};
use crate::homsearch::Surjection;
use crate::io::InstanceDocument;

/// A graph of groups with a chosen surjection onto a finite group.
#[derive(Debug, Clone)]
pub struct FamilyInstance {
    pub graph: GraphOfGroups,
    pub target: Arc<FiniteGroup>,
    pub surjection: Surjection,
    pub menus: BTreeMap<VertexId, StabilizerMenu>,
    pub notes: Vec<String>,
}

impl FamilyInstance {
    pub fn order(&self) -> u64 {
        self.target.order() as u64
    }

    pub fn document(&self) -> InstanceDocument {
        InstanceDocument::from_parts(&self.graph, &self.menus, Some(&self.surjection), &self.notes)
    }
}

fn edge(id: u32, group: &Arc<FiniteGroup>, u: (u32, &Arc<FiniteGroup>), v: (u32, &Arc<FiniteGroup>), alpha: Vec<usize>, omega: Vec<usize>) -> Result<Edge> {
    Ok(Edge {
        id: EdgeId(id),
        group: group.clone(),
        ends: (VertexId(u.0), VertexId(v.0)),
        alpha: GroupHom::new(group.clone(), u.1.clone(), alpha)?,
        omega: GroupHom::new(group.clone(), v.1.clone(), omega)?,
    })
}

/// Path `Z_2x -- Z_x -- Z_x(x+1) -- Z_(x+1) -- Z_3(x+1)` with the surjection
/// onto `Z_x(x+1)` that is the identity on the middle vertex.
pub fn example_cyclic_family(x: u32) -> Result<FamilyInstance> {
    if x == 0 || x.is_multiple_of(2) || !x.is_multiple_of(3) {
        return Err(Error::InvalidParameter(format!("x must be odd and divisible by 3, got {x}")));
    }
    let n = x * (x + 1);
    let v0 = Arc::new(make_cyclic_rotation(2 * x, x, 1)?);
    let v1 = Arc::new(make_cyclic_rotation(n, x, x + 1)?);
    let v2 = Arc::new(make_cyclic_rotation(3 * (x + 1), x + 1, 1)?);
    let e0 = Arc::new(make_cyclic(x)?);
    let e1 = Arc::new(make_cyclic(x + 1)?);
    let gen = |m: u32| if m > 1 { vec![1] } else { vec![] };
    let im = |m: u32, k: u32| if m > 1 { vec![k as usize] } else { vec![] };
    let edges = vec![
        edge(0, &e0, (0, &v0), (1, &v1), im(x, 2), im(x, x + 1))?,
        edge(1, &e1, (1, &v1), (2, &v2), im(x + 1, x), im(x + 1, 3))?,
    ];
    let vertices = vec![
        Vertex { id: VertexId(0), group: v0 },
        Vertex { id: VertexId(1), group: v1 },
        Vertex { id: VertexId(2), group: v2 },
    ];
    let graph = GraphOfGroups::new(vertices, edges)?;
    let target = Arc::new(make_cyclic(n)?);
    let images = BTreeMap::from([
        (VertexId(0), im(2 * x, x.div_ceil(2))),
        (VertexId(1), gen(n)),
        (VertexId(2), im(3 * (x + 1), x / 3)),
    ]);
    let surjection = Surjection::new(&graph, target.clone(), &images, &BTreeMap::new())?;
    Ok(FamilyInstance {
        graph,
        target,
        surjection,
        menus: BTreeMap::new(),
        notes: vec![format!("cyclic family, x = {x}")],
    })
}

/// One edge `D_2n` joining `D*_4n x_Z2 D*_4n` (order `8n^2`) to
/// `D_2n x Z_2` (order `4n`); the edge group is the diagonal on both sides.
pub fn example_so4_family(n: u32) -> Result<FamilyInstance> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    let d = make_binary_dihedral(n)?;
    let c = Arc::new(make_central_product(&d, &d)?);
    let (a, j, z) = (1, 2, d.central().expect("binary dihedral has -1"));
    let pair = |p: usize, q: usize| central_product_index(&c, &d, &d, p, q);
    let (aa, jj, one_z) = (pair(a, a), pair(j, j), pair(0, z));
    let (h, embedding) = c.subgroup_with_embedding(&[aa, jj, one_z]);
    let h = Arc::new(h);
    let e = Arc::new(make_dihedral(n)?);
    let edges = vec![edge(0, &e, (0, &c), (1, &h), vec![aa, jj], vec![1, 2])?];
    let vertices = vec![Vertex { id: VertexId(0), group: c.clone() }, Vertex { id: VertexId(1), group: h.clone() }];
    let graph = GraphOfGroups::new(vertices, edges)?;
    let images = BTreeMap::from([
        (VertexId(0), c.generators().to_vec()),
        (VertexId(1), h.generators().iter().map(|&x| embedding[x] as usize).collect()),
    ]);
    let surjection = Surjection::new(&graph, c.clone(), &images, &BTreeMap::new())?;
    let diagonal = |g: &FiniteGroup, images: &[usize]| {
        let mut set: Vec<usize> = g.generated(images).ones().collect();
        set.sort_unstable();
        set
    };
    let menu = |v: u32, subgroup: Vec<usize>| StabilizerMenu {
        vertex: VertexId(v),
        source: MenuSource::Declared,
        entries: vec![MenuEntry { subgroup, kind: StabilizerKind::IsolatedPoint, witness: Some(Quaternion::ONE) }],
    };
    let menus = BTreeMap::from([(VertexId(0), menu(0, diagonal(&c, &[aa, jj]))), (VertexId(1), menu(1, diagonal(&h, &[1, 2])))]);
    Ok(FamilyInstance {
        graph,
        target: c,
        surjection,
        menus,
        notes: vec![format!("binary dihedral central product family, n = {n}")],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissibility::admissibility_report;
    use crate::covering::{build_coset_graph, genus_of_cover, max_finite_normal_subgroup};
    use crate::gog::genus_from_order;
    use crate::homsearch::verify_surjection;

    #[test]
    fn cyclic_x3() {
        let f = example_cyclic_family(3).unwrap();
        assert_eq!(f.order(), 12);
        assert_eq!(genus_from_order(&f.graph, 12).unwrap(), 4);
        assert!(verify_surjection(&f.surjection));
        assert_eq!(genus_of_cover(&build_coset_graph(&f.graph, &f.surjection)).unwrap(), 4);
        assert!(admissibility_report(&f.graph, &f.menus).unwrap().admissible);
        assert!(max_finite_normal_subgroup(&f.graph).is_trivial());
    }

    #[test]
    fn cyclic_rejects_bad_x() {
        for x in [0, 2, 5, 6] {
            assert!(example_cyclic_family(x).is_err());
        }
    }

    #[test]
    fn so4_n2() {
        let f = example_so4_family(2).unwrap();
        assert_eq!(f.order(), 32);
        assert_eq!(f.graph.vertices()[1].group.order(), 8);
        assert_eq!(genus_from_order(&f.graph, 32).unwrap(), 4);
        assert!(verify_surjection(&f.surjection));
        let report = admissibility_report(&f.graph, &f.menus).unwrap();
        assert!(report.admissible, "{report:?}");
        assert!(max_finite_normal_subgroup(&f.graph).is_trivial());
        assert!(example_so4_family(1).is_err());
    }
}
