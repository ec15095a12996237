use std::fmt;

use serde::{Deserialize, Serialize};

use super::{is_isomorphic, make_polyhedral, FiniteGroup, PolyhedralKind};

/// Isomorphism type of a finite subgroup of SO(3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "n", rename_all = "snake_case")]
pub enum So3Class {
    Cyclic(u32),
    /// Dihedral of order `2n`, `n >= 2`.
    Dihedral(u32),
    Tetrahedral,
    Octahedral,
    Icosahedral,
    NotRealizable,
}

impl So3Class {
    pub fn is_realizable(self) -> bool {
        self != So3Class::NotRealizable
    }

    pub fn is_polyhedral(self) -> bool {
        matches!(self, So3Class::Tetrahedral | So3Class::Octahedral | So3Class::Icosahedral)
    }

    /// Order of the cyclic part: `n` for `Z_n` and `D_2n`.
    pub fn cyclic_part(self) -> Option<u32> {
        match self {
            So3Class::Cyclic(n) | So3Class::Dihedral(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for So3Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            So3Class::Cyclic(n) => write!(f, "cyclic Z_{n}"),
            So3Class::Dihedral(n) => write!(f, "dihedral D_{}", 2 * n),
            So3Class::Tetrahedral => write!(f, "tetrahedral (order 12)"),
            So3Class::Octahedral => write!(f, "octahedral (order 24)"),
            So3Class::Icosahedral => write!(f, "icosahedral (order 60)"),
            So3Class::NotRealizable => write!(f, "not a subgroup of SO(3)"),
        }
    }
}

fn is_dihedral(g: &FiniteGroup) -> bool {
    let order = g.order();
    if !order.is_multiple_of(2) || order < 4 {
        return false;
    }
    let m = order / 2;
    (0..order).filter(|&r| g.element_order(r) as usize == m).any(|r| {
        let rotations = g.generated(&[r]);
        let r_inv = g.inv(r);
        (0..order).any(|s| !rotations.contains(s) && g.element_order(s) == 2 && g.conj(s, r) == r_inv)
    })
}

/// Decides which finite subgroup of SO(3), if any, `g` is isomorphic to.
pub fn classify_so3_subgroup(g: &FiniteGroup) -> So3Class {
    let order = g.order();
    if g.is_cyclic() {
        return So3Class::Cyclic(order as u32);
    }
    if is_dihedral(g) {
        return So3Class::Dihedral((order / 2) as u32);
    }
    let candidates = [
        (12, PolyhedralKind::Tetrahedral, So3Class::Tetrahedral),
        (24, PolyhedralKind::Octahedral, So3Class::Octahedral),
        (60, PolyhedralKind::Icosahedral, So3Class::Icosahedral),
    ];
    for (o, kind, class) in candidates {
        if order == o && is_isomorphic(g, &make_polyhedral(kind)) {
            return class;
        }
    }
    So3Class::NotRealizable
}
