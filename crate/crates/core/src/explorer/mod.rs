//! Example families, bound certificates and bounded searches.

pub mod certify;
pub mod families;
pub mod search;

pub use certify::{certify_bounds, theorem_bound, BoundCertificate, Inequality, ProofCase, Relation};
pub use families::{example_cyclic_family, example_so4_family, FamilyInstance};
pub use search::{any_class_catalogue, enumerate_shapes, search_max_order, InstanceSummary, SearchCaps, SearchClass, SearchReport, Shape};
