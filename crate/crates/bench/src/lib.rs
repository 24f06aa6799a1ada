//! Fixtures shared by the benchmarks.

use kneser_core::{Group, GroupSpec, GroupSubset};

pub fn group(orders: &[usize]) -> Group {
    Group::new(&GroupSpec::new(orders.to_vec()).expect("valid orders")).expect("small group")
}

/// `{0, 1, ..., len-1}` in flat indices.
pub fn interval(g: &Group, len: usize) -> GroupSubset {
    GroupSubset::from_indices(g, 0..len).expect("in range")
}

/// Every `step`-th element.
pub fn stride(g: &Group, step: usize) -> GroupSubset {
    GroupSubset::from_indices(g, (0..g.order()).step_by(step)).expect("in range")
}
