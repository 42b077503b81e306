//! Chronological trees, trees coded by functions, and prolific skeletons.

mod chrono;
mod coded;
mod lukasiewicz;
mod skeleton;

pub use chrono::{format_label, parse_label, ChronologicalTree, Node};
pub use coded::{graft_right, TomTreeView};
pub use lukasiewicz::{lukasiewicz_to_tree, tree_to_lukasiewicz};
pub use skeleton::{prolific_skeleton, Detection, ProlificSkeleton, SkeletonLine};
