//! Fatou graphs of fat-gasket Julia sets built from finite cores, finite-depth
//! checks of their combinatorics, and Apollonian packings for comparison.

pub mod anchored;
pub mod branched_cover;
pub mod certificate;
pub mod export;
pub mod packing;
pub mod per2;
pub mod plane_graph;
