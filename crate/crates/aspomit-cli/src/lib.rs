//! Support library for the `aspomit` binary: bundled example programs,
//! ground graph-coloring instance generation, and the benchmark harness.
//!
//! The binary is a thin argument-parsing layer over [`aspomit`] plus these
//! modules; everything here is also usable programmatically, which is how
//! the integration tests drive it.

pub mod bench;
pub mod fixtures;
pub mod gcolor;
