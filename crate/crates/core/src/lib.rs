//! Exact diameters of random geometric graphs.
//!
//! The main entry point is [`diameter::compute_diameter`], which combines a
//! separator hierarchy ([`partition`]), an exact distance oracle ([`oracle`])
//! and a budgeted decision procedure. [`ifub`] provides the iFUB baseline and
//! [`propcheck`] the structural property verifiers.

pub mod cli;
pub mod diameter;
pub mod geometry;
pub mod graph;
pub mod graphgen;
pub mod ifub;
pub mod lca;
pub mod oracle;
pub mod partition;
pub mod propcheck;
pub mod work;
