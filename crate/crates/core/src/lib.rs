// SPDX-License-Identifier: Apache-2.0

//! Centrality for signed and attributed networks from exponentially twisted
//! two-step walk sampling.
//!
//! A graph is loaded into an [`graph::AttributedGraph`], a path measure is
//! chosen from [`measure::PathMeasureKind`], and [`centrality::centrality`]
//! turns the twisted path law into a node ranking.

pub mod analysis;
pub mod centrality;
pub mod error;
pub mod graph;
pub mod io;
pub mod measure;
pub mod sampling;
pub mod twisting;
pub mod verify;

pub use error::{Error, Result};
