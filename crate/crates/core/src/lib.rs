//! Separations, tree-decompositions and tree amalgamations of locally finite
//! graphs.
//!
//! Everything here works on graphs exposed through a neighbour oracle
//! ([`graph::Graph`]), so the same code runs on finite graphs and on lazily
//! generated infinite families such as the double ray, the square grid,
//! regular trees and tree amalgamations of finite factors. Answers that
//! depend on a finite exploration window or on a word budget for group
//! actions say so in their types.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod amalgam;
pub mod catalog;
pub mod error;
pub mod explore;
pub mod families;
pub mod graph;
pub mod group;
pub mod iso;
pub mod process;
pub mod separation;
pub mod tree_decomp;
mod union_find;
pub mod vertex;

pub use error::{Error, Result};
pub use graph::{FiniteGraph, Graph, GraphHandle};
pub use vertex::VertexId;
