//! Abelian sandpiles on finite sinked multigraphs and their companions:
//! uniform spanning trees, rotor walks, divisible sandpiles and exact
//! two-dimensional lattice quantities.

pub mod algebra;
pub mod error;
pub mod exact2d;
pub mod graphcore;
pub mod growth;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod rotor;
pub mod sandpile;
pub mod treewalk;

pub use error::{Result, SandlabError};
pub use graphcore::{box_graph, wired_box, GridSpec, SinkedMultigraph};
