//! Discrete lab for weighted inequalities of maximal functions and
//! maximally modulated singular integrals on the dyadic torus.

pub mod error;
pub mod grid;
pub mod harness;
pub mod io;
pub mod maximal;
pub mod operators;
pub mod oscillation;
pub mod par;
pub mod young;

pub use error::{Error, Result};
pub use grid::{CellInterval, DyadicInterval, GridFunction, TorusGrid, Weight};
pub use young::YoungFunction;
