//! Discrete Morrey–Campanato-type seminorms on uniform grids, together with
//! local and fractional maximal operators, Calderón–Zygmund stopping-time
//! generations, exponential decay fits and Muckenhoupt weight diagnostics.
//!
//! Functions are step functions sampled at cell centers of a box domain in
//! one or two dimensions. All routines are pure and operate on immutable
//! inputs.

pub mod czd;
pub mod error;
pub mod grid;
pub mod io;
pub mod maximal;
pub mod seminorms;
pub mod synth;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{
    cube_stats, enumerate_cubes, extremes, measure_condition_constant, Cube, CubeFamily, CubeStats, Domain,
    FamilyPolicy, GridFunction,
};
