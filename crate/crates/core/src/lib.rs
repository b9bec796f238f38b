//! Attractors, fast basins, fractal continuations and slow basins of
//! invertible iterated function systems on cell grids.

pub mod analysis;
pub mod attractor;
pub mod basin;
pub mod cli;
pub mod config;
pub mod error;
pub mod grid;
pub mod ifs;
pub mod map;
pub mod render;
pub mod space;

pub use attractor::{attractor_for, chaos_game, compute_attractor, gasket_member, AttractorApprox};
pub use basin::{
    basin_estimate, continuation, fast_basin_inverse, fast_basin_inverse_over, generation_forward,
    generation_forward_field, slow_basin, AttractorSet, ContinuationApprox, GenerationField,
    Membership,
};
pub use config::{load_ifs, parse_ifs};
pub use error::{Error, Result};
pub use grid::{CellRaster, Grid, Window};
pub use ifs::{IfsSystem, Word};
pub use map::MapSpec;
pub use space::{ModelSpace, Point};
