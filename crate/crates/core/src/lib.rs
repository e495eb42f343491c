//! Toolkit for contour-drawing research: a vector stroke model, stroke-level
//! consensus, a bipartite-matching boundary benchmark, an MM-loss (min over
//! regression terms, mean over adversarial terms) reference kernel with a
//! small trainer, and the scoring engine behind a drawing game.

pub mod bench;
pub mod consensus;
pub mod error;
pub mod game;
pub mod matching;
pub mod mm_loss;
pub mod raster;
pub mod stroke;

pub use error::{Error, Result};
