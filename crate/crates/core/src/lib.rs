//! Panoramic point-cloud memory: equirectangular projection, depth-buffered
//! reprojection, ray embeddings, pose alignment, camera paths, metrics and the
//! generate-reconstruct exploration loop.

#![no_std]

extern crate alloc;

pub mod error;
pub mod explore;
pub mod geometry;
pub mod memory;
pub mod metrics;
pub mod raster;
pub mod sphere;
pub mod synthworld;
pub mod trajectory;

pub use error::{Error, Result};
pub use geometry::{CameraPose, Convention, SimilarityTransform};
pub use memory::{MemPoint, MemoryConfig, PointCloudMemory};
pub use raster::{RasterConfig, Reprojection};
pub use sphere::{EquirectImage, PluckerField, SphCoord};
