//! The articulated 2D pattern: a circle with four two-link arms, rendered
//! into a cluttered binary image.

pub mod generate;
pub mod geometry;
pub mod init;
pub mod metrics;
pub mod pairwise;
pub mod potentials;
pub mod raster;
pub mod unary;

pub use generate::{generate_scene, pattern_states, Scene, SceneSpec};
pub use geometry::{CirclePose, LinkPose, PartSizes, PatternParams};
pub use init::init_particles;
pub use metrics::{mle_position_error, node_position_errors};
pub use pairwise::{pairwise_density, pairwise_sample, predict, EdgeClass};
pub use potentials::{PatternPotentials, DEFAULT_INIT_THRESHOLD};
pub use raster::{BinaryImage, GrayImage, Part};
pub use unary::{part_for, unary_phi};
