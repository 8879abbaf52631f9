//! Randomized sketches of the TR least-squares subproblems.

pub mod leverage;
pub mod mixing;
pub mod sampling;
pub mod tensorsketch;

pub use leverage::{leverage_distribution, recommend_embedding_size, SketchKind};
pub use mixing::{mix_core, mix_tensor, random_mixers, unmix_core, ModeMixer, SignFlip};
pub use sampling::{
    draw_joint_samples, ksrft_sketch_rhs, sampled_rows, sampled_subchain, IndexDist, SampleTable,
};
pub use tensorsketch::{
    countsketch_core, tensorsketch_matrix, tensorsketch_rhs, tensorsketch_subchain, KWiseHash,
    TensorSketch, HASH_PRIME,
};
