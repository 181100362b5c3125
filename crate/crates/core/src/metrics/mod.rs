//! Similarity and diversity features, the z-normalized feature matrix, and
//! the linear selection score `S = φ(X) · wᵀ`.

mod divergence;
mod diversity;
mod features;

pub use divergence::{
    bhattacharyya, cosine_similarity, euclidean_distance, jensen_shannon, kl_divergence, renyi_divergence,
    smooth, variational_distance, DEFAULT_EPSILON,
};
pub use diversity::{diversity_features, DiversityFeatures};
pub use features::{
    build_feature_matrix, score_examples, similarity_features, Column, DiversityMeasure, ExampleRepr,
    FeatureConfig, FeatureId, FeatureMatrix, FeatureResources, Representation, ScoreVector, SimilarityMeasure,
    WeightVector, FEATURE_LAYOUT_VERSION,
};
