//! The three comparison metrics: spectral-entropy (Vendi) scoring, unique
//! n-gram ratios, and K-means inertia.

mod distinct;
mod kmeans;
mod vendi;

pub use distinct::distinct_n;
pub use kmeans::{kmeans_inertia, KMeansParams};
pub use vendi::{vendi_score, VendiParams};
