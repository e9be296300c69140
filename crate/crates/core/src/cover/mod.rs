//! Finite flow samples of the orbit space with the chain metric, long
//! covers, slow bumps, subordinate partitions of unity, and the nerve map.

pub mod bump;
#[allow(clippy::module_inception)]
pub mod cover;
pub mod nerve;
pub mod sample;

pub use bump::{bump, check_slow_variation, partition, Partition};
pub use cover::{build_long_cover, color_cover, verify_coloring, Cover, CoverSet};
pub use nerve::{check_contraction, cover_lebesgue, nerve_l1, nerve_weights, ContractionReport};
pub use sample::{canon_key, circle_sample, FlowSample, SampleBuilder, SamplePoint};
