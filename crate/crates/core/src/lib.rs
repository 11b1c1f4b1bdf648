//! Model-agnostic local explanations for time-series forecasters.
//!
//! A window is cut into temporally contiguous segments (six segmenters are
//! available, from fixed windows to matrix-profile and SAX based ones), random
//! subsets of segments are replaced with non-informative values, the black-box
//! model is queried on each perturbed window and a locally weighted linear
//! surrogate is fit on the masks. The surrogate's coefficients are the
//! attribution. [`evaluation`] measures how faithful those attributions are by
//! perturbation analysis against a random baseline.

pub mod evaluation;
pub mod explainer;
pub mod matrix_profile;
pub mod model;
pub mod replacement;
pub mod segmentation;
pub mod surrogate;
pub mod synthetic;
pub mod types;

pub use evaluation::{run_perturbation_analysis, EvalConfig, EvalReport};
pub use explainer::{explain, ExplainConfig};
pub use model::{Builtin, ModelAdapter, ModelLocator};
pub use replacement::ReplacementKind;
pub use segmentation::{Algorithm, SegmenterConfig, SlopeVariant};
pub use types::{Attribution, Cell, Dataset, Mask, Sample, SegmentMap};
