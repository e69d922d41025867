//! Orthogonal step scaling functions on local fields of positive characteristic.
//!
//! The pipeline runs: a valid tree of `N`-windows, a λ-array supported on its
//! mask digraph, the dynamical system converging to all ones after `M` steps,
//! and finally the step scaling function `phi` with support in `F_{-N}` and
//! constant on cosets of `F_M`, together with its refinement coefficients.

pub mod characters;
pub mod chrestenson;
pub mod galois;
pub mod localfield;
pub mod maskdyn;
pub mod pipeline;
pub mod scalefn;
pub mod tuple;
pub mod validtree;
pub mod weight;

pub use characters::{CharacterWindow, RootOfUnity};
pub use galois::{FieldError, FieldParams, GaloisField, GfElem};
pub use localfield::{LaurentElem, LocalFieldError};
pub use maskdyn::{LambdaArray, MaskError, Strategy};
pub use num_complex::Complex64;
pub use num_rational::BigRational;
pub use scalefn::{FreqStepFunction, MaskFunction, RefinementCoeffs, TimeStepFunction};
pub use tuple::TupleSpace;
pub use validtree::{TreeError, TreeFile, ValidTree};
pub use weight::Weight;
pub use pipeline::{run_pipeline, PipelineConfig, PipelineError, PipelineReport};
