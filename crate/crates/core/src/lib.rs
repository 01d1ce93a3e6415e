//! Persistent homology of Čech and Rips filtrations built on samples from
//! dependent point processes.

// `!(x > 0.0)` deliberately rejects NaN, and the matrix kernels read best
// with explicit indices.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

pub mod coupling;
pub mod filtration;
pub mod geometry;
pub mod limits;
pub mod miniball;
pub mod persistence;
pub mod samplers;
mod scalar;

pub use scalar::Scalar;

pub use coupling::{Bound, BoundParams, MixingMatrix};
pub use filtration::{ComplexKind, FilteredComplex, Simplex};
pub use geometry::{Metric, PointCloud, ScalingRegime};
pub use persistence::{BettiQuery, Death, DiagramPoint, PersistenceDiagram};
pub use samplers::{ProcessSpec, Sample};

pub type PointCloudF64 = PointCloud<f64>;
pub type PointCloudF32 = PointCloud<f32>;
pub type FilteredComplexF64 = FilteredComplex<f64>;
pub type FilteredComplexF32 = FilteredComplex<f32>;
pub type PersistenceDiagramF64 = PersistenceDiagram<f64>;
pub type PersistenceDiagramF32 = PersistenceDiagram<f32>;
pub type BettiQueryF64 = BettiQuery<f64>;
pub type BettiQueryF32 = BettiQuery<f32>;
