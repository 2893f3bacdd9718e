//! Cartan reduction for sub-Riemannian contact distributions on R³.
//!
//! Starting from two generating vector fields, the pipeline builds an
//! adapted coframe, reduces its structure group in three steps and reads off
//! the differential invariant M = a₁² + a₂². All geometry is symbolic (see
//! [`scalarfield`]); numbers only appear when fields are sampled at points.
//!
//! ```
//! use cartan_core::{corpus, reduce, Point};
//!
//! let report = reduce(&corpus::heisenberg(), &[Point::new(1.0, 0.0, 0.3)]).unwrap();
//! let m = report.samples[0].m.unwrap();
//! assert!((m - 9.0 / 64.0).abs() < 1e-9);
//! ```

pub mod corpus;
pub mod forms;
pub mod point;
pub mod reduction;
pub mod scalarfield;

pub use forms::{Coframe, Frame, OneForm, ThreeForm, TwoForm, VectorField};
pub use point::Point;
pub use reduction::{
    classify, compare, reduce, ClassKind, Comparison, Distribution, InvariantReport, ReductionError, Sample,
    SampleStatus, Tolerances, Verdict,
};
pub use scalarfield::{parse, DomainError, ParseError, ScalarField, Var};
