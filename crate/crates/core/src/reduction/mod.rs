//! Cartan reduction for a contact 2-distribution with the metric induced
//! from R³.
//!
//! The reduction is carried out on a concrete coframe section rather than
//! on the coframe bundle: each reduction of the structure group is realized
//! by transforming the section with the group element that normalizes the
//! relevant structure coefficient.
//!
//! | stage | structure group | normalization of dη³               |
//! |-------|-----------------|------------------------------------|
//! | B0    | G₀ (dim 4)      | adapted: η³ annihilates Δ          |
//! | B1    | G₁ (dim 3)      | c³₁₂ = 1, via φ₄ = c³₁₂            |
//! | B2    | G₂ = SO(2)      | c³₂₃ = c³₃₁ = 0, via (φ₂, φ₃)      |
//!
//! After B2 the rotation-valued pseudoconnection α is fixed by absorbing
//! the torsion it can absorb, and what remains is the pair (a₁, a₂), defined
//! up to the residual rotation; M = a₁² + a₂² is the invariant.

mod classify;
mod compare;
mod invariants;
mod stages;

use thiserror::Error;

use crate::forms::{FormsError, VectorField};
use crate::point::Point;
use crate::scalarfield::{parse, DomainError, ParseError, ScalarField};

pub use classify::{classify, ClassKind, Classification, PointClass, PointClassification};
pub use compare::{compare, compare_reports, Comparison, MRange, Verdict};
pub use invariants::{extract_invariants, reduce, InvariantReport, Residuals, Sample, SampleStatus};
pub use stages::{
    absorb_translations, build_adapted, contact_torsion, normalize_scale, AdaptedCoframe, Stage, TorsionSlice,
};

/// Pointwise agreement for adapted-coframe conditions and the B1 scale.
pub const ADAPTED_TOL: f64 = 1e-9;
/// Pointwise agreement for the B2 translation normalization.
pub const B2_TOL: f64 = 1e-8;
/// Below this, |c³₁₂| is treated as a contact degeneracy.
pub const CONTACT_EPS: f64 = 1e-8;
/// Relative threshold on det(X1, X2, [X1, X2]) for holonomicity at a point.
pub const HOLONOMIC_EPS: f64 = 1e-9;
/// Largest tolerated |Q₁ − P₂| before the pipeline is considered broken.
pub const CONSISTENCY_LIMIT: f64 = 1e-6;

/// Tolerances used for aggregate checks and regressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute bound for quantities that vanish in exact arithmetic.
    pub identity: f64,
    /// Relative bound for comparisons against closed forms.
    pub regression: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-8,
            regression: 1e-6,
        }
    }
}

impl Tolerances {
    /// `|got - want| <= regression * |want|`, with an absolute floor of 1e-9
    /// so that zero references remain testable.
    pub fn regression_ok(&self, got: f64, want: f64) -> bool {
        (got - want).abs() <= (self.regression * want.abs()).max(1e-9)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("distribution `{name}` is holonomic: [X1, X2] lies in the plane at every sampled point")]
    Holonomic { name: String },
    #[error("distribution `{name}` is holonomic at some sampled points and contact at others")]
    MixedType { name: String },
    #[error("contact degeneracy at {point}: |c3_12| = {value:e}")]
    ContactDegeneracy { point: Point, value: f64 },
    #[error("consistency check `{check}` failed at {point}: residual {residual:e}")]
    Consistency {
        check: &'static str,
        point: Point,
        residual: f64,
    },
    #[error("operation expects stage {expected:?}, got {found:?}")]
    Stage { expected: Stage, found: Stage },
    #[error("no sample points given")]
    NoPoints,
    #[error(transparent)]
    Forms(#[from] FormsError),
}

impl From<DomainError> for ReductionError {
    fn from(e: DomainError) -> Self {
        ReductionError::Forms(FormsError::Domain(e))
    }
}

/// A 2-distribution Δ = span{X1, X2} with the metric induced from R³.
#[derive(Debug, Clone)]
pub struct Distribution {
    pub name: String,
    pub x1: VectorField,
    pub x2: VectorField,
}

impl Distribution {
    pub fn new(name: impl Into<String>, x1: VectorField, x2: VectorField) -> Self {
        Distribution {
            name: name.into(),
            x1,
            x2,
        }
    }

    /// Build from component expressions; errors carry the component index
    /// (0..6, X1 first) alongside the parse error.
    pub fn parse(name: impl Into<String>, x1: [&str; 3], x2: [&str; 3]) -> Result<Self, (usize, ParseError)> {
        let mut comps = Vec::with_capacity(6);
        for (k, s) in x1.iter().chain(x2.iter()).enumerate() {
            comps.push(parse(s).map_err(|e| (k, e))?);
        }
        let c: [ScalarField; 6] = comps.try_into().expect("six components");
        let [a, b, c2, d, e, f] = c;
        Ok(Distribution::new(
            name,
            VectorField::new(a, b, c2),
            VectorField::new(d, e, f),
        ))
    }

    /// Replace the generators by (a X1 + b X2, c X1 + d X2); same plane
    /// field and metric whenever ad − bc ≠ 0.
    pub fn respanned(&self, a: f64, b: f64, c: f64, d: f64) -> Distribution {
        let k = ScalarField::constant;
        Distribution {
            name: format!("{}-respanned", self.name),
            x1: self.x1.scale(&k(a)).add(&self.x2.scale(&k(b))),
            x2: self.x1.scale(&k(c)).add(&self.x2.scale(&k(d))),
        }
    }
}

pub(crate) fn require_points(points: &[Point]) -> Result<(), ReductionError> {
    if points.is_empty() {
        Err(ReductionError::NoPoints)
    } else {
        Ok(())
    }
}
