use crate::forms::{
    complete_frame, dual_coframe, exterior_derivative, gram_schmidt, structure_row, wedge, wedge21, Coframe,
    FormsError, Frame, VectorField,
};
use crate::point::Point;
use crate::scalarfield::{ScalarField, Tape};

use super::{Distribution, ReductionError, ADAPTED_TOL, B2_TOL, CONTACT_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    B0,
    B1,
    B2,
}

/// A coframe section together with its dual frame and reduction stage.
#[derive(Debug, Clone)]
pub struct AdaptedCoframe {
    pub coframe: Coframe,
    pub frame: Frame,
    pub stage: Stage,
    /// c³₁₂ of the B0 section this one was normalized from (φ₄), if any.
    pub contact_scale: Option<ScalarField>,
}

/// Row three of the structure coefficients: dη³ = t23 η²∧η³ + t31 η³∧η¹ + t12 η¹∧η².
#[derive(Debug, Clone)]
pub struct TorsionSlice {
    pub t23: ScalarField,
    pub t31: ScalarField,
    pub t12: ScalarField,
}

impl TorsionSlice {
    pub fn fields(&self) -> [&ScalarField; 3] {
        [&self.t23, &self.t31, &self.t12]
    }

    pub fn eval(&self, p: Point) -> Result<[f64; 3], ReductionError> {
        let v = Tape::compile(self.fields()).eval(p)?;
        Ok([v[0], v[1], v[2]])
    }
}

impl AdaptedCoframe {
    /// B0 section from an orthonormal frame (e1, e2) of Δ, completed by
    /// e3 = [e1, e2].
    pub fn from_orthonormal_pair(e1: &VectorField, e2: &VectorField) -> Result<Self, ReductionError> {
        let frame = complete_frame(e1, e2)?;
        let coframe = dual_coframe(&frame);
        Ok(AdaptedCoframe {
            coframe,
            frame,
            stage: Stage::B0,
            contact_scale: None,
        })
    }

    /// B0 section from the generators via Gram–Schmidt.
    pub fn from_distribution(d: &Distribution) -> Result<Self, ReductionError> {
        let (e1, e2) = gram_schmidt(&d.x1, &d.x2);
        Self::from_orthonormal_pair(&e1, &e2).map_err(|e| match e {
            ReductionError::Forms(FormsError::DegenerateInput { .. }) => {
                ReductionError::Holonomic { name: d.name.clone() }
            }
            other => other,
        })
    }

    pub fn torsion(&self) -> TorsionSlice {
        let [t23, t31, t12] = structure_row(&self.coframe.eta3, &self.frame);
        TorsionSlice { t23, t31, t12 }
    }

    /// Act by the G₀ element with rotation block = identity, translations 0
    /// and φ₄ = c³₁₂: η³ ← η³ / c³₁₂, e3 ← c³₁₂ e3.
    pub fn scale_normalized(&self) -> AdaptedCoframe {
        let t12 = self.torsion().t12;
        if t12.as_constant() == Some(1.0) {
            return AdaptedCoframe {
                stage: Stage::B1,
                ..self.clone()
            };
        }
        let inv = ScalarField::one() / &t12;
        AdaptedCoframe {
            coframe: Coframe::new(
                self.coframe.eta1.clone(),
                self.coframe.eta2.clone(),
                self.coframe.eta3.scale(&inv),
            ),
            frame: Frame::new(self.frame.e1.clone(), self.frame.e2.clone(), self.frame.e3.scale(&t12)),
            stage: Stage::B1,
            contact_scale: Some(t12),
        }
    }

    /// Act by the G₁ element with rotation block = identity and
    /// (φ₂, φ₃) = (c³₂₃, c³₃₁): η¹ ← η¹ − c³₂₃ η³, η² ← η² − c³₃₁ η³,
    /// e3 ← e3 + c³₂₃ e1 + c³₃₁ e2.
    pub fn translations_absorbed(&self) -> AdaptedCoframe {
        let TorsionSlice { t23, t31, .. } = self.torsion();
        let eta3 = &self.coframe.eta3;
        AdaptedCoframe {
            coframe: Coframe::new(
                self.coframe.eta1.sub(&eta3.scale(&t23)),
                self.coframe.eta2.sub(&eta3.scale(&t31)),
                eta3.clone(),
            ),
            frame: Frame::new(
                self.frame.e1.clone(),
                self.frame.e2.clone(),
                self.frame
                    .e3
                    .add(&self.frame.e1.scale(&t23))
                    .add(&self.frame.e2.scale(&t31)),
            ),
            stage: Stage::B2,
            contact_scale: self.contact_scale.clone(),
        }
    }

    fn require(&self, stage: Stage) -> Result<(), ReductionError> {
        if self.stage == stage {
            Ok(())
        } else {
            Err(ReductionError::Stage {
                expected: stage,
                found: self.stage,
            })
        }
    }
}

/// Points where the frame is nondegenerate and all of `fields` evaluate.
fn evaluable(frame: &Frame, tape: &Tape, points: &[Point]) -> Vec<(Point, Vec<f64>)> {
    let checker = frame.checker();
    points
        .iter()
        .filter(|&&p| checker.check_at(p).is_ok())
        .filter_map(|&p| tape.eval(p).ok().map(|v| (p, v)))
        .collect()
}

fn fail(check: &'static str, point: Point, residual: f64) -> ReductionError {
    ReductionError::Consistency { check, point, residual }
}

/// Build the B0 adapted coframe and verify the adapted-coframe conditions
/// at `points`: η³ kills Δ, and (η¹, η²) restricted to Δ is a positively
/// oriented orthonormal coframe.
pub fn build_adapted(d: &Distribution, points: &[Point]) -> Result<AdaptedCoframe, ReductionError> {
    let adapted = AdaptedCoframe::from_distribution(d)?;
    if points.is_empty() {
        return Ok(adapted);
    }
    let c = &adapted.coframe;
    let checks: Vec<ScalarField> = [&d.x1, &d.x2]
        .into_iter()
        .flat_map(|x| c.forms().map(|eta| eta.apply(x)))
        .chain([d.x1.dot(&d.x1), d.x1.dot(&d.x2), d.x2.dot(&d.x2)])
        .collect();
    let tape = Tape::compile(&checks);
    let ok = evaluable(&adapted.frame, &tape, points);
    if ok.is_empty() {
        return Err(ReductionError::Holonomic { name: d.name.clone() });
    }
    for (p, v) in ok {
        // v = [η¹(X1), η²(X1), η³(X1), η¹(X2), η²(X2), η³(X2), |X1|², X1·X2, |X2|²]
        let scale = v[6].max(v[8]).max(1.0);
        let gram = [
            (v[0] * v[0] + v[1] * v[1], v[6]),
            (v[0] * v[3] + v[1] * v[4], v[7]),
            (v[3] * v[3] + v[4] * v[4], v[8]),
        ];
        if v[2].abs().max(v[5].abs()) > ADAPTED_TOL * scale.sqrt() {
            return Err(fail("eta3 annihilates the distribution", p, v[2].abs().max(v[5].abs())));
        }
        for (got, want) in gram {
            if (got - want).abs() > ADAPTED_TOL * scale {
                return Err(fail(
                    "eta1, eta2 orthonormal on the distribution",
                    p,
                    (got - want).abs(),
                ));
            }
        }
        if v[0] * v[4] - v[1] * v[3] <= 0.0 {
            return Err(fail(
                "eta1, eta2 positively oriented on the distribution",
                p,
                v[0] * v[4] - v[1] * v[3],
            ));
        }
    }
    Ok(adapted)
}

/// The dη³ structure coefficients, checked against the contact identity
/// dη³ ∧ η³ = c³₁₂ η¹∧η²∧η³ at `points`.
pub fn contact_torsion(a: &AdaptedCoframe, points: &[Point]) -> Result<TorsionSlice, ReductionError> {
    let t = a.torsion();
    let c = &a.coframe;
    let lhs = wedge21(&exterior_derivative(&c.eta3), &c.eta3).0;
    let vol = wedge21(&wedge(&c.eta1, &c.eta2), &c.eta3).0;
    let tape = Tape::compile([&lhs, &vol, &t.t12]);
    for (p, v) in evaluable(&a.frame, &tape, points) {
        let residual = (v[0] - v[2] * v[1]).abs();
        if residual > 1e-8 * (1.0 + v[0].abs()) {
            return Err(fail("d(eta3) ^ eta3 = c3_12 vol", p, residual));
        }
    }
    Ok(t)
}

/// B0 → B1: rescale η³ so that c³₁₂ ≡ 1.
pub fn normalize_scale(a: &AdaptedCoframe, points: &[Point]) -> Result<AdaptedCoframe, ReductionError> {
    a.require(Stage::B0)?;
    let t12 = a.torsion().t12;
    let before = Tape::compile([&t12]);
    for (p, v) in evaluable(&a.frame, &before, points) {
        if v[0].abs() < CONTACT_EPS {
            return Err(ReductionError::ContactDegeneracy {
                point: p,
                value: v[0].abs(),
            });
        }
    }
    let b1 = a.scale_normalized();
    let after = Tape::compile([&b1.torsion().t12]);
    for (p, v) in evaluable(&b1.frame, &after, points) {
        if (v[0] - 1.0).abs() > ADAPTED_TOL {
            return Err(fail("c3_12 = 1 after scale normalization", p, (v[0] - 1.0).abs()));
        }
    }
    Ok(b1)
}

/// B1 → B2: absorb c³₂₃ and c³₃₁ into the translation part of G₁.
pub fn absorb_translations(a: &AdaptedCoframe, points: &[Point]) -> Result<AdaptedCoframe, ReductionError> {
    a.require(Stage::B1)?;
    let b2 = a.translations_absorbed();
    let t = b2.torsion();
    let tape = Tape::compile(t.fields());
    for (p, v) in evaluable(&b2.frame, &tape, points) {
        let residual = v[0].abs().max(v[1].abs()).max((v[2] - 1.0).abs());
        if residual > B2_TOL {
            return Err(fail("d(eta3) = eta1 ^ eta2 after translation absorption", p, residual));
        }
    }
    Ok(b2)
}
