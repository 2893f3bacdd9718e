//! Exterior calculus on open subsets of R³ with symbolic coefficients.
//!
//! Vector fields and 1-forms are stored in the coordinate bases
//! (∂x, ∂y, ∂z) and (dx, dy, dz). Two-forms use the cyclic basis
//! (dy∧dz, dz∧dx, dx∧dy), so that the coefficient triple of a 2-form read
//! off a coframe lines up with the (η²∧η³, η³∧η¹, η¹∧η²) ordering used for
//! structure coefficients. Three-forms carry one coefficient of dx∧dy∧dz.

use thiserror::Error;

use crate::point::Point;
use crate::scalarfield::{DomainError, ScalarField, Tape, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormsError {
    #[error("degenerate input{}: {what}", at_point(.point))]
    DegenerateInput { point: Option<Point>, what: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

fn at_point(p: &Option<Point>) -> String {
    p.map(|p| format!(" at {p}")).unwrap_or_default()
}

fn dot3(a: &[ScalarField; 3], b: &[ScalarField; 3]) -> ScalarField {
    &(&a[0] * &b[0]) + &(&a[1] * &b[1]) + &(&a[2] * &b[2])
}

fn cross3(a: &[ScalarField; 3], b: &[ScalarField; 3]) -> [ScalarField; 3] {
    [
        &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
        &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
        &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
    ]
}

/// Determinant of the matrix with the given columns.
pub fn det3(c0: &[ScalarField; 3], c1: &[ScalarField; 3], c2: &[ScalarField; 3]) -> ScalarField {
    dot3(c0, &cross3(c1, c2))
}

fn det3_f64(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[derive(Debug, Clone)]
pub struct VectorField(pub [ScalarField; 3]);

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField, z: ScalarField) -> Self {
        VectorField([x, y, z])
    }

    /// The coordinate field ∂x, ∂y or ∂z.
    pub fn coordinate(v: Var) -> Self {
        let mut c = [ScalarField::zero(), ScalarField::zero(), ScalarField::zero()];
        c[v.index()] = ScalarField::one();
        VectorField(c)
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.0
    }

    pub fn scale(&self, f: &ScalarField) -> Self {
        VectorField(self.0.clone().map(|c| &c * f))
    }

    pub fn add(&self, other: &VectorField) -> Self {
        VectorField([0, 1, 2].map(|i| &self.0[i] + &other.0[i]))
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        VectorField([0, 1, 2].map(|i| &self.0[i] - &other.0[i]))
    }

    /// Ambient Euclidean scalar product.
    pub fn dot(&self, other: &VectorField) -> ScalarField {
        dot3(&self.0, &other.0)
    }

    pub fn norm(&self) -> ScalarField {
        self.dot(self).sqrt()
    }

    /// Directional derivative X(f) = X^s ∂f/∂x^s.
    pub fn apply(&self, f: &ScalarField) -> ScalarField {
        dot3(&self.0, &f.gradient())
    }

    pub fn eval(&self, p: Point) -> Result<[f64; 3], DomainError> {
        let v = Tape::compile(&self.0).eval(p)?;
        Ok([v[0], v[1], v[2]])
    }
}

#[derive(Debug, Clone)]
pub struct OneForm(pub [ScalarField; 3]);

impl OneForm {
    /// The coordinate differential dx, dy or dz.
    pub fn coordinate(v: Var) -> Self {
        OneForm(VectorField::coordinate(v).0)
    }

    pub fn coefficients(&self) -> &[ScalarField; 3] {
        &self.0
    }

    pub fn scale(&self, f: &ScalarField) -> Self {
        OneForm(self.0.clone().map(|c| &c * f))
    }

    pub fn add(&self, other: &OneForm) -> Self {
        OneForm([0, 1, 2].map(|i| &self.0[i] + &other.0[i]))
    }

    pub fn sub(&self, other: &OneForm) -> Self {
        OneForm([0, 1, 2].map(|i| &self.0[i] - &other.0[i]))
    }

    /// Pairing ω(X).
    pub fn apply(&self, x: &VectorField) -> ScalarField {
        dot3(&self.0, &x.0)
    }
}

#[derive(Debug, Clone)]
pub struct TwoForm(pub [ScalarField; 3]);

impl TwoForm {
    pub fn coefficients(&self) -> &[ScalarField; 3] {
        &self.0
    }

    pub fn add(&self, other: &TwoForm) -> Self {
        TwoForm([0, 1, 2].map(|i| &self.0[i] + &other.0[i]))
    }

    pub fn scale(&self, f: &ScalarField) -> Self {
        TwoForm(self.0.clone().map(|c| &c * f))
    }
}

#[derive(Debug, Clone)]
pub struct ThreeForm(pub ScalarField);

impl ThreeForm {
    pub fn coefficient(&self) -> &ScalarField {
        &self.0
    }
}

/// Lie bracket, [X, Y]^i = X^s ∂Y^i/∂x^s − Y^s ∂X^i/∂x^s.
pub fn commutator(x: &VectorField, y: &VectorField) -> VectorField {
    VectorField([0, 1, 2].map(|i| &x.apply(&y.0[i]) - &y.apply(&x.0[i])))
}

/// Orthonormalize (X1, X2) under the ambient metric, preserving their span
/// and orientation. Degeneracy shows up as a division by zero when the
/// result is evaluated.
pub fn gram_schmidt(x1: &VectorField, x2: &VectorField) -> (VectorField, VectorField) {
    let e1 = x1.scale(&(ScalarField::one() / x1.norm()));
    let u = x2.sub(&e1.scale(&x2.dot(&e1)));
    let e2 = u.scale(&(ScalarField::one() / u.norm()));
    (e1, e2)
}

pub fn exterior_derivative(w: &OneForm) -> TwoForm {
    let [f, g, h] = &w.0;
    TwoForm([
        &h.differentiate(Var::Y) - &g.differentiate(Var::Z),
        &f.differentiate(Var::Z) - &h.differentiate(Var::X),
        &g.differentiate(Var::X) - &f.differentiate(Var::Y),
    ])
}

pub fn exterior_derivative2(w: &TwoForm) -> ThreeForm {
    let [a, b, c] = &w.0;
    ThreeForm(&(&a.differentiate(Var::X) + &b.differentiate(Var::Y)) + &c.differentiate(Var::Z))
}

/// Wedge of two 1-forms; in the cyclic basis this is the cross product of
/// coefficient triples.
pub fn wedge(a: &OneForm, b: &OneForm) -> TwoForm {
    TwoForm(cross3(&a.0, &b.0))
}

/// ω ∧ α for a 2-form ω and 1-form α.
pub fn wedge21(w: &TwoForm, a: &OneForm) -> ThreeForm {
    ThreeForm(dot3(&w.0, &a.0))
}

/// ω(X, Y). In the cyclic basis this is ω · (X × Y).
pub fn apply_two_form(w: &TwoForm, x: &VectorField, y: &VectorField) -> ScalarField {
    dot3(&w.0, &cross3(&x.0, &y.0))
}

#[derive(Debug, Clone)]
pub struct Frame {
    pub e1: VectorField,
    pub e2: VectorField,
    pub e3: VectorField,
}

impl Frame {
    pub fn new(e1: VectorField, e2: VectorField, e3: VectorField) -> Self {
        Frame { e1, e2, e3 }
    }

    pub fn coordinate() -> Self {
        Frame::new(
            VectorField::coordinate(Var::X),
            VectorField::coordinate(Var::Y),
            VectorField::coordinate(Var::Z),
        )
    }

    pub fn vectors(&self) -> [&VectorField; 3] {
        [&self.e1, &self.e2, &self.e3]
    }

    /// Determinant of the component matrix whose columns are e1, e2, e3.
    pub fn det(&self) -> ScalarField {
        det3(&self.e1.0, &self.e2.0, &self.e3.0)
    }

    /// Component matrix at `p`, indexed `[component][frame vector]`.
    pub fn matrix_at(&self, p: Point) -> Result<[[f64; 3]; 3], FormsError> {
        self.checker().matrix_at(p)
    }

    /// Determinant at `p`, or `DegenerateInput` when it vanishes relative
    /// to the column norms.
    pub fn check_at(&self, p: Point) -> Result<f64, FormsError> {
        self.checker().check_at(p)
    }

    /// Precompiled pointwise checks, for use over many points.
    pub fn checker(&self) -> FrameChecker {
        FrameChecker {
            tape: Tape::compile(self.vectors().into_iter().flat_map(|v| v.0.iter())),
        }
    }
}

pub struct FrameChecker {
    tape: Tape,
}

impl FrameChecker {
    pub fn matrix_at(&self, p: Point) -> Result<[[f64; 3]; 3], FormsError> {
        let v = self.tape.eval(p)?;
        let mut m = [[0.0; 3]; 3];
        for (j, col) in v.chunks(3).enumerate() {
            for i in 0..3 {
                m[i][j] = col[i];
            }
        }
        Ok(m)
    }

    pub fn check_at(&self, p: Point) -> Result<f64, FormsError> {
        let m = self.matrix_at(p)?;
        let d = det3_f64(&m);
        let scale: f64 = (0..3)
            .map(|j| (0..3).map(|i| m[i][j] * m[i][j]).sum::<f64>().sqrt())
            .product();
        // unit floor: a bracket that vanishes exactly leaves rounding noise
        // in e3, which a purely relative test would accept
        if d.abs() <= 1e-12 * scale.max(1.0) {
            return Err(FormsError::DegenerateInput {
                point: Some(p),
                what: format!("frame determinant {d:e} vanishes"),
            });
        }
        Ok(d)
    }
}

#[derive(Debug, Clone)]
pub struct Coframe {
    pub eta1: OneForm,
    pub eta2: OneForm,
    pub eta3: OneForm,
}

impl Coframe {
    pub fn new(eta1: OneForm, eta2: OneForm, eta3: OneForm) -> Self {
        Coframe { eta1, eta2, eta3 }
    }

    pub fn coordinate() -> Self {
        Coframe::new(
            OneForm::coordinate(Var::X),
            OneForm::coordinate(Var::Y),
            OneForm::coordinate(Var::Z),
        )
    }

    pub fn forms(&self) -> [&OneForm; 3] {
        [&self.eta1, &self.eta2, &self.eta3]
    }

    /// The symbolic 3×3 table η^i(e_j).
    pub fn pairing(&self, frame: &Frame) -> [[ScalarField; 3]; 3] {
        let f = self.forms();
        let e = frame.vectors();
        [0, 1, 2].map(|i| [0, 1, 2].map(|j| f[i].apply(e[j])))
    }

    /// Largest deviation of η^i(e_j) from δ^i_j at `p`.
    pub fn duality_residual(&self, frame: &Frame, p: Point) -> Result<f64, DomainError> {
        let table = self.pairing(frame);
        let vals = Tape::compile(table.iter().flatten()).eval(p)?;
        Ok(vals
            .iter()
            .enumerate()
            .map(|(k, v)| (v - if k / 3 == k % 3 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max))
    }
}

/// Complete an orthonormal pair with e3 = [e1, e2].
///
/// Fails immediately when the bracket folds to the zero field; pointwise
/// degeneracy is reported by [`Frame::check_at`].
pub fn complete_frame(e1: &VectorField, e2: &VectorField) -> Result<Frame, FormsError> {
    let e3 = commutator(e1, e2);
    if e3.0.iter().all(ScalarField::is_zero) {
        return Err(FormsError::DegenerateInput {
            point: None,
            what: "[e1, e2] vanishes identically".into(),
        });
    }
    Ok(Frame::new(e1.clone(), e2.clone(), e3))
}

/// Dual coframe by symbolic adjugate over determinant: the rows of the
/// inverse component matrix are the cross products of pairs of columns.
pub fn dual_coframe(frame: &Frame) -> Coframe {
    let (a, b, c) = (&frame.e1.0, &frame.e2.0, &frame.e3.0);
    let inv_det = ScalarField::one() / frame.det();
    let row = |u: &[ScalarField; 3], v: &[ScalarField; 3]| OneForm(cross3(u, v).map(|k| &k * &inv_det));
    Coframe::new(row(b, c), row(c, a), row(a, b))
}

/// Structure coefficients c^i_ab = dη^i(e_a, e_b), one row per η^i, columns
/// ordered (23, 31, 12) so that dη^i = c^i_23 η²∧η³ + c^i_31 η³∧η¹ + c^i_12 η¹∧η².
pub fn structure_coefficients(coframe: &Coframe, frame: &Frame) -> [[ScalarField; 3]; 3] {
    coframe.forms().map(|eta| structure_row(eta, frame))
}

/// One row of [`structure_coefficients`].
pub fn structure_row(eta: &OneForm, frame: &Frame) -> [ScalarField; 3] {
    let d = exterior_derivative(eta);
    [
        apply_two_form(&d, &frame.e2, &frame.e3),
        apply_two_form(&d, &frame.e3, &frame.e1),
        apply_two_form(&d, &frame.e1, &frame.e2),
    ]
}
