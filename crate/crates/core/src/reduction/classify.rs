use crate::forms::{commutator, FormsError, VectorField};
use crate::point::Point;
use crate::scalarfield::{ScalarField, Tape};

use super::{require_points, Distribution, ReductionError, HOLONOMIC_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    Holonomic,
    Contact,
    Mixed,
}

impl ClassKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassKind::Holonomic => "holonomic",
            ClassKind::Contact => "contact",
            ClassKind::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointClass {
    Contact,
    Holonomic,
    /// X1, X2 dependent or not evaluable here.
    Degenerate(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointClassification {
    pub point: Point,
    /// det(X1, X2, [X1, X2]), when evaluable.
    pub det3: Option<f64>,
    /// ‖X1‖ ‖X2‖ ‖[X1, X2]‖.
    pub scale: Option<f64>,
    pub class: PointClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub kind: ClassKind,
    pub points: Vec<PointClassification>,
}

impl Classification {
    pub fn holonomic_count(&self) -> usize {
        self.points.iter().filter(|p| p.class == PointClass::Holonomic).count()
    }

    pub fn contact_count(&self) -> usize {
        self.points.iter().filter(|p| p.class == PointClass::Contact).count()
    }
}

/// Decide holonomic vs contact by the position of [X1, X2] relative to Δ.
///
/// Degenerate points are reported but do not vote; if every point is
/// degenerate the input is rejected.
pub fn classify(d: &Distribution, points: &[Point]) -> Result<Classification, ReductionError> {
    require_points(points)?;
    let bracket = commutator(&d.x1, &d.x2);
    let comps = |v: &VectorField| v.0.clone();
    let (a, b, c) = (comps(&d.x1), comps(&d.x2), comps(&bracket));
    let fields: Vec<ScalarField> = a.iter().chain(b.iter()).chain(c.iter()).cloned().collect();
    let tape = Tape::compile(&fields);

    let per_point: Vec<PointClassification> = points
        .iter()
        .map(|&p| match tape.eval(p) {
            Err(e) => PointClassification {
                point: p,
                det3: None,
                scale: None,
                class: PointClass::Degenerate(e.to_string()),
            },
            Ok(v) => classify_values(p, &v),
        })
        .collect();

    let holonomic = per_point.iter().filter(|p| p.class == PointClass::Holonomic).count();
    let contact = per_point.iter().filter(|p| p.class == PointClass::Contact).count();
    let kind = match (holonomic, contact) {
        (0, 0) => {
            return Err(FormsError::DegenerateInput {
                point: points.first().copied(),
                what: format!("X1 and X2 of `{}` are dependent at every sampled point", d.name),
            }
            .into())
        }
        (_, 0) => ClassKind::Holonomic,
        (0, _) => ClassKind::Contact,
        _ => ClassKind::Mixed,
    };
    Ok(Classification {
        kind,
        points: per_point,
    })
}

fn classify_values(p: Point, v: &[f64]) -> PointClassification {
    let a = [v[0], v[1], v[2]];
    let b = [v[3], v[4], v[5]];
    let c = [v[6], v[7], v[8]];
    let norm = |u: [f64; 3]| (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let (na, nb, nc) = (norm(a), norm(b), norm(c));
    if norm(cross) <= 1e-12 * na * nb {
        return PointClassification {
            point: p,
            det3: None,
            scale: None,
            class: PointClass::Degenerate("X1 and X2 are linearly dependent".into()),
        };
    }
    let det = cross[0] * c[0] + cross[1] * c[1] + cross[2] * c[2];
    let scale = na * nb * nc;
    let class = if det.abs() <= HOLONOMIC_EPS * scale {
        PointClass::Holonomic
    } else {
        PointClass::Contact
    };
    PointClassification {
        point: p,
        det3: Some(det),
        scale: Some(scale),
        class,
    }
}
