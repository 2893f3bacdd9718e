use rayon::prelude::*;

use crate::forms::{exterior_derivative, exterior_derivative2, structure_coefficients};
use crate::point::Point;
use crate::scalarfield::{ScalarField, Tape};

use super::classify::{classify, ClassKind, PointClass};
use super::stages::{AdaptedCoframe, Stage};
use super::{require_points, Distribution, ReductionError, CONSISTENCY_LIMIT, CONTACT_EPS};

#[derive(Debug, Clone, PartialEq)]
pub enum SampleStatus {
    Ok,
    /// A stage hit a domain error, a degenerate frame or a contact
    /// degeneracy here; the reason is kept for reporting.
    Singular(String),
    Holonomic,
}

impl SampleStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SampleStatus::Ok => "ok",
            SampleStatus::Singular(_) => "singular",
            SampleStatus::Holonomic => "holonomic",
        }
    }
}

/// Pointwise diagnostics of identities that hold exactly in exact arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// d(dη³) at stage B2.
    pub dd_eta3: f64,
    /// Q₁ − P₂, forced to zero by d(dη³) = 0.
    pub q1_minus_p2: f64,
    /// max_i |d(dη^i)| at stage B2.
    pub dd_eta_max: f64,
    /// max_ij |η^i(e_j) − δ^i_j| at stage B2.
    pub duality: f64,
    /// max(|c³₂₃|, |c³₃₁|, |c³₁₂ − 1|) at stage B2.
    pub b2_normal_form: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub point: Point,
    pub status: SampleStatus,
    /// det(X1, X2, [X1, X2]); only known when sampled through [`reduce`].
    pub det3: Option<f64>,
    /// c³₁₂ of the B0 adapted coframe.
    pub t312: Option<f64>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub m: Option<f64>,
    pub residuals: Option<Residuals>,
}

impl Sample {
    fn empty(point: Point, status: SampleStatus, det3: Option<f64>) -> Self {
        Sample {
            point,
            status,
            det3,
            t312: None,
            a1: None,
            a2: None,
            m: None,
            residuals: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == SampleStatus::Ok
    }
}

/// Outcome of the reduction: symbolic invariants and their samples.
#[derive(Debug, Clone)]
pub struct InvariantReport {
    pub name: String,
    pub a1: ScalarField,
    pub a2: ScalarField,
    pub m: ScalarField,
    /// (A₁, A₂, A₃) with α = A₁η¹ + A₂η² + A₃η³.
    pub connection: [ScalarField; 3],
    /// Structure coefficients of the B2 section, rows η^i, columns (23, 31, 12).
    pub structure: [[ScalarField; 3]; 3],
    /// The B2 section the invariants were read from.
    pub adapted: AdaptedCoframe,
    /// One record per input point, in input order.
    pub samples: Vec<Sample>,
}

impl InvariantReport {
    pub fn ok_samples(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.is_ok())
    }

    pub fn n_ok(&self) -> usize {
        self.ok_samples().count()
    }

    pub fn n_singular(&self) -> usize {
        self.samples.len() - self.n_ok()
    }

    /// (min, max) of M over ok samples.
    pub fn m_range(&self) -> Option<(f64, f64)> {
        self.ok_samples().filter_map(|s| s.m).fold(None, |acc, m| match acc {
            None => Some((m, m)),
            Some((lo, hi)) => Some((lo.min(m), hi.max(m))),
        })
    }
}

struct Symbolic {
    a1: ScalarField,
    a2: ScalarField,
    m: ScalarField,
    connection: [ScalarField; 3],
    structure: [[ScalarField; 3]; 3],
    tape: Tape,
}

// tape output layout
const T312: usize = 0;
const A1: usize = 1;
const A2: usize = 2;
const M: usize = 3;
const Q1_P2: usize = 4;
const DD: usize = 5; // 3 entries
const PAIRING: usize = 8; // 9 entries
const TORSION3: usize = 17; // 3 entries

fn symbolic(b2: &AdaptedCoframe) -> Symbolic {
    let c = structure_coefficients(&b2.coframe, &b2.frame);
    let [[p1, q1, r1], [p2, q2, r2], row3] = c.clone();
    // α = A₁η¹ + A₂η² + A₃η³ chosen so that T¹₁₂ = T²₁₂ = 0 and T¹₂₃ = −T²₃₁
    let a3 = (&p1 + &q2).scale(-0.5);
    let a1 = (&p1 - &q2).scale(0.5);
    let a2 = q1.clone();
    let m = &a1.powi(2) + &a2.powi(2);
    let t312 = b2.contact_scale.clone().unwrap_or_else(|| row3[2].clone());
    let dd = b2
        .coframe
        .forms()
        .map(|eta| exterior_derivative2(&exterior_derivative(eta)).0);
    let pairing = b2.coframe.pairing(&b2.frame);

    let mut outputs = vec![t312, a1.clone(), a2.clone(), m.clone(), &q1 - &p2];
    outputs.extend(dd);
    outputs.extend(pairing.into_iter().flatten());
    outputs.extend(row3);
    debug_assert_eq!(outputs.len(), TORSION3 + 3);

    Symbolic {
        a1,
        a2,
        m,
        connection: [r1, r2, a3],
        structure: c,
        tape: Tape::compile(&outputs),
    }
}

fn sample_point(sym: &Symbolic, checker: &crate::forms::FrameChecker, p: Point, det3: Option<f64>) -> Sample {
    if let Err(e) = checker.check_at(p) {
        return Sample::empty(p, SampleStatus::Singular(e.to_string()), det3);
    }
    let v = match sym.tape.eval(p) {
        Ok(v) => v,
        Err(e) => return Sample::empty(p, SampleStatus::Singular(e.to_string()), det3),
    };
    if v[T312].abs() < CONTACT_EPS {
        return Sample::empty(
            p,
            SampleStatus::Singular(format!("contact degeneracy: |c3_12| = {:e}", v[T312].abs())),
            det3,
        );
    }
    let duality = (0..9)
        .map(|k| (v[PAIRING + k] - if k / 3 == k % 3 { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    let residuals = Residuals {
        dd_eta3: v[DD + 2],
        q1_minus_p2: v[Q1_P2],
        dd_eta_max: v[DD..DD + 3].iter().map(|r| r.abs()).fold(0.0, f64::max),
        duality,
        b2_normal_form: v[TORSION3]
            .abs()
            .max(v[TORSION3 + 1].abs())
            .max((v[TORSION3 + 2] - 1.0).abs()),
    };
    Sample {
        point: p,
        status: SampleStatus::Ok,
        det3,
        t312: Some(v[T312]),
        a1: Some(v[A1]),
        a2: Some(v[A2]),
        m: Some(v[M]),
        residuals: Some(residuals),
    }
}

fn assemble(
    name: &str,
    b2: AdaptedCoframe,
    sym: Symbolic,
    samples: Vec<Sample>,
) -> Result<InvariantReport, ReductionError> {
    for s in samples.iter().filter(|s| s.is_ok()) {
        let r = s.residuals.expect("ok samples carry residuals");
        if r.q1_minus_p2.abs() > CONSISTENCY_LIMIT {
            return Err(ReductionError::Consistency {
                check: "Q1 = P2 from d(d eta3) = 0",
                point: s.point,
                residual: r.q1_minus_p2,
            });
        }
    }
    Ok(InvariantReport {
        name: name.to_string(),
        a1: sym.a1,
        a2: sym.a2,
        m: sym.m,
        connection: sym.connection,
        structure: sym.structure,
        adapted: b2,
        samples,
    })
}

/// Absorb the pseudoconnection on a B2 section and sample the resulting
/// invariants at `points`.
pub fn extract_invariants(a: &AdaptedCoframe, points: &[Point]) -> Result<InvariantReport, ReductionError> {
    if a.stage != Stage::B2 {
        return Err(ReductionError::Stage {
            expected: Stage::B2,
            found: a.stage,
        });
    }
    let sym = symbolic(a);
    let checker = a.frame.checker();
    let samples: Vec<Sample> = points
        .par_iter()
        .map(|&p| sample_point(&sym, &checker, p, None))
        .collect();
    for s in samples.iter().filter(|s| s.is_ok()) {
        let r = s.residuals.expect("ok samples carry residuals");
        if r.b2_normal_form > super::B2_TOL {
            return Err(ReductionError::Consistency {
                check: "d(eta3) = eta1 ^ eta2 on the input section",
                point: s.point,
                residual: r.b2_normal_form,
            });
        }
    }
    assemble("", a.clone(), sym, samples)
}

/// Full pipeline: classify, adapt, normalize, absorb, extract.
pub fn reduce(d: &Distribution, points: &[Point]) -> Result<InvariantReport, ReductionError> {
    require_points(points)?;
    let class = classify(d, points)?;
    match class.kind {
        ClassKind::Holonomic => return Err(ReductionError::Holonomic { name: d.name.clone() }),
        ClassKind::Mixed => return Err(ReductionError::MixedType { name: d.name.clone() }),
        ClassKind::Contact => {}
    }
    let b2 = AdaptedCoframe::from_distribution(d)?
        .scale_normalized()
        .translations_absorbed();
    let sym = symbolic(&b2);
    let checker = b2.frame.checker();
    let samples: Vec<Sample> = class
        .points
        .par_iter()
        .map(|pc| match &pc.class {
            PointClass::Degenerate(why) => Sample::empty(pc.point, SampleStatus::Singular(why.clone()), pc.det3),
            PointClass::Holonomic => Sample::empty(pc.point, SampleStatus::Holonomic, pc.det3),
            PointClass::Contact => sample_point(&sym, &checker, pc.point, pc.det3),
        })
        .collect();
    assemble(&d.name, b2, sym, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::forms::{exterior_derivative, wedge, OneForm, TwoForm};

    fn pts() -> Vec<Point> {
        vec![
            Point::new(1.0, 0.0, 0.3),
            Point::new(-0.4, 0.7, 2.0),
            Point::new(0.25, -0.9, -1.0),
            Point::new(0.6, 0.6, 0.0),
        ]
    }

    fn max_diff(a: &TwoForm, b: &TwoForm, p: Point) -> f64 {
        let va = Tape::compile(&a.0).eval(p).unwrap();
        let vb = Tape::compile(&b.0).eval(p).unwrap();
        va.iter().zip(&vb).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
    }

    /// Rebuild dη¹, dη², dη³ from α and (a₁, a₂) in the coordinate basis and
    /// compare with the exterior derivatives of the B2 section.
    #[test]
    fn final_structure_equations_reconstruct_the_derivatives() {
        for d in [corpus::heisenberg(), corpus::cartan()] {
            let r = reduce(&d, &pts()).unwrap();
            let c = &r.adapted.coframe;
            let [a1c, a2c, a3c] = &r.connection;
            let alpha: OneForm = c.eta1.scale(a1c).add(&c.eta2.scale(a2c)).add(&c.eta3.scale(a3c));
            let e23 = wedge(&c.eta2, &c.eta3);
            let e31 = wedge(&c.eta3, &c.eta1);
            let d1 = wedge(&alpha, &c.eta2).add(&e23.scale(&r.a1)).add(&e31.scale(&r.a2));
            let d2 = wedge(&alpha, &c.eta1)
                .scale(&ScalarField::constant(-1.0))
                .add(&e23.scale(&r.a2))
                .add(&e31.scale(&r.a1.neg()));
            let d3 = wedge(&c.eta1, &c.eta2);
            for p in pts() {
                assert!(
                    max_diff(&d1, &exterior_derivative(&c.eta1), p) < 1e-9,
                    "{} dη¹ at {p}",
                    d.name
                );
                assert!(
                    max_diff(&d2, &exterior_derivative(&c.eta2), p) < 1e-9,
                    "{} dη² at {p}",
                    d.name
                );
                assert!(
                    max_diff(&d3, &exterior_derivative(&c.eta3), p) < 1e-9,
                    "{} dη³ at {p}",
                    d.name
                );
            }
        }
    }

    #[test]
    fn closed_form_spot_values() {
        let h = reduce(
            &corpus::heisenberg(),
            &[Point::new(1.0, 0.0, 0.3), Point::new(0.0, 0.0, -7.0)],
        )
        .unwrap();
        assert!((h.samples[0].m.unwrap() - 0.140625).abs() < 1e-6);
        assert!(h.samples[1].m.unwrap().abs() < 1e-9);
        let c = reduce(&corpus::cartan(), &[Point::new(0.2, 0.0, -1.0)]).unwrap();
        assert!((c.samples[0].m.unwrap() - 0.25).abs() < 1e-6);
    }

    #[test]
    fn m_is_the_sum_of_squares() {
        let r = reduce(&corpus::heisenberg(), &corpus::default_grid()).unwrap();
        for s in r.ok_samples() {
            let (a1, a2, m) = (s.a1.unwrap(), s.a2.unwrap(), s.m.unwrap());
            assert!(m >= 0.0);
            assert!((m - (a1 * a1 + a2 * a2)).abs() < 1e-12);
        }
    }

    #[test]
    fn holonomic_and_empty_inputs_are_rejected() {
        assert!(matches!(
            reduce(&corpus::exercise1a(), &corpus::default_grid()),
            Err(ReductionError::Holonomic { .. })
        ));
        assert!(matches!(
            reduce(&corpus::heisenberg(), &[]),
            Err(ReductionError::NoPoints)
        ));
    }

    #[test]
    fn mixed_type_is_rejected() {
        // Martinet-type: [X1, X2] = x ∂z leaves the plane only off x = 0
        let d = Distribution::parse("martinet", ["1", "0", "0"], ["0", "1", "x^2/2"]).unwrap();
        let pts = [Point::new(0.0, 0.1, 0.0), Point::new(0.5, 0.1, 0.0)];
        assert!(matches!(reduce(&d, &pts), Err(ReductionError::MixedType { .. })));
    }

    #[test]
    fn singular_points_are_flagged_not_fatal() {
        // X1 vanishes at x = 0, so Gram–Schmidt is undefined there
        let d = Distribution::parse("pinched", ["x", "0", "-x*y"], ["0", "1", "x"]).unwrap();
        let pts = [Point::new(0.0, 0.5, 0.0), Point::new(0.5, 0.5, 0.0)];
        let r = reduce(&d, &pts).unwrap();
        assert!(matches!(r.samples[0].status, SampleStatus::Singular(_)));
        assert!(r.samples[1].is_ok());
        assert_eq!(r.n_singular(), 1);
    }

    #[test]
    fn extract_requires_a_b2_section() {
        let b0 = AdaptedCoframe::from_distribution(&corpus::cartan()).unwrap();
        assert!(matches!(
            extract_invariants(&b0, &pts()),
            Err(ReductionError::Stage { .. })
        ));
        let b2 = b0.scale_normalized().translations_absorbed();
        let r = extract_invariants(&b2, &pts()).unwrap();
        let full = reduce(&corpus::cartan(), &pts()).unwrap();
        for (a, b) in r.samples.iter().zip(&full.samples) {
            assert!((a.m.unwrap() - b.m.unwrap()).abs() < 1e-15);
        }
    }
}
