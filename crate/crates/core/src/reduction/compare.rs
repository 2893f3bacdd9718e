//! Screening two distributions by the sampled values of M.
//!
//! This is a necessary-side test only. A "distinguished" verdict means the
//! sampled invariant behaves differently; "not distinguished" is never a
//! proof of equivalence.

use std::fmt;

use crate::point::Point;

use super::invariants::{reduce, InvariantReport};
use super::{Distribution, ReductionError, Tolerances};

/// Sampled range of M over ok points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MRange {
    pub min: f64,
    pub max: f64,
    pub n_ok: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Distinguished,
    NotDistinguished,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Distinguished => "distinguished",
            Verdict::NotDistinguished => "not distinguished by this test",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub a: Option<MRange>,
    pub b: Option<MRange>,
    pub verdict: Verdict,
    pub reason: String,
}

fn range(r: &InvariantReport) -> Option<MRange> {
    r.m_range().map(|(min, max)| MRange {
        min,
        max,
        n_ok: r.n_ok(),
    })
}

/// Zero-within-1e-9 on the whole sample set.
const ZERO_EPS: f64 = 1e-9;

pub fn compare_reports(ra: &InvariantReport, rb: &InvariantReport, tol: &Tolerances) -> Comparison {
    let (a, b) = (range(ra), range(rb));
    let (verdict, reason) = match (a, b) {
        (Some(a), Some(b)) => verdict_for(&a, &b, tol),
        _ => (
            Verdict::NotDistinguished,
            "no ok samples on at least one side".to_string(),
        ),
    };
    Comparison { a, b, verdict, reason }
}

fn verdict_for(a: &MRange, b: &MRange, tol: &Tolerances) -> (Verdict, String) {
    let zero = |r: &MRange| r.min.abs().max(r.max.abs()) <= ZERO_EPS;
    if zero(a) != zero(b) {
        return (
            Verdict::Distinguished,
            "M vanishes identically on one sample set only".into(),
        );
    }
    if a.max < b.min || b.max < a.min {
        return (Verdict::Distinguished, "sampled M ranges are disjoint".into());
    }
    let differ = |u: f64, v: f64| !tol.regression_ok(u, v) && !tol.regression_ok(v, u);
    if differ(a.min, b.min) || differ(a.max, b.max) {
        return (Verdict::Distinguished, "sampled M ranges differ".into());
    }
    (Verdict::NotDistinguished, "sampled M ranges agree".into())
}

/// Reduce both distributions on the same points and compare the ranges of M.
pub fn compare(
    d1: &Distribution,
    d2: &Distribution,
    points: &[Point],
    tol: &Tolerances,
) -> Result<(InvariantReport, InvariantReport, Comparison), ReductionError> {
    let ra = reduce(d1, points)?;
    let rb = reduce(d2, points)?;
    let c = compare_reports(&ra, &rb, tol);
    Ok((ra, rb, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(min: f64, max: f64) -> MRange {
        MRange { min, max, n_ok: 5 }
    }

    #[test]
    fn verdict_rules() {
        let tol = Tolerances::default();
        assert_eq!(verdict_for(&r(0.0, 0.0), &r(0.0, 0.1), &tol).0, Verdict::Distinguished);
        assert_eq!(verdict_for(&r(0.0, 0.1), &r(0.2, 0.3), &tol).0, Verdict::Distinguished);
        assert_eq!(
            verdict_for(&r(0.0, 0.11), &r(0.015, 0.25), &tol).0,
            Verdict::Distinguished
        );
        assert_eq!(
            verdict_for(&r(0.0, 0.11), &r(0.0, 0.11 * (1.0 + 1e-9)), &tol).0,
            Verdict::NotDistinguished
        );
        assert_eq!(
            verdict_for(&r(0.0, 0.0), &r(0.0, 1e-12), &tol).0,
            Verdict::NotDistinguished
        );
    }
}
