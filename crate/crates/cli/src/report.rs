//! Deterministic rendering: fixed field order, 12 significant digits, positional decimals.

use std::fmt::Write;

use cartan_core::reduction::{Classification, PointClass};
use cartan_core::{Comparison, InvariantReport, Point, Sample};

use crate::input::SCHEMA;

/// 12 significant digits, no exponent, trailing zeros trimmed.
pub fn decimal(v: f64) -> String {
    if !v.is_finite() {
        return "null".into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let point = exp + 1;
    let mut out = if point <= 0 {
        format!("0.{}{digits}", "0".repeat(point.unsigned_abs() as usize))
    } else if point as usize >= digits.len() {
        format!("{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        format!("{}.{}", &digits[..point as usize], &digits[point as usize..])
    };
    if out.contains('.') {
        out.truncate(out.trim_end_matches('0').trim_end_matches('.').len());
    }
    if v < 0.0 {
        out.insert(0, '-');
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "null".into(), decimal)
}

fn table_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), decimal)
}

fn string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn point_json(p: Point) -> String {
    format!("[{}, {}, {}]", decimal(p.x), decimal(p.y), decimal(p.z))
}

fn point_table(p: Point) -> String {
    format!("({}, {}, {})", decimal(p.x), decimal(p.y), decimal(p.z))
}

/// Aggregates over ok records only.
pub struct Summary {
    pub classification: &'static str,
    pub m_min: Option<f64>,
    pub m_max: Option<f64>,
    pub n_ok: usize,
    pub n_singular: usize,
}

impl Summary {
    pub fn of_report(r: &InvariantReport) -> Self {
        let range = r.m_range();
        Summary {
            classification: "contact",
            m_min: range.map(|r| r.0),
            m_max: range.map(|r| r.1),
            n_ok: r.n_ok(),
            n_singular: r.n_singular(),
        }
    }

    pub fn of_rejected(c: &Classification) -> Self {
        Summary {
            classification: c.kind.as_str(),
            m_min: None,
            m_max: None,
            n_ok: 0,
            n_singular: c
                .points
                .iter()
                .filter(|p| matches!(p.class, PointClass::Degenerate(_)))
                .count(),
        }
    }

    fn json(&self) -> String {
        format!(
            "{{\"classification\": {}, \"M_min\": {}, \"M_max\": {}, \"n_ok\": {}, \"n_singular\": {}}}",
            string(self.classification),
            opt(self.m_min),
            opt(self.m_max),
            self.n_ok,
            self.n_singular
        )
    }

    fn table(&self, name: &str) -> String {
        format!(
            "summary name={name} classification={} M_min={} M_max={} n_ok={} n_singular={}",
            self.classification,
            table_opt(self.m_min),
            table_opt(self.m_max),
            self.n_ok,
            self.n_singular
        )
    }
}

/// One output record per sample point.
pub struct Record {
    pub point: Point,
    pub status: &'static str,
    pub det3: Option<f64>,
    pub t312: Option<f64>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub m: Option<f64>,
    pub residuals: Option<(f64, f64)>,
}

impl Record {
    pub fn from_sample(s: &Sample) -> Self {
        Record {
            point: s.point,
            status: s.status.as_str(),
            det3: s.det3,
            t312: s.t312,
            a1: s.a1,
            a2: s.a2,
            m: s.m,
            residuals: s.residuals.map(|r| (r.dd_eta3, r.q1_minus_p2)),
        }
    }

    /// Rejected inputs carry the per-point classification only.
    pub fn from_classification(c: &Classification) -> Vec<Self> {
        c.points
            .iter()
            .map(|p| Record {
                point: p.point,
                status: match p.class {
                    PointClass::Contact => "contact",
                    PointClass::Holonomic => "holonomic",
                    PointClass::Degenerate(_) => "singular",
                },
                det3: p.det3,
                t312: None,
                a1: None,
                a2: None,
                m: None,
                residuals: None,
            })
            .collect()
    }

    fn json(&self) -> String {
        let residuals = match self.residuals {
            Some((dd, q)) => format!("{{\"dd_eta3\": {}, \"q1_minus_p2\": {}}}", decimal(dd), decimal(q)),
            None => "null".into(),
        };
        format!(
            "{{\"point\": {}, \"status\": {}, \"det3\": {}, \"T312\": {}, \"a1\": {}, \"a2\": {}, \"M\": {}, \"residuals\": {residuals}}}",
            point_json(self.point),
            string(self.status),
            opt(self.det3),
            opt(self.t312),
            opt(self.a1),
            opt(self.a2),
            opt(self.m),
        )
    }

    fn table(&self) -> String {
        let (dd, q) = match self.residuals {
            Some((dd, q)) => (decimal(dd), decimal(q)),
            None => ("-".into(), "-".into()),
        };
        format!(
            "point={} status={} det3={} T312={} a1={} a2={} M={} dd_eta3={dd} q1_minus_p2={q}",
            point_table(self.point),
            self.status,
            table_opt(self.det3),
            table_opt(self.t312),
            table_opt(self.a1),
            table_opt(self.a2),
            table_opt(self.m),
        )
    }
}

pub struct Analysis {
    pub name: String,
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl Analysis {
    pub fn from_report(r: &InvariantReport) -> Self {
        Analysis {
            name: r.name.clone(),
            records: r.samples.iter().map(Record::from_sample).collect(),
            summary: Summary::of_report(r),
        }
    }

    pub fn from_rejected(name: &str, c: &Classification) -> Self {
        Analysis {
            name: name.to_string(),
            records: Record::from_classification(c),
            summary: Summary::of_rejected(c),
        }
    }

    pub fn json(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{{");
        let _ = writeln!(out, "  \"schema\": {},", string(SCHEMA));
        let _ = writeln!(out, "  \"name\": {},", string(&self.name));
        let _ = writeln!(out, "  \"records\": [");
        for (i, r) in self.records.iter().enumerate() {
            let sep = if i + 1 < self.records.len() { "," } else { "" };
            let _ = writeln!(out, "    {}{sep}", r.json());
        }
        let _ = writeln!(out, "  ],");
        let _ = writeln!(out, "  \"summary\": {}", self.summary.json());
        let _ = writeln!(out, "}}");
        out
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(out, "{}", r.table());
        }
        let _ = writeln!(out, "{}", self.summary.table(&self.name));
        out
    }
}

pub fn comparison_json(a: (&str, &Summary), b: (&str, &Summary), c: &Comparison) -> String {
    let side = |(name, s): (&str, &Summary)| format!("{{\"name\": {}, \"summary\": {}}}", string(name), s.json());
    format!(
        "{{\n  \"schema\": {},\n  \"a\": {},\n  \"b\": {},\n  \"verdict\": {},\n  \"reason\": {}\n}}\n",
        string(SCHEMA),
        side(a),
        side(b),
        string(&c.verdict.to_string()),
        string(&c.reason)
    )
}

pub fn comparison_table(a: (&str, &Summary), b: (&str, &Summary), c: &Comparison) -> String {
    format!(
        "{}\n{}\nverdict: {} ({})\n",
        a.1.table(a.0),
        b.1.table(b.0),
        c.verdict,
        c.reason
    )
}

/// One corpus row.
pub struct CorpusRow {
    pub name: &'static str,
    pub classification: &'static str,
    /// (min, max) of |T312| over ok points.
    pub t312: Option<(f64, f64)>,
    pub m: Option<(f64, f64)>,
    pub pass: bool,
}

fn t312_text(t: Option<(f64, f64)>) -> String {
    match t {
        None => "-".into(),
        Some((lo, hi)) if hi - lo <= 1e-9 => decimal(lo),
        Some((lo, hi)) => format!("{}..{}", decimal(lo), decimal(hi)),
    }
}

pub fn corpus_table(rows: &[CorpusRow]) -> String {
    let mut out = format!(
        "{:<12} {:<15} {:<8} {:<30} {}\n",
        "name", "classification", "|T312|", "M range", "regression"
    );
    for r in rows {
        let m =
            r.m.map_or_else(|| "-".into(), |(lo, hi)| format!("[{}, {}]", decimal(lo), decimal(hi)));
        let _ = writeln!(
            out,
            "{:<12} {:<15} {:<8} {:<30} {}",
            r.name,
            r.classification,
            t312_text(r.t312),
            m,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    out
}

pub fn corpus_json(rows: &[CorpusRow]) -> String {
    let mut out = format!("{{\n  \"schema\": {},\n  \"corpus\": [\n", string(SCHEMA));
    for (i, r) in rows.iter().enumerate() {
        let pair = |v: Option<(f64, f64)>, i: usize| opt(v.map(|p| if i == 0 { p.0 } else { p.1 }));
        let sep = if i + 1 < rows.len() { "," } else { "" };
        let _ = writeln!(
            out,
            "    {{\"name\": {}, \"classification\": {}, \"T312_abs_min\": {}, \"T312_abs_max\": {}, \"M_min\": {}, \"M_max\": {}, \"regression\": {}}}{sep}",
            string(r.name),
            string(r.classification),
            pair(r.t312, 0),
            pair(r.t312, 1),
            pair(r.m, 0),
            pair(r.m, 1),
            string(if r.pass { "pass" } else { "fail" }),
        );
    }
    out.push_str("  ]\n}\n");
    out
}
