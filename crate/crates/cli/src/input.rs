//! Input specs: `cartan-contact/1` JSON files or `builtin:<name>`.

use std::path::Path;

use cartan_core::corpus::{self, builtin};
use cartan_core::{Distribution, ParseError, Point, Tolerances};
use serde::Deserialize;
use thiserror::Error;

pub const SCHEMA: &str = "cartan-contact/1";

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: malformed spec at line {line}, column {column}: {message}")]
    Json {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: schema: expected \"{SCHEMA}\", found {found}")]
    Schema { path: String, found: String },
    #[error("{path}: fields.{field}[{index}]: {source}")]
    Expression {
        path: String,
        field: &'static str,
        index: usize,
        source: ParseError,
    },
    #[error("{path}: {field}: {what}")]
    Invalid { path: String, field: String, what: String },
    #[error("unknown builtin `{0}` (see `cartan corpus --corpus-list`)")]
    UnknownBuiltin(String),
    #[error("{flag}: {what}")]
    Flag { flag: &'static str, what: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    schema: Option<String>,
    name: Option<String>,
    fields: RawFields,
    sampling: Option<RawSampling>,
    tol: Option<RawTol>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFields {
    #[serde(rename = "X1")]
    x1: Vec<String>,
    #[serde(rename = "X2")]
    x2: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    points: Option<Vec<[f64; 3]>>,
    grid: Option<RawGrid>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x: Axis,
    y: Axis,
    z: Axis,
}

/// `[lo, hi, n]`
type Axis = (f64, f64, f64);

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTol {
    identity: Option<f64>,
    regression: Option<f64>,
}

/// A validated input: the distribution, where to sample it, and tolerances.
#[derive(Debug, Clone)]
pub struct InputSpec {
    pub distribution: Distribution,
    pub points: Vec<Point>,
    pub tol: Tolerances,
}

pub fn load(arg: &str) -> Result<InputSpec, InputError> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        let b = builtin(name).ok_or_else(|| InputError::UnknownBuiltin(name.to_string()))?;
        return Ok(InputSpec {
            distribution: b.distribution(),
            points: corpus::default_grid(),
            tol: Tolerances::default(),
        });
    }
    let text = std::fs::read_to_string(arg).map_err(|source| InputError::Io {
        path: arg.to_string(),
        source,
    })?;
    let stem = Path::new(arg)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| arg.to_string());
    parse_spec(&text, arg, &stem)
}

pub fn parse_spec(text: &str, path: &str, default_name: &str) -> Result<InputSpec, InputError> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| InputError::Json {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    let invalid = |field: &str, what: String| InputError::Invalid {
        path: path.to_string(),
        field: field.to_string(),
        what,
    };
    match raw.schema.as_deref() {
        Some(SCHEMA) => {}
        Some(other) => {
            return Err(InputError::Schema {
                path: path.to_string(),
                found: format!("\"{other}\""),
            })
        }
        None => {
            return Err(InputError::Schema {
                path: path.to_string(),
                found: "no schema field".into(),
            })
        }
    }
    for (field, comps) in [("fields.X1", &raw.fields.x1), ("fields.X2", &raw.fields.x2)] {
        if comps.len() != 3 {
            return Err(invalid(field, format!("expected 3 expressions, found {}", comps.len())));
        }
    }
    let x1: [&str; 3] = std::array::from_fn(|i| raw.fields.x1[i].as_str());
    let x2: [&str; 3] = std::array::from_fn(|i| raw.fields.x2[i].as_str());
    let name = raw.name.unwrap_or_else(|| default_name.to_string());
    let distribution = Distribution::parse(name, x1, x2).map_err(|(k, source)| InputError::Expression {
        path: path.to_string(),
        field: if k < 3 { "X1" } else { "X2" },
        index: k % 3,
        source,
    })?;

    let points = match raw.sampling {
        None => corpus::default_grid(),
        Some(RawSampling {
            points: Some(_),
            grid: Some(_),
        }) => return Err(invalid("sampling", "give either points or grid, not both".into())),
        Some(RawSampling {
            points: Some(pts),
            grid: None,
        }) => pts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                Point::try_new(c[0], c[1], c[2])
                    .ok_or_else(|| invalid(&format!("sampling.points[{i}]"), "coordinates must be finite".into()))
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(RawSampling {
            points: None,
            grid: Some(g),
        }) => expand_grid([g.x, g.y, g.z]).map_err(|(axis, what)| invalid(&format!("sampling.grid.{axis}"), what))?,
        Some(RawSampling {
            points: None,
            grid: None,
        }) => return Err(invalid("sampling", "expected points or grid".into())),
    };
    if points.is_empty() {
        return Err(invalid("sampling.points", "at least one point is required".into()));
    }

    let mut tol = Tolerances::default();
    if let Some(t) = raw.tol {
        if let Some(v) = t.identity {
            tol.identity = check_tol(v).map_err(|w| invalid("tol.identity", w))?;
        }
        if let Some(v) = t.regression {
            tol.regression = check_tol(v).map_err(|w| invalid("tol.regression", w))?;
        }
    }
    Ok(InputSpec {
        distribution,
        points,
        tol,
    })
}

/// serde_json appends " at line L column C"; the diagnostic reports those separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn check_tol(v: f64) -> Result<f64, String> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be a positive number, got {v}"))
    }
}

/// Row-major in (x, y, z); n evenly spaced values including both ends, n = 1 gives lo.
pub fn expand_grid(axes: [Axis; 3]) -> Result<Vec<Point>, (&'static str, String)> {
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(3);
    for (name, (lo, hi, n)) in ["x", "y", "z"].into_iter().zip(axes) {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err((name, "bounds must be finite".into()));
        }
        if lo > hi {
            return Err((name, format!("lo {lo} exceeds hi {hi}")));
        }
        if n.fract() != 0.0 || !(1.0..=1e6).contains(&n) {
            return Err((name, format!("count must be an integer in 1..=1000000, got {n}")));
        }
        let n = n as usize;
        let axis = if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        values.push(axis);
    }
    let mut pts = Vec::with_capacity(values[0].len() * values[1].len() * values[2].len());
    for &x in &values[0] {
        for &y in &values[1] {
            for &z in &values[2] {
                pts.push(Point::new(x, y, z));
            }
        }
    }
    Ok(pts)
}

fn parse_numbers(flag: &'static str, text: &str, expect: usize) -> Result<Vec<Vec<f64>>, InputError> {
    let bad = |what: String| InputError::Flag { flag, what };
    text.split(';')
        .map(str::trim)
        .filter(|g| !g.is_empty())
        .map(|group| {
            let nums = group
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("`{}` is not a number", t.trim())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if nums.len() != expect {
                return Err(bad(format!("`{group}` has {} values, expected {expect}", nums.len())));
            }
            Ok(nums)
        })
        .collect()
}

/// `--points "x,y,z;x,y,z"`
pub fn parse_points_flag(text: &str) -> Result<Vec<Point>, InputError> {
    let groups = parse_numbers("--points", text, 3)?;
    if groups.is_empty() {
        return Err(InputError::Flag {
            flag: "--points",
            what: "no points given".into(),
        });
    }
    groups
        .into_iter()
        .map(|c| {
            Point::try_new(c[0], c[1], c[2]).ok_or(InputError::Flag {
                flag: "--points",
                what: "coordinates must be finite".into(),
            })
        })
        .collect()
}

/// `--grid "lo,hi,n;lo,hi,n;lo,hi,n"` for x, y, z.
pub fn parse_grid_flag(text: &str) -> Result<Vec<Point>, InputError> {
    let groups = parse_numbers("--grid", text, 3)?;
    if groups.len() != 3 {
        return Err(InputError::Flag {
            flag: "--grid",
            what: format!("expected 3 axes, found {}", groups.len()),
        });
    }
    let axis = |g: &Vec<f64>| (g[0], g[1], g[2]);
    expand_grid([axis(&groups[0]), axis(&groups[1]), axis(&groups[2])]).map_err(|(a, what)| InputError::Flag {
        flag: "--grid",
        what: format!("{a}: {what}"),
    })
}
