//! Symbolic real-valued functions of the coordinates (x, y, z).
//!
//! A [`ScalarField`] is an immutable expression DAG over numeric literals,
//! the three coordinates, `+ - * /`, integer powers, unary negation and the
//! functions `sqrt`, `sin`, `cos`, `exp`. Subexpressions are shared through
//! reference counting, and each node memoizes its own partial derivatives, so
//! repeated differentiation of derived quantities stays linear in the size
//! of the DAG instead of expanding into a tree.
//!
//! Simplification is deliberately shallow: constant folding and removal of
//! neutral elements (`x + 0`, `x * 1`, `x * 0`). Two fields are "equal" when
//! they evaluate equal; there is no canonical form.

mod parse;
mod print;
mod tape;

use std::fmt;
use std::ops;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::point::Point;

pub use parse::{parse, ParseError};
pub use tape::Tape;

/// One of the three coordinate functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::X, Var::Y, Var::Z];

    pub fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
        }
    }

    /// Accepts `x`/`y`/`z` and the aliases `x1`/`x2`/`x3`.
    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "x" | "x1" => Some(Var::X),
            "y" | "x2" => Some(Var::Y),
            "z" | "x3" => Some(Var::Z),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sqrt" => Some(Func::Sqrt),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }
}

#[derive(Debug)]
pub(crate) enum Expr {
    Const(f64),
    Var(Var),
    Neg(ScalarField),
    Add(ScalarField, ScalarField),
    Sub(ScalarField, ScalarField),
    Mul(ScalarField, ScalarField),
    Div(ScalarField, ScalarField),
    Pow(ScalarField, i32),
    Call(Func, ScalarField),
}

#[derive(Debug)]
pub(crate) struct Node {
    pub(crate) expr: Expr,
    derivs: [OnceLock<ScalarField>; 3],
}

/// An immutable symbolic function of (x, y, z). Cloning is cheap.
#[derive(Clone)]
pub struct ScalarField(pub(crate) Arc<Node>);

/// Failure to evaluate a field at a point.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at {point} in `{expr}`")]
pub struct DomainError {
    pub point: Point,
    pub kind: DomainErrorKind,
    /// Printed form of the offending sub-expression, truncated when long.
    pub expr: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainErrorKind {
    DivisionByZero,
    SqrtOfNegative,
    NonFinite,
}

impl fmt::Display for DomainErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainErrorKind::DivisionByZero => "division by zero",
            DomainErrorKind::SqrtOfNegative => "square root of a negative number",
            DomainErrorKind::NonFinite => "non-finite value",
        })
    }
}

impl ScalarField {
    fn from_expr(expr: Expr) -> Self {
        ScalarField(Arc::new(Node {
            expr,
            derivs: Default::default(),
        }))
    }

    pub(crate) fn expr(&self) -> &Expr {
        &self.0.expr
    }

    pub fn constant(c: f64) -> Self {
        assert!(c.is_finite(), "constant fields must be finite");
        Self::from_expr(Expr::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(v: Var) -> Self {
        Self::from_expr(Expr::Var(v))
    }

    pub fn x() -> Self {
        Self::var(Var::X)
    }

    pub fn y() -> Self {
        Self::var(Var::Y)
    }

    pub fn z() -> Self {
        Self::var(Var::Z)
    }

    /// The literal value if this field is a folded constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self.0.expr {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// True only for a folded literal zero; a field that merely evaluates to
    /// zero everywhere is not detected.
    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    pub fn ptr_eq(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn neg(&self) -> Self {
        match self.expr() {
            Expr::Const(c) => Self::constant(-c),
            Expr::Neg(inner) => inner.clone(),
            _ => Self::from_expr(Expr::Neg(self.clone())),
        }
    }

    pub fn add(&self, rhs: &ScalarField) -> Self {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => fold(a + b).unwrap_or_else(|| Self::from_expr(Expr::Add(self.clone(), rhs.clone()))),
            (Some(0.0), _) => rhs.clone(),
            (_, Some(0.0)) => self.clone(),
            _ => Self::from_expr(Expr::Add(self.clone(), rhs.clone())),
        }
    }

    pub fn sub(&self, rhs: &ScalarField) -> Self {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => fold(a - b).unwrap_or_else(|| Self::from_expr(Expr::Sub(self.clone(), rhs.clone()))),
            (Some(0.0), _) => rhs.neg(),
            (_, Some(0.0)) => self.clone(),
            _ => Self::from_expr(Expr::Sub(self.clone(), rhs.clone())),
        }
    }

    pub fn mul(&self, rhs: &ScalarField) -> Self {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => fold(a * b).unwrap_or_else(|| Self::from_expr(Expr::Mul(self.clone(), rhs.clone()))),
            (Some(0.0), _) => Self::zero(),
            (_, Some(0.0)) => Self::zero(),
            (Some(1.0), _) => rhs.clone(),
            (_, Some(1.0)) => self.clone(),
            (Some(-1.0), _) => rhs.neg(),
            (_, Some(-1.0)) => self.neg(),
            _ => Self::from_expr(Expr::Mul(self.clone(), rhs.clone())),
        }
    }

    pub fn div(&self, rhs: &ScalarField) -> Self {
        match (self.as_constant(), rhs.as_constant()) {
            // a literal zero denominator is kept so evaluation reports it
            (_, Some(0.0)) => Self::from_expr(Expr::Div(self.clone(), rhs.clone())),
            (Some(a), Some(b)) => fold(a / b).unwrap_or_else(|| Self::from_expr(Expr::Div(self.clone(), rhs.clone()))),
            (Some(0.0), _) => Self::zero(),
            (_, Some(1.0)) => self.clone(),
            (_, Some(-1.0)) => self.neg(),
            _ => Self::from_expr(Expr::Div(self.clone(), rhs.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Self {
        match (self.as_constant(), n) {
            (_, 0) => Self::one(),
            (_, 1) => self.clone(),
            (Some(c), _) if c != 0.0 || n > 0 => {
                fold(c.powi(n)).unwrap_or_else(|| Self::from_expr(Expr::Pow(self.clone(), n)))
            }
            _ => Self::from_expr(Expr::Pow(self.clone(), n)),
        }
    }

    pub fn call(f: Func, arg: &ScalarField) -> Self {
        if let Some(c) = arg.as_constant() {
            let v = match f {
                Func::Sqrt if c >= 0.0 => Some(c.sqrt()),
                Func::Sqrt => None,
                Func::Sin => Some(c.sin()),
                Func::Cos => Some(c.cos()),
                Func::Exp => Some(c.exp()),
            };
            if let Some(folded) = v.and_then(fold) {
                return folded;
            }
        }
        Self::from_expr(Expr::Call(f, arg.clone()))
    }

    pub fn sqrt(&self) -> Self {
        Self::call(Func::Sqrt, self)
    }

    pub fn sin(&self) -> Self {
        Self::call(Func::Sin, self)
    }

    pub fn cos(&self) -> Self {
        Self::call(Func::Cos, self)
    }

    pub fn exp(&self) -> Self {
        Self::call(Func::Exp, self)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.mul(&Self::constant(c))
    }

    /// Exact symbolic partial derivative with respect to `var`.
    ///
    /// The result is memoized on the node, so differentiating a shared
    /// subexpression twice returns the same shared node.
    pub fn differentiate(&self, var: Var) -> ScalarField {
        self.0.derivs[var.index()]
            .get_or_init(|| self.derive_uncached(var))
            .clone()
    }

    fn derive_uncached(&self, var: Var) -> ScalarField {
        match self.expr() {
            Expr::Const(_) => Self::zero(),
            Expr::Var(v) => {
                if *v == var {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Expr::Neg(a) => a.differentiate(var).neg(),
            Expr::Add(a, b) => a.differentiate(var).add(&b.differentiate(var)),
            Expr::Sub(a, b) => a.differentiate(var).sub(&b.differentiate(var)),
            Expr::Mul(a, b) => {
                let da = a.differentiate(var);
                let db = b.differentiate(var);
                da.mul(b).add(&a.mul(&db))
            }
            Expr::Div(a, b) => {
                // (a/b)' = a'/b - (a/b) b'/b
                let da = a.differentiate(var);
                let db = b.differentiate(var);
                da.div(b).sub(&self.mul(&db).div(b))
            }
            Expr::Pow(a, n) => {
                let da = a.differentiate(var);
                if da.is_zero() {
                    return Self::zero();
                }
                Self::constant(f64::from(*n)).mul(&a.powi(n - 1)).mul(&da)
            }
            Expr::Call(f, a) => {
                let da = a.differentiate(var);
                if da.is_zero() {
                    return Self::zero();
                }
                let outer = match f {
                    Func::Sqrt => return da.div(&self.scale(2.0)),
                    Func::Sin => a.cos(),
                    Func::Cos => a.sin().neg(),
                    Func::Exp => self.clone(),
                };
                outer.mul(&da)
            }
        }
    }

    pub fn gradient(&self) -> [ScalarField; 3] {
        Var::ALL.map(|v| self.differentiate(v))
    }

    /// Evaluate at one point. For many fields or many points, compile a
    /// [`Tape`] once instead.
    pub fn evaluate(&self, p: Point) -> Result<f64, DomainError> {
        Tape::compile([self]).eval(p).map(|v| v[0])
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        Tape::compile([self]).len()
    }
}

fn fold(v: f64) -> Option<ScalarField> {
    v.is_finite().then(|| ScalarField::constant(v))
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", print::to_string_truncated(self, 200))
    }
}

impl From<f64> for ScalarField {
    fn from(c: f64) -> Self {
        ScalarField::constant(c)
    }
}

impl From<Var> for ScalarField {
    fn from(v: Var) -> Self {
        ScalarField::var(v)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl ops::$trait<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                ScalarField::$method(self, rhs)
            }
        }
        impl ops::$trait<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                ScalarField::$method(&self, &rhs)
            }
        }
        impl ops::$trait<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                ScalarField::$method(&self, rhs)
            }
        }
        impl ops::$trait<ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                ScalarField::$method(self, &rhs)
            }
        }
        impl ops::$trait<f64> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: f64) -> ScalarField {
                ScalarField::$method(self, &ScalarField::constant(rhs))
            }
        }
        impl ops::$trait<f64> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: f64) -> ScalarField {
                ScalarField::$method(&self, &ScalarField::constant(rhs))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl ops::Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        ScalarField::neg(self)
    }
}

impl ops::Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        ScalarField::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> Point {
        Point::new(x, y, z)
    }

    fn ev(s: &str, at: Point) -> f64 {
        parse(s).unwrap().evaluate(at).unwrap()
    }

    #[test]
    fn literal_readings() {
        assert_eq!(ev("-y", p(0.0, 1.0, 0.0)), -1.0);
        assert_eq!(ev("sqrt(1+y^2)", p(0.0, 1.0, 0.0)), 2f64.sqrt());
        assert_eq!(ev("2+3*x^2+3*y^2", p(1.0, 1.0, 0.0)), 8.0);
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(ev("1/sqrt(1+y^2)", Point::origin()), 1.0);
        let v = ev("y/(2*sqrt(1+y^2))", p(0.0, 1.0, 0.0));
        assert!((v - 0.353_553_390_593_273_7).abs() < 1e-15);
    }

    #[test]
    fn division_by_zero_reports_point_and_subexpression() {
        let err = parse("x/y").unwrap().evaluate(p(1.0, 0.0, 0.0)).unwrap_err();
        assert_eq!(err.kind, DomainErrorKind::DivisionByZero);
        assert_eq!(err.point, p(1.0, 0.0, 0.0));
        assert_eq!(err.expr, "x/y");
    }

    #[test]
    fn sqrt_of_negative() {
        let err = parse("1+sqrt(x)").unwrap().evaluate(p(-1.0, 0.0, 0.0)).unwrap_err();
        assert_eq!(err.kind, DomainErrorKind::SqrtOfNegative);
        assert_eq!(err.expr, "sqrt(x)");
    }

    #[test]
    fn negative_power_of_zero_is_division_by_zero() {
        let err = parse("x^-2").unwrap().evaluate(Point::origin()).unwrap_err();
        assert_eq!(err.kind, DomainErrorKind::DivisionByZero);
    }

    #[test]
    fn derivative_of_product() {
        let d = parse("x*y").unwrap().differentiate(Var::X);
        for q in [
            p(0.3, -0.7, 1.0),
            p(1.0, 2.0, 3.0),
            p(-0.5, 0.25, 0.0),
            p(4.0, -1.5, 2.0),
            p(0.0, 9.0, -1.0),
        ] {
            assert_eq!(d.evaluate(q).unwrap(), q.y);
        }
    }

    #[test]
    fn derivative_chain_rule_sqrt() {
        let d = parse("sqrt(1+y^2)").unwrap().differentiate(Var::Y);
        let v = d.evaluate(p(0.0, 1.0, 0.0)).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_negated_coordinate_is_constant() {
        let d = parse("-y").unwrap().differentiate(Var::Y);
        assert_eq!(d.as_constant(), Some(-1.0));
    }

    #[test]
    fn derivatives_are_memoized_on_shared_nodes() {
        let f = parse("sin(x*y)/(1+z^2)").unwrap();
        let a = f.differentiate(Var::X);
        let b = f.differentiate(Var::X);
        assert!(a.ptr_eq(&b));
    }

    #[test]
    fn neutral_elements_fold() {
        let x = ScalarField::x();
        assert!((&x + 0.0).ptr_eq(&x));
        assert!((&x * 1.0).ptr_eq(&x));
        assert!((&x * 0.0).is_zero());
        assert_eq!((ScalarField::constant(2.0) * 3.0 + 1.0).as_constant(), Some(7.0));
        assert!(ScalarField::x().powi(0).as_constant() == Some(1.0));
    }

    #[test]
    fn literal_zero_denominator_is_not_folded() {
        let f = ScalarField::one() / 0.0;
        assert!(f.as_constant().is_none());
        assert!(f.evaluate(Point::origin()).is_err());
    }

    #[test]
    fn fields_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<ScalarField>();
        let f = parse("exp(x)*cos(y)").unwrap();
        let handles: Vec<_> = (0..4)
            .map(|i| {
                let f = f.clone();
                std::thread::spawn(move || f.differentiate(Var::ALL[i % 3]).evaluate(p(0.1, 0.2, 0.3)).unwrap())
            })
            .collect();
        for h in handles {
            assert!(h.join().unwrap().is_finite());
        }
    }
}
