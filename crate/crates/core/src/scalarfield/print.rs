//! Printing back to the parse grammar with minimal parentheses.

use std::fmt::{self, Write};

use super::{Expr, ScalarField};

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(f: &ScalarField) -> u8 {
    match f.expr() {
        Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => PREC_UNARY,
        Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => PREC_ATOM,
        Expr::Neg(_) => PREC_UNARY,
        Expr::Add(..) | Expr::Sub(..) => PREC_SUM,
        Expr::Mul(..) | Expr::Div(..) => PREC_PRODUCT,
        Expr::Pow(..) => PREC_POWER,
    }
}

/// Writer that stops accepting output after `budget` bytes.
struct Budget<'a> {
    out: &'a mut String,
    left: usize,
}

impl Write for Budget<'_> {
    fn write_str(&mut self, s: &str) -> fmt::Result {
        if s.len() > self.left {
            return Err(fmt::Error);
        }
        self.left -= s.len();
        self.out.push_str(s);
        Ok(())
    }
}

fn write_child<W: Write>(w: &mut W, f: &ScalarField, min_prec: u8) -> fmt::Result {
    if precedence(f) < min_prec {
        w.write_char('(')?;
        write_expr(w, f)?;
        w.write_char(')')
    } else {
        write_expr(w, f)
    }
}

fn write_expr<W: Write>(w: &mut W, f: &ScalarField) -> fmt::Result {
    match f.expr() {
        // `{}` on f64 is the shortest representation that round-trips
        Expr::Const(c) => write!(w, "{c}"),
        Expr::Var(v) => w.write_str(v.name()),
        Expr::Neg(a) => {
            w.write_char('-')?;
            write_child(w, a, PREC_UNARY)
        }
        Expr::Add(a, b) => {
            write_child(w, a, PREC_SUM)?;
            w.write_char('+')?;
            write_child(w, b, PREC_PRODUCT)
        }
        Expr::Sub(a, b) => {
            write_child(w, a, PREC_SUM)?;
            w.write_char('-')?;
            write_child(w, b, PREC_PRODUCT)
        }
        Expr::Mul(a, b) => {
            write_child(w, a, PREC_PRODUCT)?;
            w.write_char('*')?;
            write_child(w, b, PREC_UNARY)
        }
        Expr::Div(a, b) => {
            write_child(w, a, PREC_PRODUCT)?;
            w.write_char('/')?;
            write_child(w, b, PREC_POWER)
        }
        Expr::Pow(a, n) => {
            write_child(w, a, PREC_ATOM)?;
            if *n < 0 {
                write!(w, "^({n})")
            } else {
                write!(w, "^{n}")
            }
        }
        Expr::Call(func, a) => {
            w.write_str(func.name())?;
            w.write_char('(')?;
            write_expr(w, a)?;
            w.write_char(')')
        }
    }
}

/// Print at most `max_len` bytes, ending in `...` when cut short. Shared
/// subexpressions print once per use, so large pipeline fields must not be
/// printed in full.
pub(crate) fn to_string_truncated(f: &ScalarField, max_len: usize) -> String {
    let mut s = String::new();
    let ok = write_expr(
        &mut Budget {
            out: &mut s,
            left: max_len,
        },
        f,
    )
    .is_ok();
    if !ok {
        s.push_str("...");
    }
    s
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

#[cfg(test)]
mod tests {
    use crate::scalarfield::parse;

    fn roundtrip(s: &str) -> String {
        parse(s).unwrap().to_string()
    }

    #[test]
    fn minimal_parentheses() {
        assert_eq!(roundtrip("x-(y+z)"), "x-(y+z)");
        assert_eq!(roundtrip("(x-y)+z"), "x-y+z");
        assert_eq!(roundtrip("x/(y*z)"), "x/(y*z)");
        assert_eq!(roundtrip("(x^2)^3"), "(x^2)^3");
        assert_eq!(roundtrip("-x^2"), "-x^2");
        assert_eq!(roundtrip("(-x)^2"), "(-x)^2");
        assert_eq!(roundtrip("x*(-2)"), "x*-2");
        assert_eq!(roundtrip("(-2)^2*x"), "4*x");
        assert_eq!(roundtrip("y^-1"), "y^(-1)");
        assert_eq!(roundtrip("sqrt(1+y^2)"), "sqrt(1+y^2)");
        assert_eq!(roundtrip("x/y^2"), "x/y^2");
    }

    #[test]
    fn truncation() {
        let f = parse("x+y+z+x+y+z").unwrap();
        assert_eq!(super::to_string_truncated(&f, 5), "x+y+z...");
    }
}
