//! Linearized evaluation of a set of fields.
//!
//! Compiling walks the shared DAG once and emits each distinct node exactly
//! once in dependency order; evaluation is then a single pass over a flat
//! instruction list per point.

use std::collections::HashMap;

use super::{print, DomainError, DomainErrorKind, Expr, Func, Node, ScalarField};
use crate::point::Point;

#[derive(Debug, Clone, Copy)]
enum Instr {
    Const(f64),
    Var(usize),
    Neg(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Pow(usize, i32),
    Call(Func, usize),
}

/// A compiled batch of fields sharing one instruction list.
pub struct Tape {
    instrs: Vec<Instr>,
    // kept for error descriptions; also pins the node addresses used as keys
    nodes: Vec<ScalarField>,
    outputs: Vec<usize>,
}

impl Tape {
    pub fn compile<'a, I>(fields: I) -> Tape
    where
        I: IntoIterator<Item = &'a ScalarField>,
    {
        let mut index: HashMap<*const Node, usize> = HashMap::new();
        let mut tape = Tape {
            instrs: Vec::new(),
            nodes: Vec::new(),
            outputs: Vec::new(),
        };
        for root in fields {
            let slot = tape.emit(root, &mut index);
            tape.outputs.push(slot);
        }
        tape
    }

    /// Iterative post-order emission; pipeline DAGs can be deep.
    fn emit(&mut self, root: &ScalarField, index: &mut HashMap<*const Node, usize>) -> usize {
        let key = |f: &ScalarField| std::sync::Arc::as_ptr(&f.0);
        let mut stack: Vec<(ScalarField, bool)> = vec![(root.clone(), false)];
        while let Some((f, expanded)) = stack.pop() {
            if index.contains_key(&key(&f)) {
                continue;
            }
            let children: Vec<&ScalarField> = match f.expr() {
                Expr::Const(_) | Expr::Var(_) => vec![],
                Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => vec![a],
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => vec![a, b],
            };
            if !expanded {
                let pending: Vec<ScalarField> = children
                    .iter()
                    .filter(|c| !index.contains_key(&key(c)))
                    .map(|c| (*c).clone())
                    .collect();
                stack.push((f.clone(), true));
                stack.extend(pending.into_iter().map(|c| (c, false)));
                continue;
            }
            let at = |c: &ScalarField| index[&key(c)];
            let instr = match f.expr() {
                Expr::Const(c) => Instr::Const(*c),
                Expr::Var(v) => Instr::Var(v.index()),
                Expr::Neg(a) => Instr::Neg(at(a)),
                Expr::Add(a, b) => Instr::Add(at(a), at(b)),
                Expr::Sub(a, b) => Instr::Sub(at(a), at(b)),
                Expr::Mul(a, b) => Instr::Mul(at(a), at(b)),
                Expr::Div(a, b) => Instr::Div(at(a), at(b)),
                Expr::Pow(a, n) => Instr::Pow(at(a), *n),
                Expr::Call(func, a) => Instr::Call(*func, at(a)),
            };
            index.insert(key(&f), self.instrs.len());
            self.instrs.push(instr);
            self.nodes.push(f);
        }
        index[&key(root)]
    }

    /// Number of distinct nodes.
    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    /// Values of the compiled fields at `p`, in compile order.
    pub fn eval(&self, p: Point) -> Result<Vec<f64>, DomainError> {
        let coords = p.coords();
        let mut vals = vec![0.0f64; self.instrs.len()];
        for (i, instr) in self.instrs.iter().enumerate() {
            let fail = |kind| DomainError {
                point: p,
                kind,
                expr: print::to_string_truncated(&self.nodes[i], 120),
            };
            let v = match *instr {
                Instr::Const(c) => c,
                Instr::Var(k) => coords[k],
                Instr::Neg(a) => -vals[a],
                Instr::Add(a, b) => vals[a] + vals[b],
                Instr::Sub(a, b) => vals[a] - vals[b],
                Instr::Mul(a, b) => vals[a] * vals[b],
                Instr::Div(a, b) => {
                    if vals[b] == 0.0 {
                        return Err(fail(DomainErrorKind::DivisionByZero));
                    }
                    vals[a] / vals[b]
                }
                Instr::Pow(a, n) => {
                    if n < 0 && vals[a] == 0.0 {
                        return Err(fail(DomainErrorKind::DivisionByZero));
                    }
                    vals[a].powi(n)
                }
                Instr::Call(func, a) => {
                    let x = vals[a];
                    match func {
                        Func::Sqrt if x < 0.0 => return Err(fail(DomainErrorKind::SqrtOfNegative)),
                        Func::Sqrt => x.sqrt(),
                        Func::Sin => x.sin(),
                        Func::Cos => x.cos(),
                        Func::Exp => x.exp(),
                    }
                }
            };
            if !v.is_finite() {
                return Err(fail(DomainErrorKind::NonFinite));
            }
            vals[i] = v;
        }
        Ok(self.outputs.iter().map(|&k| vals[k]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalarfield::parse;

    #[test]
    fn shared_nodes_compile_once() {
        let s = parse("sqrt(1+y^2)").unwrap();
        let f = &s * &s;
        // y, 2-power, 1, sum, sqrt, product
        assert_eq!(Tape::compile([&f]).len(), 6);
    }

    #[test]
    fn batch_outputs_follow_compile_order() {
        let a = parse("x+1").unwrap();
        let b = parse("2*y").unwrap();
        let t = Tape::compile([&b, &a, &b]);
        assert_eq!(t.output_count(), 3);
        assert_eq!(t.eval(Point::new(1.0, 2.0, 0.0)).unwrap(), vec![4.0, 2.0, 4.0]);
    }
}
