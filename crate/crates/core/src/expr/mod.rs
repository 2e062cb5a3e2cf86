//! Elementary-function formulas as expression DAGs.
//!
//! A formula is stored as a list of nodes in topological order: leaves are
//! constants and variables, every other node refers only to earlier nodes,
//! and the last node is the root. Point evaluation walks the list in
//! floating point; box evaluation walks it with [`Interval`] operations,
//! which yields the natural interval extension of the formula.
//!
//! Syntactically identical subtrees are shared. No algebraic simplification
//! is done, so `x1 - x1` still evaluates to `[-w, w]` over a box.

mod parse;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalBox, StdFn};
use crate::shape::TargetShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// `value` is what point evaluation uses; `enclosure` contains the real
    /// number the literal denotes.
    Constant { value: f64, enclosure: Interval },
    Variable(usize),
    Binary { op: BinOp, lhs: usize, rhs: usize },
    Neg(usize),
    Power { base: usize, exponent: i32 },
    Call { func: StdFn, arg: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum NodeKey {
    Constant(u64, u64, u64),
    Variable(usize),
    Binary(BinOp, usize, usize),
    Neg(usize),
    Power(usize, i32),
    Call(StdFn, usize),
}

impl Node {
    fn key(&self) -> NodeKey {
        match *self {
            Node::Constant { value, enclosure } => NodeKey::Constant(
                value.to_bits(),
                enclosure.lo().to_bits(),
                enclosure.hi().to_bits(),
            ),
            Node::Variable(k) => NodeKey::Variable(k),
            Node::Binary { op, lhs, rhs } => NodeKey::Binary(op, lhs, rhs),
            Node::Neg(a) => NodeKey::Neg(a),
            Node::Power { base, exponent } => NodeKey::Power(base, exponent),
            Node::Call { func, arg } => NodeKey::Call(func, arg),
        }
    }
}

/// Hash-consing builder; every constructor returns the index of an
/// existing identical node when there is one.
#[derive(Debug, Default)]
pub struct DagBuilder {
    arity: usize,
    nodes: Vec<Node>,
    index: HashMap<NodeKey, usize>,
}

impl DagBuilder {
    pub fn new(arity: usize) -> Self {
        DagBuilder {
            arity,
            ..Default::default()
        }
    }

    fn push(&mut self, node: Node) -> usize {
        let key = node.key();
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        self.nodes.push(node);
        let i = self.nodes.len() - 1;
        self.index.insert(key, i);
        i
    }

    /// An exact machine constant.
    pub fn constant(&mut self, value: f64) -> usize {
        self.push(Node::Constant {
            value,
            enclosure: Interval::point(value),
        })
    }

    /// A decimal literal; widened by one ulp each side unless exact.
    pub fn literal(&mut self, text: &str, value: f64) -> usize {
        self.push(Node::Constant {
            value,
            enclosure: Interval::from_decimal(text, value),
        })
    }

    /// # Panics
    /// If `k` is not below the arity.
    pub fn variable(&mut self, k: usize) -> usize {
        assert!(k < self.arity, "variable index {k} out of range");
        self.push(Node::Variable(k))
    }

    pub fn binary(&mut self, op: BinOp, lhs: usize, rhs: usize) -> usize {
        self.push(Node::Binary { op, lhs, rhs })
    }

    pub fn neg(&mut self, a: usize) -> usize {
        self.push(Node::Neg(a))
    }

    pub fn power(&mut self, base: usize, exponent: i32) -> usize {
        self.push(Node::Power { base, exponent })
    }

    pub fn call(&mut self, func: StdFn, arg: usize) -> usize {
        self.push(Node::Call { func, arg })
    }

    /// Keeps only the nodes reachable from `root`, preserving order.
    pub fn finish(self, root: usize) -> ExprDag {
        let mut live = vec![false; self.nodes.len()];
        live[root] = true;
        for i in (0..=root).rev() {
            if !live[i] {
                continue;
            }
            match self.nodes[i] {
                Node::Binary { lhs, rhs, .. } => {
                    live[lhs] = true;
                    live[rhs] = true;
                }
                Node::Neg(a) | Node::Power { base: a, .. } | Node::Call { arg: a, .. } => {
                    live[a] = true
                }
                Node::Constant { .. } | Node::Variable(_) => {}
            }
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, node) in self.nodes.into_iter().enumerate().take(root + 1) {
            if !live[i] {
                continue;
            }
            let r = |j: usize| remap[j];
            let node = match node {
                Node::Binary { op, lhs, rhs } => Node::Binary {
                    op,
                    lhs: r(lhs),
                    rhs: r(rhs),
                },
                Node::Neg(a) => Node::Neg(r(a)),
                Node::Power { base, exponent } => Node::Power {
                    base: r(base),
                    exponent,
                },
                Node::Call { func, arg } => Node::Call { func, arg: r(arg) },
                leaf => leaf,
            };
            remap[i] = nodes.len();
            nodes.push(node);
        }
        ExprDag {
            arity: self.arity,
            nodes,
        }
    }
}

/// A parsed elementary function of `arity` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprDag {
    arity: usize,
    nodes: Vec<Node>,
}

impl ExprDag {
    /// Parses `src` over variables `x1..x{arity}`.
    pub fn parse(src: &str, arity: usize) -> Result<ExprDag> {
        parse::parse(src, arity)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn eval_point(&self, x: &[f64]) -> Result<f64> {
        let mut scratch = Vec::with_capacity(self.nodes.len());
        self.eval_point_with(x, &mut scratch)
    }

    /// Point evaluation reusing `scratch` for node values.
    pub fn eval_point_with(&self, x: &[f64], scratch: &mut Vec<f64>) -> Result<f64> {
        if x.len() != self.arity {
            return Err(Error::DimensionMismatch {
                expected: self.arity,
                got: x.len(),
            });
        }
        scratch.clear();
        for (i, node) in self.nodes.iter().enumerate() {
            let fail = |detail: String| Error::EvalDomain { node: i, detail };
            let v = match *node {
                Node::Constant { value, .. } => value,
                Node::Variable(k) => x[k],
                Node::Binary { op, lhs, rhs } => {
                    let (a, b) = (scratch[lhs], scratch[rhs]);
                    match op {
                        BinOp::Add => a + b,
                        BinOp::Sub => a - b,
                        BinOp::Mul => a * b,
                        BinOp::Div => {
                            if b == 0.0 {
                                return Err(fail(format!("division of {a} by zero")));
                            }
                            a / b
                        }
                    }
                }
                Node::Neg(a) => -scratch[a],
                Node::Power { base, exponent } => {
                    let b = scratch[base];
                    if exponent < 0 && b == 0.0 {
                        return Err(fail(format!("0^{exponent}")));
                    }
                    b.powi(exponent)
                }
                Node::Call { func, arg } => {
                    let a = scratch[arg];
                    func.apply_point(a)
                        .ok_or_else(|| fail(format!("{func}({a}) is undefined")))?
                }
            };
            if v.is_nan() {
                return Err(fail("result is NaN".into()));
            }
            scratch.push(v);
        }
        Ok(scratch[self.root()])
    }

    /// Natural interval extension over `bx`.
    pub fn eval_interval(&self, bx: &IntervalBox) -> Result<Interval> {
        let mut scratch = Vec::with_capacity(self.nodes.len());
        self.eval_interval_with(bx, &mut scratch)
    }

    pub fn eval_interval_with(
        &self,
        bx: &IntervalBox,
        scratch: &mut Vec<Interval>,
    ) -> Result<Interval> {
        if bx.dim() != self.arity {
            return Err(Error::DimensionMismatch {
                expected: self.arity,
                got: bx.dim(),
            });
        }
        let undefined = |e: Error| Error::ExtensionUndefined(e.to_string());
        scratch.clear();
        for node in &self.nodes {
            let v = match *node {
                Node::Constant { enclosure, .. } => enclosure,
                Node::Variable(k) => bx[k],
                Node::Binary { op, lhs, rhs } => {
                    let (a, b) = (scratch[lhs], scratch[rhs]);
                    match op {
                        BinOp::Add => a + b,
                        BinOp::Sub => a - b,
                        BinOp::Mul => a * b,
                        BinOp::Div => a.checked_div(b).map_err(undefined)?,
                    }
                }
                Node::Neg(a) => -scratch[a],
                Node::Power { base, exponent } => {
                    scratch[base].powi(exponent).map_err(undefined)?
                }
                Node::Call { func, arg } => scratch[arg].apply(func).map_err(undefined)?,
            };
            scratch.push(v);
        }
        Ok(scratch[self.root()])
    }

    fn write_node(&self, i: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.nodes[i] {
            Node::Constant { value, .. } => {
                if value < 0.0 || (value == 0.0 && value.is_sign_negative()) {
                    write!(f, "({value:?})")
                } else {
                    write!(f, "{value:?}")
                }
            }
            Node::Variable(k) => write!(f, "x{}", k + 1),
            Node::Binary { op, lhs, rhs } => {
                f.write_str("(")?;
                self.write_node(lhs, f)?;
                write!(f, " {} ", op.symbol())?;
                self.write_node(rhs, f)?;
                f.write_str(")")
            }
            Node::Neg(a) => {
                f.write_str("(-")?;
                self.write_node(a, f)?;
                f.write_str(")")
            }
            Node::Power { base, exponent } => {
                self.write_node(base, f)?;
                write!(f, "^({exponent})")
            }
            Node::Call { func, arg } => {
                write!(f, "{func}(")?;
                self.write_node(arg, f)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for ExprDag {
    /// Fully parenthesized infix form; parses back to an equivalent DAG.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_node(self.root(), f)
    }
}

impl TargetShape for ExprDag {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval_point(&self, x: &[f64]) -> Result<f64> {
        ExprDag::eval_point(self, x)
    }

    fn eval_box(&self, bx: &IntervalBox) -> Result<Interval> {
        self.eval_interval(bx)
    }
}
