//! A small reverse-mode tape over vector-valued nodes.
//!
//! Forward values are computed eagerly as the expression graph is recorded;
//! [`Var::backward`] then walks the tape once in reverse to populate the
//! adjoint of every node. Binary elementwise operations broadcast a
//! length-1 operand against a vector operand. A node of length 1 plays the
//! role of a scalar.
//!
//! The nonsmooth primitives (`abs`, `max`, `relu`) record which side of
//! their kink each element sits on; [`Tape::kink_signature`] exposes those
//! bits so a finite-difference harness can detect when a perturbation
//! crossed a kink and the comparison is void.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::rc::Rc;

use sl_core::Real;

use crate::special;

enum Op<T> {
    Leaf,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    Exp(usize),
    Ln(usize),
    PowConst(usize, T),
    AddConst(usize, T),
    MulConst(usize, T),
    Abs(usize),
    Max(usize, usize),
    Relu(usize),
    CappedExp(usize),
    Digamma(usize),
    Lgamma(usize),
    Sum(usize),
    DotConst(usize, Vec<T>),
    MatVec {
        w: usize,
        x: usize,
        rows: usize,
        cols: usize,
    },
}

struct Node<T> {
    op: Op<T>,
    value: Vec<T>,
}

/// Shared recording of an expression graph.
pub struct Tape<T: Real> {
    nodes: Rc<RefCell<Vec<Node<T>>>>,
}

impl<T: Real> Clone for Tape<T> {
    fn clone(&self) -> Self {
        Tape {
            nodes: Rc::clone(&self.nodes),
        }
    }
}

impl<T: Real> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Handle to a node on a [`Tape`]. Cheap to clone.
pub struct Var<T: Real> {
    tape: Tape<T>,
    index: usize,
}

impl<T: Real> Clone for Var<T> {
    fn clone(&self) -> Self {
        Var {
            tape: self.tape.clone(),
            index: self.index,
        }
    }
}

fn zip_broadcast<T: Real>(a: &[T], b: &[T], f: impl Fn(T, T) -> T) -> Vec<T> {
    match (a.len(), b.len()) {
        (n, m) if n == m => a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect(),
        (1, _) => b.iter().map(|&y| f(a[0], y)).collect(),
        (_, 1) => a.iter().map(|&x| f(x, b[0])).collect(),
        (n, m) => panic!("tape shape mismatch: {n} vs {m}"),
    }
}

/// Index into a value that may be a broadcast scalar.
fn at<T: Real>(v: &[T], j: usize) -> T {
    if v.len() == 1 {
        v[0]
    } else {
        v[j]
    }
}

impl<T: Real> Tape<T> {
    pub fn new() -> Self {
        Tape {
            nodes: Rc::new(RefCell::new(Vec::new())),
        }
    }

    fn push(&self, op: Op<T>, value: Vec<T>) -> Var<T> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node { op, value });
        Var {
            tape: self.clone(),
            index: nodes.len() - 1,
        }
    }

    /// Record an input node. Every parameter and constant enters this way.
    pub fn leaf(&self, values: Vec<T>) -> Var<T> {
        assert!(!values.is_empty(), "tape nodes cannot be empty");
        self.push(Op::Leaf, values)
    }

    /// Record a length-1 input node.
    pub fn scalar(&self, value: T) -> Var<T> {
        self.leaf(vec![value])
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.borrow().len()
    }

    /// One bit per nonsmooth branch decision taken during the forward pass,
    /// in recording order: `abs`/`relu` contribute the sign of each input
    /// element, `max` the side that won. Two evaluations of the same graph
    /// with equal signatures took identical branches everywhere.
    pub fn kink_signature(&self) -> Vec<bool> {
        let nodes = self.nodes.borrow();
        let mut bits = Vec::new();
        for node in nodes.iter() {
            match &node.op {
                Op::Abs(a) | Op::Relu(a) => {
                    for &v in &nodes[*a].value {
                        bits.push(v > T::zero());
                    }
                }
                Op::Max(a, b) => {
                    let (av, bv) = (&nodes[*a].value, &nodes[*b].value);
                    for j in 0..node.value.len() {
                        bits.push(at(av, j) >= at(bv, j));
                    }
                }
                _ => {}
            }
        }
        bits
    }
}

impl<T: Real> Var<T> {
    pub fn len(&self) -> usize {
        self.tape.nodes.borrow()[self.index].value.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self) -> Vec<T> {
        self.tape.nodes.borrow()[self.index].value.clone()
    }

    /// Value of a length-1 node.
    pub fn scalar_value(&self) -> T {
        let nodes = self.tape.nodes.borrow();
        let v = &nodes[self.index].value;
        assert_eq!(v.len(), 1, "scalar_value on a length-{} node", v.len());
        v[0]
    }

    fn assert_same_tape(&self, other: &Var<T>) {
        assert!(
            Rc::ptr_eq(&self.tape.nodes, &other.tape.nodes),
            "operands recorded on different tapes"
        );
    }

    fn unary(&self, f: impl Fn(T) -> T, op: impl FnOnce(usize) -> Op<T>) -> Var<T> {
        let value = {
            let nodes = self.tape.nodes.borrow();
            nodes[self.index].value.iter().map(|&x| f(x)).collect()
        };
        self.tape.push(op(self.index), value)
    }

    fn binary(
        &self,
        rhs: &Var<T>,
        f: impl Fn(T, T) -> T,
        op: impl FnOnce(usize, usize) -> Op<T>,
    ) -> Var<T> {
        self.assert_same_tape(rhs);
        let value = {
            let nodes = self.tape.nodes.borrow();
            zip_broadcast(&nodes[self.index].value, &nodes[rhs.index].value, f)
        };
        self.tape.push(op(self.index, rhs.index), value)
    }

    pub fn exp(&self) -> Var<T> {
        self.unary(|x| x.exp(), Op::Exp)
    }

    pub fn ln(&self) -> Var<T> {
        self.unary(|x| x.ln(), Op::Ln)
    }

    /// Elementwise power with a constant exponent.
    pub fn powc(&self, c: T) -> Var<T> {
        self.unary(|x| x.powf(c), |i| Op::PowConst(i, c))
    }

    pub fn add_const(&self, c: T) -> Var<T> {
        self.unary(|x| x + c, |i| Op::AddConst(i, c))
    }

    pub fn mul_const(&self, c: T) -> Var<T> {
        self.unary(|x| x * c, |i| Op::MulConst(i, c))
    }

    /// Elementwise absolute value; the subgradient at 0 is 0.
    pub fn abs(&self) -> Var<T> {
        self.unary(|x| x.abs(), Op::Abs)
    }

    /// Elementwise maximum; on ties the gradient goes to `self`.
    pub fn max(&self, rhs: &Var<T>) -> Var<T> {
        self.binary(rhs, |x, y| if x >= y { x } else { y }, Op::Max)
    }

    pub fn relu(&self) -> Var<T> {
        // NaN stays NaN so that bad inputs surface as a non-finite loss
        // instead of being flushed to zero.
        self.unary(|x| if x > T::zero() || x.is_nan() { x } else { T::zero() }, Op::Relu)
    }

    pub fn capped_exp(&self) -> Var<T> {
        self.unary(special::capped_exp, Op::CappedExp)
    }

    pub fn digamma(&self) -> Var<T> {
        self.unary(special::digamma, Op::Digamma)
    }

    pub fn lgamma(&self) -> Var<T> {
        self.unary(special::lgamma, Op::Lgamma)
    }

    /// Sum of all elements; a length-1 result.
    pub fn sum(&self) -> Var<T> {
        let total = {
            let nodes = self.tape.nodes.borrow();
            let mut acc = T::zero();
            for &x in &nodes[self.index].value {
                acc += x;
            }
            acc
        };
        self.tape.push(Op::Sum(self.index), vec![total])
    }

    /// Dot product with a constant vector; a length-1 result.
    pub fn dot_const(&self, weights: &[T]) -> Var<T> {
        let total = {
            let nodes = self.tape.nodes.borrow();
            let v = &nodes[self.index].value;
            assert_eq!(v.len(), weights.len(), "dot_const length mismatch");
            let mut acc = T::zero();
            for (&x, &w) in v.iter().zip(weights) {
                acc += x * w;
            }
            acc
        };
        self.tape
            .push(Op::DotConst(self.index, weights.to_vec()), vec![total])
    }

    /// Matrix-vector product. `self` is a `rows`×`cols` matrix stored
    /// row-major; `x` has length `cols`; the result has length `rows`.
    pub fn matvec(&self, x: &Var<T>, rows: usize, cols: usize) -> Var<T> {
        self.assert_same_tape(x);
        let value = {
            let nodes = self.tape.nodes.borrow();
            let wv = &nodes[self.index].value;
            let xv = &nodes[x.index].value;
            assert_eq!(wv.len(), rows * cols, "matvec: bad matrix length");
            assert_eq!(xv.len(), cols, "matvec: bad vector length");
            (0..rows)
                .map(|r| {
                    let mut acc = T::zero();
                    for c in 0..cols {
                        acc += wv[r * cols + c] * xv[c];
                    }
                    acc
                })
                .collect()
        };
        self.tape.push(
            Op::MatVec {
                w: self.index,
                x: x.index,
                rows,
                cols,
            },
            value,
        )
    }

    /// Reverse pass from a scalar root. Returns the adjoint of every node;
    /// nodes the root does not depend on get zero gradients.
    pub fn backward(&self) -> Gradients<T> {
        let nodes = self.tape.nodes.borrow();
        assert_eq!(
            nodes[self.index].value.len(),
            1,
            "backward requires a scalar root"
        );
        let mut adjoints: Vec<Option<Vec<T>>> = (0..nodes.len()).map(|_| None).collect();
        adjoints[self.index] = Some(vec![T::one()]);

        for i in (0..=self.index).rev() {
            let Some(g) = adjoints[i].take() else { continue };
            let node = &nodes[i];
            match &node.op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    accumulate(&mut adjoints, &nodes, *a, &g);
                    accumulate(&mut adjoints, &nodes, *b, &g);
                }
                Op::Sub(a, b) => {
                    accumulate(&mut adjoints, &nodes, *a, &g);
                    let neg: Vec<T> = g.iter().map(|&x| -x).collect();
                    accumulate(&mut adjoints, &nodes, *b, &neg);
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (&nodes[*a].value, &nodes[*b].value);
                    let ca: Vec<T> = g.iter().enumerate().map(|(j, &gj)| gj * at(bv, j)).collect();
                    let cb: Vec<T> = g.iter().enumerate().map(|(j, &gj)| gj * at(av, j)).collect();
                    accumulate(&mut adjoints, &nodes, *a, &ca);
                    accumulate(&mut adjoints, &nodes, *b, &cb);
                }
                Op::Div(a, b) => {
                    let bv = &nodes[*b].value;
                    let zv = &node.value;
                    let ca: Vec<T> = g.iter().enumerate().map(|(j, &gj)| gj / at(bv, j)).collect();
                    let cb: Vec<T> = g
                        .iter()
                        .enumerate()
                        .map(|(j, &gj)| -gj * zv[j] / at(bv, j))
                        .collect();
                    accumulate(&mut adjoints, &nodes, *a, &ca);
                    accumulate(&mut adjoints, &nodes, *b, &cb);
                }
                Op::Neg(a) => {
                    let c: Vec<T> = g.iter().map(|&x| -x).collect();
                    accumulate(&mut adjoints, &nodes, *a, &c);
                }
                Op::Exp(a) => {
                    let c: Vec<T> = g.iter().zip(&node.value).map(|(&gj, &zj)| gj * zj).collect();
                    accumulate(&mut adjoints, &nodes, *a, &c);
                }
                Op::Ln(a) => {
                    let av = &nodes[*a].value;
                    let c: Vec<T> = g.iter().zip(av).map(|(&gj, &xj)| gj / xj).collect();
                    accumulate(&mut adjoints, &nodes, *a, &c);
                }
                Op::PowConst(a, p) => {
                    let av = &nodes[*a].value;
                    let c: Vec<T> = g
                        .iter()
                        .zip(av)
                        .map(|(&gj, &xj)| gj * *p * xj.powf(*p - T::one()))
                        .collect();
                    accumulate(&mut adjoints, &nodes, *a, &c);
                }
                Op::AddConst(a, _) => {
                    accumulate(&mut adjoints, &nodes, *a, &g);
                }
                Op::MulConst(a, m) => {
                    let c: Vec<T> = g.iter().map(|&x| x * *m).collect();
                    accumulate(&mut adjoints, &nodes, *a, &c);
                }
                Op::Abs(a) => {
                    let av = &nodes[*a].value;
                    let c: Vec<T> = g
                        .iter()
                        .zip(av)
                        .map(|(&gj, &xj)| {
                            if xj > T::zero() {
                                gj
                            } else if xj < T::zero() {
                                -gj
                            } else {
                                T::zero()
                            }
                        })
                        .collect();
                    accumulate(&mut adjoints, &nodes, *a, &c);
                }
                Op::Max(a, b) => {
                    let (av, bv) = (&nodes[*a].value, &nodes[*b].value);
                    let ca: Vec<T> = g
                        .iter()
                        .enumerate()
                        .map(|(j, &gj)| if at(av, j) >= at(bv, j) { gj } else { T::zero() })
                        .collect();
                    let cb: Vec<T> = g
                        .iter()
                        .enumerate()
                        .map(|(j, &gj)| if at(av, j) >= at(bv, j) { T::zero() } else { gj })
                        .collect();
                    accumulate(&mut adjoints, &nodes, *a, &ca);
                    accumulate(&mut adjoints, &nodes, *b, &cb);
                }
                Op::Relu(a) => {
                    let av = &nodes[*a].value;
                    let c: Vec<T> = g
                        .iter()
                        .zip(av)
                        .map(|(&gj, &xj)| if xj > T::zero() { gj } else { T::zero() })
                        .collect();
                    accumulate(&mut adjoints, &nodes, *a, &c);
                }
                Op::CappedExp(a) => {
                    let cap = T::num(special::EVIDENCE_CAP);
                    let c: Vec<T> = g
                        .iter()
                        .zip(&node.value)
                        .map(|(&gj, &fj)| gj * fj * (T::one() - fj / cap))
                        .collect();
                    accumulate(&mut adjoints, &nodes, *a, &c);
                }
                Op::Digamma(a) => {
                    let av = &nodes[*a].value;
                    let c: Vec<T> = g
                        .iter()
                        .zip(av)
                        .map(|(&gj, &xj)| gj * special::trigamma(xj))
                        .collect();
                    accumulate(&mut adjoints, &nodes, *a, &c);
                }
                Op::Lgamma(a) => {
                    let av = &nodes[*a].value;
                    let c: Vec<T> = g
                        .iter()
                        .zip(av)
                        .map(|(&gj, &xj)| gj * special::digamma(xj))
                        .collect();
                    accumulate(&mut adjoints, &nodes, *a, &c);
                }
                Op::Sum(a) => {
                    let n = nodes[*a].value.len();
                    let c = vec![g[0]; n];
                    accumulate(&mut adjoints, &nodes, *a, &c);
                }
                Op::DotConst(a, weights) => {
                    let c: Vec<T> = weights.iter().map(|&w| w * g[0]).collect();
                    accumulate(&mut adjoints, &nodes, *a, &c);
                }
                Op::MatVec { w, x, rows, cols } => {
                    let (wv, xv) = (&nodes[*w].value, &nodes[*x].value);
                    let mut cw = vec![T::zero(); rows * cols];
                    let mut cx = vec![T::zero(); *cols];
                    for r in 0..*rows {
                        for c in 0..*cols {
                            cw[r * cols + c] = g[r] * xv[c];
                            cx[c] += g[r] * wv[r * cols + c];
                        }
                    }
                    accumulate(&mut adjoints, &nodes, *w, &cw);
                    accumulate(&mut adjoints, &nodes, *x, &cx);
                }
            }
            adjoints[i] = Some(g);
        }
        Gradients { adjoints }
    }
}

/// Add a contribution (of the output's length) into the adjoint slot of an
/// input node, reducing over broadcast dimensions.
fn accumulate<T: Real>(
    adjoints: &mut [Option<Vec<T>>],
    nodes: &[Node<T>],
    target: usize,
    contribution: &[T],
) {
    let target_len = nodes[target].value.len();
    let slot = adjoints[target].get_or_insert_with(|| vec![T::zero(); target_len]);
    if target_len == contribution.len() {
        for (s, &c) in slot.iter_mut().zip(contribution) {
            *s += c;
        }
    } else if target_len == 1 {
        // The input was broadcast across the output: reduce.
        let mut total = T::zero();
        for &c in contribution {
            total += c;
        }
        slot[0] += total;
    } else {
        panic!(
            "adjoint shape mismatch: {} vs {}",
            target_len,
            contribution.len()
        );
    }
}

/// Result of a backward pass.
pub struct Gradients<T> {
    adjoints: Vec<Option<Vec<T>>>,
}

impl<T: Real> Gradients<T> {
    /// Gradient of the root with respect to `v` (zeros if the root does not
    /// depend on it).
    pub fn wrt(&self, v: &Var<T>) -> Vec<T> {
        match &self.adjoints[v.index] {
            Some(g) => g.clone(),
            None => vec![T::zero(); v.len()],
        }
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $f:expr, $op:expr) => {
        impl<'a, T: Real> $trait<&'a Var<T>> for &'a Var<T> {
            type Output = Var<T>;
            fn $method(self, rhs: &'a Var<T>) -> Var<T> {
                self.binary(rhs, $f, $op)
            }
        }
        impl<T: Real> $trait<Var<T>> for Var<T> {
            type Output = Var<T>;
            fn $method(self, rhs: Var<T>) -> Var<T> {
                self.binary(&rhs, $f, $op)
            }
        }
        impl<'a, T: Real> $trait<&'a Var<T>> for Var<T> {
            type Output = Var<T>;
            fn $method(self, rhs: &'a Var<T>) -> Var<T> {
                self.binary(rhs, $f, $op)
            }
        }
        impl<'a, T: Real> $trait<Var<T>> for &'a Var<T> {
            type Output = Var<T>;
            fn $method(self, rhs: Var<T>) -> Var<T> {
                self.binary(&rhs, $f, $op)
            }
        }
    };
}

impl_binop!(Add, add, |x, y| x + y, Op::Add);
impl_binop!(Sub, sub, |x, y| x - y, Op::Sub);
impl_binop!(Mul, mul, |x, y| x * y, Op::Mul);
impl_binop!(Div, div, |x, y| x / y, Op::Div);

impl<T: Real> Neg for &Var<T> {
    type Output = Var<T>;
    fn neg(self) -> Var<T> {
        self.unary(|x| -x, Op::Neg)
    }
}

impl<T: Real> Neg for Var<T> {
    type Output = Var<T>;
    fn neg(self) -> Var<T> {
        (&self).neg()
    }
}
