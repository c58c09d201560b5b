//! Reverse-mode automatic differentiation over [`Matrix`] values.
//!
//! A [`Tape`] records every operation as a node in creation order, which is
//! already a topological order. [`Tape::backward`] walks the nodes once in
//! reverse, accumulating adjoints. Tapes are meant to live for a single
//! training step.

use crate::error::{Error, Result};

use super::Matrix;

/// Added to every `log` argument so a saturated sigmoid cannot produce `-inf`.
pub const LOG_EPSILON: f64 = 1e-12;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    /// `c - x`
    ConstSub(Var),
    AddRow(Var, Var),
    MulConst(Var, Matrix),
    Log(Var),
    Exp(Var),
    Clip(Var, f64, f64),
    LeakyRelu(Var, f64),
    Sigmoid(Var),
    ConcatCols(Var, Var),
    Sum(Var),
    Mean(Var),
}

#[derive(Debug)]
struct Node {
    value: Matrix,
    op: Op,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Option<Vec<Matrix>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Matrix, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    /// Registers an input (parameter or constant).
    pub fn leaf(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    /// Scalar value of a `1 × 1` node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.as_slice()[0]
    }

    /// Adjoint of `v`, available after [`Tape::backward`].
    pub fn grad(&self, v: Var) -> Option<&Matrix> {
        self.grads.as_ref().map(|g| &g[v.0])
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        Ok(self.push(value, Op::MatMul(a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).add(self.value(b))?;
        Ok(self.push(value, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).sub(self.value(b))?;
        Ok(self.push(value, Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).hadamard(self.value(b))?;
        Ok(self.push(value, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let value = self.value(a).scale(s);
        self.push(value, Op::Scale(a, s))
    }

    pub fn neg(&mut self, a: Var) -> Var {
        self.scale(a, -1.0)
    }

    /// `c - a`, entrywise.
    pub fn const_sub(&mut self, c: f64, a: Var) -> Var {
        let value = self.value(a).map(|v| c - v);
        self.push(value, Op::ConstSub(a))
    }

    /// Adds a `1 × cols` bias row to every row of `a`.
    pub fn add_row(&mut self, a: Var, bias: Var) -> Result<Var> {
        let value = self.value(a).add_row(self.value(bias))?;
        Ok(self.push(value, Op::AddRow(a, bias)))
    }

    /// Entrywise product with a constant (e.g. a dropout mask).
    pub fn mul_const(&mut self, a: Var, mask: Matrix) -> Result<Var> {
        let value = self.value(a).hadamard(&mask)?;
        Ok(self.push(value, Op::MulConst(a, mask)))
    }

    /// `ln(a + LOG_EPSILON)`, entrywise.
    pub fn log(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        if let Some(bad) = x.as_slice().iter().find(|&&v| !(v + LOG_EPSILON > 0.0)) {
            return Err(Error::Domain {
                op: "log",
                detail: format!("non-positive argument {bad} after epsilon guard"),
            });
        }
        let value = x.map(|v| (v + LOG_EPSILON).ln());
        Ok(self.push(value, Op::Log(a)))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::exp);
        self.push(value, Op::Exp(a))
    }

    pub fn clip(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        let value = self.value(a).clip(lo, hi);
        self.push(value, Op::Clip(a, lo, hi))
    }

    pub fn leaky_relu(&mut self, a: Var, alpha: f64) -> Var {
        let value = self.value(a).map(|v| leaky_relu(v, alpha));
        self.push(value, Op::LeakyRelu(a, alpha))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).map(sigmoid);
        self.push(value, Op::Sigmoid(a))
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).hstack(self.value(b))?;
        Ok(self.push(value, Op::ConcatCols(a, b)))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = Matrix::scalar(self.value(a).sum());
        self.push(value, Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let value = Matrix::scalar(self.value(a).mean());
        self.push(value, Op::Mean(a))
    }

    /// Populates adjoints of every node with respect to the scalar `loss`.
    ///
    /// A tape can be differentiated once; build a fresh tape per step.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.grads.is_some() {
            return Err(Error::Contract("backward already ran on this tape".into()));
        }
        if self.value(loss).shape() != (1, 1) {
            return Err(Error::Contract(format!(
                "backward needs a 1x1 loss, got {:?}",
                self.value(loss).shape()
            )));
        }
        let mut grads: Vec<Matrix> = self
            .nodes
            .iter()
            .map(|n| Matrix::zeros(n.value.rows(), n.value.cols()))
            .collect();
        grads[loss.0] = Matrix::scalar(1.0);

        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if matches!(node.op, Op::Leaf) {
                continue;
            }
            let g = std::mem::replace(&mut grads[i], Matrix::zeros(0, 0));
            if g.as_slice().iter().all(|&v| v == 0.0) {
                grads[i] = g;
                continue;
            }
            let val = |v: Var| &self.nodes[v.0].value;
            match &node.op {
                Op::Leaf => unreachable!(),
                Op::MatMul(a, b) => {
                    let da = g.matmul_t(val(*b))?;
                    let db = val(*a).t_matmul(&g)?;
                    grads[a.0].add_assign(&da)?;
                    grads[b.0].add_assign(&db)?;
                }
                Op::Add(a, b) => {
                    grads[a.0].add_assign(&g)?;
                    grads[b.0].add_assign(&g)?;
                }
                Op::Sub(a, b) => {
                    grads[a.0].add_assign(&g)?;
                    grads[b.0].add_assign(&g.scale(-1.0))?;
                }
                Op::Mul(a, b) => {
                    let da = g.hadamard(val(*b))?;
                    let db = g.hadamard(val(*a))?;
                    grads[a.0].add_assign(&da)?;
                    grads[b.0].add_assign(&db)?;
                }
                Op::Scale(a, s) => grads[a.0].add_assign(&g.scale(*s))?,
                Op::ConstSub(a) => grads[a.0].add_assign(&g.scale(-1.0))?,
                Op::AddRow(a, bias) => {
                    grads[a.0].add_assign(&g)?;
                    grads[bias.0].add_assign(&g.column_sums())?;
                }
                Op::MulConst(a, mask) => grads[a.0].add_assign(&g.hadamard(mask)?)?,
                Op::Log(a) => {
                    let d = g.zip_map(val(*a), "log'", |g, x| g / (x + LOG_EPSILON))?;
                    grads[a.0].add_assign(&d)?;
                }
                Op::Exp(a) => {
                    let d = g.hadamard(&node.value)?;
                    grads[a.0].add_assign(&d)?;
                }
                Op::Clip(a, lo, hi) => {
                    let (lo, hi) = (*lo, *hi);
                    let d = g.zip_map(val(*a), "clip'", |g, x| if x >= lo && x <= hi { g } else { 0.0 })?;
                    grads[a.0].add_assign(&d)?;
                }
                Op::LeakyRelu(a, alpha) => {
                    let alpha = *alpha;
                    let d = g.zip_map(val(*a), "leaky_relu'", |g, x| if x > 0.0 { g } else { alpha * g })?;
                    grads[a.0].add_assign(&d)?;
                }
                Op::Sigmoid(a) => {
                    let d = g.zip_map(&node.value, "sigmoid'", |g, s| g * s * (1.0 - s))?;
                    grads[a.0].add_assign(&d)?;
                }
                Op::ConcatCols(a, b) => {
                    let (da, db) = g.split_cols(val(*a).cols());
                    grads[a.0].add_assign(&da)?;
                    grads[b.0].add_assign(&db)?;
                }
                Op::Sum(a) => {
                    let (r, c) = val(*a).shape();
                    grads[a.0].add_assign(&Matrix::filled(r, c, g.as_slice()[0]))?;
                }
                Op::Mean(a) => {
                    let (r, c) = val(*a).shape();
                    let n = (r * c).max(1) as f64;
                    grads[a.0].add_assign(&Matrix::filled(r, c, g.as_slice()[0] / n))?;
                }
            }
            grads[i] = g;
        }
        self.grads = Some(grads);
        Ok(())
    }
}

#[inline]
pub(crate) fn leaky_relu(x: f64, alpha: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        alpha * x
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn randn(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        Matrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
    }

    /// Central finite differences of `f` with respect to every entry of `x`.
    fn numeric_grad(x: &Matrix, f: impl Fn(&Matrix) -> f64) -> Matrix {
        let h = 1e-5;
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.len() {
            let mut plus = x.clone();
            plus.as_mut_slice()[i] += h;
            let mut minus = x.clone();
            minus.as_mut_slice()[i] -= h;
            out.as_mut_slice()[i] = (f(&plus) - f(&minus)) / (2.0 * h);
        }
        out
    }

    fn assert_close(analytic: &Matrix, numeric: &Matrix, rel: f64, abs: f64) {
        for (a, n) in analytic.as_slice().iter().zip(numeric.as_slice()) {
            let tol = (rel * a.abs().max(n.abs())).max(abs);
            assert!((a - n).abs() <= tol, "analytic {a} vs numeric {n}");
        }
    }

    #[test]
    fn add_zero_is_identity() {
        let mut t = Tape::new();
        let a = t.leaf(Matrix::from_rows(&[[1.0, -2.0], [0.5, 3.0]]).unwrap());
        let z = t.leaf(Matrix::zeros(2, 2));
        let s = t.add(a, z).unwrap();
        assert_eq!(t.value(s), t.value(a));
    }

    #[test]
    fn log_exp_roundtrip() {
        let mut t = Tape::new();
        let a = Matrix::from_rows(&[[0.3, -1.7, 2.2]]).unwrap();
        let x = t.leaf(a.clone());
        let e = t.exp(x);
        let l = t.log(e).unwrap();
        assert!(t.value(l).max_abs_diff(&a) < 1e-11);
    }

    #[test]
    fn log_rejects_non_positive() {
        let mut t = Tape::new();
        let x = t.leaf(Matrix::from_rows(&[[1.0, -0.5]]).unwrap());
        assert!(matches!(t.log(x), Err(Error::Domain { .. })));
        let zero = t.leaf(Matrix::zeros(1, 1));
        assert!(t.log(zero).is_ok(), "zero is rescued by the epsilon guard");
    }

    #[test]
    fn sum_gradient_is_ones() {
        let mut t = Tape::new();
        let w = t.leaf(Matrix::from_fn(3, 2, |r, c| (r + c) as f64));
        let s = t.sum(w);
        t.backward(s).unwrap();
        assert!(t.grad(w).unwrap().as_slice().iter().all(|&g| g == 1.0));
    }

    #[test]
    fn quadratic_gradient_is_twice_w() {
        let mut t = Tape::new();
        let wv = Matrix::from_fn(2, 3, |r, c| r as f64 - 0.5 * c as f64);
        let w = t.leaf(wv.clone());
        let sq = t.mul(w, w).unwrap();
        let s = t.sum(sq);
        t.backward(s).unwrap();
        assert_eq!(t.grad(w).unwrap(), &wv.scale(2.0));
    }

    #[test]
    fn backward_rejects_non_scalar_and_repeats() {
        let mut t = Tape::new();
        let w = t.leaf(Matrix::zeros(2, 2));
        assert!(matches!(t.backward(w), Err(Error::Contract(_))));
        let s = t.sum(w);
        t.backward(s).unwrap();
        assert!(matches!(t.backward(s), Err(Error::Contract(_))));
    }

    #[test]
    fn matmul_adjoints_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a0 = randn(&mut rng, 3, 4);
        let b0 = randn(&mut rng, 4, 2);
        let c0 = randn(&mut rng, 3, 2);
        // loss = sum((A B) ∘ C) keeps the adjoint non-uniform
        let loss = |a: &Matrix, b: &Matrix| a.matmul(b).unwrap().hadamard(&c0).unwrap().sum();
        let mut t = Tape::new();
        let a = t.leaf(a0.clone());
        let b = t.leaf(b0.clone());
        let c = t.leaf(c0.clone());
        let p = t.matmul(a, b).unwrap();
        let q = t.mul(p, c).unwrap();
        let s = t.sum(q);
        t.backward(s).unwrap();
        assert_close(t.grad(a).unwrap(), &numeric_grad(&a0, |x| loss(x, &b0)), 1e-6, 1e-9);
        assert_close(t.grad(b).unwrap(), &numeric_grad(&b0, |x| loss(&a0, x)), 1e-6, 1e-9);
    }

    #[test]
    fn mul_adjoints_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a0 = randn(&mut rng, 3, 3);
        let b0 = randn(&mut rng, 3, 3);
        let loss = |a: &Matrix, b: &Matrix| a.hadamard(b).unwrap().map(|v| v * v).sum();
        let mut t = Tape::new();
        let a = t.leaf(a0.clone());
        let b = t.leaf(b0.clone());
        let p = t.mul(a, b).unwrap();
        let sq = t.mul(p, p).unwrap();
        let s = t.sum(sq);
        t.backward(s).unwrap();
        assert_close(t.grad(a).unwrap(), &numeric_grad(&a0, |x| loss(x, &b0)), 1e-6, 1e-9);
        assert_close(t.grad(b).unwrap(), &numeric_grad(&b0, |x| loss(&a0, x)), 1e-6, 1e-9);
    }

    #[test]
    fn unary_op_chain_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x0 = randn(&mut rng, 4, 3);
        let bias0 = randn(&mut rng, 1, 3);
        let other0 = randn(&mut rng, 4, 2);
        let f = |x: &Matrix, bias: &Matrix| {
            let mut t = Tape::new();
            let x = t.leaf(x.clone());
            let b = t.leaf(bias.clone());
            let o = t.leaf(other0.clone());
            let y = build(&mut t, x, b, o);
            t.scalar(y)
        };
        fn build(t: &mut Tape, x: Var, b: Var, o: Var) -> Var {
            let h = t.add_row(x, b).unwrap();
            let h = t.leaky_relu(h, 0.2);
            let h = t.concat_cols(h, o).unwrap();
            let s = t.sigmoid(h);
            let one_minus = t.const_sub(1.0, s);
            let l1 = t.log(one_minus).unwrap();
            let l2 = t.log(s).unwrap();
            let e = t.exp(l2);
            let c = t.clip(e, 0.1, 0.9);
            let m = t.sub(l1, c).unwrap();
            let m = t.scale(m, -0.7);
            t.mean(m)
        }
        let mut t = Tape::new();
        let x = t.leaf(x0.clone());
        let b = t.leaf(bias0.clone());
        let o = t.leaf(other0.clone());
        let y = build(&mut t, x, b, o);
        t.backward(y).unwrap();
        assert_close(t.grad(x).unwrap(), &numeric_grad(&x0, |v| f(v, &bias0)), 1e-5, 1e-8);
        assert_close(t.grad(b).unwrap(), &numeric_grad(&bias0, |v| f(&x0, v)), 1e-5, 1e-8);
    }

    #[test]
    fn backward_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let w0 = randn(&mut rng, 3, 3);
        let grad_of = |a: f64, b: f64| {
            let mut t = Tape::new();
            let w = t.leaf(w0.clone());
            let sq = t.mul(w, w).unwrap();
            let f = t.sum(sq);
            let e = t.exp(w);
            let g = t.mean(e);
            let fa = t.scale(f, a);
            let gb = t.scale(g, b);
            let total = t.add(fa, gb).unwrap();
            t.backward(total).unwrap();
            t.grad(w).unwrap().clone()
        };
        let (a, b) = (1.7, -0.4);
        let combined = grad_of(a, b);
        let separate = grad_of(1.0, 0.0).scale(a).add(&grad_of(0.0, 1.0).scale(b)).unwrap();
        assert!(combined.max_abs_diff(&separate) < 1e-12);
    }
}
