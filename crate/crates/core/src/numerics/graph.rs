//! Tape-based reverse-mode differentiation over [`Tensor`] values.
//!
//! Nodes are appended in evaluation order, so every node's inputs have
//! smaller ids than the node itself and a reverse sweep over ids visits each
//! node after all of its consumers.

use crate::error::{Error, Result};
use crate::numerics::tensor::{Real, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Batch normalization mode. Eval mode normalizes with the supplied running statistics.
#[derive(Clone, Copy, Debug)]
pub enum BnMode<'a, T> {
    Train { eps: T },
    Eval { mean: &'a [T], var: &'a [T], eps: T },
}

/// Per-feature statistics of one train-mode batch (biased variance).
#[derive(Clone, Debug, PartialEq)]
pub struct BatchStats<T> {
    pub mean: Vec<T>,
    pub var: Vec<T>,
}

#[derive(Debug)]
enum Op<T> {
    Constant,
    Param,
    Dense { x: NodeId, w: NodeId, b: NodeId },
    LeakyRelu { x: NodeId, slope: T },
    BatchNorm { x: NodeId, gamma: NodeId, beta: NodeId, xhat: Vec<T>, inv_std: Vec<T>, train: bool },
    Sigmoid { x: NodeId },
    Softplus { x: NodeId },
    Abs { x: NodeId },
    Add { a: NodeId, b: NodeId },
    Sub { a: NodeId, b: NodeId },
    Mul { a: NodeId, b: NodeId },
    MulConst { x: NodeId, mask: Vec<T> },
    Scale { x: NodeId, k: T },
    Mean { x: NodeId },
    Sum { x: NodeId },
    ConcatCols { a: NodeId, b: NodeId },
    ConcatRows { parts: Vec<NodeId> },
    SliceRows { x: NodeId, start: usize, len: usize },
}

#[derive(Debug)]
struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
    needs_grad: bool,
}

#[derive(Debug, Default)]
pub struct Graph<T: Real> {
    nodes: Vec<Node<T>>,
}

/// Gradients of a scalar with respect to every node that needed one.
#[derive(Debug)]
pub struct Gradients<T> {
    grads: Vec<Option<Vec<T>>>,
    shapes: Vec<Vec<usize>>,
}

impl<T: Real> Gradients<T> {
    /// Gradient for `id`; zeros when the loss does not depend on it.
    pub fn get(&self, id: NodeId) -> Tensor<T> {
        let shape = self.shapes[id.0].clone();
        match &self.grads[id.0] {
            Some(g) => Tensor::new(shape, g.clone()).expect("gradient shape"),
            None => Tensor::zeros(shape),
        }
    }
}

fn sigmoid<T: Real>(v: T) -> T {
    if v >= T::zero() {
        T::one() / (T::one() + (-v).exp())
    } else {
        let e = v.exp();
        e / (T::one() + e)
    }
}

fn softplus<T: Real>(v: T) -> T {
    v.max(T::zero()) + (-v.abs()).exp().ln_1p()
}

impl<T: Real> Graph<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor<T> {
        &self.nodes[id.0].value
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>, needs_grad: bool) -> NodeId {
        self.nodes.push(Node { value, op, needs_grad });
        NodeId(self.nodes.len() - 1)
    }

    fn ng(&self, id: NodeId) -> bool {
        self.nodes[id.0].needs_grad
    }

    /// A value that never receives a gradient.
    pub fn constant(&mut self, value: Tensor<T>) -> NodeId {
        self.push(value, Op::Constant, false)
    }

    /// A leaf the backward pass produces a gradient for.
    pub fn param(&mut self, value: Tensor<T>) -> NodeId {
        self.push(value, Op::Param, true)
    }

    /// `y = x·W + b` with `x: [batch, in]` (or `[in]`), `W: [in, out]`, `b: [out]`.
    pub fn dense(&mut self, x: NodeId, w: NodeId, b: NodeId) -> Result<NodeId> {
        let (xv, wv, bv) = (self.value(x), self.value(w), self.value(b));
        if wv.shape().len() != 2 {
            return Err(Error::dim(format!("dense weight must be 2-D, got {:?}", wv.shape())));
        }
        let (fan_in, fan_out) = (wv.shape()[0], wv.shape()[1]);
        if xv.cols() != fan_in || xv.shape().len() > 2 {
            return Err(Error::dim(format!(
                "dense input {:?} does not conform to weight {:?}",
                xv.shape(),
                wv.shape()
            )));
        }
        if bv.len() != fan_out {
            return Err(Error::dim(format!(
                "dense bias has {} values, expected {fan_out}",
                bv.len()
            )));
        }
        let batch = xv.rows();
        let mut out = Vec::with_capacity(batch * fan_out);
        for _ in 0..batch {
            out.extend_from_slice(bv.data());
        }
        T::gemm(
            batch,
            fan_in,
            fan_out,
            xv.data(),
            (fan_in as isize, 1),
            wv.data(),
            (fan_out as isize, 1),
            T::one(),
            &mut out,
        );
        let shape = if xv.shape().len() == 1 {
            vec![fan_out]
        } else {
            vec![batch, fan_out]
        };
        let ng = self.ng(x) || self.ng(w) || self.ng(b);
        Ok(self.push(Tensor::new(shape, out)?, Op::Dense { x, w, b }, ng))
    }

    /// Elementwise `max(x, slope·x)` for `slope` in (0, 1).
    pub fn leaky_relu(&mut self, x: NodeId, slope: T) -> NodeId {
        let v = self.value(x).map(|v| if v > T::zero() { v } else { v * slope });
        let ng = self.ng(x);
        self.push(v, Op::LeakyRelu { x, slope }, ng)
    }

    /// Per-feature normalization of `x: [batch, features]` followed by `gamma·x̂ + beta`.
    ///
    /// Train mode returns the batch statistics so callers can fold them into
    /// running averages.
    pub fn batch_norm(
        &mut self,
        x: NodeId,
        gamma: NodeId,
        beta: NodeId,
        mode: BnMode<'_, T>,
    ) -> Result<(NodeId, Option<BatchStats<T>>)> {
        let xv = self.value(x);
        let (rows, cols) = (xv.rows(), xv.cols());
        if self.value(gamma).len() != cols || self.value(beta).len() != cols {
            return Err(Error::dim(format!(
                "batch norm over {cols} features with gamma/beta of {}/{}",
                self.value(gamma).len(),
                self.value(beta).len()
            )));
        }
        let (mean, var, eps, train) = match mode {
            BnMode::Train { eps } => {
                if rows < 2 {
                    return Err(Error::DegenerateBatch(rows));
                }
                let n = T::from_usize(rows).unwrap();
                let mut mean = vec![T::zero(); cols];
                for r in 0..rows {
                    for (m, &v) in mean.iter_mut().zip(xv.row(r)) {
                        *m = *m + v;
                    }
                }
                mean.iter_mut().for_each(|m| *m = *m / n);
                let mut var = vec![T::zero(); cols];
                for r in 0..rows {
                    for ((s, &v), &m) in var.iter_mut().zip(xv.row(r)).zip(&mean) {
                        *s = *s + (v - m) * (v - m);
                    }
                }
                var.iter_mut().for_each(|s| *s = *s / n);
                (mean, var, eps, true)
            }
            BnMode::Eval { mean, var, eps } => {
                if mean.len() != cols || var.len() != cols {
                    return Err(Error::dim("running statistics do not match feature count"));
                }
                (mean.to_vec(), var.to_vec(), eps, false)
            }
        };
        let inv_std: Vec<T> = var.iter().map(|&v| T::one() / (v + eps).sqrt()).collect();
        let (g, b) = (self.value(gamma).data(), self.value(beta).data());
        let mut xhat = Vec::with_capacity(rows * cols);
        let mut out = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for (c, &v) in xv.row(r).iter().enumerate() {
                let h = (v - mean[c]) * inv_std[c];
                xhat.push(h);
                out.push(g[c] * h + b[c]);
            }
        }
        let value = Tensor::new(xv.shape().to_vec(), out)?;
        let ng = self.ng(x) || self.ng(gamma) || self.ng(beta);
        let id = self.push(
            value,
            Op::BatchNorm { x, gamma, beta, xhat, inv_std, train },
            ng,
        );
        Ok((id, train.then_some(BatchStats { mean, var })))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let v = self.value(x).map(sigmoid);
        let ng = self.ng(x);
        self.push(v, Op::Sigmoid { x }, ng)
    }

    /// `ln(1 + e^x)`, evaluated without overflow.
    pub fn softplus(&mut self, x: NodeId) -> NodeId {
        let v = self.value(x).map(softplus);
        let ng = self.ng(x);
        self.push(v, Op::Softplus { x }, ng)
    }

    pub fn abs(&mut self, x: NodeId) -> NodeId {
        let v = self.value(x).map(|v| v.abs());
        let ng = self.ng(x);
        self.push(v, Op::Abs { x }, ng)
    }

    fn same_shape(&self, a: NodeId, b: NodeId, what: &str) -> Result<()> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::dim(format!(
                "{what}: {:?} vs {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        Ok(())
    }

    fn zip(&mut self, a: NodeId, b: NodeId, f: impl Fn(T, T) -> T) -> Tensor<T> {
        let (av, bv) = (self.value(a), self.value(b));
        let data = av.data().iter().zip(bv.data()).map(|(&x, &y)| f(x, y)).collect();
        Tensor::new(av.shape().to_vec(), data).expect("same shape")
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.same_shape(a, b, "add")?;
        let v = self.zip(a, b, |x, y| x + y);
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(v, Op::Add { a, b }, ng))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.same_shape(a, b, "sub")?;
        let v = self.zip(a, b, |x, y| x - y);
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(v, Op::Sub { a, b }, ng))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.same_shape(a, b, "mul")?;
        let v = self.zip(a, b, |x, y| x * y);
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(v, Op::Mul { a, b }, ng))
    }

    /// Multiplies by a fixed mask, either full-size or one row broadcast over all rows.
    ///
    /// Positions where the mask is zero pass exactly zero gradient upstream.
    pub fn mul_const(&mut self, x: NodeId, mask: Vec<T>) -> Result<NodeId> {
        let xv = self.value(x);
        let full = mask.len() == xv.len();
        if !full && mask.len() != xv.cols() {
            return Err(Error::dim(format!(
                "mask of {} values for tensor {:?}",
                mask.len(),
                xv.shape()
            )));
        }
        let cols = mask.len();
        let data = xv
            .data()
            .iter()
            .enumerate()
            .map(|(i, &v)| v * mask[i % cols])
            .collect();
        let v = Tensor::new(xv.shape().to_vec(), data)?;
        let ng = self.ng(x);
        Ok(self.push(v, Op::MulConst { x, mask }, ng))
    }

    pub fn scale(&mut self, x: NodeId, k: T) -> NodeId {
        let v = self.value(x).map(|v| v * k);
        let ng = self.ng(x);
        self.push(v, Op::Scale { x, k }, ng)
    }

    pub fn mean(&mut self, x: NodeId) -> NodeId {
        let v = Tensor::scalar(self.value(x).mean());
        let ng = self.ng(x);
        self.push(v, Op::Mean { x }, ng)
    }

    pub fn sum(&mut self, x: NodeId) -> NodeId {
        let v = Tensor::scalar(self.value(x).sum());
        let ng = self.ng(x);
        self.push(v, Op::Sum { x }, ng)
    }

    /// `[batch, p] ++ [batch, q] -> [batch, p + q]`.
    pub fn concat_cols(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.rows() != bv.rows() {
            return Err(Error::dim(format!(
                "concat_cols row counts {} vs {}",
                av.rows(),
                bv.rows()
            )));
        }
        let rows = av.rows();
        let cols = av.cols() + bv.cols();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            data.extend_from_slice(av.row(r));
            data.extend_from_slice(bv.row(r));
        }
        let v = Tensor::new(vec![rows, cols], data)?;
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(v, Op::ConcatCols { a, b }, ng))
    }

    /// Stacks matrices with equal column counts.
    pub fn concat_rows(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        let cols = parts
            .first()
            .map(|&p| self.value(p).cols())
            .ok_or_else(|| Error::dim("concat_rows of nothing"))?;
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let v = self.value(p);
            if v.cols() != cols {
                return Err(Error::dim(format!(
                    "concat_rows column counts {cols} vs {}",
                    v.cols()
                )));
            }
            rows += v.rows();
            data.extend_from_slice(v.data());
        }
        let v = Tensor::new(vec![rows, cols], data)?;
        let ng = parts.iter().any(|&p| self.ng(p));
        Ok(self.push(v, Op::ConcatRows { parts: parts.to_vec() }, ng))
    }

    pub fn slice_rows(&mut self, x: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let xv = self.value(x);
        if start + len > xv.rows() {
            return Err(Error::dim(format!(
                "rows {start}..{} of a {}-row tensor",
                start + len,
                xv.rows()
            )));
        }
        let c = xv.cols();
        let v = Tensor::new(vec![len, c], xv.data()[start * c..(start + len) * c].to_vec())?;
        let ng = self.ng(x);
        Ok(self.push(v, Op::SliceRows { x, start, len }, ng))
    }

    /// Reverse sweep from a single-element `loss`.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients<T>> {
        if self.value(loss).len() != 1 {
            return Err(Error::dim(format!(
                "backward needs a scalar, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        let mut grads: Vec<Option<Vec<T>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![T::one()]);

        for id in (0..=loss.0).rev() {
            let Some(dy) = grads[id].take() else { continue };
            let node = &self.nodes[id];
            if !node.needs_grad {
                continue;
            }
            self.propagate(id, &dy, &mut grads);
            grads[id] = Some(dy);
        }
        Ok(Gradients {
            grads,
            shapes: self.nodes.iter().map(|n| n.value.shape().to_vec()).collect(),
        })
    }

    fn slot<'g>(&self, grads: &'g mut [Option<Vec<T>>], id: NodeId) -> Option<&'g mut Vec<T>> {
        if !self.ng(id) {
            return None;
        }
        let len = self.value(id).len();
        Some(grads[id.0].get_or_insert_with(|| vec![T::zero(); len]))
    }

    fn accumulate(
        &self,
        grads: &mut [Option<Vec<T>>],
        id: NodeId,
        contrib: impl Iterator<Item = T>,
    ) {
        if let Some(g) = self.slot(grads, id) {
            for (gi, c) in g.iter_mut().zip(contrib) {
                *gi = *gi + c;
            }
        }
    }

    fn propagate(&self, id: usize, dy: &[T], grads: &mut [Option<Vec<T>>]) {
        let node = &self.nodes[id];
        match &node.op {
            Op::Constant | Op::Param => {}
            Op::Dense { x, w, b } => {
                let xv = self.value(*x);
                let (fan_in, fan_out) = (self.value(*w).shape()[0], self.value(*w).shape()[1]);
                let batch = xv.rows();
                if let Some(gx) = self.slot(grads, *x) {
                    // dx = dy · Wᵀ
                    T::gemm(
                        batch,
                        fan_out,
                        fan_in,
                        dy,
                        (fan_out as isize, 1),
                        self.value(*w).data(),
                        (1, fan_out as isize),
                        T::one(),
                        gx,
                    );
                }
                if let Some(gw) = self.slot(grads, *w) {
                    // dW = xᵀ · dy
                    T::gemm(
                        fan_in,
                        batch,
                        fan_out,
                        xv.data(),
                        (1, fan_in as isize),
                        dy,
                        (fan_out as isize, 1),
                        T::one(),
                        gw,
                    );
                }
                if let Some(gb) = self.slot(grads, *b) {
                    for r in 0..batch {
                        for (g, &d) in gb.iter_mut().zip(&dy[r * fan_out..(r + 1) * fan_out]) {
                            *g = *g + d;
                        }
                    }
                }
            }
            Op::LeakyRelu { x, slope } => {
                let xv = self.value(*x).data();
                let s = *slope;
                self.accumulate(
                    grads,
                    *x,
                    xv.iter()
                        .zip(dy)
                        .map(|(&v, &d)| if v > T::zero() { d } else { d * s }),
                );
            }
            Op::BatchNorm { x, gamma, beta, xhat, inv_std, train } => {
                let cols = inv_std.len();
                let rows = xhat.len() / cols;
                let g = self.value(*gamma).data();
                let mut sum_dy = vec![T::zero(); cols];
                let mut sum_dy_xhat = vec![T::zero(); cols];
                for r in 0..rows {
                    for c in 0..cols {
                        let d = dy[r * cols + c];
                        sum_dy[c] = sum_dy[c] + d;
                        sum_dy_xhat[c] = sum_dy_xhat[c] + d * xhat[r * cols + c];
                    }
                }
                if let Some(gg) = self.slot(grads, *gamma) {
                    for c in 0..cols {
                        gg[c] = gg[c] + sum_dy_xhat[c];
                    }
                }
                if let Some(gb) = self.slot(grads, *beta) {
                    for c in 0..cols {
                        gb[c] = gb[c] + sum_dy[c];
                    }
                }
                if let Some(gx) = self.slot(grads, *x) {
                    if *train {
                        let n = T::from_usize(rows).unwrap();
                        for r in 0..rows {
                            for c in 0..cols {
                                let i = r * cols + c;
                                // dx = γ·inv_std/N · (N·dy − Σdy − x̂·Σ(dy·x̂))
                                let v = g[c] * inv_std[c] / n
                                    * (n * dy[i] - sum_dy[c] - xhat[i] * sum_dy_xhat[c]);
                                gx[i] = gx[i] + v;
                            }
                        }
                    } else {
                        for r in 0..rows {
                            for c in 0..cols {
                                let i = r * cols + c;
                                gx[i] = gx[i] + dy[i] * g[c] * inv_std[c];
                            }
                        }
                    }
                }
            }
            Op::Sigmoid { x } => {
                let yv = node.value.data();
                self.accumulate(
                    grads,
                    *x,
                    yv.iter().zip(dy).map(|(&y, &d)| d * y * (T::one() - y)),
                );
            }
            Op::Softplus { x } => {
                let xv = self.value(*x).data();
                self.accumulate(grads, *x, xv.iter().zip(dy).map(|(&v, &d)| d * sigmoid(v)));
            }
            Op::Abs { x } => {
                let xv = self.value(*x).data();
                self.accumulate(
                    grads,
                    *x,
                    xv.iter().zip(dy).map(|(&v, &d)| {
                        if v > T::zero() {
                            d
                        } else if v < T::zero() {
                            -d
                        } else {
                            T::zero()
                        }
                    }),
                );
            }
            Op::Add { a, b } => {
                self.accumulate(grads, *a, dy.iter().copied());
                self.accumulate(grads, *b, dy.iter().copied());
            }
            Op::Sub { a, b } => {
                self.accumulate(grads, *a, dy.iter().copied());
                self.accumulate(grads, *b, dy.iter().map(|&d| -d));
            }
            Op::Mul { a, b } => {
                let (av, bv) = (self.value(*a).data(), self.value(*b).data());
                self.accumulate(grads, *a, dy.iter().zip(bv).map(|(&d, &v)| d * v));
                self.accumulate(grads, *b, dy.iter().zip(av).map(|(&d, &v)| d * v));
            }
            Op::MulConst { x, mask } => {
                let cols = mask.len();
                self.accumulate(
                    grads,
                    *x,
                    dy.iter().enumerate().map(|(i, &d)| d * mask[i % cols]),
                );
            }
            Op::Scale { x, k } => {
                self.accumulate(grads, *x, dy.iter().map(|&d| d * *k));
            }
            Op::Mean { x } => {
                let n = self.value(*x).len();
                let d = dy[0] / T::from_usize(n.max(1)).unwrap();
                self.accumulate(grads, *x, std::iter::repeat_n(d, n));
            }
            Op::Sum { x } => {
                let n = self.value(*x).len();
                self.accumulate(grads, *x, std::iter::repeat_n(dy[0], n));
            }
            Op::ConcatCols { a, b } => {
                let (ca, cb) = (self.value(*a).cols(), self.value(*b).cols());
                let cols = ca + cb;
                let rows = dy.len() / cols;
                self.accumulate(
                    grads,
                    *a,
                    (0..rows).flat_map(|r| dy[r * cols..r * cols + ca].iter().copied()),
                );
                self.accumulate(
                    grads,
                    *b,
                    (0..rows).flat_map(|r| dy[r * cols + ca..(r + 1) * cols].iter().copied()),
                );
            }
            Op::ConcatRows { parts } => {
                let mut offset = 0;
                for &p in parts {
                    let len = self.value(p).len();
                    self.accumulate(grads, p, dy[offset..offset + len].iter().copied());
                    offset += len;
                }
            }
            Op::SliceRows { x, start, len } => {
                let cols = self.value(*x).cols();
                if let Some(gx) = self.slot(grads, *x) {
                    let base = start * cols;
                    for (i, &d) in dy.iter().enumerate().take(len * cols) {
                        gx[base + i] = gx[base + i] + d;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(shape: &[usize], data: &[f64]) -> Tensor<f64> {
        Tensor::new(shape.to_vec(), data.to_vec()).unwrap()
    }

    #[test]
    fn dense_identity_and_hand_arithmetic() {
        let mut g = Graph::<f64>::new();
        let x = g.constant(t(&[2], &[1.0, 0.0]));
        let w = g.constant(t(&[2, 2], &[1.0, 0.0, 0.0, 1.0]));
        let b = g.constant(t(&[2], &[0.0, 0.0]));
        let y = g.dense(x, w, b).unwrap();
        assert_eq!(g.value(y).data(), &[1.0, 0.0]);

        let x = g.constant(t(&[2], &[1.0, 1.0]));
        let w = g.constant(t(&[2, 2], &[1.0, 2.0, 3.0, 4.0]));
        let y = g.dense(x, w, b).unwrap();
        assert_eq!(g.value(y).data(), &[4.0, 6.0]);
    }

    #[test]
    fn dense_rejects_nonconforming_input() {
        let mut g = Graph::<f64>::new();
        let x = g.constant(t(&[3], &[1.0, 2.0, 3.0]));
        let w = g.constant(Tensor::zeros(vec![2, 2]));
        let b = g.constant(Tensor::zeros(vec![2]));
        assert!(matches!(g.dense(x, w, b), Err(Error::Dimension(_))));
    }

    #[test]
    fn leaky_relu_values_and_gradient() {
        let mut g = Graph::<f64>::new();
        let x = g.param(t(&[2], &[-1.0, 2.0]));
        let y = g.leaky_relu(x, 0.2);
        assert_eq!(g.value(y).data(), &[-0.2, 2.0]);
        let s = g.sum(y);
        let grads = g.backward(s).unwrap();
        assert_eq!(grads.get(x).data(), &[0.2, 1.0]);

        let z = g.constant(t(&[1], &[0.0]));
        let y = g.leaky_relu(z, 0.7);
        assert_eq!(g.value(y).data(), &[0.0]);
    }

    fn bn(x: Tensor<f64>, gamma: f64, beta: f64) -> Tensor<f64> {
        let cols = x.cols();
        let mut g = Graph::<f64>::new();
        let x = g.constant(x);
        let ga = g.constant(Tensor::full(vec![cols], gamma));
        let be = g.constant(Tensor::full(vec![cols], beta));
        let (y, stats) = g.batch_norm(x, ga, be, BnMode::Train { eps: 1e-5 }).unwrap();
        assert!(stats.is_some());
        g.value(y).clone()
    }

    #[test]
    fn batch_norm_examples() {
        let y = bn(t(&[3, 1], &[4.0, 4.0, 4.0]), 1.0, 0.0);
        assert!(y.data().iter().all(|&v| v == 0.0));

        let y = bn(t(&[2, 1], &[-1.0, 1.0]), 1.0, 0.0);
        assert!((y.data()[0] + 1.0).abs() < 1e-4 && (y.data()[1] - 1.0).abs() < 1e-4);

        let y = bn(t(&[2, 1], &[-1.0, 1.0]), 2.0, 3.0);
        assert!((y.data()[0] - 1.0).abs() < 1e-4 && (y.data()[1] - 5.0).abs() < 1e-4);
    }

    #[test]
    fn batch_norm_rejects_single_row_in_train_mode() {
        let mut g = Graph::<f64>::new();
        let x = g.constant(t(&[1, 2], &[1.0, 2.0]));
        let ga = g.constant(Tensor::full(vec![2], 1.0));
        let be = g.constant(Tensor::zeros(vec![2]));
        let err = g.batch_norm(x, ga, be, BnMode::Train { eps: 1e-5 }).unwrap_err();
        assert!(matches!(err, Error::DegenerateBatch(1)));
        let (mean, var) = ([0.0, 0.0], [1.0, 1.0]);
        let eval = BnMode::Eval { mean: &mean, var: &var, eps: 0.0 };
        let (y, stats) = g.batch_norm(x, ga, be, eval).unwrap();
        assert!(stats.is_none());
        assert_eq!(g.value(y).data(), &[1.0, 2.0]);
    }

    #[test]
    fn mask_blocks_gradient() {
        let mut g = Graph::<f64>::new();
        let x = g.param(t(&[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
        let y = g.mul_const(x, vec![1.0, 0.0, 1.0]).unwrap();
        let sq = g.mul(y, y).unwrap();
        let s = g.sum(sq);
        let grads = g.backward(s).unwrap();
        assert_eq!(grads.get(x).data(), &[2.0, 0.0, 6.0, 8.0, 0.0, 12.0]);
    }

    #[test]
    fn backward_requires_scalar() {
        let mut g = Graph::<f64>::new();
        let x = g.param(t(&[2], &[1.0, 2.0]));
        assert!(g.backward(x).is_err());
    }

    #[test]
    fn slices_and_concats_route_gradients() {
        let mut g = Graph::<f64>::new();
        let a = g.param(t(&[2, 1], &[1.0, 2.0]));
        let b = g.param(t(&[2, 2], &[3.0, 4.0, 5.0, 6.0]));
        let c = g.concat_cols(a, b).unwrap();
        assert_eq!(g.value(c).data(), &[1.0, 3.0, 4.0, 2.0, 5.0, 6.0]);
        let r = g.concat_rows(&[c, c]).unwrap();
        let s1 = g.slice_rows(r, 1, 2).unwrap();
        let w = g.constant(t(&[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
        let p = g.mul(s1, w).unwrap();
        let s = g.sum(p);
        let grads = g.backward(s).unwrap();
        // row 1 of r is row 1 of c (weights 1,2,3); row 2 is row 0 of c (weights 4,5,6)
        assert_eq!(grads.get(a).data(), &[4.0, 1.0]);
        assert_eq!(grads.get(b).data(), &[5.0, 6.0, 2.0, 3.0]);
    }
}
