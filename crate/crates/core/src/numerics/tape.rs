//! Tape-based reverse-mode differentiation over [`Tensor`]s.
//!
//! Every op appends a node holding its forward value and the ids of its
//! inputs. Because inputs always precede their consumers in the node list,
//! walking the list backwards visits each node only after every consumer has
//! pushed its contribution, and contributions from multiple consumers sum.

use std::collections::HashMap;
use std::ops::Range;

use super::param::Param;
use super::tensor::{matmul_a_bt_into, matmul_at_b_into, Tensor};
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    Scale(Var, f64),
    Relu(Var),
    Sigmoid(Var),
    Tanh(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    SliceCols(Var, usize),
    Gather(Var, Vec<usize>),
    /// Per output element: the winning input row, `usize::MAX` for empty segments.
    SegmentMax(Var, Vec<usize>),
    /// Per row: the winning column.
    RowMin(Var, Vec<usize>),
    RowNorm(Var),
    Sum(Var),
    Mean(Var),
    BceWithLogits(Var, f64),
}

struct Node {
    value: Tensor,
    op: Op,
}

/// Recording of one forward computation.
pub struct Tape {
    nodes: Vec<Node>,
    params: HashMap<String, Var>,
    grads: Vec<Option<Tensor>>,
    kink_margin: f64,
    kink_sig: u64,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0100_0000_01b3;

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            params: HashMap::new(),
            grads: Vec::new(),
            kink_margin: f64::INFINITY,
            kink_sig: FNV_OFFSET,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Smallest distance seen so far between an input of a non-smooth op
    /// (relu, max, min, norm) and its switching point. Finite-difference
    /// checks are only meaningful when this exceeds the probe step.
    pub fn min_kink_margin(&self) -> f64 {
        self.kink_margin
    }

    /// Hash of every branch taken by the non-smooth ops so far (relu signs,
    /// max and min winners). Two evaluations with equal signatures ran through
    /// the same smooth piece of the function.
    pub fn kink_signature(&self) -> u64 {
        self.kink_sig
    }

    fn mix(&mut self, word: u64) {
        self.kink_sig = (self.kink_sig ^ word).wrapping_mul(FNV_PRIME);
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf)
    }

    /// Binds a parameter. Repeated binds of the same name share one node.
    pub fn param(&mut self, p: &Param) -> Var {
        if let Some(&v) = self.params.get(p.name()) {
            return v;
        }
        let v = self.leaf(p.value().clone());
        self.params.insert(p.name().to_owned(), v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        Ok(self.push(value, Op::MatMul(a, b)))
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::Dimension {
                op,
                lhs: self.shape(a),
                rhs: self.shape(b),
            });
        }
        Ok(())
    }

    fn zip(&self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Tensor {
        let (ta, tb) = (self.value(a), self.value(b));
        let data = ta
            .data()
            .iter()
            .zip(tb.data())
            .map(|(&x, &y)| f(x, y))
            .collect();
        Tensor::new(ta.rows(), ta.cols(), data).expect("shape checked")
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("add", a, b)?;
        let value = self.zip(a, b, |x, y| x + y);
        Ok(self.push(value, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("sub", a, b)?;
        let value = self.zip(a, b, |x, y| x - y);
        Ok(self.push(value, Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mul", a, b)?;
        let value = self.zip(a, b, |x, y| x * y);
        Ok(self.push(value, Op::Mul(a, b)))
    }

    /// Adds a `1 x c` row to every row of `x`.
    pub fn add_row(&mut self, x: Var, row: Var) -> Result<Var> {
        let (xs, rs) = (self.shape(x), self.shape(row));
        if rs.0 != 1 || rs.1 != xs.1 {
            return Err(Error::Dimension {
                op: "add_row",
                lhs: xs,
                rhs: rs,
            });
        }
        let mut value = self.value(x).clone();
        let r = self.value(row).data().to_vec();
        for i in 0..xs.0 {
            for (v, b) in value.row_slice_mut(i).iter_mut().zip(&r) {
                *v += b;
            }
        }
        Ok(self.push(value, Op::AddRow(x, row)))
    }

    pub fn scale(&mut self, x: Var, k: f64) -> Var {
        let value = self.value(x).map(|v| v * k);
        self.push(value, Op::Scale(x, k))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let margin = t.data().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        let value = t.map(|v| if v > 0.0 { v } else { 0.0 });
        let signs: Vec<u64> = t
            .data()
            .chunks(64)
            .map(|c| {
                c.iter()
                    .enumerate()
                    .fold(0u64, |w, (k, &v)| w | (u64::from(v > 0.0) << k))
            })
            .collect();
        signs.into_iter().for_each(|w| self.mix(w));
        self.kink_margin = self.kink_margin.min(margin);
        self.push(value, Op::Relu(x))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let value = self.value(x).map(sigmoid);
        self.push(value, Op::Sigmoid(x))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let value = self.value(x).map(f64::tanh);
        self.push(value, Op::Tanh(x))
    }

    /// Concatenates along the feature (column) axis. Zero-width parts are allowed.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts.first().ok_or(Error::Empty("concat_cols"))?;
        let rows = self.shape(first).0;
        let mut cols = 0;
        for &p in parts {
            let s = self.shape(p);
            if s.0 != rows {
                return Err(Error::Dimension {
                    op: "concat_cols",
                    lhs: self.shape(first),
                    rhs: s,
                });
            }
            cols += s.1;
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.value(p).row_slice(r));
            }
        }
        let value = Tensor::new(rows, cols, data)?;
        Ok(self.push(value, Op::ConcatCols(parts.to_vec())))
    }

    /// Stacks along the row axis.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts.first().ok_or(Error::Empty("concat_rows"))?;
        let cols = self.shape(first).1;
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let s = self.shape(p);
            if s.1 != cols {
                return Err(Error::Dimension {
                    op: "concat_rows",
                    lhs: self.shape(first),
                    rhs: s,
                });
            }
            rows += s.0;
            data.extend_from_slice(self.value(p).data());
        }
        let value = Tensor::new(rows, cols, data)?;
        Ok(self.push(value, Op::ConcatRows(parts.to_vec())))
    }

    pub fn slice_cols(&mut self, x: Var, cols: Range<usize>) -> Result<Var> {
        let s = self.shape(x);
        if cols.start > cols.end || cols.end > s.1 {
            return Err(Error::Dimension {
                op: "slice_cols",
                lhs: s,
                rhs: (cols.start, cols.end),
            });
        }
        let t = self.value(x);
        let mut data = Vec::with_capacity(s.0 * cols.len());
        for r in 0..s.0 {
            data.extend_from_slice(&t.row_slice(r)[cols.clone()]);
        }
        let value = Tensor::new(s.0, cols.len(), data)?;
        Ok(self.push(value, Op::SliceCols(x, cols.start)))
    }

    /// Selects rows by index (repeats allowed).
    pub fn gather(&mut self, x: Var, rows: &[usize]) -> Result<Var> {
        let s = self.shape(x);
        let t = self.value(x);
        let mut data = Vec::with_capacity(rows.len() * s.1);
        for &r in rows {
            if r >= s.0 {
                return Err(Error::Index { index: r, len: s.0 });
            }
            data.extend_from_slice(t.row_slice(r));
        }
        let value = Tensor::new(rows.len(), s.1, data)?;
        Ok(self.push(value, Op::Gather(x, rows.to_vec())))
    }

    /// Elementwise maximum over each contiguous row segment. Output row `k`
    /// is the max over `x[segments[k]]`; empty segments yield zeros. Ties go
    /// to the lowest row index.
    pub fn segment_max(&mut self, x: Var, segments: &[Range<usize>]) -> Result<Var> {
        let s = self.shape(x);
        let t = self.value(x);
        let c = s.1;
        let mut value = Tensor::zeros(segments.len(), c);
        let mut arg = vec![usize::MAX; segments.len() * c];
        let mut margin = f64::INFINITY;
        for (k, seg) in segments.iter().enumerate() {
            if seg.end > s.0 || seg.start > seg.end {
                return Err(Error::Index {
                    index: seg.end,
                    len: s.0,
                });
            }
            if seg.is_empty() {
                continue;
            }
            for col in 0..c {
                let mut best = seg.start;
                let mut best_v = t.get(seg.start, col);
                let mut second = f64::NEG_INFINITY;
                for r in seg.start + 1..seg.end {
                    let v = t.get(r, col);
                    if v > best_v {
                        second = best_v;
                        best_v = v;
                        best = r;
                    } else if v > second {
                        second = v;
                    }
                }
                let gap = best_v - second;
                if gap > 0.0 {
                    margin = margin.min(gap);
                }
                value.set(k, col, best_v);
                arg[k * c + col] = best;
            }
        }
        self.kink_margin = self.kink_margin.min(margin);
        arg.iter().for_each(|&a| self.mix(a as u64));
        Ok(self.push(value, Op::SegmentMax(x, arg)))
    }

    /// Elementwise maximum across a non-empty set of equal-width rows.
    pub fn max_over_set(&mut self, rows: &[Var]) -> Result<Var> {
        if rows.is_empty() {
            return Err(Error::Empty("max_over_set"));
        }
        let stacked = self.concat_rows(rows)?;
        let n = self.shape(stacked).0;
        self.segment_max(stacked, &[0..n])
    }

    /// Minimum of each row, as an `n x 1` column. Ties go to the lowest column.
    pub fn row_min(&mut self, x: Var) -> Result<Var> {
        let (n, c) = self.shape(x);
        if c == 0 {
            return Err(Error::Empty("row_min"));
        }
        let t = self.value(x);
        let mut out = Vec::with_capacity(n);
        let mut arg = Vec::with_capacity(n);
        let mut margin = f64::INFINITY;
        for r in 0..n {
            let row = t.row_slice(r);
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v < row[best] {
                    best = j;
                }
            }
            for (j, &v) in row.iter().enumerate() {
                let gap = v - row[best];
                if j != best && gap > 0.0 {
                    margin = margin.min(gap);
                }
            }
            out.push(row[best]);
            arg.push(best);
        }
        self.kink_margin = self.kink_margin.min(margin);
        arg.iter().for_each(|&a| self.mix(a as u64));
        let value = Tensor::new(n, 1, out)?;
        Ok(self.push(value, Op::RowMin(x, arg)))
    }

    /// Euclidean norm of each row, as an `n x 1` column.
    pub fn row_norm(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let data: Vec<f64> = (0..t.rows())
            .map(|r| t.row_slice(r).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        let margin = data.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        let value = Tensor::new(t.rows(), 1, data).expect("column");
        self.kink_margin = self.kink_margin.min(margin);
        self.push(value, Op::RowNorm(x))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s = compensated_sum(self.value(x).data());
        self.push(Tensor::scalar(s), Op::Sum(x))
    }

    /// Mean of all entries; the mean of an empty tensor is 0.
    pub fn mean(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let m = if t.is_empty() {
            0.0
        } else {
            compensated_sum(t.data()) / t.len() as f64
        };
        self.push(Tensor::scalar(m), Op::Mean(x))
    }

    /// Elementwise binary cross-entropy of logits against a fixed label.
    pub fn bce_with_logits(&mut self, logits: Var, label: f64) -> Var {
        let value = self.value(logits).map(|l| bce_with_logits(l, label));
        self.push(value, Op::BceWithLogits(logits, label))
    }

    /// Runs reverse accumulation from a `1 x 1` output.
    pub fn backward(&mut self, output: Var) -> Result<()> {
        if self.shape(output) != (1, 1) {
            return Err(Error::Dimension {
                op: "backward",
                lhs: self.shape(output),
                rhs: (1, 1),
            });
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[output.0] = Some(Tensor::scalar(1.0));
        for i in (0..=output.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            self.propagate(i, &g, &mut grads);
            grads[i] = Some(g);
        }
        self.grads = grads;
        Ok(())
    }

    /// Gradient of the last `backward` output w.r.t. `v`, if `v` contributed.
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient w.r.t. a bound parameter.
    pub fn param_grad(&self, name: &str) -> Option<&Tensor> {
        self.params.get(name).and_then(|&v| self.grad(v))
    }

    fn propagate(&self, i: usize, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let node = &self.nodes[i];
        let val = &node.value;
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let ga = slot(grads, *a, ta.shape());
                matmul_a_bt_into(g, tb, ga);
                let gb = slot(grads, *b, tb.shape());
                matmul_at_b_into(ta, g, gb);
            }
            Op::Add(a, b) => {
                slot(grads, *a, g.shape()).add_assign(g);
                slot(grads, *b, g.shape()).add_assign(g);
            }
            Op::Sub(a, b) => {
                slot(grads, *a, g.shape()).add_assign(g);
                let gb = slot(grads, *b, g.shape());
                for (o, v) in gb.data_mut().iter_mut().zip(g.data()) {
                    *o -= v;
                }
            }
            Op::Mul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let ga = slot(grads, *a, g.shape());
                for ((o, gv), bv) in ga.data_mut().iter_mut().zip(g.data()).zip(tb.data()) {
                    *o += gv * bv;
                }
                let gb = slot(grads, *b, g.shape());
                for ((o, gv), av) in gb.data_mut().iter_mut().zip(g.data()).zip(ta.data()) {
                    *o += gv * av;
                }
            }
            Op::AddRow(x, row) => {
                slot(grads, *x, g.shape()).add_assign(g);
                let gr = slot(grads, *row, (1, g.cols()));
                for r in 0..g.rows() {
                    for (o, v) in gr.data_mut().iter_mut().zip(g.row_slice(r)) {
                        *o += v;
                    }
                }
            }
            Op::Scale(x, k) => {
                let gx = slot(grads, *x, g.shape());
                for (o, v) in gx.data_mut().iter_mut().zip(g.data()) {
                    *o += k * v;
                }
            }
            Op::Relu(x) => {
                let tx = self.value(*x);
                let gx = slot(grads, *x, g.shape());
                for ((o, gv), xv) in gx.data_mut().iter_mut().zip(g.data()).zip(tx.data()) {
                    if *xv > 0.0 {
                        *o += gv;
                    }
                }
            }
            Op::Sigmoid(x) => {
                let gx = slot(grads, *x, g.shape());
                for ((o, gv), y) in gx.data_mut().iter_mut().zip(g.data()).zip(val.data()) {
                    *o += gv * y * (1.0 - y);
                }
            }
            Op::Tanh(x) => {
                let gx = slot(grads, *x, g.shape());
                for ((o, gv), y) in gx.data_mut().iter_mut().zip(g.data()).zip(val.data()) {
                    *o += gv * (1.0 - y * y);
                }
            }
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                for p in parts {
                    let s = self.shape(*p);
                    let gp = slot(grads, *p, s);
                    for r in 0..s.0 {
                        let src = &g.row_slice(r)[offset..offset + s.1];
                        for (o, v) in gp.row_slice_mut(r).iter_mut().zip(src) {
                            *o += v;
                        }
                    }
                    offset += s.1;
                }
            }
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                for p in parts {
                    let s = self.shape(*p);
                    let gp = slot(grads, *p, s);
                    let n = s.0 * s.1;
                    for (o, v) in gp.data_mut().iter_mut().zip(&g.data()[offset..offset + n]) {
                        *o += v;
                    }
                    offset += n;
                }
            }
            Op::SliceCols(x, start) => {
                let s = self.shape(*x);
                let gx = slot(grads, *x, s);
                for r in 0..g.rows() {
                    let dst = &mut gx.row_slice_mut(r)[*start..*start + g.cols()];
                    for (o, v) in dst.iter_mut().zip(g.row_slice(r)) {
                        *o += v;
                    }
                }
            }
            Op::Gather(x, rows) => {
                let s = self.shape(*x);
                let gx = slot(grads, *x, s);
                for (k, &r) in rows.iter().enumerate() {
                    for (o, v) in gx.row_slice_mut(r).iter_mut().zip(g.row_slice(k)) {
                        *o += v;
                    }
                }
            }
            Op::SegmentMax(x, arg) => {
                let s = self.shape(*x);
                let gx = slot(grads, *x, s);
                let c = s.1;
                for (idx, &r) in arg.iter().enumerate() {
                    if r != usize::MAX {
                        let col = idx % c;
                        let cur = gx.get(r, col);
                        gx.set(r, col, cur + g.data()[idx]);
                    }
                }
            }
            Op::RowMin(x, arg) => {
                let s = self.shape(*x);
                let gx = slot(grads, *x, s);
                for (r, &col) in arg.iter().enumerate() {
                    let cur = gx.get(r, col);
                    gx.set(r, col, cur + g.get(r, 0));
                }
            }
            Op::RowNorm(x) => {
                let tx = self.value(*x);
                let gx = slot(grads, *x, tx.shape());
                for r in 0..tx.rows() {
                    let norm = val.get(r, 0);
                    if norm == 0.0 {
                        continue;
                    }
                    let k = g.get(r, 0) / norm;
                    for (o, v) in gx.row_slice_mut(r).iter_mut().zip(tx.row_slice(r)) {
                        *o += k * v;
                    }
                }
            }
            Op::Sum(x) => {
                let s = self.shape(*x);
                let gv = g.item();
                slot(grads, *x, s)
                    .data_mut()
                    .iter_mut()
                    .for_each(|o| *o += gv);
            }
            Op::Mean(x) => {
                let s = self.shape(*x);
                let n = (s.0 * s.1).max(1) as f64;
                let gv = g.item() / n;
                slot(grads, *x, s)
                    .data_mut()
                    .iter_mut()
                    .for_each(|o| *o += gv);
            }
            Op::BceWithLogits(x, label) => {
                let tx = self.value(*x);
                let gx = slot(grads, *x, tx.shape());
                for ((o, gv), l) in gx.data_mut().iter_mut().zip(g.data()).zip(tx.data()) {
                    *o += gv * (sigmoid(*l) - label);
                }
            }
        }
    }
}

fn slot(grads: &mut [Option<Tensor>], v: Var, shape: (usize, usize)) -> &mut Tensor {
    grads[v.0].get_or_insert_with(|| Tensor::zeros(shape.0, shape.1))
}

/// Neumaier summation; reductions feed loss values, whose last bits matter
/// for finite-difference checks.
fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Logistic function, stable for large `|x|`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-[y log σ(l) + (1-y) log(1-σ(l))]` in the form `max(l,0) - l·y + ln(1+e^{-|l|})`.
pub fn bce_with_logits(logit: f64, label: f64) -> f64 {
    logit.max(0.0) - logit * label + (-logit.abs()).exp().ln_1p()
}
