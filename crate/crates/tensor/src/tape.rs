use crate::special::{digamma, ln_gamma};
use crate::{Result, Tensor, TensorError};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    MatMul(usize, usize),
    Neg(usize),
    Exp(usize),
    Log(usize),
    Tanh(usize),
    Softplus(usize),
    LnGamma(usize),
    ClampMin(usize, f64),
    Scale(usize, f64),
    AddConst(usize, #[allow(dead_code)] f64),
    Sum(usize),
    Mean(usize),
    Pick(usize, usize),
    Gather(usize, Vec<usize>),
    Concat(Vec<usize>),
    LogSumExp(usize),
    Square(usize),
    Reshape(usize),
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::Div(..) => "div",
            Op::MatMul(..) => "matmul",
            Op::Neg(..) => "neg",
            Op::Exp(..) => "exp",
            Op::Log(..) => "log",
            Op::Tanh(..) => "tanh",
            Op::Softplus(..) => "softplus",
            Op::LnGamma(..) => "ln_gamma",
            Op::ClampMin(..) => "clamp_min",
            Op::Scale(..) => "scale",
            Op::AddConst(..) => "add_const",
            Op::Sum(..) => "sum",
            Op::Mean(..) => "mean",
            Op::Pick(..) => "pick",
            Op::Gather(..) => "gather",
            Op::Concat(..) => "concat",
            Op::LogSumExp(..) => "log_sum_exp",
            Op::Square(..) => "square",
            Op::Reshape(..) => "reshape",
        }
    }
}

struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Reverse-mode autodiff tape.
///
/// Nodes are appended in topological order (an op can only reference earlier
/// nodes), so one reverse sweep computes all gradients. A tape is single-owner
/// and is usually discarded after one backward pass.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    // first op that produced a non-finite value, if any
    failure: Option<(&'static str, usize)>,
}

/// Gradients of a scalar output with respect to tape nodes.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
}

impl Gradients {
    /// Gradient w.r.t. `var`, as a tensor of the same shape. Zero if the
    /// output does not depend on it.
    pub fn wrt(&self, tape: &Tape, var: Var) -> Tensor {
        let shape = tape.nodes[var.0].value.shape().to_vec();
        match &self.grads[var.0] {
            Some(g) => Tensor::new(shape, g.clone()),
            None => Tensor::zeros(shape),
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A differentiable leaf (network parameter).
    pub fn leaf(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, true)
    }

    /// A non-differentiable input (data, sampled action, mask product).
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, false)
    }

    pub fn constant_scalar(&mut self, v: f64) -> Var {
        self.constant(Tensor::scalar(v))
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Tensor, op: Op, needs_grad: bool) -> Var {
        if self.failure.is_none() && !value.is_finite() {
            self.failure = Some((op.name(), self.nodes.len()));
        }
        self.nodes.push(Node { value, op, needs_grad });
        Var(self.nodes.len() - 1)
    }

    fn unary(&mut self, a: Var, op: Op, f: impl Fn(f64) -> f64) -> Var {
        let vals = self.nodes[a.0].value.values().iter().map(|&x| f(x)).collect();
        let shape = self.nodes[a.0].value.shape().to_vec();
        let needs = self.nodes[a.0].needs_grad;
        self.push(Tensor::new(shape, vals), op, needs)
    }

    fn binary(&mut self, a: Var, b: Var, op: Op, f: impl Fn(f64, f64) -> f64) -> Var {
        let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        let (vals, shape) = if va.shape() == vb.shape() {
            (
                va.values().iter().zip(vb.values()).map(|(&x, &y)| f(x, y)).collect::<Vec<_>>(),
                va.shape().to_vec(),
            )
        } else if vb.is_scalar() {
            let s = vb.item();
            (va.values().iter().map(|&x| f(x, s)).collect(), va.shape().to_vec())
        } else if va.is_scalar() {
            let s = va.item();
            (vb.values().iter().map(|&y| f(s, y)).collect(), vb.shape().to_vec())
        } else {
            panic!(
                "{} shapes {:?} vs {:?}: only equal shapes or scalar broadcast",
                op.name(),
                va.shape(),
                vb.shape()
            );
        };
        let needs = self.nodes[a.0].needs_grad || self.nodes[b.0].needs_grad;
        self.push(Tensor::new(shape, vals), op, needs)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, Op::Add(a.0, b.0), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, Op::Sub(a.0, b.0), |x, y| x - y)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, Op::Mul(a.0, b.0), |x, y| x * y)
    }

    /// Elementwise division. Callers guard denominators away from zero
    /// (see the clamp helpers); a zero denominator poisons the tape.
    pub fn div(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, Op::Div(a.0, b.0), |x, y| x / y)
    }

    /// 2-D matrix product `[m,k] x [k,n] -> [m,n]`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        assert_eq!(va.shape().len(), 2, "matmul lhs must be 2-D, got {:?}", va.shape());
        assert_eq!(vb.shape().len(), 2, "matmul rhs must be 2-D, got {:?}", vb.shape());
        let (m, k) = (va.shape()[0], va.shape()[1]);
        let (k2, n) = (vb.shape()[0], vb.shape()[1]);
        assert_eq!(k, k2, "matmul inner dims: {:?} x {:?}", va.shape(), vb.shape());
        let out = matmul_raw(va.values(), vb.values(), m, k, n);
        let needs = self.nodes[a.0].needs_grad || self.nodes[b.0].needs_grad;
        self.push(Tensor::new(vec![m, n], out), Op::MatMul(a.0, b.0), needs)
    }

    pub fn neg(&mut self, a: Var) -> Var {
        self.unary(a, Op::Neg(a.0), |x| -x)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.unary(a, Op::Exp(a.0), f64::exp)
    }

    /// Natural log. Inputs must be positive; compose with [`Tape::clamp_min`]
    /// at call sites that can approach zero.
    pub fn log(&mut self, a: Var) -> Var {
        self.unary(a, Op::Log(a.0), f64::ln)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, Op::Tanh(a.0), f64::tanh)
    }

    /// `ln(1 + e^x)`, computed stably for large |x|.
    pub fn softplus(&mut self, a: Var) -> Var {
        self.unary(a, Op::Softplus(a.0), softplus_raw)
    }

    /// Log-gamma, elementwise; domain x > 0.
    pub fn ln_gamma(&mut self, a: Var) -> Var {
        self.unary(a, Op::LnGamma(a.0), ln_gamma)
    }

    /// Elementwise max(x, lo). Gradient is 1 above the threshold, 0 below.
    pub fn clamp_min(&mut self, a: Var, lo: f64) -> Var {
        self.unary(a, Op::ClampMin(a.0, lo), |x| x.max(lo))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        self.unary(a, Op::Scale(a.0, c), |x| x * c)
    }

    pub fn add_const(&mut self, a: Var, c: f64) -> Var {
        self.unary(a, Op::AddConst(a.0, c), |x| x + c)
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.unary(a, Op::Square(a.0), |x| x * x)
    }

    /// Sum of all elements, as a scalar.
    pub fn sum(&mut self, a: Var) -> Var {
        let s: f64 = self.nodes[a.0].value.values().iter().sum();
        let needs = self.nodes[a.0].needs_grad;
        self.push(Tensor::scalar(s), Op::Sum(a.0), needs)
    }

    /// Mean of all elements, as a scalar.
    pub fn mean(&mut self, a: Var) -> Var {
        let v = &self.nodes[a.0].value;
        let s: f64 = v.values().iter().sum::<f64>() / v.numel() as f64;
        let needs = self.nodes[a.0].needs_grad;
        self.push(Tensor::scalar(s), Op::Mean(a.0), needs)
    }

    /// Element `i` of a flattened tensor, as a scalar.
    pub fn pick(&mut self, a: Var, i: usize) -> Var {
        let v = &self.nodes[a.0].value;
        assert!(i < v.numel(), "pick index {} out of {:?}", i, v.shape());
        let needs = self.nodes[a.0].needs_grad;
        let x = v.values()[i];
        self.push(Tensor::scalar(x), Op::Pick(a.0, i), needs)
    }

    /// Selected elements of a flattened tensor, as a vector.
    pub fn gather(&mut self, a: Var, idx: &[usize]) -> Var {
        let v = &self.nodes[a.0].value;
        let vals: Vec<f64> = idx
            .iter()
            .map(|&i| {
                assert!(i < v.numel(), "gather index {} out of {:?}", i, v.shape());
                v.values()[i]
            })
            .collect();
        let needs = self.nodes[a.0].needs_grad;
        self.push(Tensor::vector(vals), Op::Gather(a.0, idx.to_vec()), needs)
    }

    /// Concatenation of flattened tensors into one vector.
    pub fn concat(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty(), "concat of zero tensors");
        let mut vals = Vec::new();
        let mut needs = false;
        for p in parts {
            vals.extend_from_slice(self.nodes[p.0].value.values());
            needs |= self.nodes[p.0].needs_grad;
        }
        let ids = parts.iter().map(|p| p.0).collect();
        self.push(Tensor::vector(vals), Op::Concat(ids), needs)
    }

    /// Same values under a new shape; gradients pass straight through.
    pub fn reshape(&mut self, a: Var, shape: Vec<usize>) -> Var {
        let v = &self.nodes[a.0].value;
        let numel: usize = shape.iter().product();
        assert_eq!(numel, v.numel(), "reshape {:?} -> {:?}", v.shape(), shape);
        let vals = v.values().to_vec();
        let needs = self.nodes[a.0].needs_grad;
        self.push(Tensor::new(shape, vals), Op::Reshape(a.0), needs)
    }

    /// `log(sum(exp(x)))` over all elements, stable against large magnitudes.
    pub fn log_sum_exp(&mut self, a: Var) -> Var {
        let v = &self.nodes[a.0].value;
        assert!(v.numel() > 0, "log_sum_exp of empty tensor");
        let m = v.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = v.values().iter().map(|&x| (x - m).exp()).sum();
        let needs = self.nodes[a.0].needs_grad;
        self.push(Tensor::scalar(m + s.ln()), Op::LogSumExp(a.0), needs)
    }

    /// Reverse-mode gradients of a scalar output with respect to every node.
    pub fn backward(&self, output: Var) -> Result<Gradients> {
        if let Some((op, node)) = self.failure {
            return Err(TensorError::NonFinite { op, node });
        }
        let out = &self.nodes[output.0].value;
        if !out.is_scalar() {
            return Err(TensorError::NonScalarOutput(out.shape().to_vec()));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[output.0] = Some(vec![1.0]);

        for i in (0..=output.0).rev() {
            let g = match grads[i].take() {
                Some(g) => g,
                None => continue,
            };
            if !self.nodes[i].needs_grad && !matches!(self.nodes[i].op, Op::Leaf) {
                grads[i] = Some(g);
                continue;
            }
            match &self.nodes[i].op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    self.acc_broadcast(&mut grads, *a, &g, 1.0, None);
                    self.acc_broadcast(&mut grads, *b, &g, 1.0, None);
                }
                Op::Sub(a, b) => {
                    self.acc_broadcast(&mut grads, *a, &g, 1.0, None);
                    self.acc_broadcast(&mut grads, *b, &g, -1.0, None);
                }
                Op::Mul(a, b) => {
                    let bv = broadcast_values(&self.nodes[*b].value, g.len());
                    let av = broadcast_values(&self.nodes[*a].value, g.len());
                    self.acc_broadcast(&mut grads, *a, &g, 1.0, Some(&bv));
                    self.acc_broadcast(&mut grads, *b, &g, 1.0, Some(&av));
                }
                Op::Div(a, b) => {
                    let av = broadcast_values(&self.nodes[*a].value, g.len());
                    let bv = broadcast_values(&self.nodes[*b].value, g.len());
                    let inv_b: Vec<f64> = bv.iter().map(|&y| 1.0 / y).collect();
                    let da: Vec<f64> = inv_b.clone();
                    let db: Vec<f64> =
                        av.iter().zip(&bv).map(|(&x, &y)| -x / (y * y)).collect();
                    self.acc_broadcast(&mut grads, *a, &g, 1.0, Some(&da));
                    self.acc_broadcast(&mut grads, *b, &g, 1.0, Some(&db));
                }
                Op::MatMul(a, b) => {
                    let va = &self.nodes[*a].value;
                    let vb = &self.nodes[*b].value;
                    let (m, k) = (va.shape()[0], va.shape()[1]);
                    let n = vb.shape()[1];
                    // dA = G @ B^T ; dB = A^T @ G
                    let bt = transpose(vb.values(), k, n);
                    let da = matmul_raw(&g, &bt, m, n, k);
                    let at = transpose(va.values(), m, k);
                    let db = matmul_raw(&at, &g, k, m, n);
                    acc(&mut grads, *a, &da);
                    acc(&mut grads, *b, &db);
                }
                Op::Neg(a) => {
                    let da: Vec<f64> = g.iter().map(|&x| -x).collect();
                    acc(&mut grads, *a, &da);
                }
                Op::Exp(a) => {
                    let out = self.nodes[i].value.values();
                    let da: Vec<f64> = g.iter().zip(out).map(|(&gi, &e)| gi * e).collect();
                    acc(&mut grads, *a, &da);
                }
                Op::Log(a) => {
                    let x = self.nodes[*a].value.values();
                    let da: Vec<f64> = g.iter().zip(x).map(|(&gi, &xi)| gi / xi).collect();
                    acc(&mut grads, *a, &da);
                }
                Op::Tanh(a) => {
                    let out = self.nodes[i].value.values();
                    let da: Vec<f64> =
                        g.iter().zip(out).map(|(&gi, &t)| gi * (1.0 - t * t)).collect();
                    acc(&mut grads, *a, &da);
                }
                Op::Softplus(a) => {
                    let x = self.nodes[*a].value.values();
                    let da: Vec<f64> =
                        g.iter().zip(x).map(|(&gi, &xi)| gi * sigmoid_raw(xi)).collect();
                    acc(&mut grads, *a, &da);
                }
                Op::LnGamma(a) => {
                    let x = self.nodes[*a].value.values();
                    let da: Vec<f64> =
                        g.iter().zip(x).map(|(&gi, &xi)| gi * digamma(xi)).collect();
                    acc(&mut grads, *a, &da);
                }
                Op::ClampMin(a, lo) => {
                    let x = self.nodes[*a].value.values();
                    let da: Vec<f64> = g
                        .iter()
                        .zip(x)
                        .map(|(&gi, &xi)| if xi > *lo { gi } else { 0.0 })
                        .collect();
                    acc(&mut grads, *a, &da);
                }
                Op::Scale(a, c) => {
                    let da: Vec<f64> = g.iter().map(|&gi| gi * c).collect();
                    acc(&mut grads, *a, &da);
                }
                Op::AddConst(a, _) => acc(&mut grads, *a, &g),
                Op::Square(a) => {
                    let x = self.nodes[*a].value.values();
                    let da: Vec<f64> =
                        g.iter().zip(x).map(|(&gi, &xi)| gi * 2.0 * xi).collect();
                    acc(&mut grads, *a, &da);
                }
                Op::Sum(a) => {
                    let n = self.nodes[*a].value.numel();
                    acc(&mut grads, *a, &vec![g[0]; n]);
                }
                Op::Mean(a) => {
                    let n = self.nodes[*a].value.numel();
                    acc(&mut grads, *a, &vec![g[0] / n as f64; n]);
                }
                Op::Pick(a, idx) => {
                    let mut da = vec![0.0; self.nodes[*a].value.numel()];
                    da[*idx] = g[0];
                    acc(&mut grads, *a, &da);
                }
                Op::Gather(a, idx) => {
                    let mut da = vec![0.0; self.nodes[*a].value.numel()];
                    for (gi, &src) in g.iter().zip(idx) {
                        da[src] += gi;
                    }
                    acc(&mut grads, *a, &da);
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for &p in parts {
                        let n = self.nodes[p].value.numel();
                        acc(&mut grads, p, &g[off..off + n].to_vec());
                        off += n;
                    }
                }
                Op::Reshape(a) => acc(&mut grads, *a, &g),
                Op::LogSumExp(a) => {
                    // d lse / dx_j = softmax_j(x)
                    let x = self.nodes[*a].value.values();
                    let lse = self.nodes[i].value.item();
                    let da: Vec<f64> = x.iter().map(|&xi| g[0] * (xi - lse).exp()).collect();
                    acc(&mut grads, *a, &da);
                }
            }
            grads[i] = Some(g);
        }
        Ok(Gradients { grads })
    }
}

fn acc(grads: &mut [Option<Vec<f64>>], node: usize, delta: &[f64]) {
    match &mut grads[node] {
        Some(g) => {
            for (gi, di) in g.iter_mut().zip(delta) {
                *gi += di;
            }
        }
        None => grads[node] = Some(delta.to_vec()),
    }
}

impl Tape {
    /// Accumulate `sign * g * factor` into a parent that may have been
    /// scalar-broadcast in the forward op.
    fn acc_broadcast(
        &self,
        grads: &mut [Option<Vec<f64>>],
        node: usize,
        g: &[f64],
        sign: f64,
        factor: Option<&[f64]>,
    ) {
        let n = self.nodes[node].value.numel();
        if n == g.len() {
            let da: Vec<f64> = match factor {
                Some(f) => g.iter().zip(f).map(|(&gi, &fi)| sign * gi * fi).collect(),
                None => g.iter().map(|&gi| sign * gi).collect(),
            };
            acc(grads, node, &da);
        } else {
            // parent was a scalar broadcast: reduce by summation
            debug_assert_eq!(n, 1);
            let s: f64 = match factor {
                Some(f) => g.iter().zip(f).map(|(&gi, &fi)| gi * fi).sum(),
                None => g.iter().sum(),
            };
            acc(grads, node, &[sign * s]);
        }
    }
}

fn broadcast_values(t: &Tensor, len: usize) -> Vec<f64> {
    if t.numel() == len {
        t.values().to_vec()
    } else {
        vec![t.item(); len]
    }
}

pub(crate) fn matmul_raw(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            let crow = &mut c[i * n..(i + 1) * n];
            for j in 0..n {
                crow[j] += aip * brow[j];
            }
        }
    }
    c
}

fn transpose(a: &[f64], m: usize, n: usize) -> Vec<f64> {
    let mut t = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            t[j * m + i] = a[i * n + j];
        }
    }
    t
}

fn softplus_raw(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else if x < -30.0 {
        x.exp()
    } else {
        (1.0 + x.exp()).ln()
    }
}

fn sigmoid_raw(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
