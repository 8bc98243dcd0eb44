//! Lowering of 2-D convolution and pooling (valid padding, row-major
//! flattening) to dense layers.

use nalgebra::{DMatrix, DVector};

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::network::Layer;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoolKind {
    Max,
    Average,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConvOp {
    /// Cross-correlation with a `kh x kw` kernel plus a scalar bias.
    Convolution {
        kernel: DMatrix<f64>,
        bias: f64,
    },
    Pool {
        kind: PoolKind,
        window: (usize, usize),
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvSpec {
    /// `(rows, cols)`; a 1-D signal of length `n` is `(1, n)`.
    pub input_shape: (usize, usize),
    pub op: ConvOp,
    pub stride: usize,
}

impl ConvSpec {
    pub fn window(&self) -> (usize, usize) {
        match &self.op {
            ConvOp::Convolution { kernel, .. } => kernel.shape(),
            ConvOp::Pool { window, .. } => *window,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (h, w) = self.input_shape;
        let (kh, kw) = self.window();
        if self.stride == 0 {
            return Err(Error::InvalidConv("stride must be at least 1".into()));
        }
        if kh == 0 || kw == 0 || kh > h || kw > w {
            return Err(Error::InvalidConv(format!(
                "window {kh}x{kw} does not fit input {h}x{w}"
            )));
        }
        if let ConvOp::Convolution { kernel, bias } = &self.op {
            if kernel.iter().any(|v| !v.is_finite()) || !bias.is_finite() {
                return Err(Error::InvalidConv("non-finite kernel or bias".into()));
            }
        }
        Ok(())
    }

    pub fn output_shape(&self) -> (usize, usize) {
        let (h, w) = self.input_shape;
        let (kh, kw) = self.window();
        ((h - kh) / self.stride + 1, (w - kw) / self.stride + 1)
    }

    pub fn input_len(&self) -> usize {
        self.input_shape.0 * self.input_shape.1
    }
}

/// Dense linear layer computing the same map. Max pooling is linear only
/// piecewise, so it needs the input `x` whose argmax pattern (first
/// occurrence on ties) fixes the selected entries.
pub fn conv_to_dense(spec: &ConvSpec, x: Option<&DVector<f64>>) -> Result<Layer> {
    spec.validate()?;
    if let Some(x) = x {
        if x.len() != spec.input_len() {
            return Err(Error::DimensionMismatch {
                expected: spec.input_len(),
                got: x.len(),
            });
        }
    }
    let (_, w) = spec.input_shape;
    let (oh, ow) = spec.output_shape();
    let (kh, kw) = spec.window();
    let mut mat = DMatrix::zeros(oh * ow, spec.input_len());
    let mut bias = DVector::zeros(oh * ow);
    for oi in 0..oh {
        for oj in 0..ow {
            let row = oi * ow + oj;
            let cells = (0..kh).flat_map(|a| (0..kw).map(move |b| (a, b)));
            let at = |a: usize, b: usize| (oi * spec.stride + a) * w + oj * spec.stride + b;
            match &spec.op {
                ConvOp::Convolution { kernel, bias: c } => {
                    for (a, b) in cells {
                        mat[(row, at(a, b))] = kernel[(a, b)];
                    }
                    bias[row] = *c;
                }
                ConvOp::Pool {
                    kind: PoolKind::Average,
                    ..
                } => {
                    let share = 1.0 / (kh * kw) as f64;
                    for (a, b) in cells {
                        mat[(row, at(a, b))] = share;
                    }
                }
                ConvOp::Pool {
                    kind: PoolKind::Max, ..
                } => {
                    let Some(x) = x else {
                        return Err(Error::InvalidConv("max pooling needs the input to lower".into()));
                    };
                    let mut best = at(0, 0);
                    for (a, b) in cells {
                        if x[at(a, b)] > x[best] {
                            best = at(a, b);
                        }
                    }
                    mat[(row, best)] = 1.0;
                }
            }
        }
    }
    Layer::new(mat, bias, ActivationKind::Linear)
}
