use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Relu,
    Sigmoid,
    /// Over the last axis.
    Softmax,
}

impl Activation {
    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Linear => 0,
            Activation::Relu => 1,
            Activation::Sigmoid => 2,
            Activation::Softmax => 3,
        }
    }

    pub(crate) fn from_tag(t: u8) -> Option<Self> {
        Some(match t {
            0 => Activation::Linear,
            1 => Activation::Relu,
            2 => Activation::Sigmoid,
            3 => Activation::Softmax,
            _ => return None,
        })
    }

    /// Applies the activation in place; `width` is the last-axis size.
    pub(crate) fn apply(self, z: &mut [f64], width: usize) {
        match self {
            Activation::Linear => {}
            Activation::Relu => z.iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Sigmoid => z.iter_mut().for_each(|v| *v = sigmoid(*v)),
            Activation::Softmax => z.chunks_mut(width).for_each(softmax_in_place),
        }
    }

    /// Turns `grad` (w.r.t. the activation output `y`) into the gradient
    /// w.r.t. the pre-activation `z`.
    pub(crate) fn backprop(self, z: &[f64], y: &[f64], grad: &mut [f64], width: usize) {
        match self {
            Activation::Linear => {}
            Activation::Relu => grad
                .iter_mut()
                .zip(z)
                .for_each(|(g, &z)| if z <= 0.0 { *g = 0.0 }),
            Activation::Sigmoid => grad.iter_mut().zip(y).for_each(|(g, &y)| *g *= y * (1.0 - y)),
            Activation::Softmax => {
                for (g, y) in grad.chunks_mut(width).zip(y.chunks(width)) {
                    let dot: f64 = g.iter().zip(y).map(|(a, b)| a * b).sum();
                    g.iter_mut().zip(y).for_each(|(g, &y)| *g = y * (*g - dot));
                }
            }
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    row.iter_mut().for_each(|v| *v /= sum);
}

pub fn softmax(row: &[f64]) -> Vec<f64> {
    let mut out = row.to_vec();
    softmax_in_place(&mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    /// Affine map over the last axis.
    Dense { units: usize, activation: Activation },
    /// 1×1 convolution on channels-last input; same math as `Dense`, but
    /// consecutive linear ones are evaluated as a single collapsed map.
    PointwiseConv { filters: usize, activation: Activation },
    Flatten,
    Reshape { shape: Vec<usize> },
    /// Inverted dropout with keep probability `keep`.
    Dropout { keep: f64 },
}

impl LayerSpec {
    pub fn dense(units: usize, activation: Activation) -> Self {
        LayerSpec::Dense { units, activation }
    }

    pub fn pconv(filters: usize, activation: Activation) -> Self {
        LayerSpec::PointwiseConv { filters, activation }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::PointwiseConv { .. } => "pointwise_conv",
            LayerSpec::Flatten => "flatten",
            LayerSpec::Reshape { .. } => "reshape",
            LayerSpec::Dropout { .. } => "dropout",
        }
    }
}
