use serde::{Deserialize, Serialize};

use super::layers::{Activation, LayerSpec};
use super::tensor::{gemm, matmul, Tensor};
use crate::rng::SplitMix64;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Per-sample input shape (no batch axis).
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
}

/// Weights `[fan_in, fan_out]` row-major, biases `[fan_out]`. Empty for
/// parameter-free layers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerParams {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub fan_in: usize,
    pub fan_out: usize,
}

impl LayerParams {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        LayerParams {
            w: vec![0.0; fan_in * fan_out],
            b: vec![0.0; fan_out],
            fan_in,
            fan_out,
        }
    }

    pub fn count(&self) -> usize {
        self.w.len() + self.b.len()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.fan_in, self.fan_out)
    }
}

pub type Grads = Vec<LayerParams>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// `U(±√(1/fan_in))`.
    XavierUniform,
    /// `U(±√(6/(fan_in + fan_out)))`.
    XavierNormalized,
}

#[derive(Debug, Clone, PartialEq)]
enum Stage {
    Single(usize),
    /// Consecutive linear pointwise convolutions `start..end`.
    Chain(usize, usize),
}

/// Activations kept by [`Model::forward`] for [`Model::backward`].
#[derive(Debug, Clone)]
pub struct Cache {
    version: u64,
    inputs: Vec<Tensor>,
    output: Tensor,
    preacts: Vec<Option<(Activation, Vec<f64>)>>,
    masks: Vec<Option<Vec<f64>>>,
}

impl Cache {
    pub fn output(&self) -> &Tensor {
        &self.output
    }

    /// Pre-activations of every nonlinear affine stage, in stage order.
    pub fn preactivations(&self) -> impl Iterator<Item = (Activation, &[f64])> {
        self.preacts.iter().flatten().map(|(a, z)| (*a, z.as_slice()))
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    shapes: Vec<Vec<usize>>,
    params: Vec<LayerParams>,
    stages: Vec<Stage>,
    version: u64,
}

impl Model {
    /// Builds the model with zero parameters and collapsed linear chains.
    pub fn new(spec: ModelSpec) -> Result<Model> {
        Self::build(spec, true)
    }

    /// Like [`Model::new`] but evaluates every layer separately.
    pub fn new_unfused(spec: ModelSpec) -> Result<Model> {
        Self::build(spec, false)
    }

    fn build(spec: ModelSpec, fuse: bool) -> Result<Model> {
        if spec.input_shape.is_empty() || spec.input_shape.contains(&0) {
            return Err(Error::invalid(format!("bad input shape {:?}", spec.input_shape)));
        }
        let mut shape = spec.input_shape.clone();
        let mut shapes = Vec::with_capacity(spec.layers.len());
        let mut params = Vec::with_capacity(spec.layers.len());
        for (l, layer) in spec.layers.iter().enumerate() {
            let bad = |detail: String| Error::ShapeMismatch { layer: l, detail };
            match layer {
                LayerSpec::Dense { units, .. } | LayerSpec::PointwiseConv { filters: units, .. } => {
                    if *units == 0 {
                        return Err(bad("zero output width".into()));
                    }
                    if matches!(layer, LayerSpec::PointwiseConv { .. }) && shape.len() < 2 {
                        return Err(bad(format!("pointwise conv needs spatial axes, input is {shape:?}")));
                    }
                    let fan_in = *shape.last().unwrap();
                    params.push(LayerParams::zeros(fan_in, *units));
                    *shape.last_mut().unwrap() = *units;
                }
                LayerSpec::Flatten => {
                    params.push(LayerParams::default());
                    shape = vec![shape.iter().product()];
                }
                LayerSpec::Reshape { shape: to } => {
                    let (a, b): (usize, usize) = (shape.iter().product(), to.iter().product());
                    if a != b || to.contains(&0) {
                        return Err(bad(format!("cannot reshape {shape:?} to {to:?}")));
                    }
                    params.push(LayerParams::default());
                    shape = to.clone();
                }
                LayerSpec::Dropout { keep } => {
                    if !(*keep > 0.0 && *keep <= 1.0) {
                        return Err(Error::invalid(format!("layer {l}: dropout keep {keep} not in (0, 1]")));
                    }
                    params.push(LayerParams::default());
                }
            }
            shapes.push(shape.clone());
        }
        let is_linear_pconv = |l: &LayerSpec| {
            matches!(l, LayerSpec::PointwiseConv { activation: Activation::Linear, .. })
        };
        let mut stages = Vec::new();
        let mut l = 0;
        while l < spec.layers.len() {
            if fuse && is_linear_pconv(&spec.layers[l]) {
                let start = l;
                while l < spec.layers.len() && is_linear_pconv(&spec.layers[l]) {
                    l += 1;
                }
                stages.push(Stage::Chain(start, l));
            } else {
                stages.push(Stage::Single(l));
                l += 1;
            }
        }
        Ok(Model {
            spec,
            shapes,
            params,
            stages,
            version: 0,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.spec.input_shape
    }

    /// Per-sample output shape.
    pub fn output_shape(&self) -> &[usize] {
        self.shapes.last().map_or(&self.spec.input_shape, |s| s)
    }

    /// Per-sample output shape of layer `l`.
    pub fn layer_shape(&self, l: usize) -> &[usize] {
        &self.shapes[l]
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(LayerParams::count).sum()
    }

    pub fn layer_param_counts(&self) -> Vec<usize> {
        self.params.iter().map(LayerParams::count).collect()
    }

    pub fn params(&self) -> &[LayerParams] {
        &self.params
    }

    /// Mutable access; invalidates outstanding caches.
    pub fn params_mut(&mut self) -> &mut [LayerParams] {
        self.version += 1;
        &mut self.params
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn set_params(&mut self, params: Vec<LayerParams>) -> Result<()> {
        if params.len() != self.params.len()
            || params
                .iter()
                .zip(&self.params)
                .any(|(a, b)| a.w.len() != b.w.len() || a.b.len() != b.b.len())
        {
            return Err(Error::ArchitectureMismatch("parameter shapes differ from the model".into()));
        }
        self.params = params;
        self.version += 1;
        Ok(())
    }

    /// Draws every weight matrix from its own stream `mix(seed, layer)`;
    /// biases are zero.
    pub fn init(&mut self, init: Init, seed: u64) {
        for (l, p) in self.params_mut().iter_mut().enumerate() {
            if p.w.is_empty() {
                continue;
            }
            let bound = match init {
                Init::XavierUniform => super::init::xavier_uniform_bound(p.fan_in),
                Init::XavierNormalized => super::init::xavier_normalized_bound(p.fan_in, p.fan_out),
            };
            let mut rng = SplitMix64::stream(seed, l as u64);
            p.w.iter_mut().for_each(|w| *w = rng.uniform(-bound, bound));
            p.b.iter_mut().for_each(|b| *b = 0.0);
        }
    }

    fn check_input(&self, x: &Tensor) -> Result<usize> {
        let s = x.shape();
        if s.len() != self.spec.input_shape.len() + 1 || s[1..] != self.spec.input_shape[..] {
            return Err(Error::ShapeMismatch {
                layer: 0,
                detail: format!(
                    "expected [batch, {}], got {s:?}",
                    self.spec
                        .input_shape
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            });
        }
        Ok(s[0])
    }

    fn batch_shape(batch: usize, per_sample: &[usize]) -> Vec<usize> {
        let mut v = Vec::with_capacity(per_sample.len() + 1);
        v.push(batch);
        v.extend_from_slice(per_sample);
        v
    }

    /// Forward pass over a batch `[B, input_shape…]`. Dropout masks in
    /// training mode come from `stream(seed, layer)`.
    pub fn forward(&self, x: &Tensor, mode: Mode, seed: u64) -> Result<(Tensor, Cache)> {
        let batch = self.check_input(x)?;
        let mut inputs = Vec::with_capacity(self.stages.len());
        let mut preacts = Vec::with_capacity(self.stages.len());
        let mut masks = Vec::with_capacity(self.stages.len());
        let mut cur = x.clone();
        for stage in &self.stages {
            let (out, z, mask) = self.forward_stage(stage, &cur, batch, mode, seed)?;
            inputs.push(std::mem::replace(&mut cur, out));
            preacts.push(z);
            masks.push(mask);
        }
        let cache = Cache {
            version: self.version,
            inputs,
            output: cur.clone(),
            preacts,
            masks,
        };
        Ok((cur, cache))
    }

    /// Eval-mode forward without keeping a cache.
    pub fn predict(&self, x: &Tensor) -> Result<Tensor> {
        let batch = self.check_input(x)?;
        let mut cur = x.clone();
        for stage in &self.stages {
            cur = self.forward_stage(stage, &cur, batch, Mode::Eval, 0)?.0;
        }
        Ok(cur)
    }

    #[allow(clippy::type_complexity)]
    fn forward_stage(
        &self,
        stage: &Stage,
        x: &Tensor,
        batch: usize,
        mode: Mode,
        seed: u64,
    ) -> Result<(Tensor, Option<(Activation, Vec<f64>)>, Option<Vec<f64>>)> {
        match *stage {
            Stage::Chain(start, end) => {
                let (p, q) = self.chain_map(start, end);
                let c0 = self.params[start].fan_in;
                let cl = self.params[end - 1].fan_out;
                let rows = x.len() / c0;
                let mut y = vec![0.0; rows * cl];
                for row in y.chunks_mut(cl) {
                    row.copy_from_slice(&q);
                }
                gemm(rows, c0, cl, 1.0, x.data(), false, &p, false, 1.0, &mut y);
                let out = Tensor::new(Self::batch_shape(batch, &self.shapes[end - 1]), y)?;
                Ok((out, None, None))
            }
            Stage::Single(l) => {
                let shape = Self::batch_shape(batch, &self.shapes[l]);
                match &self.spec.layers[l] {
                    LayerSpec::Dense { activation, .. } | LayerSpec::PointwiseConv { activation, .. } => {
                        let p = &self.params[l];
                        let rows = x.len() / p.fan_in;
                        let mut z = vec![0.0; rows * p.fan_out];
                        for row in z.chunks_mut(p.fan_out) {
                            row.copy_from_slice(&p.b);
                        }
                        gemm(rows, p.fan_in, p.fan_out, 1.0, x.data(), false, &p.w, false, 1.0, &mut z);
                        if *activation == Activation::Linear {
                            return Ok((Tensor::new(shape, z)?, None, None));
                        }
                        let mut y = z.clone();
                        activation.apply(&mut y, p.fan_out);
                        Ok((Tensor::new(shape, y)?, Some((*activation, z)), None))
                    }
                    LayerSpec::Flatten | LayerSpec::Reshape { .. } => {
                        Ok((x.clone().reshape(shape)?, None, None))
                    }
                    LayerSpec::Dropout { keep } => {
                        if mode == Mode::Eval || *keep >= 1.0 {
                            return Ok((x.clone(), None, None));
                        }
                        let mut rng = SplitMix64::stream(seed, l as u64);
                        let scale = 1.0 / keep;
                        let mask: Vec<f64> = (0..x.len())
                            .map(|_| if rng.bernoulli(*keep) { scale } else { 0.0 })
                            .collect();
                        let y = x.data().iter().zip(&mask).map(|(a, m)| a * m).collect();
                        Ok((Tensor::new(shape, y)?, None, Some(mask)))
                    }
                }
            }
        }
    }

    /// Composite map of layers `start..end`: prefix products `P_l` and
    /// offsets `q_l` for every depth, `P_0 = I`, `q_0 = 0`.
    fn chain_prefixes(&self, start: usize, end: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        let c0 = self.params[start].fan_in;
        let mut p = vec![0.0; c0 * c0];
        for i in 0..c0 {
            p[i * c0 + i] = 1.0;
        }
        let mut out = vec![(p, vec![0.0; c0])];
        for l in start..end {
            let lp = &self.params[l];
            let (prev_p, prev_q) = out.last().unwrap();
            let p = matmul(c0, lp.fan_in, lp.fan_out, prev_p, &lp.w);
            let mut q = matmul(1, lp.fan_in, lp.fan_out, prev_q, &lp.w);
            q.iter_mut().zip(&lp.b).for_each(|(q, b)| *q += b);
            out.push((p, q));
        }
        out
    }

    fn chain_map(&self, start: usize, end: usize) -> (Vec<f64>, Vec<f64>) {
        self.chain_prefixes(start, end).pop().unwrap()
    }

    /// Gradients of the loss w.r.t. every parameter, given the gradient
    /// w.r.t. the model output.
    pub fn backward(&self, cache: &Cache, grad_out: &Tensor) -> Result<Grads> {
        if cache.version != self.version {
            return Err(Error::StaleCache {
                cached: cache.version,
                current: self.version,
            });
        }
        if grad_out.shape() != cache.output.shape() {
            return Err(Error::ShapeMismatch {
                layer: self.spec.layers.len().saturating_sub(1),
                detail: format!(
                    "output gradient {:?} does not match output {:?}",
                    grad_out.shape(),
                    cache.output.shape()
                ),
            });
        }
        let mut grads: Grads = self.params.iter().map(LayerParams::zeros_like).collect();
        let mut g = grad_out.data().to_vec();
        for (s, stage) in self.stages.iter().enumerate().rev() {
            let x = &cache.inputs[s];
            let need_dx = s > 0;
            let y = if s + 1 < cache.inputs.len() {
                cache.inputs[s + 1].data()
            } else {
                cache.output.data()
            };
            g = match *stage {
                Stage::Chain(start, end) => self.backward_chain(start, end, x.data(), &g, &mut grads, need_dx),
                Stage::Single(l) => match &self.spec.layers[l] {
                    LayerSpec::Dense { activation, .. } | LayerSpec::PointwiseConv { activation, .. } => {
                        let p = &self.params[l];
                        if let Some((_, z)) = &cache.preacts[s] {
                            activation.backprop(z, y, &mut g, p.fan_out);
                        }
                        let rows = g.len() / p.fan_out;
                        let gl = &mut grads[l];
                        gemm(p.fan_in, rows, p.fan_out, 1.0, x.data(), true, &g, false, 0.0, &mut gl.w);
                        for row in g.chunks(p.fan_out) {
                            gl.b.iter_mut().zip(row).for_each(|(b, v)| *b += v);
                        }
                        if need_dx {
                            let mut dx = vec![0.0; rows * p.fan_in];
                            gemm(rows, p.fan_out, p.fan_in, 1.0, &g, false, &p.w, true, 0.0, &mut dx);
                            dx
                        } else {
                            Vec::new()
                        }
                    }
                    LayerSpec::Flatten | LayerSpec::Reshape { .. } => g,
                    LayerSpec::Dropout { .. } => {
                        if let Some(mask) = &cache.masks[s] {
                            g.iter_mut().zip(mask).for_each(|(g, m)| *g *= m);
                        }
                        g
                    }
                },
            };
        }
        Ok(grads)
    }

    fn backward_chain(
        &self,
        start: usize,
        end: usize,
        x: &[f64],
        g: &[f64],
        grads: &mut Grads,
        need_dx: bool,
    ) -> Vec<f64> {
        let c0 = self.params[start].fan_in;
        let cl = self.params[end - 1].fan_out;
        let rows = x.len() / c0;
        let mut xtg = vec![0.0; c0 * cl];
        gemm(c0, rows, cl, 1.0, x, true, g, false, 0.0, &mut xtg);
        let mut gs = vec![0.0; cl];
        for row in g.chunks(cl) {
            gs.iter_mut().zip(row).for_each(|(a, v)| *a += v);
        }
        let prefixes = self.chain_prefixes(start, end);
        // S_l = W_{l+1} ⋯ W_L, walked from the end
        let mut s = vec![0.0; cl * cl];
        for i in 0..cl {
            s[i * cl + i] = 1.0;
        }
        for l in (start..end).rev() {
            let lp = &self.params[l];
            let (p_prev, q_prev) = &prefixes[l - start];
            let (cin, cout) = (lp.fan_in, lp.fan_out);
            // T = XᵀG·Sᵀ (c0×cout), u = gs·Sᵀ (cout)
            let mut t = vec![0.0; c0 * cout];
            gemm(c0, cl, cout, 1.0, &xtg, false, &s, true, 0.0, &mut t);
            let mut u = vec![0.0; cout];
            gemm(1, cl, cout, 1.0, &gs, false, &s, true, 0.0, &mut u);
            let gl = &mut grads[l];
            gemm(cin, c0, cout, 1.0, p_prev, true, &t, false, 0.0, &mut gl.w);
            for (row, &q) in gl.w.chunks_mut(cout).zip(&q_prev[..cin]) {
                for (g, &uj) in row.iter_mut().zip(&u) {
                    *g += q * uj;
                }
            }
            gl.b.copy_from_slice(&u);
            s = matmul(cin, cout, cl, &lp.w, &s);
        }
        if !need_dx {
            return Vec::new();
        }
        let (p, _) = prefixes.last().unwrap();
        let mut dx = vec![0.0; rows * c0];
        gemm(rows, cl, c0, 1.0, g, false, p, true, 0.0, &mut dx);
        dx
    }
}
