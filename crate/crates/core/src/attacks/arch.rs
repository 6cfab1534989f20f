//! The three fixed attack architectures.

use crate::ndl::{Activation, LayerSpec, Model, ModelSpec};
use crate::{Error, Result};

pub const DECRYPTOR_PARAMS: usize = 679_338;
pub const DECRYPTOR_CONV_PARAMS: usize = 31_949;
pub const DECRYPTOR_DENSE_PARAMS: usize = 615_440;
pub const KATAN_PARAMS: usize = 3_748;
pub const SIMON_PARAMS: usize = 20_896;
/// Count printed alongside the SIMON hyperparameters; the layer widths give
/// [`SIMON_PARAMS`].
pub const SIMON_STATED_PARAMS: usize = 21_024;

const CONV_FILTERS: [usize; 6] = [140, 112, 84, 56, 28, 1];
const DECONV_FILTERS: [usize; 6] = [28, 56, 84, 112, 140, 1];
const KATAN_WIDTHS: [usize; 9] = [32, 24, 20, 16, 12, 16, 20, 24, 32];
const SIMON_WIDTHS: [usize; 7] = [16, 32, 64, 128, 16, 32, 64];
pub const SIMON_KEEP: [f64; 7] = [0.9, 0.8, 0.7, 0.9, 0.8, 0.7, 0.9];

pub fn build_decryptor() -> ModelSpec {
    let mut layers: Vec<LayerSpec> = CONV_FILTERS
        .iter()
        .map(|&f| LayerSpec::pconv(f, Activation::Linear))
        .collect();
    layers.push(LayerSpec::Flatten);
    layers.push(LayerSpec::dense(784, Activation::Linear));
    layers.push(LayerSpec::Reshape { shape: vec![28, 28, 1] });
    layers.extend(DECONV_FILTERS.iter().map(|&f| LayerSpec::pconv(f, Activation::Linear)));
    ModelSpec {
        input_shape: vec![28, 28, 1],
        layers,
    }
}

pub fn build_katan_model() -> ModelSpec {
    ModelSpec {
        input_shape: vec![32, 1],
        layers: KATAN_WIDTHS
            .iter()
            .map(|&u| LayerSpec::dense(u, Activation::Relu))
            .collect(),
    }
}

pub fn build_simon_model() -> ModelSpec {
    let mut layers = Vec::new();
    for (&w, &keep) in SIMON_WIDTHS.iter().zip(&SIMON_KEEP) {
        layers.push(LayerSpec::dense(w, Activation::Sigmoid));
        layers.push(LayerSpec::Dropout { keep });
    }
    layers.push(LayerSpec::dense(64, Activation::Sigmoid));
    ModelSpec {
        input_shape: vec![64],
        layers,
    }
}

/// Parameter subtotals of the decryptor: (conv group, dense, deconv group).
pub fn decryptor_subtotals(model: &Model) -> (usize, usize, usize) {
    let counts = model.layer_param_counts();
    (
        counts[..6].iter().sum(),
        counts[6..9].iter().sum(),
        counts[9..].iter().sum(),
    )
}

fn expect(model: &Model, want: usize, what: &str) -> Result<()> {
    if model.param_count() != want {
        return Err(Error::ArchitectureMismatch(format!(
            "{what} has {} trainable parameters, expected {want}",
            model.param_count()
        )));
    }
    Ok(())
}

/// Instantiates an architecture and checks its parameter count.
pub fn instantiate(spec: ModelSpec) -> Result<Model> {
    let model = Model::new(spec.clone())?;
    if spec == build_decryptor() {
        expect(&model, DECRYPTOR_PARAMS, "decryptor")?;
    } else if spec == build_katan_model() {
        expect(&model, KATAN_PARAMS, "KATAN model")?;
    } else if spec == build_simon_model() {
        expect(&model, SIMON_PARAMS, "SIMON model")?;
        log::warn!(
            "SIMON model: layer widths give {SIMON_PARAMS} parameters; the published hyperparameter list states {SIMON_STATED_PARAMS}"
        );
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndl::Tensor;

    #[test]
    fn decryptor_counts() {
        let m = instantiate(build_decryptor()).unwrap();
        assert_eq!(m.param_count(), 679_338);
        assert_eq!(decryptor_subtotals(&m), (31_949, 615_440, 31_949));
        assert_eq!(m.layer_param_counts()[7], 615_440);
        assert_eq!(m.layer_shape(0), &[28, 28, 140]);
        let y = m.predict(&Tensor::zeros(&[1, 28, 28, 1])).unwrap();
        assert_eq!(y.shape(), &[1, 28, 28, 1]);
    }

    #[test]
    fn katan_counts() {
        let m = instantiate(build_katan_model()).unwrap();
        assert_eq!(m.param_count(), 3_748);
        assert_eq!(m.layer_param_counts()[0], 64);
        assert_eq!(m.output_shape(), &[32, 32]);
    }

    #[test]
    fn simon_counts() {
        let m = instantiate(build_simon_model()).unwrap();
        assert_eq!(m.param_count(), 20_896);
        assert_eq!(m.output_shape(), &[64]);
        let keeps: Vec<f64> = build_simon_model()
            .layers
            .iter()
            .filter_map(|l| match l {
                LayerSpec::Dropout { keep } => Some(*keep),
                _ => None,
            })
            .collect();
        assert_eq!(keeps, SIMON_KEEP);
    }
}
