use crate::data::grid;
use crate::lwc::{from_reals, BitVector};
use crate::ndl::{Model, OutputHead, Tensor};
use crate::permkit::GrayImage;
use crate::Result;

use super::sources::images_to_tensor;

/// A pixel-scale value clamped to `[0, 255]` and rounded.
pub fn to_pixel(v: f64) -> u8 {
    v.clamp(0.0, 255.0).round() as u8
}

/// Eval-mode predictions of plain images from cipher images.
pub fn predict_images(model: &Model, cipher: &[GrayImage]) -> Result<Vec<GrayImage>> {
    let mut out = Vec::with_capacity(cipher.len());
    for chunk in cipher.chunks(256) {
        let refs: Vec<&GrayImage> = chunk.iter().collect();
        let y = model.predict(&images_to_tensor(&refs)?)?;
        let cells = chunk[0].dims().cells();
        for (im, vals) in chunk.iter().zip(y.data().chunks(cells)) {
            out.push(GrayImage::new(im.dims(), vals.iter().map(|v| to_pixel(v * 255.0)).collect())?);
        }
    }
    Ok(out)
}

/// Eval-mode bit predictions; outputs are clamped to `[0, 1]` and values at
/// or above `threshold` become 1.
pub fn predict_bits(model: &Model, head: OutputHead, inputs: &Tensor, threshold: f64) -> Result<Vec<BitVector>> {
    let y = head.apply(&model.predict(inputs)?)?;
    let w = y.last_dim();
    y.data()
        .chunks(w)
        .map(|row| {
            let clamped: Vec<f64> = row.iter().map(|v| v.clamp(0.0, 1.0)).collect();
            from_reals(&clamped, threshold)
        })
        .collect()
}

/// Rows of `[cipher | predicted | plain]` image triples.
pub fn triptych_grid(cipher: &[GrayImage], predicted: &[GrayImage], plain: &[GrayImage]) -> Result<GrayImage> {
    let rows: Vec<Vec<GrayImage>> = cipher
        .iter()
        .zip(predicted)
        .zip(plain)
        .map(|((c, p), t)| vec![c.clone(), p.clone(), t.clone()])
        .collect();
    grid(&rows)
}
