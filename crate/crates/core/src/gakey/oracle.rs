use crate::permkit::GrayImage;
use crate::{Error, Result};

/// A detected region: positive id `j` and the pixel indices it covers (`Z_j`
/// is the mask length).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub id: u32,
    pub mask: Vec<usize>,
}

/// Anything that finds labelled regions in a candidate decryption.
pub trait RoiOracle: Sync {
    fn detect(&self, image: &GrayImage) -> Result<Vec<Region>>;
}

/// Checks ids are positive and distinct and masks lie inside the image.
pub fn validate_regions(regions: &[Region], cells: usize) -> Result<()> {
    let mut ids: Vec<u32> = regions.iter().map(|r| r.id).collect();
    ids.sort_unstable();
    if ids.first() == Some(&0) {
        return Err(Error::Oracle("region id 0 is reserved for unfixed cells".into()));
    }
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Oracle("duplicate region ids".into()));
    }
    for r in regions {
        if let Some(&p) = r.mask.iter().find(|&&p| p >= cells) {
            return Err(Error::Oracle(format!("region {} covers pixel {p} outside {cells} cells", r.id)));
        }
    }
    Ok(())
}

/// Compares against a known template: every 4-connected component of at
/// least `min_run` correctly placed pixels is a region.
#[derive(Debug, Clone)]
pub struct SyntheticOracle {
    template: GrayImage,
    min_run: usize,
}

impl SyntheticOracle {
    pub const DEFAULT_MIN_RUN: usize = 4;

    pub fn new(template: GrayImage, min_run: usize) -> Result<Self> {
        if min_run == 0 {
            return Err(Error::invalid("min_run must be at least 1"));
        }
        Ok(SyntheticOracle { template, min_run })
    }

    /// Every correctly placed pixel counts.
    pub fn perfect(template: GrayImage) -> Self {
        SyntheticOracle { template, min_run: 1 }
    }

    pub fn template(&self) -> &GrayImage {
        &self.template
    }
}

impl RoiOracle for SyntheticOracle {
    fn detect(&self, image: &GrayImage) -> Result<Vec<Region>> {
        let d = self.template.dims();
        if image.dims() != d {
            return Err(Error::dims(d, image.dims()));
        }
        let ok: Vec<bool> = image.pixels().iter().zip(self.template.pixels()).map(|(a, b)| a == b).collect();
        let mut seen = vec![false; ok.len()];
        let mut regions = Vec::new();
        for start in 0..ok.len() {
            if !ok[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut mask = Vec::new();
            while let Some(p) = stack.pop() {
                mask.push(p);
                let (r, c) = (p / d.cols, p % d.cols);
                let mut push = |q: usize| {
                    if ok[q] && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                };
                if r > 0 {
                    push(p - d.cols);
                }
                if r + 1 < d.rows {
                    push(p + d.cols);
                }
                if c > 0 {
                    push(p - 1);
                }
                if c + 1 < d.cols {
                    push(p + 1);
                }
            }
            if mask.len() >= self.min_run {
                mask.sort_unstable();
                regions.push(Region {
                    id: regions.len() as u32 + 1,
                    mask,
                });
            }
        }
        Ok(regions)
    }
}
