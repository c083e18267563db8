//! Ready-made models for denoising, optical flow and segmentation of
//! grayscale images. Images map to grids `[width, height]`, so the
//! row-major sample order is the grid's vectorized order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::{FlowField, PgmImage};
use crate::linalg::GridDims;
use crate::problem::Problem;
use crate::solver::{RunSummary, StopConfig};
use crate::terms::{data_term, gradient_term, labeling_term, optical_flow_term, DataNorm, GradientNorm, Norm};

pub const ROF_ALPHA: f64 = 0.08;
pub const FLOW_ALPHA: f64 = 0.05;
pub const SEGMENT_ALPHA: f64 = 0.5;

fn image_dims(width: usize, height: usize) -> Result<GridDims> {
    GridDims::new(&[width, height])
}

fn check_image(width: usize, height: usize, samples: &[f64]) -> Result<GridDims> {
    let dims = image_dims(width, height)?;
    if samples.len() != dims.len() {
        return Err(Error::Shape(format!(
            "{width}x{height} image with {} samples",
            samples.len()
        )));
    }
    Ok(dims)
}

/// `½‖u − f‖² + α‖∇u‖_{1,2}`, with `u` as variable 0 started at zero.
pub fn rof_problem(width: usize, height: usize, f: &[f64], alpha: f64) -> Result<Problem> {
    let dims = check_image(width, height, f)?;
    let mut p = Problem::new();
    let u = p.add_primal_var(dims.clone());
    p.add_term(data_term(DataNorm::L2, 1.0, f.to_vec(), None)?, &[u])?;
    p.add_term(gradient_term(GradientNorm::L1Iso, alpha, &dims, None)?, &[u])?;
    Ok(p)
}

pub fn denoise(img: &PgmImage, alpha: f64, cfg: &StopConfig) -> Result<(PgmImage, RunSummary)> {
    let mut p = rof_problem(img.width, img.height, &img.samples, alpha)?;
    let summary = p.run(cfg)?;
    let out = PgmImage::from_samples(img.width, img.height, img.maxval, p.primal(0)?.to_vec())?;
    Ok((out, summary))
}

/// `‖∇f2·v + f2 − f1‖₁ + α1‖∇v1‖_{1,2} + α2‖∇v2‖_{1,2}` over the horizontal
/// and vertical flow components (variables 0 and 1).
pub fn flow_problem(width: usize, height: usize, f1: &[f64], f2: &[f64], alpha1: f64, alpha2: f64) -> Result<Problem> {
    let dims = check_image(width, height, f1)?;
    check_image(width, height, f2)?;
    let mut p = Problem::new();
    let v1 = p.add_primal_var(dims.clone());
    let v2 = p.add_primal_var(dims.clone());
    p.add_term(optical_flow_term(Norm::L1, 1.0, f1, f2, &dims)?, &[v1, v2])?;
    p.add_term(gradient_term(GradientNorm::L1Iso, alpha1, &dims, None)?, &[v1])?;
    p.add_term(gradient_term(GradientNorm::L1Iso, alpha2, &dims, None)?, &[v2])?;
    Ok(p)
}

pub fn estimate_flow(
    first: &PgmImage,
    second: &PgmImage,
    alpha1: f64,
    alpha2: f64,
    cfg: &StopConfig,
) -> Result<(FlowField, RunSummary)> {
    if (first.width, first.height) != (second.width, second.height) {
        return Err(Error::Shape(format!(
            "image sizes differ: {}x{} and {}x{}",
            first.width, first.height, second.width, second.height
        )));
    }
    let mut p = flow_problem(first.width, first.height, &first.samples, &second.samples, alpha1, alpha2)?;
    let summary = p.run(cfg)?;
    let flow = FlowField::new(first.width, first.height, p.primal(0)?.to_vec(), p.primal(1)?.to_vec())?;
    Ok((flow, summary))
}

/// `k` label intensities drawn uniformly from `[0, 1)`.
pub fn random_labels(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| rng.random::<f64>()).collect()
}

/// `Σ_i ⟨u_i, (f − l_i)²⟩ + α Σ_i ‖∇u_i‖_{1,2}` on the per-pixel simplex,
/// one variable per label.
pub fn segmentation_problem(width: usize, height: usize, f: &[f64], labels: &[f64], alpha: f64) -> Result<Problem> {
    let dims = check_image(width, height, f)?;
    if labels.is_empty() {
        return Err(Error::Parameter("at least one label is required".into()));
    }
    let mut p = Problem::new();
    let vars: Vec<usize> = labels.iter().map(|_| p.add_primal_var(dims.clone())).collect();
    p.add_term(labeling_term(1.0, f, labels, &dims)?, &vars)?;
    for &u in &vars {
        p.add_term(gradient_term(GradientNorm::L1Iso, alpha, &dims, None)?, &[u])?;
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    /// Soft assignment per label, row-major.
    pub masks: Vec<Vec<f64>>,
    /// Index of the largest mask per pixel (first one on ties).
    pub label_map: Vec<usize>,
    pub summary: RunSummary,
}

pub fn argmax_labels(masks: &[Vec<f64>]) -> Vec<usize> {
    let n = masks.first().map_or(0, Vec::len);
    (0..n)
        .map(|p| {
            (0..masks.len()).fold(0, |best, i| if masks[i][p] > masks[best][p] { i } else { best })
        })
        .collect()
}

pub fn segment(img: &PgmImage, labels: &[f64], alpha: f64, cfg: &StopConfig) -> Result<Segmentation> {
    let mut p = segmentation_problem(img.width, img.height, &img.samples, labels, alpha)?;
    let summary = p.run(cfg)?;
    let masks: Vec<Vec<f64>> = (0..labels.len()).map(|i| p.primal(i).map(<[f64]>::to_vec)).collect::<Result<_>>()?;
    let label_map = argmax_labels(&masks);
    Ok(Segmentation {
        masks,
        label_map,
        summary,
    })
}

/// Label indices as gray levels `0..=max(k − 1, 1)`.
pub fn label_map_image(width: usize, height: usize, label_map: &[usize], k: usize) -> Result<PgmImage> {
    let maxval = k.saturating_sub(1).clamp(1, usize::from(u16::MAX));
    let samples = label_map.iter().map(|&l| l as f64 / maxval as f64).collect();
    PgmImage::from_samples(width, height, maxval as u16, samples)
}
