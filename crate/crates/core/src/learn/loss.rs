use serde::{Deserialize, Serialize};

use super::GradBuffer;
use crate::error::{Error, Result};
use crate::imaging::SarImage;
use crate::scene::{Channel, ParamMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    pub lambda_sim: f64,
    pub lambda_mat: f64,
    /// Divide both images by the reference maximum before comparing.
    pub normalize: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            lambda_sim: 1.0,
            lambda_mat: 1e-3,
            normalize: true,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda_sim", self.lambda_sim), ("lambda_mat", self.lambda_mat)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be a finite non-negative weight")));
            }
        }
        Ok(())
    }
}

fn check_shape(a: &SarImage, b: &SarImage) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "image is {:?}, reference is {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

fn norm_scale(reference: &SarImage, normalize: bool) -> f64 {
    let m = reference.max();
    if normalize && m > 0.0 {
        1.0 / m
    } else {
        1.0
    }
}

/// `lambda_sim / (U M N) * sum (I - I_ref)^2` for one of `num_views` views,
/// together with its gradient with respect to every pixel of `image`.
pub fn loss_sim(
    image: &SarImage,
    reference: &SarImage,
    cfg: &LossConfig,
    num_views: usize,
) -> Result<(f64, Vec<f64>)> {
    check_shape(image, reference)?;
    let s = norm_scale(reference, cfg.normalize);
    let denom = (num_views.max(1) * image.data().len().max(1)) as f64;
    let c = cfg.lambda_sim / denom;
    let mut loss = 0.0;
    let grad = image
        .data()
        .iter()
        .zip(reference.data())
        .map(|(i, r)| {
            let d = (i - r) * s;
            loss += d * d;
            2.0 * c * d * s
        })
        .collect();
    Ok((c * loss, grad))
}

/// Root-mean-square difference after dividing both images by the reference
/// maximum.
pub fn normalized_rmse(image: &SarImage, reference: &SarImage) -> Result<f64> {
    check_shape(image, reference)?;
    let s = norm_scale(reference, true);
    let n = image.data().len().max(1) as f64;
    let ss: f64 = image
        .data()
        .iter()
        .zip(reference.data())
        .map(|(i, r)| ((i - r) * s).powi(2))
        .sum();
    Ok((ss / n).sqrt())
}

/// `(rows, cols)` of the near-square grid used to lay out `n` per-vertex
/// records in file order.
pub fn tv_grid_shape(n: usize) -> (usize, usize) {
    if n == 0 {
        return (0, 0);
    }
    let cols = (n as f64).sqrt().ceil() as usize;
    (n.div_ceil(cols), cols)
}

/// Anisotropic total variation over the selected channels.
///
/// Vertices fill a near-square grid row by row; trailing cells repeat the
/// last vertex. The subgradient uses `sign(0) = 0`.
pub fn loss_tv(params: &ParamMap, channels: &[Channel], lambda_mat: f64) -> (f64, GradBuffer) {
    let n = params.len();
    let mut grad = GradBuffer::zeros(n);
    if n == 0 || lambda_mat == 0.0 {
        return (0.0, grad);
    }
    let (rows, cols) = tv_grid_shape(n);
    let cell = |r: usize, c: usize| (r * cols + c).min(n - 1);
    let mut loss = 0.0;
    let mut pair = |a: usize, b: usize, grad: &mut GradBuffer| {
        for &ch in channels {
            let d = params.get(b).channel(ch) - params.get(a).channel(ch);
            loss += d.abs();
            let s = if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            };
            grad.add_channel(b, ch, lambda_mat * s);
            grad.add_channel(a, ch, -lambda_mat * s);
        }
    };
    for r in 0..rows {
        for c in 0..cols {
            let here = cell(r, c);
            if r + 1 < rows {
                pair(here, cell(r + 1, c), &mut grad);
            }
            if c + 1 < cols {
                pair(here, cell(r, c + 1), &mut grad);
            }
        }
    }
    (lambda_mat * loss, grad)
}
