//! Forward SAR rendering by mapping and projection.
//!
//! For every azimuth sample the platform emits a side-looking fan of rays
//! spanning the incidence interval `[alpha0, alpha1]`. Each hit is shaded with
//! the surface BSDF, weighted by its angular quadrature weight, projected onto
//! the range axis of the mapping frame and accumulated into range bins by a
//! sort + segment-sum pass.

mod binning;
mod frame;
mod io;
mod radar;
mod render;

pub use binning::{bin_ranges_fast, bin_ranges_naive, RangeBinning};
pub use frame::{world_to_map, MapFrame};
pub use io::{parse_raster, pgm_bytes, raster_bytes, read_raster, write_csv, write_pgm, write_raster};
pub use radar::{generate_rays, FanRay, RadarConfig, RangeWindow};
pub use render::{
    render, render_with, shade, trace, Geometry, HitLedger, LedgerEntry, TracedHit, TracedView,
};

use crate::error::{Error, Result};

/// Geo-metadata attached to a rendered or loaded image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageMeta {
    /// Range coordinate of the left edge of bin 0 (the farthest range).
    pub range_origin: f64,
    pub range_res: f64,
    pub azimuth_res: f64,
}

/// Azimuth x range intensity raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SarImage {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    pub meta: ImageMeta,
}

impl SarImage {
    pub fn zeros(rows: usize, cols: usize, meta: ImageMeta) -> Self {
        SarImage {
            rows,
            cols,
            data: vec![0.0; rows * cols],
            meta,
        }
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<f64>, meta: ImageMeta) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} image",
                data.len()
            )));
        }
        Ok(SarImage {
            rows,
            cols,
            data,
            meta,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> SarImage {
        SarImage {
            data: self.data.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}
