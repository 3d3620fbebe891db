use std::fs;
use std::io::Write;
use std::path::Path;

use super::{ImageMeta, SarImage};
use crate::error::{Error, Result};

const MAGIC: &str = "SARF1";

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Serializes to the raw raster format: an ASCII header line
/// `SARF1 <rows> <cols> <azimuth_res> <range_res> <range_origin>` followed by
/// row-major little-endian `f32` samples.
pub fn raster_bytes(img: &SarImage) -> Vec<u8> {
    let header = format!(
        "{MAGIC} {} {} {} {} {}\n",
        img.rows(),
        img.cols(),
        img.meta.azimuth_res,
        img.meta.range_res,
        img.meta.range_origin
    );
    let mut out = Vec::with_capacity(header.len() + 4 * img.data().len());
    out.extend_from_slice(header.as_bytes());
    for v in img.data() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn parse_raster(bytes: &[u8]) -> Result<SarImage> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| Error::Format("header is not ASCII".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&MAGIC) {
        return Err(Error::Format(format!(
            "bad magic `{}`, expected {MAGIC}",
            fields.first().unwrap_or(&"")
        )));
    }
    if fields.len() != 6 {
        return Err(Error::Format(format!("header has {} fields, expected 6", fields.len())));
    }
    let int = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Format(format!("bad {what} `{s}`")))
    };
    let float = |s: &str, what: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::Format(format!("bad {what} `{s}`")))
    };
    let rows = int(fields[1], "row count")?;
    let cols = int(fields[2], "column count")?;
    let meta = ImageMeta {
        azimuth_res: float(fields[3], "azimuth resolution")?,
        range_res: float(fields[4], "range resolution")?,
        range_origin: float(fields[5], "range origin")?,
    };
    let body = &bytes[nl + 1..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format("image dimensions overflow".into()))?;
    if body.len() != expected {
        return Err(Error::Format(format!(
            "payload is {} bytes, header implies {expected}",
            body.len()
        )));
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    SarImage::from_data(rows, cols, data, meta)
}

pub fn write_raster(path: &Path, img: &SarImage) -> Result<()> {
    write_file(path, &raster_bytes(img))
}

pub fn read_raster(path: &Path) -> Result<SarImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_raster(&bytes)
}

/// 16-bit binary graymap scaled so the brightest pixel is 65535.
pub fn pgm_bytes(img: &SarImage) -> Vec<u8> {
    let max = img.max();
    let scale = if max > 0.0 { 65535.0 / max } else { 0.0 };
    let mut out = format!("P5\n{} {}\n65535\n", img.cols(), img.rows()).into_bytes();
    for v in img.data() {
        let q = (v * scale).round().clamp(0.0, 65535.0) as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

pub fn write_pgm(path: &Path, img: &SarImage) -> Result<()> {
    write_file(path, &pgm_bytes(img))
}

/// One line per azimuth row, comma-separated intensities.
pub fn write_csv(path: &Path, img: &SarImage) -> Result<()> {
    let mut out = Vec::new();
    for r in 0..img.rows() {
        let line: Vec<String> = img.row(r).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(",")).expect("writing to a Vec cannot fail");
    }
    write_file(path, &out)
}
