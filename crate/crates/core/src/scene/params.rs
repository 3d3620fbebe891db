use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One scattering channel of the per-vertex parameter record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// RMS height (m).
    H = 0,
    /// Correlation length (m).
    L = 1,
    /// Relative permittivity.
    EpsR = 2,
    /// Specular (KA) fraction of the blend.
    Tau = 3,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::H, Channel::L, Channel::EpsR, Channel::Tau];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::H => "h",
            Channel::L => "l",
            Channel::EpsR => "eps_r",
            Channel::Tau => "tau",
        }
    }
}

/// Surface parameters at a point: RMS height, correlation length, relative
/// permittivity, and the specular/diffuse blend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsdfParams {
    pub h: f64,
    pub l: f64,
    pub eps_r: f64,
    pub tau: f64,
}

impl BsdfParams {
    pub const fn new(h: f64, l: f64, eps_r: f64, tau: f64) -> Self {
        BsdfParams { h, l, eps_r, tau }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.h, self.l, self.eps_r, self.tau]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        BsdfParams::new(a[0], a[1], a[2], a[3])
    }

    pub fn channel(&self, ch: Channel) -> f64 {
        self.as_array()[ch.index()]
    }

    pub fn with_channel(&self, ch: Channel, value: f64) -> Self {
        let mut a = self.as_array();
        a[ch.index()] = value;
        Self::from_array(a)
    }

    /// Checks `h > 0`, `l > 0`, `eps_r >= 1`, `0 <= tau <= 1`, all finite.
    pub fn validate(&self) -> Result<()> {
        if !self.as_array().iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!("{self:?}")));
        }
        if !(self.h > 0.0) {
            return Err(Error::domain(format!("h must be > 0, got {}", self.h)));
        }
        if !(self.l > 0.0) {
            return Err(Error::domain(format!("l must be > 0, got {}", self.l)));
        }
        if !(self.eps_r >= 1.0) {
            return Err(Error::domain(format!("eps_r must be >= 1, got {}", self.eps_r)));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::domain(format!("tau must be in [0, 1], got {}", self.tau)));
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    vertex_id: usize,
    h: f64,
    l: f64,
    eps_r: f64,
    tau: f64,
}

/// Per-vertex parameter table, one record per mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamMap {
    records: Vec<BsdfParams>,
}

impl ParamMap {
    pub fn uniform(num_vertices: usize, value: BsdfParams) -> Self {
        ParamMap {
            records: vec![value; num_vertices],
        }
    }

    pub fn from_records(records: Vec<BsdfParams>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            r.validate()
                .map_err(|e| Error::ParamMap(format!("vertex {i}: {e}")))?;
        }
        Ok(ParamMap { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    #[inline]
    pub fn get(&self, vertex: usize) -> BsdfParams {
        self.records[vertex]
    }

    pub fn set(&mut self, vertex: usize, value: BsdfParams) {
        self.records[vertex] = value;
    }

    pub fn set_channel(&mut self, vertex: usize, ch: Channel, value: f64) {
        self.records[vertex] = self.records[vertex].with_channel(ch, value);
    }

    pub fn records(&self) -> &[BsdfParams] {
        &self.records
    }

    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.records.iter().enumerate() {
            r.validate()
                .map_err(|e| Error::ParamMap(format!("vertex {i}: {e}")))?;
        }
        Ok(())
    }

    /// Reads `vertex_id,h,l,eps_r,tau` rows. Every vertex id in `0..n` must
    /// appear exactly once.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut rows: Vec<Option<BsdfParams>> = Vec::new();
        for (line, row) in rdr.deserialize::<CsvRow>().enumerate() {
            let row = row.map_err(|e| Error::ParamMap(format!("row {}: {e}", line + 1)))?;
            if row.vertex_id >= rows.len() {
                rows.resize(row.vertex_id + 1, None);
            }
            if rows[row.vertex_id].is_some() {
                return Err(Error::ParamMap(format!("duplicate vertex_id {}", row.vertex_id)));
            }
            rows[row.vertex_id] = Some(BsdfParams::new(row.h, row.l, row.eps_r, row.tau));
        }
        let records = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| Error::ParamMap(format!("missing vertex_id {i}"))))
            .collect::<Result<Vec<_>>>()?;
        ParamMap::from_records(records)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (i, r) in self.records.iter().enumerate() {
            wtr.serialize(CsvRow {
                vertex_id: i,
                h: r.h,
                l: r.l,
                eps_r: r.eps_r,
                tau: r.tau,
            })
            .map_err(|e| Error::ParamMap(e.to_string()))?;
        }
        wtr.flush().map_err(|e| Error::ParamMap(e.to_string()))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_header_and_missing_rows() {
        let map = ParamMap::uniform(2, BsdfParams::new(0.002, 0.001, 75.0, 0.25));
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("vertex_id,h,l,eps_r,tau\n"));

        let gap = "vertex_id,h,l,eps_r,tau\n0,0.1,0.1,2,0\n2,0.1,0.1,2,0\n";
        assert!(ParamMap::read_csv(gap.as_bytes()).is_err());
        let bad = "vertex_id,h,l,eps_r,tau\n0,0.1,0.1,0.5,0\n";
        assert!(ParamMap::read_csv(bad.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(
            vals in proptest::collection::vec(
                (1e-6f64..1.0, 1e-6f64..1.0, 1.0f64..100.0, 0.0f64..=1.0), 1..20)
        ) {
            let map = ParamMap::from_records(
                vals.iter().map(|&(h, l, e, t)| BsdfParams::new(h, l, e, t)).collect()
            ).unwrap();
            let mut buf = Vec::new();
            map.write_csv(&mut buf).unwrap();
            let back = ParamMap::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, map);
        }
    }
}
