use super::{generate_rays, ImageMeta, RadarConfig, RangeBinning, RangeWindow, SarImage};
use crate::accel::{intersect_scene, Bvh, HitRecord};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::scatter::{DoubleScale, ScatterModel, SigmaGrad};
use crate::scene::{interpolate_params, BsdfParams, Mesh, ParamMap};

/// Hits whose incidence cosine falls below this are treated as misses; they
/// carry no backscatter and would put `theta` on the `pi/2` boundary.
const GRAZING_COS: f64 = 1e-9;

/// Immutable scene geometry: a mesh and its acceleration structure.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub mesh: Mesh,
    pub bvh: Bvh,
}

impl Geometry {
    pub fn new(mesh: Mesh) -> Result<Self> {
        let bvh = Bvh::build(&mesh)?;
        Ok(Geometry { mesh, bvh })
    }
}

/// A ray contact together with its image placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracedHit {
    pub hit: HitRecord,
    pub range: f64,
    pub range_bin: usize,
    pub weight: f64,
}

/// Geometry-only result of tracing one acquisition. Within each row, hits are
/// ordered by descending slant range so that equal bins are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedView {
    pub rows: Vec<Vec<TracedHit>>,
    pub num_bins: usize,
    pub meta: ImageMeta,
}

impl TracedView {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.num_bins)
    }

    pub fn num_hits(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// One recorded contribution `weight * sigma` to pixel `(row, range_bin)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub hit: HitRecord,
    pub params: BsdfParams,
    pub sigma: SigmaGrad,
    pub row: usize,
    pub range_bin: usize,
    pub weight: f64,
}

/// Every contribution of a render, grouped by azimuth row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HitLedger {
    pub rows: Vec<Vec<LedgerEntry>>,
}

impl HitLedger {
    pub fn entries(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.rows.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `sum(weight * sigma)` over all entries.
    pub fn energy(&self) -> f64 {
        self.entries().map(|e| e.weight * e.sigma.sigma).sum()
    }
}

/// Casts every ray of the acquisition and assigns range bins.
///
/// Without an explicit window the origin is the largest slant range over all
/// rows and the window reaches the smallest one. With an explicit window,
/// hits outside it are dropped.
pub fn trace(geom: &Geometry, radar: &RadarConfig, exec: Execution) -> Result<TracedView> {
    radar.validate()?;
    let frame = radar.map_frame();
    let weight = radar.sample_weight();

    let raw: Vec<Vec<(HitRecord, f64)>> = exec.try_map_indexed(radar.num_azimuth, |n| {
        let rays = generate_rays(radar, n)?;
        Ok::<_, Error>(
            rays.iter()
                .filter_map(|fr| intersect_scene(&geom.bvh, &geom.mesh, &fr.ray))
                .filter(|h| h.cos_theta > GRAZING_COS)
                .map(|h| {
                    let r = frame.range_coord(&h.point);
                    (h, r)
                })
                .collect(),
        )
    })?;

    let window = match radar.range_window {
        Some(w) => w,
        None => {
            let (lo, hi) = raw
                .iter()
                .flatten()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, r)| {
                    (lo.min(*r), hi.max(*r))
                });
            if hi.is_finite() {
                RangeWindow {
                    origin: hi,
                    num_bins: ((hi - lo) / radar.range_res).floor() as usize + 1,
                }
            } else {
                RangeWindow {
                    origin: 0.0,
                    num_bins: 1,
                }
            }
        }
    };

    let rows = exec.try_map_indexed(raw.len(), |n| {
        let kept: Vec<&(HitRecord, f64)> =
            raw[n].iter().filter(|(_, r)| *r <= window.origin).collect();
        let ranges: Vec<f64> = kept.iter().map(|(_, r)| *r).collect();
        let binning = RangeBinning::new(&ranges, radar.range_res, window.origin)?;
        Ok::<_, Error>(
            binning
                .order
                .iter()
                .zip(&binning.bins)
                .take_while(|(_, &b)| b < window.num_bins)
                .map(|(&i, &b)| TracedHit {
                    hit: kept[i].0,
                    range: kept[i].1,
                    range_bin: b,
                    weight,
                })
                .collect(),
        )
    })?;

    Ok(TracedView {
        rows,
        num_bins: window.num_bins,
        meta: ImageMeta {
            range_origin: window.origin,
            range_res: radar.range_res,
            azimuth_res: radar.azimuth_res,
        },
    })
}

/// Evaluates the scattering model on traced hits and accumulates the image.
pub fn shade<M: ScatterModel + ?Sized>(
    view: &TracedView,
    mesh: &Mesh,
    params: &ParamMap,
    model: &M,
    exec: Execution,
) -> Result<(SarImage, HitLedger)> {
    if params.len() != mesh.num_vertices() {
        return Err(Error::Shape(format!(
            "{} parameter records for {} vertices",
            params.len(),
            mesh.num_vertices()
        )));
    }
    let cols = view.num_bins;
    let shaded = exec.try_map_indexed(view.rows.len(), |n| {
        let mut profile = vec![0.0; cols];
        let mut entries = Vec::with_capacity(view.rows[n].len());
        let mut k = 0;
        let hits = &view.rows[n];
        while k < hits.len() {
            let b = hits[k].range_bin;
            let mut acc = 0.0;
            while k < hits.len() && hits[k].range_bin == b {
                let th = &hits[k];
                let p = interpolate_params(mesh, params, th.hit.facet_id, th.hit.m1, th.hit.m2)?;
                let sg = model.eval(th.hit.theta(), &p)?;
                acc += th.weight * sg.sigma;
                entries.push(LedgerEntry {
                    hit: th.hit,
                    params: p,
                    sigma: sg,
                    row: n,
                    range_bin: b,
                    weight: th.weight,
                });
                k += 1;
            }
            profile[b] += acc;
        }
        Ok::<_, Error>((profile, entries))
    })?;

    let mut data = Vec::with_capacity(view.rows.len() * cols);
    let mut ledger = HitLedger {
        rows: Vec::with_capacity(view.rows.len()),
    };
    for (profile, entries) in shaded {
        data.extend(profile);
        ledger.rows.push(entries);
    }
    if let Some(v) = data.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::NonFinite(format!("rendered intensity {v}")));
    }
    let image = SarImage::from_data(view.rows.len(), cols, data, view.meta)?;
    Ok((image, ledger))
}

/// Traces and shades with an arbitrary scattering model.
pub fn render_with<M: ScatterModel + ?Sized>(
    geom: &Geometry,
    params: &ParamMap,
    radar: &RadarConfig,
    model: &M,
    exec: Execution,
) -> Result<(SarImage, HitLedger)> {
    let view = trace(geom, radar, exec)?;
    shade(&view, &geom.mesh, params, model, exec)
}

/// Renders with the double-scale BSDF of the radar's carrier.
pub fn render(
    geom: &Geometry,
    params: &ParamMap,
    radar: &RadarConfig,
    exec: Execution,
) -> Result<(SarImage, HitLedger)> {
    render_with(geom, params, radar, &DoubleScale { wave: radar.wave }, exec)
}
