use nalgebra::Rotation3;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MapFrame;
use crate::accel::Ray;
use crate::error::{Error, Result};
use crate::scatter::WaveConfig;
use crate::scene::Vec3;

/// Explicit range-bin window: `num_bins` bins of width `range_res` starting at
/// `origin` and extending towards the platform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeWindow {
    pub origin: f64,
    pub num_bins: usize,
}

/// Straight-line side-looking acquisition.
///
/// The platform moves from `start_pos` to `end_pos`; azimuth sample `n` sits at
/// the centre of the `n`-th of `num_azimuth` equal cells. Rays leave towards
/// the left of the track (`z x track`), at incidence angles measured from the
/// downward vertical. Angles are radians.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarConfig {
    pub wave: WaveConfig,
    pub start_pos: Vec3,
    pub end_pos: Vec3,
    pub num_azimuth: usize,
    pub alpha0: f64,
    pub alpha1: f64,
    /// Number of incidence-angle bins the fan is split into.
    pub num_angle_bins: usize,
    pub range_res: f64,
    pub azimuth_res: f64,
    /// Jittered subsamples per angle bin.
    pub spua: usize,
    pub seed: u64,
    /// Fixed range window; `None` fits the window to the scene hits.
    pub range_window: Option<RangeWindow>,
}

/// One sampled ray and its incidence angle in the fan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanRay {
    pub ray: Ray,
    pub alpha: f64,
}

impl RadarConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Radar(m));
        if !self.start_pos.iter().chain(self.end_pos.iter()).all(|c| c.is_finite()) {
            return bad("platform positions must be finite".into());
        }
        let track = self.end_pos - self.start_pos;
        if track.norm() <= 0.0 {
            return bad("start_pos and end_pos coincide".into());
        }
        if track.z.abs() >= 0.999 * track.norm() {
            return bad("trajectory must not be vertical".into());
        }
        if !(self.alpha0.is_finite() && self.alpha1.is_finite() && self.alpha0 < self.alpha1) {
            return bad(format!(
                "alpha0 ({}) must be smaller than alpha1 ({})",
                self.alpha0, self.alpha1
            ));
        }
        if self.alpha0 < 0.0 || self.alpha1 >= std::f64::consts::FRAC_PI_2 {
            return bad("incidence fan must lie within [0, pi/2)".into());
        }
        if !(self.range_res > 0.0 && self.range_res.is_finite()) {
            return bad(format!("range_res must be positive, got {}", self.range_res));
        }
        if !(self.azimuth_res > 0.0 && self.azimuth_res.is_finite()) {
            return bad(format!("azimuth_res must be positive, got {}", self.azimuth_res));
        }
        if self.num_azimuth == 0 || self.num_angle_bins == 0 || self.spua == 0 {
            return bad("num_azimuth, num_angle_bins and spua must be at least 1".into());
        }
        if let Some(w) = self.range_window {
            if !w.origin.is_finite() || w.num_bins == 0 {
                return bad("range window needs a finite origin and at least one bin".into());
            }
        }
        Ok(())
    }

    /// Unit along-track direction.
    pub fn track_dir(&self) -> Vec3 {
        (self.end_pos - self.start_pos).normalize()
    }

    /// Horizontal unit vector the fan points towards.
    pub fn look_dir(&self) -> Vec3 {
        Vec3::z().cross(&self.track_dir()).normalize()
    }

    /// Unit direction of the ray at incidence `alpha`.
    pub fn ray_direction(&self, alpha: f64) -> Vec3 {
        let (s, c) = alpha.sin_cos();
        self.look_dir() * s - Vec3::z() * c
    }

    pub fn platform_position(&self, n: usize) -> Vec3 {
        let s = (n as f64 + 0.5) / self.num_azimuth as f64;
        self.start_pos + (self.end_pos - self.start_pos) * s
    }

    pub fn angle_bin_width(&self) -> f64 {
        (self.alpha1 - self.alpha0) / self.num_angle_bins as f64
    }

    /// Quadrature weight carried by every sampled ray.
    pub fn sample_weight(&self) -> f64 {
        self.angle_bin_width() / self.spua as f64
    }

    pub fn rays_per_row(&self) -> usize {
        self.num_angle_bins * self.spua
    }

    /// Mapping frame anchored at the first platform position, with `R` along
    /// the top ray of its fan.
    pub fn map_frame(&self) -> MapFrame {
        MapFrame::from_axes(
            self.track_dir(),
            self.ray_direction(self.alpha1),
            self.start_pos,
        )
    }

    /// Copy of this acquisition with the trajectory rotated by `angle` rad
    /// about the vertical axis through `pivot`.
    pub fn rotated_about(&self, pivot: &Vec3, angle: f64) -> RadarConfig {
        let rot = Rotation3::from_axis_angle(&Vec3::z_axis(), angle);
        let mv = |p: &Vec3| pivot + rot * (p - pivot);
        RadarConfig {
            start_pos: mv(&self.start_pos),
            end_pos: mv(&self.end_pos),
            ..self.clone()
        }
    }
}

/// Samples the ray fan of azimuth position `n`.
///
/// Each angle bin gets `spua` stratified, jittered angles; the along-track
/// offsets inside the `azimuth_res` cell are stratified independently via a
/// random permutation. With `spua == 1` the rays sit at the bin centres with no
/// offset. Row `n` draws from its own ChaCha8 stream, so rows are independent of
/// evaluation order.
pub fn generate_rays(radar: &RadarConfig, n: usize) -> Result<Vec<FanRay>> {
    if n >= radar.num_azimuth {
        return Err(Error::Radar(format!(
            "azimuth index {n} out of range (num_azimuth = {})",
            radar.num_azimuth
        )));
    }
    let origin = radar.platform_position(n);
    let track = radar.track_dir();
    let width = radar.angle_bin_width();
    let s = radar.spua;
    let mut out = Vec::with_capacity(radar.rays_per_row());

    let mut push = |alpha: f64, offset: f64| -> Result<()> {
        let ray = Ray::new(origin + track * offset, radar.ray_direction(alpha), f64::INFINITY)?;
        out.push(FanRay { ray, alpha });
        Ok(())
    };

    if s == 1 {
        for j in 0..radar.num_angle_bins {
            push(radar.alpha0 + (j as f64 + 0.5) * width, 0.0)?;
        }
        return Ok(out);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(radar.seed);
    rng.set_stream(n as u64);
    let mut strata: Vec<usize> = (0..s).collect();
    let inv = 1.0 / s as f64;
    for j in 0..radar.num_angle_bins {
        strata.shuffle(&mut rng);
        let lo = radar.alpha0 + j as f64 * width;
        for (i, &k) in strata.iter().enumerate() {
            let xa: f64 = rng.random();
            let xu: f64 = rng.random();
            let alpha = lo + (i as f64 + xa) * inv * width;
            let offset = ((k as f64 + xu) * inv - 0.5) * radar.azimuth_res;
            push(alpha, offset)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scatter::{Polarization, PsdKind};
    use approx::assert_relative_eq;

    fn radar(spua: usize, bins: usize) -> RadarConfig {
        RadarConfig {
            wave: WaveConfig::new(9.6e9, Polarization::Hh, PsdKind::Gaussian).unwrap(),
            start_pos: Vec3::new(-1.0, 0.0, 10.0),
            end_pos: Vec3::new(1.0, 0.0, 10.0),
            num_azimuth: 4,
            alpha0: 0.6,
            alpha1: 0.9,
            num_angle_bins: bins,
            range_res: 0.1,
            azimuth_res: 0.5,
            spua,
            seed: 7,
            range_window: None,
        }
    }

    #[test]
    fn single_sample_uses_bin_centres() {
        let r = radar(1, 10);
        let rays = generate_rays(&r, 2).unwrap();
        assert_eq!(rays.len(), 10);
        for (j, fr) in rays.iter().enumerate() {
            assert_relative_eq!(fr.alpha, 0.6 + (j as f64 + 0.5) * 0.03, epsilon = 1e-15);
            assert_relative_eq!(fr.ray.origin, r.platform_position(2));
        }
    }

    #[test]
    fn stratified_samples_stay_in_their_bins() {
        let r = radar(128, 10);
        let rays = generate_rays(&r, 1).unwrap();
        assert_eq!(rays.len(), 1280);
        let centre = r.platform_position(1);
        for (idx, fr) in rays.iter().enumerate() {
            let j = idx / 128;
            let lo = 0.6 + j as f64 * 0.03;
            assert!(fr.alpha >= lo - 1e-15 && fr.alpha <= lo + 0.03 + 1e-15);
            assert_relative_eq!(fr.ray.dir.norm(), 1.0, epsilon = 1e-14);
            let off = (fr.ray.origin - centre).dot(&r.track_dir());
            assert!(off.abs() <= 0.25 + 1e-15);
        }
    }

    #[test]
    fn same_seed_same_rays() {
        let r = radar(16, 5);
        assert_eq!(generate_rays(&r, 3).unwrap(), generate_rays(&r, 3).unwrap());
        let mut other = r.clone();
        other.seed = 8;
        assert_ne!(generate_rays(&r, 3).unwrap(), generate_rays(&other, 3).unwrap());
    }

    #[test]
    fn index_out_of_range() {
        assert!(generate_rays(&radar(1, 1), 4).is_err());
    }

    #[test]
    fn geometry_is_left_looking_and_downward() {
        let r = radar(1, 1);
        assert_relative_eq!(r.look_dir(), Vec3::new(0.0, 1.0, 0.0));
        let d = r.ray_direction(0.0);
        assert_relative_eq!(d, Vec3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn validation() {
        let mut r = radar(1, 1);
        r.validate().unwrap();
        r.alpha0 = 1.0;
        assert!(r.validate().is_err());
        let mut r = radar(1, 1);
        r.range_res = 0.0;
        assert!(r.validate().is_err());
        let mut r = radar(1, 1);
        r.spua = 0;
        assert!(r.validate().is_err());
    }

    #[test]
    fn rotation_keeps_height_and_pivot_distance() {
        let r = radar(1, 1);
        let pivot = Vec3::new(0.0, 5.0, 0.0);
        let q = r.rotated_about(&pivot, 2.0);
        assert_relative_eq!(q.start_pos.z, 10.0);
        assert_relative_eq!(
            (q.start_pos - pivot).xy().norm(),
            (r.start_pos - pivot).xy().norm(),
            epsilon = 1e-12
        );
    }
}
