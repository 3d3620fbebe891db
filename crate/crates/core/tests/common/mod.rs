//! Scenes shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use sardrt::imaging::{render, Geometry, RadarConfig};
use sardrt::learn::{
    AdamConfig, Bounds, LearnConfig, LossConfig, OptimState, ParamBinding, ParamSpace, Scale, View,
};
use sardrt::scatter::{Polarization, PsdKind, WaveConfig};
use sardrt::scene::{shapes, BsdfParams, Channel, Mesh, ParamMap, Vec3};
use sardrt::Execution;

pub fn deg(d: f64) -> f64 {
    d * PI / 180.0
}

/// X-band HH acquisition looking at the origin with 45 degree incidence from
/// 30 m altitude, track along +x.
pub fn base_radar() -> RadarConfig {
    RadarConfig {
        wave: WaveConfig::new(9.6e9, Polarization::Hh, PsdKind::Gaussian).unwrap(),
        start_pos: Vec3::new(-6.0, -30.0, 30.0),
        end_pos: Vec3::new(6.0, -30.0, 30.0),
        num_azimuth: 24,
        alpha0: deg(40.0),
        alpha1: deg(50.0),
        num_angle_bins: 40,
        range_res: 0.25,
        azimuth_res: 0.5,
        spua: 4,
        seed: 2024,
        range_window: None,
    }
}

/// `base` rotated about the vertical through the origin, one per azimuth.
pub fn views_at(base: &RadarConfig, azimuths_deg: &[f64]) -> Vec<RadarConfig> {
    azimuths_deg
        .iter()
        .map(|a| base.rotated_about(&Vec3::zeros(), deg(*a)))
        .collect()
}

/// A ground plane plus one object whose vertices share a single set of
/// learnable values.
pub struct Scenario {
    pub geom: Geometry,
    pub truth: ParamMap,
    pub init: ParamMap,
    pub binding: ParamBinding,
    pub space: ParamSpace,
    pub object: std::ops::Range<usize>,
}

impl Scenario {
    fn new(
        object: Mesh,
        ground: BsdfParams,
        truth: BsdfParams,
        init: BsdfParams,
        space: ParamSpace,
    ) -> Self {
        let plane = shapes::grid_plane(0.0, 0.0, 0.0, 16.0, 8);
        let np = plane.num_vertices();
        let mesh = plane.merge(&object);
        let n = mesh.num_vertices();
        let pick = |obj: BsdfParams| {
            ParamMap::from_records((0..n).map(|v| if v < np { ground } else { obj }).collect())
                .unwrap()
        };
        let slots = (0..n).map(|v| (v >= np).then_some(0)).collect();
        Scenario {
            geom: Geometry::new(mesh).unwrap(),
            truth: pick(truth),
            init: pick(init),
            binding: ParamBinding::from_slots(slots)
                .unwrap()
                .with_channels(&[Channel::H, Channel::L, Channel::EpsR]),
            space,
            object: np..n,
        }
    }

    /// Object parameters as stored on its first vertex.
    pub fn object_params(&self, p: &ParamMap) -> BsdfParams {
        p.get(self.object.start)
    }

    pub fn references(&self, radars: &[RadarConfig]) -> Vec<View> {
        radars
            .iter()
            .map(|r| View {
                radar: r.clone(),
                reference: render(&self.geom, &self.truth, r, Execution::Parallel).unwrap().0,
            })
            .collect()
    }

    /// Adam state used by the recovery runs, starting from `self.init`.
    pub fn optimizer(&self, params: &mut ParamMap) -> OptimState {
        OptimState::new(RECOVERY_ADAM, Bounds::hard(), self.space, self.binding.clone(), params)
            .unwrap()
    }
}

/// Recovery optimizer settings shared by both closed-loop scenes. The tiny
/// `eps` keeps Adam scale-free when the starting image is nearly black.
pub const RECOVERY_ADAM: AdamConfig = AdamConfig {
    lr: 0.07,
    beta1: 0.8,
    beta2: 0.9,
    eps: 1e-30,
    decay: 1.0,
    decay_start: 0,
};

/// 500 iterations, data term only, no early stop. The object is tied to a
/// single value set, so the smoothness term would only couple it to the
/// fixed ground.
pub fn recovery_config() -> LearnConfig {
    LearnConfig {
        iters: 500,
        loss: LossConfig {
            lambda_mat: 0.0,
            ..Default::default()
        },
        early_stop_window: 0,
        ..Default::default()
    }
}

pub const CUBE_TAU: f64 = 0.1;
pub const BUILDING_TAU: f64 = 0.0;

/// 2 m cube on a plane; cube truth (75, 0.002, 0.001), start (25, 0.005, 0.01).
pub fn cube_scenario(tau: f64) -> Scenario {
    let ground = BsdfParams::new(0.005, 0.01, 25.0, 0.5);
    Scenario::new(
        shapes::box_mesh(Vec3::new(-1.0, -1.0, 0.0), Vec3::new(1.0, 1.0, 2.0)),
        ground,
        BsdfParams::new(0.002, 0.001, 75.0, tau),
        BsdfParams::new(0.005, 0.01, 25.0, tau),
        ParamSpace::default(),
    )
}

/// Gable-roofed block on a plane; truth (6.885, 0.02, 0.01), start
/// (1, 0.0001, 0.0001).
pub fn building_scenario(tau: f64) -> Scenario {
    let ground = BsdfParams::new(0.005, 0.01, 25.0, 0.5);
    Scenario::new(
        shapes::gable_building(Vec3::new(-2.0, -1.5, 0.0), Vec3::new(2.0, 1.5, 2.5), 1.2),
        ground,
        BsdfParams::new(0.02, 0.01, 6.885, tau),
        BsdfParams::new(0.0001, 0.0001, 1.0, tau),
        ParamSpace([Scale::Log, Scale::Log, Scale::Linear, Scale::Linear]),
    )
}
