use super::*;
use crate::exec::Execution;
use crate::imaging::{render, Geometry, RadarConfig};
use crate::scatter::{DoubleScale, Polarization, PsdKind, SigmaGrad, WaveConfig};
use crate::scene::{BsdfParams, Channel, Mesh, ParamMap, Vec3};
use crate::Result;

fn radar() -> RadarConfig {
    RadarConfig {
        wave: WaveConfig::new(9.6e9, Polarization::Hh, PsdKind::Gaussian).unwrap(),
        start_pos: Vec3::new(-2.0, -10.0, 10.0),
        end_pos: Vec3::new(2.0, -10.0, 10.0),
        num_azimuth: 4,
        alpha0: 0.7,
        alpha1: 0.85,
        num_angle_bins: 8,
        range_res: 0.25,
        azimuth_res: 1.0,
        spua: 2,
        seed: 11,
        range_window: None,
    }
}

/// Two triangles forming a 6 m square on the ground in front of the radar,
/// plus one vertex that no facet references.
fn two_facets() -> Geometry {
    let mesh = Mesh::new(
        vec![
            Vec3::new(-3.0, -3.0, 0.0),
            Vec3::new(3.0, -3.0, 0.0),
            Vec3::new(3.0, 3.0, 0.0),
            Vec3::new(-3.0, 3.0, 0.1),
            Vec3::new(50.0, 50.0, 0.0),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .unwrap();
    Geometry::new(mesh).unwrap()
}

fn params() -> ParamMap {
    ParamMap::from_records(vec![
        BsdfParams::new(0.002, 0.02, 5.0, 0.4),
        BsdfParams::new(0.003, 0.015, 8.0, 0.5),
        BsdfParams::new(0.0025, 0.03, 6.0, 0.6),
        BsdfParams::new(0.0015, 0.025, 4.0, 0.3),
        BsdfParams::new(0.002, 0.02, 5.0, 0.5),
    ])
    .unwrap()
}

#[test]
fn two_facet_gradient_matches_finite_differences() {
    let g = two_facets();
    let r = radar();
    let opts = GradCheckOptions {
        probes: 20,
        seed: 5,
        ..Default::default()
    };
    let rep = grad_check(&g, &params(), &r, &DoubleScale { wave: r.wave }, None, &opts).unwrap();
    assert_eq!(rep.probes.len(), 20);
    assert!(rep.max_rel_error < 1e-3, "{rep:?}");
    let illuminated = rep.probes.iter().filter(|p| p.vertex < 4).count();
    assert!(illuminated > 0);
    for p in rep.probes.iter().filter(|p| p.vertex == 4) {
        assert_eq!(p.analytic, 0.0);
        assert_eq!(p.numeric, 0.0);
    }
}

#[test]
fn corrupted_adjoint_is_detected() {
    let g = two_facets();
    let r = radar();
    let opts = GradCheckOptions {
        corrupt_adjoint: true,
        ..Default::default()
    };
    let rep = grad_check(&g, &params(), &r, &DoubleScale { wave: r.wave }, None, &opts).unwrap();
    assert!(!rep.passes(1e-3));
}

#[test]
fn zero_probes_is_empty() {
    let g = two_facets();
    let r = radar();
    let opts = GradCheckOptions {
        probes: 0,
        ..Default::default()
    };
    let rep = grad_check(&g, &params(), &r, &DoubleScale { wave: r.wave }, None, &opts).unwrap();
    assert!(rep.probes.is_empty());
    assert_eq!(rep.max_rel_error, 0.0);
}

#[test]
fn quadratic_model_is_exact() {
    let g = two_facets();
    let r = radar();
    let model = |_: f64, p: &BsdfParams| -> Result<SigmaGrad> {
        Ok(SigmaGrad {
            sigma: p.h * p.h,
            d_h: 2.0 * p.h,
            ..Default::default()
        })
    };
    let opts = GradCheckOptions {
        probes: 12,
        space: ParamSpace([Scale::Linear; 4]),
        ..Default::default()
    };
    let rep = grad_check(&g, &params(), &r, &model, None, &opts).unwrap();
    assert!(rep.max_rel_error < 1e-8, "{rep:?}");
}

fn references(g: &Geometry, p: &ParamMap, views: &[RadarConfig]) -> Vec<View> {
    views
        .iter()
        .map(|r| View {
            radar: r.clone(),
            reference: render(g, p, r, Execution::Sequential).unwrap().0,
        })
        .collect()
}

#[test]
fn converged_start_only_moves_by_tv() {
    let g = two_facets();
    let mut p = params();
    let views = references(&g, &p, &[radar()]);
    let mut st = OptimState::per_vertex(AdamConfig::default(), &mut p).unwrap();
    let cfg = LearnConfig {
        iters: 5,
        loss: LossConfig {
            lambda_mat: 0.0,
            ..Default::default()
        },
        exec: Execution::Sequential,
        ..Default::default()
    };
    let out = learn(&g, p.clone(), &views, &[], &mut st, &cfg).unwrap();
    assert_eq!(out.history[0].total_loss, 0.0);
    assert_eq!(out.params, p);
    assert_eq!(out.stop, StopReason::Budget);
    assert_eq!(out.history.len(), 6);
}

#[test]
fn zero_iterations_returns_projected_init() {
    let g = two_facets();
    let truth = params();
    let views = references(&g, &truth, &[radar()]);
    let mut init = ParamMap::uniform(5, BsdfParams::new(0.002, 0.02, 1.0, 0.5));
    let mut st = OptimState::per_vertex(AdamConfig::default(), &mut init).unwrap();
    let cfg = LearnConfig {
        iters: 0,
        ..Default::default()
    };
    let out = learn(&g, init.clone(), &views, &[], &mut st, &cfg).unwrap();
    assert_eq!(out.params, init);
    assert_eq!(out.params.get(0).eps_r, EPS_R_FLOOR);
    assert_eq!(out.steps, 0);
    assert_eq!(out.images.len(), 1);
}

#[test]
fn learning_reduces_loss_and_never_touches_dark_vertex() {
    let g = two_facets();
    let truth = params();
    let mut other = radar();
    other.seed = 99;
    let views = references(&g, &truth, &[radar(), other]);
    let mut init = ParamMap::uniform(5, BsdfParams::new(0.003, 0.02, 4.0, 0.5));
    let binding = ParamBinding::per_vertex(5).with_channels(&[Channel::EpsR, Channel::H]);
    let mut st = OptimState::new(AdamConfig::default(), Bounds::hard(), ParamSpace::default(), binding, &mut init).unwrap();
    let cfg = LearnConfig {
        iters: 60,
        loss: LossConfig {
            lambda_mat: 0.0,
            ..Default::default()
        },
        ..Default::default()
    };
    let out = learn(&g, init.clone(), &views[..1], &views[1..], &mut st, &cfg).unwrap();
    assert!(out.best_loss() < 0.2 * out.initial_loss());
    assert_eq!(out.params.get(4), init.get(4));
    assert_eq!(out.history[0].view_rmse.len(), 2);
    let mut buf = Vec::new();
    HistoryRow::write_csv(&out.history, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("iter,total_loss,sim_loss,tv_loss,view_rmse_0,view_rmse_1\n0,"));
    assert_eq!(text.lines().count(), out.history.len() + 1);
}

#[test]
fn mismatched_reference_names_view() {
    let g = two_facets();
    let p = params();
    let mut views = references(&g, &p, &[radar(), radar()]);
    views[1].radar.num_azimuth = 5;
    let mut q = p.clone();
    let mut st = OptimState::per_vertex(AdamConfig::default(), &mut q).unwrap();
    let err = learn(&g, q, &views, &[], &mut st, &LearnConfig::default()).unwrap_err();
    assert!(err.to_string().contains("view 1"), "{err}");
}
