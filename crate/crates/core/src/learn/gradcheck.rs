use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{backward, loss_sim, Bounds, LossConfig, ParamSpace};
use crate::error::Result;
use crate::exec::Execution;
use crate::imaging::{shade, trace, Geometry, RadarConfig, SarImage};
use crate::scatter::ScatterModel;
use crate::scene::{BsdfParams, Channel, ParamMap};

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckOptions {
    pub probes: usize,
    pub seed: u64,
    pub loss: LossConfig,
    pub space: ParamSpace,
    /// Central-difference step relative to `|y|` in optimization coordinates
    /// (absolute when `y = 0`).
    pub rel_step: f64,
    pub exec: Execution,
    /// Test hook: scales the assembled gradient by 1.5 so that a checker
    /// can be shown to fail.
    #[doc(hidden)]
    pub corrupt_adjoint: bool,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            probes: 20,
            seed: 0,
            loss: LossConfig::default(),
            space: ParamSpace::default(),
            rel_step: 1e-5,
            exec: Execution::Sequential,
            corrupt_adjoint: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub vertex: usize,
    pub channel: Channel,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradCheckReport {
    pub probes: Vec<Probe>,
    pub max_rel_error: f64,
    pub median_rel_error: f64,
}

impl GradCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error <= tol
    }
}

/// Parameters the default reference image is rendered from: every channel
/// moved away from `p` so that the loss has a nonzero gradient.
fn perturbed(p: &BsdfParams) -> BsdfParams {
    Bounds::hard().clamp(&BsdfParams::new(
        p.h * 1.25,
        p.l * 0.8,
        1.0 + (p.eps_r - 1.0) * 1.3,
        0.5 * p.tau + 0.25,
    ))
}

/// Compares the back-propagated gradient of `render + loss_sim` with central
/// finite differences at randomly chosen `(vertex, channel)` pairs, in the
/// optimization coordinates of `opts.space`.
///
/// Without an explicit `reference`, one is rendered from a perturbed copy of
/// `params`. A probe whose two values are both zero reports zero error;
/// otherwise the error is `|a - n| / max(|a|, |n|, floor)` with `floor` the
/// round-off level of the difference quotient.
pub fn grad_check<M: ScatterModel + ?Sized>(
    geom: &Geometry,
    params: &ParamMap,
    radar: &RadarConfig,
    model: &M,
    reference: Option<&SarImage>,
    opts: &GradCheckOptions,
) -> Result<GradCheckReport> {
    let exec = opts.exec;
    let view = trace(geom, radar, exec)?;
    let own_ref;
    let reference = match reference {
        Some(r) => r,
        None => {
            let p = ParamMap::from_records(params.records().iter().map(perturbed).collect())?;
            own_ref = shade(&view, &geom.mesh, &p, model, exec)?.0;
            &own_ref
        }
    };
    let loss_at = |p: &ParamMap| -> Result<f64> {
        let (img, _) = shade(&view, &geom.mesh, p, model, exec)?;
        Ok(loss_sim(&img, reference, &opts.loss, 1)?.0)
    };

    let (img, ledger) = shade(&view, &geom.mesh, params, model, exec)?;
    let (l0, dl) = loss_sim(&img, reference, &opts.loss, 1)?;
    let grads = backward(&ledger, &dl, img.cols(), &geom.mesh)?;

    let bounds = Bounds::hard();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut probes = Vec::with_capacity(opts.probes);
    for _ in 0..opts.probes {
        if params.is_empty() {
            break;
        }
        let vertex = rng.random_range(0..params.len());
        let channel = Channel::ALL[rng.random_range(0..4)];
        let ci = channel.index();
        let scale = opts.space.scale(channel);
        let p = params.get(vertex).channel(channel);
        let y = scale.forward(p);
        let delta = if y == 0.0 { opts.rel_step } else { opts.rel_step * y.abs() };

        let mut lo = y - delta;
        let mut hi = y + delta;
        if scale.inverse(lo) < bounds.lower[ci] {
            lo = y;
        }
        if scale.inverse(hi) > bounds.upper[ci] {
            hi = y;
        }
        let at = |yy: f64| -> Result<f64> {
            if yy == y {
                return Ok(l0);
            }
            let mut q = params.clone();
            q.set_channel(vertex, channel, scale.inverse(yy));
            loss_at(&q)
        };
        let numeric = (at(hi)? - at(lo)?) / (hi - lo);
        let mut analytic = grads.get(vertex)[ci] * scale.jacobian(p);
        if opts.corrupt_adjoint {
            analytic *= 1.5;
        }
        let floor = 1e3 * f64::EPSILON * l0.abs() / (hi - lo);
        let denom = analytic.abs().max(numeric.abs());
        let rel_error = if denom == 0.0 {
            0.0
        } else {
            (analytic - numeric).abs() / denom.max(floor)
        };
        probes.push(Probe {
            vertex,
            channel,
            analytic,
            numeric,
            rel_error,
        });
    }

    let mut errs: Vec<f64> = probes.iter().map(|p| p.rel_error).collect();
    errs.sort_by(f64::total_cmp);
    let max_rel_error = errs.last().copied().unwrap_or(0.0);
    let median_rel_error = if errs.is_empty() {
        0.0
    } else if errs.len() % 2 == 1 {
        errs[errs.len() / 2]
    } else {
        0.5 * (errs[errs.len() / 2 - 1] + errs[errs.len() / 2])
    };
    Ok(GradCheckReport {
        probes,
        max_rel_error,
        median_rel_error,
    })
}
