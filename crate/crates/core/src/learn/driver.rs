use std::io::Write;
use std::path::Path;

use log::{debug, info, warn};

use super::{adam_step, backward, loss_sim, loss_tv, normalized_rmse, GradBuffer, LossConfig, OptimState};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::imaging::{shade, trace, Geometry, RadarConfig, RangeWindow, SarImage, TracedView};
use crate::scatter::{DoubleScale, ScatterModel};
use crate::scene::ParamMap;

/// An acquisition and the image it should reproduce.
#[derive(Debug, Clone)]
pub struct View {
    pub radar: RadarConfig,
    pub reference: SarImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig {
    pub iters: usize,
    pub loss: LossConfig,
    /// Stop when the mean training RMSE improved by less than
    /// `early_stop_tol` over the last `early_stop_window` iterations.
    pub early_stop_window: usize,
    pub early_stop_tol: f64,
    pub exec: Execution,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            iters: 500,
            loss: LossConfig::default(),
            early_stop_window: 50,
            early_stop_tol: 1e-6,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub iter: usize,
    pub total_loss: f64,
    pub sim_loss: f64,
    pub tv_loss: f64,
    /// Training views first, then held-out views.
    pub view_rmse: Vec<f64>,
}

impl HistoryRow {
    pub fn write_csv<W: Write>(rows: &[HistoryRow], mut w: W) -> std::io::Result<()> {
        let nv = rows.first().map_or(0, |r| r.view_rmse.len());
        write!(w, "iter,total_loss,sim_loss,tv_loss")?;
        for i in 0..nv {
            write!(w, ",view_rmse_{i}")?;
        }
        writeln!(w)?;
        for r in rows {
            write!(w, "{},{},{},{}", r.iter, r.total_loss, r.sim_loss, r.tv_loss)?;
            for v in &r.view_rmse {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save_csv(rows: &[HistoryRow], path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        HistoryRow::write_csv(rows, &mut buf).expect("writing to a Vec cannot fail");
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    Budget,
    EarlyStop,
    /// A non-finite loss or gradient; the outcome holds the last parameters
    /// that produced a finite loss.
    NonFinite(String),
}

#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub params: ParamMap,
    pub history: Vec<HistoryRow>,
    pub stop: StopReason,
    /// Optimizer steps taken.
    pub steps: usize,
    /// Images of the final evaluation: training views, then held-out views.
    pub images: Vec<SarImage>,
}

impl LearnOutcome {
    pub fn initial_loss(&self) -> f64 {
        self.history.first().map_or(f64::NAN, |r| r.total_loss)
    }

    pub fn best_loss(&self) -> f64 {
        self.history.iter().map(|r| r.total_loss).fold(f64::INFINITY, f64::min)
    }
}

fn prepare(geom: &Geometry, views: &[View], offset: usize, exec: Execution) -> Result<Vec<TracedView>> {
    views
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let idx = i + offset;
            let r = &v.reference;
            if r.rows() != v.radar.num_azimuth {
                return Err(Error::Shape(format!(
                    "view {idx}: reference has {} rows, radar has {} azimuth samples",
                    r.rows(),
                    v.radar.num_azimuth
                )));
            }
            let res = v.radar.range_res;
            if (r.meta.range_res - res).abs() > 1e-9 * res {
                return Err(Error::Shape(format!(
                    "view {idx}: reference range resolution {} differs from radar {res}",
                    r.meta.range_res
                )));
            }
            let mut radar = v.radar.clone();
            radar.range_window = Some(RangeWindow {
                origin: r.meta.range_origin,
                num_bins: r.cols(),
            });
            trace(geom, &radar, exec)
        })
        .collect()
}

struct Evaluation {
    sim: f64,
    tv: f64,
    rmse: Vec<f64>,
    images: Vec<SarImage>,
    grads: Option<GradBuffer>,
}

/// Multi-view fit of the per-vertex parameters to reference images with an
/// arbitrary scattering model.
///
/// Each iteration renders every training view, sums the image losses and the
/// total-variation term, back-propagates and takes one Adam step. Held-out
/// views are rendered for RMSE only. The geometry is traced once up front
/// with each view's range window pinned to its reference image.
#[allow(clippy::too_many_arguments)]
pub fn learn_with<M: ScatterModel + ?Sized>(
    geom: &Geometry,
    init: ParamMap,
    model: &M,
    train: &[View],
    held_out: &[View],
    state: &mut OptimState,
    cfg: &LearnConfig,
) -> Result<LearnOutcome> {
    if train.is_empty() {
        return Err(Error::domain("learning needs at least one training view"));
    }
    cfg.loss.validate()?;
    if init.len() != geom.mesh.num_vertices() {
        return Err(Error::Shape(format!(
            "{} parameter records for {} vertices",
            init.len(),
            geom.mesh.num_vertices()
        )));
    }
    let exec = cfg.exec;
    let traced_train = prepare(geom, train, 0, exec)?;
    let traced_held = prepare(geom, held_out, train.len(), exec)?;
    let channels = state.binding.learnable_channels();
    let u = train.len();

    let evaluate = |params: &ParamMap, want_grad: bool| -> Result<Evaluation> {
        let per_view = exec.try_map_indexed(u, |i| {
            let (img, ledger) = shade(&traced_train[i], &geom.mesh, params, model, exec)?;
            let (loss, dl) = loss_sim(&img, &train[i].reference, &cfg.loss, u)?;
            let rmse = normalized_rmse(&img, &train[i].reference)?;
            let g = if want_grad {
                Some(backward(&ledger, &dl, img.cols(), &geom.mesh)?)
            } else {
                None
            };
            Ok::<_, Error>((img, loss, rmse, g))
        })?;
        let held = exec.try_map_indexed(held_out.len(), |i| {
            let (img, _) = shade(&traced_held[i], &geom.mesh, params, model, exec)?;
            let rmse = normalized_rmse(&img, &held_out[i].reference)?;
            Ok::<_, Error>((img, rmse))
        })?;
        let (tv, tv_grad) = loss_tv(params, &channels, cfg.loss.lambda_mat);
        let mut sim = 0.0;
        let mut rmse = Vec::with_capacity(u + held.len());
        let mut images = Vec::with_capacity(u + held.len());
        let mut grads = want_grad.then_some(tv_grad);
        for (img, loss, r, g) in per_view {
            sim += loss;
            rmse.push(r);
            images.push(img);
            if let (Some(acc), Some(g)) = (grads.as_mut(), g) {
                acc.merge(&g);
            }
        }
        for (img, r) in held {
            rmse.push(r);
            images.push(img);
        }
        Ok(Evaluation {
            sim,
            tv,
            rmse,
            images,
            grads,
        })
    };

    let mut params = init;
    let mut last_good = params.clone();
    let mut history = Vec::new();
    let mut train_rmse = Vec::new();
    let mut images = Vec::new();
    let mut steps = 0;
    let mut stop = StopReason::Budget;

    for it in 0..=cfg.iters {
        let last = it == cfg.iters;
        let ev = evaluate(&params, !last)?;
        let total = ev.sim + ev.tv;
        if !total.is_finite() {
            warn!("non-finite loss at iteration {it}; keeping the previous parameters");
            stop = StopReason::NonFinite(format!("loss {total} at iteration {it}"));
            params = last_good;
            break;
        }
        last_good.clone_from(&params);
        let mean_train = ev.rmse[..u].iter().sum::<f64>() / u as f64;
        train_rmse.push(mean_train);
        history.push(HistoryRow {
            iter: it,
            total_loss: total,
            sim_loss: ev.sim,
            tv_loss: ev.tv,
            view_rmse: ev.rmse,
        });
        images = ev.images;
        if it % 25 == 0 || last {
            debug!("iter {it}: loss {total:.6e}, train rmse {mean_train:.6e}");
        }
        if last {
            break;
        }
        let w = cfg.early_stop_window;
        if w > 0 && it >= w && train_rmse[it - w] - mean_train < cfg.early_stop_tol {
            info!("early stop at iteration {it}");
            stop = StopReason::EarlyStop;
            break;
        }
        let grads = ev.grads.expect("gradient requested");
        match adam_step(state, &params, &grads) {
            Ok(next) => {
                params = next;
                steps += 1;
            }
            Err(Error::NonFinite(msg)) => {
                warn!("aborting: {msg}");
                stop = StopReason::NonFinite(msg);
                break;
            }
            Err(e) => return Err(e),
        }
    }

    Ok(LearnOutcome {
        params,
        history,
        stop,
        steps,
        images,
    })
}

/// [`learn_with`] using the double-scale BSDF of the training carrier. All
/// views must share one carrier.
pub fn learn(
    geom: &Geometry,
    init: ParamMap,
    train: &[View],
    held_out: &[View],
    state: &mut OptimState,
    cfg: &LearnConfig,
) -> Result<LearnOutcome> {
    let wave = train
        .first()
        .ok_or_else(|| Error::domain("learning needs at least one training view"))?
        .radar
        .wave;
    if train.iter().chain(held_out).any(|v| v.radar.wave != wave) {
        return Err(Error::domain("all views must use the same carrier"));
    }
    learn_with(geom, init, &DoubleScale { wave }, train, held_out, state, cfg)
}
