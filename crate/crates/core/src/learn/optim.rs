use log::warn;
use serde::{Deserialize, Serialize};

use super::GradBuffer;
use crate::error::{Error, Result};
use crate::scatter::{ValidityThresholds, WaveConfig};
use crate::scene::{BsdfParams, Channel, ParamMap};

/// Coordinate in which a channel is optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    pub fn forward(self, p: f64) -> f64 {
        match self {
            Scale::Linear => p,
            Scale::Log => p.ln(),
        }
    }

    pub fn inverse(self, y: f64) -> f64 {
        match self {
            Scale::Linear => y,
            Scale::Log => y.exp(),
        }
    }

    /// `dp/dy` expressed through the parameter value `p`.
    pub fn jacobian(self, p: f64) -> f64 {
        match self {
            Scale::Linear => 1.0,
            Scale::Log => p,
        }
    }
}

/// Per-channel optimization coordinates, in channel order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpace(pub [Scale; 4]);

impl Default for ParamSpace {
    /// Log coordinates for `h`, `l` and `eps_r`; `tau` stays linear.
    fn default() -> Self {
        ParamSpace([Scale::Log, Scale::Log, Scale::Log, Scale::Linear])
    }
}

impl ParamSpace {
    pub fn scale(&self, ch: Channel) -> Scale {
        self.0[ch.index()]
    }
}

/// Smallest permittivity the optimizer visits. At `eps_r = 1` both scattering
/// terms vanish together with every partial derivative, so a start from the
/// matched medium would never move.
pub const EPS_R_FLOOR: f64 = 1.0 + 1e-6;

/// Componentwise box, in channel order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: [f64; 4],
    pub upper: [f64; 4],
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::hard()
    }
}

impl Bounds {
    /// Physical limits only: positive roughness, `eps_r` at least
    /// [`EPS_R_FLOOR`], `tau` in `[0, 1]`.
    pub fn hard() -> Self {
        Bounds {
            lower: [1e-7, 1e-7, EPS_R_FLOOR, 0.0],
            upper: [f64::INFINITY, f64::INFINITY, f64::INFINITY, 1.0],
        }
    }

    /// Hard limits intersected with the height bound `k h < much_less` of the
    /// perturbation model.
    pub fn with_validity(wave: &WaveConfig, thr: &ValidityThresholds) -> Self {
        let mut b = Bounds::hard();
        b.upper[Channel::H.index()] = thr.much_less / wave.wavenumber();
        b
    }

    pub fn clamp(&self, p: &BsdfParams) -> BsdfParams {
        let a = p.as_array();
        BsdfParams::from_array(std::array::from_fn(|i| a[i].clamp(self.lower[i], self.upper[i])))
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..4 {
            if !(self.lower[i] <= self.upper[i]) {
                return Err(Error::domain(format!("empty bound interval for channel {i}")));
            }
        }
        if self.lower[0] <= 0.0 || self.lower[1] <= 0.0 || self.lower[2] < 1.0 {
            return Err(Error::domain("bounds must keep h, l > 0 and eps_r >= 1"));
        }
        if self.lower[3] < 0.0 || self.upper[3] > 1.0 {
            return Err(Error::domain("tau bounds must lie within [0, 1]"));
        }
        Ok(())
    }
}

/// Maps vertices onto shared optimization slots.
///
/// A vertex without a slot is frozen. Vertices sharing a slot always carry
/// identical values in the learnable channels; their gradients are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBinding {
    slot_of: Vec<Option<usize>>,
    num_slots: usize,
    learnable: [bool; 4],
}

impl ParamBinding {
    /// Every vertex independent, every channel learnable.
    pub fn per_vertex(n: usize) -> Self {
        ParamBinding {
            slot_of: (0..n).map(Some).collect(),
            num_slots: n,
            learnable: [true; 4],
        }
    }

    /// Explicit slot assignment. Slot ids must be dense (`0..k`).
    pub fn from_slots(slot_of: Vec<Option<usize>>) -> Result<Self> {
        let num_slots = slot_of.iter().flatten().max().map_or(0, |m| m + 1);
        let mut used = vec![false; num_slots];
        for s in slot_of.iter().flatten() {
            used[*s] = true;
        }
        if used.iter().any(|u| !u) {
            return Err(Error::ParamMap("slot ids must be dense".into()));
        }
        Ok(ParamBinding {
            slot_of,
            num_slots,
            learnable: [true; 4],
        })
    }

    /// Restricts optimization to `channels`.
    pub fn with_channels(mut self, channels: &[Channel]) -> Self {
        self.learnable = [false; 4];
        for c in channels {
            self.learnable[c.index()] = true;
        }
        self
    }

    pub fn len(&self) -> usize {
        self.slot_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slot_of.is_empty()
    }

    pub fn num_slots(&self) -> usize {
        self.num_slots
    }

    pub fn slot(&self, vertex: usize) -> Option<usize> {
        self.slot_of[vertex]
    }

    pub fn is_learnable(&self, ch: Channel) -> bool {
        self.learnable[ch.index()]
    }

    pub fn learnable_channels(&self) -> Vec<Channel> {
        Channel::ALL.into_iter().filter(|c| self.is_learnable(*c)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Per-step multiplicative learning-rate decay applied after
    /// `decay_start` steps; step `t` uses `lr * decay^max(0, t - 1 - decay_start)`.
    pub decay: f64,
    pub decay_start: usize,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.02,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            decay: 1.0,
            decay_start: 0,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr > 0.0
            && self.lr.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0
            && self.decay > 0.0
            && self.decay <= 1.0;
        if !ok {
            return Err(Error::domain(
                "Adam needs lr > 0, betas in [0, 1), eps > 0 and decay in (0, 1]",
            ));
        }
        Ok(())
    }
}

/// Adam moments and the slot values they act on.
#[derive(Debug, Clone)]
pub struct OptimState {
    pub adam: AdamConfig,
    pub bounds: Bounds,
    pub space: ParamSpace,
    pub binding: ParamBinding,
    x: Vec<[f64; 4]>,
    m: Vec<[f64; 4]>,
    v: Vec<[f64; 4]>,
    step: u64,
}

impl OptimState {
    /// Projects `params` into `bounds` (warning on any change), aligns tied
    /// vertices on the value of the first vertex in each slot, and records the
    /// starting point.
    pub fn new(
        adam: AdamConfig,
        bounds: Bounds,
        space: ParamSpace,
        binding: ParamBinding,
        params: &mut ParamMap,
    ) -> Result<Self> {
        adam.validate()?;
        bounds.validate()?;
        if binding.len() != params.len() {
            return Err(Error::Shape(format!(
                "binding covers {} vertices, parameter map has {}",
                binding.len(),
                params.len()
            )));
        }
        let mut clamped = 0usize;
        for v in 0..params.len() {
            let p = params.get(v);
            let c = bounds.clamp(&p);
            if c != p {
                clamped += 1;
                params.set(v, c);
            }
        }
        if clamped > 0 {
            warn!("{clamped} initial parameter records were outside the bounds and have been clamped");
        }

        let mut x = vec![[f64::NAN; 4]; binding.num_slots()];
        let mut seen = vec![false; binding.num_slots()];
        for v in 0..params.len() {
            let Some(s) = binding.slot(v) else { continue };
            if !seen[s] {
                seen[s] = true;
                let p = params.get(v).as_array();
                x[s] = std::array::from_fn(|i| space.0[i].forward(p[i]));
            } else {
                let lead = params.get(
                    (0..v).find(|&u| binding.slot(u) == Some(s)).expect("slot has a leader"),
                );
                let mut p = params.get(v);
                for ch in binding.learnable_channels() {
                    p = p.with_channel(ch, lead.channel(ch));
                }
                params.set(v, p);
            }
        }
        let n = binding.num_slots();
        Ok(OptimState {
            adam,
            bounds,
            space,
            binding,
            x,
            m: vec![[0.0; 4]; n],
            v: vec![[0.0; 4]; n],
            step: 0,
        })
    }

    /// Per-vertex, all channels, default coordinates and hard bounds.
    pub fn per_vertex(adam: AdamConfig, params: &mut ParamMap) -> Result<Self> {
        let binding = ParamBinding::per_vertex(params.len());
        OptimState::new(adam, Bounds::hard(), ParamSpace::default(), binding, params)
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Current slot values in optimization coordinates.
    pub fn slots(&self) -> &[[f64; 4]] {
        &self.x
    }

    /// Gradient with respect to the slot coordinates.
    pub fn slot_gradient(&self, params: &ParamMap, grads: &GradBuffer) -> Vec<[f64; 4]> {
        let mut g = vec![[0.0; 4]; self.binding.num_slots()];
        for v in 0..params.len() {
            let Some(s) = self.binding.slot(v) else { continue };
            let p = params.get(v).as_array();
            let gv = grads.get(v);
            for i in 0..4 {
                if self.binding.learnable[i] {
                    g[s][i] += gv[i] * self.space.0[i].jacobian(p[i]);
                }
            }
        }
        g
    }
}

/// One bias-corrected Adam update in the optimization coordinates followed by
/// projection onto the bounds box. A non-finite gradient leaves the state
/// untouched and is reported as an error.
pub fn adam_step(state: &mut OptimState, params: &ParamMap, grads: &GradBuffer) -> Result<ParamMap> {
    if grads.len() != params.len() || params.len() != state.binding.len() {
        return Err(Error::Shape(format!(
            "gradient has {} vertices, parameters {}, binding {}",
            grads.len(),
            params.len(),
            state.binding.len()
        )));
    }
    if !grads.is_finite() {
        return Err(Error::NonFinite("gradient; optimizer step rejected".into()));
    }
    let g = state.slot_gradient(params, grads);
    let AdamConfig {
        lr,
        beta1,
        beta2,
        eps,
        decay,
        decay_start,
    } = state.adam;
    state.step += 1;
    let t = state.step as i32;
    let decayed = state.step.saturating_sub(1 + decay_start as u64);
    let lr = lr * decay.powf(decayed as f64);
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);

    let mut changed = vec![[false; 4]; state.x.len()];
    for s in 0..state.x.len() {
        for i in 0..4 {
            if !state.binding.learnable[i] {
                continue;
            }
            let gi = g[s][i];
            state.m[s][i] = beta1 * state.m[s][i] + (1.0 - beta1) * gi;
            state.v[s][i] = beta2 * state.v[s][i] + (1.0 - beta2) * gi * gi;
            let upd = lr * (state.m[s][i] / c1) / ((state.v[s][i] / c2).sqrt() + eps);
            let sc = state.space.0[i];
            let lo = sc.forward(state.bounds.lower[i]);
            let hi = sc.forward(state.bounds.upper[i]);
            let nx = (state.x[s][i] - upd).clamp(lo, hi);
            if nx != state.x[s][i] {
                state.x[s][i] = nx;
                changed[s][i] = true;
            }
        }
    }

    let mut out = params.clone();
    for v in 0..out.len() {
        let Some(s) = state.binding.slot(v) else { continue };
        let mut p = out.get(v).as_array();
        for i in 0..4 {
            if changed[s][i] {
                p[i] = state.space.0[i]
                    .inverse(state.x[s][i])
                    .clamp(state.bounds.lower[i], state.bounds.upper[i]);
            }
        }
        out.set(v, BsdfParams::from_array(p));
    }
    Ok(out)
}
