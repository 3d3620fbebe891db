//! Double-scale microwave surface BSDF.
//!
//! The diffuse term is the first-order small perturbation backscatter, the
//! specular term the Kirchhoff (geometric optics) backscatter, blended as
//! `(1 - tau) * sigma_spm + tau * sigma_ka`. Every term is differentiated
//! analytically with respect to `(h, l, eps_r, tau)`.
//!
//! Monostatic conventions used throughout: `theta_s = theta_i = theta`, the
//! Bragg wavenumber is `(k_dx, k_dy) = (2 k sin(theta), 0)`, roughness is
//! isotropic (`l_x = l_y = l`), and the Gaussian correlation
//! `C(x) = exp(-x^2 / l^2)` gives a mean-square slope of `2 h^2 / l^2`.

mod validity;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::BsdfParams;

pub use validity::{check_validity, Condition, ValidityReport, ValidityThresholds, Violation};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    #[serde(rename = "HH")]
    Hh,
    #[serde(rename = "VV")]
    Vv,
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HH" => Ok(Polarization::Hh),
            "VV" => Ok(Polarization::Vv),
            "HV" | "VH" => Err(Error::domain(
                "cross-polarized channels are identically zero in both models; use HH or VV",
            )),
            other => Err(Error::domain(format!("unknown polarization `{other}`"))),
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::Hh => "HH",
            Polarization::Vv => "VV",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PsdKind {
    #[default]
    Gaussian,
    Exponential,
}

impl FromStr for PsdKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(PsdKind::Gaussian),
            "exponential" | "exp" => Ok(PsdKind::Exponential),
            other => Err(Error::domain(format!("unknown PSD kind `{other}`"))),
        }
    }
}

/// Carrier description shared by both scattering terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveConfig {
    frequency: f64,
    pub polarization: Polarization,
    pub psd: PsdKind,
}

impl WaveConfig {
    pub fn new(frequency: f64, polarization: Polarization, psd: PsdKind) -> Result<Self> {
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::domain(format!("frequency must be positive, got {frequency}")));
        }
        Ok(WaveConfig {
            frequency,
            polarization,
            psd,
        })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency
    }

    /// `2 pi / lambda` in rad/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI * self.frequency / SPEED_OF_LIGHT
    }
}

/// Backscatter coefficient and its partials with respect to the four
/// surface parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SigmaGrad {
    pub sigma: f64,
    pub d_h: f64,
    pub d_l: f64,
    pub d_eps: f64,
    pub d_tau: f64,
}

impl SigmaGrad {
    /// Partials in channel order `(h, l, eps_r, tau)`.
    pub fn grad(&self) -> [f64; 4] {
        [self.d_h, self.d_l, self.d_eps, self.d_tau]
    }
}

/// Anything that maps a local incidence angle and surface parameters to a
/// differentiable backscatter value.
pub trait ScatterModel: Sync {
    fn eval(&self, theta: f64, params: &BsdfParams) -> Result<SigmaGrad>;
}

impl<F> ScatterModel for F
where
    F: Fn(f64, &BsdfParams) -> Result<SigmaGrad> + Sync,
{
    fn eval(&self, theta: f64, params: &BsdfParams) -> Result<SigmaGrad> {
        self(theta, params)
    }
}

/// The blended SPM + KA model for one carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleScale {
    pub wave: WaveConfig,
}

impl ScatterModel for DoubleScale {
    fn eval(&self, theta: f64, params: &BsdfParams) -> Result<SigmaGrad> {
        bsdf_eval(theta, params, &self.wave)
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..PI / 2.0).contains(&theta) {
        return Err(Error::domain(format!("incidence angle {theta} rad outside [0, pi/2)")));
    }
    Ok(())
}

fn check_eps(eps_r: f64) -> Result<()> {
    if !(eps_r >= 1.0 && eps_r.is_finite()) {
        return Err(Error::domain(format!("eps_r must be >= 1, got {eps_r}")));
    }
    Ok(())
}

fn check_roughness(h: f64, l: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite() && l > 0.0 && l.is_finite()) {
        return Err(Error::domain(format!("h and l must be positive, got h={h}, l={l}")));
    }
    Ok(())
}

/// Normal-incidence Fresnel amplitude `(1 - sqrt(eps_r)) / (1 + sqrt(eps_r))`.
pub fn fresnel_r0(eps_r: f64) -> Result<f64> {
    check_eps(eps_r)?;
    let u = eps_r.sqrt();
    Ok((1.0 - u) / (1.0 + u))
}

/// `R0^2` and `d(R0^2)/d eps_r`.
fn fresnel_r0_sq_grad(eps_r: f64) -> (f64, f64) {
    let u = eps_r.sqrt();
    let r0 = (1.0 - u) / (1.0 + u);
    (r0 * r0, -2.0 * r0 / ((1.0 + u) * (1.0 + u) * u))
}

/// Squared Fresnel coefficient for the given polarization.
pub fn fresnel_sq(theta: f64, eps_r: f64, pol: Polarization) -> Result<f64> {
    check_theta(theta)?;
    check_eps(eps_r)?;
    Ok(fresnel_sq_grad(theta, eps_r, pol).0)
}

/// `f_pq` and its derivative with respect to `eps_r`.
fn fresnel_sq_grad(theta: f64, eps_r: f64, pol: Polarization) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let s2 = s * s;
    // eps_r - sin^2 written as (eps_r - 1) + cos^2 so q == cos exactly at eps_r = 1
    let q = ((eps_r - 1.0) + c * c).sqrt();
    match pol {
        Polarization::Hh => {
            let sum = c + q;
            let r = (c - q) / sum;
            (r * r, -2.0 * r * c / (q * sum * sum))
        }
        Polarization::Vv => {
            let num = (eps_r - 1.0) * (s2 - eps_r * c * c);
            let root = eps_r * c + q;
            let den = root * root;
            let g = num / den;
            let d_num = (s2 - eps_r * c * c) - (eps_r - 1.0) * c * c;
            let d_den = 2.0 * root * (c + 0.5 / q);
            let d_g = (d_num * den - num * d_den) / (den * den);
            (g * g, 2.0 * g * d_g)
        }
    }
}

/// Isotropic surface roughness spectrum `W(k_dx, k_dy)` in m^4.
pub fn psd(k_dx: f64, k_dy: f64, h: f64, l: f64, kind: PsdKind) -> Result<f64> {
    check_roughness(h, l)?;
    let l2 = l * l;
    Ok(match kind {
        PsdKind::Gaussian => {
            h * h * l2 / (4.0 * PI) * (-(k_dx * k_dx + k_dy * k_dy) * l2 / 4.0).exp()
        }
        PsdKind::Exponential => {
            h * h * l2 / (PI * PI * (1.0 + k_dx * k_dx * l2) * (1.0 + k_dy * k_dy * l2))
        }
    })
}

/// `W(K, 0)` with partials in `h` and `l`.
fn psd_backscatter_grad(bragg: f64, h: f64, l: f64, kind: PsdKind) -> (f64, f64, f64) {
    let l2 = l * l;
    let k2 = bragg * bragg;
    match kind {
        PsdKind::Gaussian => {
            let w = h * h * l2 / (4.0 * PI) * (-k2 * l2 / 4.0).exp();
            (w, 2.0 * w / h, w * (2.0 / l - 0.5 * k2 * l))
        }
        PsdKind::Exponential => {
            let den = 1.0 + k2 * l2;
            let w = h * h * l2 / (PI * PI * den);
            (w, 2.0 * w / h, w * (2.0 / l - 2.0 * k2 * l / den))
        }
    }
}

/// `(sigma, d/dh, d/dl, d/deps)` of the first-order SPM backscatter.
fn spm_grad(theta: f64, p: &BsdfParams, wave: &WaveConfig) -> [f64; 4] {
    let k = wave.wavenumber();
    let c = theta.cos();
    let pre = 8.0 * k.powi(4) * c.powi(4);
    let (w, dw_dh, dw_dl) = psd_backscatter_grad(2.0 * k * theta.sin(), p.h, p.l, wave.psd);
    let (f, df) = fresnel_sq_grad(theta, p.eps_r, wave.polarization);
    [pre * w * f, pre * dw_dh * f, pre * dw_dl * f, pre * w * df]
}

/// `(sigma, d/dh, d/dl, d/deps)` of the Kirchhoff backscatter.
fn ka_grad(theta: f64, p: &BsdfParams) -> [f64; 4] {
    let (s, c) = theta.sin_cos();
    let c4 = c.powi(4);
    let tan2 = (s * s) / (c * c);
    // a = 2 * mean-square slope = 4 h^2 / l^2
    let a = 4.0 * p.h * p.h / (p.l * p.l);
    let (r0_sq, dr0_sq) = fresnel_r0_sq_grad(p.eps_r);
    let shape = (-tan2 / a).exp() / (c4 * a);
    let sigma = r0_sq * shape;
    let ds_da = sigma * (tan2 / (a * a) - 1.0 / a);
    [
        sigma,
        ds_da * 2.0 * a / p.h,
        -ds_da * 2.0 * a / p.l,
        dr0_sq * shape,
    ]
}

/// First-order SPM backscatter `8 k^4 cos^4(theta) W(2k sin(theta), 0) f_pq`.
pub fn sigma_spm(theta: f64, params: &BsdfParams, wave: &WaveConfig) -> Result<f64> {
    check_theta(theta)?;
    check_eps(params.eps_r)?;
    check_roughness(params.h, params.l)?;
    Ok(spm_grad(theta, params, wave)[0])
}

/// Kirchhoff backscatter, identical for HH and VV.
pub fn sigma_ka(theta: f64, params: &BsdfParams) -> Result<f64> {
    check_theta(theta)?;
    check_eps(params.eps_r)?;
    check_roughness(params.h, params.l)?;
    Ok(ka_grad(theta, params)[0])
}

/// Blended backscatter and its four partials.
pub fn bsdf_eval(theta: f64, params: &BsdfParams, wave: &WaveConfig) -> Result<SigmaGrad> {
    check_theta(theta)?;
    check_eps(params.eps_r)?;
    check_roughness(params.h, params.l)?;
    if !(0.0..=1.0).contains(&params.tau) {
        return Err(Error::domain(format!("tau must be in [0, 1], got {}", params.tau)));
    }
    let spm = spm_grad(theta, params, wave);
    let ka = ka_grad(theta, params);
    let t = params.tau;
    let mix = |i: usize| (1.0 - t) * spm[i] + t * ka[i];
    let out = SigmaGrad {
        sigma: mix(0),
        d_h: mix(1),
        d_l: mix(2),
        d_eps: mix(3),
        d_tau: ka[0] - spm[0],
    };
    if ![out.sigma, out.d_h, out.d_l, out.d_eps, out.d_tau]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(Error::NonFinite(format!(
            "backscatter at theta={theta}, params={params:?}"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
