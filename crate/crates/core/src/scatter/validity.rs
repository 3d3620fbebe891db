//! Applicability regions of the two scattering terms.
//!
//! Evaluated in free space (`k1 = k`). "Much less than one" is read as
//! `< much_less` (default 0.3). The Kirchhoff roughness condition uses the
//! backscatter form `k h > sqrt(10) / (cos(theta_i) + cos(theta_s))
//! = sqrt(10) / (2 cos(theta))`, since the difference form is singular at
//! `theta_s = theta_i`. The mean radius of curvature of a Gaussian surface is
//! `l^2 / (h sqrt(24 / pi))`, which makes `R_c > lambda` equivalent to
//! `l^2 > 2.76 h lambda`.

use std::f64::consts::PI;

use super::WaveConfig;
use crate::scene::BsdfParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityThresholds {
    pub much_less: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        ValidityThresholds { much_less: 0.3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    SpmKh,
    SpmK3H2L,
    SpmSlope,
    KaKl,
    KaKh,
    KaCurvature,
    KaGaussian,
}

impl Condition {
    pub fn is_spm(self) -> bool {
        matches!(self, Condition::SpmKh | Condition::SpmK3H2L | Condition::SpmSlope)
    }

    pub fn label(self) -> &'static str {
        match self {
            Condition::SpmKh => "k*h < c",
            Condition::SpmK3H2L => "k^3*h^2*l < c",
            Condition::SpmSlope => "sqrt(2)*h/l < 0.3",
            Condition::KaKl => "k*l > 6",
            Condition::KaKh => "k*h > sqrt(10)/(2cos(theta))",
            Condition::KaCurvature => "R_c > lambda",
            Condition::KaGaussian => "l^2 > 2.76*h*lambda",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub spm_ok: bool,
    pub ka_ok: bool,
    pub violated: Vec<Violation>,
}

impl ValidityReport {
    pub fn violates(&self, c: Condition) -> bool {
        self.violated.iter().any(|v| v.condition == c)
    }
}

/// Mean radius of curvature of a Gaussian-correlated surface.
pub fn curvature_radius(h: f64, l: f64) -> f64 {
    // C''''(0) = 12 / l^4 for C(x) = exp(-x^2 / l^2)
    1.0 / (h * (2.0 / PI * 12.0 / l.powi(4)).sqrt())
}

pub fn check_validity(params: &BsdfParams, theta: f64, wave: &WaveConfig) -> ValidityReport {
    check_validity_with(params, theta, wave, ValidityThresholds::default())
}

pub fn check_validity_with(
    params: &BsdfParams,
    theta: f64,
    wave: &WaveConfig,
    thr: ValidityThresholds,
) -> ValidityReport {
    let k = wave.wavenumber();
    let lambda = wave.wavelength();
    let (h, l) = (params.h, params.l);
    // (condition, lhs, rhs, holds when lhs < rhs)
    let checks = [
        (Condition::SpmKh, k * h, thr.much_less, true),
        (Condition::SpmK3H2L, k.powi(3) * h * h * l, thr.much_less, true),
        (Condition::SpmSlope, 2f64.sqrt() * h / l, 0.3, true),
        (Condition::KaKl, k * l, 6.0, false),
        (Condition::KaKh, k * h, 10f64.sqrt() / (2.0 * theta.cos()), false),
        (Condition::KaCurvature, curvature_radius(h, l), lambda, false),
        (Condition::KaGaussian, l * l, 2.76 * h * lambda, false),
    ];
    let violated: Vec<Violation> = checks
        .iter()
        .filter(|(_, lhs, rhs, less)| if *less { !(lhs < rhs) } else { !(lhs > rhs) })
        .map(|&(condition, lhs, rhs, _)| Violation { condition, lhs, rhs })
        .collect();
    ValidityReport {
        spm_ok: !violated.iter().any(|v| v.condition.is_spm()),
        ka_ok: !violated.iter().any(|v| !v.condition.is_spm()),
        violated,
    }
}
