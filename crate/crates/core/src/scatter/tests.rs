use super::*;
use crate::scene::Channel;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn xband(pol: Polarization) -> WaveConfig {
    WaveConfig::new(9.6e9, pol, PsdKind::Gaussian).unwrap()
}

#[test]
fn wavenumber_times_wavelength() {
    let w = xband(Polarization::Hh);
    assert_relative_eq!(w.wavenumber() * w.wavelength(), 2.0 * PI, max_relative = 1e-12);
    assert!(WaveConfig::new(0.0, Polarization::Hh, PsdKind::Gaussian).is_err());
}

#[test]
fn cross_pol_rejected() {
    assert!("HV".parse::<Polarization>().is_err());
    assert!("vh".parse::<Polarization>().is_err());
    assert_eq!("hh".parse::<Polarization>().unwrap(), Polarization::Hh);
}

#[test]
fn r0_values() {
    assert_eq!(fresnel_r0(1.0).unwrap(), 0.0);
    assert_relative_eq!(fresnel_r0(4.0).unwrap(), -1.0 / 3.0, max_relative = 1e-15);
    // 75 is the cube permittivity of the closed-loop experiment
    assert_relative_eq!(fresnel_r0(75.0).unwrap(), -0.792_966_107_085_286_9, max_relative = 1e-14);
    assert!(fresnel_r0(0.5).is_err());
}

#[test]
fn fresnel_sq_values() {
    assert_relative_eq!(
        fresnel_sq(0.0, 4.0, Polarization::Hh).unwrap(),
        1.0 / 9.0,
        max_relative = 1e-14
    );
    for theta in [0.0, 0.3, 1.0, 1.5] {
        assert!(fresnel_sq(theta, 1.0, Polarization::Hh).unwrap().abs() < 1e-30);
    }
    assert_eq!(fresnel_sq(0.0, 1.0, Polarization::Vv).unwrap(), 0.0);
    assert!(fresnel_sq(PI / 2.0, 4.0, Polarization::Hh).is_err());
    assert!(fresnel_sq(-0.1, 4.0, Polarization::Vv).is_err());
}

#[test]
fn psd_values() {
    let (h, l) = (0.003, 0.02);
    assert_relative_eq!(
        psd(0.0, 0.0, h, l, PsdKind::Gaussian).unwrap(),
        h * h * l * l / (4.0 * PI),
        max_relative = 1e-15
    );
    assert_relative_eq!(
        psd(0.0, 0.0, h, l, PsdKind::Exponential).unwrap(),
        h * h * l * l / (PI * PI),
        max_relative = 1e-15
    );
    assert_relative_eq!(
        psd(2.0 / l, 0.0, h, l, PsdKind::Gaussian).unwrap(),
        h * h * l * l / (4.0 * PI) * (-1.0f64).exp(),
        max_relative = 1e-14
    );
    assert!(psd(0.0, 0.0, 0.0, l, PsdKind::Gaussian).is_err());
    assert!(psd(0.0, 0.0, h, -1.0, PsdKind::Exponential).is_err());
}

#[test]
fn spm_golden_value() {
    // independent high-precision transcription of the SPM formula
    let p = BsdfParams::new(0.002, 0.01, 25.0, 0.0);
    let s = sigma_spm(30f64.to_radians(), &p, &xband(Polarization::Hh)).unwrap();
    assert_relative_eq!(s, 0.042_222_356_371_042_76, max_relative = 1e-12);
}

#[test]
fn spm_limits() {
    let w = xband(Polarization::Hh);
    let theta = 0.6;
    let base = BsdfParams::new(1e-3, 0.01, 9.0, 0.0);
    let s1 = sigma_spm(theta, &base, &w).unwrap();
    let s2 = sigma_spm(theta, &base.with_channel(Channel::H, 1e-6), &w).unwrap();
    assert_relative_eq!(s2 / s1, 1e-6, max_relative = 1e-12);
    let flat = sigma_spm(theta, &base.with_channel(Channel::EpsR, 1.0), &w).unwrap();
    assert!(flat.abs() < 1e-30);
}

#[test]
fn ka_golden_and_normal_incidence() {
    let p = BsdfParams::new(0.02, 0.1, 6.885, 1.0);
    let s = sigma_ka(45f64.to_radians(), &p).unwrap();
    assert_relative_eq!(s, 0.009_691_121_085_032_844, max_relative = 1e-12);

    let r0 = fresnel_r0(p.eps_r).unwrap();
    let s0 = sigma_ka(0.0, &p).unwrap();
    assert_relative_eq!(s0, r0 * r0 * p.l * p.l / (4.0 * p.h * p.h), max_relative = 1e-14);

    assert_eq!(sigma_ka(0.7, &p.with_channel(Channel::EpsR, 1.0)).unwrap(), 0.0);
    assert!(sigma_ka(0.7, &p.with_channel(Channel::H, 0.0)).is_err());
}

#[test]
fn tau_endpoints_and_midpoint() {
    let w = xband(Polarization::Vv);
    let theta = 0.8;
    let p = BsdfParams::new(0.004, 0.02, 12.0, 0.0);
    let spm = sigma_spm(theta, &p, &w).unwrap();
    let ka = sigma_ka(theta, &p).unwrap();
    let at0 = bsdf_eval(theta, &p, &w).unwrap();
    assert_eq!(at0.sigma, spm);
    assert_eq!(at0.d_tau, ka - spm);
    let at1 = bsdf_eval(theta, &p.with_channel(Channel::Tau, 1.0), &w).unwrap();
    assert_eq!(at1.sigma, ka);
    let mid = bsdf_eval(theta, &p.with_channel(Channel::Tau, 0.5), &w).unwrap();
    assert_relative_eq!(mid.sigma, 0.5 * (spm + ka), max_relative = 1e-15);
}

fn central_fd(f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    (f(x + step) - f(x - step)) / (2.0 * step)
}

#[test]
fn vv_partials_match_finite_differences() {
    let w = WaveConfig::new(5.3e9, Polarization::Vv, PsdKind::Exponential).unwrap();
    let p = BsdfParams::new(0.01, 0.05, 15.0, 0.3);
    let theta = 0.9;
    let g = bsdf_eval(theta, &p, &w).unwrap();
    let eval = |q: BsdfParams| bsdf_eval(theta, &q, &w).unwrap().sigma;
    let fd_h = central_fd(|x| eval(p.with_channel(Channel::H, x)), p.h, 1e-5 * p.h);
    let fd_l = central_fd(|x| eval(p.with_channel(Channel::L, x)), p.l, 1e-5 * p.l);
    let fd_e = central_fd(|x| eval(p.with_channel(Channel::EpsR, x)), p.eps_r, 1e-4);
    assert_relative_eq!(g.d_h, fd_h, max_relative = 1e-6);
    assert_relative_eq!(g.d_l, fd_l, max_relative = 1e-6);
    assert_relative_eq!(g.d_eps, fd_e, max_relative = 1e-6);
}

#[test]
fn out_of_bounds_params_rejected() {
    let w = xband(Polarization::Hh);
    assert!(bsdf_eval(0.3, &BsdfParams::new(0.01, 0.01, 4.0, 1.5), &w).is_err());
    assert!(bsdf_eval(0.3, &BsdfParams::new(0.01, 0.01, 0.9, 0.5), &w).is_err());
}

proptest! {
    #[test]
    fn hh_normal_incidence_equals_r0_squared(eps in 1.0f64..200.0) {
        let r0 = fresnel_r0(eps).unwrap();
        let f = fresnel_sq(0.0, eps, Polarization::Hh).unwrap();
        prop_assert!((f - r0 * r0).abs() <= 1e-14 * (r0 * r0).max(1e-300));
    }

    #[test]
    fn vv_normal_incidence_equals_hh(eps in 1.0f64..200.0) {
        let a = fresnel_sq(0.0, eps, Polarization::Hh).unwrap();
        let b = fresnel_sq(0.0, eps, Polarization::Vv).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn sigma_nonnegative(
        theta in 0.0f64..1.55,
        h in 1e-5f64..0.1,
        l in 1e-5f64..0.5,
        eps in 1.0f64..100.0,
        tau in 0.0f64..=1.0,
    ) {
        let w = xband(Polarization::Hh);
        let g = bsdf_eval(theta, &BsdfParams::new(h, l, eps, tau), &w).unwrap();
        prop_assert!(g.sigma >= 0.0);
    }
}
