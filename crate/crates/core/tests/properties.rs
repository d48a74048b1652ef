//! Cross-module properties of the engines.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use proptest::prelude::*;

use twophoton::barrier::{quarter_wave_stack, stack_response, Polarization};
use twophoton::eraser::{eraser_scan, EraserConfig};
use twophoton::fit::fit_dip;
use twophoton::hom::{delay_axis, hom_coincidence_scan, sample_delay_measurement, ArmConfig};
use twophoton::materials::MaterialCatalog;
use twophoton::optics::{jones_element, slab_transfer, JonesKind, ScalarTransfer};
use twophoton::spectral::{conditional_collapse, correlation_time, Arm, Bandwidth, PairSource, PhotonPairState};
use twophoton::{Error, SPEED_OF_LIGHT};

const NM: f64 = 1e-9;

fn source(bandwidth: Bandwidth, grid_points: usize, entangled: bool) -> PhotonPairState {
    PairSource {
        pump_wavelength: 351.0 * NM,
        daughter_center_wavelength: 702.0 * NM,
        bandwidth,
        grid_points,
        span_factor: 6.0,
        entangled,
    }
    .build()
    .unwrap()
}

fn dip_scan(pair: &PhotonPairState) -> twophoton::hom::HomScan {
    let e = ArmConfig::empty();
    let tc = correlation_time(pair);
    hom_coincidence_scan(pair, &e, &e, &delay_axis(0.0, 8.0 * tc, 241)).unwrap()
}

#[test]
fn correlation_time_is_the_fitted_dip_width() {
    for bw in [
        Bandwidth::Fwhm(6.0 * NM),
        Bandwidth::Rms(6.0 * NM),
        Bandwidth::Rms(3.0 * NM),
    ] {
        let pair = source(bw, 257, true);
        let fit = fit_dip(&dip_scan(&pair)).unwrap();
        assert!((fit.rms_width / correlation_time(&pair) - 1.0).abs() < 0.02);
        assert!((fit.visibility - 1.0).abs() < 0.01);
    }
}

#[test]
fn labelled_photons_give_no_dip() {
    let pair = source(Bandwidth::Rms(6.0 * NM), 257, true);
    let tc = correlation_time(&pair);
    let profile = eraser_scan(
        &EraserConfig {
            hwp_angle: FRAC_PI_4,
            pol1: None,
            pol2: None,
            pair,
        },
        &delay_axis(0.0, 8.0 * tc, 81),
    )
    .unwrap();
    assert!(matches!(fit_dip(&profile.scan), Err(Error::NoDip { .. })));
}

#[test]
fn dip_sits_at_the_analytic_group_delay() {
    let pair = source(Bandwidth::Rms(6.0 * NM), 257, true);
    let tc = correlation_time(&pair);
    let w0 = pair.center_angular_frequency();

    // Linear plus quadratic phase: the dip lands exactly on the group delay.
    let even = ScalarTransfer::SpectralPhase {
        center: w0,
        coefficients: vec![0.0, 35.2e-12, 1.5e-27],
    };
    let m = sample_delay_measurement(&pair, &even).unwrap();
    assert!((m.delay_shift - 35.2e-12).abs() < 1e-4 * tc);

    // Real SF11 adds third-order dispersion, which moves the dip by a
    // fraction of a femtosecond (β₃σ²/2 in order of magnitude).
    let sf11 = MaterialCatalog::bundled().get("SF11").unwrap().clone();
    let sample = ScalarTransfer::displacement(&sf11, 12.7e-3).unwrap();
    let expect = sample.group_delay(w0).unwrap();
    let m = sample_delay_measurement(&pair, &sample).unwrap();
    assert!(
        (m.delay_shift - expect).abs() < 0.05 * tc,
        "{} vs {}",
        m.delay_shift,
        expect
    );
    assert!((m.delay_shift - expect).abs() < 1e-5 * expect);
}

#[test]
fn peak_visibility_is_negative() {
    let pair = source(Bandwidth::Rms(6.0 * NM), 257, true);
    let tc = correlation_time(&pair);
    let profile = eraser_scan(
        &EraserConfig {
            hwp_angle: FRAC_PI_4,
            pol1: Some(FRAC_PI_4),
            pol2: Some(-FRAC_PI_4),
            pair,
        },
        &delay_axis(0.0, 8.0 * tc, 121),
    )
    .unwrap();
    let fit = fit_dip(&profile.scan).unwrap();
    assert!((fit.visibility + 1.0).abs() < 0.01);
    assert!(profile.scan.rates.iter().all(|r| (0.0..=2.0 + 1e-12).contains(r)));
}

#[test]
fn narrow_filter_lengthens_the_partner_coherence() {
    let pair = source(Bandwidth::Fwhm(6.0 * NM), 2001, true);
    let (open, open_len) = conditional_collapse(&pair, 702.0 * NM, f64::INFINITY, Arm::A).unwrap();
    let (narrow, narrow_len) = conditional_collapse(&pair, 702.0 * NM, 0.1 * NM, Arm::A).unwrap();
    assert!(narrow.rms_width() < open.rms_width());
    assert!(narrow_len / open_len > 40.0);
    assert!((open_len - SPEED_OF_LIGHT / pair.nominal_rms_bandwidth()).abs() < 1e-3 * open_len);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pair_is_normalized_and_conserves_energy(
        fwhm_nm in 0.5..20.0f64,
        half_points in 32usize..400,
        span in 3.0..10.0f64,
        entangled: bool,
    ) {
        let pair = PairSource {
            pump_wavelength: 351.0 * NM,
            daughter_center_wavelength: 702.0 * NM,
            bandwidth: Bandwidth::Fwhm(fwhm_nm * NM),
            grid_points: 2 * half_points + 1,
            span_factor: span,
            entangled,
        }
        .build()
        .unwrap();
        prop_assert!((pair.norm_sqr() - 1.0).abs() < 1e-12);
        for i in 0..pair.grid().len() {
            let (a, b) = pair.photon_frequencies(i);
            prop_assert_eq!(a + b, pair.pump_angular_frequency());
            let m = pair.grid().mirror(i);
            prop_assert_eq!(pair.amplitude()[i], pair.amplitude()[m]);
        }
    }

    #[test]
    fn separable_filtering_is_inert(center_nm in 699.0..705.0f64, fwhm_nm in 0.05..5.0f64) {
        let pair = source(Bandwidth::Fwhm(6.0 * NM), 257, false);
        let (collapsed, _) = conditional_collapse(&pair, center_nm * NM, fwhm_nm * NM, Arm::B).unwrap();
        let marginal = pair.marginal(Arm::A);
        let worst = collapsed
            .density
            .iter()
            .zip(&marginal.density)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        prop_assert!(worst < 1e-12);
    }

    #[test]
    fn slab_group_delays_add(l1 in 0.0..20e-3f64, l2 in 0.0..20e-3f64, lam_nm in 450.0..1500.0f64) {
        let cat = MaterialCatalog::bundled();
        let a = slab_transfer(cat.get("SF11").unwrap(), l1).unwrap();
        let b = slab_transfer(cat.get("fused_silica").unwrap(), l2).unwrap();
        let w = twophoton::wavelength_to_angular(lam_nm * NM);
        let sum = a.group_delay(w).unwrap() + b.group_delay(w).unwrap();
        let both = a.then(b).group_delay(w).unwrap();
        prop_assert!((both - sum).abs() <= 1e-6 * sum.abs().max(1e-30));
    }

    #[test]
    fn jones_elements_are_unitary_or_projectors(angle in -PI..PI) {
        prop_assert!(jones_element(JonesKind::Hwp, angle).is_unitary(1e-12));
        prop_assert!(jones_element(JonesKind::Qwp, angle).is_unitary(1e-12));
        prop_assert!(jones_element(JonesKind::Lp, angle).is_projector(1e-12));
    }

    #[test]
    fn barrier_is_unitary_and_reciprocal(
        lam_nm in 400.0..1200.0f64,
        angle in 0.0..(FRAC_PI_2 - 0.01),
        s_pol: bool,
        periods in 1usize..8,
    ) {
        let pol = if s_pol { Polarization::S } else { Polarization::P };
        let stack = quarter_wave_stack(700.0 * NM, 2.22, 1.41, periods).unwrap();
        let f = stack_response(&stack, lam_nm * NM, angle, pol).unwrap();
        prop_assert!((f.transmittance + f.reflectance - 1.0).abs() < 1e-10);
        prop_assert!((f.transmittance - f.t.norm_sqr()).abs() < 1e-12);
        let b = stack_response(&stack.reversed(), lam_nm * NM, angle, pol).unwrap();
        prop_assert!((f.t - b.t).norm() < 1e-10);
    }

    #[test]
    fn hom_rates_stay_in_range(tau_fs in -200.0..200.0f64, disp in -3e-27..3e-27f64) {
        let pair = source(Bandwidth::Rms(6.0 * NM), 257, true);
        let arm = ArmConfig::empty().with_element(ScalarTransfer::SpectralPhase {
            center: pair.center_angular_frequency(),
            coefficients: vec![0.0, 0.0, disp],
        });
        let scan = hom_coincidence_scan(&pair, &arm, &ArmConfig::empty(), &[tau_fs * 1e-15]).unwrap();
        prop_assert!((0.0..=2.0).contains(&scan.rates[0]));
    }
}
