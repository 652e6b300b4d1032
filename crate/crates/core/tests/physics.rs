//! Displacement recovery from rendered baseband signals and data cubes.

use std::f64::consts::PI;

use heartid_core::radar::{reconstruct_echo, simulate_cube, EchoSearch, RadarConfig, TargetTrack};
use heartid_core::signal::phase_unwrapped;
use heartid_core::synth::{
    displacement, generate_cohort, render_baseband, well_separated_cohort, CohortConfig, PersonProfile, Recording,
    RenderMode, Schedule,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn detrend(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let tm = (n - 1.0) / 2.0;
    let xm = x.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        sxy += (i as f64 - tm) * (v - xm);
        sxx += (i as f64 - tm).powi(2);
    }
    let slope = sxy / sxx;
    x.iter().enumerate().map(|(i, v)| v - xm - slope * (i as f64 - tm)).collect()
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (detrend(a), detrend(b));
    let ab: f64 = a.iter().zip(&b).map(|(p, q)| p * q).sum();
    let aa: f64 = a.iter().map(|p| p * p).sum();
    let bb: f64 = b.iter().map(|q| q * q).sum();
    ab / (aa * bb).sqrt()
}

#[test]
fn noiseless_baseband_returns_the_displacement() {
    let cfg = RadarConfig::default();
    for (i, p) in well_separated_cohort().iter().enumerate() {
        let d = displacement(p, 30.0, 100.0, 40 + i as u64).unwrap();
        let s = render_baseband(&d, &cfg, f64::INFINITY, 1).unwrap();
        let phase = phase_unwrapped(&s).unwrap();
        let scale = cfg.wavelength / (4.0 * PI);
        let offset = phase.samples()[0] * scale - d.samples()[0];
        let worst = phase
            .samples()
            .iter()
            .zip(d.samples())
            .map(|(ph, x)| (ph * scale - offset - x).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-9, "person {}: {worst} m", p.id);
    }
}

#[test]
fn cube_reconstruction_tracks_the_displacement() {
    let cfg = RadarConfig::default();
    let p = PersonProfile::default();
    for (snr_noise, seed) in [(0.0, 3u64), (0.1, 4)] {
        let d = displacement(&p, 20.0, cfg.fs_slow, seed).unwrap();
        let n = d.len();
        let track = TargetTrack {
            range_m: d.samples().iter().map(|x| 1.5 + x).collect(),
            amplitude: vec![1.0; n],
            angle_deg: 0.0,
            phase_offset: 0.7,
        };
        let cube = simulate_cube(&cfg, &[track], n, snr_noise, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let echo = reconstruct_echo(&cube, &EchoSearch::default()).unwrap();
        assert!(!echo.low_snr);
        assert!((echo.range_m - 1.5).abs() <= cfg.range_resolution());
        assert_eq!(echo.angle_deg, 0.0);
        let phase = phase_unwrapped(&echo.signal).unwrap();
        let r = correlation(phase.samples(), d.samples());
        assert!(r >= 0.99, "noise {snr_noise}: correlation {r}");

        let base = render_baseband(&d, &cfg, f64::INFINITY, 0).unwrap();
        let r = correlation(phase.samples(), phase_unwrapped(&base).unwrap().samples());
        assert!(r >= 0.99, "noise {snr_noise}: baseband correlation {r}");
    }
}

#[test]
fn cube_and_baseband_cohorts_agree() {
    let profiles = &well_separated_cohort()[..2];
    let schedule = Schedule::days(1, 1);
    let base_cfg = CohortConfig {
        duration: 10.0,
        seed: 21,
        ..Default::default()
    };
    let cube_cfg = CohortConfig {
        mode: RenderMode::Cube,
        ..base_cfg.clone()
    };
    let base = generate_cohort(profiles, &schedule, &base_cfg).unwrap();
    let cube = generate_cohort(profiles, &schedule, &cube_cfg).unwrap();
    assert_eq!(base.len(), cube.len());
    for (b, c) in base.iter().zip(&cube) {
        assert_eq!(b.sample_id(), c.sample_id());
        let (Recording::Baseband(bs), Recording::Cube(cc)) = (&b.recording, &c.recording) else {
            panic!("unexpected recording kinds");
        };
        let echo = reconstruct_echo(cc, &EchoSearch::default()).unwrap();
        let r = correlation(
            phase_unwrapped(bs).unwrap().samples(),
            phase_unwrapped(&echo.signal).unwrap().samples(),
        );
        assert!(r >= 0.99, "{}: {r}", b.sample_id());
    }
}
