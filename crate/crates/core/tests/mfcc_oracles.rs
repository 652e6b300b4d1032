//! Filter bank, mel energies and DCT checked against independent oracles.

use std::f64::consts::PI;

use heartid_core::mfcc::{build_mel_bank, dct2, extract_features, mel_energies, FeatureConfig, FeatureKind, MelBank, MelBankConfig};
use heartid_core::signal::{stft_magnitude, ComplexSeries, RealSeries, Spectrogram, StftConfig};
use heartid_oracles as oracle;
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Centres for L = 64, fs = 100 Hz, f_ref = 5 Hz, f' = 1 kHz, evaluated with
/// 50-digit arithmetic (mpmath) and rounded to 25 significant digits.
const M_TILDE_64: f64 = 188.5616643463903543025572;
const CENTRES_64: [f64; 66] = [
    0.0, 0.1878980178119124446325813, 0.3828571686433540425266367, 0.5851428070738999480708226,
    0.7950302596030292126332942, 1.012805199390921528841483, 1.238764035081864555163264, 1.473214314239490743520645,
    1.716475141942950429981083, 1.968877615113763162927404, 2.230765273164499920638204, 2.502494565582664152514991,
    2.784435337086189701998877, 3.076971331010890007540739, 3.380500711615008082822809, 3.69543660601176442406557,
    4.022207666467515225243113, 4.361258653830852462884102, 4.713051042886738268817143, 5.078063650459607687493137,
    5.456793287120337031230203, 5.849755433384101745090855, 6.257484941319481700053521, 6.680536762523758518859325,
    7.11948670345523597857171, 7.574932209150649571718726, 8.047493176394365623680394, 8.537812797446156542047552,
    9.046558435475931374422565, 9.574422532896956485323316, 10.12212355383387856866733, 10.69040696200832233528745,
    11.28004623537304129090777, 11.89184391887561766121054, 12.52663271678460480495413, 13.18527662606485301980243,
    13.86867211234463077932351, 14.57774933007512418847079, 15.3134733885430467114763, 16.07684566545950087829543,
    16.8689051699129886579411, 17.69072995654165563580365, 18.54343859284956749607922, 19.42819168166415047503892,
    20.34619344080697886713145, 21.29869334212796448464161, 22.28698781213380118243367, 23.31242199652535213484578,
    24.37639159104565259745226, 25.48034474113045479559267, 26.62578401294688719687569, 27.81426843850296520527356,
    29.04741563761150650875868, 30.32690401959660913938529, 31.65447506773938613959846, 33.03193570957226529707848,
    34.46116077624800898979587, 35.9440955543308468104486, 37.48275843348290732892877, 39.07924365364965631792177,
    40.73572415548347465937355, 42.45445453788502429355076, 44.23777412668784621981374, 46.08811015866290914824773,
    48.00798108517678683044484, 50.0,
];

fn default_bank() -> MelBank {
    build_mel_bank(&MelBankConfig::new(100.0)).unwrap()
}

#[test]
fn centres_match_high_precision_values() {
    let bank = default_bank();
    assert!((bank.m_tilde - M_TILDE_64).abs() <= 1e-12 * M_TILDE_64);
    assert_eq!(bank.centers.len(), 66);
    assert_eq!(bank.centers[0], 0.0);
    for (got, want) in bank.centers.iter().zip(CENTRES_64).skip(1) {
        assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
    }
}

#[test]
fn centres_match_closed_form_oracle() {
    for &(l, fr, fp, fs) in &[(64, 5.0, 1000.0, 100.0), (10, 1.0, 700.0, 44.0), (128, 20.0, 50.0, 1000.0)] {
        let bank = build_mel_bank(&MelBankConfig { n_filters: l, f_ref: fr, f_prime: fp, fs }).unwrap();
        let (mt, c) = oracle::mel_centres(l, fr, fp, fs);
        assert!((bank.m_tilde - mt).abs() <= 1e-12 * mt);
        for (a, b) in bank.centers.iter().zip(&c) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-3));
        }
    }
}

proptest! {
    #[test]
    fn edges_are_zero_and_nyquist(
        l in 1usize..300,
        f_ref in 0.01f64..500.0,
        f_prime in 0.01f64..1e5,
        fs in 1.0f64..1e5,
    ) {
        let bank = build_mel_bank(&MelBankConfig { n_filters: l, f_ref, f_prime, fs }).unwrap();
        prop_assert_eq!(bank.centers[0], 0.0);
        let top = bank.centers[l + 1];
        prop_assert!((top - fs / 2.0).abs() <= 1e-9 * fs / 2.0);
        prop_assert!(bank.centers.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn dct_matches_naive_sum(x in prop::collection::vec(-1e3f64..1e3, 1..=256)) {
        let fast = dct2(&x).unwrap();
        let slow = oracle::naive_dct2(&x);
        let scale = slow.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }
}

#[test]
fn dct_matches_naive_sum_for_every_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=256 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fast = dct2(&x).unwrap();
        let slow = oracle::naive_dct2(&x);
        let scale = slow.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-10 * scale, "n = {n}");
        }
    }
}

/// Brute-force mel energies of a spectrogram under the linear-interpolation
/// model: dense midpoint sums in frequency, then in time.
fn brute_force_energies(spec: &Spectrogram, bank: &MelBank, cells: usize, density: usize) -> (Vec<f64>, Vec<f64>) {
    let n = bank.n_filters();
    let mut pos = vec![vec![0.0; spec.n_frames()]; n];
    let mut neg = vec![vec![0.0; spec.n_frames()]; n];
    for (k, row) in spec.values.rows().into_iter().enumerate() {
        let mut p: Vec<(f64, f64)> = Vec::new();
        let mut m: Vec<(f64, f64)> = Vec::new();
        for (&f, &v) in spec.freqs.iter().zip(row.iter()) {
            if f >= 0.0 {
                p.push((f, v));
            }
            if f <= 0.0 {
                m.push((-f, v));
            }
        }
        // even two-sided window: -fs/2 also stands for +fs/2
        if spec.two_sided && (spec.freqs[0] + spec.fs / 2.0).abs() < 1e-9 {
            p.push((spec.fs / 2.0, row[0]));
        }
        m.sort_by(|a, b| a.0.total_cmp(&b.0));
        for l in 0..n {
            pos[l][k] = oracle::filter_integral(&bank.centers, l, cells, |f| oracle::interp(&p, f));
            if spec.two_sided {
                neg[l][k] = oracle::filter_integral(&bank.centers, l, cells, |f| oracle::interp(&m, f));
            }
        }
    }
    let t_cells = spec.n_frames() * density;
    let integrate = |per_frame: &Vec<f64>| oracle::time_integral(&spec.frame_times, per_frame, spec.t0, spec.duration, t_cells);
    (pos.iter().map(integrate).collect(), neg.iter().map(integrate).collect())
}

fn assert_close(got: &[f64], want: &[f64], rel: f64) {
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (l, (a, b)) in got.iter().zip(want).enumerate() {
        assert!((a - b).abs() <= rel * b.abs().max(1e-6 * scale), "filter {l}: {a} vs {b}");
    }
}

#[test]
fn complex_tone_matches_brute_force() {
    let fs = 100.0;
    let s: Vec<Complex64> = (0..1000).map(|i| Complex64::from_polar(1.0, 2.0 * PI * 3.0 * i as f64 / fs)).collect();
    let x = ComplexSeries::new(s, fs).unwrap();
    let spec = stft_magnitude(&x, &StftConfig::default()).unwrap();
    let bank = default_bank();
    let m = mel_energies(&spec, &bank).unwrap();
    // 4000 cells per filter is over 10x the STFT bin density for every filter
    let (pos, _) = brute_force_energies(&spec, &bank, 4000, 10);
    assert_close(&m.positive, &pos, 1e-3);
    let total: f64 = m.positive.iter().sum();
    for (l, v) in m.positive.iter().enumerate() {
        let (lo, hi) = (bank.centers[l], bank.centers[l + 2]);
        if *v > 1e-6 * total {
            assert!(lo < 3.5 && hi > 2.5, "filter {l} [{lo}, {hi}] holds {v}");
        }
    }
    let neg = m.negative.unwrap();
    assert!(neg.iter().all(|v| *v <= 1e-9 * total));
}

/// Analytic smooth spectrum, periodic in frequency over 100 Hz like the
/// spectrum of a 100 Hz sampled signal, and linear in time.
fn smooth(t: f64, f: f64, bumps: &[(f64, f64, f64)], duration: f64) -> f64 {
    let shape: f64 = 0.2
        + bumps
            .iter()
            .flat_map(|&b| [-100.0, 0.0, 100.0].map(|shift| (b, shift)))
            .map(|((a, c, w), shift)| a * (-(f - c - shift).powi(2) / (2.0 * w * w)).exp())
            .sum::<f64>();
    shape * (1.0 + 0.3 * (t / duration - 0.5))
}

#[test]
fn random_smooth_spectrograms_match_dense_quadrature() {
    let bank = default_bank();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..5 {
        let bumps: Vec<(f64, f64, f64)> = (0..4)
            .map(|_| (rng.random_range(0.2..2.0), rng.random_range(-50.0..50.0), rng.random_range(6.0..15.0)))
            .collect();
        let duration = 10.0;
        let (win, hop, fs) = (200usize, 0.1, 100.0);
        let freqs: Vec<f64> = (0..win).map(|i| (i as f64 - 100.0) * 0.5).collect();
        let times: Vec<f64> = (0..81).map(|k| 1.0 + k as f64 * hop).collect();
        let values = Array2::from_shape_fn((times.len(), win), |(k, i)| smooth(times[k], freqs[i], &bumps, duration));
        let spec = Spectrogram {
            values,
            freqs,
            frame_times: times,
            window_len: 2.0,
            hop,
            fs,
            t0: 0.0,
            duration,
            two_sided: true,
        };
        let m = mel_energies(&spec, &bank).unwrap();
        // analytic double integral: linear time factor integrates to its midpoint
        let want = |sign: f64| -> Vec<f64> {
            (0..64)
                .map(|l| duration * oracle::filter_integral(&bank.centers, l, 20_000, |f| smooth(duration / 2.0, sign * f, &bumps, duration)))
                .collect()
        };
        let (wp, wn) = (want(1.0), want(-1.0));
        for (l, (a, b)) in m.positive.iter().zip(&wp).enumerate() {
            assert!((a - b).abs() <= 1e-3 * b, "trial {trial} +{l}: {a} vs {b}");
        }
        for (l, (a, b)) in m.negative.as_ref().unwrap().iter().zip(&wn).enumerate() {
            assert!((a - b).abs() <= 1e-3 * b, "trial {trial} -{l}: {a} vs {b}");
        }
    }
}

#[test]
fn real_noise_spectrogram_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = RealSeries::new((0..700).map(|_| rng.random_range(-1.0..1.0)).collect(), 100.0).unwrap();
    let spec = stft_magnitude(&x, &StftConfig { two_sided: false, ..Default::default() }).unwrap();
    let bank = default_bank();
    let m = mel_energies(&spec, &bank).unwrap();
    let (pos, _) = brute_force_energies(&spec, &bank, 4000, 10);
    assert_close(&m.positive, &pos, 1e-3);
}

#[test]
fn constant_spectrogram_gives_duration() {
    let duration = 8.0;
    let spec = Spectrogram {
        values: Array2::ones((61, 200)),
        freqs: (0..200).map(|i| (i as f64 - 100.0) * 0.5).collect(),
        frame_times: (0..61).map(|k| 1.0 + k as f64 * 0.1).collect(),
        window_len: 2.0,
        hop: 0.1,
        fs: 100.0,
        t0: 0.0,
        duration,
        two_sided: true,
    };
    let m = mel_energies(&spec, &default_bank()).unwrap();
    for v in m.positive.iter().chain(m.negative.as_ref().unwrap()) {
        assert!((v - duration).abs() <= 1e-3 * duration);
    }
}

#[test]
fn real_signal_gives_equal_positive_and_negative_energies() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s: Vec<Complex64> = (0..1500).map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0)).collect();
    let x = ComplexSeries::new(s, 100.0).unwrap();
    let spec = stft_magnitude(&x, &StftConfig::default()).unwrap();
    let m = mel_energies(&spec, &default_bank()).unwrap();
    for (p, n) in m.positive.iter().zip(m.negative.as_ref().unwrap()) {
        assert!((p - n).abs() <= 1e-9 * p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn features_scale_with_amplitude(c in 0.05f64..20.0, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<Complex64> = (0..600)
            .map(|i| Complex64::from_polar(1.0 + 0.1 * rng.random_range(-1.0..1.0), 0.3 * (i as f64 * 0.07).sin() + rng.random_range(-0.1..0.1)))
            .collect();
        let a = ComplexSeries::new(s.clone(), 100.0).unwrap();
        let b = ComplexSeries::new(s.iter().map(|v| v * c).collect(), 100.0).unwrap();
        let cfg = FeatureConfig::default();
        // the phase branch is scale-free, so only amp and comp are covariant
        for kind in [FeatureKind::Amp, FeatureKind::Comp] {
            let fa = extract_features(&a, &cfg, kind).unwrap();
            let fb = extract_features(&b, &cfg, kind).unwrap();
            let scale = fa.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (x, y) in fa.values.iter().zip(&fb.values) {
                prop_assert!((c * x - y).abs() <= 1e-9 * c * scale);
            }
        }
    }
}
