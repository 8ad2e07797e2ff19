use dpilot_core::analysis::gauss_markov_cov;
use dpilot_core::channel::{
    apply_channel, derive_beta, ebn0_from_noise_var, init_channel, noise_var_from_ebn0,
    step_channel, ChannelLayout, ChannelState, FadingProcessParams,
};
use dpilot_core::harness::mean_and_se;
use dpilot_core::rng::RandomStream;
use dpilot_core::Complex64;
use proptest::prelude::*;

const CHAINS: usize = 10_000;

/// Runs `CHAINS` independent single-tap chains and records `conj(g_0) g_d`
/// at each requested lag plus `|g_end|^2`.
fn chain_products(d_i: f64, lags: &[u64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let params = FadingProcessParams::flat(d_i);
    let beta = derive_beta(&params).unwrap();
    let max_lag = *lags.iter().max().unwrap();
    let mut products = vec![Vec::with_capacity(CHAINS); lags.len()];
    let mut power = Vec::with_capacity(CHAINS);
    let mut rng = RandomStream::new(11);
    for _ in 0..CHAINS {
        let mut state = init_channel(&params, &mut rng).unwrap();
        let g0 = state.taps[0];
        for step in 1..=max_lag {
            state = step_channel(state, beta, &params, &mut rng).unwrap();
            if let Some(i) = lags.iter().position(|&l| l == step) {
                products[i].push((g0.conj() * state.taps[0]).re);
            }
        }
        power.push(state.taps[0].norm_sqr());
    }
    (products, power)
}

#[test]
fn autocorrelation_and_stationarity() {
    let d_i = 1000.0;
    let lags = [1, 10, 500, 1000];
    let (products, power) = chain_products(d_i, &lags);
    let beta = derive_beta(&FadingProcessParams::flat(d_i)).unwrap();
    for (lag, p) in lags.iter().zip(&products) {
        let (mean, se) = mean_and_se(p);
        let want = gauss_markov_cov(beta, 1.0, *lag);
        assert!(
            (mean - want).abs() <= 3.0 * se,
            "lag {lag}: {mean} vs {want} (se {se})"
        );
    }
    let (mean, se) = mean_and_se(&products[3]);
    assert!((mean - 0.5).abs() <= 3.0 * se, "lag D_I gives phi: {mean}");
    let (p, se) = mean_and_se(&power);
    assert!((p - 1.0).abs() <= 3.0 * se, "stationary power {p}");
}

#[test]
fn ten_decorrelation_intervals_forget_the_start() {
    let params = FadingProcessParams::flat(10.0);
    let beta = derive_beta(&params).unwrap();
    let mut rng = RandomStream::new(5);
    let start = Complex64::new(1.0, 0.0);
    let mut samples = Vec::with_capacity(CHAINS);
    for _ in 0..CHAINS {
        let mut state = ChannelState::from_taps(vec![start], ChannelLayout::Taps);
        for _ in 0..100 {
            state = step_channel(state, beta, &params, &mut rng).unwrap();
        }
        samples.push(state.taps[0].re);
    }
    let (mean, se) = mean_and_se(&samples);
    assert!(
        (mean - 0.5f64.powi(10)).abs() <= 3.0 * se,
        "{mean} (se {se})"
    );
}

#[test]
fn dicode_tap_variance() {
    let params = FadingProcessParams::dicode(100.0, 0.25);
    let mut rng = RandomStream::new(2);
    let draws = 100_000;
    let (mut p0, mut p1) = (Vec::with_capacity(draws), Vec::with_capacity(draws));
    for _ in 0..draws {
        let s = init_channel(&params, &mut rng).unwrap();
        p0.push(s.taps[0].norm_sqr());
        p1.push(s.taps[1].norm_sqr());
    }
    let (m0, se0) = mean_and_se(&p0);
    let (m1, se1) = mean_and_se(&p1);
    assert!((m0 - 1.0).abs() <= 3.0 * se0);
    assert!((m1 - 0.0625).abs() <= 3.0 * se1, "{m1}");
}

#[test]
fn multi_tap_chains_stay_stationary() {
    let params = FadingProcessParams::flat(50.0).with_profile(vec![1.0, 0.5, 0.25, 0.125]);
    let beta = derive_beta(&params).unwrap();
    let mut rng = RandomStream::new(8);
    let mut powers = vec![Vec::new(); 4];
    for _ in 0..CHAINS {
        let mut s = init_channel(&params, &mut rng).unwrap();
        for _ in 0..20 {
            s = step_channel(s, beta, &params, &mut rng).unwrap();
        }
        for (t, p) in powers.iter_mut().enumerate() {
            p.push(s.taps[t].norm_sqr());
        }
    }
    for (t, p) in powers.iter().enumerate() {
        let (m, se) = mean_and_se(p);
        let want = 0.25f64.powi(t as i32);
        assert!((m - want).abs() <= 3.0 * se, "tap {t}: {m} vs {want}");
    }
}

#[test]
fn noise_only_output_has_requested_variance() {
    let mut rng = RandomStream::new(3);
    let mut state = ChannelState::from_taps(vec![Complex64::new(1.0, 0.0)], ChannelLayout::Taps);
    let x = vec![Complex64::new(0.0, 0.0); 100_000];
    let y = apply_channel(&x, &mut state, 2.0, &mut rng).unwrap();
    let p: Vec<f64> = y.iter().map(|v| v.norm_sqr()).collect();
    let (m, se) = mean_and_se(&p);
    assert!((m - 2.0).abs() <= 3.0 * se, "{m}");
}

#[test]
fn dicode_impulse_response() {
    let mut rng = RandomStream::new(0);
    let taps = vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)];
    let mut state = ChannelState::from_taps(taps, ChannelLayout::Taps);
    let mut x = vec![Complex64::new(0.0, 0.0); 6];
    x[0] = Complex64::new(1.0, 0.0);
    let y = apply_channel(&x, &mut state, 0.0, &mut rng).unwrap();
    let re: Vec<f64> = y.iter().map(|v| v.re).collect();
    assert_eq!(re, vec![1.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b)),
        len,
    )
}

proptest! {
    #[test]
    fn noise_calibration_round_trips(ebn0 in -10.0f64..30.0, rate in 0.05f64..1.0, m in prop::sample::select(vec![1usize, 2, 4])) {
        let nv = noise_var_from_ebn0(ebn0, rate, m);
        prop_assert!((ebn0_from_noise_var(nv, rate, m) - ebn0).abs() < 1e-9);
    }

    #[test]
    fn noiseless_channel_is_linear(
        taps in complex_vec(3),
        x1 in complex_vec(16),
        x2 in complex_vec(16),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let mut rng = RandomStream::new(0);
        let run = |x: &[Complex64], rng: &mut RandomStream| {
            let mut s = ChannelState::from_taps(taps.clone(), ChannelLayout::Taps);
            apply_channel(x, &mut s, 0.0, rng).unwrap()
        };
        let mix: Vec<Complex64> = x1.iter().zip(&x2).map(|(p, q)| p * a + q * b).collect();
        let lhs = run(&mix, &mut rng);
        let y1 = run(&x1, &mut rng);
        let y2 = run(&x2, &mut rng);
        for k in 0..16 {
            prop_assert!((lhs[k] - (y1[k] * a + y2[k] * b)).norm() < 1e-9);
        }
    }

    #[test]
    fn beta_stays_in_unit_interval(phi in 0.01f64..0.99, d_i in 0.5f64..1e6) {
        let p = FadingProcessParams { phi, ..FadingProcessParams::flat(d_i) };
        let b = derive_beta(&p).unwrap();
        prop_assert!(b > 0.0 && b < 1.0);
        prop_assert!((b.powf(d_i) - phi).abs() < 1e-9);
    }
}
