use crate::analysis::{gauss_markov_cov, prob_correct};
use crate::channel::ChannelLayout;
use crate::channel::{derive_beta, FadingProcessParams};
use crate::decoder::{grand_hard, DEFAULT_MAX_QUERIES};
use crate::error::Result;
use crate::estimator::{estimate_ls, mmse_equalize};
use crate::fec::{crc_append, crc_check, encode, make_ebch, make_extended_hamming, CrcSpec};
use crate::Complex64;

/// One named check of the quick oracle suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> SelfTestResult {
    match f() {
        Ok((passed, detail)) => SelfTestResult {
            name,
            passed,
            detail,
        },
        Err(e) => SelfTestResult {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

/// Fast closed-form and exhaustive checks of the core kernels.
pub fn run_selftest() -> Vec<SelfTestResult> {
    vec![
        check("beta_closed_form", || {
            let beta = derive_beta(&FadingProcessParams::flat(25_000.0))?;
            let want = 2f64.powf(-1.0 / 25_000.0);
            Ok(((beta - want).abs() < 1e-15, format!("beta = {beta:.12}")))
        }),
        check("gauss_markov_half_life", || {
            let beta = derive_beta(&FadingProcessParams::flat(100.0))?;
            let c = gauss_markov_cov(beta, 1.0, 100);
            Ok(((c - 0.5).abs() < 1e-12, format!("cov at lag D_I = {c:.12}")))
        }),
        check("hamming_8_4_min_distance", || {
            let code = make_extended_hamming(3)?;
            let d = code.component().min_distance_exhaustive()?;
            Ok((d == 4, format!("d = {d}")))
        }),
        check("ebch_32_21_min_distance", || {
            let code = make_ebch(5, 2)?;
            let d = code.component().min_distance_exhaustive()?;
            Ok((
                code.k() == 21 && d == 6,
                format!("[{}, {}] d = {d}", code.n(), code.k()),
            ))
        }),
        check("grand_single_error", || {
            let code = make_extended_hamming(3)?;
            let c = encode(&[1, 0, 1, 1], &code)?;
            let mut y = c.clone();
            y[5] ^= 1;
            let out = grand_hard(&y, &code, DEFAULT_MAX_QUERIES)?;
            Ok((
                out.codeword == c && out.queries_used == 7,
                format!("queries = {}", out.queries_used),
            ))
        }),
        check("crc_round_trip", || {
            let spec = CrcSpec::crc16();
            let u: Vec<u8> = (0..40).map(|i| ((i * 7) % 3 == 0) as u8).collect();
            let mut v = crc_append(&u, &spec);
            let clean = crc_check(&v, &spec)?;
            v[3] ^= 1;
            let flipped = crc_check(&v, &spec)?;
            Ok((
                clean && !flipped,
                format!("clean {clean}, flipped {flipped}"),
            ))
        }),
        check("ls_noiseless", || {
            let x: Vec<Complex64> = (0..16)
                .map(|i| Complex64::new(if i % 3 == 0 { -1.0 } else { 1.0 }, 0.0))
                .collect();
            let h = [Complex64::new(0.8, -0.3), Complex64::new(0.2, 0.1)];
            let y: Vec<Complex64> = (0..x.len())
                .map(|k| {
                    h[0] * x[k]
                        + if k > 0 {
                            h[1] * x[k - 1]
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                })
                .collect();
            let est = estimate_ls(&x, &y, 2)?;
            let err: f64 = est.iter().zip(&h).map(|(a, b)| (a - b).norm_sqr()).sum();
            Ok((err < 1e-20, format!("squared error {err:.3e}")))
        }),
        check("mmse_scalar", || {
            let f = Complex64::new(0.6, 0.8);
            let y = [f * Complex64::new(1.0, 0.0)];
            let eq = mmse_equalize(&y, &[f], ChannelLayout::Taps, 0.25)?;
            // |F|^2 = 1, s = 0.25: y_eq = 1 / 1.25, var = 0.25 / 1.25
            let ok = (eq.y_eq[0] - Complex64::new(0.8, 0.0)).norm() < 1e-12
                && (eq.effective_var[0] - 0.2).abs() < 1e-12;
            Ok((
                ok,
                format!("y_eq = {}, var = {}", eq.y_eq[0], eq.effective_var[0]),
            ))
        }),
        check("prob_correct_limits", || {
            let hi = prob_correct(4096, 0.5, 1.0, 0.4)?;
            let lo = prob_correct(4096, 0.5, 1.0, 0.6)?;
            Ok((hi > 0.999 && lo < 1e-6, format!("{hi:.6} / {lo:.3e}")))
        }),
    ]
}
