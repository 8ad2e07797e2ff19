use dpilot_core::decoder::{
    decode_product, grand_hard, grand_soft_list, ComponentDecoder, ProductInput,
    DEFAULT_MAX_QUERIES,
};
use dpilot_core::fec::gf2::word_to_bits;
use dpilot_core::fec::{encode, make_ebch, make_extended_hamming, make_product};
use dpilot_core::rng::RandomStream;
use proptest::prelude::*;

fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[test]
fn hard_grand_is_minimum_distance_on_all_inputs() {
    let code = make_extended_hamming(3).unwrap();
    let codebook: Vec<Vec<u8>> = (0..16u8)
        .map(|i| encode(&word_to_bits(i as u128, 4), &code).unwrap())
        .collect();
    for y in 0..256u128 {
        let y = word_to_bits(y, 8);
        let out = grand_hard(&y, &code, u64::MAX).unwrap();
        let best = codebook.iter().map(|c| hamming(c, &y)).min().unwrap();
        assert!(!out.abandoned);
        assert!(codebook.contains(&out.codeword));
        assert_eq!(hamming(&out.codeword, &y), best);
    }
}

#[test]
fn soft_list_costs_are_sorted() {
    let mut rng = RandomStream::new(21);
    let code = make_ebch(5, 1).unwrap();
    for _ in 0..1000 {
        let llrs: Vec<f64> = (0..code.n()).map(|_| 2.0 * rng.gaussian() + 1.0).collect();
        let out = grand_soft_list(&llrs, &code, 4, DEFAULT_MAX_QUERIES).unwrap();
        assert!(!out.abandoned);
        let c = &out.candidates;
        assert!(c.windows(2).all(|w| w[0].cost <= w[1].cost + 1e-12));
        assert!(c
            .windows(2)
            .all(|w| w[0].probability >= w[1].probability - 1e-12));
        assert!(c.iter().all(|cand| code.is_codeword(&cand.codeword)));
        let total: f64 = c.iter().map(|cand| cand.probability).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert_eq!(out.codeword, c[0].codeword);
    }
}

#[test]
fn soft_cost_matches_flipped_reliabilities() {
    let mut rng = RandomStream::new(2);
    let code = make_ebch(4, 1).unwrap();
    for _ in 0..200 {
        let llrs: Vec<f64> = (0..code.n()).map(|_| 3.0 * rng.gaussian()).collect();
        let out = grand_soft_list(&llrs, &code, 3, DEFAULT_MAX_QUERIES).unwrap();
        for cand in &out.candidates {
            let cost: f64 = llrs
                .iter()
                .zip(&cand.codeword)
                .filter(|(l, &b)| (**l < 0.0) != (b == 1))
                .map(|(l, _)| l.abs())
                .sum();
            assert!((cost - cand.cost).abs() < 1e-9);
        }
    }
}

#[test]
fn abandonment_returns_raw_word() {
    let code = make_ebch(6, 2).unwrap();
    let mut rng = RandomStream::new(5);
    let c = encode(&rng.bits(code.k()), &code).unwrap();
    let mut y = c.clone();
    for i in [1, 9, 17, 33, 50] {
        y[i] ^= 1;
    }
    let out = grand_hard(&y, &code, 10).unwrap();
    assert!(out.abandoned);
    assert_eq!(out.queries_used, 10);
    assert_eq!(out.codeword, y);
}

#[test]
fn product_single_and_double_errors_corrected() {
    let code = make_product(&make_ebch(5, 1).unwrap()).unwrap();
    let mut rng = RandomStream::new(8);
    for _ in 0..50 {
        let c = encode(&rng.bits(code.k()), &code).unwrap();
        let mut y = c.clone();
        let a = (rng.uniform() * 1024.0) as usize;
        let b = (rng.uniform() * 1024.0) as usize;
        y[a] ^= 1;
        if a != b {
            y[b] ^= 1;
        }
        let out = decode_product(
            ProductInput::Hard(&y),
            &code,
            ComponentDecoder::Hard {
                max_queries: DEFAULT_MAX_QUERIES,
            },
            4,
        )
        .unwrap();
        assert_eq!(out.codeword, c);
        assert!(!out.abandoned);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn queries_respect_budget(seed in any::<u64>(), budget in 1u64..400, flips in 0usize..6) {
        let code = make_ebch(6, 2).unwrap();
        let mut rng = RandomStream::new(seed);
        let mut y = encode(&rng.bits(code.k()), &code).unwrap();
        for _ in 0..flips {
            let i = (rng.uniform() * 64.0) as usize;
            y[i] ^= 1;
        }
        let hard = grand_hard(&y, &code, budget).unwrap();
        prop_assert!(hard.queries_used <= budget);
        prop_assert_eq!(hard.abandoned, !code.is_codeword(&hard.codeword));
        if hard.abandoned {
            prop_assert_eq!(hard.queries_used, budget);
        }
        let llrs: Vec<f64> = y.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 } * (0.1 + rng.uniform())).collect();
        let soft = grand_soft_list(&llrs, &code, 2, budget).unwrap();
        prop_assert!(soft.queries_used <= budget);
        if soft.abandoned {
            prop_assert_eq!(soft.queries_used, budget);
        }
    }

    #[test]
    fn product_decode_is_idempotent(seed in any::<u64>(), noise in 0.2f64..1.2, soft in any::<bool>()) {
        let code = make_product(&make_extended_hamming(4).unwrap()).unwrap();
        let mut rng = RandomStream::new(seed);
        let c = encode(&rng.bits(code.k()), &code).unwrap();
        let llrs: Vec<f64> = c.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 } + noise * rng.gaussian()).collect();
        let decoder = if soft {
            ComponentDecoder::Soft { max_queries: DEFAULT_MAX_QUERIES }
        } else {
            ComponentDecoder::Hard { max_queries: DEFAULT_MAX_QUERIES }
        };
        let first = if soft {
            decode_product(ProductInput::Soft(&llrs), &code, decoder, 4).unwrap()
        } else {
            let hard: Vec<u8> = llrs.iter().map(|&l| u8::from(l < 0.0)).collect();
            decode_product(ProductInput::Hard(&hard), &code, decoder, 4).unwrap()
        };
        let again = decode_product(ProductInput::Hard(&first.codeword), &code,
            ComponentDecoder::Hard { max_queries: DEFAULT_MAX_QUERIES }, 4).unwrap();
        if !first.abandoned {
            prop_assert!(code.is_codeword(&first.codeword));
            prop_assert_eq!(&again.codeword, &first.codeword);
        }
        prop_assert_eq!(first.abandoned, !code.is_codeword(&first.codeword));
    }
}
