use gftsvd::audio_io::{mix_at_snr, AudioClip};
use gftsvd::enhance::{
    oracle_ratio_mask, read_checkpoint, si_sdr_value_and_grad, write_checkpoint, MlpParams,
};
use gftsvd::framing::FramingConfig;
use gftsvd::graph_basis::{
    build_adjacency, circulant_singular_oracle, decompose_svd, orthogonality_deviation, read_basis,
    write_basis, GraphBasis,
};
use gftsvd::metrics::{si_sdr, snr};
use gftsvd::numfmt::sig9;
use gftsvd::transform::{analyze, synthesize};
use proptest::prelude::*;
use std::sync::OnceLock;

fn small_basis() -> &'static GraphBasis {
    static B: OnceLock<GraphBasis> = OnceLock::new();
    B.get_or_init(|| decompose_svd(&build_adjacency(64, 3).unwrap()).unwrap())
}

fn small_cfg() -> FramingConfig {
    FramingConfig::new(16000, 48, 12, 64, Default::default()).unwrap()
}

fn signal(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn svd_factors_are_orthonormal_and_match_oracle(n in 3usize..40, kf in 0.0f64..1.0) {
        let k = 1 + ((n - 2) as f64 * kf) as usize;
        let a = build_adjacency(n, k).unwrap();
        let b = decompose_svd(&a).unwrap();
        prop_assert!(orthogonality_deviation(b.psi()) < 1e-10);
        prop_assert!(orthogonality_deviation(b.gamma()) < 1e-10);
        prop_assert!(b.reconstruction_error(&a) < 1e-9);
        let oracle = circulant_singular_oracle(&a);
        for (s, o) in b.sigma().iter().zip(&oracle) {
            prop_assert!((s - o).abs() < 1e-9);
        }
        prop_assert!(b.sigma().windows(2).into_iter().all(|w| w[0] >= w[1]));
    }

    #[test]
    fn basis_serialization_is_bit_exact(n in 2usize..24, kf in 0.0f64..1.0) {
        let k = 1 + ((n - 2) as f64 * kf) as usize;
        let b = decompose_svd(&build_adjacency(n, k).unwrap()).unwrap();
        let mut bytes = Vec::new();
        write_basis(&b, &mut bytes).unwrap();
        let back = read_basis(&bytes[..]).unwrap();
        let mut again = Vec::new();
        write_basis(&back, &mut again).unwrap();
        prop_assert_eq!(bytes, again);
    }

    #[test]
    fn analysis_synthesis_is_identity(x in signal(1..700)) {
        let b = small_basis();
        let y = synthesize(&analyze(&x, &small_cfg(), b).unwrap(), b).unwrap();
        prop_assert_eq!(y.len(), x.len());
        for (a, c) in x.iter().zip(&y) {
            prop_assert!((a - c).abs() < 1e-10);
        }
    }

    #[test]
    fn oracle_mask_respects_clip(
        s in signal(100..300),
        noise in signal(300..301),
        clip in 0.1f64..5.0,
    ) {
        let b = small_basis();
        let noisy: Vec<f64> = s.iter().zip(&noise).map(|(a, n)| a + n).collect();
        let cfg = small_cfg();
        let m = oracle_ratio_mask(
            &analyze(&s, &cfg, b).unwrap(),
            &analyze(&noisy, &cfg, b).unwrap(),
            Some(clip),
            1e-8,
        )
        .unwrap();
        prop_assert!(m.values.iter().all(|v| v.abs() <= clip));
    }

    #[test]
    fn si_sdr_is_scale_invariant_for_powers_of_two(
        pair in (2usize..200).prop_flat_map(|n| (signal(n..n + 1), signal(n..n + 1))),
        exp in -8i32..8,
    ) {
        let (s, e) = pair;
        prop_assume!(s.iter().any(|&v| v != 0.0));
        let alpha = 2f64.powi(exp);
        let scaled: Vec<f64> = e.iter().map(|v| alpha * v).collect();
        prop_assert_eq!(si_sdr(&scaled, &s).unwrap().to_bits(), si_sdr(&e, &s).unwrap().to_bits());
    }

    #[test]
    fn si_sdr_stays_within_limits(s in signal(2..50), e in signal(2..50)) {
        let n = s.len().min(e.len());
        prop_assume!(s[..n].iter().any(|&v| v != 0.0));
        let (v, g) = si_sdr_value_and_grad(&e[..n], &s[..n]).unwrap();
        prop_assert!(v.abs() <= 240.0);
        prop_assert!(g.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn mixing_hits_requested_snr(
        clean in signal(50..400),
        extra in 0usize..300,
        snr_db in -5.0f64..20.0,
        seed in any::<u64>(),
    ) {
        prop_assume!(clean.iter().any(|v| v.abs() > 1e-3));
        let noise: Vec<f64> = (0..clean.len() + extra)
            .map(|i| ((i as f64 + 0.5) * 1.618).sin())
            .collect();
        let c = AudioClip::new(clean, 16000).unwrap();
        let n = AudioClip::new(noise, 16000).unwrap();
        let (noisy, scaled) = mix_at_snr(&c, &n, snr_db, seed).unwrap();
        prop_assert!((snr(&c.samples, &scaled.samples).unwrap() - snr_db).abs() < 1e-9);
        let (again, _) = mix_at_snr(&c, &n, snr_db, seed).unwrap();
        prop_assert_eq!(noisy, again);
    }

    #[test]
    fn checkpoint_round_trip(hidden in 1usize..20, seed in any::<u64>(), scale in 0.5f64..4.0) {
        let p = MlpParams::init(&[8, hidden, 8], scale, seed, small_basis().fingerprint()).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&p, &mut bytes).unwrap();
        prop_assert_eq!(read_checkpoint(&bytes[..], Some(small_basis())).unwrap(), p);
    }

    #[test]
    fn sig9_round_trips_to_nine_digits(v in -1e12f64..1e12) {
        let back: f64 = sig9(v).parse().unwrap();
        prop_assert!((back - v).abs() <= 1e-8 * v.abs().max(1e-300));
    }
}
