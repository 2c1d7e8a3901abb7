use proptest::prelude::*;

use relay_secrecy::channel::{EveDecoder, SystemConfig};
use relay_secrecy::montecarlo::{draw_channels, RngSpec};
use relay_secrecy::rates::evaluate_trial;
use relay_secrecy::spectral::TrialEvaluator;

fn config(n_pow: u32, l: usize, theta: f64, snr_db: f64, decoder: EveDecoder) -> SystemConfig {
    let mut cfg = SystemConfig::default();
    cfg.n_subchannels = 1 << n_pow;
    cfg.n_cp = l.min(cfg.n_subchannels / 4).max(1);
    cfg.l_proc = cfg.n_cp;
    cfg.theta = theta;
    cfg.eve_decoder = decoder;
    cfg.set_per_symbol_snr_db(snr_db);
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn secrecy_rate_is_nonnegative_and_consistent(
        n_pow in 4u32..=6, l in 1usize..16, theta in 0.0f64..0.95,
        snr in 0.0f64..40.0, seed in any::<u64>(),
    ) {
        let cfg = config(n_pow, l, theta, snr, EveDecoder::Joint);
        let r = evaluate_trial(&draw_channels(RngSpec::new(seed, 0), &cfg), &cfg).unwrap();
        prop_assert!(r.rate_bob >= 0.0 && r.rate_eve >= 0.0);
        prop_assert!(r.secrecy_rate >= 0.0);
        prop_assert!((r.secrecy_rate - (r.rate_bob - r.rate_eve).max(0.0)).abs() < 1e-15);
        prop_assert_eq!(r.outage, r.secrecy_rate < cfg.target_rate);
    }

    #[test]
    fn structured_evaluator_agrees_with_dense(
        n_pow in 4u32..=6, l in 1usize..16, theta in 0.0f64..0.95,
        snr in 0.0f64..40.0, seed in any::<u64>(), per_sub in any::<bool>(),
    ) {
        let decoder = if per_sub { EveDecoder::PerSubcarrier } else { EveDecoder::Joint };
        let cfg = config(n_pow, l, theta, snr, decoder);
        let draw = draw_channels(RngSpec::new(seed, 1), &cfg);
        let fast = TrialEvaluator::new(&cfg).unwrap().evaluate(&draw).unwrap();
        let dense = evaluate_trial(&draw, &cfg).unwrap();
        prop_assert!((fast.rate_bob - dense.rate_bob).abs() <= 1e-9 * dense.rate_bob.max(1.0));
        prop_assert!((fast.rate_eve - dense.rate_eve).abs() <= 1e-9 * dense.rate_eve.max(1.0));
    }

    #[test]
    fn joint_eve_dominates_per_subcarrier_eve(
        n_pow in 4u32..=5, l in 1usize..8, theta in 0.05f64..0.95,
        snr in 0.0f64..40.0, seed in any::<u64>(),
    ) {
        let joint = config(n_pow, l, theta, snr, EveDecoder::Joint);
        let per = config(n_pow, l, theta, snr, EveDecoder::PerSubcarrier);
        let draw = draw_channels(RngSpec::new(seed, 2), &joint);
        let a = evaluate_trial(&draw, &joint).unwrap().rate_eve;
        let b = evaluate_trial(&draw, &per).unwrap().rate_eve;
        prop_assert!(a >= b - 1e-10, "joint {a} per-subcarrier {b}");
    }

    #[test]
    fn draws_are_reproducible(seed in any::<u64>(), stream in any::<u64>()) {
        let cfg = SystemConfig::default();
        let a = draw_channels(RngSpec::new(seed, stream), &cfg);
        let b = draw_channels(RngSpec::new(seed, stream), &cfg);
        prop_assert_eq!(a, b);
    }
}
