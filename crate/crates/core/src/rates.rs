//! Achievable rates at Bob and Eve, the artificial-noise precoder, and the
//! per-realisation secrecy outage indicator.
//!
//! These are the dense reference implementations. They form every matrix
//! explicitly and are used to validate the structured fast path in
//! [`crate::spectral`].

use num_complex::Complex64;

use crate::channel::{
    conv_matrix, effective_circulant, equivalent_cir, forwarded_noise_covariance, subchannel_gains,
    ChannelDraw, CpOperators, EquivalentCir, EveDecoder, Receiver, SystemConfig,
};
use crate::error::{Error, Result};
use crate::numerics::{
    cholesky_pd, logdet_identity_plus, null_space_basis, numerical_rank, to_frequency_domain, ComplexMatrix,
    DEFAULT_NULL_TOL,
};

/// Largest tolerated `‖R_cp·H_B·U‖_F / ‖R_cp·H_B‖_F`.
pub const NULLITY_TOL: f64 = 1e-10;

/// Artificial-noise precoder: orthonormal basis of the legitimate channel's
/// null space after CP removal.
#[derive(Debug, Clone)]
pub struct AnPrecoder {
    /// `(N+N_cp)×N_cp`, orthonormal columns.
    pub u: ComplexMatrix,
    pub nullity_residual: f64,
}

/// Artificial-noise interference as seen by Eve after CP removal.
#[derive(Debug, Clone)]
pub struct EveInterferenceProfile {
    /// Frequency-domain covariance `F·Σ·Fᴴ`, `N×N`.
    pub covariance: ComplexMatrix,
    /// AN power landing on each subcarrier.
    pub delta: Vec<f64>,
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub rate_bob: f64,
    pub rate_eve: f64,
    pub secrecy_rate: f64,
    pub outage: bool,
}

impl RateReport {
    pub fn new(rate_bob: f64, rate_eve: f64, target_rate: f64) -> Self {
        let secrecy_rate = (rate_bob - rate_eve).max(0.0);
        RateReport {
            rate_bob,
            rate_eve,
            secrecy_rate,
            outage: secrecy_rate < target_rate,
        }
    }
}

/// `R_cp·conv_matrix(cir)`, the `N×(N+N_cp)` map from a transmitted block to
/// the samples a receiver keeps.
pub fn cp_removed_channel(cir: &EquivalentCir, cfg: &SystemConfig) -> Result<ComplexMatrix> {
    let cp = CpOperators::new(cfg.n_subchannels, cfg.n_cp)?;
    Ok(&cp.r_cp * conv_matrix(cir, cfg.block_len())?)
}

pub fn an_precoder(cir_bob: &EquivalentCir, cfg: &SystemConfig) -> Result<AnPrecoder> {
    if cfg.n_cp < cir_bob.max_delay() {
        return Err(Error::CpTooShort {
            n_cp: cfg.n_cp,
            max_delay: cir_bob.max_delay(),
        });
    }
    let legit = cp_removed_channel(cir_bob, cfg)?;
    let ns = null_space_basis(&legit, DEFAULT_NULL_TOL)?;
    if ns.residual > NULLITY_TOL {
        return Err(Error::NullityViolation {
            residual: ns.residual,
            tolerance: NULLITY_TOL,
        });
    }
    Ok(AnPrecoder {
        u: ns.basis,
        nullity_residual: ns.residual,
    })
}

/// `‖R_cp·H·U‖_F / ‖R_cp·H‖_F` for an arbitrary basis `u`.
pub fn nullity_residual(cir: &EquivalentCir, u: &ComplexMatrix, cfg: &SystemConfig) -> Result<f64> {
    let legit = cp_removed_channel(cir, cfg)?;
    let norm = legit.norm();
    if norm == 0.0 || u.ncols() == 0 {
        return Ok(0.0);
    }
    Ok((legit * u).norm() / norm)
}

pub fn eve_interference(
    cir_eve: &EquivalentCir,
    precoder: &AnPrecoder,
    cfg: &SystemConfig,
) -> Result<EveInterferenceProfile> {
    let n = cfg.n_subchannels;
    if !cfg.an_active() || precoder.u.ncols() == 0 {
        return Ok(EveInterferenceProfile {
            covariance: ComplexMatrix::zeros(n, n),
            delta: vec![0.0; n],
            rank: 0,
        });
    }
    let leak = cp_removed_channel(cir_eve, cfg)? * &precoder.u;
    let power = cfg.an_power() / cfg.l_proc as f64;
    let time_cov = &leak * leak.adjoint() * Complex64::new(power, 0.0);
    let rank = numerical_rank(&time_cov, DEFAULT_NULL_TOL);
    let covariance = to_frequency_domain(&time_cov)?;
    let delta = (0..n).map(|k| covariance[(k, k)].re.max(0.0)).collect();
    Ok(EveInterferenceProfile {
        covariance,
        delta,
        rank,
    })
}

/// `κ·I_N`.
pub fn white_noise(cfg: &SystemConfig, kappa: f64) -> ComplexMatrix {
    let n = cfg.n_subchannels;
    ComplexMatrix::identity(n, n) * Complex64::new(kappa, 0.0)
}

/// `(1/(N+N_cp))·log2 det(I + p̄·H̃ᴴ K⁻¹ H̃)` for a Hermitian positive
/// definite noise-plus-interference covariance `K`.
fn whitened_rate(channel: &ComplexMatrix, noise: &ComplexMatrix, cfg: &SystemConfig) -> Result<f64> {
    let p = cfg.pbar_data();
    if p == 0.0 || channel.norm() == 0.0 {
        return Ok(0.0);
    }
    let chol = cholesky_pd(noise.clone()).ok_or(Error::SingularWhitening)?;
    let whitened = chol
        .l()
        .solve_lower_triangular(channel)
        .ok_or(Error::SingularWhitening)?;
    let gram = whitened.adjoint() * &whitened * Complex64::new(p, 0.0);
    Ok(logdet_identity_plus(&gram)? / cfg.block_len() as f64)
}

/// Bob's rate with white receiver noise `κ_B`.
pub fn bob_rate(cir_bob: &EquivalentCir, cfg: &SystemConfig) -> Result<f64> {
    bob_rate_with_noise(cir_bob, &white_noise(cfg, cfg.noise_psd_bob), cfg)
}

/// Bob's rate with an arbitrary time-domain noise covariance after CP removal.
pub fn bob_rate_with_noise(
    cir_bob: &EquivalentCir,
    noise: &ComplexMatrix,
    cfg: &SystemConfig,
) -> Result<f64> {
    whitened_rate(&effective_circulant(cir_bob, cfg)?, noise, cfg)
}

/// Eve's rate with white receiver noise `κ_E`; `profile = None` means no
/// artificial noise.
pub fn eve_rate(
    cir_eve: &EquivalentCir,
    profile: Option<&EveInterferenceProfile>,
    cfg: &SystemConfig,
) -> Result<f64> {
    eve_rate_with_noise(cir_eve, profile, &white_noise(cfg, cfg.noise_psd_eve), cfg)
}

pub fn eve_rate_with_noise(
    cir_eve: &EquivalentCir,
    profile: Option<&EveInterferenceProfile>,
    noise: &ComplexMatrix,
    cfg: &SystemConfig,
) -> Result<f64> {
    match cfg.eve_decoder {
        EveDecoder::Joint => {
            let mut total = noise.clone();
            if let Some(p) = profile {
                let f = crate::numerics::dft_matrix(cfg.n_subchannels)?;
                total += f.adjoint() * &p.covariance * f;
            }
            whitened_rate(&effective_circulant(cir_eve, cfg)?, &total, cfg)
        }
        EveDecoder::PerSubcarrier => {
            let noise_f = to_frequency_domain(noise)?;
            let gains = subchannel_gains(cir_eve, cfg.n_subchannels);
            let p = cfg.pbar_data();
            let mut sum = 0.0;
            for (k, g) in gains.iter().enumerate() {
                let signal = p * g.norm_sqr();
                if signal == 0.0 {
                    continue;
                }
                let delta = profile.map_or(0.0, |pr| pr.delta[k]);
                let denom = noise_f[(k, k)].re + delta;
                if denom <= 0.0 {
                    return Err(Error::SingularWhitening);
                }
                sum += (1.0 + signal / denom).log2();
            }
            Ok(sum / cfg.block_len() as f64)
        }
    }
}

fn receiver_noise(
    draw: &ChannelDraw,
    cfg: &SystemConfig,
    receiver: Receiver,
) -> Result<ComplexMatrix> {
    let kappa = match receiver {
        Receiver::Bob => cfg.noise_psd_bob,
        Receiver::Eve => cfg.noise_psd_eve,
    };
    let mut noise = white_noise(cfg, kappa);
    if cfg.include_forwarded_relay_noise {
        noise += forwarded_noise_covariance(draw, cfg, receiver)?;
    }
    Ok(noise)
}

/// Full dense evaluation of one channel realisation.
pub fn evaluate_trial(draw: &ChannelDraw, cfg: &SystemConfig) -> Result<RateReport> {
    cfg.validate()?;
    let cir_bob = equivalent_cir(draw, cfg, Receiver::Bob)?;
    let cir_eve = equivalent_cir(draw, cfg, Receiver::Eve)?;

    let rate_bob = bob_rate_with_noise(&cir_bob, &receiver_noise(draw, cfg, Receiver::Bob)?, cfg)?;
    let profile = if cfg.an_active() {
        let precoder = an_precoder(&cir_bob, cfg)?;
        Some(eve_interference(&cir_eve, &precoder, cfg)?)
    } else {
        None
    };
    let rate_eve = eve_rate_with_noise(
        &cir_eve,
        profile.as_ref(),
        &receiver_noise(draw, cfg, Receiver::Eve)?,
        cfg,
    )?;
    Ok(RateReport::new(rate_bob, rate_eve, cfg.target_rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_c(rng: &mut ChaCha8Rng) -> Complex64 {
        c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    }

    fn random_draw(rng: &mut ChaCha8Rng) -> ChannelDraw {
        ChannelDraw {
            h_ab: random_c(rng),
            h_ae: random_c(rng),
            h_ar: random_c(rng),
            h_rb: random_c(rng),
            h_re: random_c(rng),
            h_rr: random_c(rng) * 0.03,
        }
    }

    fn two_tap(rng: &mut ChaCha8Rng, l: usize) -> EquivalentCir {
        EquivalentCir::new(vec![(0, random_c(rng)), (l, random_c(rng))]).unwrap()
    }

    fn small_cfg(n: usize, l: usize) -> SystemConfig {
        let mut cfg = SystemConfig::default();
        cfg.n_subchannels = n;
        cfg.n_cp = l;
        cfg.l_proc = l;
        cfg.set_per_symbol_snr_db(30.0);
        cfg
    }

    #[test]
    fn precoder_dimension_and_nullity_at_default_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = SystemConfig::default();
        let cir = two_tap(&mut rng, 16);
        let pre = an_precoder(&cir, &cfg).unwrap();
        assert_eq!(pre.u.ncols(), 16);
        assert_eq!(pre.u.nrows(), 80);
        assert!(pre.nullity_residual < 1e-10);
    }

    #[test]
    fn precoder_small_hand_case() {
        let cfg = small_cfg(8, 2);
        let cir = EquivalentCir::new(vec![(0, c(1.0, 0.0)), (2, c(1.0, 0.0))]).unwrap();
        let pre = an_precoder(&cir, &cfg).unwrap();
        assert_eq!(pre.u.ncols(), 2);
        let leak = cp_removed_channel(&cir, &cfg).unwrap() * &pre.u;
        assert!(leak.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn precoder_for_single_tap_channel_keeps_nullity() {
        let cfg = small_cfg(16, 4);
        let cir = EquivalentCir::new(vec![(0, c(0.8, -0.3)), (4, c(0.0, 0.0))]).unwrap();
        let pre = an_precoder(&cir, &cfg).unwrap();
        assert_eq!(pre.u.ncols(), 4);
        assert!(nullity_residual(&cir, &pre.u, &cfg).unwrap() < 1e-10);
    }

    #[test]
    fn interference_vanishes_without_an_or_for_a_twin_eve() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut cfg = small_cfg(32, 8);
        let cir = two_tap(&mut rng, 8);
        let pre = an_precoder(&cir, &cfg).unwrap();

        let twin = eve_interference(&cir, &pre, &cfg).unwrap();
        let scale = cfg.an_power() / cfg.l_proc as f64;
        assert!(twin.covariance.norm() < 1e-9 * scale);

        cfg.theta = 0.0;
        let off = eve_interference(&two_tap(&mut rng, 8), &pre, &cfg).unwrap();
        assert_eq!(off.rank, 0);
        assert_eq!(off.covariance.norm(), 0.0);
    }

    #[test]
    fn interference_rank_equals_processing_delay() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = small_cfg(64, 8);
        let pre = an_precoder(&two_tap(&mut rng, 8), &cfg).unwrap();
        let profile = eve_interference(&two_tap(&mut rng, 8), &pre, &cfg).unwrap();
        assert_eq!(profile.rank, 8);
        assert!(profile.delta.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn bob_rate_trivial_cases() {
        let cfg = small_cfg(16, 4);
        let zero = EquivalentCir::new(vec![(0, c(0.0, 0.0))]).unwrap();
        assert_eq!(bob_rate(&zero, &cfg).unwrap(), 0.0);

        // Flat channel with p̄·|h|²/κ = 1 on every subcarrier.
        let amp = (1.0 / cfg.pbar_data()).sqrt();
        let flat = EquivalentCir::new(vec![(0, c(amp, 0.0))]).unwrap();
        let expect = 16.0 / 20.0;
        assert_abs_diff_eq!(bob_rate(&flat, &cfg).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn bob_rate_determinant_matches_subcarrier_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = SystemConfig::default();
        let cir = two_tap(&mut rng, 16);
        let p = cfg.pbar_data();
        let oracle: f64 = subchannel_gains(&cir, cfg.n_subchannels)
            .iter()
            .map(|h| (1.0 + p * h.norm_sqr() / cfg.noise_psd_bob).log2())
            .sum::<f64>()
            / cfg.block_len() as f64;
        assert_abs_diff_eq!(bob_rate(&cir, &cfg).unwrap(), oracle, epsilon = 1e-9);
    }

    #[test]
    fn eve_rate_without_an_mirrors_bob_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut cfg = small_cfg(32, 8);
        cfg.noise_psd_bob = 2.5;
        cfg.noise_psd_eve = 2.5;
        let cir = two_tap(&mut rng, 8);
        let joint = eve_rate(&cir, None, &cfg).unwrap();
        assert_abs_diff_eq!(joint, bob_rate(&cir, &cfg).unwrap(), epsilon = 1e-10);
        cfg.eve_decoder = EveDecoder::PerSubcarrier;
        assert_abs_diff_eq!(eve_rate(&cir, None, &cfg).unwrap(), joint, epsilon = 1e-9);
    }

    #[test]
    fn eve_rate_collapses_under_overwhelming_interference() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut cfg = small_cfg(16, 4);
        cfg.eve_decoder = EveDecoder::PerSubcarrier;
        let cir = two_tap(&mut rng, 4);
        let n = cfg.n_subchannels;
        let profile = EveInterferenceProfile {
            covariance: ComplexMatrix::identity(n, n) * c(1e30, 0.0),
            delta: vec![1e30; n],
            rank: n,
        };
        assert!(eve_rate(&cir, Some(&profile), &cfg).unwrap() < 1e-20);
        cfg.eve_decoder = EveDecoder::Joint;
        assert!(eve_rate(&cir, Some(&profile), &cfg).unwrap() < 1e-20);
    }

    #[test]
    fn joint_eve_rate_matches_whitened_eigenvalue_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = small_cfg(8, 2);
        let pre = an_precoder(&two_tap(&mut rng, 2), &cfg).unwrap();
        let cir_e = two_tap(&mut rng, 2);
        let profile = eve_interference(&cir_e, &pre, &cfg).unwrap();

        let f = crate::numerics::dft_matrix(8).unwrap();
        let w = white_noise(&cfg, cfg.noise_psd_eve) + f.adjoint() * &profile.covariance * &f;
        let h = effective_circulant(&cir_e, &cfg).unwrap();
        let m = &h * h.adjoint() * c(cfg.pbar_data(), 0.0) * w.clone().try_inverse().unwrap();
        // det(I + M) via the eigenvalues of the similar Hermitian matrix W^{-1/2} H Hᴴ W^{-1/2}.
        let w_eig = w.symmetric_eigen();
        let inv_sqrt = &w_eig.eigenvectors
            * ComplexMatrix::from_diagonal(&w_eig.eigenvalues.map(|l| c(1.0 / l.sqrt(), 0.0)))
            * w_eig.eigenvectors.adjoint();
        let sym = &inv_sqrt * &h * h.adjoint() * &inv_sqrt * c(cfg.pbar_data(), 0.0);
        let oracle: f64 = sym.symmetric_eigen().eigenvalues.iter().map(|l| (1.0 + l).log2()).sum::<f64>()
            / cfg.block_len() as f64;
        let direct = (ComplexMatrix::identity(8, 8) + m).determinant().norm().log2() / cfg.block_len() as f64;
        let rate = eve_rate(&cir_e, Some(&profile), &cfg).unwrap();
        assert_abs_diff_eq!(rate, oracle, epsilon = 1e-9);
        assert_abs_diff_eq!(rate, direct, epsilon = 1e-9);
    }

    #[test]
    fn joint_decoding_dominates_per_subcarrier() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let mut cfg = small_cfg(32, 4);
            let pre = an_precoder(&two_tap(&mut rng, 4), &cfg).unwrap();
            let cir_e = two_tap(&mut rng, 4);
            let profile = eve_interference(&cir_e, &pre, &cfg).unwrap();
            let joint = eve_rate(&cir_e, Some(&profile), &cfg).unwrap();
            cfg.eve_decoder = EveDecoder::PerSubcarrier;
            let per = eve_rate(&cir_e, Some(&profile), &cfg).unwrap();
            assert!(joint >= per - 1e-9, "joint {joint} < per-subcarrier {per}");
        }
    }

    #[test]
    fn bob_rate_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut cfg = small_cfg(32, 4);
        let cir = two_tap(&mut rng, 4);
        let base = bob_rate(&cir, &cfg).unwrap();
        cfg.noise_psd_bob *= 7.5;
        cfg.psd_alice *= 7.5;
        assert_abs_diff_eq!(bob_rate(&cir, &cfg).unwrap(), base, epsilon = 1e-10);
    }

    #[test]
    fn evaluate_trial_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let cfg = small_cfg(32, 4);

        let blind_eve = ChannelDraw {
            h_ae: c(0.0, 0.0),
            h_re: c(0.0, 0.0),
            ..random_draw(&mut rng)
        };
        let r = evaluate_trial(&blind_eve, &cfg).unwrap();
        assert_eq!(r.rate_eve, 0.0);
        assert_eq!(r.secrecy_rate, r.rate_bob);

        let deaf_bob = ChannelDraw {
            h_ab: c(0.0, 0.0),
            h_rb: c(0.0, 0.0),
            ..random_draw(&mut rng)
        };
        let r = evaluate_trial(&deaf_bob, &cfg).unwrap();
        assert_eq!(r.secrecy_rate, 0.0);
        assert!(r.outage);
    }

    #[test]
    fn adding_an_never_helps_a_per_subcarrier_eve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..8 {
            let draw = random_draw(&mut rng);
            let mut cfg = small_cfg(32, 8);
            cfg.eve_decoder = EveDecoder::PerSubcarrier;
            let with_an = evaluate_trial(&draw, &cfg).unwrap().rate_eve;
            cfg.theta = 0.0;
            let cir_e = equivalent_cir(&draw, &cfg, Receiver::Eve).unwrap();
            let mut half = cfg.clone();
            half.theta = 0.5;
            // Same data power, interference switched off.
            let without = eve_rate(&cir_e, None, &half).unwrap();
            assert!(with_an <= without + 1e-12);
        }
    }

    #[test]
    fn residual_si_rates_use_three_tap_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut cfg = small_cfg(32, 8);
        cfg.theta = 0.0;
        cfg.full_sic = false;
        cfg.n_cp = 16;
        cfg.include_forwarded_relay_noise = true;
        let r = evaluate_trial(&random_draw(&mut rng), &cfg).unwrap();
        assert!(r.rate_bob.is_finite() && r.rate_bob > 0.0);
    }

    #[test]
    fn forwarded_noise_lowers_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let draw = random_draw(&mut rng);
        let mut cfg = small_cfg(32, 4);
        let clean = evaluate_trial(&draw, &cfg).unwrap();
        cfg.include_forwarded_relay_noise = true;
        let noisy = evaluate_trial(&draw, &cfg).unwrap();
        assert!(noisy.rate_bob <= clean.rate_bob);
        assert!(noisy.rate_eve <= clean.rate_eve + 1e-12);
    }
}
