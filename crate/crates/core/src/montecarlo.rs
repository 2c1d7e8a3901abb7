//! Monte Carlo estimation of secrecy outage and secure throughput, and the
//! sample-level time-domain oracle used to validate the matrix model.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::analytic::{sop_subchannel, SopInputs};
use crate::channel::{equivalent_cir, relay_gain, subchannel_gains, ChannelDraw, Receiver, SystemConfig};
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::spectral::TrialEvaluator;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_trials: usize,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

impl Estimate {
    /// Bernoulli proportion `hits / n` with binomial standard error.
    pub fn proportion(hits: usize, n_trials: usize) -> Result<Self> {
        if n_trials == 0 {
            return Err(Error::NoTrials);
        }
        let p = hits as f64 / n_trials as f64;
        let stderr = (p * (1.0 - p) / n_trials as f64).sqrt();
        Ok(Estimate {
            mean: p,
            stderr,
            n_trials,
            ci95_low: (p - Z95 * stderr).clamp(0.0, 1.0),
            ci95_high: (p + Z95 * stderr).clamp(0.0, 1.0),
        })
    }

    /// `rate·(1 - self)` for an outage estimate, clamped to `[0, rate]`.
    pub fn complement_scaled(&self, rate: f64) -> Self {
        Estimate {
            mean: rate * (1.0 - self.mean),
            stderr: rate * self.stderr,
            n_trials: self.n_trials,
            ci95_low: (rate * (1.0 - self.ci95_high)).clamp(0.0, rate),
            ci95_high: (rate * (1.0 - self.ci95_low)).clamp(0.0, rate),
        }
    }

    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci95_low <= other.ci95_high && other.ci95_low <= self.ci95_high
    }
}

/// Identifies an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngSpec { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Circularly-symmetric complex Gaussian with variance `var`.
pub fn complex_gaussian<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * (var / 2.0).sqrt()
}

/// One realisation of the six links. All six are always drawn so that a
/// stream yields the same direct links whatever the cancellation setting.
pub fn draw_channels(rng: RngSpec, cfg: &SystemConfig) -> ChannelDraw {
    let mut r = rng.rng();
    let h_ab = complex_gaussian(&mut r, cfg.var_ab);
    let h_ae = complex_gaussian(&mut r, cfg.var_ae);
    let h_ar = complex_gaussian(&mut r, cfg.var_ar);
    let h_rb = complex_gaussian(&mut r, cfg.var_rb);
    let h_re = complex_gaussian(&mut r, cfg.var_re);
    let h_rr = complex_gaussian(&mut r, cfg.effective_var_rr());
    ChannelDraw {
        h_ab,
        h_ae,
        h_ar,
        h_rb,
        h_re,
        h_rr,
    }
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Per-trial secrecy rates of one scenario, in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct SecrecySamples {
    pub secrecy: Vec<f64>,
    pub seed: u64,
}

impl SecrecySamples {
    pub fn n_trials(&self) -> usize {
        self.secrecy.len()
    }

    pub fn sop(&self, target_rate: f64) -> Result<Estimate> {
        let hits = self.secrecy.iter().filter(|&&s| s < target_rate).count();
        Estimate::proportion(hits, self.n_trials())
    }

    pub fn throughput(&self, target_rate: f64) -> Result<Estimate> {
        Ok(self.sop(target_rate)?.complement_scaled(target_rate))
    }

    pub fn mean_secrecy_rate(&self) -> f64 {
        pairwise_sum(&self.secrecy) / self.n_trials().max(1) as f64
    }
}

pub fn simulate_secrecy(cfg: &SystemConfig, n_trials: usize, seed: u64) -> Result<SecrecySamples> {
    if n_trials == 0 {
        return Err(Error::NoTrials);
    }
    let eval = TrialEvaluator::new(cfg)?;
    let secrecy = (0..n_trials as u64)
        .into_par_iter()
        .map(|t| {
            let draw = draw_channels(RngSpec::new(seed, t), cfg);
            eval.evaluate(&draw).map(|r| r.secrecy_rate)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SecrecySamples { secrecy, seed })
}

pub fn estimate_sop(cfg: &SystemConfig, n_trials: usize, seed: u64) -> Result<Estimate> {
    simulate_secrecy(cfg, n_trials, seed)?.sop(cfg.target_rate)
}

pub fn estimate_throughput(cfg: &SystemConfig, n_trials: usize, seed: u64) -> Result<Estimate> {
    simulate_secrecy(cfg, n_trials, seed)?.throughput(cfg.target_rate)
}

/// Outage frequency of the reduced single-tap wiretap channel whose
/// legitimate and eavesdropper SNRs are exponential with the means implied
/// by `inputs`.
pub fn estimate_single_tap_sop(inputs: &SopInputs, n_trials: usize, seed: u64) -> Result<Estimate> {
    if n_trials == 0 {
        return Err(Error::NoTrials);
    }
    let bob = (inputs.var_ab + inputs.var_rb * inputs.beta_r) / inputs.kappa_b;
    let eve = (inputs.var_ae + inputs.var_re * inputs.beta_r) / (inputs.kappa_e + inputs.delta_k);
    if bob == 0.0 {
        return Estimate::proportion(if inputs.target_rate > 0.0 { n_trials } else { 0 }, n_trials);
    }
    let mean_b = inputs.gamma_bar_b;
    let mean_e = inputs.gamma_bar_b * eve / bob;
    let hits = (0..n_trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngSpec::new(seed, t).rng();
            let gb = complex_gaussian(&mut rng, 1.0).norm_sqr() * mean_b;
            let ge = complex_gaussian(&mut rng, 1.0).norm_sqr() * mean_e;
            let secrecy = ((1.0 + gb).log2() - (1.0 + ge).log2()).max(0.0);
            usize::from(secrecy < inputs.target_rate)
        })
        .sum::<usize>();
    Estimate::proportion(hits, n_trials)
}

/// Per-trial `(δ_k, SOP_k)` columns.
type DeltaSopRow = (Vec<f64>, Vec<f64>);

/// Analytic SOP fed with artificial-noise powers measured on simulated
/// realisations.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDeltaSop {
    /// `δ_k` averaged over realisations.
    pub mean_delta: Vec<f64>,
    /// Per-subcarrier SOP averaged over the per-realisation `δ_k`.
    pub sop_per_subcarrier: Vec<f64>,
    /// Per-subcarrier SOP at the averaged `δ_k`.
    pub sop_at_mean_delta: Vec<f64>,
}

impl SimulatedDeltaSop {
    pub fn mean_sop(&self) -> f64 {
        pairwise_sum(&self.sop_per_subcarrier) / self.sop_per_subcarrier.len() as f64
    }
}

pub fn analytic_sop_simulated_delta(
    cfg: &SystemConfig,
    n_trials: usize,
    seed: u64,
) -> Result<SimulatedDeltaSop> {
    if n_trials == 0 {
        return Err(Error::NoTrials);
    }
    let eval = TrialEvaluator::new(cfg)?;
    let n = cfg.n_subchannels;
    let per_trial = (0..n_trials as u64)
        .into_par_iter()
        .map(|t| {
            let delta = eval.delta_profile(&draw_channels(RngSpec::new(seed, t), cfg))?;
            let sop = delta
                .iter()
                .map(|&d| Ok(sop_subchannel(&SopInputs::from_config(cfg, d)?)?.probability))
                .collect::<Result<Vec<f64>>>()?;
            Ok((delta, sop))
        })
        .collect::<Result<Vec<DeltaSopRow>>>()?;

    let column_mean = |pick: &dyn Fn(&DeltaSopRow) -> f64| {
        let col: Vec<f64> = per_trial.iter().map(pick).collect();
        pairwise_sum(&col) / n_trials as f64
    };
    let mean_delta: Vec<f64> = (0..n).map(|k| column_mean(&|row| row.0[k])).collect();
    let sop_per_subcarrier = (0..n).map(|k| column_mean(&|row| row.1[k])).collect();
    let sop_at_mean_delta = mean_delta
        .iter()
        .map(|&d| Ok(sop_subchannel(&SopInputs::from_config(cfg, d)?)?.probability))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SimulatedDeltaSop {
        mean_delta,
        sop_per_subcarrier,
        sop_at_mean_delta,
    })
}

/// Received samples of one block produced by the sample recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutput {
    pub relay: Vec<Complex64>,
    pub bob: Vec<Complex64>,
    pub eve: Vec<Complex64>,
}

/// Noise-free sample recursion over one block of `N + N_cp` symbols.
///
/// The relay buffers its input for `L_proc` symbols and re-emits it scaled by
/// the gain; with residual self-interference the re-emitted signal loops back
/// into the relay indefinitely.
pub fn time_domain_oracle(
    draw: &ChannelDraw,
    cfg: &SystemConfig,
    input: &[Complex64],
    an_input: Option<&[Complex64]>,
) -> Result<OracleOutput> {
    run_oracle(draw, cfg, input, an_input, None)
}

/// As [`time_domain_oracle`] with receiver noise drawn from `noise`.
pub fn time_domain_oracle_noisy(
    draw: &ChannelDraw,
    cfg: &SystemConfig,
    input: &[Complex64],
    an_input: Option<&[Complex64]>,
    noise: RngSpec,
) -> Result<OracleOutput> {
    run_oracle(draw, cfg, input, an_input, Some(noise))
}

fn run_oracle(
    draw: &ChannelDraw,
    cfg: &SystemConfig,
    input: &[Complex64],
    an_input: Option<&[Complex64]>,
    noise: Option<RngSpec>,
) -> Result<OracleOutput> {
    let m = cfg.block_len();
    let an = an_input.unwrap_or(&[]);
    for len in [input.len(), an.len()] {
        if len > m {
            return Err(Error::OracleInputTooLong { len, max: m });
        }
    }
    let zero = Complex64::new(0.0, 0.0);
    let x: Vec<Complex64> = (0..m)
        .map(|t| input.get(t).copied().unwrap_or(zero) + an.get(t).copied().unwrap_or(zero))
        .collect();

    let gain = relay_gain(draw, cfg)?;
    let h_rr = if cfg.full_sic { zero } else { draw.h_rr };
    let l = cfg.l_proc;
    let mut rng = noise.map(|key| key.rng());
    let mut sample = |kappa: f64| match rng.as_mut() {
        Some(r) => complex_gaussian(r, kappa),
        None => zero,
    };

    let mut relay = vec![zero; m];
    let mut bob = vec![zero; m];
    let mut eve = vec![zero; m];
    for t in 0..m {
        let forwarded = if t >= l { relay[t - l] * gain } else { zero };
        relay[t] = draw.h_ar * x[t] + h_rr * forwarded + sample(cfg.noise_psd_relay);
        bob[t] = draw.h_ab * x[t] + draw.h_rb * forwarded + sample(cfg.noise_psd_bob);
        eve[t] = draw.h_ae * x[t] + draw.h_re * forwarded + sample(cfg.noise_psd_eve);
    }
    Ok(OracleOutput { relay, bob, eve })
}

fn collect_gains(cfg: &SystemConfig, n_trials: usize, seed: u64, receiver: Receiver) -> Result<Vec<Vec<Complex64>>> {
    if n_trials < 2 {
        return Err(Error::NoTrials);
    }
    (0..n_trials as u64)
        .into_par_iter()
        .map(|t| {
            let draw = draw_channels(RngSpec::new(seed, t), cfg);
            let cir = equivalent_cir(&draw, cfg, receiver)?;
            Ok(subchannel_gains(&cir, cfg.n_subchannels))
        })
        .collect()
}

/// Unbiased sample variance of each subchannel coefficient at `receiver`.
pub fn empirical_subchannel_variance(
    cfg: &SystemConfig,
    n_trials: usize,
    seed: u64,
    receiver: Receiver,
) -> Result<Vec<f64>> {
    let cov = empirical_subchannel_covariance(cfg, n_trials, seed, receiver)?;
    Ok((0..cfg.n_subchannels).map(|k| cov[(k, k)].re).collect())
}

/// Unbiased sample covariance `E[(H - μ)(H - μ)ᴴ]` across subchannels.
pub fn empirical_subchannel_covariance(
    cfg: &SystemConfig,
    n_trials: usize,
    seed: u64,
    receiver: Receiver,
) -> Result<ComplexMatrix> {
    let gains = collect_gains(cfg, n_trials, seed, receiver)?;
    let n = cfg.n_subchannels;
    let mut mean = vec![Complex64::new(0.0, 0.0); n];
    for g in &gains {
        for (m, v) in mean.iter_mut().zip(g) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n_trials as f64);
    let mut cov = ComplexMatrix::zeros(n, n);
    for g in &gains {
        for i in 0..n {
            let di = g[i] - mean[i];
            for j in 0..n {
                cov[(i, j)] += di * (g[j] - mean[j]).conj();
            }
        }
    }
    Ok(cov / Complex64::new((n_trials - 1) as f64, 0.0))
}
