//! Equivalent ISI channel seen by Bob and Eve when Alice transmits and the
//! full-duplex relay forwards an amplified, delayed copy.
//!
//! Each physical link is a single flat-fading coefficient. The relay's
//! processing delay turns the superposition into a sparse multi-tap channel,
//! which the cyclic prefix then makes circulant.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{twiddle, ComplexMatrix};

/// Decoder assumed at the eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EveDecoder {
    /// Joint detection across all subcarriers.
    #[default]
    Joint,
    /// Conventional OFDM detection with a single-tap equaliser per subcarrier.
    PerSubcarrier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receiver {
    Bob,
    Eve,
}

/// Scenario parameters. Power spectral densities are per slot (W/Hz); the
/// per-symbol value is the slot value divided by `N + n_cp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_subchannels: usize,
    pub n_cp: usize,
    pub l_proc: usize,
    pub psd_alice: f64,
    pub psd_relay: f64,
    /// Fraction of Alice's power spent on artificial noise.
    pub theta: f64,
    pub noise_psd_relay: f64,
    pub noise_psd_bob: f64,
    pub noise_psd_eve: f64,
    pub var_ab: f64,
    pub var_ae: f64,
    pub var_ar: f64,
    pub var_rb: f64,
    pub var_re: f64,
    pub var_rr: f64,
    /// Target secrecy rate in bits/sec/Hz.
    pub target_rate: f64,
    pub full_sic: bool,
    pub include_forwarded_relay_noise: bool,
    pub eve_decoder: EveDecoder,
}

impl Default for SystemConfig {
    /// N = 64, N_cp = L_proc = 16, θ = 1/2, target 4 bits/sec/Hz, 30 dB
    /// per-symbol SNR on every link, unit channel variances, perfect SIC.
    fn default() -> Self {
        let mut cfg = SystemConfig {
            n_subchannels: 64,
            n_cp: 16,
            l_proc: 16,
            psd_alice: 0.0,
            psd_relay: 0.0,
            theta: 0.5,
            noise_psd_relay: 1.0,
            noise_psd_bob: 1.0,
            noise_psd_eve: 1.0,
            var_ab: 1.0,
            var_ae: 1.0,
            var_ar: 1.0,
            var_rb: 1.0,
            var_re: 1.0,
            var_rr: 1e-3,
            target_rate: 4.0,
            full_sic: true,
            include_forwarded_relay_noise: false,
            eve_decoder: EveDecoder::Joint,
        };
        cfg.set_per_symbol_snr_db(30.0);
        cfg
    }
}

impl SystemConfig {
    /// Symbols per OFDM block including the cyclic prefix.
    pub fn block_len(&self) -> usize {
        self.n_subchannels + self.n_cp
    }

    pub fn pbar_alice(&self) -> f64 {
        self.psd_alice / self.block_len() as f64
    }

    pub fn pbar_relay(&self) -> f64 {
        self.psd_relay / self.block_len() as f64
    }

    /// Per-symbol data PSD, `(1-θ)·P_A / (N + n_cp)`.
    pub fn pbar_data(&self) -> f64 {
        (1.0 - self.theta) * self.pbar_alice()
    }

    /// Slot-level artificial-noise PSD `θ·P_A`.
    pub fn an_power(&self) -> f64 {
        self.theta * self.psd_alice
    }

    /// Relay-to-Alice power ratio, undefined when Alice is silent.
    pub fn beta_r(&self) -> Option<f64> {
        (self.psd_alice > 0.0).then(|| self.psd_relay / self.psd_alice)
    }

    /// Residual self-interference variance after cancellation.
    pub fn effective_var_rr(&self) -> f64 {
        if self.full_sic {
            0.0
        } else {
            self.var_rr
        }
    }

    pub fn an_active(&self) -> bool {
        self.theta > 0.0
    }

    /// Largest tap delay of the equivalent channel.
    pub fn delay_spread(&self) -> usize {
        if self.full_sic {
            self.l_proc
        } else {
            2 * self.l_proc
        }
    }

    /// Sets both PSDs so that the per-symbol PSD over Bob's noise PSD equals
    /// `snr_db`.
    pub fn set_per_symbol_snr_db(&mut self, snr_db: f64) {
        let psd = 10f64.powf(snr_db / 10.0) * self.noise_psd_bob * self.block_len() as f64;
        self.psd_alice = psd;
        self.psd_relay = psd;
    }

    /// Copy with `n_cp = l_proc = guard`, rescaling the slot PSDs so the
    /// per-symbol PSDs are unchanged.
    pub fn with_guard(&self, guard: usize) -> SystemConfig {
        let mut cfg = self.clone();
        let scale = (self.n_subchannels + guard) as f64 / self.block_len() as f64;
        cfg.n_cp = guard;
        cfg.l_proc = guard;
        cfg.psd_alice = self.psd_alice * scale;
        cfg.psd_relay = self.psd_relay * scale;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_subchannels == 0 {
            return bad("n_subchannels must be at least 1".into());
        }
        if !(1 <= self.l_proc && self.l_proc <= self.n_cp && self.n_cp <= self.n_subchannels) {
            return bad(format!(
                "need 1 <= l_proc <= n_cp <= N, got l_proc={}, n_cp={}, N={}",
                self.l_proc, self.n_cp, self.n_subchannels
            ));
        }
        let nonneg = [
            ("psd_alice", self.psd_alice),
            ("psd_relay", self.psd_relay),
            ("noise_psd_relay", self.noise_psd_relay),
            ("noise_psd_bob", self.noise_psd_bob),
            ("noise_psd_eve", self.noise_psd_eve),
            ("var_ab", self.var_ab),
            ("var_ae", self.var_ae),
            ("var_ar", self.var_ar),
            ("var_rb", self.var_rb),
            ("var_re", self.var_re),
            ("var_rr", self.var_rr),
            ("target_rate", self.target_rate),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return bad(format!("theta must lie in [0, 1], got {}", self.theta));
        }
        if !self.full_sic && self.n_cp < 2 * self.l_proc {
            return bad(format!(
                "residual self-interference spreads the channel to 2*l_proc = {}, but n_cp = {}",
                2 * self.l_proc,
                self.n_cp
            ));
        }
        if self.an_active() && self.n_cp != self.l_proc {
            return bad(format!(
                "artificial noise (theta > 0) requires n_cp == l_proc, got n_cp={}, l_proc={}",
                self.n_cp, self.l_proc
            ));
        }
        Ok(())
    }
}

/// One joint realisation of the six link coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelDraw {
    pub h_ab: Complex64,
    pub h_ae: Complex64,
    pub h_ar: Complex64,
    pub h_rb: Complex64,
    pub h_re: Complex64,
    pub h_rr: Complex64,
}

impl ChannelDraw {
    /// Direct and relay-to-receiver coefficients for `receiver`.
    pub fn links(&self, receiver: Receiver) -> (Complex64, Complex64) {
        match receiver {
            Receiver::Bob => (self.h_ab, self.h_rb),
            Receiver::Eve => (self.h_ae, self.h_re),
        }
    }
}

/// Sparse channel impulse response: `(delay, coefficient)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentCir {
    taps: Vec<(usize, Complex64)>,
}

impl EquivalentCir {
    /// Builds a CIR; delays must be strictly increasing and start at 0.
    pub fn new(taps: Vec<(usize, Complex64)>) -> Result<Self> {
        if taps.first().map(|t| t.0) != Some(0) {
            return Err(Error::InvalidConfig("a CIR must contain a tap at delay 0".into()));
        }
        if taps.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidConfig("CIR delays must be strictly increasing".into()));
        }
        Ok(EquivalentCir { taps })
    }

    pub fn taps(&self) -> &[(usize, Complex64)] {
        &self.taps
    }

    pub fn n_taps(&self) -> usize {
        self.taps.len()
    }

    pub fn max_delay(&self) -> usize {
        self.taps.last().map(|t| t.0).unwrap_or(0)
    }

    pub fn coefficient_at(&self, delay: usize) -> Complex64 {
        self.taps
            .iter()
            .find(|t| t.0 == delay)
            .map(|t| t.1)
            .unwrap_or_default()
    }

    /// Applies the causal linear convolution to `x`, truncated to `x.len()`.
    pub fn convolve(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::default(); x.len()];
        for &(d, h) in &self.taps {
            for t in d..x.len() {
                y[t] += h * x[t - d];
            }
        }
        y
    }
}

/// Cyclic-prefix insertion and removal matrices.
#[derive(Debug, Clone)]
pub struct CpOperators {
    /// `(N+N_cp)×N`: last `N_cp` rows of `I_N` stacked on `I_N`.
    pub t_cp: ComplexMatrix,
    /// `N×(N+N_cp)`: `[0 | I_N]`.
    pub r_cp: ComplexMatrix,
}

impl CpOperators {
    pub fn new(n: usize, n_cp: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        if n_cp > n {
            return Err(Error::InvalidConfig(format!("n_cp = {n_cp} exceeds N = {n}")));
        }
        let one = Complex64::new(1.0, 0.0);
        let mut t_cp = ComplexMatrix::zeros(n + n_cp, n);
        for i in 0..n_cp {
            t_cp[(i, n - n_cp + i)] = one;
        }
        for i in 0..n {
            t_cp[(n_cp + i, i)] = one;
        }
        let mut r_cp = ComplexMatrix::zeros(n, n + n_cp);
        for i in 0..n {
            r_cp[(i, n_cp + i)] = one;
        }
        Ok(CpOperators { t_cp, r_cp })
    }

    /// Cyclic extension of a length-`N` block.
    pub fn insert(block: &[Complex64], n_cp: usize) -> Vec<Complex64> {
        let n = block.len();
        block[n - n_cp..].iter().chain(block.iter()).copied().collect()
    }
}

/// Amplification factor `𝒢` that normalises the relay's forwarded power.
pub fn relay_gain(draw: &ChannelDraw, cfg: &SystemConfig) -> Result<f64> {
    let pbar_r = cfg.pbar_relay();
    if pbar_r == 0.0 {
        return Ok(0.0);
    }
    let si = if cfg.full_sic { 0.0 } else { draw.h_rr.norm_sqr() * pbar_r };
    let denom = draw.h_ar.norm_sqr() * cfg.pbar_alice() + si + cfg.noise_psd_relay;
    if denom <= 0.0 {
        return Err(Error::ZeroGainDenominator);
    }
    Ok((pbar_r / denom).sqrt())
}

/// Equivalent CIR at `receiver`: Alice's direct tap, the relay tap at
/// `L_proc`, and with residual self-interference a third tap at `2·L_proc`.
/// Taps are pure channel gains; transmit power enters only the rates.
pub fn equivalent_cir(
    draw: &ChannelDraw,
    cfg: &SystemConfig,
    receiver: Receiver,
) -> Result<EquivalentCir> {
    let gain = relay_gain(draw, cfg)?;
    let (direct, from_relay) = draw.links(receiver);
    let l = cfg.l_proc;
    let mut taps = vec![(0, direct), (l, from_relay * gain * draw.h_ar)];
    if !cfg.full_sic {
        taps.push((2 * l, from_relay * gain * gain * draw.h_rr * draw.h_ar));
    }
    EquivalentCir::new(taps)
}

/// Taps through which the relay's own receiver noise reaches `receiver`
/// (first-order self-interference model).
pub fn forwarded_noise_taps(
    draw: &ChannelDraw,
    cfg: &SystemConfig,
    receiver: Receiver,
) -> Result<Vec<(usize, Complex64)>> {
    let gain = relay_gain(draw, cfg)?;
    let (_, from_relay) = draw.links(receiver);
    let l = cfg.l_proc;
    let mut taps = vec![(l, from_relay * gain)];
    if !cfg.full_sic {
        taps.push((2 * l, from_relay * gain * gain * draw.h_rr));
    }
    Ok(taps)
}

fn toeplitz_from_taps(taps: &[(usize, Complex64)], length: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(length, length);
    for &(d, coef) in taps {
        for col in 0..length.saturating_sub(d) {
            h[(col + d, col)] += coef;
        }
    }
    h
}

/// Lower-triangular Toeplitz matrix implementing causal convolution.
pub fn conv_matrix(cir: &EquivalentCir, length: usize) -> Result<ComplexMatrix> {
    if length < cir.max_delay() + 1 {
        return Err(Error::ConvLengthTooShort {
            length,
            max_delay: cir.max_delay(),
        });
    }
    Ok(toeplitz_from_taps(cir.taps(), length))
}

/// `R_cp · H · T_cp`, the `N×N` circulant channel after CP handling.
pub fn effective_circulant(cir: &EquivalentCir, cfg: &SystemConfig) -> Result<ComplexMatrix> {
    if cfg.n_cp < cir.max_delay() {
        return Err(Error::CpTooShort {
            n_cp: cfg.n_cp,
            max_delay: cir.max_delay(),
        });
    }
    let cp = CpOperators::new(cfg.n_subchannels, cfg.n_cp)?;
    let h = conv_matrix(cir, cfg.block_len())?;
    Ok(&cp.r_cp * h * &cp.t_cp)
}

/// Covariance of the forwarded relay noise after CP removal, `N×N`.
pub fn forwarded_noise_covariance(
    draw: &ChannelDraw,
    cfg: &SystemConfig,
    receiver: Receiver,
) -> Result<ComplexMatrix> {
    let taps = forwarded_noise_taps(draw, cfg, receiver)?;
    let cp = CpOperators::new(cfg.n_subchannels, cfg.n_cp)?;
    let shaped = &cp.r_cp * toeplitz_from_taps(&taps, cfg.block_len());
    Ok(&shaped * shaped.adjoint() * Complex64::new(cfg.noise_psd_relay, 0.0))
}

/// Subchannel coefficients `H^k = Σ_ℓ h^ℓ·exp(-j2πℓk/n)`, `k = 0..n`.
pub fn subchannel_gains(cir: &EquivalentCir, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            cir.taps()
                .iter()
                .map(|&(d, h)| h * twiddle(d * k % n.max(1), n))
                .sum()
        })
        .collect()
}
