//! Structured per-trial evaluator.
//!
//! With perfect self-interference cancellation the legitimate channel has two
//! taps `(0, h0)` and `(L, h1)` and the cyclic prefix is exactly `L` long. The
//! null space of `R_cp·H_B` then splits into `L` chains over the residue
//! classes of the time index modulo `L`, each a geometric sequence with ratio
//! `-h1/h0`. The leaked artificial noise at Eve inherits the same disjoint
//! supports, so the joint rate reduces to an `L×L` determinant through the
//! matrix determinant lemma and the rest is diagonal in frequency.
//!
//! Realisations outside that structure go through [`crate::rates`].

use num_complex::Complex64;

use crate::channel::{
    equivalent_cir, relay_gain, ChannelDraw, EquivalentCir, EveDecoder, Receiver, SystemConfig,
};
use crate::error::{Error, Result};
use crate::numerics::{logdet_identity_plus, twiddle, ComplexMatrix};
use crate::rates::{evaluate_trial, AnPrecoder, RateReport, NULLITY_TOL};

/// Null-space chains of a two-tap channel with `N_cp = L`.
#[derive(Debug, Clone)]
struct Chains {
    l: usize,
    /// `values[r][i]` is the entry at time index `r + i·L`.
    values: Vec<Vec<Complex64>>,
}

impl Chains {
    fn build(h0: Complex64, h1: Complex64, l: usize, block_len: usize) -> Option<Chains> {
        if h0 == Complex64::new(0.0, 0.0) && h1 == Complex64::new(0.0, 0.0) {
            return None;
        }
        let forward = h1.norm() <= h0.norm();
        let values = (0..l)
            .map(|r| {
                let k = (block_len - 1 - r) / l + 1;
                let mut v = vec![Complex64::new(0.0, 0.0); k];
                if forward {
                    let rho = -h1 / h0;
                    v[0] = Complex64::new(1.0, 0.0);
                    for i in 1..k {
                        v[i] = v[i - 1] * rho;
                    }
                } else {
                    let inv_rho = -h0 / h1;
                    v[k - 1] = Complex64::new(1.0, 0.0);
                    for i in (0..k - 1).rev() {
                        v[i] = v[i + 1] * inv_rho;
                    }
                }
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                v.iter_mut().for_each(|z| *z /= norm);
                v
            })
            .collect();
        Some(Chains { l, values })
    }

    /// `‖R_cp·H·U‖_F / ‖R_cp·H‖_F` for the two-tap channel `(h0, h1)`.
    fn residual(&self, h0: Complex64, h1: Complex64, n: usize) -> f64 {
        let leak: f64 = self
            .values
            .iter()
            .flat_map(|v| v.windows(2).map(|w| (h0 * w[1] + h1 * w[0]).norm_sqr()))
            .sum();
        let scale = n as f64 * (h0.norm_sqr() + h1.norm_sqr());
        (leak / scale).sqrt()
    }

    /// CP-removed response of a two-tap channel `(e0, e1)` to each chain.
    /// Entry `n` belongs to chain `n % L`.
    fn leak(&self, e0: Complex64, e1: Complex64, n: usize) -> Vec<Complex64> {
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        for (r, v) in self.values.iter().enumerate() {
            for i in 1..v.len() {
                b[r + (i - 1) * self.l] = e0 * v[i] + e1 * v[i - 1];
            }
        }
        b
    }

    fn to_dense(&self, block_len: usize) -> ComplexMatrix {
        let mut u = ComplexMatrix::zeros(block_len, self.l);
        for (r, v) in self.values.iter().enumerate() {
            for (i, z) in v.iter().enumerate() {
                u[(r + i * self.l, r)] = *z;
            }
        }
        u
    }
}

fn two_taps(cir: &EquivalentCir, l: usize) -> (Complex64, Complex64) {
    (cir.coefficient_at(0), cir.coefficient_at(l))
}

/// Artificial-noise precoder built from the closed-form chains. Returns
/// `None` when the structure does not apply.
pub fn chain_precoder(cir_bob: &EquivalentCir, cfg: &SystemConfig) -> Option<AnPrecoder> {
    if cir_bob.max_delay() > cfg.l_proc || cfg.n_cp != cfg.l_proc {
        return None;
    }
    let (h0, h1) = two_taps(cir_bob, cfg.l_proc);
    let chains = Chains::build(h0, h1, cfg.l_proc, cfg.block_len())?;
    Some(AnPrecoder {
        u: chains.to_dense(cfg.block_len()),
        nullity_residual: chains.residual(h0, h1, cfg.n_subchannels),
    })
}

/// Evaluates realisations for a fixed configuration.
#[derive(Debug, Clone)]
pub struct TrialEvaluator {
    cfg: SystemConfig,
    /// `exp(-j2πm/N)`, `m = 0..N`.
    twiddles: Vec<Complex64>,
}

/// Per-trial quantities shared by the rate and interference computations.
struct Frame {
    bob_gains: Vec<Complex64>,
    eve_gains: Vec<Complex64>,
    kappa_bob: f64,
    kappa_eve: f64,
    eve_taps: (Complex64, Complex64),
    bob_taps: (Complex64, Complex64),
}

impl TrialEvaluator {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_subchannels;
        Ok(TrialEvaluator {
            cfg: cfg.clone(),
            twiddles: (0..n).map(|m| twiddle(m, n)).collect(),
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    /// Whether realisations are handled by the structured path.
    pub fn is_structured(&self) -> bool {
        self.cfg.full_sic || !self.cfg.include_forwarded_relay_noise
    }

    fn gains(&self, cir: &EquivalentCir) -> Vec<Complex64> {
        let n = self.cfg.n_subchannels;
        (0..n)
            .map(|k| {
                cir.taps()
                    .iter()
                    .map(|&(d, h)| h * self.twiddles[d * k % n])
                    .sum()
            })
            .collect()
    }

    fn frame(&self, draw: &ChannelDraw) -> Result<Frame> {
        let cfg = &self.cfg;
        let cir_bob = equivalent_cir(draw, cfg, Receiver::Bob)?;
        let cir_eve = equivalent_cir(draw, cfg, Receiver::Eve)?;
        let (mut kappa_bob, mut kappa_eve) = (cfg.noise_psd_bob, cfg.noise_psd_eve);
        if cfg.include_forwarded_relay_noise {
            // Under perfect cancellation the forwarded noise is a single
            // delayed tap, hence white after CP removal.
            let g = relay_gain(draw, cfg)?;
            kappa_bob += cfg.noise_psd_relay * (draw.h_rb * g).norm_sqr();
            kappa_eve += cfg.noise_psd_relay * (draw.h_re * g).norm_sqr();
        }
        Ok(Frame {
            bob_gains: self.gains(&cir_bob),
            eve_gains: self.gains(&cir_eve),
            kappa_bob,
            kappa_eve,
            eve_taps: two_taps(&cir_eve, cfg.l_proc),
            bob_taps: two_taps(&cir_bob, cfg.l_proc),
        })
    }

    /// `Σ_k log2(1 + p̄·|g_k|²/(κ + δ_k)) / (N + N_cp)`.
    fn diagonal_rate(&self, gains: &[Complex64], kappa: f64, delta: Option<&[f64]>) -> Result<f64> {
        let p = self.cfg.pbar_data();
        let mut sum = 0.0;
        for (k, g) in gains.iter().enumerate() {
            let signal = p * g.norm_sqr();
            if signal == 0.0 {
                continue;
            }
            let denom = kappa + delta.map_or(0.0, |d| d[k]);
            if denom <= 0.0 {
                return Err(Error::SingularWhitening);
            }
            sum += (1.0 + signal / denom).log2();
        }
        Ok(sum / self.cfg.block_len() as f64)
    }

    fn chains(&self, frame: &Frame) -> Result<Option<Chains>> {
        let (h0, h1) = frame.bob_taps;
        let Some(chains) = Chains::build(h0, h1, self.cfg.l_proc, self.cfg.block_len()) else {
            return Ok(None);
        };
        let residual = chains.residual(h0, h1, self.cfg.n_subchannels);
        if residual > NULLITY_TOL {
            return Err(Error::NullityViolation {
                residual,
                tolerance: NULLITY_TOL,
            });
        }
        Ok(Some(chains))
    }

    fn an_scale(&self) -> f64 {
        self.cfg.an_power() / self.cfg.l_proc as f64
    }

    /// AN power on each subcarrier at Eve, `c·Σ_r |(F·b_r)_k|²`.
    fn delta_from_leak(&self, b: &[Complex64]) -> Vec<f64> {
        let n = self.cfg.n_subchannels;
        let l = self.cfg.l_proc;
        let scale = self.an_scale() / n as f64;
        (0..n)
            .map(|k| {
                let mut per_chain = vec![Complex64::new(0.0, 0.0); l];
                for (idx, z) in b.iter().enumerate() {
                    per_chain[idx % l] += z * self.twiddles[k * idx % n];
                }
                scale * per_chain.iter().map(|z| z.norm_sqr()).sum::<f64>()
            })
            .collect()
    }

    fn joint_eve_rate(&self, frame: &Frame, b: &[Complex64]) -> Result<f64> {
        let n = self.cfg.n_subchannels;
        let l = self.cfg.l_proc;
        let kappa = frame.kappa_eve;
        if kappa <= 0.0 {
            return Err(Error::SingularWhitening);
        }
        let p = self.cfg.pbar_data();
        let d: Vec<f64> = frame.eve_gains.iter().map(|g| kappa + p * g.norm_sqr()).collect();

        // First column of (κI + p̄·H̃H̃ᴴ)⁻¹, a circulant.
        let inv_col: Vec<Complex64> = (0..n)
            .map(|m| {
                d.iter()
                    .enumerate()
                    .map(|(k, dk)| self.twiddles[k * m % n].conj() / *dk)
                    .sum::<Complex64>()
                    / n as f64
            })
            .collect();

        let mut gram = ComplexMatrix::zeros(l, l);
        for (i, bi) in b.iter().enumerate() {
            if *bi == Complex64::new(0.0, 0.0) {
                continue;
            }
            let left = bi.conj();
            for (j, bj) in b.iter().enumerate() {
                gram[(i % l, j % l)] += left * inv_col[(i + n - j) % n] * bj;
            }
        }
        let c = self.an_scale();
        let coupled = logdet_identity_plus(&(gram * Complex64::new(c, 0.0)))?;

        let mut norms = vec![0.0; l];
        for (i, bi) in b.iter().enumerate() {
            norms[i % l] += bi.norm_sqr();
        }
        let interference: f64 = norms.iter().map(|s| (1.0 + c * s / kappa).log2()).sum();
        let signal: f64 = d.iter().map(|dk| (dk / kappa).log2()).sum();
        Ok(((signal + coupled - interference) / self.cfg.block_len() as f64).max(0.0))
    }

    pub fn evaluate(&self, draw: &ChannelDraw) -> Result<RateReport> {
        if !self.is_structured() {
            return evaluate_trial(draw, &self.cfg);
        }
        let frame = self.frame(draw)?;
        let rate_bob = self.diagonal_rate(&frame.bob_gains, frame.kappa_bob, None)?;

        let rate_eve = if !self.cfg.an_active() {
            self.diagonal_rate(&frame.eve_gains, frame.kappa_eve, None)?
        } else {
            let Some(chains) = self.chains(&frame)? else {
                return evaluate_trial(draw, &self.cfg);
            };
            let (e0, e1) = frame.eve_taps;
            let b = chains.leak(e0, e1, self.cfg.n_subchannels);
            match self.cfg.eve_decoder {
                EveDecoder::Joint => self.joint_eve_rate(&frame, &b)?,
                EveDecoder::PerSubcarrier => {
                    let delta = self.delta_from_leak(&b);
                    self.diagonal_rate(&frame.eve_gains, frame.kappa_eve, Some(&delta))?
                }
            }
        };
        Ok(RateReport::new(rate_bob, rate_eve, self.cfg.target_rate))
    }

    /// Artificial-noise power on each of Eve's subcarriers for one
    /// realisation; all zeros when no AN is sent.
    pub fn delta_profile(&self, draw: &ChannelDraw) -> Result<Vec<f64>> {
        let n = self.cfg.n_subchannels;
        if !self.cfg.an_active() {
            return Ok(vec![0.0; n]);
        }
        let frame = self.frame(draw)?;
        match self.chains(&frame)? {
            Some(chains) => {
                let (e0, e1) = frame.eve_taps;
                Ok(self.delta_from_leak(&chains.leak(e0, e1, n)))
            }
            None => {
                let cir_bob = equivalent_cir(draw, &self.cfg, Receiver::Bob)?;
                let cir_eve = equivalent_cir(draw, &self.cfg, Receiver::Eve)?;
                let pre = crate::rates::an_precoder(&cir_bob, &self.cfg)?;
                Ok(crate::rates::eve_interference(&cir_eve, &pre, &self.cfg)?.delta)
            }
        }
    }
}
