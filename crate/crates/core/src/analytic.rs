//! Closed-form per-subcarrier secrecy outage probability.

use crate::channel::SystemConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SopInputs {
    /// Average legitimate SNR `γ̄_B`.
    pub gamma_bar_b: f64,
    pub var_ab: f64,
    pub var_rb: f64,
    pub var_ae: f64,
    pub var_re: f64,
    pub beta_r: f64,
    pub kappa_b: f64,
    pub kappa_e: f64,
    /// Artificial-noise power on the subcarrier of interest.
    pub delta_k: f64,
    pub target_rate: f64,
}

/// Result of [`sop_subchannel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubchannelSop {
    pub probability: f64,
    /// Set when `γ̄_B = 0` with a positive target rate.
    pub certain_outage: bool,
}

impl SopInputs {
    /// Inputs for `cfg` with AN power `delta_k`. `γ̄_B` uses the per-symbol
    /// data PSD.
    pub fn from_config(cfg: &SystemConfig, delta_k: f64) -> Result<Self> {
        let beta_r = cfg.beta_r().ok_or(Error::ZeroSnr)?;
        if cfg.noise_psd_bob <= 0.0 {
            return Err(Error::InvalidConfig("noise_psd_bob must be positive".into()));
        }
        let gamma_bar_b = cfg.pbar_data() * (cfg.var_ab + cfg.var_rb * beta_r) / cfg.noise_psd_bob;
        Ok(SopInputs {
            gamma_bar_b,
            var_ab: cfg.var_ab,
            var_rb: cfg.var_rb,
            var_ae: cfg.var_ae,
            var_re: cfg.var_re,
            beta_r,
            kappa_b: cfg.noise_psd_bob,
            kappa_e: cfg.noise_psd_eve,
            delta_k,
            target_rate: cfg.target_rate,
        })
    }

    fn validate(&self) -> Result<()> {
        let fields = [
            self.gamma_bar_b,
            self.var_ab,
            self.var_rb,
            self.var_ae,
            self.var_re,
            self.beta_r,
            self.kappa_b,
            self.kappa_e,
            self.target_rate,
        ];
        if fields.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || self.delta_k.is_nan() || self.delta_k < 0.0
        {
            return Err(Error::InvalidConfig(
                "analytic SOP inputs must be finite and non-negative".into(),
            ));
        }
        if self.kappa_b == 0.0 {
            return Err(Error::InvalidConfig("kappa_b must be positive".into()));
        }
        Ok(())
    }
}

/// Probability that the legitimate exponential gain beats `2^ℛ` times the
/// eavesdropper's, ignoring the additive SNR floor.
pub fn alpha_k(inputs: &SopInputs) -> Result<f64> {
    inputs.validate()?;
    let eve_noise = inputs.kappa_e + inputs.delta_k;
    if eve_noise <= 0.0 {
        return Err(Error::ZeroEveNoise);
    }
    let bob = (inputs.var_ab + inputs.var_rb * inputs.beta_r) / inputs.kappa_b;
    if bob == 0.0 {
        return Ok(0.0);
    }
    let eve = (inputs.var_ae + inputs.var_re * inputs.beta_r) / eve_noise;
    Ok(bob / (bob + 2f64.powf(inputs.target_rate) * eve))
}

pub fn sop_subchannel(inputs: &SopInputs) -> Result<SubchannelSop> {
    let alpha = alpha_k(inputs)?;
    let excess = 2f64.powf(inputs.target_rate) - 1.0;
    if inputs.gamma_bar_b == 0.0 {
        return Ok(if excess > 0.0 {
            SubchannelSop {
                probability: 1.0,
                certain_outage: true,
            }
        } else {
            SubchannelSop {
                probability: 1.0 - alpha,
                certain_outage: false,
            }
        });
    }
    let probability = (1.0 - alpha * (-excess / inputs.gamma_bar_b).exp()).clamp(0.0, 1.0);
    Ok(SubchannelSop {
        probability,
        certain_outage: false,
    })
}

/// High-SNR limit of [`sop_subchannel`], `1 - α_k`.
pub fn saturation_floor(inputs: &SopInputs) -> Result<f64> {
    Ok(1.0 - alpha_k(inputs)?)
}
