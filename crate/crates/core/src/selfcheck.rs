//! Numerical consistency suites run by the `self-check` subcommand.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{
    conv_matrix, effective_circulant, equivalent_cir, subchannel_gains, CpOperators, Receiver,
    SystemConfig,
};
use crate::error::Result;
use crate::montecarlo::{complex_gaussian, draw_channels, time_domain_oracle, RngSpec};
use crate::numerics::{offdiag_ratio, to_frequency_domain, ComplexVector};
use crate::rates::{an_precoder, evaluate_trial, nullity_residual};
use crate::spectral::{chain_precoder, TrialEvaluator};

pub const RESIDUAL_THRESHOLD: f64 = 1e-10;
pub const FAST_PATH_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub cases: usize,
    pub max_residual: f64,
    pub threshold: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.max_residual < self.threshold
    }
}

/// Random full-cancellation configuration with `N ∈ {16, 32, 64}` and
/// `N_cp = L_proc ∈ [1, N/4]`.
pub fn random_config(key: RngSpec) -> SystemConfig {
    let mut rng = key.rng();
    let n = [16, 32, 64][rng.random_range(0..3)];
    let l = rng.random_range(1..=n / 4);
    let mut cfg = SystemConfig {
        n_subchannels: n,
        n_cp: l,
        l_proc: l,
        ..SystemConfig::default()
    };
    cfg.set_per_symbol_snr_db(30.0);
    cfg
}

fn random_vector(key: RngSpec, len: usize) -> Vec<Complex64> {
    let mut rng = key.rng();
    (0..len).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
}

fn relative_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let scale: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    if scale == 0.0 {
        diff.sqrt()
    } else {
        (diff / scale).sqrt()
    }
}

/// Leakage of both precoder constructions into the legitimate channel.
pub fn nullity_suite(cases: usize, seed: u64) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for i in 0..cases as u64 {
        let cfg = random_config(RngSpec::new(seed, 2 * i));
        let draw = draw_channels(RngSpec::new(seed, 2 * i + 1), &cfg);
        let cir = equivalent_cir(&draw, &cfg, Receiver::Bob)?;
        let svd = an_precoder(&cir, &cfg)?;
        worst = worst.max(nullity_residual(&cir, &svd.u, &cfg)?);
        if let Some(chain) = chain_precoder(&cir, &cfg) {
            worst = worst.max(nullity_residual(&cir, &chain.u, &cfg)?);
        }
    }
    Ok(CheckReport {
        name: "nullity",
        cases,
        max_residual: worst,
        threshold: RESIDUAL_THRESHOLD,
    })
}

/// Off-diagonal energy of `F·H̃·Fᴴ` and its diagonal against the subchannel
/// gains.
pub fn diagonalization_suite(cases: usize, seed: u64) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for i in 0..cases as u64 {
        let cfg = random_config(RngSpec::new(seed, 2 * i));
        let draw = draw_channels(RngSpec::new(seed, 2 * i + 1), &cfg);
        let receiver = if i % 2 == 0 { Receiver::Bob } else { Receiver::Eve };
        let cir = equivalent_cir(&draw, &cfg, receiver)?;
        let freq = to_frequency_domain(&effective_circulant(&cir, &cfg)?)?;
        worst = worst.max(offdiag_ratio(&freq));
        for (k, g) in subchannel_gains(&cir, cfg.n_subchannels).iter().enumerate() {
            worst = worst.max((freq[(k, k)] - g).norm());
        }
    }
    Ok(CheckReport {
        name: "diagonalization",
        cases,
        max_residual: worst,
        threshold: RESIDUAL_THRESHOLD,
    })
}

/// Sample recursion against `R_cp·H·(T_cp·s + U·w)` at `N = 32`.
pub fn oracle_suite(cases: usize, seed: u64) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for i in 0..cases as u64 {
        let mut cfg = SystemConfig::default();
        let l = 1 + (i as usize % 8);
        cfg.n_subchannels = 32;
        cfg.n_cp = l;
        cfg.l_proc = l;
        cfg.set_per_symbol_snr_db(30.0);
        let draw = draw_channels(RngSpec::new(seed, 4 * i + 1), &cfg);
        let data = random_vector(RngSpec::new(seed, 4 * i + 2), cfg.n_subchannels);
        let cir_bob = equivalent_cir(&draw, &cfg, Receiver::Bob)?;
        let u = an_precoder(&cir_bob, &cfg)?.u;
        let w = ComplexVector::from_vec(random_vector(RngSpec::new(seed, 4 * i + 3), u.ncols()));
        let an: Vec<Complex64> = (&u * w).iter().copied().collect();

        let block = CpOperators::insert(&data, cfg.n_cp);
        let out = time_domain_oracle(&draw, &cfg, &block, Some(&an))?;
        let cp = CpOperators::new(cfg.n_subchannels, cfg.n_cp)?;
        let tx = ComplexVector::from_vec(block.iter().zip(&an).map(|(a, b)| a + b).collect());
        for (receiver, samples) in [(Receiver::Bob, &out.bob), (Receiver::Eve, &out.eve)] {
            let cir = equivalent_cir(&draw, &cfg, receiver)?;
            let model = &cp.r_cp * conv_matrix(&cir, cfg.block_len())? * &tx;
            let kept = &samples[cfg.n_cp..];
            worst = worst.max(relative_error(kept, model.as_slice()));
        }
    }
    Ok(CheckReport {
        name: "oracle-equivalence",
        cases,
        max_residual: worst,
        threshold: RESIDUAL_THRESHOLD,
    })
}

/// Structured evaluator against the dense determinant route.
pub fn fast_path_suite(cases: usize, seed: u64) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for i in 0..cases as u64 {
        let cfg = random_config(RngSpec::new(seed, 2 * i));
        let draw = draw_channels(RngSpec::new(seed, 2 * i + 1), &cfg);
        let fast = TrialEvaluator::new(&cfg)?.evaluate(&draw)?;
        let dense = evaluate_trial(&draw, &cfg)?;
        for (a, b) in [(fast.rate_bob, dense.rate_bob), (fast.rate_eve, dense.rate_eve)] {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    Ok(CheckReport {
        name: "fast-path",
        cases,
        max_residual: worst,
        threshold: FAST_PATH_THRESHOLD,
    })
}

pub fn run_all(seed: u64) -> Result<Vec<CheckReport>> {
    Ok(vec![
        nullity_suite(200, seed)?,
        diagonalization_suite(200, seed)?,
        oracle_suite(100, seed)?,
        fast_path_suite(50, seed)?,
    ])
}
