//! Sweeps over the relay processing delay and the target secrecy rate.

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::montecarlo::{simulate_secrecy, Estimate};

pub const DEFAULT_LPROC_GRID: [usize; 10] = [1, 2, 4, 8, 12, 16, 24, 32, 48, 64];

/// `0.5, 1.0, ..., 10.0`.
pub fn default_rate_grid() -> Vec<f64> {
    (1..=20).map(|i| f64::from(i) * 0.5).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub parameter: f64,
    pub throughput: Estimate,
    pub sop: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub argmax: f64,
    pub max_throughput: Estimate,
}

impl SweepResult {
    /// Picks the point with the largest mean throughput, preferring the
    /// smallest parameter on ties.
    pub fn from_points(points: Vec<SweepPoint>) -> Result<Self> {
        let best = points
            .iter()
            .copied()
            .reduce(|best, p| {
                let better = p.throughput.mean > best.throughput.mean
                    || (p.throughput.mean == best.throughput.mean && p.parameter < best.parameter);
                if better {
                    p
                } else {
                    best
                }
            })
            .ok_or(Error::EmptyGrid)?;
        Ok(SweepResult {
            argmax: best.parameter,
            max_throughput: best.throughput,
            points,
        })
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.parameter).collect()
    }

    pub fn point(&self, parameter: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.parameter == parameter)
    }
}

fn check_guard_grid(cfg: &SystemConfig, values: &[usize]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let max = cfg.n_subchannels;
    match values.iter().find(|&&v| v == 0 || v > max) {
        Some(&value) => Err(Error::SweepValueOutOfRange { value, max }),
        None => Ok(()),
    }
}

/// Evaluates each `v` in `values` with `N_cp = L_proc = v`, reusing the same
/// channel realisations at every point.
pub fn sweep_lproc(cfg: &SystemConfig, values: &[usize], n_trials: usize, seed: u64) -> Result<SweepResult> {
    check_guard_grid(cfg, values)?;
    let points = values
        .iter()
        .map(|&v| {
            let point_cfg = cfg.with_guard(v);
            let samples = simulate_secrecy(&point_cfg, n_trials, seed)?;
            Ok(SweepPoint {
                parameter: v as f64,
                throughput: samples.throughput(point_cfg.target_rate)?,
                sop: samples.sop(point_cfg.target_rate)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SweepResult::from_points(points)
}

/// Evaluates each target rate on one shared set of realisations.
pub fn sweep_target_rate(cfg: &SystemConfig, rates: &[f64], n_trials: usize, seed: u64) -> Result<SweepResult> {
    if rates.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) || rates.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig(
            "target rates must be positive, finite and sorted".into(),
        ));
    }
    let samples = simulate_secrecy(cfg, n_trials, seed)?;
    let points = rates
        .iter()
        .map(|&r| {
            Ok(SweepPoint {
                parameter: r,
                throughput: samples.throughput(r)?,
                sop: samples.sop(r)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SweepResult::from_points(points)
}

/// The proposed scheme and its three reference schemes over one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSuite {
    pub proposed: SweepResult,
    pub fixed_lproc_one: SweepResult,
    pub no_relay: SweepResult,
    pub relay_without_an: SweepResult,
}

impl BenchmarkSuite {
    pub fn labeled(&self) -> [(&'static str, &SweepResult); 4] {
        [
            ("proposed", &self.proposed),
            ("lproc1", &self.fixed_lproc_one),
            ("no_relay", &self.no_relay),
            ("relay_no_an", &self.relay_without_an),
        ]
    }
}

/// Runs all four schemes under common random numbers.
///
/// The `L_proc = 1` scheme keeps `N_cp = 1` and is evaluated once; its value
/// is reported at every grid point. The no-relay scheme silences the relay
/// and sends no artificial noise.
pub fn benchmark_suite(cfg: &SystemConfig, values: &[usize], n_trials: usize, seed: u64) -> Result<BenchmarkSuite> {
    check_guard_grid(cfg, values)?;
    let proposed = sweep_lproc(cfg, values, n_trials, seed)?;

    let single = sweep_lproc(cfg, &[1], n_trials, seed)?.points[0];
    let fixed_lproc_one = SweepResult::from_points(
        values
            .iter()
            .map(|&v| SweepPoint {
                parameter: v as f64,
                ..single
            })
            .collect(),
    )?;

    let mut silent = cfg.clone();
    silent.psd_relay = 0.0;
    silent.theta = 0.0;
    let no_relay = sweep_lproc(&silent, values, n_trials, seed)?;

    let mut plain = cfg.clone();
    plain.theta = 0.0;
    let relay_without_an = sweep_lproc(&plain, values, n_trials, seed)?;

    Ok(BenchmarkSuite {
        proposed,
        fixed_lproc_one,
        no_relay,
        relay_without_an,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SystemConfig {
        let mut cfg = SystemConfig::default();
        cfg.n_subchannels = 16;
        cfg.n_cp = 4;
        cfg.l_proc = 4;
        cfg.set_per_symbol_snr_db(30.0);
        cfg
    }

    fn point(parameter: f64, mean: f64) -> SweepPoint {
        let e = Estimate {
            mean,
            stderr: 0.0,
            n_trials: 1,
            ci95_low: mean,
            ci95_high: mean,
        };
        SweepPoint {
            parameter,
            throughput: e,
            sop: e,
        }
    }

    #[test]
    fn argmax_prefers_smallest_parameter_on_ties() {
        let r = SweepResult::from_points(vec![point(4.0, 1.0), point(2.0, 1.0), point(8.0, 0.5)]).unwrap();
        assert_eq!(r.argmax, 2.0);
        assert_eq!(SweepResult::from_points(vec![]), Err(Error::EmptyGrid));
    }

    #[test]
    fn single_value_sweep() {
        let r = sweep_lproc(&small(), &[1], 100, 1).unwrap();
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.argmax, 1.0);
    }

    #[test]
    fn rejects_out_of_range_values() {
        assert_eq!(
            sweep_lproc(&small(), &[1, 17], 10, 1),
            Err(Error::SweepValueOutOfRange { value: 17, max: 16 })
        );
        assert!(sweep_lproc(&small(), &[0], 10, 1).is_err());
        assert_eq!(sweep_lproc(&small(), &[], 10, 1), Err(Error::EmptyGrid));
    }

    #[test]
    fn throughput_is_rate_times_success() {
        let r = sweep_target_rate(&small(), &[0.5, 1.0, 2.0], 200, 3).unwrap();
        for p in &r.points {
            assert!((p.throughput.mean - p.parameter * (1.0 - p.sop.mean)).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_sweep_extremes() {
        let r = sweep_target_rate(&small(), &[1e-9, 50.0], 200, 3).unwrap();
        assert!(r.points[0].throughput.mean < 1e-8);
        assert_eq!(r.points[1].throughput.mean, 0.0);
        assert!(sweep_target_rate(&small(), &[2.0, 1.0], 10, 1).is_err());
        assert!(sweep_target_rate(&small(), &[0.0], 10, 1).is_err());
    }

    #[test]
    fn rate_sweep_matches_pointwise_estimates() {
        let cfg = small();
        let r = sweep_target_rate(&cfg, &[1.0, 3.0], 150, 9).unwrap();
        let mut at3 = cfg.clone();
        at3.target_rate = 3.0;
        let direct = crate::montecarlo::estimate_sop(&at3, 150, 9).unwrap();
        assert_eq!(r.points[1].sop, direct);
    }

    #[test]
    fn benchmark_suite_is_structurally_complete() {
        let suite = benchmark_suite(&small(), &[1, 2, 4], 60, 5).unwrap();
        for (_, s) in suite.labeled() {
            assert_eq!(s.parameters(), vec![1.0, 2.0, 4.0]);
        }
        let flat = &suite.fixed_lproc_one.points;
        assert!(flat.iter().all(|p| p.throughput == flat[0].throughput));
        assert_eq!(suite.proposed.points[0].throughput, flat[0].throughput);
    }
}
