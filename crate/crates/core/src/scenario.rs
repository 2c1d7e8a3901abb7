//! Scenario files: TOML (or the JSON sidecars written by the runner) mapped
//! onto [`SystemConfig`] plus run controls.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{EveDecoder, SystemConfig};
use crate::optimizer::{default_rate_grid, DEFAULT_LPROC_GRID};

pub const DEFAULT_SNR_DB: f64 = 30.0;
pub const DEFAULT_TRIALS: usize = 20_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUTPUT: &str = "relay_secrecy";
pub const SEED_ENV: &str = "RELAY_SECRECY_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub power: PowerSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub variances: VarianceSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub n_subchannels: Option<usize>,
    pub n_cp: Option<usize>,
    pub l_proc: Option<usize>,
    pub theta: Option<f64>,
    pub target_rate: Option<f64>,
    pub full_sic: Option<bool>,
    pub include_forwarded_relay_noise: Option<bool>,
    pub eve_decoder: Option<EveDecoder>,
}

/// Either a per-symbol SNR in dB or explicit slot PSDs, not both.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSection {
    pub snr_db: Option<f64>,
    pub psd_alice: Option<f64>,
    pub psd_relay: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub relay: Option<f64>,
    pub bob: Option<f64>,
    pub eve: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceSection {
    pub ab: Option<f64>,
    pub ae: Option<f64>,
    pub ar: Option<f64>,
    pub rb: Option<f64>,
    pub re: Option<f64>,
    pub rr: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub n_trials: Option<usize>,
    pub seed: Option<u64>,
    pub lproc_grid: Option<Vec<usize>>,
    pub rate_grid: Option<Vec<f64>>,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunControls {
    pub n_trials: usize,
    pub seed: u64,
    pub lproc_grid: Vec<usize>,
    pub rate_grid: Vec<f64>,
    pub output: String,
}

/// A fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: SystemConfig,
    pub run: RunControls,
}

impl Scenario {
    pub fn resolve(&self) -> Result<Resolved, String> {
        let mut cfg = SystemConfig::default();
        let s = &self.system;
        macro_rules! set {
            ($src:expr => $dst:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        set!(s.n_subchannels => cfg.n_subchannels);
        set!(s.n_cp => cfg.n_cp);
        set!(s.l_proc => cfg.l_proc);
        set!(s.theta => cfg.theta);
        set!(s.target_rate => cfg.target_rate);
        set!(s.full_sic => cfg.full_sic);
        set!(s.include_forwarded_relay_noise => cfg.include_forwarded_relay_noise);
        set!(s.eve_decoder => cfg.eve_decoder);
        set!(self.noise.relay => cfg.noise_psd_relay);
        set!(self.noise.bob => cfg.noise_psd_bob);
        set!(self.noise.eve => cfg.noise_psd_eve);
        let v = &self.variances;
        set!(v.ab => cfg.var_ab);
        set!(v.ae => cfg.var_ae);
        set!(v.ar => cfg.var_ar);
        set!(v.rb => cfg.var_rb);
        set!(v.re => cfg.var_re);
        set!(v.rr => cfg.var_rr);

        let p = &self.power;
        if p.snr_db.is_some() && (p.psd_alice.is_some() || p.psd_relay.is_some()) {
            return Err("power: give either snr_db or psd_alice/psd_relay, not both".into());
        }
        cfg.set_per_symbol_snr_db(p.snr_db.unwrap_or(DEFAULT_SNR_DB));
        set!(p.psd_alice => cfg.psd_alice);
        set!(p.psd_relay => cfg.psd_relay);
        cfg.validate().map_err(|e| e.to_string())?;

        let r = &self.run;
        let run = RunControls {
            n_trials: r.n_trials.unwrap_or(DEFAULT_TRIALS),
            seed: r.seed.unwrap_or(DEFAULT_SEED),
            lproc_grid: r.lproc_grid.clone().unwrap_or_else(|| DEFAULT_LPROC_GRID.to_vec()),
            rate_grid: r.rate_grid.clone().unwrap_or_else(default_rate_grid),
            output: r.output.clone().unwrap_or_else(|| DEFAULT_OUTPUT.to_string()),
        };
        if run.n_trials == 0 {
            return Err("run.n_trials must be at least 1".into());
        }
        Ok(Resolved { config: cfg, run })
    }

    /// Fully explicit scenario for `resolved`; resolving it again yields the
    /// same configuration bit for bit.
    pub fn from_resolved(resolved: &Resolved) -> Scenario {
        let c = &resolved.config;
        let r = &resolved.run;
        Scenario {
            system: SystemSection {
                n_subchannels: Some(c.n_subchannels),
                n_cp: Some(c.n_cp),
                l_proc: Some(c.l_proc),
                theta: Some(c.theta),
                target_rate: Some(c.target_rate),
                full_sic: Some(c.full_sic),
                include_forwarded_relay_noise: Some(c.include_forwarded_relay_noise),
                eve_decoder: Some(c.eve_decoder),
            },
            power: PowerSection {
                snr_db: None,
                psd_alice: Some(c.psd_alice),
                psd_relay: Some(c.psd_relay),
            },
            noise: NoiseSection {
                relay: Some(c.noise_psd_relay),
                bob: Some(c.noise_psd_bob),
                eve: Some(c.noise_psd_eve),
            },
            variances: VarianceSection {
                ab: Some(c.var_ab),
                ae: Some(c.var_ae),
                ar: Some(c.var_ar),
                rb: Some(c.var_rb),
                re: Some(c.var_re),
                rr: Some(c.var_rr),
            },
            run: RunSection {
                n_trials: Some(r.n_trials),
                seed: Some(r.seed),
                lproc_grid: Some(r.lproc_grid.clone()),
                rate_grid: Some(r.rate_grid.clone()),
                output: Some(r.output.clone()),
            },
        }
    }
}

/// Reads a scenario document as a TOML table. Files ending in `.json` are
/// parsed as JSON.
pub fn read_document(path: &Path) -> Result<toml::Table, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read scenario file {}: {e}", path.display()))?;
    let is_json = path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
    if is_json {
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let value = strip_nulls(value);
        toml::Table::try_from(value).map_err(|e| format!("{}: {e}", path.display()))
    } else {
        text.parse::<toml::Table>().map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn strip_nulls(value: serde_json::Value) -> serde_json::Value {
    match value {
        serde_json::Value::Object(map) => serde_json::Value::Object(
            map.into_iter()
                .filter(|(_, v)| !v.is_null())
                .map(|(k, v)| (k, strip_nulls(v)))
                .collect(),
        ),
        other => other,
    }
}

/// Applies `section.key=value` to `doc`. The value is read as a TOML
/// literal, falling back to a bare string.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<(), String> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override '{assignment}' is not of the form key=value"))?;
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));

    let keys: Vec<&str> = path.trim().split('.').collect();
    let (last, parents) = keys.split_last().expect("split always yields one item");
    let mut table = doc;
    for key in parents {
        table = table
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| format!("override '{path}': '{key}' is not a section"))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

pub fn parse_document(doc: toml::Table) -> Result<Scenario, String> {
    doc.try_into::<Scenario>().map_err(|e| format!("invalid scenario: {e}"))
}
