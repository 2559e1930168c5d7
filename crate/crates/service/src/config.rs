use crate::error::ServiceError;
use nbiig_core::realization::RealizerEndpoint;
use std::path::PathBuf;
use std::time::Duration;

pub const DEFAULT_DATA_DIR: &str = "nbiig-data";

#[derive(Debug, Clone, PartialEq)]
pub struct StoreConfig {
    pub data_dir: PathBuf,
    pub realizer: Option<RealizerEndpoint>,
    /// Weight of faithfulness in `rec_score`.
    pub alpha: f64,
    pub seed: u64,
    /// Segment priors JSON as written by `nbiig priors`.
    pub priors: Option<PathBuf>,
}

impl StoreConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        StoreConfig {
            data_dir: data_dir.into(),
            realizer: None,
            alpha: 0.7,
            seed: 0,
            priors: None,
        }
    }

    /// Reads `NBIIG_DATA_DIR`, `NBIIG_REALIZER_URL`, `NBIIG_REALIZER_FIXTURE`,
    /// `NBIIG_REALIZER_TIMEOUT_MS`, `NBIIG_SEED`, `NBIIG_ALPHA` and `NBIIG_PRIORS`.
    pub fn from_env() -> Result<Self, ServiceError> {
        Self::from_vars(|k| std::env::var(k).ok())
    }

    pub fn from_vars(get: impl Fn(&str) -> Option<String>) -> Result<Self, ServiceError> {
        let get = |k: &str| get(k).filter(|v| !v.trim().is_empty());
        let mut cfg = StoreConfig::new(get("NBIIG_DATA_DIR").unwrap_or_else(|| DEFAULT_DATA_DIR.into()));
        cfg.realizer = match (get("NBIIG_REALIZER_URL"), get("NBIIG_REALIZER_FIXTURE")) {
            (_, Some(path)) => Some(RealizerEndpoint::fixture(path)),
            (Some(url), None) => Some(RealizerEndpoint::live(url)),
            (None, None) => None,
        };
        if let Some(ms) = get("NBIIG_REALIZER_TIMEOUT_MS") {
            let ms: u64 = parse("NBIIG_REALIZER_TIMEOUT_MS", &ms)?;
            cfg.realizer = cfg.realizer.map(|ep| ep.with_timeout(Duration::from_millis(ms)));
        }
        if let Some(s) = get("NBIIG_SEED") {
            cfg.seed = parse("NBIIG_SEED", &s)?;
        }
        if let Some(a) = get("NBIIG_ALPHA") {
            cfg.alpha = parse("NBIIG_ALPHA", &a)?;
            if !(0.0..=1.0).contains(&cfg.alpha) {
                return Err(ServiceError::Config(format!("NBIIG_ALPHA must be in [0, 1], got {a}")));
            }
        }
        cfg.priors = get("NBIIG_PRIORS").map(PathBuf::from);
        Ok(cfg)
    }
}

fn parse<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, ServiceError>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| ServiceError::Config(format!("{name}={value:?}: {e}")))
}
