//! Flat `key = value` configuration with strict key checking.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::candidates::CandidateParams;
use crate::lines::DEFAULT_TAU;
use crate::losses::LossWeights;
use crate::pipeline::DetectConfig;

pub const KEYS: &[&str] = &[
    "tau",
    "lambda1",
    "lambda2",
    "lambda3",
    "iou_thresh",
    "words",
    "scales",
    "min_region_area",
    "region_threshold",
    "rng",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{source_name}:{line}: unknown key '{key}'")]
    UnknownKey {
        source_name: String,
        line: usize,
        key: String,
    },
    #[error("{source_name}:{line}: expected 'key = value'")]
    Syntax { source_name: String, line: usize },
    #[error("{source_name}:{line}: invalid value '{value}' for '{key}': {reason}")]
    Value {
        source_name: String,
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub tau: f64,
    pub weights: LossWeights,
    pub iou_thresh: f64,
    pub words: bool,
    pub scales: Vec<f64>,
    pub min_region_area: usize,
    pub region_threshold: f32,
}

impl Default for Config {
    fn default() -> Self {
        let c = CandidateParams::default();
        Self {
            tau: DEFAULT_TAU,
            weights: LossWeights::default(),
            iou_thresh: 0.5,
            words: false,
            scales: vec![1.0],
            min_region_area: c.min_region_area,
            region_threshold: c.region_threshold,
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Some(true),
        "off" | "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

impl Config {
    /// Applies one `key`/`value` pair. `source_name` and `line` only label
    /// errors.
    pub fn set(
        &mut self,
        key: &str,
        value: &str,
        source_name: &str,
        line: usize,
    ) -> Result<(), ConfigError> {
        let bad = |reason: &str| ConfigError::Value {
            source_name: source_name.to_string(),
            line,
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        };
        let number = || value.parse::<f64>().ok().filter(|v| v.is_finite());
        match key {
            "tau" => {
                let v = number().filter(|v| *v > 0.0 && *v <= 1.0);
                self.tau = v.ok_or_else(|| bad("expected a number in (0, 1]"))?;
            }
            "lambda1" | "lambda2" | "lambda3" => {
                let v = number()
                    .filter(|v| *v >= 0.0)
                    .ok_or_else(|| bad("expected a non-negative number"))?;
                match key {
                    "lambda1" => self.weights.lambda1 = v,
                    "lambda2" => self.weights.lambda2 = v,
                    _ => self.weights.lambda3 = v,
                }
            }
            "iou_thresh" => {
                let v = number().filter(|v| *v > 0.0 && *v <= 1.0);
                self.iou_thresh = v.ok_or_else(|| bad("expected a number in (0, 1]"))?;
            }
            "words" => self.words = parse_bool(value).ok_or_else(|| bad("expected on or off"))?,
            "scales" => {
                let v: Option<Vec<f64>> = value
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|v| *v > 0.0 && v.is_finite())
                    })
                    .collect();
                self.scales = v
                    .filter(|v| !v.is_empty())
                    .ok_or_else(|| bad("expected comma-separated positive numbers"))?;
            }
            "min_region_area" => {
                self.min_region_area = value
                    .parse()
                    .map_err(|_| bad("expected a non-negative integer"))?;
            }
            "region_threshold" => {
                let v = number().filter(|v| *v > 0.0 && *v <= 1.0);
                self.region_threshold = v.ok_or_else(|| bad("expected a number in (0, 1]"))? as f32;
            }
            "rng" => {
                if value != crate::synth::RNG_ALGORITHM {
                    return Err(bad("only ChaCha8 is supported"));
                }
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    source_name: source_name.to_string(),
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str, source_name: &str) -> Result<(), ConfigError> {
        for (k, raw) in text.lines().enumerate() {
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (key, value) = t.split_once('=').ok_or(ConfigError::Syntax {
                source_name: source_name.to_string(),
                line: k + 1,
            })?;
            self.set(key.trim(), value.trim(), source_name, k + 1)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut c = Config::default();
        c.apply_text(&text, &path.display().to_string())?;
        Ok(c)
    }

    /// Applies a `key=value` override from the command line.
    pub fn apply_override(&mut self, kv: &str, index: usize) -> Result<(), ConfigError> {
        let name = "--set";
        let (key, value) = kv.split_once('=').ok_or(ConfigError::Syntax {
            source_name: name.to_string(),
            line: index + 1,
        })?;
        self.set(key.trim(), value.trim(), name, index + 1)
    }

    pub fn detect_config(&self) -> DetectConfig {
        DetectConfig {
            tau: self.tau,
            iou_thresh: self.iou_thresh,
            words: self.words,
            scales: self.scales.clone(),
            candidates: CandidateParams {
                region_threshold: self.region_threshold,
                min_region_area: self.min_region_area,
                ..CandidateParams::default()
            },
        }
    }
}
