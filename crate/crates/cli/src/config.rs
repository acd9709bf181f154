//! Flat `key = value` pipeline configuration.

use std::path::{Path, PathBuf};

use needcast_core::relevance::Smoothing;
use needcast_core::taxonomy::Level;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub work_dir: PathBuf,
    pub taxonomy: Option<PathBuf>,
    pub venues: Option<PathBuf>,
    pub checkins: Option<PathBuf>,
    pub suggestions_snapshot: Option<PathBuf>,
    pub suggest_url: Option<String>,
    pub gazetteer: Option<PathBuf>,
    pub synonyms: Option<PathBuf>,
    pub label_overrides: Option<PathBuf>,
    pub temporal_votes: Option<PathBuf>,
    pub judgments: Option<PathBuf>,
    pub countries: Vec<String>,
    pub max_gap_hours: f64,
    pub dedup_window_minutes: f64,
    pub train_fraction: f64,
    pub top_venues: usize,
    pub dashboard_k: usize,
    pub ndcg_ks: Vec<usize>,
    pub smoothing: Smoothing,
    pub gamma: Gamma,
    pub density_min: f64,
    pub cp_min: f64,
    pub top_terms: usize,
    pub rate_limit: Option<f64>,
    pub max_retries: usize,
    pub eval_level: Level,
    pub eval_sample: usize,
    pub candidates: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            work_dir: PathBuf::from("."),
            taxonomy: None,
            venues: None,
            checkins: None,
            suggestions_snapshot: None,
            suggest_url: None,
            gazetteer: None,
            synonyms: None,
            label_overrides: None,
            temporal_votes: None,
            judgments: None,
            countries: Vec::new(),
            max_gap_hours: 6.0,
            dedup_window_minutes: 10.0,
            train_fraction: 0.8,
            top_venues: 200,
            dashboard_k: 3,
            ndcg_ks: vec![3, 5],
            smoothing: Smoothing::Off,
            gamma: Gamma::Auto,
            density_min: 0.5,
            cp_min: 0.5,
            top_terms: 100,
            rate_limit: None,
            max_retries: 2,
            eval_level: Level::Second,
            eval_sample: 100,
            candidates: 10,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_pairs(text: &str, origin: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{origin}:{}: expected key=value", idx + 1)))?;
        out.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config `{key}`: cannot parse `{value}`")))
}

impl PipelineConfig {
    /// Applies one setting. Relative paths resolve against `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), CliError> {
        let path = || -> Option<PathBuf> {
            (!value.is_empty()).then(|| {
                let p = PathBuf::from(value);
                if p.is_absolute() {
                    p
                } else {
                    base.join(p)
                }
            })
        };
        match key {
            "work_dir" => self.work_dir = path().unwrap_or_else(|| base.to_path_buf()),
            "taxonomy" => self.taxonomy = path(),
            "venues" => self.venues = path(),
            "checkins" => self.checkins = path(),
            "suggestions_snapshot" => self.suggestions_snapshot = path(),
            "suggest_url" => self.suggest_url = (!value.is_empty()).then(|| value.to_owned()),
            "gazetteer" => self.gazetteer = path(),
            "synonyms" => self.synonyms = path(),
            "label_overrides" => self.label_overrides = path(),
            "temporal_votes" => self.temporal_votes = path(),
            "judgments" => self.judgments = path(),
            "countries" => {
                self.countries = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_owned)
                    .collect()
            }
            "max_gap_hours" => self.max_gap_hours = num(key, value)?,
            "dedup_window_minutes" => self.dedup_window_minutes = num(key, value)?,
            "train_fraction" => self.train_fraction = num(key, value)?,
            "top_venues" => self.top_venues = num(key, value)?,
            "dashboard_k" => self.dashboard_k = num(key, value)?,
            "ndcg_ks" => self.ndcg_ks = value.split(',').map(|s| num(key, s.trim())).collect::<Result<_, _>>()?,
            "smoothing" => {
                self.smoothing = value
                    .parse()
                    .map_err(|e: needcast_core::Error| CliError::Usage(e.to_string()))?
            }
            "gamma" => {
                self.gamma = if value == "auto" {
                    Gamma::Auto
                } else {
                    Gamma::Fixed(num(key, value)?)
                }
            }
            "density_min" => self.density_min = num(key, value)?,
            "cp_min" => self.cp_min = num(key, value)?,
            "top_terms" => self.top_terms = num(key, value)?,
            "rate_limit" => self.rate_limit = Some(num(key, value)?),
            "max_retries" => self.max_retries = num(key, value)?,
            "eval_level" => {
                self.eval_level = num::<u8>(key, value)
                    .ok()
                    .and_then(Level::from_number)
                    .ok_or_else(|| CliError::Usage(format!("eval_level `{value}` must be 1 or 2")))?
            }
            "eval_sample" => self.eval_sample = num(key, value)?,
            "candidates" => self.candidates = num(key, value)?,
            other => return Err(CliError::Usage(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let base = if base.as_os_str().is_empty() {
            Path::new(".")
        } else {
            base
        };
        let mut cfg = PipelineConfig {
            work_dir: base.to_path_buf(),
            ..Default::default()
        };
        for (k, v) in parse_pairs(&text, &path.display().to_string())? {
            cfg.set(&k, &v, base)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Usage(msg));
        if self.max_gap_hours.is_nan() || self.max_gap_hours <= 0.0 {
            return bad(format!("max_gap_hours must be positive, got {}", self.max_gap_hours));
        }
        if self.dedup_window_minutes.is_nan() || self.dedup_window_minutes <= 0.0 {
            return bad(format!(
                "dedup_window_minutes must be positive, got {}",
                self.dedup_window_minutes
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train_fraction must be in (0, 1), got {}", self.train_fraction));
        }
        for (name, v) in [
            ("top_venues", self.top_venues),
            ("dashboard_k", self.dashboard_k),
            ("top_terms", self.top_terms),
            ("eval_sample", self.eval_sample),
            ("candidates", self.candidates),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.ndcg_ks.is_empty() || self.ndcg_ks.contains(&0) {
            return bad("ndcg_ks must list positive cutoffs".into());
        }
        if let Gamma::Fixed(g) = self.gamma {
            if !(0.0..=1.0).contains(&g) {
                return bad(format!("gamma must be in [0, 1] or auto, got {g}"));
            }
        }
        for (name, v) in [("density_min", self.density_min), ("cp_min", self.cp_min)] {
            if !(v > 0.0 && v <= 1.0) {
                return bad(format!("{name} must be in (0, 1], got {v}"));
            }
        }
        Ok(())
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.work_dir.join(name)
    }
}
