//! Tracker configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments and blank lines are ignored
//! detection_score_min = 0.1
//! matcher = greedy
//! ```
//!
//! Every key is optional; unknown or repeated keys are errors.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::assignment::Matcher;
use crate::error::{Error, Result};
use crate::fpc::{DensityMode, PathScoring};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Proposals need a score strictly above this.
    pub detection_score_min: f64,
    /// NMS suppresses a proposal whose IoU with a kept one exceeds this.
    pub nms_iou: f64,
    /// Consistency edges below this are dropped.
    pub edge_min: f64,
    pub matcher: Matcher,
    pub w_visual: f64,
    pub w_temporal: f64,
    pub density_mode: DensityMode,
    /// 0 keeps every track.
    pub max_tracks: usize,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            detection_score_min: 0.1,
            nms_iou: 0.2,
            edge_min: 0.05,
            matcher: Matcher::Hungarian,
            w_visual: 0.1,
            w_temporal: 0.9,
            density_mode: DensityMode::Normalized,
            max_tracks: 20,
            threads: 0,
        }
    }
}

pub const CONFIG_KEYS: [&str; 9] = [
    "detection_score_min",
    "nms_iou",
    "edge_min",
    "matcher",
    "w_visual",
    "w_temporal",
    "density_mode",
    "max_tracks",
    "threads",
];

impl Config {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("detection_score_min", self.detection_score_min),
            ("nms_iou", self.nms_iou),
            ("edge_min", self.edge_min),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        for (name, v) in [("w_visual", self.w_visual), ("w_temporal", self.w_temporal)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{name} = {v} must be a finite non-negative number")));
            }
        }
        if self.w_visual + self.w_temporal <= 0.0 {
            return Err(Error::Config("w_visual + w_temporal must be positive".into()));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut config = Config::default();
        let mut seen = BTreeSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |msg: String| Error::Config(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| at(format!("expected `key = value`, found `{line}`")))?;
            if !CONFIG_KEYS.contains(&key) {
                return Err(at(format!("unknown key `{key}`")));
            }
            if !seen.insert(key.to_string()) {
                return Err(at(format!("key `{key}` given twice")));
            }
            let float = || {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| at(format!("`{key}` needs a number, found `{value}`")))
            };
            let count = || {
                value
                    .parse::<usize>()
                    .map_err(|_| at(format!("`{key}` needs a non-negative integer, found `{value}`")))
            };
            match key {
                "detection_score_min" => config.detection_score_min = float()?,
                "nms_iou" => config.nms_iou = float()?,
                "edge_min" => config.edge_min = float()?,
                "w_visual" => config.w_visual = float()?,
                "w_temporal" => config.w_temporal = float()?,
                "max_tracks" => config.max_tracks = count()?,
                "threads" => config.threads = count()?,
                "matcher" => {
                    config.matcher = match value {
                        "hungarian" => Matcher::Hungarian,
                        "greedy" => Matcher::Greedy,
                        _ => return Err(at(format!("matcher must be hungarian or greedy, found `{value}`"))),
                    }
                }
                "density_mode" => {
                    config.density_mode = match value {
                        "normalized" => DensityMode::Normalized,
                        "raw" => DensityMode::Raw,
                        _ => return Err(at(format!("density_mode must be normalized or raw, found `{value}`"))),
                    }
                }
                _ => unreachable!("key list checked above"),
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Config::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_text(&self) -> String {
        format!(
            "detection_score_min = {}\nnms_iou = {}\nedge_min = {}\nmatcher = {}\nw_visual = {}\nw_temporal = {}\ndensity_mode = {}\nmax_tracks = {}\nthreads = {}\n",
            self.detection_score_min,
            self.nms_iou,
            self.edge_min,
            self.matcher.name(),
            self.w_visual,
            self.w_temporal,
            self.density_mode.name(),
            self.max_tracks,
            self.threads,
        )
    }

    pub fn path_scoring(&self, num_frames: usize) -> PathScoring {
        PathScoring {
            w_visual: self.w_visual,
            w_temporal: self.w_temporal,
            density: self.density_mode,
            num_frames,
        }
    }
}
