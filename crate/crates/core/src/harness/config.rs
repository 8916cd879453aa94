//! Flat `key = value` run configuration.
//!
//! ```text
//! # sizes
//! size = 400
//! window = 20:200
//! ```
//!
//! Unknown keys are rejected so that typos fail before any computation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::operators::FitWindow;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// Matrix size for spectra and Berezin identity checks.
    pub size: usize,
    /// Series length for Möbius and Blaschke symbols.
    pub series_length: usize,
    /// Series length for singular inner symbols.
    pub singular_length: usize,
    /// Matrix size for the boundary Berezin (compactness) check.
    pub berezin_size: usize,
    pub berezin_radius: f64,
    pub berezin_points: usize,
    pub berezin_max_radius: f64,
    pub berezin_tol: f64,
    pub directions: usize,
    pub compact_below: f64,
    pub noncompact_above: f64,
    pub window: FitWindow,
    pub decay_target: f64,
    pub decay_tol: f64,
    pub cnp_points: usize,
    pub cnp_trials: usize,
    pub seed: u64,
    pub cnp_tol: f64,
    pub fail_threshold: f64,
    pub rescaling_points: usize,
    pub rescaling_radius: f64,
    pub rescaling_tol: f64,
    pub hardy_tol: f64,
    pub lemma11_radii: Vec<f64>,
    pub lemma11_rel_tol: f64,
    pub singular_ratio_radius: f64,
    pub singular_ratio_min: f64,
    pub inclusion_gap: f64,
    pub inclusion_size: usize,
    pub inclusion_from: usize,
    pub admissibility_grid: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            size: 400,
            series_length: 200,
            singular_length: 600,
            berezin_size: 600,
            berezin_radius: 0.995,
            berezin_points: 20,
            berezin_max_radius: 0.8,
            berezin_tol: 1e-6,
            directions: 16,
            compact_below: 0.1,
            noncompact_above: 0.9,
            window: FitWindow { start: 20, end: 200 },
            decay_target: -1.0,
            decay_tol: 0.15,
            cnp_points: 30,
            cnp_trials: 20,
            seed: 7,
            cnp_tol: 1e-9,
            fail_threshold: 1e-6,
            rescaling_points: 10,
            rescaling_radius: 0.9,
            rescaling_tol: 1e-8,
            hardy_tol: 1e-12,
            lemma11_radii: vec![0.5, 0.9, 0.99, 0.999],
            lemma11_rel_tol: 0.02,
            singular_ratio_radius: 0.99,
            singular_ratio_min: 50.0,
            inclusion_gap: 1.0,
            inclusion_size: 256,
            inclusion_from: 32,
            admissibility_grid: 64,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

impl Config {
    pub const KEYS: [&'static str; 31] = [
        "size",
        "series_length",
        "singular_length",
        "berezin_size",
        "berezin_radius",
        "berezin_points",
        "berezin_max_radius",
        "berezin_tol",
        "directions",
        "compact_below",
        "noncompact_above",
        "window",
        "decay_target",
        "decay_tol",
        "cnp_points",
        "cnp_trials",
        "seed",
        "cnp_tol",
        "fail_threshold",
        "rescaling_points",
        "rescaling_radius",
        "rescaling_tol",
        "hardy_tol",
        "lemma11_radii",
        "lemma11_rel_tol",
        "singular_ratio_radius",
        "singular_ratio_min",
        "inclusion_gap",
        "inclusion_size",
        "inclusion_from",
        "admissibility_grid",
    ];

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "size" => self.size = parse_num(key, v)?,
            "series_length" => self.series_length = parse_num(key, v)?,
            "singular_length" => self.singular_length = parse_num(key, v)?,
            "berezin_size" => self.berezin_size = parse_num(key, v)?,
            "berezin_radius" => self.berezin_radius = parse_num(key, v)?,
            "berezin_points" => self.berezin_points = parse_num(key, v)?,
            "berezin_max_radius" => self.berezin_max_radius = parse_num(key, v)?,
            "berezin_tol" => self.berezin_tol = parse_num(key, v)?,
            "directions" => self.directions = parse_num(key, v)?,
            "compact_below" => self.compact_below = parse_num(key, v)?,
            "noncompact_above" => self.noncompact_above = parse_num(key, v)?,
            "window" => {
                self.window = v
                    .parse()
                    .map_err(|e| Error::Config(format!("invalid window '{v}': {e}")))?
            }
            "decay_target" => self.decay_target = parse_num(key, v)?,
            "decay_tol" => self.decay_tol = parse_num(key, v)?,
            "cnp_points" => self.cnp_points = parse_num(key, v)?,
            "cnp_trials" => self.cnp_trials = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "cnp_tol" => self.cnp_tol = parse_num(key, v)?,
            "fail_threshold" => self.fail_threshold = parse_num(key, v)?,
            "rescaling_points" => self.rescaling_points = parse_num(key, v)?,
            "rescaling_radius" => self.rescaling_radius = parse_num(key, v)?,
            "rescaling_tol" => self.rescaling_tol = parse_num(key, v)?,
            "hardy_tol" => self.hardy_tol = parse_num(key, v)?,
            "lemma11_radii" => {
                self.lemma11_radii = v
                    .split(',')
                    .map(|t| parse_num(key, t.trim()))
                    .collect::<Result<Vec<f64>>>()?
            }
            "lemma11_rel_tol" => self.lemma11_rel_tol = parse_num(key, v)?,
            "singular_ratio_radius" => self.singular_ratio_radius = parse_num(key, v)?,
            "singular_ratio_min" => self.singular_ratio_min = parse_num(key, v)?,
            "inclusion_gap" => self.inclusion_gap = parse_num(key, v)?,
            "inclusion_size" => self.inclusion_size = parse_num(key, v)?,
            "inclusion_from" => self.inclusion_from = parse_num(key, v)?,
            "admissibility_grid" => self.admissibility_grid = parse_num(key, v)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines over the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value', found '{line}'", lineno + 1))
            })?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io("read", path, e))?;
        Self::parse(&text)
    }

    /// Rejects combinations no check could run with.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.size < 8 || self.berezin_size < 8 {
            return bad("matrix sizes must be at least 8".into());
        }
        if self.window.end > self.size * 3 / 4 {
            return bad(format!(
                "window {} reaches past 3/4 of size {}",
                self.window, self.size
            ));
        }
        if self.series_length == 0 || self.singular_length == 0 {
            return bad("series lengths must be positive".into());
        }
        for (name, r) in [
            ("berezin_radius", self.berezin_radius),
            ("berezin_max_radius", self.berezin_max_radius),
            ("rescaling_radius", self.rescaling_radius),
            ("singular_ratio_radius", self.singular_ratio_radius),
        ] {
            if !(0.0..1.0).contains(&r) {
                return bad(format!("{name} = {r} must lie in [0, 1)"));
            }
        }
        if self.lemma11_radii.is_empty() || self.lemma11_radii.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return bad("lemma11_radii must be a nonempty list in (0, 1)".into());
        }
        if self.cnp_points < 3 || self.cnp_trials == 0 {
            return bad("cnp_points must be >= 3 and cnp_trials >= 1".into());
        }
        if !(self.cnp_tol > 0.0) || !(self.fail_threshold > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.directions == 0 || self.berezin_points == 0 || self.rescaling_points < 2 {
            return bad("directions and berezin_points must be positive, rescaling_points >= 2".into());
        }
        if !(self.inclusion_gap > 0.0) || self.inclusion_from >= self.inclusion_size {
            return bad("inclusion_gap must be positive and inclusion_from < inclusion_size".into());
        }
        if self.admissibility_grid < 16 {
            return bad("admissibility_grid must be at least 16".into());
        }
        Ok(())
    }

    /// Serialized `key -> value` form embedded into reports.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("size", self.size.to_string());
        put("series_length", self.series_length.to_string());
        put("singular_length", self.singular_length.to_string());
        put("berezin_size", self.berezin_size.to_string());
        put("berezin_radius", self.berezin_radius.to_string());
        put("berezin_points", self.berezin_points.to_string());
        put("berezin_max_radius", self.berezin_max_radius.to_string());
        put("berezin_tol", self.berezin_tol.to_string());
        put("directions", self.directions.to_string());
        put("compact_below", self.compact_below.to_string());
        put("noncompact_above", self.noncompact_above.to_string());
        put("window", self.window.to_string());
        put("decay_target", self.decay_target.to_string());
        put("decay_tol", self.decay_tol.to_string());
        put("cnp_points", self.cnp_points.to_string());
        put("cnp_trials", self.cnp_trials.to_string());
        put("seed", self.seed.to_string());
        put("cnp_tol", self.cnp_tol.to_string());
        put("fail_threshold", self.fail_threshold.to_string());
        put("rescaling_points", self.rescaling_points.to_string());
        put("rescaling_radius", self.rescaling_radius.to_string());
        put("rescaling_tol", self.rescaling_tol.to_string());
        put("hardy_tol", self.hardy_tol.to_string());
        put(
            "lemma11_radii",
            self.lemma11_radii.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
        );
        put("lemma11_rel_tol", self.lemma11_rel_tol.to_string());
        put("singular_ratio_radius", self.singular_ratio_radius.to_string());
        put("singular_ratio_min", self.singular_ratio_min.to_string());
        put("inclusion_gap", self.inclusion_gap.to_string());
        put("inclusion_size", self.inclusion_size.to_string());
        put("inclusion_from", self.inclusion_from.to_string());
        put("admissibility_grid", self.admissibility_grid.to_string());
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let cfg = Config::parse("# small run\nsize = 200 # inline\n\nwindow = 10:100\nlemma11_radii = 0.5, 0.9\n")
            .unwrap();
        assert_eq!(cfg.size, 200);
        assert_eq!(cfg.window, FitWindow { start: 10, end: 100 });
        assert_eq!(cfg.lemma11_radii, vec![0.5, 0.9]);
        assert_eq!(cfg.seed, 7);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Config::parse("sise = 3"), Err(Error::Config(_))));
        assert!(matches!(Config::parse("size 3"), Err(Error::Config(_))));
        assert!(matches!(Config::parse("size = many"), Err(Error::Config(_))));
        let cfg = Config::parse("size = 100").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn map_round_trips() {
        let cfg = Config {
            seed: 11,
            lemma11_radii: vec![0.25, 0.75],
            ..Config::default()
        };
        let mut back = Config::default();
        for (k, v) in cfg.to_map() {
            back.set(&k, &v).unwrap();
        }
        assert_eq!(back, cfg);
        assert!(Config::default().to_map().keys().all(|k| Config::KEYS.contains(&k.as_str())));
    }
}
