//! `key = value` configuration files and sweep settings.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered key-value pairs. Later sources override earlier ones via [`KeyValues::merge`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KeyValues(pub BTreeMap<String, String>);

impl KeyValues {
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parameter(format!("config line {} has no '=': {line:?}", n + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parameter(format!("config line {} has an empty key", n + 1)));
            }
            map.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn merge(&mut self, other: &KeyValues) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parameter(format!("cannot parse config value {key} = {v:?}"))),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

/// Parses `0.25,0.125`, `2^-2,2^-3` or the range form `2^-2..2^-6`.
pub fn parse_h_list(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let (ea, eb) = (dyadic_exponent(a)?, dyadic_exponent(b)?);
        if ea > eb {
            return Err(Error::Parameter(format!("empty dyadic range {s:?}")));
        }
        return Ok(dyadic(ea, eb));
    }
    s.split(',').map(|item| parse_h(item.trim())).collect()
}

fn parse_h(item: &str) -> Result<f64> {
    let v = if item.starts_with("2^") {
        2f64.powi(-dyadic_exponent(item)?)
    } else {
        item.parse().map_err(|_| Error::Parameter(format!("cannot parse h value {item:?}")))?
    };
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Parameter(format!("h must be positive, got {item:?}")));
    }
    Ok(v)
}

/// `e` in `2^-e`.
fn dyadic_exponent(item: &str) -> Result<i32> {
    item.trim()
        .strip_prefix("2^")
        .and_then(|e| e.parse::<i32>().ok())
        .map(|e| -e)
        .ok_or_else(|| Error::Parameter(format!("expected 2^-e, got {item:?}")))
}

/// `[2^-from, …, 2^-to]`.
pub fn dyadic(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|e| 2f64.powi(-e)).collect()
}

/// Settings shared by the sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Fine points per lattice step, `M`.
    pub fine_factor: usize,
    /// Data are sampled on `hℤⁿ ∩ [−box_radius, box_radius]ⁿ`.
    pub box_radius: f64,
    /// Extra zero lattice points added on each side of the data box.
    pub padding: usize,
    /// Number of finest levels used by the order fit.
    pub fit_levels: usize,
    /// Torus size (lattice points) for stability trials.
    pub stability_points: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { fine_factor: 8, box_radius: 12.0, padding: 0, fit_levels: 4, stability_points: 255, seed: 0 }
    }
}

impl SweepConfig {
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let d = Self::default();
        let cfg = Self {
            fine_factor: kv.get("fine_factor")?.unwrap_or(d.fine_factor),
            box_radius: kv.get("box_radius")?.unwrap_or(d.box_radius),
            padding: kv.get("padding")?.unwrap_or(d.padding),
            fit_levels: kv.get("fit_levels")?.unwrap_or(d.fit_levels),
            stability_points: kv.get("stability_points")?.unwrap_or(d.stability_points),
            seed: kv.get("seed")?.unwrap_or(d.seed),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fine_factor < 2 {
            return Err(Error::Parameter(format!("fine_factor must be at least 2, got {}", self.fine_factor)));
        }
        if !(self.box_radius > 0.0 && self.box_radius.is_finite()) {
            return Err(Error::Parameter(format!("box_radius must be positive, got {}", self.box_radius)));
        }
        if self.fit_levels < 3 {
            return Err(Error::Parameter(format!("fit_levels must be at least 3, got {}", self.fit_levels)));
        }
        if self.stability_points < 16 {
            return Err(Error::Parameter(format!("stability_points must be at least 16, got {}", self.stability_points)));
        }
        Ok(())
    }

    /// Every setting as text, enough to re-run a sweep.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut kv = KeyValues::default();
        kv.set("fine_factor", self.fine_factor);
        kv.set("box_radius", self.box_radius);
        kv.set("padding", self.padding);
        kv.set("fit_levels", self.fit_levels);
        kv.set("stability_points", self.stability_points);
        kv.set("seed", self.seed);
        kv.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_files_and_overrides() {
        let mut kv = KeyValues::parse("# sweep\nfine_factor = 4\n\nbox_radius=6.5\n").unwrap();
        let cli = KeyValues::parse("fine_factor = 16").unwrap();
        kv.merge(&cli);
        let cfg = SweepConfig::from_key_values(&kv).unwrap();
        assert_eq!(cfg.fine_factor, 16);
        assert_eq!(cfg.box_radius, 6.5);
        assert_eq!(cfg.padding, 0);
        assert!(KeyValues::parse("no equals sign").is_err());
        assert!(SweepConfig::from_key_values(&KeyValues::parse("fine_factor = x").unwrap()).is_err());
        let echoed = KeyValues(cfg.echo());
        assert_eq!(SweepConfig::from_key_values(&echoed).unwrap(), cfg);
    }

    #[test]
    fn h_lists() {
        assert_eq!(parse_h_list("2^-2..2^-4").unwrap(), vec![0.25, 0.125, 0.0625]);
        assert_eq!(parse_h_list("0.5, 2^-2").unwrap(), vec![0.5, 0.25]);
        assert!(parse_h_list("0.5,-1").is_err());
        assert!(parse_h_list("2^-4..2^-2").is_err());
    }
}
