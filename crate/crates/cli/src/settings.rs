//! Line-oriented `key=value` settings with per-command defaults. Every
//! resolved value, default or not, ends up in the run manifest.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

pub type Group = &'static [(&'static str, &'static str)];

pub const INGEST: Group = &[
    ("cutoff_m", "500"),
    ("time_format", "float"),
    ("t_start", "auto"),
    ("t_end", "auto"),
];

pub const FIT: Group = &[
    ("max_clusters", "80"),
    ("iterations", "20000"),
    ("burn_in_fraction", "0.5"),
    ("thin", "10"),
    ("step_log_ws", "0.08"),
    ("step_log_wt", "0.08"),
    ("hyper_rate", "1"),
    ("seed", "1"),
    ("pixel_rows", "50"),
    ("pixel_cols", "50"),
    ("weight_mode", "renormalized"),
    ("ws_min", "100"),
    ("ws_max", "1000"),
    ("wt_max", "1"),
    ("init_ws", "300"),
    ("init_wt", "0.2"),
    ("init_bu", "1"),
];

/// Monte Carlo points of the kernel correction.
pub const KERNEL: Group = &[("mc_points", "1000"), ("mc_seed", "auto")];

pub const ENVELOPE: Group = &[
    ("simulations", "99"),
    ("seed", "1"),
    ("intensity", "homogeneous"),
    ("r_max", "auto"),
    ("r_steps", "20"),
    ("t_max", "0.5"),
    ("t_steps", "10"),
];

pub const PCF: Group = &[
    ("r_max", "auto"),
    ("r_steps", "50"),
    ("bandwidth", "auto"),
    ("boundary_correction", "true"),
];

pub const ASSESS: Group = &[
    ("sub_x", "200"),
    ("sub_y", "200"),
    ("sub_t", "10"),
    ("coarse_x", "5"),
    ("coarse_y", "5"),
    ("coarse_t", "10"),
    ("estimate", "point"),
];

pub const SIMULATE: Group = &[
    ("seed", "1"),
    ("events", "500"),
    ("clusters", "3"),
    ("centers", "auto"),
    ("w_s", "150"),
    ("w_t", "0.1"),
    ("time_mode", "truncated"),
];

pub const AMENITY: Group = &[("radius", "auto")];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Defaults of `groups`, then the config file, then `overrides`.
    pub fn resolve(
        groups: &[Group],
        file: Option<&Path>,
        overrides: &[(String, String)],
    ) -> CliResult<Self> {
        let mut s = Settings::default();
        for g in groups {
            for (k, v) in g.iter() {
                s.values.insert((*k).to_string(), (*v).to_string());
            }
        }
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
            for (n, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    CliError::Input(format!("{}:{}: expected key=value", path.display(), n + 1))
                })?;
                s.set(k.trim(), v.trim())?;
            }
        }
        for (k, v) in overrides {
            s.set(k, v)?;
        }
        Ok(s)
    }

    fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(CliError::Input(format!(
                "setting `{key}` does not apply to this command (known: {})",
                self.values.keys().cloned().collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("setting `{key}` not registered"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(key);
        v.parse()
            .map_err(|e| CliError::Input(format!("setting {key}={v}: {e}")))
    }

    /// `None` for the literal `auto`.
    pub fn get_auto<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if self.raw(key) == "auto" {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    pub fn map(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn from_map(values: BTreeMap<String, String>) -> Self {
        Settings { values }
    }
}

/// Parses a `key=value` command-line override.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got `{s}`"))
}
