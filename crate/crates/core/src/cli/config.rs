//! Flat `key = value` configuration files and flag overrides.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::error::SimError;
use crate::scenario::{BaselineMode, ScenarioConfig};
use crate::simulator::MonteCarloConfig;

/// Every key accepted in a configuration file.
pub const CONFIG_KEYS: &[&str] = &[
    "f_ghz",
    "p_t_dbm",
    "theta_etilt_deg",
    "pl_irs_db",
    "pl_wall_db",
    "h_bs_m",
    "h_uav_m",
    "h_irs_m",
    "irs_rows",
    "irs_cols",
    "k",
    "l_m",
    "n_rays",
    "n_runs",
    "master_seed",
    "baseline_mode",
    "element_pitch_m",
    "uav_x_m",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{}unknown configuration key `{key}`", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    UnknownKey { key: String, line: Option<usize> },

    #[error("invalid value for `{key}`: {msg}")]
    Validation { key: String, msg: String },
}

impl From<SimError> for ConfigError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidParameter { name, reason } => ConfigError::Validation {
                key: name.to_string(),
                msg: reason,
            },
            other => ConfigError::Validation {
                key: "config".to_string(),
                msg: other.to_string(),
            },
        }
    }
}

/// Where a value came from; later layers win.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Layer {
    File,
    Flag,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    layer: Layer,
    line: Option<usize>,
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// a `#` after a value starts a trailing comment.
pub fn parse_key_values(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            msg: format!("expected `key = value`, found `{body}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Parse {
                line,
                msg: "missing key before `=`".into(),
            });
        }
        if v.is_empty() {
            return Err(ConfigError::Parse {
                line,
                msg: format!("missing value for `{k}`"),
            });
        }
        out.push((line, k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Builds the scenario and Monte Carlo settings from a configuration file
/// body and flag overrides (`(key, value)` pairs). Omitted keys keep their
/// defaults.
///
/// `k` alone maps to `rows = floor(sqrt k)`, `cols = ceil(k / rows)` and is
/// rejected unless `rows * cols == k`.
pub fn parse_config(
    file_text: &str,
    flag_overrides: &[(String, String)],
) -> Result<(ScenarioConfig, MonteCarloConfig), ConfigError> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (line, key, value) in parse_key_values(file_text)? {
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey {
                key,
                line: Some(line),
            });
        }
        if entries.contains_key(&key) {
            return Err(ConfigError::Parse {
                line,
                msg: format!("duplicate key `{key}`"),
            });
        }
        entries.insert(
            key,
            Entry {
                value,
                layer: Layer::File,
                line: Some(line),
            },
        );
    }
    for (key, value) in flag_overrides {
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey {
                key: key.clone(),
                line: None,
            });
        }
        entries.insert(
            key.clone(),
            Entry {
                value: value.clone(),
                layer: Layer::Flag,
                line: None,
            },
        );
    }
    resolve(&entries)
}

fn parse_value<T: std::str::FromStr>(key: &str, e: &Entry) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    e.value.parse::<T>().map_err(|err| match e.line {
        Some(line) => ConfigError::Parse {
            line,
            msg: format!("bad value `{}` for `{key}`: {err}", e.value),
        },
        None => ConfigError::Validation {
            key: key.to_string(),
            msg: format!("bad value `{}`: {err}", e.value),
        },
    })
}

fn resolve(entries: &BTreeMap<String, Entry>) -> Result<(ScenarioConfig, MonteCarloConfig), ConfigError> {
    let mut cfg = ScenarioConfig::default();
    let mut mc = MonteCarloConfig::default();

    macro_rules! set {
        ($key:literal, $field:expr) => {
            if let Some(e) = entries.get($key) {
                $field = parse_value($key, e)?;
            }
        };
    }
    set!("f_ghz", cfg.f_ghz);
    set!("p_t_dbm", cfg.p_t_dbm);
    set!("theta_etilt_deg", cfg.theta_etilt_deg);
    set!("pl_irs_db", cfg.pl_irs_db);
    set!("pl_wall_db", cfg.pl_wall_db);
    set!("h_bs_m", cfg.h_bs_m);
    set!("h_uav_m", cfg.h_uav_m);
    set!("h_irs_m", cfg.h_irs_m);
    set!("l_m", cfg.l_m);
    set!("element_pitch_m", cfg.element_pitch_m);
    set!("n_rays", mc.n_rays);
    set!("n_runs", mc.n_runs);
    set!("master_seed", mc.master_seed);
    if let Some(e) = entries.get("baseline_mode") {
        cfg.baseline_mode = parse_value::<BaselineMode>("baseline_mode", e)?;
    }
    if let Some(e) = entries.get("uav_x_m") {
        cfg.uav_x_m = Some(parse_value("uav_x_m", e)?);
    }
    resolve_lattice(entries, &mut cfg)?;

    if mc.n_runs == 0 {
        return Err(ConfigError::Validation {
            key: "n_runs".into(),
            msg: "must be >= 1".into(),
        });
    }
    cfg.validate()?;
    Ok((cfg, mc))
}

fn resolve_lattice(entries: &BTreeMap<String, Entry>, cfg: &mut ScenarioConfig) -> Result<(), ConfigError> {
    let rows = entries.get("irs_rows");
    let cols = entries.get("irs_cols");
    let k = entries.get("k");
    let bad = |key: &str, msg: String| ConfigError::Validation {
        key: key.to_string(),
        msg,
    };

    let rows_v: Option<usize> = rows.map(|e| parse_value("irs_rows", e)).transpose()?;
    let cols_v: Option<usize> = cols.map(|e| parse_value("irs_cols", e)).transpose()?;
    let k_v: Option<usize> = k.map(|e| parse_value("k", e)).transpose()?;

    // a flag-level k replaces a file-level grid
    let grid_layer = rows.iter().chain(cols.iter()).map(|e| e.layer).max();
    let k_wins = match (k, grid_layer) {
        (Some(ke), Some(gl)) => ke.layer > gl,
        (Some(_), None) => true,
        _ => false,
    };

    if let (Some(kv), true) = (k_v, k_wins) {
        if kv == 0 {
            return Err(bad("k", "must be >= 1".into()));
        }
        let r = (kv as f64).sqrt().floor() as usize;
        let c = kv.div_ceil(r);
        if r * c != kv {
            return Err(bad(
                "k",
                format!("{kv} has no floor(sqrt)/ceil grid ({r} x {c} = {}); set irs_rows and irs_cols", r * c),
            ));
        }
        cfg.irs_rows = r;
        cfg.irs_cols = c;
        return Ok(());
    }

    match (rows_v, cols_v, k_v) {
        (Some(r), Some(c), _) => {
            cfg.irs_rows = r;
            cfg.irs_cols = c;
        }
        (Some(r), None, Some(kv)) | (None, Some(r), Some(kv)) if r > 0 && kv % r == 0 => {
            let other = kv / r;
            if rows_v.is_some() {
                cfg.irs_rows = r;
                cfg.irs_cols = other;
            } else {
                cfg.irs_rows = other;
                cfg.irs_cols = r;
            }
        }
        (Some(r), None, None) => cfg.irs_rows = r,
        (None, Some(c), None) => cfg.irs_cols = c,
        (None, None, _) => {}
        _ => {
            return Err(bad("k", "does not factor over the given irs_rows / irs_cols".into()));
        }
    }
    if cfg.irs_rows == 0 {
        return Err(bad("irs_rows", "must be >= 1".into()));
    }
    if cfg.irs_cols == 0 {
        return Err(bad("irs_cols", "must be >= 1".into()));
    }
    if let Some(kv) = k_v {
        if kv != cfg.k() {
            return Err(bad(
                "k",
                format!("{kv} != irs_rows * irs_cols = {} x {}", cfg.irs_rows, cfg.irs_cols),
            ));
        }
    }
    Ok(())
}

/// Renders a resolved configuration as a config file that parses back to
/// the same values.
pub fn render_config(cfg: &ScenarioConfig, mc: &MonteCarloConfig) -> String {
    config_map(cfg, mc)
        .into_iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

/// Resolved configuration as `(key, value)` pairs in [`CONFIG_KEYS`] order.
pub fn config_map(cfg: &ScenarioConfig, mc: &MonteCarloConfig) -> Vec<(String, String)> {
    let mut out = vec![
        ("f_ghz", cfg.f_ghz.to_string()),
        ("p_t_dbm", cfg.p_t_dbm.to_string()),
        ("theta_etilt_deg", cfg.theta_etilt_deg.to_string()),
        ("pl_irs_db", cfg.pl_irs_db.to_string()),
        ("pl_wall_db", cfg.pl_wall_db.to_string()),
        ("h_bs_m", cfg.h_bs_m.to_string()),
        ("h_uav_m", cfg.h_uav_m.to_string()),
        ("h_irs_m", cfg.h_irs_m.to_string()),
        ("irs_rows", cfg.irs_rows.to_string()),
        ("irs_cols", cfg.irs_cols.to_string()),
        ("l_m", cfg.l_m.to_string()),
        ("n_rays", mc.n_rays.to_string()),
        ("n_runs", mc.n_runs.to_string()),
        ("master_seed", mc.master_seed.to_string()),
        ("baseline_mode", cfg.baseline_mode.to_string()),
        ("element_pitch_m", cfg.element_pitch_m.to_string()),
    ];
    if let Some(x) = cfg.uav_x_m {
        out.push(("uav_x_m", x.to_string()));
    }
    out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn empty_input_gives_defaults() {
        let (cfg, mc) = parse_config("", &[]).unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(mc, MonteCarloConfig::default());
    }

    #[test]
    fn flags_override_file() {
        let (cfg, _) = parse_config("h_uav_m = 50\n", &flags(&[("h_uav_m", "100")])).unwrap();
        assert_eq!(cfg.h_uav_m, 100.0);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# deployment\n\nl_m = 70   # further away\n  h_irs_m=5\n";
        let (cfg, _) = parse_config(text, &[]).unwrap();
        assert_eq!(cfg.l_m, 70.0);
        assert_eq!(cfg.h_irs_m, 5.0);
    }

    #[test]
    fn k_factorisation_rule() {
        let err = parse_config("k = 50\n", &[]).unwrap_err();
        assert!(matches!(&err, ConfigError::Validation { key, .. } if key == "k"), "{err}");
        let (cfg, _) = parse_config("k = 50\nirs_rows = 5\nirs_cols = 10\n", &[]).unwrap();
        assert_eq!((cfg.irs_rows, cfg.irs_cols), (5, 10));
        let (cfg, _) = parse_config("k = 50\nirs_rows = 5\n", &[]).unwrap();
        assert_eq!((cfg.irs_rows, cfg.irs_cols), (5, 10));
        let (cfg, _) = parse_config("k = 56\n", &[]).unwrap();
        assert_eq!((cfg.irs_rows, cfg.irs_cols), (7, 8));
        let (cfg, _) = parse_config("k = 64\n", &[]).unwrap();
        assert_eq!((cfg.irs_rows, cfg.irs_cols), (8, 8));
        assert!(parse_config("k = 40\nirs_rows = 5\nirs_cols = 10\n", &[]).is_err());
        assert!(parse_config("k = 0\n", &[]).is_err());
        assert!(parse_config("irs_rows = 0\n", &[]).is_err());
    }

    #[test]
    fn flag_k_replaces_file_grid() {
        let (cfg, _) = parse_config("irs_rows = 5\nirs_cols = 10\n", &flags(&[("k", "100")])).unwrap();
        assert_eq!((cfg.irs_rows, cfg.irs_cols), (10, 10));
    }

    #[test]
    fn errors_carry_line_numbers_and_keys() {
        let e = parse_config("l_m = 50\nbogus line\n", &[]).unwrap_err();
        assert_eq!(
            e,
            ConfigError::Parse {
                line: 2,
                msg: "expected `key = value`, found `bogus line`".into()
            }
        );
        let e = parse_config("\nh_uav_m = tall\n", &[]).unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: 2, .. }));
        let e = parse_config("wind_speed = 3\n", &[]).unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey { line: Some(1), .. }));
        let e = parse_config("", &flags(&[("wind", "3")])).unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey { line: None, .. }));
        let e = parse_config("l_m = 5\nl_m = 6\n", &[]).unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: 2, .. }));
    }

    #[test]
    fn range_validation_names_key() {
        let e = parse_config("", &flags(&[("h_uav_m", "0")])).unwrap_err();
        assert!(e.to_string().contains("h_uav"), "{e}");
        let e = parse_config("f_ghz = -2\n", &[]).unwrap_err();
        assert!(matches!(e, ConfigError::Validation { ref key, .. } if key == "f_ghz"));
        let e = parse_config("n_runs = 0\n", &[]).unwrap_err();
        assert!(matches!(e, ConfigError::Validation { ref key, .. } if key == "n_runs"));
        let e = parse_config("", &flags(&[("n_rays", "-1")])).unwrap_err();
        assert!(matches!(e, ConfigError::Validation { ref key, .. } if key == "n_rays"));
    }

    #[test]
    fn render_round_trips() {
        let cfg = ScenarioConfig {
            f_ghz: 4.2,
            h_uav_m: 33.3,
            irs_rows: 5,
            irs_cols: 10,
            uav_x_m: Some(12.5),
            baseline_mode: BaselineMode::Geometric,
            l_m: 0.1 + 0.2,
            ..Default::default()
        };
        let mc = MonteCarloConfig {
            n_runs: 123,
            n_rays: 7,
            master_seed: u64::MAX,
        };
        let text = render_config(&cfg, &mc);
        assert_eq!(parse_config(&text, &[]).unwrap(), (cfg, mc));
    }
}
