//! Run configuration: flat `section.key = value` text (TOML dotted keys).
//!
//! Required keys are `model.h`, `model.alpha`, `model.beta`, `model.delta`,
//! `model.n_cells`, `sim.dt`, `sim.t_final` and `init.kind` plus the fields
//! of the chosen initial data kind. Defaults of the optional keys:
//!
//! | key | default |
//! |-----|---------|
//! | `model.truncation` | `"leaky"` |
//! | `sim.record_every` | `1` |
//! | `sim.snapshot_times` | `[]` |
//! | `sim.method` | `"euler"` |
//! | `sim.clamp_negatives`, `sim.parallel` | `false` |
//! | `init.sampling` | `"pointwise"` |
//! | `diagnostics.ml` | `[]` (list of `{ a, lambda }`) |
//! | `diagnostics.moment_orders` | `[2.0, 3.0, 4.0]` |
//! | `output.dir` | `"out"` |
//! | `output.*_stem` | `timeseries`, `snapshot`, `report`, `bounds`, `manifest` |
//! | `verify.*` | see [`VerifySettings`] |

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrator::{MlPair, SimConfig};
use crate::model::ModelParams;
use crate::state::InitialDataSpec;
use crate::verify::VerifySettings;

pub const REQUIRED_KEYS: [&str; 8] = [
    "model.h",
    "model.alpha",
    "model.beta",
    "model.delta",
    "model.n_cells",
    "sim.dt",
    "sim.t_final",
    "init.kind",
];

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 2] = ["test1", "test2"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("unknown preset `{0}` (expected one of test1, test2)")]
    UnknownPreset(String),
}

fn invalid(key: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

fn default_moment_orders() -> Vec<f64> {
    vec![2.0, 3.0, 4.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Mittag-Leffler moments recorded in the time series.
    pub ml: Vec<MlPair>,
    /// Orders `k` for the bound set and the moment monitors.
    pub moment_orders: Vec<f64>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            ml: Vec::new(),
            moment_orders: default_moment_orders(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub timeseries_stem: String,
    pub snapshot_stem: String,
    pub report_stem: String,
    pub bounds_stem: String,
    pub manifest_stem: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            timeseries_stem: "timeseries".into(),
            snapshot_stem: "snapshot".into(),
            report_stem: "report".into(),
            bounds_stem: "bounds".into(),
            manifest_stem: "manifest".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub sim: SimConfig,
    pub init: InitialDataSpec,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: VerifySettings,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// The `key` part of the line containing `offset`.
fn key_at(text: &str, offset: usize) -> Option<String> {
    let start = text[..offset.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next()?;
    let key = line.split('=').next()?.trim();
    (!key.is_empty() && !key.starts_with('[')).then(|| key.to_string())
}

fn lookup<'a>(table: &'a toml::Table, dotted: &str) -> Option<&'a toml::Value> {
    let mut parts = dotted.split('.');
    let mut current = table.get(parts.next()?)?;
    for part in parts {
        current = current.as_table()?.get(part)?;
    }
    Some(current)
}

/// Parses and fully validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let missing: Vec<String> = REQUIRED_KEYS
        .iter()
        .filter(|k| lookup(&table, k).is_none())
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError::MissingKeys(missing));
    }
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let offset = e.span().map(|s| s.start);
        let key = offset
            .and_then(|o| key_at(text, o))
            .unwrap_or_else(|| "<config>".to_string());
        let line = offset.map_or(String::new(), |o| format!("line {}: ", line_of(text, o)));
        invalid(key, format!("{line}{}", e.message()))
    })?;
    validate_config(&cfg)?;
    Ok(cfg)
}

/// Semantic checks; every error names the offending key.
pub fn validate_config(cfg: &RunConfig) -> Result<(), ConfigError> {
    cfg.model
        .validate()
        .map_err(|v| invalid(v.key(), v.to_string()))?;
    if let Err(e) = cfg.sim.validate() {
        let message = e.to_string();
        let key = message
            .split(['=', ':', ' '])
            .find(|s| s.starts_with("sim."))
            .unwrap_or("sim")
            .to_string();
        return Err(invalid(key, message));
    }
    let n = cfg.model.n_cells;
    match &cfg.init {
        InitialDataSpec::CosineBump { half_period, .. } => {
            if !(*half_period > 0.0) {
                return Err(invalid("init.half_period", format!("{half_period} must be > 0")));
            }
        }
        InitialDataSpec::Indicator { a, b, .. } => {
            if !(a <= b) {
                return Err(invalid("init.b", format!("interval [{a}, {b}] is empty")));
            }
        }
        InitialDataSpec::PointMasses { masses } => {
            if let Some((i, v)) = masses.iter().find(|(i, v)| *i == 0 || *i > n || !(*v >= 0.0)) {
                return Err(invalid(
                    "init.masses",
                    format!("entry ({i}, {v}) needs 1 <= index <= {n} and value >= 0"),
                ));
            }
        }
        InitialDataSpec::File { .. } => {}
    }
    if let Some(pair) = cfg.diagnostics.ml.iter().find(|p| !(p.a >= 1.0) || !(p.lambda > 0.0)) {
        return Err(invalid(
            "diagnostics.ml",
            format!("pair a = {}, lambda = {} needs a >= 1 and lambda > 0", pair.a, pair.lambda),
        ));
    }
    if let Some(k) = cfg.diagnostics.moment_orders.iter().find(|&&k| !(k > 1.0)) {
        return Err(invalid("diagnostics.moment_orders", format!("order {k} must be > 1")));
    }
    let v = &cfg.verify;
    if !(v.c_tol >= 0.0) {
        return Err(invalid("verify.c_tol", format!("{} must be >= 0", v.c_tol)));
    }
    if !(v.horizon > 0.0) {
        return Err(invalid("verify.horizon", format!("{} must be > 0", v.horizon)));
    }
    if !(v.ml_safety > 0.0 && v.ml_safety < 1.0) {
        return Err(invalid("verify.ml_safety", format!("{} must lie in (0, 1)", v.ml_safety)));
    }
    if !(v.ml_order >= 1.0) {
        return Err(invalid("verify.ml_order", format!("{} must be >= 1", v.ml_order)));
    }
    if let Some(p) = v.creation_probes.iter().find(|&&t| !(t > 0.0 && t <= v.horizon)) {
        return Err(invalid(
            "verify.creation_probes",
            format!("probe {p} must lie in (0, verify.horizon = {}]", v.horizon),
        ));
    }
    if v.exp_lambda_grid.iter().any(|&l| !(l > 0.0)) {
        return Err(invalid("verify.exp_lambda_grid", "every lambda must be > 0"));
    }
    if v.order_dts.iter().any(|&d| !(d > 0.0)) {
        return Err(invalid("verify.order_dts", "step sizes must be > 0"));
    }
    Ok(())
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut Vec<String>) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        other => out.push(format!("{prefix} = {other}")),
    }
}

/// Renders a configuration in the flat dotted-key form read by [`parse_config`].
pub fn to_flat_text(cfg: &RunConfig) -> String {
    let value = toml::Value::try_from(cfg).expect("configuration serializes to TOML");
    let mut lines = Vec::new();
    flatten("", &value, &mut lines);
    let mut out = String::new();
    let mut section = "";
    for line in &lines {
        let head = line.split('.').next().unwrap_or("");
        if !section.is_empty() && head != section {
            out.push('\n');
        }
        section = head;
        out.push_str(line);
        out.push('\n');
    }
    out
}

/// Bundled configuration text of a preset.
pub fn preset_text(name: &str) -> Result<&'static str, ConfigError> {
    match name {
        "test1" => Ok(include_str!("../presets/test1.toml")),
        "test2" => Ok(include_str!("../presets/test2.toml")),
        other => Err(ConfigError::UnknownPreset(other.to_string())),
    }
}

pub fn preset(name: &str) -> Result<RunConfig, ConfigError> {
    parse_config(preset_text(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TruncationMode;
    use crate::state::Sampling;

    #[test]
    fn test1_preset_values() {
        let cfg = preset("test1").unwrap();
        assert_eq!(cfg.model.h, 0.1);
        assert_eq!(cfg.model.n_cells, 500);
        assert_eq!(cfg.model.alpha, [0.1; 3]);
        assert_eq!(cfg.model.beta, [0.1; 3]);
        assert_eq!(cfg.model.delta, 0.4);
        assert_eq!(cfg.model.truncation, TruncationMode::Leaky);
        assert_eq!(cfg.sim.dt, 0.001);
        assert_eq!(
            cfg.init,
            InitialDataSpec::CosineBump {
                half_period: 5.0,
                sampling: Sampling::Pointwise
            }
        );
        assert_eq!(cfg.diagnostics.ml.len(), 2);
        assert_eq!(cfg.model, ModelParams::reference());
    }

    #[test]
    fn test2_preset_is_indicator() {
        let cfg = preset("test2").unwrap();
        assert!(matches!(cfg.init, InitialDataSpec::Indicator { a, b, .. } if a == 3.0 && b == 5.0));
        assert!(matches!(preset("test3"), Err(ConfigError::UnknownPreset(_))));
    }

    #[test]
    fn empty_file_lists_required_keys() {
        match parse_config("") {
            Err(ConfigError::MissingKeys(keys)) => assert_eq!(keys, REQUIRED_KEYS.to_vec()),
            other => panic!("{other:?}"),
        }
        let partial = "model.h = 0.1\nsim.dt = 0.01\n";
        match parse_config(partial) {
            Err(ConfigError::MissingKeys(keys)) => {
                assert!(!keys.contains(&"model.h".to_string()));
                assert!(keys.contains(&"init.kind".to_string()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = "model.h = 0.1\nmodel.delta = = 3\n";
        match parse_config(text) {
            Err(ConfigError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    fn with_line(replace: &str, by: &str) -> String {
        let text = preset_text("test1").unwrap();
        assert!(text.contains(replace));
        text.replace(replace, by)
    }

    #[test]
    fn small_delta_names_the_key() {
        let err = parse_config(&with_line("model.delta = 0.4", "model.delta = 0.1")).unwrap_err();
        match err {
            ConfigError::Invalid { key, .. } => assert_eq!(key, "model.delta"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(&with_line("model.h = 0.1", "model.h = 0.1\nmodel.hh = 2")).unwrap_err();
        match err {
            ConfigError::Invalid { key, message } => {
                assert_eq!(key, "model.hh", "{message}");
                assert!(message.contains("hh"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_keys() {
        let cases = [
            ("sim.dt = 0.001", "sim.dt = -1.0", "sim.dt"),
            ("sim.snapshot_times = [0.0, 1.0, 10.0]", "sim.snapshot_times = [11.0]", "sim.snapshot_times"),
            ("init.half_period = 5.0", "init.half_period = 0.0", "init.half_period"),
            (
                "diagnostics.ml = [{ a = 1.0, lambda = 0.1 }, { a = 1.0, lambda = 1.0 }]",
                "diagnostics.ml = [{ a = 0.5, lambda = 0.1 }]",
                "diagnostics.ml",
            ),
            ("model.n_cells = 500", "model.n_cells = 1", "model.n_cells"),
        ];
        for (from, to, key) in cases {
            match parse_config(&with_line(from, to)) {
                Err(ConfigError::Invalid { key: k, .. }) => assert_eq!(k, key),
                other => panic!("{to}: {other:?}"),
            }
        }
    }

    #[test]
    fn round_trip_is_lossless() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            let text = to_flat_text(&cfg);
            assert!(text.lines().all(|l| l.is_empty() || (l.contains(" = ") && !l.starts_with('['))));
            let back = parse_config(&text).unwrap();
            assert_eq!(back, cfg, "{text}");
        }
        let mut cfg = preset("test1").unwrap();
        cfg.init = InitialDataSpec::PointMasses {
            masses: vec![(2, 1.0), (3, 0.5)],
        };
        cfg.verify.c_tol = 3.5;
        assert_eq!(parse_config(&to_flat_text(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn verify_section_is_optional_and_checked() {
        let cfg = parse_config(&with_line("output.dir", "verify.c_tol = 2.0\noutput.dir")).unwrap();
        assert_eq!(cfg.verify.c_tol, 2.0);
        let err = parse_config(&with_line("output.dir", "verify.horizon = 0.0\noutput.dir")).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref key, .. } if key == "verify.horizon"), "{err:?}");
    }
}
