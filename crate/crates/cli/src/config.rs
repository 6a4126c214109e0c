use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qarb_core::bounds::{MulticlassVariant, Prop1Variant};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Encode,
    Bounds,
    Table1,
    Attack,
    Defend,
    Risk,
    Concentration,
    AuditAll,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Encode => "encode",
            Command::Bounds => "bounds",
            Command::Table1 => "table1",
            Command::Attack => "attack",
            Command::Defend => "defend",
            Command::Risk => "risk",
            Command::Concentration => "concentration",
            Command::AuditAll => "audit-all",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackChoice {
    Substitution,
    InDistribution,
    #[default]
    Unconstrained,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorParams {
    /// Certified Lipschitz constant of the generator.
    pub scale: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self { scale: 2.0 }
    }
}

/// One experiment. Every field but `command` and `seed` has a per-command default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub d: Option<usize>,
    /// Latent dimension; defaults to `n`.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub eps_grid: Option<Vec<f64>>,
    /// JSON file holding a `LayeredCircuitSpec`; a toy classifier is trained when absent.
    #[serde(default)]
    pub classifier: Option<PathBuf>,
    #[serde(default)]
    pub generator: GeneratorParams,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Pixel CSV for `encode`; random pixels are drawn when absent.
    #[serde(default)]
    pub pixels: Option<PathBuf>,
    #[serde(default)]
    pub n_values: Option<Vec<usize>>,
    #[serde(default)]
    pub d_values: Option<Vec<usize>>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub gamma_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub mu_m: Option<f64>,
    /// Constant pixel modulus used by the scaling table.
    #[serde(default)]
    pub omega1: Option<f64>,
    /// Number of classes for the multiclass bound column of `bounds`.
    #[serde(default)]
    pub classes: Option<usize>,
    #[serde(default)]
    pub attack: AttackChoice,
    #[serde(default)]
    pub train_budget: Option<usize>,
    #[serde(default)]
    pub prop1_variant: Prop1Variant,
    #[serde(default)]
    pub multiclass_variant: MulticlassVariant,
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Sets `key` (dotted for nested objects) to `raw`, parsed as JSON when possible.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{spec}` is not of the form key=value")))?;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Usage(format!("override key `{key}` is malformed")));
    }
    let mut cur = doc;
    for p in &parts[..parts.len() - 1] {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::Usage(format!("override key `{key}` descends into a non-object")))?;
        cur = obj.entry(p.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = cur
        .as_object_mut()
        .ok_or_else(|| CliError::Usage(format!("override key `{key}` descends into a non-object")))?;
    obj.insert(parts[parts.len() - 1].to_string(), parse_value(raw));
    Ok(())
}

/// Builds a config from an optional JSON file, then command-line values.
/// Flags win over the file.
pub fn load_config(
    command: Command,
    path: Option<&Path>,
    seed: Option<u64>,
    out: Option<&Path>,
    overrides: &[String],
) -> Result<ExperimentConfig, CliError> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str::<Value>(&text)
                .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", p.display())))?
        }
        None => Value::Object(Default::default()),
    };
    if !doc.is_object() {
        return Err(CliError::Usage("config must be a JSON object".into()));
    }
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let obj = doc.as_object_mut().expect("checked above");
    obj.insert("command".into(), serde_json::to_value(command).expect("enum serializes"));
    if let Some(s) = seed {
        obj.insert("seed".into(), Value::from(s));
    }
    if let Some(o) = out {
        obj.insert("out".into(), Value::String(o.display().to_string()));
    }
    if !obj.contains_key("seed") {
        return Err(CliError::Usage("field `seed` is required (config file or --seed)".into()));
    }
    let cfg: ExperimentConfig =
        serde_json::from_value(doc).map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// A config with only the mandatory fields set.
    pub fn new(command: Command, seed: u64) -> Self {
        Self {
            command,
            seed,
            n: None,
            d: None,
            m: None,
            samples: None,
            eps_grid: None,
            classifier: None,
            generator: GeneratorParams::default(),
            out: None,
            pixels: None,
            n_values: None,
            d_values: None,
            eta: None,
            gamma: None,
            gamma_grid: None,
            mu_m: None,
            omega1: None,
            classes: None,
            attack: AttackChoice::default(),
            train_budget: None,
            prop1_variant: Prop1Variant::default(),
            multiclass_variant: MulticlassVariant::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: Option<usize>| match v {
            Some(0) => Err(CliError::Usage(format!("field `{name}` must be positive"))),
            _ => Ok(()),
        };
        positive("n", self.n)?;
        positive("m", self.m)?;
        positive("samples", self.samples)?;
        if matches!(self.classes, Some(k) if k < 5) {
            return Err(CliError::Usage("field `classes` must be at least 5".into()));
        }
        if matches!(self.d, Some(d) if d < 2) {
            return Err(CliError::Usage("field `d` must be at least 2".into()));
        }
        if let Some(g) = &self.eps_grid {
            if g.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
                return Err(CliError::Usage("field `eps_grid` must hold nonnegative numbers".into()));
            }
        }
        if !(self.generator.scale.is_finite() && self.generator.scale >= 0.0) {
            return Err(CliError::Usage("field `generator.scale` must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("qarb-out"))
    }

    pub fn n_or(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }

    pub fn d_or(&self, default: usize) -> usize {
        self.d.unwrap_or(default)
    }

    pub fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse_json_and_nest() {
        let mut v = serde_json::json!({"n": 2});
        apply_override(&mut v, "n=5").unwrap();
        apply_override(&mut v, "generator.scale=0.5").unwrap();
        apply_override(&mut v, "eps_grid=[0.1,0.2]").unwrap();
        assert_eq!(v["n"], 5);
        assert_eq!(v["generator"]["scale"], 0.5);
        assert_eq!(v["eps_grid"][1], 0.2);
        assert!(apply_override(&mut v, "novalue").is_err());
        assert!(apply_override(&mut v, "n.x=1").is_err());
    }

    #[test]
    fn seed_is_mandatory_and_flags_win() {
        let err = load_config(Command::Bounds, None, None, None, &[]).unwrap_err();
        assert!(err.to_string().contains("seed"));
        let cfg = load_config(Command::Bounds, None, Some(4), None, &["seed=9".into()]).unwrap();
        assert_eq!(cfg.seed, 4);
    }

    #[test]
    fn unknown_fields_are_usage_errors() {
        let e = load_config(Command::Bounds, None, Some(1), None, &["nope=1".into()]).unwrap_err();
        assert!(matches!(e, CliError::Usage(_)));
        let e = load_config(Command::Bounds, None, Some(1), None, &["d=1".into()]).unwrap_err();
        assert!(e.to_string().contains("`d`"));
    }
}
