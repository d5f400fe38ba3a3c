//! Resolution of effective run settings: command-line flags override the
//! optional key=value config file, which overrides built-in defaults.

use crate::{CliError, CommonArgs, LawArg};
use autoreson::{IntegratorConfig, SystemParams};
use num_complex::Complex64;
use std::collections::HashMap;
use std::path::Path;

/// Keys accepted in a config file; they match the long flag names.
const KNOWN_KEYS: &[&str] = &[
    "beta",
    "f",
    "epsilon",
    "psi0-re",
    "psi0-im",
    "tau-max",
    "rel-tol",
    "abs-tol",
    "stride",
    "out",
    "sweep-law",
    "sweep-scale",
    "compare",
    "beta-list",
    "f-list",
    "c-fall",
    "tau-min",
];

pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn empty() -> Self {
        Self {
            values: HashMap::new(),
        }
    }

    /// Parse `key=value` lines; '#' starts a comment, blank lines are
    /// ignored, keys must match long flag names.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(idx) => &raw[..idx],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "{}:{}: expected key=value, got '{raw}'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::Usage(format!(
                    "{}:{}: unknown key '{key}'",
                    path.display(),
                    lineno + 1
                )));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    fn get_raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get_raw(key)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("config key {key}: bad number '{s}'")))
            })
            .transpose()
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        self.get_raw(key)
            .map(|s| match s {
                "true" | "1" => Ok(true),
                "false" | "0" => Ok(false),
                other => Err(CliError::Usage(format!(
                    "config key {key}: bad boolean '{other}'"
                ))),
            })
            .transpose()
    }

    pub fn get_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.get_raw(key)
            .map(|s| {
                s.split(',')
                    .map(|item| {
                        item.trim().parse::<f64>().map_err(|_| {
                            CliError::Usage(format!("config key {key}: bad number '{item}'"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn get_law(&self, key: &str) -> Result<Option<LawArg>, CliError> {
        self.get_raw(key)
            .map(|s| match s {
                "linear" => Ok(LawArg::Linear),
                "saturating" => Ok(LawArg::Saturating),
                other => Err(CliError::Usage(format!(
                    "config key {key}: expected linear|saturating, got '{other}'"
                ))),
            })
            .transpose()
    }

    pub fn get_string(&self, key: &str) -> Option<String> {
        self.get_raw(key).map(|s| s.to_string())
    }
}

/// Shared settings after merging flags, file, and defaults.
pub struct Resolved {
    pub beta: f64,
    pub f: f64,
    pub epsilon: Option<f64>,
    pub psi0: Complex64,
    pub tau_max: f64,
    pub config: IntegratorConfig,
    pub out: String,
    pub file: FileConfig,
}

impl Resolved {
    pub fn from_common(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::empty(),
        };
        let beta = args.beta.or(file.get_f64("beta")?).unwrap_or(0.05);
        let f = args.f.or(file.get_f64("f")?).unwrap_or(1.0);
        let epsilon = args.epsilon.or(file.get_f64("epsilon")?);
        let psi0 = Complex64::new(
            args.psi0_re.or(file.get_f64("psi0-re")?).unwrap_or(0.0),
            args.psi0_im.or(file.get_f64("psi0-im")?).unwrap_or(0.0),
        );
        let tau_max = args.tau_max.or(file.get_f64("tau-max")?).unwrap_or(600.0);
        let defaults = IntegratorConfig::default();
        let config = IntegratorConfig {
            rel_tol: args
                .rel_tol
                .or(file.get_f64("rel-tol")?)
                .unwrap_or(defaults.rel_tol),
            abs_tol: args
                .abs_tol
                .or(file.get_f64("abs-tol")?)
                .unwrap_or(defaults.abs_tol),
            sample_stride: args
                .stride
                .or(file.get_f64("stride")?)
                .unwrap_or(defaults.sample_stride),
            ..defaults
        };
        let out = args
            .out
            .clone()
            .or(file.get_string("out"))
            .unwrap_or_else(|| "-".to_string());

        if !(tau_max > 0.0 && tau_max.is_finite()) {
            return Err(CliError::Usage(format!(
                "tau-max must be positive and finite, got {tau_max}"
            )));
        }
        config
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if !psi0.re.is_finite() || !psi0.im.is_finite() {
            return Err(CliError::Usage("psi0 must be finite".into()));
        }

        Ok(Self {
            beta,
            f,
            epsilon,
            psi0,
            tau_max,
            config,
            out,
            file,
        })
    }

    /// Validated physical parameters; epsilon is attached when present.
    pub fn params(&self) -> Result<SystemParams, CliError> {
        let params = match self.epsilon {
            Some(eps) => SystemParams::with_epsilon(self.beta, self.f, eps),
            None => SystemParams::new(self.beta, self.f),
        };
        params.map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn params_requiring_epsilon(&self) -> Result<SystemParams, CliError> {
        if self.epsilon.is_none() {
            return Err(CliError::Usage(
                "this command requires --epsilon (or epsilon= in the config file)".into(),
            ));
        }
        self.params()
    }
}
