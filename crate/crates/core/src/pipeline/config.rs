//! Run configuration: a declarative `key = value` file plus CLI overrides.
//!
//! Schema (unknown keys are rejected; `#` starts a comment; list values are
//! comma separated; paths resolve relative to the config file):
//!
//! ```text
//! panel_csv        = fixtures/panel.csv      # long-form entity,period,variable,value
//! groups_csv       = fixtures/groups.csv     # optional: entity,scheme,label
//! out_dir          = out
//! seed             = 42                      # required when bootstrap_reps > 0
//! bootstrap_reps   = 200
//! taus             = 0.1,0.25,0.5,0.75,0.9
//! inputs           = K,L,E
//! good_outputs     = GDP
//! bad_outputs      = CO2
//! dependent        = PM25
//! controls         = slog_FDI,POPDEN,IND
//! moderator        = ln_EI                   # optional
//! log_vars         = EI                      # stored as ln_<name>
//! signed_log_vars  = FDI                     # stored as slog_<name>
//! tertile_schemes  = tech:TECH:asc,newenergy:NEWENERGY:desc
//! hetero_schemes   = income,tech,newenergy,trade
//! describe_scheme  = income                  # optional extra grouping for descriptives
//! describe_vars    = ...                     # optional, defaults to the model variables
//! stages           = describe,tfp,static-tfp,regress,mmqr,moderate,hetero,trend
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::panel::TertileDirection;

/// Pipeline stages, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Tfp,
    StaticTfp,
    Describe,
    Regress,
    Mmqr,
    Moderate,
    Hetero,
    Trend,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Tfp,
        Stage::StaticTfp,
        Stage::Describe,
        Stage::Regress,
        Stage::Mmqr,
        Stage::Moderate,
        Stage::Hetero,
        Stage::Trend,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Describe => "describe",
            Stage::Tfp => "tfp",
            Stage::StaticTfp => "static-tfp",
            Stage::Regress => "regress",
            Stage::Mmqr => "mmqr",
            Stage::Moderate => "moderate",
            Stage::Hetero => "hetero",
            Stage::Trend => "trend",
        }
    }

    pub fn parse(s: &str) -> Result<Stage> {
        match s.trim() {
            "describe" => Ok(Stage::Describe),
            "tfp" => Ok(Stage::Tfp),
            "static-tfp" => Ok(Stage::StaticTfp),
            "regress" => Ok(Stage::Regress),
            "mmqr" => Ok(Stage::Mmqr),
            "moderate" => Ok(Stage::Moderate),
            "hetero" => Ok(Stage::Hetero),
            "trend" => Ok(Stage::Trend),
            other => Err(Error::Config(format!("unknown stage `{other}`"))),
        }
    }
}

/// A tertile grouping derived from a panel variable.
#[derive(Debug, Clone)]
pub struct TertileScheme {
    pub scheme: String,
    pub variable: String,
    pub direction: TertileDirection,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub panel_csv: PathBuf,
    pub groups_csv: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub bootstrap_reps: usize,
    pub taus: Vec<f64>,
    pub inputs: Vec<String>,
    pub good_outputs: Vec<String>,
    pub bad_outputs: Vec<String>,
    pub dependent: String,
    pub controls: Vec<String>,
    pub moderator: Option<String>,
    pub log_vars: Vec<String>,
    pub signed_log_vars: Vec<String>,
    pub tertile_schemes: Vec<TertileScheme>,
    pub hetero_schemes: Vec<String>,
    pub describe_scheme: Option<String>,
    pub describe_vars: Option<Vec<String>>,
    pub stages: Vec<Stage>,
}

/// Optional command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub taus: Option<Vec<f64>>,
    pub stages: Option<Vec<Stage>>,
}

impl RunConfig {
    pub fn from_file(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read `{}`: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut config = Self::parse(&text, base)?;
        if let Some(seed) = overrides.seed {
            config.seed = Some(seed);
        }
        if let Some(out) = &overrides.out_dir {
            config.out_dir = out.clone();
        }
        if let Some(taus) = &overrides.taus {
            config.taus = taus.clone();
        }
        if let Some(stages) = &overrides.stages {
            config.stages = stages.clone();
        }
        config.validate()?;
        Ok(config)
    }

    fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key `{key}`")));
            }
        }

        const KNOWN: [&str; 19] = [
            "panel_csv",
            "groups_csv",
            "out_dir",
            "seed",
            "bootstrap_reps",
            "taus",
            "inputs",
            "good_outputs",
            "bad_outputs",
            "dependent",
            "controls",
            "moderator",
            "log_vars",
            "signed_log_vars",
            "tertile_schemes",
            "hetero_schemes",
            "describe_scheme",
            "describe_vars",
            "stages",
        ];
        for key in map.keys() {
            if !KNOWN.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key `{key}`")));
            }
        }

        let require = |key: &str| -> Result<String> {
            map.get(key)
                .cloned()
                .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
        };
        let list = |value: &str| -> Vec<String> {
            value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect()
        };
        let path_of = |value: &str| -> PathBuf {
            let p = PathBuf::from(value);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };

        let taus = match map.get("taus") {
            Some(v) => list(v)
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad tau `{s}`")))
                })
                .collect::<Result<Vec<f64>>>()?,
            None => vec![0.1, 0.25, 0.5, 0.75, 0.9],
        };

        let tertile_schemes = match map.get("tertile_schemes") {
            Some(v) if !v.trim().is_empty() => list(v)
                .iter()
                .map(|item| {
                    let parts: Vec<&str> = item.split(':').collect();
                    if parts.len() != 3 {
                        return Err(Error::Config(format!(
                            "tertile scheme `{item}` must be name:variable:asc|desc"
                        )));
                    }
                    let direction = match parts[2] {
                        "asc" => TertileDirection::Ascending,
                        "desc" => TertileDirection::Descending,
                        other => {
                            return Err(Error::Config(format!(
                                "tertile direction `{other}` must be asc or desc"
                            )))
                        }
                    };
                    Ok(TertileScheme {
                        scheme: parts[0].to_string(),
                        variable: parts[1].to_string(),
                        direction,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            _ => Vec::new(),
        };

        let stages = match map.get("stages") {
            Some(v) => list(v)
                .iter()
                .map(|s| Stage::parse(s))
                .collect::<Result<Vec<_>>>()?,
            None => Stage::ALL.to_vec(),
        };

        Ok(RunConfig {
            panel_csv: path_of(&require("panel_csv")?),
            groups_csv: map.get("groups_csv").map(|v| path_of(v)),
            out_dir: path_of(&require("out_dir")?),
            seed: map
                .get("seed")
                .map(|s| {
                    s.parse::<u64>()
                        .map_err(|_| Error::Config(format!("bad seed `{s}`")))
                })
                .transpose()?,
            bootstrap_reps: map
                .get("bootstrap_reps")
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad bootstrap_reps `{s}`")))
                })
                .transpose()?
                .unwrap_or(200),
            taus,
            inputs: list(&require("inputs")?),
            good_outputs: list(&require("good_outputs")?),
            bad_outputs: map.get("bad_outputs").map(|v| list(v)).unwrap_or_default(),
            dependent: require("dependent")?,
            controls: map.get("controls").map(|v| list(v)).unwrap_or_default(),
            moderator: map.get("moderator").cloned().filter(|s| !s.is_empty()),
            log_vars: map.get("log_vars").map(|v| list(v)).unwrap_or_default(),
            signed_log_vars: map
                .get("signed_log_vars")
                .map(|v| list(v))
                .unwrap_or_default(),
            tertile_schemes,
            hetero_schemes: map.get("hetero_schemes").map(|v| list(v)).unwrap_or_default(),
            describe_scheme: map.get("describe_scheme").cloned().filter(|s| !s.is_empty()),
            describe_vars: map.get("describe_vars").map(|v| list(v)),
            stages,
        })
    }

    fn validate(&self) -> Result<()> {
        for tau in &self.taus {
            if !(*tau > 0.0 && *tau < 1.0) {
                return Err(Error::BadQuantile(*tau));
            }
        }
        if self.bootstrap_reps > 0 && self.seed.is_none() {
            return Err(Error::Config(
                "seed is required when bootstrap_reps > 0".into(),
            ));
        }
        if self.inputs.is_empty() || self.good_outputs.is_empty() {
            return Err(Error::Config(
                "at least one input and one good output are required".into(),
            ));
        }
        if self.stages.is_empty() {
            return Err(Error::Config("no stages selected".into()));
        }
        let reserved = ["TFP", "EC", "TC", "PEC", "SEC"];
        for v in self
            .inputs
            .iter()
            .chain(&self.good_outputs)
            .chain(&self.bad_outputs)
            .chain(&self.controls)
        {
            if reserved.contains(&v.as_str()) {
                return Err(Error::Config(format!(
                    "variable name `{v}` is reserved for the computed indices"
                )));
            }
        }
        Ok(())
    }

    pub fn seed_or_zero(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
