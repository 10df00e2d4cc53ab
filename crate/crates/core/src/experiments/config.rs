//! Flat TOML experiment configs with per-experiment key schemas.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{config, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    List(Vec<f64>),
    Str(String),
    Bool(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(x) => write!(f, "{x}"),
            Value::List(xs) => {
                f.write_str("[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            Value::Str(s) => write!(f, "\"{s}\""),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Num,
    Int,
    List,
    Str(&'static [&'static str]),
    Bool,
}

#[derive(Debug, Clone, Copy)]
pub enum Default {
    Required,
    Num(f64),
    List(&'static [f64]),
    Str(&'static str),
    Bool(bool),
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Default,
    pub doc: &'static str,
}

impl KeySpec {
    pub fn required(&self) -> bool {
        matches!(self.default, Default::Required)
    }

    fn default_value(&self) -> Option<Value> {
        match self.default {
            Default::Required => None,
            Default::Num(x) => Some(Value::Num(x)),
            Default::List(xs) => Some(Value::List(xs.to_vec())),
            Default::Str(s) => Some(Value::Str(s.to_string())),
            Default::Bool(b) => Some(Value::Bool(b)),
        }
    }
}

const fn req(name: &'static str, kind: Kind, doc: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind,
        default: Default::Required,
        doc,
    }
}

const fn num(name: &'static str, v: f64, doc: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind: Kind::Num,
        default: Default::Num(v),
        doc,
    }
}

const fn int(name: &'static str, v: f64, doc: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind: Kind::Int,
        default: Default::Num(v),
        doc,
    }
}

const fn list(name: &'static str, v: &'static [f64], doc: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind: Kind::List,
        default: Default::List(v),
        doc,
    }
}

const fn choice(name: &'static str, options: &'static [&'static str], v: &'static str, doc: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind: Kind::Str(options),
        default: Default::Str(v),
        doc,
    }
}

const fn flag(name: &'static str, v: bool, doc: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind: Kind::Bool,
        default: Default::Bool(v),
        doc,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExperimentKind {
    RankVsM,
    PilotDecontamination,
    RankVsR,
    SegmentRank,
    PathCorrelation,
    SigmaSq,
    CrosscorrDist,
    MseVsDistance,
    SumrateVsDistance,
    PercellRateVsR,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::RankVsM,
        ExperimentKind::PilotDecontamination,
        ExperimentKind::RankVsR,
        ExperimentKind::SegmentRank,
        ExperimentKind::PathCorrelation,
        ExperimentKind::SigmaSq,
        ExperimentKind::CrosscorrDist,
        ExperimentKind::MseVsDistance,
        ExperimentKind::SumrateVsDistance,
        ExperimentKind::PercellRateVsR,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::RankVsM => "rank-vs-m",
            ExperimentKind::PilotDecontamination => "pilot-decontamination",
            ExperimentKind::RankVsR => "rank-vs-r",
            ExperimentKind::SegmentRank => "segment-rank",
            ExperimentKind::PathCorrelation => "path-correlation",
            ExperimentKind::SigmaSq => "sigma-sq",
            ExperimentKind::CrosscorrDist => "crosscorr-dist",
            ExperimentKind::MseVsDistance => "mse-vs-distance",
            ExperimentKind::SumrateVsDistance => "sumrate-vs-distance",
            ExperimentKind::PercellRateVsR => "percell-rate-vs-r",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::RankVsM => {
                "effective rank of a random linear array covariance vs. M against the closed-form model"
            }
            ExperimentKind::PilotDecontamination => {
                "LS vs. MMSE channel estimation MSE with a shared pilot and disjoint AOA clusters"
            }
            ExperimentKind::RankVsR => "effective rank of the one-ring covariance vs. ring radius r against 4πr/λ",
            ExperimentKind::SegmentRank => "effective rank for scatterers on a line segment against 2L̃/λ",
            ExperimentKind::PathCorrelation => "normalized path correlation vs. scatterer spacing against |J0(2πD/λ)|",
            ExperimentKind::SigmaSq => "path-loss correlation σ²(D) by numerical quadrature",
            ExperimentKind::CrosscorrDist => {
                "normalized squared cross-correlation samples vs. a mean-fitted exponential law"
            }
            ExperimentKind::MseVsDistance => "LS and MMSE estimation MSE vs. distance between two pilot-sharing users",
            ExperimentKind::SumrateVsDistance => "uplink sum-rate of four receivers vs. distance between two users",
            ExperimentKind::PercellRateVsR => "per-cell uplink rate in a 7-cell hexagonal network vs. ring radius r",
        }
    }

    pub fn schema(self) -> &'static [KeySpec] {
        use ExperimentKind::*;
        const LAMBDA: KeySpec = num("lambda", 0.15, "carrier wavelength (m)");
        const THRESHOLD: KeySpec = num("threshold", 1e-5, "relative eigenvalue threshold");
        const L: KeySpec = num("L", 500.0, "network disk radius / hexagon circumradius (m)");
        const GAMMA: KeySpec = num("gamma", 2.5, "path-loss exponent");
        const ALPHA: KeySpec = num("alpha", 1e7, "path-loss constant");
        const SNR: KeySpec = num("snr_db", 20.0, "cell-edge SNR (dB), α/((L+r)^γ σ²)");
        const TAU: KeySpec = int("tau", 16.0, "pilot length");
        const P: KeySpec = int("P", 50.0, "scatterers (paths) per user");
        const R: KeySpec = num("r", 15.0, "scattering ring radius (m)");
        match self {
            RankVsM => {
                const {
                    &[
                        req("M_grid", Kind::List, "antenna counts"),
                        LAMBDA,
                        num("spacing_wl", 0.5, "mean antenna spacing D̄ (or D) in wavelengths"),
                        num("theta_min_deg", 70.0, "AOA interval start (deg)"),
                        num("theta_max_deg", 110.0, "AOA interval end (deg)"),
                        THRESHOLD,
                        choice("array", &["random", "ula"], "random", "array type"),
                    ]
                }
            }
            PilotDecontamination => {
                const {
                    &[
                        req("M_grid", Kind::List, "antenna counts"),
                        LAMBDA,
                        num("spacing_wl", 0.5, "mean antenna spacing D̄ in wavelengths"),
                        list("desired_deg", &[0.0, 30.0], "desired-user AOA interval (deg)"),
                        list("interferer_deg", &[150.0, 180.0], "interfering-user AOA interval (deg)"),
                        P,
                        TAU,
                        num("snr_db", 20.0, "SNR β/σ² (dB)"),
                        int("trials", 200.0, "pilot realizations per M"),
                    ]
                }
            }
            RankVsR => {
                const {
                    &[
                        req("r_grid", Kind::List, "ring radii (m)"),
                        int("M", 800.0, "antennas in the disk"),
                        L,
                        LAMBDA,
                        THRESHOLD,
                        flag("path_loss", false, "enable path loss in the covariance"),
                        ALPHA,
                        GAMMA,
                        choice(
                            "covariance",
                            &["quadrature", "monte-carlo"],
                            "quadrature",
                            "covariance construction",
                        ),
                        int("mc_draws", 0.0, "Monte Carlo draws (0 = 10·M)"),
                        P,
                    ]
                }
            }
            SegmentRank => {
                const {
                    &[
                        req("length_grid", Kind::List, "segment lengths L̃ (m)"),
                        int("M", 800.0, "antennas in the disk"),
                        L,
                        LAMBDA,
                        THRESHOLD,
                    ]
                }
            }
            PathCorrelation => {
                const {
                    &[
                        req("M_grid", Kind::List, "antenna counts"),
                        L,
                        LAMBDA,
                        num("D_max_wl", 3.0, "largest scatterer spacing (wavelengths)"),
                        num("D_step_wl", 0.05, "spacing step (wavelengths)"),
                        int("trials", 1.0, "antenna layouts averaged per M"),
                    ]
                }
            }
            SigmaSq => {
                const {
                    &[
                        req("D_grid", Kind::List, "distances D (m)"),
                        L,
                        R,
                        GAMMA,
                        num("alpha", 1.0, "path-loss constant"),
                        choice(
                            "sigma_mode",
                            &["first-principles", "linear-alpha"],
                            "first-principles",
                            "α² (first principles) or α (linear-alpha) prefactor",
                        ),
                    ]
                }
            }
            CrosscorrDist => {
                const {
                    &[
                        req("D_grid", Kind::List, "scatterer spacings D (m)"),
                        int("M", 2000.0, "antennas per sample"),
                        int("samples", 1000.0, "samples per spacing"),
                        L,
                        R,
                        GAMMA,
                        ALPHA,
                        LAMBDA,
                    ]
                }
            }
            MseVsDistance => {
                const {
                    &[
                        req("distance_grid", Kind::List, "user distances (m)"),
                        int("M", 500.0, "antennas in the disk"),
                        L,
                        R,
                        P,
                        GAMMA,
                        ALPHA,
                        SNR,
                        TAU,
                        int("trials", 200.0, "pilot realizations per distance and layout"),
                        int("geometries", 1.0, "antenna layouts"),
                        LAMBDA,
                    ]
                }
            }
            SumrateVsDistance => {
                const {
                    &[
                        req("distance_grid", Kind::List, "user distances (m)"),
                        int("M", 500.0, "antennas in the disk"),
                        L,
                        R,
                        P,
                        GAMMA,
                        ALPHA,
                        SNR,
                        TAU,
                        int("trials", 200.0, "channel realizations per distance and layout"),
                        int("geometries", 1.0, "antenna layouts"),
                        LAMBDA,
                        THRESHOLD,
                        int(
                            "min_filter_rows",
                            1.0,
                            "rows kept by the subspace filter when no eigenvalue is negligible",
                        ),
                    ]
                }
            }
            PercellRateVsR => {
                const {
                    &[
                        req("r_grid", Kind::List, "ring radii (m)"),
                        int("M_per_cell", 100.0, "antennas per cell"),
                        L,
                        P,
                        GAMMA,
                        ALPHA,
                        SNR,
                        TAU,
                        int("trials", 20.0, "channel realizations per radius and layout"),
                        int("geometries", 1.0, "network layouts"),
                        LAMBDA,
                        THRESHOLD,
                        int(
                            "min_filter_rows",
                            1.0,
                            "rows kept by the subspace filter when no eigenvalue is negligible",
                        ),
                        choice(
                            "user_placement",
                            &["uniform", "cell-edge"],
                            "uniform",
                            "user position inside each cell",
                        ),
                    ]
                }
            }
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A validated experiment config. `params` holds every schema key, with
/// defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub params: BTreeMap<String, Value>,
    /// Keys that were filled from defaults.
    pub defaulted: Vec<String>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let key = e.span().map(|s| text[s].to_string()).unwrap_or_else(|| "<file>".into());
            config(key, format!("invalid TOML: {}", e.message()))
        })?;
        let mut raw = BTreeMap::new();
        for (k, v) in table {
            raw.insert(k.clone(), convert(&k, v)?);
        }
        Self::from_map(raw)
    }

    /// Builds a config from already-typed values. Keys `experiment` and
    /// `seed` are taken out of the map.
    pub fn from_map(mut raw: BTreeMap<String, Value>) -> Result<Self> {
        let experiment = match raw.remove("experiment") {
            Some(Value::Str(s)) => ExperimentKind::from_name(&s).ok_or_else(|| {
                let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                config(
                    "experiment",
                    format!("unknown experiment `{s}`; expected one of {}", names.join(", ")),
                )
            })?,
            Some(_) => return Err(config("experiment", "must be a string")),
            None => return Err(config("experiment", "missing required key")),
        };
        let seed = match raw.remove("seed") {
            Some(Value::Num(x)) if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => x as u64,
            Some(_) => return Err(config("seed", "must be a nonnegative integer")),
            None => 0,
        };
        let schema = experiment.schema();
        if let Some(k) = raw.keys().find(|k| !schema.iter().any(|s| s.name == k.as_str())) {
            return Err(config(
                k.clone(),
                format!("unknown key for experiment `{}`", experiment.name()),
            ));
        }
        let mut params = BTreeMap::new();
        let mut defaulted = Vec::new();
        for spec in schema {
            let value = match raw.remove(spec.name) {
                Some(v) => v,
                None => match spec.default_value() {
                    Some(v) => {
                        defaulted.push(spec.name.to_string());
                        v
                    }
                    None => return Err(config(spec.name, "missing required key")),
                },
            };
            check_kind(spec, &value)?;
            params.insert(spec.name.to_string(), value);
        }
        Ok(Self {
            experiment,
            seed,
            params,
            defaulted,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Overrides one parameter, re-validating its type.
    pub fn set(&mut self, key: &str, value: Value) -> Result<()> {
        let spec = self
            .experiment
            .schema()
            .iter()
            .find(|s| s.name == key)
            .ok_or_else(|| config(key, "unknown key"))?;
        check_kind(spec, &value)?;
        self.params.insert(key.to_string(), value);
        self.defaulted.retain(|k| k != key);
        Ok(())
    }

    pub fn num(&self, key: &str) -> Result<f64> {
        match self.params.get(key) {
            Some(Value::Num(x)) => Ok(*x),
            _ => Err(config(key, "expected a number")),
        }
    }

    pub fn count(&self, key: &str) -> Result<usize> {
        let x = self.num(key)?;
        Ok(x as usize)
    }

    pub fn list(&self, key: &str) -> Result<&[f64]> {
        match self.params.get(key) {
            Some(Value::List(xs)) => Ok(xs),
            _ => Err(config(key, "expected a list of numbers")),
        }
    }

    pub fn text(&self, key: &str) -> Result<&str> {
        match self.params.get(key) {
            Some(Value::Str(s)) => Ok(s),
            _ => Err(config(key, "expected a string")),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.params.get(key) {
            Some(Value::Bool(b)) => Ok(*b),
            _ => Err(config(key, "expected a boolean")),
        }
    }
}

fn convert(key: &str, v: toml::Value) -> Result<Value> {
    Ok(match v {
        toml::Value::Integer(i) => Value::Num(i as f64),
        toml::Value::Float(x) => Value::Num(x),
        toml::Value::String(s) => Value::Str(s),
        toml::Value::Boolean(b) => Value::Bool(b),
        toml::Value::Array(items) => Value::List(
            items
                .into_iter()
                .map(|item| match item {
                    toml::Value::Integer(i) => Ok(i as f64),
                    toml::Value::Float(x) => Ok(x),
                    _ => Err(config(key, "list entries must be numbers")),
                })
                .collect::<Result<_>>()?,
        ),
        _ => {
            return Err(config(
                key,
                "nested tables are not supported; use flat key = value pairs",
            ))
        }
    })
}

fn check_kind(spec: &KeySpec, value: &Value) -> Result<()> {
    let ok = match (spec.kind, value) {
        (Kind::Num, Value::Num(x)) => x.is_finite(),
        (Kind::Int, Value::Num(x)) => x.is_finite() && *x >= 0.0 && x.fract() == 0.0,
        (Kind::List, Value::List(xs)) => !xs.is_empty() && xs.iter().all(|x| x.is_finite()),
        (Kind::Str(options), Value::Str(s)) => options.contains(&s.as_str()),
        (Kind::Bool, Value::Bool(_)) => true,
        _ => false,
    };
    if ok {
        return Ok(());
    }
    let expected = match spec.kind {
        Kind::Num => "a finite number".to_string(),
        Kind::Int => "a nonnegative integer".to_string(),
        Kind::List => "a non-empty list of finite numbers".to_string(),
        Kind::Str(options) => format!("one of {}", options.join(", ")),
        Kind::Bool => "true or false".to_string(),
    };
    Err(config(spec.name, format!("expected {expected}, got {value}")))
}
