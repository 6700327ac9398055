use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use thiserror::Error;

use crate::error::GameError;
use crate::game::{GameParams, RealisticState};
use crate::synthesis::FieldCurve;

pub const KEYS: [&str; 13] = [
    "v_r_max", "v_d_max", "b", "r_d", "s", "tau", "dt", "t_max", "x_p", "y_p", "x_e", "y_e",
    "theta_e",
];

const STATE_KEYS: [&str; 5] = ["x_p", "y_p", "x_e", "y_e", "theta_e"];
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_MAX: f64 = 20.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: `{key}` = `{value}` is not a finite number")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Start(String),
    #[error("field `{field}`: {reason}")]
    Field { field: &'static str, reason: String },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// How the scenario picks its initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartSpec {
    Initial(RealisticState),
    /// Start on trajectory `s` at retro-time `tau`.
    Synthesis {
        s: f64,
        tau: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub params: GameParams,
    pub start: StartSpec,
    pub dt: f64,
    pub t_max: f64,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<&'static str, f64> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: raw.trim().to_string(),
            })?;
            let (k, v) = (k.trim(), v.trim());
            let key =
                *KEYS
                    .iter()
                    .find(|&&known| known == k)
                    .ok_or_else(|| ConfigError::UnknownKey {
                        line,
                        key: k.to_string(),
                    })?;
            let x: f64 = v
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| ConfigError::BadValue {
                    line,
                    key: key.to_string(),
                    value: v.to_string(),
                })?;
            if values.insert(key, x).is_some() {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
        }
        Self::from_values(&values)
    }

    fn from_values(values: &BTreeMap<&'static str, f64>) -> Result<Self, ConfigError> {
        let need = |k: &'static str| values.get(k).copied().ok_or(ConfigError::Missing(k));
        let params = GameParams::new(need("v_r_max")?, need("v_d_max")?, need("b")?, need("r_d")?)?;

        let has_state = STATE_KEYS
            .iter()
            .filter(|k| values.contains_key(*k))
            .count();
        let has_synth = ["s", "tau"]
            .iter()
            .filter(|k| values.contains_key(*k))
            .count();
        let start = match (has_state, has_synth) {
            (5, 0) => StartSpec::Initial(RealisticState::new(
                need("x_p")?,
                need("y_p")?,
                need("x_e")?,
                need("y_e")?,
                need("theta_e")?,
            )),
            (0, 2) => StartSpec::Synthesis {
                s: need("s")?,
                tau: need("tau")?,
            },
            (0, 0) => {
                return Err(ConfigError::Start(
                    "no initial state: give x_p, y_p, x_e, y_e, theta_e or s, tau".into(),
                ))
            }
            (n, 0) if n < 5 => {
                return Err(ConfigError::Start(
                    "initial state needs all of x_p, y_p, x_e, y_e, theta_e".into(),
                ))
            }
            (0, _) => {
                return Err(ConfigError::Start(
                    "synthesis spec needs both s and tau".into(),
                ))
            }
            _ => {
                return Err(ConfigError::Start(
                    "give either an initial state or a synthesis spec (s, tau), not both".into(),
                ))
            }
        };

        let dt = values.get("dt").copied().unwrap_or(DEFAULT_DT);
        let t_max = values.get("t_max").copied().unwrap_or(DEFAULT_T_MAX);
        if !(dt > 0.0) {
            return Err(ConfigError::Field {
                field: "dt",
                reason: "must be > 0".into(),
            });
        }
        if !(t_max > 0.0) {
            return Err(ConfigError::Field {
                field: "t_max",
                reason: "must be > 0".into(),
            });
        }
        if let StartSpec::Synthesis { tau, .. } = start {
            if !(tau >= 0.0) {
                return Err(ConfigError::Field {
                    field: "tau",
                    reason: "must be >= 0".into(),
                });
            }
        }
        Ok(ScenarioConfig {
            params,
            start,
            dt,
            t_max,
        })
    }

    /// Canonical text form; parsing it gives back the same config.
    pub fn serialize(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let mut put = |k: &str, v: f64| {
            let _ = writeln!(out, "{k} = {v:?}");
        };
        put("v_r_max", p.v_r_max());
        put("v_d_max", p.v_d_max());
        put("b", p.b());
        put("r_d", p.r_d());
        match self.start {
            StartSpec::Initial(rs) => {
                put("x_p", rs.x_p);
                put("y_p", rs.y_p);
                put("x_e", rs.x_e);
                put("y_e", rs.y_e);
                put("theta_e", rs.theta_e);
            }
            StartSpec::Synthesis { s, tau } => {
                put("s", s);
                put("tau", tau);
            }
        }
        put("dt", self.dt);
        put("t_max", self.t_max);
        out
    }

    /// Initial world state. A synthesis spec puts the evader at the origin
    /// heading along +y, with the pursuer at the point of trajectory `s` at
    /// retro-time `min(tau, horizon)`: beyond the x-axis crossing the point
    /// belongs to the mirrored family.
    pub fn initial_state(&self) -> Result<RealisticState, ConfigError> {
        match self.start {
            StartSpec::Initial(rs) => Ok(rs),
            StartSpec::Synthesis { s, tau } => {
                let curve = FieldCurve::new(s, &self.params)?;
                let z = curve.point(tau.min(curve.horizon()));
                Ok(RealisticState::from_reduced(z, 0.0, 0.0, FRAC_PI_2))
            }
        }
    }
}
