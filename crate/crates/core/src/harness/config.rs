use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::discretize::{Coefficient, VKind};
use crate::error::{Error, Result};
use crate::integrators::{Approach, Equation, SchemeSpec, Splitting, Substep};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialData {
    RandomRankR,
    Eigenmode { m: usize, k: usize },
    /// Mode with the largest closed-form `|G|`, excluding factors that are
    /// identically one.
    WorstMode,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: SchemeSpec,
    pub n_x: usize,
    pub n_v: usize,
    pub rank: usize,
    pub coefficient: Coefficient,
    pub v_mode: VKind,
    pub cfl: f64,
    pub steps: usize,
    pub seed: u64,
    pub initial_data: InitialData,
    pub quadrature_order: Option<usize>,
}

const KEYS: &[&str] = &[
    "scheme",
    "equation",
    "approach",
    "splitting",
    "substep",
    "N_x",
    "N_v",
    "rank",
    "coefficient",
    "v_mode",
    "cfl",
    "steps",
    "seed",
    "initial_data",
    "quadrature_order",
];

struct Entry {
    line: usize,
    value: String,
}

/// Parses the line-oriented `key = value` format; `#` starts a comment.
///
/// The scheme is given either as `scheme = <name>` or through the four keys
/// `equation`, `approach`, `splitting` and `substep`.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut entries: BTreeMap<&str, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let key = *KEYS.iter().find(|k| **k == key).ok_or_else(|| Error::Parse {
            line,
            msg: format!("unknown key `{key}`"),
        })?;
        if value.is_empty() {
            return Err(Error::Parse {
                line,
                msg: format!("empty value for `{key}`"),
            });
        }
        if entries.contains_key(key) {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate key `{key}`"),
            });
        }
        entries.insert(
            key,
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }

    let get = |key: &str| entries.get(key);
    let required = |key: &str| {
        get(key).ok_or_else(|| Error::Constraint {
            key: key.into(),
            msg: "required key is missing".into(),
        })
    };
    fn parse_value<V>(e: &Entry, what: &str, f: impl FnOnce(&str) -> Option<V>) -> Result<V> {
        f(&e.value).ok_or_else(|| Error::Parse {
            line: e.line,
            msg: format!("`{}` is not a valid {what}", e.value),
        })
    }
    let uint = |key: &str| -> Result<usize> { parse_value(required(key)?, "nonnegative integer", |s| s.parse().ok()) };

    let scheme = match get("scheme") {
        Some(e) => {
            if let Some(k) = ["equation", "approach", "splitting", "substep"].into_iter().find(|k| get(k).is_some()) {
                return Err(Error::Constraint {
                    key: "scheme".into(),
                    msg: format!("cannot be combined with `{k}`"),
                });
            }
            e.value.parse::<SchemeSpec>().map_err(|err| Error::Parse {
                line: e.line,
                msg: err.to_string(),
            })?
        }
        None => {
            let equation = parse_value(required("equation")?, "equation", |s| match s {
                "hyperbolic" => Some(Equation::Hyperbolic),
                "parabolic" => Some(Equation::Parabolic),
                _ => None,
            })?;
            let approach = parse_value(required("approach")?, "approach", |s| match s {
                "full_tensor" => Some(Approach::FullTensor),
                "dtp" => Some(Approach::Dtp),
                "ptd" => Some(Approach::Ptd),
                _ => None,
            })?;
            let splitting = parse_value(required("splitting")?, "splitting", |s| match s {
                "lie" => Some(Splitting::Lie),
                "strang" => Some(Splitting::Strang),
                _ => None,
            })?;
            let substep: Substep = parse_value(required("substep")?, "substep", |s| s.parse().ok())?;
            SchemeSpec::new(equation, approach, splitting, substep).map_err(|err| Error::Constraint {
                key: "substep".into(),
                msg: err.to_string(),
            })?
        }
    };

    let n_x = uint("N_x")?;
    let n_v = uint("N_v")?;
    let rank = uint("rank")?;
    let steps = uint("steps")?;
    let cfl: f64 = parse_value(required("cfl")?, "number", |s| s.parse().ok())?;
    let coefficient = match get("coefficient") {
        Some(e) => parse_value(e, "coefficient", |s| s.parse().ok())?,
        None => match scheme.equation {
            Equation::Hyperbolic => Coefficient::Linear,
            Equation::Parabolic => Coefficient::Square,
        },
    };
    let v_mode = match get("v_mode") {
        Some(e) => parse_value(e, "v_mode", |s| match s {
            "nodal" => Some(VKind::Nodal),
            "modal" => Some(VKind::Modal),
            _ => None,
        })?,
        None => VKind::Nodal,
    };
    let seed = match get("seed") {
        Some(e) => parse_value(e, "seed", |s| s.parse().ok())?,
        None => 0,
    };
    let initial_data = match get("initial_data") {
        Some(e) => parse_value(e, "initial_data", parse_initial)?,
        None => InitialData::RandomRankR,
    };
    let quadrature_order = match get("quadrature_order") {
        Some(e) => Some(parse_value(e, "quadrature order", |s| s.parse().ok())?),
        None => None,
    };

    let cfg = ExperimentConfig {
        scheme,
        n_x,
        n_v,
        rank,
        coefficient,
        v_mode,
        cfl,
        steps,
        seed,
        initial_data,
        quadrature_order,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn parse_initial(s: &str) -> Option<InitialData> {
    match s {
        "random_rank_r" => Some(InitialData::RandomRankR),
        "worst_mode" => Some(InitialData::WorstMode),
        _ => {
            let (m, k) = s.strip_prefix("eigenmode:")?.split_once(',')?;
            Some(InitialData::Eigenmode {
                m: m.trim().parse().ok()?,
                k: k.trim().parse().ok()?,
            })
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, msg: String| Err(Error::Constraint { key: key.into(), msg });
        self.scheme.validate().map_err(|e| Error::Constraint {
            key: "scheme".into(),
            msg: e.to_string(),
        })?;
        if self.n_x < 3 {
            return fail("N_x", format!("must be at least 3, got {}", self.n_x));
        }
        if self.n_v < 1 {
            return fail("N_v", "must be positive".into());
        }
        if self.rank < 1 || self.rank > self.n_x.min(self.n_v) {
            return fail(
                "rank",
                format!("must lie in 1..={}, got {}", self.n_x.min(self.n_v), self.rank),
            );
        }
        if !(self.cfl >= 0.0 && self.cfl.is_finite()) {
            return fail("cfl", format!("must be finite and nonnegative, got {}", self.cfl));
        }
        if let Some(q) = self.quadrature_order {
            if q < 1 {
                return fail("quadrature_order", "must be at least 1".into());
            }
        }
        if let InitialData::Eigenmode { m, k } = self.initial_data {
            if m >= self.n_x || k >= self.n_v {
                return fail("initial_data", format!("mode ({m}, {k}) out of range"));
            }
        }
        Ok(())
    }
}

/// Writes every key, so that `parse_config(&serialize_config(c)) == c`.
pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    let s = &cfg.scheme;
    let mut out = String::new();
    let eq = match s.equation {
        Equation::Hyperbolic => "hyperbolic",
        Equation::Parabolic => "parabolic",
    };
    let ap = match s.approach {
        Approach::FullTensor => "full_tensor",
        Approach::Dtp => "dtp",
        Approach::Ptd => "ptd",
    };
    let sp = match s.splitting {
        Splitting::Lie => "lie",
        Splitting::Strang => "strang",
    };
    let init = match cfg.initial_data {
        InitialData::RandomRankR => "random_rank_r".to_string(),
        InitialData::Eigenmode { m, k } => format!("eigenmode:{m},{k}"),
        InitialData::WorstMode => "worst_mode".to_string(),
    };
    let vm = match cfg.v_mode {
        VKind::Nodal => "nodal",
        VKind::Modal => "modal",
    };
    let _ = writeln!(out, "equation = {eq}");
    let _ = writeln!(out, "approach = {ap}");
    let _ = writeln!(out, "splitting = {sp}");
    let _ = writeln!(out, "substep = {}", s.substep);
    let _ = writeln!(out, "N_x = {}", cfg.n_x);
    let _ = writeln!(out, "N_v = {}", cfg.n_v);
    let _ = writeln!(out, "rank = {}", cfg.rank);
    let _ = writeln!(out, "coefficient = {}", cfg.coefficient);
    let _ = writeln!(out, "v_mode = {vm}");
    let _ = writeln!(out, "cfl = {}", cfg.cfl);
    let _ = writeln!(out, "steps = {}", cfg.steps);
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(out, "initial_data = {init}");
    if let Some(q) = cfg.quadrature_order {
        let _ = writeln!(out, "quadrature_order = {q}");
    }
    out
}
