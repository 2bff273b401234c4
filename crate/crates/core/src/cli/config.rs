//! JSON suite configuration and the body grammar.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::Deserialize;

use crate::inequalities::search::Family;
use crate::inequalities::{CheckKind, CheckParams, LemmaCInput, TolerancePolicy};
use crate::starbody::{dilate, radial_combine, BodyExpr, BumpTerm};

/// A configuration or usage problem; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn cfg_err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

pub const MIN_RESOLUTION: usize = 4;

const BUILTINS: [(&str, &str); 2] = [
    ("paper-smoke", include_str!("../../suites/paper-smoke.json")),
    ("paper-random", include_str!("../../suites/paper-random.json")),
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub c: f64,
    pub v: Vec<f64>,
    pub m: u32,
}

/// One body definition; mirrors `BodyExpr` node for node.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        r: f64,
    },
    Ellipsoid {
        axes: Vec<f64>,
    },
    Lpball {
        p: f64,
        s: f64,
    },
    Bump {
        c0: f64,
        terms: Vec<TermSpec>,
    },
    Combine {
        lambda: f64,
        #[serde(rename = "K")]
        k: String,
        mu: f64,
        #[serde(rename = "L")]
        l: String,
    },
    Dilate {
        lambda: f64,
        #[serde(rename = "K")]
        k: String,
    },
    Intersection {
        bodies: Vec<String>,
        inner_res: usize,
    },
}

impl BodySpec {
    fn references(&self) -> Vec<&str> {
        match self {
            BodySpec::Combine { k, l, .. } => vec![k, l],
            BodySpec::Dilate { k, .. } => vec![k],
            BodySpec::Intersection { bodies, .. } => bodies.iter().map(String::as_str).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub outer: usize,
    pub inner: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { outer: 24, inner: 24 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<String>,
    pub format: Option<Format>,
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ToleranceSpec {
    Named(AutoTag),
    Fixed { fixed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl ToleranceSpec {
    pub fn policy(self) -> TolerancePolicy {
        match self {
            ToleranceSpec::Named(AutoTag::Auto) => TolerancePolicy::Auto,
            ToleranceSpec::Fixed { fixed } => TolerancePolicy::Fixed(fixed),
        }
    }
}

/// One configured check. With `bodies` omitted and a `random` section
/// present, it runs once per random tuple.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckEntry {
    pub check: String,
    #[serde(default)]
    pub bodies: Option<Vec<String>>,
    #[serde(default)]
    pub i: Option<f64>,
    #[serde(default)]
    pub j: Option<usize>,
    #[serde(default)]
    pub r: Option<usize>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub lambda_d: Option<f64>,
    #[serde(default)]
    pub lemma_c: Option<LemmaCInput>,
}

impl CheckEntry {
    pub fn params(&self) -> CheckParams {
        CheckParams {
            i: self.i.unwrap_or(0.0),
            j: self.j.unwrap_or(1),
            r: self.r.unwrap_or(1),
            alpha: self.alpha.unwrap_or(1.0),
            lambda_d: self.lambda_d.unwrap_or(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomKind {
    Mixed,
    Dilates,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub tuples: usize,
    #[serde(default = "default_random_kind")]
    pub kind: RandomKind,
}

fn default_random_kind() -> RandomKind {
    RandomKind::Mixed
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSpec {
    pub bodies: Vec<String>,
    #[serde(default)]
    pub i: f64,
    pub ladder: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub check: String,
    pub family: Family,
    pub budget: usize,
    #[serde(default)]
    pub i: Option<f64>,
    #[serde(default)]
    pub j: Option<usize>,
    #[serde(default)]
    pub r: Option<usize>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub lambda_d: Option<f64>,
}

impl SearchSpec {
    pub fn params(&self) -> CheckParams {
        CheckParams {
            i: self.i.unwrap_or(0.0),
            j: self.j.unwrap_or(1),
            r: self.r.unwrap_or(1),
            alpha: self.alpha.unwrap_or(1.0),
            lambda_d: self.lambda_d.unwrap_or(1.0),
        }
    }
}

/// The whole configuration file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub n: usize,
    #[serde(default)]
    pub bodies: BTreeMap<String, BodySpec>,
    #[serde(default)]
    pub checks: Vec<CheckEntry>,
    #[serde(default)]
    pub random: Option<RandomSpec>,
    #[serde(default)]
    pub resolution: Resolution,
    #[serde(default = "default_tolerance")]
    pub tolerance: ToleranceSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub converge: Option<ConvergeSpec>,
    #[serde(default)]
    pub search: Option<SearchSpec>,
}

fn default_tolerance() -> ToleranceSpec {
    ToleranceSpec::Named(AutoTag::Auto)
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: SuiteConfig = serde_json::from_str(text).map_err(|e| {
            cfg_err(format!(
                "malformed config at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a file, or a built-in suite named `builtin:<name>`.
    pub fn load(path: &str) -> Result<Self, ConfigError> {
        if let Some(name) = path.strip_prefix("builtin:") {
            let text = BUILTINS
                .iter()
                .find(|(id, _)| *id == name)
                .map(|(_, text)| *text)
                .ok_or_else(|| {
                    let known: Vec<_> = BUILTINS.iter().map(|(id, _)| *id).collect();
                    cfg_err(format!("unknown builtin suite \"{name}\"; known: {known:?}"))
                })?;
            return Self::parse(text);
        }
        let text = std::fs::read_to_string(Path::new(path))
            .map_err(|e| cfg_err(format!("cannot read config {path}: {e}")))?;
        Self::parse(&text)
    }

    fn check_name(&self, name: &str, context: &str) -> Result<(), ConfigError> {
        if self.bodies.contains_key(name) {
            Ok(())
        } else {
            Err(cfg_err(format!("undefined body \"{name}\" referenced by {context}")))
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 3 {
            return Err(cfg_err(format!("field n: dimension must be at least 3, got {}", self.n)));
        }
        let Resolution { outer, inner } = self.resolution;
        if outer < MIN_RESOLUTION || inner < MIN_RESOLUTION {
            return Err(cfg_err(format!(
                "field resolution: outer and inner must be >= {MIN_RESOLUTION}, got {outer}/{inner}"
            )));
        }
        for (name, spec) in &self.bodies {
            for r in spec.references() {
                self.check_name(r, &format!("bodies.{name}"))?;
            }
        }
        for (k, entry) in self.checks.iter().enumerate() {
            let kind = CheckKind::from_id(&entry.check)
                .ok_or_else(|| cfg_err(format!("checks[{k}].check: unknown check \"{}\"", entry.check)))?;
            match &entry.bodies {
                Some(names) => {
                    for name in names {
                        self.check_name(name, &format!("checks[{k}]"))?;
                    }
                }
                None if kind == CheckKind::LemmaC || self.random.is_some() => {}
                None => {
                    return Err(cfg_err(format!(
                        "checks[{k}]: no bodies given and no random section"
                    )))
                }
            }
        }
        if let Some(c) = &self.converge {
            for name in &c.bodies {
                self.check_name(name, "converge")?;
            }
        }
        if let Some(s) = &self.search {
            CheckKind::from_id(&s.check)
                .ok_or_else(|| cfg_err(format!("search.check: unknown check \"{}\"", s.check)))?;
        }
        Ok(())
    }

    /// Builds every named body, resolving references.
    pub fn build_bodies(&self) -> Result<HashMap<String, BodyExpr>, ConfigError> {
        let mut built = HashMap::new();
        for name in self.bodies.keys() {
            self.build_one(name, &mut built, &mut Vec::new())?;
        }
        Ok(built)
    }

    fn build_one(
        &self,
        name: &str,
        built: &mut HashMap<String, BodyExpr>,
        stack: &mut Vec<String>,
    ) -> Result<BodyExpr, ConfigError> {
        if let Some(b) = built.get(name) {
            return Ok(b.clone());
        }
        if stack.iter().any(|s| s == name) {
            return Err(cfg_err(format!("bodies.{name}: cyclic definition via {stack:?}")));
        }
        let spec = self
            .bodies
            .get(name)
            .ok_or_else(|| cfg_err(format!("undefined body \"{name}\"")))?;
        stack.push(name.to_string());
        let mut get = |other: &str| self.build_one(other, built, stack);
        let body = match spec {
            BodySpec::Ball { r } => BodyExpr::ball(*r),
            BodySpec::Ellipsoid { axes } => BodyExpr::ellipsoid(axes),
            BodySpec::Lpball { p, s } => BodyExpr::lp_ball(*p, *s),
            BodySpec::Bump { c0, terms } => BodyExpr::bump(
                *c0,
                terms
                    .iter()
                    .map(|t| BumpTerm {
                        coeff: t.c,
                        direction: t.v.clone(),
                        half_power: t.m,
                    })
                    .collect(),
            ),
            BodySpec::Combine { lambda, k, mu, l } => {
                let (k, l) = (get(k)?, get(l)?);
                radial_combine(*lambda, &k, *mu, &l)
            }
            BodySpec::Dilate { lambda, k } => dilate(*lambda, &get(k)?),
            BodySpec::Intersection { bodies, inner_res } => {
                let list = bodies.iter().map(|b| get(b)).collect::<Result<Vec<_>, _>>()?;
                BodyExpr::intersection_of(list, *inner_res)
            }
        }
        .map_err(|e| cfg_err(format!("bodies.{name}: {e}")))?;
        stack.pop();
        if let Some(d) = body.dimension() {
            if d != self.n {
                return Err(cfg_err(format!(
                    "bodies.{name}: body lives in dimension {d}, config has n = {}",
                    self.n
                )));
            }
        }
        built.insert(name.to_string(), body.clone());
        Ok(body)
    }

    pub fn policy(&self) -> TolerancePolicy {
        self.tolerance.policy()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_grammar() {
        let text = r#"{
            "n": 3,
            "bodies": {
                "B": {"ball": {"r": 1.0}},
                "E": {"ellipsoid": {"axes": [1, 1, 2]}},
                "P": {"lpball": {"p": 3, "s": 1}},
                "U": {"bump": {"c0": 1, "terms": [{"c": 0.2, "v": [0, 0, 1], "m": 2}]}},
                "S": {"combine": {"lambda": 1, "K": "E", "mu": 1, "L": "U"}},
                "D": {"dilate": {"lambda": 2, "K": "S"}},
                "I": {"intersection": {"bodies": ["B", "D"], "inner_res": 8}}
            },
            "checks": [{"check": "minkowski_mixed", "bodies": ["E", "B"], "i": 0, "j": 1}],
            "tolerance": {"fixed": 1e-6}
        }"#;
        let cfg = SuiteConfig::parse(text).unwrap();
        let bodies = cfg.build_bodies().unwrap();
        assert_eq!(bodies.len(), 7);
        assert_eq!(cfg.policy(), TolerancePolicy::Fixed(1e-6));
        let u = [0.0, 0.0, 1.0];
        assert!((bodies["D"].radial(&u).unwrap() - 2.0 * (2.0 + 1.2)).abs() < 1e-14);
    }

    #[test]
    fn undefined_body_is_named() {
        let text = r#"{"n": 3, "bodies": {"B": {"ball": {"r": 1}}},
            "checks": [{"check": "bm_corollary", "bodies": ["B", "Q"]}]}"#;
        let err = SuiteConfig::parse(text).unwrap_err();
        assert!(err.0.contains("\"Q\""), "{err}");
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = SuiteConfig::parse("{\n  \"n\": 3,\n  \"bodies\": {\"B\": {\"ball\": {\"radius\": 1}}}\n}").unwrap_err();
        assert!(err.0.contains("line 3"), "{err}");
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SuiteConfig::parse(r#"{"n": 3, "resolution": {"outer": 2, "inner": 8}}"#).is_err());
        assert!(SuiteConfig::parse(r#"{"n": 2}"#).is_err());
        assert!(SuiteConfig::parse(r#"{"n": 3, "checks": [{"check": "nope", "bodies": []}]}"#).is_err());
        let cyclic = r#"{"n": 3, "bodies": {"A": {"dilate": {"lambda": 2, "K": "C"}},
            "C": {"dilate": {"lambda": 2, "K": "A"}}}}"#;
        assert!(SuiteConfig::parse(cyclic).unwrap().build_bodies().is_err());
        let wrong_dim = r#"{"n": 3, "bodies": {"E": {"ellipsoid": {"axes": [1, 1]}}}}"#;
        assert!(SuiteConfig::parse(wrong_dim).unwrap().build_bodies().is_err());
    }

    #[test]
    fn builtins_load() {
        for (name, _) in BUILTINS {
            let cfg = SuiteConfig::load(&format!("builtin:{name}")).unwrap();
            cfg.build_bodies().unwrap();
        }
        assert!(SuiteConfig::load("builtin:missing").is_err());
    }
}
