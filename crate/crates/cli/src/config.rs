//! Experiment configuration: a TOML file with one table per command.
//!
//! Every key has a default, so an empty file (or no file) is valid. Command
//! line flags override file values.

use std::fmt;
use std::path::{Path, PathBuf};

use lastiter::{InterpolationClass, MethodId, PepObjective};
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("{field}: {msg}"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Config {
    pub simulate: InstanceConfig,
    pub potential_check: InstanceConfig,
    pub pep_sweep: SweepConfig,
    pub reconstruct: PepConfig,
    pub export_sdpa: PepConfig,
    pub eag_demo: EagConfig,
}

/// Seeded operator instances and the method run on them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct InstanceConfig {
    /// `random` (monotone affine), `rotation` or `zero`.
    pub operator: String,
    pub method: String,
    pub dim: usize,
    pub lipschitz: f64,
    /// Weight of the skew-symmetric part for random operators.
    pub skew: f64,
    /// Stepsize; `0` selects `1/(3L)`, or `1/(4L)` for projected methods.
    pub gamma: f64,
    pub iterations: usize,
    pub seed: u64,
    pub seeds: u64,
    /// `none`, `ball` (radius `radius` about 0) or `box` (`[−radius, radius]^d`).
    pub set: String,
    pub radius: f64,
    /// Standard deviation of `x^0 − x*` per coordinate.
    pub init_scale: f64,
    pub out_dir: PathBuf,
    /// Write trajectory and metric CSVs for each instance.
    pub per_instance: bool,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        Self {
            operator: "random".into(),
            method: "peg".into(),
            dim: 10,
            lipschitz: 1.0,
            skew: 0.5,
            gamma: 0.0,
            iterations: 100,
            seed: 0,
            seeds: 200,
            set: "none".into(),
            radius: 1.0,
            init_scale: 1.0,
            out_dir: "out".into(),
            per_instance: true,
        }
    }
}

impl InstanceConfig {
    pub fn method_id(&self, section: &str) -> Result<MethodId, ConfigError> {
        self.method.parse().map_err(|e| bad(&format!("{section}.method"), e))
    }

    pub fn effective_gamma(&self, method: MethodId) -> f64 {
        if self.gamma != 0.0 {
            self.gamma
        } else if method.is_projected() {
            1.0 / (4.0 * self.lipschitz)
        } else {
            1.0 / (3.0 * self.lipschitz)
        }
    }

    pub fn validate(&self, section: &str) -> Result<(), ConfigError> {
        let f = |k: &str| format!("{section}.{k}");
        let method = self.method_id(section)?;
        if !matches!(self.operator.as_str(), "random" | "rotation" | "zero") {
            return Err(bad(&f("operator"), format!("expected random, rotation or zero, got '{}'", self.operator)));
        }
        if self.dim == 0 {
            return Err(bad(&f("dim"), "must be at least 1"));
        }
        if self.operator == "rotation" && self.dim % 2 != 0 {
            return Err(bad(&f("dim"), "rotation operators need an even dimension"));
        }
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return Err(bad(&f("lipschitz"), format!("must be positive, got {}", self.lipschitz)));
        }
        if !(0.0..=1.0).contains(&self.skew) {
            return Err(bad(&f("skew"), format!("must lie in [0, 1], got {}", self.skew)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(bad(&f("gamma"), format!("must be positive (0 selects the theorem step), got {}", self.gamma)));
        }
        if self.iterations == 0 {
            return Err(bad(&f("iterations"), "must be at least 1"));
        }
        if self.seeds == 0 {
            return Err(bad(&f("seeds"), "must be at least 1"));
        }
        match self.set.as_str() {
            "none" => {}
            "ball" | "box" => {
                if !method.is_projected() {
                    return Err(bad(&f("set"), format!("a constrained set needs a projected method, got {method}")));
                }
                if !(self.radius > 0.0) {
                    return Err(bad(&f("radius"), format!("must be positive, got {}", self.radius)));
                }
            }
            other => return Err(bad(&f("set"), format!("expected none, ball or box, got '{other}'"))),
        }
        if !(self.init_scale > 0.0) {
            return Err(bad(&f("init-scale"), format!("must be positive, got {}", self.init_scale)));
        }
        Ok(())
    }
}

/// PEP value sweep. Rows are the product of methods, gammas, ns, distances
/// and objectives, in that nesting order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SweepConfig {
    pub methods: Vec<String>,
    /// Stepsizes as multiples of `1/L`.
    pub gammas: Vec<f64>,
    pub lipschitz: f64,
    pub ns: Vec<usize>,
    /// Distance-t filters; `0` keeps every constraint.
    pub distances: Vec<usize>,
    /// `monotone` or `cocoercive`.
    pub class: String,
    /// `last`, `delta`, `delta-tilde` or `residual`; `last` maps to the
    /// residual objective for projected methods.
    pub objectives: Vec<String>,
    pub tol: f64,
    pub max_iter: usize,
    pub certify: bool,
    pub out: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            methods: vec!["peg".into(), "og".into()],
            gammas: vec![1.0 / 3.0],
            lipschitz: 1.0,
            ns: vec![1, 2, 4, 8],
            distances: vec![0],
            class: "monotone".into(),
            objectives: vec!["last".into()],
            tol: 1e-6,
            max_iter: 200_000,
            certify: true,
            out: "sweep.csv".into(),
        }
    }
}

pub fn parse_class(s: &str, l: f64, field: &str) -> Result<InterpolationClass, ConfigError> {
    match s {
        "monotone" | "monotone-lipschitz" => Ok(InterpolationClass::MonotoneLipschitz(l)),
        "cocoercive" => Ok(InterpolationClass::Cocoercive(l)),
        other => Err(bad(field, format!("expected monotone or cocoercive, got '{other}'"))),
    }
}

pub fn parse_objective(s: &str, method: MethodId, field: &str) -> Result<PepObjective, ConfigError> {
    match s {
        "last" if method.is_projected() => Ok(PepObjective::LastResidualSq),
        "last" => Ok(PepObjective::LastNormSq),
        "delta" => Ok(PepObjective::DeltaNormSq),
        "delta-tilde" => Ok(PepObjective::DeltaNormSqTilde),
        "residual" => Ok(PepObjective::LastResidualSq),
        other => Err(bad(field, format!("expected last, delta, delta-tilde or residual, got '{other}'"))),
    }
}

fn check_tol(tol: f64, field: &str) -> Result<(), ConfigError> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(bad(field, format!("must lie in (0, 1), got {tol}")))
    }
}

fn check_max_iter(n: usize, field: &str) -> Result<(), ConfigError> {
    if n == 0 {
        Err(bad(field, "must be at least 1"))
    } else {
        Ok(())
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut methods = Vec::new();
        for m in &self.methods {
            methods.push(m.parse::<MethodId>().map_err(|e| bad("pep-sweep.methods", e))?);
        }
        if methods.is_empty() {
            return Err(bad("pep-sweep.methods", "must not be empty"));
        }
        if self.gammas.is_empty() || self.gammas.iter().any(|g| !(*g > 0.0)) {
            return Err(bad("pep-sweep.gammas", format!("must be a nonempty list of positive values, got {:?}", self.gammas)));
        }
        if !(self.lipschitz > 0.0) {
            return Err(bad("pep-sweep.lipschitz", format!("must be positive, got {}", self.lipschitz)));
        }
        if self.ns.is_empty() || self.ns.contains(&0) {
            return Err(bad("pep-sweep.ns", format!("must be a nonempty list of positive values, got {:?}", self.ns)));
        }
        if self.distances.is_empty() {
            return Err(bad("pep-sweep.distances", "must not be empty (use 0 for the full problem)"));
        }
        parse_class(&self.class, self.lipschitz, "pep-sweep.class")?;
        if self.objectives.is_empty() {
            return Err(bad("pep-sweep.objectives", "must not be empty"));
        }
        for o in &self.objectives {
            for &m in &methods {
                parse_objective(o, m, "pep-sweep.objectives")?;
            }
        }
        check_tol(self.tol, "pep-sweep.tol")?;
        check_max_iter(self.max_iter, "pep-sweep.max-iter")
    }
}

/// A single PEP instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct PepConfig {
    pub method: String,
    /// Stepsize as a multiple of `1/L`.
    pub gamma: f64,
    pub lipschitz: f64,
    pub n: usize,
    pub distance: usize,
    pub class: String,
    pub objective: String,
    pub tol: f64,
    pub max_iter: usize,
    pub out: PathBuf,
}

impl Default for PepConfig {
    fn default() -> Self {
        Self {
            method: "peg".into(),
            gamma: 1.0 / 3.0,
            lipschitz: 1.0,
            n: 2,
            distance: 0,
            class: "monotone".into(),
            objective: "last".into(),
            tol: 1e-8,
            max_iter: 200_000,
            out: "pep.dat-s".into(),
        }
    }
}

impl PepConfig {
    pub fn spec(&self, section: &str) -> Result<lastiter::PepSpec, ConfigError> {
        let f = |k: &str| format!("{section}.{k}");
        let method: MethodId = self.method.parse().map_err(|e| bad(&f("method"), e))?;
        if !(self.gamma > 0.0) {
            return Err(bad(&f("gamma"), format!("must be positive, got {}", self.gamma)));
        }
        if !(self.lipschitz > 0.0) {
            return Err(bad(&f("lipschitz"), format!("must be positive, got {}", self.lipschitz)));
        }
        if self.n == 0 {
            return Err(bad(&f("n"), "must be at least 1"));
        }
        check_tol(self.tol, &f("tol"))?;
        check_max_iter(self.max_iter, &f("max-iter"))?;
        let class = parse_class(&self.class, self.lipschitz, &f("class"))?;
        let objective = parse_objective(&self.objective, method, &f("objective"))?;
        let mut spec = lastiter::PepSpec::new(method, self.gamma / self.lipschitz, self.lipschitz, self.n)
            .with_class(class)
            .with_objective(objective);
        if self.distance > 0 {
            spec = spec.with_distance(self.distance);
        }
        spec.validate().map_err(|e| bad(section, e))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct EagConfig {
    /// Start point `offset·(1, 1, 1)`.
    pub init_offset: f64,
    pub gamma: f64,
    pub iterations: usize,
    pub out: PathBuf,
}

impl Default for EagConfig {
    fn default() -> Self {
        Self {
            init_offset: 0.1,
            gamma: 0.1,
            iterations: 2000,
            out: "eag".into(),
        }
    }
}

impl EagConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.gamma > 0.0) {
            return Err(bad("eag-demo.gamma", format!("must be positive, got {}", self.gamma)));
        }
        if self.iterations == 0 {
            return Err(bad("eag-demo.iterations", "must be at least 1"));
        }
        Ok(())
    }
}

impl Default for Config {
    fn default() -> Self {
        Self {
            simulate: InstanceConfig::default(),
            potential_check: InstanceConfig::default(),
            pep_sweep: SweepConfig::default(),
            reconstruct: PepConfig {
                out: "witness.csv".into(),
                ..PepConfig::default()
            },
            export_sdpa: PepConfig::default(),
            eag_demo: EagConfig::default(),
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, ConfigError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    /// Parse errors carry the line, column and offending key from the TOML
    /// parser.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn defaults_toml() -> String {
        let body = toml::to_string_pretty(&Config::default()).expect("defaults serialize");
        format!(
            "# lastiter defaults. simulate.gamma = 0 selects 1/(3L), or 1/(4L) for projected methods.\n\
             # pep-sweep, reconstruct and export-sdpa gammas are multiples of 1/L.\n\n{body}"
        )
    }
}
