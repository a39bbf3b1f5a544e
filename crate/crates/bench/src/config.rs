//! Line-oriented `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use abbflow::boundary::{HalfwayScheme, Interpolation, Reflection};
use abbflow::collision::{quartic_s_q, quartic_s_x, CollisionModel, PhysicsKind, RelaxationRates};
use abbflow::solver::arnoldi::ArnoldiOptions;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key `{key}` (first set on line {first})")]
    Duplicate { key: String, first: usize, line: usize },
    #[error("line {line}: unknown key `{key}` for experiment `{experiment}`")]
    UnknownKey {
        key: String,
        experiment: String,
        line: usize,
    },
    #[error("missing required key `{key}`")]
    Missing { key: String },
    #[error("line {line}: `{key}` expects {expected}, got `{value}`")]
    Type {
        key: String,
        expected: String,
        value: String,
        line: usize,
    },
    #[error("line {line}: `{key}` = {value} is out of range: {reason}")]
    Range {
        key: String,
        value: String,
        reason: String,
        line: usize,
    },
    #[error("config describes experiment `{found}`, but `{expected}` was requested")]
    WrongExperiment { found: String, expected: String },
}

pub type Result<T, E = ConfigError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    HeatSquare,
    DiscModes,
    Poiseuille,
    Analyze,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::HeatSquare,
        Experiment::DiscModes,
        Experiment::Poiseuille,
        Experiment::Analyze,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::HeatSquare => "heat-square",
            Experiment::DiscModes => "disc-modes",
            Experiment::Poiseuille => "poiseuille",
            Experiment::Analyze => "analyze",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("one of {}", names(Experiment::ALL.map(Experiment::name))))
    }
}

fn names<const N: usize>(v: [&str; N]) -> String {
    v.map(|s| format!("`{s}`")).join(", ")
}

/// Collision model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub kind: PhysicsKind,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    /// `s_j` is only meaningful for the thermal model.
    pub rates: RelaxationRates,
}

impl ModelConfig {
    pub fn build(&self) -> abbflow::Result<CollisionModel> {
        CollisionModel::new(self.kind, self.alpha, self.beta, self.rates, self.lambda)
    }
}

/// Eigensolver settings shared by the eigenmode experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenConfig {
    pub modes: usize,
    pub subspace: usize,
    /// Arnoldi runs on `A^power`.
    pub power: usize,
    pub max_restarts: usize,
    pub tolerance: f64,
}

impl EigenConfig {
    pub fn arnoldi(&self, seed: u64) -> ArnoldiOptions {
        ArnoldiOptions {
            subspace: self.subspace,
            max_restarts: self.max_restarts,
            tolerance: self.tolerance,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquareBoundary {
    /// Homogeneous anti bounce back on all four sides.
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatSquareConfig {
    pub nx: usize,
    pub ny: usize,
    pub boundary: SquareBoundary,
    pub model: ModelConfig,
    pub eigen: EigenConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscConfig {
    pub nx: usize,
    pub ny: usize,
    pub radius: f64,
    pub center: Option<[f64; 2]>,
    pub interpolation: Interpolation,
    pub reflection: Reflection,
    pub model: ModelConfig,
    pub eigen: EigenConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoiseuilleConfig {
    pub nx: usize,
    pub ny: usize,
    /// Rule on the inlet and outlet.
    pub scheme: HalfwayScheme,
    pub p0: f64,
    pub max_steps: u64,
    pub check_interval: u64,
    /// Converged when the largest one-step change is below `tolerance * max|f|`.
    pub tolerance: f64,
    /// Rerun for as many steps again and compare the metrics.
    pub verify_doubling: bool,
    /// Rows next to the inlet written to the `phi_y` field file.
    pub phi_rows: usize,
    pub model: ModelConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeConfig {
    pub scheme: HalfwayScheme,
    pub model: ModelConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentConfig {
    HeatSquare(HeatSquareConfig),
    DiscModes(DiscConfig),
    Poiseuille(PoiseuilleConfig),
    Analyze(AnalyzeConfig),
}

impl ExperimentConfig {
    pub fn experiment(&self) -> Experiment {
        match self {
            ExperimentConfig::HeatSquare(_) => Experiment::HeatSquare,
            ExperimentConfig::DiscModes(_) => Experiment::DiscModes,
            ExperimentConfig::Poiseuille(_) => Experiment::Poiseuille,
            ExperimentConfig::Analyze(_) => Experiment::Analyze,
        }
    }
}

/// A parsed configuration together with its exact source text.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: ExperimentConfig,
    pub source: String,
}

pub fn parse_config(path: &Path) -> Result<ParsedConfig> {
    let source = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let config = parse_config_str(&source)?;
    Ok(ParsedConfig { config, source })
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

struct Entries {
    map: BTreeMap<String, Entry>,
}

const MODEL_KEYS: [&str; 8] = ["alpha", "beta", "lambda", "s_j", "s_e", "s_x", "s_q", "s_d"];
const EIGEN_KEYS: [&str; 5] = ["modes", "subspace", "power", "max_restarts", "tolerance"];

fn allowed_keys(e: Experiment) -> Vec<&'static str> {
    let mut k = vec!["experiment"];
    k.extend(MODEL_KEYS);
    match e {
        Experiment::HeatSquare => {
            k.extend(["nx", "ny", "boundary"]);
            k.extend(EIGEN_KEYS);
        }
        Experiment::DiscModes => {
            k.extend([
                "nx",
                "ny",
                "radius",
                "center_x",
                "center_y",
                "interpolation",
                "reflection",
            ]);
            k.extend(EIGEN_KEYS);
        }
        Experiment::Poiseuille => k.extend([
            "nx",
            "ny",
            "scheme",
            "p0",
            "max_steps",
            "check_interval",
            "tolerance",
            "verify_doubling",
            "phi_rows",
        ]),
        Experiment::Analyze => k.extend(["model", "scheme"]),
    }
    k
}

/// Parses configuration text; every experiment needs `experiment = <name>`.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut map: BTreeMap<String, Entry> = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: raw.trim().to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax {
                line,
                text: raw.trim().to_string(),
            });
        }
        if let Some(prev) = map.get(key) {
            return Err(ConfigError::Duplicate {
                key: key.to_string(),
                first: prev.line,
                line,
            });
        }
        map.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }
    let e = Entries { map };
    let experiment: Experiment = e.required("experiment")?;
    let allowed = allowed_keys(experiment);
    if let Some((key, entry)) = e.map.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(ConfigError::UnknownKey {
            key: key.clone(),
            experiment: experiment.to_string(),
            line: entry.line,
        });
    }
    Ok(match experiment {
        Experiment::HeatSquare => {
            let model = e.model(PhysicsKind::Thermal)?;
            ExperimentConfig::HeatSquare(HeatSquareConfig {
                nx: e.size("nx")?,
                ny: e.size("ny")?,
                boundary: e.choice(
                    "boundary",
                    &[
                        ("dirichlet", SquareBoundary::Dirichlet),
                        ("periodic", SquareBoundary::Periodic),
                    ],
                )?,
                model,
                eigen: e.eigen()?,
            })
        }
        Experiment::DiscModes => {
            let model = e.model(PhysicsKind::Acoustic)?;
            let center = match (e.optional::<f64>("center_x")?, e.optional::<f64>("center_y")?) {
                (Some(x), Some(y)) => Some([x, y]),
                (None, None) => None,
                (Some(_), None) => return Err(ConfigError::Missing { key: "center_y".into() }),
                (None, Some(_)) => return Err(ConfigError::Missing { key: "center_x".into() }),
            };
            ExperimentConfig::DiscModes(DiscConfig {
                nx: e.size("nx")?,
                ny: e.size("ny")?,
                radius: e.positive("radius")?,
                center,
                interpolation: e.choice(
                    "interpolation",
                    &[
                        ("linear", Interpolation::Linear),
                        ("quadratic", Interpolation::Quadratic),
                    ],
                )?,
                reflection: e.choice(
                    "reflection",
                    &[("abb", Reflection::AntiBounce), ("bb", Reflection::Bounce)],
                )?,
                model,
                eigen: e.eigen()?,
            })
        }
        Experiment::Poiseuille => {
            let model = e.model(PhysicsKind::Acoustic)?;
            ExperimentConfig::Poiseuille(PoiseuilleConfig {
                nx: e.size("nx")?,
                ny: e.size("ny")?,
                scheme: e.choice(
                    "scheme",
                    &[
                        ("abb", HalfwayScheme::AntiBounceBack),
                        ("pt", HalfwayScheme::PressureTangential),
                        ("mixed", HalfwayScheme::MixedBounceBack),
                    ],
                )?,
                p0: e.positive("p0")?,
                max_steps: e.optional("max_steps")?.unwrap_or(2_000_000),
                check_interval: e.nonzero_or("check_interval", 1000)?,
                tolerance: e.optional_positive("tolerance")?.unwrap_or(1e-13),
                verify_doubling: e.optional("verify_doubling")?.unwrap_or(false),
                phi_rows: e.optional("phi_rows")?.unwrap_or(4),
                model,
            })
        }
        Experiment::Analyze => {
            let kind = e.choice(
                "model",
                &[("thermal", PhysicsKind::Thermal), ("acoustic", PhysicsKind::Acoustic)],
            )?;
            ExperimentConfig::Analyze(AnalyzeConfig {
                scheme: e.choice(
                    "scheme",
                    &[
                        ("bb", HalfwayScheme::BounceBack),
                        ("abb", HalfwayScheme::AntiBounceBack),
                        ("mixed", HalfwayScheme::MixedBounceBack),
                        ("pt", HalfwayScheme::PressureTangential),
                    ],
                )?,
                model: e.model(kind)?,
            })
        }
    })
}

impl Entries {
    fn typed<T: FromStr>(&self, key: &str, entry: &Entry, expected: &str) -> Result<T> {
        entry.value.parse().map_err(|_| ConfigError::Type {
            key: key.to_string(),
            expected: expected.to_string(),
            value: entry.value.clone(),
            line: entry.line,
        })
    }

    fn optional<T: FromStr + Described>(&self, key: &str) -> Result<Option<T>> {
        self.map
            .get(key)
            .map(|entry| self.typed(key, entry, T::DESCRIPTION))
            .transpose()
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let entry = self
            .map
            .get(key)
            .ok_or_else(|| ConfigError::Missing { key: key.into() })?;
        entry.value.parse().map_err(|err: T::Err| ConfigError::Type {
            key: key.to_string(),
            expected: err.to_string(),
            value: entry.value.clone(),
            line: entry.line,
        })
    }

    fn range_error(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        let entry = &self.map[key];
        ConfigError::Range {
            key: key.to_string(),
            value: entry.value.clone(),
            reason: reason.into(),
            line: entry.line,
        }
    }

    fn float(&self, key: &str) -> Result<f64> {
        let entry = self
            .map
            .get(key)
            .ok_or_else(|| ConfigError::Missing { key: key.into() })?;
        let v: f64 = self.typed(key, entry, "a number")?;
        if !v.is_finite() {
            return Err(self.range_error(key, "must be finite"));
        }
        Ok(v)
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v = self.float(key)?;
        if v <= 0.0 {
            return Err(self.range_error(key, "must be positive"));
        }
        Ok(v)
    }

    fn optional_positive(&self, key: &str) -> Result<Option<f64>> {
        self.map.contains_key(key).then(|| self.positive(key)).transpose()
    }

    fn size(&self, key: &str) -> Result<usize> {
        let entry = self
            .map
            .get(key)
            .ok_or_else(|| ConfigError::Missing { key: key.into() })?;
        let v: usize = self.typed(key, entry, "a non-negative integer")?;
        if v == 0 {
            return Err(self.range_error(key, "must be at least 1"));
        }
        Ok(v)
    }

    fn nonzero_or<T: FromStr + Described + Default + PartialEq>(&self, key: &str, default: T) -> Result<T> {
        match self.optional::<T>(key)? {
            None => Ok(default),
            Some(v) if v == T::default() => Err(self.range_error(key, "must be at least 1")),
            Some(v) => Ok(v),
        }
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<T> {
        let entry = self
            .map
            .get(key)
            .ok_or_else(|| ConfigError::Missing { key: key.into() })?;
        options
            .iter()
            .find(|(name, _)| *name == entry.value)
            .map(|(_, v)| *v)
            .ok_or_else(|| ConfigError::Type {
                key: key.to_string(),
                expected: format!(
                    "one of {}",
                    options
                        .iter()
                        .map(|(n, _)| format!("`{n}`"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
                value: entry.value.clone(),
                line: entry.line,
            })
    }

    /// A relaxation rate; `quartic` is accepted for `s_x` and `s_q`.
    fn rate(&self, key: &str) -> Result<f64> {
        let entry = self
            .map
            .get(key)
            .ok_or_else(|| ConfigError::Missing { key: key.into() })?;
        let v = match (key, entry.value.as_str()) {
            ("s_x", "quartic") => quartic_s_x(),
            ("s_q", "quartic") => quartic_s_q(),
            _ => self.float(key)?,
        };
        if !(v > 0.0 && v < 2.0) {
            return Err(self.range_error(key, "relaxation rates must lie in the stability interval (0, 2)"));
        }
        Ok(v)
    }

    fn model(&self, kind: PhysicsKind) -> Result<ModelConfig> {
        let s_j = match kind {
            PhysicsKind::Thermal => self.rate("s_j")?,
            PhysicsKind::Acoustic => {
                if let Some(entry) = self.map.get("s_j") {
                    return Err(ConfigError::Range {
                        key: "s_j".into(),
                        value: entry.value.clone(),
                        reason: "momentum is conserved by the acoustic model, s_j is not used".into(),
                        line: entry.line,
                    });
                }
                1.0
            }
        };
        let rates = RelaxationRates {
            s_j,
            s_e: self.rate("s_e")?,
            s_x: self.rate("s_x")?,
            s_q: self.rate("s_q")?,
            s_d: self.rate("s_d")?,
        };
        let lambda = self.optional_positive("lambda")?.unwrap_or(1.0);
        Ok(ModelConfig {
            kind,
            alpha: self.float("alpha")?,
            beta: self.float("beta")?,
            lambda,
            rates,
        })
    }

    fn eigen(&self) -> Result<EigenConfig> {
        let modes = self.size("modes")?;
        let subspace = self.nonzero_or("subspace", (2 * modes + 1).max(20))?;
        if subspace < modes + 2 {
            return Err(self.range_error("subspace", format!("must exceed modes + 1 = {}", modes + 1)));
        }
        Ok(EigenConfig {
            modes,
            subspace,
            power: self.nonzero_or("power", 1)?,
            max_restarts: self.nonzero_or("max_restarts", 300)?,
            tolerance: self.optional_positive("tolerance")?.unwrap_or(1e-11),
        })
    }
}

/// Type names used in error messages.
trait Described {
    const DESCRIPTION: &'static str;
}

impl Described for f64 {
    const DESCRIPTION: &'static str = "a number";
}

impl Described for usize {
    const DESCRIPTION: &'static str = "a non-negative integer";
}

impl Described for u64 {
    const DESCRIPTION: &'static str = "a non-negative integer";
}

impl Described for bool {
    const DESCRIPTION: &'static str = "`true` or `false`";
}

#[cfg(test)]
mod tests {
    use super::*;

    const POISEUILLE: &str = "\
experiment = poiseuille
# channel
nx = 20
ny = 40
scheme = abb
p0 = 0.001
alpha = -2
beta = 1
s_e = 1.3
s_x = quartic
s_q = quartic
s_d = 1.3
";

    #[test]
    fn minimal_poiseuille() {
        let ExperimentConfig::Poiseuille(c) = parse_config_str(POISEUILLE).unwrap() else {
            panic!("wrong experiment");
        };
        assert_eq!((c.nx, c.ny), (20, 40));
        assert_eq!(c.scheme, HalfwayScheme::AntiBounceBack);
        assert_eq!(c.model.rates.s_x, quartic_s_x());
        assert_eq!(c.tolerance, 1e-13);
        assert!(!c.verify_doubling);
    }

    #[test]
    fn rate_outside_stability_interval() {
        let text = POISEUILLE.replace("s_x = quartic", "s_x = 2.5");
        let err = parse_config_str(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Range { line: 10, .. }), "{err}");
        assert!(err.to_string().contains("(0, 2)"));
    }

    #[test]
    fn duplicate_cites_both_lines() {
        let text = format!("{POISEUILLE}nx = 40\n");
        let err = parse_config_str(&text).unwrap_err();
        assert!(
            matches!(err, ConfigError::Duplicate { first: 3, line: 13, .. }),
            "{err}"
        );
        let msg = err.to_string();
        assert!(msg.contains("line 13") && msg.contains("line 3"));
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{POISEUILLE}radius = 3\n");
        assert!(matches!(
            parse_config_str(&text),
            Err(ConfigError::UnknownKey { line: 13, .. })
        ));
    }

    #[test]
    fn missing_rate_rejected() {
        let text = POISEUILLE.replace("s_d = 1.3\n", "");
        assert!(matches!(parse_config_str(&text), Err(ConfigError::Missing { key }) if key == "s_d"));
    }

    #[test]
    fn acoustic_rejects_s_j() {
        let text = format!("{POISEUILLE}s_j = 1.2\n");
        assert!(matches!(
            parse_config_str(&text),
            Err(ConfigError::Range { line: 13, .. })
        ));
    }

    #[test]
    fn type_mismatch_has_line() {
        let text = POISEUILLE.replace("nx = 20", "nx = twenty");
        let err = parse_config_str(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Type { line: 3, .. }), "{err}");
    }

    #[test]
    fn syntax_error_has_line() {
        let text = POISEUILLE.replace("ny = 40", "ny 40");
        assert!(matches!(
            parse_config_str(&text),
            Err(ConfigError::Syntax { line: 4, .. })
        ));
    }

    #[test]
    fn thermal_requires_s_j() {
        let text = "experiment = heat-square\nnx = 8\nny = 8\nboundary = dirichlet\nmodes = 4\n\
                    alpha = -2\nbeta = 1\ns_e = 1.3\ns_x = quartic\ns_q = quartic\ns_d = 1.7\n";
        assert!(matches!(parse_config_str(text), Err(ConfigError::Missing { key }) if key == "s_j"));
        let ExperimentConfig::HeatSquare(c) = parse_config_str(&format!("{text}s_j = 1.2\n")).unwrap() else {
            panic!("wrong experiment");
        };
        assert_eq!(c.eigen.subspace, 20);
        assert_eq!(c.boundary, SquareBoundary::Dirichlet);
    }

    #[test]
    fn unknown_experiment() {
        assert!(matches!(
            parse_config_str("experiment = stokes\n"),
            Err(ConfigError::Type { line: 1, .. })
        ));
    }
}
