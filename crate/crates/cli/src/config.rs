//! Line-based `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use wdlab_core::timestepping::DEFAULT_BLOWUP_THRESHOLD;
use wdlab_core::{Config, Equation, Grid, Kappa, MKind, Series};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid value for `{key}`: {constraint}")]
    Validation { key: String, constraint: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
}

impl ConfigError {
    pub fn kind(&self) -> &'static str {
        match self {
            ConfigError::Parse { .. } => "ParseError",
            ConfigError::Validation { .. } => "ValidationError",
            ConfigError::UnknownKey { .. } => "UnknownKey",
        }
    }

    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Parse { .. } => None,
            ConfigError::Validation { key, .. } | ConfigError::UnknownKey { key, .. } => Some(key),
        }
    }
}

fn invalid(key: &str, constraint: impl Into<String>) -> ConfigError {
    ConfigError::Validation { key: key.to_string(), constraint: constraint.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Equiv,
    HsExact,
    Blowup,
    Converge,
    Dual,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Simulate, Command::Equiv, Command::HsExact, Command::Blowup, Command::Converge, Command::Dual];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Equiv => "equiv",
            Command::HsExact => "hs-exact",
            Command::Blowup => "blowup",
            Command::Converge => "converge",
            Command::Dual => "dual",
        }
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("must be one of simulate, equiv, hs-exact, blowup, converge, dual; got `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquationName {
    BFamily,
    Novikov,
    ChWeakForm,
}

impl EquationName {
    pub fn name(self) -> &'static str {
        match self {
            EquationName::BFamily => "b-family",
            EquationName::Novikov => "novikov",
            EquationName::ChWeakForm => "ch-weak-form",
        }
    }
}

impl FromStr for EquationName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "b-family" => Ok(EquationName::BFamily),
            "novikov" => Ok(EquationName::Novikov),
            "ch-weak-form" => Ok(EquationName::ChWeakForm),
            other => Err(format!("must be one of b-family, novikov, ch-weak-form; got `{other}`")),
        }
    }
}

/// Initial-data designator.
///
/// All presets are trigonometric series in `x/L`:
///
/// - `smooth`: `sin(2πx/L) + 0.5 cos(4πx/L)`
/// - `const:c`
/// - `trig:c0,a1,b1,a2,b2,...` with `a_k` cosine and `b_k` sine coefficients
/// - `random:K,amp`: `K` modes with coefficients uniform in `±amp/k`, drawn
///   from `seed`
/// - `hs-generic`: velocity with slope `cos(2πx) + 0.5 sin(4πx)`; as a
///   second component, `1.5 + 0.3 sin(2πx)`
/// - `hs-steep`: velocity with slope `6 cos(2πx)`; as a second component, `1`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialData {
    Smooth,
    Constant(f64),
    Trig { mean: f64, coefficients: Vec<f64> },
    Random { modes: usize, amplitude: f64 },
    HsGeneric,
    HsSteep,
}

/// Whether a designator describes the velocity or the second component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Velocity,
    Density,
}

impl InitialData {
    pub fn series(&self, role: Role, seed: u64) -> Series {
        use std::f64::consts::TAU;
        match (self, role) {
            (InitialData::Smooth, _) => Series::smooth(),
            (InitialData::Constant(c), _) => Series::constant(*c),
            (InitialData::Trig { mean, coefficients }, _) => {
                let cos = coefficients.iter().step_by(2).copied().collect();
                let sin = coefficients.iter().skip(1).step_by(2).copied().collect();
                Series { mean: *mean, cos, sin }
            }
            (InitialData::Random { modes, amplitude }, _) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut draw = |k: usize| amplitude * rng.random_range(-1.0..=1.0) / k as f64;
                let mut cos = Vec::with_capacity(*modes);
                let mut sin = Vec::with_capacity(*modes);
                for k in 1..=*modes {
                    cos.push(draw(k));
                    sin.push(draw(k));
                }
                Series { mean: 0.0, cos, sin }
            }
            (InitialData::HsGeneric, Role::Velocity) => {
                Series { mean: 0.0, cos: vec![0.0, -0.5 / (2.0 * TAU)], sin: vec![1.0 / TAU] }
            }
            (InitialData::HsGeneric, Role::Density) => Series { mean: 1.5, cos: vec![], sin: vec![0.3] },
            (InitialData::HsSteep, Role::Velocity) => Series { mean: 0.0, cos: vec![], sin: vec![6.0 / TAU] },
            (InitialData::HsSteep, Role::Density) => Series::constant(1.0),
        }
    }
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Smooth => write!(f, "smooth"),
            InitialData::Constant(c) => write!(f, "const:{c:?}"),
            InitialData::Trig { mean, coefficients } => {
                write!(f, "trig:{mean:?}")?;
                coefficients.iter().try_for_each(|c| write!(f, ",{c:?}"))
            }
            InitialData::Random { modes, amplitude } => write!(f, "random:{modes},{amplitude:?}"),
            InitialData::HsGeneric => write!(f, "hs-generic"),
            InitialData::HsSteep => write!(f, "hs-steep"),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{}` is not finite", s.trim()))
    }
}

impl FromStr for InitialData {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let numbers = || -> Result<Vec<f64>, String> {
            args.ok_or_else(|| format!("`{name}` needs arguments after `:`"))?.split(',').map(parse_f64).collect()
        };
        match (name, args) {
            ("smooth", None) => Ok(InitialData::Smooth),
            ("hs-generic", None) => Ok(InitialData::HsGeneric),
            ("hs-steep", None) => Ok(InitialData::HsSteep),
            ("const", _) => match numbers()?.as_slice() {
                [c] => Ok(InitialData::Constant(*c)),
                _ => Err("const takes exactly one value".into()),
            },
            ("trig", _) => {
                let mut values = numbers()?;
                let mean = values.remove(0);
                Ok(InitialData::Trig { mean, coefficients: values })
            }
            ("random", _) => {
                let parts: Vec<&str> = args.unwrap_or_default().split(',').collect();
                let [modes, amplitude] = parts.as_slice() else {
                    return Err("random takes `modes,amplitude`".into());
                };
                let modes: usize =
                    modes.trim().parse().map_err(|_| format!("`{}` is not a mode count", modes.trim()))?;
                if modes == 0 {
                    return Err("random needs at least one mode".into());
                }
                Ok(InitialData::Random { modes, amplitude: parse_f64(amplitude)? })
            }
            _ => Err(format!(
                "unknown initial data `{s}`; expected smooth, const:c, trig:c0,a1,b1,..., random:K,amp, hs-generic or hs-steep"
            )),
        }
    }
}

impl TryFrom<String> for InitialData {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<InitialData> for String {
    fn from(d: InitialData) -> String {
        d.to_string()
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub equation: EquationName,
    pub mkind: MKind,
    pub b: f64,
    pub kappa: Kappa,
    pub lambda: f64,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub check_times: Vec<f64>,
    pub resolutions: Vec<usize>,
    pub initial: InitialData,
    pub sigma_initial: Option<InitialData>,
    pub tolerance: f64,
    pub horizon: f64,
    pub blowup_threshold: f64,
    pub seed: u64,
    pub output_dir: String,
}

pub const KEYS: [&str; 20] = [
    "command",
    "equation",
    "mkind",
    "b",
    "kappa",
    "lambda",
    "n",
    "L",
    "dt",
    "t_end",
    "snapshot_times",
    "check_times",
    "resolutions",
    "initial",
    "sigma_initial",
    "tolerance",
    "horizon",
    "blowup_threshold",
    "seed",
    "output_dir",
];

impl RunConfig {
    /// Defaults for `command`, before any key is applied.
    pub fn defaults(command: Command) -> Self {
        let tolerance = match command {
            Command::HsExact => 1e-5,
            Command::Dual => 1e-8,
            _ => 1e-7,
        };
        Self {
            command,
            equation: EquationName::BFamily,
            mkind: MKind::Helmholtz,
            b: 2.0,
            kappa: Kappa::Plus,
            lambda: 0.5,
            n: 256,
            length: 1.0,
            dt: 5e-4,
            t_end: 1.0,
            snapshot_times: Vec::new(),
            check_times: vec![0.25, 0.5, 1.0],
            resolutions: vec![64, 128, 256],
            initial: InitialData::Smooth,
            sigma_initial: None,
            tolerance,
            horizon: 2.0,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
            seed: 0,
            output_dir: "output".into(),
        }
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n, self.length).expect("validated grid")
    }

    /// The equation with this config's `λ`.
    pub fn equation_spec(&self) -> Equation {
        let spec = match self.equation {
            EquationName::BFamily => Equation::b_family(self.mkind, self.b, self.kappa, self.lambda),
            EquationName::Novikov => Equation::novikov(self.lambda),
            EquationName::ChWeakForm => Equation::ch_weak_form(self.lambda),
        };
        spec.expect("validated equation")
    }

    /// Snapshot times, defaulting to `[0, t_end]`.
    pub fn resolved_snapshot_times(&self) -> Vec<f64> {
        if self.snapshot_times.is_empty() {
            vec![0.0, self.t_end]
        } else {
            self.snapshot_times.clone()
        }
    }

    pub fn integrator_config(&self) -> Config {
        Config::new(self.dt, self.t_end)
            .with_snapshots(self.resolved_snapshot_times())
            .with_blowup_threshold(self.blowup_threshold)
    }

    pub fn velocity_series(&self) -> Series {
        self.initial.series(Role::Velocity, self.seed)
    }

    pub fn sigma_series(&self) -> Option<Series> {
        self.sigma_initial.as_ref().map(|d| d.series(Role::Density, self.seed))
    }

    fn validate(&self) -> Result<(), ConfigError> {
        Grid::new(self.n, self.length).map_err(|e| {
            let key = if self.n % 2 == 1 || self.n < 16 { "n" } else { "L" };
            invalid(key, format!("{e} (n must be even and >= 16, L positive)"))
        })?;
        if !(self.dt > 0.0) {
            return Err(invalid("dt", "must be > 0"));
        }
        if !(self.t_end > 0.0) {
            return Err(invalid("t_end", "must be > 0"));
        }
        if !(self.lambda >= 0.0) {
            return Err(invalid("lambda", "must be >= 0"));
        }
        let needs_positive_lambda = matches!(self.command, Command::Equiv | Command::Blowup | Command::Converge);
        if needs_positive_lambda && self.lambda <= 0.0 {
            return Err(invalid("lambda", format!("must be > 0 for the {} command", self.command.name())));
        }
        for (key, v) in [("tolerance", self.tolerance), ("horizon", self.horizon), ("blowup_threshold", self.blowup_threshold)] {
            if !(v > 0.0) {
                return Err(invalid(key, "must be > 0"));
            }
        }
        if self.command == Command::Simulate {
            self.integrator_config().validate().map_err(|e| invalid("snapshot_times", e.to_string()))?;
        }
        if self.check_times.is_empty() {
            return Err(invalid("check_times", "must not be empty"));
        }
        for (i, &t) in self.check_times.iter().enumerate() {
            if !(t >= 0.0) || (i > 0 && !(t > self.check_times[i - 1])) {
                return Err(invalid("check_times", "must be non-negative and strictly increasing"));
            }
        }
        let allowed = [64, 128, 256, 512];
        if self.resolutions.is_empty()
            || self.resolutions.iter().any(|n| !allowed.contains(n))
            || self.resolutions.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(invalid("resolutions", "must be a strictly increasing subset of 64, 128, 256, 512"));
        }
        if self.command == Command::HsExact {
            if self.length != 1.0 {
                return Err(invalid("L", "hs-exact runs on the unit circle, L = 1"));
            }
            if self.sigma_initial.is_none() {
                return Err(invalid("sigma_initial", "hs-exact needs a second component"));
            }
        }
        Ok(())
    }

    /// Renders the resolved configuration in the text format.
    pub fn to_config_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("command", self.command.name().into());
        line("equation", self.equation.name().into());
        line("mkind", self.mkind.name().into());
        line("b", format!("{:?}", self.b));
        line("kappa", i8::from(self.kappa).to_string());
        line("lambda", format!("{:?}", self.lambda));
        line("n", self.n.to_string());
        line("L", format!("{:?}", self.length));
        line("dt", format!("{:?}", self.dt));
        line("t_end", format!("{:?}", self.t_end));
        line("snapshot_times", list(&self.snapshot_times));
        line("check_times", list(&self.check_times));
        line("resolutions", self.resolutions.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", "));
        line("initial", self.initial.to_string());
        line("sigma_initial", self.sigma_initial.as_ref().map_or_else(|| "none".into(), |d| d.to_string()));
        line("tolerance", format!("{:?}", self.tolerance));
        line("horizon", format!("{:?}", self.horizon));
        line("blowup_threshold", format!("{:?}", self.blowup_threshold));
        line("seed", self.seed.to_string());
        line("output_dir", self.output_dir.clone());
        out
    }
}

fn scalar<V: FromStr>(key: &str, raw: &str, what: &str) -> Result<V, ConfigError> {
    raw.parse().map_err(|_| invalid(key, format!("`{raw}` is not {what}")))
}

fn real(key: &str, raw: &str) -> Result<f64, ConfigError> {
    parse_f64(raw).map_err(|e| invalid(key, e))
}

fn list<V>(raw: &str, item: impl Fn(&str) -> Result<V, ConfigError>) -> Result<Vec<V>, ConfigError> {
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',').map(|s| item(s.trim())).collect()
}

/// Splits `text` into `key -> (line, value)`, rejecting malformed lines,
/// duplicates and unknown keys.
fn tokenize(text: &str) -> Result<BTreeMap<String, (usize, String)>, ConfigError> {
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Parse { line, reason: format!("expected `key = value`, got `{content}`") });
        };
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Parse { line, reason: format!("malformed key `{key}`") });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.into() });
        }
        if entries.insert(key.to_string(), (line, value.trim().to_string())).is_some() {
            return Err(ConfigError::Parse { line, reason: format!("duplicate key `{key}`") });
        }
    }
    Ok(entries)
}

/// Parses and validates a configuration. `command` must be given either
/// here or by a `command` key; when both are present they must agree.
pub fn parse_config_for(text: &str, command: Option<Command>) -> Result<RunConfig, ConfigError> {
    let entries = tokenize(text)?;
    let from_text = entries
        .get("command")
        .map(|(_, v)| v.parse::<Command>().map_err(|e| invalid("command", e)))
        .transpose()?;
    let command = match (command, from_text) {
        (Some(a), Some(b)) if a != b => {
            return Err(invalid("command", format!("file says `{}` but `{}` was requested", b.name(), a.name())))
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => return Err(invalid("command", "missing")),
    };

    let mut cfg = RunConfig::defaults(command);
    for (key, (_, raw)) in &entries {
        let raw = raw.as_str();
        match key.as_str() {
            "command" => {}
            "equation" => cfg.equation = raw.parse().map_err(|e| invalid(key, e))?,
            "mkind" => cfg.mkind = raw.parse().map_err(|e| invalid(key, e))?,
            "b" => cfg.b = real(key, raw)?,
            "kappa" => {
                let k: i8 = match raw {
                    "+1" | "1" => 1,
                    "-1" => -1,
                    _ => 0,
                };
                cfg.kappa = Kappa::try_from(k).map_err(|_| invalid(key, format!("must be -1 or +1, got `{raw}`")))?;
            }
            "lambda" => cfg.lambda = real(key, raw)?,
            "n" => cfg.n = scalar(key, raw, "a node count")?,
            "L" => cfg.length = real(key, raw)?,
            "dt" => cfg.dt = real(key, raw)?,
            "t_end" => cfg.t_end = real(key, raw)?,
            "snapshot_times" => cfg.snapshot_times = list(raw, |s| real(key, s))?,
            "check_times" => cfg.check_times = list(raw, |s| real(key, s))?,
            "resolutions" => cfg.resolutions = list(raw, |s| scalar(key, s, "a node count"))?,
            "initial" => cfg.initial = raw.parse().map_err(|e| invalid(key, e))?,
            "sigma_initial" => {
                cfg.sigma_initial =
                    if raw == "none" { None } else { Some(raw.parse().map_err(|e| invalid(key, e))?) }
            }
            "tolerance" => cfg.tolerance = real(key, raw)?,
            "horizon" => cfg.horizon = real(key, raw)?,
            "blowup_threshold" => cfg.blowup_threshold = real(key, raw)?,
            "seed" => cfg.seed = scalar(key, raw, "a non-negative integer")?,
            "output_dir" => {
                if raw.is_empty() {
                    return Err(invalid(key, "must not be empty"));
                }
                cfg.output_dir = raw.into()
            }
            _ => unreachable!("filtered by tokenize"),
        }
    }
    if command == Command::HsExact && cfg.equation == EquationName::BFamily && !entries.contains_key("mkind") {
        cfg.mkind = MKind::NegLaplacian;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses a configuration that names its own `command`.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_for(text, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(body: &str) -> Result<RunConfig, ConfigError> {
        parse_config(&format!("command = simulate\n{body}"))
    }

    #[test]
    fn lambda_value() {
        assert_eq!(parse("lambda = 0.5").unwrap().lambda, 0.5);
    }

    #[test]
    fn kappa_must_be_sign() {
        let err = parse("kappa = 2").unwrap_err();
        assert!(matches!(&err, ConfigError::Validation { key, constraint } if key == "kappa" && constraint.contains("-1 or +1")));
        assert_eq!(parse("kappa = -1").unwrap().kappa, Kappa::Minus);
    }

    #[test]
    fn grid_size_rules() {
        for bad in ["n = 15", "n = 8", "n = 101"] {
            let err = parse(bad).unwrap_err();
            assert_eq!(err.key(), Some("n"), "{bad}");
            assert_eq!(err.kind(), "ValidationError");
        }
        assert_eq!(parse("n = 100").unwrap().n, 100);
    }

    #[test]
    fn malformed_and_unknown() {
        assert!(matches!(parse("lambda 0.5"), Err(ConfigError::Parse { line: 2, .. })));
        assert!(matches!(parse("gamma = 1"), Err(ConfigError::UnknownKey { line: 2, .. })));
        assert!(matches!(parse("b = 1\nb = 2"), Err(ConfigError::Parse { .. })));
        assert!(matches!(parse("lambda = fast"), Err(ConfigError::Validation { .. })));
        assert!(parse_config("lambda = 1").is_err());
    }

    #[test]
    fn comments_and_lists() {
        let cfg = parse("# header\nt_end = 1 # trailing\nsnapshot_times = 0, 0.5, 1.0\n\n").unwrap();
        assert_eq!(cfg.snapshot_times, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn snapshot_times_on_step_grid() {
        let err = parse("dt = 0.1\nsnapshot_times = 0.05").unwrap_err();
        assert_eq!(err.key(), Some("snapshot_times"));
    }

    #[test]
    fn command_mismatch() {
        assert!(parse_config_for("command = equiv", Some(Command::Dual)).is_err());
        assert_eq!(parse_config_for("", Some(Command::Dual)).unwrap().command, Command::Dual);
    }

    #[test]
    fn designators_round_trip() {
        for s in ["smooth", "const:1.5", "trig:0.0,1.0,-2.0,0.5", "random:4,0.3", "hs-generic", "hs-steep"] {
            let d: InitialData = s.parse().unwrap();
            assert_eq!(d.to_string().parse::<InitialData>().unwrap(), d);
        }
        assert!("trig".parse::<InitialData>().is_err());
        assert!("random:0,1".parse::<InitialData>().is_err());
        assert!("wave".parse::<InitialData>().is_err());
    }

    #[test]
    fn trig_coefficients() {
        let s = InitialData::Trig { mean: 1.0, coefficients: vec![2.0, 3.0, 4.0] }.series(Role::Velocity, 0);
        assert_eq!(s.cos, vec![2.0, 4.0]);
        assert_eq!(s.sin, vec![3.0]);
    }

    #[test]
    fn random_is_seeded() {
        let d = InitialData::Random { modes: 3, amplitude: 1.0 };
        assert_eq!(d.series(Role::Velocity, 7), d.series(Role::Velocity, 7));
        assert_ne!(d.series(Role::Velocity, 7), d.series(Role::Velocity, 8));
    }

    #[test]
    fn text_round_trip() {
        let cfg = parse("lambda = 0.3\nkappa = -1\ninitial = trig:0.1,0.2,0.3\nsigma_initial = const:0.3\nseed = 9")
            .unwrap();
        assert_eq!(parse_config(&cfg.to_config_text()).unwrap(), cfg);
    }
}
