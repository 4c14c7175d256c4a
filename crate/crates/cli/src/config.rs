//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! [section]
//! key = value
//! ```
//!
//! Unknown sections and keys are rejected, as are duplicates. Printing a
//! parsed config gives a canonical form with every default filled in;
//! parsing that form and printing again reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    FunctionalGamma,
    SdeGamma,
    OracleCompare,
    DensityScan,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::FunctionalGamma,
        ExperimentKind::SdeGamma,
        ExperimentKind::OracleCompare,
        ExperimentKind::DensityScan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::FunctionalGamma => "functional-gamma",
            ExperimentKind::SdeGamma => "sde-gamma",
            ExperimentKind::OracleCompare => "oracle-compare",
            ExperimentKind::DensityScan => "density-scan",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    CompoundPoisson { lambda: f64, low: f64, high: f64, gap: f64 },
    TruncatedPower { beta: f64, epsilon_cut: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecConfig {
    pub family: Family,
    /// Number of independent copies placed on the coordinate axes.
    pub axes: usize,
    pub compensated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phi {
    Identity,
    Sine,
    Affine { a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalConfig {
    TerminalValue { t: f64 },
    StochasticIntegralPhi { t: f64, phi: Phi },
    DoleansPair { t: f64 },
    RunningSup { t: f64 },
    DegenerateSdeZ { t: f64, start: [f64; 3] },
}

impl FunctionalConfig {
    pub const NAMES: [&'static str; 5] =
        ["terminal_value", "stochastic_integral_phi", "doleans_pair", "running_sup", "degenerate_sde_z"];

    pub fn name(&self) -> &'static str {
        match self {
            FunctionalConfig::TerminalValue { .. } => "terminal_value",
            FunctionalConfig::StochasticIntegralPhi { .. } => "stochastic_integral_phi",
            FunctionalConfig::DoleansPair { .. } => "doleans_pair",
            FunctionalConfig::RunningSup { .. } => "running_sup",
            FunctionalConfig::DegenerateSdeZ { .. } => "degenerate_sde_z",
        }
    }

    pub fn mark_dim(&self) -> usize {
        match self {
            FunctionalConfig::DegenerateSdeZ { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    LinearScalar { a: f64, x0: f64 },
    Linear { matrix: [f64; 4], x0: [f64; 2] },
    DegenerateZ { start: [f64; 3] },
}

impl ModelConfig {
    pub const NAMES: [&'static str; 3] = ["linear_scalar", "linear", "degenerate_z"];

    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::LinearScalar { .. } => "linear_scalar",
            ModelConfig::Linear { .. } => "linear",
            ModelConfig::DegenerateZ { .. } => "degenerate_z",
        }
    }

    pub fn mark_dim(&self) -> usize {
        match self {
            ModelConfig::DegenerateZ { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Functional(FunctionalConfig),
    Model(ModelConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub fd_step: f64,
    pub oracle_rel: f64,
    /// Relative determinant threshold factor (× (trace/d)^d).
    pub det_rel: f64,
    pub step: f64,
    pub step_tol: f64,
    pub atom_resolution: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { fd_step: 1e-5, oracle_rel: 1e-6, det_rel: 1e-12, step: 1e-2, step_tol: 1e-9, atom_resolution: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// 0 selects the rayon default.
    pub threads: usize,
    pub contributions: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub paths: usize,
    pub horizon: f64,
    pub spec: SpecConfig,
    pub target: Target,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

struct Entry {
    key: String,
    value: String,
    line: usize,
    used: bool,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

fn err(line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse { line: Some(line), message: message.into() }
}

fn field_err(message: impl Into<String>) -> CliError {
    CliError::Parse { line: None, message: message.into() }
}

const SECTIONS: [&str; 6] = ["experiment", "spec", "functional", "model", "tolerances", "output"];

fn lex(text: &str) -> Result<Vec<Section>, CliError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name =
                rest.strip_suffix(']').ok_or_else(|| err(line, "unterminated section header"))?.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(err(line, format!("unknown section [{name}]")));
            }
            if let Some(prev) = sections.iter().find(|x| x.name == name) {
                return Err(err(line, format!("duplicate section [{name}] (first at line {})", prev.line)));
            }
            sections.push(Section { name, line, entries: Vec::new() });
            continue;
        }
        let (key, value) = s.split_once('=').ok_or_else(|| err(line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(err(line, "empty key or value"));
        }
        let section = sections.last_mut().ok_or_else(|| err(line, format!("key `{key}` outside any section")))?;
        if let Some(prev) = section.entries.iter().find(|e| e.key == key) {
            return Err(err(line, format!("duplicate key `{key}` (first at line {})", prev.line)));
        }
        section.entries.push(Entry { key: key.to_string(), value: value.to_string(), line, used: false });
    }
    Ok(sections)
}

struct Reader<'a> {
    name: &'a str,
    section: Option<&'a mut Section>,
}

impl<'a> Reader<'a> {
    fn entry(&mut self, key: &str) -> Option<(String, usize)> {
        let e = self.section.as_mut()?.entries.iter_mut().find(|e| e.key == key)?;
        e.used = true;
        Some((e.value.clone(), e.line))
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.entry(key) {
            None => Ok(None),
            Some((v, line)) => {
                v.parse::<T>().map(Some).map_err(|_| err(line, format!("{}.{key}: cannot parse `{v}`", self.name)))
            }
        }
    }

    fn real(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        let line = self.line_of(key);
        let v = self.parse::<f64>(key)?.unwrap_or(default);
        if !v.is_finite() {
            return Err(err(line.unwrap_or(0), format!("{}.{key} must be finite", self.name)));
        }
        Ok(v)
    }

    fn reals<const N: usize>(&mut self, key: &str, default: [f64; N]) -> Result<[f64; N], CliError> {
        let Some((v, line)) = self.entry(key) else { return Ok(default) };
        let parts: Vec<f64> = v
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| err(line, format!("{}.{key}: cannot parse `{v}`", self.name)))?;
        parts.try_into().map_err(|_| err(line, format!("{}.{key} needs {N} comma-separated values", self.name)))
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.section.as_ref()?.entries.iter().find(|e| e.key == key).map(|e| e.line)
    }

    fn finish(self) -> Result<(), CliError> {
        if let Some(s) = self.section {
            if let Some(e) = s.entries.iter().find(|e| !e.used) {
                return Err(err(e.line, format!("unknown key `{}` in [{}]", e.key, s.name)));
            }
        }
        Ok(())
    }
}

fn take<'a>(sections: &'a mut [Section], name: &'a str) -> Reader<'a> {
    Reader { name, section: sections.iter_mut().find(|s| s.name == name) }
}

fn parse_phi(r: &mut Reader) -> Result<Phi, CliError> {
    let line = r.line_of("phi").unwrap_or(0);
    match r.entry("phi").map(|(v, _)| v).as_deref().unwrap_or("identity") {
        "identity" => Ok(Phi::Identity),
        "sine" => Ok(Phi::Sine),
        "affine" => Ok(Phi::Affine { a: r.real("a", 1.0)?, b: r.real("b", 0.0)? }),
        other => Err(err(line, format!("functional.phi: unknown `{other}` (identity, sine, affine)"))),
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let mut sections = lex(text)?;
    let has = |n: &str, s: &[Section]| s.iter().any(|x| x.name == n);
    if !has("experiment", &sections) {
        return Err(field_err("missing [experiment] section"));
    }

    let mut r = take(&mut sections, "experiment");
    let kind_line = r.line_of("kind").unwrap_or(0);
    let kind = match r.entry("kind") {
        None => return Err(field_err("experiment.kind required")),
        Some((v, _)) => ExperimentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == v)
            .ok_or_else(|| err(kind_line, format!("experiment.kind: unknown `{v}`")))?,
    };
    let seed = r.parse::<u64>("seed")?.ok_or_else(|| field_err("seed required"))?;
    let paths_line = r.line_of("paths").unwrap_or(0);
    let paths = r.parse::<usize>("paths")?.unwrap_or(100);
    if paths == 0 {
        return Err(err(paths_line, "experiment.paths must be at least 1"));
    }
    let horizon_line = r.line_of("horizon").unwrap_or(0);
    let horizon = r.real("horizon", 1.0)?;
    if !(horizon > 0.0) {
        return Err(err(horizon_line, "experiment.horizon must be positive"));
    }
    r.finish()?;

    let mut r = take(&mut sections, "spec");
    let family_line = r.line_of("family").unwrap_or(0);
    let family = match r.entry("family").map(|(v, _)| v).as_deref().unwrap_or("compound-poisson") {
        "compound-poisson" => {
            let lambda = r.real("lambda", 1.0)?;
            let low = r.real("low", -1.0)?;
            let high = r.real("high", 1.0)?;
            let gap = r.real("gap", 0.01)?;
            if lambda < 0.0 {
                return Err(field_err("spec.lambda must be nonnegative"));
            }
            if !(low < high) || gap < 0.0 {
                return Err(field_err("spec.low < spec.high and spec.gap >= 0 required"));
            }
            Family::CompoundPoisson { lambda, low, high, gap }
        }
        "truncated-power" => {
            let beta = r.real("beta", 1.0)?;
            let epsilon_cut = r.real("epsilon_cut", 0.01)?;
            if !(beta > 0.0 && beta < 2.0) {
                return Err(field_err(format!("spec.beta must lie in (0, 2), got {beta}")));
            }
            if !(epsilon_cut > 0.0 && epsilon_cut < 1.0) {
                return Err(field_err(format!("spec.epsilon_cut must lie in (0, 1), got {epsilon_cut}")));
            }
            Family::TruncatedPower { beta, epsilon_cut }
        }
        other => return Err(err(family_line, format!("spec.family: unknown `{other}`"))),
    };
    let axes = r.parse::<usize>("axes")?.unwrap_or(1);
    if axes == 0 {
        return Err(field_err("spec.axes must be at least 1"));
    }
    let compensated = r.parse::<bool>("compensated")?.unwrap_or(true);
    r.finish()?;
    let spec = SpecConfig { family, axes, compensated };

    let target = match (has("functional", &sections), has("model", &sections)) {
        (true, true) => return Err(field_err("give either [functional] or [model], not both")),
        (false, false) => return Err(field_err("a [functional] or [model] section is required")),
        (true, false) => {
            let mut r = take(&mut sections, "functional");
            let line = r.line_of("name").unwrap_or(0);
            let name = r.entry("name").map(|(v, _)| v).ok_or_else(|| field_err("functional.name required"))?;
            let t = r.real("t", horizon)?;
            if !(t > 0.0 && t <= horizon) {
                return Err(field_err("functional.t must lie in (0, horizon]"));
            }
            let f = match name.as_str() {
                "terminal_value" => FunctionalConfig::TerminalValue { t },
                "stochastic_integral_phi" => FunctionalConfig::StochasticIntegralPhi { t, phi: parse_phi(&mut r)? },
                "doleans_pair" => FunctionalConfig::DoleansPair { t },
                "running_sup" => FunctionalConfig::RunningSup { t },
                "degenerate_sde_z" => FunctionalConfig::DegenerateSdeZ { t, start: r.reals("start", [0.0; 3])? },
                other => return Err(err(line, format!("functional.name: unknown `{other}`"))),
            };
            r.finish()?;
            Target::Functional(f)
        }
        (false, true) => {
            let mut r = take(&mut sections, "model");
            let line = r.line_of("name").unwrap_or(0);
            let name = r.entry("name").map(|(v, _)| v).ok_or_else(|| field_err("model.name required"))?;
            let m = match name.as_str() {
                "linear_scalar" => ModelConfig::LinearScalar { a: r.real("a", 1.0)?, x0: r.real("x0", 1.0)? },
                "linear" => ModelConfig::Linear {
                    matrix: r.reals("matrix", [0.5, -0.3, 0.2, 0.4])?,
                    x0: r.reals("x0", [1.0, 1.0])?,
                },
                "degenerate_z" => ModelConfig::DegenerateZ { start: r.reals("start", [0.0; 3])? },
                other => return Err(err(line, format!("model.name: unknown `{other}`"))),
            };
            r.finish()?;
            Target::Model(m)
        }
    };
    let needed = match &target {
        Target::Functional(f) => f.mark_dim(),
        Target::Model(m) => m.mark_dim(),
    };
    if needed != axes {
        return Err(field_err(format!("spec.axes = {axes} but the target needs {needed}-dimensional marks")));
    }
    match (kind, &target) {
        (ExperimentKind::FunctionalGamma, Target::Model(_)) => {
            return Err(field_err("functional-gamma needs a [functional] section"))
        }
        (ExperimentKind::SdeGamma, Target::Functional(_)) => {
            return Err(field_err("sde-gamma needs a [model] section"))
        }
        _ => {}
    }

    let mut r = take(&mut sections, "tolerances");
    let d = Tolerances::default();
    let tolerances = Tolerances {
        fd_step: r.real("fd_step", d.fd_step)?,
        oracle_rel: r.real("oracle_rel", d.oracle_rel)?,
        det_rel: r.real("det_rel", d.det_rel)?,
        step: r.real("step", d.step)?,
        step_tol: r.real("step_tol", d.step_tol)?,
        atom_resolution: r.real("atom_resolution", d.atom_resolution)?,
    };
    r.finish()?;
    for (name, v) in [("fd_step", tolerances.fd_step), ("step", tolerances.step), ("step_tol", tolerances.step_tol)] {
        if !(v > 0.0) {
            return Err(field_err(format!("tolerances.{name} must be positive")));
        }
    }

    let mut r = take(&mut sections, "output");
    let output = OutputConfig {
        dir: PathBuf::from(r.entry("dir").map(|(v, _)| v).unwrap_or_else(|| "out".into())),
        threads: r.parse::<usize>("threads")?.unwrap_or(0),
        contributions: r.parse::<bool>("contributions")?.unwrap_or(false),
    };
    r.finish()?;

    Ok(ExperimentConfig { kind, seed, paths, horizon, spec, target, tolerances, output })
}

fn join<const N: usize>(v: &[f64; N]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    /// Canonical text form; parses back to an equal config.
    pub fn to_canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[experiment]");
        let _ = writeln!(s, "kind = {}", self.kind.as_str());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "paths = {}", self.paths);
        let _ = writeln!(s, "horizon = {:?}", self.horizon);
        let _ = writeln!(s, "\n[spec]");
        match &self.spec.family {
            Family::CompoundPoisson { lambda, low, high, gap } => {
                let _ = writeln!(s, "family = compound-poisson");
                let _ = writeln!(s, "lambda = {lambda:?}\nlow = {low:?}\nhigh = {high:?}\ngap = {gap:?}");
            }
            Family::TruncatedPower { beta, epsilon_cut } => {
                let _ = writeln!(s, "family = truncated-power");
                let _ = writeln!(s, "beta = {beta:?}\nepsilon_cut = {epsilon_cut:?}");
            }
        }
        let _ = writeln!(s, "axes = {}", self.spec.axes);
        let _ = writeln!(s, "compensated = {}", self.spec.compensated);
        match &self.target {
            Target::Functional(f) => {
                let _ = writeln!(s, "\n[functional]\nname = {}", f.name());
                match f {
                    FunctionalConfig::TerminalValue { t }
                    | FunctionalConfig::DoleansPair { t }
                    | FunctionalConfig::RunningSup { t } => {
                        let _ = writeln!(s, "t = {t:?}");
                    }
                    FunctionalConfig::StochasticIntegralPhi { t, phi } => {
                        let _ = writeln!(s, "t = {t:?}");
                        match phi {
                            Phi::Identity => {
                                let _ = writeln!(s, "phi = identity");
                            }
                            Phi::Sine => {
                                let _ = writeln!(s, "phi = sine");
                            }
                            Phi::Affine { a, b } => {
                                let _ = writeln!(s, "phi = affine\na = {a:?}\nb = {b:?}");
                            }
                        }
                    }
                    FunctionalConfig::DegenerateSdeZ { t, start } => {
                        let _ = writeln!(s, "t = {t:?}\nstart = {}", join(start));
                    }
                }
            }
            Target::Model(m) => {
                let _ = writeln!(s, "\n[model]\nname = {}", m.name());
                match m {
                    ModelConfig::LinearScalar { a, x0 } => {
                        let _ = writeln!(s, "a = {a:?}\nx0 = {x0:?}");
                    }
                    ModelConfig::Linear { matrix, x0 } => {
                        let _ = writeln!(s, "matrix = {}\nx0 = {}", join(matrix), join(x0));
                    }
                    ModelConfig::DegenerateZ { start } => {
                        let _ = writeln!(s, "start = {}", join(start));
                    }
                }
            }
        }
        let t = &self.tolerances;
        let _ = writeln!(s, "\n[tolerances]");
        let _ = writeln!(s, "fd_step = {:?}\noracle_rel = {:?}\ndet_rel = {:?}", t.fd_step, t.oracle_rel, t.det_rel);
        let _ =
            writeln!(s, "step = {:?}\nstep_tol = {:?}\natom_resolution = {:?}", t.step, t.step_tol, t.atom_resolution);
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "dir = {}", self.output.dir.display());
        let _ = writeln!(s, "threads = {}", self.output.threads);
        let _ = writeln!(s, "contributions = {}", self.output.contributions);
        s
    }
}
