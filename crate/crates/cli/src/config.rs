//! TOML run configuration.
//!
//! The file is parsed into a plain table and walked by hand so that every
//! problem is reported at once, each with the line it came from. Sections
//! mirror the library modules:
//!
//! ```toml
//! scenario = "linear_landau"
//! seed = 7
//! nu = 0.01
//!
//! [profiles]
//! thermal_speed = 0.05627
//! interaction = "power_law"
//! gamma = 2.0
//!
//! [kinetic]
//! k_max = 8
//! t_end = 40.0
//! ```
//!
//! Anything left out takes the default documented on the section types.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use landau::echo::EchoKernelSpec;
use landau::kinetic::{Grid, KineticConfig, Perturbation, VShape};
use landau::lintheory::{VolterraKernel, RESOLUTION_LIMIT};
use landau::profiles::{Interaction, Sign, VelocityProfile};
use serde::Serialize;
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    LinearLandau,
    CollisionSweep,
    EchoExperiment,
    KernelBounds,
    NormBattery,
    FreeTransportCheck,
    StabilityScan,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::LinearLandau,
        Scenario::CollisionSweep,
        Scenario::EchoExperiment,
        Scenario::KernelBounds,
        Scenario::NormBattery,
        Scenario::FreeTransportCheck,
        Scenario::StabilityScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::LinearLandau => "linear_landau",
            Scenario::CollisionSweep => "collision_sweep",
            Scenario::EchoExperiment => "echo_experiment",
            Scenario::KernelBounds => "kernel_bounds",
            Scenario::NormBattery => "norm_battery",
            Scenario::FreeTransportCheck => "free_transport_check",
            Scenario::StabilityScan => "stability_scan",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown scenario {s:?}"))
    }
}

/// `[kinetic]`: grid, time stepping and the initial perturbation.
///
/// Defaults: `k_max = 32`, `n_v = 512`, `v_max` six times the largest
/// profile velocity scale, `dt = 0.05`, `t_end = 40`, `mode = 1`,
/// `amplitude = 1e-5`, `shape = "equilibrium"`, `cadence = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KineticSection {
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    pub perturbation: Perturbation,
    pub cadence: usize,
}

/// `[lintheory]`: the Volterra solver and the stability scan.
///
/// Defaults: `dt = 0.01`, `t_end = 40`, `k_max = 8`, `nus = [0, 0.01]`,
/// `window = [5, 40]` (the fit window for damping rates).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LintheorySection {
    pub dt: f64,
    pub t_end: f64,
    pub k_max: i64,
    pub nus: Vec<f64>,
    pub window: (f64, f64),
}

/// `[hybridnorms]`: norms recorded during kinetic runs and the size of the
/// randomized battery.
///
/// Defaults: `norms = []`, `fields = 20`, `param_sets = 5`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSection {
    /// `(λ, μ)` pairs.
    pub norms: Vec<(f64, f64)>,
    pub fields: usize,
    pub param_sets: usize,
}

/// `[echo]`: kernel parameters and the echo experiment.
///
/// Defaults: `alpha = 0.5`, `gamma = 2`, `trunc = 256`, `l = 1`,
/// `k_minus_l = -2`, `s_force = 5`, `eps1 = eps2 = 1e-3`,
/// `times = [40, 80, 160, 320, 640]` (kernel table and forward moments),
/// `starts = [0, 4, 16]` (backward moments), `n_s = 64`,
/// `nus = [0.15, 0.25, 0.35]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EchoSection {
    pub kernel: EchoKernelSpec,
    pub l: i64,
    pub k_minus_l: i64,
    pub s_force: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub times: Vec<f64>,
    pub starts: Vec<f64>,
    pub n_s: usize,
    pub nus: Vec<f64>,
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub nu: f64,
    pub profile: VelocityProfile,
    pub interaction: Interaction,
    pub kinetic: KineticSection,
    pub lintheory: LintheorySection,
    pub hybridnorms: NormSection,
    pub echo: EchoSection,
    /// `[output] directory`, default `out`.
    pub output: PathBuf,
}

impl SimConfig {
    pub fn kinetic_config(&self) -> KineticConfig {
        KineticConfig {
            profile: self.profile.clone(),
            interaction: self.interaction,
            nu: self.nu,
            grid: self.kinetic.grid,
            dt: self.kinetic.dt,
            t_end: self.kinetic.t_end,
            perturbation: self.kinetic.perturbation,
            cadence: self.kinetic.cadence,
            norms: self.hybridnorms.norms.clone(),
        }
    }
}

/// One problem in a configuration file. `line` is 1-based, 0 when unknown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub line: usize,
    pub key: String,
    pub reason: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.key, self.reason)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}", list(.0))]
    Invalid(Vec<ParseError>),
}

fn list(errs: &[ParseError]) -> String {
    let mut s = format!("{} configuration error(s)", errs.len());
    for e in errs {
        s.push_str("\n  ");
        s.push_str(&e.to_string());
    }
    s
}

impl ConfigError {
    pub fn errors(&self) -> &[ParseError] {
        match self {
            ConfigError::Invalid(v) => v,
            ConfigError::Io { .. } => &[],
        }
    }
}

pub fn parse_config(path: &Path) -> Result<SimConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_str(&text)
}

const TOP: &[&str] = &["scenario", "seed", "nu"];
const SECTIONS: &[(&str, &[&str])] = &[
    ("profiles", &["kind", "thermal_speed", "components", "interaction", "gamma", "amplitude", "sign"]),
    (
        "kinetic",
        &["k_max", "n_v", "v_max", "dt", "t_end", "mode", "amplitude", "shape", "shape_thermal_speed", "shape_center", "cadence"],
    ),
    ("lintheory", &["dt", "t_end", "k_max", "nus", "window"]),
    ("hybridnorms", &["norms", "fields", "param_sets"]),
    ("echo", &["alpha", "gamma", "trunc", "l", "k_minus_l", "s_force", "eps1", "eps2", "times", "starts", "n_s", "nus"]),
    ("output", &["directory"]),
];

/// Largest admissible collision rate.
pub const NU_MAX: f64 = 1.0;

pub fn parse_str(text: &str) -> Result<SimConfig, ConfigError> {
    let table: Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            let e: toml::de::Error = e;
            let line = e.span().map_or(0, |s| line_of(text, s.start));
            return Err(ConfigError::Invalid(vec![ParseError {
                line,
                key: String::new(),
                reason: e.message().to_string(),
            }]));
        }
    };
    let mut r = Reader { lines: key_lines(text), errors: Vec::new() };
    let cfg = r.build(&table);
    if r.errors.is_empty() {
        Ok(cfg.expect("no errors recorded"))
    } else {
        r.errors.sort_by(|a, b| (a.line, &a.key).cmp(&(b.line, &b.key)));
        Err(ConfigError::Invalid(r.errors))
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Lines of `[section]` headers and `key =` assignments, keyed `section.key`.
fn key_lines(text: &str) -> HashMap<String, usize> {
    let mut out = HashMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            if let Some(end) = rest.find(']') {
                section = rest[..end].trim().to_string();
                out.entry(section.clone()).or_insert(i + 1);
            }
            continue;
        }
        if let Some(eq) = line.find('=') {
            let key = line[..eq].trim().trim_matches('"');
            if !key.is_empty() && !key.starts_with('#') {
                let path = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
                out.entry(path).or_insert(i + 1);
            }
        }
    }
    out
}

struct Reader {
    lines: HashMap<String, usize>,
    errors: Vec<ParseError>,
}

struct Sec<'a> {
    name: &'static str,
    table: Option<&'a Table>,
}

impl<'a> Sec<'a> {
    fn path(&self, key: &str) -> String {
        if self.name.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.name)
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn has(&self, key: &str) -> bool {
        self.get(key).is_some()
    }
}

impl Reader {
    fn line(&self, path: &str) -> usize {
        if let Some(&l) = self.lines.get(path) {
            return l;
        }
        path.split_once('.').and_then(|(s, _)| self.lines.get(s).copied()).unwrap_or(0)
    }

    fn err(&mut self, path: &str, reason: impl Into<String>) {
        self.errors.push(ParseError { line: self.line(path), key: path.to_string(), reason: reason.into() });
    }

    fn check(&mut self, ok: bool, path: &str, reason: &str) {
        if !ok {
            self.err(path, reason);
        }
    }

    fn float(&mut self, sec: &Sec, key: &str, default: f64) -> f64 {
        match sec.get(key) {
            None => default,
            Some(v) => match as_float(v) {
                Some(x) if x.is_finite() => x,
                Some(_) => {
                    self.err(&sec.path(key), "must be finite");
                    default
                }
                None => {
                    self.err(&sec.path(key), format!("expected a number, found {}", v.type_str()));
                    default
                }
            },
        }
    }

    fn int(&mut self, sec: &Sec, key: &str, default: i64) -> i64 {
        match sec.get(key) {
            None => default,
            Some(Value::Integer(i)) => *i,
            Some(v) => {
                self.err(&sec.path(key), format!("expected an integer, found {}", v.type_str()));
                default
            }
        }
    }

    fn count(&mut self, sec: &Sec, key: &str, default: usize) -> usize {
        let v = self.int(sec, key, default as i64);
        if v < 0 {
            self.err(&sec.path(key), "must be non-negative");
            return default;
        }
        v as usize
    }

    fn string<'v>(&mut self, sec: &Sec<'v>, key: &str, default: &'v str) -> &'v str {
        match sec.get(key) {
            None => default,
            Some(Value::String(s)) => s,
            Some(v) => {
                self.err(&sec.path(key), format!("expected a string, found {}", v.type_str()));
                default
            }
        }
    }

    fn floats(&mut self, sec: &Sec, key: &str, default: &[f64]) -> Vec<f64> {
        match sec.get(key) {
            None => default.to_vec(),
            Some(Value::Array(a)) => {
                let parsed: Option<Vec<f64>> = a.iter().map(as_float).collect();
                match parsed {
                    Some(v) if v.iter().all(|x| x.is_finite()) => v,
                    _ => {
                        self.err(&sec.path(key), "expected an array of finite numbers");
                        default.to_vec()
                    }
                }
            }
            Some(v) => {
                self.err(&sec.path(key), format!("expected an array, found {}", v.type_str()));
                default.to_vec()
            }
        }
    }

    /// Array of fixed-width numeric rows, e.g. `[[0.1, 0.0], [0.2, 0.1]]`.
    fn rows(&mut self, sec: &Sec, key: &str, width: usize) -> Option<Vec<Vec<f64>>> {
        let v = sec.get(key)?;
        let rows = v.as_array().and_then(|a| {
            a.iter()
                .map(|r| {
                    let r = r.as_array()?;
                    let vals: Option<Vec<f64>> = r.iter().map(as_float).collect();
                    vals.filter(|v| v.len() == width && v.iter().all(|x| x.is_finite()))
                })
                .collect::<Option<Vec<_>>>()
        });
        if rows.is_none() {
            self.err(&sec.path(key), format!("expected an array of {width}-element numeric arrays"));
        }
        rows
    }

    fn unknown_keys(&mut self, sec: &Sec, allowed: &[&str]) {
        if let Some(t) = sec.table {
            for k in t.keys() {
                if !allowed.contains(&k.as_str()) {
                    self.err(&sec.path(k), "unknown key");
                }
            }
        }
    }

    fn section<'a>(&mut self, root: &'a Table, name: &'static str) -> Sec<'a> {
        match root.get(name) {
            None => Sec { name, table: None },
            Some(Value::Table(t)) => Sec { name, table: Some(t) },
            Some(_) => {
                self.err(name, "expected a table");
                Sec { name, table: None }
            }
        }
    }

    fn build(&mut self, root: &Table) -> Option<SimConfig> {
        for k in root.keys() {
            let known = TOP.contains(&k.as_str()) || SECTIONS.iter().any(|(s, _)| s == k);
            if !known {
                self.err(k, "unknown key");
            }
        }
        let top = Sec { name: "", table: Some(root) };

        let scenario = match top.get("scenario") {
            None => {
                self.err("scenario", "missing; expected one of the scenario names");
                None
            }
            Some(Value::String(s)) => match s.parse::<Scenario>() {
                Ok(s) => Some(s),
                Err(e) => {
                    self.err("scenario", e);
                    None
                }
            },
            Some(v) => {
                self.err("scenario", format!("expected a string, found {}", v.type_str()));
                None
            }
        };
        let seed = self.int(&top, "seed", 1);
        self.check(seed >= 0, "seed", "must be non-negative");
        let nu = self.float(&top, "nu", 0.0);
        self.check((0.0..=NU_MAX).contains(&nu), "nu", "collision rate must lie in [0, 1]");

        let sections: Vec<(Sec, &[&str])> =
            SECTIONS.iter().map(|(name, allowed)| (self.section(root, name), *allowed)).collect();
        for (sec, allowed) in &sections {
            self.unknown_keys(sec, allowed);
        }
        let [prof, kin, lin, norms, echo, out] = &sections[..] else { unreachable!() };

        let (profile, interaction) = self.profiles(&prof.0);
        let kinetic = self.kinetic(&kin.0, profile.as_ref());
        let lintheory = self.lintheory(&lin.0, profile.as_ref(), interaction.as_ref());
        let hybridnorms = self.norms(&norms.0);
        let echo = self.echo(&echo.0);
        let output = PathBuf::from(self.string(&out.0, "directory", "out"));

        if let (Some(k), Some(e)) = (&kinetic, &echo) {
            self.echo_grid(k, e);
        }

        Some(SimConfig {
            scenario: scenario?,
            seed: seed.max(0) as u64,
            nu,
            profile: profile?,
            interaction: interaction?,
            kinetic: kinetic?,
            lintheory: lintheory?,
            hybridnorms,
            echo: echo?,
            output,
        })
    }

    fn profiles(&mut self, sec: &Sec) -> (Option<VelocityProfile>, Option<Interaction>) {
        let kind = self.string(sec, "kind", "maxwellian");
        let profile = match kind {
            "maxwellian" => {
                if sec.has("components") {
                    self.err(&sec.path("components"), "only used with kind = \"mixture\"");
                }
                let vth = self.float(sec, "thermal_speed", 0.05627);
                match VelocityProfile::maxwellian(vth) {
                    Ok(p) => Some(p),
                    Err(e) => {
                        self.err(&sec.path("thermal_speed"), e.to_string());
                        None
                    }
                }
            }
            "mixture" => {
                if sec.has("thermal_speed") {
                    self.err(&sec.path("thermal_speed"), "not used with kind = \"mixture\"; give components");
                }
                match self.rows(sec, "components", 3) {
                    None => {
                        if !sec.has("components") {
                            self.err(&sec.path("components"), "required for kind = \"mixture\"");
                        }
                        None
                    }
                    Some(rows) => {
                        let triples: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r[0], r[1], r[2])).collect();
                        match VelocityProfile::mixture(&triples) {
                            Ok(p) => Some(p),
                            Err(e) => {
                                self.err(&sec.path("components"), e.to_string());
                                None
                            }
                        }
                    }
                }
            }
            other => {
                self.err(&sec.path("kind"), format!("unknown profile kind {other:?}; expected maxwellian or mixture"));
                None
            }
        };

        let which = self.string(sec, "interaction", "power_law");
        let interaction = match which {
            "zero" => {
                for k in ["gamma", "amplitude", "sign"] {
                    if sec.has(k) {
                        self.err(&sec.path(k), "not used with interaction = \"zero\"");
                    }
                }
                Some(Interaction::Zero)
            }
            "power_law" => {
                let gamma = self.float(sec, "gamma", 2.0);
                let amplitude = self.float(sec, "amplitude", 1.0);
                let sign = match self.string(sec, "sign", "repulsive") {
                    "repulsive" => Some(Sign::Repulsive),
                    "attractive" => Some(Sign::Attractive),
                    other => {
                        self.err(&sec.path("sign"), format!("unknown sign {other:?}; expected repulsive or attractive"));
                        None
                    }
                };
                let mut ok = true;
                if !(gamma > 1.0) {
                    self.err(&sec.path("gamma"), "gamma > 1 required for |W(k)| <= 1/(1+|k|^gamma)");
                    ok = false;
                }
                if !(amplitude.abs() <= 1.0) {
                    self.err(&sec.path("amplitude"), "|amplitude| <= 1 required for |W(k)| <= 1/(1+|k|^gamma)");
                    ok = false;
                }
                sign.filter(|_| ok).map(|s| Interaction::power_law(gamma, amplitude, s))
            }
            other => {
                self.err(&sec.path("interaction"), format!("unknown interaction {other:?}; expected power_law or zero"));
                None
            }
        };
        (profile, interaction)
    }

    fn kinetic(&mut self, sec: &Sec, profile: Option<&VelocityProfile>) -> Option<KineticSection> {
        let k_max = self.count(sec, "k_max", 32);
        let n_v = self.count(sec, "n_v", 512);
        let scale = profile.map_or(1.0, |p| p.velocity_scale());
        let v_max = self.float(sec, "v_max", 6.0 * scale);
        let dt = self.float(sec, "dt", 0.05);
        let t_end = self.float(sec, "t_end", 40.0);
        let mode = self.count(sec, "mode", 1);
        let amplitude = self.float(sec, "amplitude", 1e-5);
        let cadence = self.count(sec, "cadence", 1);
        let shape = match self.string(sec, "shape", "equilibrium") {
            "equilibrium" => {
                for k in ["shape_thermal_speed", "shape_center"] {
                    if sec.has(k) {
                        self.err(&sec.path(k), "only used with shape = \"gaussian\"");
                    }
                }
                Some(VShape::Equilibrium)
            }
            "gaussian" => {
                let thermal_speed = self.float(sec, "shape_thermal_speed", 0.4);
                let center = self.float(sec, "shape_center", 0.0);
                if thermal_speed > 0.0 {
                    Some(VShape::Gaussian { thermal_speed, center })
                } else {
                    self.err(&sec.path("shape_thermal_speed"), "must be positive");
                    None
                }
            }
            other => {
                self.err(&sec.path("shape"), format!("unknown shape {other:?}; expected equilibrium or gaussian"));
                None
            }
        };

        let before = self.errors.len();
        self.check(k_max >= 1, &sec.path("k_max"), "must be at least 1");
        self.check(k_max <= 1024, &sec.path("k_max"), "must be at most 1024");
        self.check(n_v >= 8 && n_v % 2 == 0, &sec.path("n_v"), "must be even and at least 8");
        self.check(n_v <= 1 << 16, &sec.path("n_v"), "must be at most 65536");
        self.check(v_max > 0.0, &sec.path("v_max"), "must be positive");
        self.check(dt > 0.0, &sec.path("dt"), "must be positive");
        self.check(t_end >= 0.0, &sec.path("t_end"), "must be non-negative");
        if dt > 0.0 && t_end >= 0.0 {
            let n = t_end / dt;
            self.check((n - n.round()).abs() < 1e-9 * n.max(1.0), &sec.path("t_end"), "must be a multiple of dt");
            self.check(n <= 1e7, &sec.path("t_end"), "more than 1e7 steps");
        }
        self.check(mode >= 1 && mode <= k_max, &sec.path("mode"), "must lie in 1..=k_max");
        self.check(cadence >= 1, &sec.path("cadence"), "must be at least 1");
        let shape = shape?;
        if self.errors.len() > before {
            return None;
        }
        let grid = Grid::new(k_max, n_v, v_max).ok()?;
        Some(KineticSection { grid, dt, t_end, perturbation: Perturbation { mode, amplitude, shape }, cadence })
    }

    fn lintheory(
        &mut self,
        sec: &Sec,
        profile: Option<&VelocityProfile>,
        interaction: Option<&Interaction>,
    ) -> Option<LintheorySection> {
        let dt = self.float(sec, "dt", 0.01);
        let t_end = self.float(sec, "t_end", 40.0);
        let k_max = self.int(sec, "k_max", 8);
        let nus = self.floats(sec, "nus", &[0.0, 0.01]);
        let window = self.floats(sec, "window", &[5.0, 40.0]);
        let before = self.errors.len();
        self.check(dt > 0.0, &sec.path("dt"), "must be positive");
        self.check(t_end > 0.0, &sec.path("t_end"), "must be positive");
        self.check(t_end / dt <= 1e6, &sec.path("t_end"), "more than 1e6 steps");
        self.check((1..=256).contains(&k_max), &sec.path("k_max"), "must lie in 1..=256");
        self.check(!nus.is_empty(), &sec.path("nus"), "must not be empty");
        self.check(
            nus.iter().all(|&n| (0.0..=NU_MAX).contains(&n)),
            &sec.path("nus"),
            "collision rates must lie in [0, 1]",
        );
        self.check(
            window.len() == 2 && window[0] >= 0.0 && window[0] < window[1],
            &sec.path("window"),
            "expected [start, end] with 0 <= start < end",
        );
        if let (Some(p), Some(w)) = (profile, interaction) {
            if dt > 0.0 && (1..=256).contains(&k_max) {
                match VolterraKernel::new(p, w, k_max, 0.0) {
                    Ok(kern) => {
                        let res = kern.resolution(dt);
                        if res >= RESOLUTION_LIMIT {
                            self.err(
                                &sec.path("dt"),
                                format!("dt*k_max*velocity_scale = {res} must stay below {RESOLUTION_LIMIT}"),
                            );
                        }
                    }
                    Err(e) => self.err(&sec.path("k_max"), e.to_string()),
                }
            }
        }
        if self.errors.len() > before {
            return None;
        }
        Some(LintheorySection { dt, t_end, k_max, nus, window: (window[0], window[1]) })
    }

    fn norms(&mut self, sec: &Sec) -> NormSection {
        let norms = self.rows(sec, "norms", 2).unwrap_or_default();
        if norms.iter().any(|r| !(r[0] >= 0.0 && r[1] >= 0.0)) {
            self.err(&sec.path("norms"), "lambda and mu must be non-negative");
        }
        let fields = self.count(sec, "fields", 20);
        let param_sets = self.count(sec, "param_sets", 5);
        self.check(fields >= 3, &sec.path("fields"), "need at least 3 fields (pure-x, pure-v, mixed)");
        self.check(fields <= 1000, &sec.path("fields"), "must be at most 1000");
        self.check((1..=100).contains(&param_sets), &sec.path("param_sets"), "must lie in 1..=100");
        NormSection { norms: norms.iter().map(|r| (r[0], r[1])).collect(), fields, param_sets }
    }

    fn echo(&mut self, sec: &Sec) -> Option<EchoSection> {
        let alpha = self.float(sec, "alpha", 0.5);
        let gamma = self.float(sec, "gamma", 2.0);
        let trunc = self.int(sec, "trunc", 256);
        let l = self.int(sec, "l", 1);
        let k_minus_l = self.int(sec, "k_minus_l", -2);
        let s_force = self.float(sec, "s_force", 5.0);
        let eps1 = self.float(sec, "eps1", 1e-3);
        let eps2 = self.float(sec, "eps2", 1e-3);
        let times = self.floats(sec, "times", &[40.0, 80.0, 160.0, 320.0, 640.0]);
        let starts = self.floats(sec, "starts", &[0.0, 4.0, 16.0]);
        let n_s = self.count(sec, "n_s", 64);
        let nus = self.floats(sec, "nus", &[0.15, 0.25, 0.35]);
        let before = self.errors.len();
        self.check(alpha > 0.0 && alpha < 1.0, &sec.path("alpha"), "must lie in (0, 1)");
        self.check(gamma > 1.0, &sec.path("gamma"), "gamma > 1 required");
        self.check((1..=1 << 16).contains(&trunc), &sec.path("trunc"), "must lie in 1..=65536");
        self.check(l >= 1, &sec.path("l"), "the launched mode must be at least 1");
        self.check(s_force > 0.0, &sec.path("s_force"), "must be positive");
        self.check(eps1 >= 0.0, &sec.path("eps1"), "must be non-negative");
        self.check(eps2 >= 0.0, &sec.path("eps2"), "must be non-negative");
        self.check(
            !times.is_empty() && times.iter().all(|&t| t > 0.0 && t <= 1e4),
            &sec.path("times"),
            "need a non-empty list of times in (0, 1e4]",
        );
        self.check(
            starts.iter().all(|&s| (0.0..=1e3).contains(&s)),
            &sec.path("starts"),
            "backward start times must lie in [0, 1e3]",
        );
        self.check((2..=4096).contains(&n_s), &sec.path("n_s"), "must lie in 2..=4096");
        self.check(
            nus.iter().all(|&n| n > 0.0 && n < alpha),
            &sec.path("nus"),
            "moment collision rates must lie in (0, alpha)",
        );
        if self.errors.len() > before {
            return None;
        }
        let kernel = EchoKernelSpec::new(alpha, gamma).ok()?.with_trunc(trunc);
        Some(EchoSection { kernel, l, k_minus_l, s_force, eps1, eps2, times, starts, n_s, nus })
    }

    /// Echo modes must fit the kinetic grid and the kick must land on a step.
    fn echo_grid(&mut self, k: &KineticSection, e: &EchoSection) {
        let k_max = k.grid.k_max as i64;
        if e.l > k_max {
            self.err("echo.l", "must not exceed kinetic.k_max");
        }
        if e.k_minus_l.abs() > k_max || (e.l + e.k_minus_l).abs() > k_max {
            self.err("echo.k_minus_l", "forcing and echo modes must not exceed kinetic.k_max");
        }
        let n = e.s_force / k.dt;
        if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
            self.err("echo.s_force", "must be a multiple of kinetic.dt");
        }
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}
