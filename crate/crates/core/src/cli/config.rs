//! Line-oriented `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Numbers may be written as
//! ratios (`dt = 1/1300`). Lists are comma separated. A `preset` key, or
//! the `--preset` flag, selects the base configuration; every other key
//! overrides it, and command-line overrides are applied last.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::coupling::{Method, MonitorConfig, SolverConfig};
use crate::error::{Error, Result};
use crate::fields::MixtureParams;
use crate::scenario::{self, Scenario};

/// Everything needed to reproduce one run or sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: MixtureParams<f64>,
    pub solver: SolverConfig,
    pub mesh_n: usize,
    pub scenario: Scenario,
    pub output_dir: PathBuf,
    /// Write a field snapshot every this many steps; zero disables.
    pub snapshot_every: usize,
    pub beta_sweep: Option<Vec<f64>>,
    pub sweep_methods: Vec<Method>,
    pub sweep_parallel: bool,
}

/// Keys accepted in files and by `--set`.
pub const KEYS: &[&str] = &[
    "preset",
    "scenario",
    "mesh_n",
    "rho_a",
    "rho_b",
    "mu_a",
    "mu_b",
    "gamma",
    "eta",
    "sigma",
    "beta",
    "dt",
    "eps_pressure",
    "method",
    "tol",
    "max_iter",
    "t_final",
    "gravity_x",
    "gravity_y",
    "mms_forcing",
    "monitors",
    "max_principle_tol",
    "strict",
    "output_dir",
    "snapshot_every",
    "beta_sweep",
    "sweep_methods",
    "sweep_parallel",
];

/// Keys that must be set by a preset, the file or a flag.
const REQUIRED: &[&str] = &["mesh_n", "t_final"];

/// Named presets: one per row of the manufactured-solution table, plus the
/// quiescent drop.
pub const PRESETS: &[&str] = &[
    "paper-table1-fin0",
    "paper-table1-fin9/8",
    "paper-table1-fip0",
    "paper-table1-fip2",
    "paper-table1-sce1300",
    "paper-table1-sce13000",
    "quiescent-drop",
];

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: MixtureParams::benchmark(),
            solver: SolverConfig::default(),
            mesh_n: 0,
            scenario: Scenario::Manufactured,
            output_dir: PathBuf::from("out"),
            snapshot_every: 0,
            beta_sweep: None,
            sweep_methods: vec![Method::Fin, Method::Fip],
            sweep_parallel: false,
        }
    }
}

/// Parse `1.5`, `1e-3` or `a/b`.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_usize(s: &str) -> std::result::Result<usize, String> {
    s.trim().parse().map_err(|_| format!("`{}` is not a non-negative integer", s.trim()))
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(format!("`{other}` is not a boolean")),
    }
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(item).collect()
}

impl RunConfig {
    /// Named base configuration.
    pub fn preset(name: &str) -> Result<Self> {
        let mut c = Self::default();
        let table = |c: &mut Self, method: Method, beta: f64, steps_per_unit: f64| {
            c.solver.method = method;
            c.params.beta = beta;
            c.params.dt = 1.0 / steps_per_unit;
            c.mesh_n = 100;
            c.scenario = Scenario::Manufactured;
            c.solver.t_final = 10.0 / 1300.0;
        };
        match name {
            "paper-table1-fin0" => table(&mut c, Method::Fin, 0.0, 1300.0),
            "paper-table1-fin9/8" => table(&mut c, Method::Fin, 9.0 / 8.0, 1300.0),
            "paper-table1-fip0" => table(&mut c, Method::Fip, 0.0, 1300.0),
            "paper-table1-fip2" => table(&mut c, Method::Fip, 2.0, 1300.0),
            "paper-table1-sce1300" => table(&mut c, Method::Sce, 0.0, 1300.0),
            "paper-table1-sce13000" => table(&mut c, Method::Sce, 0.0, 13000.0),
            "quiescent-drop" => {
                c.scenario = Scenario::QuiescentDrop;
                c.solver.method = Method::Fin;
                c.params.beta = 9.0 / 8.0;
                c.params.dt = scenario::admissible_dt(&c.params);
                c.mesh_n = 32;
                c.solver.t_final = 20.0 * c.params.dt;
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown preset `{other}` (known: {})",
                    PRESETS.join(", ")
                )))
            }
        }
        c.solver.mms = c.scenario == Scenario::Manufactured;
        Ok(c)
    }

    /// Apply one key. Errors are plain messages; callers attach the source.
    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        let p = &mut self.params;
        let s = &mut self.solver;
        match key {
            "preset" => *self = Self::preset(v).map_err(|e| e.to_string())?,
            "scenario" => {
                self.scenario = v.parse().map_err(|e: Error| e.to_string())?;
                s.mms = self.scenario == Scenario::Manufactured;
            }
            "mesh_n" => self.mesh_n = parse_usize(v)?,
            "rho_a" => p.rho_a = parse_number(v)?,
            "rho_b" => p.rho_b = parse_number(v)?,
            "mu_a" => p.mu_a = parse_number(v)?,
            "mu_b" => p.mu_b = parse_number(v)?,
            "gamma" => p.gamma = parse_number(v)?,
            "eta" => p.eta = parse_number(v)?,
            "sigma" => p.sigma = parse_number(v)?,
            "beta" => p.beta = parse_number(v)?,
            "dt" => p.dt = parse_number(v)?,
            "eps_pressure" => p.eps_pressure = parse_number(v)?,
            "method" => s.method = v.parse().map_err(|e: Error| e.to_string())?,
            "tol" => s.tolerance = parse_number(v)?,
            "max_iter" => s.max_iterations = parse_usize(v)?,
            "t_final" => s.t_final = parse_number(v)?,
            "gravity_x" => s.gravity[0] = parse_number(v)?,
            "gravity_y" => s.gravity[1] = parse_number(v)?,
            "mms_forcing" => s.mms_forcing = v.parse().map_err(|e: Error| e.to_string())?,
            "monitors" => {
                let on = parse_bool(v)?;
                let tol = s.monitors.max_principle_tolerance;
                s.monitors = if on { MonitorConfig::default() } else { MonitorConfig::OFF };
                s.monitors.max_principle_tolerance = tol;
            }
            "max_principle_tol" => s.monitors.max_principle_tolerance = parse_number(v)?,
            "strict" => s.strict = parse_bool(v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "snapshot_every" => self.snapshot_every = parse_usize(v)?,
            "beta_sweep" => self.beta_sweep = Some(parse_list(v, parse_number)?),
            "sweep_methods" => {
                self.sweep_methods = parse_list(v, |m| m.trim().parse::<Method>().map_err(|e| e.to_string()))?
            }
            "sweep_parallel" => self.sweep_parallel = parse_bool(v)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Parse file contents over an optional preset, then apply overrides.
    pub fn parse(text: &str, preset: Option<&str>, overrides: &[(String, String)]) -> Result<Self> {
        let mut seen: Vec<&str> = Vec::new();
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key `{key}`"),
                });
            }
            entries.push((line, key, value));
        }
        let mut config = match preset {
            Some(name) => Self::preset(name)?,
            None => Self::default(),
        };
        if preset.is_some() {
            seen.extend(REQUIRED);
        }
        // a preset in the file is the base for the other keys
        for &(line, key, value) in entries.iter().filter(|e| e.1 == "preset") {
            config.set(key, value).map_err(|message| Error::Config { line, message })?;
            seen.extend(REQUIRED);
        }
        for &(line, key, value) in entries.iter().filter(|e| e.1 != "preset") {
            config.set(key, value).map_err(|message| Error::Config { line, message })?;
            seen.push(key);
        }
        for (key, value) in overrides {
            config
                .set(key, value)
                .map_err(|m| Error::InvalidArgument(format!("override `{key}={value}`: {m}")))?;
            if let Some(k) = KEYS.iter().find(|k| **k == key) {
                seen.push(k);
            }
        }
        if let Some(missing) = REQUIRED.iter().find(|k| !seen.contains(k)) {
            return Err(Error::MissingKey(missing.to_string()));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.mesh_n == 0 {
            return Err(Error::InvalidArgument("mesh_n must be positive".into()));
        }
        if !(self.solver.t_final >= 0.0) {
            return Err(Error::InvalidArgument("t_final must be non-negative".into()));
        }
        if !(self.solver.tolerance > 0.0) || self.solver.max_iterations == 0 {
            return Err(Error::InvalidArgument("tol and max_iter must be positive".into()));
        }
        if matches!(&self.beta_sweep, Some(b) if b.is_empty()) {
            return Err(Error::InvalidArgument("beta_sweep is empty".into()));
        }
        Ok(())
    }

    /// Every key with a value that parses back to the same configuration.
    pub fn to_config_string(&self) -> String {
        let p = &self.params;
        let s = &self.solver;
        let m = &s.monitors;
        let monitors_on = m.max_principle && m.phase_bounds && m.velocity_bounds;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("scenario", self.scenario.to_string());
        put("mesh_n", self.mesh_n.to_string());
        for (k, v) in [
            ("rho_a", p.rho_a),
            ("rho_b", p.rho_b),
            ("mu_a", p.mu_a),
            ("mu_b", p.mu_b),
            ("gamma", p.gamma),
            ("eta", p.eta),
            ("sigma", p.sigma),
            ("beta", p.beta),
            ("dt", p.dt),
            ("eps_pressure", p.eps_pressure),
        ] {
            put(k, format!("{v:?}"));
        }
        put("method", s.method.to_string());
        put("tol", format!("{:?}", s.tolerance));
        put("max_iter", s.max_iterations.to_string());
        put("t_final", format!("{:?}", s.t_final));
        put("gravity_x", format!("{:?}", s.gravity[0]));
        put("gravity_y", format!("{:?}", s.gravity[1]));
        put("mms_forcing", s.mms_forcing.to_string());
        put("monitors", monitors_on.to_string());
        put("max_principle_tol", format!("{:?}", m.max_principle_tolerance));
        put("strict", s.strict.to_string());
        put("output_dir", self.output_dir.display().to_string());
        put("snapshot_every", self.snapshot_every.to_string());
        if let Some(b) = &self.beta_sweep {
            put("beta_sweep", b.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(","));
        }
        put(
            "sweep_methods",
            self.sweep_methods.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(","),
        );
        put("sweep_parallel", self.sweep_parallel.to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn overrides(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn table_preset() {
        let c = RunConfig::preset("paper-table1-fin0").unwrap();
        assert_eq!(c.solver.method, Method::Fin);
        assert_eq!(c.params.beta, 0.0);
        assert_eq!(c.params.dt, 1.0 / 1300.0);
        assert_eq!(c.mesh_n, 100);
        assert_eq!(c.solver.t_final, 10.0 / 1300.0);
        assert!(c.solver.mms);
        let sce = RunConfig::preset("paper-table1-sce13000").unwrap();
        assert_eq!(sce.params.dt, 1.0 / 13000.0);
        assert!((sce.solver.t_final / sce.params.dt - 100.0).abs() < 1e-9);
        for name in PRESETS {
            RunConfig::preset(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn typo_names_the_line() {
        match RunConfig::parse("betta=1\n", None, &[]) {
            Err(Error::Config { line: 1, message }) => assert!(message.contains("betta")),
            other => panic!("{other:?}"),
        }
        match RunConfig::parse("mesh_n = 4\n\n# c\nt_final = abc\n", None, &[]) {
            Err(Error::Config { line: 4, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_required_key() {
        assert!(matches!(RunConfig::parse("mesh_n = 8", None, &[]), Err(Error::MissingKey(k)) if k == "t_final"));
    }

    #[test]
    fn flags_match_file() {
        let text = "mesh_n = 8\nt_final = 3/1300\nmethod = fip\nbeta = 2\ndt = 1/1300\n";
        let from_file = RunConfig::parse(text, None, &[]).unwrap();
        let from_flags = RunConfig::parse(
            "",
            None,
            &overrides(&[("mesh_n", "8"), ("t_final", "3/1300"), ("method", "fip"), ("beta", "2"), ("dt", "1/1300")]),
        )
        .unwrap();
        assert_eq!(from_file, from_flags);
        let overridden = RunConfig::parse(text, None, &overrides(&[("beta", "0.5")])).unwrap();
        assert_eq!(overridden.params.beta, 0.5);
    }

    #[test]
    fn preset_key_is_the_base() {
        let c = RunConfig::parse("beta = 3\npreset = paper-table1-fip2\n", None, &[]).unwrap();
        assert_eq!(c.params.beta, 3.0);
        assert_eq!(c.solver.method, Method::Fip);
        assert_eq!(c.mesh_n, 100);
    }

    #[test]
    fn echo_round_trip() {
        for name in PRESETS {
            let mut c = RunConfig::preset(name).unwrap();
            c.beta_sweep = Some(vec![0.0, 0.25, 9.0 / 8.0]);
            c.solver.monitors = MonitorConfig::OFF;
            let back = RunConfig::parse(&c.to_config_string(), None, &[]).unwrap();
            assert_eq!(back, c, "{name}");
        }
    }

    #[test]
    fn ratios_and_lists() {
        assert_eq!(parse_number("1/1300").unwrap(), 1.0 / 1300.0);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("x").is_err());
        let c = RunConfig::parse("preset = quiescent-drop\nbeta_sweep = 0, 9/8,2\nsweep_methods = sce", None, &[]).unwrap();
        assert_eq!(c.beta_sweep.unwrap(), vec![0.0, 1.125, 2.0]);
        assert_eq!(c.sweep_methods, vec![Method::Sce]);
    }

    proptest! {
        #[test]
        fn numeric_echo_is_exact(beta in 0.0f64..10.0, dt in 1e-6f64..1e-2, n in 1usize..200) {
            let mut c = RunConfig::preset("paper-table1-fin0").unwrap();
            c.params.beta = beta;
            c.params.dt = dt;
            c.mesh_n = n;
            let back = RunConfig::parse(&c.to_config_string(), None, &[]).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
