//! The stabilized fixed-point loop coupling the phase and momentum solves,
//! and the time-stepping driver around it.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::allen_cahn::{solve_ac_step, AcStepInput};
use crate::diagnostics::{
    check_max_principle, check_phase_bounds, check_velocity_bounds, estimate_contraction, BoundMonitor,
    ContractionEstimate, DEFAULT_SLACK, MAX_PRINCIPLE_TOLERANCE, STRICT_SLACK,
};
use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::fields::{max_abs, Linearization, MixtureParams, State};
use crate::mms::{state_errors, ManufacturedSolution};
use crate::navier_stokes::{solve_ns_step, NsStepInput};
use crate::norms::{l2_norm, velocity_norms};

/// Fixed-point variant, named after the phase-field linearization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Newton linearization of the cubic.
    Fin,
    /// Picard linearization of the cubic.
    Fip,
    /// Explicit cubic.
    Sce,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Fin, Method::Fip, Method::Sce];

    pub fn linearization(self) -> Linearization {
        match self {
            Method::Fin => Linearization::Newton,
            Method::Fip => Linearization::Picard,
            Method::Sce => Linearization::Explicit,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fin => "FIN",
            Method::Fip => "FIP",
            Method::Sce => "SCE",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "FIN" | "NEWTON" => Ok(Method::Fin),
            "FIP" | "PICARD" => Ok(Method::Fip),
            "SCE" | "EXPLICIT" => Ok(Method::Sce),
            _ => Err(Error::InvalidArgument(format!("unknown method `{s}` (expected FIN, FIP or SCE)"))),
        }
    }
}

/// Which momentum source the manufactured-solution mode uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MmsForcing {
    /// Consistent with the discrete time derivative and phase lag, so the
    /// only error left is spatial and from the fixed-point tolerance.
    #[default]
    Discrete,
    /// Residual of the continuous equations at `t_{n+1}`.
    Continuous,
}

impl FromStr for MmsForcing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "discrete" => Ok(MmsForcing::Discrete),
            "continuous" => Ok(MmsForcing::Continuous),
            _ => Err(Error::InvalidArgument(format!("unknown mms forcing `{s}`"))),
        }
    }
}

impl fmt::Display for MmsForcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MmsForcing::Discrete => "discrete",
            MmsForcing::Continuous => "continuous",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorConfig {
    pub max_principle: bool,
    pub phase_bounds: bool,
    pub velocity_bounds: bool,
    pub max_principle_tolerance: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            max_principle: true,
            phase_bounds: true,
            velocity_bounds: true,
            max_principle_tolerance: MAX_PRINCIPLE_TOLERANCE,
        }
    }
}

impl MonitorConfig {
    pub const OFF: Self = Self {
        max_principle: false,
        phase_bounds: false,
        velocity_bounds: false,
        max_principle_tolerance: MAX_PRINCIPLE_TOLERANCE,
    };

    fn any(&self) -> bool {
        self.max_principle || self.phase_bounds || self.velocity_bounds
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Stop once `||phi_{k+1} - phi_k|| + ||u_{k+1} - u_k||` drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub t_final: f64,
    pub monitors: MonitorConfig,
    /// Drive the run with manufactured forcing and record errors.
    pub mms: bool,
    pub mms_forcing: MmsForcing,
    /// Abort on the first monitor violation.
    pub strict: bool,
    pub gravity: [f64; 2],
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Fin,
            tolerance: 1e-9,
            max_iterations: 100,
            t_final: 0.0,
            monitors: MonitorConfig::default(),
            mms: false,
            mms_forcing: MmsForcing::Discrete,
            strict: false,
            gravity: [0.0, 0.0],
        }
    }
}

impl SolverConfig {
    /// Monitors are meaningless under manufactured forcing, whose `phi`
    /// leaves `[-1, 1]` by construction.
    pub fn effective_monitors(&self) -> MonitorConfig {
        if self.mms {
            MonitorConfig::OFF
        } else {
            self.monitors
        }
    }

    fn slack(&self) -> f64 {
        if self.strict {
            STRICT_SLACK
        } else {
            DEFAULT_SLACK
        }
    }
}

/// Whether `dt` and `beta` fall in the regime where the theory applies.
#[derive(Clone, Debug, PartialEq)]
pub struct Admissibility {
    /// `eta^2 / (13 gamma)`.
    pub dt_limit: f64,
    pub dt_ok: bool,
    /// Smallest `beta` giving the maximum principle; `None` for the explicit
    /// scheme.
    pub beta_threshold: Option<f64>,
    pub beta_ok: bool,
    pub warnings: Vec<String>,
}

pub fn admissibility_check(params: &MixtureParams<f64>, method: Method) -> Admissibility {
    let dt_limit = params.eta * params.eta / (13.0 * params.gamma);
    let dt_ok = params.dt < dt_limit;
    let beta_threshold = method.linearization().max_principle_beta::<f64>();
    let beta_ok = beta_threshold.is_none_or(|b| params.beta >= b);
    let mut warnings = Vec::new();
    if !dt_ok {
        warnings.push(format!(
            "dt = {:e} is not below eta^2/(13 gamma) = {:e}; bounds and contraction are not guaranteed",
            params.dt, dt_limit
        ));
    }
    if let Some(b) = beta_threshold.filter(|_| !beta_ok) {
        warnings.push(format!(
            "beta = {} is below {} for {}; the maximum principle is not guaranteed",
            params.beta, b, method
        ));
    }
    Admissibility {
        dt_limit,
        dt_ok,
        beta_threshold,
        beta_ok,
        warnings,
    }
}

/// Worst-case monitor outcome of one step.
fn merge_monitors(acc: &mut Vec<BoundMonitor>, new: impl IntoIterator<Item = BoundMonitor>) {
    for m in new {
        match acc.iter_mut().find(|a| a.name == m.name) {
            Some(a) => {
                let passed = a.passed && m.passed;
                if m.ratio() > a.ratio() {
                    *a = m;
                }
                a.passed = passed;
            }
            None => acc.push(m),
        }
    }
}

/// Record of one time step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    /// One-based.
    pub step_index: usize,
    pub time: f64,
    pub dt: f64,
    pub iterations: usize,
    pub ns_solves: usize,
    pub ac_solves: usize,
    /// Stopping quantity per iteration.
    pub variations: Vec<f64>,
    /// `||phi_{k+1} - phi_k|| + ||grad(u_{k+1} - u_k)||` per iteration.
    pub contraction_history: Vec<f64>,
    pub contraction: ContractionEstimate,
    /// Nodal `max |phi|` of the accepted iterate.
    pub max_abs_phi: f64,
    /// Largest nodal `|phi|` seen over all iterates.
    pub max_abs_phi_iterates: f64,
    /// Worst value of each monitor over the iterates.
    pub monitors: Vec<BoundMonitor>,
    /// `(||u - u_ex||, ||phi - phi_ex||, ||phi - phi_ex||_H1)` at the step
    /// time, manufactured mode only.
    pub errors: Option<[f64; 3]>,
    /// `beta gamma / eta^2 ||phi_{k+1} - phi_k||` at the accepted iterate.
    pub stabilization_residual: f64,
    pub divergence_residual: f64,
    pub clamped_points: usize,
}

impl StepReport {
    pub fn monitors_passed(&self) -> bool {
        self.monitors.iter().all(|m| m.passed)
    }

    pub fn k_hat(&self) -> Option<f64> {
        self.contraction.geometric_fit
    }
}

/// Manufactured data bound to a step interval.
struct MmsData<'a> {
    m: &'a ManufacturedSolution<f64>,
    t_prev: f64,
    t: f64,
    kind: MmsForcing,
}

impl MmsData<'_> {
    fn ac_source(&self, x: [f64; 2]) -> f64 {
        self.m.forcing_ac(self.t, x[0], x[1])
    }

    fn ac_flux(&self, x: [f64; 2], n: [f64; 2]) -> f64 {
        self.m.phi_normal_derivative(self.t, x[0], x[1], n)
    }

    fn ns_source(&self, x: [f64; 2]) -> [f64; 2] {
        match self.kind {
            MmsForcing::Discrete => self.m.forcing_ns_discrete(self.t_prev, self.t, x[0], x[1]),
            MmsForcing::Continuous => self.m.forcing_ns(self.t, x[0], x[1]),
        }
    }

    fn trace(&self, x: [f64; 2]) -> [f64; 2] {
        self.m.u(self.t, x[0], x[1])
    }
}

/// Counts momentum and phase solves across a run.
#[derive(Debug, Default)]
pub struct SolveCounter {
    ns: AtomicUsize,
    ac: AtomicUsize,
}

impl SolveCounter {
    pub fn ns_solves(&self) -> usize {
        self.ns.load(Ordering::Relaxed)
    }

    pub fn ac_solves(&self) -> usize {
        self.ac.load(Ordering::Relaxed)
    }
}

/// Advance `state` by one step of size `params.dt`.
pub fn fixed_point_step(
    disc: &Discretization,
    state: &State,
    params: &MixtureParams<f64>,
    config: &SolverConfig,
    mms: Option<&ManufacturedSolution<f64>>,
    step_index: usize,
    counter: &SolveCounter,
) -> Result<(State, StepReport)> {
    let t_next = state.t + params.dt;
    let data = mms.map(|m| MmsData {
        m,
        t_prev: state.t,
        t: t_next,
        kind: config.mms_forcing,
    });
    let ac_source = |x: [f64; 2]| data.as_ref().map_or(0.0, |d| d.ac_source(x));
    let ac_flux = |x: [f64; 2], n: [f64; 2]| data.as_ref().map_or(0.0, |d| d.ac_flux(x, n));
    let ns_source = |x: [f64; 2]| data.as_ref().map_or([0.0; 2], |d| d.ns_source(x));
    let trace = |x: [f64; 2]| data.as_ref().map_or([0.0; 2], |d| d.trace(x));

    let monitors = config.effective_monitors();
    let slack = config.slack();
    let method = config.method.linearization();

    let mut phi_k = state.phi.clone();
    let mut u_k = state.u.clone();
    let mut variations = Vec::new();
    let mut contraction_history = Vec::new();
    let mut merged = Vec::new();
    let mut max_iterate = 0.0f64;
    let (mut ns_solves, mut ac_solves) = (0, 0);

    for _ in 0..config.max_iterations {
        let mut ac = AcStepInput::new(&state.phi, &phi_k, &u_k, method, params);
        if data.is_some() {
            ac.forcing = Some(&ac_source);
            ac.boundary_flux = Some(&ac_flux);
        }
        let phi_next = solve_ac_step(disc, &ac)?;
        ac_solves += 1;
        counter.ac.fetch_add(1, Ordering::Relaxed);

        let mut ns = NsStepInput::new(&state.u, &state.rho_prev, &u_k, &phi_next, &state.phi, params);
        ns.gravity = config.gravity;
        if data.is_some() {
            ns.forcing = Some(&ns_source);
            ns.dirichlet = Some(&trace);
        }
        let sol = solve_ns_step(disc, &ns)?;
        ns_solves += 1;
        counter.ns.fetch_add(1, Ordering::Relaxed);

        let dphi: Vec<f64> = phi_next.iter().zip(&phi_k).map(|(a, b)| a - b).collect();
        let du: Vec<f64> = sol.u.iter().zip(&u_k).map(|(a, b)| a - b).collect();
        let dphi_l2 = l2_norm(disc, &disc.phase, &dphi)?;
        let du_norms = velocity_norms(disc, &du)?;
        let variation = dphi_l2 + du_norms.l2;
        variations.push(variation);
        contraction_history.push(dphi_l2 + du_norms.grad);
        max_iterate = max_iterate.max(max_abs(&phi_next));

        if monitors.any() {
            let mut found = Vec::new();
            if monitors.max_principle {
                found.push(check_max_principle(&phi_next, monitors.max_principle_tolerance));
            }
            if monitors.phase_bounds {
                found.extend(check_phase_bounds(disc, &phi_next, params, slack)?);
            }
            if monitors.velocity_bounds {
                found.extend(check_velocity_bounds(disc, &sol.u, &phi_next, &state.u, params, slack)?);
            }
            if config.strict {
                if let Some(bad) = found.iter().find(|m| !m.passed) {
                    return Err(Error::MonitorViolation {
                        name: bad.name.to_string(),
                        step: step_index,
                        observed: bad.observed_value,
                        bound: bad.constant_value * bad.slack,
                    });
                }
            }
            merge_monitors(&mut merged, found);
        }

        phi_k = phi_next;
        u_k = sol.u;

        if variation < config.tolerance {
            let next = State::new(disc, params, u_k, sol.p, phi_k, t_next)?;
            let errors = match mms {
                Some(m) => Some(state_errors(disc, &next, m)?),
                None => None,
            };
            let report = StepReport {
                step_index,
                time: t_next,
                dt: params.dt,
                iterations: variations.len(),
                ns_solves,
                ac_solves,
                contraction: estimate_contraction(&contraction_history),
                variations,
                contraction_history,
                max_abs_phi: next.max_abs_phi(),
                max_abs_phi_iterates: max_iterate,
                monitors: merged,
                errors,
                stabilization_residual: params.beta * params.gamma / (params.eta * params.eta) * dphi_l2,
                divergence_residual: sol.divergence_residual,
                clamped_points: sol.clamped_points,
            };
            return Ok((next, report));
        }
    }
    Err(Error::NonConvergence {
        iterations: config.max_iterations,
        last: variations.last().copied().unwrap_or(f64::NAN),
        history: variations,
    })
}

/// Receives each accepted step.
pub trait ReportSink {
    fn on_step(&mut self, report: &StepReport, state: &State) -> Result<()>;
}

/// Sink that discards everything.
pub struct NullSink;

impl ReportSink for NullSink {
    fn on_step(&mut self, _: &StepReport, _: &State) -> Result<()> {
        Ok(())
    }
}

impl<F: FnMut(&StepReport, &State) -> Result<()>> ReportSink for F {
    fn on_step(&mut self, report: &StepReport, state: &State) -> Result<()> {
        self(report, state)
    }
}

/// Outcome of a run; `failure` holds the error that stopped it early.
#[derive(Debug)]
pub struct RunOutcome {
    pub reports: Vec<StepReport>,
    pub final_state: State,
    pub admissibility: Admissibility,
    pub total_ns_solves: usize,
    pub total_ac_solves: usize,
    pub failure: Option<Error>,
}

impl RunOutcome {
    pub fn total_iterations(&self) -> usize {
        self.reports.iter().map(|r| r.iterations).sum()
    }

    /// `max_n ||u^n - u(t_n)||`, `max_n ||phi^n - phi(t_n)||` and the H1
    /// counterpart for phi.
    pub fn max_errors(&self) -> Option<[f64; 3]> {
        let mut acc: Option<[f64; 3]> = None;
        for e in self.reports.iter().filter_map(|r| r.errors) {
            let a = acc.get_or_insert([0.0; 3]);
            for i in 0..3 {
                a[i] = a[i].max(e[i]);
            }
        }
        acc
    }

    pub fn max_abs_phi(&self) -> f64 {
        self.reports.iter().fold(0.0, |m, r| m.max(r.max_abs_phi_iterates))
    }

    pub fn monitors_passed(&self) -> bool {
        self.reports.iter().all(|r| r.monitors_passed())
    }

    pub fn into_result(self) -> Result<Self> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

/// Step sizes covering `[t0, t0 + t_final]`: full steps of `dt` and, if
/// needed, a shorter final one.
pub fn step_schedule(dt: f64, t_final: f64) -> Vec<f64> {
    let n_full = (t_final / dt + 1e-9).floor() as usize;
    let mut steps = vec![dt; n_full];
    let rest = t_final - n_full as f64 * dt;
    if rest > 1e-9 * dt {
        steps.push(rest);
    }
    steps
}

/// March `initial` to `initial.t + config.t_final`.
pub fn run_simulation(
    disc: &Discretization,
    params: &MixtureParams<f64>,
    config: &SolverConfig,
    initial: State,
    sink: &mut dyn ReportSink,
) -> Result<RunOutcome> {
    params.validate()?;
    if !(config.tolerance > 0.0) || config.max_iterations == 0 {
        return Err(Error::InvalidArgument(
            "fixed-point tolerance and iteration cap must be positive".into(),
        ));
    }
    let admissibility = admissibility_check(params, config.method);
    let mms = config.mms.then(|| ManufacturedSolution::new(*params));
    let counter = SolveCounter::default();
    let t0 = initial.t;
    let mut state = initial;
    let mut reports = Vec::new();
    let mut failure = None;
    let schedule = step_schedule(params.dt, config.t_final);
    let n_full = schedule.iter().filter(|&&s| s == params.dt).count();
    for (i, &dt) in schedule.iter().enumerate() {
        let step_params = params.with_dt(dt);
        let step = fixed_point_step(disc, &state, &step_params, config, mms.as_ref(), i + 1, &counter);
        let (mut next, report) = match step {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        // step times from the index, not by accumulation
        next.t = if i < n_full { t0 + (i + 1) as f64 * params.dt } else { t0 + config.t_final };
        let report = StepReport { time: next.t, ..report };
        if let Err(e) = sink.on_step(&report, &next) {
            failure = Some(e);
            break;
        }
        reports.push(report);
        state = next;
    }
    Ok(RunOutcome {
        reports,
        final_state: state,
        admissibility,
        total_ns_solves: counter.ns_solves(),
        total_ac_solves: counter.ac_solves(),
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Rect;
    use crate::scenario;

    fn disc(n: usize) -> Discretization {
        Discretization::new(Rect::unit_square(), n).unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("XYZ".parse::<Method>().is_err());
        assert_eq!(Method::Fip.linearization(), Linearization::Picard);
    }

    #[test]
    fn admissibility_thresholds() {
        let p = MixtureParams::benchmark().with_dt(1.0 / 1300.0);
        let a = admissibility_check(&p.with_beta(0.0), Method::Fin);
        assert!(a.dt_ok && !a.beta_ok && a.warnings.len() == 1);
        assert!(admissibility_check(&p.with_beta(1.125), Method::Fin).warnings.is_empty());
        assert!(!admissibility_check(&p.with_beta(1.5), Method::Fip).beta_ok);
        assert!(admissibility_check(&p.with_beta(0.0), Method::Sce).beta_ok);
        let big = p.with_dt(1.0 / 13.0 * 0.01 * 1.01);
        assert!(!admissibility_check(&big, Method::Sce).dt_ok);
    }

    #[test]
    fn schedule_truncates_last_step() {
        assert_eq!(step_schedule(0.25, 1.0), vec![0.25; 4]);
        let s = step_schedule(0.3, 1.0);
        assert_eq!(s.len(), 4);
        assert!((s[3] - 0.1).abs() < 1e-12);
        assert_eq!(step_schedule(0.1, 0.3).len(), 3);
        assert!(step_schedule(0.1, 0.0).is_empty());
    }

    #[test]
    fn rest_state_is_a_fixed_point() {
        let d = disc(4);
        let p = MixtureParams::benchmark().with_dt(1.0 / 1300.0);
        for phi0 in [1.0, -1.0] {
            let s = State::new(
                &d,
                &p,
                vec![0.0; d.velocity.dof_count],
                vec![0.0; d.pressure.dof_count],
                vec![phi0; d.phase.dof_count],
                0.0,
            )
            .unwrap();
            let config = SolverConfig {
                t_final: 3.0 * p.dt,
                ..Default::default()
            };
            let out = run_simulation(&d, &p, &config, s.clone(), &mut NullSink).unwrap().into_result().unwrap();
            assert_eq!(out.reports.len(), 3);
            assert!(out.reports.iter().all(|r| r.iterations == 1 && r.monitors_passed()));
            for (a, b) in out.final_state.phi.iter().zip(&s.phi) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!(max_abs(&out.final_state.u) < 1e-12);
        }
    }

    #[test]
    fn solve_accounting_matches_reports() {
        let d = disc(6);
        let p = MixtureParams::benchmark().with_beta(1.125);
        let p = p.with_dt(scenario::admissible_dt(&p));
        let s = scenario::quiescent_drop(&d, &p).unwrap();
        let config = SolverConfig {
            t_final: 2.5 * p.dt,
            ..Default::default()
        };
        let mut seen = Vec::new();
        let mut sink = |r: &StepReport, st: &State| {
            seen.push((r.step_index, st.t));
            Ok(())
        };
        let out = run_simulation(&d, &p, &config, s, &mut sink).unwrap().into_result().unwrap();
        assert_eq!(out.reports.len(), 3);
        assert_eq!(seen.len(), 3);
        assert!((out.final_state.t - 2.5 * p.dt).abs() < 1e-15);
        assert!((out.reports[2].dt - 0.5 * p.dt).abs() < 1e-15);
        let per_step: usize = out.reports.iter().map(|r| r.ns_solves).sum();
        assert_eq!(per_step, out.total_ns_solves);
        assert_eq!(out.total_iterations(), out.total_ns_solves);
        assert_eq!(out.total_ac_solves, out.total_ns_solves);
        // too coarse for the nodal maximum principle; energy bounds still hold
        let bounds = out.reports.iter().flat_map(|r| &r.monitors);
        assert!(bounds.filter(|m| m.name != crate::diagnostics::names::MAX_PRINCIPLE).all(|m| m.passed));
    }

    #[test]
    fn iteration_cap_reports_history() {
        let d = disc(4);
        let p = MixtureParams::benchmark().with_beta(1.125);
        let p = p.with_dt(scenario::admissible_dt(&p));
        let s = scenario::quiescent_drop(&d, &p).unwrap();
        let config = SolverConfig {
            t_final: p.dt,
            max_iterations: 2,
            tolerance: 1e-300,
            ..Default::default()
        };
        let out = run_simulation(&d, &p, &config, s, &mut NullSink).unwrap();
        assert!(out.reports.is_empty());
        match out.failure {
            Some(Error::NonConvergence { iterations, history, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(history.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sink_error_stops_run_and_keeps_reports() {
        let d = disc(4);
        let p = MixtureParams::benchmark().with_beta(1.125);
        let p = p.with_dt(scenario::admissible_dt(&p));
        let s = scenario::quiescent_drop(&d, &p).unwrap();
        let config = SolverConfig {
            t_final: 5.0 * p.dt,
            ..Default::default()
        };
        let mut n = 0;
        let mut sink = |_: &StepReport, _: &State| {
            n += 1;
            if n == 2 {
                Err(Error::InvalidArgument("stop".into()))
            } else {
                Ok(())
            }
        };
        let out = run_simulation(&d, &p, &config, s, &mut sink).unwrap();
        assert_eq!(out.reports.len(), 1);
        assert!(matches!(out.failure, Some(Error::InvalidArgument(_))));
    }

    #[test]
    fn runs_are_deterministic() {
        let d = disc(5);
        let p = MixtureParams::benchmark().with_beta(2.0);
        let p = p.with_dt(scenario::admissible_dt(&p));
        let s = scenario::quiescent_drop(&d, &p).unwrap();
        let config = SolverConfig {
            method: Method::Fip,
            t_final: 2.0 * p.dt,
            ..Default::default()
        };
        let a = run_simulation(&d, &p, &config, s.clone(), &mut NullSink).unwrap();
        let b = run_simulation(&d, &p, &config, s, &mut NullSink).unwrap();
        assert_eq!(a.final_state, b.final_state);
        assert_eq!(a.reports, b.reports);
    }

    #[test]
    fn manufactured_mode_records_errors() {
        let d = disc(6);
        let p = MixtureParams::benchmark().with_beta(1.125).with_dt(1.0 / 1300.0);
        let s = scenario::mms_initial_state(&d, &p).unwrap();
        let config = SolverConfig {
            t_final: 2.0 * p.dt,
            mms: true,
            ..Default::default()
        };
        let out = run_simulation(&d, &p, &config, s, &mut NullSink).unwrap().into_result().unwrap();
        let e = out.max_errors().unwrap();
        assert!(e.iter().all(|v| v.is_finite() && *v < 1e-2), "{e:?}");
        assert!(out.reports.iter().all(|r| r.monitors.is_empty()));
    }

    #[test]
    fn merge_keeps_worst_and_sticky_failure() {
        let mut acc = Vec::new();
        merge_monitors(&mut acc, [BoundMonitor::new("a", 1.0, 2.0, 1.0)]);
        merge_monitors(&mut acc, [BoundMonitor::new("a", 1.0, 0.5, 1.0)]);
        assert_eq!(acc.len(), 1);
        assert_eq!(acc[0].observed_value, 2.0);
        assert!(!acc[0].passed);
    }
}
