//! The three sweep commands. Each returns its CSV rows; writing is left to
//! [`run`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use rayon::prelude::*;

use qcertify_core::certify::{run_trial_observed, run_trials, success_from_runs};
use qcertify_core::chernoff::{
    classical_chernoff_phase_gate, dephasing_qcb, dephasing_qcb_small_eps, optimize_input_state, phase_gate_qcb, InputGrid,
};
use qcertify_core::rng::trial_rng;
use qcertify_core::{
    AveragedPhaseGate, CertificationConfig, ChernoffBound, ChernoffResult, DensityMatrix, ErrorDistribution, PhaseGate,
    PhaseGateParams, Spec,
};

use crate::config::{BoundKind, CertifyConfig, ChernoffConfig, ConfigFile, ConvergenceConfig, SweepVariable};
use crate::error::CliError;
use crate::fit::fit_power_law;
use crate::output::{fmt_f64, write_csv, write_metadata};

pub const CHERNOFF_HEADER: [&str; 10] = [
    "bound",
    "parameter",
    "value",
    "eps",
    "n_iterations",
    "alpha",
    "beta",
    "xi",
    "xi_per_iteration",
    "s_min",
];

pub const CERTIFY_HEADER: [&str; 7] = ["x_c", "m", "utility", "criterion", "success", "stderr", "trials"];

pub const CONVERGENCE_HEADER: [&str; 5] = ["n0", "m", "mean_posterior_mean", "mean_posterior_variance", "trials"];

pub const FIT_HEADER: [&str; 10] = [
    "m",
    "prefactor",
    "exponent",
    "exponent_ci_low",
    "exponent_ci_high",
    "unit_slope_prefactor",
    "unit_slope_prefactor_ci_low",
    "unit_slope_prefactor_ci_high",
    "points",
    "fit_min_n0",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Chernoff,
    Certify,
    Convergence,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Chernoff => "chernoff",
            CommandKind::Certify => "certify",
            CommandKind::Convergence => "convergence",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

fn missing(section: &str) -> CliError {
    CliError::Config(format!("config has no [{section}] section"))
}

/// Loads the config, runs `command` and writes the CSV plus its metadata.
pub fn run(command: CommandKind, opts: &RunOptions) -> Result<(), CliError> {
    let file = ConfigFile::load(&opts.config)?;
    let seed = opts.seed.or(file.seed).unwrap_or(0);
    match command {
        CommandKind::Chernoff => {
            let cfg = file.chernoff.ok_or_else(|| missing("chernoff"))?;
            if opts.trials.is_some() {
                log::warn!("--trials has no effect on the chernoff command");
            }
            cfg.validate()?;
            let rows = chernoff_rows(&cfg)?;
            write_csv(&opts.out, &CHERNOFF_HEADER, &rows)?;
            write_metadata(&opts.out, command.name(), seed, &cfg)
        }
        CommandKind::Certify => {
            let mut cfg = file.certify.ok_or_else(|| missing("certify"))?;
            if let Some(t) = opts.trials {
                cfg.trials = t;
            }
            cfg.validate()?;
            let rows = certify_rows(&cfg, seed)?;
            write_csv(&opts.out, &CERTIFY_HEADER, &rows)?;
            write_metadata(&opts.out, command.name(), seed, &cfg)
        }
        CommandKind::Convergence => {
            let mut cfg = file.convergence.ok_or_else(|| missing("convergence"))?;
            if let Some(t) = opts.trials {
                cfg.trials = t;
            }
            cfg.validate()?;
            let (rows, fits) = convergence_rows(&cfg, seed)?;
            write_csv(&opts.out, &CONVERGENCE_HEADER, &rows)?;
            write_csv(&fit_path(&opts.out), &FIT_HEADER, &fits)?;
            write_metadata(&opts.out, command.name(), seed, &cfg)
        }
    }
}

/// `<out>` with its extension replaced by `fit.csv`.
pub fn fit_path(out: &std::path::Path) -> PathBuf {
    out.with_extension("fit.csv")
}

struct ChernoffPoint {
    value: f64,
    eps: f64,
    n: u32,
}

fn chernoff_point(cfg: &ChernoffConfig, p: &ChernoffPoint) -> Result<(ChernoffResult, f64, f64), CliError> {
    let (mut theta, mut eps, mut tau, mut alpha) = (cfg.theta, p.eps, cfg.tau, cfg.alpha);
    match cfg.sweep {
        SweepVariable::Theta => theta = p.value,
        SweepVariable::Eps => eps = p.value,
        SweepVariable::Tau => tau = p.value,
        SweepVariable::Alpha => alpha = p.value,
    }
    let n = p.n;
    let plus = (PI / 2.0, 0.0);
    Ok(match cfg.bound {
        BoundKind::QuantumPhaseGate | BoundKind::RandomError => {
            let error = if cfg.bound == BoundKind::QuantumPhaseGate {
                ErrorDistribution::deterministic(eps)
            } else {
                ErrorDistribution::uniform_with_nodes(eps, cfg.quadrature_nodes)?
            };
            let params = PhaseGateParams::z(theta);
            if cfg.optimize_input {
                let best = optimize_input_state(
                    &PhaseGate::new(params),
                    &AveragedPhaseGate::new(params, error),
                    n,
                    InputGrid::default(),
                )?;
                (best.result, best.alpha, best.beta)
            } else {
                let rho_in = DensityMatrix::pure(alpha, cfg.beta);
                (phase_gate_qcb(&params, &error, &rho_in, n)?, alpha, cfg.beta)
            }
        }
        BoundKind::Dephasing => (dephasing_qcb(tau, eps, n)?, plus.0, plus.1),
        BoundKind::DephasingSmallEps => {
            let per = dephasing_qcb_small_eps(tau, eps, n);
            let result = ChernoffResult {
                xi: ChernoffBound::Finite(per * n as f64),
                s_min: 0.5,
                iterations: n,
            };
            (result, plus.0, plus.1)
        }
        BoundKind::ClassicalPhaseGate => (classical_chernoff_phase_gate(theta, eps, n)?, plus.0, plus.1),
    })
}

fn bound_cell(b: ChernoffBound) -> String {
    match b {
        ChernoffBound::Finite(v) => fmt_f64(v),
        ChernoffBound::Infinite => "inf".to_string(),
    }
}

pub fn chernoff_rows(cfg: &ChernoffConfig) -> Result<Vec<Vec<String>>, CliError> {
    let values = cfg.range.values("chernoff.range")?;
    let series: Vec<f64> = if cfg.sweep == SweepVariable::Eps {
        vec![f64::NAN]
    } else {
        cfg.eps.clone()
    };
    let mut points = Vec::new();
    for &eps in &series {
        for &n in &cfg.iterations {
            for &value in &values {
                points.push(ChernoffPoint { value, eps, n });
            }
        }
    }
    points
        .par_iter()
        .map(|p| {
            let (result, alpha, beta) = chernoff_point(cfg, p)?;
            let eps = if cfg.sweep == SweepVariable::Eps { p.value } else { p.eps };
            Ok(vec![
                cfg.bound.label().to_string(),
                cfg.sweep.label().to_string(),
                fmt_f64(p.value),
                fmt_f64(eps),
                p.n.to_string(),
                fmt_f64(alpha),
                fmt_f64(beta),
                bound_cell(result.xi),
                bound_cell(result.per_iteration()),
                fmt_f64(result.s_min),
            ])
        })
        .collect()
}

fn base_config(device: &crate::config::ModelSection, spec: Spec, n0: usize, m: usize) -> CertificationConfig {
    let mut c = CertificationConfig::new(device.kind(), device.x_true, spec);
    c.support = device.support();
    c.n_particles = device.particles;
    c.sampling = device.sampling();
    c.n0 = n0;
    c.m = m;
    c
}

/// One batch of trials per `(m, utility)`; every spec centre and criterion
/// is evaluated on the same final posteriors.
pub fn certify_rows(cfg: &CertifyConfig, seed: u64) -> Result<Vec<Vec<String>>, CliError> {
    let device = cfg.device();
    let centers = cfg.center_values()?;
    let specs = centers
        .iter()
        .map(|&c| Spec::new(c, cfg.half_width))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for &m in &cfg.m {
        for &utility in &cfg.utility {
            let mut run_cfg = base_config(&device, specs[0], cfg.n0, m);
            run_cfg.utility = utility.into();
            log::info!("certify: m = {m}, utility {}, {} trials", run_cfg.utility.label(), cfg.trials);
            let runs = run_trials(&run_cfg, cfg.trials, seed)?;
            let aborted = runs.iter().filter(|r| r.aborted).count();
            if aborted > 0 {
                log::warn!("{aborted} of {} trials aborted on filter impoverishment", runs.len());
            }
            for criterion in cfg.criteria() {
                for spec in &specs {
                    let est = success_from_runs(&runs, device.x_true, spec, &criterion)?;
                    rows.push(vec![
                        fmt_f64(spec.center),
                        m.to_string(),
                        run_cfg.utility.label().to_string(),
                        criterion.label().to_string(),
                        fmt_f64(est.estimate),
                        fmt_f64(est.stderr),
                        est.trials.to_string(),
                    ]);
                }
            }
        }
    }
    Ok(rows)
}

/// Posterior mean and variance at each budget divisible by `m`, averaged
/// over trials, plus one power-law fit of the variance per `m`.
pub fn convergence_rows(cfg: &ConvergenceConfig, seed: u64) -> Result<(Vec<Vec<String>>, Vec<Vec<String>>), CliError> {
    let device = cfg.device();
    let budgets = cfg.budgets();
    let max_budget = *budgets.last().expect("validated non-empty");
    let (lo, hi) = device.support();
    let spec = Spec::new(0.5 * (lo + hi), 0.5 * (hi - lo))?;
    let fit_min = cfg.fit_min();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &m in &cfg.m {
        let mut run_cfg = base_config(&device, spec, max_budget, m);
        run_cfg.utility = cfg.utility.into();
        run_cfg.validate()?;
        log::info!("convergence: m = {m}, {} trials up to N0 = {max_budget}", cfg.trials);
        let per_trial: Vec<BTreeMap<usize, (f64, f64)>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|i| {
                let mut seen = BTreeMap::new();
                run_trial_observed(&run_cfg, trial_rng(seed, i), |info| {
                    if budgets.binary_search(&info.actions_used).is_ok() {
                        seen.insert(info.actions_used, (info.filter.posterior_mean(), info.filter.posterior_variance()));
                    }
                })?;
                Ok(seen)
            })
            .collect::<Result<_, qcertify_core::Error>>()?;
        let mut fit_points = Vec::new();
        for &n0 in &budgets {
            let values: Vec<(f64, f64)> = per_trial.iter().filter_map(|t| t.get(&n0).copied()).collect();
            if values.is_empty() {
                continue;
            }
            let k = values.len() as f64;
            let mean = values.iter().map(|v| v.0).sum::<f64>() / k;
            let var = values.iter().map(|v| v.1).sum::<f64>() / k;
            rows.push(vec![n0.to_string(), m.to_string(), fmt_f64(mean), fmt_f64(var), values.len().to_string()]);
            if n0 as f64 >= fit_min {
                fit_points.push((n0 as f64, var));
            }
        }
        let fit = fit_power_law(&fit_points)
            .ok_or_else(|| CliError::Runtime(format!("too few budgets to fit for m = {m}")))?;
        fits.push(vec![
            m.to_string(),
            fmt_f64(fit.prefactor),
            fmt_f64(fit.exponent),
            fmt_f64(fit.exponent_ci.0),
            fmt_f64(fit.exponent_ci.1),
            fmt_f64(fit.unit_slope_prefactor),
            fmt_f64(fit.unit_slope_prefactor_ci.0),
            fmt_f64(fit.unit_slope_prefactor_ci.1),
            fit.points.to_string(),
            fmt_f64(fit_min),
        ]);
    }
    Ok((rows, fits))
}
