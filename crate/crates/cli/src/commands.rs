use std::collections::BTreeMap;
use std::fs;

use l2gauss_core::convergence::{run_convergence, ConvergenceReport, DataRule};
use l2gauss_core::fredholm::{fredholm_det_analytic, fredholm_det_matrix, fredholm_det_series, DetResult, DetRoute};
use l2gauss_core::gaussian::{sample_gaussian_vector, sample_paths, NoiseStream};
use l2gauss_core::grid::{embed_piecewise_constant, midpoints};
use l2gauss_core::inference::{fit_bm_noise, fit_mixed, Route};
use l2gauss_core::likelihood::functional_loglik;
use l2gauss_core::operators::CovarianceQuadrature;
use l2gauss_core::{GridFunction, Kernel, ModelParams, OperatorSpec};
use serde::Serialize;

use crate::error::CliError;
use crate::io::{read_samples, write_json, write_path_csv};
use crate::{
    ConvergeArgs, DetRouteArg, Family, FitArgs, FredholmArgs, LoglikArgs, ModelArgs, RouteArg, RuleArg,
    SimulateArgs,
};

fn model_params(m: &ModelArgs) -> Result<ModelParams, CliError> {
    match m.model {
        Family::Mixed => {
            if m.lambda.is_some() {
                return Err(CliError::Usage("--lambda does not apply to the mixed model".into()));
            }
            let delta = m
                .delta
                .ok_or_else(|| CliError::Usage("the mixed model needs --delta".into()))?;
            Ok(ModelParams::mixed(m.alpha, delta)?)
        }
        Family::BmNoise => {
            if m.delta.is_some() {
                return Err(CliError::Usage("--delta does not apply to the bm-noise model".into()));
            }
            let lambda = m
                .lambda
                .ok_or_else(|| CliError::Usage("the bm-noise model needs --lambda".into()))?;
            Ok(ModelParams::bm_noise(m.alpha, lambda)?)
        }
    }
}

enum Draw {
    Path(OperatorSpec),
    Vector(ModelParams),
}

#[derive(Serialize)]
struct Manifest {
    model: String,
    params: BTreeMap<&'static str, f64>,
    n: usize,
    seed: u64,
    reps: usize,
    t_end: f64,
    files: Vec<String>,
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    if a.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    if a.t_end.is_nan() || a.t_end <= 0.0 {
        return Err(CliError::Usage("--t-end must be positive".into()));
    }
    let mut params = BTreeMap::new();
    let (draw, t_end) = match a.model.as_str() {
        "bm" => {
            params.insert("lambda", a.lambda);
            (Draw::Path(OperatorSpec::integral(Kernel::Forward.scaled(a.lambda))), a.t_end)
        }
        "ou" => {
            params.insert("alpha", a.alpha);
            params.insert("lambda", a.lambda);
            let model = ModelParams::ou(a.alpha, a.lambda)?;
            (Draw::Path(model.operator()?), a.t_end)
        }
        "mixed" => {
            let delta = a
                .delta
                .ok_or_else(|| CliError::Usage("the mixed model needs --delta".into()))?;
            params.insert("alpha", a.alpha);
            params.insert("delta", delta);
            (Draw::Vector(ModelParams::mixed(a.alpha, delta)?), 1.0)
        }
        "bm-noise" => {
            params.insert("alpha", a.alpha);
            params.insert("lambda", a.lambda);
            (Draw::Vector(ModelParams::bm_noise(a.alpha, a.lambda)?), 1.0)
        }
        other => {
            let k: Kernel = other
                .parse()
                .map_err(|_| CliError::Usage(format!("unknown model `{other}`")))?;
            params.insert("scale", a.scale);
            (Draw::Path(OperatorSpec::integral(k.scaled(a.scale))), a.t_end)
        }
    };

    let stream = NoiseStream::new(a.seed);
    let ys: Vec<Vec<f64>> = if a.reps == 0 {
        Vec::new()
    } else {
        match &draw {
            Draw::Path(op) => sample_paths(op, a.n, &stream, a.reps, &CovarianceQuadrature::on_interval(t_end))?
                .into_iter()
                .map(GridFunction::into_values)
                .collect(),
            Draw::Vector(model) => {
                let cov = model.operator()?.matrix_approx(a.n)?;
                sample_gaussian_vector(&cov, &stream, a.reps)?
                    .into_iter()
                    .map(|s| s.values)
                    .collect()
            }
        }
    };

    fs::create_dir_all(&a.out).map_err(|e| CliError::Output(format!("{}: {e}", a.out.display())))?;
    let t: Vec<f64> = midpoints(a.n).into_iter().map(|m| m * t_end).collect();
    let mut files = Vec::with_capacity(ys.len());
    for (r, y) in ys.iter().enumerate() {
        let name = format!("{}_{r:04}.csv", a.prefix);
        write_path_csv(&a.out.join(&name), &t, y)?;
        files.push(name);
    }
    let manifest = Manifest {
        model: a.model.clone(),
        params,
        n: a.n,
        seed: a.seed,
        reps: a.reps,
        t_end,
        files,
    };
    write_json(Some(&a.out.join("manifest.json")), &manifest)
}

pub fn loglik(a: &LoglikArgs) -> Result<(), CliError> {
    let model = model_params(&a.model)?;
    let samples = read_samples(&a.data)?;
    let f = embed_piecewise_constant(&samples, a.n_embed)?;
    let n_pen = a.n_pen.unwrap_or(samples.len());
    let value = functional_loglik(&f, &model, n_pen, a.corrected)?;
    write_json(None, &value)
}

#[derive(Serialize)]
struct DetOutput {
    log_det: Option<f64>,
    det: f64,
    route: DetRoute,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_max: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    terms: Vec<f64>,
}

impl From<DetResult> for DetOutput {
    fn from(d: DetResult) -> Self {
        DetOutput {
            log_det: d.log_det,
            det: d.det,
            route: d.route,
            n: d.n,
            k_max: d.k_max,
            terms: d.terms,
        }
    }
}

pub fn fredholm(a: &FredholmArgs) -> Result<(), CliError> {
    let base: Kernel = a
        .kernel
        .parse()
        .map_err(|e: l2gauss_core::Error| CliError::Usage(e.to_string()))?;
    let result = match a.route {
        DetRouteArg::Series => fredholm_det_series(&base.scaled(a.scale), a.n.unwrap_or(64), a.k_max)?,
        DetRouteArg::Matrix => fredholm_det_matrix(&base.scaled(a.scale), a.n.unwrap_or(256))?,
        DetRouteArg::Analytic => {
            let model = match base {
                Kernel::Constant(c) => ModelParams::mixed(1.0, c * a.scale)?,
                Kernel::Min if a.scale > 0.0 => ModelParams::bm_noise(1.0, a.scale.sqrt())?,
                _ => {
                    return Err(CliError::Usage(format!(
                        "no closed-form determinant for kernel `{}` (available: ones, brownian)",
                        a.kernel
                    )))
                }
            };
            fredholm_det_analytic(&model)?
        }
    };
    write_json(None, &DetOutput::from(result))
}

pub fn fit(a: &FitArgs) -> Result<(), CliError> {
    let samples = read_samples(&a.data)?;
    let result = match (a.model, a.route) {
        (Family::Mixed, RouteArg::Functional) => {
            let f = embed_piecewise_constant(&samples, a.n_embed)?;
            fit_mixed(&f, Route::Functional, a.tol, a.max_iter)?
        }
        (Family::Mixed, RouteArg::Mv) => {
            let y = GridFunction::new(samples.ys())?;
            fit_mixed(&y, Route::Multivariate, a.tol, a.max_iter)?
        }
        (Family::BmNoise, RouteArg::Functional) => {
            let f = embed_piecewise_constant(&samples, a.n_embed)?;
            fit_bm_noise(&f, a.n_pen.unwrap_or(samples.len()), a.tol)?
        }
        (Family::BmNoise, RouteArg::Mv) => {
            return Err(CliError::Usage("the bm-noise fit supports only --route functional".into()))
        }
    };
    write_json(None, &result)
}

pub fn converge(a: &ConvergeArgs) -> Result<(), CliError> {
    let model = model_params(&a.model)?;
    let rule = match a.rule {
        RuleArg::Fixed => DataRule::FixedFunction,
        RuleArg::Simulated => DataRule::Simulated { seed: a.seed },
    };
    let report = run_convergence(&model, &a.schedule, rule)?;
    if let Some(path) = &a.flat {
        write_flat(path, &report)?;
    }
    write_json(a.out.as_deref(), &report)
}

fn write_flat(path: &std::path::Path, report: &ConvergenceReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Output(e.to_string()))?;
    let out = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(["n", "quad", "det", "D", "total"]).map_err(out)?;
    for r in &report.rows {
        w.write_record([
            r.n.to_string(),
            r.gap_quad.to_string(),
            r.gap_det.to_string(),
            r.gap_d.to_string(),
            r.gap_total.to_string(),
        ])
        .map_err(out)?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}
