use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use fracheat::estimates::{
    decay_fit, decay_fit_rescaled, dilation_sweep, kernel_mixed_norm_fit, EstimateNorm, Forcing,
    SweepCase,
};
use fracheat::grid::{geometric_times, uniform_times};
use fracheat::norms::{lp_norm, NormSpec};
use fracheat::nse::{
    max_divergence, regularity_check, solve_nse_picard, solve_potential_eq, PicardParams,
    PotentialParams, VectorField,
};
use fracheat::semigroup::{apply_semigroup, Alpha};
use fracheat::{contamination, read_field, synthesize_field, Field, GridSpec, Recipe, TimeSeries};

use crate::config::{ExperimentConfig, Resolver};
use crate::report::{field_bytes, InputDigest};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CommandName {
    Propagate,
    Norm,
    Verify,
    DecayFit,
    KernelNorm,
    NseSolve,
    PotentialSolve,
}

impl CommandName {
    /// Config section with the command's parameters; also the report file stem.
    pub fn section(self) -> &'static str {
        match self {
            CommandName::Propagate => "propagate",
            CommandName::Norm => "norm",
            CommandName::Verify => "verify",
            CommandName::DecayFit => "decay-fit",
            CommandName::KernelNorm => "kernel-norm",
            CommandName::NseSolve => "nse-solve",
            CommandName::PotentialSolve => "potential-solve",
        }
    }
}

/// What a command produced, before it is wrapped into a report.
pub struct Outcome {
    pub result: Value,
    /// Plot-ready rows: one per time sample or per dilation factor.
    pub csv: String,
    pub inputs: Vec<InputDigest>,
    /// Extra files (name, bytes) written next to the reports.
    pub files: Vec<(String, Vec<u8>)>,
}

/// Runs `cmd` against `cfg`, returning the resolved config (every value
/// used, defaults included) and the outcome.
pub fn execute(cmd: CommandName, cfg: &ExperimentConfig) -> Result<(ExperimentConfig, Outcome), CliError> {
    let mut r = Resolver::new(cfg);
    let seed: Option<u64> = r.optional("", "seed")?;
    let outcome = match cmd {
        CommandName::Propagate => propagate(&mut r, seed)?,
        CommandName::Norm => norm(&mut r, seed)?,
        CommandName::Verify => verify(&mut r, seed)?,
        CommandName::DecayFit => decay(&mut r, seed)?,
        CommandName::KernelNorm => kernel_norm(&mut r)?,
        CommandName::NseSolve => nse_solve(&mut r, seed)?,
        CommandName::PotentialSolve => potential_solve(&mut r, seed)?,
    };
    Ok((r.finish()?, outcome))
}

fn bad(msg: String) -> CliError {
    CliError::Config { line: None, msg }
}

fn recipe(text: &str) -> Recipe {
    text.parse().expect("built-in recipe parses")
}

/// Replaces the seed of random recipes by the run seed, if one is set.
fn reseed(recipe: Recipe, seed: Option<u64>) -> Recipe {
    match seed {
        Some(s) => recipe.with_seed(s),
        None => recipe,
    }
}

fn grid_spec(r: &mut Resolver, dim: usize, size: usize, length: f64) -> Result<GridSpec, CliError> {
    let dim = r.value("grid", "dim", dim)?;
    let size = r.value("grid", "size", size)?;
    let length = r.value("grid", "length", length)?;
    Ok(GridSpec::new(dim, size, length)?)
}

fn grid(r: &mut Resolver, dim: usize, size: usize, length: f64) -> Result<Arc<GridSpec>, CliError> {
    grid_spec(r, dim, size, length).map(Arc::new)
}

fn seeded_recipe(
    r: &mut Resolver,
    section: &str,
    key: &str,
    default: &str,
    seed: Option<u64>,
) -> Result<Recipe, CliError> {
    Ok(reseed(r.value(section, key, recipe(default))?, seed))
}

/// `key_file = path` reads a stored field (its own grid applies); otherwise
/// `key = recipe` is synthesized on the `[grid]` section.
fn input_field(
    r: &mut Resolver,
    section: &str,
    key: &str,
    grid_default: (usize, usize, f64),
    default: &str,
    seed: Option<u64>,
) -> Result<(Field, InputDigest), CliError> {
    if let Some(path) = r.optional::<String>(section, &format!("{key}_file"))? {
        let bytes =
            std::fs::read(&path).map_err(|e| CliError::io(format!("reading field file {path}"), e))?;
        let field = read_field(bytes.as_slice())?;
        return Ok((field, InputDigest::new(key, format!("file {path}"), &bytes)));
    }
    let (dim, size, length) = grid_default;
    let g = grid(r, dim, size, length)?;
    let rec = seeded_recipe(r, section, key, default, seed)?;
    let field = synthesize_field(&g, &rec)?;
    let digest = InputDigest::of_field(key, format!("recipe {rec}"), &field)?;
    Ok((field, digest))
}

fn steps(r: &mut Resolver, section: &str, default: usize) -> Result<usize, CliError> {
    let n = r.value(section, "steps", default)?;
    if n == 0 {
        return Err(bad(format!("{section}.steps must be positive")));
    }
    Ok(n)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

#[derive(Serialize)]
struct Sample {
    t: f64,
    l2: f64,
    linf: f64,
    contamination: f64,
}

fn sample_csv(rows: &[Sample]) -> String {
    let mut out = String::from("t,l2,linf,contamination\n");
    for s in rows {
        let _ = writeln!(out, "{:?},{:?},{:?},{:?}", s.t, s.l2, s.linf, s.contamination);
    }
    out
}

fn sample(t: f64, u: &Field) -> Result<Sample, CliError> {
    Ok(Sample {
        t,
        l2: lp_norm(u, 2.0)?,
        linf: lp_norm(u, f64::INFINITY)?,
        contamination: contamination(u),
    })
}

fn series_csv(times: &[f64], values: &[f64]) -> String {
    let mut out = String::from("t,value\n");
    for (t, v) in times.iter().zip(values) {
        let _ = writeln!(out, "{t:?},{v:?}");
    }
    out
}

fn propagate(r: &mut Resolver, seed: Option<u64>) -> Result<Outcome, CliError> {
    const S: &str = "propagate";
    let (f, digest) = input_field(
        r,
        S,
        "data",
        (2, 64, 2.0 * PI),
        "random_bandlimited(seed=0, j_min=0, j_max=2)",
        seed,
    )?;
    let alpha = Alpha::for_grid(r.value(S, "alpha", 1.0)?, f.grid())?;
    let times: Vec<f64> = r.value(S, "times", vec![0.0, 0.01, 0.1, 1.0])?;
    let save = r.value(S, "save", false)?;
    if times.is_empty() {
        return Err(bad("propagate.times is empty".into()));
    }
    let spec = f.to_spectral();
    let mut rows = Vec::with_capacity(times.len());
    let mut last = None;
    for &t in &times {
        let u = apply_semigroup(&spec, t, alpha)?.into_physical();
        rows.push(sample(t, &u)?);
        last = Some(u);
    }
    let mut files = Vec::new();
    if let (true, Some(u)) = (save, last) {
        files.push(("propagate.frsf".to_string(), field_bytes(&u)?));
    }
    Ok(Outcome {
        result: json!({ "alpha": alpha.value(), "samples": to_value(&rows) }),
        csv: sample_csv(&rows),
        inputs: vec![digest],
        files,
    })
}

fn norm(r: &mut Resolver, seed: Option<u64>) -> Result<Outcome, CliError> {
    const S: &str = "norm";
    let (f, digest) = input_field(
        r,
        S,
        "data",
        (2, 64, 2.0 * PI),
        "random_bandlimited(seed=0, j_min=0, j_max=2)",
        seed,
    )?;
    let kind: String = r.value(S, "kind", "lebesgue".to_string())?;
    let spec = match kind.as_str() {
        "lebesgue" => NormSpec::Lebesgue {
            p: r.value(S, "p", 2.0)?,
        },
        "sobolev" => NormSpec::Sobolev {
            s: r.value(S, "s", 1.0)?,
            p: r.value(S, "p", 2.0)?,
            homogeneous: r.value(S, "homogeneous", false)?,
        },
        "besov" => NormSpec::Besov {
            s: r.value(S, "s", 0.0)?,
            p: r.value(S, "p", 2.0)?,
            q: r.value(S, "q", 2.0)?,
            homogeneous: r.value(S, "homogeneous", false)?,
        },
        "bmo" => NormSpec::Bmo {
            refine: r.value(S, "refine", 1usize)?,
        },
        other => {
            return Err(bad(format!(
                "norm.kind must be lebesgue, sobolev, besov or bmo, got {other:?}"
            )))
        }
    };
    spec.validate()?;
    let value = spec.eval(&f)?;
    Ok(Outcome {
        result: json!({ "norm": to_value(&spec), "value": value }),
        csv: format!("kind,value\n{kind},{value:?}\n"),
        inputs: vec![digest],
        files: Vec::new(),
    })
}

fn estimate_norm(r: &mut Resolver) -> Result<EstimateNorm, CliError> {
    const S: &str = "verify";
    let kind: String = r.value(S, "norm", "lebesgue".to_string())?;
    Ok(match kind.as_str() {
        "lebesgue" => EstimateNorm::Lebesgue,
        "sobolev" => EstimateNorm::Sobolev {
            beta: r.value(S, "beta", 0.5)?,
            homogeneous: r.value(S, "homogeneous", true)?,
        },
        "besov" => EstimateNorm::Besov {
            s: r.value(S, "s", 0.0)?,
            homogeneous: r.value(S, "homogeneous", true)?,
        },
        "bmo" => EstimateNorm::Bmo,
        other => {
            return Err(bad(format!(
                "verify.norm must be lebesgue, sobolev, besov or bmo, got {other:?}"
            )))
        }
    })
}

fn forcing(r: &mut Resolver, default: &str, seed: Option<u64>) -> Result<Forcing, CliError> {
    let spatial: Recipe = r.value("verify", "forcing", recipe(default))?;
    let s = seed.or(spatial.seed()).unwrap_or(0);
    Ok(Forcing::seeded(&spatial, s))
}

fn verify(r: &mut Resolver, seed: Option<u64>) -> Result<Outcome, CliError> {
    const S: &str = "verify";
    let estimate: String = r.value(S, "estimate", "homogeneous".to_string())?;
    let lambdas: Vec<f64> = r.value(S, "lambdas", vec![1.0, 2.0, 4.0])?;
    let tolerance = r.value(S, "tolerance", 0.01)?;
    let grid = grid_spec(r, 2, 128, 128.0)?;
    // The input recorded in the report: data or spatial forcing factor at λ = 1.
    let (case, probe) = match estimate.as_str() {
        "homogeneous" => {
            let data = seeded_recipe(r, S, "data", "gaussian_bump(width=8)", seed)?;
            let case = SweepCase::Homogeneous {
                data: data.clone(),
                alpha: r.value(S, "alpha", 1.0)?,
                q: r.value(S, "q", 4.0)?,
                p: r.value(S, "p", 4.0)?,
                t_end: r.value(S, "t_end", 64.0)?,
                steps: steps(r, S, 400)?,
                norm: estimate_norm(r)?,
                grid,
            };
            (case, ("data", data))
        }
        "inhomogeneous" => {
            let forcing = forcing(r, "random_packets(seed=0, count=4, width=6, order=0)", seed)?;
            let probe = ("forcing", forcing.spatial.clone());
            let case = SweepCase::Inhomogeneous {
                forcing,
                alpha: r.value(S, "alpha", 1.0)?,
                q: r.value(S, "q", 4.0)?,
                p: r.value(S, "p", 4.0)?,
                q1: r.value(S, "q1", 4.0)?,
                p1: r.value(S, "p1", 4.0)?,
                t_end: r.value(S, "t_end", 36.0)?,
                steps: steps(r, S, 120)?,
                norm: estimate_norm(r)?,
                grid,
            };
            (case, probe)
        }
        "sobolev_source" => {
            let forcing = forcing(r, "random_packets(seed=0, count=4, width=6, order=1)", seed)?;
            let probe = ("forcing", forcing.spatial.clone());
            let case = SweepCase::SobolevSource {
                forcing,
                alpha: r.value(S, "alpha", 0.5)?,
                q: r.value(S, "q", 1.2)?,
                p: r.value(S, "p", 1.2)?,
                t_end: r.value(S, "t_end", 36.0)?,
                steps: steps(r, S, 120)?,
                homogeneous: r.value(S, "homogeneous", true)?,
                grid,
            };
            (case, probe)
        }
        "parabolic" => {
            let data = seeded_recipe(r, S, "data", "packet(width=6, order=1)", seed)?;
            let case = SweepCase::Parabolic {
                data: data.clone(),
                alpha: r.value(S, "alpha", 1.0)?,
                p: r.value(S, "p", 4.0)?,
                s_min: r.value(S, "s_min", 0.0036)?,
                s_max: r.value(S, "s_max", 3600.0)?,
                grid,
            };
            (case, ("data", data))
        }
        "besov_embedding" => {
            let data = seeded_recipe(
                r,
                S,
                "data",
                "random_packets(seed=0, count=4, width=6, order=1)",
                seed,
            )?;
            let case = SweepCase::BesovEmbedding {
                data: data.clone(),
                p: r.value(S, "p", 4.0)?,
                grid,
            };
            (case, ("data", data))
        }
        other => {
            return Err(bad(format!(
                "verify.estimate must be homogeneous, inhomogeneous, sobolev_source, \
                 parabolic or besov_embedding, got {other:?}"
            )))
        }
    };
    let g = Arc::new(case.grid().clone());
    let probe_field = synthesize_field(&g, &probe.1)?;
    let digest = InputDigest::of_field(probe.0, format!("recipe {}", probe.1), &probe_field)?;
    let report = dilation_sweep(&case, &lambdas, tolerance)?;
    Ok(Outcome {
        result: to_value(&report),
        csv: report.to_csv(),
        inputs: vec![digest],
        files: Vec::new(),
    })
}

fn decay(r: &mut Resolver, seed: Option<u64>) -> Result<Outcome, CliError> {
    const S: &str = "decay-fit";
    let dim = r.value("grid", "dim", 1usize)?;
    let size = r.value("grid", "size", if dim == 1 { 1024 } else { 128 })?;
    let length = r.value("grid", "length", size as f64)?;
    let g = Arc::new(GridSpec::new(dim, size, length)?);
    let data = seeded_recipe(r, S, "data", "gaussian_bump(width=8)", seed)?;
    let alpha = Alpha::new(r.value(S, "alpha", 1.0)?, dim)?;
    let rr = r.value(S, "r", 1.0)?;
    let p = r.value(S, "p", f64::INFINITY)?;
    let gradient = r.value(S, "gradient", false)?;
    let rescaled = r.value(S, "rescaled", true)?;
    let t_min = r.value(S, "t_min", 16.0)?;
    let t_max = r.value(S, "t_max", 256.0)?;
    let ratio = r.value(S, "ratio", 1.25)?;
    if !(t_min > 0.0 && t_max > t_min && ratio > 1.0) {
        return Err(fracheat::Error::TimeGrid(format!(
            "need 0 < t_min < t_max and ratio > 1, got t_min = {t_min}, t_max = {t_max}, ratio = {ratio}"
        ))
        .into());
    }
    let times = geometric_times(t_min, t_max, ratio);
    let f = synthesize_field(&g, &data)?;
    let digest = InputDigest::of_field("data", format!("recipe {data}"), &f)?;
    let fit = if rescaled {
        let t_ref = r.value(S, "t_ref", 64.0)?;
        decay_fit_rescaled(&g, &data, rr, p, alpha, &times, t_ref, gradient)?
    } else {
        decay_fit(&f, rr, p, alpha, &times, gradient)?
    };
    let mut result = to_value(&fit);
    result["relative_error"] = json!(fit.relative_error());
    Ok(Outcome {
        csv: series_csv(&fit.times, &fit.values),
        result,
        inputs: vec![digest],
        files: Vec::new(),
    })
}

fn kernel_norm(r: &mut Resolver) -> Result<Outcome, CliError> {
    const S: &str = "kernel-norm";
    let g = grid(r, 2, 128, 40.0)?;
    let alpha = Alpha::for_grid(r.value(S, "alpha", 1.0)?, &g)?;
    let h = r.value(S, "h", 1.0)?;
    let rr = r.value(S, "r", 2.0)?;
    let t_end = r.value(S, "t_end", 1.0)?;
    let fit = kernel_mixed_norm_fit(&g, alpha, h, rr, t_end)?;
    Ok(Outcome {
        csv: series_csv(&fit.times, &fit.values),
        result: to_value(&fit),
        inputs: Vec::new(),
        files: Vec::new(),
    })
}

#[derive(Serialize)]
struct FlowSample {
    t: f64,
    l2: f64,
    max_speed: f64,
    max_divergence: f64,
}

fn nse_solve(r: &mut Resolver, seed: Option<u64>) -> Result<Outcome, CliError> {
    const S: &str = "nse-solve";
    let g = grid(r, 2, 64, 2.0 * PI)?;
    let stream = seeded_recipe(r, S, "stream", "taylor_green(amplitude=0.1)", seed)?;
    let forcing_stream = r.optional::<Recipe>(S, "forcing_stream")?.map(|x| reseed(x, seed));
    let d = PicardParams::default();
    let params = PicardParams {
        alpha: r.value(S, "alpha", d.alpha)?,
        t_end: r.value(S, "t_end", d.t_end)?,
        steps: steps(r, S, d.steps)?,
        q: r.value(S, "q", d.q)?,
        p: r.value(S, "p", d.p)?,
        tol: r.value(S, "tol", d.tol)?,
        max_iter: r.value(S, "max_iter", d.max_iter)?,
        ensemble: r.value(S, "ensemble", d.ensemble)?,
    };
    let order = r.value(S, "regularity_order", 0usize)?;
    let save = r.value(S, "save", false)?;

    let psi = synthesize_field(&g, &stream)?;
    let mut inputs = vec![InputDigest::of_field("stream", format!("recipe {stream}"), &psi)?];
    let u0 = VectorField::from_stream(&psi)?;
    let forcing = match forcing_stream {
        Some(rec) => {
            let phi = synthesize_field(&g, &rec)?;
            inputs.push(InputDigest::of_field("forcing_stream", format!("recipe {rec}"), &phi)?);
            let h = VectorField::from_stream(&phi)?;
            Some(TimeSeries::from_fn(uniform_times(params.t_end, params.steps), |_| h.clone())?)
        }
        None => None,
    };
    let (v, report) = solve_nse_picard(&u0, forcing.as_ref(), &params)?;
    let regularity = if order > 0 {
        Some(regularity_check(&v, order, params.q, params.p)?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(v.len());
    for (t, s) in v.iter() {
        rows.push(FlowSample {
            t,
            l2: s.lp_norm(2.0)?,
            max_speed: s.magnitude().max_abs(),
            max_divergence: max_divergence(s),
        });
    }
    let mut csv = String::from("t,l2,max_speed,max_divergence\n");
    for s in &rows {
        let _ = writeln!(csv, "{:?},{:?},{:?},{:?}", s.t, s.l2, s.max_speed, s.max_divergence);
    }
    let mut files = Vec::new();
    if save {
        let last = v.snapshots().last().expect("solution has samples");
        for (j, c) in last.components().iter().enumerate() {
            files.push((format!("nse-solve.v{j}.frsf"), field_bytes(c)?));
        }
    }
    Ok(Outcome {
        result: json!({
            "params": to_value(&params),
            "report": to_value(&report),
            "samples": to_value(&rows),
            "regularity": to_value(&regularity),
        }),
        csv,
        inputs,
        files,
    })
}

fn potential_solve(r: &mut Resolver, seed: Option<u64>) -> Result<Outcome, CliError> {
    const S: &str = "potential-solve";
    let (f, digest) = input_field(
        r,
        S,
        "data",
        (2, 32, 2.0 * PI),
        "random_bandlimited(seed=0, j_min=0, j_max=1)",
        seed,
    )?;
    let g = f.grid_arc().clone();
    let profile_recipe = seeded_recipe(r, S, "potential", "taylor_green(amplitude=1)", seed)?;
    let offset = r.value(S, "potential_offset", 0.0)?;
    let scale = r.value(S, "potential_scale", 1.0)?;
    let omega = r.value(S, "omega", 0.0)?;
    let forcing_recipe = r.optional::<Recipe>(S, "forcing")?.map(|x| reseed(x, seed));
    let t_end = r.value(S, "t_end", 1.0)?;
    let n_steps = steps(r, S, 100)?;
    let params = PotentialParams {
        alpha: r.value(S, "alpha", 1.0)?,
        r: r.value(S, "r", 3.0)?,
        s: r.value(S, "s", 1.5)?,
        q: r.value(S, "q", 4.0)?,
        p: r.value(S, "p", 4.0)?,
        q1: r.value(S, "q1", 4.0)?,
        p1: r.value(S, "p1", 4.0)?,
        tol: r.value(S, "tol", 1e-12)?,
        max_iter: r.value(S, "max_iter", 60usize)?,
    };

    let times = uniform_times(t_end, n_steps);
    let profile = synthesize_field(&g, &profile_recipe)?.into_physical();
    let mut inputs = vec![
        digest,
        InputDigest::of_field("potential", format!("recipe {profile_recipe}"), &profile)?,
    ];
    // V(t, x) = offset + scale cos(ωt) P(x)
    let snaps = times
        .iter()
        .map(|&t| {
            Field::from_real_fn(g.clone(), |_| offset).add(&profile.scale(scale * (omega * t).cos()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let potential = TimeSeries::new(times.clone(), snaps)?;
    let forcing = match forcing_recipe {
        Some(rec) => {
            let h = synthesize_field(&g, &rec)?;
            inputs.push(InputDigest::of_field("forcing", format!("recipe {rec}"), &h)?);
            Some(TimeSeries::from_fn(times.clone(), |_| h.clone())?)
        }
        None => None,
    };
    let (sol, report) = solve_potential_eq(&f, forcing.as_ref(), &potential, &params)?;
    let rows = sol
        .iter()
        .map(|(t, u)| sample(t, &u.to_physical()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Outcome {
        result: json!({
            "params": to_value(&params),
            "report": to_value(&report),
            "samples": to_value(&rows),
        }),
        csv: sample_csv(&rows),
        inputs,
        files: Vec::new(),
    })
}
