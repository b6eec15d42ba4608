use std::path::{Path, PathBuf};

use curvjet::curvature::kn_pair;
use curvjet::jet::{
    einstein_check, einstein_extend, fit_jacobi_relation, random_einstein_one_jet, random_two_jet,
    validate_two_jet, OneJet, TwoJet, CONSTRUCTION_TOL, EINSTEIN_TOL,
};
use curvjet::metric::{curvature_two_jet, random_poly_metric, PolyMetric, DEFAULT_DEGREE};
use curvjet::report::Report;
use curvjet::suite::{is_suite_name, run_suite, SuiteConfig};
use curvjet::young::random_ck;
use curvjet::{Space, Tensor};
use serde::de::DeserializeOwned;
use serde_json::json;
use thiserror::Error;

use crate::args::{CheckArgs, Command, Common, GenArgs, IoArgs, Kind};
use crate::output::{write_json, Document};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
    #[error(transparent)]
    Core(#[from] curvjet::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

type Outcome = Result<bool, CliError>;

/// Runs a subcommand; `Ok(pass)` maps to exit code 0 or 1.
pub fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Check(a) => check(a),
        Command::Extend(a) => extend(a),
        Command::Fit(a) => fit(a),
        Command::Metric(a) => metric(a),
    }
}

fn validate_common(c: &Common) -> Result<(), CliError> {
    if c.tol.is_nan() || c.tol <= 0.0 {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", c.tol)));
    }
    if let Some(d) = c.dim {
        if d < 2 {
            return Err(CliError::Usage(format!("--dim must be at least 2, got {d}")));
        }
    }
    if let (Some(d), Some(s)) = (c.dim, &c.signature) {
        if d != s.len() {
            return Err(CliError::Usage(format!("--dim {d} does not match a signature of length {}", s.len())));
        }
    }
    Ok(())
}

fn space(c: &Common, default_dim: usize) -> Result<Space, CliError> {
    validate_common(c)?;
    let sig = match &c.signature {
        Some(s) => s.clone(),
        None => vec![1; c.dim.unwrap_or(default_dim)],
    };
    Space::new(sig.len(), sig).map_err(|e| CliError::Usage(e.to_string()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

fn required(input: &Option<PathBuf>) -> Result<&Path, CliError> {
    input.as_deref().ok_or_else(|| CliError::Usage("--in is required".into()))
}

fn emit(doc: &Document, c: &Common, report_to_out: bool) -> Outcome {
    let text = doc.render(c.format)?;
    match (&c.out, report_to_out) {
        (Some(path), true) => std::fs::write(path, &text)?,
        _ => print!("{text}"),
    }
    Ok(doc.pass)
}

fn gen(a: GenArgs) -> Outcome {
    let c = &a.common;
    let sp = space(c, 4)?;
    let g = Tensor::metric(&sp);
    let value = match a.kind {
        Kind::TwoJet => serde_json::to_value(random_two_jet(&sp, c.seed)?)?,
        Kind::EinsteinTwoJet => {
            let one = random_einstein_one_jet(&sp, c.seed)?;
            serde_json::to_value(einstein_extend(&one, EINSTEIN_TOL)?.jet)?
        }
        Kind::Symmetric => serde_json::to_value(TwoJet::symmetric(kn_pair(&g, &g))?)?,
        Kind::OneJet => {
            let one = OneJet::new(random_ck(&sp, 0, c.seed), random_ck(&sp, 1, c.seed ^ 1))?;
            serde_json::to_value(one)?
        }
        Kind::EinsteinOneJet => serde_json::to_value(random_einstein_one_jet(&sp, c.seed)?)?,
        Kind::ConstantOneJet => serde_json::to_value(OneJet::new(kn_pair(&g, &g), Tensor::zeros(&sp, 5))?)?,
        Kind::Metric => serde_json::to_value(random_poly_metric(&sp, DEFAULT_DEGREE, 0.3, c.seed)?)?,
    };
    match &c.out {
        Some(path) => write_json(path, &value)?,
        None => println!("{}", serde_json::to_string(&value)?),
    }
    Ok(true)
}

fn check(a: CheckArgs) -> Outcome {
    let c = &a.common;
    validate_common(c)?;
    if let Some(path) = &a.input {
        if a.suite != "validate" && a.suite != "einstein" {
            return Err(CliError::Usage(format!(
                "with --in the suite must be validate or einstein, got {:?}",
                a.suite
            )));
        }
        let j: TwoJet = read_json(path)?;
        let mut rep = Report::new();
        rep.extend_prefixed("validate.", validate_two_jet(&j, c.tol.max(CONSTRUCTION_TOL))?);
        if a.suite == "einstein" {
            let e = einstein_check(&j, c.tol)?;
            rep.verdict("einstein.verdicts_agree", e.agree());
            rep.extend_prefixed("einstein.", e.report);
        }
        let config = json!({ "suite": a.suite, "in": path, "tol": c.tol });
        return emit(&Document::new("check", config, rep), c, true);
    }
    if !is_suite_name(&a.suite) {
        return Err(CliError::Usage(format!("unknown suite {:?}", a.suite)));
    }
    let base = if a.full { SuiteConfig::full() } else { SuiteConfig::default() };
    let cfg = SuiteConfig {
        dims: c.dim.map(|d| vec![d]).unwrap_or(base.dims),
        signature: c.signature.clone(),
        seed: c.seed,
        seeds: a.seeds.unwrap_or(base.seeds),
        tol: c.tol,
    };
    if let Some(sig) = &cfg.signature {
        Space::new(sig.len(), sig.clone()).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if cfg.seeds == 0 {
        return Err(CliError::Usage("--seeds must be positive".into()));
    }
    let rep = run_suite(&a.suite, &cfg)?;
    let config = json!({
        "suite": a.suite,
        "dims": cfg.dims,
        "signature": cfg.signature,
        "seed": cfg.seed,
        "seeds": cfg.seeds,
        "tol": cfg.tol,
        "full": a.full,
    });
    emit(&Document::new("check", config, rep), c, true)
}

fn extend(a: IoArgs) -> Outcome {
    let c = &a.common;
    validate_common(c)?;
    let path = required(&a.input)?;
    let one: OneJet = read_json(path)?;
    let out = einstein_extend(&one, c.tol.max(EINSTEIN_TOL))?;
    let e = einstein_check(&out.jet, c.tol.max(EINSTEIN_TOL))?;
    let mut rep = Report::new();
    rep.extend_prefixed("einstein.", e.report);
    rep.extend_prefixed("validate.", validate_two_jet(&out.jet, c.tol.max(CONSTRUCTION_TOL))?);
    rep.note("solution_dim", out.solution_dim as f64);
    rep.note("solve_residual", out.residual);
    if let Some(p) = &c.out {
        write_json(p, &out.jet)?;
    }
    let config = json!({ "in": path, "out": c.out, "tol": c.tol });
    emit(&Document::new("extend", config, rep), c, false)
}

fn fit(a: IoArgs) -> Outcome {
    let c = &a.common;
    validate_common(c)?;
    let path = required(&a.input)?;
    let j: TwoJet = read_json(path)?;
    let valid = validate_two_jet(&j, c.tol.max(CONSTRUCTION_TOL))?;
    if !valid.pass() {
        let names: Vec<&str> = valid.failures().map(|f| f.name.as_str()).collect();
        return Err(CliError::Failure(format!("input is not a valid two-jet: {}", names.join(", "))));
    }
    let f = fit_jacobi_relation(&j)?;
    let mut rep = Report::new();
    rep.extend_prefixed("validate.", valid);
    if let Some(m) = f.rough_residual {
        rep.check("main_relation", m, 1e-8);
    }
    let config = json!({ "in": path, "tol": c.tol });
    let mut doc = Document::new("fit", config, rep);
    doc.result = Some(serde_json::to_value(&f)?);
    emit(&doc, c, true)
}

fn metric(a: IoArgs) -> Outcome {
    let c = &a.common;
    let g: PolyMetric = match &a.input {
        Some(path) => read_json(path)?,
        None => random_poly_metric(&space(c, 3)?, DEFAULT_DEGREE, 0.3, c.seed)?,
    };
    validate_common(c)?;
    let j = curvature_two_jet(&g)?;
    let mut rep = Report::new();
    rep.extend_prefixed("validate.", validate_two_jet(&j, c.tol.max(CONSTRUCTION_TOL))?);
    if let Some(p) = &c.out {
        write_json(p, &j)?;
    }
    let config = json!({
        "in": a.input,
        "dim": g.space().dim(),
        "signature": g.space().signature(),
        "seed": c.seed,
        "tol": c.tol,
    });
    emit(&Document::new("metric", config, rep), c, false)
}
