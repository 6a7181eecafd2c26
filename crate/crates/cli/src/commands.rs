//! The five commands. Each returns a JSON result, an optional flat table for
//! CSV output, and the exit status.

use crate::config::{Command, RunConfig, SweepKind, VERSION};
use crate::suites::{run_suite, Outcome, SuiteInput};
use crate::{CliError, CliResult, Status};
use quadweil::circle::{asymptotic_report, beta_pn, singular_series};
use quadweil::expsums::{decay_sweep, SumPath, DENSE_LIMIT};
use quadweil::measures::{flattening_profile, STABILIZATION_TOL};
use quadweil::quadform::{admissible_prime, admissible_primes, det_identity_check, is_generic, QuadForm};
use quadweil::ring::modular::{is_prime, Modulus};
use quadweil::symplectic::{dul_factorize, symplectic_element};
use serde_json::{json, Value};

const DECAY_TRIALS: usize = 10;
const FLATTENING_LEVELS: usize = 6;
const P_MAX: u64 = 200;
const N_SMALL: u32 = 2;
const ARCH_SAMPLES: usize = 1_000_000;

pub struct CommandOutput {
    pub result: Value,
    pub table: Option<Value>,
    pub status: Status,
}

pub fn load_form(cfg: &RunConfig) -> CliResult<QuadForm> {
    match &cfg.form {
        None => Ok(QuadForm::e1()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            Ok(QuadForm::from_json(&text)?)
        }
    }
}

/// The artifact wrapped around every result.
pub fn envelope(cfg: &RunConfig, form: &QuadForm, out: &CommandOutput) -> Value {
    json!({
        "version": VERSION,
        "form_hash": form.hash(),
        "form": form,
        "seed": cfg.seed,
        "config": cfg,
        "status": match out.status {
            Status::Pass => "pass",
            Status::SuiteFailure => "fail",
            Status::Budget => "budget",
            Status::Usage => "usage",
        },
        "result": out.result,
    })
}

fn require<T: Copy>(v: Option<T>, flag: &str, cmd: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("{cmd} needs {flag}")))
}

pub fn run(cfg: &RunConfig, form: &QuadForm) -> CliResult<CommandOutput> {
    match cfg.command {
        Command::AnalyzeForm => analyze(cfg, form),
        Command::Verify => verify(cfg, form),
        Command::Sweep => sweep(cfg, form),
        Command::SingularSeries => {
            let n = require(cfg.n, "--N", "singular-series")?;
            let x = require(cfg.x, "--X", "singular-series")?;
            let r = singular_series(form, n, x as f64, P_MAX, N_SMALL, ARCH_SAMPLES, cfg.seed)?;
            let table = serde_json::to_value(&r.local_factors).expect("serializes");
            Ok(CommandOutput {
                result: serde_json::to_value(&r).expect("serializes"),
                table: Some(table),
                status: Status::Pass,
            })
        }
        Command::Asymptotic => {
            let n = require(cfg.n, "--N", "asymptotic")?;
            let x = require(cfg.x, "--X", "asymptotic")?;
            let r = asymptotic_report(form, n, x, P_MAX, N_SMALL, ARCH_SAMPLES, cfg.seed)?;
            Ok(CommandOutput {
                result: serde_json::to_value(&r).expect("serializes"),
                table: None,
                status: Status::Pass,
            })
        }
    }
}

fn analyze(cfg: &RunConfig, form: &QuadForm) -> CliResult<CommandOutput> {
    let verdict = is_generic(form);
    let det_identity = match det_identity_check(form) {
        Ok(d) => json!({ "lhs": d.lhs.to_string(), "rhs": d.rhs.to_string(), "equal": d.equal }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let mut elements = Vec::new();
    for &q in cfg.q.as_ref().map(|l| l.0.as_slice()).unwrap_or(&[]) {
        let m = Modulus::new(q)?;
        let entry = match symplectic_element(form, &m) {
            Ok(g) => {
                let mat = g.matrix();
                let rows: Vec<Vec<u64>> = (0..8).map(|i| (0..8).map(|j| mat.get(i, j)).collect()).collect();
                json!({ "q": q, "g": rows, "dul_factorizable": dul_factorize(&g).is_ok() })
            }
            Err(e) => json!({ "q": q, "error": e.to_string() }),
        };
        elements.push(entry);
    }
    Ok(CommandOutput {
        result: json!({
            "genericity": verdict.to_json(),
            "det_identity": det_identity,
            "admissible_primes": admissible_primes(form, 200),
            "separable": form.is_separable(),
            "symplectic_elements": elements,
        }),
        table: None,
        status: Status::Pass,
    })
}

fn verify(cfg: &RunConfig, form: &QuadForm) -> CliResult<CommandOutput> {
    let suite = require(cfg.suite, "--suite", "verify")?;
    let inp = SuiteInput {
        form,
        qs: cfg.q.as_ref().map(|l| l.0.as_slice()),
        ps: cfg.p.as_ref().map(|l| l.0.as_slice()),
        n: cfg.n,
        seed: cfg.seed,
        budget: cfg.budget as usize,
        a: cfg.a,
    };
    let reports = run_suite(suite, &inp);
    let status = if reports.iter().any(|r| r.outcome == Outcome::Fail) {
        Status::SuiteFailure
    } else if reports.iter().any(|r| r.outcome == Outcome::Budget) {
        Status::Budget
    } else {
        Status::Pass
    };
    let table: Vec<Value> = reports
        .iter()
        .flat_map(|r| {
            r.checks
                .iter()
                .map(move |c| json!({ "suite": r.suite, "check": c.name, "outcome": c.outcome }))
        })
        .collect();
    Ok(CommandOutput {
        result: json!({ "suites": reports }),
        table: Some(Value::Array(table)),
        status,
    })
}

fn prime_list(cfg: &RunConfig, default: &[u64]) -> CliResult<Vec<u64>> {
    let ps: Vec<u64> = match &cfg.p {
        Some(l) => l.0.iter().copied().filter(|&p| p > 2 && is_prime(p)).collect(),
        None => default.to_vec(),
    };
    if ps.is_empty() {
        return Err(CliError::Usage("no odd primes in --p".into()));
    }
    Ok(ps)
}

fn sweep(cfg: &RunConfig, form: &QuadForm) -> CliResult<CommandOutput> {
    let kind = require(cfg.kind, "--kind", "sweep")?;
    match kind {
        SweepKind::Decay => {
            let candidates = prime_list(cfg, &[11, 13, 17, 19, 23])?;
            let (ps, skipped): (Vec<u64>, Vec<u64>) = candidates
                .iter()
                .partition(|&&p| admissible_prime(form, p).unwrap_or(false));
            if ps.len() < 2 {
                return Err(CliError::Usage(format!(
                    "decay sweep needs at least two admissible primes; skipped {skipped:?}"
                )));
            }
            let path = if form.is_separable() && ps.iter().any(|&p| p > DENSE_LIMIT) {
                SumPath::Tensor
            } else {
                SumPath::Auto
            };
            let s = decay_sweep(form, &ps, DECAY_TRIALS, cfg.seed, path)?;
            let rows: Vec<Value> = s
                .reports
                .iter()
                .map(|r| {
                    let q = r.q as f64;
                    json!({
                        "q": r.q,
                        "path": r.path,
                        "avg": r.avg,
                        "sharp_avg": r.sharp_avg,
                        "random_avg_mean": r.random_avg_mean,
                        "max_abs": r.max_abs,
                        "log_q": q.ln(),
                        "log_avg": r.avg.ln(),
                        "avg_times_sqrt_q": r.avg * q.sqrt(),
                    })
                })
                .collect();
            Ok(CommandOutput {
                result: json!({
                    "kind": "decay",
                    "trials": DECAY_TRIALS,
                    "skipped_inadmissible": skipped,
                    "fit": s.fit,
                    "rows": rows,
                }),
                table: Some(Value::Array(rows)),
                status: Status::Pass,
            })
        }
        SweepKind::Flattening => {
            let ps = prime_list(cfg, &[3])?;
            let mut profiles = Vec::new();
            let mut rows = Vec::new();
            for p in ps {
                let prof = flattening_profile(form, p, FLATTENING_LEVELS, STABILIZATION_TOL)?;
                for l in &prof.levels {
                    rows.push(json!({
                        "p": p,
                        "j": l.j,
                        "m": 1u64 << l.j,
                        "norm_sq": l.norm_sq,
                        "support": l.support,
                        "alpha": l.alpha,
                        "beta": l.beta,
                    }));
                }
                profiles.push(prof);
            }
            Ok(CommandOutput {
                result: json!({ "kind": "flattening", "profiles": profiles }),
                table: Some(Value::Array(rows)),
                status: Status::Pass,
            })
        }
        SweepKind::Beta => {
            let n = require(cfg.n, "--N", "sweep --kind beta")?;
            let ps = prime_list(cfg, &[3, 5, 7, 11, 13])?;
            let rows = ps
                .iter()
                .map(|&p| {
                    let r = beta_pn(form, p, if p <= 13 { N_SMALL } else { 1 }, n)?;
                    Ok(json!({
                        "p": p,
                        "n": r.n,
                        "beta_p": r.via_b_sums_f64,
                        "enumerated": r.beta_pn_f64,
                        "exact_agree": r.exact_agree,
                        "stabilized": r.stabilized,
                    }))
                })
                .collect::<CliResult<Vec<Value>>>()?;
            Ok(CommandOutput {
                result: json!({ "kind": "beta", "N": n, "rows": rows }),
                table: Some(Value::Array(rows)),
                status: Status::Pass,
            })
        }
    }
}
