//! Verification suites behind `--command verify`.

use crate::config::Suite;
use quadweil::circle::{arc_partition, b_sum, beta_pn, Arc, ArcParams};
use quadweil::expsums::{matrix_coeff_identity_check, sharpness_pair, t_sum, t_sum_direct, t_value};
use quadweil::gamma::{generate_gamma, search_irreducible_form};
use quadweil::measures::{convolve, is_symmetric, mu_q, reflect, SpContext};
use quadweil::quadform::{admissible_prime, QuadForm};
use quadweil::ring::modular::Modulus;
use quadweil::weil::{form_word, rho_of_word, rho_squarefree, StateVector};
use quadweil::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Budget,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    pub detail: serde_json::Value,
}

impl Check {
    fn from_result(name: String, r: Result<(bool, serde_json::Value)>) -> Self {
        match r {
            Ok((ok, detail)) => Check {
                name,
                outcome: if ok { Outcome::Pass } else { Outcome::Fail },
                detail,
            },
            Err(e) => Check {
                name,
                outcome: if matches!(e, Error::Budget(_)) {
                    Outcome::Budget
                } else {
                    Outcome::Fail
                },
                detail: serde_json::json!({ "error": e.to_string() }),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub outcome: Outcome,
    pub checks: Vec<Check>,
}

/// Inputs shared by every suite.
pub struct SuiteInput<'a> {
    pub form: &'a QuadForm,
    pub qs: Option<&'a [u64]>,
    pub ps: Option<&'a [u64]>,
    pub n: Option<i64>,
    pub seed: u64,
    pub budget: usize,
    /// scale of the standard arc exponents
    pub a: f64,
}

pub fn run_suite(suite: Suite, inp: &SuiteInput) -> Vec<SuiteReport> {
    let one = |s: Suite, checks: Vec<Check>| {
        let outcome = if checks.iter().any(|c| c.outcome == Outcome::Fail) {
            Outcome::Fail
        } else if checks.iter().any(|c| c.outcome == Outcome::Budget) {
            Outcome::Budget
        } else {
            Outcome::Pass
        };
        SuiteReport {
            suite: s,
            outcome,
            checks,
        }
    };
    match suite {
        Suite::Weil => vec![one(suite, weil(inp))],
        Suite::Expsum => vec![one(suite, expsum(inp))],
        Suite::Gamma => vec![one(suite, gamma(inp))],
        Suite::Measures => vec![one(suite, measures(inp))],
        Suite::Circle => vec![one(suite, circle(inp))],
        Suite::All => [Suite::Weil, Suite::Expsum, Suite::Gamma, Suite::Measures, Suite::Circle]
            .into_iter()
            .flat_map(|s| run_suite(s, inp))
            .collect(),
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn usable_modulus(form: &QuadForm, q: u64) -> Result<Modulus> {
    let m = Modulus::new(q)?;
    if !m.is_squarefree() {
        return Err(Error::InvalidModulus(q, "must be squarefree"));
    }
    if form.det_b_gcd(q) != 1 {
        return Err(Error::Precondition(format!("gcd({q}, det b) != 1")));
    }
    Ok(m)
}

/// The given form when admissible at p, else a searched form with Delta
/// irreducible mod p.
fn form_at(form: &QuadForm, p: u64, seed: u64) -> Result<QuadForm> {
    if admissible_prime(form, p).unwrap_or(false) {
        return Ok(form.clone());
    }
    search_irreducible_form(p, seed).ok_or_else(|| Error::Precondition(format!("no admissible form found at p = {p}")))
}

fn weil(inp: &SuiteInput) -> Vec<Check> {
    let qs = inp.qs.unwrap_or(&[3, 5, 7, 15]);
    qs.iter()
        .map(|&q| {
            Check::from_result(
                format!("weil q={q}"),
                (|| {
                    let m = usable_modulus(inp.form, q)?;
                    let mut rng = rng_for(inp.seed, q);
                    let word = form_word(inp.form, q)?;
                    let op = if m.is_prime() {
                        rho_of_word(&word, q)?
                    } else {
                        rho_squarefree(&word, &m)?
                    };
                    let mut unitarity_gap: f64 = 0.0;
                    for _ in 0..5 {
                        let f = StateVector::random_unit(q, &mut rng);
                        unitarity_gap = unitarity_gap.max((op.apply(&f)?.norm() - 1.0).abs());
                    }
                    let mut coeff_gap: f64 = 0.0;
                    for _ in 0..2 {
                        let f1 = StateVector::random_unit(q, &mut rng);
                        let f2 = StateVector::random_unit(q, &mut rng);
                        for row in matrix_coeff_identity_check(&f1, &f2, inp.form, &m)? {
                            coeff_gap = coeff_gap.max(row.diff / (f1.norm() * f2.norm()));
                        }
                    }
                    Ok((
                        unitarity_gap <= 1e-9 && coeff_gap <= 1e-8,
                        serde_json::json!({ "unitarity_gap": unitarity_gap, "matrix_coeff_gap": coeff_gap }),
                    ))
                })(),
            )
        })
        .collect()
}

fn expsum(inp: &SuiteInput) -> Vec<Check> {
    let qs = inp.qs.unwrap_or(&[3, 5, 7]);
    qs.iter()
        .map(|&q| {
            Check::from_result(
                format!("expsum q={q}"),
                (|| {
                    let m = Modulus::new(q)?;
                    let mut rng = rng_for(inp.seed, q);
                    let units = m.units();
                    let mut worst_excess = f64::NEG_INFINITY;
                    for _ in 0..10 {
                        let f1 = StateVector::random_unit(q, &mut rng);
                        let f2 = StateVector::random_unit(q, &mut rng);
                        let r = units[rng.gen_range(0..units.len())];
                        let rep = t_sum(&f1, &f2, r, inp.form)?;
                        worst_excess = worst_excess.max(rep.abs - rep.trivial_bound);
                    }
                    let mut ok = worst_excess <= 1e-9;
                    let mut detail = serde_json::json!({ "max_abs_minus_bound": worst_excess });
                    if inp.form.det_b_gcd(q) == 1 {
                        let psi = StateVector::random_unit(q, &mut rng);
                        let (f1, f2) = sharpness_pair(&psi, 1, inp.form)?;
                        let sharp = t_value(&f1, &f2, 1, inp.form)?.norm();
                        ok &= (sharp - 1.0).abs() <= 1e-9;
                        detail["sharpness_abs_t"] = sharp.into();
                    }
                    if q == 3 {
                        let f1 = StateVector::random_unit(q, &mut rng);
                        let f2 = StateVector::random_unit(q, &mut rng);
                        let gap = (t_value(&f1, &f2, 2, inp.form)? - t_sum_direct(&f1, &f2, 2, inp.form)?).norm();
                        ok &= gap <= 1e-9;
                        detail["direct_sum_gap"] = gap.into();
                    }
                    Ok((ok, detail))
                })(),
            )
        })
        .collect()
}

fn gamma(inp: &SuiteInput) -> Vec<Check> {
    let ps = inp.ps.unwrap_or(&[3]);
    ps.iter()
        .map(|&p| {
            Check::from_result(
                format!("gamma p={p}"),
                (|| {
                    let f = form_at(inp.form, p, inp.seed)?;
                    let g = generate_gamma(&f, p, inp.budget)?;
                    Ok((
                        g.membership_ok,
                        serde_json::json!({
                            "form_hash": f.hash(),
                            "mode": g.mode,
                            "order": g.order,
                            "expected_order": g.expected_order.to_string(),
                            "structure_match": g.structure_match,
                            "membership_ok": g.membership_ok,
                        }),
                    ))
                })(),
            )
        })
        .collect()
}

fn measures(inp: &SuiteInput) -> Vec<Check> {
    let ps = inp.ps.unwrap_or(&[3]);
    ps.iter()
        .map(|&p| {
            Check::from_result(
                format!("measures p={p}"),
                (|| {
                    let f = form_at(inp.form, p, inp.seed)?;
                    let ctx = SpContext::new(p)?;
                    let mu = mu_q(&f, &ctx)?;
                    let mu2 = convolve(&ctx, &reflect(&ctx, &mu), &mu)?;
                    let mass_gap = (mu2.mass() - 1.0).abs().max((mu.mass() - 1.0).abs());
                    let symmetric = is_symmetric(&ctx, &mu2, 1e-12);
                    // Young: ||mu° * mu||_2 <= ||mu||_1 ||mu||_2
                    let young = mu2.norm() <= mu.norm() + 1e-12;
                    Ok((
                        mass_gap <= 1e-12 && symmetric && young,
                        serde_json::json!({
                            "form_hash": f.hash(),
                            "mass_gap": mass_gap,
                            "mu2_symmetric": symmetric,
                            "norm_mu": mu.norm(),
                            "norm_mu2": mu2.norm(),
                        }),
                    ))
                })(),
            )
        })
        .collect()
}

fn circle(inp: &SuiteInput) -> Vec<Check> {
    let n = inp.n.unwrap_or(101);
    let mut out = Vec::new();
    out.push(Check::from_result(
        format!("B(15) = B(3) B(5), N={n}"),
        (|| {
            let (b15, b3, b5) = (b_sum(inp.form, 15, n)?, b_sum(inp.form, 3, n)?, b_sum(inp.form, 5, n)?);
            let gap = (b15 - b3 * b5).abs();
            Ok((
                gap <= 1e-12,
                serde_json::json!({ "B15": b15, "B3": b3, "B5": b5, "gap": gap }),
            ))
        })(),
    ));
    for p in [3u64, 5] {
        out.push(Check::from_result(
            format!("beta_p exact p={p}, N={n}"),
            (|| {
                let r = beta_pn(inp.form, p, 1, n)?;
                Ok((
                    r.exact_agree == Some(true),
                    serde_json::to_value(&r).expect("report serializes"),
                ))
            })(),
        ));
    }
    out.push(Check::from_result(
        format!("standard arcs, A={}", inp.a),
        (|| {
            if !(inp.a > 0.0) {
                return Err(Error::Precondition("A must be positive".into()));
            }
            let params = ArcParams::standard(inp.form, inp.a);
            let w = arc_partition(0, 1, 1000.0, &params);
            Ok((
                w.class == Arc::Major && w.q == 1,
                serde_json::json!({ "c1": params.c1, "c2": params.c2, "k": params.k, "zero_class": w.class }),
            ))
        })(),
    ));
    out.push(Check::from_result(
        "arc partition witnesses".into(),
        (|| {
            let x: f64 = 1000.0;
            let params = ArcParams::with_exponents(inp.form, 0.5, 1.0);
            let width = x.ln().powf(params.c1) / (x * x);
            let mut rng = rng_for(inp.seed, 0);
            let mut counts = [0usize; 3];
            let mut ok = true;
            for _ in 0..2000 {
                let den = rng.gen_range(1..1_000_000u64);
                let w = arc_partition(rng.gen_range(0..den), den, x, &params);
                let i = match w.class {
                    Arc::Major => 0,
                    Arc::M2 => 1,
                    Arc::M1 => 2,
                };
                counts[i] += 1;
                ok &= (w.q as f64) <= params.k * x;
                ok &= match w.class {
                    Arc::M1 => w.eta <= 1.0 / (params.k * w.q as f64 * x) + 1e-15,
                    _ => w.eta <= width + 1e-15,
                };
            }
            Ok((
                ok,
                serde_json::json!({ "major": counts[0], "m2": counts[1], "m1": counts[2] }),
            ))
        })(),
    ));
    out
}
