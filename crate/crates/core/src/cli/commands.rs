//! One function per subcommand; each returns a table. Rows are computed in
//! parallel and kept in input order; per-row failures become status cells.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constants::{c_ns, constant_set, FracParams};
use crate::discrete::{build_weights, convergence_study, default_radius, DeltaRule};
use crate::error::EvalError;
use crate::funcs::{catalog, Field, TestFunction};
use crate::quad::QuadConfig;
use crate::reps::{check_point, eval_direct, limit_experiment_s_to_1, EvalReport, Representation};
use crate::seminorm::SeminormReport;
use crate::spectral::{eval_restricted, eval_spectral, Bump, Interval};

use super::table::{Row, Table};
use super::CliError;

fn status(r: &Result<(), EvalError>) -> String {
    match r {
        Ok(()) => "ok".into(),
        Err(EvalError::DegenerateGradient(_)) => "skipped: hypothesis".into(),
        Err(e) => format!("error: {e}"),
    }
}

fn point_cells(mut row: Row, x: &[f64]) -> Row {
    if x.len() == 1 {
        row = row.set("x", x[0]);
    } else {
        for (i, v) in x.iter().enumerate() {
            row = row.set(&format!("x{}", i + 1), *v);
        }
    }
    row
}

fn params_cells(row: Row, q: &FracParams) -> Row {
    row.set("n", q.n()).set("s", q.s()).set("p", q.p())
}

/// `(n, s, p, C1..C4)` and the residuals that check the constants: against
/// the classical linear constant at `p = 2`, and the spread of `C2, C3, C4`
/// over `n = 1..5`, which should vanish.
pub fn cmd_constants(grid: &[FracParams]) -> Table {
    let rows = grid
        .iter()
        .map(|q| {
            let c = constant_set(q);
            let mut row = params_cells(Row::new(), q).set("c1", c.c1).set("c2", c.c2).set("c3", c.c3).set("c4", c.c4);
            row = row.set("c1_minus_classical", (q.p() == 2.0).then(|| c.c1 - c_ns(q.n(), q.s())));
            let spread = |f: fn(&crate::constants::ConstantSet) -> f64| {
                (1..=5)
                    .map(|n| {
                        let other = constant_set(&FracParams::new(n, q.s(), q.p()).expect("valid"));
                        ((f(&other) - f(&c)) / f(&c)).abs()
                    })
                    .fold(0.0, f64::max)
            };
            row.set("c2_dim_residual", spread(|c| c.c2))
                .set("c3_dim_residual", spread(|c| c.c3))
                .set("c4_dim_residual", spread(|c| c.c4))
        })
        .collect();
    Table::new(rows)
}

fn compare_row(u: &TestFunction, x: &[f64], q: &FracParams, cfg: &QuadConfig) -> Row {
    let row = params_cells(point_cells(Row::new().set("function", u.name()), x), q);
    let hyp = check_point(u, x, q);
    if hyp.is_err() {
        let mut row = row;
        for rep in Representation::ALL {
            row = row.estimate(rep.name(), None);
        }
        return row.set("max_gap", None::<f64>).set("max_rel_gap", None::<f64>).set("error_budget", None::<f64>).set("status", status(&hyp));
    }
    let report = EvalReport::compute(u, x, q, cfg, &Representation::ALL);
    let mut row = row;
    for rep in Representation::ALL {
        row = row.estimate(rep.name(), report.get(rep));
    }
    let failures: Vec<String> = report
        .results
        .iter()
        .filter_map(|r| r.failure.as_ref().map(|f| format!("{}: {f}", r.rep)))
        .collect();
    row.set("max_gap", report.max_gap())
        .set("max_rel_gap", report.max_relative_gap())
        .set("error_budget", report.error_budget())
        .set("status", if failures.is_empty() { "ok".to_string() } else { failures.join("; ") })
}

/// All four representations on the grid of points and parameters, plus
/// `samples` random `(x, s, p)` draws from the seeded generator.
pub fn cmd_compare(
    u: &TestFunction,
    points: &[Vec<f64>],
    grid: &[FracParams],
    samples: usize,
    seed: u64,
    cfg: &QuadConfig,
) -> Table {
    let mut jobs: Vec<(Vec<f64>, FracParams)> = Vec::new();
    for q in grid {
        for x in points {
            jobs.push((x.clone(), *q));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = u.dim();
    for _ in 0..samples {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let s = rng.gen_range(0.2..0.8);
        let p = rng.gen_range(1.5..3.5);
        jobs.push((x, FracParams::new(n, s, p).expect("sampled parameters are valid")));
    }
    Table::new(jobs.par_iter().map(|(x, q)| compare_row(u, x, q, cfg)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitMode {
    /// `s → 1` towards `-Δ_p u`.
    STo1,
    /// `p → 2` towards the linear operator.
    PTo2,
}

pub fn cmd_limits(
    u: &TestFunction,
    points: &[Vec<f64>],
    grid: &[FracParams],
    mode: LimitMode,
    values: &[f64],
    cfg: &QuadConfig,
) -> Result<Table, CliError> {
    let mut rows = Vec::new();
    match mode {
        LimitMode::STo1 => {
            if u.dim() != 1 {
                return Err(CliError::Config("the s → 1 experiment is one-dimensional".into()));
            }
            let mut ps: Vec<f64> = grid.iter().map(|q| q.p()).collect();
            ps.sort_by(f64::total_cmp);
            ps.dedup();
            let jobs: Vec<(f64, f64)> = ps.iter().flat_map(|&p| points.iter().map(move |x| (x[0], p))).collect();
            let tables: Vec<Vec<Row>> = jobs
                .par_iter()
                .map(|&(x, p)| {
                    let base = Row::new().set("mode", "s_to_1").set("function", u.name()).set("x", x).set("p", p);
                    match limit_experiment_s_to_1(u, x, p, values, cfg) {
                        Ok(rs) => rs
                            .iter()
                            .map(|r| {
                                base.clone()
                                    .set("s", r.s)
                                    .estimate("value", Some(r.value))
                                    .set("target", r.target)
                                    .set("gap", r.gap)
                                    .set("status", "ok")
                            })
                            .collect(),
                        Err(e) => vec![base
                            .set("s", None::<f64>)
                            .estimate("value", None)
                            .set("target", None::<f64>)
                            .set("gap", None::<f64>)
                            .set("status", format!("error: {e}"))],
                    }
                })
                .collect();
            rows.extend(tables.into_iter().flatten());
        }
        LimitMode::PTo2 => {
            let mut ss: Vec<(usize, f64)> = grid.iter().map(|q| (q.n(), q.s())).collect();
            ss.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            ss.dedup();
            let mut jobs = Vec::new();
            for &(n, s) in &ss {
                for x in points {
                    for &p in values {
                        jobs.push((n, s, x.clone(), p));
                    }
                }
            }
            rows = jobs
                .par_iter()
                .map(|(n, s, x, p)| {
                    let row = point_cells(Row::new().set("mode", "p_to_2").set("function", u.name()), x).set("s", *s).set("p", *p);
                    let run = || -> Result<(crate::quad::Estimate, crate::quad::Estimate), EvalError> {
                        let q = FracParams::new(*n, *s, *p)?;
                        let linear = FracParams::new(*n, *s, 2.0)?;
                        Ok((eval_direct(u, x, &q, cfg)?, eval_direct(u, x, &linear, cfg)?))
                    };
                    match run() {
                        Ok((v, t)) => row
                            .estimate("value", Some(v))
                            .estimate("target", Some(t))
                            .set("gap", (v.value - t.value).abs())
                            .set("status", "ok"),
                        Err(e) => row
                            .estimate("value", None)
                            .estimate("target", None)
                            .set("gap", None::<f64>)
                            .set("status", status(&Err(e))),
                    }
                })
                .collect();
        }
    }
    Ok(Table::new(rows))
}

/// Lattice refinement against the continuum operator. A divergent weight
/// integral is reported in the status column.
pub fn cmd_discrete(
    u: &TestFunction,
    points: &[Vec<f64>],
    grid: &[FracParams],
    hs: &[f64],
    rule: DeltaRule,
    radius: Option<usize>,
    cfg: &QuadConfig,
) -> Table {
    let mut rows = Vec::new();
    for q in grid {
        let radius = radius.unwrap_or_else(|| default_radius(q.n()));
        for x in points {
            let base = params_cells(point_cells(Row::new().set("function", u.name()), x), q);
            let results: Vec<_> = hs.par_iter().map(|&h| convergence_study(u, x, q, &[h], rule, radius, cfg)).collect();
            let mut prev: Option<(f64, f64)> = None;
            for (&h, r) in hs.iter().zip(results) {
                let row = base.clone().set("h", h).set("delta", rule.delta(h));
                match r {
                    Ok(rs) => {
                        let d = rs[0];
                        let order = prev.map(|(ph, pe)| (pe / d.error).ln() / (ph / h).ln());
                        prev = Some((h, d.error));
                        rows.push(
                            row.estimate("value", Some(d.value))
                                .estimate("continuum", Some(d.continuum))
                                .set("error", d.error)
                                .set("order", order)
                                .set("status", "ok"),
                        );
                    }
                    Err(e) => {
                        prev = None;
                        let s = match e {
                            EvalError::WeightsDiverge(_) => "weights_diverge".to_string(),
                            other => status(&Err(other)),
                        };
                        rows.push(
                            row.estimate("value", None)
                                .estimate("continuum", None)
                                .set("error", None::<f64>)
                                .set("order", None::<f64>)
                                .set("status", s),
                        );
                    }
                }
            }
        }
    }
    Table::new(rows)
}

/// The spectral and restricted operators on `(0, L)` for each length, with
/// the whole-space value of the same function for reference.
pub fn cmd_spectral(
    function: Option<&TestFunction>,
    bump_radius: f64,
    lengths: &[f64],
    position: Option<f64>,
    grid: &[FracParams],
    cfg: &QuadConfig,
) -> Result<Table, CliError> {
    let mut jobs = Vec::new();
    for q in grid {
        if q.n() != 1 {
            return Err(CliError::Config("the interval operator is one-dimensional".into()));
        }
        for &l in lengths {
            let dom = Interval::new(l).map_err(|e| CliError::Config(e.to_string()))?;
            let x = position.unwrap_or(0.5 * l);
            if !dom.contains(x) {
                return Err(CliError::Config(format!("position {x} outside (0, {l})")));
            }
            jobs.push((*q, dom, x));
        }
    }
    let rows = jobs
        .par_iter()
        .map(|(q, dom, x)| {
            let bump = Bump {
                radius: bump_radius.min(0.45 * dom.length),
                ..Bump::centered(dom)
            };
            let name = function.map_or("bump", |f| f.name());
            let row = params_cells(Row::new().set("function", name).set("length", dom.length).set("x", *x), q);
            let run = || -> Result<_, EvalError> {
                match function {
                    Some(f) => Ok((
                        eval_spectral(f, *x, q, dom, cfg)?,
                        eval_restricted(f, *x, q, dom, cfg)?,
                        eval_direct(f, &[*x], q, cfg).ok(),
                    )),
                    None => Ok((
                        eval_spectral(&bump, *x, q, dom, cfg)?,
                        eval_restricted(&bump, *x, q, dom, cfg)?,
                        eval_direct(&bump, &[*x], q, cfg).ok(),
                    )),
                }
            };
            match run() {
                Ok((sp, re, whole)) => row
                    .estimate("spectral", Some(sp))
                    .estimate("restricted", Some(re))
                    .set("difference", re.value - sp.value)
                    .estimate("whole_space", whole)
                    .set("status", "ok"),
                Err(e) => row
                    .estimate("spectral", None)
                    .estimate("restricted", None)
                    .set("difference", None::<f64>)
                    .estimate("whole_space", None)
                    .set("status", status(&Err(e))),
            }
        })
        .collect();
    Ok(Table::new(rows))
}

pub fn cmd_seminorm(u: &TestFunction, grid: &[FracParams], cfg: &QuadConfig) -> Table {
    let rows = grid
        .par_iter()
        .map(|q| {
            let row = params_cells(Row::new().set("function", u.name()), q);
            match SeminormReport::compute(u, q, cfg) {
                Ok(r) => {
                    let gap = |a: f64, b: f64| {
                        let m = a.abs().max(b.abs());
                        if m == 0.0 {
                            0.0
                        } else {
                            (a - b).abs() / m
                        }
                    };
                    row.estimate("direct", Some(r.direct))
                        .estimate("semigroup", Some(r.semigroup))
                        .estimate("balakrishnan", Some(r.balakrishnan))
                        .set("gap_direct_semigroup", gap(r.direct.value, r.semigroup.value))
                        .set("gap_direct_balakrishnan", gap(r.direct.value, r.balakrishnan.value))
                        .set("gap_semigroup_balakrishnan", gap(r.semigroup.value, r.balakrishnan.value))
                        .set("status", "ok")
                }
                Err(e) => row
                    .estimate("direct", None)
                    .estimate("semigroup", None)
                    .estimate("balakrishnan", None)
                    .set("status", status(&Err(e))),
            }
        })
        .collect();
    Table::new(rows)
}

/// The lattice weights `K_β` for canonical offsets `0 ≤ β_n ≤ … ≤ β_1 ≤ B`.
pub fn cmd_weights_export(
    grid: &[FracParams],
    h: f64,
    rule: DeltaRule,
    radius: Option<usize>,
    cfg: &QuadConfig,
) -> Result<Table, CliError> {
    let mut rows = Vec::new();
    for q in grid {
        let radius = radius.unwrap_or_else(|| default_radius(q.n()));
        let w = build_weights(q, h, rule.delta(h), radius, cfg).map_err(CliError::from_eval)?;
        let b = radius as i64;
        let base = params_cells(Row::new(), q).set("h", h).set("delta", w.delta);
        for i in 1..=b {
            let inner: Vec<Vec<i64>> = if q.n() == 1 { vec![vec![i]] } else { (0..=i).map(|j| vec![i, j]).collect() };
            for beta in inner {
                let mut row = base.clone();
                if beta.len() == 1 {
                    row = row.set("beta", beta[0]);
                } else {
                    row = row.set("beta1", beta[0]).set("beta2", beta[1]);
                }
                rows.push(row.set("weight", w.weight(&beta)).set("weight_err", w.weight_error(&beta)));
            }
        }
    }
    Ok(Table::new(rows))
}

/// Look up the function for a command, defaulting to `default`.
pub fn function_for(name: Option<&str>, default: &str, n: usize) -> Result<TestFunction, CliError> {
    catalog(name.unwrap_or(default), n).map_err(|e| CliError::Config(e.to_string()))
}
