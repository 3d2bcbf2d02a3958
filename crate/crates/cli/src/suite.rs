//! The reproduction suite: one CSV per claim family, rows computed in a
//! rayon worker pool.

use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use hsblab::bounds::{real_rank, rectangle_cover_bound_with_budget};
use hsblab::transforms::{add_redundant_row, apply_scaling, normalize_rows, scaling_sandwich};
use hsblab::transforms::{DiagonalScaling, RedundantRowPolicy};
use hsblab::zoo::{
    max_cut_weight, min_cut_weight, permutahedron_matrix, spanning_tree_slack,
    zonotope_decomposition, zonotope_slack, zonotope_symmetry, Generator, SpanningTreeRows,
    WeightedGraph,
};
use hsblab::{
    compute_hsb, verify_dual_certificate, HsbOptions, HsbResult, Matrix, Rational, Scalar,
    SymmetryGroup,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::input::write_atomic;
use crate::{CliError, Out};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Sizes {
    /// A smoke run of well under a minute.
    Quick,
    /// Every instance of the acceptance list.
    Default,
    /// Default plus more random instances.
    Full,
}

pub struct Config {
    pub sizes: Sizes,
    pub seed: u64,
    pub tol: f64,
}

impl Config {
    fn random_count(&self, quick: usize, default: usize, full: usize) -> usize {
        match self.sizes {
            Sizes::Quick => quick,
            Sizes::Default => default,
            Sizes::Full => full,
        }
    }

    /// Independent stream per table and experiment, so results do not
    /// depend on scheduling.
    fn rng(&self, table: u64, k: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(table << 32 | k as u64);
        rng
    }
}

const COLUMNS: [&str; 11] = [
    "family",
    "params",
    "m",
    "n",
    "norm",
    "hsb",
    "gap",
    "dual_terms",
    "rc_bound",
    "real_rank",
    "wall_ms",
];

#[derive(Clone, Debug)]
struct Row {
    cells: Vec<String>,
    extras: Vec<String>,
    pass: bool,
    why: String,
}

impl Row {
    fn new(family: &str, params: impl Into<String>, s: &Matrix<f64>) -> Self {
        let (m, n) = s.shape();
        let cover = rectangle_cover_bound_with_budget(s, COVER_BUDGET)
            .map(|c| c.bound().to_string())
            .unwrap_or_default();
        let mut cells = vec![String::new(); COLUMNS.len()];
        cells[0] = family.into();
        cells[1] = params.into();
        cells[2] = m.to_string();
        cells[3] = n.to_string();
        cells[4] = fmt(s.max_abs_entry());
        cells[8] = cover;
        cells[9] = real_rank(s).to_string();
        Row {
            cells,
            extras: Vec::new(),
            pass: true,
            why: String::new(),
        }
    }

    fn with_hsb(mut self, r: &HsbResult<f64>, ms: u128) -> Self {
        self.cells[5] = fmt(r.value);
        self.cells[6] = format!("{:.3e}", r.gap);
        self.cells[7] = r.dual_weights.len().to_string();
        self.cells[10] = ms.to_string();
        self
    }

    fn extra(mut self, v: impl ToString) -> Self {
        self.extras.push(v.to_string());
        self
    }

    fn check(mut self, ok: bool, why: impl FnOnce() -> String) -> Self {
        if !ok && self.pass {
            self.pass = false;
            self.why = why();
        }
        self
    }

    fn failed(family: &str, params: impl Into<String>, why: String) -> Self {
        let mut cells = vec![String::new(); COLUMNS.len()];
        cells[0] = family.into();
        cells[1] = params.into();
        Row {
            cells,
            extras: Vec::new(),
            pass: false,
            why,
        }
    }
}

/// Search nodes per rectangle cover; past it the column holds a proven
/// lower bound.
const COVER_BUDGET: u64 = 20_000;

fn fmt(v: f64) -> String {
    format!("{v:.9}")
}

type Job = Box<dyn Fn(&Config) -> Vec<Row> + Send + Sync>;

struct Table {
    name: &'static str,
    extras: &'static [&'static str],
    jobs: Vec<Job>,
}

fn solve(
    s: &Matrix<f64>,
    group: Option<SymmetryGroup>,
    cfg: &Config,
) -> Result<(HsbResult<f64>, u128), String> {
    let mut opts = HsbOptions::default().with_tol(cfg.tol).with_seed(cfg.seed);
    opts.symmetry = group;
    let start = Instant::now();
    let r = compute_hsb(s, &opts).map_err(|e| e.to_string())?;
    Ok((r, start.elapsed().as_millis()))
}

fn generated(spec: &str) -> Result<(Matrix<Rational>, SymmetryGroup), String> {
    let g: Generator = spec.parse().map_err(|e: hsblab::HsbError| e.to_string())?;
    let built = g.build().map_err(|e| e.to_string())?;
    let group = g.symmetry(&built).map_err(|e| e.to_string())?;
    Ok((built.matrix, group))
}

fn simplex_table(cfg: &Config) -> Table {
    let max_n = if cfg.sizes == Sizes::Quick { 3 } else { 4 };
    let mut jobs: Vec<Job> = Vec::new();
    for n in 1..=max_n {
        for (p, q) in [(1, 1), (3, 2), (2, 1), (4, 1)] {
            jobs.push(Box::new(move |cfg: &Config| {
                let params = format!("n={n},lambda={p}/{q}");
                let lambda = Rational::from_ratio(p, q);
                let expected = n as f64 * q as f64 / p as f64 + 1.0;
                let row = (|| {
                    let (s, group) = generated(&format!("simplex:n={n},lambda={p}/{q}"))?;
                    let s = s.to_f64();
                    let (r, ms) = solve(&s, Some(group), cfg)?;
                    Ok::<_, String>(
                        Row::new("simplex", &params, &s)
                            .with_hsb(&r, ms)
                            .extra(lambda)
                            .extra(fmt(expected))
                            .check((r.value - expected).abs() <= 1e-6, || {
                                format!("hsb {} differs from n/lambda+1 = {expected}", r.value)
                            }),
                    )
                })();
                vec![row.unwrap_or_else(|e| Row::failed("simplex", params, e))]
            }));
        }
    }
    Table {
        name: "simplex",
        extras: &["lambda", "expected"],
        jobs,
    }
}

fn hypercube_table(cfg: &Config) -> Table {
    let max_n = if cfg.sizes == Sizes::Quick { 3 } else { 4 };
    let jobs: Vec<Job> = (2..=max_n)
        .map(|n| {
            Box::new(move |cfg: &Config| {
                let rows = (|| {
                    let (s, gs) = generated(&format!("hypercube:n={n}"))?;
                    let (sp, gsp) = generated(&format!("hypercube+:n={n}"))?;
                    let (s, sp) = (s.to_f64(), sp.to_f64());
                    let (r, ms) = solve(&s, Some(gs), cfg)?;
                    let (rp, msp) = solve(&sp, Some(gsp), cfg)?;
                    let scaled = s.max_abs_entry() * r.value;
                    let scaled_p = sp.max_abs_entry() * rp.value;
                    let base = Row::new("hypercube", format!("n={n}"), &s)
                        .with_hsb(&r, ms)
                        .extra("minimal")
                        .extra(fmt(scaled))
                        .extra(if n == 2 { "4" } else { "" })
                        .check(n != 2 || (r.value - 4.0).abs() <= 1e-6, || {
                            format!("hsb(S_2) = {}", r.value)
                        });
                    let redundant = Row::new("hypercube", format!("n={n}"), &sp)
                        .with_hsb(&rp, msp)
                        .extra("redundant")
                        .extra(fmt(scaled_p))
                        .extra(fmt(r.value / n as f64))
                        .check((rp.value - r.value / n as f64).abs() <= 1e-6, || {
                            format!(
                                "hsb(S') = {} but hsb(S)/n = {}",
                                rp.value,
                                r.value / n as f64
                            )
                        })
                        .check((scaled - scaled_p).abs() <= 1e-6, || {
                            format!("norm-scaled values {scaled} and {scaled_p} differ")
                        });
                    Ok::<_, String>(vec![base, redundant])
                })();
                rows.unwrap_or_else(|e| vec![Row::failed("hypercube", format!("n={n}"), e)])
            }) as Job
        })
        .collect();
    Table {
        name: "hypercube",
        extras: &["variant", "norm_times_hsb", "reference"],
        jobs,
    }
}

/// A random nonzero matrix of shape at most 4×4 with entries in [0, 4].
fn random_matrix(rng: &mut ChaCha8Rng) -> Matrix<f64> {
    loop {
        let (m, n) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let s = Matrix::from_fn(m, n, |_, _| {
            if rng.gen_bool(0.25) {
                0.0
            } else {
                rng.gen_range(0.0..=4.0)
            }
        })
        .expect("positive shape");
        if !s.is_zero() {
            return s;
        }
    }
}

fn diagonal(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(0.25..=4.0)).collect()
}

fn at_most(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-6 * rhs.abs().max(1.0)
}

#[derive(Clone, Copy)]
enum Bracket {
    RowScaling,
    TwoSided,
    RedundantRow,
}

fn scaling_job(kind: Bracket, k: usize) -> Job {
    Box::new(move |cfg: &Config| {
        let label = match kind {
            Bracket::RowScaling => "row-scaling",
            Bracket::TwoSided => "two-sided",
            Bracket::RedundantRow => "redundant-row",
        };
        let params = format!("{label},k={k}");
        let row = (|| {
            let mut rng = cfg.rng(3, k * 3 + kind as usize);
            let s = random_matrix(&mut rng);
            let (m, n) = s.shape();
            let (base, _) = solve(&s, None, cfg)?;
            let (s2, lower, upper) = match kind {
                Bracket::RowScaling => {
                    let d = DiagonalScaling::new(diagonal(&mut rng, m), vec![1.0; n])
                        .map_err(|e| e.to_string())?;
                    let ds = apply_scaling(&s, &d).map_err(|e| e.to_string())?;
                    let upper = base.upper() * d.norm_d1() * s.max_abs_entry() / ds.max_abs_entry();
                    (ds, f64::NEG_INFINITY, upper)
                }
                Bracket::TwoSided => {
                    let d = DiagonalScaling::new(diagonal(&mut rng, m), diagonal(&mut rng, n))
                        .map_err(|e| e.to_string())?;
                    let ds = apply_scaling(&s, &d).map_err(|e| e.to_string())?;
                    let (lower, _) =
                        scaling_sandwich(&s, &d, &base.value).map_err(|e| e.to_string())?;
                    let (_, upper) =
                        scaling_sandwich(&s, &d, &base.upper()).map_err(|e| e.to_string())?;
                    (ds, lower, upper)
                }
                Bracket::RedundantRow => {
                    let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..=2.0)).collect();
                    let report = add_redundant_row(&s, &w, RedundantRowPolicy::Rescale)
                        .map_err(|e| e.to_string())?;
                    let factor = report.upper_factor.ok_or("rescaled row has no bracket")?;
                    (report.matrix, base.value, base.upper() * factor)
                }
            };
            let (r, ms) = solve(&s2, None, cfg)?;
            Ok::<_, String>(
                Row::new("scaling", &params, &s2)
                    .with_hsb(&r, ms)
                    .extra(label)
                    .extra(fmt(base.value))
                    .extra(if lower.is_finite() {
                        fmt(lower)
                    } else {
                        String::new()
                    })
                    .extra(fmt(upper))
                    .check(at_most(lower, r.upper()) && at_most(r.value, upper), || {
                        format!("hsb {} outside [{lower}, {upper}]", r.value)
                    }),
            )
        })();
        vec![row.unwrap_or_else(|e| Row::failed("scaling", params, e))]
    })
}

fn normalization_job(n: usize) -> Job {
    Box::new(move |cfg: &Config| {
        let params = format!("permutahedron-normalized,n={n}");
        let row = (|| {
            let (m, group) = generated(&format!("permutahedron:n={n}"))?;
            let m_prime = normalize_rows(&m);
            let rows: Vec<Vec<usize>> = group.generators().iter().map(|g| g.rows.clone()).collect();
            let group_prime =
                SymmetryGroup::from_row_permutations(&m_prime, &rows).map_err(|e| e.to_string())?;
            let a = permutahedron_matrix::<Rational>(n).map_err(|e| e.to_string())?;
            let (max_cut, _) = max_cut_weight(a.weights()).map_err(|e| e.to_string())?;
            let (min_cut, _) = min_cut_weight(a.weights()).map_err(|e| e.to_string())?;
            let ratio = (max_cut / min_cut).as_f64();
            let (base, _) = solve(&m.to_f64(), Some(group), cfg)?;
            let mp = m_prime.to_f64();
            let (r, ms) = solve(&mp, Some(group_prime), cfg)?;
            let upper = ratio * base.value * (1.0 + 1e-6);
            Ok::<_, String>(
                Row::new("scaling", &params, &mp)
                    .with_hsb(&r, ms)
                    .extra("row-normalized")
                    .extra(fmt(base.value))
                    .extra(fmt(base.value))
                    .extra(fmt(upper))
                    .check(base.value <= r.value + 1e-6 && r.value <= upper, || {
                        format!("hsb(M') = {} outside [{}, {upper}]", r.value, base.value)
                    }),
            )
        })();
        vec![row.unwrap_or_else(|e| Row::failed("scaling", params, e))]
    })
}

fn scaling_table(cfg: &Config) -> Table {
    let count = cfg.random_count(20, 200, 500);
    let mut jobs: Vec<Job> = Vec::new();
    for kind in [
        Bracket::RowScaling,
        Bracket::TwoSided,
        Bracket::RedundantRow,
    ] {
        jobs.extend((0..count).map(|k| scaling_job(kind, k)));
    }
    let max_n = if cfg.sizes == Sizes::Quick { 4 } else { 5 };
    jobs.extend((3..=max_n).map(normalization_job));
    Table {
        name: "scaling",
        extras: &["bracket", "base_hsb", "lower", "upper"],
        jobs,
    }
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> WeightedGraph<Rational> {
    let mut a = Matrix::<Rational>::zeros(n, n).expect("square");
    for i in 0..n {
        for j in i..n {
            let w = Rational::from_ratio(rng.gen_range(1..=16), 4);
            a.set(i, j, w.clone());
            a.set(j, i, w);
        }
    }
    WeightedGraph::new(a).expect("symmetric nonnegative")
}

fn zonotope_row(params: String, g: &WeightedGraph<Rational>, cfg: &Config) -> Row {
    let row = (|| {
        let built = zonotope_slack(g).map_err(|e| e.to_string())?;
        let group = zonotope_symmetry(g, &built).map_err(|e| e.to_string())?;
        let s = built.matrix.to_f64();
        let (r, ms) = solve(&s, Some(group), cfg)?;
        let (max_cut, _) = max_cut_weight(g.weights()).map_err(|e| e.to_string())?;
        let norm = built.matrix.max_abs_entry();
        let decomposition = zonotope_decomposition(g).map_err(|e| e.to_string())?;
        let dual_bound =
            verify_dual_certificate(&built.matrix, &decomposition).map_err(|e| e.to_string())?;
        let four = Rational::from_ratio(4, 1);
        Ok::<_, String>(
            Row::new("zonotope", &params, &s)
                .with_hsb(&r, ms)
                .extra(&max_cut)
                .extra(fmt(dual_bound.as_f64()))
                .check(r.value <= 4.0 + 1e-6, || format!("hsb {} above 4", r.value))
                .check(dual_bound <= four, || {
                    format!("dual bound {dual_bound} above 4")
                })
                .check(norm == max_cut, || {
                    format!("norm {norm} differs from max cut {max_cut}")
                }),
        )
    })();
    row.unwrap_or_else(|e| Row::failed("zonotope", params, e))
}

fn zonotope_table(cfg: &Config) -> Table {
    let max_n = if cfg.sizes == Sizes::Quick { 4 } else { 5 };
    let mut jobs: Vec<Job> = (3..=max_n)
        .map(|n| {
            Box::new(move |cfg: &Config| {
                let params = format!("A=ones,n={n}");
                match permutahedron_matrix::<Rational>(n) {
                    Ok(g) => vec![zonotope_row(params, &g, cfg)],
                    Err(e) => vec![Row::failed("zonotope", params, e.to_string())],
                }
            }) as Job
        })
        .collect();
    jobs.extend((0..cfg.random_count(3, 20, 50)).map(|k| {
        Box::new(move |cfg: &Config| {
            let g = random_weights(&mut cfg.rng(4, k), 4);
            vec![zonotope_row(format!("A=random,n=4,k={k}"), &g, cfg)]
        }) as Job
    }));
    Table {
        name: "zonotope",
        extras: &["max_cut", "dual_bound"],
        jobs,
    }
}

fn sptree_table(cfg: &Config) -> Table {
    let norms = if cfg.sizes == Sizes::Quick {
        4..=5
    } else {
        4..=6
    };
    let solved: &'static [(usize, f64)] = if cfg.sizes == Sizes::Quick {
        &[(4, 17.0 / 3.0)]
    } else {
        &[(4, 17.0 / 3.0), (5, 7.588316356)]
    };
    let jobs: Vec<Job> = norms
        .map(|n| {
            Box::new(move |cfg: &Config| {
                let params = format!("graph=K{n}");
                let row = (|| {
                    let golden = solved.iter().find(|(k, _)| *k == n).map(|(_, v)| *v);
                    let s = if golden.is_some() {
                        generated(&format!("sptree:graph=K{n}"))?
                    } else {
                        let g =
                            WeightedGraph::<Rational>::complete(n).map_err(|e| e.to_string())?;
                        let built = spanning_tree_slack(&g, SpanningTreeRows::default())
                            .map_err(|e| e.to_string())?;
                        (built.matrix, SymmetryGroup::trivial(0, 0))
                    };
                    let (exact, group) = s;
                    let bound = n as f64 / 2.0 - 1.0;
                    let integer = exact.data().iter().all(|v| v.is_integer());
                    let s = exact.to_f64();
                    let mut row = Row::new("sptree", &params, &s)
                        .extra(fmt(bound))
                        .check(s.max_abs_entry() >= bound, || format!("norm below {bound}"))
                        .check(integer, || "non-integer entry".into());
                    if let Some(golden) = golden {
                        let (r, ms) = solve(&s, Some(group), cfg)?;
                        let terms = r.dual_weights.len() as f64;
                        row = row
                            .with_hsb(&r, ms)
                            .extra(fmt(golden))
                            .check(r.gap <= cfg.tol, || format!("gap {}", r.gap))
                            .check((r.value - golden).abs() <= 1e-6, || {
                                format!("hsb {} vs {golden}", r.value)
                            })
                            .check(r.value <= terms, || format!("hsb above {terms} rectangles"));
                    } else {
                        row = row.extra("");
                    }
                    Ok::<_, String>(row)
                })();
                vec![row.unwrap_or_else(|e| Row::failed("sptree", params, e))]
            }) as Job
        })
        .collect();
    Table {
        name: "sptree",
        extras: &["norm_bound", "reference"],
        jobs,
    }
}

fn to_csv(table: &Table, rows: &[Row]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = COLUMNS.iter().chain(table.extras).chain(&["pass"]);
    w.write_record(header)
        .map_err(|e| CliError::failure(e.to_string()))?;
    for r in rows {
        let pass = if r.pass {
            "true".to_string()
        } else {
            "false".to_string()
        };
        let record = r
            .cells
            .iter()
            .chain(&r.extras)
            .chain(std::iter::once(&pass));
        w.write_record(record)
            .map_err(|e| CliError::failure(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::failure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::failure(e.to_string()))
}

pub fn run(out: &Out, cfg: &Config, out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let start = Instant::now();
    let tables = [
        simplex_table(cfg),
        hypercube_table(cfg),
        scaling_table(cfg),
        zonotope_table(cfg),
        sptree_table(cfg),
    ];
    let jobs: Vec<(usize, &Job)> = tables
        .iter()
        .enumerate()
        .flat_map(|(t, table)| table.jobs.iter().map(move |j| (t, j)))
        .collect();
    let results: Vec<(usize, Vec<Row>)> = jobs.par_iter().map(|(t, job)| (*t, job(cfg))).collect();

    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for (t, table) in tables.iter().enumerate() {
        let rows: Vec<Row> = results
            .iter()
            .filter(|(k, _)| *k == t)
            .flat_map(|(_, r)| r.clone())
            .collect();
        let path = out_dir.join(format!("{}.csv", table.name));
        write_atomic(&path, &to_csv(table, &rows)?)?;
        let failed: Vec<&Row> = rows.iter().filter(|r| !r.pass).collect();
        for r in &failed {
            failures.push(format!("{} {}: {}", table.name, r.cells[1], r.why));
        }
        summary.push(json!({
            "table": table.name,
            "path": path,
            "rows": rows.len(),
            "failed": failed.len(),
        }));
    }
    let secs = start.elapsed().as_secs_f64();
    let text = summary
        .iter()
        .map(|s| {
            format!(
                "{}: {} rows, {} failed, {}",
                s["table"].as_str().unwrap_or_default(),
                s["rows"],
                s["failed"],
                s["path"].as_str().unwrap_or_default()
            )
        })
        .chain(std::iter::once(format!(
            "{} failure(s) in {secs:.1} s",
            failures.len()
        )))
        .collect::<Vec<_>>()
        .join("\n");
    out.emit(
        text,
        json!({ "tables": summary, "failures": failures, "seconds": secs }),
    );
    if let Some(first) = failures.first() {
        return Err(CliError::failure(format!("claim failed: {first}")));
    }
    Ok(())
}
