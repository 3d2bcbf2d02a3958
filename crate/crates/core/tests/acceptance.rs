//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hsblab::transforms::{add_redundant_row, apply_scaling, normalize_rows, scaling_sandwich};
use hsblab::transforms::{DiagonalScaling, RedundantRowPolicy};
use hsblab::zoo::{
    hypercube_slack, simplex_slack, spanning_tree_slack, zonotope_decomposition, zonotope_slack,
    zonotope_symmetry, Generator, SpanningTreeRows, WeightedGraph,
};
use hsblab::{
    compute_hsb, rho_exact, verify_dual_certificate, HsbOptions, HsbResult, LabelData, Matrix,
    Rational, Scalar, SymmetryGroup,
};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-6;

type Outcome = Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("simplex exact values", simplex_values),
        ("hypercube collapse", hypercube_collapse),
        ("zonotope bound", zonotope_bound),
        ("zonotope norm identity", zonotope_norm_identity),
        ("permutahedron normalization", permutahedron_normalization),
        ("spanning-tree norms", spanning_tree_norms),
        ("scaling property suite", scaling_suite),
        ("oracle equivalence", oracle_equivalence),
        ("invariance suite", invariance_suite),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({secs:.1} s)", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why} ({secs:.1} s)", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn hsb<T: Scalar>(s: &Matrix<T>, opts: &HsbOptions) -> Result<HsbResult<T>, String> {
    compute_hsb(s, opts).map_err(|e| e.to_string())
}

fn hsb_f64(
    s: &Matrix<f64>,
    tol: f64,
    group: Option<SymmetryGroup>,
) -> Result<HsbResult<f64>, String> {
    let mut opts = HsbOptions::default().with_tol(tol);
    opts.symmetry = group;
    hsb(s, &opts)
}

fn generated(spec: &str) -> Result<(Matrix<Rational>, SymmetryGroup), String> {
    let g: Generator = spec.parse().map_err(|e: hsblab::HsbError| e.to_string())?;
    let built = g.build().map_err(|e| e.to_string())?;
    let group = g.symmetry(&built).map_err(|e| e.to_string())?;
    Ok((built.matrix, group))
}

fn simplex_values() -> Outcome {
    let lambdas = [q(1, 1), q(3, 2), q(2, 1), q(4, 1)];
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    let mut count = 0;
    for n in 1..=4usize {
        for lambda in &lambdas {
            let s = simplex_slack::<Rational>(n, lambda.clone())
                .map_err(|e| e.to_string())?
                .matrix;
            let expected = Rational::from_usize(n) / lambda.clone() + Rational::one();

            let start = Instant::now();
            let exact = hsb(&s, &HsbOptions::default())?;
            slowest = slowest.max(start.elapsed());
            ensure(exact.value == expected && exact.gap.is_zero(), || {
                format!(
                    "n={n}, λ={lambda}: rational value {} (gap {}), expected {expected}",
                    exact.value, exact.gap
                )
            })?;

            let start = Instant::now();
            let float = hsb_f64(&s.to_f64(), TOL, None)?;
            slowest = slowest.max(start.elapsed());
            let err = (float.value - expected.as_f64()).abs();
            worst = worst.max(err);
            ensure(err <= TOL, || {
                format!(
                    "n={n}, λ={lambda}: float value {}, expected {expected}",
                    float.value
                )
            })?;
            count += 1;
        }
    }
    ensure(slowest < Duration::from_secs(1), || {
        format!("slowest solve took {slowest:?}")
    })?;
    Ok(format!(
        "{count} instances exact in rational mode, float error ≤ {worst:.1e}, slowest solve {:.3} s",
        slowest.as_secs_f64()
    ))
}

fn hypercube_collapse() -> Outcome {
    // the golden value comes from the exact run at n = 2
    let s2 = hypercube_slack::<Rational>(2)
        .map_err(|e| e.to_string())?
        .matrix;
    let exact = hsb(&s2, &HsbOptions::default())?;
    ensure(exact.gap.is_zero(), || {
        format!("exact run at n=2 left gap {}", exact.gap)
    })?;
    let golden = exact.value.as_f64();
    ensure(exact.value == q(4, 1), || {
        format!("exact hsb(S_2) = {}, golden is 4", exact.value)
    })?;

    let mut notes = Vec::new();
    for n in 2..=4usize {
        let start = Instant::now();
        let (s, gs) = generated(&format!("hypercube:n={n}"))?;
        let (sp, gsp) = generated(&format!("hypercube+:n={n}"))?;
        let hs = hsb_f64(&s.to_f64(), TOL, Some(gs))?;
        let hsp = hsb_f64(&sp.to_f64(), TOL, Some(gsp))?;
        let elapsed = start.elapsed();
        let (ns, nsp) = (s.max_abs_entry().as_f64(), sp.max_abs_entry().as_f64());
        ensure(nsp == n as f64, || {
            format!("n={n}: ‖S′‖ = {nsp}, expected {n}")
        })?;
        ensure((hsp.value - hs.value / n as f64).abs() <= TOL, || {
            format!(
                "n={n}: hsb(S′) = {}, hsb(S)/n = {}",
                hsp.value,
                hs.value / n as f64
            )
        })?;
        ensure((ns * hs.value - nsp * hsp.value).abs() <= TOL, || {
            format!(
                "n={n}: ‖S‖hsb(S) = {}, ‖S′‖hsb(S′) = {}",
                ns * hs.value,
                nsp * hsp.value
            )
        })?;
        if n == 2 {
            ensure((hs.value - golden).abs() <= TOL, || {
                format!("float hsb(S_2) = {}", hs.value)
            })?;
        }
        if n == 4 {
            ensure(elapsed < Duration::from_secs(30), || {
                format!("n=4 took {elapsed:?}")
            })?;
        }
        notes.push(format!("n={n}: {:.6} vs {:.6}·{n}", hs.value, hsp.value));
    }
    Ok(format!("golden hsb(S_2) = 4 exact; {}", notes.join(", ")))
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> WeightedGraph<Rational> {
    let mut a = Matrix::<Rational>::zeros(n, n).expect("square");
    for i in 0..n {
        for j in i..n {
            let w = q(rng.gen_range(1..=16), 4);
            a.set(i, j, w.clone());
            a.set(j, i, w);
        }
    }
    WeightedGraph::new(a).expect("symmetric nonnegative")
}

/// Permutahedra for n = 3, 4, 5 and 20 seeded random weight matrices at n = 4.
fn zonotope_instances() -> Vec<(String, WeightedGraph<Rational>)> {
    let mut out: Vec<(String, WeightedGraph<Rational>)> = (3..=5)
        .map(|n| {
            (
                format!("permutahedron n={n}"),
                WeightedGraph::complete(n).expect("K_n"),
            )
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..20 {
        out.push((format!("random A #{k}"), random_weights(&mut rng, 4)));
    }
    out
}

fn zonotope_bound() -> Outcome {
    let mut worst_hsb = 0.0f64;
    let mut worst_dual = Rational::zero();
    let mut n5_time = Duration::ZERO;
    let instances = zonotope_instances();
    for (name, g) in &instances {
        let start = Instant::now();
        let built = zonotope_slack(g).map_err(|e| e.to_string())?;
        let group = zonotope_symmetry(g, &built).map_err(|e| e.to_string())?;
        let r = hsb_f64(&built.matrix.to_f64(), TOL, Some(group))?;
        if g.n() == 5 {
            n5_time = start.elapsed();
        }
        ensure(r.gap <= TOL, || format!("{name}: gap {}", r.gap))?;
        ensure(r.value <= 4.0 + TOL, || {
            format!("{name}: hsb(M_A) = {} > 4", r.value)
        })?;
        worst_hsb = worst_hsb.max(r.value);

        let decomposition = zonotope_decomposition(g).map_err(|e| e.to_string())?;
        let bound = verify_dual_certificate(&built.matrix, &decomposition)
            .map_err(|e| format!("{name}: {e}"))?;
        let a = g.weights();
        let off_diagonal = (0..g.n())
            .flat_map(|i| (0..g.n()).filter(move |&j| j != i).map(move |j| (i, j)))
            .fold(Rational::zero(), |acc, (i, j)| acc + a.get(i, j).clone());
        let expected = off_diagonal / built.matrix.max_abs_entry();
        ensure(bound == expected, || {
            format!("{name}: certificate value {bound}, expected {expected}")
        })?;
        ensure(bound <= q(4, 1), || {
            format!("{name}: certificate value {bound} > 4")
        })?;
        if bound > worst_dual {
            worst_dual = bound;
        }
    }
    ensure(n5_time < Duration::from_secs(600), || {
        format!("n=5 took {n5_time:?}")
    })?;
    Ok(format!(
        "{} instances, max hsb {worst_hsb:.6}, max certificate value {worst_dual}, n=5 in {:.1} s",
        instances.len(),
        n5_time.as_secs_f64()
    ))
}

/// Largest and smallest Σ_{i∈U, j∉U} a_ij over nonempty proper U.
fn brute_cuts(a: &Matrix<Rational>) -> (Rational, Rational) {
    let n = a.rows();
    let cuts: Vec<Rational> = (1..(1usize << n) - 1)
        .map(|mask| {
            let mut w = Rational::zero();
            for i in (0..n).filter(|i| mask >> i & 1 == 1) {
                for j in (0..n).filter(|j| mask >> j & 1 == 0) {
                    w += a.get(i, j).clone();
                }
            }
            w
        })
        .collect();
    let max = cuts.iter().max().expect("n ≥ 2").clone();
    let min = cuts.iter().min().expect("n ≥ 2").clone();
    (max, min)
}

fn zonotope_norm_identity() -> Outcome {
    let instances = zonotope_instances();
    for (name, g) in &instances {
        let built = zonotope_slack(g).map_err(|e| e.to_string())?;
        let norm = built.matrix.max_abs_entry();
        let (max_cut, _) = brute_cuts(g.weights());
        ensure(norm == max_cut, || {
            format!("{name}: ‖M_A‖ = {norm}, max cut {max_cut}")
        })?;
    }
    Ok(format!(
        "‖M_A‖ equals the brute-force max cut on all {} instances",
        instances.len()
    ))
}

fn permutahedron_normalization() -> Outcome {
    let mut notes = Vec::new();
    for n in 3..=5usize {
        let (m, group) = generated(&format!("permutahedron:n={n}"))?;
        let m_prime = normalize_rows(&m);
        let rows: Vec<Vec<usize>> = group.generators().iter().map(|g| g.rows.clone()).collect();
        let group_prime =
            SymmetryGroup::from_row_permutations(&m_prime, &rows).map_err(|e| e.to_string())?;

        let ratio = q(((n / 2) * n.div_ceil(2)) as i64, (n - 1) as i64);
        let (max_cut, min_cut) = brute_cuts(
            WeightedGraph::<Rational>::complete(n)
                .expect("K_n")
                .weights(),
        );
        ensure(max_cut.clone() / min_cut.clone() == ratio, || {
            format!("n={n}: max cut {max_cut} / min cut {min_cut} differs from {ratio}")
        })?;

        let h = hsb_f64(&m.to_f64(), TOL, Some(group))?;
        let hp = hsb_f64(&m_prime.to_f64(), TOL, Some(group_prime))?;
        ensure(h.value <= hp.value + TOL, || {
            format!("n={n}: hsb(M) = {} > hsb(M′) = {}", h.value, hp.value)
        })?;
        let upper = ratio.as_f64() * h.value * (1.0 + TOL);
        ensure(hp.value <= upper, || {
            format!("n={n}: hsb(M′) = {} above {upper}", hp.value)
        })?;
        notes.push(format!(
            "n={n}: {:.6} ≤ {:.6} ≤ {:.6}",
            h.value, hp.value, upper
        ));
    }
    Ok(notes.join(", "))
}

/// The two color classes of a tree given by 1-based edges.
fn tree_classes(n: usize, edges: &[(usize, usize)]) -> [Vec<usize>; 2] {
    let mut adj = vec![Vec::new(); n + 1];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut color = vec![usize::MAX; n + 1];
    color[1] = 0;
    let mut stack = vec![1];
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if color[w] == usize::MAX {
                color[w] = 1 - color[v];
                stack.push(w);
            }
        }
    }
    let class = |c: usize| (1..=n).filter(|&v| color[v] == c).collect();
    [class(0), class(1)]
}

fn spanning_tree_norms() -> Outcome {
    let mut notes = Vec::new();
    for n in 4..=6usize {
        let g = WeightedGraph::<Rational>::complete(n).map_err(|e| e.to_string())?;
        let s = spanning_tree_slack(&g, SpanningTreeRows::default()).map_err(|e| e.to_string())?;
        let norm = s.matrix.max_abs_entry();
        let bound = q(n as i64, 2) - Rational::one();
        ensure(norm >= bound, || format!("K_{n}: ‖S‖ = {norm} < {bound}"))?;
        ensure(s.matrix.data().iter().all(|v| v.is_integer()), || {
            format!("K_{n}: non-integer entry")
        })?;
        let row_of: HashMap<&LabelData, usize> = s
            .row_labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.data.as_ref().map(|d| (d, i)))
            .collect();
        let witness = s.col_labels.iter().enumerate().find_map(|(j, l)| {
            let Some(LabelData::SpanningTree(edges)) = &l.data else {
                return None;
            };
            tree_classes(n, edges).into_iter().find_map(|class| {
                let i = *row_of.get(&LabelData::Subset(class.clone()))?;
                (*s.matrix.get(i, j) >= bound).then(|| (class, l.text.clone()))
            })
        });
        let (class, tree) =
            witness.ok_or_else(|| format!("K_{n}: no bipartition class reaches {bound}"))?;
        notes.push(format!(
            "K_{n}: ‖S‖ = {norm}, witness U = {class:?} in tree {tree}"
        ));
    }

    let goldens = [("K4", 17.0 / 3.0, 60u64), ("K5", 7.588316356, 900)];
    for (name, golden, limit) in goldens {
        let start = Instant::now();
        let (s, group) = generated(&format!("sptree:graph={name}"))?;
        let r = hsb_f64(&s.to_f64(), TOL, Some(group))?;
        let elapsed = start.elapsed();
        ensure(r.gap <= TOL, || format!("{name}: gap {}", r.gap))?;
        ensure((r.value - golden).abs() <= TOL, || {
            format!("{name}: hsb = {}, golden {golden}", r.value)
        })?;
        let rectangles = r.dual_weights.len();
        ensure(r.value <= rectangles as f64, || {
            format!("{name}: hsb {} above {rectangles} rectangles", r.value)
        })?;
        ensure(elapsed < Duration::from_secs(limit), || {
            format!("{name} took {elapsed:?}")
        })?;
        notes.push(format!(
            "hsb(S_{name}) = {:.9} (gap {:.1e}, {rectangles} rectangles, {:.1} s)",
            r.value,
            r.gap,
            elapsed.as_secs_f64()
        ));
    }
    Ok(notes.join("; "))
}

/// Random nonzero matrix of shape at most 4×4 with entries in [0, 4],
/// about a quarter of them zero.
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
        .expect("shape");
        if !s.is_zero() {
            return s;
        }
    }
}

fn diagonal(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(0.25..=4.0)).collect()
}

/// `lhs ≤ rhs` up to the engine tolerance.
fn at_most(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + TOL * rhs.abs().max(1.0)
}

fn scaling_suite() -> Outcome {
    const RUNS: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..RUNS {
        let s = random_matrix(&mut rng);
        let (m, n) = s.shape();
        let base = hsb_f64(&s, TOL, None)?;

        // row scaling alone: hsb(DS) ≤ hsb(S) ‖D‖ ‖S‖ / ‖DS‖
        let d =
            DiagonalScaling::new(diagonal(&mut rng, m), vec![1.0; n]).map_err(|e| e.to_string())?;
        let ds = apply_scaling(&s, &d).map_err(|e| e.to_string())?;
        let scaled = hsb_f64(&ds, TOL, None)?;
        let cap = base.upper() * d.norm_d1() * s.max_abs_entry() / ds.max_abs_entry();
        ensure(at_most(scaled.value, cap), || {
            format!("row scaling #{k}: {} > {cap}", scaled.value)
        })?;

        // both sides
        let d = DiagonalScaling::new(diagonal(&mut rng, m), diagonal(&mut rng, n))
            .map_err(|e| e.to_string())?;
        let dsd = apply_scaling(&s, &d).map_err(|e| e.to_string())?;
        let scaled = hsb_f64(&dsd, TOL, None)?;
        let (lo, _) = scaling_sandwich(&s, &d, &base.value).map_err(|e| e.to_string())?;
        let (_, hi) = scaling_sandwich(&s, &d, &base.upper()).map_err(|e| e.to_string())?;
        ensure(
            at_most(lo, scaled.upper()) && at_most(scaled.value, hi),
            || {
                format!(
                    "two-sided scaling #{k}: {} outside [{lo}, {hi}]",
                    scaled.value
                )
            },
        )?;

        // redundant row with ‖wS‖ ≤ ‖S‖
        let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..=2.0)).collect();
        let report =
            add_redundant_row(&s, &w, RedundantRowPolicy::Rescale).map_err(|e| e.to_string())?;
        let factor = report.upper_factor.ok_or("rescaled row has no bracket")?;
        let grown = hsb_f64(&report.matrix, TOL, None)?;
        ensure(
            at_most(base.value, grown.upper()) && at_most(grown.value, base.upper() * factor),
            || {
                format!(
                    "redundant row #{k}: hsb(S′) = {} outside [{}, {}]",
                    grown.value,
                    base.value,
                    base.upper() * factor
                )
            },
        )?;
    }
    Ok(format!(
        "{RUNS} instances for each of the three brackets, zero violations"
    ))
}

fn brute_rho(x: &Matrix<Rational>) -> Rational {
    let (m, n) = x.shape();
    let mut best: Option<Rational> = None;
    for rows in 1..1usize << m {
        for cols in 1..1usize << n {
            let mut sum = Rational::zero();
            for i in (0..m).filter(|i| rows >> i & 1 == 1) {
                for j in (0..n).filter(|j| cols >> j & 1 == 1) {
                    sum += x.get(i, j).clone();
                }
            }
            if best.as_ref().is_none_or(|b| sum > *b) {
                best = Some(sum);
            }
        }
    }
    best.expect("nonempty")
}

fn rho_matches(x: &Matrix<Rational>) -> Result<(), String> {
    let expected = brute_rho(x);
    let got = rho_exact(x, None);
    let witness_sum = x.rectangle_inner(&got.witness).map_err(|e| e.to_string())?;
    ensure(
        got.exact && got.value == expected && witness_sum == expected,
        || {
            format!(
                "{x:?}: rho_exact {} (witness sum {witness_sum}), brute force {expected}",
                got.value
            )
        },
    )?;
    let float = rho_exact(&x.to_f64(), None);
    ensure((float.value - expected.as_f64()).abs() <= 1e-9, || {
        format!(
            "{x:?}: float rho_exact {}, brute force {expected}",
            float.value
        )
    })
}

fn oracle_equivalence() -> Outcome {
    let mut grid = 0;
    for code in 0..81 {
        let digits: Vec<i64> = (0..4).map(|p| (code / 3i64.pow(p)) % 3 - 1).collect();
        let x = Matrix::from_rows(vec![
            vec![q(digits[0], 1), q(digits[1], 1)],
            vec![q(digits[2], 1), q(digits[3], 1)],
        ])
        .expect("2x2");
        rho_matches(&x)?;
        grid += 1;
    }
    const RUNS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..RUNS {
        let (m, n) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let x = Matrix::from_fn(m, n, |_, _| q(rng.gen_range(-8..=8), rng.gen_range(1..=4)))
            .expect("shape");
        rho_matches(&x)?;
    }
    Ok(format!(
        "{grid} grid matrices and {RUNS} random matrices, zero mismatches"
    ))
}

fn invariance_suite() -> Outcome {
    const RUNS: usize = 50;
    // a tighter engine tolerance so that two certified values can be compared at 1e-6
    const ENGINE_TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for k in 0..RUNS {
        let s = random_matrix(&mut rng);
        let (m, n) = s.shape();
        let base = hsb_f64(&s, ENGINE_TOL, None)?.value;
        let mut rows: Vec<usize> = (0..m).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        let c = rng.gen_range(0.25..=4.0);
        let variants = [
            ("transpose", s.transpose()),
            (
                "permutation",
                s.permute(&rows, &cols).map_err(|e| e.to_string())?,
            ),
            (
                "scalar multiple",
                s.scalar_scale(&c).map_err(|e| e.to_string())?,
            ),
        ];
        for (what, v) in variants {
            let value = hsb_f64(&v, ENGINE_TOL, None)?.value;
            worst = worst.max((value - base).abs());
            ensure((value - base).abs() <= TOL, || {
                format!("#{k} {what}: {value} vs {base}")
            })?;
        }
    }
    for k in 0..RUNS {
        let a = random_matrix(&mut rng);
        let doubled = a.hstack(&a).map_err(|e| e.to_string())?;
        let (one, two) = (
            hsb_f64(&a, ENGINE_TOL, None)?.value,
            hsb_f64(&doubled, ENGINE_TOL, None)?.value,
        );
        worst = worst.max((one - two).abs());
        ensure((one - two).abs() <= TOL, || {
            format!("duplicate block #{k}: {two} vs {one}")
        })?;
    }
    Ok(format!(
        "{RUNS} instances per transform and {RUNS} duplicate blocks, max deviation {worst:.1e}"
    ))
}
