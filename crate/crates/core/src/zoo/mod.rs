//! Slack matrices of concrete polytopes, built from combinatorial data.

pub mod graph;
pub mod polytopes;
pub mod zonotope;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use graph::{
    component_count, enumerate_spanning_trees, matrix_tree_count, named_graph, spanning_tree_slack,
    SpanningTree, SpanningTreeRows, WeightedGraph,
};
pub use polytopes::{hypercube_slack, hypercube_slack_redundant, simplex_slack};
pub use zonotope::{
    check_strictly_supermodular, check_supermodular, completion_time_matrix, g_a, max_cut_weight,
    min_cut_weight, permutahedron_matrix, vertex_of_permutation, zonotope_decomposition,
    zonotope_slack, Permutation,
};

use crate::error::{HsbError, Result};
use crate::labeled::{DynSlackMatrix, LabelData, LabeledSlackMatrix};
use crate::matrix::Matrix;
use crate::scalar::{parse_rational, Rational, Scalar};
use crate::symmetry::SymmetryGroup;

/// Where a graph comes from: a name such as `K5`, or an edge-list file.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphSource {
    Named(String),
    File(PathBuf),
}

/// Parsed generator string, e.g. `simplex:n=4,lambda=3/2`.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Hypercube {
        n: usize,
    },
    HypercubeRedundant {
        n: usize,
    },
    Simplex {
        n: usize,
        lambda: Rational,
    },
    SpanningTree {
        graph: GraphSource,
        rows: SpanningTreeRows,
    },
    /// Weight matrix file: matrix JSON or whitespace-separated rows.
    Zonotope {
        a: PathBuf,
    },
    Permutahedron {
        n: usize,
    },
    CompletionTime {
        p: Vec<Rational>,
    },
}

impl FromStr for Generator {
    type Err = HsbError;

    fn from_str(text: &str) -> Result<Self> {
        let (family, rest) = text.split_once(':').unwrap_or((text, ""));
        let params = parse_params(rest)?;
        let get = |key: &str| {
            params
                .get(key)
                .map(String::as_str)
                .ok_or_else(|| HsbError::Parse(format!("generator '{family}' needs {key}=...")))
        };
        let size = |key: &str| -> Result<usize> {
            get(key)?
                .parse()
                .map_err(|_| HsbError::Parse(format!("{key} must be a nonnegative integer")))
        };
        let flag = |key: &str| params.get(key).is_some_and(|v| v == "1" || v == "true");
        let known: &[&str] = match family {
            "hypercube" | "hypercube+" | "permutahedron" => &["n"],
            "simplex" => &["n", "lambda"],
            "sptree" => &["graph", "full", "drop_zero_rows"],
            "zonotope" => &["A"],
            "ctp" => &["p"],
            other => {
                return Err(HsbError::Parse(format!(
                    "unknown generator family '{other}'"
                )))
            }
        };
        if let Some(k) = params.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(HsbError::Parse(format!(
                "unknown parameter '{k}' for '{family}'"
            )));
        }
        Ok(match family {
            "hypercube" => Generator::Hypercube { n: size("n")? },
            "hypercube+" => Generator::HypercubeRedundant { n: size("n")? },
            "simplex" => Generator::Simplex {
                n: size("n")?,
                lambda: params
                    .get("lambda")
                    .map(|v| parse_rational(v))
                    .transpose()?
                    .unwrap_or_else(|| Rational::from_ratio(1, 1)),
            },
            "sptree" => {
                let g = get("graph")?;
                let graph = if named_graph::<Rational>(g).is_some() {
                    GraphSource::Named(g.to_string())
                } else {
                    GraphSource::File(PathBuf::from(g))
                };
                Generator::SpanningTree {
                    graph,
                    rows: SpanningTreeRows {
                        include_full_set: flag("full"),
                        drop_zero_rows: flag("drop_zero_rows"),
                    },
                }
            }
            "zonotope" => Generator::Zonotope {
                a: PathBuf::from(get("A")?),
            },
            "permutahedron" => Generator::Permutahedron { n: size("n")? },
            "ctp" => Generator::CompletionTime {
                p: get("p")?
                    .split(',')
                    .map(|v| parse_rational(v.trim()))
                    .collect::<Result<_>>()?,
            },
            _ => unreachable!("family checked above"),
        })
    }
}

/// `k=v,k=v` where a value may itself contain commas (`p=1,2,3`): a piece
/// without `=` continues the previous value.
fn parse_params(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out: BTreeMap<String, String> = BTreeMap::new();
    let mut last: Option<String> = None;
    for piece in text.split(',').filter(|p| !p.is_empty()) {
        match piece.split_once('=') {
            Some((k, v)) => {
                let k = k.trim().to_string();
                out.insert(k.clone(), v.trim().to_string());
                last = Some(k);
            }
            None => {
                let k = last
                    .as_ref()
                    .ok_or_else(|| HsbError::Parse(format!("expected key=value, got '{piece}'")))?;
                let v = out.get_mut(k).expect("inserted");
                v.push(',');
                v.push_str(piece.trim());
            }
        }
    }
    Ok(out)
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Hypercube { n } => write!(f, "hypercube:n={n}"),
            Generator::HypercubeRedundant { n } => write!(f, "hypercube+:n={n}"),
            Generator::Simplex { n, lambda } => write!(f, "simplex:n={n},lambda={lambda}"),
            Generator::SpanningTree { graph, rows } => {
                match graph {
                    GraphSource::Named(name) => write!(f, "sptree:graph={name}")?,
                    GraphSource::File(p) => write!(f, "sptree:graph={}", p.display())?,
                }
                if rows.include_full_set {
                    write!(f, ",full=1")?;
                }
                if rows.drop_zero_rows {
                    write!(f, ",drop_zero_rows=1")?;
                }
                Ok(())
            }
            Generator::Zonotope { a } => write!(f, "zonotope:A={}", a.display()),
            Generator::Permutahedron { n } => write!(f, "permutahedron:n={n}"),
            Generator::CompletionTime { p } => {
                let parts: Vec<String> = p.iter().map(|v| v.to_string()).collect();
                write!(f, "ctp:p={}", parts.join(","))
            }
        }
    }
}

impl Generator {
    /// Short family name used in CSV output.
    pub fn family(&self) -> &'static str {
        match self {
            Generator::Hypercube { .. } => "hypercube",
            Generator::HypercubeRedundant { .. } => "hypercube+",
            Generator::Simplex { .. } => "simplex",
            Generator::SpanningTree { .. } => "sptree",
            Generator::Zonotope { .. } => "zonotope",
            Generator::Permutahedron { .. } => "permutahedron",
            Generator::CompletionTime { .. } => "ctp",
        }
    }

    /// Builds the slack matrix in exact arithmetic.
    pub fn build(&self) -> Result<LabeledSlackMatrix<Rational>> {
        match self {
            Generator::Hypercube { n } => hypercube_slack(*n),
            Generator::HypercubeRedundant { n } => hypercube_slack_redundant(*n),
            Generator::Simplex { n, lambda } => simplex_slack(*n, lambda.clone()),
            Generator::SpanningTree { rows, .. } => spanning_tree_slack(&self.graph()?, *rows),
            _ => zonotope_slack(&self.graph()?),
        }
    }

    /// The graph or weight matrix behind a graph-based family.
    fn graph(&self) -> Result<WeightedGraph<Rational>> {
        match self {
            Generator::SpanningTree { graph, .. } => match graph {
                GraphSource::Named(name) => named_graph(name)
                    .ok_or_else(|| HsbError::Parse(format!("unknown graph '{name}'")))?,
                GraphSource::File(path) => WeightedGraph::parse_edge_list(&read(path)?),
            },
            Generator::Zonotope { a } => load_weight_matrix(&read(a)?),
            Generator::Permutahedron { n } => permutahedron_matrix(*n),
            Generator::CompletionTime { p } => completion_time_matrix(p),
            _ => Err(HsbError::InvalidArgument(format!(
                "{} has no graph",
                self.family()
            ))),
        }
    }

    /// Automorphisms of the built matrix coming from the combinatorial
    /// structure: coordinate permutations and reflections for cubes and
    /// simplices, graph automorphisms for spanning trees and zonotopes, and
    /// central symmetry for zonotopes.
    pub fn symmetry(&self, built: &LabeledSlackMatrix<Rational>) -> Result<SymmetryGroup> {
        let rows = match self {
            Generator::Hypercube { n } => hypercube_row_symmetries(*n, false),
            Generator::HypercubeRedundant { n } => hypercube_row_symmetries(*n, true),
            Generator::Simplex { n, lambda } => {
                let fixed = usize::from(*lambda != Rational::from_ratio(1, 1));
                let movable: Vec<usize> = (fixed..=*n).collect();
                vertex_permutation_candidates(movable.len())
                    .into_iter()
                    .map(|p| {
                        let mut full: Vec<usize> = (0..=*n).collect();
                        for (k, &v) in p.iter().enumerate() {
                            full[movable[k]] = movable[v];
                        }
                        full
                    })
                    .collect()
            }
            Generator::SpanningTree { .. } => {
                let g = self.graph()?;
                graph_automorphisms(&g)
                    .into_iter()
                    .map(|sigma| relabel_rows(built, |d| map_label(d, &sigma)))
                    .collect::<Result<_>>()?
            }
            _ => return zonotope_symmetry(&self.graph()?, built),
        };
        SymmetryGroup::from_row_permutations(&built.matrix, &rows)
    }
}

/// Weight-preserving vertex permutations plus U ↦ V∖U, acting on a matrix
/// built by `zonotope_slack(g)`.
pub fn zonotope_symmetry(
    g: &WeightedGraph<Rational>,
    built: &LabeledSlackMatrix<Rational>,
) -> Result<SymmetryGroup> {
    let n = g.n();
    let mut rows = graph_automorphisms(g)
        .into_iter()
        .map(|sigma| relabel_rows(built, |d| map_label(d, &sigma)))
        .collect::<Result<Vec<_>>>()?;
    rows.push(relabel_rows(built, |d| match d {
        LabelData::Subset(u) => Some(LabelData::Subset(
            (1..=n).filter(|v| !u.contains(v)).collect(),
        )),
        _ => None,
    })?);
    SymmetryGroup::from_row_permutations(&built.matrix, &rows)
}

/// Adjacent transpositions, the n-cycle and the reversal of 0..n; together
/// they generate every permutation, and any subset of them a subgroup.
fn vertex_permutation_candidates(n: usize) -> Vec<Vec<usize>> {
    if n < 2 {
        return Vec::new();
    }
    let mut out: Vec<Vec<usize>> = (0..n - 1)
        .map(|i| {
            let mut p: Vec<usize> = (0..n).collect();
            p.swap(i, i + 1);
            p
        })
        .collect();
    out.push((0..n).map(|i| (i + 1) % n).collect());
    out.push((0..n).rev().collect());
    out
}

/// Candidate vertex permutations that preserve every edge weight.
fn graph_automorphisms(g: &WeightedGraph<Rational>) -> Vec<Vec<usize>> {
    let n = g.n();
    let a = g.weights();
    vertex_permutation_candidates(n)
        .into_iter()
        .filter(|p| (0..n).all(|i| (0..n).all(|j| a.get(p[i], p[j]) == a.get(i, j))))
        .collect()
}

fn map_label(data: &LabelData, sigma: &[usize]) -> Option<LabelData> {
    let image = |v: usize| sigma[v - 1] + 1;
    match data {
        LabelData::Subset(u) => {
            let mut w: Vec<usize> = u.iter().map(|&v| image(v)).collect();
            w.sort_unstable();
            Some(LabelData::Subset(w))
        }
        LabelData::Edge(a, b) => {
            let (x, y) = (image(*a), image(*b));
            Some(LabelData::Edge(x.min(y), x.max(y)))
        }
        _ => None,
    }
}

/// Row permutation induced by a map on row label data.
fn relabel_rows(
    built: &LabeledSlackMatrix<Rational>,
    f: impl Fn(&LabelData) -> Option<LabelData>,
) -> Result<Vec<usize>> {
    let index: HashMap<&LabelData, usize> = built
        .row_labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.data.as_ref().map(|d| (d, i)))
        .collect();
    built
        .row_labels
        .iter()
        .map(|l| {
            l.data
                .as_ref()
                .and_then(&f)
                .and_then(|d| index.get(&d).copied())
                .ok_or_else(|| HsbError::Internal(format!("row '{}' has no image", l.text)))
        })
        .collect()
}

/// Rows are x_i ≥ 0 for i < n, then x_i ≤ 1; the redundant Σ x ≥ 0 row
/// comes last and rules out reflections.
fn hypercube_row_symmetries(n: usize, redundant: bool) -> Vec<Vec<usize>> {
    let extra = usize::from(redundant);
    let mut out: Vec<Vec<usize>> = vertex_permutation_candidates(n)
        .into_iter()
        .map(|p| {
            let mut full: Vec<usize> = p
                .iter()
                .chain(p.iter())
                .enumerate()
                .map(|(r, &v)| if r < n { v } else { n + v })
                .collect();
            full.extend(2 * n..2 * n + extra);
            full
        })
        .collect();
    if !redundant && n >= 1 {
        let mut flip: Vec<usize> = (0..2 * n).collect();
        flip.swap(0, n);
        out.push(flip);
    }
    out
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| HsbError::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

/// A symmetric weight matrix, either as matrix JSON or as whitespace
/// separated rows of numbers.
pub fn load_weight_matrix(text: &str) -> Result<WeightedGraph<Rational>> {
    if text.trim_start().starts_with('{') {
        let m = DynSlackMatrix::from_json(text)?.to_rational().matrix;
        return WeightedGraph::new(m);
    }
    let rows: Vec<Vec<Rational>> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.split_whitespace().map(Rational::parse_text).collect())
        .collect::<Result<_>>()?;
    WeightedGraph::new(Matrix::from_rows(rows)?)
}

/// Parses and builds a generator string.
pub fn generate(spec: &str) -> Result<LabeledSlackMatrix<Rational>> {
    spec.parse::<Generator>()?.build()
}
