//! Slack matrices with semantic row (inequality) and column (vertex) labels,
//! and the JSON interchange format shared by every CLI command.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{HsbError, Result};
use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar, ScalarMode};

/// Structured form of a row or column label. Indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelData {
    /// Inequality indexed by a vertex subset (x(E(U)) ≤ |U|−1, x(S) ≥ g(S)).
    Subset(Vec<usize>),
    /// Nonnegativity of an edge variable.
    Edge(usize, usize),
    SpanningTree(Vec<(usize, usize)>),
    /// Image array of a permutation.
    Permutation(Vec<usize>),
    /// 0/1 coordinates of a hypercube vertex.
    Vertex(Vec<u8>),
    /// Nonnegative combination of existing rows (redundant inequality).
    Combination(Vec<(usize, String)>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "LabelRepr")]
pub struct Label {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<LabelData>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum LabelRepr {
    Text(String),
    Full {
        text: String,
        #[serde(default)]
        data: Option<LabelData>,
    },
}

impl From<LabelRepr> for Label {
    fn from(repr: LabelRepr) -> Self {
        match repr {
            LabelRepr::Text(text) => Label { text, data: None },
            LabelRepr::Full { text, data } => Label { text, data },
        }
    }
}

impl Label {
    pub fn plain(text: impl Into<String>) -> Self {
        Label {
            text: text.into(),
            data: None,
        }
    }

    pub fn with(text: impl Into<String>, data: LabelData) -> Self {
        Label {
            text: text.into(),
            data: Some(data),
        }
    }
}

/// A nonnegative matrix together with its row and column labels.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSlackMatrix<T> {
    pub matrix: Matrix<T>,
    pub row_labels: Vec<Label>,
    pub col_labels: Vec<Label>,
}

impl<T: Scalar> LabeledSlackMatrix<T> {
    pub fn new(matrix: Matrix<T>, row_labels: Vec<Label>, col_labels: Vec<Label>) -> Result<Self> {
        if row_labels.len() != matrix.rows() || col_labels.len() != matrix.cols() {
            return Err(HsbError::DimensionMismatch {
                expected: format!("{} row and {} column labels", matrix.rows(), matrix.cols()),
                found: format!("{} and {}", row_labels.len(), col_labels.len()),
            });
        }
        matrix.check_nonnegative()?;
        Ok(LabeledSlackMatrix {
            matrix,
            row_labels,
            col_labels,
        })
    }

    /// Labels rows `r1..rm` and columns `c1..cn`.
    pub fn unlabeled(matrix: Matrix<T>) -> Result<Self> {
        let rows = (1..=matrix.rows())
            .map(|i| Label::plain(format!("r{i}")))
            .collect();
        let cols = (1..=matrix.cols())
            .map(|j| Label::plain(format!("c{j}")))
            .collect();
        Self::new(matrix, rows, cols)
    }

    pub fn transpose(&self) -> Self {
        LabeledSlackMatrix {
            matrix: self.matrix.transpose(),
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }

    pub fn permute(&self, row_perm: &[usize], col_perm: &[usize]) -> Result<Self> {
        let matrix = self.matrix.permute(row_perm, col_perm)?;
        Ok(LabeledSlackMatrix {
            matrix,
            row_labels: row_perm
                .iter()
                .map(|&i| self.row_labels[i].clone())
                .collect(),
            col_labels: col_perm
                .iter()
                .map(|&j| self.col_labels[j].clone())
                .collect(),
        })
    }

    pub fn scalar_scale(&self, c: &T) -> Result<Self> {
        Ok(LabeledSlackMatrix {
            matrix: self.matrix.scalar_scale(c)?,
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
        })
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        let matrix = self.matrix.vstack(&other.matrix)?;
        let mut row_labels = self.row_labels.clone();
        row_labels.extend(other.row_labels.iter().cloned());
        Ok(LabeledSlackMatrix {
            matrix,
            row_labels,
            col_labels: self.col_labels.clone(),
        })
    }

    pub fn hstack(&self, other: &Self) -> Result<Self> {
        let matrix = self.matrix.hstack(&other.matrix)?;
        let mut col_labels = self.col_labels.clone();
        col_labels.extend(other.col_labels.iter().cloned());
        Ok(LabeledSlackMatrix {
            matrix,
            row_labels: self.row_labels.clone(),
            col_labels,
        })
    }

    pub fn select_rows(&self, keep: &[usize]) -> Result<Self> {
        Ok(LabeledSlackMatrix {
            matrix: self.matrix.select_rows(keep)?,
            row_labels: keep.iter().map(|&i| self.row_labels[i].clone()).collect(),
            col_labels: self.col_labels.clone(),
        })
    }

    /// Removes identically-zero rows. Errors if nothing would remain.
    pub fn drop_zero_rows(&self) -> Result<Self> {
        let keep: Vec<usize> = (0..self.matrix.rows())
            .filter(|&i| self.matrix.row(i).iter().any(|v| !v.is_zero()))
            .collect();
        if keep.is_empty() {
            return Err(HsbError::ZeroMatrix);
        }
        self.select_rows(&keep)
    }

    /// Replaces the matrix, keeping labels. Shapes must agree.
    pub fn with_matrix(&self, matrix: Matrix<T>) -> Result<Self> {
        Self::new(matrix, self.row_labels.clone(), self.col_labels.clone())
    }

    pub fn density(&self) -> f64 {
        let nonzero = self.matrix.data().iter().filter(|v| !v.is_zero()).count();
        nonzero as f64 / self.matrix.data().len() as f64
    }
}

/// A labeled slack matrix in either scalar mode, as loaded from JSON.
#[derive(Clone, Debug, PartialEq)]
pub enum DynSlackMatrix {
    Rational(LabeledSlackMatrix<Rational>),
    Float(LabeledSlackMatrix<f64>),
}

impl DynSlackMatrix {
    pub fn mode(&self) -> ScalarMode {
        match self {
            DynSlackMatrix::Rational(_) => ScalarMode::Rational,
            DynSlackMatrix::Float(_) => ScalarMode::Float,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            DynSlackMatrix::Rational(s) => s.matrix.shape(),
            DynSlackMatrix::Float(s) => s.matrix.shape(),
        }
    }

    pub fn to_float(&self) -> LabeledSlackMatrix<f64> {
        match self {
            DynSlackMatrix::Rational(s) => LabeledSlackMatrix {
                matrix: s.matrix.to_f64(),
                row_labels: s.row_labels.clone(),
                col_labels: s.col_labels.clone(),
            },
            DynSlackMatrix::Float(s) => s.clone(),
        }
    }

    /// Floats convert exactly to their dyadic rational value.
    pub fn to_rational(&self) -> LabeledSlackMatrix<Rational> {
        match self {
            DynSlackMatrix::Rational(s) => s.clone(),
            DynSlackMatrix::Float(s) => LabeledSlackMatrix {
                matrix: s.matrix.map(|v| Rational::from_double(*v)),
                row_labels: s.row_labels.clone(),
                col_labels: s.col_labels.clone(),
            },
        }
    }

    pub fn in_mode(&self, mode: ScalarMode) -> DynSlackMatrix {
        match mode {
            ScalarMode::Rational => DynSlackMatrix::Rational(self.to_rational()),
            ScalarMode::Float => DynSlackMatrix::Float(self.to_float()),
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            DynSlackMatrix::Rational(s) => matrix_to_json(s),
            DynSlackMatrix::Float(s) => matrix_to_json(s),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MatrixFile =
            serde_json::from_str(text).map_err(|e| HsbError::Parse(e.to_string()))?;
        match file.mode {
            ScalarMode::Rational => Ok(DynSlackMatrix::Rational(file.into_labeled()?)),
            ScalarMode::Float => Ok(DynSlackMatrix::Float(file.into_labeled()?)),
        }
    }
}

impl From<LabeledSlackMatrix<f64>> for DynSlackMatrix {
    fn from(s: LabeledSlackMatrix<f64>) -> Self {
        DynSlackMatrix::Float(s)
    }
}

impl From<LabeledSlackMatrix<Rational>> for DynSlackMatrix {
    fn from(s: LabeledSlackMatrix<Rational>) -> Self {
        DynSlackMatrix::Rational(s)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    mode: ScalarMode,
    data: Vec<Vec<Value>>,
    #[serde(default)]
    row_labels: Vec<Label>,
    #[serde(default)]
    col_labels: Vec<Label>,
}

impl MatrixFile {
    fn into_labeled<T: Scalar>(self) -> Result<LabeledSlackMatrix<T>> {
        if self.data.len() != self.rows {
            return Err(HsbError::Parse(format!(
                "declared {} rows, found {}",
                self.rows,
                self.data.len()
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * self.cols);
        for row in &self.data {
            if row.len() != self.cols {
                return Err(HsbError::Parse(format!(
                    "declared {} columns, found a row of {}",
                    self.cols,
                    row.len()
                )));
            }
            for v in row {
                entries.push(scalar_from_json(v)?);
            }
        }
        let matrix = Matrix::new(self.rows, self.cols, entries)?;
        if self.row_labels.is_empty() && self.col_labels.is_empty() {
            return LabeledSlackMatrix::unlabeled(matrix);
        }
        LabeledSlackMatrix::new(matrix, self.row_labels, self.col_labels)
    }
}

/// Numbers in float mode, `"p/q"` strings in rational mode.
pub fn scalar_to_json<T: Scalar>(v: &T) -> Value {
    match T::MODE {
        ScalarMode::Float => serde_json::Number::from_f64(v.as_f64())
            .map(Value::Number)
            .unwrap_or(Value::Null),
        ScalarMode::Rational => Value::String(v.to_text()),
    }
}

pub fn scalar_from_json<T: Scalar>(v: &Value) -> Result<T> {
    match v {
        Value::String(s) => T::parse_text(s),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(T::from_ratio(i, 1))
            } else if T::is_exact() {
                T::parse_text(&n.to_string())
            } else {
                n.as_f64()
                    .map(T::from_double)
                    .ok_or_else(|| HsbError::Parse(format!("bad number {n}")))
            }
        }
        other => Err(HsbError::Parse(format!("expected a number, got {other}"))),
    }
}

pub fn matrix_rows_to_json<T: Scalar>(m: &Matrix<T>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(scalar_to_json).collect()))
            .collect(),
    )
}

pub fn matrix_to_json<T: Scalar>(s: &LabeledSlackMatrix<T>) -> String {
    let file = serde_json::json!({
        "rows": s.matrix.rows(),
        "cols": s.matrix.cols(),
        "mode": T::MODE,
        "data": matrix_rows_to_json(&s.matrix),
        "row_labels": s.row_labels,
        "col_labels": s.col_labels,
    });
    serde_json::to_string_pretty(&file).expect("matrix JSON serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_lengths_are_checked() {
        let m = Matrix::<f64>::identity(2).unwrap();
        assert!(LabeledSlackMatrix::new(m.clone(), vec![Label::plain("a")], vec![]).is_err());
        let neg = Matrix::<f64>::from_i64(&[&[1, -1]]).unwrap();
        assert!(LabeledSlackMatrix::unlabeled(neg).is_err());
    }

    #[test]
    fn permute_moves_labels() {
        let m = Matrix::<f64>::from_i64(&[&[1, 2], &[3, 4]]).unwrap();
        let s = LabeledSlackMatrix::unlabeled(m).unwrap();
        let p = s.permute(&[1, 0], &[1, 0]).unwrap();
        assert_eq!(p.row_labels[0].text, "r2");
        assert_eq!(p.col_labels[0].text, "c2");
        assert_eq!(*p.matrix.get(0, 0), 4.0);
        let t = s.transpose();
        assert_eq!(t.row_labels[1].text, "c2");
    }

    #[test]
    fn json_round_trip_rational() {
        let m = Matrix::<Rational>::from_rows(vec![
            vec![Rational::from_ratio(3, 2), Rational::from_ratio(0, 1)],
            vec![Rational::from_ratio(1, 3), Rational::from_ratio(2, 1)],
        ])
        .unwrap();
        let s = LabeledSlackMatrix::new(
            m,
            vec![
                Label::with("U={1}", LabelData::Subset(vec![1])),
                Label::plain("x2>=0"),
            ],
            vec![
                Label::plain("a"),
                Label::with("pi", LabelData::Permutation(vec![2, 1])),
            ],
        )
        .unwrap();
        let text = matrix_to_json(&s);
        assert!(text.contains("\"3/2\""));
        let back = DynSlackMatrix::from_json(&text).unwrap();
        assert_eq!(back, DynSlackMatrix::Rational(s));
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn json_accepts_plain_labels_and_missing_labels() {
        let text = r#"{"rows":1,"cols":2,"mode":"float","data":[[0.5,"1/4"]],
                       "row_labels":["a"],"col_labels":["b","c"]}"#;
        let s = DynSlackMatrix::from_json(text).unwrap().to_float();
        assert_eq!(s.matrix.data(), &[0.5, 0.25]);
        assert_eq!(s.row_labels[0], Label::plain("a"));
        let text = r#"{"rows":1,"cols":1,"mode":"rational","data":[[0.5]]}"#;
        let s = DynSlackMatrix::from_json(text).unwrap().to_rational();
        assert_eq!(*s.matrix.get(0, 0), Rational::from_ratio(1, 2));
        let bad = r#"{"rows":2,"cols":1,"mode":"float","data":[[1]]}"#;
        assert!(DynSlackMatrix::from_json(bad).is_err());
    }

    #[test]
    fn drop_zero_rows_keeps_nonzero() {
        let m = Matrix::<f64>::from_i64(&[&[0, 0], &[1, 0]]).unwrap();
        let s = LabeledSlackMatrix::unlabeled(m)
            .unwrap()
            .drop_zero_rows()
            .unwrap();
        assert_eq!(s.matrix.rows(), 1);
        assert_eq!(s.row_labels[0].text, "r2");
    }
}
