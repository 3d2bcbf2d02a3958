//! Loading matrices from files or generator specs, the zoo cache, and
//! atomic writes.

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use hsblab::labeled::scalar_from_json;
use hsblab::zoo::{Generator, GraphSource};
use hsblab::{
    DynSlackMatrix, HsbError, LabeledSlackMatrix, Matrix, Rational, Scalar, SymmetryGroup,
};
use serde_json::Value;

use crate::CliError;

/// A matrix together with the generator it came from, if any.
pub struct Loaded {
    pub matrix: DynSlackMatrix,
    pub generator: Option<Generator>,
}

impl Loaded {
    /// Structural symmetries, available for generator input only.
    pub fn symmetry(&self) -> Result<Option<SymmetryGroup>, CliError> {
        let Some(g) = &self.generator else {
            return Ok(None);
        };
        let built = self.matrix.to_rational();
        Ok(Some(g.symmetry(&built)?))
    }
}

/// An existing path is read as a matrix file; anything else must parse as
/// a generator spec.
pub fn load(input: &str) -> Result<Loaded, CliError> {
    let path = Path::new(input);
    if path.is_file() {
        let text = read(path)?;
        return Ok(Loaded {
            matrix: DynSlackMatrix::from_json(&text)?,
            generator: None,
        });
    }
    let generator: Generator = input.parse().map_err(|e| {
        CliError::usage(format!(
            "'{input}' is neither a readable file nor a generator spec: {e}"
        ))
    })?;
    let matrix = build_cached(&generator)?;
    Ok(Loaded {
        matrix: matrix.into(),
        generator: Some(generator),
    })
}

/// Builds a zoo matrix, memoized under `HSBLAB_CACHE_DIR` when set.
/// Generators reading their own input files are never cached.
pub fn build_cached(generator: &Generator) -> Result<LabeledSlackMatrix<Rational>, CliError> {
    let reads_file = matches!(
        generator,
        Generator::Zonotope { .. }
            | Generator::SpanningTree {
                graph: GraphSource::File(_),
                ..
            }
    );
    let dir = std::env::var_os("HSBLAB_CACHE_DIR").map(PathBuf::from);
    let Some(dir) = dir.filter(|_| !reads_file) else {
        return Ok(generator.build()?);
    };
    let path = dir.join(cache_name(&generator.to_string()));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(cached) = DynSlackMatrix::from_json(&text) {
            return Ok(cached.to_rational());
        }
    }
    let built = generator.build()?;
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    write_atomic(&path, &DynSlackMatrix::from(built.clone()).to_json())?;
    Ok(built)
}

fn cache_name(spec: &str) -> String {
    let mut h = DefaultHasher::new();
    spec.hash(&mut h);
    let stem: String = spec
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "=,.-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .take(60)
        .collect();
    format!("{stem}-{:016x}.json", h.finish())
}

/// A file name derived from a generator spec, e.g. `permutahedron_n=3.json`.
pub fn default_output_name(spec: &str) -> PathBuf {
    let stem: String = spec
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "=,.-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    PathBuf::from(format!("{stem}.json"))
}

/// A matrix with entries of any sign: matrix JSON (only `data` is read)
/// or whitespace-separated rows.
pub fn load_signed<T: Scalar>(path: &Path) -> Result<Matrix<T>, CliError> {
    let text = read(path)?;
    let rows: Vec<Vec<T>> = if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let data = v
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::usage(format!("{}: no data array", path.display())))?;
        data.iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| HsbError::Parse("rows must be arrays".into()))?
                    .iter()
                    .map(scalar_from_json)
                    .collect::<hsblab::Result<Vec<T>>>()
            })
            .collect::<hsblab::Result<_>>()?
    } else {
        text.lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|l| {
                l.split_whitespace()
                    .map(T::parse_text)
                    .collect::<hsblab::Result<Vec<T>>>()
            })
            .collect::<hsblab::Result<_>>()?
    };
    Ok(Matrix::from_rows(rows)?)
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}
