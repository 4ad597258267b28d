//! Matrix Market input and JSON formats for structures and perturbations.
//!
//! Structure files list edges with 1-based indices and optional bounds:
//!
//! ```json
//! {"n": 2, "edges": [{"i": 1, "j": 1, "lo": null, "hi": 0.5}]}
//! ```
//!
//! or use the row-block shorthand `{"rows": [19, 36]}`, which selects every
//! entry of rows 19 to 36 and may carry common `lo`/`hi` bounds. Without an
//! explicit `n` the dimension comes from the matrix.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::perturbation::{Edge, PerturbationStructure, SparsePerturbation};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    parse_matrix_market(&read_text(path)?, path)
}

/// Parses Matrix Market text; `path` only labels errors.
pub fn parse_matrix_market(text: &str, path: &Path) -> Result<DenseMatrix> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));

    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(err(1, "expected `%%MatrixMarket matrix <layout> <field> <symmetry>`".into()));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(err(1, format!("unknown layout `{other}`"))),
    };
    match tokens[3].as_str() {
        "real" | "double" | "integer" => {}
        "complex" | "pattern" => return Err(Error::UnsupportedField(tokens[3].clone())),
        other => return Err(err(1, format!("unknown field `{other}`"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(Error::UnsupportedField(other.to_string())),
    };

    let mut data = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = data.next().ok_or_else(|| err(1, "missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(size_line, format!("bad size `{t}`"))))
        .collect::<Result<_>>()?;
    let expected_dims = if layout == Layout::Coordinate { 3 } else { 2 };
    if dims.len() != expected_dims {
        return Err(err(size_line, format!("expected {expected_dims} size fields")));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if symmetry != Symmetry::General && rows != cols {
        return Err(err(size_line, "symmetric storage requires a square matrix".into()));
    }
    let mut m = DenseMatrix::zeros(rows, cols);
    let mirror = |m: &mut DenseMatrix, i: usize, j: usize, v: f64| {
        m[(i, j)] = v;
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => m[(j, i)] = v,
                Symmetry::SkewSymmetric => m[(j, i)] = -v,
            }
        }
    };
    let number = |line: usize, t: &str| -> Result<f64> {
        t.parse::<f64>().map_err(|_| err(line, format!("bad number `{t}`")))
    };

    match layout {
        Layout::Coordinate => {
            let nnz = dims[2];
            let mut seen = 0;
            for (line, l) in data {
                let t: Vec<&str> = l.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(err(line, "expected `row col value`".into()));
                }
                let index = |s: &str, bound: usize| -> Result<usize> {
                    match s.parse::<usize>() {
                        Ok(k) if (1..=bound).contains(&k) => Ok(k - 1),
                        _ => Err(err(line, format!("index `{s}` out of range 1..={bound}"))),
                    }
                };
                let (i, j) = (index(t[0], rows)?, index(t[1], cols)?);
                mirror(&mut m, i, j, number(line, t[2])?);
                seen += 1;
            }
            if seen != nnz {
                return Err(err(size_line, format!("declared {nnz} entries, found {seen}")));
            }
        }
        Layout::Array => {
            // Column-major; symmetric storage lists the lower triangle only.
            let slots: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = match symmetry {
                        Symmetry::General => 0,
                        Symmetry::Symmetric => j,
                        Symmetry::SkewSymmetric => j + 1,
                    };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut values = Vec::with_capacity(slots.len());
            let mut last_line = size_line;
            for (line, l) in data {
                for t in l.split_whitespace() {
                    values.push(number(line, t)?);
                }
                last_line = line;
            }
            if values.len() != slots.len() {
                return Err(err(last_line, format!("expected {} values, found {}", slots.len(), values.len())));
            }
            for ((i, j), v) in slots.into_iter().zip(values) {
                mirror(&mut m, i, j, v);
            }
        }
    }
    Ok(m)
}

/// Dense `array real general` Matrix Market text.
pub fn format_matrix_market(m: &DenseMatrix) -> String {
    let mut out = format!("%%MatrixMarket matrix array real general\n{} {}\n", m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out.push_str(&format!("{:.16e}\n", m[(i, j)]));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EdgeJson {
    i: usize,
    j: usize,
    #[serde(default)]
    lo: Option<f64>,
    #[serde(default)]
    hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum StructureJson {
    Edges {
        n: usize,
        edges: Vec<EdgeJson>,
    },
    Rows {
        #[serde(default)]
        n: Option<usize>,
        rows: [usize; 2],
        #[serde(default)]
        lo: Option<f64>,
        #[serde(default)]
        hi: Option<f64>,
    },
}

fn json_error(path: &Path, e: serde_json::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    }
}

/// Reads a structure file; `n` supplies the dimension for the row-block
/// shorthand when the file omits it.
pub fn read_structure(path: impl AsRef<Path>, n: Option<usize>) -> Result<PerturbationStructure> {
    let path = path.as_ref();
    parse_structure(&read_text(path)?, path, n)
}

pub fn parse_structure(text: &str, path: &Path, n: Option<usize>) -> Result<PerturbationStructure> {
    let raw: StructureJson = serde_json::from_str(text).map_err(|e| json_error(path, e))?;
    let one_based = |k: usize, what: &str| {
        k.checked_sub(1)
            .ok_or_else(|| Error::InvalidStructure(format!("{what} index must be 1-based, got 0")))
    };
    match raw {
        StructureJson::Edges { n, edges } => {
            let edges = edges
                .into_iter()
                .map(|e| Ok(Edge::bounded(one_based(e.i, "row")?, one_based(e.j, "column")?, e.lo, e.hi)))
                .collect::<Result<Vec<_>>>()?;
            PerturbationStructure::new(n, edges)
        }
        StructureJson::Rows { n: file_n, rows, lo, hi } => {
            let n = file_n.or(n).ok_or_else(|| {
                Error::InvalidStructure("row-block structure needs `n` or a matrix to size it".into())
            })?;
            let (first, last) = (one_based(rows[0], "row")?, one_based(rows[1], "row")?);
            if first > last || last >= n {
                return Err(Error::InvalidStructure(format!(
                    "row block {}..{} does not fit n = {n}",
                    rows[0], rows[1]
                )));
            }
            PerturbationStructure::rows(n, first..=last)?.with_bounds(|_| (lo, hi))
        }
    }
}

pub fn format_structure(structure: &PerturbationStructure) -> String {
    let raw = StructureJson::Edges {
        n: structure.n(),
        edges: structure
            .edges()
            .iter()
            .map(|e| EdgeJson {
                i: e.row + 1,
                j: e.col + 1,
                lo: e.lower,
                hi: e.upper,
            })
            .collect(),
    };
    serde_json::to_string(&raw).expect("structure serializes")
}

/// One perturbed entry in the JSON triplet format, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

pub fn delta_triplets(delta: &SparsePerturbation, structure: &PerturbationStructure) -> Vec<Triplet> {
    structure
        .edges()
        .iter()
        .zip(delta.values())
        .map(|(e, &value)| Triplet {
            i: e.row + 1,
            j: e.col + 1,
            value,
        })
        .collect()
}

/// Inverse of [`delta_triplets`]; entries absent from the list are zero.
pub fn delta_from_triplets(triplets: &[Triplet], structure: &PerturbationStructure) -> Result<SparsePerturbation> {
    let mut values = vec![0.0; structure.len()];
    for t in triplets {
        let k = structure
            .edges()
            .iter()
            .position(|e| e.row + 1 == t.i && e.col + 1 == t.j)
            .ok_or_else(|| Error::InvalidStructure(format!("entry ({}, {}) is not an edge", t.i, t.j)))?;
        values[k] = t.value;
    }
    Ok(SparsePerturbation::from_values(values))
}

pub fn format_delta(delta: &SparsePerturbation, structure: &PerturbationStructure) -> String {
    serde_json::to_string(&delta_triplets(delta, structure)).expect("triplets serialize")
}

pub fn parse_delta(text: &str, structure: &PerturbationStructure) -> Result<SparsePerturbation> {
    let triplets: Vec<Triplet> = serde_json::from_str(text).map_err(|e| json_error(Path::new("<delta>"), e))?;
    delta_from_triplets(&triplets, structure)
}

/// Resolves `path` directly, or relative to `$SPECRADIUS_DATA_DIR` when it
/// does not exist as given.
pub fn resolve_data_path(path: impl AsRef<Path>) -> PathBuf {
    let path = path.as_ref();
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("SPECRADIUS_DATA_DIR") {
        Some(dir) if Path::new(&dir).join(path).exists() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}
