use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{Graph, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::MatrixMarket {
        line,
        message: message.into(),
    }
}

fn parse_header(line: &str) -> Result<(Field, Symmetry)> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(bad(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if tokens[2] != "coordinate" {
        return Err(bad(1, format!("unsupported format '{}', only coordinate", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "pattern" => Field::Pattern,
        other => return Err(bad(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(bad(1, format!("unsupported symmetry '{other}'"))),
    };
    Ok((field, symmetry))
}

/// Parses a square coordinate-format matrix. Symmetric storage is expanded,
/// pattern entries become 1.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<SparseMatrix> {
    let mut lines = reader.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let (field, symmetry) = parse_header(&first?)?;

    let mut size: Option<(usize, usize)> = None;
    let mut trips = Vec::new();
    let mut read = 0usize;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        let Some((n, expected)) = size else {
            if parts.len() != 3 {
                return Err(bad(lineno, "size line needs rows, cols and entry count"));
            }
            let nums: Vec<usize> = parts
                .iter()
                .map(|p| p.parse().map_err(|_| bad(lineno, format!("bad integer '{p}'"))))
                .collect::<Result<_>>()?;
            if nums[0] != nums[1] {
                return Err(Error::NotSquare {
                    rows: nums[0],
                    cols: nums[1],
                });
            }
            size = Some((nums[0], nums[2]));
            trips.reserve(nums[2] * if symmetry == Symmetry::Symmetric { 2 } else { 1 });
            continue;
        };
        let want = if field == Field::Pattern { 2 } else { 3 };
        if parts.len() < want {
            return Err(bad(lineno, format!("expected {want} fields")));
        }
        let index = |p: &str| -> Result<usize> {
            let v: usize = p.parse().map_err(|_| bad(lineno, format!("bad index '{p}'")))?;
            if v == 0 || v > n {
                return Err(bad(lineno, format!("index {v} outside 1..={n}")));
            }
            Ok(v - 1)
        };
        let i = index(parts[0])?;
        let j = index(parts[1])?;
        let v = match field {
            Field::Pattern => 1.0,
            Field::Real => parts[2]
                .parse::<f64>()
                .map_err(|_| bad(lineno, format!("bad value '{}'", parts[2])))?,
        };
        trips.push((i, j, v));
        if symmetry == Symmetry::Symmetric && i != j {
            trips.push((j, i, v));
        }
        read += 1;
        if read > expected {
            return Err(bad(lineno, format!("more than the declared {expected} entries")));
        }
    }
    let (n, expected) = size.ok_or_else(|| bad(0, "missing size line"))?;
    if read != expected {
        return Err(bad(0, format!("declared {expected} entries, found {read}")));
    }
    let m = SparseMatrix::from_triplets(n, trips)?;
    Ok(match symmetry {
        Symmetry::Symmetric => m.set_symmetric_unchecked(true),
        Symmetry::General => m.detect_symmetry(),
    })
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    parse_matrix_market(BufReader::new(File::open(path)?))
}

/// Reads an adjacency matrix file as an undirected graph; values and the
/// diagonal are ignored.
pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    Graph::from_adjacency(&read_matrix_market(path)?)
}

/// Writes `a` in coordinate real format; symmetric matrices store only the
/// lower triangle.
pub fn write_matrix_market_to<W: Write>(a: &SparseMatrix, mut w: W) -> Result<()> {
    let sym = a.is_symmetric();
    let entries: Vec<(usize, usize, f64)> = a.triplets().filter(|&(i, j, _)| !sym || i >= j).collect();
    writeln!(
        w,
        "%%MatrixMarket matrix coordinate real {}",
        if sym { "symmetric" } else { "general" }
    )?;
    writeln!(w, "{} {} {}", a.dim(), a.dim(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix_market(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_matrix_market_to(a, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{convection_diffusion_nd, laplacian_nd};

    #[test]
    fn pattern_symmetric_path_graph() {
        let text = "%%MatrixMarket matrix coordinate pattern symmetric\n% comment\n3 3 2\n2 1\n3 2\n";
        let m = parse_matrix_market(text.as_bytes()).unwrap();
        assert!(m.is_symmetric());
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 0), 1.0);
        assert_eq!(m.get(2, 1), 1.0);
        assert_eq!(m.get(0, 2), 0.0);
        let g = Graph::from_adjacency(&m).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn one_based_indices() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 3.5\n";
        let m = parse_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(m.get(0, 1), 3.5);
    }

    #[test]
    fn round_trip_general_and_symmetric() {
        let dir = tempfile::tempdir().unwrap();
        for a in [convection_diffusion_nd(3, 1e-2, 2).unwrap(), laplacian_nd(3, 2).unwrap()] {
            let p = dir.path().join("a.mtx");
            write_matrix_market(&a, &p).unwrap();
            let b = read_matrix_market(&p).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let cases = [
            "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n",
            "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n",
            "not a header\n",
            "%%MatrixMarket matrix coordinate real general\n2 3 0\n",
        ];
        for c in cases {
            assert!(parse_matrix_market(c.as_bytes()).is_err(), "accepted: {c}");
        }
    }
}
