//! MatrixMarket files and a plain-text manifest describing a system on
//! disk.
//!
//! Manifest format, one `key value` pair per line, `#` starts a comment:
//!
//! ```text
//! n 64
//! symmetric true
//! A A.mtx
//! N N1.mtx
//! B B.mtx
//! C C.mtx
//! ```
//!
//! `N` may be repeated (in order) or absent; `C` is optional. Paths are
//! relative to the manifest's directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::system::BilinearSystem;

/// Largest `rows × cols` accepted by the readers (dense storage).
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 24;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

pub fn read_matrix_market(text: &str) -> Result<Mat> {
    read_matrix_market_with_limit(text, DEFAULT_MAX_ENTRIES)
}

/// Parse a real MatrixMarket matrix (`coordinate` or `array`; `real`,
/// `integer` or `pattern`; `general`, `symmetric` or `skew-symmetric`).
/// Coordinate duplicates are summed. Symmetric files must list only the
/// lower triangle.
pub fn read_matrix_market_with_limit(text: &str, max_entries: usize) -> Result<Mat> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let toks: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(perr(hline, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
    }
    let layout = match toks[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(perr(hline, format!("unsupported layout '{other}'"))),
    };
    let field = match toks[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" if layout == Layout::Coordinate => Field::Pattern,
        other => return Err(perr(hline, format!("unsupported field '{other}'"))),
    };
    let sym = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(perr(hline, format!("unsupported symmetry '{other}'"))),
    };
    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sline, size) = data.next().ok_or_else(|| perr(hline, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let want = if layout == Layout::Coordinate { 3 } else { 2 };
    if dims.len() != want {
        return Err(perr(sline, format!("size line needs {want} integers")));
    }
    let parse_usize = |s: &str| s.parse::<usize>().map_err(|_| perr(sline, format!("invalid size '{s}'")));
    let rows = parse_usize(dims[0])?;
    let cols = parse_usize(dims[1])?;
    if rows.checked_mul(cols).is_none_or(|e| e > max_entries) {
        return Err(perr(sline, format!("{rows} x {cols} exceeds the size limit")));
    }
    if sym != Symmetry::General && rows != cols {
        return Err(perr(sline, "symmetric storage requires a square matrix"));
    }
    let mut m = Mat::zeros(rows, cols);
    let parse_value = |line: usize, s: &str| -> Result<f64> {
        let v = match field {
            Field::Integer => s
                .parse::<i64>()
                .map(|x| x as f64)
                .map_err(|_| perr(line, format!("invalid integer '{s}'")))?,
            _ => s
                .parse::<f64>()
                .map_err(|_| perr(line, format!("invalid number '{s}'")))?,
        };
        if !v.is_finite() {
            return Err(perr(line, "non-finite value"));
        }
        Ok(v)
    };
    match layout {
        Layout::Coordinate => {
            let nnz = parse_usize(dims[2])?;
            if nnz > max_entries {
                return Err(perr(sline, "entry count exceeds the size limit"));
            }
            let per = if field == Field::Pattern { 2 } else { 3 };
            let mut seen = 0;
            for (ln, l) in data.by_ref() {
                if seen == nnz {
                    return Err(perr(ln, "more entries than declared"));
                }
                let t: Vec<&str> = l.split_whitespace().collect();
                if t.len() != per {
                    return Err(perr(ln, format!("expected {per} fields")));
                }
                let idx = |s: &str, bound: usize| -> Result<usize> {
                    let i = s.parse::<usize>().map_err(|_| perr(ln, format!("invalid index '{s}'")))?;
                    if i == 0 || i > bound {
                        return Err(perr(ln, format!("index {i} out of range 1..={bound}")));
                    }
                    Ok(i - 1)
                };
                let i = idx(t[0], rows)?;
                let j = idx(t[1], cols)?;
                let v = if field == Field::Pattern { 1.0 } else { parse_value(ln, t[2])? };
                match sym {
                    Symmetry::General => m[(i, j)] += v,
                    Symmetry::Symmetric => {
                        if i < j {
                            return Err(perr(ln, "symmetric storage lists the lower triangle only"));
                        }
                        m[(i, j)] += v;
                        if i != j {
                            m[(j, i)] += v;
                        }
                    }
                    Symmetry::SkewSymmetric => {
                        if i <= j {
                            return Err(perr(ln, "skew-symmetric storage lists the strict lower triangle only"));
                        }
                        m[(i, j)] += v;
                        m[(j, i)] -= v;
                    }
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(perr(sline, format!("declared {nnz} entries, found {seen}")));
            }
        }
        Layout::Array => {
            let mut slots: Vec<(usize, usize)> = Vec::new();
            for j in 0..cols {
                let start = match sym {
                    Symmetry::General => 0,
                    Symmetry::Symmetric => j,
                    Symmetry::SkewSymmetric => j + 1,
                };
                for i in start..rows {
                    slots.push((i, j));
                }
            }
            let mut k = 0;
            for (ln, l) in data.by_ref() {
                for tok in l.split_whitespace() {
                    if k == slots.len() {
                        return Err(perr(ln, "more values than the matrix holds"));
                    }
                    let v = parse_value(ln, tok)?;
                    let (i, j) = slots[k];
                    m[(i, j)] = v;
                    match sym {
                        Symmetry::General => {}
                        Symmetry::Symmetric => m[(j, i)] = v,
                        Symmetry::SkewSymmetric => m[(j, i)] = -v,
                    }
                    k += 1;
                }
            }
            if k != slots.len() {
                return Err(perr(sline, format!("expected {} values, found {k}", slots.len())));
            }
        }
    }
    Ok(m)
}

/// Dense `array` or sparse `coordinate` output, whichever is smaller.
/// Values use the shortest representation that reads back exactly.
pub fn write_matrix_market(m: &Mat) -> String {
    let nnz = m.iter().filter(|&&x| x != 0.0).count();
    let mut s = String::new();
    if 3 * nnz < m.len() {
        s.push_str("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", m.nrows(), m.ncols(), nnz);
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != 0.0 {
                    let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, m[(i, j)]);
                }
            }
        }
    } else {
        s.push_str("%%MatrixMarket matrix array real general\n");
        let _ = writeln!(s, "{} {}", m.nrows(), m.ncols());
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let _ = writeln!(s, "{:e}", m[(i, j)]);
            }
        }
    }
    s
}

pub fn read_matrix_market_file(path: &Path) -> Result<Mat> {
    read_matrix_market(&fs::read_to_string(path)?)
}

pub fn write_matrix_market_file(path: &Path, m: &Mat) -> Result<()> {
    fs::write(path, write_matrix_market(m))?;
    Ok(())
}

/// Parsed manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub n: usize,
    pub symmetric: bool,
    pub a: PathBuf,
    pub n_files: Vec<PathBuf>,
    pub b: PathBuf,
    pub c: Option<PathBuf>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut symmetric = None;
        let mut a = None;
        let mut b = None;
        let mut c = None;
        let mut n_files = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(char::is_whitespace)
                .map(|(k, v)| (k, v.trim()))
                .ok_or_else(|| perr(ln, format!("expected 'key value', got '{line}'")))?;
            if value.is_empty() {
                return Err(perr(ln, format!("missing value for '{key}'")));
            }
            let once = |slot: &mut Option<PathBuf>| -> Result<()> {
                if slot.is_some() {
                    return Err(perr(ln, format!("duplicate key '{key}'")));
                }
                *slot = Some(PathBuf::from(value));
                Ok(())
            };
            match key {
                "n" => {
                    if n.is_some() {
                        return Err(perr(ln, "duplicate key 'n'"));
                    }
                    n = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| perr(ln, format!("invalid dimension '{value}'")))?,
                    );
                }
                "symmetric" => {
                    if symmetric.is_some() {
                        return Err(perr(ln, "duplicate key 'symmetric'"));
                    }
                    symmetric = Some(match value {
                        "true" => true,
                        "false" => false,
                        _ => return Err(perr(ln, format!("expected true or false, got '{value}'"))),
                    });
                }
                "A" => once(&mut a)?,
                "B" => once(&mut b)?,
                "C" => once(&mut c)?,
                "N" => n_files.push(PathBuf::from(value)),
                other => return Err(perr(ln, format!("unknown key '{other}'"))),
            }
        }
        let last = text.lines().count().max(1);
        Ok(Self {
            n: n.ok_or_else(|| perr(last, "missing key 'n'"))?,
            symmetric: symmetric.unwrap_or(false),
            a: a.ok_or_else(|| perr(last, "missing key 'A'"))?,
            n_files,
            b: b.ok_or_else(|| perr(last, "missing key 'B'"))?,
            c,
        })
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n {}", self.n);
        let _ = writeln!(s, "symmetric {}", self.symmetric);
        let _ = writeln!(s, "A {}", self.a.display());
        for f in &self.n_files {
            let _ = writeln!(s, "N {}", f.display());
        }
        let _ = writeln!(s, "B {}", self.b.display());
        if let Some(c) = &self.c {
            let _ = writeln!(s, "C {}", c.display());
        }
        s
    }
}

/// Load the system described by a manifest file.
pub fn load_system(manifest_path: &Path) -> Result<BilinearSystem> {
    let man = Manifest::parse(&fs::read_to_string(manifest_path)?)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let read = |p: &Path| read_matrix_market_file(&dir.join(p));
    let a = read(&man.a)?;
    if a.nrows() != man.n || a.ncols() != man.n {
        return Err(Error::Dimension(format!(
            "manifest declares n = {} but A is {} x {}",
            man.n,
            a.nrows(),
            a.ncols()
        )));
    }
    let ns = man.n_files.iter().map(|p| read(p)).collect::<Result<Vec<_>>>()?;
    let b = read(&man.b)?;
    let sys = if man.symmetric {
        BilinearSystem::new_symmetric(a, ns, b)?
    } else {
        BilinearSystem::new(a, ns, b)?
    };
    match &man.c {
        Some(c) => sys.with_output(read(c)?),
        None => Ok(sys),
    }
}

/// Write `A.mtx`, `N1.mtx`, …, `B.mtx` (and `C.mtx` when set) plus
/// `manifest.txt` into `dir`; returns the manifest path.
pub fn save_system(sys: &BilinearSystem, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    write_matrix_market_file(&dir.join("A.mtx"), sys.a())?;
    let mut n_files = Vec::new();
    for (i, ni) in sys.n_list().iter().enumerate() {
        let name = PathBuf::from(format!("N{}.mtx", i + 1));
        write_matrix_market_file(&dir.join(&name), ni)?;
        n_files.push(name);
    }
    write_matrix_market_file(&dir.join("B.mtx"), sys.b())?;
    let c = match sys.c_explicit() {
        Some(c) => {
            write_matrix_market_file(&dir.join("C.mtx"), c)?;
            Some(PathBuf::from("C.mtx"))
        }
        None => None,
    };
    let man = Manifest {
        n: sys.dim(),
        symmetric: sys.is_symmetric(),
        a: "A.mtx".into(),
        n_files,
        b: "B.mtx".into(),
        c,
    };
    let path = dir.join("manifest.txt");
    fs::write(&path, man.render())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_symmetric() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 4\n2 1 -1.5\n";
        let m = read_matrix_market(text).unwrap();
        assert_eq!(m, Mat::from_row_slice(2, 2, &[4.0, -1.5, -1.5, 0.0]));
    }

    #[test]
    fn array_general_and_integer() {
        let m = read_matrix_market("%%MatrixMarket matrix array integer general\n2 1\n3\n-7\n").unwrap();
        assert_eq!(m, Mat::from_column_slice(2, 1, &[3.0, -7.0]));
        assert!(read_matrix_market("%%MatrixMarket matrix array integer general\n1 1\n1.5\n").is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(matches!(read_matrix_market(text), Err(Error::Parse { line: 3, .. })));
        let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1.0\n";
        assert!(matches!(read_matrix_market(text), Err(Error::Parse { line: 3, .. })));
        let text = "%%MatrixMarket matrix array real general\n100000 100000\n";
        assert!(matches!(read_matrix_market(text), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn round_trip_exact() {
        let m = Mat::from_fn(3, 4, |i, j| (i as f64 + 0.1) / (j as f64 + 3.0) - 0.2);
        assert_eq!(read_matrix_market(&write_matrix_market(&m)).unwrap(), m);
        let mut s = Mat::zeros(5, 5);
        s[(3, 1)] = std::f64::consts::PI;
        let text = write_matrix_market(&s);
        assert!(text.contains("coordinate"));
        assert_eq!(read_matrix_market(&text).unwrap(), s);
    }

    #[test]
    fn manifest_parse_and_render() {
        let text = "# system\nn 3\nsymmetric true\nA a.mtx\nN n1.mtx\nN n2.mtx # second\nB b.mtx\n";
        let man = Manifest::parse(text).unwrap();
        assert_eq!(man.n_files.len(), 2);
        assert!(man.symmetric && man.c.is_none());
        assert_eq!(Manifest::parse(&man.render()).unwrap(), man);
        assert!(matches!(
            Manifest::parse("n 3\nA a\nA b\nB b\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(Manifest::parse("n 3\nB b\n").is_err());
        assert!(Manifest::parse("n 3\nA a\nB b\nQ q\n").is_err());
    }
}
