//! CSV formatting and atomic file writes.

use crate::error::Result;
use std::io::Write;
use std::path::Path;

/// Fixed 17-significant-digit formatting, identical on every platform.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".into(), num)
}

/// Header plus rows with `\n` line endings.
pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    // writing to a Vec cannot fail
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Numeric columns of equal length as CSV.
pub fn columns_csv(header: &[&str], columns: &[&[f64]]) -> String {
    let n = columns.first().map_or(0, |c| c.len());
    let rows: Vec<Vec<String>> = (0..n).map(|k| columns.iter().map(|c| num(c[k])).collect()).collect();
    csv_string(header, &rows)
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-40.0), "-4.0000000000000000e1");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn csv_layout() {
        let s = columns_csv(&["t", "y"], &[&[0.0, 1.0], &[2.0, 3.0]]);
        assert_eq!(s, "t,y\n0.0000000000000000e0,2.0000000000000000e0\n1.0000000000000000e0,3.0000000000000000e0\n");
        assert_eq!(csv_string(&["a"], &[vec!["x, y".into()]]), "a\n\"x, y\"\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("f.csv");
        write_atomic(&p, "one\n").unwrap();
        write_atomic(&p, "two\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two\n");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
