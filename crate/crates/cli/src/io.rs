//! CSV formats and atomic file output.
//!
//! Profiles: a `# r_max=<v> n=<v>` line, then columns `r,value`.
//! Potentials: columns `r,V` and optionally `rVprime`.
//! Curves and tables: a header row, then plain numeric rows.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use kirchhoff_core::grid::make_grid;
use kirchhoff_core::potential::RadialPotential;
use kirchhoff_core::{PotentialSpec, RadialFunction};

use crate::error::{Error, Result};

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn table_bytes<const K: usize>(header: [&str; K], rows: impl IntoIterator<Item = [f64; K]>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string())).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn profile_csv(u: &RadialFunction) -> Vec<u8> {
    let g = u.grid();
    let mut out = format!("# r_max={} n={}\n", g.r_max(), g.n()).into_bytes();
    out.extend(table_bytes(["r", "value"], g.nodes().iter().zip(u.values()).map(|(&r, &v)| [r, v])));
    out
}

pub fn write_profile(path: &Path, u: &RadialFunction) -> Result<()> {
    write_atomic(path, &profile_csv(u))
}

pub fn write_table<const K: usize>(path: &Path, header: [&str; K], rows: impl IntoIterator<Item = [f64; K]>) -> Result<()> {
    write_atomic(path, &table_bytes(header, rows))
}

fn parse_header(line: &str) -> Option<(f64, usize)> {
    let rest = line.trim().strip_prefix('#')?;
    let (mut r_max, mut n) = (None, None);
    for field in rest.split_whitespace() {
        match field.split_once('=')? {
            ("r_max", v) => r_max = v.parse().ok(),
            ("n", v) => n = v.parse().ok(),
            _ => {}
        }
    }
    Some((r_max?, n?))
}

fn number(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::format(path, format!("record {line}: `{s}` is not a number")))
}

/// Reads a profile written by [`write_profile`] and rebuilds its grid.
pub fn read_profile(path: &Path) -> Result<RadialFunction> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| Error::io(path, e))?;
    let (r_max, n) = parse_header(&first).ok_or_else(|| Error::format(path, "missing `# r_max=<v> n=<v>` header"))?;
    let grid = make_grid(r_max, n)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "r" || &headers[1] != "value" {
        return Err(Error::format(path, "expected columns r,value"));
    }
    let mut values = Vec::with_capacity(n);
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        let r = number(path, i + 1, &rec[0])?;
        if let Some(&node) = grid.nodes().get(i) {
            if (r - node).abs() > 1e-9 * r_max {
                return Err(Error::format(path, format!("record {}: radius {r} is not grid node {node}", i + 1)));
            }
        }
        values.push(number(path, i + 1, &rec[1])?);
    }
    Ok(RadialFunction::new(Arc::clone(&grid), values)?)
}

/// Reads `r,V[,rVprime]`. `v_inf` defaults to the last sampled value.
pub fn read_potential(path: &Path, v_inf: Option<f64>) -> Result<PotentialSpec> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let headers = rdr.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let with_dv = match cols.as_slice() {
        ["r", "V"] => false,
        ["r", "V", "rVprime"] => true,
        _ => return Err(Error::format(path, "expected columns r,V or r,V,rVprime")),
    };
    let (mut r, mut v, mut d) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        r.push(number(path, i + 1, &rec[0])?);
        v.push(number(path, i + 1, &rec[1])?);
        if with_dv {
            d.push(number(path, i + 1, &rec[2])?);
        }
    }
    let v_inf = match v_inf.or_else(|| v.last().copied()) {
        Some(x) => x,
        None => return Err(Error::format(path, "no samples")),
    };
    Ok(PotentialSpec::Radial(RadialPotential::new(r, v, with_dv.then_some(d), v_inf)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(7.5, 100).unwrap();
        let u = RadialFunction::from_fn(g, |r| (-r * r / 3.0).exp() / 7.0).unwrap();
        let path = dir.path().join("u.csv");
        write_profile(&path, &u).unwrap();
        let back = read_profile(&path).unwrap();
        assert_eq!(back, u);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# r_max=7.5 n=100\nr,value\n"));
    }

    #[test]
    fn malformed_profiles_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "r,value\n0,1\n").unwrap();
        assert!(matches!(read_profile(&path), Err(Error::Format { .. })));
        fs::write(&path, "# r_max=1 n=16\nr,value\n0,1\n").unwrap();
        assert!(read_profile(&path).unwrap_err().is_usage());
    }

    #[test]
    fn potential_file_with_and_without_derivative() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        fs::write(&path, "r,V,rVprime\n0,1,0\n1,1.5,0.25\n2,2,0\n").unwrap();
        let v = read_potential(&path, None).unwrap();
        assert_eq!(v.v_inf(), 2.0);
        assert!((v.value(0.5) - 1.25).abs() < 1e-15);
        fs::write(&path, "r,V\n0,1\n1,2\n").unwrap();
        let v = read_potential(&path, Some(3.0)).unwrap();
        assert_eq!(v.v_inf(), 3.0);
        assert!(v.r_dv_at(0.5).is_err());
    }
}
