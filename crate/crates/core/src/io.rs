//! CSV point files, the sparse line format and z-score normalization.
//!
//! Dense files hold one point per line as comma-separated numbers. Sparse
//! files hold one vector per line as `dim;idx:val,idx:val,...`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{Error, Metric, PointSet, Result, SparsePoint};

pub fn load_csv(path: impl AsRef<Path>, metric: Metric) -> Result<PointSet> {
    read_csv(File::open(path)?, metric)
}

/// Parses comma-separated rows of equal width. Blank lines are skipped;
/// line numbers in errors are 1-based.
pub fn read_csv<R: Read>(input: R, metric: Metric) -> Result<PointSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut coords = Vec::new();
    let mut dim = None;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        match dim {
            None => dim = Some(record.len()),
            Some(d) if d != record.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {d} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        for field in record.iter() {
            let x: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("not a number: {field:?}"),
            })?;
            if !x.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value {field:?}"),
                });
            }
            coords.push(x);
        }
    }
    let dim = dim.ok_or_else(|| Error::input("input contains no points"))?;
    PointSet::from_flat(dim, coords, metric)
}

pub fn write_csv(path: impl AsRef<Path>, ps: &PointSet) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv_to(&mut out, ps)?;
    out.flush()?;
    Ok(())
}

/// Writes every coordinate in shortest round-trip decimal form.
pub fn write_csv_to<W: Write>(out: W, ps: &PointSet) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for p in ps.iter() {
        w.write_record(p.iter().map(|x| x.to_string()))
            .map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn format_sparse(v: &SparsePoint) -> String {
    let entries: Vec<String> = v.entries().iter().map(|(i, x)| format!("{i}:{x}")).collect();
    format!("{};{}", v.dim(), entries.join(","))
}

pub fn parse_sparse(line: &str) -> std::result::Result<SparsePoint, String> {
    let (dim, rest) = line.split_once(';').ok_or("missing ';' after dimension")?;
    let dim: usize = dim.trim().parse().map_err(|_| format!("bad dimension {dim:?}"))?;
    let mut entries = Vec::new();
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (i, x) = item.split_once(':').ok_or_else(|| format!("bad entry {item:?}"))?;
        let i: usize = i.trim().parse().map_err(|_| format!("bad index {i:?}"))?;
        let x: f64 = x.trim().parse().map_err(|_| format!("bad value {x:?}"))?;
        entries.push((i, x));
    }
    SparsePoint::new(dim, entries).map_err(|e| e.to_string())
}

pub fn write_sparse<W: Write>(mut out: W, vs: &[SparsePoint]) -> Result<()> {
    for v in vs {
        writeln!(out, "{}", format_sparse(v))?;
    }
    Ok(())
}

pub fn read_sparse<R: Read>(input: R) -> Result<Vec<SparsePoint>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_sparse(&line).map_err(|message| Error::Parse { line: i + 1, message })?);
    }
    Ok(out)
}

/// Centers every dimension and scales it to unit population variance.
/// Constant dimensions are centered only.
pub fn normalize_zscore(ps: &PointSet) -> Result<PointSet> {
    let n = ps.len();
    if n < 2 {
        return Err(Error::input("normalization needs at least two points"));
    }
    let d = ps.dim();
    let mut mean = vec![0.0; d];
    for p in ps.iter() {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for p in ps.iter() {
        for k in 0..d {
            var[k] += (p[k] - mean[k]).powi(2);
        }
    }
    let sd: Vec<f64> = var.iter().map(|v| (v / n as f64).sqrt()).collect();
    let coords = ps
        .iter()
        .flat_map(|p| {
            (0..d).map(|k| {
                let c = p[k] - mean[k];
                if sd[k] > 0.0 {
                    c / sd[k]
                } else {
                    0.0
                }
            })
        })
        .collect();
    PointSet::from_flat(d, coords, ps.metric())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_stream, Seed};
    use rand::Rng;

    #[test]
    fn reads_simple_file() {
        let ps = read_csv("0,0\n3,4\n".as_bytes(), Metric::L2).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps.dist(0, 1), 5.0);
    }

    #[test]
    fn empty_and_malformed() {
        assert!(matches!(read_csv("".as_bytes(), Metric::L2), Err(Error::Input(_))));
        match read_csv("1,2\n3\n".as_bytes(), Metric::L2) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match read_csv("1,2\n3,x\n".as_bytes(), Metric::L2) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut r = rng_stream(Seed(2), "io");
        let ps = PointSet::new(
            (0..1000).map(|_| (0..3).map(|_| r.random::<f64>() * 1e3 - 500.0).collect()).collect(),
            Metric::L1,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &ps).unwrap();
        let back = read_csv(buf.as_slice(), Metric::L1).unwrap();
        assert_eq!(back, ps);
    }

    #[test]
    fn sparse_format() {
        let v = SparsePoint::new(10, vec![(1, 0.5), (7, -2.0)]).unwrap();
        assert_eq!(format_sparse(&v), "10;1:0.5,7:-2");
        assert_eq!(parse_sparse("10;1:0.5,7:-2").unwrap(), v);
        assert_eq!(parse_sparse("4;").unwrap().nnz(), 0);
        assert!(read_sparse("3;0:1\n3;5:1\n".as_bytes()).is_err());
    }

    #[test]
    fn zscore_examples() {
        let ps = PointSet::new(vec![vec![0.0, 5.0], vec![2.0, 5.0]], Metric::L2).unwrap();
        let z = normalize_zscore(&ps).unwrap();
        assert_eq!(z.to_rows(), vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
        assert!(normalize_zscore(&PointSet::new(vec![vec![1.0]], Metric::L2).unwrap()).is_err());
    }

    #[test]
    fn zscore_moments() {
        let mut r = rng_stream(Seed(3), "z");
        let ps = PointSet::new(
            (0..1000).map(|_| (0..5).map(|k| r.random::<f64>() * (k + 1) as f64 + k as f64).collect()).collect(),
            Metric::L2,
        )
        .unwrap();
        let z = normalize_zscore(&ps).unwrap();
        for k in 0..5 {
            let m: f64 = z.iter().map(|p| p[k]).sum::<f64>() / 1000.0;
            let v: f64 = z.iter().map(|p| (p[k] - m).powi(2)).sum::<f64>() / 1000.0;
            assert!(m.abs() <= 1e-9);
            assert!((v - 1.0).abs() <= 1e-6);
        }
    }
}
