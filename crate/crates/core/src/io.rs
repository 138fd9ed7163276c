//! Path serialization: CSV files with header `t,x`, one observation per
//! row, floats written with 17 significant digits so values round-trip
//! losslessly.

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::sampler::{Grid, PathKind, PathSample};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

/// Format a float with 17 significant digits (lossless round trip).
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a path as CSV (`t,x`).
pub fn write_path_csv(path: &PathSample, out: &Path) -> Result<()> {
    let file = std::fs::File::create(out)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "t,x")?;
    for (k, &x) in path.values.iter().enumerate() {
        writeln!(w, "{},{}", format_f64(path.grid.time(k)), format_f64(x))?;
    }
    w.flush()?;
    Ok(())
}

/// Read a CSV of observations into a path on a uniform grid. The file must
/// have the `t,x` header, strictly increasing times starting at 0, and
/// uniform spacing.
pub fn read_path_csv(input: &Path, model: &NoiseModel, kind: PathKind) -> Result<PathSample> {
    let file = std::fs::File::open(input)?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::DegenerateInput("empty observation file".into()))??;
    if header.trim() != "t,x" {
        return Err(Error::Parse(format!(
            "expected header 't,x', found '{}'",
            header.trim()
        )));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (t, x) = trimmed
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("row {}: expected 't,x'", lineno + 2)))?;
        let t: f64 = t
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("row {}: bad t: {e}", lineno + 2)))?;
        let x: f64 = x
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("row {}: bad x: {e}", lineno + 2)))?;
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(Error::Parse(format!(
                    "row {}: times must be strictly increasing",
                    lineno + 2
                )));
            }
        }
        times.push(t);
        values.push(x);
    }
    if times.len() < 2 {
        return Err(Error::DegenerateInput(
            "observation file needs at least two rows".into(),
        ));
    }
    if times[0].abs() > 1e-9 {
        return Err(Error::Parse("observations must start at t = 0".into()));
    }
    let n = times.len() - 1;
    let dt = (times[n] - times[0]) / n as f64;
    for (k, &t) in times.iter().enumerate() {
        if (t - k as f64 * dt).abs() > 1e-6 * dt.max(1.0) {
            return Err(Error::Parse(format!(
                "observations are not on a uniform grid (row {})",
                k + 2
            )));
        }
    }
    Ok(PathSample {
        grid: Grid::new(dt, n)?,
        values,
        model: model.clone(),
        theta: None,
        seed: 0,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Grid;

    #[test]
    fn csv_round_trip_is_lossless() {
        let dir = std::env::temp_dir().join("langevin_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("p.csv");
        let path = PathSample {
            grid: Grid::new(0.1, 4).unwrap(),
            values: vec![0.0, 0.12345678901234567, -2.5e-17, 3.0, -1.0 / 3.0],
            model: NoiseModel::brownian(),
            theta: None,
            seed: 1,
            kind: PathKind::ZeroStart,
        };
        write_path_csv(&path, &file).unwrap();
        let back = read_path_csv(&file, &NoiseModel::brownian(), PathKind::ZeroStart).unwrap();
        assert_eq!(path.values, back.values);
        assert_eq!(back.grid.n(), 4);
        assert!((back.grid.dt() - 0.1).abs() < 1e-12);
        std::fs::remove_file(&file).unwrap();
    }

    #[test]
    fn csv_rejects_malformed_input() {
        let dir = std::env::temp_dir().join("langevin_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        for (name, content) in [
            ("empty.csv", "t,x\n"),
            ("header.csv", "time,value\n0,0\n1,1\n"),
            ("nonuniform.csv", "t,x\n0,0\n1,1\n3,2\n"),
            ("decreasing.csv", "t,x\n0,0\n2,1\n1,2\n"),
        ] {
            let file = dir.join(name);
            std::fs::write(&file, content).unwrap();
            assert!(
                read_path_csv(&file, &NoiseModel::brownian(), PathKind::ZeroStart).is_err(),
                "{name} should fail"
            );
            std::fs::remove_file(&file).unwrap();
        }
    }
}
