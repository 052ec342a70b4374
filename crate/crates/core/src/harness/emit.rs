//! JSON and CSV serialization of reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::report::{ScenarioReport, Status};
use super::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Pretty JSON of the full nested report.
pub fn write_json<W: Write>(report: &ScenarioReport, mut out: W) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per (point, check).
pub fn write_csv<W: Write>(report: &ScenarioReport, out: W) -> Result<(), HarnessError> {
    let n = report.dim;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["domain_id".to_string()];
    for k in 1..=n {
        header.push(format!("z{k}_re"));
        header.push(format!("z{k}_im"));
    }
    for k in 1..=n {
        header.push(format!("tau_{k}"));
    }
    for h in ["p_D", "check", "status", "lo", "hi", "oracle", "margin", "pass", "approximate"] {
        header.push(h.to_string());
    }
    w.write_record(&header)?;
    for rec in &report.records {
        let mut prefix = vec![report.id.clone()];
        for x in rec.point.entries() {
            prefix.push(x.re.to_string());
            prefix.push(x.im.to_string());
        }
        for k in 0..n {
            prefix.push(opt(rec.taus.get(k).copied()));
        }
        prefix.push(opt(rec.p_d));
        for c in &rec.checks {
            let mut row = prefix.clone();
            let status = serde_json::to_value(c.status)?;
            row.push(c.check.as_str().to_string());
            row.push(status.as_str().unwrap_or_default().to_string());
            row.push(opt(c.lo));
            row.push(opt(c.hi));
            row.push(opt(c.oracle));
            row.push(opt(c.margin));
            row.push((c.status != Status::Fail).to_string());
            row.push(rec.approximate.to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `radius, v_p2, expected` rows of the radial sweep.
pub fn write_sweep_csv<W: Write>(report: &ScenarioReport, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["radius", "v_p2", "expected"])?;
    for row in &report.sweep {
        w.write_record([row.radius.to_string(), row.v_p2.to_string(), opt(row.expected)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the report to `path` in the given format.
pub fn emit(report: &ScenarioReport, format: Format, path: &Path) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    let out = BufWriter::new(file);
    match format {
        Format::Json => write_json(report, out),
        Format::Csv => write_csv(report, out),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{run_scenario, RunOptions, Scenario};
    use super::*;

    fn report() -> ScenarioReport {
        let s = Scenario::from_json(
            r#"{"id": "pd", "domain": {"variant": "polydisc", "n": 2,
                "center": [[0,0],[0,0]], "radii": [1, 2]},
                "points": [[[0,0],[0,0]], [[0.2,0],[0,0.5]]],
                "checks": ["theorem_ge", "bergman_sandwich", "ratio"]}"#,
        )
        .unwrap();
        run_scenario(&s, &RunOptions::default()).unwrap()
    }

    #[test]
    fn csv_rows_mirror_json_records() {
        let rep = report();
        let mut buf = Vec::new();
        write_csv(&rep, &mut buf).unwrap();
        let mut rdr = csv::Reader::from_reader(buf.as_slice());
        let headers = rdr.headers().unwrap().clone();
        assert_eq!(&headers[0], "domain_id");
        assert_eq!(&headers[5], "tau_1");
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 6);
        let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
        for (i, row) in rows.iter().enumerate() {
            let rec = &rep.records[i / 3];
            let check = &rec.checks[i % 3];
            assert_eq!(&row[col("check")], check.check.as_str());
            assert_eq!(row[col("p_D")].parse::<f64>().unwrap(), rec.p_d.unwrap());
            assert_eq!(row[col("margin")].parse::<f64>().unwrap(), check.margin.unwrap());
            assert_eq!(row[col("lo")].parse::<f64>().unwrap(), check.lo.unwrap());
            assert_eq!(&row[col("pass")], "true");
        }
    }

    #[test]
    fn emit_writes_files() {
        let rep = report();
        let dir = tempfile::tempdir().unwrap();
        let json = dir.path().join("r.json");
        emit(&rep, Format::Json, &json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 2);
        assert_eq!(v["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
        assert!(emit(&rep, Format::Csv, &dir.path().join("missing").join("r.csv")).is_err());
    }
}
