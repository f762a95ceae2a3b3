//! Curve files: `theta,<outcome labels>,status`, one row per grid point.
//! Failed points keep empty outcome cells and `error: <message>` status.

use std::io::{Read, Write};

use super::{AnalysisError, CurvePoint, TradeOffCurve};

fn csv_err(e: impl std::fmt::Display) -> AnalysisError {
    AnalysisError::Csv(e.to_string())
}

pub fn write_curve_csv<W: Write>(curve: &TradeOffCurve, out: W) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["theta".to_string()];
    header.extend(curve.labels.iter().cloned());
    header.push("status".into());
    w.write_record(&header).map_err(csv_err)?;
    for p in &curve.points {
        let mut row = vec![format!("{:?}", p.theta)];
        match &p.outcome {
            Ok(values) => {
                row.extend(values.iter().map(|v| format!("{v:?}")));
                row.push("ok".into());
            }
            Err(msg) => {
                row.extend(std::iter::repeat_n(String::new(), curve.labels.len()));
                row.push(format!("error: {msg}"));
            }
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// Reads a curve written by [`write_curve_csv`]. Metadata not stored in
/// the file (ids, `tau`, `Delta`) is left empty or zero.
pub fn read_curve_csv<R: Read>(input: R) -> Result<TradeOffCurve, AnalysisError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    let n = header.len();
    if n < 4 || &header[0] != "theta" || &header[n - 1] != "status" {
        return Err(AnalysisError::Csv(
            "header must be theta,<at least two outcome labels>,status".into(),
        ));
    }
    let labels: Vec<String> = header.iter().skip(1).take(n - 2).map(str::to_string).collect();
    let mut points = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = line + 2;
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| AnalysisError::Csv(format!("row {row}: '{s}' is not a number")))
        };
        let theta = num(&rec[0])?;
        let status = &rec[n - 1];
        let outcome = if status == "ok" {
            Ok((1..n - 1).map(|k| num(&rec[k])).collect::<Result<Vec<_>, _>>()?)
        } else if let Some(msg) = status.strip_prefix("error: ") {
            Err(msg.to_string())
        } else {
            return Err(AnalysisError::Csv(format!("row {row}: unknown status '{status}'")));
        };
        points.push(CurvePoint { theta, outcome });
    }
    Ok(TradeOffCurve {
        indicator_id: String::new(),
        scenario_id: String::new(),
        tau: 0,
        min_interevent: 0,
        labels,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let curve = TradeOffCurve {
            indicator_id: String::new(),
            scenario_id: String::new(),
            tau: 0,
            min_interevent: 0,
            labels: vec!["peak_chile_icu".into(), "lockdown_pct".into()],
            points: vec![
                CurvePoint { theta: -0.5, outcome: Ok(vec![1200.25, 36.0]) },
                CurvePoint { theta: 1e-7, outcome: Err("theta = 1e-7: bad, really".into()) },
                CurvePoint { theta: 253.0, outcome: Ok(vec![0.1 + 0.2, 100.0]) },
            ],
        };
        let mut buf = Vec::new();
        write_curve_csv(&curve, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("theta,peak_chile_icu,lockdown_pct,status\n"));
        assert_eq!(read_curve_csv(buf.as_slice()).unwrap(), curve);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_curve_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_curve_csv("theta,p,l,status\nx,1,2,ok\n".as_bytes()).is_err());
        assert!(read_curve_csv("theta,p,l,status\n1,1,2,maybe\n".as_bytes()).is_err());
    }
}
