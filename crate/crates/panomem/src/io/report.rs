use std::path::Path;

use panomem_core::metrics::MetricReport;
use serde_json::{json, Map, Value};

use super::{write_bytes, write_json};
use crate::error::{Error, Result};

/// `{metric: {per_frame, mean, std}}`.
pub fn report_json(report: &MetricReport) -> Value {
    let mut m = Map::new();
    for s in &report.metrics {
        m.insert(
            s.name.clone(),
            json!({ "per_frame": s.per_frame, "mean": s.mean, "std": s.std }),
        );
    }
    Value::Object(m)
}

pub fn write_report_json(path: &Path, report: &MetricReport) -> Result<()> {
    write_json(path, &report_json(report))
}

/// One row per frame plus `mean` and `std` rows; one column per metric.
pub fn write_report_csv(path: &Path, report: &MetricReport) -> Result<()> {
    let err = |e: csv::Error| Error::format(path, e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["frame".to_string()];
    header.extend(report.metrics.iter().map(|s| s.name.clone()));
    w.write_record(&header).map_err(err)?;
    let rows = report.metrics.iter().map(|s| s.per_frame.len()).max().unwrap_or(0);
    for i in 0..rows {
        let mut rec = vec![report.frames.get(i).copied().unwrap_or(i).to_string()];
        rec.extend(
            report
                .metrics
                .iter()
                .map(|s| s.per_frame.get(i).map_or(String::new(), |v| v.to_string())),
        );
        w.write_record(&rec).map_err(err)?;
    }
    for (label, pick) in [("mean", 0), ("std", 1)] {
        let mut rec = vec![label.to_string()];
        rec.extend(report.metrics.iter().map(|s| if pick == 0 { s.mean } else { s.std }.to_string()));
        w.write_record(&rec).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::format(path, e.to_string()))?;
    write_bytes(path, &bytes)
}
