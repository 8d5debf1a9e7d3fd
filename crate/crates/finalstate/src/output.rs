//! Serialization of experiment results.
//!
//! JSON is the machine-readable document of record: re-parsing an emitted
//! document reproduces every numeric field exactly (floats are written with
//! shortest round-trip formatting). CSV is a flat per-trial table with
//! `#summary` trailer rows for the aggregate metrics.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::experiments::{ExperimentConfig, Summary, TrialRecord};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// The complete result document: schema tag, config echo, aggregate summary,
/// optional per-trial records, wall-clock timing last (so documents can be
/// compared for determinism by dropping the final field).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputDocument {
    pub schema_version: String,
    pub config: ExperimentConfig,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_trial: Option<Vec<TrialRecord>>,
    pub timing_seconds: f64,
}

impl OutputDocument {
    pub fn new(
        config: ExperimentConfig,
        summary: Summary,
        per_trial: Option<Vec<TrialRecord>>,
        timing_seconds: f64,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            config,
            summary,
            per_trial,
            timing_seconds,
        }
    }
}

pub fn render_json(doc: &OutputDocument) -> Result<String, serde_json::Error> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

fn csv_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render_csv(doc: &OutputDocument) -> String {
    let mut out = String::new();
    out.push_str("trial,sum_lambda,entropy_bits,purity,banaszek_f,mean_exact_f,classical_success,annihilation_flag,decode_successes,decode_attempts,unitarity_defect,process_fidelity\n");
    if let Some(records) = &doc.per_trial {
        for r in records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.trial,
                r.sum_lambda,
                r.entropy_bits,
                r.purity,
                r.banaszek_f,
                csv_opt_f64(r.mean_exact_f),
                r.classical_success.map(|b| b.to_string()).unwrap_or_default(),
                r.annihilation_flag,
                csv_opt_usize(r.decode_successes),
                csv_opt_usize(r.decode_attempts),
                csv_opt_f64(r.unitarity_defect),
                csv_opt_f64(r.process_fidelity),
            ));
        }
    }
    for (name, m) in &doc.summary.metrics {
        out.push_str(&format!(
            "#summary,{},mean={},stderr={},theory={},abs_dev={},pass={}\n",
            name,
            m.mean,
            csv_opt_f64(m.stderr),
            m.theory,
            m.abs_dev,
            m.pass
        ));
    }
    for (name, v) in &doc.summary.reference_values {
        out.push_str(&format!("#reference,{},{}\n", name, v));
    }
    out.push_str(&format!("#all_pass,{}\n", doc.summary.all_pass));
    out
}

/// Render in the requested format and write to the path or stdout.
pub fn write_output(
    doc: &OutputDocument,
    format: OutputFormat,
    out_path: Option<&Path>,
) -> io::Result<()> {
    let rendered = match format {
        OutputFormat::Json => render_json(doc).map_err(io::Error::other)?,
        OutputFormat::Csv => render_csv(doc),
    };
    match out_path {
        Some(p) => std::fs::write(p, rendered),
        None => io::stdout().write_all(rendered.as_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_experiment, ExperimentConfig, ExperimentKind};

    fn sample_doc(per_trial: bool) -> OutputDocument {
        let cfg = ExperimentConfig::new(ExperimentKind::Page, 4, 8, 5);
        let (records, summary) = run_experiment(&cfg).unwrap();
        OutputDocument::new(cfg, summary, per_trial.then_some(records), 0.25)
    }

    #[test]
    fn json_round_trip_is_exact() {
        let doc = sample_doc(true);
        let rendered = render_json(&doc).unwrap();
        let parsed: OutputDocument = serde_json::from_str(&rendered).unwrap();
        let rerendered = render_json(&parsed).unwrap();
        assert_eq!(rendered, rerendered);
        assert_eq!(parsed.schema_version, SCHEMA_VERSION);
        assert_eq!(parsed.per_trial.unwrap().len(), 8);
    }

    #[test]
    fn json_omits_per_trial_when_absent() {
        let rendered = render_json(&sample_doc(false)).unwrap();
        assert!(!rendered.contains("per_trial"));
    }

    #[test]
    fn csv_shape() {
        let doc = sample_doc(true);
        let rendered = render_csv(&doc);
        let lines: Vec<&str> = rendered.lines().collect();
        assert!(lines[0].starts_with("trial,sum_lambda"));
        let data_rows = lines.iter().filter(|l| !l.starts_with('#') && !l.starts_with("trial")).count();
        assert_eq!(data_rows, 8);
        assert!(lines.iter().any(|l| l.starts_with("#summary,entropy_bits")));
        assert!(lines.iter().any(|l| l.starts_with("#all_pass,")));
    }

    #[test]
    fn write_output_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        let doc = sample_doc(false);
        write_output(&doc, OutputFormat::Json, Some(&path)).unwrap();
        let contents = std::fs::read_to_string(&path).unwrap();
        let parsed: OutputDocument = serde_json::from_str(&contents).unwrap();
        assert_eq!(parsed.config.trials, 8);
    }
}
