//! Evaluation reports: per-sample similarities, text tables and CSV.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsl::Platform;

use super::PipelineError;

/// Scores of one system on one test set. Syntax-error samples are included
/// in the mean as zeros.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub system: String,
    pub platform: String,
    pub layout: String,
    pub model_id: String,
    pub threshold: f64,
    pub samples: usize,
    pub mean_similarity: f64,
    pub syntax_errors: usize,
    pub per_sample: Vec<f64>,
}

impl EvalReport {
    pub fn save_json(&self, path: &Path) -> Result<(), PipelineError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self, PipelineError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

fn platform_order(name: &str) -> usize {
    Platform::ALL
        .iter()
        .position(|p| p.name() == name)
        .unwrap_or(usize::MAX)
}

/// Aligned text table: one row per system, one column per platform, cells
/// are mean similarities in percent.
pub fn report_table(reports: &[EvalReport]) -> String {
    let mut platforms: Vec<&str> = reports.iter().map(|r| r.platform.as_str()).collect();
    platforms.sort_by_key(|p| platform_order(p));
    platforms.dedup();
    let mut systems: Vec<&str> = reports.iter().map(|r| r.system.as_str()).collect();
    systems.sort();
    systems.dedup();

    let col = 12usize;
    let mut out = String::new();
    out.push_str(&format!("{:<12}", "system"));
    for p in &platforms {
        out.push_str(&format!("{p:>col$}"));
    }
    out.push('\n');
    for s in &systems {
        out.push_str(&format!("{s:<12}"));
        for p in &platforms {
            let cell = reports
                .iter()
                .find(|r| r.system == *s && r.platform == *p)
                .map(|r| format!("{:.3}%", r.mean_similarity * 100.0))
                .unwrap_or_else(|| "-".to_string());
            out.push_str(&format!("{cell:>col$}"));
        }
        out.push('\n');
    }
    out
}

/// Machine-readable summary; values print with full round-trip precision.
pub fn report_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("system,platform,layout,samples,mean_similarity,syntax_errors,threshold\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.system, r.platform, r.layout, r.samples, r.mean_similarity, r.syntax_errors, r.threshold
        ));
    }
    out
}

/// Two-column CSV for threshold or dataset-size sweeps.
pub fn sweep_csv(header: (&str, &str), rows: &[(f64, f64)]) -> String {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (x, y) in rows {
        out.push_str(&format!("{x},{y}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(system: &str, platform: &str, mean: f64) -> EvalReport {
        EvalReport {
            system: system.to_string(),
            platform: platform.to_string(),
            layout: format!("{platform}-pruned"),
            model_id: "m".to_string(),
            threshold: 0.01,
            samples: 3,
            mean_similarity: mean,
            syntax_errors: 0,
            per_sample: vec![mean; 3],
        }
    }

    #[test]
    fn table_has_one_row_per_system_and_platform_columns() {
        let reports = vec![
            report("baseline", "web", 0.62882),
            report("baseline", "ios", 0.70303),
            report("baseline", "android", 0.65825),
            report("pixcoder", "web", 0.98699),
            report("pixcoder", "ios", 0.95562),
            report("pixcoder", "android", 0.98177),
        ];
        let table = report_table(&reports);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].contains("web") && lines[0].contains("ios") && lines[0].contains("android"));
        let web_col = lines[0].find("web").unwrap();
        let ios_col = lines[0].find("ios").unwrap();
        assert!(web_col < ios_col, "platform columns ordered web, ios, android");
        assert!(lines[1].starts_with("baseline"));
        assert!(lines[2].starts_with("pixcoder"));
        assert!(lines[2].contains("95.562%"));
    }

    #[test]
    fn single_report_gives_single_row() {
        let table = report_table(&[report("pixcoder", "ios", 0.9)]);
        assert_eq!(table.lines().count(), 2);
    }

    #[test]
    fn csv_round_trips_exact_values() {
        let mean = 0.123456789012345678;
        let csv = report_csv(&[report("pixcoder", "ios", mean)]);
        let line = csv.lines().nth(1).unwrap();
        let reloaded: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert_eq!(reloaded, mean);
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let r = report("pixcoder", "web", 0.5 + 1e-17 + 0.25);
        r.save_json(&path).unwrap();
        let loaded = EvalReport::load_json(&path).unwrap();
        assert_eq!(loaded.mean_similarity, r.mean_similarity);
        assert_eq!(loaded.per_sample, r.per_sample);
    }
}
