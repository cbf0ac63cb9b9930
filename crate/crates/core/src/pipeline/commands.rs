//! The pipeline stages run by the command-line tool. Every output goes
//! through [`Workspace`], which writes atomically and records content
//! hashes in the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::compare::{compare_reports, Comparison};
use super::config::ExperimentConfig;
use super::manifest::{ExperimentManifest, StageRecord, MANIFEST_FILE};
use super::svg::{emit_scatter_svg, PlotLabels};
use super::train::{train_family, TrainOutcome};
use super::{read_to_string, sha256_hex, write_atomic, PipelineError};
use crate::dataset::{
    augment, parse_records, parse_samples, write_records, write_samples, AlloyRecord, AugmentPolicy, Property, Sample,
};
use crate::evalstat::{EvalReport, Family, FitDiagnostics, MEAN_LABEL};
use crate::synth::generate;

/// Output directory, effective configuration and the manifest being built.
#[derive(Debug)]
pub struct Workspace {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub jobs: usize,
    manifest: ExperimentManifest,
    expected: Option<ExperimentManifest>,
    stage: Option<(String, StageRecord)>,
}

impl Workspace {
    /// Opens `out_dir`, keeping the stages of an existing manifest there if
    /// it was produced with the same configuration. With `expected`, every
    /// finished stage is checked against that manifest's hashes.
    pub fn open(
        config: ExperimentConfig,
        out_dir: PathBuf,
        jobs: usize,
        expected: Option<ExperimentManifest>,
    ) -> Result<Self, PipelineError> {
        config.validate()?;
        let path = out_dir.join(MANIFEST_FILE);
        let manifest = match std::fs::read_to_string(&path) {
            Ok(text) => match ExperimentManifest::from_json(&text) {
                Ok(m) if m.config == config => m,
                _ => ExperimentManifest::new(&config),
            },
            Err(_) => ExperimentManifest::new(&config),
        };
        Ok(Self {
            config,
            out_dir,
            jobs: jobs.max(1),
            manifest,
            expected,
            stage: None,
        })
    }

    pub fn manifest(&self) -> &ExperimentManifest {
        &self.manifest
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.out_dir.join(rel)
    }

    fn key(&self, path: &Path) -> String {
        let rel = path.strip_prefix(&self.out_dir).unwrap_or(path);
        rel.to_string_lossy().replace('\\', "/")
    }

    fn begin(&mut self, name: String) {
        self.stage = Some((name, StageRecord::default()));
    }

    fn read_input(&mut self, path: &Path) -> Result<String, PipelineError> {
        let text = read_to_string(path)?;
        let key = self.key(path);
        if let Some((_, rec)) = self.stage.as_mut() {
            rec.inputs.insert(key, sha256_hex(text.as_bytes()));
        }
        Ok(text)
    }

    fn write_output(&mut self, path: &Path, text: &str) -> Result<(), PipelineError> {
        write_atomic(path, text.as_bytes())?;
        let key = self.key(path);
        if let Some((_, rec)) = self.stage.as_mut() {
            rec.outputs.insert(key, sha256_hex(text.as_bytes()));
        }
        Ok(())
    }

    fn output(&mut self, rel: &str, text: &str) -> Result<(), PipelineError> {
        let path = self.path(rel);
        self.write_output(&path, text)
    }

    fn finish(&mut self) -> Result<(), PipelineError> {
        let (name, rec) = self.stage.take().expect("stage begun");
        if let Some(expected) = &self.expected {
            expected.check_stage(&name, &rec)?;
        }
        self.manifest.stages.insert(name, rec);
        write_atomic(&self.path(MANIFEST_FILE), self.manifest.to_json().as_bytes())
    }

    fn load_records(&mut self) -> Result<Vec<AlloyRecord>, PipelineError> {
        let path = self.config.dataset.clone();
        let text = self.read_input(&path)?;
        parse_records(&text).map_err(|source| PipelineError::DataFile { path, source })
    }

    fn load_samples(&mut self, rel: &str) -> Result<Vec<Sample>, PipelineError> {
        let path = self.path(rel);
        let text = self.read_input(&path).map_err(|e| match e {
            PipelineError::Io { path, source } if source.kind() == std::io::ErrorKind::NotFound => {
                PipelineError::InvalidInput(format!("{} not found; run `augment` first", path.display()))
            }
            other => other,
        })?;
        parse_samples(&text, self.config.augment.encoding).map_err(|source| PipelineError::DataFile { path, source })
    }
}

fn augmented_rel(property: Property, split: &str) -> String {
    format!("augmented/{property}/{split}.csv")
}

fn report_rel(property: Property, family: Family, suffix: &str) -> String {
    format!("reports/{property}/{}{suffix}", family.name())
}

/// Writes a synthetic record-level dataset to the configured dataset path.
pub fn cmd_synth(ws: &mut Workspace) -> Result<usize, PipelineError> {
    let records = generate(ws.config.synth.n_records, &ws.config.synth.truth)
        .map_err(|e| PipelineError::Usage(e.to_string()))?;
    ws.begin("synth".into());
    let path = ws.config.dataset.clone();
    ws.write_output(&path, &write_records(&records))?;
    ws.finish()?;
    Ok(records.len())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSummary {
    pub records: usize,
    pub ranged_histogram: Vec<usize>,
    pub expected_train_val: u128,
}

/// Parses and validates the configured dataset.
pub fn cmd_validate(ws: &mut Workspace) -> Result<DatasetSummary, PipelineError> {
    let records = ws.load_records()?;
    let mut hist = vec![0usize; crate::dataset::Element::COUNT + 1];
    let mut expected: u128 = 0;
    for r in &records {
        let n = r.ranged_elements().count();
        hist[n] += 1;
        expected += 1u128 << n;
    }
    Ok(DatasetSummary {
        records: records.len(),
        ranged_histogram: hist,
        expected_train_val: expected,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentSummary {
    pub property: Property,
    pub train_val: usize,
    pub test: usize,
}

/// Writes the train/validation and test CSVs of each property.
pub fn cmd_augment(ws: &mut Workspace, properties: &[Property]) -> Result<Vec<AugmentSummary>, PipelineError> {
    let mut out = Vec::new();
    for &property in properties {
        ws.begin(format!("augment/{property}"));
        let records = ws.load_records()?;
        let policy = AugmentPolicy {
            property,
            encoding: ws.config.augment.encoding,
            max_combinations: ws.config.augment.max_combinations,
        };
        let aug = augment(&records, &policy).map_err(|source| PipelineError::DataFile {
            path: ws.config.dataset.clone(),
            source,
        })?;
        let enc = ws.config.augment.encoding;
        ws.output(&augmented_rel(property, "train_val"), &write_samples(&aug.train_val, enc))?;
        ws.output(&augmented_rel(property, "test"), &write_samples(&aug.test, enc))?;
        ws.finish()?;
        out.push(AugmentSummary {
            property,
            train_val: aug.train_val.len(),
            test: aug.test.len(),
        });
    }
    Ok(out)
}

/// Trains each family on each property and writes fold models, the
/// evaluation report, the grid summary and test predictions.
pub fn cmd_train(
    ws: &mut Workspace,
    properties: &[Property],
    families: &[Family],
) -> Result<Vec<TrainOutcome>, PipelineError> {
    let mut results = Vec::new();
    for &property in properties {
        for &family in families {
            ws.begin(format!("train/{property}/{}", family.name()));
            let train_val = ws.load_samples(&augmented_rel(property, "train_val"))?;
            let test = ws.load_samples(&augmented_rel(property, "test"))?;
            let outcome = train_family(&ws.config, family, property, &train_val, &test, ws.jobs)?;
            write_training_outputs(ws, &outcome, &test)?;
            ws.finish()?;
            results.push(outcome);
        }
    }
    Ok(results)
}

fn write_training_outputs(ws: &mut Workspace, o: &TrainOutcome, test: &[Sample]) -> Result<(), PipelineError> {
    let (p, f) = (o.property, o.family);
    ws.output(&report_rel(p, f, ".csv"), &o.report.to_csv())?;
    ws.output(&report_rel(p, f, "-variants.csv"), &o.variants_csv())?;
    ws.output(&report_rel(p, f, "-predictions.csv"), &o.predictions_csv(test))?;
    if let Some(curve) = &o.curve {
        ws.output(&report_rel(p, f, "-curve.csv"), &curve.to_csv())?;
    }
    if let Some(r) = &o.friedman {
        let mut text = String::from("variant,mean_rank\n");
        for (t, m) in r.treatments.iter().zip(&r.mean_ranks) {
            let _ = writeln!(text, "{t},{m}");
        }
        let _ = writeln!(text, "# chi2={},df={},p_value={}", r.statistic, r.df, r.p_value);
        ws.output(&report_rel(p, f, "-selection.csv"), &text)?;
    }
    let mut failures = String::new();
    for (fold, outcome) in o.outcomes.iter().enumerate() {
        let name = format!("models/{p}/{}/fold{:02}", f.name(), fold + 1);
        match outcome {
            Some(out) => {
                ws.output(&format!("{name}.json"), &out.fit.model.to_json())?;
                if let FitDiagnostics::Nn { history, .. } = &out.fit.diagnostics {
                    ws.output(&format!("{name}-history.csv"), &history.to_csv())?;
                }
            }
            None => {
                let msg = o.variants[o.selected]
                    .failures
                    .iter()
                    .find(|(ff, _)| *ff == fold)
                    .map_or("failed", |(_, m)| m.as_str());
                let _ = writeln!(failures, "{},{}", fold + 1, msg.replace(['\n', ','], " "));
            }
        }
    }
    if !failures.is_empty() {
        ws.output(&report_rel(p, f, "-failures.csv"), &format!("fold,error\n{failures}"))?;
    }
    Ok(())
}

/// Compares stored reports. With no explicit paths, every family report
/// present for `property` is used, in table column order.
pub fn cmd_compare(
    ws: &mut Workspace,
    property: Property,
    reports: &[PathBuf],
    alpha: f64,
) -> Result<Comparison, PipelineError> {
    ws.begin(format!("compare/{property}"));
    let paths: Vec<PathBuf> = if reports.is_empty() {
        Family::ALL
            .iter()
            .map(|&f| ws.path(&report_rel(property, f, ".csv")))
            .filter(|p| p.exists())
            .collect()
    } else {
        reports.to_vec()
    };
    let mut parsed = Vec::new();
    for path in &paths {
        let text = ws.read_input(path)?;
        let report = EvalReport::from_csv(&text)
            .map_err(|e| PipelineError::InvalidInput(format!("{}: {e}", path.display())))?;
        if report.property != property {
            return Err(PipelineError::InvalidInput(format!(
                "{} is a {} report, expected {property}",
                path.display(),
                report.property
            )));
        }
        parsed.push(report);
    }
    let cmp = compare_reports(&parsed, alpha)?;
    ws.output(&format!("comparison/{property}/table.csv"), &cmp.table_csv())?;
    ws.output(&format!("comparison/{property}/ranks.csv"), &cmp.ranks_csv())?;
    ws.output(&format!("comparison/{property}/pairs.csv"), &cmp.pairs_csv())?;
    ws.finish()?;
    Ok(cmp)
}

fn read_prediction_pairs(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("missing column `{name}`"))
    };
    let (t, p) = (col("target")?, col("mean_prediction")?);
    rdr.records()
        .map(|row| {
            let row = row.map_err(|e| e.to_string())?;
            let num = |i: usize| row[i].parse::<f64>().map_err(|e| format!("`{}`: {e}", &row[i]));
            Ok((num(t)?, num(p)?))
        })
        .collect()
}

const CD_FOOTNOTE: &str = "Pairwise decisions use the Bonferroni-Dunn critical difference on mean \
Friedman ranks, z(1 - alpha / (2 (k - 1))) * sqrt(k (k + 1) / (6 n)). A mean-squared-error based \
critical value was not used because its error term is not well defined for rank data.";

/// Renders scatter plots of test targets against mean fold predictions
/// and a Markdown summary for each property.
pub fn cmd_report(ws: &mut Workspace, properties: &[Property]) -> Result<Vec<PathBuf>, PipelineError> {
    let mut written = Vec::new();
    for &property in properties {
        ws.begin(format!("report/{property}"));
        let mut summary = format!("# {property}\n\n");
        let mut any = false;
        for family in Family::ALL {
            let pred_path = ws.path(&report_rel(property, family, "-predictions.csv"));
            if !pred_path.exists() {
                continue;
            }
            any = true;
            let text = ws.read_input(&pred_path)?;
            let pairs = read_prediction_pairs(&text)
                .map_err(|e| PipelineError::InvalidInput(format!("{}: {e}", pred_path.display())))?;
            let title = format!("{} {property}: predictions vs targets", family.label());
            let plot = emit_scatter_svg(&pairs, &PlotLabels::targets_vs_predictions(title))?;
            let svg_rel = format!("figures/{property}/{}.svg", family.name());
            ws.output(&svg_rel, &plot.svg)?;
            ws.output(&format!("figures/{property}/{}-pairs.csv", family.name()), &plot.csv)?;
            written.push(ws.path(&svg_rel));

            let report_path = ws.path(&report_rel(property, family, ".csv"));
            if report_path.exists() {
                let r = EvalReport::from_csv(&ws.read_input(&report_path)?)
                    .map_err(|e| PipelineError::InvalidInput(format!("{}: {e}", report_path.display())))?;
                let _ = writeln!(
                    summary,
                    "- {} ({}): mean test R² {:.5}, mean EQM {:.5}",
                    family.label(),
                    r.variant,
                    r.mean_r2,
                    r.mean_eqm
                );
            }
        }
        if !any {
            return Err(PipelineError::InvalidInput(format!(
                "no predictions for {property} under {}; run `train` first",
                ws.out_dir.display()
            )));
        }
        let table_path = ws.path(&format!("comparison/{property}/table.csv"));
        if table_path.exists() {
            let table = ws.read_input(&table_path)?;
            summary.push_str("\n## Test R² per fold\n\n");
            for (i, line) in table.lines().enumerate() {
                let cells: Vec<&str> = line.split(',').collect();
                let shown: Vec<String> = cells
                    .iter()
                    .enumerate()
                    .map(|(j, c)| match c.parse::<f64>() {
                        Ok(v) if j > 0 => format!("{v:.5}"),
                        _ => c.to_string(),
                    })
                    .collect();
                let _ = writeln!(summary, "| {} |", shown.join(" | "));
                if i == 0 {
                    let _ = writeln!(summary, "|{}", "---|".repeat(cells.len()));
                }
            }
            debug_assert!(table.contains(MEAN_LABEL));
            let pairs_path = ws.path(&format!("comparison/{property}/pairs.csv"));
            if pairs_path.exists() {
                let pairs = ws.read_input(&pairs_path)?;
                summary.push_str("\n## Significant pairs\n\n");
                let mut n = 0;
                for line in pairs.lines().skip(1) {
                    let c: Vec<&str> = line.split(',').collect();
                    if c.len() == 5 && c[4] == "true" {
                        let _ = writeln!(summary, "- {} vs {} (rank difference {})", c[0], c[1], c[2]);
                        n += 1;
                    }
                }
                if n == 0 {
                    summary.push_str("- none\n");
                }
                let _ = writeln!(summary, "\nNote: {CD_FOOTNOTE}");
            }
        }
        ws.output(&format!("figures/{property}/summary.md"), &summary)?;
        ws.finish()?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn workspace(dir: &Path) -> Workspace {
        let mut cfg = ExperimentConfig::default();
        cfg.dataset = dir.join("data.csv");
        cfg.synth.n_records = 30;
        cfg.folds.k = 3;
        cfg.linear.degrees = vec![1];
        cfg.tree.gap_tol = vec![0.05];
        Workspace::open(cfg, dir.join("out"), 1, None).unwrap()
    }

    #[test]
    fn synth_augment_train_compare_report() {
        let dir = tempfile::tempdir().unwrap();
        let mut ws = workspace(dir.path());
        assert_eq!(cmd_synth(&mut ws).unwrap(), 30);
        let v = cmd_validate(&mut ws).unwrap();
        let aug = cmd_augment(&mut ws, &[Property::Yield]).unwrap();
        assert_eq!(aug[0].test, 30);
        assert_eq!(aug[0].train_val as u128, v.expected_train_val);
        cmd_train(&mut ws, &[Property::Yield], &[Family::Linear, Family::Tree]).unwrap();
        let cmp = cmd_compare(&mut ws, Property::Yield, &[], 0.05).unwrap();
        assert_eq!(cmp.treatments, vec!["DT", "LR"]);
        let figs = cmd_report(&mut ws, &[Property::Yield]).unwrap();
        assert_eq!(figs.len(), 2);
        let summary = std::fs::read_to_string(ws.path("figures/yield/summary.md")).unwrap();
        assert!(summary.contains("Bonferroni-Dunn"));
        let m = ws.manifest();
        for stage in ["synth", "augment/yield", "train/yield/linear", "compare/yield", "report/yield"] {
            assert!(m.stages.contains_key(stage), "{stage}");
        }
        assert!(m.stages["train/yield/tree"].outputs.contains_key("models/yield/tree/fold01.json"));
    }

    #[test]
    fn train_without_augment_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut ws = workspace(dir.path());
        let err = cmd_train(&mut ws, &[Property::Hardness], &[Family::Tree]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("augment"), "{err}");
    }

    #[test]
    fn manifest_check_catches_changed_output() {
        let dir = tempfile::tempdir().unwrap();
        let mut ws = workspace(dir.path());
        cmd_synth(&mut ws).unwrap();
        let mut recorded = ws.manifest().clone();
        let mut again = Workspace::open(ws.config.clone(), ws.out_dir.clone(), 1, Some(recorded.clone())).unwrap();
        cmd_synth(&mut again).unwrap();
        let rec = recorded.stages.get_mut("synth").unwrap();
        for h in rec.outputs.values_mut() {
            *h = "0".repeat(64);
        }
        let mut tampered = Workspace::open(ws.config.clone(), ws.out_dir.clone(), 1, Some(recorded)).unwrap();
        assert_eq!(cmd_synth(&mut tampered).unwrap_err().exit_code(), 3);
    }
}
