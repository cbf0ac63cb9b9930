//! End-to-end runs of the `steelprop` binary.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use steelprop::dataset::{write_records, Element, Property, PropertyVector};
use steelprop::evalstat::{EvalReport, Family};
use steelprop::pipeline::ExperimentConfig;
use steelprop::synth::{generate, GroundTruthSpec};

use common::{fixture, read_score_table};

fn steelprop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steelprop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A scratch directory with a config whose dataset lives inside it.
struct Project {
    dir: tempfile::TempDir,
}

impl Project {
    fn new(extra: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data.csv");
        fs::write(
            dir.path().join("config.toml"),
            format!("dataset = {:?}\n{extra}", data.to_string_lossy()),
        )
        .unwrap();
        Self { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, args: &[&str]) -> Output {
        let config = self.path("config.toml");
        let out = self.path("out");
        let mut all = vec!["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
        all.extend_from_slice(args);
        steelprop(&all)
    }

    fn ok(&self, args: &[&str]) -> Output {
        let out = self.run(args);
        assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
        out
    }

    fn read(&self, rel: &str) -> String {
        fs::read_to_string(self.path("out").join(rel)).unwrap()
    }
}

const FAST: &str = r#"
properties = ["hardness"]
[synth]
n_records = 30
[folds]
k = 5
[linear]
degrees = [1]
[nn]
hidden = [1]
algorithms = ["lm"]
[svr]
kernels = [{ kind = "gaussian" }]
[tree]
gap_tol = [0.05]
"#;

#[test]
fn config_init_prints_the_defaults() {
    let out = steelprop(&["config", "init"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), ExperimentConfig::default());
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&steelprop(&["train", "--no-such-flag"])), 1);
    assert_eq!(code(&steelprop(&["train", "--family", "forest"])), 1);
    assert_eq!(code(&steelprop(&["--property", "density", "validate"])), 1);
    let p = Project::new("no_such_key = 3\n");
    let out = p.run(&["validate"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    let p = Project::new("[folds]\nk = 1\n");
    assert_eq!(code(&p.run(&["validate"])), 1);
    assert_eq!(code(&steelprop(&["--help"])), 0);
}

#[test]
fn data_errors_exit_2() {
    let p = Project::new(FAST);
    // No dataset yet.
    assert_eq!(code(&p.run(&["validate"])), 2);
    p.ok(&["synth"]);
    // Training needs augmented samples.
    let out = p.run(&["train"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let text = fs::read_to_string(p.path("data.csv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut fields: Vec<&str> = lines[3].split(',').collect();
    fields[4] = "abc";
    lines[3] = fields.join(",");
    fs::write(p.path("data.csv"), lines.join("\n") + "\n").unwrap();
    let out = p.run(&["validate"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("data.csv:4:"), "{}", stderr(&out));
}

#[test]
fn all_fixed_dataset_gives_one_sample_per_record() {
    let p = Project::new("[synth]\nn_records = 5\nrange_probability = 0.0\n");
    p.ok(&["synth"]);
    let out = p.ok(&["validate"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("5 valid records"));
    p.ok(&["augment"]);
    for prop in Property::ALL {
        assert_eq!(p.read(&format!("augmented/{prop}/train_val.csv")).lines().count(), 6);
        assert_eq!(p.read(&format!("augmented/{prop}/test.csv")).lines().count(), 6);
    }
}

#[test]
fn linear_family_fits_noiseless_linear_data() {
    let p = Project::new("properties = [\"hardness\"]\n[folds]\nk = 5\n");
    let mut spec = GroundTruthSpec::noiseless(3);
    spec.range_probability = 0.0;
    let mut records = generate(60, &spec).unwrap();
    for r in &mut records {
        let m = r.midpoint_composition();
        let h = 150.0 + 80.0 * m[Element::C.index()] + 12.0 * m[Element::Mn.index()] - 0.5 * m[Element::Cr.index()]
            + 7.0 * r.process.code() as f64;
        r.targets = PropertyVector::new(h, h, h, 10.0).unwrap();
    }
    fs::write(p.path("data.csv"), write_records(&records)).unwrap();
    p.ok(&["augment"]);
    p.ok(&["train", "--family", "linear"]);
    let report = EvalReport::from_csv(&p.read("reports/hardness/linear.csv")).unwrap();
    assert_eq!(report.k(), 5);
    assert!(report.mean_r2 >= 0.999, "mean R² {}", report.mean_r2);
}

#[test]
fn gaussian_only_grid_reports_its_kernel() {
    let p = Project::new(FAST);
    p.ok(&["synth"]);
    p.ok(&["augment"]);
    p.ok(&["train", "--family", "svr"]);
    let csv = p.read("reports/hardness/svr.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 5 + 1);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(2) == Some("gaussian")), "{csv}");
    assert!(lines[6].contains(",Média,"));
}

#[test]
fn compare_reads_only_report_files() {
    let table = read_score_table(&fs::read_to_string(fixture("reference_r2.csv")).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for (j, name) in table.treatments.iter().enumerate() {
        let family = match name.as_str() {
            "NN" => Family::Nn,
            "SVR" => Family::Svr,
            "DT" => Family::Tree,
            _ => Family::Linear,
        };
        let r2: Vec<f64> = table.rows.iter().map(|r| r[j]).collect();
        let report = EvalReport::new(family, Property::Hardness, "reference".into(), r2, vec![0.0; 10]);
        let path = dir.path().join(format!("{}.csv", family.name()));
        fs::write(&path, report.to_csv()).unwrap();
        paths.push(path.to_string_lossy().into_owned());
    }
    let out_dir = dir.path().join("out");
    let mut args = vec!["compare", "--out", out_dir.to_str().unwrap()];
    args.extend(paths.iter().map(String::as_str));
    let out = steelprop(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let read = |rel: &str| fs::read_to_string(out_dir.join("comparison/hardness").join(rel)).unwrap();
    let t = read("table.csv");
    let lines: Vec<&str> = t.lines().collect();
    assert_eq!(lines[0], "K-Fold,NN,SVR,DT,LR");
    assert_eq!(lines.len(), 12);
    assert!(lines[11].starts_with("Média,"));
    let pairs = read("pairs.csv");
    let decision = |a: &str, b: &str| {
        pairs
            .lines()
            .find(|l| l.starts_with(&format!("{a},{b},")))
            .unwrap_or_else(|| panic!("pair {a},{b} in {pairs}"))
            .ends_with(",true")
    };
    assert!(decision("SVR", "LR"));
    assert!(!decision("NN", "DT"));
    let ranks = read("ranks.csv");
    assert!(ranks.contains("SVR,1\n") && ranks.contains("LR,4\n"), "{ranks}");
}

#[test]
fn identical_reports_compare_as_ties() {
    let dir = tempfile::tempdir().unwrap();
    let report = EvalReport::new(Family::Svr, Property::Yield, "a".into(), vec![0.9, 0.8, 0.85], vec![1.0; 3]);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(&a, report.to_csv()).unwrap();
    fs::write(&b, report.to_csv()).unwrap();
    let out_dir = dir.path().join("out");
    let out = steelprop(&["compare", "--out", out_dir.to_str().unwrap(), a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let ranks = fs::read_to_string(out_dir.join("comparison/yield/ranks.csv")).unwrap();
    assert!(ranks.contains("# chi2=0,"), "{ranks}");
}

fn files(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn manifest_rerun_is_byte_identical_and_detects_tampering() {
    let p = Project::new(FAST);
    for stage in ["synth", "augment", "train", "compare", "report"] {
        p.ok(&[stage]);
    }
    let first = files(&p.path("out"));
    assert!(first.iter().any(|(f, _)| f.ends_with("figures/hardness/svr.svg")));

    let manifest = p.path("out/manifest.json");
    let rerun = p.path("rerun");
    for stage in ["synth", "augment", "train", "compare", "report"] {
        let out = steelprop(&["--manifest", manifest.to_str().unwrap(), "--out", rerun.to_str().unwrap(), stage]);
        assert_eq!(code(&out), 0, "{stage}: {}", stderr(&out));
    }
    assert_eq!(files(&rerun), first);

    let text = fs::read_to_string(&manifest).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let outputs = doc["stages"]["train/hardness/tree"]["outputs"].as_object().unwrap();
    let (_, hash) = outputs.iter().next().unwrap();
    let tampered = text.replace(hash.as_str().unwrap(), &"0".repeat(64));
    let bad = p.path("tampered.json");
    fs::write(&bad, tampered).unwrap();
    let out = steelprop(&[
        "--manifest",
        bad.to_str().unwrap(),
        "--out",
        rerun.to_str().unwrap(),
        "train",
        "--family",
        "tree",
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("differs from the manifest"), "{}", stderr(&out));
}
