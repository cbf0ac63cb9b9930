//! Cross-family comparison of per-fold test R² from stored reports.

use std::fmt::Write as _;

use serde::Serialize;

use super::PipelineError;
use crate::dataset::Property;
use crate::evalstat::{bonferroni_pairwise, friedman, EvalReport, FriedmanResult, PairDecision, ScoreMatrix, MEAN_LABEL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub property: Property,
    pub alpha: f64,
    /// Column labels, one per report.
    pub treatments: Vec<String>,
    /// Fold × treatment test R².
    pub scores: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    pub friedman: FriedmanResult,
    pub pairs: Vec<PairDecision>,
}

/// Builds the fold × model table, the Friedman test and the pairwise
/// critical-difference decisions from two or more reports.
pub fn compare_reports(reports: &[EvalReport], alpha: f64) -> Result<Comparison, PipelineError> {
    if reports.len() < 2 {
        return Err(PipelineError::InvalidInput(format!(
            "comparison needs at least 2 reports, got {}",
            reports.len()
        )));
    }
    let property = reports[0].property;
    let k = reports[0].k();
    for r in reports {
        if r.property != property {
            return Err(PipelineError::InvalidInput(format!(
                "reports mix properties {property} and {}",
                r.property
            )));
        }
        if r.k() != k {
            return Err(PipelineError::InvalidInput(format!(
                "reports have different fold counts ({k} and {})",
                r.k()
            )));
        }
    }
    let mut treatments: Vec<String> = Vec::new();
    for r in reports {
        let base = r.family.label().to_string();
        let mut name = base.clone();
        let mut n = 2;
        while treatments.contains(&name) {
            name = format!("{base}#{n}");
            n += 1;
        }
        treatments.push(name);
    }
    let scores: Vec<Vec<f64>> = (0..k).map(|f| reports.iter().map(|r| r.fold_r2[f]).collect()).collect();
    let matrix = ScoreMatrix::new(treatments.clone(), scores.clone(), true)?;
    let friedman = friedman(&matrix)?;
    let pairs = bonferroni_pairwise(&friedman, alpha)?;
    Ok(Comparison {
        property,
        alpha,
        treatments,
        means: reports.iter().map(|r| r.mean_r2).collect(),
        scores,
        friedman,
        pairs,
    })
}

impl Comparison {
    /// Fold rows `1..=k` plus a mean row, one column per model.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("K-Fold");
        for t in &self.treatments {
            let _ = write!(out, ",{t}");
        }
        out.push('\n');
        for (f, row) in self.scores.iter().enumerate() {
            let _ = write!(out, "{}", f + 1);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out.push_str(MEAN_LABEL);
        for m in &self.means {
            let _ = write!(out, ",{m}");
        }
        out.push('\n');
        out
    }

    pub fn ranks_csv(&self) -> String {
        let f = &self.friedman;
        let mut out = String::from("treatment,mean_rank\n");
        for (t, r) in f.treatments.iter().zip(&f.mean_ranks) {
            let _ = writeln!(out, "{t},{r}");
        }
        let _ = writeln!(out, "# chi2={},df={},p_value={},n_blocks={}", f.statistic, f.df, f.p_value, f.n_blocks);
        out
    }

    pub fn pairs_csv(&self) -> String {
        let mut out = String::from("first,second,rank_difference,critical_difference,significant\n");
        for p in &self.pairs {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p.first, p.second, p.rank_difference, p.critical_difference, p.significant
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes") + "\n"
    }

    /// Short human-readable summary for the terminal.
    pub fn summary(&self) -> String {
        let f = &self.friedman;
        let mut out = format!(
            "{}: Friedman chi2 = {:.4} (df {}), p = {:.3e}\n",
            self.property, f.statistic, f.df, f.p_value
        );
        for (t, r) in f.treatments.iter().zip(&f.mean_ranks) {
            let _ = writeln!(out, "  mean rank {t:<6} {r:.2}");
        }
        let cd = self.pairs.first().map_or(f64::NAN, |p| p.critical_difference);
        let _ = writeln!(out, "  critical difference (alpha {}) = {cd:.3}", self.alpha);
        for p in self.pairs.iter().filter(|p| p.significant) {
            let _ = writeln!(out, "  {} vs {}: |diff| {:.2} significant", p.first, p.second, p.rank_difference);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalstat::Family;

    fn report(family: Family, r2: Vec<f64>) -> EvalReport {
        let e = vec![1.0; r2.len()];
        EvalReport::new(family, Property::Hardness, "v".into(), r2, e)
    }

    #[test]
    fn identical_reports_tie() {
        let r = report(Family::Svr, vec![0.9, 0.8, 0.95, 0.7]);
        let c = compare_reports(&[r.clone(), r], 0.05).unwrap();
        assert_eq!(c.friedman.statistic, 0.0);
        assert_eq!(c.treatments, vec!["SVR", "SVR#2"]);
        assert!(c.pairs.iter().all(|p| !p.significant));
    }

    #[test]
    fn mismatched_folds_rejected() {
        let a = report(Family::Svr, vec![0.9, 0.8, 0.95]);
        let b = report(Family::Nn, vec![0.9, 0.8]);
        assert!(compare_reports(&[a.clone(), b], 0.05).is_err());
        assert!(compare_reports(&[a], 0.05).is_err());
    }

    #[test]
    fn table_layout() {
        let c = compare_reports(
            &[
                report(Family::Nn, vec![0.9, 0.8, 0.7]),
                report(Family::Linear, vec![0.5, 0.6, 0.4]),
            ],
            0.05,
        )
        .unwrap();
        let t = c.table_csv();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "K-Fold,NN,LR");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("Média,"));
    }
}
