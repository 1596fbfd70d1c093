//! Model comparison: metric tables, pairwise significance tests, and
//! difference banding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mcnemar::{mcnemar, McNemarError, McNemarResult};
use crate::metrics::RankingReport;

/// Difference bands over relative metric deltas: below 5% does not matter,
/// 5-10% is noticeable, above 10% is material. Both boundaries fall in the
/// middle band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    NonRelevant,
    Noticeable,
    Material,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompareError {
    #[error("difference percentage must be non-negative, got {0}")]
    NegativeDelta(f64),
    #[error("at least two models are required")]
    TooFewModels,
    #[error("models were evaluated on different test samples ({a_name}: {a}, {b_name}: {b})")]
    MisalignedSamples { a_name: String, a: usize, b_name: String, b: usize },
}

pub fn sparck_jones_band(delta_percent: f64) -> Result<Band, CompareError> {
    if delta_percent < 0.0 || delta_percent.is_nan() {
        return Err(CompareError::NegativeDelta(delta_percent));
    }
    Ok(if delta_percent < 5.0 {
        Band::NonRelevant
    } else if delta_percent <= 10.0 {
        Band::Noticeable
    } else {
        Band::Material
    })
}

impl std::fmt::Display for Band {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Band::NonRelevant => "non-relevant",
            Band::Noticeable => "noticeable",
            Band::Material => "material",
        })
    }
}

/// One model's evaluation artifacts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelEvaluation {
    pub name: String,
    pub report: RankingReport,
    /// Per-test-case hits@1 outcome, aligned with the shared test sample.
    pub outcomes: Vec<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub model_a: String,
    pub model_b: String,
    /// None when the test is undefined (no discordant outcomes).
    pub result: Option<McNemarResult>,
    pub significant: bool,
    /// Band of the relative MRR difference, baseline = model_a.
    pub mrr_band: Band,
    pub hits1_band: Band,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub alpha: f64,
    pub models: Vec<ModelEvaluation>,
    pub pairs: Vec<PairwiseTest>,
}

/// Relative difference of `b` against baseline `a`, in percent.
fn delta_percent(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(1e-12) * 100.0
}

/// Metric table plus a significance test and difference bands per model
/// pair. Identical outcome vectors make the test undefined for that pair,
/// which is reported rather than treated as an error.
pub fn compare_models(
    models: Vec<ModelEvaluation>,
    alpha: f64,
    continuity_correction: bool,
) -> Result<ComparisonReport, CompareError> {
    if models.len() < 2 {
        return Err(CompareError::TooFewModels);
    }
    for pair in models.windows(2) {
        if pair[0].outcomes.len() != pair[1].outcomes.len() {
            return Err(CompareError::MisalignedSamples {
                a_name: pair[0].name.clone(),
                a: pair[0].outcomes.len(),
                b_name: pair[1].name.clone(),
                b: pair[1].outcomes.len(),
            });
        }
    }

    let mut pairs = Vec::new();
    for i in 0..models.len() {
        for j in i + 1..models.len() {
            let (a, b) = (&models[i], &models[j]);
            let result = match mcnemar(&a.outcomes, &b.outcomes, continuity_correction) {
                Ok(result) => Some(result),
                Err(McNemarError::Undefined) => None,
                Err(McNemarError::Misaligned { a: la, b: lb }) => {
                    return Err(CompareError::MisalignedSamples {
                        a_name: a.name.clone(),
                        a: la,
                        b_name: b.name.clone(),
                        b: lb,
                    })
                }
            };
            let significant = result.map(|r| r.p_value <= alpha).unwrap_or(false);
            pairs.push(PairwiseTest {
                model_a: a.name.clone(),
                model_b: b.name.clone(),
                result,
                significant,
                mrr_band: sparck_jones_band(delta_percent(a.report.mrr, b.report.mrr))?,
                hits1_band: sparck_jones_band(delta_percent(
                    a.report.hits_at[&1],
                    b.report.hits_at[&1],
                ))?,
            });
        }
    }
    Ok(ComparisonReport { alpha, models, pairs })
}

impl ComparisonReport {
    /// Human-readable summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("model            MR        MRR     hits@1  hits@5  hits@10  n\n");
        for model in &self.models {
            let r = &model.report;
            out.push_str(&format!(
                "{:<16} {:<9.2} {:<7.4} {:<7.4} {:<7.4} {:<8.4} {}\n",
                model.name, r.mr, r.mrr, r.hits_at[&1], r.hits_at[&5], r.hits_at[&10], r.n
            ));
        }
        out.push('\n');
        for pair in &self.pairs {
            match &pair.result {
                Some(result) => out.push_str(&format!(
                    "{} vs {}: chi2(1)={:.2}, p={:.3e}{} | MRR delta {}, hits@1 delta {}\n",
                    pair.model_a,
                    pair.model_b,
                    result.chi2,
                    result.p_value,
                    if pair.significant { " (significant)" } else { "" },
                    pair.mrr_band,
                    pair.hits1_band,
                )),
                None => out.push_str(&format!(
                    "{} vs {}: test undefined (no discordant outcomes)\n",
                    pair.model_a, pair.model_b
                )),
            }
        }
        out
    }

    /// CSV rows: one line per model, then one per pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("record,model_a,model_b,mr,mrr,hits1,hits5,hits10,n,chi2,p,significant,mrr_band,hits1_band\n");
        for model in &self.models {
            let r = &model.report;
            out.push_str(&format!(
                "model,{},,{},{},{},{},{},{},,,,,\n",
                model.name, r.mr, r.mrr, r.hits_at[&1], r.hits_at[&5], r.hits_at[&10], r.n
            ));
        }
        for pair in &self.pairs {
            let (chi2, p) = pair
                .result
                .map(|r| (r.chi2.to_string(), r.p_value.to_string()))
                .unwrap_or_default();
            out.push_str(&format!(
                "pair,{},{},,,,,,,{},{},{},{},{}\n",
                pair.model_a, pair.model_b, chi2, p, pair.significant, pair.mrr_band, pair.hits1_band
            ));
        }
        out
    }
}
