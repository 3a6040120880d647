//! DCG / NDCG evaluation of predicted institution rankings.
//!
//! Gains are linear in relevance. Institutions are ranked by predicted score,
//! descending, ties by id ascending. A ranked institution missing from the
//! ground truth contributes zero relevance.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::boost::{BoostError, BoostedModel};
use crate::corpus::{InstitutionId, Year};
use crate::featureset::Dataset;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum RankError {
    #[error("cutoff n must be at least 1")]
    ZeroCutoff,
    #[error("test rows mix editions: {0} {1} and {2} {3}")]
    MixedEditions(String, Year, String, Year),
    #[error("test dataset is empty")]
    Empty,
    #[error(transparent)]
    Boost(#[from] BoostError),
}

pub type Result<T, E = RankError> = std::result::Result<T, E>;

/// `sum_{i=1}^{min(n, len)} rel_i / log2(i + 1)`
pub fn dcg<T: Scalar>(relevances: &[T], n: usize) -> T {
    relevances
        .iter()
        .take(n)
        .enumerate()
        .map(|(i, &rel)| rel / T::from_usize_lossy(i + 2).log2())
        .sum()
}

/// NDCG value plus whether the ideal DCG was zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ndcg<T> {
    pub value: T,
    /// Ground truth had no positive relevance; `value` is reported as 0.
    pub degenerate: bool,
}

fn by_score_then_id<T: Scalar>(a: (&str, T), b: (&str, T)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.0.cmp(b.0))
}

/// Institutions of `predicted` in ranking order.
pub fn rank<'a, T: Scalar>(predicted: &'a BTreeMap<InstitutionId, T>) -> Vec<(&'a str, T)> {
    let mut ranked: Vec<(&str, T)> = predicted.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    ranked.sort_by(|a, b| by_score_then_id(*a, *b));
    ranked
}

/// NDCG@n of the predicted ranking against `truth`.
pub fn ndcg_at<T: Scalar>(
    predicted: &BTreeMap<InstitutionId, T>,
    truth: &BTreeMap<InstitutionId, T>,
    n: usize,
) -> Result<Ndcg<T>> {
    if n == 0 {
        return Err(RankError::ZeroCutoff);
    }
    let gains: Vec<T> = rank(predicted)
        .into_iter()
        .map(|(id, _)| truth.get(id).copied().unwrap_or_else(T::zero))
        .collect();
    let mut ideal: Vec<T> = truth.values().copied().collect();
    ideal.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let idcg = dcg(&ideal, n);
    if !(idcg > T::zero()) {
        return Ok(Ndcg {
            value: T::zero(),
            degenerate: true,
        });
    }
    Ok(Ndcg {
        value: dcg(&gains, n) / idcg,
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub institution_id: InstitutionId,
    pub predicted: f64,
    pub truth: f64,
}

/// Predicted versus true scores for one edition.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    pub conference_id: String,
    pub target_year: Year,
    /// Sorted by prediction, ties by institution id.
    pub entries: Vec<RankedEntry>,
    pub ndcg: BTreeMap<usize, f64>,
    pub degenerate: bool,
}

/// Predict every test row and score the ranking against the row labels.
pub fn evaluate_model<T: Scalar>(
    model: &BoostedModel<T>,
    test: &Dataset,
    cutoffs: &[usize],
) -> Result<RankingReport> {
    let truth = test
        .rows
        .iter()
        .map(|r| (r.institution_id.clone(), r.label))
        .collect();
    evaluate_against(model, test, &truth, cutoffs)
}

/// Like [`evaluate_model`] but against an explicit ground truth, which may
/// include institutions that have no test row.
pub fn evaluate_against<T: Scalar>(
    model: &BoostedModel<T>,
    test: &Dataset,
    truth: &BTreeMap<InstitutionId, f64>,
    cutoffs: &[usize],
) -> Result<RankingReport> {
    let first = test.rows.first().ok_or(RankError::Empty)?;
    for r in &test.rows {
        if r.conference_id != first.conference_id || r.target_year != first.target_year {
            return Err(RankError::MixedEditions(
                first.conference_id.clone(),
                first.target_year,
                r.conference_id.clone(),
                r.target_year,
            ));
        }
    }
    let preds = model.predict_dataset(test)?;
    let predicted: BTreeMap<InstitutionId, f64> = test
        .rows
        .iter()
        .zip(&preds)
        .map(|(r, p)| (r.institution_id.clone(), p.to_f64_lossy()))
        .collect();

    let mut ndcg = BTreeMap::new();
    let mut degenerate = false;
    for &n in cutoffs {
        let v = ndcg_at(&predicted, truth, n)?;
        degenerate |= v.degenerate;
        ndcg.insert(n, v.value);
    }
    let entries = rank(&predicted)
        .into_iter()
        .map(|(id, p)| RankedEntry {
            institution_id: id.to_string(),
            predicted: p,
            truth: truth.get(id).copied().unwrap_or(0.0),
        })
        .collect();
    Ok(RankingReport {
        conference_id: first.conference_id.clone(),
        target_year: first.target_year,
        entries,
        ndcg,
        degenerate,
    })
}
