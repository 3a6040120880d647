//! Split-count importance ranking and the top-p% retraining sweep.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::boost::{train_dataset, BoostError, BoostParams, BoostedModel};
use crate::corpus::InstitutionId;
use crate::featureset::{Dataset, FeatureError, FeatureGroup, FeatureSchema};
use crate::rankeval::{evaluate_against, evaluate_model, RankError, RankingReport};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("model features do not match the schema")]
    SchemaMismatch,
    #[error("{percent}% of {n} features selects nothing")]
    NothingSelected { percent: u32, n: usize },
    #[error("percent {0} outside 1..=100")]
    BadPercent(u32),
    #[error(transparent)]
    Boost(#[from] BoostError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = SelectError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceEntry {
    pub name: String,
    pub group: FeatureGroup,
    pub count: usize,
    pub score: f64,
}

/// Features sorted by (score desc, name asc), with per-group score sums.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    pub entries: Vec<ImportanceEntry>,
    /// One entry per group present in the schema, canonical group order.
    pub group_sums: Vec<(FeatureGroup, f64)>,
    pub has_splits: bool,
}

impl ImportanceReport {
    pub fn group_sum(&self, group: FeatureGroup) -> Option<f64> {
        self.group_sums.iter().find(|(g, _)| *g == group).map(|(_, v)| *v)
    }

    /// Names of the first `k` ranked features.
    pub fn top(&self, k: usize) -> Vec<String> {
        self.entries.iter().take(k).map(|e| e.name.clone()).collect()
    }
}

pub fn rank_features<T: Scalar>(model: &BoostedModel<T>, schema: &FeatureSchema) -> Result<ImportanceReport> {
    if model.feature_names.as_slice() != schema.names() {
        return Err(SelectError::SchemaMismatch);
    }
    let imp = model.feature_importance();
    let mut entries: Vec<ImportanceEntry> = schema
        .names()
        .iter()
        .zip(schema.groups())
        .enumerate()
        .map(|(i, (name, group))| ImportanceEntry {
            name: name.clone(),
            group: *group,
            count: imp.counts[i],
            score: imp.normalized[i],
        })
        .collect();
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.name.cmp(&b.name)));
    let group_sums = schema
        .present_groups()
        .into_iter()
        .map(|g| {
            let total = entries.iter().filter(|e| e.group == g).map(|e| e.score).sum();
            (g, total)
        })
        .collect();
    Ok(ImportanceReport {
        entries,
        group_sums,
        has_splits: imp.has_splits,
    })
}

/// `ceil(percent * n / 100)`
pub fn top_count(percent: u32, n: usize) -> usize {
    (percent as usize * n).div_ceil(100)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepStep<T> {
    pub percent: u32,
    /// Selected features in ranking order.
    pub selected: Vec<String>,
    pub model: BoostedModel<T>,
    pub importance: ImportanceReport,
    pub ranking: RankingReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionSweep<T> {
    pub dropped_group: Option<FeatureGroup>,
    pub full_model: BoostedModel<T>,
    pub full_importance: ImportanceReport,
    pub steps: Vec<SweepStep<T>>,
}

/// Evaluation settings shared by every sweep step.
#[derive(Debug, Clone, Copy)]
pub struct EvalSpec<'a> {
    pub ndcg_n: usize,
    /// Ground truth for the test year; row labels when `None`.
    pub truth: Option<&'a BTreeMap<InstitutionId, f64>>,
}

/// Train on all features, rank them once, then retrain and evaluate on the
/// top `p`% for each requested percentage.
pub fn sweep<T: Scalar>(
    train: &Dataset,
    test: &Dataset,
    params: &BoostParams,
    percents: &[u32],
    eval: EvalSpec<'_>,
) -> Result<SelectionSweep<T>> {
    let n = train.schema.len();
    for &p in percents {
        if !(1..=100).contains(&p) {
            return Err(SelectError::BadPercent(p));
        }
        if top_count(p, n) == 0 {
            return Err(SelectError::NothingSelected { percent: p, n });
        }
    }
    let full_model = train_dataset::<T>(train, params)?;
    let full_importance = rank_features(&full_model, &train.schema)?;

    let mut percents = percents.to_vec();
    percents.sort_unstable();
    percents.dedup();
    let steps = percents
        .into_iter()
        .map(|p| {
            let selected = full_importance.top(top_count(p, n));
            let sub_train = train.select(&selected)?;
            let sub_test = test.select(&selected)?;
            let model = train_dataset::<T>(&sub_train, params)?;
            let importance = rank_features(&model, &sub_train.schema)?;
            let ranking = match eval.truth {
                Some(truth) => evaluate_against(&model, &sub_test, truth, &[eval.ndcg_n])?,
                None => evaluate_model(&model, &sub_test, &[eval.ndcg_n])?,
            };
            Ok(SweepStep {
                percent: p,
                selected,
                model,
                importance,
                ranking,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionSweep {
        dropped_group: None,
        full_model,
        full_importance,
        steps,
    })
}

/// [`sweep`] after removing one feature group from both datasets.
pub fn sweep_without_group<T: Scalar>(
    train: &Dataset,
    test: &Dataset,
    params: &BoostParams,
    percents: &[u32],
    eval: EvalSpec<'_>,
    dropped: FeatureGroup,
) -> Result<SelectionSweep<T>> {
    let train = train.drop_group(dropped)?;
    let test = test.drop_group(dropped)?;
    let mut out = sweep(&train, &test, params, percents, eval)?;
    out.dropped_group = Some(dropped);
    Ok(out)
}

/// Round non-negative values to `decimals` places so that the rounded values
/// sum to the rounded total (largest remainder).
pub fn round_preserving_sum(values: &[f64], decimals: u32) -> Vec<f64> {
    let scale = 10f64.powi(decimals as i32);
    let target = (values.iter().sum::<f64>() * scale).round() as i64;
    let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
    let mut units: Vec<i64> = scaled.iter().map(|v| v.floor() as i64).collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - scaled[a].floor();
        let fb = scaled[b] - scaled[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut missing = target - units.iter().sum::<i64>();
    for &i in order.iter().cycle().take(order.len() * 2) {
        if missing <= 0 {
            break;
        }
        units[i] += 1;
        missing -= 1;
    }
    units.into_iter().map(|u| u as f64 / scale).collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| SelectError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl<T: Scalar> SelectionSweep<T> {
    pub fn groups(&self) -> Vec<FeatureGroup> {
        self.full_importance.group_sums.iter().map(|(g, _)| *g).collect()
    }

    /// Rows are percentages, columns are group importance sums (4 decimals).
    pub fn group_table(&self) -> String {
        let groups = self.groups();
        let mut s = String::from("percent");
        for g in &groups {
            s.push('\t');
            s.push_str(g.as_str());
        }
        s.push('\n');
        for step in &self.steps {
            let sums: Vec<f64> = groups
                .iter()
                .map(|g| step.importance.group_sum(*g).unwrap_or(0.0))
                .collect();
            s.push_str(&format!("{}%", step.percent));
            for v in round_preserving_sum(&sums, 4) {
                s.push_str(&format!("\t{v:.4}"));
            }
            s.push('\n');
        }
        s
    }

    /// Long form: one line per (percentage, selected feature).
    pub fn feature_table(&self) -> String {
        let mut s = String::from("percent\trank\tfeature\tgroup\tcount\tscore\n");
        for step in &self.steps {
            for (rank, e) in step.importance.entries.iter().enumerate() {
                s.push_str(&format!(
                    "{}%\t{}\t{}\t{}\t{}\t{:.4}\n",
                    step.percent,
                    rank + 1,
                    e.name,
                    e.group,
                    e.count,
                    e.score
                ));
            }
        }
        s
    }

    pub fn write_tables(&self, groups_path: &Path, features_path: &Path) -> Result<()> {
        for (path, body) in [(groups_path, self.group_table()), (features_path, self.feature_table())] {
            let mut w = create(path)?;
            w.write_all(body.as_bytes())
                .and_then(|_| w.flush())
                .map_err(|source| SelectError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
        }
        Ok(())
    }
}
