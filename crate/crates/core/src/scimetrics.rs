//! Per-author indicators (AIF, Q value, H-index), fractional institution
//! credit, great-circle distances and the two trend weightings of the
//! four-year relevance window.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{self, ConferenceId, Corpus, CorpusError, InstitutionId, PaperRecord, Year};
use crate::scalar::Scalar;

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Length of the history window feeding the relevance features.
pub const WINDOW: usize = 4;

/// Time-trend weights, oldest year first.
pub const TIME_WEIGHTS: [f64; WINDOW] = [0.1, 0.2, 0.3, 0.4];

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("unknown author {0}")]
    UnknownAuthor(String),
    #[error("author {0} has no papers in scope")]
    NoPapers(String),
    #[error("window length must be at least 1 year")]
    InvalidWindow,
    #[error("expected {expected} values, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("negative value {0} in trend weighting input")]
    Negative(f64),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

pub type Result<T, E = MetricsError> = std::result::Result<T, E>;

/// Which papers an author metric is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricScope {
    /// Every paper in the corpus.
    #[default]
    Corpus,
    /// Only papers at the conference the feature row is built for.
    Conference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuthorMetricsConfig {
    /// AIF window length in years.
    pub aif_window: u32,
    pub aif_scope: MetricScope,
    pub q_scope: MetricScope,
    pub h_scope: MetricScope,
}

impl Default for AuthorMetricsConfig {
    fn default() -> Self {
        AuthorMetricsConfig {
            aif_window: WINDOW as u32,
            aif_scope: MetricScope::Corpus,
            q_scope: MetricScope::Corpus,
            h_scope: MetricScope::Corpus,
        }
    }
}

fn known_author(corpus: &Corpus, author_id: &str) -> Result<()> {
    if corpus.has_author(author_id) {
        Ok(())
    } else {
        Err(MetricsError::UnknownAuthor(author_id.to_string()))
    }
}

fn log_impact(p: &PaperRecord) -> f64 {
    (p.citation_count as f64).ln_1p()
}

/// Mean citations over `papers` published in `[year - window, year - 1]`.
pub fn aif_of<'a>(papers: impl IntoIterator<Item = &'a PaperRecord>, year: Year, window: u32) -> f64 {
    let lo = year - window as Year;
    let (n, total) = papers
        .into_iter()
        .filter(|p| p.year >= lo && p.year < year)
        .fold((0usize, 0u64), |(n, t), p| (n + 1, t + p.citation_count));
    if n == 0 {
        0.0
    } else {
        total as f64 / n as f64
    }
}

/// Author impact factor at year `year` over a `window`-year trailing window.
pub fn author_aif(corpus: &Corpus, author_id: &str, year: Year, window: u32) -> Result<f64> {
    if window < 1 {
        return Err(MetricsError::InvalidWindow);
    }
    known_author(corpus, author_id)?;
    Ok(aif_of(corpus.papers_by_author(author_id), year, window))
}

/// Mean of `ln(1 + c)` over every paper; the reference level of the Q value.
pub fn mean_log_impact(corpus: &Corpus) -> f64 {
    mean_log_impact_of(corpus.papers().iter())
}

/// Mean of `ln(1 + c)` over papers published before `year`.
pub fn mean_log_impact_before(corpus: &Corpus, year: Year) -> f64 {
    mean_log_impact_of(corpus.papers().iter().filter(|p| p.year < year))
}

fn mean_log_impact_of<'a>(papers: impl Iterator<Item = &'a PaperRecord>) -> f64 {
    let (n, total) = papers.fold((0usize, 0.0), |(n, t), p| (n + 1, t + log_impact(p)));
    if n == 0 {
        0.0
    } else {
        total / n as f64
    }
}

/// `exp(mean ln(1 + c) - mu_p)` over citation counts, `None` when empty.
pub fn q_of_citations(citations: impl IntoIterator<Item = f64>, mu_p: f64) -> Option<f64> {
    let (n, total) = citations
        .into_iter()
        .fold((0usize, 0.0), |(n, t), c| (n + 1, t + c.ln_1p()));
    (n > 0).then(|| (total / n as f64 - mu_p).exp())
}

pub fn q_of<'a>(papers: impl IntoIterator<Item = &'a PaperRecord>, mu_p: f64) -> Option<f64> {
    q_of_citations(papers.into_iter().map(|p| p.citation_count as f64), mu_p)
}

/// Q value over all of the author's papers.
pub fn author_q(corpus: &Corpus, author_id: &str, mu_p: f64) -> Result<f64> {
    known_author(corpus, author_id)?;
    q_of(corpus.papers_by_author(author_id), mu_p)
        .ok_or_else(|| MetricsError::NoPapers(author_id.to_string()))
}

/// Largest `h` such that `h` of the citation counts are at least `h`.
pub fn h_index_of(citations: impl IntoIterator<Item = u64>) -> u32 {
    let mut c: Vec<u64> = citations.into_iter().collect();
    c.sort_unstable_by(|a, b| b.cmp(a));
    c.iter()
        .enumerate()
        .take_while(|(i, &cites)| cites > *i as u64)
        .count() as u32
}

/// H-index over the author's papers up to and including `up_to_year`.
/// Unknown authors have index 0.
pub fn author_h_index(corpus: &Corpus, author_id: &str, up_to_year: Year) -> u32 {
    h_index_of(
        corpus
            .papers_by_author(author_id)
            .filter(|p| p.year <= up_to_year)
            .map(|p| p.citation_count),
    )
}

/// The three author indicators as seen at the start of `year`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuthorYearMetrics {
    pub year: Year,
    pub aif: f64,
    pub q_value: f64,
    pub h_index: u32,
}

impl AuthorYearMetrics {
    /// Evaluate from papers strictly before `year` only; `mu_p` must come
    /// from the same horizon (see [`mean_log_impact_before`]).
    pub fn evaluate(
        corpus: &Corpus,
        author_id: &str,
        conference_id: &str,
        year: Year,
        config: &AuthorMetricsConfig,
        mu_p: f64,
    ) -> Result<Self> {
        if config.aif_window < 1 {
            return Err(MetricsError::InvalidWindow);
        }
        known_author(corpus, author_id)?;
        let scoped = |scope: MetricScope| {
            corpus.papers_by_author(author_id).filter(move |p| {
                p.year < year
                    && (scope == MetricScope::Corpus || p.conference_id == conference_id)
            })
        };
        let aif = aif_of(scoped(config.aif_scope), year, config.aif_window);
        // the author has a window paper in the calling context, so Q is defined
        // under corpus scope; conference scope can still come up empty
        let q_value = q_of(scoped(config.q_scope), mu_p).unwrap_or(0.0);
        let h_index = h_index_of(scoped(config.h_scope).map(|p| p.citation_count));
        Ok(AuthorYearMetrics {
            year,
            aif,
            q_value,
            h_index,
        })
    }
}

/// Fractional credit per institution for the papers of one edition: one unit
/// per paper, split equally over its authors, then over each author's
/// institutions.
pub fn relevance_scores(
    corpus: &Corpus,
    conference_id: &str,
    year: Year,
) -> Result<BTreeMap<InstitutionId, f64>> {
    if corpus.edition(conference_id, year).is_none() {
        return Err(CorpusError::UnknownEdition {
            conference_id: conference_id.to_string(),
            year,
        }
        .into());
    }
    let mut scores: BTreeMap<InstitutionId, f64> = BTreeMap::new();
    for paper in corpus.papers_of(conference_id, year)? {
        credit_paper(paper, &mut scores);
    }
    Ok(scores)
}

fn credit_paper(paper: &PaperRecord, scores: &mut BTreeMap<InstitutionId, f64>) {
    let k = paper.authorships.len() as f64;
    for a in &paper.authorships {
        let m = a.institution_ids.len() as f64;
        for inst in &a.institution_ids {
            *scores.entry(inst.clone()).or_insert(0.0) += 1.0 / (k * m);
        }
    }
}

/// Relevance scores for every edition of the corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelevanceLedger {
    scores: BTreeMap<(ConferenceId, Year), BTreeMap<InstitutionId, f64>>,
}

impl RelevanceLedger {
    pub fn build(corpus: &Corpus) -> Self {
        let mut scores: BTreeMap<(ConferenceId, Year), BTreeMap<InstitutionId, f64>> =
            corpus
                .editions()
                .map(|e| ((e.conference_id.clone(), e.year), BTreeMap::new()))
                .collect();
        for paper in corpus.papers() {
            let slot = scores
                .entry((paper.conference_id.clone(), paper.year))
                .or_default();
            credit_paper(paper, slot);
        }
        RelevanceLedger { scores }
    }

    /// Score of an institution; 0 when it has no credit.
    pub fn get(&self, institution_id: &str, conference_id: &str, year: Year) -> f64 {
        self.slice(conference_id, year)
            .and_then(|s| s.get(institution_id))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn slice(&self, conference_id: &str, year: Year) -> Option<&BTreeMap<InstitutionId, f64>> {
        self.scores.get(&(conference_id.to_string(), year))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Year, &BTreeMap<InstitutionId, f64>)> {
        self.scores.iter().map(|((c, y), s)| (c.as_str(), *y, s))
    }

    /// Debug dump: `institution_id,conference_id,year,score`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows = self.iter().flat_map(|(c, y, s)| {
            s.iter()
                .map(move |(i, v)| vec![i.clone(), c.to_string(), y.to_string(), v.to_string()])
        });
        corpus::write_csv(path, &["institution_id", "conference_id", "year", "score"], rows)?;
        Ok(())
    }
}

/// Great-circle distance in kilometres by the haversine formula.
pub fn geo_distance<T: Scalar>(lat_a: T, lon_a: T, lat_i: T, lon_i: T) -> T {
    let two = T::lit(2.0);
    let (phi_a, phi_i) = (lat_a.to_radians(), lat_i.to_radians());
    let d_phi = (phi_a - phi_i).abs();
    let d_lambda = (lon_a.to_radians() - lon_i.to_radians()).abs();
    let h = (d_phi / two).sin().powi(2) + phi_a.cos() * phi_i.cos() * (d_lambda / two).sin().powi(2);
    two * T::lit(EARTH_RADIUS_KM) * h.min(T::one()).max(T::zero()).sqrt().asin()
}

fn check_window<T: Scalar>(values: &[T]) -> Result<()> {
    if values.len() != WINDOW {
        return Err(MetricsError::WrongArity {
            expected: WINDOW,
            got: values.len(),
        });
    }
    if let Some(v) = values.iter().find(|v| **v < T::zero()) {
        return Err(MetricsError::Negative(v.to_f64_lossy()));
    }
    Ok(())
}

/// Window scores (oldest first) weighted toward the forecast year.
pub fn time_weighted_relevance<T: Scalar>(scores: &[T]) -> Result<T> {
    check_window(scores)?;
    Ok(scores
        .iter()
        .zip(TIME_WEIGHTS)
        .map(|(&s, w)| s * T::lit(w))
        .sum())
}

/// Window scores weighted in proportion to the matching distances; uniform
/// when every distance is zero.
pub fn distance_weighted_relevance<T: Scalar>(scores: &[T], distances: &[T]) -> Result<T> {
    check_window(scores)?;
    check_window(distances)?;
    let total: T = distances.iter().copied().sum();
    if total == T::zero() {
        let n = T::from_usize_lossy(WINDOW);
        return Ok(scores.iter().copied().sum::<T>() / n);
    }
    Ok(scores
        .iter()
        .zip(distances)
        .map(|(&s, &d)| s * (d / total))
        .sum())
}
