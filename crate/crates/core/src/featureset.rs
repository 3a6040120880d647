//! The 38-column feature rows and the train/test datasets built from them.
//!
//! A row for target year `y` reads the four preceding years `y-4..y-1`
//! (`y1..y4`), plus the venue of year `y`, which is known in advance. The
//! label is the institution's relevance score in `y`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boost::schema_fingerprint;
use crate::corpus::{Corpus, CorpusError, InstitutionId, Year};
use crate::scalar::{Scalar, Summary};
use crate::scimetrics::{
    distance_weighted_relevance, geo_distance, mean_log_impact_before, time_weighted_relevance,
    AuthorMetricsConfig, AuthorYearMetrics, MetricsError, RelevanceLedger, WINDOW,
};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("no edition of {conference_id} in {year}")]
    MissingEdition { conference_id: String, year: Year },
    #[error("no record for institution {0}")]
    MissingInstitution(InstitutionId),
    #[error("target year {target} needs data from {needed}, corpus starts in {first}")]
    InsufficientLeadYears { target: Year, needed: Year, first: Year },
    #[error("empty training year range")]
    EmptyTrainRange,
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("duplicate feature `{0}`")]
    DuplicateFeature(String),
    #[error("operation would leave no features")]
    EmptySchema,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    MalformedTsv {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

pub type Result<T, E = FeatureError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Author,
    Relevance,
    Distance,
    Gdp,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 4] = [
        FeatureGroup::Author,
        FeatureGroup::Relevance,
        FeatureGroup::Distance,
        FeatureGroup::Gdp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::Author => "author",
            FeatureGroup::Relevance => "relevance",
            FeatureGroup::Distance => "distance",
            FeatureGroup::Gdp => "gdp",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureGroup {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        FeatureGroup::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| format!("unknown feature group `{s}`"))
    }
}

const AGGREGATES: [&str; 6] = ["sum", "max", "min", "avg", "med", "dev"];

fn standard_features() -> Vec<(String, FeatureGroup)> {
    use FeatureGroup::*;
    let mut out = Vec::with_capacity(38);
    let yearly = |out: &mut Vec<(String, FeatureGroup)>, prefix: &str, g| {
        for k in 1..=WINDOW {
            out.push((format!("{prefix} y{k}"), g));
        }
    };
    let aggregates = |out: &mut Vec<(String, FeatureGroup)>, of: &str, g| {
        for a in AGGREGATES {
            out.push((format!("{a}({of})"), g));
        }
    };
    yearly(&mut out, "rel", Relevance);
    aggregates(&mut out, "rel", Relevance);
    out.push(("wt(rel)".into(), Relevance));
    out.push(("wd(rel)".into(), Relevance));
    aggregates(&mut out, "H-index", Author);
    yearly(&mut out, "GDP", Gdp);
    aggregates(&mut out, "Q", Author);
    aggregates(&mut out, "AIF", Author);
    yearly(&mut out, "distance", Distance);
    out
}

/// Ordered, named and grouped feature columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    names: Vec<String>,
    groups: Vec<FeatureGroup>,
}

impl FeatureSchema {
    /// The full 38-column schema.
    pub fn standard() -> Self {
        let (names, groups) = standard_features().into_iter().unzip();
        FeatureSchema { names, groups }
    }

    pub fn new(features: Vec<(String, FeatureGroup)>) -> Result<Self> {
        if features.is_empty() {
            return Err(FeatureError::EmptySchema);
        }
        let mut seen = BTreeSet::new();
        for (name, _) in &features {
            if !seen.insert(name.as_str()) {
                return Err(FeatureError::DuplicateFeature(name.clone()));
            }
        }
        let (names, groups) = features.into_iter().unzip();
        Ok(FeatureSchema { names, groups })
    }

    /// Schema from standard feature names, groups looked up by name.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let standard: HashMap<String, FeatureGroup> = standard_features().into_iter().collect();
        let features = names
            .iter()
            .map(|n| {
                let n = n.as_ref();
                standard
                    .get(n)
                    .map(|g| (n.to_string(), *g))
                    .ok_or_else(|| FeatureError::UnknownFeature(n.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(features)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn groups(&self) -> &[FeatureGroup] {
        &self.groups
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Groups present in the schema, canonical order.
    pub fn present_groups(&self) -> Vec<FeatureGroup> {
        FeatureGroup::ALL
            .into_iter()
            .filter(|g| self.groups.contains(g))
            .collect()
    }

    pub fn group_size(&self, group: FeatureGroup) -> usize {
        self.groups.iter().filter(|g| **g == group).count()
    }

    /// Short content hash of the ordered names.
    pub fn fingerprint(&self) -> String {
        schema_fingerprint(&self.names)
    }
}

/// One (institution, conference, target year) sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub institution_id: InstitutionId,
    pub conference_id: String,
    pub target_year: Year,
    pub values: Vec<f64>,
    pub label: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: FeatureSchema,
    pub rows: Vec<FeatureRow>,
    pub split: Split,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row-major feature values converted to `T`.
    pub fn feature_rows<T: Scalar>(&self) -> Vec<Vec<T>> {
        self.rows
            .iter()
            .map(|r| r.values.iter().map(|&v| T::lit(v)).collect())
            .collect()
    }

    pub fn labels<T: Scalar>(&self) -> Vec<T> {
        self.rows.iter().map(|r| T::lit(r.label)).collect()
    }

    fn keep_columns(&self, keep: &[usize]) -> Result<Dataset> {
        if keep.is_empty() {
            return Err(FeatureError::EmptySchema);
        }
        let schema = FeatureSchema {
            names: keep.iter().map(|&i| self.schema.names[i].clone()).collect(),
            groups: keep.iter().map(|&i| self.schema.groups[i]).collect(),
        };
        let rows = self
            .rows
            .iter()
            .map(|r| FeatureRow {
                values: keep.iter().map(|&i| r.values[i]).collect(),
                ..r.clone()
            })
            .collect();
        Ok(Dataset {
            schema,
            rows,
            split: self.split,
        })
    }

    /// Remove every column of `group`.
    pub fn drop_group(&self, group: FeatureGroup) -> Result<Dataset> {
        let keep: Vec<usize> = (0..self.schema.len())
            .filter(|&i| self.schema.groups[i] != group)
            .collect();
        self.keep_columns(&keep)
    }

    /// Keep the named columns, in this dataset's column order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let wanted: BTreeSet<&str> = names.iter().map(AsRef::as_ref).collect();
        for n in &wanted {
            if self.schema.index_of(n).is_none() {
                return Err(FeatureError::UnknownFeature(n.to_string()));
            }
        }
        let keep: Vec<usize> = (0..self.schema.len())
            .filter(|&i| wanted.contains(self.schema.names[i].as_str()))
            .collect();
        self.keep_columns(&keep)
    }

    /// Tab-separated dump: id columns, one column per feature, `label` last.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let io = |source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        let mut header = vec!["institution_id", "conference_id", "target_year"];
        header.extend(self.schema.names.iter().map(String::as_str));
        header.push("label");
        writeln!(w, "{}", header.join("\t")).map_err(io)?;
        for r in &self.rows {
            let mut line = format!("{}\t{}\t{}", r.institution_id, r.conference_id, r.target_year);
            for v in &r.values {
                line.push('\t');
                line.push_str(&v.to_string());
            }
            line.push('\t');
            line.push_str(&r.label.to_string());
            writeln!(w, "{line}").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_tsv(path: &Path, split: Split) -> Result<Dataset> {
        let io = |source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        };
        let bad = |line: usize, message: String| FeatureError::MalformedTsv {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = BufReader::new(File::open(path).map_err(io)?).lines();
        let header = lines
            .next()
            .ok_or_else(|| bad(1, "missing header".into()))?
            .map_err(io)?;
        let cols: Vec<&str> = header.split('\t').collect();
        if cols.len() < 5
            || cols[..3] != ["institution_id", "conference_id", "target_year"]
            || cols[cols.len() - 1] != "label"
        {
            return Err(bad(1, "unexpected header layout".into()));
        }
        let schema = FeatureSchema::from_names(&cols[3..cols.len() - 1])?;
        let mut rows = Vec::new();
        for (idx, line) in lines.enumerate() {
            let lineno = idx + 2;
            let line = line.map_err(io)?;
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != cols.len() {
                return Err(bad(lineno, format!("expected {} fields, got {}", cols.len(), f.len())));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(lineno, format!("bad number `{s}`")))
            };
            rows.push(FeatureRow {
                institution_id: f[0].to_string(),
                conference_id: f[1].to_string(),
                target_year: f[2]
                    .parse()
                    .map_err(|_| bad(lineno, format!("bad year `{}`", f[2])))?,
                values: f[3..f.len() - 1].iter().map(|s| num(s)).collect::<Result<_>>()?,
                label: num(f[f.len() - 1])?,
            });
        }
        Ok(Dataset {
            schema,
            rows,
            split,
        })
    }
}

/// Builds feature rows against one corpus.
pub struct FeatureBuilder<'a> {
    corpus: &'a Corpus,
    ledger: RelevanceLedger,
    config: AuthorMetricsConfig,
    schema: FeatureSchema,
    mu_p: HashMap<Year, f64>,
}

impl<'a> FeatureBuilder<'a> {
    pub fn new(corpus: &'a Corpus, config: AuthorMetricsConfig) -> Self {
        let (first, last) = corpus.year_range();
        let mu_p = (first..=last + 1)
            .map(|y| (y, mean_log_impact_before(corpus, y)))
            .collect();
        FeatureBuilder {
            corpus,
            ledger: RelevanceLedger::build(corpus),
            config,
            schema: FeatureSchema::standard(),
            mu_p,
        }
    }

    pub fn ledger(&self) -> &RelevanceLedger {
        &self.ledger
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    fn window(target_year: Year) -> [Year; WINDOW] {
        std::array::from_fn(|k| target_year - WINDOW as Year + k as Year)
    }

    fn rel_window(&self, institution_id: &str, conference_id: &str, target_year: Year) -> [f64; WINDOW] {
        Self::window(target_year).map(|y| self.ledger.get(institution_id, conference_id, y))
    }

    fn mu_p(&self, year: Year) -> f64 {
        self.mu_p
            .get(&year)
            .copied()
            .unwrap_or_else(|| mean_log_impact_before(self.corpus, year))
    }

    /// Assemble the row for `institution_id` at `conference_id`, year `target_year`.
    pub fn build_row(
        &self,
        institution_id: &str,
        conference_id: &str,
        target_year: Year,
    ) -> Result<FeatureRow> {
        let corpus = self.corpus;
        let window = Self::window(target_year);
        let mut venues = Vec::with_capacity(WINDOW + 1);
        for y in window.iter().copied().chain([target_year]) {
            let e = corpus
                .edition(conference_id, y)
                .ok_or_else(|| FeatureError::MissingEdition {
                    conference_id: conference_id.to_string(),
                    year: y,
                })?;
            venues.push(e);
        }
        let inst = corpus
            .institution(institution_id)
            .ok_or_else(|| FeatureError::MissingInstitution(institution_id.to_string()))?;

        let rel = self.rel_window(institution_id, conference_id, target_year);
        let distances: [f64; WINDOW] = std::array::from_fn(|k| {
            geo_distance(inst.latitude, inst.longitude, venues[k].latitude, venues[k].longitude)
        });
        let wt = time_weighted_relevance(&rel)?;
        let wd = distance_weighted_relevance(&rel, &distances)?;

        let mut authors = BTreeSet::new();
        for &y in &window {
            for p in corpus.papers_of(conference_id, y)? {
                for a in &p.authorships {
                    if a.institution_ids.iter().any(|i| i == institution_id) {
                        authors.insert(a.author_id.as_str());
                    }
                }
            }
        }
        let mu_p = self.mu_p(target_year);
        let mut h = Vec::with_capacity(authors.len());
        let mut q = Vec::with_capacity(authors.len());
        let mut aif = Vec::with_capacity(authors.len());
        for a in authors {
            let m = AuthorYearMetrics::evaluate(
                corpus,
                a,
                conference_id,
                target_year,
                &self.config,
                mu_p,
            )?;
            h.push(m.h_index as f64);
            q.push(m.q_value);
            aif.push(m.aif);
        }

        let gdp = window.map(|y| {
            corpus.gdp().get(&inst.country_code, y).unwrap_or_else(|| {
                log::warn!("no GDP for {} in {y}; using 0", inst.country_code);
                0.0
            })
        });

        let mut values = Vec::with_capacity(self.schema.len());
        values.extend_from_slice(&rel);
        values.extend(Summary::of(&rel).to_array());
        values.push(wt);
        values.push(wd);
        values.extend(Summary::of(&h).to_array());
        values.extend_from_slice(&gdp);
        values.extend(Summary::of(&q).to_array());
        values.extend(Summary::of(&aif).to_array());
        values.extend_from_slice(&distances);
        debug_assert_eq!(values.len(), self.schema.len());

        Ok(FeatureRow {
            institution_id: institution_id.to_string(),
            conference_id: conference_id.to_string(),
            target_year,
            values,
            label: self.ledger.get(institution_id, conference_id, target_year),
        })
    }

    /// Training rows for every target year in `train_years` and test rows for
    /// `test_target`, sorted by (institution, year).
    ///
    /// A training row exists when the institution has credit in its window or
    /// in the target year; a test row only when it has credit in its window.
    pub fn build_datasets(
        &self,
        conference_id: &str,
        train_years: RangeInclusive<Year>,
        test_target: Year,
    ) -> Result<(Dataset, Dataset)> {
        let corpus = self.corpus;
        if !corpus.has_conference(conference_id) {
            return Err(CorpusError::UnknownConference(conference_id.to_string()).into());
        }
        if train_years.is_empty() {
            return Err(FeatureError::EmptyTrainRange);
        }
        let first = corpus.year_range().0;
        for target in [*train_years.start(), test_target] {
            let needed = target - WINDOW as Year;
            if needed < first {
                return Err(FeatureError::InsufficientLeadYears {
                    target,
                    needed,
                    first,
                });
            }
        }

        let candidates: BTreeSet<&str> = self
            .ledger
            .iter()
            .filter(|(c, _, _)| *c == conference_id)
            .flat_map(|(_, _, s)| s.iter().filter(|(_, v)| **v > 0.0).map(|(i, _)| i.as_str()))
            .collect();

        let active = |inst: &str, y: Year| {
            self.rel_window(inst, conference_id, y)
                .iter()
                .any(|v| *v > 0.0)
        };

        let mut train = Vec::new();
        let mut test = Vec::new();
        for &inst in &candidates {
            for y in train_years.clone() {
                if active(inst, y) || self.ledger.get(inst, conference_id, y) > 0.0 {
                    train.push(self.build_row(inst, conference_id, y)?);
                }
            }
            if active(inst, test_target) {
                test.push(self.build_row(inst, conference_id, test_target)?);
            }
        }
        Ok((
            Dataset {
                schema: self.schema.clone(),
                rows: train,
                split: Split::Train,
            },
            Dataset {
                schema: self.schema.clone(),
                rows: test,
                split: Split::Test,
            },
        ))
    }
}
