//! Experiment orchestration: load a corpus, build per-conference datasets,
//! train both learners with and without relevance features, sweep the
//! top-p% feature subsets and write the report tables.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use instimpact::boost::{BoostError, BoostParams, Learner};
use instimpact::corpus::{load_corpus, CleaningConfig, Corpus, CorpusError, CorpusPaths, LoadReport, Year};
use instimpact::featureset::{Dataset, FeatureBuilder, FeatureError, FeatureGroup};
use instimpact::rankeval::RankError;
use instimpact::scimetrics::{AuthorMetricsConfig, MetricsError, WINDOW};
use instimpact::select::{self, EvalSpec, SelectError};
use instimpact::synth::{SynthError, SyntheticSpec};
use instimpact::Sweep;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn config_field(field: &str, message: impl fmt::Display) -> Self {
        CliError::Config(format!("`{field}`: {message}"))
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::InsufficientLeadYears { .. } | FeatureError::EmptyTrainRange => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<BoostError> for CliError {
    fn from(e: BoostError) -> Self {
        match e {
            BoostError::InvalidParam { .. } => CliError::Config(e.to_string()),
            BoostError::Io { .. } | BoostError::Parse { .. } | BoostError::SchemaMismatch { .. } => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<RankError> for CliError {
    fn from(e: RankError) -> Self {
        match e {
            RankError::ZeroCutoff => CliError::Config(e.to_string()),
            RankError::Empty => CliError::Data(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<SelectError> for CliError {
    fn from(e: SelectError) -> Self {
        match e {
            SelectError::BadPercent(_) | SelectError::NothingSelected { .. } => {
                CliError::Config(e.to_string())
            }
            SelectError::Boost(e) => e.into(),
            SelectError::Feature(e) => e.into(),
            SelectError::Rank(e) => e.into(),
            SelectError::Io { .. } => CliError::Data(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Invalid(_) => CliError::Config(e.to_string()),
            SynthError::Corpus(e) => e.into(),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    WithRelevance,
    WithoutRelevance,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::WithRelevance => "with_relevance",
            Variant::WithoutRelevance => "without_relevance",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "with_relevance" => Ok(Variant::WithRelevance),
            "without_relevance" => Ok(Variant::WithoutRelevance),
            _ => Err(format!("unknown variant `{s}`")),
        }
    }
}

/// Where the corpus lives: a directory with the conventional file names,
/// individual files, or both (files override the directory).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub dir: Option<PathBuf>,
    pub papers: Option<PathBuf>,
    pub institutions: Option<PathBuf>,
    pub editions: Option<PathBuf>,
    pub gdp: Option<PathBuf>,
    pub year_range: Option<[Year; 2]>,
}

impl CorpusSection {
    pub fn paths(&self) -> Result<CorpusPaths> {
        let base = self.dir.as_ref().map(CorpusPaths::in_dir);
        let pick = |file: &Option<PathBuf>, from_dir: Option<&PathBuf>, name: &str| {
            file.clone()
                .or_else(|| from_dir.cloned())
                .ok_or_else(|| CliError::config_field(&format!("corpus.{name}"), "missing (set it or corpus.dir)"))
        };
        Ok(CorpusPaths {
            papers: pick(&self.papers, base.as_ref().map(|b| &b.papers), "papers")?,
            institutions: pick(&self.institutions, base.as_ref().map(|b| &b.institutions), "institutions")?,
            editions: pick(&self.editions, base.as_ref().map(|b| &b.editions), "editions")?,
            gdp: pick(&self.gdp, base.as_ref().map(|b| &b.gdp), "gdp")?,
        })
    }

    pub fn cleaning(&self) -> CleaningConfig {
        CleaningConfig {
            year_range: self.year_range.map(|[a, b]| (a, b)),
        }
    }

    fn rebase(&mut self, root: &Path) {
        for p in [
            &mut self.dir,
            &mut self.papers,
            &mut self.institutions,
            &mut self.editions,
            &mut self.gdp,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = root.join(&*p);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: CorpusSection,
    /// Empty means every conference in the corpus.
    pub conferences: Vec<String>,
    /// Inclusive range of training target years.
    pub train_years: [Year; 2],
    pub test_year: Year,
    pub aif_window: u32,
    pub percents: Vec<u32>,
    pub variants: Vec<Variant>,
    pub learners: Vec<Learner>,
    pub ndcg_n: usize,
    pub output_dir: PathBuf,
    /// Only used by the synthetic generator.
    pub seed: u64,
    pub boost: BoostParams,
    pub synthetic: Option<SyntheticSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus: CorpusSection::default(),
            conferences: Vec::new(),
            train_years: [2004, 2014],
            test_year: 2015,
            aif_window: WINDOW as u32,
            percents: (1..=10).map(|k| k * 10).collect(),
            variants: vec![Variant::WithRelevance, Variant::WithoutRelevance],
            learners: vec![Learner::SecondOrder, Learner::Gbdt],
            ndcg_n: 20,
            output_dir: PathBuf::from("out"),
            seed: 42,
            boost: BoostParams::default(),
            synthetic: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string() + &field_hint(&e)))
    }

    /// Parse a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        let root = path.parent().unwrap_or(Path::new("."));
        config.corpus.rebase(root);
        if config.output_dir.is_relative() {
            config.output_dir = root.join(&config.output_dir);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.train_years;
        if lo > hi {
            return Err(CliError::config_field("train_years", format!("start {lo} is after end {hi}")));
        }
        if self.test_year <= hi {
            return Err(CliError::config_field(
                "test_year",
                format!("{} must come after the last training year {hi}", self.test_year),
            ));
        }
        if let Some([first, last]) = self.corpus.year_range {
            if lo - (WINDOW as Year) < first {
                return Err(CliError::config_field(
                    "train_years",
                    format!("needs {WINDOW} lead years before {lo} but the corpus starts in {first}"),
                ));
            }
            if self.test_year > last {
                return Err(CliError::config_field(
                    "test_year",
                    format!("{} is after the corpus end {last}", self.test_year),
                ));
            }
        }
        if self.aif_window == 0 {
            return Err(CliError::config_field("aif_window", "must be at least 1"));
        }
        if self.percents.is_empty() {
            return Err(CliError::config_field("percents", "must not be empty"));
        }
        for &p in &self.percents {
            if !(10..=100).contains(&p) || p % 10 != 0 {
                return Err(CliError::config_field("percents", format!("{p} is not one of 10, 20, ..., 100")));
            }
        }
        if self.variants.is_empty() {
            return Err(CliError::config_field("variants", "must not be empty"));
        }
        if self.learners.is_empty() {
            return Err(CliError::config_field("learners", "must not be empty"));
        }
        if self.ndcg_n == 0 {
            return Err(CliError::config_field("ndcg_n", "must be at least 1"));
        }
        self.boost.validate()?;
        Ok(())
    }

    /// The `[synthetic]` section, or defaults, seeded from the top-level `seed`.
    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            seed: self.seed,
            ..self.synthetic.clone().unwrap_or_default()
        }
    }

    pub fn metrics(&self) -> AuthorMetricsConfig {
        AuthorMetricsConfig {
            aif_window: self.aif_window,
            ..Default::default()
        }
    }

    /// SHA-256 over the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn sorted_dedup<T: Ord + Clone>(v: &[T]) -> Vec<T> {
        let mut v = v.to_vec();
        v.sort();
        v.dedup();
        v
    }

    pub fn learners_sorted(&self) -> Vec<Learner> {
        let mut out = Vec::new();
        for l in [Learner::SecondOrder, Learner::Gbdt] {
            if self.learners.contains(&l) {
                out.push(l);
            }
        }
        out
    }

    pub fn variants_sorted(&self) -> Vec<Variant> {
        Self::sorted_dedup(&self.variants)
    }

    pub fn percents_sorted(&self) -> Vec<u32> {
        Self::sorted_dedup(&self.percents)
    }
}

fn field_hint(e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => format!(" (at bytes {}..{})", span.start, span.end),
        None => String::new(),
    }
}

pub fn load(config: &ExperimentConfig) -> Result<(Corpus, LoadReport)> {
    let paths = config.corpus.paths()?;
    for p in [&paths.papers, &paths.institutions, &paths.editions, &paths.gdp] {
        if !p.is_file() {
            return Err(CliError::Data(format!("missing input file {}", p.display())));
        }
    }
    Ok(load_corpus(&paths, &config.corpus.cleaning())?)
}

/// Conferences to run: the configured list, or every conference in the corpus.
pub fn resolve_conferences(config: &ExperimentConfig, corpus: &Corpus) -> Result<Vec<String>> {
    if config.conferences.is_empty() {
        return Ok(corpus.conferences().map(str::to_string).collect());
    }
    let mut out = Vec::new();
    for c in &config.conferences {
        if !corpus.has_conference(c) {
            return Err(CliError::Data(format!("conference `{c}` is not in the corpus")));
        }
        if !out.contains(c) {
            out.push(c.clone());
        }
    }
    Ok(out)
}

pub fn build_datasets(
    builder: &FeatureBuilder<'_>,
    config: &ExperimentConfig,
    conference: &str,
) -> Result<(Dataset, Dataset)> {
    let [lo, hi] = config.train_years;
    Ok(builder.build_datasets(conference, lo..=hi, config.test_year)?)
}

pub fn run_sweep(
    builder: &FeatureBuilder<'_>,
    config: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
    conference: &str,
    learner: Learner,
    variant: Variant,
) -> Result<Sweep> {
    let params = BoostParams { learner, ..config.boost };
    let empty = BTreeMap::new();
    let truth = builder.ledger().slice(conference, config.test_year).unwrap_or(&empty);
    let eval = EvalSpec {
        ndcg_n: config.ndcg_n,
        truth: Some(truth),
    };
    let percents = config.percents_sorted();
    let sweep = match variant {
        Variant::WithRelevance => select::sweep(train, test, &params, &percents, eval)?,
        Variant::WithoutRelevance => {
            select::sweep_without_group(train, test, &params, &percents, eval, FeatureGroup::Relevance)?
        }
    };
    Ok(sweep)
}

/// One (conference, learner, variant) experiment.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub conference: String,
    pub learner: Learner,
    pub variant: Variant,
    pub train_rows: usize,
    pub test_rows: usize,
    pub sweep: Sweep,
}

impl CellResult {
    pub fn stem(&self) -> String {
        format!("{}_{}_{}", self.conference, self.learner, self.variant)
    }

    pub fn ndcg(&self, percent: u32, n: usize) -> Option<f64> {
        self.sweep
            .steps
            .iter()
            .find(|s| s.percent == percent)
            .and_then(|s| s.ranking.ndcg.get(&n).copied())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub load_report: LoadReport,
    pub conferences: Vec<String>,
    pub cells: Vec<CellResult>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn cell(&self, conference: &str, learner: Learner, variant: Variant) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.conference == conference && c.learner == learner && c.variant == variant)
    }

    /// Mean NDCG@n over conferences for one learner, variant and percent.
    pub fn mean_ndcg(&self, learner: Learner, variant: Variant, percent: u32, n: usize) -> Option<f64> {
        let vals: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.learner == learner && c.variant == variant)
            .filter_map(|c| c.ndcg(percent, n))
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Full-model group importance summed over conferences.
    pub fn group_importance(&self, learner: Learner, variant: Variant) -> BTreeMap<FeatureGroup, f64> {
        let mut out = BTreeMap::new();
        for c in self.cells.iter().filter(|c| c.learner == learner && c.variant == variant) {
            for (g, v) in &c.sweep.full_importance.group_sums {
                *out.entry(*g).or_insert(0.0) += v;
            }
        }
        out
    }
}

/// Train and evaluate every cell. Conferences run in parallel; the result
/// order is fixed by the config.
pub fn compute_cells(config: &ExperimentConfig, corpus: &Corpus, conferences: &[String]) -> Result<Vec<CellResult>> {
    let builder = FeatureBuilder::new(corpus, config.metrics());
    let per_conf: Vec<Result<Vec<CellResult>>> = conferences
        .par_iter()
        .map(|conf| {
            let (train, test) = build_datasets(&builder, config, conf)?;
            log::info!("{conf}: {} train rows, {} test rows", train.len(), test.len());
            let mut cells = Vec::new();
            for learner in config.learners_sorted() {
                for variant in config.variants_sorted() {
                    let sweep = run_sweep(&builder, config, &train, &test, conf, learner, variant)?;
                    cells.push(CellResult {
                        conference: conf.clone(),
                        learner,
                        variant,
                        train_rows: train.len(),
                        test_rows: test.len(),
                        sweep,
                    });
                }
            }
            Ok(cells)
        })
        .collect();
    let mut cells = Vec::new();
    for r in per_conf {
        cells.extend(r?);
    }
    Ok(cells)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let (corpus, load_report) = load(config)?;
    let conferences = resolve_conferences(config, &corpus)?;
    let cells = compute_cells(config, &corpus, &conferences)?;
    let files = write_reports(config, &conferences, &cells)?;
    Ok(RunOutcome {
        load_report,
        conferences,
        cells,
        files,
    })
}

fn percent_label(p: u32) -> String {
    if p == 100 {
        "all features".to_string()
    } else {
        format!("{p}%")
    }
}

/// Long-form NDCG report: one row per (conference, learner, variant, percent).
pub fn ndcg_report(config: &ExperimentConfig, cells: &[CellResult]) -> String {
    let n = config.ndcg_n;
    let mut s = format!("conference\tyear\tndcg@{n}\tlearner\tfeature_pct\tvariant\n");
    for c in cells {
        for step in &c.sweep.steps {
            let v = step.ranking.ndcg.get(&n).copied().unwrap_or(0.0);
            s.push_str(&format!(
                "{}\t{}\t{v:.4}\t{}\t{}\t{}\n",
                c.conference, config.test_year, c.learner, step.percent, c.variant
            ));
        }
    }
    s
}

/// Wide NDCG table for one learner and variant: conferences by percent.
pub fn ndcg_table(
    config: &ExperimentConfig,
    conferences: &[String],
    cells: &[CellResult],
    learner: Learner,
    variant: Variant,
) -> String {
    let percents = config.percents_sorted();
    let mut s = String::from("conference");
    for p in &percents {
        s.push('\t');
        s.push_str(&percent_label(*p));
    }
    s.push('\n');
    for conf in conferences {
        let cell = cells
            .iter()
            .find(|c| &c.conference == conf && c.learner == learner && c.variant == variant);
        s.push_str(conf);
        for p in &percents {
            match cell.and_then(|c| c.ndcg(*p, config.ndcg_n)) {
                Some(v) => s.push_str(&format!("\t{v:.4}")),
                None => s.push_str("\t-"),
            }
        }
        s.push('\n');
    }
    s
}

fn ranking_table(cell: &CellResult) -> String {
    let mut s = String::from("percent\trank\tinstitution_id\tpredicted\ttruth\n");
    for step in &cell.sweep.steps {
        for (rank, e) in step.ranking.entries.iter().enumerate() {
            s.push_str(&format!(
                "{}%\t{}\t{}\t{:.6}\t{:.6}\n",
                step.percent,
                rank + 1,
                e.institution_id,
                e.predicted,
                e.truth
            ));
        }
    }
    s
}

#[derive(Debug, Serialize)]
struct ManifestCell {
    conference: String,
    learner: Learner,
    variant: Variant,
    feature_pct: u32,
    ndcg: f64,
    degenerate: bool,
    model_file: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    config_hash: String,
    created_unix: u64,
    test_year: Year,
    ndcg_n: usize,
    conferences: &'a [String],
    config: &'a ExperimentConfig,
    cells: Vec<ManifestCell>,
}

fn write_file(path: &Path, body: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, body).map_err(|e| CliError::io(path, e))?;
    files.push(path.to_path_buf());
    Ok(())
}

/// Write every report under the output directory and return the files
/// written, in a fixed order.
pub fn write_reports(config: &ExperimentConfig, conferences: &[String], cells: &[CellResult]) -> Result<Vec<PathBuf>> {
    let out = &config.output_dir;
    let mut files = Vec::new();

    write_file(&out.join("ndcg.tsv"), &ndcg_report(config, cells), &mut files)?;
    for learner in config.learners_sorted() {
        for variant in config.variants_sorted() {
            let name = format!("ndcg_table_{learner}_{variant}.tsv");
            let body = ndcg_table(config, conferences, cells, learner, variant);
            write_file(&out.join("tables").join(name), &body, &mut files)?;
        }
    }

    let mut manifest_cells = Vec::new();
    for c in cells {
        let stem = c.stem();
        let imp = out.join("importance");
        write_file(&imp.join(format!("{stem}_groups.tsv")), &c.sweep.group_table(), &mut files)?;
        write_file(&imp.join(format!("{stem}_features.tsv")), &c.sweep.feature_table(), &mut files)?;
        write_file(&out.join("rankings").join(format!("{stem}.tsv")), &ranking_table(c), &mut files)?;
        let models = out.join("models");
        write_file(&models.join(format!("{stem}_full.model")), &c.sweep.full_model.to_text(), &mut files)?;
        for step in &c.sweep.steps {
            let model_file = format!("models/{stem}_p{:03}.model", step.percent);
            write_file(&out.join(&model_file), &step.model.to_text(), &mut files)?;
            manifest_cells.push(ManifestCell {
                conference: c.conference.clone(),
                learner: c.learner,
                variant: c.variant,
                feature_pct: step.percent,
                ndcg: step.ranking.ndcg.get(&config.ndcg_n).copied().unwrap_or(0.0),
                degenerate: step.ranking.degenerate,
                model_file,
            });
        }
    }

    let created_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = Manifest {
        config_hash: config.hash(),
        created_unix,
        test_year: config.test_year,
        ndcg_n: config.ndcg_n,
        conferences,
        config,
        cells: manifest_cells,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(&out.join("manifest.json"), &(json + "\n"), &mut files)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn validation_names_the_field() {
        let c = ExperimentConfig {
            percents: vec![15],
            ..Default::default()
        };
        let e = c.validate().unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("percents"));

        let c = ExperimentConfig {
            corpus: CorpusSection {
                year_range: Some([2002, 2015]),
                ..Default::default()
            },
            ..Default::default()
        };
        assert!(c.validate().unwrap_err().to_string().contains("train_years"));

        let c = ExperimentConfig {
            test_year: 2014,
            ..Default::default()
        };
        assert!(c.validate().unwrap_err().to_string().contains("test_year"));
    }

    #[test]
    fn toml_round_trip_and_unknown_keys() {
        let c = ExperimentConfig::from_toml(
            r#"
            conferences = ["KDD"]
            train_years = [2005, 2009]
            test_year = 2012
            percents = [10, 100]
            learners = ["gbdt"]
            variants = ["without_relevance"]
            [corpus]
            dir = "data"
            [boost]
            rounds = 20
            "#,
        )
        .unwrap();
        assert_eq!(c.train_years, [2005, 2009]);
        assert_eq!(c.boost.rounds, 20);
        assert_eq!(c.boost.max_depth, 4);
        assert_eq!(c.learners, vec![Learner::Gbdt]);
        assert_eq!(c.corpus.paths().unwrap().papers, PathBuf::from("data/papers.jsonl"));

        let e = ExperimentConfig::from_toml("bogus = 1").unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("bogus"));
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig {
            output_dir: "elsewhere".into(),
            ..Default::default()
        };
        let c = ExperimentConfig {
            ndcg_n: 10,
            ..Default::default()
        };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn percent_labels() {
        assert_eq!(percent_label(10), "10%");
        assert_eq!(percent_label(100), "all features");
    }
}
