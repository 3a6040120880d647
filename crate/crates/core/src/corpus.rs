//! Scholarly corpus: accepted papers, institutions, conference editions and
//! GDP per capita, loaded from line-delimited files and cleaned.
//!
//! Cleaning runs in a fixed order:
//!
//! 1. papers outside the configured year range are discarded;
//! 2. an authorship with no institution inherits the institutions the same
//!    author listed on their most recent paper from a strictly earlier year
//!    (ties within that year go to the smallest `paper_id`);
//! 3. papers that still have an authorship without institutions, or no
//!    authorships at all, are dropped;
//! 4. institution records are deduplicated by id.
//!
//! Everything is then checked for referential integrity.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub type PaperId = String;
pub type AuthorId = String;
pub type InstitutionId = String;
pub type ConferenceId = String;
pub type Year = i32;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: field `{field}`: {message}")]
    Malformed {
        file: String,
        line: usize,
        field: String,
        message: String,
    },
    #[error("paper {paper_id} references unknown institution {institution_id}")]
    DanglingInstitution {
        paper_id: PaperId,
        institution_id: InstitutionId,
    },
    #[error("paper {paper_id} has no edition for {conference_id} {year}")]
    DanglingEdition {
        paper_id: PaperId,
        conference_id: ConferenceId,
        year: Year,
    },
    #[error("duplicate edition {conference_id} {year}")]
    DuplicateEdition {
        conference_id: ConferenceId,
        year: Year,
    },
    #[error("duplicate paper id {0}")]
    DuplicatePaper(PaperId),
    #[error("duplicate gdp entry {country_code} {year}")]
    DuplicateGdp { country_code: String, year: Year },
    #[error("unknown conference {0}")]
    UnknownConference(ConferenceId),
    #[error("unknown edition {conference_id} {year}")]
    UnknownEdition {
        conference_id: ConferenceId,
        year: Year,
    },
    #[error("invalid cleaning config: {0}")]
    Config(String),
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Authorship {
    pub author_id: AuthorId,
    pub institution_ids: Vec<InstitutionId>,
}

/// One accepted paper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: PaperId,
    pub year: Year,
    pub conference_id: ConferenceId,
    pub citation_count: u64,
    pub authorships: Vec<Authorship>,
}

impl PaperRecord {
    pub fn is_complete(&self) -> bool {
        !self.authorships.is_empty()
            && self
                .authorships
                .iter()
                .all(|a| !a.institution_ids.is_empty())
    }
}

/// Host city of a conference in a given year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConferenceEdition {
    pub conference_id: ConferenceId,
    pub year: Year,
    pub latitude: f64,
    pub longitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstitutionRecord {
    pub institution_id: InstitutionId,
    pub latitude: f64,
    pub longitude: f64,
    pub country_code: String,
}

/// GDP per capita keyed by (country, year).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GdpTable(BTreeMap<(String, Year), f64>);

impl GdpTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, country_code: &str, year: Year, gdp_per_capita: f64) -> Result<()> {
        let key = (country_code.to_string(), year);
        if self.0.contains_key(&key) {
            return Err(CorpusError::DuplicateGdp {
                country_code: key.0,
                year,
            });
        }
        self.0.insert(key, gdp_per_capita);
        Ok(())
    }

    pub fn get(&self, country_code: &str, year: Year) -> Option<f64> {
        self.0.get(&(country_code.to_string(), year)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Year, f64)> {
        self.0.iter().map(|((c, y), v)| (c.as_str(), *y, *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningConfig {
    /// Inclusive year range to retain. `None` keeps every year.
    pub year_range: Option<(Year, Year)>,
}

/// Counts collected while cleaning.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub papers_read: usize,
    pub papers_out_of_range: usize,
    pub papers_kept: usize,
    pub papers_backfilled: usize,
    pub authorships_backfilled: usize,
    pub papers_dropped: usize,
    pub institutions_read: usize,
    pub institutions_deduplicated: usize,
    pub editions: usize,
    pub gdp_rows: usize,
}

/// Locations of the four input files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusPaths {
    pub papers: PathBuf,
    pub institutions: PathBuf,
    pub editions: PathBuf,
    pub gdp: PathBuf,
}

impl CorpusPaths {
    /// Conventional file names inside `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        CorpusPaths {
            papers: dir.join("papers.jsonl"),
            institutions: dir.join("institutions.csv"),
            editions: dir.join("editions.csv"),
            gdp: dir.join("gdp.csv"),
        }
    }
}

/// A cleaned, indexed and immutable corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    papers: Vec<PaperRecord>,
    institutions: BTreeMap<InstitutionId, InstitutionRecord>,
    editions: BTreeMap<(ConferenceId, Year), ConferenceEdition>,
    gdp: GdpTable,
    conferences: BTreeSet<ConferenceId>,
    by_edition: BTreeMap<(ConferenceId, Year), Vec<usize>>,
    by_author: HashMap<AuthorId, Vec<usize>>,
    year_range: (Year, Year),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn malformed(file: &Path, line: usize, field: &str, message: impl Into<String>) -> CorpusError {
    CorpusError::Malformed {
        file: file.display().to_string(),
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

/// Read, clean and index the corpus described by `paths`.
pub fn load_corpus(paths: &CorpusPaths, config: &CleaningConfig) -> Result<(Corpus, LoadReport)> {
    let papers = read_papers(&paths.papers)?;
    let institutions = read_institutions(&paths.institutions)?;
    let editions = read_editions(&paths.editions)?;
    let gdp = read_gdp(&paths.gdp)?;
    Corpus::from_parts(papers, institutions, editions, gdp, config)
}

fn str_field(v: &Value, file: &Path, line: usize, field: &str) -> Result<String> {
    match v.get(field) {
        Some(Value::String(s)) if !s.is_empty() => Ok(s.clone()),
        Some(Value::String(_)) => Err(malformed(file, line, field, "empty string")),
        Some(other) => Err(malformed(file, line, field, format!("expected string, got {other}"))),
        None => Err(malformed(file, line, field, "missing")),
    }
}

fn parse_paper_line(v: &Value, file: &Path, line: usize) -> Result<PaperRecord> {
    if !v.is_object() {
        return Err(malformed(file, line, "<record>", "expected a JSON object"));
    }
    let paper_id = str_field(v, file, line, "paper_id")?;
    let conference_id = str_field(v, file, line, "conference_id")?;
    let year = v
        .get("year")
        .ok_or_else(|| malformed(file, line, "year", "missing"))?
        .as_i64()
        .and_then(|y| Year::try_from(y).ok())
        .ok_or_else(|| malformed(file, line, "year", "expected integer year"))?;
    let citation_count = match v.get("citation_count") {
        None | Some(Value::Null) => 0,
        Some(c) => c
            .as_u64()
            .ok_or_else(|| malformed(file, line, "citation_count", "expected non-negative integer"))?,
    };
    let authorships = match v.get("authorships") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                let author_id = str_field(item, file, line, "author_id")?;
                let institution_ids = match item.get("institution_ids") {
                    None | Some(Value::Null) => Vec::new(),
                    Some(Value::Array(ids)) => ids
                        .iter()
                        .map(|id| match id {
                            Value::String(s) if !s.is_empty() => Ok(s.clone()),
                            _ => Err(malformed(
                                file,
                                line,
                                "institution_ids",
                                "expected non-empty strings",
                            )),
                        })
                        .collect::<Result<Vec<_>>>()?,
                    Some(_) => {
                        return Err(malformed(file, line, "institution_ids", "expected array"))
                    }
                };
                out.push(Authorship {
                    author_id,
                    institution_ids,
                });
            }
            out
        }
        Some(_) => return Err(malformed(file, line, "authorships", "expected array")),
    };
    Ok(PaperRecord {
        paper_id,
        year,
        conference_id,
        citation_count,
        authorships,
    })
}

/// Parse the line-delimited papers file. Blank lines are skipped.
pub fn read_papers(path: &Path) -> Result<Vec<PaperRecord>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut papers = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line)
            .map_err(|e| malformed(path, lineno, "<record>", e.to_string()))?;
        papers.push(parse_paper_line(&v, path, lineno)?);
    }
    Ok(papers)
}

fn csv_records(path: &Path, expected: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => CorpusError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => malformed(path, 1, "<header>", format!("{other:?}")),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| malformed(path, 1, "<header>", e.to_string()))?
        .clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(malformed(
            path,
            1,
            "<header>",
            format!("expected `{}`, got `{}`", expected.join(","), got.join(",")),
        ));
    }
    let mut out = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let lineno = idx + 2;
        let rec = rec.map_err(|e| malformed(path, lineno, "<record>", e.to_string()))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        out.push((lineno, rec));
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, field: &str, raw: &str) -> Result<T> {
    raw.parse::<T>()
        .map_err(|_| malformed(path, line, field, format!("cannot parse `{raw}`")))
}

fn check_coords(path: &Path, line: usize, lat: f64, lon: f64) -> Result<()> {
    if !(-90.0..=90.0).contains(&lat) {
        return Err(malformed(path, line, "latitude", format!("{lat} outside [-90, 90]")));
    }
    if !(-180.0..=180.0).contains(&lon) {
        return Err(malformed(path, line, "longitude", format!("{lon} outside [-180, 180]")));
    }
    Ok(())
}

fn nonempty(path: &Path, line: usize, field: &str, raw: &str) -> Result<String> {
    if raw.is_empty() {
        Err(malformed(path, line, field, "empty"))
    } else {
        Ok(raw.to_string())
    }
}

pub fn read_institutions(path: &Path) -> Result<Vec<InstitutionRecord>> {
    let fields = ["institution_id", "latitude", "longitude", "country_code"];
    csv_records(path, &fields)?
        .into_iter()
        .map(|(line, rec)| {
            let latitude = parse_num(path, line, "latitude", &rec[1])?;
            let longitude = parse_num(path, line, "longitude", &rec[2])?;
            check_coords(path, line, latitude, longitude)?;
            Ok(InstitutionRecord {
                institution_id: nonempty(path, line, "institution_id", &rec[0])?,
                latitude,
                longitude,
                country_code: nonempty(path, line, "country_code", &rec[3])?,
            })
        })
        .collect()
}

pub fn read_editions(path: &Path) -> Result<Vec<ConferenceEdition>> {
    let fields = ["conference_id", "year", "latitude", "longitude"];
    csv_records(path, &fields)?
        .into_iter()
        .map(|(line, rec)| {
            let latitude = parse_num(path, line, "latitude", &rec[2])?;
            let longitude = parse_num(path, line, "longitude", &rec[3])?;
            check_coords(path, line, latitude, longitude)?;
            Ok(ConferenceEdition {
                conference_id: nonempty(path, line, "conference_id", &rec[0])?,
                year: parse_num(path, line, "year", &rec[1])?,
                latitude,
                longitude,
            })
        })
        .collect()
}

pub fn read_gdp(path: &Path) -> Result<GdpTable> {
    let fields = ["country_code", "year", "gdp_per_capita"];
    let mut table = GdpTable::new();
    for (line, rec) in csv_records(path, &fields)? {
        let value: f64 = parse_num(path, line, "gdp_per_capita", &rec[2])?;
        if !(value.is_finite() && value > 0.0) {
            return Err(malformed(path, line, "gdp_per_capita", "must be positive"));
        }
        let country = nonempty(path, line, "country_code", &rec[0])?;
        let year = parse_num(path, line, "year", &rec[1])?;
        table.insert(&country, year, value)?;
    }
    Ok(table)
}

/// Fill empty institution lists from the author's most recent strictly
/// earlier paper. `papers` must be sorted by (year, paper_id).
fn backfill(papers: &mut [PaperRecord], report: &mut LoadReport) {
    // author -> (year, institutions) of the latest known affiliation
    let mut latest: HashMap<AuthorId, (Year, Vec<InstitutionId>)> = HashMap::new();
    let mut start = 0;
    while start < papers.len() {
        let year = papers[start].year;
        let end = start + papers[start..].iter().take_while(|p| p.year == year).count();

        let mut seen_this_year: HashMap<AuthorId, Vec<InstitutionId>> = HashMap::new();
        for paper in &papers[start..end] {
            for a in &paper.authorships {
                if !a.institution_ids.is_empty() {
                    seen_this_year
                        .entry(a.author_id.clone())
                        .or_insert_with(|| a.institution_ids.clone());
                }
            }
        }

        for paper in &mut papers[start..end] {
            let mut touched = false;
            for a in &mut paper.authorships {
                if a.institution_ids.is_empty() {
                    if let Some((_, insts)) = latest.get(&a.author_id) {
                        a.institution_ids = insts.clone();
                        report.authorships_backfilled += 1;
                        touched = true;
                    }
                }
            }
            if touched {
                report.papers_backfilled += 1;
            }
        }

        for (author, insts) in seen_this_year {
            latest.insert(author, (year, insts));
        }
        start = end;
    }
}

fn dedup_institutions(
    records: Vec<InstitutionRecord>,
    report: &mut LoadReport,
) -> BTreeMap<InstitutionId, InstitutionRecord> {
    let mut out: BTreeMap<InstitutionId, InstitutionRecord> = BTreeMap::new();
    for rec in records {
        match out.get_mut(&rec.institution_id) {
            None => {
                out.insert(rec.institution_id.clone(), rec);
            }
            Some(existing) => {
                report.institutions_deduplicated += 1;
                // conflicting duplicates resolve to the smallest record so the
                // outcome does not depend on file order
                let key = |r: &InstitutionRecord| (r.latitude, r.longitude, r.country_code.clone());
                let (a, b) = (key(&rec), key(existing));
                let smaller = a
                    .0
                    .total_cmp(&b.0)
                    .then(a.1.total_cmp(&b.1))
                    .then(a.2.cmp(&b.2))
                    .is_lt();
                if smaller {
                    *existing = rec;
                }
            }
        }
    }
    out
}

impl Corpus {
    /// Clean and index raw records.
    pub fn from_parts(
        papers: Vec<PaperRecord>,
        institutions: Vec<InstitutionRecord>,
        editions: Vec<ConferenceEdition>,
        gdp: GdpTable,
        config: &CleaningConfig,
    ) -> Result<(Corpus, LoadReport)> {
        if let Some((lo, hi)) = config.year_range {
            if lo > hi {
                return Err(CorpusError::Config(format!("year range {lo}..{hi} is empty")));
            }
        }
        let mut report = LoadReport {
            papers_read: papers.len(),
            institutions_read: institutions.len(),
            editions: editions.len(),
            gdp_rows: gdp.len(),
            ..LoadReport::default()
        };

        let mut ids = BTreeSet::new();
        for p in &papers {
            if !ids.insert(p.paper_id.as_str()) {
                return Err(CorpusError::DuplicatePaper(p.paper_id.clone()));
            }
        }

        let mut papers: Vec<PaperRecord> = match config.year_range {
            Some((lo, hi)) => papers
                .into_iter()
                .filter(|p| (lo..=hi).contains(&p.year))
                .collect(),
            None => papers,
        };
        report.papers_out_of_range = report.papers_read - papers.len();

        papers.sort_by(|a, b| (a.year, &a.paper_id).cmp(&(b.year, &b.paper_id)));
        backfill(&mut papers, &mut report);
        let before = papers.len();
        papers.retain(PaperRecord::is_complete);
        report.papers_dropped = before - papers.len();
        report.papers_kept = papers.len();

        let institutions = dedup_institutions(institutions, &mut report);

        let mut edition_map = BTreeMap::new();
        for e in editions {
            let key = (e.conference_id.clone(), e.year);
            if edition_map.contains_key(&key) {
                return Err(CorpusError::DuplicateEdition {
                    conference_id: key.0,
                    year: key.1,
                });
            }
            edition_map.insert(key, e);
        }

        for p in &papers {
            if !edition_map.contains_key(&(p.conference_id.clone(), p.year)) {
                return Err(CorpusError::DanglingEdition {
                    paper_id: p.paper_id.clone(),
                    conference_id: p.conference_id.clone(),
                    year: p.year,
                });
            }
            for a in &p.authorships {
                for inst in &a.institution_ids {
                    if !institutions.contains_key(inst) {
                        return Err(CorpusError::DanglingInstitution {
                            paper_id: p.paper_id.clone(),
                            institution_id: inst.clone(),
                        });
                    }
                }
            }
        }

        papers.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
        let corpus = Corpus::index(papers, institutions, edition_map, gdp, config.year_range);
        Ok((corpus, report))
    }

    fn index(
        papers: Vec<PaperRecord>,
        institutions: BTreeMap<InstitutionId, InstitutionRecord>,
        editions: BTreeMap<(ConferenceId, Year), ConferenceEdition>,
        gdp: GdpTable,
        year_range: Option<(Year, Year)>,
    ) -> Corpus {
        let mut by_edition: BTreeMap<(ConferenceId, Year), Vec<usize>> = BTreeMap::new();
        let mut by_author: HashMap<AuthorId, Vec<usize>> = HashMap::new();
        let mut conferences: BTreeSet<ConferenceId> =
            editions.keys().map(|(c, _)| c.clone()).collect();
        for (i, p) in papers.iter().enumerate() {
            conferences.insert(p.conference_id.clone());
            by_edition
                .entry((p.conference_id.clone(), p.year))
                .or_default()
                .push(i);
            let mut seen = BTreeSet::new();
            for a in &p.authorships {
                // an author listed twice on one paper still has one paper
                if seen.insert(a.author_id.as_str()) {
                    by_author.entry(a.author_id.clone()).or_default().push(i);
                }
            }
        }
        let year_range = year_range.unwrap_or_else(|| {
            let years = papers
                .iter()
                .map(|p| p.year)
                .chain(editions.keys().map(|(_, y)| *y));
            let (lo, hi) = years.fold((Year::MAX, Year::MIN), |(lo, hi), y| (lo.min(y), hi.max(y)));
            if lo > hi {
                (0, 0)
            } else {
                (lo, hi)
            }
        });
        Corpus {
            papers,
            institutions,
            editions,
            gdp,
            conferences,
            by_edition,
            by_author,
            year_range,
        }
    }

    /// All papers, sorted by `paper_id`.
    pub fn papers(&self) -> &[PaperRecord] {
        &self.papers
    }

    pub fn institutions(&self) -> &BTreeMap<InstitutionId, InstitutionRecord> {
        &self.institutions
    }

    pub fn institution(&self, id: &str) -> Option<&InstitutionRecord> {
        self.institutions.get(id)
    }

    pub fn editions(&self) -> impl Iterator<Item = &ConferenceEdition> {
        self.editions.values()
    }

    pub fn edition(&self, conference_id: &str, year: Year) -> Option<&ConferenceEdition> {
        self.editions.get(&(conference_id.to_string(), year))
    }

    pub fn gdp(&self) -> &GdpTable {
        &self.gdp
    }

    pub fn conferences(&self) -> impl Iterator<Item = &str> {
        self.conferences.iter().map(String::as_str)
    }

    pub fn has_conference(&self, conference_id: &str) -> bool {
        self.conferences.contains(conference_id)
    }

    /// Inclusive (first, last) year covered by the corpus.
    pub fn year_range(&self) -> (Year, Year) {
        self.year_range
    }

    pub fn has_author(&self, author_id: &str) -> bool {
        self.by_author.contains_key(author_id)
    }

    /// Papers the author appears on, sorted by `paper_id`.
    pub fn papers_by_author<'a>(&'a self, author_id: &str) -> impl Iterator<Item = &'a PaperRecord> {
        self.by_author
            .get(author_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.papers[i])
    }

    /// Papers accepted at `conference_id` in `year`, sorted by `paper_id`.
    pub fn papers_of(&self, conference_id: &str, year: Year) -> Result<Vec<&PaperRecord>> {
        if !self.has_conference(conference_id) {
            return Err(CorpusError::UnknownConference(conference_id.to_string()));
        }
        Ok(self
            .by_edition
            .get(&(conference_id.to_string(), year))
            .map(|idx| idx.iter().map(|&i| &self.papers[i]).collect())
            .unwrap_or_default())
    }

    /// Write the corpus back out in the input formats, canonically ordered.
    pub fn write(&self, paths: &CorpusPaths) -> Result<()> {
        let path = paths.papers.as_path();
        let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
        for p in &self.papers {
            let line = serde_json::to_string(p).expect("paper serializes");
            writeln!(out, "{line}").map_err(io_err(path))?;
        }
        out.flush().map_err(io_err(path))?;

        write_csv(
            &paths.institutions,
            &["institution_id", "latitude", "longitude", "country_code"],
            self.institutions.values().map(|r| {
                vec![
                    r.institution_id.clone(),
                    r.latitude.to_string(),
                    r.longitude.to_string(),
                    r.country_code.clone(),
                ]
            }),
        )?;
        write_csv(
            &paths.editions,
            &["conference_id", "year", "latitude", "longitude"],
            self.editions.values().map(|e| {
                vec![
                    e.conference_id.clone(),
                    e.year.to_string(),
                    e.latitude.to_string(),
                    e.longitude.to_string(),
                ]
            }),
        )?;
        write_csv(
            &paths.gdp,
            &["country_code", "year", "gdp_per_capita"],
            self.gdp
                .iter()
                .map(|(c, y, v)| vec![c.to_string(), y.to_string(), v.to_string()]),
        )
    }
}

pub(crate) fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let to_err = |e: csv::Error| CorpusError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CoordinateKind {
    Venue,
    Institution,
}

impl CoordinateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CoordinateKind::Venue => "venue",
            CoordinateKind::Institution => "institution",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateRow {
    pub kind: CoordinateKind,
    pub id: String,
    pub latitude: f64,
    pub longitude: f64,
}

/// Venue location followed by every distinct institution with a paper at the
/// edition, sorted by id.
pub fn export_coordinates(
    corpus: &Corpus,
    conference_id: &str,
    year: Year,
) -> Result<Vec<CoordinateRow>> {
    let edition = corpus
        .edition(conference_id, year)
        .ok_or_else(|| CorpusError::UnknownEdition {
            conference_id: conference_id.to_string(),
            year,
        })?;
    let mut rows = vec![CoordinateRow {
        kind: CoordinateKind::Venue,
        id: conference_id.to_string(),
        latitude: edition.latitude,
        longitude: edition.longitude,
    }];
    let institutions: BTreeSet<&str> = corpus
        .papers_of(conference_id, year)?
        .into_iter()
        .flat_map(|p| p.authorships.iter())
        .flat_map(|a| a.institution_ids.iter().map(String::as_str))
        .collect();
    for id in institutions {
        let rec = &corpus.institutions[id];
        rows.push(CoordinateRow {
            kind: CoordinateKind::Institution,
            id: id.to_string(),
            latitude: rec.latitude,
            longitude: rec.longitude,
        });
    }
    Ok(rows)
}

pub fn write_coordinates_csv(rows: &[CoordinateRow], path: &Path) -> Result<()> {
    write_csv(
        path,
        &["kind", "id", "latitude", "longitude"],
        rows.iter().map(|r| {
            vec![
                r.kind.as_str().to_string(),
                r.id.clone(),
                r.latitude.to_string(),
                r.longitude.to_string(),
            ]
        }),
    )
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn insts() -> Vec<InstitutionRecord> {
        vec![
            institution("X", 40.0, -74.0, "US"),
            institution("Y", 51.5, -0.1, "GB"),
            institution("Z", 35.7, 139.7, "JP"),
        ]
    }

    fn build(papers: Vec<PaperRecord>) -> Result<(Corpus, LoadReport)> {
        Corpus::from_parts(
            papers,
            insts(),
            editions(&["KDD", "ICML"], 2000..=2015),
            GdpTable::new(),
            &CleaningConfig::default(),
        )
    }

    #[test]
    fn backfill_from_earlier_paper() {
        let (c, report) = build(vec![
            paper("p1", 2003, "KDD", 1, &[("a", &["X"])]),
            paper("p2", 2005, "KDD", 1, &[("a", &[])]),
        ])
        .unwrap();
        assert_eq!(report.papers_kept, 2);
        assert_eq!(report.authorships_backfilled, 1);
        let p2 = c.papers().iter().find(|p| p.paper_id == "p2").unwrap();
        assert_eq!(p2.authorships[0].institution_ids, vec!["X".to_string()]);
    }

    #[test]
    fn backfill_never_reads_same_or_later_year() {
        let (c, report) = build(vec![
            paper("p1", 2005, "KDD", 1, &[("a", &["X"])]),
            paper("p2", 2005, "KDD", 1, &[("a", &[])]),
            paper("p3", 2006, "KDD", 1, &[("b", &[])]),
            paper("p4", 2007, "KDD", 1, &[("b", &["Y"])]),
        ])
        .unwrap();
        assert_eq!(report.papers_dropped, 2);
        let ids: Vec<_> = c.papers().iter().map(|p| p.paper_id.as_str()).collect();
        assert_eq!(ids, ["p1", "p4"]);
    }

    #[test]
    fn backfill_picks_most_recent_year_then_smallest_id() {
        let (c, _) = build(vec![
            paper("p1", 2001, "KDD", 1, &[("a", &["Z"])]),
            paper("p3", 2003, "KDD", 1, &[("a", &["Y"])]),
            paper("p2", 2003, "ICML", 1, &[("a", &["X"])]),
            paper("p9", 2004, "KDD", 1, &[("a", &[])]),
        ])
        .unwrap();
        let p9 = c.papers().iter().find(|p| p.paper_id == "p9").unwrap();
        assert_eq!(p9.authorships[0].institution_ids, vec!["X".to_string()]);
    }

    #[test]
    fn unresolvable_paper_is_dropped() {
        let (c, report) = build(vec![
            paper("p1", 2003, "KDD", 1, &[("a", &["X"])]),
            paper("p2", 2003, "KDD", 1, &[("b", &["Y"]), ("c", &[])]),
            paper("p3", 2004, "KDD", 1, &[("a", &["Z"])]),
        ])
        .unwrap();
        assert_eq!(report.papers_kept, 2);
        assert_eq!(report.papers_dropped, 1);
        assert_eq!(c.papers().len(), 2);
    }

    #[test]
    fn clean_corpus_is_unchanged() {
        let input = vec![
            paper("p1", 2003, "KDD", 1, &[("a", &["X"])]),
            paper("p2", 2004, "ICML", 7, &[("b", &["Y", "Z"])]),
        ];
        let (c, report) = build(input.clone()).unwrap();
        assert_eq!(c.papers(), input.as_slice());
        assert_eq!(report.papers_dropped, 0);
        assert_eq!(report.authorships_backfilled, 0);
    }

    #[test]
    fn dangling_and_duplicate_references_error() {
        let err = build(vec![paper("p1", 2003, "KDD", 1, &[("a", &["Q"])])]).unwrap_err();
        assert!(matches!(err, CorpusError::DanglingInstitution { .. }));
        let err = build(vec![paper("p1", 2003, "NIPS", 1, &[("a", &["X"])])]).unwrap_err();
        assert!(matches!(err, CorpusError::DanglingEdition { .. }));
        let mut eds = editions(&["KDD"], 2000..=2001);
        eds.push(edition("KDD", 2001, 0.0, 0.0));
        let err = Corpus::from_parts(vec![], insts(), eds, GdpTable::new(), &CleaningConfig::default())
            .unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateEdition { .. }));
    }

    #[test]
    fn duplicate_institutions_collapse_independent_of_order() {
        let a = institution("X", 40.0, -74.0, "US");
        let b = institution("X", 41.0, -74.0, "US");
        let run = |recs: Vec<InstitutionRecord>| {
            Corpus::from_parts(vec![], recs, vec![], GdpTable::new(), &CleaningConfig::default())
                .unwrap()
        };
        let (c1, r1) = run(vec![a.clone(), b.clone()]);
        let (c2, _) = run(vec![b, a.clone()]);
        assert_eq!(r1.institutions_deduplicated, 1);
        assert_eq!(c1.institutions().len(), 1);
        assert_eq!(c1.institution("X"), Some(&a));
        assert_eq!(c1, c2);
    }

    #[test]
    fn year_range_filters() {
        let (c, report) = Corpus::from_parts(
            vec![
                paper("p1", 1999, "KDD", 1, &[("a", &["X"])]),
                paper("p2", 2003, "KDD", 1, &[("a", &["X"])]),
            ],
            insts(),
            editions(&["KDD"], 1999..=2015),
            GdpTable::new(),
            &CleaningConfig {
                year_range: Some((2000, 2015)),
            },
        )
        .unwrap();
        assert_eq!(report.papers_out_of_range, 1);
        assert_eq!(c.papers().len(), 1);
        assert_eq!(c.year_range(), (2000, 2015));
    }

    #[test]
    fn papers_of_filters_and_sorts() {
        let (c, _) = build(vec![
            paper("k5", 2013, "KDD", 1, &[("a", &["X"])]),
            paper("k1", 2013, "KDD", 1, &[("a", &["X"])]),
            paper("k3", 2013, "KDD", 1, &[("a", &["X"])]),
            paper("k2", 2013, "KDD", 1, &[("a", &["X"])]),
            paper("k4", 2013, "KDD", 1, &[("a", &["X"])]),
            paper("i1", 2013, "ICML", 1, &[("a", &["X"])]),
            paper("k6", 2012, "KDD", 1, &[("a", &["X"])]),
        ])
        .unwrap();
        let ids: Vec<_> = c
            .papers_of("KDD", 2013)
            .unwrap()
            .iter()
            .map(|p| p.paper_id.as_str())
            .collect();
        assert_eq!(ids, ["k1", "k2", "k3", "k4", "k5"]);
        assert!(c.papers_of("KDD", 2001).unwrap().is_empty());
        assert_eq!(c.papers_of("ICML", 2013).unwrap().len(), 1);
        assert!(matches!(c.papers_of("SIGIR", 2013), Err(CorpusError::UnknownConference(_))));
    }

    #[test]
    fn coordinates_list_venue_and_distinct_institutions() {
        let (c, _) = build(vec![
            paper("p1", 2013, "KDD", 1, &[("a", &["X"]), ("b", &["Y"])]),
            paper("p2", 2013, "KDD", 1, &[("c", &["Z", "X"])]),
        ])
        .unwrap();
        let rows = export_coordinates(&c, "KDD", 2013).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].kind, CoordinateKind::Venue);
        let ids: Vec<_> = rows[1..].iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["X", "Y", "Z"]);
        assert_eq!(export_coordinates(&c, "KDD", 2002).unwrap().len(), 1);
        assert!(export_coordinates(&c, "KDD", 1980).is_err());
    }

    #[test]
    fn malformed_line_reports_position_and_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("papers.jsonl");
        std::fs::write(
            &path,
            "{\"paper_id\":\"p1\",\"year\":2001,\"conference_id\":\"KDD\",\"authorships\":[]}\n\
             {\"paper_id\":\"p2\",\"year\":\"x\",\"conference_id\":\"KDD\"}\n",
        )
        .unwrap();
        match read_papers(&path).unwrap_err() {
            CorpusError::Malformed { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field, "year");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn missing_citation_count_is_zero() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("papers.jsonl");
        std::fs::write(
            &path,
            "{\"paper_id\":\"p1\",\"year\":2001,\"conference_id\":\"KDD\",\"authorships\":[{\"author_id\":\"a\",\"institution_ids\":[\"X\"]}]}\n",
        )
        .unwrap();
        let papers = read_papers(&path).unwrap();
        assert_eq!(papers[0].citation_count, 0);
    }
}
