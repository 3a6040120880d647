//! Synthetic corpora with a planted author-driven acceptance signal.
//!
//! Each author has a latent quality that drives the citations of their
//! papers. Every year, each conference accepts a fixed number of papers whose
//! lead authors are drawn in proportion to `(1 + AIF)^author_weight`, where
//! AIF is the author's realised mean citations over the previous four years.
//! Institutions therefore gain credit through the recent citation record of
//! their authors. Authors occasionally move between institutions, venues
//! rotate through a fixed city list, and GDP grows smoothly per country.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Poisson, WeightedIndex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    Authorship, CleaningConfig, ConferenceEdition, Corpus, CorpusError, CorpusPaths, GdpTable,
    InstitutionRecord, LoadReport, PaperRecord, Year,
};
use crate::scimetrics::WINDOW;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("impossible synthetic spec: {0}")]
    Invalid(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub institutions: usize,
    pub authors: usize,
    pub conferences: usize,
    /// Accepted papers per conference per year.
    pub papers_per_year: usize,
    pub first_year: Year,
    pub years: usize,
    /// Exponent on `(1 + AIF)` in the acceptance propensity.
    pub author_weight: f64,
    /// Standard deviation of log-normal noise on propensities and citations.
    pub noise: f64,
    /// Yearly probability that an author changes institution.
    pub mobility: f64,
    /// Standard deviation of the yearly random walk on log quality.
    pub quality_drift: f64,
    /// Standard deviation of the shared log-quality effect of an institution.
    pub institution_quality_sd: f64,
    /// Zipf exponent of institution sizes; 0 gives equal sizes.
    pub size_skew: f64,
    /// Probability that an author also publishes at a second conference.
    pub cross_conference: f64,
    /// Probability that a co-author comes from outside the lead's institution.
    pub cross_institution: f64,
    /// Probability that an authorship lists a second institution.
    pub multi_affiliation: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            institutions: 60,
            authors: 1200,
            conferences: 8,
            papers_per_year: 200,
            first_year: 2000,
            years: 16,
            author_weight: 1.0,
            noise: 0.1,
            mobility: 0.05,
            quality_drift: 0.0,
            institution_quality_sd: 0.0,
            size_skew: 0.8,
            cross_conference: 0.3,
            cross_institution: 0.1,
            multi_affiliation: 0.05,
            seed: 42,
        }
    }
}

impl SyntheticSpec {
    pub fn last_year(&self) -> Year {
        self.first_year + self.years as Year - 1
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Invalid(m.to_string()));
        if self.institutions == 0 || self.conferences == 0 || self.years == 0 {
            return bad("institutions, conferences and years must be at least 1");
        }
        if self.authors == 0 && self.papers_per_year > 0 {
            return bad("papers need at least one author");
        }
        if self.authors < self.conferences && self.papers_per_year > 0 {
            return bad("every conference needs at least one author");
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad("noise must be finite and >= 0");
        }
        for (name, v) in [
            ("institution_quality_sd", self.institution_quality_sd),
            ("size_skew", self.size_skew),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SynthError::Invalid(format!("{name} must be finite and >= 0")));
            }
        }
        for (name, v) in [
            ("cross_conference", self.cross_conference),
            ("cross_institution", self.cross_institution),
            ("multi_affiliation", self.multi_affiliation),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SynthError::Invalid(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.quality_drift >= 0.0 && self.quality_drift.is_finite()) {
            return bad("quality_drift must be finite and >= 0");
        }
        if !(self.author_weight.is_finite()) {
            return bad("author_weight must be finite");
        }
        if !(0.0..=1.0).contains(&self.mobility) {
            return bad("mobility must lie in [0, 1]");
        }
        Ok(())
    }
}

const CONFERENCES: [&str; 8] = ["FSE", "ICML", "KDD", "MM", "MobiCom", "SIGCOMM", "SIGIR", "SIGMOD"];

// (latitude, longitude, country, GDP per capita in the first year)
const CITIES: [(f64, f64, &str, f64); 16] = [
    (37.77, -122.42, "US", 36000.0),
    (40.71, -74.01, "US", 36000.0),
    (47.61, -122.33, "US", 36000.0),
    (42.36, -71.06, "US", 36000.0),
    (43.65, -79.38, "CA", 24000.0),
    (51.51, -0.13, "GB", 28000.0),
    (48.86, 2.35, "FR", 22000.0),
    (52.52, 13.40, "DE", 23000.0),
    (47.37, 8.54, "CH", 38000.0),
    (39.90, 116.40, "CN", 950.0),
    (31.23, 121.47, "CN", 950.0),
    (35.68, 139.69, "JP", 39000.0),
    (37.57, 126.98, "KR", 12000.0),
    (1.35, 103.82, "SG", 23000.0),
    (-33.87, 151.21, "AU", 21000.0),
    (12.97, 77.59, "IN", 440.0),
];

struct Author {
    id: String,
    quality: f64,
    institution: usize,
    conferences: Vec<usize>,
    // (year, citations) of every paper so far
    history: Vec<(Year, u64)>,
}

impl Author {
    fn recent_aif(&self, year: Year, cite_scale: f64) -> f64 {
        let lo = year - WINDOW as Year;
        let (n, total) = self
            .history
            .iter()
            .filter(|(y, _)| *y >= lo && *y < year)
            .fold((0u64, 0u64), |(n, t), (_, c)| (n + 1, t + c));
        if n == 0 {
            // no record yet: expected citations under the author's quality
            cite_scale * self.quality
        } else {
            total as f64 / n as f64
        }
    }
}

/// Raw generated records, ready to be written as corpus files.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub papers: Vec<PaperRecord>,
    pub institutions: Vec<InstitutionRecord>,
    pub editions: Vec<ConferenceEdition>,
    pub gdp: GdpTable,
    pub spec: SyntheticSpec,
}

impl SyntheticCorpus {
    pub fn conference_ids(&self) -> Vec<String> {
        (0..self.spec.conferences).map(conference_name).collect()
    }

    /// Clean and index through the regular loader path.
    pub fn to_corpus(&self) -> Result<(Corpus, LoadReport), SynthError> {
        Ok(Corpus::from_parts(
            self.papers.clone(),
            self.institutions.clone(),
            self.editions.clone(),
            self.gdp.clone(),
            &CleaningConfig {
                year_range: Some((self.spec.first_year, self.spec.last_year())),
            },
        )?)
    }

    pub fn write(&self, paths: &CorpusPaths) -> Result<(), SynthError> {
        let (corpus, _) = self.to_corpus()?;
        corpus.write(paths)?;
        Ok(())
    }
}

fn conference_name(i: usize) -> String {
    CONFERENCES
        .get(i)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("CONF{:02}", i + 1))
}

const CITE_SCALE: f64 = 8.0;

/// Systematic sampling: `n` draws in proportion to `weights` from a single
/// uniform offset `u` in [0, 1), so each index is drawn either the floor or
/// the ceiling of its expected count. Returns indices in ascending order.
fn systematic_sample(weights: &[f64], n: usize, u: f64) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let step = total / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    let mut upper = weights.first().copied().unwrap_or(0.0);
    for k in 0..n {
        let pos = (u + k as f64) * step;
        while pos >= upper && i + 1 < weights.len() {
            i += 1;
            upper += weights[i];
        }
        out.push(i);
    }
    out
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticCorpus, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut institutions = Vec::with_capacity(spec.institutions);
    for i in 0..spec.institutions {
        let (lat, lon, country, _) = CITIES[rng.gen_range(0..CITIES.len())];
        institutions.push(InstitutionRecord {
            institution_id: format!("I{:03}", i + 1),
            latitude: (lat + rng.gen_range(-1.0..1.0)).clamp(-90.0, 90.0),
            longitude: (lon + rng.gen_range(-1.0..1.0)).clamp(-180.0, 180.0),
            country_code: country.to_string(),
        });
    }
    // heavy-tailed institution sizes
    let attract: Vec<f64> = (0..spec.institutions)
        .map(|i| 1.0 / ((i + 1) as f64).powf(spec.size_skew))
        .collect();
    let pick_institution = WeightedIndex::new(&attract).expect("positive weights");

    let inst_quality: Vec<f64> = (0..spec.institutions)
        .map(|_| (spec.institution_quality_sd * normal.sample(&mut rng)).exp())
        .collect();
    let quality_dist = LogNormal::new(0.0, 0.6).expect("valid lognormal");
    let mut authors: Vec<Author> = (0..spec.authors)
        .map(|a| {
            let primary = a % spec.conferences;
            let mut conferences = vec![primary];
            if spec.conferences > 1 && rng.gen_bool(spec.cross_conference) {
                let other = (primary + rng.gen_range(1..spec.conferences)) % spec.conferences;
                conferences.push(other);
            }
            let institution = pick_institution.sample(&mut rng);
            Author {
                id: format!("A{:04}", a + 1),
                quality: quality_dist.sample(&mut rng) * inst_quality[institution],
                institution,
                conferences,
                history: Vec::new(),
            }
        })
        .collect();

    let mut editions = Vec::new();
    for c in 0..spec.conferences {
        for t in 0..spec.years {
            let (lat, lon, _, _) = CITIES[(c * 5 + t * 3) % CITIES.len()];
            editions.push(ConferenceEdition {
                conference_id: conference_name(c),
                year: spec.first_year + t as Year,
                latitude: lat,
                longitude: lon,
            });
        }
    }

    let mut gdp = GdpTable::new();
    let mut countries: BTreeMap<&str, f64> = BTreeMap::new();
    for (_, _, country, base) in CITIES {
        countries.insert(country, base);
    }
    for (country, base) in &countries {
        let growth: f64 = 1.0 + rng.gen_range(0.0..0.08);
        for t in 0..spec.years {
            let value = base * growth.powi(t as i32) * (1.0 + 0.01 * normal.sample(&mut rng));
            gdp.insert(country, spec.first_year + t as Year, value.max(1.0))?;
        }
    }

    let mut papers = Vec::new();
    for t in 0..spec.years {
        let year = spec.first_year + t as Year;
        for a in authors.iter_mut() {
            if t > 0 {
                if rng.gen_bool(spec.mobility) {
                    a.institution = pick_institution.sample(&mut rng);
                }
                if spec.quality_drift > 0.0 {
                    a.quality *= (spec.quality_drift * normal.sample(&mut rng)).exp();
                }
            }
        }
        let mut new_history: Vec<(usize, u64)> = Vec::new();
        for c in 0..spec.conferences {
            let pool: Vec<usize> = (0..authors.len())
                .filter(|&a| authors[a].conferences.contains(&c))
                .collect();
            if pool.is_empty() || spec.papers_per_year == 0 {
                continue;
            }
            let propensity: Vec<f64> = pool
                .iter()
                .map(|&a| {
                    let aif = authors[a].recent_aif(year, CITE_SCALE);
                    (1.0 + aif).powf(spec.author_weight) * (spec.noise * normal.sample(&mut rng)).exp()
                })
                .collect();
            let pick_author = WeightedIndex::new(&propensity).expect("positive propensities");
            let leads = systematic_sample(&propensity, spec.papers_per_year, rng.gen());
            for (k, lead) in leads.into_iter().enumerate() {
                let lead = pool[lead];
                let colleagues: Vec<usize> = pool
                    .iter()
                    .copied()
                    .filter(|&a| a != lead && authors[a].institution == authors[lead].institution)
                    .collect();
                let mut team = vec![lead];
                let extra = rng.gen_range(0..=2);
                for _ in 0..extra {
                    let co = if colleagues.is_empty() || rng.gen_bool(spec.cross_institution) {
                        pool[pick_author.sample(&mut rng)]
                    } else {
                        colleagues[rng.gen_range(0..colleagues.len())]
                    };
                    if !team.contains(&co) {
                        team.push(co);
                    }
                }
                let mean_quality =
                    team.iter().map(|&a| authors[a].quality).sum::<f64>() / team.len() as f64;
                let rate = CITE_SCALE * mean_quality * (spec.noise * normal.sample(&mut rng)).exp();
                let citations = Poisson::new(rate.max(1e-6))
                    .expect("positive rate")
                    .sample(&mut rng) as u64;
                let authorships = team
                    .iter()
                    .map(|&a| {
                        let mut insts = vec![authors[a].institution];
                        if rng.gen_bool(spec.multi_affiliation) {
                            let other = rng.gen_range(0..spec.institutions);
                            if other != insts[0] {
                                insts.push(other);
                            }
                        }
                        Authorship {
                            author_id: authors[a].id.clone(),
                            institution_ids: insts
                                .into_iter()
                                .map(|i| institutions[i].institution_id.clone())
                                .collect(),
                        }
                    })
                    .collect();
                for &a in &team {
                    new_history.push((a, citations));
                }
                papers.push(PaperRecord {
                    paper_id: format!("{}-{year}-{:04}", conference_name(c), k + 1),
                    year,
                    conference_id: conference_name(c),
                    citation_count: citations,
                    authorships,
                });
            }
        }
        for (a, cites) in new_history {
            authors[a].history.push((year, cites));
        }
    }
    // file order should not matter to the loader; shuffle to exercise that
    papers.shuffle(&mut rng);

    Ok(SyntheticCorpus {
        papers,
        institutions,
        editions,
        gdp,
        spec: spec.clone(),
    })
}
