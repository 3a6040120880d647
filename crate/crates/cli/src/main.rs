use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use instimpact::boost::{train_dataset, BoostParams, Learner};
use instimpact::corpus::{export_coordinates, write_coordinates_csv, CorpusPaths, Year};
use instimpact::featureset::{Dataset, FeatureBuilder, FeatureGroup, Split};
use instimpact::rankeval::{evaluate_against, evaluate_model};
use instimpact::select::{rank_features, top_count};
use instimpact::synth::generate_synthetic;
use instimpact::Model;
use instimpact_cli::{
    build_datasets, compute_cells, load, resolve_conferences, run_experiment, CliError,
    ExperimentConfig, Result, Variant,
};

#[derive(Parser)]
#[command(name = "instimpact", version, about = "Forecast institution impact at conferences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the corpus and print cleaning statistics.
    Ingest(Common),
    /// Write train and test dataset TSVs per conference.
    Features(Common),
    /// Train one model and print its feature importance.
    Train {
        #[command(flatten)]
        common: Common,
        /// Train from a dataset TSV instead of building it from the corpus.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Run the top-p% feature sweep and write importance tables.
    Sweep(Common),
    /// Score a saved model on a test set.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// Test dataset TSV; labels are the ground truth.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Full pipeline: features, training, sweep, evaluation and reports.
    Run(Common),
    /// Generate a synthetic corpus.
    Synth(Common),
    /// Write venue and institution coordinates for one edition.
    ExportCoords {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        year: Year,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict to these conferences (repeatable).
    #[arg(long)]
    conference: Vec<String>,
    /// Restrict to these feature percentages (repeatable).
    #[arg(long)]
    percent: Vec<u32>,
    /// Only the variant without relevance features.
    #[arg(long)]
    no_relevance: bool,
    #[arg(long)]
    learner: Option<Learner>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            c.output_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if !self.conference.is_empty() {
            c.conferences = self.conference.clone();
        }
        if !self.percent.is_empty() {
            c.percents = self.percent.clone();
        }
        if self.no_relevance {
            c.variants = vec![Variant::WithoutRelevance];
        }
        if let Some(l) = self.learner {
            c.learners = vec![l];
        }
        Ok(c)
    }

    fn validated(&self) -> Result<ExperimentConfig> {
        let c = self.config()?;
        c.validate()?;
        Ok(c)
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

fn single_conference(config: &ExperimentConfig, conferences: &[String]) -> Result<String> {
    match conferences {
        [one] => Ok(one.clone()),
        _ if config.conferences.len() == 1 => Ok(config.conferences[0].clone()),
        _ => Err(CliError::Config("`conference`: choose exactly one with --conference".into())),
    }
}

fn variant_of(config: &ExperimentConfig) -> Variant {
    config.variants_sorted()[0]
}

fn apply_variant(ds: Dataset, variant: Variant) -> Result<Dataset> {
    Ok(match variant {
        Variant::WithRelevance => ds,
        Variant::WithoutRelevance => ds.drop_group(FeatureGroup::Relevance)?,
    })
}

fn ingest(common: &Common) -> Result<()> {
    let config = common.config()?;
    let (corpus, report) = load(&config)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?);
    let (first, last) = corpus.year_range();
    println!("years\t{first}-{last}");
    println!("conferences\t{}", corpus.conferences().collect::<Vec<_>>().join(","));
    println!("institutions\t{}", corpus.institutions().len());
    if common.out.is_some() {
        create_dir(&config.output_dir)?;
        let path = config.output_dir.join("relevance.csv");
        FeatureBuilder::new(&corpus, config.metrics()).ledger().write_csv(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn features(common: &Common) -> Result<()> {
    let config = common.validated()?;
    let (corpus, _) = load(&config)?;
    let builder = FeatureBuilder::new(&corpus, config.metrics());
    let dir = config.output_dir.join("datasets");
    create_dir(&dir)?;
    for conf in resolve_conferences(&config, &corpus)? {
        let (train, test) = build_datasets(&builder, &config, &conf)?;
        for (ds, split) in [(&train, "train"), (&test, "test")] {
            let path = dir.join(format!("{conf}_{split}.tsv"));
            ds.write_tsv(&path)?;
            println!("wrote {} ({} rows)", path.display(), ds.len());
        }
    }
    Ok(())
}

fn learner_of(config: &ExperimentConfig) -> Learner {
    config.learners_sorted()[0]
}

fn train(common: &Common, dataset: Option<&Path>) -> Result<()> {
    let config = common.validated()?;
    let learner = learner_of(&config);
    let variant = variant_of(&config);
    let params = BoostParams { learner, ..config.boost };
    let (conf, train) = match dataset {
        Some(path) => {
            let ds = Dataset::read_tsv(path, Split::Train)?;
            let conf = ds.rows.first().map(|r| r.conference_id.clone()).unwrap_or_default();
            (conf, ds)
        }
        None => {
            let (corpus, _) = load(&config)?;
            let confs = resolve_conferences(&config, &corpus)?;
            let conf = single_conference(&config, &confs)?;
            let builder = FeatureBuilder::new(&corpus, config.metrics());
            (conf.clone(), build_datasets(&builder, &config, &conf)?.0)
        }
    };
    let train = apply_variant(train, variant)?;
    let mut model: Model = train_dataset(&train, &params)?;
    let percent = match common.percent.as_slice() {
        [p] => *p,
        _ => 100,
    };
    let mut data = train;
    if percent < 100 {
        let ranking = rank_features(&model, &data.schema)?;
        data = data.select(&ranking.top(top_count(percent, data.schema.len())))?;
        model = train_dataset(&data, &params)?;
    }
    let report = rank_features(&model, &data.schema)?;
    for e in &report.entries {
        println!("{}\t{}\t{}\t{:.4}", e.name, e.group, e.count, e.score);
    }
    let dir = config.output_dir.join("models");
    create_dir(&dir)?;
    let path = dir.join(format!("{conf}_{learner}_{variant}_p{percent:03}.model"));
    model.save(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn sweep(common: &Common) -> Result<()> {
    let config = common.validated()?;
    let (corpus, _) = load(&config)?;
    let conferences = resolve_conferences(&config, &corpus)?;
    let cells = compute_cells(&config, &corpus, &conferences)?;
    let dir = config.output_dir.join("importance");
    create_dir(&dir)?;
    for c in &cells {
        let stem = c.stem();
        let groups = dir.join(format!("{stem}_groups.tsv"));
        c.sweep.write_tables(&groups, &dir.join(format!("{stem}_features.tsv")))?;
        for step in &c.sweep.steps {
            let v = step.ranking.ndcg.get(&config.ndcg_n).copied().unwrap_or(0.0);
            println!("{stem}\t{}%\tndcg@{}\t{v:.4}", step.percent, config.ndcg_n);
        }
    }
    Ok(())
}

fn eval(common: &Common, model_path: &Path, dataset: Option<&Path>) -> Result<()> {
    let config = common.validated()?;
    let model = Model::load(model_path)?;
    let cutoffs = [config.ndcg_n];
    let report = match dataset {
        Some(path) => {
            let test = Dataset::read_tsv(path, Split::Test)?.select(&model.feature_names)?;
            evaluate_model(&model, &test, &cutoffs)?
        }
        None => {
            let (corpus, _) = load(&config)?;
            let confs = resolve_conferences(&config, &corpus)?;
            let conf = single_conference(&config, &confs)?;
            let builder = FeatureBuilder::new(&corpus, config.metrics());
            let test = build_datasets(&builder, &config, &conf)?.1.select(&model.feature_names)?;
            let empty = Default::default();
            let truth = builder.ledger().slice(&conf, config.test_year).unwrap_or(&empty);
            evaluate_against(&model, &test, truth, &cutoffs)?
        }
    };
    for (rank, e) in report.entries.iter().enumerate() {
        println!("{}\t{}\t{:.6}\t{:.6}", rank + 1, e.institution_id, e.predicted, e.truth);
    }
    let v = report.ndcg.get(&config.ndcg_n).copied().unwrap_or(0.0);
    println!(
        "{}\t{}\tndcg@{}\t{v:.4}{}",
        report.conference_id,
        report.target_year,
        config.ndcg_n,
        if report.degenerate { "\tdegenerate" } else { "" }
    );
    Ok(())
}

fn run(common: &Common) -> Result<()> {
    let config = common.config()?;
    let outcome = run_experiment(&config)?;
    print!("{}", instimpact_cli::ndcg_report(&config, &outcome.cells));
    eprintln!("wrote {} files under {}", outcome.files.len(), config.output_dir.display());
    Ok(())
}

fn synth(common: &Common) -> Result<()> {
    let config = common.config()?;
    let spec = config.synthetic_spec();
    let dir = match (&common.out, &config.corpus.dir) {
        (Some(out), _) => out.clone(),
        (None, Some(dir)) => dir.clone(),
        (None, None) => config.output_dir.clone(),
    };
    create_dir(&dir)?;
    let generated = generate_synthetic(&spec)?;
    generated.write(&CorpusPaths::in_dir(&dir))?;
    println!(
        "wrote {} papers, {} institutions, {} conferences to {}",
        generated.papers.len(),
        generated.institutions.len(),
        spec.conferences,
        dir.display()
    );
    Ok(())
}

fn export_coords(common: &Common, year: Year) -> Result<()> {
    let config = common.config()?;
    let (corpus, _) = load(&config)?;
    let confs = resolve_conferences(&config, &corpus)?;
    let conf = single_conference(&config, &confs)?;
    let rows = export_coordinates(&corpus, &conf, year)?;
    create_dir(&config.output_dir)?;
    let path = config.output_dir.join(format!("coords_{conf}_{year}.csv"));
    write_coordinates_csv(&rows, &path)?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(c) => ingest(&c),
        Command::Features(c) => features(&c),
        Command::Train { common, dataset } => train(&common, dataset.as_deref()),
        Command::Sweep(c) => sweep(&c),
        Command::Eval { common, model, dataset } => eval(&common, &model, dataset.as_deref()),
        Command::Run(c) => run(&c),
        Command::Synth(c) => synth(&c),
        Command::ExportCoords { common, year } => export_coords(&common, year),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
