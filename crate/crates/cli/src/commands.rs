use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use textbench::error::Error;
use textbench::harness::report::{comparison_table_csv, read_result, table2_text, table3_text, write_outputs, Comparisons};
use textbench::harness::{
    calibrate_separation, compare_models, fit_model, run_config, synth_corpus, tune_models, write_tuning_outputs,
    CompareMetric, ExperimentConfig, LdaSpec, LsaSpec, MnbSpec, ModelConfig, ModelSpec, NbsvmSpec,
    NnSpec, RfSpec, SvmSpec, SynthSection, SynthSpec, TunedModel,
};
use textbench::io::{
    corpus_to_jsonl, dtm_to_text, labels_to_text, load_model, read_corpus, read_dtm, read_idf, read_labels,
    read_text, save_model,
};
use textbench::models::Scorer;
use textbench::textprep::{
    binarize, build_matrix, build_vocabulary, default_stopwords, preprocess, NgramOrder, Stopwords, TfidfTransform,
    Vocabulary,
};

use crate::{
    Command, CompareArgs, ConfigArgs, DtmArgs, Hyper, MetricArg, ModelKind, PredictArgs, PreprocessArgs, ReportArgs,
    SynthArgs, TrainArgs, WeightingArg,
};

#[derive(Debug)]
pub enum CliError {
    /// Flags that parse but do not fit together.
    Usage(String),
    Data(Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Data(e) => e.fmt(f),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Preprocess(a) => preprocess_cmd(a),
        Command::Dtm(a) => dtm(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Tune(a) => tune(a),
        Command::Synth(a) => synth(a),
        Command::Experiment(a) => experiment(a),
        Command::Compare(a) => compare(a),
        Command::Report(a) => report(a),
    }
}

/// Writes to `out`, or to standard output without one.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                // the reader went away, as with `| head`
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(|e| CliError::Data(Error::Io(e))),
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(Error::file(dir))?;
    }
    fs::write(path, text).map_err(Error::file(path))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn stopwords(path: Option<&Path>) -> Result<Stopwords> {
    Ok(match path {
        Some(p) => Stopwords::parse(&read_text(p)?),
        None => default_stopwords().clone(),
    })
}

fn preprocess_cmd(a: PreprocessArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Line<'a> {
        id: &'a str,
        tokens: Vec<String>,
    }
    let corpus = read_corpus(&a.corpus)?;
    let stop = stopwords(a.stopwords.as_deref())?;
    let mut out = String::new();
    for d in &corpus {
        let line = Line { id: &d.id, tokens: preprocess(&d.text, &stop) };
        out.push_str(&serde_json::to_string(&line).map_err(Error::from)?);
        out.push('\n');
    }
    emit(a.out.as_deref(), &out)
}

fn dtm(a: DtmArgs) -> Result<()> {
    let tfidf = matches!(a.weighting, WeightingArg::Tfidf);
    if !tfidf && (a.idf.is_some() || a.idf_out.is_some()) {
        return Err(usage("--idf and --idf-out apply only to --weighting tfidf"));
    }
    let corpus = read_corpus(&a.corpus)?;
    let stop = stopwords(a.stopwords.as_deref())?;
    let vocab = match &a.vocab {
        Some(p) => {
            let v = Vocabulary::parse(&read_text(p)?, &p.display().to_string())?;
            if a.ngrams.is_some_and(|n| usize::from(n) != v.n_max().as_usize()) {
                return Err(usage(format!("--ngrams disagrees with the order of {}", p.display())));
            }
            v
        }
        None => {
            let order = NgramOrder::try_from(usize::from(a.ngrams.unwrap_or(2)))?;
            build_vocabulary(&corpus, &stop, order, a.min_df)?
        }
    };
    let counts = build_matrix(&corpus, &stop, &vocab);
    let m = match a.weighting {
        WeightingArg::Count => counts,
        WeightingArg::Binary => binarize(&counts),
        WeightingArg::Tfidf => {
            let t = match &a.idf {
                Some(p) => read_idf(p)?,
                None => TfidfTransform::fit(&counts)?,
            };
            if let Some(p) = &a.idf_out {
                write_file(p, &serde_json::to_string(&t).map_err(Error::from)?)?;
            }
            t.apply(&counts)?
        }
    };
    log::info!("{} documents, {} terms", m.n_docs(), m.n_features());
    if let Some(p) = &a.vocab_out {
        write_file(p, &vocab.to_text())?;
    }
    if let Some(p) = &a.labels_out {
        let labels: Option<Vec<bool>> = corpus.iter().map(|d| d.label).collect();
        let labels = labels.ok_or_else(|| Error::InvalidInput(format!("{} has unlabelled documents", a.corpus.display())))?;
        write_file(p, &labels_to_text(&labels))?;
    }
    emit(a.out.as_deref(), &dtm_to_text(&m))
}

/// Builds the spec for `kind`, rejecting flags the model does not take.
fn model_spec(kind: ModelKind, h: &Hyper) -> Result<ModelSpec> {
    let given: Vec<(&str, bool)> = vec![
        ("alpha", h.alpha.is_some()),
        ("beta", h.beta.is_some()),
        ("c", h.c.is_some()),
        ("topics", h.topics.is_some()),
        ("lda-iters", h.lda_iters.is_some()),
        ("rank", h.rank.is_some()),
        ("n-trees", h.n_trees.is_some()),
        ("threshold", h.threshold.is_some()),
        ("n-top", h.n_top.is_some()),
        ("dropout", h.dropout.is_some()),
        ("patience", h.patience.is_some()),
        ("dim", h.dim.is_some()),
        ("batch-size", h.batch_size.is_some()),
        ("learning-rate", h.learning_rate.is_some()),
        ("max-epochs", h.max_epochs.is_some()),
    ];
    let accepted: &[&str] = match kind {
        ModelKind::Mnb => &["alpha"],
        ModelKind::Svm => &["c"],
        ModelKind::Nbsvm => &["alpha", "beta", "c"],
        ModelKind::Rf => &["n-trees", "threshold", "n-top"],
        ModelKind::Lda => &["topics", "lda-iters", "c"],
        ModelKind::Lsa => &["rank", "c"],
        ModelKind::NnSum | ModelKind::NnAvg => &["dropout", "patience", "dim", "batch-size", "learning-rate", "max-epochs"],
    };
    if let Some((flag, _)) = given.iter().find(|(f, set)| *set && !accepted.contains(f)) {
        return Err(usage(format!("--{flag} does not apply to this model")));
    }
    Ok(match kind {
        ModelKind::Mnb => ModelSpec::Mnb(MnbSpec { alpha: h.alpha.unwrap_or(MnbSpec::default().alpha) }),
        ModelKind::Svm => ModelSpec::Svm(SvmSpec { c: h.c.unwrap_or(SvmSpec::default().c) }),
        ModelKind::Nbsvm => {
            let d = NbsvmSpec::default();
            ModelSpec::Nbsvm(NbsvmSpec { alpha: h.alpha.unwrap_or(d.alpha), beta: h.beta.unwrap_or(d.beta), c: h.c.unwrap_or(d.c) })
        }
        ModelKind::Rf => {
            let d = RfSpec::default();
            ModelSpec::Rf(RfSpec {
                n_trees: h.n_trees.unwrap_or(d.n_trees),
                threshold: h.threshold.unwrap_or(d.threshold),
                n_top: h.n_top.unwrap_or(d.n_top),
            })
        }
        ModelKind::Lda => {
            let d = LdaSpec::default();
            ModelSpec::Lda(LdaSpec {
                n_topics: h.topics.unwrap_or(d.n_topics),
                n_iters: h.lda_iters.unwrap_or(d.n_iters),
                c: h.c.unwrap_or(d.c),
                ..d
            })
        }
        ModelKind::Lsa => {
            let d = LsaSpec::default();
            ModelSpec::Lsa(LsaSpec { d: h.rank.unwrap_or(d.d), c: h.c.unwrap_or(d.c) })
        }
        ModelKind::NnSum | ModelKind::NnAvg => {
            let nn = NnSpec {
                dropout: h.dropout,
                patience: h.patience,
                dim: h.dim,
                batch_size: h.batch_size,
                learning_rate: h.learning_rate,
                max_epochs: h.max_epochs,
            };
            if kind == ModelKind::NnSum { ModelSpec::NnSum(nn) } else { ModelSpec::NnAvg(nn) }
        }
    })
}

fn train(a: TrainArgs) -> Result<()> {
    let spec = model_spec(a.model, &a.hyper)?;
    let is_net = matches!(a.model, ModelKind::NnSum | ModelKind::NnAvg);
    if is_net != a.val_dtm.is_some() {
        return Err(usage(if is_net {
            "the networks need --val-dtm and --val-labels for early stopping"
        } else {
            "--val-dtm applies only to the networks"
        }));
    }
    let x = read_dtm(&a.dtm)?;
    let y = read_labels(&a.labels, x.n_docs())?;
    let val = match (&a.val_dtm, &a.val_labels) {
        (Some(d), Some(l)) => {
            let xv = read_dtm(d)?;
            let yv = read_labels(l, xv.n_docs())?;
            Some((xv, yv))
        }
        (Some(_), None) => return Err(usage("--val-dtm needs --val-labels")),
        _ => None,
    };
    let model = fit_model(&spec, &x, &y, val.as_ref().map(|(m, l)| (m, l.as_slice())), a.seed)?;
    save_model(&a.out, &model)?;
    log::info!("wrote {}", a.out.display());
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let x = read_dtm(&a.dtm)?;
    if x.weighting != model.input_weighting() {
        return Err(Error::InvalidInput(format!(
            "{} is {}-weighted but the {} model expects {}",
            a.dtm.display(),
            x.weighting,
            model.kind(),
            model.input_weighting()
        ))
        .into());
    }
    let threshold = a.threshold.unwrap_or_else(|| model.default_threshold());
    let scores = model.score(&x.matrix)?;
    let mut out = String::from("row,label,score\n");
    for (r, s) in scores.iter().enumerate() {
        out.push_str(&format!("{r},{},{s}\n", u8::from(*s >= threshold)));
    }
    emit(a.out.as_deref(), &out)
}

fn load_config(a: &ConfigArgs) -> Result<(ExperimentConfig, PathBuf)> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let dir = cfg.output_dir(a.out.as_deref());
    Ok((cfg, dir))
}

/// The config with the tuned models in place and no tuning stage, paths
/// made absolute so the file can live anywhere.
fn tuned_config(cfg: &ExperimentConfig, tuned: &[TunedModel]) -> Result<String> {
    let mut out = cfg.clone();
    out.output_dir = None;
    out.tuning = None;
    out.models = tuned.iter().map(|t| t.config.clone()).collect::<Vec<ModelConfig>>();
    for p in [&mut out.corpus, &mut out.stopwords].into_iter().flatten() {
        *p = std::path::absolute(&*p).map_err(Error::file(&*p))?;
    }
    Ok(out.to_toml()?)
}

fn write_tuned(cfg: &ExperimentConfig, tuned: &[TunedModel], dir: &Path) -> Result<()> {
    for p in write_tuning_outputs(tuned, dir)? {
        log::info!("wrote {}", p.display());
    }
    write_file(&dir.join("tuning.json"), &serde_json::to_string_pretty(tuned).map_err(Error::from)?)?;
    write_file(&dir.join("tuned.toml"), &tuned_config(cfg, tuned)?)
}

fn tune(a: ConfigArgs) -> Result<()> {
    let (cfg, dir) = load_config(&a)?;
    let opts = cfg.tuning.unwrap_or_default();
    if cfg.split.seeds.contains(&opts.seed) {
        return Err(Error::Config(format!("tuning seed {} is also an experiment seed", opts.seed)).into());
    }
    let views = cfg.feature_views()?;
    let tuned = tune_models(&views, &cfg.models, cfg.split.fractions, cfg.split.stratify, &opts)?;
    for t in &tuned {
        log::info!("{}: {}", t.config.name, toml::to_string(&t.config.spec).unwrap_or_default().replace('\n', " "));
    }
    write_tuned(&cfg, &tuned, &dir)
}

fn experiment(a: ConfigArgs) -> Result<()> {
    let (cfg, dir) = load_config(&a)?;
    if let Some(spec) = cfg.resolved_synth()? {
        log::info!("synthetic corpus: {} documents, separation {}", spec.n_docs, spec.separation);
    }
    let run = run_config(&cfg)?;
    for m in &run.result.models {
        match (&m.failure, m.summary()) {
            (Some(f), _) => log::warn!("{} failed: {f}", m.name()),
            (None, Some(s)) => log::info!("{}: mean accuracy {:.2}", m.name(), s.acc.unwrap_or(f64::NAN)),
            (None, None) => {}
        }
    }
    if !run.tuned.is_empty() {
        write_tuned(&cfg, &run.tuned, &dir)?;
    }
    for p in write_outputs(&run.result, &dir)? {
        log::info!("wrote {}", p.display());
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut section = match &a.spec {
        Some(p) => SynthSection::load(p)?,
        None => SynthSection { spec: SynthSpec::default(), target_accuracy: None },
    };
    let s = &mut section.spec;
    if let Some(v) = a.n_docs {
        s.n_docs = v;
    }
    if let Some(v) = a.prevalence {
        s.prevalence = v;
    }
    if let Some(v) = a.seed {
        s.seed = v;
    }
    if let Some(v) = a.separation {
        s.separation = v;
        section.target_accuracy = None;
    }
    if let Some(t) = a.target_accuracy.or(section.target_accuracy) {
        s.separation = calibrate_separation(s, t)?;
        log::info!("separation {} reaches accuracy {t}", s.separation);
    }
    emit(a.out.as_deref(), &corpus_to_jsonl(&synth_corpus(s)?)?)
}

fn compare(a: CompareArgs) -> Result<()> {
    let result = read_result(&a.results)?;
    let metric = match a.metric {
        MetricArg::Accuracy => CompareMetric::Accuracy,
        MetricArg::DiffPos => CompareMetric::DiffPos,
    };
    let table = compare_models(&result, metric)?;
    emit(a.out.as_deref(), &comparison_table_csv(&table)?)
}

fn report(a: ReportArgs) -> Result<()> {
    let result = read_result(&a.results)?;
    match &a.out {
        Some(dir) => {
            for p in write_outputs(&result, dir)? {
                log::info!("wrote {}", p.display());
            }
            Ok(())
        }
        None => {
            let cmp = Comparisons::of(&result);
            emit(None, &format!("{}\n{}", table2_text(&result, &cmp), table3_text(&result, &cmp)))
        }
    }
}
