//! TOML experiment configuration.
//!
//! ```toml
//! output_dir = "results"
//! corpus = "notes.jsonl"      # or a [synth] table
//! min_df = 1
//!
//! [split]
//! seeds = [1, 2, 3]
//!
//! [[models]]
//! name = "MNB"
//! kind = "mnb"
//! alpha = 0.032683
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::experiment::{run_experiment, ExperimentResult};
use crate::harness::pipeline::{default_models, FeatureViews, ModelConfig};
use crate::harness::split::SplitPlan;
use crate::harness::synth::{calibrate_separation, synth_corpus, SynthModel, SynthSpec};
use crate::harness::tune::{tune_models, TunedModel, TuningOptions};
use crate::io::{read_corpus, read_text};
use crate::textprep::{default_stopwords, Document, Stopwords};

/// Environment variable consulted for the output directory when neither
/// the command line nor the config names one.
pub const OUTPUT_ENV: &str = "TEXTBENCH_OUT";
pub const DEFAULT_OUTPUT_DIR: &str = "results";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSection {
    #[serde(flatten)]
    pub spec: SynthSpec,
    /// When set, `separation` is replaced by the value whose
    /// naive-Bayes-optimal accuracy reaches this target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// JSONL corpus, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSection>,
    /// One word per line; the built-in list when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    #[serde(default = "one")]
    pub min_df: usize,
    #[serde(default)]
    pub split: SplitPlan,
    #[serde(default = "default_models")]
    pub models: Vec<ModelConfig>,
    /// Tune every model on its own split before the experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuning: Option<TuningOptions>,
}

fn one() -> usize {
    1
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            output_dir: None,
            corpus: None,
            synth: Some(SynthSection { spec: SynthSpec::default(), target_accuracy: None }),
            stopwords: None,
            min_df: 1,
            split: SplitPlan::default(),
            models: default_models(),
            tuning: None,
        }
    }
}

impl SynthSection {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let s: Self = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| line_of(text, s.start));
            Error::parse(path, line, e.message())
        })?;
        SynthModel::new(s.spec)?;
        if let Some(t) = s.target_accuracy {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Config("target_accuracy must lie in (0, 1)".into()));
            }
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, &path.display().to_string())
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    /// Parses and validates; relative paths stay as written.
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| line_of(text, s.start));
            Error::parse(path, line, e.message())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and resolves its paths against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&read_text(path)?, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.corpus, &mut cfg.stopwords, &mut cfg.output_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.corpus, &self.synth) {
            (Some(_), Some(_)) => return Err(Error::Config("give either corpus or [synth], not both".into())),
            (None, None) => return Err(Error::Config("a corpus path or a [synth] table is required".into())),
            _ => {}
        }
        if self.min_df == 0 {
            return Err(Error::Config("min_df must be at least 1".into()));
        }
        self.split.validate()?;
        if self.models.is_empty() {
            return Err(Error::Config("no models configured".into()));
        }
        for (i, m) in self.models.iter().enumerate() {
            if m.name.is_empty() {
                return Err(Error::Config(format!("model {} has an empty name", i + 1)));
            }
            if self.models[..i].iter().any(|o| o.name == m.name) {
                return Err(Error::Config(format!("model name {:?} appears twice", m.name)));
            }
        }
        if let Some(t) = &self.tuning {
            if self.split.seeds.contains(&t.seed) {
                return Err(Error::Config(format!("tuning seed {} is also an experiment seed", t.seed)));
            }
        }
        Ok(())
    }

    /// Command line, then config, then the environment, then the default.
    pub fn output_dir(&self, cli: Option<&Path>) -> PathBuf {
        cli.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .or_else(|| std::env::var_os(OUTPUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    /// The synthetic spec actually sampled, after any calibration.
    pub fn resolved_synth(&self) -> Result<Option<SynthSpec>> {
        let Some(s) = &self.synth else { return Ok(None) };
        let mut spec = s.spec;
        if let Some(target) = s.target_accuracy {
            spec.separation = calibrate_separation(&spec, target)?;
        }
        Ok(Some(spec))
    }

    pub fn load_corpus(&self) -> Result<Vec<Document>> {
        match (&self.corpus, self.resolved_synth()?) {
            (Some(p), _) => read_corpus(p),
            (None, Some(spec)) => synth_corpus(&spec),
            (None, None) => Err(Error::Config("no corpus configured".into())),
        }
    }

    pub fn load_stopwords(&self) -> Result<Stopwords> {
        match &self.stopwords {
            Some(p) => Ok(Stopwords::parse(&read_text(p)?)),
            None => Ok(default_stopwords().clone()),
        }
    }

    pub fn feature_views(&self) -> Result<FeatureViews> {
        FeatureViews::build(&self.load_corpus()?, &self.load_stopwords()?, self.min_df)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRun {
    /// Tuning outcomes, in model order; empty without a tuning stage.
    pub tuned: Vec<TunedModel>,
    pub result: ExperimentResult,
}

/// Builds the features, tunes when asked, and runs every split.
pub fn run_config(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    let views = cfg.feature_views()?;
    let (tuned, models) = match &cfg.tuning {
        Some(opts) => {
            let tuned = tune_models(&views, &cfg.models, cfg.split.fractions, cfg.split.stratify, opts)?;
            let models = tuned.iter().map(|t| t.config.clone()).collect();
            (tuned, models)
        }
        None => (Vec::new(), cfg.models.clone()),
    };
    let result = run_experiment(&views, &models, &cfg.split)?;
    Ok(ExperimentRun { tuned, result })
}
