//! End-to-end pipeline driven by a TOML config.
//!
//! Each stage reads its inputs from the output directory and writes its own
//! artifacts there, so any stage can be re-run alone once its upstream
//! artifacts exist:
//!
//! | stage      | reads                     | writes |
//! |------------|---------------------------|--------|
//! | `ingest`   | book sources              | `corpus/manifest.jsonl`, `corpus/chapters.jsonl` |
//! | `dtm`      | `corpus/chapters.jsonl`   | `dtm/matrix.mtx`, `dtm/vocab.txt`, `dtm/rows.csv`, `dtm/stats.json` |
//! | `dist`     | `dtm/`                    | `dist/within/<measure>/<Book>.{csv,jsonl}`, `dist/between/<measure>_<agg>.{csv,jsonl}`, `dist/meta.json` |
//! | `cluster`  | `dtm/`                    | `cluster/k<k>/{partition,graph,tree}.json`, `graph.dot`, `tree.nwk`, `cluster/dendrogram.{json,nwk}`, `cluster/sweep.json` |
//! | `classify` | `dtm/`                    | `classify/report.json`, `classify/<classifier>_confusion.csv` |
//! | `report`   | `dtm/stats.json` and whatever else exists | `summary.json` |

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::classify::{self, BenchmarkReport, ClassifierSpec, ClassifyError, SplitSpec};
use crate::cluster::{self, ClusterError, ClusterGraph, SweepParams};
use crate::corpus::{self, Chapter, CorpusError, SegKind, SegRule};
use crate::dtm::{self, DtmError, Weighting};
use crate::label::BookLabel;
use crate::rng::derive_seed;
use crate::similarity::{self, Aggregator, BookDistanceMatrix, Measure, SimilarityError};
use crate::textprep::{self, StopwordSet, TextError, TokenizedChapter};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Dtm,
    Dist,
    Cluster,
    Classify,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Ingest,
        Stage::Dtm,
        Stage::Dist,
        Stage::Cluster,
        Stage::Classify,
        Stage::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Dtm => "dtm",
            Stage::Dist => "dist",
            Stage::Cluster => "cluster",
            Stage::Classify => "classify",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Dtm(#[from] DtmError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config {}: {msg}", path.display())]
    Config { path: PathBuf, msg: String },
    #[error("{stage} stage: missing upstream artifact {} (run the `{needs}` stage first)", path.display())]
    MissingUpstreamArtifact {
        stage: Stage,
        needs: Stage,
        path: PathBuf,
    },
    #[error("{stage} stage failed: {error}")]
    Stage { stage: Stage, error: StageError },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BookEntry {
    pub label: BookLabel,
    pub path: PathBuf,
    pub rule: SegKind,
    #[serde(default)]
    pub pattern: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TextConfig {
    /// Extra stopword files added on top of the bundled lists.
    pub stopword_files: Vec<PathBuf>,
    pub archaic_stopwords: bool,
    pub min_df: usize,
    /// Chapters with fewer tokens after cleaning are dropped.
    pub min_tokens: usize,
}

impl Default for TextConfig {
    fn default() -> Self {
        TextConfig {
            stopword_files: Vec::new(),
            archaic_stopwords: true,
            min_df: 1,
            min_tokens: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterConfig {
    pub measure: Measure,
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub dendrogram_measure: Measure,
    pub dendrogram_aggregator: Aggregator,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            measure: Measure::Euclidean,
            k_min: 2,
            k_max: 7,
            restarts: 10,
            max_iter: 100,
            tol: 1e-9,
            dendrogram_measure: Measure::Euclidean,
            dendrogram_aggregator: Aggregator::Median,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub stratified: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.7,
            stratified: true,
        }
    }
}

fn default_seed() -> u64 {
    42
}

fn default_measures() -> Vec<Measure> {
    Measure::ALL.to_vec()
}

fn default_aggregators() -> Vec<Aggregator> {
    Aggregator::ALL.to_vec()
}

fn default_classifiers() -> Vec<ClassifierSpec> {
    vec![
        ClassifierSpec::knn(),
        ClassifierSpec::svm_linear(),
        ClassifierSpec::random_forest(),
    ]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub books: Vec<BookEntry>,
    #[serde(default)]
    pub text: TextConfig,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default = "default_measures")]
    pub measures: Vec<Measure>,
    #[serde(default = "default_aggregators")]
    pub aggregators: Vec<Aggregator>,
    #[serde(default)]
    pub cluster: ClusterConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<ClassifierSpec>,
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let config: PipelineConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), String> {
        if self.books.is_empty() {
            return Err("no books configured".into());
        }
        for (i, b) in self.books.iter().enumerate() {
            if self.books[..i].iter().any(|o| o.label == b.label) {
                return Err(format!("book {} listed twice", b.label));
            }
            SegRule::new(b.rule, &b.pattern).map_err(|e| format!("book {}: {e}", b.label))?;
        }
        if self.cluster.k_min < 2 || self.cluster.k_min > self.cluster.k_max {
            return Err("cluster k range must satisfy 2 <= k_min <= k_max".into());
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err("split.train_fraction must lie strictly between 0 and 1".into());
        }
        for c in &self.classifiers {
            c.validate().map_err(|e| e.to_string())?;
        }
        Ok(())
    }
}

/// Seeds handed to the randomized stages, all derived from the config seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub config: u64,
    pub split: u64,
    pub cluster: u64,
    pub classify: u64,
}

impl Seeds {
    pub fn from_config(seed: u64) -> Self {
        Seeds {
            config: seed,
            split: derive_seed(seed, 1),
            cluster: derive_seed(seed, 2),
            classify: derive_seed(seed, 3),
        }
    }
}

/// A loaded config plus resolved locations.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: PipelineConfig,
    /// Directory relative paths in the config resolve against.
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seeds: Seeds,
}

impl Pipeline {
    /// Loads a config file. `out` and `seed` override the file's values.
    pub fn load(
        config_path: &Path,
        out: Option<&Path>,
        seed: Option<u64>,
    ) -> Result<Pipeline, PipelineError> {
        let cfg_err = |msg: String| PipelineError::Config {
            path: config_path.into(),
            msg,
        };
        let text = fs::read_to_string(config_path).map_err(|e| cfg_err(e.to_string()))?;
        let config = PipelineConfig::parse(&text).map_err(cfg_err)?;
        let base_dir = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Pipeline::new(config, base_dir, out, seed).map_err(cfg_err)
    }

    pub fn new(
        config: PipelineConfig,
        base_dir: PathBuf,
        out: Option<&Path>,
        seed: Option<u64>,
    ) -> Result<Pipeline, String> {
        let out_dir = match (out, &config.output_dir) {
            (Some(o), _) => o.to_path_buf(),
            (None, Some(o)) => base_dir.join(o),
            (None, None) => return Err("no output directory: set output_dir or pass --out".into()),
        };
        let seeds = Seeds::from_config(seed.unwrap_or(config.seed));
        Ok(Pipeline {
            config,
            base_dir,
            out_dir,
            seeds,
        })
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    fn artifact(&self, rel: &str) -> PathBuf {
        self.out_dir.join(rel)
    }

    pub fn run(&self) -> Result<(), PipelineError> {
        for stage in Stage::ALL {
            self.run_stage(stage)?;
        }
        Ok(())
    }

    pub fn run_stage(&self, stage: Stage) -> Result<(), PipelineError> {
        log::info!("running {stage} stage");
        let result = match stage {
            Stage::Ingest => self.ingest(),
            Stage::Dtm => {
                self.require(stage, Stage::Ingest, "corpus/chapters.jsonl")?;
                self.build_matrix()
            }
            Stage::Dist => {
                self.require(stage, Stage::Dtm, "dtm/matrix.mtx")?;
                self.distances()
            }
            Stage::Cluster => {
                self.require(stage, Stage::Dtm, "dtm/matrix.mtx")?;
                self.clusters()
            }
            Stage::Classify => {
                self.require(stage, Stage::Dtm, "dtm/matrix.mtx")?;
                self.classifiers()
            }
            Stage::Report => {
                self.require(stage, Stage::Dtm, "dtm/stats.json")?;
                self.report()
            }
        };
        result.map_err(|error| PipelineError::Stage { stage, error })
    }

    fn require(&self, stage: Stage, needs: Stage, rel: &str) -> Result<(), PipelineError> {
        let path = self.artifact(rel);
        if path.exists() {
            Ok(())
        } else {
            Err(PipelineError::MissingUpstreamArtifact { stage, needs, path })
        }
    }

    fn ingest(&self) -> Result<(), StageError> {
        let books = self
            .config
            .books
            .par_iter()
            .map(|b| {
                let rule = SegRule::new(b.rule, &b.pattern)?;
                corpus::load_book(&self.resolve(&b.path), b.label, rule)
            })
            .collect::<Result<Vec<_>, CorpusError>>()?;
        let corpus = corpus::build_corpus(&books)?;
        for (book, n) in &corpus.per_book_counts {
            log::info!("{book}: {n} chapters");
        }
        write_jsonl(&self.artifact("corpus/manifest.jsonl"), &corpus.manifest())?;
        write_jsonl(&self.artifact("corpus/chapters.jsonl"), &corpus.chapters)
    }

    fn stopwords(&self) -> Result<StopwordSet, StageError> {
        let mut stops = if self.config.text.archaic_stopwords {
            StopwordSet::english_with_archaic()
        } else {
            StopwordSet::english()
        };
        for f in &self.config.text.stopword_files {
            stops.add_extra_file(&self.resolve(f))?;
        }
        Ok(stops)
    }

    fn build_matrix(&self) -> Result<(), StageError> {
        let chapters: Vec<Chapter> = read_jsonl(&self.artifact("corpus/chapters.jsonl"))?;
        let stops = self.stopwords()?;
        let tokenized: Vec<TokenizedChapter> = chapters
            .par_iter()
            .map(|c| textprep::clean_and_tokenize(c, &stops))
            .collect();
        let min_tokens = self.config.text.min_tokens;
        let (kept, dropped): (Vec<_>, Vec<_>) = tokenized
            .into_iter()
            .partition(|t| t.tokens.len() >= min_tokens);
        for d in &dropped {
            log::warn!(
                "dropping {} chapter {}: {} tokens is below the minimum of {min_tokens}",
                d.book,
                d.index,
                d.tokens.len()
            );
        }
        if kept.is_empty() {
            return Err(StageError::Invalid("every chapter was dropped".into()));
        }
        let vocab = textprep::vocabulary(&kept, self.config.text.min_df)?;
        let matrix = dtm::build_dtm(&kept, &vocab, self.config.weighting)?;
        dtm::save(&matrix, &self.artifact("dtm"))?;

        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for r in &matrix.row_labels {
            *counts.entry(r.book.to_string()).or_default() += 1;
        }
        let stats = json!({
            "n": matrix.n(),
            "p": matrix.p(),
            "nnz": matrix.nnz(),
            "sparsity": dtm::sparsity(&matrix),
            "weighting": matrix.weighting,
            "min_df": self.config.text.min_df,
            "min_tokens": min_tokens,
            "stopword_count": stops.len(),
            "chapter_counts": counts,
            "dropped": dropped
                .iter()
                .map(|d| json!({"book": d.book, "index": d.index, "tokens": d.tokens.len()}))
                .collect::<Vec<_>>(),
        });
        write_json(&self.artifact("dtm/stats.json"), &stats)
    }

    fn load_dtm(&self) -> Result<dtm::DocTermMatrix, StageError> {
        Ok(dtm::load(&self.artifact("dtm"))?)
    }

    fn distances(&self) -> Result<(), StageError> {
        let matrix = self.load_dtm()?;
        let mut meta = BTreeMap::new();
        for &measure in &self.config.measures {
            let full = similarity::full_matrix(&matrix, measure)?;
            for book in matrix.books() {
                let within = similarity::within_book_matrix(&matrix, book, measure)?;
                let base = format!("dist/within/{measure}/{book}");
                write_text(&self.artifact(&format!("{base}.csv")), &within.to_csv())?;
                write_text(&self.artifact(&format!("{base}.jsonl")), &within.to_jsonl())?;
            }
            if matrix.books().len() >= 2 {
                for &agg in &self.config.aggregators {
                    let delta = BookDistanceMatrix::from_chapters(&full, agg)?;
                    let base = format!("dist/between/{measure}_{agg}");
                    write_text(&self.artifact(&format!("{base}.csv")), &delta.to_csv())?;
                    write_text(&self.artifact(&format!("{base}.jsonl")), &delta.to_jsonl())?;
                }
            }
            meta.insert(
                measure.to_string(),
                json!({"zero_vector_pairs": full.zero_vector_pairs}),
            );
        }
        write_json(
            &self.artifact("dist/meta.json"),
            &json!({
                "measures": self.config.measures,
                "aggregators": self.config.aggregators,
                "books": matrix.books(),
                "cosine_zero_vector_policy": "distance 0 for two zero rows, 1 for one zero row",
                "per_measure": meta,
            }),
        )
    }

    fn clusters(&self) -> Result<(), StageError> {
        let matrix = self.load_dtm()?;
        let cfg = &self.config.cluster;
        let params = SweepParams {
            measure: cfg.measure,
            k_min: cfg.k_min,
            k_max: cfg.k_max,
            seed: self.seeds.cluster,
            restarts: cfg.restarts,
            max_iter: cfg.max_iter,
            tol: cfg.tol,
        };
        let sweep = cluster::sweep_k(&matrix.rows, &matrix.row_labels, &params)?;
        let mut summary = Vec::new();
        for r in &sweep {
            let dir = format!("cluster/k{}", r.k);
            write_json(
                &self.artifact(&format!("{dir}/partition.json")),
                &r.partition,
            )?;
            write_json(&self.artifact(&format!("{dir}/graph.json")), &r.graph)?;
            write_text(
                &self.artifact(&format!("{dir}/graph.dot")),
                &r.graph.to_dot(),
            )?;
            if r.graph.nodes.len() >= 2 {
                let tree = r.graph.dendrogram()?;
                write_json(&self.artifact(&format!("{dir}/tree.json")), &tree)?;
                write_text(
                    &self.artifact(&format!("{dir}/tree.nwk")),
                    &tree.to_newick(),
                )?;
            }
            summary.push(json!({
                "k": r.k,
                "objective": r.partition.objective,
                "plain_objective": r.partition.plain_objective,
                "iterations": r.partition.iterations,
                "restart": r.partition.restart,
                "cluster_sizes": r.partition.cluster_sizes(),
                "strongest_edge": r.graph.strongest_edge(),
            }));
        }
        if matrix.books().len() >= 2 {
            let delta = similarity::between_book_matrix(
                &matrix,
                cfg.dendrogram_measure,
                cfg.dendrogram_aggregator,
            )?;
            let tree = cluster::book_dendrogram(&delta)?;
            write_json(&self.artifact("cluster/dendrogram.json"), &tree)?;
            write_text(&self.artifact("cluster/dendrogram.nwk"), &tree.to_newick())?;
        }
        write_json(
            &self.artifact("cluster/sweep.json"),
            &json!({"measure": cfg.measure, "seed": self.seeds.cluster, "restarts": cfg.restarts, "results": summary}),
        )
    }

    fn classifiers(&self) -> Result<(), StageError> {
        let matrix = self.load_dtm()?;
        let split = SplitSpec {
            train_fraction: self.config.split.train_fraction,
            seed: self.seeds.split,
            stratified: self.config.split.stratified,
        };
        let report = classify::benchmark(
            &matrix,
            &split,
            &self.config.classifiers,
            self.seeds.classify,
        )?;
        for r in &report.results {
            log::info!("{}: accuracy {:.4}", r.classifier, r.accuracy);
            write_text(
                &self.artifact(&format!("classify/{}_confusion.csv", r.classifier)),
                &r.confusion.to_csv(),
            )?;
        }
        write_json(&self.artifact("classify/report.json"), &report)
    }

    fn report(&self) -> Result<(), StageError> {
        let stats: serde_json::Value = read_json(&self.artifact("dtm/stats.json"))?;
        let classify: Option<BenchmarkReport> =
            read_optional_json(&self.artifact("classify/report.json"))?;
        let delta = {
            let path = self.artifact("dist/between/euclidean_median.csv");
            if path.exists() {
                let text = fs::read_to_string(&path).map_err(|source| StageError::Io {
                    path: path.clone(),
                    source,
                })?;
                Some(
                    BookDistanceMatrix::from_csv(&text, Measure::Euclidean, Aggregator::Median)
                        .map_err(StageError::Invalid)?,
                )
            } else {
                None
            }
        };
        let graph: Option<ClusterGraph> =
            read_optional_json(&self.artifact("cluster/k7/graph.json"))?;
        let checks = reproduction_checks(classify.as_ref(), delta.as_ref(), graph.as_ref());
        let summary = json!({
            "schema_version": SUMMARY_SCHEMA_VERSION,
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "seeds": self.seeds,
            "weighting": stats["weighting"],
            "chapters": stats["n"],
            "vocabulary": stats["p"],
            "sparsity": stats["sparsity"],
            "chapter_counts": stats["chapter_counts"],
            "dropped_chapters": stats["dropped"].as_array().map_or(0, Vec::len),
            "classifiers": classify.as_ref().map(|c| c.results.iter()
                .map(|r| json!({"classifier": r.classifier, "accuracy": r.accuracy}))
                .collect::<Vec<_>>()),
            "checks": checks,
        });
        write_json(&self.artifact("summary.json"), &summary)
    }
}

/// Outcome of one qualitative comparison against reference results.
/// `pass` is `None` when the needed artifact is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub pass: Option<bool>,
    pub detail: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionChecks {
    /// Random forest beats SVM, which beats KNN.
    pub accuracy_ordering: Check,
    /// The closest pair in the euclidean median book matrix is
    /// (Upanishad, TaoTeChing).
    pub closest_books: Check,
    /// At k = 7 the heaviest book-graph edge joins Upanishad and TaoTeChing.
    pub strongest_k7_edge: Check,
}

fn is_upanishad_tao(a: BookLabel, b: BookLabel) -> bool {
    let mut pair = [a, b];
    pair.sort();
    pair == [BookLabel::TaoTeChing, BookLabel::Upanishad]
}

fn has_both(books: &[BookLabel]) -> bool {
    books.contains(&BookLabel::Upanishad) && books.contains(&BookLabel::TaoTeChing)
}

/// Book-level checks are only decided when both Upanishad and TaoTeChing are
/// present.
pub fn reproduction_checks(
    classify: Option<&BenchmarkReport>,
    delta: Option<&BookDistanceMatrix>,
    k7: Option<&ClusterGraph>,
) -> ReproductionChecks {
    let accuracy_ordering = match classify {
        Some(report) => {
            let (f, s, k) = (
                report.accuracy_of("random-forest"),
                report.accuracy_of("svm-linear"),
                report.accuracy_of("knn"),
            );
            let pass = match (f, s, k) {
                (Some(f), Some(s), Some(k)) => Some(f > s && s > k),
                _ => None,
            };
            Check {
                pass,
                detail: json!({"random-forest": f, "svm-linear": s, "knn": k}),
            }
        }
        None => Check {
            pass: None,
            detail: json!(null),
        },
    };
    let closest_books = match delta.and_then(|d| d.min_off_diagonal()) {
        Some((a, b, v)) => Check {
            pass: delta
                .filter(|d| has_both(&d.books))
                .map(|_| is_upanishad_tao(a, b)),
            detail: json!({
                "pair": [a, b],
                "value": v,
                "upanishad_tao": delta.and_then(|d| d.get(BookLabel::Upanishad, BookLabel::TaoTeChing)),
            }),
        },
        None => Check {
            pass: None,
            detail: json!(null),
        },
    };
    let strongest_k7_edge = match k7.and_then(|g| g.strongest_edge().map(|e| (g, e))) {
        Some((g, e)) => Check {
            pass: has_both(&g.nodes).then(|| is_upanishad_tao(e.a, e.b)),
            detail: json!({
                "edge": [e.a, e.b],
                "weight": e.weight,
                "upanishad_tao": g.weight(BookLabel::Upanishad, BookLabel::TaoTeChing),
            }),
        },
        None => Check {
            pass: None,
            detail: json!(null),
        },
    };
    ReproductionChecks {
        accuracy_ordering,
        closest_books,
        strongest_k7_edge,
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StageError + '_ {
    move |source| StageError::Io {
        path: path.into(),
        source,
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), StageError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StageError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| StageError::Json {
        path: path.into(),
        source,
    })?;
    text.push('\n');
    write_text(path, &text)
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), StageError> {
    let mut text = String::new();
    for r in records {
        text.push_str(
            &serde_json::to_string(r).map_err(|source| StageError::Json {
                path: path.into(),
                source,
            })?,
        );
        text.push('\n');
    }
    write_text(path, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, StageError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| StageError::Json {
        path: path.into(),
        source,
    })
}

fn read_optional_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Option<T>, StageError> {
    if path.exists() {
        read_json(path).map(Some)
    } else {
        Ok(None)
    }
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, StageError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|source| StageError::Json {
                path: path.into(),
                source,
            })
        })
        .collect()
}
