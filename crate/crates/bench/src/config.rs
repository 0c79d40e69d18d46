//! Flat `key = value` run configuration with dotted section prefixes.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Unknown and repeated keys are errors. Relative paths are resolved against
//! the directory holding the config file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use handcraft_core::classify::{
    ClassifierKind, ForestConfig, GbdtConfig, Gamma, KnnConfig, MaxFeatures, SvmConfig, TrainConfig,
};
use handcraft_core::dataset::SplitSpec;
use handcraft_core::features::{FeatureMethod, FeatureParams, GaborParams, HogParams, LbpMode, LbpParams};
use handcraft_core::imaging::PreprocessConfig;

use crate::datasets::Schema;
use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub name: String,
    pub path: PathBuf,
    pub schema: Schema,
    /// Side length of the images stored in the CSV.
    pub side: usize,
    /// Held-out file; when set the whole `path` file trains and no split is made.
    pub test_path: Option<PathBuf>,
}

impl DatasetSpec {
    pub fn new(name: impl Into<String>, path: impl Into<PathBuf>) -> Self {
        Self { name: name.into(), path: path.into(), schema: Schema::LabelFirst, side: 28, test_path: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub datasets: Vec<DatasetSpec>,
    pub preprocess: PreprocessConfig,
    pub features: Vec<FeatureParams>,
    pub classifiers: Vec<TrainConfig>,
    /// Pick SVM C and gamma by grid search on a validation split of the training data.
    pub svm_tune: bool,
    pub split: SplitSpec,
    pub out: PathBuf,
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
    pub include_raw_baseline: bool,
    pub save_models: bool,
    pub cache_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            preprocess: PreprocessConfig::default(),
            features: [FeatureMethod::Hog, FeatureMethod::Lbp, FeatureMethod::Gabor]
                .into_iter()
                .map(FeatureParams::defaults)
                .collect(),
            classifiers: [ClassifierKind::Knn, ClassifierKind::Svm, ClassifierKind::Rf, ClassifierKind::Gbdt]
                .into_iter()
                .map(TrainConfig::defaults)
                .collect(),
            svm_tune: false,
            split: SplitSpec::default(),
            out: PathBuf::from("results"),
            jobs: 0,
            include_raw_baseline: false,
            save_models: false,
            cache_dir: None,
        }
    }
}

fn config_err(line: usize, msg: impl Into<String>) -> BenchError {
    BenchError::Config { line, msg: msg.into() }
}

struct Entries {
    map: BTreeMap<String, (String, usize)>,
    /// Dataset names in order of first mention.
    dataset_order: Vec<String>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.map.remove(key)
    }

    fn parse<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        if let Some((v, line)) = self.take(key) {
            *slot = v.parse().map_err(|e| config_err(line, format!("{key}: {e}")))?;
        }
        Ok(())
    }

    fn flag(&mut self, key: &str, slot: &mut bool) -> Result<()> {
        if let Some((v, line)) = self.take(key) {
            *slot = match v.as_str() {
                "true" | "yes" | "on" | "1" => true,
                "false" | "no" | "off" | "0" => false,
                _ => return Err(config_err(line, format!("{key}: expected true or false, got `{v}`"))),
            };
        }
        Ok(())
    }

    fn list(&mut self, key: &str) -> Option<(Vec<String>, usize)> {
        self.take(key).map(|(v, line)| {
            (v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(), line)
        })
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = PathBuf::from(p);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut e = Entries { map: BTreeMap::new(), dataset_order: Vec::new() };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(config_err(line, format!("bad key `{key}`")));
            }
            if let Some(rest) = key.strip_prefix("dataset.") {
                let name = rest.split_once('.').map_or(rest, |(n, _)| n);
                if !e.dataset_order.iter().any(|n| n == name) {
                    e.dataset_order.push(name.to_string());
                }
            }
            if let Some((_, first)) = e.map.insert(key.to_string(), (value.to_string(), line)) {
                return Err(config_err(line, format!("`{key}` already set on line {first}")));
            }
        }

        let mut cfg = RunConfig::default();

        let names = match e.list("datasets") {
            Some((names, line)) => {
                if let Some(extra) = e.dataset_order.iter().find(|n| !names.contains(n)) {
                    let line = e.map.iter().find(|(k, _)| k.starts_with(&format!("dataset.{extra}."))).map_or(line, |(_, v)| v.1);
                    return Err(config_err(line, format!("dataset `{extra}` is configured but not listed in `datasets`")));
                }
                names
            }
            None => e.dataset_order.clone(),
        };
        for name in names {
            let (path, _) = e
                .take(&format!("dataset.{name}.path"))
                .ok_or_else(|| config_err(0, format!("dataset `{name}` has no `dataset.{name}.path`")))?;
            let mut ds = DatasetSpec::new(name.clone(), resolve(base_dir, &path));
            e.parse(&format!("dataset.{name}.schema"), &mut ds.schema)?;
            e.parse(&format!("dataset.{name}.side"), &mut ds.side)?;
            ds.test_path = e.take(&format!("dataset.{name}.test_path")).map(|(p, _)| resolve(base_dir, &p));
            cfg.datasets.push(ds);
        }

        let pre = &mut cfg.preprocess;
        e.parse("preprocess.target_side", &mut pre.target_side)?;
        e.parse("preprocess.sigma", &mut pre.gaussian_sigma)?;
        e.flag("preprocess.deskew", &mut pre.deskew_enabled)?;

        let mut hog = HogParams::default();
        e.parse("hog.cell_side", &mut hog.cell_side)?;
        e.parse("hog.block_side", &mut hog.block_side)?;
        e.parse("hog.n_bins", &mut hog.n_bins)?;
        e.parse("hog.block_stride", &mut hog.block_stride)?;
        e.flag("hog.signed", &mut hog.signed_gradients)?;

        let mut lbp = LbpParams::default();
        e.parse("lbp.neighbors", &mut lbp.neighbors)?;
        e.parse("lbp.radius", &mut lbp.radius)?;
        if let Some((v, line)) = e.take("lbp.mode") {
            lbp.mode = match v.as_str() {
                "flat_image" => LbpMode::FlatImage,
                "histogram" => LbpMode::Histogram,
                _ => return Err(config_err(line, format!("lbp.mode: expected flat_image or histogram, got `{v}`"))),
            };
        }

        let mut gabor = GaborParams::default();
        e.parse("gabor.frequency", &mut gabor.frequency)?;
        e.parse("gabor.orientation", &mut gabor.orientation)?;
        e.parse("gabor.bandwidth", &mut gabor.bandwidth)?;
        e.parse("gabor.n_stds", &mut gabor.n_stds)?;

        if let Some((names, line)) = e.list("features") {
            cfg.features.clear();
            for n in names {
                let method: FeatureMethod = n.parse().map_err(|err| config_err(line, format!("features: {err}")))?;
                if cfg.features.iter().any(|f| f.method() == method) {
                    return Err(config_err(line, format!("features: `{n}` listed twice")));
                }
                cfg.features.push(match method {
                    FeatureMethod::Hog => FeatureParams::Hog(hog),
                    FeatureMethod::Lbp => FeatureParams::Lbp(lbp),
                    FeatureMethod::Gabor => FeatureParams::Gabor(gabor),
                    FeatureMethod::Raw => FeatureParams::Raw,
                });
            }
        } else {
            cfg.features = vec![FeatureParams::Hog(hog), FeatureParams::Lbp(lbp), FeatureParams::Gabor(gabor)];
        }

        let mut knn = KnnConfig::default();
        e.parse("knn.k", &mut knn.k)?;
        e.parse("knn.p", &mut knn.minkowski_p)?;

        let mut svm = SvmConfig::default();
        e.parse("svm.c", &mut svm.c)?;
        if let Some((v, line)) = e.take("svm.gamma") {
            svm.gamma = if v == "auto_scale" || v == "auto" {
                Gamma::AutoScale
            } else {
                Gamma::Value(v.parse().map_err(|_| config_err(line, format!("svm.gamma: expected auto_scale or a number, got `{v}`")))?)
            };
        }
        e.parse("svm.tol", &mut svm.tol)?;
        e.parse("svm.max_passes", &mut svm.max_passes)?;
        e.parse("svm.cache_mb", &mut svm.cache_mb)?;
        e.flag("svm.tune", &mut cfg.svm_tune)?;

        let mut rf = ForestConfig::default();
        e.parse("rf.n_trees", &mut rf.n_trees)?;
        e.parse("rf.max_depth", &mut rf.max_depth)?;
        if let Some((v, line)) = e.take("rf.features_per_split") {
            rf.features_per_split = match v.as_str() {
                "sqrt" => MaxFeatures::Sqrt,
                "all" => MaxFeatures::All,
                n => MaxFeatures::Count(n.parse().map_err(|_| {
                    config_err(line, format!("rf.features_per_split: expected sqrt, all or a count, got `{n}`"))
                })?),
            };
        }
        e.flag("rf.bootstrap", &mut rf.bootstrap)?;
        e.parse("rf.seed", &mut rf.seed)?;

        let mut gbdt = GbdtConfig::default();
        e.parse("gbdt.n_rounds", &mut gbdt.n_rounds)?;
        e.parse("gbdt.max_depth", &mut gbdt.max_depth)?;
        e.parse("gbdt.learning_rate", &mut gbdt.learning_rate)?;
        e.parse("gbdt.row_subsample", &mut gbdt.row_subsample)?;
        e.parse("gbdt.col_subsample", &mut gbdt.col_subsample)?;
        e.parse("gbdt.lambda", &mut gbdt.lambda)?;
        e.parse("gbdt.seed", &mut gbdt.seed)?;

        let build = |kind: ClassifierKind| match kind {
            ClassifierKind::Knn => TrainConfig::Knn(knn),
            ClassifierKind::Svm => TrainConfig::Svm(svm),
            ClassifierKind::Rf => TrainConfig::Rf(rf),
            ClassifierKind::Gbdt => TrainConfig::Gbdt(gbdt),
        };
        if let Some((names, line)) = e.list("classifiers") {
            cfg.classifiers.clear();
            for n in names {
                let kind: ClassifierKind = n.parse().map_err(|err| config_err(line, format!("classifiers: {err}")))?;
                if cfg.classifiers.iter().any(|c| c.kind() == kind) {
                    return Err(config_err(line, format!("classifiers: `{n}` listed twice")));
                }
                cfg.classifiers.push(build(kind));
            }
        } else {
            cfg.classifiers = [ClassifierKind::Knn, ClassifierKind::Svm, ClassifierKind::Rf, ClassifierKind::Gbdt]
                .into_iter()
                .map(build)
                .collect();
        }

        e.parse("split.train_fraction", &mut cfg.split.train_fraction)?;
        e.parse("split.seed", &mut cfg.split.seed)?;
        e.flag("split.stratified", &mut cfg.split.stratified)?;

        if let Some((p, _)) = e.take("run.out") {
            cfg.out = resolve(base_dir, &p);
        }
        e.parse("run.jobs", &mut cfg.jobs)?;
        e.flag("run.raw_baseline", &mut cfg.include_raw_baseline)?;
        e.flag("run.save_models", &mut cfg.save_models)?;
        cfg.cache_dir = e.take("run.cache_dir").map(|(p, _)| resolve(base_dir, &p));

        if let Some((key, (_, line))) = e.map.into_iter().min_by_key(|(_, (_, line))| *line) {
            return Err(config_err(line, format!("unknown key `{key}`")));
        }
        Ok(cfg)
    }

    /// Checks cross-field invariants once command-line overrides are applied.
    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(config_err(0, "no datasets configured"));
        }
        if self.features.is_empty() {
            return Err(config_err(0, "feature list is empty"));
        }
        if self.classifiers.is_empty() {
            return Err(config_err(0, "classifier list is empty"));
        }
        let mut names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(config_err(0, "dataset names must be unique"));
        }
        self.preprocess.validate()?;
        let side = self.preprocess.target_side;
        for f in &self.features {
            f.output_dim(side, side)?;
        }
        for c in &self.classifiers {
            c.validate()?;
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(config_err(0, "split.train_fraction must be in (0, 1)"));
        }
        Ok(())
    }

    /// Features evaluated by the grid: the configured list plus raw pixels when
    /// the baseline is on and not already listed.
    pub fn grid_features(&self) -> Vec<FeatureParams> {
        let mut f = self.features.clone();
        if self.include_raw_baseline && !f.iter().any(|p| p.method() == FeatureMethod::Raw) {
            f.push(FeatureParams::Raw);
        }
        f
    }

    /// Worker count after resolving `jobs = 0`.
    pub fn effective_jobs(&self) -> usize {
        if self.jobs > 0 {
            self.jobs
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }

    /// The configuration rendered back in its own grammar (paths as given).
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        writeln!(s, "datasets = {}", names.join(", ")).unwrap();
        for d in &self.datasets {
            writeln!(s, "dataset.{}.path = {}", d.name, d.path.display()).unwrap();
            writeln!(s, "dataset.{}.schema = {}", d.name, d.schema).unwrap();
            writeln!(s, "dataset.{}.side = {}", d.name, d.side).unwrap();
            if let Some(t) = &d.test_path {
                writeln!(s, "dataset.{}.test_path = {}", d.name, t.display()).unwrap();
            }
        }
        let p = &self.preprocess;
        writeln!(s, "preprocess.target_side = {}", p.target_side).unwrap();
        writeln!(s, "preprocess.sigma = {}", p.gaussian_sigma).unwrap();
        writeln!(s, "preprocess.deskew = {}", p.deskew_enabled).unwrap();
        let methods: Vec<&str> = self.features.iter().map(|f| method_key(f.method())).collect();
        writeln!(s, "features = {}", methods.join(", ")).unwrap();
        for f in &self.features {
            match f {
                FeatureParams::Hog(h) => {
                    writeln!(s, "hog.cell_side = {}", h.cell_side).unwrap();
                    writeln!(s, "hog.block_side = {}", h.block_side).unwrap();
                    writeln!(s, "hog.n_bins = {}", h.n_bins).unwrap();
                    writeln!(s, "hog.block_stride = {}", h.block_stride).unwrap();
                    writeln!(s, "hog.signed = {}", h.signed_gradients).unwrap();
                }
                FeatureParams::Lbp(l) => {
                    writeln!(s, "lbp.neighbors = {}", l.neighbors).unwrap();
                    writeln!(s, "lbp.radius = {}", l.radius).unwrap();
                    let mode = if l.mode == LbpMode::FlatImage { "flat_image" } else { "histogram" };
                    writeln!(s, "lbp.mode = {mode}").unwrap();
                }
                FeatureParams::Gabor(g) => {
                    writeln!(s, "gabor.frequency = {}", g.frequency).unwrap();
                    writeln!(s, "gabor.orientation = {}", g.orientation).unwrap();
                    writeln!(s, "gabor.bandwidth = {}", g.bandwidth).unwrap();
                    writeln!(s, "gabor.n_stds = {}", g.n_stds).unwrap();
                }
                FeatureParams::Raw => {}
            }
        }
        let kinds: Vec<String> = self.classifiers.iter().map(|c| c.kind().name().to_ascii_lowercase()).collect();
        writeln!(s, "classifiers = {}", kinds.join(", ")).unwrap();
        for c in &self.classifiers {
            match c {
                TrainConfig::Knn(k) => {
                    writeln!(s, "knn.k = {}", k.k).unwrap();
                    writeln!(s, "knn.p = {}", k.minkowski_p).unwrap();
                }
                TrainConfig::Svm(v) => {
                    writeln!(s, "svm.c = {}", v.c).unwrap();
                    match v.gamma {
                        Gamma::AutoScale => writeln!(s, "svm.gamma = auto_scale").unwrap(),
                        Gamma::Value(g) => writeln!(s, "svm.gamma = {g}").unwrap(),
                    }
                    writeln!(s, "svm.tol = {}", v.tol).unwrap();
                    writeln!(s, "svm.max_passes = {}", v.max_passes).unwrap();
                    writeln!(s, "svm.cache_mb = {}", v.cache_mb).unwrap();
                    writeln!(s, "svm.tune = {}", self.svm_tune).unwrap();
                }
                TrainConfig::Rf(r) => {
                    writeln!(s, "rf.n_trees = {}", r.n_trees).unwrap();
                    writeln!(s, "rf.max_depth = {}", r.max_depth).unwrap();
                    let fps = match r.features_per_split {
                        MaxFeatures::Sqrt => "sqrt".to_string(),
                        MaxFeatures::All => "all".to_string(),
                        MaxFeatures::Count(n) => n.to_string(),
                    };
                    writeln!(s, "rf.features_per_split = {fps}").unwrap();
                    writeln!(s, "rf.bootstrap = {}", r.bootstrap).unwrap();
                    writeln!(s, "rf.seed = {}", r.seed).unwrap();
                }
                TrainConfig::Gbdt(g) => {
                    writeln!(s, "gbdt.n_rounds = {}", g.n_rounds).unwrap();
                    writeln!(s, "gbdt.max_depth = {}", g.max_depth).unwrap();
                    writeln!(s, "gbdt.learning_rate = {}", g.learning_rate).unwrap();
                    writeln!(s, "gbdt.row_subsample = {}", g.row_subsample).unwrap();
                    writeln!(s, "gbdt.col_subsample = {}", g.col_subsample).unwrap();
                    writeln!(s, "gbdt.lambda = {}", g.lambda).unwrap();
                    writeln!(s, "gbdt.seed = {}", g.seed).unwrap();
                }
            }
        }
        writeln!(s, "split.train_fraction = {}", self.split.train_fraction).unwrap();
        writeln!(s, "split.seed = {}", self.split.seed).unwrap();
        writeln!(s, "split.stratified = {}", self.split.stratified).unwrap();
        writeln!(s, "run.raw_baseline = {}", self.include_raw_baseline).unwrap();
        s
    }
}

fn method_key(m: FeatureMethod) -> &'static str {
    match m {
        FeatureMethod::Hog => "hog",
        FeatureMethod::Lbp => "lbp",
        FeatureMethod::Gabor => "gabor",
        FeatureMethod::Raw => "raw",
    }
}
