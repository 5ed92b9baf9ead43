//! Run configuration files: UTF-8, one `key = value` per line, `#` starts a
//! comment. Unknown or repeated keys are errors. Relative paths resolve
//! against the directory holding the config file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::SyntheticSpec;
use crate::error::{Error, Result};
use crate::init::{InitConfig, Scheme};

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Mnist { images: PathBuf, labels: PathBuf },
    Cifar10 { batches: Vec<PathBuf> },
    PgmDir { root: PathBuf },
    Synthetic(SyntheticParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub image_side: usize,
    pub patch_side: usize,
    pub noise_std: f64,
    pub patch_jitter: usize,
    pub samples_per_class: usize,
}

impl SyntheticParams {
    pub fn to_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            image_side: self.image_side,
            signal_patch: SyntheticSpec::cross_patch(self.patch_side),
            noise_std: self.noise_std,
            patch_jitter: self.patch_jitter,
            samples_per_class: self.samples_per_class,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Layer list, e.g. `conv(8,3) relu maxpool flatten dense(64) relu dense(10)`.
    pub layers: String,
    pub dataset: DatasetSource,
    pub init: InitConfig,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub train_fraction: f64,
    /// Explicit split sizes; when set they override `train_fraction`.
    pub train_size: Option<usize>,
    pub val_size: Option<usize>,
    /// Subtract the training-set mean image from all images.
    pub center: bool,
}

const KEYS: &[&str] = &[
    "layers",
    "dataset",
    "mnist_images",
    "mnist_labels",
    "cifar_batches",
    "pgm_dir",
    "synthetic_side",
    "synthetic_patch",
    "synthetic_noise",
    "synthetic_jitter",
    "synthetic_per_class",
    "init",
    "subsample_size",
    "crops_per_image",
    "epsilon",
    "pca_center",
    "epochs",
    "lr",
    "batch_size",
    "seed",
    "out_dir",
    "train_fraction",
    "train_size",
    "val_size",
    "center",
];

struct Entries {
    values: BTreeMap<String, (usize, String)>,
    base: PathBuf,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.values.get(key)
    }

    fn get<T: FromStr>(&self, key: &str, default: Option<T>) -> Result<T> {
        match self.raw(key) {
            Some((line, v)) => v.parse().map_err(|_| Error::Config {
                line: *line,
                message: format!("bad value `{v}` for `{key}`"),
            }),
            None => default.ok_or_else(|| Error::Config {
                line: 0,
                message: format!("missing required key `{key}`"),
            }),
        }
    }

    fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key).map(|_| self.get(key, None)).transpose()
    }

    fn path(&self, key: &str) -> Result<PathBuf> {
        let s: String = self.get(key, None)?;
        Ok(self.base.join(s.trim()))
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let abs = std::path::absolute(path).map_err(|e| Error::io(path, e))?;
        let base = abs.parent().map(Path::to_path_buf).unwrap_or_default();
        RunConfig::parse(&text, &base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key `{key}`"),
                });
            }
            if values
                .insert(key.to_string(), (line, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        let e = Entries {
            values,
            base: base_dir.to_path_buf(),
        };

        let kind: String = e.get("dataset", None)?;
        let dataset = match kind.as_str() {
            "mnist" => DatasetSource::Mnist {
                images: e.path("mnist_images")?,
                labels: e.path("mnist_labels")?,
            },
            "cifar10" => {
                let list: String = e.get("cifar_batches", None)?;
                DatasetSource::Cifar10 {
                    batches: list
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| e.base.join(s))
                        .collect(),
                }
            }
            "pgm" => DatasetSource::PgmDir {
                root: e.path("pgm_dir")?,
            },
            "synthetic" => DatasetSource::Synthetic(SyntheticParams {
                image_side: e.get("synthetic_side", Some(16))?,
                patch_side: e.get("synthetic_patch", Some(5))?,
                noise_std: e.get("synthetic_noise", Some(0.2))?,
                patch_jitter: e.get("synthetic_jitter", Some(2))?,
                samples_per_class: e.get("synthetic_per_class", Some(500))?,
            }),
            other => {
                return Err(Error::Config {
                    line: e.raw("dataset").map_or(0, |r| r.0),
                    message: format!(
                        "unknown dataset `{other}` (expected mnist, cifar10, pgm or synthetic)"
                    ),
                })
            }
        };

        let defaults = InitConfig::default();
        let seed: u64 = e.get("seed", Some(0))?;
        let init = InitConfig {
            scheme: e.get("init", Some(defaults.scheme))?,
            subsample_size: e.get("subsample_size", Some(defaults.subsample_size))?,
            crops_per_image: e.get("crops_per_image", Some(defaults.crops_per_image))?,
            epsilon: e.get("epsilon", Some(defaults.epsilon))?,
            seed,
            pca_center: e.get("pca_center", Some(false))?,
        };
        let cfg = RunConfig {
            layers: e.get("layers", None)?,
            dataset,
            init,
            epochs: e.get("epochs", Some(10))?,
            lr: e.get("lr", Some(0.01))?,
            batch_size: e.get("batch_size", Some(32))?,
            seed,
            out_dir: e
                .base
                .join(e.get::<String>("out_dir", Some("runs/latest".into()))?),
            train_fraction: e.get("train_fraction", Some(0.9))?,
            train_size: e.opt("train_size")?,
            val_size: e.opt("val_size")?,
            center: e.get("center", Some(false))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Err(Error::Config { line: 0, message });
        if self.epochs < 1 {
            return bad("epochs must be >= 1".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be > 0, got {}", self.lr));
        }
        if self.batch_size < 1 {
            return bad("batch_size must be >= 1".into());
        }
        if self.train_size.is_some() != self.val_size.is_some() {
            return bad("train_size and val_size must be given together".into());
        }
        self.init.validate()
    }

    pub fn with_scheme(&self, scheme: Scheme) -> Self {
        let mut c = self.clone();
        c.init.scheme = scheme;
        c
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.seed = seed;
        c.init.seed = seed;
        c
    }

    /// Render back to the file format, with absolute paths.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("layers", self.layers.clone());
        match &self.dataset {
            DatasetSource::Mnist { images, labels } => {
                kv("dataset", "mnist".into());
                kv("mnist_images", images.display().to_string());
                kv("mnist_labels", labels.display().to_string());
            }
            DatasetSource::Cifar10 { batches } => {
                kv("dataset", "cifar10".into());
                let list: Vec<String> = batches.iter().map(|p| p.display().to_string()).collect();
                kv("cifar_batches", list.join(","));
            }
            DatasetSource::PgmDir { root } => {
                kv("dataset", "pgm".into());
                kv("pgm_dir", root.display().to_string());
            }
            DatasetSource::Synthetic(p) => {
                kv("dataset", "synthetic".into());
                kv("synthetic_side", p.image_side.to_string());
                kv("synthetic_patch", p.patch_side.to_string());
                kv("synthetic_noise", p.noise_std.to_string());
                kv("synthetic_jitter", p.patch_jitter.to_string());
                kv("synthetic_per_class", p.samples_per_class.to_string());
            }
        }
        kv("init", self.init.scheme.to_string());
        kv("subsample_size", self.init.subsample_size.to_string());
        kv("crops_per_image", self.init.crops_per_image.to_string());
        kv("epsilon", format!("{:e}", self.init.epsilon));
        kv("pca_center", self.init.pca_center.to_string());
        kv("epochs", self.epochs.to_string());
        kv("lr", self.lr.to_string());
        kv("batch_size", self.batch_size.to_string());
        kv("seed", self.seed.to_string());
        kv("out_dir", self.out_dir.display().to_string());
        kv("train_fraction", self.train_fraction.to_string());
        if let (Some(t), Some(v)) = (self.train_size, self.val_size) {
            kv("train_size", t.to_string());
            kv("val_size", v.to_string());
        }
        kv("center", self.center.to_string());
        s
    }
}
