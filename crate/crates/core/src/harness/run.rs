use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::config::{DatasetSource, RunConfig};
use super::metrics::{format_float, RunMetrics};
use super::model_io::{load_model, save_model};
use super::plot::{self, Panel, Series};
use super::saliency::saliency_map;
use crate::data::{
    load_cifar10, load_mnist_idx, load_pgm_dir, minibatches, split_counts, split_indices,
    synthetic_dataset, write_pgm, Dataset,
};
use crate::error::{Error, Result};
use crate::init::{initialize_network, FilterBank, Scheme};
use crate::nn::{batch_gradient, evaluate, sgd_step, Network, NetworkSpec};
use crate::numerics::Tensor;
use crate::rng::{stream, Stream};

pub fn load_dataset(source: &DatasetSource, seed: u64) -> Result<Dataset> {
    match source {
        DatasetSource::Mnist { images, labels } => load_mnist_idx(images, labels),
        DatasetSource::Cifar10 { batches } => load_cifar10(batches),
        DatasetSource::PgmDir { root } => load_pgm_dir(root),
        DatasetSource::Synthetic(p) => {
            synthetic_dataset(&p.to_spec(), &mut stream(seed, Stream::Data))
        }
    }
}

/// Train/validation halves of a dataset, centered with the training mean when
/// requested.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: Dataset,
    pub val: Dataset,
    pub val_indices: Vec<usize>,
    pub train_mean: Option<Tensor>,
}

impl PreparedData {
    /// Hex SHA-256 of the validation indices (each as u64 LE).
    pub fn val_hash(&self) -> String {
        let mut h = Sha256::new();
        for &i in &self.val_indices {
            h.update((i as u64).to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn prepare(config: &RunConfig, dataset: &Dataset) -> Result<PreparedData> {
    let mut rng = stream(config.seed, Stream::Split);
    let (train_idx, val_idx) = match (config.train_size, config.val_size) {
        (Some(t), Some(v)) => split_counts(dataset.len(), t, v, &mut rng)?,
        _ => split_indices(dataset.len(), config.train_fraction, &mut rng)?,
    };
    let mut train = dataset.subset(&train_idx);
    let mut val = dataset.subset(&val_idx);
    let mut train_mean = None;
    if config.center {
        let mean = train.mean_image();
        train = train.centered(&mean);
        val = val.centered(&mean);
        train_mean = Some(mean);
    }
    Ok(PreparedData {
        train,
        val,
        val_indices: val_idx,
        train_mean,
    })
}

pub fn network_spec(config: &RunConfig, dataset: &Dataset) -> Result<NetworkSpec> {
    NetworkSpec::parse(&config.layers, dataset.image_shape(), dataset.class_count)
}

/// Initial weights exactly as a `train` run with this config would draw them.
pub fn initial_network(config: &RunConfig, data: &PreparedData) -> Result<Network> {
    let spec = network_spec(config, &data.train)?;
    initialize_network(
        &spec,
        &data.train,
        &config.init,
        &mut stream(config.seed, Stream::Init),
    )
}

/// Plain SGD for `config.epochs` epochs. Rows are appended to `metrics` as
/// epochs finish, so a failure leaves the completed epochs in place.
pub fn train_network(
    net: &mut Network,
    data: &PreparedData,
    config: &RunConfig,
    metrics: &mut RunMetrics,
) -> Result<()> {
    let mut rng = stream(config.seed, Stream::Batches);
    let n = data.train.len();
    for epoch in 1..=config.epochs {
        let mut total = 0.0;
        for batch in minibatches(n, config.batch_size, &mut rng)? {
            let (loss, grads) = batch_gradient(net, &data.train, &batch)?;
            if !loss.is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "training loss became {loss} in epoch {epoch}"
                )));
            }
            sgd_step(net, &grads, config.lr)?;
            total += loss * batch.len() as f64;
        }
        let (val_loss, val_acc) = evaluate(net, &data.val)?;
        if !val_loss.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "validation loss became {val_loss} in epoch {epoch}"
            )));
        }
        metrics.push(total / n as f64, val_loss, val_acc);
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub network: Network,
    pub val_hash: String,
}

/// Load, split, initialize, train, and write `metrics.csv`, `model.dsin`,
/// `plot.svg`, `config.conf` and `run_info.txt` under `config.out_dir`.
pub fn run_experiment(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let dataset = load_dataset(&config.dataset, config.seed)?;
    let data = prepare(config, &dataset)?;
    run_prepared(config, &data, &config.out_dir)
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn run_prepared(config: &RunConfig, data: &PreparedData, out_dir: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_file(&out_dir.join("config.conf"), config.to_text())?;
    let mut net = initial_network(config, data)?;
    let val_hash = data.val_hash();
    let mut info = String::new();
    let _ = writeln!(info, "init = {}", config.init.scheme);
    let _ = writeln!(info, "seed = {}", config.seed);
    let _ = writeln!(info, "train_samples = {}", data.train.len());
    let _ = writeln!(info, "val_samples = {}", data.val.len());
    let _ = writeln!(info, "val_index_sha256 = {val_hash}");
    let _ = writeln!(info, "parameters = {}", net.parameter_count());
    let _ = writeln!(info, "network = {}", net.spec().describe());
    write_file(&out_dir.join("run_info.txt"), info)?;

    let mut metrics = RunMetrics::default();
    let trained = train_network(&mut net, data, config, &mut metrics);
    metrics.write_csv(out_dir.join("metrics.csv"))?;
    trained?;
    save_model(&net, out_dir.join("model.dsin"))?;
    write_file(
        &out_dir.join("plot.svg"),
        run_plot(&metrics, config.init.scheme.name()),
    )?;
    Ok(RunOutcome {
        metrics,
        network: net,
        val_hash,
    })
}

fn curves<'a>(name: &'a str, m: &RunMetrics) -> [Series<'a>; 3] {
    let pts = |f: fn(&super::metrics::EpochRecord) -> f64| {
        m.rows.iter().map(|r| (r.epoch as f64, f(r))).collect()
    };
    [
        Series {
            name,
            points: pts(|r| r.train_loss),
        },
        Series {
            name,
            points: pts(|r| r.val_loss),
        },
        Series {
            name,
            points: pts(|r| r.val_accuracy),
        },
    ]
}

fn run_plot(metrics: &RunMetrics, scheme: &str) -> String {
    let [train, val, acc] = curves(scheme, metrics);
    plot::render(&[
        Panel {
            title: "Logloss",
            x_label: "epoch",
            y_label: "loss",
            series: vec![
                Series {
                    name: "train",
                    points: train.points,
                },
                Series {
                    name: "validation",
                    points: val.points,
                },
            ],
        },
        Panel {
            title: "Validation accuracy",
            x_label: "epoch",
            y_label: "accuracy",
            series: vec![Series {
                name: "validation",
                points: acc.points,
            }],
        },
    ])
}

/// Train the same config once per scheme on one shared split and batch
/// order. Each scheme writes to `out_dir/<scheme>/`; `out_dir/overlay.svg`
/// overlays the schemes that finished. A failing scheme does not stop the
/// others.
pub fn compare_initializers(
    config: &RunConfig,
    schemes: &[Scheme],
) -> Result<Vec<(Scheme, Result<RunOutcome>)>> {
    if schemes.len() < 2 {
        return Err(Error::invalid("compare needs at least two initializers"));
    }
    for (i, s) in schemes.iter().enumerate() {
        if schemes[..i].contains(s) {
            return Err(Error::invalid(format!("initializer {s} listed twice")));
        }
    }
    config.validate()?;
    let dataset = load_dataset(&config.dataset, config.seed)?;
    let data = prepare(config, &dataset)?;
    let results: Vec<(Scheme, Result<RunOutcome>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = schemes
            .iter()
            .map(|&s| {
                let cfg = config.with_scheme(s);
                let dir = config.out_dir.join(s.name());
                let data = &data;
                (s, scope.spawn(move || run_prepared(&cfg, data, &dir)))
            })
            .collect();
        handles
            .into_iter()
            .map(|(s, h)| (s, h.join().expect("scheme worker panicked")))
            .collect()
    });

    let finished: Vec<(Scheme, &RunMetrics)> = results
        .iter()
        .filter_map(|(s, r)| r.as_ref().ok().map(|o| (*s, &o.metrics)))
        .collect();
    let mut loss = Vec::new();
    let mut acc = Vec::new();
    for (s, m) in &finished {
        let [_, val, a] = curves(s.name(), m);
        loss.push(val);
        acc.push(a);
    }
    let svg = plot::render(&[
        Panel {
            title: "Validation logloss",
            x_label: "epoch",
            y_label: "loss",
            series: loss,
        },
        Panel {
            title: "Validation accuracy",
            x_label: "epoch",
            y_label: "accuracy",
            series: acc,
        },
    ]);
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    write_file(&config.out_dir.join("overlay.svg"), svg)?;
    Ok(results)
}

/// The initial filter bank of affine layer `k` (1-based), one filter per CSV
/// row, weights in `(c, y, x)` order for conv layers.
pub fn dump_init(config: &RunConfig, k: usize, out: &Path) -> Result<FilterBank> {
    config.validate()?;
    let dataset = load_dataset(&config.dataset, config.seed)?;
    let data = prepare(config, &dataset)?;
    let net = initial_network(config, &data)?;
    if k == 0 || k > net.affine_count() {
        return Err(Error::invalid(format!(
            "layer {k} out of range: the network has {} weight layers",
            net.affine_count()
        )));
    }
    let bank = FilterBank::from_weight(&net.params()[k - 1].weight);
    let mut csv = String::new();
    for row in bank.filters.iter_rows() {
        let line: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    write_file(out, csv)?;
    Ok(bank)
}

/// Heatmap for validation image `index` of the split the model was trained
/// on. `config` defaults to the `config.conf` stored next to the model.
pub fn visualize(
    model: &Path,
    config: Option<&Path>,
    index: usize,
    out: &Path,
) -> Result<(Tensor, usize)> {
    let net = load_model(model)?;
    let config_path: PathBuf = match config {
        Some(p) => p.to_path_buf(),
        None => model.parent().unwrap_or(Path::new(".")).join("config.conf"),
    };
    let config = RunConfig::load(&config_path)?;
    let dataset = load_dataset(&config.dataset, config.seed)?;
    let data = prepare(&config, &dataset)?;
    let image = data.val.images.get(index).ok_or_else(|| {
        Error::invalid(format!(
            "image index {index} out of range: validation split has {} images",
            data.val.len()
        ))
    })?;
    let map = saliency_map(&net, image)?;
    let pred = net.predict(image)?;
    let (h, w) = (map.shape()[0], map.shape()[1]);
    write_pgm(out, map.data(), h, w)?;
    Ok((map, pred))
}
