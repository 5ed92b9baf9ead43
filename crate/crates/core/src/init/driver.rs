use rand::seq::index;
use rand::Rng;

use super::baseline::{init_he, init_xavier};
use super::blocks::extract_random_crops;
use super::config::{InitConfig, Scheme};
use super::datastats::data_stats_init_layer;
use super::pca::pca_init;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{LayerSpec, Network, NetworkSpec, Params};
use crate::numerics::{SampleMatrix, Tensor};

/// Initialize every affine layer of `spec` with the configured scheme.
/// Biases are always zero.
///
/// Data-dependent schemes first draw the subsample `D̃` (uniform, without
/// replacement). Datastats then walks the affine layers in order: layer k's
/// statistics come from the inputs it receives, computed through layers
/// `1..k−1` with the weights already assigned. Errors carry the affine
/// ordinal `k`.
pub fn initialize_network<R: Rng + ?Sized>(
    spec: &NetworkSpec,
    dataset: &Dataset,
    config: &InitConfig,
    rng: &mut R,
) -> Result<Network> {
    config.validate()?;
    let mut net = Network::zeros(spec.clone());
    let affine = spec.affine_layers();
    match config.scheme {
        Scheme::He | Scheme::Xavier => {
            for (k, &li) in affine.iter().enumerate() {
                set_baseline(&mut net, k, &spec.layers()[li], config.scheme, rng)
                    .map_err(|e| e.at_layer(k + 1))?;
            }
        }
        Scheme::Pca => {
            let probes = subsample(dataset, config, rng)?;
            for (k, &li) in affine.iter().enumerate() {
                let layer = spec.layers()[li];
                match layer {
                    LayerSpec::Conv2d {
                        out_channels,
                        kernel,
                        in_channels,
                    } if k == 0 => {
                        let images: Vec<Tensor> =
                            probes.iter().map(|&i| dataset.images[i].clone()).collect();
                        let bank = pca_init(
                            &images,
                            out_channels,
                            kernel,
                            in_channels,
                            config.pca_center,
                        )
                        .map_err(|e| e.at_layer(k + 1))?;
                        net.params_mut()[k].weight =
                            bank.to_weight(&layer.weight_shape().unwrap())?;
                    }
                    _ => set_baseline(&mut net, k, &layer, Scheme::He, rng)
                        .map_err(|e| e.at_layer(k + 1))?,
                }
            }
        }
        Scheme::DataStats => {
            let probes = subsample(dataset, config, rng)?;
            for (k, &li) in affine.iter().enumerate() {
                let layer = spec.layers()[li];
                let crops = layer_crops(
                    &net,
                    dataset,
                    &probes,
                    k + 1,
                    &layer,
                    config.crops_per_image,
                    rng,
                )
                .map_err(|e| e.at_layer(k + 1))?;
                let bank = data_stats_init_layer(
                    &crops,
                    layer.units().unwrap(),
                    layer.fan_in().unwrap(),
                    config.epsilon,
                    rng,
                )
                .map_err(|e| e.at_layer(k + 1))?;
                net.params_mut()[k].weight = bank.to_weight(&layer.weight_shape().unwrap())?;
            }
        }
    }
    Ok(net)
}

fn set_baseline<R: Rng + ?Sized>(
    net: &mut Network,
    k: usize,
    layer: &LayerSpec,
    scheme: Scheme,
    rng: &mut R,
) -> Result<()> {
    let shape = layer.weight_shape().unwrap();
    let fan_in = layer.fan_in().unwrap();
    let weight = match scheme {
        Scheme::Xavier => init_xavier(fan_in, layer.fan_out().unwrap(), &shape, rng)?,
        _ => init_he(fan_in, &shape, rng)?,
    };
    net.params_mut()[k] = Params {
        weight,
        bias: Tensor::zeros(&[shape[0]]),
    };
    Ok(())
}

fn subsample<R: Rng + ?Sized>(
    dataset: &Dataset,
    config: &InitConfig,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if dataset.len() < config.subsample_size {
        return Err(Error::invalid(format!(
            "dataset has {} images but the init subsample needs {}",
            dataset.len(),
            config.subsample_size
        )));
    }
    Ok(index::sample(rng, dataset.len(), config.subsample_size).into_vec())
}

/// Statistics samples for affine layer `k` (1-based): random crops of each
/// probe's prefix activation for conv layers, the whole activation vector
/// for dense layers. Rows are ordered by probe, then crop.
pub fn layer_crops<R: Rng + ?Sized>(
    net: &Network,
    dataset: &Dataset,
    probes: &[usize],
    k: usize,
    layer: &LayerSpec,
    crops_per_image: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    let mut rows = Vec::new();
    let mut count = 0;
    for &i in probes {
        let act = net.forward_prefix(&dataset.images[i], k)?;
        match *layer {
            LayerSpec::Conv2d { kernel, .. } => {
                let crops = extract_random_crops(&act, kernel, crops_per_image, rng)?;
                count += crops.rows();
                rows.extend_from_slice(crops.data());
            }
            _ => {
                count += 1;
                rows.extend_from_slice(act.data());
            }
        }
    }
    SampleMatrix::new(count, layer.fan_in().unwrap(), rows)
}
