//! Forward and backward kernels for individual layers.
//!
//! Tensors are `(c, h, w)` row-major for images and rank-1 for vectors.
//! Conv weights are `(n_k, c_in, m, m)` and dense weights `(fan_out, fan_in)`.

use super::network::Params;
use super::spec::LayerSpec;
use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Valid stride-1 cross-correlation plus per-channel bias.
pub(crate) fn conv_forward(params: &Params, input: &Tensor) -> Tensor {
    let &[n_k, c_in, m, _] = params.weight.shape() else {
        unreachable!("conv weight is rank 4")
    };
    let (h, w) = (input.shape()[1], input.shape()[2]);
    let (oh, ow) = (h - m + 1, w - m + 1);
    let x = input.data();
    let wt = params.weight.data();
    let mut out = vec![0.0; n_k * oh * ow];
    for o in 0..n_k {
        let plane = &mut out[o * oh * ow..(o + 1) * oh * ow];
        plane.fill(params.bias.data()[o]);
        for c in 0..c_in {
            for i in 0..m {
                for j in 0..m {
                    let wv = wt[((o * c_in + c) * m + i) * m + j];
                    if wv == 0.0 {
                        continue;
                    }
                    for y in 0..oh {
                        let src = &x[(c * h + y + i) * w + j..][..ow];
                        let dst = &mut plane[y * ow..(y + 1) * ow];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += wv * s;
                        }
                    }
                }
            }
        }
    }
    Tensor::new(vec![n_k, oh, ow], out).expect("conv output shape")
}

/// Returns weight/bias gradients and, if asked, the input gradient.
pub(crate) fn conv_backward(
    params: &Params,
    input: &Tensor,
    dout: &Tensor,
    want_input_grad: bool,
) -> (Params, Option<Tensor>) {
    let &[n_k, c_in, m, _] = params.weight.shape() else {
        unreachable!("conv weight is rank 4")
    };
    let (h, w) = (input.shape()[1], input.shape()[2]);
    let (oh, ow) = (h - m + 1, w - m + 1);
    let x = input.data();
    let g = dout.data();
    let wt = params.weight.data();
    let mut dw = vec![0.0; wt.len()];
    let mut db = vec![0.0; n_k];
    let mut dx = want_input_grad.then(|| vec![0.0; x.len()]);
    for o in 0..n_k {
        let plane = &g[o * oh * ow..(o + 1) * oh * ow];
        db[o] = plane.iter().sum();
        for c in 0..c_in {
            for i in 0..m {
                for j in 0..m {
                    let widx = ((o * c_in + c) * m + i) * m + j;
                    let mut acc = 0.0;
                    for y in 0..oh {
                        let src = &x[(c * h + y + i) * w + j..][..ow];
                        let gr = &plane[y * ow..(y + 1) * ow];
                        acc += src.iter().zip(gr).map(|(a, b)| a * b).sum::<f64>();
                    }
                    dw[widx] = acc;
                    if let Some(dx) = dx.as_mut() {
                        let wv = wt[widx];
                        for y in 0..oh {
                            let dst = &mut dx[(c * h + y + i) * w + j..][..ow];
                            let gr = &plane[y * ow..(y + 1) * ow];
                            for (d, gv) in dst.iter_mut().zip(gr) {
                                *d += wv * gv;
                            }
                        }
                    }
                }
            }
        }
    }
    let grads = Params {
        weight: Tensor::new(params.weight.shape().to_vec(), dw).expect("shape"),
        bias: Tensor::vector(db),
    };
    let dx = dx.map(|d| Tensor::new(input.shape().to_vec(), d).expect("shape"));
    (grads, dx)
}

pub(crate) fn dense_forward(params: &Params, input: &Tensor) -> Tensor {
    let fan_in = params.weight.shape()[1];
    let x = input.data();
    let out = params
        .weight
        .data()
        .chunks_exact(fan_in)
        .zip(params.bias.data())
        .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
        .collect();
    Tensor::vector(out)
}

pub(crate) fn dense_backward(
    params: &Params,
    input: &Tensor,
    dout: &Tensor,
    want_input_grad: bool,
) -> (Params, Option<Tensor>) {
    let fan_in = params.weight.shape()[1];
    let x = input.data();
    let g = dout.data();
    let mut dw = vec![0.0; params.weight.len()];
    for (row, &gv) in dw.chunks_exact_mut(fan_in).zip(g) {
        if gv == 0.0 {
            continue;
        }
        for (d, v) in row.iter_mut().zip(x) {
            *d = gv * v;
        }
    }
    let dx = want_input_grad.then(|| {
        let mut dx = vec![0.0; fan_in];
        for (row, &gv) in params.weight.data().chunks_exact(fan_in).zip(g) {
            if gv == 0.0 {
                continue;
            }
            for (d, w) in dx.iter_mut().zip(row) {
                *d += gv * w;
            }
        }
        Tensor::new(input.shape().to_vec(), dx).expect("shape")
    });
    let grads = Params {
        weight: Tensor::new(params.weight.shape().to_vec(), dw).expect("shape"),
        bias: Tensor::vector(g.to_vec()),
    };
    (grads, dx)
}

pub(crate) fn relu_forward(input: &Tensor) -> Tensor {
    input.map(|x| x.max(0.0))
}

pub(crate) fn relu_backward(input: &Tensor, dout: &Tensor) -> Tensor {
    let data = input
        .data()
        .iter()
        .zip(dout.data())
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(input.shape().to_vec(), data).expect("shape")
}

/// 2×2 max pooling with stride 2. Also returns, per output element, the flat
/// input index of the window maximum (first in row-major scan on ties).
pub(crate) fn maxpool_forward(input: &Tensor) -> (Tensor, Vec<usize>) {
    let (c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (oh, ow) = (h / 2, w / 2);
    let x = input.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut argmax = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for y in 0..oh {
            for xx in 0..ow {
                let base = (ch * h + 2 * y) * w + 2 * xx;
                let mut best = base;
                for idx in [base + 1, base + w, base + w + 1] {
                    if x[idx] > x[best] {
                        best = idx;
                    }
                }
                out.push(x[best]);
                argmax.push(best);
            }
        }
    }
    (Tensor::new(vec![c, oh, ow], out).expect("shape"), argmax)
}

pub(crate) fn maxpool_backward(input_shape: &[usize], argmax: &[usize], dout: &Tensor) -> Tensor {
    let mut dx = Tensor::zeros(input_shape);
    let d = dx.data_mut();
    for (&idx, &g) in argmax.iter().zip(dout.data()) {
        d[idx] += g;
    }
    dx
}

fn check_input(layer: &LayerSpec, input: &Tensor) -> Result<()> {
    let expected = match *layer {
        LayerSpec::Conv2d {
            in_channels,
            kernel,
            ..
        } => {
            let s = input.shape();
            if s.len() != 3 || s[0] != in_channels || s[1] < kernel || s[2] < kernel {
                return Err(Error::invalid(format!(
                    "{layer} expects {in_channels}xHxW input with H,W >= {kernel}, got {s:?}"
                )));
            }
            return Ok(());
        }
        LayerSpec::Dense { fan_in, .. } => vec![fan_in],
        _ => return Ok(()),
    };
    if input.shape() != expected.as_slice() {
        return Err(Error::invalid(format!(
            "{layer} expects input {expected:?}, got {:?}",
            input.shape()
        )));
    }
    Ok(())
}

/// Apply an affine layer: `W·x + b` for dense, cross-correlation plus bias for conv.
pub fn affine_forward(layer: &LayerSpec, params: &Params, input: &Tensor) -> Result<Tensor> {
    check_input(layer, input)?;
    let expected = layer
        .weight_shape()
        .ok_or_else(|| Error::invalid(format!("{layer} is not an affine layer")))?;
    if params.weight.shape() != expected.as_slice() || params.bias.len() != expected[0] {
        return Err(Error::invalid(format!(
            "{layer} parameters have shape {:?}/{:?}, expected {expected:?}",
            params.weight.shape(),
            params.bias.shape()
        )));
    }
    Ok(match layer {
        LayerSpec::Conv2d { .. } => conv_forward(params, input),
        _ => dense_forward(params, input),
    })
}

/// Apply a parameter-free layer.
pub fn activation_forward(kind: &LayerSpec, input: &Tensor) -> Result<Tensor> {
    match kind {
        LayerSpec::Relu => Ok(relu_forward(input)),
        LayerSpec::MaxPool2x2 => {
            let s = input.shape();
            if s.len() != 3 || !s[1].is_multiple_of(2) || !s[2].is_multiple_of(2) {
                return Err(Error::invalid(format!(
                    "maxpool2x2 needs a CxHxW input with even H and W, got {s:?}"
                )));
            }
            Ok(maxpool_forward(input).0)
        }
        LayerSpec::Flatten => Ok(Tensor::vector(input.data().to_vec())),
        other => Err(Error::invalid(format!(
            "{other} is not an activation layer"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn random_tensor(shape: &[usize], r: &mut impl Rng) -> Tensor {
        let n = shape.iter().product();
        Tensor::new(
            shape.to_vec(),
            (0..n).map(|_| r.random_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    fn conv_oracle(w: &Tensor, b: &Tensor, x: &Tensor) -> Vec<f64> {
        let (n_k, c_in, m) = (w.shape()[0], w.shape()[1], w.shape()[2]);
        let (h, wd) = (x.shape()[1], x.shape()[2]);
        let mut out = Vec::new();
        for o in 0..n_k {
            for y in 0..h - m + 1 {
                for xx in 0..wd - m + 1 {
                    let mut s = b.data()[o];
                    for c in 0..c_in {
                        for i in 0..m {
                            for j in 0..m {
                                s += w.data()[((o * c_in + c) * m + i) * m + j]
                                    * x.data()[(c * h + y + i) * wd + xx + j];
                            }
                        }
                    }
                    out.push(s);
                }
            }
        }
        out
    }

    #[test]
    fn identity_kernel() {
        let layer = LayerSpec::Conv2d {
            out_channels: 1,
            kernel: 1,
            in_channels: 1,
        };
        let p = Params {
            weight: Tensor::filled(&[1, 1, 1, 1], 1.0),
            bias: Tensor::zeros(&[1]),
        };
        let x = random_tensor(&[1, 5, 4], &mut rng::seeded(1));
        assert_eq!(affine_forward(&layer, &p, &x).unwrap(), x);
    }

    #[test]
    fn ones_kernel_on_constant_input() {
        let layer = LayerSpec::Conv2d {
            out_channels: 1,
            kernel: 3,
            in_channels: 1,
        };
        let p = Params {
            weight: Tensor::filled(&[1, 1, 3, 3], 1.0),
            bias: Tensor::zeros(&[1]),
        };
        let y = affine_forward(&layer, &p, &Tensor::filled(&[1, 6, 6], 0.5)).unwrap();
        assert_eq!(y.shape(), &[1, 4, 4]);
        assert!(y.data().iter().all(|&v| v == 4.5));
    }

    #[test]
    fn dense_matches_loop() {
        let mut r = rng::seeded(2);
        let layer = LayerSpec::Dense {
            fan_in: 7,
            fan_out: 4,
        };
        let p = Params {
            weight: random_tensor(&[4, 7], &mut r),
            bias: random_tensor(&[4], &mut r),
        };
        let x = random_tensor(&[7], &mut r);
        let y = affine_forward(&layer, &p, &x).unwrap();
        for o in 0..4 {
            let mut s = p.bias.data()[o];
            for i in 0..7 {
                s += p.weight.data()[o * 7 + i] * x.data()[i];
            }
            assert!((y.data()[o] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_shape_errors() {
        let layer = LayerSpec::Dense {
            fan_in: 3,
            fan_out: 2,
        };
        let p = Params {
            weight: Tensor::zeros(&[2, 3]),
            bias: Tensor::zeros(&[2]),
        };
        assert!(affine_forward(&layer, &p, &Tensor::zeros(&[4])).is_err());
        let bad = Params {
            weight: Tensor::zeros(&[3, 2]),
            bias: Tensor::zeros(&[2]),
        };
        assert!(affine_forward(&layer, &bad, &Tensor::zeros(&[3])).is_err());
    }

    #[test]
    fn activations() {
        let y =
            activation_forward(&LayerSpec::Relu, &Tensor::vector(vec![-1.0, 2.0, 0.0])).unwrap();
        assert_eq!(y.data(), &[0.0, 2.0, 0.0]);
        let x = Tensor::new(vec![1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = activation_forward(&LayerSpec::MaxPool2x2, &x).unwrap();
        assert_eq!((y.shape(), y.data()), (&[1usize, 1, 1][..], &[4.0][..]));
        assert!(activation_forward(&LayerSpec::MaxPool2x2, &Tensor::zeros(&[1, 3, 2])).is_err());
    }

    #[test]
    fn flatten_matches_index_arithmetic() {
        let x = random_tensor(&[3, 4, 5], &mut rng::seeded(3));
        let y = activation_forward(&LayerSpec::Flatten, &x).unwrap();
        assert_eq!(y.shape(), &[60]);
        for c in 0..3 {
            for i in 0..4 {
                for j in 0..5 {
                    assert_eq!(y.data()[c * 20 + i * 5 + j], x.data()[x.idx3(c, i, j)]);
                }
            }
        }
    }

    #[test]
    fn maxpool_ties_pick_first() {
        let x = Tensor::new(vec![1, 2, 2], vec![5.0, 5.0, 5.0, 5.0]).unwrap();
        let (_, argmax) = maxpool_forward(&x);
        assert_eq!(argmax, vec![0]);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn conv_matches_quadruple_loop(
            c_in in 1usize..=3, n_k in 1usize..=4, m in 1usize..=5,
            extra_h in 0usize..=11, extra_w in 0usize..=11, seed in proptest::prelude::any::<u64>()
        ) {
            let (h, w) = (m + extra_h, m + extra_w);
            let mut r = rng::seeded(seed);
            let layer = LayerSpec::Conv2d { out_channels: n_k, kernel: m, in_channels: c_in };
            let p = Params { weight: random_tensor(&[n_k, c_in, m, m], &mut r), bias: random_tensor(&[n_k], &mut r) };
            let x = random_tensor(&[c_in, h, w], &mut r);
            let y = affine_forward(&layer, &p, &x).unwrap();
            let want = conv_oracle(&p.weight, &p.bias, &x);
            for (a, b) in y.data().iter().zip(&want) {
                proptest::prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
