use std::fmt;

use crate::error::{Error, Result};

/// One layer of a feed-forward network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    /// Valid, stride-1 cross-correlation with `out_channels` filters of size
    /// `kernel × kernel × in_channels`.
    Conv2d {
        out_channels: usize,
        kernel: usize,
        in_channels: usize,
    },
    Dense {
        fan_in: usize,
        fan_out: usize,
    },
    Relu,
    MaxPool2x2,
    Flatten,
}

impl LayerSpec {
    pub fn is_affine(&self) -> bool {
        matches!(self, LayerSpec::Conv2d { .. } | LayerSpec::Dense { .. })
    }

    /// Incoming connections per output unit (`m·m·c_in` for conv).
    pub fn fan_in(&self) -> Option<usize> {
        match *self {
            LayerSpec::Conv2d {
                kernel,
                in_channels,
                ..
            } => Some(kernel * kernel * in_channels),
            LayerSpec::Dense { fan_in, .. } => Some(fan_in),
            _ => None,
        }
    }

    /// Outgoing connections per input unit, as used by Glorot scaling
    /// (`n_k·m·m` for conv).
    pub fn fan_out(&self) -> Option<usize> {
        match *self {
            LayerSpec::Conv2d {
                out_channels,
                kernel,
                ..
            } => Some(out_channels * kernel * kernel),
            LayerSpec::Dense { fan_out, .. } => Some(fan_out),
            _ => None,
        }
    }

    /// Number of filters / output units.
    pub fn units(&self) -> Option<usize> {
        match *self {
            LayerSpec::Conv2d { out_channels, .. } => Some(out_channels),
            LayerSpec::Dense { fan_out, .. } => Some(fan_out),
            _ => None,
        }
    }

    pub fn weight_shape(&self) -> Option<Vec<usize>> {
        match *self {
            LayerSpec::Conv2d {
                out_channels,
                kernel,
                in_channels,
            } => Some(vec![out_channels, in_channels, kernel, kernel]),
            LayerSpec::Dense { fan_in, fan_out } => Some(vec![fan_out, fan_in]),
            _ => None,
        }
    }

    /// Output shape for a given input shape, or why the layer cannot accept it.
    pub fn output_shape(&self, input: ActShape) -> Result<ActShape> {
        match (*self, input) {
            (
                LayerSpec::Conv2d {
                    out_channels,
                    kernel,
                    in_channels,
                },
                ActShape::Image { c, h, w },
            ) => {
                if out_channels == 0 || kernel == 0 {
                    return Err(Error::invalid(
                        "conv needs at least one filter of size >= 1",
                    ));
                }
                if c != in_channels {
                    return Err(Error::invalid(format!(
                        "conv expects {in_channels} input channels, got {c}"
                    )));
                }
                if kernel > h || kernel > w {
                    return Err(Error::invalid(format!(
                        "kernel {kernel} does not fit a {h}x{w} input"
                    )));
                }
                Ok(ActShape::Image {
                    c: out_channels,
                    h: h - kernel + 1,
                    w: w - kernel + 1,
                })
            }
            (LayerSpec::Dense { fan_in, fan_out }, ActShape::Vector(n)) => {
                if fan_in == 0 || fan_out == 0 {
                    return Err(Error::invalid("dense fan_in and fan_out must be >= 1"));
                }
                if n != fan_in {
                    return Err(Error::invalid(format!(
                        "dense expects {fan_in} inputs, got {n}"
                    )));
                }
                Ok(ActShape::Vector(fan_out))
            }
            (LayerSpec::Relu, s) => Ok(s),
            (LayerSpec::MaxPool2x2, ActShape::Image { c, h, w }) => {
                if h % 2 != 0 || w % 2 != 0 {
                    return Err(Error::invalid(format!(
                        "maxpool2x2 needs even spatial size, got {h}x{w}"
                    )));
                }
                Ok(ActShape::Image {
                    c,
                    h: h / 2,
                    w: w / 2,
                })
            }
            (LayerSpec::Flatten, s @ ActShape::Image { .. }) => Ok(ActShape::Vector(s.len())),
            (layer, s) => Err(Error::invalid(format!(
                "{layer} cannot take input of shape {s}"
            ))),
        }
    }
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LayerSpec::Conv2d {
                out_channels,
                kernel,
                ..
            } => write!(f, "conv({out_channels},{kernel})"),
            LayerSpec::Dense { fan_out, .. } => write!(f, "dense({fan_out})"),
            LayerSpec::Relu => f.write_str("relu"),
            LayerSpec::MaxPool2x2 => f.write_str("maxpool"),
            LayerSpec::Flatten => f.write_str("flatten"),
        }
    }
}

/// Shape of the tensor flowing between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActShape {
    Image { c: usize, h: usize, w: usize },
    Vector(usize),
}

impl ActShape {
    pub fn dims(&self) -> Vec<usize> {
        match *self {
            ActShape::Image { c, h, w } => vec![c, h, w],
            ActShape::Vector(n) => vec![n],
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            ActShape::Image { c, h, w } => c * h * w,
            ActShape::Vector(n) => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for ActShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActShape::Image { c, h, w } => write!(f, "{c}x{h}x{w}"),
            ActShape::Vector(n) => write!(f, "[{n}]"),
        }
    }
}

/// Validated layer list. Every intermediate shape is computed at construction,
/// so a spec that exists always chains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    input_shape: [usize; 3],
    layers: Vec<LayerSpec>,
    class_count: usize,
    shapes: Vec<ActShape>,
}

impl NetworkSpec {
    pub fn new(
        input_shape: [usize; 3],
        layers: Vec<LayerSpec>,
        class_count: usize,
    ) -> Result<Self> {
        let [c, h, w] = input_shape;
        if c == 0 || h == 0 || w == 0 {
            return Err(Error::invalid(format!("bad input shape {input_shape:?}")));
        }
        let mut shapes = vec![ActShape::Image { c, h, w }];
        for (i, layer) in layers.iter().enumerate() {
            let next = layer
                .output_shape(*shapes.last().unwrap())
                .map_err(|e| e.at_layer(i + 1))?;
            shapes.push(next);
        }
        match layers.last() {
            Some(LayerSpec::Dense { fan_out, .. }) if *fan_out == class_count => {}
            _ => {
                return Err(Error::invalid(format!(
                    "final layer must be dense with {class_count} outputs"
                )))
            }
        }
        Ok(NetworkSpec {
            input_shape,
            layers,
            class_count,
            shapes,
        })
    }

    /// Parse a whitespace-separated layer list such as
    /// `conv(8,3) relu maxpool flatten dense(64) relu dense(10)`.
    /// Input channels and dense fan-in are inferred from the running shape.
    pub fn parse(text: &str, input_shape: [usize; 3], class_count: usize) -> Result<Self> {
        let [c, h, w] = input_shape;
        let mut shape = ActShape::Image { c, h, w };
        let mut layers = Vec::new();
        for (i, token) in text.split_whitespace().enumerate() {
            let (name, args) = match token.find('(') {
                Some(p) if token.ends_with(')') => {
                    let args = token[p + 1..token.len() - 1]
                        .split(',')
                        .map(|a| {
                            a.trim().parse::<usize>().map_err(|_| {
                                Error::invalid(format!("bad layer argument in `{token}`"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    (&token[..p], args)
                }
                Some(_) => return Err(Error::invalid(format!("unbalanced layer token `{token}`"))),
                None => (token, Vec::new()),
            };
            let layer = match (name, args.as_slice()) {
                ("conv", &[out_channels, kernel]) => {
                    let in_channels = match shape {
                        ActShape::Image { c, .. } => c,
                        ActShape::Vector(_) => {
                            return Err(Error::invalid("conv after flatten").at_layer(i + 1))
                        }
                    };
                    LayerSpec::Conv2d {
                        out_channels,
                        kernel,
                        in_channels,
                    }
                }
                ("dense", &[fan_out]) => LayerSpec::Dense {
                    fan_in: shape.len(),
                    fan_out,
                },
                ("relu", []) => LayerSpec::Relu,
                ("maxpool", []) => LayerSpec::MaxPool2x2,
                ("flatten", []) => LayerSpec::Flatten,
                _ => return Err(Error::invalid(format!("unknown layer `{token}`"))),
            };
            shape = layer.output_shape(shape).map_err(|e| e.at_layer(i + 1))?;
            layers.push(layer);
        }
        NetworkSpec::new(input_shape, layers, class_count)
    }

    pub fn input_shape(&self) -> [usize; 3] {
        self.input_shape
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Shape entering layer `i` (0-based); index `layers.len()` is the output.
    pub fn shape_before(&self, i: usize) -> ActShape {
        self.shapes[i]
    }

    /// Layer indices (0-based) of the conv and dense layers, in order.
    pub fn affine_layers(&self) -> Vec<usize> {
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_affine())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn describe(&self) -> String {
        self.layers
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MNIST: &str = "conv(8,3) relu maxpool flatten dense(64) relu dense(10)";

    #[test]
    fn parses_reference_nets() {
        let s = NetworkSpec::parse(MNIST, [1, 28, 28], 10).unwrap();
        assert_eq!(s.affine_layers(), vec![0, 4, 6]);
        assert_eq!(s.shape_before(4), ActShape::Vector(8 * 13 * 13));
        assert_eq!(s.describe(), MNIST);

        let cifar =
            "conv(16,3) relu maxpool conv(32,4) relu maxpool flatten dense(128) relu dense(10)";
        let s = NetworkSpec::parse(cifar, [3, 32, 32], 10).unwrap();
        assert_eq!(s.shape_before(7), ActShape::Vector(32 * 6 * 6));
    }

    #[test]
    fn rejects_bad_chains() {
        // 26x26 pooled to 13x13, a second pool sees odd size
        assert!(NetworkSpec::parse(
            "conv(8,3) maxpool maxpool flatten dense(10)",
            [1, 28, 28],
            10
        )
        .is_err());
        assert!(NetworkSpec::parse("conv(8,9) flatten dense(10)", [1, 8, 8], 10).is_err());
        assert!(NetworkSpec::parse("flatten dense(5)", [1, 4, 4], 10).is_err());
        assert!(NetworkSpec::parse("dense(10)", [1, 4, 4], 10).is_err());
        assert!(NetworkSpec::parse("flatten dense(10) relu", [1, 4, 4], 10).is_err());
        assert!(NetworkSpec::parse("flatten dens(10)", [1, 4, 4], 10).is_err());
        let bad = vec![
            LayerSpec::Conv2d {
                out_channels: 2,
                kernel: 3,
                in_channels: 3,
            },
            LayerSpec::Flatten,
            LayerSpec::Dense {
                fan_in: 8,
                fan_out: 2,
            },
        ];
        assert!(NetworkSpec::new([1, 4, 4], bad, 2).is_err());
    }
}
