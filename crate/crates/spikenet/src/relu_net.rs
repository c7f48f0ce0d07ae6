//! Feed-forward ReLU networks: representation, evaluation, combination.
//!
//! A network is a chain of affine layers `T_1, ..., T_L`; evaluation applies
//! `relu` after every layer except the last. Networks are immutable after
//! construction (all invariants are checked in [`ReluNetwork::new`] and the
//! deserializer), so they are freely shareable across threads.
//!
//! The JSON wire format is pinned:
//!
//! ```json
//! {
//!   "input_dim": 2,
//!   "activation": "relu",
//!   "layers": [ { "weights": [[...], [...]], "bias": [...] }, ... ]
//! }
//! ```
//!
//! Weight rows are row-major (`weights[r][c]` multiplies input `c` of the
//! layer to produce output `r`). Floating-point values round-trip bit-exactly
//! (shortest round-trip formatting).

use ndarray::{s, Array1, Array2, ArrayView2};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::real::Real;

/// Errors from network construction, evaluation, and (de)serialization.
#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("network must have at least one layer")]
    EmptyNetwork,
    #[error("layer {layer}: bias length {bias} does not match {rows} weight rows")]
    BiasLength { layer: usize, rows: usize, bias: usize },
    #[error("layer {layer} expects {expected} inputs but receives {got}")]
    ChainMismatch { layer: usize, expected: usize, got: usize },
    #[error("first layer has {cols} columns but input_dim is {input_dim}")]
    InputDimMismatch { input_dim: usize, cols: usize },
    #[error("layer {layer} contains a non-finite weight or bias")]
    NonFinite { layer: usize },
    #[error("input has dimension {got}, network expects {expected}")]
    InputDimension { expected: usize, got: usize },
    #[error("input contains a non-finite coordinate")]
    NonFiniteInput,
    #[error("network has {outputs} outputs; scalar evaluation requires exactly 1")]
    OutputNotScalar { outputs: usize },
    #[error("cannot pad a network of depth {depth} to shallower depth {target}")]
    InvalidPadDepth { depth: usize, target: usize },
    #[error("summand {index} has input dimension {got}, expected {expected}")]
    SumInputDims { index: usize, expected: usize, got: usize },
    #[error("cannot sum an empty list of networks")]
    EmptySum,
    #[error("JSON parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema violation: {message}")]
    Schema { message: String },
}

/// One affine layer `x -> W x + b` with `W` of shape `(outputs, inputs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineLayer<F: Real> {
    pub weights: Array2<F>,
    pub bias: Array1<F>,
}

impl<F: Real> AffineLayer<F> {
    /// Builds a layer, checking that the bias length matches the row count
    /// and that every entry is finite.
    pub fn new(weights: Array2<F>, bias: Array1<F>) -> Result<Self, NetworkError> {
        let layer = AffineLayer { weights, bias };
        layer.validate(0)?;
        Ok(layer)
    }

    fn validate(&self, index: usize) -> Result<(), NetworkError> {
        if self.bias.len() != self.weights.nrows() {
            return Err(NetworkError::BiasLength {
                layer: index,
                rows: self.weights.nrows(),
                bias: self.bias.len(),
            });
        }
        let finite =
            self.weights.iter().all(|w| w.is_finite()) && self.bias.iter().all(|b| b.is_finite());
        if !finite {
            return Err(NetworkError::NonFinite { layer: index });
        }
        Ok(())
    }

    /// Number of outputs (rows).
    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    /// Number of inputs (columns).
    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }
}

/// A feed-forward network with ReLU activations between layers.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluNetwork<F: Real> {
    input_dim: usize,
    layers: Vec<AffineLayer<F>>,
}

fn relu<F: Real>(v: F) -> F {
    if v > F::zero() {
        v
    } else {
        F::zero()
    }
}

impl<F: Real> ReluNetwork<F> {
    /// Builds a network, validating layer chaining, bias shapes, and
    /// finiteness of every parameter.
    pub fn new(input_dim: usize, layers: Vec<AffineLayer<F>>) -> Result<Self, NetworkError> {
        if layers.is_empty() {
            return Err(NetworkError::EmptyNetwork);
        }
        if layers[0].in_dim() != input_dim {
            return Err(NetworkError::InputDimMismatch {
                input_dim,
                cols: layers[0].in_dim(),
            });
        }
        for (i, layer) in layers.iter().enumerate() {
            layer.validate(i)?;
            if i > 0 {
                let expected = layers[i - 1].out_dim();
                if layer.in_dim() != expected {
                    return Err(NetworkError::ChainMismatch {
                        layer: i,
                        expected,
                        got: layer.in_dim(),
                    });
                }
            }
        }
        Ok(ReluNetwork { input_dim, layers })
    }

    /// The identically-zero scalar network on `d` inputs: one affine layer
    /// with zero weights and zero bias.
    pub fn zero(input_dim: usize) -> Self {
        let layer = AffineLayer {
            weights: Array2::zeros((1, input_dim)),
            bias: Array1::zeros(1),
        };
        ReluNetwork {
            input_dim,
            layers: vec![layer],
        }
    }

    /// Input dimension `d`.
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Number of affine layers.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Output dimension of the final layer.
    pub fn output_dim(&self) -> usize {
        self.layers.last().map(AffineLayer::out_dim).unwrap_or(0)
    }

    /// Layer widths `(N_0, N_1, ..., N_L)` including the input dimension.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.layers.len() + 1);
        w.push(self.input_dim);
        w.extend(self.layers.iter().map(AffineLayer::out_dim));
        w
    }

    /// The affine layers, in evaluation order.
    pub fn layers(&self) -> &[AffineLayer<F>] {
        &self.layers
    }

    /// Total number of stored parameters (weights plus biases).
    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Evaluates the network at a single point.
    ///
    /// Dot products accumulate in index order, so results are deterministic.
    /// ReLU is applied after every layer except the last.
    pub fn evaluate(&self, x: &[F]) -> Result<F, NetworkError> {
        if x.len() != self.input_dim {
            return Err(NetworkError::InputDimension {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(NetworkError::NonFiniteInput);
        }
        if self.output_dim() != 1 {
            return Err(NetworkError::OutputNotScalar {
                outputs: self.output_dim(),
            });
        }
        let mut current: Vec<F> = x.to_vec();
        let last = self.layers.len() - 1;
        let mut next: Vec<F> = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            next.clear();
            next.reserve(layer.out_dim());
            for (row, b) in layer.weights.rows().into_iter().zip(layer.bias.iter()) {
                let mut acc = *b;
                for (w, u) in row.iter().zip(current.iter()) {
                    acc += *w * *u;
                }
                next.push(if i == last { acc } else { relu(acc) });
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current[0])
    }

    /// Evaluates the network at every row of `points` (shape `(n, d)`).
    ///
    /// Works unit-major: activations are kept as `(units, n)` so each weight
    /// streams over a contiguous lane of points, and zero weights are skipped
    /// outright — the compiled interpolants are mostly sparse, where a dense
    /// product would spend almost all of its work multiplying by zero. Each
    /// accumulator starts from the bias and adds terms in input order, the
    /// same order as [`ReluNetwork::evaluate`], so the two paths agree to the
    /// last bit (up to the sign of an exact zero, which skipping introduces).
    /// The caller is responsible for chunking very large batches to bound
    /// memory.
    pub fn evaluate_batch(&self, points: ArrayView2<F>) -> Result<Array1<F>, NetworkError> {
        if points.ncols() != self.input_dim {
            return Err(NetworkError::InputDimension {
                expected: self.input_dim,
                got: points.ncols(),
            });
        }
        if self.output_dim() != 1 {
            return Err(NetworkError::OutputNotScalar {
                outputs: self.output_dim(),
            });
        }
        let n = points.nrows();
        let last = self.layers.len() - 1;
        let mut z: Array2<F> = points.t().as_standard_layout().into_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut y = Array2::<F>::zeros((layer.out_dim(), n));
            for (r, mut lane) in y.rows_mut().into_iter().enumerate() {
                let out = lane.as_slice_mut().expect("freshly allocated rows are contiguous");
                out.fill(layer.bias[r]);
                for (j, &w) in layer.weights.row(r).indexed_iter() {
                    if w == F::zero() {
                        continue;
                    }
                    let src = z.row(j);
                    let src = src.as_slice().expect("activations are kept in standard layout");
                    for (acc, u) in out.iter_mut().zip(src) {
                        *acc += w * *u;
                    }
                }
                if i != last {
                    for v in out.iter_mut() {
                        *v = relu(*v);
                    }
                }
            }
            z = y;
        }
        Ok(z.index_axis(ndarray::Axis(0), 0).to_owned())
    }

    /// Serializes to the pinned JSON wire format (compact, deterministic).
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("validated network serializes")
    }

    /// Parses a network from the JSON wire format.
    ///
    /// Syntax errors report line and column; schema violations (wrong
    /// activation, ragged weight rows, mismatched chains) report the
    /// offending layer and row.
    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let wire: WireNetwork<F> = serde_json::from_str(text).map_err(|e| NetworkError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        wire.into_network()
    }
}

/// Pads `net` to exactly `depth` layers without changing its function.
///
/// The scalar output `t` is split into a dual rail `(relu(t), relu(-t))`,
/// carried through identity-on-rails layers, and recombined as
/// `relu(t) - relu(-t) = t`. Both rail values are exact in floating-point
/// arithmetic (one of the pair is always zero), so padding is bit-faithful
/// for the carried scalar. Width cost: +2 units per padded layer.
pub fn pad_to_depth<F: Real>(
    net: &ReluNetwork<F>,
    depth: usize,
) -> Result<ReluNetwork<F>, NetworkError> {
    if depth < net.depth() {
        return Err(NetworkError::InvalidPadDepth {
            depth: net.depth(),
            target: depth,
        });
    }
    if depth == net.depth() {
        return Ok(net.clone());
    }
    if net.output_dim() != 1 {
        return Err(NetworkError::OutputNotScalar {
            outputs: net.output_dim(),
        });
    }
    let one = F::one();
    let mut layers: Vec<AffineLayer<F>> = net.layers[..net.depth() - 1].to_vec();
    let last = &net.layers[net.depth() - 1];

    // Fork the scalar output into (t, -t).
    let w = last.weights.row(0);
    let mut fork = Array2::zeros((2, last.in_dim()));
    for (c, &v) in w.iter().enumerate() {
        fork[(0, c)] = v;
        fork[(1, c)] = -v;
    }
    let b = last.bias[0];
    layers.push(AffineLayer {
        weights: fork,
        bias: Array1::from(vec![b, -b]),
    });

    // Identity-on-rails pass-through layers.
    let pass_count = depth - net.depth() - 1;
    for _ in 0..pass_count {
        let mut pass = Array2::zeros((2, 2));
        pass[(0, 0)] = one;
        pass[(0, 1)] = -one;
        pass[(1, 0)] = -one;
        pass[(1, 1)] = one;
        layers.push(AffineLayer {
            weights: pass,
            bias: Array1::from(vec![F::zero(), F::zero()]),
        });
    }

    // Recombine.
    let mut recombine = Array2::zeros((1, 2));
    recombine[(0, 0)] = one;
    recombine[(0, 1)] = -one;
    layers.push(AffineLayer {
        weights: recombine,
        bias: Array1::from(vec![F::zero()]),
    });

    ReluNetwork::new(net.input_dim, layers)
}

/// Sums scalar networks over a shared input space.
///
/// All summands are padded to the maximum depth, then stacked: first-layer
/// weights share the input columns, intermediate layers combine
/// block-diagonally, and the final layers concatenate horizontally with
/// summed biases. The result evaluates to the pointwise sum of the summands
/// up to floating round-off (the accumulation order of the final dot product
/// differs from summing separate evaluations).
pub fn sum_networks<F: Real>(nets: &[ReluNetwork<F>]) -> Result<ReluNetwork<F>, NetworkError> {
    let first = nets.first().ok_or(NetworkError::EmptySum)?;
    let d = first.input_dim();
    for (i, net) in nets.iter().enumerate() {
        if net.input_dim() != d {
            return Err(NetworkError::SumInputDims {
                index: i,
                expected: d,
                got: net.input_dim(),
            });
        }
        if net.output_dim() != 1 {
            return Err(NetworkError::OutputNotScalar {
                outputs: net.output_dim(),
            });
        }
    }
    if nets.len() == 1 {
        return Ok(first.clone());
    }

    let depth = nets.iter().map(ReluNetwork::depth).max().expect("nonempty");
    let padded: Vec<ReluNetwork<F>> = nets
        .iter()
        .map(|n| pad_to_depth(n, depth))
        .collect::<Result<_, _>>()?;

    if depth == 1 {
        // Single affine layers: the sum is one affine layer.
        let mut weights = Array2::zeros((1, d));
        let mut bias = Array1::zeros(1);
        for net in &padded {
            let layer = &net.layers[0];
            for c in 0..d {
                weights[(0, c)] += layer.weights[(0, c)];
            }
            bias[0] += layer.bias[0];
        }
        return ReluNetwork::new(d, vec![AffineLayer { weights, bias }]);
    }

    let mut layers = Vec::with_capacity(depth);
    for t in 0..depth {
        let blocks: Vec<&AffineLayer<F>> = padded.iter().map(|n| &n.layers[t]).collect();
        if t == 0 {
            // Vertical stack sharing the input columns.
            let rows: usize = blocks.iter().map(|l| l.out_dim()).sum();
            let mut weights = Array2::zeros((rows, d));
            let mut bias = Array1::zeros(rows);
            let mut r0 = 0;
            for block in &blocks {
                let r1 = r0 + block.out_dim();
                weights.slice_mut(s![r0..r1, ..]).assign(&block.weights);
                bias.slice_mut(s![r0..r1]).assign(&block.bias);
                r0 = r1;
            }
            layers.push(AffineLayer { weights, bias });
        } else if t + 1 < depth {
            // Block-diagonal interior layer.
            let rows: usize = blocks.iter().map(|l| l.out_dim()).sum();
            let cols: usize = blocks.iter().map(|l| l.in_dim()).sum();
            let mut weights = Array2::zeros((rows, cols));
            let mut bias = Array1::zeros(rows);
            let (mut r0, mut c0) = (0, 0);
            for block in &blocks {
                let (r1, c1) = (r0 + block.out_dim(), c0 + block.in_dim());
                weights
                    .slice_mut(s![r0..r1, c0..c1])
                    .assign(&block.weights);
                bias.slice_mut(s![r0..r1]).assign(&block.bias);
                r0 = r1;
                c0 = c1;
            }
            layers.push(AffineLayer { weights, bias });
        } else {
            // Final layer: horizontal concatenation, biases summed.
            let cols: usize = blocks.iter().map(|l| l.in_dim()).sum();
            let mut weights = Array2::zeros((1, cols));
            let mut bias = Array1::zeros(1);
            let mut c0 = 0;
            for block in &blocks {
                let c1 = c0 + block.in_dim();
                weights.slice_mut(s![0..1, c0..c1]).assign(&block.weights);
                bias[0] += block.bias[0];
                c0 = c1;
            }
            layers.push(AffineLayer { weights, bias });
        }
    }
    ReluNetwork::new(d, layers)
}

#[derive(Serialize, Deserialize)]
struct WireLayer<F> {
    weights: Vec<Vec<F>>,
    bias: Vec<F>,
}

#[derive(Serialize, Deserialize)]
struct WireNetwork<F> {
    input_dim: usize,
    activation: String,
    layers: Vec<WireLayer<F>>,
}

impl<F: Real> WireNetwork<F> {
    fn from_network(net: &ReluNetwork<F>) -> Self {
        WireNetwork {
            input_dim: net.input_dim,
            activation: "relu".to_string(),
            layers: net
                .layers
                .iter()
                .map(|l| WireLayer {
                    weights: l.weights.rows().into_iter().map(|r| r.to_vec()).collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
        }
    }

    fn into_network(self) -> Result<ReluNetwork<F>, NetworkError> {
        if self.activation != "relu" {
            return Err(NetworkError::Schema {
                message: format!("unsupported activation {:?}, expected \"relu\"", self.activation),
            });
        }
        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, wire) in self.layers.into_iter().enumerate() {
            let rows = wire.weights.len();
            if rows == 0 {
                return Err(NetworkError::Schema {
                    message: format!("layer {i} has no weight rows"),
                });
            }
            let cols = wire.weights[0].len();
            for (r, row) in wire.weights.iter().enumerate() {
                if row.len() != cols {
                    return Err(NetworkError::Schema {
                        message: format!(
                            "layer {i}: weight row {r} has length {}, expected {cols} (ragged matrix)",
                            row.len()
                        ),
                    });
                }
            }
            let flat: Vec<F> = wire.weights.into_iter().flatten().collect();
            let weights = Array2::from_shape_vec((rows, cols), flat).expect("checked shape");
            layers.push(AffineLayer {
                weights,
                bias: Array1::from(wire.bias),
            });
        }
        ReluNetwork::new(self.input_dim, layers)
    }
}

impl<F: Real> Serialize for ReluNetwork<F> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        WireNetwork::from_network(self).serialize(serializer)
    }
}

impl<'de, F: Real> Deserialize<'de> for ReluNetwork<F> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = WireNetwork::<F>::deserialize(deserializer)?;
        wire.into_network().map_err(serde::de::Error::custom)
    }
}
