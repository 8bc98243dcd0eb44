//! Affine layers with activations, composed into feedforward networks, and
//! their JSON wire format.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::geometry::HyperplaneImplicit;
use crate::tolerance::ToleranceConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    weights: DMatrix<f64>,
    bias: DVector<f64>,
    activation: ActivationKind,
}

impl Layer {
    pub fn new(weights: DMatrix<f64>, bias: DVector<f64>, activation: ActivationKind) -> Result<Self> {
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::InvalidNetwork(
                "layer needs at least one input and one output".into(),
            ));
        }
        if bias.len() != weights.nrows() {
            return Err(Error::DimensionMismatch {
                expected: weights.nrows(),
                got: bias.len(),
            });
        }
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidNetwork("non-finite weight or bias".into()));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    /// One unit per row of `rows`.
    pub fn from_rows(rows: &[Vec<f64>], bias: &[f64], activation: ActivationKind) -> Result<Self> {
        let n_in = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != n_in) {
            return Err(Error::DimensionMismatch {
                expected: n_in,
                got: r.len(),
            });
        }
        let w = DMatrix::from_fn(rows.len(), n_in, |i, j| rows[i][j]);
        Self::new(w, DVector::from_column_slice(bias), activation)
    }

    /// Layer whose units are the given hyperplanes.
    pub fn from_hyperplanes(hs: &[HyperplaneImplicit], activation: ActivationKind) -> Result<Self> {
        let rows: Vec<Vec<f64>> = hs.iter().map(|h| h.normal().iter().copied().collect()).collect();
        let bias: Vec<f64> = hs.iter().map(HyperplaneImplicit::offset).collect();
        Self::from_rows(&rows, &bias, activation)
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &DVector<f64> {
        &self.bias
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }

    /// Hyperplane of unit `i`.
    pub fn hyperplane(&self, i: usize, tol: &ToleranceConfig) -> Result<HyperplaneImplicit> {
        HyperplaneImplicit::new(self.weights.row(i).transpose(), self.bias[i], tol)
    }

    fn check_input(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() == self.input_dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            })
        }
    }

    pub fn pre_activation(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_input(x)?;
        Ok(&self.weights * x + &self.bias)
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let act = self.activation;
        Ok(self.pre_activation(x)?.map(|s| act.apply(s)))
    }

    /// `n_out * (n_in + 1)`.
    pub fn parameter_count(&self) -> usize {
        self.output_dim() * (self.input_dim() + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Encoder,
    Decoder,
    Generic,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkMeta {
    pub seed: u64,
    pub method: String,
    pub margin: f64,
}

/// Pre- and post-activation values of one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerTrace {
    pub pre: DVector<f64>,
    pub post: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeedforwardNetwork {
    role: Role,
    layers: Vec<Layer>,
    meta: NetworkMeta,
}

impl FeedforwardNetwork {
    pub fn new(role: Role, layers: Vec<Layer>, meta: NetworkMeta) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidNetwork("network has no layers".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(Error::InvalidNetwork(format!(
                    "layer {} outputs {} values but layer {} expects {}",
                    i + 1,
                    pair[0].output_dim(),
                    i + 2,
                    pair[1].input_dim()
                )));
            }
        }
        if role == Role::Encoder {
            let w = widths_of(&layers);
            if let Some(i) = w.windows(2).position(|p| p[1] >= p[0]) {
                return Err(Error::InvalidNetwork(format!(
                    "encoder widths must strictly decrease, but width {} is followed by {}",
                    w[i],
                    w[i + 1]
                )));
            }
        }
        Ok(Self { role, layers, meta })
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer(&self, i: usize) -> &Layer {
        &self.layers[i]
    }

    pub fn meta(&self) -> &NetworkMeta {
        &self.meta
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    /// Input dimension followed by every layer's width.
    pub fn widths(&self) -> Vec<usize> {
        widths_of(&self.layers)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(Layer::parameter_count).sum()
    }

    /// Post-activation output of every layer; the last entry is the network output.
    pub fn forward(&self, x: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        Ok(self.trace(x)?.into_iter().map(|t| t.post).collect())
    }

    pub fn output(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let mut cur = x.clone();
        for l in &self.layers {
            cur = l.apply(&cur)?;
        }
        Ok(cur)
    }

    pub fn trace(&self, x: &DVector<f64>) -> Result<Vec<LayerTrace>> {
        let mut out = Vec::with_capacity(self.layers.len());
        let mut cur = x.clone();
        for l in &self.layers {
            let pre = l.pre_activation(&cur)?;
            let act = l.activation();
            let post = pre.map(|s| act.apply(s));
            cur = post.clone();
            out.push(LayerTrace { pre, post });
        }
        Ok(out)
    }

    /// Network made of the first `k` layers.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.layers.len() {
            return Err(Error::InvalidNetwork(format!("prefix length {k} out of range")));
        }
        Self::new(self.role, self.layers[..k].to_vec(), self.meta.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&NetworkWire::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: NetworkWire = serde_json::from_str(s)?;
        wire.try_into()
    }
}

fn widths_of(layers: &[Layer]) -> Vec<usize> {
    std::iter::once(layers[0].input_dim())
        .chain(layers.iter().map(Layer::output_dim))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct LayerWire {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    activation: ActivationKind,
}

#[derive(Serialize, Deserialize)]
struct NetworkWire {
    role: Role,
    layers: Vec<LayerWire>,
    #[serde(default)]
    meta: NetworkMeta,
}

impl From<&FeedforwardNetwork> for NetworkWire {
    fn from(n: &FeedforwardNetwork) -> Self {
        Self {
            role: n.role,
            layers: n
                .layers
                .iter()
                .map(|l| LayerWire {
                    weights: l.weights.row_iter().map(|r| r.iter().copied().collect()).collect(),
                    bias: l.bias.iter().copied().collect(),
                    activation: l.activation,
                })
                .collect(),
            meta: n.meta.clone(),
        }
    }
}

impl TryFrom<NetworkWire> for FeedforwardNetwork {
    type Error = Error;

    fn try_from(w: NetworkWire) -> Result<Self> {
        let layers = w
            .layers
            .iter()
            .map(|l| Layer::from_rows(&l.weights, &l.bias, l.activation))
            .collect::<Result<Vec<_>>>()?;
        Self::new(w.role, layers, w.meta)
    }
}

impl Serialize for FeedforwardNetwork {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NetworkWire::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FeedforwardNetwork {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        NetworkWire::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

/// Result of the classification-autoencoder shape check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutoencoderShape {
    pub is_classification_autoencoder: bool,
    /// Number of layers in the longest strictly width-decreasing prefix.
    pub encoder_prefix_len: usize,
}

/// An encoder-shaped prefix (strictly decreasing widths, at least one layer)
/// followed by an unconstrained suffix.
pub fn is_classification_autoencoder(net: &FeedforwardNetwork) -> AutoencoderShape {
    let w = net.widths();
    let prefix = w.windows(2).take_while(|p| p[1] < p[0]).count();
    AutoencoderShape {
        is_classification_autoencoder: prefix >= 1,
        encoder_prefix_len: prefix,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn generic(layers: Vec<Layer>) -> FeedforwardNetwork {
        FeedforwardNetwork::new(Role::Generic, layers, NetworkMeta::default()).unwrap()
    }

    fn widths_net(ws: &[usize]) -> FeedforwardNetwork {
        let layers = ws
            .windows(2)
            .map(|p| {
                Layer::new(
                    DMatrix::from_element(p[1], p[0], 0.1),
                    DVector::zeros(p[1]),
                    ActivationKind::Relu,
                )
                .unwrap()
            })
            .collect();
        generic(layers)
    }

    #[test]
    fn identity_linear_layer() {
        let net = generic(vec![Layer::new(
            DMatrix::identity(3, 3),
            DVector::zeros(3),
            ActivationKind::Linear,
        )
        .unwrap()]);
        let x = v(&[1.5, -2.0, 7.0]);
        assert_eq!(net.output(&x).unwrap(), x);
    }

    #[test]
    fn relu_unit_clamps() {
        let l = Layer::from_rows(&[vec![1.0, 0.0, 0.0]], &[0.0], ActivationKind::Relu).unwrap();
        assert_eq!(l.apply(&v(&[-2.0, 5.0, 7.0])).unwrap()[0], 0.0);
    }

    #[test]
    fn two_layer_hand_arithmetic() {
        let l1 = Layer::from_rows(&[vec![1.0, 2.0], vec![-1.0, 1.0]], &[0.5, -4.0], ActivationKind::Relu).unwrap();
        let l2 = Layer::from_rows(&[vec![3.0, -1.0]], &[1.0], ActivationKind::Linear).unwrap();
        let net = generic(vec![l1, l2]);
        let outs = net.forward(&v(&[1.0, 2.0])).unwrap();
        // 1 + 4 + 0.5 = 5.5; -1 + 2 - 4 = -3 -> 0; 3 * 5.5 - 0 + 1 = 17.5
        assert_eq!(outs[0], v(&[5.5, 0.0]));
        assert_eq!(outs[1], v(&[17.5]));
        let tr = net.trace(&v(&[1.0, 2.0])).unwrap();
        assert_eq!(tr[0].pre, v(&[5.5, -3.0]));
    }

    #[test]
    fn dimension_mismatch() {
        let net = widths_net(&[3, 2]);
        assert!(matches!(net.output(&v(&[1.0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn chaining_enforced() {
        let a = Layer::new(DMatrix::zeros(2, 3), DVector::zeros(2), ActivationKind::Relu).unwrap();
        let b = Layer::new(DMatrix::zeros(1, 3), DVector::zeros(1), ActivationKind::Relu).unwrap();
        assert!(FeedforwardNetwork::new(Role::Generic, vec![a, b], NetworkMeta::default()).is_err());
    }

    #[test]
    fn encoder_widths_must_decrease() {
        let net = widths_net(&[4, 4]);
        let layers = net.layers().to_vec();
        assert!(FeedforwardNetwork::new(Role::Encoder, layers, NetworkMeta::default()).is_err());
        let ok = widths_net(&[4, 3, 1]).layers().to_vec();
        assert!(FeedforwardNetwork::new(Role::Encoder, ok, NetworkMeta::default()).is_ok());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let l1 = Layer::from_rows(
            &[
                vec![0.1 + 0.2, 1.0 / 3.0, -1e-300],
                vec![f64::MIN_POSITIVE, 2.5e17, std::f64::consts::PI],
            ],
            &[0.7, -0.000_123_456_789_012_345_67],
            ActivationKind::Relu,
        )
        .unwrap();
        let l2 = Layer::from_rows(&[vec![1.0 / 7.0, -2.0 / 9.0]], &[1e-17], ActivationKind::Sigmoid).unwrap();
        let net = FeedforwardNetwork::new(
            Role::Encoder,
            vec![l1, l2],
            NetworkMeta {
                seed: u64::MAX,
                method: "discriminating".into(),
                margin: 1.0,
            },
        )
        .unwrap();
        let back = FeedforwardNetwork::from_json(&net.to_json().unwrap()).unwrap();
        for (a, b) in net.layers().iter().zip(back.layers()) {
            assert!(a
                .weights()
                .iter()
                .zip(b.weights().iter())
                .all(|(x, y)| x.to_bits() == y.to_bits()));
            assert!(a
                .bias()
                .iter()
                .zip(b.bias().iter())
                .all(|(x, y)| x.to_bits() == y.to_bits()));
            assert_eq!(a.activation(), b.activation());
        }
        assert_eq!(back.meta(), net.meta());
    }

    #[test]
    fn json_schema_fields() {
        let net = widths_net(&[2, 1]);
        let val: serde_json::Value = serde_json::from_str(&net.to_json().unwrap()).unwrap();
        assert_eq!(val["role"], "generic");
        assert_eq!(val["layers"][0]["activation"], "relu");
        assert_eq!(val["layers"][0]["weights"][0].as_array().unwrap().len(), 2);
        assert!(val["meta"]["seed"].is_u64());
    }

    #[test]
    fn deserialization_revalidates_encoder_widths() {
        let s = r#"{"role":"encoder","layers":[{"weights":[[1.0],[2.0]],"bias":[0.0,0.0],"activation":"relu"}]}"#;
        assert!(FeedforwardNetwork::from_json(s).is_err());
        let s = r#"{"role":"encoder","layers":[{"weights":[[1.0, 2.0]],"bias":[0.0],"activation":"relu"}]}"#;
        assert!(FeedforwardNetwork::from_json(s).is_ok());
    }

    #[test]
    fn corrupted_json_is_an_error() {
        assert!(FeedforwardNetwork::from_json("{\"role\":\"encoder\",\"layers\":[").is_err());
        let ragged =
            r#"{"role":"generic","layers":[{"weights":[[1.0],[2.0, 3.0]],"bias":[0.0,0.0],"activation":"relu"}]}"#;
        assert!(FeedforwardNetwork::from_json(ragged).is_err());
    }

    #[test]
    fn autoencoder_shape() {
        let r = is_classification_autoencoder(&widths_net(&[100, 50, 20, 30, 10]));
        assert!(r.is_classification_autoencoder);
        assert_eq!(r.encoder_prefix_len, 2);
        assert!(!is_classification_autoencoder(&widths_net(&[10, 20, 5])).is_classification_autoencoder);
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(widths_net(&[16, 8, 4, 2]).parameter_count(), 8 * 17 + 4 * 9 + 2 * 5);
    }
}
