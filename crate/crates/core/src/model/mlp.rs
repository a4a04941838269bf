use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use super::{MlpConfig, OptimizerState};
use crate::linalg::gemm;
use crate::rng::{stream_rng, Stream};
use crate::{DenseMatrix, Error, Result};

/// Rows pushed through the network at once during inference.
const INFERENCE_CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerSlot {
    fan_in: usize,
    fan_out: usize,
    weights: usize,
    bias: usize,
}

fn layout(config: &MlpConfig) -> (Vec<LayerSlot>, usize) {
    let dims = config.layer_dims();
    let mut offset = 0;
    let slots = dims
        .windows(2)
        .map(|w| {
            let slot = LayerSlot {
                fan_in: w[0],
                fan_out: w[1],
                weights: offset,
                bias: offset + w[0] * w[1],
            };
            offset += w[0] * w[1] + w[1];
            slot
        })
        .collect();
    (slots, offset)
}

/// A trained or freshly initialised network.
///
/// All weights and biases live in one flat vector, layer by layer: the
/// `fan_in x fan_out` weight matrix (row-major) followed by the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    config: MlpConfig,
    params: Vec<f64>,
    slots: Vec<LayerSlot>,
    state: OptimizerState,
    epochs_trained: usize,
}

/// Outputs of a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    /// Post-ReLU output of every hidden layer, input side first.
    pub hidden: Vec<DenseMatrix>,
    /// Pre-softmax scores.
    pub logits: DenseMatrix,
    /// Row-wise softmax of the logits.
    pub probabilities: DenseMatrix,
}

/// He-initialised network: weights `N(0, 2/fan_in)`, biases zero.
pub fn init_model(config: &MlpConfig) -> Result<MlpModel> {
    config.validate()?;
    let (slots, len) = layout(config);
    let mut params = vec![0.0; len];
    let mut rng = stream_rng(config.init_seed, Stream::Init);
    for slot in &slots {
        let std = libm::sqrt(2.0 / slot.fan_in as f64);
        for w in &mut params[slot.weights..slot.bias] {
            let z: f64 = StandardNormal.sample(&mut rng);
            *w = std * z;
        }
    }
    Ok(MlpModel {
        state: OptimizerState::new(&config.optimizer, len),
        config: config.clone(),
        params,
        slots,
        epochs_trained: 0,
    })
}

impl MlpModel {
    /// Rebuilds a model from stored parts (checkpoint loading).
    pub fn from_parts(
        config: MlpConfig,
        params: Vec<f64>,
        state: OptimizerState,
        epochs_trained: usize,
    ) -> Result<Self> {
        config.validate()?;
        let (slots, len) = layout(&config);
        if params.len() != len {
            return Err(Error::DimensionMismatch {
                context: "parameter count",
                expected: len,
                actual: params.len(),
            });
        }
        if state.len() != len || !state.matches(&config.optimizer) {
            return Err(Error::invalid("optimizer state does not match the configuration"));
        }
        if let Some(index) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            config,
            params,
            slots,
            state,
            epochs_trained,
        })
    }

    /// Configuration the model was built from.
    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    /// Flat parameter vector.
    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    /// Overwrites the flat parameters.
    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                context: "parameter count",
                expected: self.params.len(),
                actual: params.len(),
            });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    /// Optimiser memory.
    pub fn optimizer_state(&self) -> &OptimizerState {
        &self.state
    }

    /// Epochs completed so far.
    pub fn epochs_trained(&self) -> usize {
        self.epochs_trained
    }

    pub(crate) fn finish_epoch(&mut self) {
        self.epochs_trained += 1;
    }

    /// Number of hidden layers.
    pub fn num_hidden_layers(&self) -> usize {
        self.config.hidden_widths.len()
    }

    /// Width of layer `index` (0 is the input).
    pub fn layer_width(&self, index: usize) -> Option<usize> {
        match index {
            0 => Some(self.config.input_dim),
            i => self.config.hidden_widths.get(i - 1).copied(),
        }
    }

    /// Weight matrix (`fan_in x fan_out`) and bias of dense layer `layer`
    /// (0-based over all dense layers, the output layer last).
    pub fn layer_parameters(&self, layer: usize) -> (DenseMatrix, Vec<f64>) {
        let s = self.slots[layer];
        let w = DenseMatrix::from_vec(s.fan_in, s.fan_out, self.params[s.weights..s.bias].to_vec())
            .expect("slot shape");
        (w, self.params[s.bias..s.bias + s.fan_out].to_vec())
    }

    fn affine(&self, slot: &LayerSlot, input: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(input.rows(), slot.fan_out);
        let bias = &self.params[slot.bias..slot.bias + slot.fan_out];
        for i in 0..out.rows() {
            out.row_mut(i).copy_from_slice(bias);
        }
        gemm(
            input.rows(),
            slot.fan_in,
            slot.fan_out,
            1.0,
            (input.as_slice(), slot.fan_in as isize, 1),
            (&self.params[slot.weights..slot.bias], slot.fan_out as isize, 1),
            1.0,
            (out.as_mut_slice(), slot.fan_out as isize, 1),
        );
        out
    }

    fn check_input(&self, batch: &DenseMatrix) -> Result<()> {
        if batch.cols() != self.config.input_dim {
            return Err(Error::DimensionMismatch {
                context: "batch columns vs model input width",
                expected: self.config.input_dim,
                actual: batch.cols(),
            });
        }
        Ok(())
    }

    /// Full forward pass.
    pub fn forward(&self, batch: &DenseMatrix) -> Result<ForwardPass> {
        self.check_input(batch)?;
        let (hidden, logits) = self.forward_raw(batch);
        let probabilities = softmax(&logits);
        Ok(ForwardPass {
            hidden,
            logits,
            probabilities,
        })
    }

    fn forward_raw(&self, batch: &DenseMatrix) -> (Vec<DenseMatrix>, DenseMatrix) {
        let (last, hidden_slots) = self.slots.split_last().expect("at least one layer");
        let mut hidden: Vec<DenseMatrix> = Vec::with_capacity(hidden_slots.len());
        for slot in hidden_slots {
            let mut z = self.affine(slot, hidden.last().unwrap_or(batch));
            relu_in_place(&mut z);
            hidden.push(z);
        }
        let logits = self.affine(last, hidden.last().unwrap_or(batch));
        (hidden, logits)
    }

    /// Argmax of the logits per row (smallest index on ties).
    pub fn predict(&self, inputs: &DenseMatrix) -> Result<Vec<usize>> {
        self.check_input(inputs)?;
        let mut out = Vec::with_capacity(inputs.rows());
        let idx: Vec<usize> = (0..inputs.rows()).collect();
        for chunk in idx.chunks(INFERENCE_CHUNK) {
            let (_, logits) = self.forward_raw(&inputs.select_rows(chunk));
            out.extend(logits.row_iter().map(argmax));
        }
        Ok(out)
    }

    /// Mean softmax cross-entropy of `inputs` against `labels`.
    pub fn loss(&self, inputs: &DenseMatrix, labels: &[usize]) -> Result<f64> {
        self.check_batch(inputs, labels)?;
        let (_, logits) = self.forward_raw(inputs);
        Ok(cross_entropy(&logits, labels) / inputs.rows() as f64)
    }

    fn check_batch(&self, inputs: &DenseMatrix, labels: &[usize]) -> Result<()> {
        self.check_input(inputs)?;
        if labels.len() != inputs.rows() || inputs.rows() == 0 {
            return Err(Error::DimensionMismatch {
                context: "labels vs batch rows",
                expected: inputs.rows(),
                actual: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.config.num_classes) {
            return Err(Error::invalid(format!("label {bad} out of range")));
        }
        Ok(())
    }

    /// Mean cross-entropy and its gradient with respect to the flat parameters.
    pub fn loss_and_gradient(&self, inputs: &DenseMatrix, labels: &[usize]) -> Result<(f64, Vec<f64>)> {
        let mut grad = vec![0.0; self.params.len()];
        let loss = self.backward_into(inputs, labels, &mut grad)?;
        Ok((loss, grad))
    }

    /// Backpropagation; overwrites `grad` and returns the mean loss.
    pub(crate) fn backward_into(&self, inputs: &DenseMatrix, labels: &[usize], grad: &mut [f64]) -> Result<f64> {
        self.check_batch(inputs, labels)?;
        let batch = inputs.rows();
        let (hidden, logits) = self.forward_raw(inputs);
        let loss = cross_entropy(&logits, labels) / batch as f64;

        // dL/dz at the output: (softmax − onehot) / batch.
        let mut delta = softmax(&logits);
        let scale = 1.0 / batch as f64;
        for (i, &y) in labels.iter().enumerate() {
            let row = delta.row_mut(i);
            row[y] -= 1.0;
            row.iter_mut().for_each(|v| *v *= scale);
        }

        for (l, slot) in self.slots.iter().enumerate().rev() {
            let input = if l == 0 { inputs } else { &hidden[l - 1] };
            // dW = inputᵀ · delta
            gemm(
                slot.fan_in,
                batch,
                slot.fan_out,
                1.0,
                (input.as_slice(), 1, slot.fan_in as isize),
                (delta.as_slice(), slot.fan_out as isize, 1),
                0.0,
                (&mut grad[slot.weights..slot.bias], slot.fan_out as isize, 1),
            );
            let db = &mut grad[slot.bias..slot.bias + slot.fan_out];
            db.iter_mut().for_each(|v| *v = 0.0);
            for row in delta.row_iter() {
                for (g, &d) in db.iter_mut().zip(row) {
                    *g += d;
                }
            }
            if l > 0 {
                // delta_prev = (delta · Wᵀ) ⊙ relu'(input)
                let mut prev = DenseMatrix::zeros(batch, slot.fan_in);
                gemm(
                    batch,
                    slot.fan_out,
                    slot.fan_in,
                    1.0,
                    (delta.as_slice(), slot.fan_out as isize, 1),
                    (&self.params[slot.weights..slot.bias], 1, slot.fan_out as isize),
                    0.0,
                    (prev.as_mut_slice(), slot.fan_in as isize, 1),
                );
                for (p, &a) in prev.as_mut_slice().iter_mut().zip(input.as_slice()) {
                    if a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
        Ok(loss)
    }

    pub(crate) fn apply_gradient(&mut self, grad: &[f64]) {
        let opt = self.config.optimizer;
        self.state.step(&opt, &mut self.params, grad);
    }

    pub(crate) fn first_non_finite(&self) -> Option<usize> {
        self.params.iter().position(|p| !p.is_finite())
    }

    /// Output of layer `layer_index` for every row of `inputs`; index 0 returns
    /// the inputs themselves, index `i ≥ 1` the post-ReLU output of hidden
    /// layer `i`. Pure inference: the model is not modified.
    pub fn activations(&self, inputs: &DenseMatrix, layer_index: usize) -> Result<DenseMatrix> {
        self.check_input(inputs)?;
        let hidden = self.num_hidden_layers();
        if layer_index > hidden {
            return Err(Error::invalid(format!(
                "layer index {layer_index} out of range 0..={hidden}"
            )));
        }
        if layer_index == 0 {
            return Ok(inputs.clone());
        }
        let width = self.config.hidden_widths[layer_index - 1];
        let mut out = Vec::with_capacity(inputs.rows() * width);
        let idx: Vec<usize> = (0..inputs.rows()).collect();
        for chunk in idx.chunks(INFERENCE_CHUNK) {
            let mut a = inputs.select_rows(chunk);
            for slot in &self.slots[..layer_index] {
                a = self.affine(slot, &a);
                relu_in_place(&mut a);
            }
            out.extend_from_slice(a.as_slice());
        }
        DenseMatrix::from_vec(inputs.rows(), width, out)
    }
}

/// Layer-`layer_index` activations of `inputs` under `model`; see
/// [`MlpModel::activations`].
pub fn extract_activations(model: &MlpModel, inputs: &DenseMatrix, layer_index: usize) -> Result<DenseMatrix> {
    model.activations(inputs, layer_index)
}

fn relu_in_place(m: &mut DenseMatrix) {
    for v in m.as_mut_slice() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn softmax(logits: &DenseMatrix) -> DenseMatrix {
    let mut p = logits.clone();
    for i in 0..p.rows() {
        let row = p.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = libm::exp(*v - max);
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    p
}

/// Summed (not averaged) cross-entropy via a max-shifted log-sum-exp.
fn cross_entropy(logits: &DenseMatrix, labels: &[usize]) -> f64 {
    logits
        .row_iter()
        .zip(labels)
        .map(|(row, &y)| {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + libm::log(row.iter().map(|&v| libm::exp(v - max)).sum::<f64>());
            lse - row[y]
        })
        .sum()
}
