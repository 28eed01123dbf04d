//! Model circuit, measurement heads and loss.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// Class `m` scores `⟨Z_m⟩`.
    ExpectedValue,
    /// Class of bitstring `b` is `b mod M`.
    Modulo,
    /// Low `t` bits plus the parity of the remaining bits, mod `M`.
    Parity,
}

impl Head {
    pub const ALL: [Head; 3] = [Head::ExpectedValue, Head::Modulo, Head::Parity];

    pub fn name(self) -> &'static str {
        match self {
            Head::ExpectedValue => "expected",
            Head::Modulo => "modulo",
            Head::Parity => "parity",
        }
    }

    pub fn from_name(s: &str) -> Option<Head> {
        Head::ALL.into_iter().find(|h| h.name() == s)
    }
}

/// Placement of the encoding layer within each block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockOrder {
    /// `RX(X)` encoding, then the trainable mixing layers.
    EncodeFirst,
    /// Trainable mixing layers, then the encoding.
    MixFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_qubits: usize,
    pub n_classes: usize,
    pub layers: usize,
    pub depth: usize,
    pub head: Head,
    pub order: BlockOrder,
    /// Qubits on one side of the cut; CNOTs with one end here are cut.
    pub partition: Vec<usize>,
}

impl ModelConfig {
    /// Four qubits, three classes, one block of depth two: 24 weights.
    pub fn iris(head: Head) -> ModelConfig {
        ModelConfig {
            n_qubits: 4,
            n_classes: 3,
            layers: 1,
            depth: 2,
            head,
            order: BlockOrder::EncodeFirst,
            partition: vec![0, 2],
        }
    }

    pub fn n_params(&self) -> usize {
        self.layers * self.depth * self.n_qubits * 3
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_classes < 2 || self.layers == 0 || self.depth == 0 {
            return Err(Error::HeadConfigInvalid(format!(
                "need at least one qubit, block and sub-layer and two classes, got {self:?}"
            )));
        }
        if self.n_qubits >= usize::BITS as usize || self.n_classes > 1 << self.n_qubits {
            return Err(Error::HeadConfigInvalid(format!(
                "{} classes do not fit {} qubits",
                self.n_classes, self.n_qubits
            )));
        }
        if self.head == Head::ExpectedValue && self.n_classes > self.n_qubits {
            return Err(Error::HeadConfigInvalid(format!(
                "expected-value head needs one qubit per class: {} classes, {} qubits",
                self.n_classes, self.n_qubits
            )));
        }
        if let Some(&q) = self.partition.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::IndexOutOfRange { index: q, width: self.n_qubits });
        }
        Ok(())
    }

    /// Flat index of angle `k` (0..3) for `qubit` in sub-layer `sub` of block `layer`.
    pub fn weight_index(&self, layer: usize, sub: usize, qubit: usize, k: usize) -> usize {
        ((layer * self.depth + sub) * self.n_qubits + qubit) * 3 + k
    }

    /// CNOT ring range of a sub-layer.
    pub fn ring_range(&self, sub: usize) -> usize {
        if self.n_qubits < 2 { 0 } else { 1 + sub % (self.n_qubits - 1) }
    }
}

pub fn build_model_circuit(cfg: &ModelConfig, x: &[f64], w: &[f64]) -> Result<Circuit> {
    cfg.validate()?;
    if x.len() != cfg.n_qubits {
        return Err(Error::DimMismatch { expected: cfg.n_qubits, got: x.len() });
    }
    if w.len() != cfg.n_params() {
        return Err(Error::DimMismatch { expected: cfg.n_params(), got: w.len() });
    }
    let n = cfg.n_qubits;
    let mut ops = Vec::with_capacity(cfg.layers * (n + cfg.depth * 4 * n));
    let encode = |ops: &mut Vec<GateOp>| ops.extend(x.iter().enumerate().map(|(q, &v)| GateOp::rx(q, v)));
    for layer in 0..cfg.layers {
        if cfg.order == BlockOrder::EncodeFirst {
            encode(&mut ops);
        }
        for sub in 0..cfg.depth {
            for q in 0..n {
                let i = cfg.weight_index(layer, sub, q, 0);
                ops.push(GateOp::rz(q, w[i]));
                ops.push(GateOp::ry(q, w[i + 1]));
                ops.push(GateOp::rz(q, w[i + 2]));
            }
            let r = cfg.ring_range(sub);
            if r > 0 {
                ops.extend((0..n).map(|q| GateOp::cnot(q, (q + r) % n)));
            }
        }
        if cfg.order == BlockOrder::MixFirst {
            encode(&mut ops);
        }
    }
    Circuit::from_ops(n, ops)
}

/// Class of bitstring `b` under the parity head.
pub fn parity_class(b: usize, classes: usize) -> usize {
    let t = classes.next_power_of_two().trailing_zeros();
    let low = b & ((1 << t) - 1);
    let parity = ((b >> t).count_ones() & 1) as usize;
    (low + parity) % classes
}

/// Unnormalized class scores from an output distribution over `2^n` bitstrings.
pub fn apply_head(head: Head, distribution: &[f64], classes: usize) -> Result<Vec<f64>> {
    let n = distribution.len().trailing_zeros() as usize;
    if !distribution.len().is_power_of_two() {
        return Err(Error::DimMismatch { expected: distribution.len().next_power_of_two(), got: distribution.len() });
    }
    let mut scores = vec![0.0; classes];
    match head {
        Head::Modulo => distribution.iter().enumerate().for_each(|(b, p)| scores[b % classes] += p),
        Head::Parity => distribution.iter().enumerate().for_each(|(b, p)| scores[parity_class(b, classes)] += p),
        Head::ExpectedValue => {
            if classes > n {
                return Err(Error::HeadConfigInvalid(format!("{classes} classes on {n} qubits")));
            }
            for (b, p) in distribution.iter().enumerate() {
                for (m, s) in scores.iter_mut().enumerate() {
                    *s += if (b >> m) & 1 == 0 { *p } else { -*p };
                }
            }
        }
    }
    Ok(scores)
}

/// Stabilized softmax and negative log-likelihood of `label`.
pub fn softmax_nll(scores: &[f64], label: usize) -> (Vec<f64>, f64) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    let probs: Vec<f64> = exps.iter().map(|e| e / z).collect();
    let loss = -(scores[label] - max - z.ln());
    (probs, loss)
}

pub fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
        .0
}
