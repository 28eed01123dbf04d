//! Circuit intermediate representation.
//!
//! Circuits are plain ordered gate lists over `width` qubits. Basis-state
//! indices read qubit 0 as the least significant bit everywhere in the crate.

mod json;
pub mod synth;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Gate alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    /// `exp(-i θ/2 Z⊗Z)`.
    Rzz,
    H,
    X,
    Y,
    Z,
    Cz,
    /// Control is `qubits[0]`, target `qubits[1]`.
    Cnot,
    /// Mid-circuit Z measurement whose ±1 eigenvalue multiplies the shot weight.
    MeasureZMid,
    /// Projector onto the +1 eigenspace of Z, `|0⟩⟨0|`.
    ProjPlus,
    /// Projector onto the −1 eigenspace of Z, `|1⟩⟨1|`.
    ProjMinus,
}

impl GateKind {
    pub const ALL: [GateKind; 13] = [
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Rzz,
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::Cz,
        GateKind::Cnot,
        GateKind::MeasureZMid,
        GateKind::ProjPlus,
        GateKind::ProjMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Rzz => "RZZ",
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::Cz => "CZ",
            GateKind::Cnot => "CNOT",
            GateKind::MeasureZMid => "MEASURE_Z_MID",
            GateKind::ProjPlus => "PROJ_PLUS",
            GateKind::ProjMinus => "PROJ_MINUS",
        }
    }

    pub fn from_name(name: &str) -> Option<GateKind> {
        GateKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Rzz | GateKind::Cz | GateKind::Cnot => 2,
            _ => 1,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Rzz)
    }

    /// True for every kind that acts as a unitary.
    pub fn is_unitary(self) -> bool {
        !matches!(
            self,
            GateKind::MeasureZMid | GateKind::ProjPlus | GateKind::ProjMinus
        )
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rotation angle, either concrete (radians) or a named symbol.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Value(f64),
    Ref(String),
}

impl Param {
    pub fn value(&self) -> Option<f64> {
        match self {
            Param::Value(v) => Some(*v),
            Param::Ref(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub param: Option<Param>,
    /// Outcome slot of a mid-circuit measurement.
    pub slot: Option<usize>,
}

impl GateOp {
    fn fixed(kind: GateKind, qubits: Vec<usize>) -> GateOp {
        GateOp {
            kind,
            qubits,
            param: None,
            slot: None,
        }
    }

    fn rotation(kind: GateKind, qubits: Vec<usize>, theta: f64) -> GateOp {
        GateOp {
            kind,
            qubits,
            param: Some(Param::Value(theta)),
            slot: None,
        }
    }

    pub fn rx(q: usize, theta: f64) -> GateOp {
        GateOp::rotation(GateKind::Rx, vec![q], theta)
    }
    pub fn ry(q: usize, theta: f64) -> GateOp {
        GateOp::rotation(GateKind::Ry, vec![q], theta)
    }
    pub fn rz(q: usize, theta: f64) -> GateOp {
        GateOp::rotation(GateKind::Rz, vec![q], theta)
    }
    pub fn rzz(a: usize, b: usize, theta: f64) -> GateOp {
        GateOp::rotation(GateKind::Rzz, vec![a, b], theta)
    }
    pub fn h(q: usize) -> GateOp {
        GateOp::fixed(GateKind::H, vec![q])
    }
    pub fn x(q: usize) -> GateOp {
        GateOp::fixed(GateKind::X, vec![q])
    }
    pub fn y(q: usize) -> GateOp {
        GateOp::fixed(GateKind::Y, vec![q])
    }
    pub fn z(q: usize) -> GateOp {
        GateOp::fixed(GateKind::Z, vec![q])
    }
    pub fn cz(a: usize, b: usize) -> GateOp {
        GateOp::fixed(GateKind::Cz, vec![a, b])
    }
    pub fn cnot(control: usize, target: usize) -> GateOp {
        GateOp::fixed(GateKind::Cnot, vec![control, target])
    }
    pub fn measure_mid(q: usize, slot: usize) -> GateOp {
        GateOp {
            kind: GateKind::MeasureZMid,
            qubits: vec![q],
            param: None,
            slot: Some(slot),
        }
    }
    pub fn proj_plus(q: usize) -> GateOp {
        GateOp::fixed(GateKind::ProjPlus, vec![q])
    }
    pub fn proj_minus(q: usize) -> GateOp {
        GateOp::fixed(GateKind::ProjMinus, vec![q])
    }

    /// Rotation with a symbolic angle.
    pub fn symbolic(kind: GateKind, qubits: Vec<usize>, name: impl Into<String>) -> GateOp {
        GateOp {
            kind,
            qubits,
            param: Some(Param::Ref(name.into())),
            slot: None,
        }
    }

    /// Concrete angle, if any.
    pub fn angle(&self) -> Option<f64> {
        self.param.as_ref().and_then(Param::value)
    }

    fn check(&self, width: usize) -> Result<()> {
        let kind = self.kind.name();
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::ArityMismatch {
                kind,
                expected: self.kind.arity(),
                got: self.qubits.len(),
            });
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= width {
                return Err(Error::IndexOutOfRange { index: q, width });
            }
            if self.qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit { kind, qubit: q });
            }
        }
        match (&self.param, self.kind.is_rotation()) {
            (None, true) => {
                return Err(Error::BadParameter {
                    kind,
                    reason: "rotation without angle".into(),
                })
            }
            (Some(_), false) => {
                return Err(Error::BadParameter {
                    kind,
                    reason: "angle on a fixed gate".into(),
                })
            }
            (Some(Param::Value(v)), true) if !v.is_finite() => {
                return Err(Error::BadParameter {
                    kind,
                    reason: format!("non-finite angle {v}"),
                })
            }
            _ => {}
        }
        match (self.kind, self.slot) {
            (GateKind::MeasureZMid, None) => Err(Error::BadParameter {
                kind,
                reason: "mid-circuit measurement without outcome slot".into(),
            }),
            (GateKind::MeasureZMid, Some(_)) | (_, None) => Ok(()),
            (_, Some(_)) => Err(Error::BadParameter {
                kind,
                reason: "outcome slot on a non-measurement".into(),
            }),
        }
    }
}

/// Ordered gate list over `width` qubits with a symbolic parameter table.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    width: usize,
    ops: Vec<GateOp>,
    params: Vec<String>,
}

impl Circuit {
    pub fn new(width: usize) -> Result<Circuit> {
        if width == 0 {
            return Err(Error::BadRange("circuit width must be at least 1".into()));
        }
        Ok(Circuit {
            width,
            ops: Vec::new(),
            params: Vec::new(),
        })
    }

    /// Build from a gate list, validating every op.
    pub fn from_ops(width: usize, ops: impl IntoIterator<Item = GateOp>) -> Result<Circuit> {
        let mut c = Circuit::new(width)?;
        for op in ops {
            c.push(op)?;
        }
        Ok(c)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Append in place. Unknown symbols are registered in the parameter table.
    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.check(self.width)?;
        if let Some(Param::Ref(name)) = &op.param {
            if !self.params.iter().any(|p| p == name) {
                self.params.push(name.clone());
            }
        }
        self.ops.push(op);
        Ok(())
    }

    /// Value-semantic append: returns a new circuit, `self` is untouched.
    pub fn append(&self, op: GateOp) -> Result<Circuit> {
        let mut c = self.clone();
        c.push(op)?;
        Ok(c)
    }

    /// Declare a symbol without using it.
    pub fn declare_param(&mut self, name: impl Into<String>) {
        let name = name.into();
        if !self.params.contains(&name) {
            self.params.push(name);
        }
    }

    pub fn is_bound(&self) -> bool {
        self.ops
            .iter()
            .all(|op| !matches!(op.param, Some(Param::Ref(_))))
    }

    /// Substitute every symbolic angle. Extra entries in `values` are ignored.
    pub fn bind(&self, values: &HashMap<String, f64>) -> Result<Circuit> {
        let mut ops = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let mut op = op.clone();
            if let Some(Param::Ref(name)) = &op.param {
                let v = *values
                    .get(name)
                    .ok_or_else(|| Error::UnboundParameter(name.clone()))?;
                op.param = Some(Param::Value(v));
            }
            ops.push(op);
        }
        Circuit::from_ops(self.width, ops)
    }

    /// First symbolic reference that is not bound, if any.
    pub(crate) fn first_unbound(&self) -> Option<&str> {
        self.ops.iter().find_map(|op| match &op.param {
            Some(Param::Ref(name)) => Some(name.as_str()),
            _ => None,
        })
    }

    pub fn ensure_bound(&self) -> Result<()> {
        match self.first_unbound() {
            Some(name) => Err(Error::UnboundParameter(name.to_string())),
            None => Ok(()),
        }
    }

    pub fn mid_measurements(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| op.kind == GateKind::MeasureZMid)
            .count()
    }

    /// Qubits grouped by transitive sharing of multi-qubit gates.
    ///
    /// Each group is sorted and groups are ordered by their smallest qubit.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.width).collect();
        fn find(parent: &mut [usize], mut q: usize) -> usize {
            while parent[q] != q {
                parent[q] = parent[parent[q]];
                q = parent[q];
            }
            q
        }
        for op in self.ops.iter().filter(|op| op.qubits.len() > 1) {
            let root = find(&mut parent, op.qubits[0]);
            for &q in &op.qubits[1..] {
                let r = find(&mut parent, q);
                if r != root {
                    let (lo, hi) = if r < root { (r, root) } else { (root, r) };
                    parent[hi] = lo;
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot_of_root = vec![usize::MAX; self.width];
        for q in 0..self.width {
            let r = find(&mut parent, q);
            if slot_of_root[r] == usize::MAX {
                slot_of_root[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot_of_root[r]].push(q);
        }
        groups
    }

    /// Sub-circuit on `qubits` (relabelled to `0..qubits.len()` in the given
    /// order). Fails if an op touches a qubit outside the set.
    pub fn restrict(&self, qubits: &[usize]) -> Result<Circuit> {
        let mut map = vec![usize::MAX; self.width];
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.width {
                return Err(Error::IndexOutOfRange {
                    index: q,
                    width: self.width,
                });
            }
            map[q] = i;
        }
        let mut out = Circuit::new(qubits.len())?;
        for op in &self.ops {
            let inside = op.qubits.iter().filter(|&&q| map[q] != usize::MAX).count();
            if inside == 0 {
                continue;
            }
            if inside != op.qubits.len() {
                return Err(Error::BadRange(format!(
                    "{} on {:?} crosses the fragment boundary",
                    op.kind, op.qubits
                )));
            }
            let mut op = op.clone();
            for q in op.qubits.iter_mut() {
                *q = map[*q];
            }
            out.push(op)?;
        }
        Ok(out)
    }
}
