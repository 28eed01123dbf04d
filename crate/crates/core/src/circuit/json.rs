//! JSON document form of a [`Circuit`].
//!
//! `{"width": n, "params": [..], "ops": [{"kind", "qubits", "param", "slot"}]}`
//! with `param` a number, `{"ref": name}` or `null`. serde_json prints
//! doubles in shortest round-trip form, so values survive bit-exactly.

use serde::{Deserialize, Serialize};

use super::{Circuit, GateKind, GateOp, Param};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    width: usize,
    params: Vec<String>,
    ops: Vec<OpDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpDoc {
    kind: String,
    qubits: Vec<usize>,
    param: Option<ParamDoc>,
    slot: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ParamDoc {
    Value(f64),
    Ref {
        #[serde(rename = "ref")]
        name: String,
    },
}

impl Circuit {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("circuit documents always serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("circuit documents always serialize")
    }

    fn to_doc(&self) -> CircuitDoc {
        CircuitDoc {
            width: self.width,
            params: self.params.clone(),
            ops: self
                .ops
                .iter()
                .map(|op| OpDoc {
                    kind: op.kind.name().to_string(),
                    qubits: op.qubits.clone(),
                    param: op.param.as_ref().map(|p| match p {
                        Param::Value(v) => ParamDoc::Value(*v),
                        Param::Ref(name) => ParamDoc::Ref { name: name.clone() },
                    }),
                    slot: op.slot,
                })
                .collect(),
        }
    }

    /// Parse and validate a circuit document.
    pub fn from_json(text: &str) -> Result<Circuit> {
        let doc: CircuitDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut c = Circuit::new(doc.width)?;
        for name in &doc.params {
            if c.params.contains(name) {
                return Err(Error::Parse(format!("duplicate parameter `{name}`")));
            }
            c.declare_param(name.clone());
        }
        for op in doc.ops {
            let kind = GateKind::from_name(&op.kind)
                .ok_or_else(|| Error::Parse(format!("unknown gate kind `{}`", op.kind)))?;
            let param = op.param.map(|p| match p {
                ParamDoc::Value(v) => Param::Value(v),
                ParamDoc::Ref { name } => Param::Ref(name),
            });
            if let Some(Param::Ref(name)) = &param {
                if !doc.params.contains(name) {
                    return Err(Error::UnboundParameter(name.clone()));
                }
            }
            c.push(GateOp {
                kind,
                qubits: op.qubits,
                param,
                slot: op.slot,
            })?;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ghz_roundtrip_and_layout() {
        let c = Circuit::from_ops(2, [GateOp::h(0), GateOp::cnot(0, 1)]).unwrap();
        let text = c.to_json();
        assert_eq!(
            text,
            r#"{"width":2,"params":[],"ops":[{"kind":"H","qubits":[0],"param":null,"slot":null},{"kind":"CNOT","qubits":[0,1],"param":null,"slot":null}]}"#
        );
        assert_eq!(Circuit::from_json(&text).unwrap(), c);
    }

    #[test]
    fn symbols_survive_roundtrip() {
        let mut c = Circuit::new(2).unwrap();
        c.push(GateOp::symbolic(GateKind::Rzz, vec![0, 1], "w")).unwrap();
        c.push(GateOp::measure_mid(1, 3)).unwrap();
        let back = Circuit::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(c.to_json().contains(r#"{"ref":"w"}"#));
    }

    #[test]
    fn malformed_documents_are_rejected() {
        let unknown = r#"{"width":1,"params":[],"ops":[{"kind":"SWAP","qubits":[0],"param":null,"slot":null}]}"#;
        assert!(matches!(Circuit::from_json(unknown), Err(Error::Parse(_))));
        assert!(matches!(Circuit::from_json("{"), Err(Error::Parse(_))));
        let dangling = r#"{"width":1,"params":[],"ops":[{"kind":"RX","qubits":[0],"param":{"ref":"a"},"slot":null}]}"#;
        assert!(matches!(
            Circuit::from_json(dangling),
            Err(Error::UnboundParameter(_))
        ));
        let oob = r#"{"width":1,"params":[],"ops":[{"kind":"H","qubits":[3],"param":null,"slot":null}]}"#;
        assert!(matches!(
            Circuit::from_json(oob),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    fn arb_op(width: usize) -> impl Strategy<Value = GateOp> {
        let q = 0..width;
        let pair = (0..width, 0..width).prop_filter("distinct", |(a, b)| a != b);
        prop_oneof![
            (q.clone(), any::<f64>().prop_filter("finite", |v| v.is_finite()))
                .prop_map(|(q, t)| GateOp::rx(q, t)),
            (q.clone(), -10.0..10.0f64).prop_map(|(q, t)| GateOp::rz(q, t)),
            (q.clone(), "[a-z]{1,3}")
                .prop_map(|(q, s)| GateOp::symbolic(GateKind::Ry, vec![q], s)),
            q.clone().prop_map(GateOp::h),
            (q.clone(), 0..8usize).prop_map(|(q, s)| GateOp::measure_mid(q, s)),
            pair.clone().prop_map(|(a, b)| GateOp::cnot(a, b)),
            (pair, -3.0..3.0f64).prop_map(|((a, b), t)| GateOp::rzz(a, b, t)),
        ]
    }

    proptest! {
        #[test]
        fn serialize_parse_is_identity(ops in prop::collection::vec(arb_op(4), 0..24)) {
            let c = Circuit::from_ops(4, ops).unwrap();
            prop_assert_eq!(Circuit::from_json(&c.to_json()).unwrap(), c);
        }
    }
}
