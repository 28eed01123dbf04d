//! Six-term decomposition of `exp(iθ Z⊗Z)` and gate dressings.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind, GateOp};
use crate::error::{Error, Result};

/// Single-qubit operation placed on one side of a cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LocalOp {
    Z,
    Rz(f64),
    /// Z measurement whose eigenvalue multiplies the shot weight.
    MeasureZ,
}

impl LocalOp {
    pub fn gate(self, q: usize, slot: usize) -> GateOp {
        match self {
            LocalOp::Z => GateOp::z(q),
            LocalOp::Rz(t) => GateOp::rz(q, t),
            LocalOp::MeasureZ => GateOp::measure_mid(q, slot),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpdTerm {
    pub coefficient: f64,
    pub side_a: Vec<LocalOp>,
    pub side_b: Vec<LocalOp>,
    pub sign_from_measurement: bool,
}

impl QpdTerm {
    /// Gates realizing this term on qubits `a`/`b`, measurement in `slot`.
    pub fn gates(&self, a: usize, b: usize, slot: usize) -> Vec<GateOp> {
        let side_a = self.side_a.iter().map(|op| op.gate(a, slot));
        let side_b = self.side_b.iter().map(|op| op.gate(b, slot));
        side_a.chain(side_b).collect()
    }
}

/// Decomposition of the channel `ρ ↦ e^{iθZZ} ρ e^{−iθZZ}`.
///
/// Terms in order: identity, `Z⊗Z`, then the four cross terms pairing a
/// sign-carrying measurement with a `∓π/2` Z rotation on the other side.
pub fn qpd_rzz(theta: f64) -> [QpdTerm; 6] {
    let (s, c) = theta.sin_cos();
    let cs = c * s;
    let term = |coefficient, side_a: Vec<LocalOp>, side_b: Vec<LocalOp>| QpdTerm {
        coefficient,
        sign_from_measurement: side_a.contains(&LocalOp::MeasureZ) || side_b.contains(&LocalOp::MeasureZ),
        side_a,
        side_b,
    };
    // exp(±iπ/4 Z) = RZ(∓π/2).
    let plus = LocalOp::Rz(-FRAC_PI_2);
    let minus = LocalOp::Rz(FRAC_PI_2);
    [
        term(c * c, vec![], vec![]),
        term(s * s, vec![LocalOp::Z], vec![LocalOp::Z]),
        term(cs, vec![LocalOp::MeasureZ], vec![plus]),
        term(cs, vec![plus], vec![LocalOp::MeasureZ]),
        term(-cs, vec![LocalOp::MeasureZ], vec![minus]),
        term(-cs, vec![minus], vec![LocalOp::MeasureZ]),
    ]
}

/// Sampling overhead `Σ|c_i| = 1 + 2|sin 2θ|`.
pub fn gamma(theta: f64) -> f64 {
    1.0 + 2.0 * (2.0 * theta).sin().abs()
}

/// A cuttable gate written as `post · exp(iθ Z_a Z_b) · pre`, up to global phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Dressing {
    pub a: usize,
    pub b: usize,
    pub theta: f64,
    pub pre: Vec<GateOp>,
    pub post: Vec<GateOp>,
}

impl Dressing {
    /// The uncut gate sequence, for checking against the original gate.
    pub fn uncut_ops(&self) -> Vec<GateOp> {
        let mut ops = self.pre.clone();
        ops.push(GateOp::rzz(self.a, self.b, -2.0 * self.theta));
        ops.extend(self.post.iter().cloned());
        ops
    }
}

pub fn cut_dress_gate(op: &GateOp) -> Result<Dressing> {
    let uncuttable = || Error::UncuttableGate(op.kind.name().to_string());
    let (a, b) = match op.qubits[..] {
        [a, b] => (a, b),
        _ => return Err(uncuttable()),
    };
    let quarter = std::f64::consts::FRAC_PI_4;
    match op.kind {
        GateKind::Rzz => {
            let phi = op
                .angle()
                .ok_or_else(|| Error::UnboundParameter(format!("RZZ on ({a}, {b})")))?;
            Ok(Dressing { a, b, theta: -phi / 2.0, pre: vec![], post: vec![] })
        }
        GateKind::Cz => Ok(Dressing {
            a,
            b,
            theta: quarter,
            pre: vec![],
            post: vec![GateOp::rz(a, FRAC_PI_2), GateOp::rz(b, FRAC_PI_2)],
        }),
        GateKind::Cnot => Ok(Dressing {
            a,
            b,
            theta: quarter,
            pre: vec![GateOp::h(b)],
            post: vec![GateOp::rz(a, FRAC_PI_2), GateOp::rz(b, FRAC_PI_2), GateOp::h(b)],
        }),
        _ => Err(uncuttable()),
    }
}

/// Expands a decomposition into its ten post-selected cases on a
/// `width`-qubit register: each measured term splits into a `PROJ_PLUS`
/// branch and a sign-flipped `PROJ_MINUS` branch.
pub fn expand_postselected(terms: &[QpdTerm], width: usize, a: usize, b: usize) -> Result<Vec<(f64, Circuit)>> {
    let mut cases = Vec::new();
    for term in terms {
        let branches: &[(f64, bool)] = if term.sign_from_measurement {
            &[(1.0, true), (-1.0, false)]
        } else {
            &[(1.0, true)]
        };
        for &(sign, plus) in branches {
            let mut ops = Vec::new();
            for (side, q) in [(&term.side_a, a), (&term.side_b, b)] {
                for op in side {
                    ops.push(match op {
                        LocalOp::MeasureZ if plus => GateOp::proj_plus(q),
                        LocalOp::MeasureZ => GateOp::proj_minus(q),
                        other => other.gate(q, 0),
                    });
                }
            }
            cases.push((sign * term.coefficient, Circuit::from_ops(width, ops)?));
        }
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{channel_oracle, circuit_unitary_oracle, random_density_matrix};
    use nalgebra::DMatrix;
    use num_complex::Complex64 as C64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn recombined(theta: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(4, 4);
        for (w, c) in expand_postselected(&qpd_rzz(theta), 2, 0, 1).unwrap() {
            out += channel_oracle(&c, rho).unwrap() * C64::new(w, 0.0);
        }
        out
    }

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_angle_is_identity_only() {
        let coeffs: Vec<f64> = qpd_rzz(0.0).iter().map(|t| t.coefficient).collect();
        assert_eq!(coeffs, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn cz_angle_has_equal_magnitudes() {
        let terms = qpd_rzz(std::f64::consts::FRAC_PI_4);
        for t in &terms {
            assert!((t.coefficient.abs() - 0.5).abs() < 1e-15);
        }
        assert!((gamma(std::f64::consts::FRAC_PI_4) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn ten_cases() {
        assert_eq!(expand_postselected(&qpd_rzz(0.3), 2, 0, 1).unwrap().len(), 10);
    }

    #[test]
    fn recombination_matches_exact_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let theta = rng.random_range(-3.2..3.2);
            let gate = Circuit::from_ops(2, [GateOp::rzz(0, 1, -2.0 * theta)]).unwrap();
            for _ in 0..5 {
                let rho = random_density_matrix(2, &mut rng);
                let want = channel_oracle(&gate, &rho).unwrap();
                assert!(max_diff(&recombined(theta, &rho), &want) < 1e-10);
            }
        }
    }

    #[test]
    fn recombination_in_wider_register() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let theta = 0.7;
        let gate = Circuit::from_ops(3, [GateOp::rzz(2, 0, -2.0 * theta)]).unwrap();
        let rho = random_density_matrix(3, &mut rng);
        let mut got = DMatrix::zeros(8, 8);
        for (w, c) in expand_postselected(&qpd_rzz(theta), 3, 2, 0).unwrap() {
            got += channel_oracle(&c, &rho).unwrap() * C64::new(w, 0.0);
        }
        assert!(max_diff(&got, &channel_oracle(&gate, &rho).unwrap()) < 1e-10);
    }

    fn equal_up_to_phase(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        let (i, _) = b.iter().enumerate().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm())).unwrap();
        let phase = a[i] / b[i];
        max_diff(a, &(b * phase))
    }

    #[test]
    fn dressings_reproduce_gates() {
        for (op, n) in [
            (GateOp::cz(0, 1), 2),
            (GateOp::cnot(0, 1), 2),
            (GateOp::cnot(1, 0), 2),
            (GateOp::cnot(2, 0), 3),
            (GateOp::rzz(0, 1, 0.83), 2),
        ] {
            let target = circuit_unitary_oracle(&Circuit::from_ops(n, [op.clone()]).unwrap()).unwrap();
            let d = cut_dress_gate(&op).unwrap();
            let got = circuit_unitary_oracle(&Circuit::from_ops(n, d.uncut_ops()).unwrap()).unwrap();
            assert!(equal_up_to_phase(&got, &target) < 1e-12, "{op:?}");
        }
    }

    #[test]
    fn only_entangling_gates_are_cuttable() {
        assert!(matches!(cut_dress_gate(&GateOp::h(0)), Err(Error::UncuttableGate(_))));
        assert!(cut_dress_gate(&GateOp::symbolic(GateKind::Rzz, vec![0, 1], "t")).is_err());
    }

    proptest! {
        #[test]
        fn coefficient_identities(theta in -10.0..10.0f64) {
            let terms = qpd_rzz(theta);
            let sum: f64 = terms.iter().map(|t| t.coefficient).sum();
            let abs: f64 = terms.iter().map(|t| t.coefficient.abs()).sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!((abs - gamma(theta)).abs() < 1e-12);
        }
    }
}
