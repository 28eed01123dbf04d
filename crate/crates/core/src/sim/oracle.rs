//! Dense matrix oracles used to cross-check the statevector path and the
//! gate decompositions. Gate matrices are built here independently of the
//! in-place kernels.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::circuit::{Circuit, GateKind, GateOp};
use crate::error::{Error, Result};

pub const MAX_UNITARY_WIDTH: usize = 10;
pub const MAX_CHANNEL_WIDTH: usize = 6;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Local matrix of an op; for two-qubit ops the row index is
/// `2·bit(qubits[0]) + bit(qubits[1])`.
fn local_matrix(op: &GateOp) -> Result<DMatrix<C64>> {
    let t = op.angle().unwrap_or(0.0);
    let (s, co) = (t / 2.0).sin_cos();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let m = match op.kind {
        GateKind::Rx => DMatrix::from_row_slice(2, 2, &[c(co, 0.), c(0., -s), c(0., -s), c(co, 0.)]),
        GateKind::Ry => DMatrix::from_row_slice(2, 2, &[c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.)]),
        GateKind::Rz => DMatrix::from_row_slice(2, 2, &[c(co, -s), z, z, c(co, s)]),
        GateKind::H => DMatrix::from_row_slice(2, 2, &[c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)]),
        GateKind::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        GateKind::Y => DMatrix::from_row_slice(2, 2, &[z, c(0., -1.), c(0., 1.), z]),
        GateKind::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        GateKind::ProjPlus => DMatrix::from_row_slice(2, 2, &[o, z, z, z]),
        GateKind::ProjMinus => DMatrix::from_row_slice(2, 2, &[z, z, z, o]),
        GateKind::Cz => DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![o, o, o, -o])),
        GateKind::Rzz => {
            let e = C64::from_polar(1.0, -t / 2.0);
            let d = C64::from_polar(1.0, t / 2.0);
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![e, d, d, e]))
        }
        GateKind::Cnot => {
            let mut m = DMatrix::zeros(4, 4);
            m[(0, 0)] = o;
            m[(1, 1)] = o;
            m[(2, 3)] = o;
            m[(3, 2)] = o;
            m
        }
        GateKind::MeasureZMid => {
            return Err(Error::UnsupportedOp {
                kind: "MEASURE_Z_MID",
                context: "dense oracle",
            })
        }
    };
    Ok(m)
}

/// Embed a local gate matrix into the full `2^n` space.
fn embed(local: &DMatrix<C64>, qubits: &[usize], width: usize) -> DMatrix<C64> {
    let dim = 1usize << width;
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let local_index = |x: usize| -> usize {
        qubits
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | ((x >> q) & 1))
    };
    DMatrix::from_fn(dim, dim, |r, col| {
        if r & !mask != col & !mask {
            c(0.0, 0.0)
        } else {
            local[(local_index(r), local_index(col))]
        }
    })
}

/// Product of gate matrices in circuit order. Widths above
/// [`MAX_UNITARY_WIDTH`] are rejected.
pub fn circuit_unitary_oracle(circuit: &Circuit) -> Result<DMatrix<C64>> {
    circuit.ensure_bound()?;
    let n = circuit.width();
    if n > MAX_UNITARY_WIDTH {
        return Err(Error::BadRange(format!("oracle width {n} > {MAX_UNITARY_WIDTH}")));
    }
    let mut u = DMatrix::<C64>::identity(1 << n, 1 << n);
    for op in circuit.ops() {
        if !op.kind.is_unitary() {
            return Err(Error::UnsupportedOp {
                kind: op.kind.name(),
                context: "unitary oracle",
            });
        }
        u = embed(&local_matrix(op)?, &op.qubits, n) * u;
    }
    Ok(u)
}

/// Apply the circuit as a (possibly trace-decreasing) map on a density
/// matrix: unitaries by conjugation, projectors as `Π ρ Π`.
pub fn channel_oracle(circuit: &Circuit, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    circuit.ensure_bound()?;
    let n = circuit.width();
    if n > MAX_CHANNEL_WIDTH {
        return Err(Error::BadRange(format!("oracle width {n} > {MAX_CHANNEL_WIDTH}")));
    }
    if rho.nrows() != 1 << n || rho.ncols() != 1 << n {
        return Err(Error::DimMismatch {
            expected: 1 << n,
            got: rho.nrows(),
        });
    }
    let mut out = rho.clone();
    for op in circuit.ops() {
        let k = embed(&local_matrix(op)?, &op.qubits, n);
        out = &k * out * k.adjoint();
    }
    Ok(out)
}

/// Random density matrix `G G† / tr(G G†)` from a complex Ginibre matrix.
pub fn random_density_matrix<R: rand::Rng + ?Sized>(width: usize, rng: &mut R) -> DMatrix<C64> {
    use rand_distr::StandardNormal;
    let dim = 1usize << width;
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateOp;

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn empty_circuit_is_identity() {
        let u = circuit_unitary_oracle(&Circuit::new(1).unwrap()).unwrap();
        assert_eq!(u, DMatrix::identity(2, 2));
    }

    #[test]
    fn cnot_is_little_endian_permutation() {
        let u = circuit_unitary_oracle(&Circuit::from_ops(2, [GateOp::cnot(0, 1)]).unwrap()).unwrap();
        // |q1 q0⟩: control q0 set flips q1, so index 1 ↔ 3.
        let perm = [0usize, 3, 2, 1];
        for (col, &row) in perm.iter().enumerate() {
            assert_eq!(u[(row, col)], c(1.0, 0.0));
        }
    }

    #[test]
    fn hadamard_sandwich_turns_cz_into_cnot() {
        let sandwich =
            Circuit::from_ops(2, [GateOp::h(1), GateOp::cz(0, 1), GateOp::h(1)]).unwrap();
        let cnot = Circuit::from_ops(2, [GateOp::cnot(0, 1)]).unwrap();
        let d = max_diff(
            &circuit_unitary_oracle(&sandwich).unwrap(),
            &circuit_unitary_oracle(&cnot).unwrap(),
        );
        assert!(d < 1e-12);
    }

    #[test]
    fn ghz_matches_hand_written_matrix() {
        let ghz = Circuit::from_ops(2, [GateOp::h(0), GateOp::cnot(0, 1)]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            c(h, 0.), c(h, 0.), c(0., 0.), c(0., 0.),
            c(0., 0.), c(0., 0.), c(h, 0.), c(-h, 0.),
            c(0., 0.), c(0., 0.), c(h, 0.), c(h, 0.),
            c(h, 0.), c(-h, 0.), c(0., 0.), c(0., 0.),
        ]);
        assert!(max_diff(&circuit_unitary_oracle(&ghz).unwrap(), &expected) < 1e-12);
    }

    #[test]
    fn projector_halves_maximally_mixed_state() {
        let rho = DMatrix::<C64>::identity(2, 2) * c(0.5, 0.0);
        let out = channel_oracle(&Circuit::from_ops(1, [GateOp::proj_plus(0)]).unwrap(), &rho).unwrap();
        assert!((out.trace().re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unitary_channel_preserves_trace() {
        let mut rng = crate::rng::stream(5, 0);
        let rho = random_density_matrix(2, &mut rng);
        let c2 = Circuit::from_ops(2, [GateOp::h(0), GateOp::cnot(0, 1), GateOp::rzz(0, 1, 0.4)]).unwrap();
        let out = channel_oracle(&c2, &rho).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_rejects_mid_measurement() {
        let c1 = Circuit::from_ops(1, [GateOp::measure_mid(0, 0)]).unwrap();
        assert!(matches!(
            circuit_unitary_oracle(&c1),
            Err(Error::UnsupportedOp { .. })
        ));
    }
}
